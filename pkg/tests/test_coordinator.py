"""Tests for the trusted setup: permutations, reversing matrices and initial storage."""

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from client.client_session import build_plain_query, decoder_for
from coordinator.setup_coordinator import (
    CoordinatorSpentError,
    Permutation,
    SetupCoordinator,
    build_reversing_matrix,
    encode_storage,
    sample_permutation,
)
from database.database_server import DatabaseServer
from field.linear_algebra import eval_poly
from field.noise import NoisePolicy, noise_stream
from field.prime_field import DimensionError, PrimeField, to_ints


def _models(params, seed=0):
    return params.field.random_array(np.random.default_rng(seed), (params.M, params.P, params.ell))


class TestPermutation:

    def test_golden_mapping(self):
        perm = Permutation((2, 5, 1, 3, 4))
        assert [perm(i) for i in range(1, 6)] == [2, 5, 1, 3, 4]
        assert perm.inverse(1) == 3
        assert perm.inverse(4) == 5

    def test_rejects_non_bijection(self):
        with pytest.raises(ValueError):
            Permutation((1, 1, 2))

    @given(st.integers(min_value=1, max_value=12), st.integers(min_value=0))
    def test_inverse_round_trip(self, size, seed):
        perm = Permutation.random(size, np.random.default_rng(seed))
        for i in range(1, size + 1):
            assert perm(perm.inverse(i)) == i
            assert perm.inverse(perm(i)) == i

    def test_enumerate_all(self):
        assert len(set(Permutation.enumerate_all(4))) == 24

    def test_reversing_matrix_restores_true_order(self):
        F = PrimeField(11)
        perm = Permutation((2, 5, 1, 3, 4))
        true_values = [10, 20, 30, 40, 50]
        permuted = F.vector([true_values[perm(i) - 1] for i in range(1, 6)])
        assert perm.reversing_matrix(F).matvec(permuted).to_list() == [v % 11 for v in true_values]

    def test_published_permutation_is_identity(self):
        policy = NoisePolicy.from_sabotage('published-permutation')
        assert sample_permutation(6, noise_stream(1, 'permutation'), policy) == Permutation.identity(6)


class TestSetup:

    def test_reversing_matrices_share_noise(self, small_params):
        result = SetupCoordinator(small_params).setup(_models(small_params))
        field = small_params.field
        R = result.permutation_handout.reversing_matrix(field)
        noise = None
        for state, c_n in zip(result.databases, small_params.scaling_constants):
            scaled = (state.reversing_matrix - R).scale(field.inv(c_n))
            if noise is None:
                noise = scaled
            assert scaled == noise

    def test_reversing_matrices_match_builder(self, small_params):
        result = SetupCoordinator(small_params).setup(_models(small_params))
        field = small_params.field
        R = result.permutation_handout.reversing_matrix(field)
        first = result.databases[0]
        c_1 = small_params.scaling_constants[0]
        z_bar = (first.reversing_matrix - R).scale(field.inv(c_1))
        for state in result.databases:
            assert state.reversing_matrix == build_reversing_matrix(R, z_bar, small_params.f, state.alpha_n)

    def test_storage_decodes_to_models(self, small_params):
        models = _models(small_params, seed=3)
        result = SetupCoordinator(small_params).setup(models)
        p = small_params
        servers = [DatabaseServer(p, state) for state in result.databases]
        decoder = decoder_for(p.q, p.f, p.alpha)
        for theta in range(1, p.M + 1):
            queries = [build_plain_query(p.field, p.f, s.state.alpha_n, theta, p.M) for s in servers]
            for s in range(1, p.P + 1):
                answers = [server.verifier_read_subpacket(query, s).value for server, query in zip(servers, queries)]
                assert decoder.decode(answers).to_list() == to_ints(models[theta - 1, s - 1]).tolist()

    def test_storage_layout(self):
        F = PrimeField(13)
        models = np.arange(2 * 3 * 2).reshape(2, 3, 2)
        noise = np.random.default_rng(0).integers(0, 13, (3, 2, 2, 5))
        storage = to_ints(encode_storage(F, models, noise, (0, 4), 7))
        assert storage.shape == (3, 4)
        # column (k-1)*M + (m-1): bit k of submodel m
        for s in range(3):
            for k, f_k in enumerate((0, 4)):
                for m in range(2):
                    masked = (f_k - 7) * int(eval_poly(F.vector(noise[s, k, m]), 7))
                    assert storage[s, k * 2 + m] == (models[m, s, k] + masked) % 13

    def test_zero_storage_noise_exposes_models(self, small_params):
        models = _models(small_params, seed=4)
        policy = NoisePolicy.from_sabotage('zero-storage-noise')
        result = SetupCoordinator(small_params, noise_policy=policy).setup(models)
        first = result.databases[0].storage
        assert np.array_equal(to_ints(first[:, 0]), to_ints(models[0, :, 0]))

    def test_fixed_permutation_is_used(self, golden_params):
        perm = Permutation((2, 5, 1, 3, 4))
        result = SetupCoordinator(golden_params).setup(_models(golden_params), perm)
        assert result.permutation_handout == perm

    def test_wrong_permutation_size(self, small_params):
        with pytest.raises(DimensionError):
            SetupCoordinator(small_params).setup(_models(small_params), Permutation.identity(4))

    def test_wrong_model_shape(self, small_params):
        with pytest.raises(DimensionError):
            SetupCoordinator(small_params).setup(np.zeros((1, 1, 1), dtype=np.int64))

    def test_coordinator_runs_once(self, small_params):
        coordinator = SetupCoordinator(small_params)
        coordinator.setup(_models(small_params))
        with pytest.raises(CoordinatorSpentError):
            coordinator.setup(_models(small_params))

    def test_build_reversing_matrix_shape_check(self):
        F = PrimeField(7)
        with pytest.raises(DimensionError):
            build_reversing_matrix(F.identity(3), F.identity(2), (0,), 1)
