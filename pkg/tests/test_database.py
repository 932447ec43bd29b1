"""Tests for the database server: read answers, write collection, V~ bookkeeping."""

from collections import Counter
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from conftest import make_params
from coordinator.setup_coordinator import Permutation, SetupCoordinator
from database.database_server import (
    DatabaseServer,
    ProtocolError,
    ReadQuery,
    WritePair,
    compute_v_tilde,
    truncate_v_tilde,
)
from field.noise import NoisePolicy
from field.prime_field import FieldElement, FieldVector, to_ints

GOLDEN_PERMUTATION = Permutation((2, 5, 1, 3, 4))


@pytest.fixture
def servers(small_params):
    models = small_params.field.random_array(np.random.default_rng(2), (2, 5, 1))
    result = SetupCoordinator(small_params).setup(models, GOLDEN_PERMUTATION)
    return [DatabaseServer(small_params, state) for state in result.databases]


def _server(seed, policy=NoisePolicy()):
    params = make_params(seed=seed)
    models = params.field.random_array(np.random.default_rng(seed), (params.M, params.P, params.ell))
    result = SetupCoordinator(params, noise_policy=policy).setup(models, GOLDEN_PERMUTATION)
    return params, DatabaseServer(params, result.databases[seed % params.N])


def _random_query(params, rng):
    return ReadQuery(params.field.vector(params.field.random_array(rng, params.M * params.ell)))


def _pair(value, position, q=2053):
    return WritePair(FieldElement(value, q), position)


class TestReads:

    def test_query_length_checked(self, servers):
        with pytest.raises(ProtocolError):
            servers[0].answer_read(ReadQuery(FieldVector([1, 2, 3], 2053)), 1)

    def test_index_range_checked(self, servers):
        query = ReadQuery(FieldVector([1, 2], 2053))
        with pytest.raises(ProtocolError):
            servers[0].answer_read(query, 0)
        with pytest.raises(ProtocolError):
            servers[0].answer_read(query, 6)

    def test_answer_is_storage_times_expanded_query(self, servers):
        server = servers[2]
        query = ReadQuery(FieldVector([7, 11], 2053))
        expanded = server.expand_query(query, 3)
        assert len(expanded) == 5 * 2
        stored = to_ints(server.state.storage).reshape(-1).tolist()
        expected = sum(a * b for a, b in zip(stored, expanded.to_list())) % 2053
        assert server.answer_read(query, 3).value == expected

    @given(st.integers(min_value=0, max_value=50), st.integers(min_value=1, max_value=5), st.integers())
    def test_answer_is_linear_in_the_query(self, seed, entry, scalar):
        params, server = _server(seed)
        rng = np.random.default_rng(seed)
        q1, q2 = _random_query(params, rng), _random_query(params, rng)
        combined = ReadQuery(q1.q_vec + q2.q_vec.scale(scalar))
        expected = server.answer_read(q1, entry) + server.answer_read(q2, entry) * scalar
        assert server.answer_read(combined, entry) == expected

    def test_verifier_read_skips_only_the_reversing_matrix(self):
        """With Z_bar zeroed, reading permuted entry v equals the back door at true index P~(v)."""
        params, server = _server(3, NoisePolicy.from_sabotage('published-permutation'))
        query = _random_query(params, np.random.default_rng(9))
        for v in range(1, params.P + 1):
            assert server.answer_read(query, v) == server.verifier_read_subpacket(query, GOLDEN_PERMUTATION(v))

    def test_verifier_read_checks_its_inputs(self, servers):
        with pytest.raises(ProtocolError):
            servers[0].verifier_read_subpacket(ReadQuery(FieldVector([1, 2], 2053)), 6)
        with pytest.raises(ProtocolError):
            servers[0].verifier_read_subpacket(ReadQuery(FieldVector([1], 2053)), 1)


class TestWrites:

    def test_collect_write_places_symbols(self, servers):
        u_tilde = servers[0].collect_write([_pair(9, 3), _pair(4, 5)], 'user001')
        assert u_tilde.to_list() == [0, 0, 9, 0, 4]
        assert servers[0].local_union() == (3, 5)

    def test_wrong_pair_count(self, servers):
        with pytest.raises(ProtocolError):
            servers[0].collect_write([_pair(9, 3)], 'user001')

    def test_duplicate_positions(self, servers):
        with pytest.raises(ProtocolError) as exc:
            servers[0].collect_write([_pair(9, 3), _pair(4, 3)], 'user001')
        assert "duplicate" in str(exc.value)

    def test_position_out_of_range(self, servers):
        with pytest.raises(ProtocolError):
            servers[0].collect_write([_pair(9, 3), _pair(4, 6)], 'user001')

    def test_noise_free_reordering(self, small_params):
        """With Z_bar zeroed, T_n is U~ put back into true order."""
        models = np.zeros((2, 5, 1), dtype=np.int64)
        policy = NoisePolicy.from_sabotage('published-permutation')
        result = SetupCoordinator(small_params, noise_policy=policy).setup(models, Permutation((2, 5, 1, 3, 4)))
        server = DatabaseServer(small_params, result.databases[0])
        # published-permutation zeroes Z_bar but the fixed permutation is kept
        u_tilde = server.collect_write([_pair(9, 3), _pair(4, 5)], 'user001')
        assert server.reordered_update(u_tilde).to_list() == [9, 0, 0, 4, 0]

    def test_apply_write_only_touches_updated_rows(self, small_params):
        models = np.zeros((2, 5, 1), dtype=np.int64)
        policy = NoisePolicy.from_sabotage('published-permutation')
        result = SetupCoordinator(small_params, noise_policy=policy).setup(models, Permutation((2, 5, 1, 3, 4)))
        server = DatabaseServer(small_params, result.databases[0])
        before = server.state.storage.copy()
        u_tilde = server.collect_write([_pair(9, 3), _pair(4, 5)], 'user001')
        increments = server.apply_write(u_tilde, ReadQuery(FieldVector([1, 0], 2053)))
        assert np.count_nonzero(increments[[1, 2, 4]]) == 0
        assert np.count_nonzero(increments[0]) > 0 and np.count_nonzero(increments[3]) > 0
        assert np.array_equal(before + increments, server.state.storage)

    @given(st.integers(min_value=0, max_value=50))
    def test_writes_commute(self, seed):
        params, server = _server(seed)
        rng = np.random.default_rng(seed + 1)
        field = params.field
        first = (field.vector(field.random_array(rng, params.P)), _random_query(params, rng))
        second = (field.vector(field.random_array(rng, params.P)), _random_query(params, rng))
        start = server.snapshot_state()
        server.apply_write(*first)
        server.apply_write(*second)
        forward = server.state.storage.copy()
        server.restore_state(start)
        server.apply_write(*second)
        server.apply_write(*first)
        assert np.array_equal(forward, server.state.storage)

    def test_snapshot_restore(self, servers):
        server = servers[0]
        snapshot = server.snapshot_state()
        u_tilde = server.collect_write([_pair(9, 3), _pair(4, 5)], 'user001')
        server.apply_write(u_tilde, ReadQuery(FieldVector([1, 2], 2053)))
        server.restore_state(snapshot)
        assert np.array_equal(server.state.storage, snapshot.storage)
        assert server.local_union() == ()


class TestVTilde:

    def test_union_across_writers(self, servers):
        for server in servers:
            server.collect_write([_pair(1, 3), _pair(1, 5)], 'user001')
            server.collect_write([_pair(1, 1), _pair(1, 3)], 'user002')
        assert compute_v_tilde(servers) == (1, 3, 5)
        assert all(server.state.v_tilde == (1, 3, 5) for server in servers)

    def test_begin_round_clears_positions(self, servers):
        servers[0].collect_write([_pair(1, 3), _pair(1, 5)], 'user001')
        servers[0].begin_round()
        assert servers[0].local_union() == ()

    def test_disagreement_is_detected(self, servers):
        servers[0].collect_write([_pair(1, 3), _pair(1, 5)], 'user001')
        with pytest.raises(ProtocolError):
            compute_v_tilde(servers)

    def test_no_writers_gives_empty_set(self, servers):
        assert compute_v_tilde(servers) == ()

    def test_truncation_prefers_most_updated_then_lowest(self):
        counts = Counter({1: 1, 2: 3, 3: 1, 4: 2, 5: 1})
        assert truncate_v_tilde((1, 2, 3, 4, 5), counts, 5, Fraction(3, 5)) == (1, 2, 4)
        assert truncate_v_tilde((1, 2, 3, 4, 5), counts, 5, 0) == ()
