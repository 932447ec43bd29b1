"""
Setup Coordinator for the PRUW simulator.
One-shot trusted setup: samples the secret subpacket permutation, builds
each database's noise-masked permutation-reversing matrix and initializes
consistent noisy storage across all databases. The coordinator refuses
to run twice and keeps nothing once setup returns.
"""

from dataclasses import dataclass
from itertools import permutations as all_orderings
from typing import Iterator, List, Optional, Sequence, Tuple

import galois
import numpy as np

from database.database_server import DatabaseState
from field.linear_algebra import eval_poly_many, vanishing_product
from field.noise import NoisePolicy, noise_stream
from field.prime_field import DimensionError, FieldMatrix, PrimeField
from params.system_params import ValidatedParams


class CoordinatorSpentError(RuntimeError):
    """Setup already ran; the coordinator holds no secrets any more."""


@dataclass(frozen=True)
class Permutation:
    """
    Bijection P~ on {1..P}; mapping[i-1] = P~(i).

    Permuted position i carries true subpacket P~(i), so a true index s
    travels at permuted position P~^-1(s).
    """
    mapping: Tuple[int, ...]

    def __post_init__(self):
        if sorted(self.mapping) != list(range(1, len(self.mapping) + 1)):
            raise ValueError(f"Not a permutation of 1..{len(self.mapping)}: {self.mapping}")

    @classmethod
    def identity(cls, size: int) -> 'Permutation':
        return cls(tuple(range(1, size + 1)))

    @classmethod
    def random(cls, size: int, rng: np.random.Generator) -> 'Permutation':
        """Uniform over all size! orderings."""
        return cls(tuple(int(v) + 1 for v in rng.permutation(size)))

    @classmethod
    def enumerate_all(cls, size: int) -> Iterator['Permutation']:
        for ordering in all_orderings(range(1, size + 1)):
            yield cls(tuple(ordering))

    @property
    def size(self) -> int:
        return len(self.mapping)

    def __call__(self, i: int) -> int:
        return self.mapping[i - 1]

    def inverse(self, s: int) -> int:
        return self.mapping.index(s) + 1

    def reversing_matrix(self, field: PrimeField) -> FieldMatrix:
        """R with R[s, k] = 1 iff P~(k) = s, so (R u^)[s] = u[s]."""
        R = np.zeros((self.size, self.size), dtype=np.int64)
        for k, s in enumerate(self.mapping):
            R[s - 1, k] = 1
        return field.matrix(R)


@dataclass(frozen=True)
class SetupResult:
    permutation_handout: Permutation
    databases: Tuple[DatabaseState, ...]


def build_reversing_matrix(R: FieldMatrix, z_bar: FieldMatrix, f: Sequence[int],
                           alpha_n: int) -> FieldMatrix:
    """R_n = R + prod_i (f_i - alpha_n) * Z_bar."""
    if R.shape != z_bar.shape or R.rows != R.cols:
        raise DimensionError(f"Reversing matrix shapes differ: {R.shape} vs {z_bar.shape}")
    return R + z_bar.scale(vanishing_product(PrimeField(R.modulus), f, alpha_n))


def encode_storage(field: PrimeField, models, noise,
                   f: Sequence[int], alpha_n: int) -> galois.FieldArray:
    """
    Noisy storage of one database.

    Args:
        models: (M, P, ell) submodel contents
        noise: (P, ell, M, 2*ell+1) noise coefficients, shared by all databases
        f: the ell f constants
        alpha_n: this database's evaluation point

    Returns:
        (P, M*ell) array; column (k-1)*M + (m-1) holds bit k of submodel m
    """
    models = field.array(models)
    M, P, ell = models.shape
    polys = eval_poly_many(noise, alpha_n, field)                   # (P, ell, M)
    scale = field.array(list(f)) - field.array(alpha_n)
    masked = polys * scale[np.newaxis, :, np.newaxis]
    plain = np.transpose(models, (1, 2, 0))                          # (P, ell, M)
    return (plain + masked).reshape(P, ell * M)


def sample_permutation(size: int, rng: np.random.Generator,
                       noise_policy: NoisePolicy = NoisePolicy()) -> Permutation:
    """Uniform P~, or the identity when the permutation is published."""
    if noise_policy.published_permutation:
        return Permutation.identity(size)
    return Permutation.random(size, rng)


class SetupCoordinator:
    """Trusted, setup-only actor."""

    def __init__(self, params: ValidatedParams, logger=None, noise_policy: NoisePolicy = NoisePolicy()):
        self.params = params
        self.logger = logger
        self.noise_policy = noise_policy
        self._spent = False

    def sample_permutation(self, rng: np.random.Generator) -> Permutation:
        return sample_permutation(self.params.P, rng, self.noise_policy)

    def setup(self, initial_models,
              permutation: Optional[Permutation] = None) -> SetupResult:
        """
        Run the one-time setup.

        Args:
            initial_models: (M, P, ell) field array of submodel contents
            permutation: fixed P~ (golden runs); sampled when None

        Returns:
            SetupResult with the clients' P~ handout and every DatabaseState
        """
        if self._spent:
            raise CoordinatorSpentError("Coordinator setup already ran")
        p = self.params
        field = p.field
        models = field.array(initial_models)
        if models.shape != (p.M, p.P, p.ell):
            raise DimensionError(
                f"initial_models has shape {models.shape}, expected {(p.M, p.P, p.ell)}"
            )
        if permutation is None:
            permutation = self.sample_permutation(noise_stream(p.seed, 'permutation'))
        elif permutation.size != p.P:
            raise DimensionError(f"Permutation has size {permutation.size}, expected P={p.P}")

        R = permutation.reversing_matrix(field)
        z_bar = field.matrix(self.noise_policy.sample(
            'reversing', field, noise_stream(p.seed, 'reversing_noise'), (p.P, p.P)))
        storage_noise = self.noise_policy.sample(
            'storage', field, noise_stream(p.seed, 'storage_noise'),
            (p.P, p.ell, p.M, p.noise_degree + 1))

        databases: List[DatabaseState] = []
        for n, alpha_n in enumerate(p.alpha, start=1):
            R_n = build_reversing_matrix(R, z_bar, p.f, alpha_n)
            databases.append(DatabaseState(
                n=n,
                alpha_n=alpha_n,
                storage=encode_storage(field, models, storage_noise, p.f, alpha_n),
                reversing_matrix=R_n,
            ))

        # Nothing secret outlives setup.
        del R, z_bar, storage_noise
        self._spent = True

        if self.logger:
            self.logger.info(
                f"Setup complete: {p.N} databases, {p.M} submodels x {p.P} subpackets x ℓ={p.ell}"
            )

        return SetupResult(
            permutation_handout=permutation,
            databases=tuple(databases),
        )
