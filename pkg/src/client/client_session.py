"""
Client Session for the PRUW simulator.
A user working on one submodel: builds the private read query sent to
every database, maps the published permuted index set back to true
subpacket indices, and decodes each subpacket from the N answers.
"""

from functools import cached_property, lru_cache
from typing import Dict, Iterable, Optional, Sequence, Tuple

import galois
import numpy as np

from coordinator.setup_coordinator import Permutation
from database.database_server import ProtocolError, ReadQuery
from field.linear_algebra import invert_matrix, power_row
from field.noise import NoisePolicy, noise_stream
from field.prime_field import DimensionError, FieldMatrix, FieldVector, PrimeField
from params.system_params import ValidatedParams


def query_vector(field: PrimeField, f: Sequence[int], alpha_n: int, theta: int, M: int,
                 noise) -> galois.FieldArray:
    """
    Q_n = [e_theta/(f_i - alpha_n) + Z~_i]_{i=1..ell}.

    Args:
        noise: (..., ell, M) query noise; leading axes are carried through
               so a whole batch of realizations can be built at once

    Returns:
        (..., ell*M) array, block i occupying columns i*M..(i+1)*M-1
    """
    noise = field.array(noise)
    ell = len(f)
    if noise.shape[-2:] != (ell, M):
        raise DimensionError(f"Query noise has trailing shape {noise.shape[-2:]}, expected {(ell, M)}")
    signal = field.GF.Zeros((ell, M))
    signal[:, theta - 1] = field.GF(1) / (field.array(list(f)) - field.array(alpha_n))
    combined = noise + signal
    return combined.reshape(noise.shape[:-2] + (ell * M,))


def build_plain_query(field: PrimeField, f: Sequence[int], alpha_n: int, theta: int, M: int) -> ReadQuery:
    """Noise-free query, used by the verifier only."""
    zeros = field.GF.Zeros((len(f), M))
    return ReadQuery(FieldVector(query_vector(field, f, alpha_n, theta, M, zeros), field.q))


class CauchyVandermondeDecoder:
    """
    Row n: [1/(f_1-a_n) .. 1/(f_ell-a_n), 1, a_n, .., a_n^(3*ell+1)].

    The matrix is square (N = 4*ell + 2) and invertible for distinct
    constants with f_i != a_n; its inverse is computed once per constant set.
    """

    def __init__(self, field: PrimeField, f: Tuple[int, ...], alpha: Tuple[int, ...]):
        self.field = field
        self.f = f
        self.alpha = alpha
        self.ell = len(f)
        self.matrix = self._build_matrix()
        self.inverse = invert_matrix(self.matrix)

    def _build_matrix(self) -> FieldMatrix:
        vandermonde_degree = 3 * self.ell + 1
        rows = []
        for a in self.alpha:
            cauchy = [self.field.inv(fi - a) for fi in self.f]
            rows.append(cauchy + power_row(a, vandermonde_degree, self.field))
        matrix = self.field.matrix(rows)
        if matrix.rows != matrix.cols:
            raise DimensionError(
                f"Decoder needs N = 4ℓ+2 answers; got {matrix.rows} for ℓ={self.ell}"
            )
        return matrix

    def decode(self, answers: Sequence[int]) -> FieldVector:
        """Return the ell subpacket symbols (w_1..w_ell) from the N answers."""
        values = self.field.array([int(a) for a in answers])
        if values.shape[0] != self.matrix.rows:
            raise DimensionError(f"Expected {self.matrix.rows} answers, got {values.shape[0]}")
        solution = self.inverse.array @ values[:, np.newaxis]
        return FieldVector(solution[:self.ell, 0], self.field.q)


@lru_cache(maxsize=64)
def decoder_for(q: int, f: Tuple[int, ...], alpha: Tuple[int, ...]) -> CauchyVandermondeDecoder:
    return CauchyVandermondeDecoder(PrimeField(q), f, alpha)


class ClientSession:
    """One user, one submodel theta, any number of rounds."""

    def __init__(self, session_id: str, theta: int, permutation: Permutation,
                 params: ValidatedParams, noise_policy: NoisePolicy = NoisePolicy(), logger=None):
        if not 1 <= theta <= params.M:
            raise ValueError(f"Submodel index {theta} outside 1..{params.M}")
        if permutation.size != params.P:
            raise DimensionError(f"Permutation has size {permutation.size}, expected P={params.P}")
        self.session_id = session_id
        self.theta = theta
        self.permutation = permutation
        self.params = params
        self.noise_policy = noise_policy
        self.logger = logger
        self.round: Optional[int] = None
        self.decoded_subpackets: Dict[int, FieldVector] = {}
        self._query_noise: Optional[galois.FieldArray] = None

    @cached_property
    def decoder(self) -> CauchyVandermondeDecoder:
        p = self.params
        return decoder_for(p.q, p.f, p.alpha)

    def begin_round(self, round_index: int):
        """Draw this round's query noise Z~ (shared by all N queries) and drop stale decodes."""
        if self.round == round_index:
            return
        p = self.params
        rng = noise_stream(p.seed, f'query:{self.session_id}', round_index)
        self._query_noise = self.noise_policy.sample('query', p.field, rng, (p.ell, p.M))
        self.decoded_subpackets = {}
        self.round = round_index

    def _require_round(self):
        if self.round is None:
            raise RuntimeError(f"Session {self.session_id} has no open round")

    def build_query(self, n: int) -> ReadQuery:
        self._require_round()
        p = self.params
        if not 1 <= n <= p.N:
            raise ProtocolError(f"Database index {n} outside 1..{p.N}")
        values = query_vector(p.field, p.f, p.alpha[n - 1], self.theta, p.M, self._query_noise)
        return ReadQuery(FieldVector(values, p.q))

    def true_positions_from_v_tilde(self, v_tilde: Iterable[int]) -> Tuple[int, ...]:
        """V(i) = P~(V~(i)), in the order given."""
        positions = []
        for k in v_tilde:
            if not 1 <= k <= self.params.P:
                raise ProtocolError(f"Permuted index {k} outside 1..{self.params.P}")
            positions.append(self.permutation(k))
        return tuple(positions)

    def decode_subpacket(self, answers: Sequence, true_index: int) -> FieldVector:
        if len(answers) != self.params.N:
            raise ProtocolError(f"Expected {self.params.N} answers, got {len(answers)}")
        bits = self.decoder.decode(answers)
        self.decoded_subpackets[true_index] = bits
        if self.logger:
            self.logger.debug(f"{self.session_id}: decoded subpacket {true_index} of submodel {self.theta}")
        return bits

    def update_noise(self) -> galois.FieldArray:
        """Z^_s for s = 1..P, fresh per round and shared by all databases."""
        self._require_round()
        p = self.params
        rng = noise_stream(p.seed, f'update:{self.session_id}', self.round)
        return self.noise_policy.sample('update', p.field, rng, (p.P,))
