"""
Database Server for the PRUW simulator.
One non-colluding database: holds noisy storage S_n and its reversing
matrix R_n, answers private read queries, rebuilds sparse writes from
(update, position) pairs and folds them into storage, and tracks the
permuted positions written each round.
"""

from collections import Counter
from dataclasses import dataclass, field
from typing import Dict, FrozenSet, Iterable, Sequence, Tuple

import galois
import numpy as np

from field.prime_field import FieldElement, FieldMatrix, FieldVector
from params.system_params import ValidatedParams


class ProtocolError(ValueError):
    """A message violates the protocol (bad index, duplicate position, wrong size)."""


@dataclass(frozen=True)
class ReadQuery:
    """Q_n: the M*ell query vector a user sends to one database."""
    q_vec: FieldVector


@dataclass(frozen=True)
class WritePair:
    """(U^_n[j], k[j]): one sparse update symbol and its permuted position."""
    update_symbol: FieldElement
    permuted_position: int


@dataclass
class DatabaseState:
    """Everything database n holds."""
    n: int
    alpha_n: int
    storage: galois.FieldArray
    reversing_matrix: FieldMatrix
    prev_round_positions: Dict[str, FrozenSet[int]] = field(default_factory=dict)
    v_tilde: Tuple[int, ...] = ()

    def copy(self) -> 'DatabaseState':
        return DatabaseState(
            n=self.n,
            alpha_n=self.alpha_n,
            storage=self.storage.copy(),
            reversing_matrix=self.reversing_matrix,
            prev_round_positions=dict(self.prev_round_positions),
            v_tilde=self.v_tilde,
        )


class DatabaseServer:
    """Serves one DatabaseState; never sees theta, P~, true positions or raw deltas."""

    def __init__(self, params: ValidatedParams, state: DatabaseState, logger=None):
        self.params = params
        self.state = state
        self.logger = logger
        field = params.field
        # D_n diagonal: (f_k - alpha_n) repeated over the M entries of block k.
        self._scaling_diagonal = np.repeat(field.array(list(params.f)) - field.array(state.alpha_n), params.M)

    @property
    def n(self) -> int:
        return self.state.n

    def snapshot_state(self) -> DatabaseState:
        return self.state.copy()

    def restore_state(self, snapshot: DatabaseState):
        self.state = snapshot.copy()

    def _check_query(self, query: ReadQuery) -> galois.FieldArray:
        expected = self.params.M * self.params.ell
        if len(query.q_vec) != expected:
            raise ProtocolError(f"Query has length {len(query.q_vec)}, expected M·ℓ={expected}")
        return query.q_vec.array

    def _check_position(self, index: int, what: str):
        if not 1 <= index <= self.params.P:
            raise ProtocolError(f"{what} {index} outside 1..{self.params.P}")

    def expand_query(self, query: ReadQuery, v_tilde_entry: int) -> FieldVector:
        """Q_n^[V(i)]: the query scaled by each entry of column v_tilde_entry of R_n, stacked."""
        q_vec = self._check_query(query)
        self._check_position(v_tilde_entry, "Permuted index")
        column = self.state.reversing_matrix.array[:, v_tilde_entry - 1]
        return FieldVector((column[:, np.newaxis] * q_vec[np.newaxis, :]).reshape(-1), self.params.q)

    def answer_read(self, query: ReadQuery, v_tilde_entry: int) -> FieldElement:
        """A_n^[V(i)] = S_n^T Q_n^[V(i)], a single symbol."""
        expanded = self.expand_query(query, v_tilde_entry)
        stored = FieldVector(self.state.storage.reshape(-1), self.params.q)
        return stored.dot(expanded)

    def verifier_read_subpacket(self, query: ReadQuery, true_index: int) -> FieldElement:
        """
        Verifier-only back door: read true subpacket `true_index` without R_n.

        Users never call this. They only know permuted positions at the
        database interface and always go through answer_read.
        """
        self._check_query(query)
        self._check_position(true_index, "Subpacket index")
        return FieldVector(self.state.storage[true_index - 1], self.params.q).dot(query.q_vec)

    def collect_write(self, pairs: Sequence[WritePair], writer_id: str) -> FieldVector:
        """
        Rebuild U~_n from (update, position) pairs and record J for the writer.

        Returns:
            U~_n of length P, zeros at unlisted positions
        """
        expected = self.params.writes_per_user
        if len(pairs) != expected:
            raise ProtocolError(
                f"Writer {writer_id} sent {len(pairs)} pairs to database {self.n}, expected P·r={expected}"
            )
        positions = [p.permuted_position for p in pairs]
        duplicates = sorted(k for k, c in Counter(positions).items() if c > 1)
        if duplicates:
            raise ProtocolError(f"Writer {writer_id} sent duplicate positions {duplicates}")
        u_tilde = self.params.field.GF.Zeros(self.params.P)
        for pair in pairs:
            self._check_position(pair.permuted_position, "Write position")
            u_tilde[pair.permuted_position - 1] = pair.update_symbol.value
        self.state.prev_round_positions[writer_id] = frozenset(positions)
        if self.logger:
            self.logger.debug(f"DB {self.n}: collected {len(pairs)} pairs from {writer_id}")
        return FieldVector(u_tilde, self.params.q)

    def apply_write(self, u_tilde: FieldVector, query: ReadQuery) -> galois.FieldArray:
        """
        Reorder with R_n, build every subpacket's increment and add it to storage.

        T_n = R_n U~_n;  h(s) = D_n T_n(s) Q_n;  S_n(s) += h(s) for all s.
        Returns the increment matrix h (P x M*ell).
        """
        if len(u_tilde) != self.params.P:
            raise ProtocolError(f"Update vector has length {len(u_tilde)}, expected P={self.params.P}")
        q_vec = self._check_query(query)
        t_n = self.reordered_update(u_tilde).array
        scaled_query = self._scaling_diagonal * q_vec
        increments = t_n[:, np.newaxis] * scaled_query[np.newaxis, :]
        self.state.storage = self.state.storage + increments
        return increments

    def reordered_update(self, u_tilde: FieldVector) -> FieldVector:
        """T_n = R_n U~_n."""
        return self.state.reversing_matrix.matvec(u_tilde)

    def begin_round(self):
        """Forget last round's write positions once V~ has been published."""
        self.state.prev_round_positions = {}

    def local_union(self) -> Tuple[int, ...]:
        union = set()
        for positions in self.state.prev_round_positions.values():
            union |= positions
        return tuple(sorted(union))

    def update_counts(self) -> Counter:
        counts = Counter()
        for positions in self.state.prev_round_positions.values():
            counts.update(positions)
        return counts


def truncate_v_tilde(v_tilde: Iterable[int], counts: Counter, P: int, cap) -> Tuple[int, ...]:
    """Downlink sparsification: keep floor(cap*P) indices, most-updated first, lower index on ties."""
    limit = int(cap * P)
    ranked = sorted(v_tilde, key=lambda k: (-counts.get(k, 0), k))
    return tuple(sorted(ranked[:limit]))


def compute_v_tilde(servers: Sequence[DatabaseServer], r_prime_cap=None) -> Tuple[int, ...]:
    """
    V~ = union of every writer's permuted positions this round.
    Every database computes it; they must agree. The designated
    database (n=1) is the one that later broadcasts it.
    """
    unions = {server.local_union() for server in servers}
    if len(unions) != 1:
        raise ProtocolError(f"Databases disagree on V~: {sorted(unions)}")
    designated = servers[0]
    v_tilde = designated.local_union()
    if r_prime_cap is not None:
        v_tilde = truncate_v_tilde(v_tilde, designated.update_counts(), designated.params.P, r_prime_cap)
    for server in servers:
        server.state.v_tilde = v_tilde
    return v_tilde
