"""
Sparse update encoding.
Selects the P*r subpackets a writer touches, folds the ell symbols of
each into one Lagrange-combined, noise-masked symbol per database, and
emits (symbol, permuted position) pairs in permuted order.
"""

from dataclasses import dataclass
from typing import Dict, List, Mapping, Sequence, Tuple

import galois
import numpy as np

from client.client_session import ClientSession
from coordinator.setup_coordinator import Permutation
from database.database_server import WritePair
from field.linear_algebra import vanishing_product
from field.prime_field import DimensionError, FieldElement, PrimeField, to_ints
from params.system_params import as_rate


@dataclass(frozen=True)
class SparseUpdate:
    """
    A writer's update: deltas for the true subpackets in B only.

    deltas[s] holds the ell symbols added to subpacket s; every s outside
    B receives the zero update.
    """
    subpackets: Tuple[int, ...]
    deltas: Mapping[int, Tuple[int, ...]]

    def __post_init__(self):
        if tuple(sorted(self.subpackets)) != self.subpackets:
            raise ValueError(f"Subpackets must be sorted: {self.subpackets}")
        if len(set(self.subpackets)) != len(self.subpackets):
            raise ValueError(f"Duplicate subpackets: {self.subpackets}")
        if set(self.deltas) != set(self.subpackets):
            raise ValueError("deltas must be keyed by exactly the subpackets in B")

    @classmethod
    def from_dense(cls, dense: np.ndarray, subpackets: Sequence[int]) -> 'SparseUpdate':
        """Keep rows s (1-based) of a (P, ell) delta array."""
        chosen = tuple(sorted(int(s) for s in subpackets))
        return cls(chosen, {s: tuple(int(v) for v in dense[s - 1]) for s in chosen})

    def delta(self, s: int, ell: int) -> Tuple[int, ...]:
        return self.deltas.get(s, (0,) * ell)

    def as_array(self, P: int, ell: int) -> np.ndarray:
        dense = np.zeros((P, ell), dtype=np.int64)
        for s in self.subpackets:
            dense[s - 1] = self.deltas[s]
        return dense


def sparsify(raw_deltas: np.ndarray, r) -> SparseUpdate:
    """
    Keep the P*r densest subpackets (most nonzero symbols), lower index on ties.

    Args:
        raw_deltas: (P, ell) field array
        r: sparsification rate with P*r integral
    """
    raw = to_ints(raw_deltas)
    if raw.ndim != 2:
        raise DimensionError(f"raw_deltas must be (P, ell), got shape {raw.shape}")
    P = raw.shape[0]
    count = P * as_rate(r)
    if count.denominator != 1:
        raise ValueError(f"P·r = {count} is not an integer")
    density = np.count_nonzero(raw, axis=1)
    ranked = sorted(range(1, P + 1), key=lambda s: (-int(density[s - 1]), s))
    return SparseUpdate.from_dense(raw, ranked[:int(count)])


def random_sparse_update(field: PrimeField, P: int, ell: int, r, rng: np.random.Generator) -> SparseUpdate:
    """P*r uniformly chosen subpackets with nonzero deltas."""
    count = int(P * as_rate(r))
    chosen = rng.choice(P, size=count, replace=False) + 1
    dense = np.zeros((P, ell), dtype=np.int64)
    dense[chosen - 1] = to_ints(field.random_nonzero_array(rng, (count, ell)))
    return SparseUpdate.from_dense(dense, chosen)


def combine_update(field: PrimeField, f: Sequence[int], update: SparseUpdate, s: int,
                   alpha_n: int, z_hat: int) -> FieldElement:
    """
    U_n(s) = sum_i D~_i prod_{j != i}(f_j - alpha_n) + prod_j (f_j - alpha_n) Z^_s,
    with D~_i = D_i / prod_{j != i}(f_j - f_i); zero when s is not in B.

    The weighted sum is the Lagrange interpolant through (f_i, D_i) taken
    at alpha_n, so it equals D_i at alpha_n = f_i.
    """
    if s not in update.deltas:
        return field.zero
    interpolant = galois.lagrange_poly(field.array(list(f)), field.array(list(update.deltas[s])))
    mask = field.array(vanishing_product(field, f, alpha_n)) * field.array(int(z_hat))
    return field.element(int(interpolant(field.array(alpha_n)) + mask))


def permute_updates(values_by_true_index: Sequence[FieldElement], permutation: Permutation) -> List[FieldElement]:
    """U^(i) = U(P~(i))."""
    return [values_by_true_index[permutation(i) - 1] for i in range(1, permutation.size + 1)]


def write_pairs_for(field: PrimeField, f: Sequence[int], update: SparseUpdate, permutation: Permutation,
                    alpha_n: int, z_hat: galois.FieldArray) -> List[WritePair]:
    """Pairs for one database, sorted by permuted position."""
    symbols = [combine_update(field, f, update, s, alpha_n, int(z_hat[s - 1]))
               for s in range(1, permutation.size + 1)]
    permuted = permute_updates(symbols, permutation)
    positions = sorted(permutation.inverse(s) for s in update.subpackets)
    return [WritePair(update_symbol=permuted[k - 1], permuted_position=k) for k in positions]


def emit_write_pairs(session: ClientSession, update: SparseUpdate) -> Dict[int, List[WritePair]]:
    """
    Every database's pairs: same positions, different symbols.

    Raises:
        ValueError: if |B| differs from P*r
    """
    p = session.params
    if len(update.subpackets) != p.writes_per_user:
        raise ValueError(
            f"Update touches {len(update.subpackets)} subpackets, expected P·r={p.writes_per_user}"
        )
    if any(not 1 <= s <= p.P for s in update.subpackets):
        raise ValueError(f"Subpacket index outside 1..{p.P}: {update.subpackets}")
    z_hat = session.update_noise()
    return {
        n: write_pairs_for(p.field, p.f, update, session.permutation, alpha_n, z_hat)
        for n, alpha_n in zip(p.database_indices(), p.alpha)
    }
