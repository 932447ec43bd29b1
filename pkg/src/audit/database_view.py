"""
Database views: everything one database receives, and nothing else.
Audits compare distributions of these views; assert_secret_free checks
that a view holds only plain integers in non-secret fields.
"""

from dataclasses import dataclass, fields
from typing import Tuple

import numpy as np


# Names that would only appear on a view built from client or coordinator state.
FORBIDDEN_FIELDS = frozenset({
    'theta', 'permutation', 'deltas', 'update', 'models', 'z_bar',
    'query_noise', 'update_noise', 'storage_noise', 'subpackets',
})


class SecretLeakError(AssertionError):
    """A database view carries a secret-bearing field or object."""


@dataclass(frozen=True)
class DatabaseView:
    """
    One database's view of one run (or one round of it).

    queries: every query vector received, in arrival order
    write_pairs: (permuted position, symbol) pairs received
    v_tilde: the permuted positions it computed/broadcast
    reversing_matrix: R_n, row-major
    storage: S_n snapshots, row-major
    """
    database: int
    queries: Tuple[Tuple[int, ...], ...] = ()
    write_pairs: Tuple[Tuple[int, int], ...] = ()
    v_tilde: Tuple[int, ...] = ()
    reversing_matrix: Tuple[Tuple[int, ...], ...] = ()
    storage: Tuple[Tuple[Tuple[int, ...], ...], ...] = ()

    def positions(self) -> Tuple[int, ...]:
        return tuple(k for k, _ in self.write_pairs)

    def symbols(self) -> Tuple[int, ...]:
        return tuple(v for _, v in self.write_pairs)


def as_rows(array) -> Tuple[Tuple[int, ...], ...]:
    return tuple(tuple(int(v) for v in row) for row in np.asarray(array))


def _plain(value) -> bool:
    if isinstance(value, bool):
        return False
    if isinstance(value, int):
        return True
    if isinstance(value, tuple):
        return all(_plain(v) for v in value)
    return False


def assert_secret_free(view: DatabaseView):
    """
    Raises:
        SecretLeakError: if a field is secret-named or holds anything but nested int tuples
    """
    for f in fields(view):
        if f.name in FORBIDDEN_FIELDS:
            raise SecretLeakError(f"View field '{f.name}' is secret-bearing")
        if not _plain(getattr(view, f.name)):
            raise SecretLeakError(
                f"View field '{f.name}' holds {type(getattr(view, f.name)).__name__}, not plain integers"
            )


def collect_view(orchestrator, n: int) -> DatabaseView:
    """Assemble database n's view of a finished simulation from what it received and holds."""
    name = f"db{n}"
    queries, pairs = [], []
    for record in orchestrator.transcript:
        if record.receiver != name:
            continue
        if record.kind == 'query':
            queries.append(tuple(record.detail['values']))
        elif record.kind == 'write_pair':
            pairs.append((record.detail['position'], record.detail['symbol']))
    state = orchestrator.servers[n - 1].state
    return DatabaseView(
        database=n,
        queries=tuple(queries),
        write_pairs=tuple(pairs),
        v_tilde=tuple(int(k) for k in state.v_tilde),
        reversing_matrix=as_rows(state.reversing_matrix.values),
        storage=(as_rows(state.storage),),
    )
