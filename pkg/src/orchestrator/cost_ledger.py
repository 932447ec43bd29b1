"""
Transcript and cost ledger.
Every message the simulator moves is one TranscriptRecord; the ledger
bills the same messages into (round, phase, kind) cells and derives the
normalized reading and writing costs from them.
"""

import json
from collections import defaultdict
from dataclasses import asdict, dataclass, field
from fractions import Fraction
from pathlib import Path
from typing import Dict, Iterable, List, Optional, Tuple, Union

from params.system_params import (
    ValidatedParams,
    baseline_cost,
    theoretical_read_cost,
    theoretical_write_cost,
)


Rational = Union[Fraction, float]

# Message kinds billed as download (reading) cost; queries are uploaded by
# readers but carry no model data and are left out of C_R.
READ_KINDS = ('v_tilde', 'answer', 'position')
WRITE_KINDS = ('write_pair',)


@dataclass(frozen=True)
class TranscriptRecord:
    round: int
    phase: str
    sender: str
    receiver: str
    kind: str
    symbol_count: int
    position_fields: int = 0
    detail: Dict = field(default_factory=dict)

    def to_dict(self) -> Dict:
        return {
            'round': self.round,
            'phase': self.phase,
            'from': self.sender,
            'to': self.receiver,
            'kind': self.kind,
            'symbol_count': self.symbol_count,
            'position_fields': self.position_fields,
            'detail': self.detail,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True, separators=(',', ':'))

    @classmethod
    def from_dict(cls, data: Dict) -> 'TranscriptRecord':
        return cls(
            round=int(data['round']),
            phase=data['phase'],
            sender=data['from'],
            receiver=data['to'],
            kind=data['kind'],
            symbol_count=int(data['symbol_count']),
            position_fields=int(data.get('position_fields', 0)),
            detail=data.get('detail') or {},
        )


class Transcript:
    """Ordered, append-only list of records."""

    def __init__(self, records: Optional[Iterable[TranscriptRecord]] = None):
        self.records: List[TranscriptRecord] = list(records or [])

    def append(self, record: TranscriptRecord):
        self.records.append(record)

    def truncate(self, length: int):
        del self.records[length:]

    def __len__(self):
        return len(self.records)

    def __iter__(self):
        return iter(self.records)

    def for_round(self, round_index: int) -> List[TranscriptRecord]:
        return [r for r in self.records if r.round == round_index]

    def total_symbols(self) -> int:
        return sum(r.symbol_count for r in self.records)

    def to_jsonl(self) -> str:
        return ''.join(r.to_json() + '\n' for r in self.records)

    def write(self, path: Path):
        Path(path).write_text(self.to_jsonl(), encoding='utf-8')

    @classmethod
    def read(cls, path: Path) -> 'Transcript':
        records = []
        for line in Path(path).read_text(encoding='utf-8').splitlines():
            if line.strip():
                records.append(TranscriptRecord.from_dict(json.loads(line)))
        return cls(records)


@dataclass
class LedgerCell:
    symbols: int = 0
    position_fields: int = 0
    messages: int = 0


@dataclass(frozen=True)
class MeasuredCosts:
    """One round's costs, wire (whole symbols) and nominal (real-valued log_q P)."""
    round: int
    readers: int
    writers: int
    r_prime: Fraction
    read_wire: Rational
    write_wire: Rational
    read_nominal: Rational
    write_nominal: Rational
    theoretical_read: Rational
    theoretical_write: Rational
    read_slack: Rational
    write_slack: Rational
    baseline: Fraction

    @property
    def total_wire(self) -> Rational:
        return self.read_wire + self.write_wire

    @property
    def total_nominal(self) -> Rational:
        return self.read_nominal + self.write_nominal

    @property
    def theoretical_total(self) -> Rational:
        return self.theoretical_read + self.theoretical_write

    def within_slack(self, tolerance: float = 1e-9) -> bool:
        """Wire costs exceed the closed form by at most the position rounding slack."""
        read_gap = float(self.read_wire - self.theoretical_read)
        write_gap = float(self.write_wire - self.theoretical_write)
        return (-tolerance <= read_gap <= float(self.read_slack) + tolerance
                and -tolerance <= write_gap <= float(self.write_slack) + tolerance)

    def as_row(self) -> Dict:
        return {
            'round': self.round,
            'readers': self.readers,
            'writers': self.writers,
            'r_prime': str(self.r_prime),
            'C_R_wire': _fmt(self.read_wire),
            'C_W_wire': _fmt(self.write_wire),
            'C_T_wire': _fmt(self.total_wire),
            'C_R_nominal': _fmt(self.read_nominal),
            'C_W_nominal': _fmt(self.write_nominal),
            'C_T_nominal': _fmt(self.total_nominal),
            'C_R_theory': _fmt(self.theoretical_read),
            'C_W_theory': _fmt(self.theoretical_write),
            'C_T_theory': _fmt(self.theoretical_total),
            'read_slack': _fmt(self.read_slack),
            'write_slack': _fmt(self.write_slack),
            'baseline': _fmt(self.baseline),
        }


def _fmt(value: Rational) -> str:
    if isinstance(value, Fraction):
        return str(value) if value.denominator == 1 else f"{value} ({float(value):.6f})"
    return f"{value:.6f}"


class CostLedger:
    """Symbols moved per (round, phase, kind), plus who took part in each round."""

    def __init__(self, params: ValidatedParams):
        self.params = params
        self.cells: Dict[Tuple[int, str, str], LedgerCell] = defaultdict(LedgerCell)
        self.readers: Dict[int, set] = defaultdict(set)
        self.writers: Dict[int, set] = defaultdict(set)
        self.downloaded: Dict[int, int] = {}

    def bill(self, record: TranscriptRecord):
        cell = self.cells[(record.round, record.phase, record.kind)]
        cell.symbols += record.symbol_count
        cell.position_fields += record.position_fields
        cell.messages += 1

    def register_reader(self, round_index: int, session_id: str, downloaded: int):
        self.readers[round_index].add(session_id)
        self.downloaded[round_index] = downloaded

    def register_writer(self, round_index: int, session_id: str):
        self.writers[round_index].add(session_id)

    def snapshot(self):
        return (
            {k: LedgerCell(**asdict(v)) for k, v in self.cells.items()},
            {k: set(v) for k, v in self.readers.items()},
            {k: set(v) for k, v in self.writers.items()},
            dict(self.downloaded),
        )

    def restore(self, snapshot):
        cells, readers, writers, downloaded = snapshot
        self.cells = defaultdict(LedgerCell, {k: LedgerCell(**asdict(v)) for k, v in cells.items()})
        self.readers = defaultdict(set, {k: set(v) for k, v in readers.items()})
        self.writers = defaultdict(set, {k: set(v) for k, v in writers.items()})
        self.downloaded = dict(downloaded)

    def total_symbols(self) -> int:
        return sum(cell.symbols for cell in self.cells.values())

    def rounds(self) -> List[int]:
        return sorted({key[0] for key in self.cells} | set(self.readers) | set(self.writers))

    def _sum(self, round_index: int, kinds: Tuple[str, ...]) -> Tuple[int, int]:
        symbols = fields = 0
        for (t, _phase, kind), cell in self.cells.items():
            if t == round_index and kind in kinds:
                symbols += cell.symbols
                fields += cell.position_fields
        return symbols, fields

    def _normalize(self, amount: Rational, users: int) -> Rational:
        if users == 0:
            return Fraction(0)
        return amount / (self.params.L * users)

    def _nominal(self, symbols: int, fields: int) -> Rational:
        p = self.params
        return symbols - fields * p.position_symbols + fields * p.log_q_p

    def measured_costs(self, round_index: int) -> MeasuredCosts:
        """C_R = D/(L*readers), C_W = U/(L*writers) for one closed round."""
        p = self.params
        readers = len(self.readers.get(round_index, ()))
        writers = len(self.writers.get(round_index, ()))
        r_prime = Fraction(self.downloaded.get(round_index, 0), p.P)

        read_symbols, read_fields = self._sum(round_index, READ_KINDS)
        write_symbols, write_fields = self._sum(round_index, WRITE_KINDS)
        slack = p.position_slack

        return MeasuredCosts(
            round=round_index,
            readers=readers,
            writers=writers,
            r_prime=r_prime,
            read_wire=self._normalize(Fraction(read_symbols), readers),
            write_wire=self._normalize(Fraction(write_symbols), writers),
            read_nominal=self._normalize(self._nominal(read_symbols, read_fields), readers),
            write_nominal=self._normalize(self._nominal(write_symbols, write_fields), writers),
            theoretical_read=theoretical_read_cost(p, r_prime) if readers else Fraction(0),
            theoretical_write=theoretical_write_cost(p) if writers else Fraction(0),
            read_slack=self._normalize(read_fields * slack, readers),
            write_slack=self._normalize(write_fields * slack, writers),
            baseline=baseline_cost(p.N),
        )


def conservation_holds(transcript: Transcript, ledger: CostLedger) -> bool:
    """Total transcript symbols equal the sum over ledger cells."""
    return transcript.total_symbols() == ledger.total_symbols()


def ledger_from_transcript(params: ValidatedParams, transcript: Transcript) -> CostLedger:
    """Rebuild a ledger (cells and participants) from a stored transcript."""
    ledger = CostLedger(params)
    for record in transcript:
        ledger.bill(record)
        if record.kind == 'v_tilde':
            ledger.register_reader(record.round, record.receiver, len(record.detail.get('v_tilde', [])))
        elif record.phase == 'write' and record.kind == 'query':
            # Every writer queries each database, even with nothing to send.
            ledger.register_writer(record.round, record.sender)
    return ledger

