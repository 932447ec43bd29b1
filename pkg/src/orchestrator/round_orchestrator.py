"""
Round Orchestrator for the PRUW simulator.
Runs the trusted setup, then drives rounds of private reads and sparse
writes across all databases behind a strict round barrier. Every message
is transcribed and billed; a plaintext oracle receives the same updates
so the private state can be checked symbol by symbol.
"""

from dataclasses import dataclass, field
from functools import cached_property
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from client.client_session import ClientSession, build_plain_query, decoder_for
from client.update_encoder import SparseUpdate, emit_write_pairs, random_sparse_update
from coordinator.setup_coordinator import Permutation, SetupCoordinator
from database.database_server import DatabaseServer, compute_v_tilde
from field.noise import NoisePolicy, noise_stream
from orchestrator.cost_ledger import CostLedger, MeasuredCosts, Transcript, TranscriptRecord
from orchestrator.plaintext_oracle import PlaintextOracle
from params.run_config import RunConfig, ScriptedUpdate
from params.system_params import ValidatedParams


class RoundAbortedError(RuntimeError):
    """A round failed; every database was rolled back to its round-start state."""

    def __init__(self, round_index: int, cause: Exception):
        super().__init__(f"Round {round_index} aborted: {cause}")
        self.round_index = round_index
        self.cause = cause


@dataclass
class WriterPlan:
    session: ClientSession
    update: SparseUpdate


@dataclass
class RoundPlan:
    round: int
    writers: List[WriterPlan] = field(default_factory=list)
    readers: List[ClientSession] = field(default_factory=list)


@dataclass
class RoundReport:
    round: int
    v_tilde_read: Tuple[int, ...]
    readers: List[str]
    writers: List[str]
    read_mismatches: int
    next_v_tilde: Tuple[int, ...]
    symbols: int

    @property
    def reads_correct(self) -> bool:
        return self.read_mismatches == 0


@dataclass
class VerificationReport:
    round: int
    equal: bool
    mismatch_count: int
    first_mismatch: Optional[Tuple[int, int, int]] = None
    expected: Optional[int] = None
    actual: Optional[int] = None

    def as_row(self) -> Dict:
        submodel, subpacket, bit = self.first_mismatch or ('', '', '')
        return {
            'round': self.round,
            'equal': self.equal,
            'mismatch_count': self.mismatch_count,
            'submodel': submodel,
            'subpacket': subpacket,
            'bit': bit,
            'expected': '' if self.expected is None else self.expected,
            'actual': '' if self.actual is None else self.actual,
        }


@dataclass
class SimulationResult:
    rounds: List[RoundReport]
    verifications: List[VerificationReport]
    costs: List[MeasuredCosts]

    @property
    def verified(self) -> bool:
        return all(v.equal for v in self.verifications) and all(r.reads_correct for r in self.rounds)


def db_name(n: int) -> str:
    return f"db{n}"


class PRUWOrchestrator:
    """Owns the database set, the oracle, the transcript and the ledger."""

    def __init__(self, params: ValidatedParams, initial_models: Optional[np.ndarray] = None,
                 permutation: Optional[Permutation] = None,
                 noise_policy: NoisePolicy = NoisePolicy(), logger=None):
        self.params = params
        self.noise_policy = noise_policy
        self.logger = logger

        if initial_models is None:
            initial_models = params.field.random_array(
                noise_stream(params.seed, 'initial_models'), (params.M, params.P, params.ell))

        setup = SetupCoordinator(params, logger, noise_policy).setup(initial_models, permutation)
        self.permutation = setup.permutation_handout
        self.servers = [DatabaseServer(params, state, logger) for state in setup.databases]
        self.oracle = PlaintextOracle(initial_models, params.q)
        self.transcript = Transcript()
        self.ledger = CostLedger(params)

        self.last_round = 0
        # Nothing has been written yet, so the first readers fetch every subpacket.
        self.v_tilde: Tuple[int, ...] = tuple(range(1, params.P + 1))
        self._session_count = 0

    @cached_property
    def decoder(self):
        p = self.params
        return decoder_for(p.q, p.f, p.alpha)

    @classmethod
    def from_config(cls, config: RunConfig, noise_policy: NoisePolicy = NoisePolicy(),
                    logger=None) -> 'PRUWOrchestrator':
        params = config.validated()
        permutation = Permutation(config.permutation) if config.permutation else None
        return cls(params, permutation=permutation, noise_policy=noise_policy, logger=logger)

    # ------------------------------------------------------------------
    # Sessions and plans
    # ------------------------------------------------------------------

    def open_session(self, theta: int, session_id: Optional[str] = None) -> ClientSession:
        self._session_count += 1
        session_id = session_id or f"user{self._session_count:03d}"
        return ClientSession(session_id, theta, self.permutation, self.params,
                             self.noise_policy, self.logger)

    def plan_round(self, round_index: int, writers: int,
                   readers: Optional[int] = None,
                   scripted: Sequence[ScriptedUpdate] = ()) -> RoundPlan:
        """
        Scripted writers first, then random writers up to `writers` in total.
        Writers also read; `readers` beyond the writer count opens read-only sessions.
        """
        p = self.params
        rng = noise_stream(p.seed, 'plan', round_index)
        plan = RoundPlan(round=round_index)

        for script in scripted:
            dense = p.field.random_nonzero_array(rng, (p.P, p.ell))
            update = SparseUpdate.from_dense(dense, script.subpackets)
            plan.writers.append(WriterPlan(self.open_session(script.theta), update))
        for _ in range(max(0, writers - len(scripted))):
            theta = int(rng.integers(1, p.M + 1))
            update = random_sparse_update(p.field, p.P, p.ell, p.r, rng)
            plan.writers.append(WriterPlan(self.open_session(theta), update))

        writer_sessions = [w.session for w in plan.writers]
        wanted = len(writer_sessions) if readers is None else readers
        plan.readers = writer_sessions[:wanted]
        for _ in range(wanted - len(plan.readers)):
            plan.readers.append(self.open_session(int(rng.integers(1, p.M + 1))))
        return plan

    # ------------------------------------------------------------------
    # Rounds
    # ------------------------------------------------------------------

    def _record(self, record: TranscriptRecord):
        self.transcript.append(record)
        self.ledger.bill(record)
        if self.logger:
            self.logger.log_message(record)

    def _snapshot(self):
        return (
            [server.snapshot_state() for server in self.servers],
            self.oracle.snapshot(),
            len(self.transcript),
            self.ledger.snapshot(),
            self.v_tilde,
        )

    def _restore(self, snapshot):
        states, oracle, transcript_length, ledger, v_tilde = snapshot
        for server, state in zip(self.servers, states):
            server.restore_state(state)
        self.oracle.restore(oracle)
        self.transcript.truncate(transcript_length)
        self.ledger.restore(ledger)
        self.v_tilde = v_tilde

    def run_round(self, plan: RoundPlan) -> RoundReport:
        """
        Reading phase for every reader, then the writing phase for every
        writer in session-id order, then V~ for the next round.

        Raises:
            ValueError: if the round index does not increase
            RoundAbortedError: on any failure, after rollback
        """
        if plan.round <= self.last_round:
            raise ValueError(f"Round {plan.round} does not follow closed round {self.last_round}")

        snapshot = self._snapshot()
        try:
            report = self._execute(plan)
        except Exception as e:
            self._restore(snapshot)
            if self.logger:
                self.logger.error(f"Round {plan.round} rolled back: {e}")
            raise RoundAbortedError(plan.round, e) from e

        self.last_round = plan.round
        if self.logger:
            self.logger.log_round_progress(report)
        return report

    def _execute(self, plan: RoundPlan) -> RoundReport:
        t = plan.round
        v_tilde = self.v_tilde
        start_symbols = self.transcript.total_symbols()

        readers = sorted(plan.readers, key=lambda s: s.session_id)
        mismatches = 0
        for session in readers:
            mismatches += self._read(t, session, v_tilde)

        for server in self.servers:
            server.begin_round()
        writers = sorted(plan.writers, key=lambda w: w.session.session_id)
        for writer in writers:
            self._write(t, writer)

        self.v_tilde = compute_v_tilde(self.servers, self.params.r_prime_cap)

        return RoundReport(
            round=t,
            v_tilde_read=v_tilde,
            readers=[s.session_id for s in readers],
            writers=[w.session.session_id for w in writers],
            read_mismatches=mismatches,
            next_v_tilde=self.v_tilde,
            symbols=self.transcript.total_symbols() - start_symbols,
        )

    def _send_queries(self, t: int, phase: str, session: ClientSession) -> Dict:
        queries = {}
        for server in self.servers:
            query = session.build_query(server.n)
            self._record(TranscriptRecord(
                round=t, phase=phase, sender=session.session_id, receiver=db_name(server.n),
                kind='query', symbol_count=len(query.q_vec),
                detail={'values': query.q_vec.to_list()},
            ))
            queries[server.n] = query
        return queries

    def _read(self, t: int, session: ClientSession, v_tilde: Tuple[int, ...]) -> int:
        """Download every subpacket in V~ for one reader; returns how many decoded wrongly."""
        p = self.params
        session.begin_round(t)
        designated = self.servers[0]
        self._record(TranscriptRecord(
            round=t, phase='read', sender=db_name(designated.n), receiver=session.session_id,
            kind='v_tilde', symbol_count=p.P * p.position_symbols, position_fields=p.P,
            detail={'v_tilde': list(v_tilde)},
        ))
        queries = self._send_queries(t, 'read', session)

        mismatches = 0
        for k in v_tilde:
            answers = []
            for server in self.servers:
                answer = server.answer_read(queries[server.n], k)
                self._record(TranscriptRecord(
                    round=t, phase='read', sender=db_name(server.n), receiver=session.session_id,
                    kind='answer', symbol_count=1, detail={'index': k, 'value': answer.value},
                ))
                answers.append(answer.value)
            self._record(TranscriptRecord(
                round=t, phase='read', sender=db_name(designated.n), receiver=session.session_id,
                kind='position', symbol_count=p.position_symbols, position_fields=1,
                detail={'index': k},
            ))
            s = session.true_positions_from_v_tilde([k])[0]
            bits = session.decode_subpacket(answers, s)
            if bits.to_list() != [int(v) for v in self.oracle.subpacket(session.theta, s)]:
                mismatches += 1
                if self.logger:
                    self.logger.warning(
                        f"{session.session_id}: subpacket {s} of submodel {session.theta} decoded wrongly"
                    )

        self.ledger.register_reader(t, session.session_id, len(v_tilde))
        return mismatches

    def _write(self, t: int, writer: WriterPlan):
        p = self.params
        session = writer.session
        session.begin_round(t)
        pairs_by_db = emit_write_pairs(session, writer.update)
        queries = self._send_queries(t, 'write', session)

        for server in self.servers:
            pairs = pairs_by_db[server.n]
            for pair in pairs:
                self._record(TranscriptRecord(
                    round=t, phase='write', sender=session.session_id, receiver=db_name(server.n),
                    kind='write_pair', symbol_count=1 + p.position_symbols, position_fields=1,
                    detail={'position': pair.permuted_position, 'symbol': pair.update_symbol.value},
                ))
            u_tilde = server.collect_write(pairs, session.session_id)
            server.apply_write(u_tilde, queries[server.n])

        self.oracle.apply(session.theta, writer.update)
        self.ledger.register_writer(t, session.session_id)

    # ------------------------------------------------------------------
    # Costs and verification
    # ------------------------------------------------------------------

    def measured_costs(self, round_index: int) -> MeasuredCosts:
        if round_index > self.last_round:
            raise ValueError(f"Round {round_index} is not closed")
        return self.ledger.measured_costs(round_index)

    def snapshot_and_verify(self, round_index: Optional[int] = None) -> VerificationReport:
        """
        Decode every subpacket of every submodel and compare with the oracle.
        Uses noise-free reads addressed by true index, so a corrupted
        stored symbol shows up at its own (submodel, subpacket).
        """
        p = self.params
        round_index = self.last_round if round_index is None else round_index
        mismatch_count = 0
        first = expected = actual = None
        for theta in range(1, p.M + 1):
            queries = [build_plain_query(p.field, p.f, server.state.alpha_n, theta, p.M)
                       for server in self.servers]
            for s in range(1, p.P + 1):
                answers = [server.verifier_read_subpacket(query, s).value
                           for server, query in zip(self.servers, queries)]
                decoded = self.decoder.decode(answers).to_list()
                truth = self.oracle.subpacket(theta, s)
                for bit, (got, want) in enumerate(zip(decoded, truth), start=1):
                    if got != int(want):
                        mismatch_count += 1
                        if first is None:
                            first, expected, actual = (theta, s, bit), int(want), got

        report = VerificationReport(
            round=round_index,
            equal=mismatch_count == 0,
            mismatch_count=mismatch_count,
            first_mismatch=first,
            expected=expected,
            actual=actual,
        )
        if self.logger:
            if report.equal:
                self.logger.debug(f"Round {round_index}: private state matches oracle")
            else:
                self.logger.error(
                    f"Round {round_index}: {mismatch_count} mismatches, first at "
                    f"submodel/subpacket/bit {first}"
                )
        return report

    def simulate(self, config: RunConfig) -> SimulationResult:
        """Run config.rounds rounds with verification and costs after each."""
        result = SimulationResult(rounds=[], verifications=[self.snapshot_and_verify(0)], costs=[])
        for t in range(self.last_round + 1, self.last_round + config.rounds + 1):
            plan = self.plan_round(t, config.writers_per_round, config.readers_per_round,
                                   config.scripted_for_round(t))
            result.rounds.append(self.run_round(plan))
            result.verifications.append(self.snapshot_and_verify(t))
            result.costs.append(self.measured_costs(t))
        return result
