"""Tests for rounds, rollback, verification against the oracle and the cost ledger."""

from fractions import Fraction

import numpy as np
import pytest

from client.update_encoder import SparseUpdate
from field.prime_field import to_ints
from orchestrator.cost_ledger import (
    Transcript,
    TranscriptRecord,
    conservation_holds,
    ledger_from_transcript,
)
from orchestrator.plaintext_oracle import PlaintextOracle
from orchestrator.round_orchestrator import PRUWOrchestrator, RoundAbortedError
from params.run_config import parse_run_config
from params.system_params import baseline_cost


def make_config(rounds=3, writers=1, readers=None, scripted=None, **system):
    base = {'N': 6, 'M': 2, 'P': 5, 'ell': 1, 'q': 2053, 'r': '2/5', 'seed': 1}
    base.update(system)
    simulation = {'rounds': rounds, 'writers_per_round': writers}
    if readers is not None:
        simulation['readers_per_round'] = readers
    if scripted:
        simulation['scripted_updates'] = scripted
    return parse_run_config({'schema_version': 1, 'system': base, 'simulation': simulation})


def run(config):
    orchestrator = PRUWOrchestrator.from_config(config)
    return orchestrator, orchestrator.simulate(config)


GOLDEN = dict(q=7, seed=5, permutation=[2, 5, 1, 3, 4])
GOLDEN_SCRIPT = [{'round': 1, 'theta': 1, 'subpackets': [1, 4]}]


def _grid():
    for ell in (1, 2, 3):
        for M in (2, 3):
            for P, rates in ((5, ('1/5', '2/5')), (8, ('1/4', '1/2'))):
                for r in rates:
                    yield ell, M, P, r


class TestCorrectness:

    @pytest.mark.slow
    @pytest.mark.parametrize('ell,M,P,r', list(_grid()))
    def test_oracle_equivalence_grid(self, ell, M, P, r):
        config = make_config(rounds=3, writers=3, N=4 * ell + 2, M=M, P=P, ell=ell, r=r, seed=ell * 100 + P)
        _, result = run(config)
        assert result.verified
        assert len(result.verifications) == 4
        assert all(report.read_mismatches == 0 for report in result.rounds)

    def test_small_run_verifies(self):
        _, result = run(make_config(rounds=3, writers=2))
        assert result.verified

    def test_zero_rate(self):
        orchestrator, result = run(make_config(rounds=2, writers=2, r=0))
        assert result.verified
        assert result.rounds[0].next_v_tilde == ()
        assert result.costs[0].write_wire == 0

    def test_round_without_writers(self):
        orchestrator, result = run(make_config(rounds=2, writers=0, readers=2, q=11, P=11, r='2/11'))
        assert result.verified
        assert result.rounds[0].writers == []
        assert result.rounds[1].v_tilde_read == ()
        costs = result.costs[1]
        assert costs.r_prime == 0
        assert costs.read_wire == costs.theoretical_read
        assert costs.writers == 0 and costs.write_wire == 0

    def test_corrupted_storage_is_pinpointed(self):
        orchestrator, result = run(make_config(rounds=1))
        assert result.verified
        # column (k-1)*M + (m-1): bit 1 of submodel 2
        storage = orchestrator.servers[0].state.storage
        storage[2, 1] = storage[2, 1] + orchestrator.params.field.GF(1)
        report = orchestrator.snapshot_and_verify()
        assert not report.equal
        assert report.first_mismatch == (2, 3, 1)
        assert report.mismatch_count == 1

    def test_initial_models_are_kept(self, small_params):
        models = np.arange(10).reshape(2, 5, 1)
        orchestrator = PRUWOrchestrator(small_params, initial_models=models)
        assert np.array_equal(to_ints(orchestrator.oracle.models), models)
        assert orchestrator.snapshot_and_verify(0).equal


class TestGolden:

    def test_pairs_at_permuted_positions(self):
        orchestrator, result = run(make_config(rounds=2, scripted=GOLDEN_SCRIPT, **GOLDEN))
        assert result.verified
        pairs = [r for r in orchestrator.transcript.for_round(1) if r.kind == 'write_pair']
        for n in range(1, 7):
            positions = [r.detail['position'] for r in pairs if r.receiver == f"db{n}"]
            assert positions == [3, 5]
        assert result.rounds[0].next_v_tilde == (3, 5)

    def test_next_round_reads_updated_subpackets(self):
        orchestrator, result = run(make_config(rounds=2, scripted=GOLDEN_SCRIPT, **GOLDEN))
        assert result.rounds[1].v_tilde_read == (3, 5)
        session = orchestrator.open_session(1)
        assert session.true_positions_from_v_tilde((3, 5)) == (1, 4)
        assert result.costs[1].r_prime == Fraction(2, 5)


class TestDeterminism:

    def test_identical_transcripts(self):
        first, _ = run(make_config(rounds=3, writers=2))
        second, _ = run(make_config(rounds=3, writers=2))
        assert first.transcript.to_jsonl() == second.transcript.to_jsonl()

    def test_seed_changes_transcript(self):
        first, _ = run(make_config(rounds=1))
        second, _ = run(make_config(rounds=1, seed=2))
        assert first.transcript.to_jsonl() != second.transcript.to_jsonl()

    def test_transcript_file_round_trip(self, tmp_path):
        orchestrator, _ = run(make_config(rounds=2))
        path = tmp_path / 'transcript.jsonl'
        orchestrator.transcript.write(path)
        assert Transcript.read(path).to_jsonl() == orchestrator.transcript.to_jsonl()

    def test_record_json_uses_from_and_to(self):
        record = TranscriptRecord(round=1, phase='read', sender='db1', receiver='user001',
                                  kind='answer', symbol_count=1, detail={'index': 2, 'value': 7})
        assert record.to_json() == (
            '{"detail":{"index":2,"value":7},"from":"db1","kind":"answer","phase":"read",'
            '"position_fields":0,"round":1,"symbol_count":1,"to":"user001"}'
        )


class TestRollback:

    def test_failed_round_restores_everything(self, monkeypatch):
        config = make_config(rounds=1, writers=2)
        orchestrator, _ = run(config)
        storages = [server.state.storage.copy() for server in orchestrator.servers]
        oracle = orchestrator.oracle.snapshot()
        length = len(orchestrator.transcript)
        ledger_total = orchestrator.ledger.total_symbols()
        v_tilde = orchestrator.v_tilde

        plan = orchestrator.plan_round(2, 2)

        def boom(*args, **kwargs):
            raise RuntimeError("database 4 crashed")

        monkeypatch.setattr(orchestrator.servers[3], 'apply_write', boom)
        with pytest.raises(RoundAbortedError) as exc:
            orchestrator.run_round(plan)
        assert exc.value.round_index == 2
        assert isinstance(exc.value.cause, RuntimeError)

        assert all(np.array_equal(server.state.storage, saved)
                   for server, saved in zip(orchestrator.servers, storages))
        assert np.array_equal(orchestrator.oracle.snapshot(), oracle)
        assert len(orchestrator.transcript) == length
        assert orchestrator.ledger.total_symbols() == ledger_total
        assert orchestrator.v_tilde == v_tilde
        assert orchestrator.last_round == 1

        monkeypatch.undo()
        orchestrator.run_round(plan)
        assert orchestrator.snapshot_and_verify().equal

    def test_rounds_must_increase(self):
        orchestrator, _ = run(make_config(rounds=2))
        with pytest.raises(ValueError):
            orchestrator.run_round(orchestrator.plan_round(2, 1))

    def test_unclosed_round_has_no_costs(self):
        orchestrator, _ = run(make_config(rounds=1))
        with pytest.raises(ValueError):
            orchestrator.measured_costs(2)


class TestCosts:

    def test_costs_exact_when_log_is_integral(self):
        orchestrator, result = run(make_config(rounds=3, writers=2, q=11, P=11, r='2/11', seed=3))
        for costs in result.costs:
            assert isinstance(costs.read_wire, Fraction)
            assert costs.write_wire == costs.theoretical_write
            assert costs.read_wire == costs.theoretical_read
            assert costs.read_nominal == costs.read_wire
            assert costs.write_wire == 4 * Fraction(2, 11) * 2 / (1 - Fraction(2, 6))
        assert result.costs[0].r_prime == 1
        assert result.costs[0].read_wire == 8

    def test_costs_within_slack_otherwise(self):
        _, result = run(make_config(rounds=3, writers=2))
        for costs in result.costs:
            assert costs.within_slack()
            assert abs(float(costs.read_nominal) - float(costs.theoretical_read)) < 1e-9
            assert abs(float(costs.write_nominal) - float(costs.theoretical_write)) < 1e-9

    def test_unsparsified_costs_exceed_baseline(self):
        _, result = run(make_config(rounds=2, writers=1, q=11, P=11, r=1, seed=4))
        baseline = baseline_cost(6)
        for costs in result.costs:
            assert costs.r_prime == 1
            assert costs.read_wire > baseline
            assert costs.write_wire > baseline

    def test_downlink_cap(self):
        _, result = run(make_config(rounds=2, writers=2, r_prime_cap='1/5'))
        assert len(result.rounds[0].next_v_tilde) == 1
        assert result.costs[1].r_prime == Fraction(1, 5)
        assert result.verified

    def test_queries_are_transcribed_but_not_billed(self):
        orchestrator, result = run(make_config(rounds=1, q=11, P=11, r='2/11'))
        queries = [r for r in orchestrator.transcript if r.kind == 'query']
        assert len(queries) == 2 * 6
        assert result.costs[0].read_wire == result.costs[0].theoretical_read

    def test_ledger_conserves_and_rebuilds(self):
        orchestrator, result = run(make_config(rounds=3, writers=2))
        assert conservation_holds(orchestrator.transcript, orchestrator.ledger)
        rebuilt = ledger_from_transcript(orchestrator.params, orchestrator.transcript)
        for costs in result.costs:
            assert rebuilt.measured_costs(costs.round) == costs


class TestOracle:

    def test_apply_adds_deltas(self):
        oracle = PlaintextOracle(np.zeros((2, 3, 1), dtype=np.int64), 7)
        oracle.apply(2, SparseUpdate((1, 3), {1: (5,), 3: (4,)}))
        oracle.apply(2, SparseUpdate((3,), {3: (4,)}))
        assert to_ints(oracle.submodel(2)).ravel().tolist() == [5, 0, 1]
        assert to_ints(oracle.submodel(1)).ravel().tolist() == [0, 0, 0]
