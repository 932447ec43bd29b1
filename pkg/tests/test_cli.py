"""End-to-end tests for the pruw_simulator command line."""

import csv
import json

import pytest

from conftest import write_config
from pruw_simulator import EXIT_FAILED, EXIT_INVALID_CONFIG, EXIT_OK, main

GOLDEN_SYSTEM = {'N': 6, 'M': 2, 'P': 5, 'ell': 1, 'q': 7, 'r': '2/5', 'seed': 5,
                 'permutation': [2, 5, 1, 3, 4]}
GOLDEN_SIMULATION = {'rounds': 2, 'writers_per_round': 1,
                     'scripted_updates': [{'round': 1, 'theta': 1, 'subpackets': [1, 4]}]}
TINY_SYSTEM = {'N': 6, 'M': 2, 'P': 2, 'ell': 1, 'q': 5, 'r': '1/2', 'seed': 7}


@pytest.fixture
def golden_config(tmp_path):
    return write_config(tmp_path / 'golden.yaml', GOLDEN_SYSTEM, GOLDEN_SIMULATION)


def _read_jsonl(path):
    return [json.loads(line) for line in path.read_text(encoding='utf-8').splitlines()]


class TestRun:

    def test_run_writes_reports(self, golden_config, tmp_path):
        out = tmp_path / 'out'
        assert main(['run', '--config', str(golden_config), '--out', str(out)]) == EXIT_OK
        for name in ('transcript.jsonl', 'cost_report.csv', 'verification_report.csv', 'summary.md'):
            assert (out / name).exists()
        with open(out / 'verification_report.csv', newline='') as f:
            rows = list(csv.DictReader(f))
        assert [row['equal'] for row in rows] == ['True', 'True', 'True']

    def test_golden_transcript_positions(self, golden_config, tmp_path):
        out = tmp_path / 'out'
        main(['run', '--config', str(golden_config), '--out', str(out)])
        records = _read_jsonl(out / 'transcript.jsonl')
        pairs = [r for r in records if r['kind'] == 'write_pair' and r['round'] == 1 and r['to'] == 'db1']
        assert [r['detail']['position'] for r in pairs] == [3, 5]

    def test_invalid_n_lists_violation(self, tmp_path, capsys):
        config = write_config(tmp_path / 'bad.yaml', dict(GOLDEN_SYSTEM, N=8, q=2053))
        assert main(['run', '--config', str(config)]) == EXIT_INVALID_CONFIG
        assert "N must equal 4ℓ+2" in capsys.readouterr().out

    def test_missing_config(self, tmp_path):
        assert main(['run', '--config', str(tmp_path / 'absent.yaml')]) == EXIT_INVALID_CONFIG

    @pytest.mark.parametrize('override, message', [
        ({'seed': -1}, "seed must be a 64-bit unsigned integer"),
        ({'r': 'abc'}, "r must be a rate such as 0.25 or '1/4', got 'abc'"),
        ({'N': 'six'}, "N must be an integer, got 'six'"),
        ({'f': 3}, "f must be a list of integers"),
    ])
    def test_ill_typed_system_field_lists_violation(self, tmp_path, capsys, override, message):
        config = write_config(tmp_path / 'bad.yaml', dict(GOLDEN_SYSTEM, **override))
        assert main(['run', '--config', str(config)]) == EXIT_INVALID_CONFIG
        assert message in capsys.readouterr().out

    def test_every_violation_is_printed(self, tmp_path, capsys):
        config = write_config(tmp_path / 'bad.yaml', dict(GOLDEN_SYSTEM, seed=-1, r='abc', N='six'))
        assert main(['run', '--config', str(config)]) == EXIT_INVALID_CONFIG
        out = capsys.readouterr().out
        assert "seed must be a 64-bit unsigned integer" in out
        assert "r must be a rate" in out
        assert "N must be an integer" in out

    def test_malformed_simulation_setting(self, tmp_path, capsys):
        config = write_config(tmp_path / 'bad.yaml', GOLDEN_SYSTEM, {'rounds': 'two', 'writers_per_round': 1})
        assert main(['run', '--config', str(config)]) == EXIT_INVALID_CONFIG
        assert "Malformed simulation" in capsys.readouterr().out

    def test_permutation_must_reorder_every_subpacket(self, tmp_path, capsys):
        config = write_config(tmp_path / 'bad.yaml', dict(GOLDEN_SYSTEM, permutation=[1, 1, 2, 3, 4]))
        assert main(['run', '--config', str(config)]) == EXIT_INVALID_CONFIG
        assert "permutation must reorder 1..5" in capsys.readouterr().out

    def test_audit_with_negative_seed(self, tmp_path, capsys):
        config = write_config(tmp_path / 'bad.yaml', dict(TINY_SYSTEM, seed=-1))
        assert main(['audit', '--config', str(config), '--quiet']) == EXIT_INVALID_CONFIG
        assert "seed must be a 64-bit unsigned integer" in capsys.readouterr().out

    def test_field_too_small_for_run(self, tmp_path, capsys):
        config = write_config(tmp_path / 'tiny.yaml', TINY_SYSTEM)
        assert main(['run', '--config', str(config)]) == EXIT_INVALID_CONFIG
        assert "field too small" in capsys.readouterr().out

    def test_reports_are_reproducible(self, golden_config, tmp_path):
        first, second = tmp_path / 'a', tmp_path / 'b'
        main(['run', '--config', str(golden_config), '--out', str(first)])
        main(['run', '--config', str(golden_config), '--out', str(second)])
        for name in ('transcript.jsonl', 'cost_report.csv', 'verification_report.csv', 'summary.md'):
            assert (first / name).read_bytes() == (second / name).read_bytes()

    def test_seed_override(self, golden_config, tmp_path):
        first, second = tmp_path / 'a', tmp_path / 'b'
        main(['run', '--config', str(golden_config), '--out', str(first)])
        main(['run', '--config', str(golden_config), '--out', str(second), '--seed', '6'])
        assert (first / 'transcript.jsonl').read_bytes() != (second / 'transcript.jsonl').read_bytes()


class TestVerify:

    def test_replay_matches(self, golden_config, tmp_path):
        out = tmp_path / 'out'
        main(['run', '--config', str(golden_config), '--out', str(out)])
        assert main(['verify', '--config', str(golden_config), '--out', str(out)]) == EXIT_OK

    def test_tampered_transcript_fails(self, golden_config, tmp_path, capsys):
        out = tmp_path / 'out'
        main(['run', '--config', str(golden_config), '--out', str(out)])
        path = out / 'transcript.jsonl'
        lines = path.read_text(encoding='utf-8').splitlines(keepends=True)
        record = json.loads(lines[3])
        record['symbol_count'] += 1
        lines[3] = json.dumps(record, sort_keys=True, separators=(',', ':')) + '\n'
        path.write_text(''.join(lines), encoding='utf-8')
        assert main(['verify', '--config', str(golden_config), '--transcript', str(path)]) == EXIT_FAILED
        assert "First difference at record 4" in capsys.readouterr().out

    def test_missing_transcript(self, golden_config, tmp_path):
        assert main(['verify', '--config', str(golden_config), '--out', str(tmp_path / 'none')]) == EXIT_FAILED


class TestAudit:

    def test_tiny_audit_passes(self, tmp_path):
        config = write_config(tmp_path / 'tiny.yaml', TINY_SYSTEM)
        out = tmp_path / 'audit'
        assert main(['audit', '--config', str(config), '--out', str(out), '--quiet']) == EXIT_OK
        report = json.loads((out / 'audit_report.json').read_text(encoding='utf-8'))
        assert report['summary']['ok'] is True
        assert report['summary']['negatives_detected'] == report['summary']['negatives'] == 4
        assert (out / 'audit_report.csv').exists()

    def test_sabotaged_audit_fails(self, tmp_path):
        config = write_config(tmp_path / 'tiny.yaml', TINY_SYSTEM)
        argv = ['audit', '--config', str(config), '--out', str(tmp_path / 'audit'),
                '--sabotage', 'zero-query-noise', '--quiet']
        assert main(argv) == EXIT_FAILED

    def test_invalid_audit_config(self, tmp_path):
        config = write_config(tmp_path / 'bad.yaml', dict(TINY_SYSTEM, N=8))
        assert main(['audit', '--config', str(config), '--quiet']) == EXIT_INVALID_CONFIG


class TestCosts:

    def test_cost_table(self, tmp_path, capsys):
        config = write_config(tmp_path / 'costs.yaml',
                              {'N': 6, 'M': 2, 'P': 11, 'ell': 1, 'q': 11, 'r': '2/11', 'seed': 3})
        out = tmp_path / 'costs'
        argv = ['costs', '--config', str(config), '--out', str(out),
                '--r-grid', '1/11,2/11', '--r-prime-grid', '0,1']
        assert main(argv) == EXIT_OK
        with open(out / 'cost_table.csv', newline='') as f:
            rows = list(csv.DictReader(f))
        assert len(rows) == 4
        full = next(row for row in rows if row['r'] == '2/11' and row['r_prime'] == '1')
        assert float(full['C_R']) == pytest.approx(8.0)
        assert float(full['C_W']) == pytest.approx(24 / 11)
        assert float(full['baseline_per_phase']) == pytest.approx(3.0)
        assert "THEORETICAL COSTS" in capsys.readouterr().out

    def test_empty_grid_writes_header_only(self, tmp_path):
        config = write_config(tmp_path / 'costs.yaml',
                              {'N': 6, 'M': 2, 'P': 11, 'ell': 1, 'q': 11, 'r': '2/11', 'seed': 3})
        out = tmp_path / 'costs'
        argv = ['costs', '--config', str(config), '--out', str(out), '--r-grid', ',']
        assert main(argv) == EXIT_OK
        assert (out / 'cost_table.csv').read_text(encoding='utf-8') == \
            'r,r_prime,C_R,C_W,C_T,baseline_per_phase,baseline_total\n'

    def test_unparseable_grid_entry(self, tmp_path, capsys):
        config = write_config(tmp_path / 'costs.yaml',
                              {'N': 6, 'M': 2, 'P': 11, 'ell': 1, 'q': 11, 'r': '2/11', 'seed': 3})
        argv = ['costs', '--config', str(config), '--out', str(tmp_path / 'costs'), '--r-grid', '1/11,x']
        assert main(argv) == EXIT_INVALID_CONFIG
        assert "--r-grid entries must be rates" in capsys.readouterr().out
