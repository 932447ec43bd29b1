"""
Report Writer for the PRUW simulator.
Writes the transcript, per-round cost and verification tables, audit
results (CSV and JSON) and a markdown summary into the output directory.
Nothing time-dependent is written, so reports are byte-identical for a
fixed seed and config.
"""

import csv
import io
import json
from pathlib import Path
from typing import Dict, List, Optional, Sequence

from audit.privacy_auditor import AuditReport
from orchestrator.cost_ledger import MeasuredCosts, Transcript
from orchestrator.round_orchestrator import SimulationResult, VerificationReport
from params.system_params import ValidatedParams


COST_COLUMNS = [
    'round', 'readers', 'writers', 'r_prime',
    'C_R_wire', 'C_W_wire', 'C_T_wire',
    'C_R_nominal', 'C_W_nominal', 'C_T_nominal',
    'C_R_theory', 'C_W_theory', 'C_T_theory',
    'read_slack', 'write_slack', 'baseline',
]
VERIFICATION_COLUMNS = ['round', 'equal', 'mismatch_count', 'submodel', 'subpacket', 'bit', 'expected', 'actual']
COST_TABLE_COLUMNS = ['r', 'r_prime', 'C_R', 'C_W', 'C_T', 'baseline_per_phase', 'baseline_total']
AUDIT_COLUMNS = ['audit', 'test', 'mode', 'control', 'statistic', 'threshold',
                 'samples', 'passed', 'expected_pass', 'ok', 'note']


def to_csv(columns: Sequence[str], rows: List[Dict]) -> str:
    buffer = io.StringIO()
    writer = csv.DictWriter(buffer, fieldnames=list(columns), lineterminator='\n')
    writer.writeheader()
    for row in rows:
        writer.writerow(row)
    return buffer.getvalue()


class ReportWriter:
    """Writes every report file under one output directory."""

    TRANSCRIPT_FILE = 'transcript.jsonl'
    COST_FILE = 'cost_report.csv'
    VERIFICATION_FILE = 'verification_report.csv'
    AUDIT_CSV_FILE = 'audit_report.csv'
    AUDIT_JSON_FILE = 'audit_report.json'
    SUMMARY_FILE = 'summary.md'

    def __init__(self, out_dir: str, logger=None):
        self.out_dir = Path(out_dir)
        self.logger = logger

    def _write(self, filename: str, content: str) -> Path:
        path = self.out_dir / filename
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(content, encoding='utf-8')
        if self.logger:
            self.logger.log_file_operation("Wrote", str(path), True)
        return path

    def write_transcript(self, transcript: Transcript) -> Path:
        return self._write(self.TRANSCRIPT_FILE, transcript.to_jsonl())

    def write_cost_report(self, costs: List[MeasuredCosts]) -> Path:
        return self._write(self.COST_FILE, to_csv(COST_COLUMNS, [c.as_row() for c in costs]))

    def write_verification_report(self, verifications: List[VerificationReport]) -> Path:
        return self._write(self.VERIFICATION_FILE,
                           to_csv(VERIFICATION_COLUMNS, [v.as_row() for v in verifications]))

    def write_audit_report(self, report: AuditReport) -> List[Path]:
        rows = [t.as_row() for t in report.tests]
        json_report = {
            'summary': {
                'ok': report.ok,
                'tests': len(report.tests),
                'positives_passed': sum(1 for t in report.positives if t.passed),
                'positives': len(report.positives),
                'negatives_detected': sum(1 for t in report.negatives if not t.passed),
                'negatives': len(report.negatives),
            },
            'warnings': report.warnings,
            'tests': rows,
        }
        return [
            self._write(self.AUDIT_CSV_FILE, to_csv(AUDIT_COLUMNS, rows)),
            self._write(self.AUDIT_JSON_FILE, json.dumps(json_report, indent=2, ensure_ascii=False) + '\n'),
        ]

    def write_run_summary(self, params: ValidatedParams, result: SimulationResult) -> Path:
        lines = [
            "# PRUW Simulation Report",
            "",
            f"Databases (N): {params.N}",
            f"Submodels (M): {params.M}, subpackets (P): {params.P}, subpacketization (ℓ): {params.ell}",
            f"Field: F_{params.q}, r = {params.r}, seed = {params.seed}",
            f"Rounds: {len(result.rounds)}",
            f"Verification: {'PASSED' if result.verified else 'FAILED'}",
            "",
            "## Rounds",
            "",
            "| Round | Readers | Writers | |V~| read | Read errors | Symbols |",
            "|-------|---------|---------|-----------|-------------|---------|",
        ]
        for r in result.rounds:
            lines.append(
                f"| {r.round} | {len(r.readers)} | {len(r.writers)} | {len(r.v_tilde_read)} "
                f"| {r.read_mismatches} | {r.symbols} |"
            )
        lines += [
            "",
            "## Costs",
            "",
            "| Round | r' | C_R | C_R theory | C_W | C_W theory | Baseline |",
            "|-------|----|-----|------------|-----|------------|----------|",
        ]
        for c in result.costs:
            row = c.as_row()
            lines.append(
                f"| {c.round} | {row['r_prime']} | {row['C_R_wire']} | {row['C_R_theory']} "
                f"| {row['C_W_wire']} | {row['C_W_theory']} | {row['baseline']} |"
            )

        failures = [v for v in result.verifications if not v.equal]
        lines += ["", "## Verification", ""]
        if failures:
            for v in failures:
                lines.append(
                    f"**Round {v.round}**: {v.mismatch_count} mismatches, first at "
                    f"submodel {v.first_mismatch[0]}, subpacket {v.first_mismatch[1]}, "
                    f"bit {v.first_mismatch[2]} (expected {v.expected}, got {v.actual})"
                )
        else:
            lines.append("Decoded state equals the plaintext oracle after every round.")
        lines.append("")
        return self._write(self.SUMMARY_FILE, '\n'.join(lines))

    def write_audit_summary(self, report: AuditReport) -> Path:
        lines = [
            "# Privacy Audit Report",
            "",
            f"Result: {'PASSED' if report.ok else 'FAILED'}",
            f"Tests: {len(report.tests)} ({len(report.positives)} honest, {len(report.negatives)} negative controls)",
            "",
        ]
        if report.warnings:
            lines += ["## Warnings", ""]
            lines += [f"- {w}" for w in report.warnings]
            lines.append("")
        lines += [
            "## Tests",
            "",
            "| Audit | Test | Mode | Control | Statistic | Threshold | Passed | OK |",
            "|-------|------|------|---------|-----------|-----------|--------|----|",
        ]
        for t in report.tests:
            lines.append(
                f"| {t.audit} | {t.name} | {t.mode} | {t.control} | {t.statistic:.6g} "
                f"| {t.threshold:.6g} | {t.passed} | {'yes' if t.ok else '**NO**'} |"
            )
        lines.append("")
        return self._write(self.SUMMARY_FILE, '\n'.join(lines))

    def write_cost_table(self, rows: List[Dict], columns: Optional[Sequence[str]] = None) -> Path:
        """An empty grid still gets the header row."""
        columns = columns or COST_TABLE_COLUMNS
        return self._write('cost_table.csv', to_csv(columns, rows))
