#!/usr/bin/env python3
"""
Simulate private read-update-write (PRUW) for federated submodel learning.

Usage:
    python pruw_simulator.py run --config config.yaml
    python pruw_simulator.py run --config configs/golden.yaml --out output/golden --verbose
    python pruw_simulator.py audit --config configs/audit_tiny.yaml
    python pruw_simulator.py audit --config configs/audit_tiny.yaml --sabotage zero-query-noise
    python pruw_simulator.py costs --config config.yaml --r-grid 0.2,0.4 --r-prime-grid 0,0.5,1
    python pruw_simulator.py verify --config config.yaml --transcript output/transcript.jsonl
"""

import argparse
import sys
from pathlib import Path

# Add src to path for imports
sys.path.insert(0, str(Path(__file__).parent / 'src'))

from field.noise import SABOTAGE_MODES, NoisePolicy
from params.run_config import ConfigError, load_run_config
from params.system_params import (
    ParameterError,
    as_rate,
    baseline_cost,
    theoretical_read_cost,
    theoretical_write_cost,
)
from utils.logger import get_logger


EXIT_OK = 0
EXIT_FAILED = 1
EXIT_INVALID_CONFIG = 2
EXIT_INTERRUPTED = 130


def _print_violations(error: ParameterError):
    print("Invalid configuration:")
    for violation in error.violations:
        print(f"  - {violation}")


def _banner(title: str):
    print()
    print("=" * 60)
    print(title)
    print("=" * 60)


def _parse_grid(text: str, name: str):
    rates = []
    for v in text.split(','):
        if not v.strip():
            continue
        try:
            rates.append(as_rate(v))
        except (ValueError, ZeroDivisionError):
            raise ParameterError([f"{name} entries must be rates such as 0.25 or '1/4', got {v.strip()!r}"])
    return rates


def _run_simulation(args, config, logger) -> int:
    """Setup, rounds, verification after every round; writes transcript and reports."""
    from orchestrator.round_orchestrator import PRUWOrchestrator
    from reports.report_writer import ReportWriter

    params = config.validated()
    policy = NoisePolicy.from_sabotage(args.sabotage)
    out_dir = args.out or config.out_dir

    print(f"Running PRUW simulation: N={params.N}, M={params.M}, P={params.P}, "
          f"ℓ={params.ell}, q={params.q}, r={params.r}")
    print(f"Config: {args.config}")
    if not policy.is_honest:
        print(f"Sabotage: {args.sabotage}")
    print()

    orchestrator = PRUWOrchestrator.from_config(config, noise_policy=policy, logger=logger)
    result = orchestrator.simulate(config)

    writer = ReportWriter(out_dir, logger)
    writer.write_transcript(orchestrator.transcript)
    writer.write_cost_report(result.costs)
    writer.write_verification_report(result.verifications)
    writer.write_run_summary(params, result)

    _banner("SIMULATION COMPLETE")
    print(f"Rounds:        {len(result.rounds)}")
    print(f"Messages:      {len(orchestrator.transcript)}")
    print(f"Symbols:       {orchestrator.transcript.total_symbols()}")
    for costs in result.costs:
        row = costs.as_row()
        print(f"Round {costs.round}: C_R={row['C_R_wire']}  C_W={row['C_W_wire']}  r'={row['r_prime']}")
    failures = [v for v in result.verifications if not v.equal]
    print(f"Verification:  {'PASSED' if result.verified else 'FAILED'}")
    for v in failures:
        print(f"  - round {v.round}: {v.mismatch_count} mismatches, first at "
              f"(submodel, subpacket, bit) = {v.first_mismatch}")
    print(f"Output:        {out_dir}")
    print("=" * 60)
    print()
    return EXIT_OK if result.verified else EXIT_FAILED


def _run_audit(args, config, logger) -> int:
    """All three privacy audits plus negative controls."""
    from audit.privacy_auditor import AuditTarget, PrivacyAuditor
    from reports.report_writer import ReportWriter

    target = AuditTarget.from_run_config(config)
    out_dir = args.out or config.out_dir
    auditor = PrivacyAuditor(
        target,
        trials=args.trials or config.audit.trials,
        significance=config.audit.significance,
        exhaustive=config.audit.exhaustive,
        logger=logger,
        show_progress=not args.quiet,
    )

    print(f"Auditing {len(target.alphas)} database view(s): q={target.q}, M={target.M}, "
          f"P={target.P}, ℓ={target.ell}, r={target.r}")
    print(f"Mode: {auditor.mode}")
    if args.sabotage:
        print(f"Sabotage: {args.sabotage}")
    print()

    report = auditor.run_all(args.sabotage)
    writer = ReportWriter(out_dir, logger)
    writer.write_audit_report(report)
    writer.write_audit_summary(report)

    _banner("AUDIT COMPLETE")
    for test in report.tests:
        status = "OK " if test.ok else "BAD"
        kind = "control" if not test.expected_pass else "audit"
        print(f"[{status}] {kind:7} {test.audit}/{test.name} ({test.control}): "
              f"{'held' if test.passed else 'violated'}")
    for warning in report.warnings:
        print(f"Warning: {warning}")
    print(f"Result:        {'PASSED' if report.ok else 'FAILED'}")
    print(f"Output:        {out_dir}")
    print("=" * 60)
    print()
    return EXIT_OK if report.ok else EXIT_FAILED


def _run_costs(args, config, logger) -> int:
    """Closed-form costs over the r / r' grid, against the unsparsified baseline."""
    from reports.report_writer import ReportWriter

    params = config.validated()
    r_grid = _parse_grid(args.r_grid, '--r-grid') if args.r_grid else [params.r]
    default_r_primes = [as_rate(x) for x in ('0', '1/4', '1/2', '3/4', '1')]
    r_prime_grid = _parse_grid(args.r_prime_grid, '--r-prime-grid') if args.r_prime_grid else default_r_primes
    baseline = baseline_cost(params.N)

    rows = []
    for r in r_grid:
        write_cost = theoretical_write_cost(params, r)
        for r_prime in r_prime_grid:
            read_cost = theoretical_read_cost(params, r_prime)
            rows.append({
                'r': str(r),
                'r_prime': str(r_prime),
                'C_R': f"{float(read_cost):.6f}",
                'C_W': f"{float(write_cost):.6f}",
                'C_T': f"{float(read_cost + write_cost):.6f}",
                'baseline_per_phase': f"{float(baseline):.6f}",
                'baseline_total': f"{float(2 * baseline):.6f}",
            })

    _banner(f"THEORETICAL COSTS: N={params.N}, P={params.P}, q={params.q}, log_q P={float(params.log_q_p):.4f}")
    print(f"{'r':>8} {'r_prime':>8} {'C_R':>10} {'C_W':>10} {'C_T':>10} {'baseline':>10}")
    for row in rows:
        print(f"{row['r']:>8} {row['r_prime']:>8} {row['C_R']:>10} {row['C_W']:>10} "
              f"{row['C_T']:>10} {row['baseline_total']:>10}")
    print("=" * 60)
    print()

    ReportWriter(args.out or config.out_dir, logger).write_cost_table(rows)
    return EXIT_OK


def _run_verify(args, config, logger) -> int:
    """Replay the config and compare against a stored transcript byte for byte."""
    from orchestrator.cost_ledger import Transcript, conservation_holds, ledger_from_transcript
    from orchestrator.round_orchestrator import PRUWOrchestrator

    params = config.validated()
    transcript_path = Path(args.transcript or Path(args.out or config.out_dir) / 'transcript.jsonl')
    if not transcript_path.exists():
        print(f"Transcript not found: {transcript_path}")
        return EXIT_FAILED

    stored_text = transcript_path.read_text(encoding='utf-8')
    orchestrator = PRUWOrchestrator.from_config(
        config, noise_policy=NoisePolicy.from_sabotage(args.sabotage), logger=logger)
    result = orchestrator.simulate(config)
    replayed_text = orchestrator.transcript.to_jsonl()

    stored = Transcript.read(transcript_path)
    stored_ledger = ledger_from_transcript(params, stored)
    identical = stored_text == replayed_text
    conserved = conservation_holds(stored, stored_ledger)
    costs_match = all(
        stored_ledger.measured_costs(c.round) == c for c in result.costs
    )

    _banner("VERIFY COMPLETE")
    print(f"Transcript:          {transcript_path}")
    print(f"Byte-identical:      {identical}")
    print(f"Ledger conservation: {conserved}")
    print(f"Costs re-derived:    {costs_match}")
    print(f"Oracle equivalence:  {result.verified}")
    if not identical:
        replayed = replayed_text.splitlines()
        for i, line in enumerate(stored_text.splitlines()):
            if i >= len(replayed) or replayed[i] != line:
                print(f"First difference at record {i + 1}")
                break
    print("=" * 60)
    print()
    return EXIT_OK if identical and conserved and costs_match and result.verified else EXIT_FAILED


COMMANDS = {
    'run': _run_simulation,
    'audit': _run_audit,
    'costs': _run_costs,
    'verify': _run_verify,
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        description="Private read-update-write simulator for federated submodel learning",
        epilog="""\
commands:
  run      Trusted setup, then rounds of private reads and sparse writes.
           Writes transcript.jsonl, cost_report.csv, verification_report.csv
           and summary.md. Exit 0 iff the decoded state matches the plaintext
           oracle after every round.

  audit    Submodel, update and storage privacy audits on single-database
           views, exhaustive for tiny fields and chi-square otherwise, plus
           negative controls that must be detected.

  costs    Closed-form reading/writing costs over an r / r' grid next to the
           unsparsified baseline 2/(1-2/N).

  verify   Re-run a config and compare against a stored transcript.

exit codes: 0 success, 1 verification/audit failure, 2 invalid config, 130 interrupted
""",
        formatter_class=argparse.RawDescriptionHelpFormatter,
    )
    subparsers = parser.add_subparsers(dest='command', required=True)

    common = argparse.ArgumentParser(add_help=False)
    common.add_argument('--config', '-c', default='config.yaml',
                        help='Path to configuration file (default: config.yaml)')
    common.add_argument('--seed', type=int, default=None,
                        help='Override system.seed from the config')
    common.add_argument('--out', '-o', default=None,
                        help='Output directory (default: output.out_dir from the config)')
    common.add_argument('--verbose', '-v', action='store_true',
                        help='Enable verbose logging')
    common.add_argument('--sabotage', choices=SABOTAGE_MODES, default=None,
                        help='Disable one noise channel (negative controls)')

    subparsers.add_parser('run', parents=[common], help='Run a simulation')
    audit = subparsers.add_parser('audit', parents=[common], help='Run privacy audits')
    audit.add_argument('--trials', type=int, default=None,
                       help='Statistical trials per test (default: audit.trials from the config)')
    audit.add_argument('--quiet', '-q', action='store_true', help='Hide progress bars')
    costs = subparsers.add_parser('costs', parents=[common], help='Tabulate theoretical costs')
    costs.add_argument('--r-grid', default=None, help="Comma-separated r values (default: system.r)")
    costs.add_argument('--r-prime-grid', default=None, help="Comma-separated r' values")
    verify = subparsers.add_parser('verify', parents=[common], help='Replay and compare a transcript')
    verify.add_argument('--transcript', '-t', default=None,
                        help='Stored transcript (default: <out>/transcript.jsonl)')
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)

    try:
        config = load_run_config(args.config, seed_override=args.seed)
        if args.command != 'audit':
            # Audits fall back to small-field constants on their own.
            config.validated()
    except ConfigError as e:
        print(f"Invalid configuration: {e}")
        return EXIT_INVALID_CONFIG
    except ParameterError as e:
        _print_violations(e)
        return EXIT_INVALID_CONFIG

    logger = get_logger(None, args.verbose, logging_config=config.logging)

    try:
        return COMMANDS[args.command](args, config, logger)
    except ParameterError as e:
        _print_violations(e)
        return EXIT_INVALID_CONFIG
    except KeyboardInterrupt:
        print("\nInterrupted by user")
        return EXIT_INTERRUPTED
    except Exception as e:
        print(f"\nFatal error: {e}")
        logger.error(f"Fatal error: {e}")
        return EXIT_FAILED


if __name__ == '__main__':
    sys.exit(main())
