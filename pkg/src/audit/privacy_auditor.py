"""
Privacy Auditor for the PRUW simulator.
Checks, one database at a time, that what a database sees does not depend
on the submodel index, the update values or the stored submodels.
Tiny fields are enumerated exhaustively (exact multiset / posterior
equality); larger ones are sampled and chi-square tested with a Bonferroni
correction. Each audit is paired with negative controls that disable one
noise channel and must be detected.
"""

from collections import Counter
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property
from itertools import combinations, product
from math import comb, factorial
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np
from scipy.stats import chi2_contingency, chisquare
from tqdm import tqdm

from audit.database_view import DatabaseView, as_rows, assert_secret_free, collect_view
from client.client_session import ClientSession, query_vector
from client.update_encoder import SparseUpdate, emit_write_pairs, random_sparse_update, write_pairs_for
from coordinator.setup_coordinator import (
    Permutation,
    SetupCoordinator,
    build_reversing_matrix,
    encode_storage,
    sample_permutation,
)
from database.database_server import DatabaseServer
from field.noise import NoisePolicy, noise_stream
from field.prime_field import PrimeField, to_ints
from orchestrator.round_orchestrator import PRUWOrchestrator, RoundPlan, WriterPlan
from params.run_config import RunConfig
from params.system_params import (
    FieldTooSmallError,
    ParameterError,
    PriorDistribution,
    SystemParams,
    ValidatedParams,
    as_rate,
    generate_audit_constants,
    structural_violations,
)


# Largest number of realizations an exhaustive audit may enumerate.
EXHAUSTIVE_LIMIT = 250_000
# Fields above this size give too few samples per symbol at desk-scale trial counts.
STATISTICAL_FIELD_LIMIT = 11
MIN_EXPECTED_COUNT = 5
# Each post-write trial runs a full setup and write, so it gets this share of the trial budget.
POST_WRITE_TRIAL_SHARE = 10

NEGATIVE_CONTROLS = (
    ('submodel_privacy', 'zero-query-noise'),
    ('update_privacy', 'published-permutation'),
    ('update_privacy', 'zero-update-noise'),
    ('storage_security', 'zero-storage-noise'),
)


@dataclass(frozen=True)
class AuditTarget:
    """Public constants of the databases under audit."""
    q: int
    M: int
    P: int
    ell: int
    r: Fraction
    seed: int
    f: Tuple[int, ...]
    alphas: Tuple[int, ...]

    @cached_property
    def field(self) -> PrimeField:
        return PrimeField(self.q)

    @property
    def writes_per_user(self) -> int:
        return int(self.P * self.r)

    @property
    def noise_degree(self) -> int:
        return 2 * self.ell

    def protocol_params(self, seed: Optional[int] = None) -> ValidatedParams:
        """
        A params handle over exactly the audited databases, for driving the
        real setup, client and database code. Built directly because a
        single-database view has N=1 and never decodes.
        """
        raw = SystemParams(
            N=len(self.alphas), M=self.M, P=self.P, ell=self.ell, L=self.P * self.ell, q=self.q,
            f=self.f, alpha=self.alphas, r=self.r, seed=self.seed if seed is None else seed,
        )
        return ValidatedParams(params=raw, field=self.field)

    @classmethod
    def from_run_config(cls, config: RunConfig) -> 'AuditTarget':
        """
        All N databases when the field can hold every constant; otherwise a
        single database with audit-only constants (tiny exhaustive fields).

        Raises:
            ParameterError: for any structural violation other than field size
        """
        s = config.system
        try:
            params = config.validated()
            return cls(q=params.q, M=params.M, P=params.P, ell=params.ell, r=params.r,
                       seed=params.seed, f=params.f, alphas=params.alpha)
        except FieldTooSmallError:
            pass
        raw = SystemParams(
            N=int(s['N']), M=int(s['M']), P=int(s['P']), ell=int(s['ell']),
            L=int(s.get('L', int(s['P']) * int(s['ell']))), q=int(s['q']),
            r=as_rate(s.get('r', 0)), seed=int(s.get('seed', 0)),
        )
        violations = structural_violations(raw)
        if violations:
            raise ParameterError(violations)
        f, alpha = generate_audit_constants(raw.ell, raw.q, raw.seed)
        return cls(q=raw.q, M=raw.M, P=raw.P, ell=raw.ell, r=raw.r, seed=raw.seed,
                   f=f, alphas=(alpha,))


@dataclass
class AuditTest:
    audit: str
    name: str
    mode: str
    control: str
    statistic: float
    threshold: float
    samples: int
    passed: bool
    expected_pass: bool = True
    note: str = ''

    @property
    def ok(self) -> bool:
        """Honest tests must pass; negative controls must fail."""
        return self.passed == self.expected_pass

    def as_row(self) -> Dict:
        return {
            'audit': self.audit,
            'test': self.name,
            'mode': self.mode,
            'control': self.control,
            'statistic': f"{self.statistic:.6g}",
            'threshold': f"{self.threshold:.6g}",
            'samples': self.samples,
            'passed': self.passed,
            'expected_pass': self.expected_pass,
            'ok': self.ok,
            'note': self.note,
        }


@dataclass
class AuditReport:
    tests: List[AuditTest] = field(default_factory=list)
    warnings: List[str] = field(default_factory=list)

    def extend(self, other: 'AuditReport'):
        self.tests.extend(other.tests)
        self.warnings.extend(w for w in other.warnings if w not in self.warnings)

    @property
    def ok(self) -> bool:
        return bool(self.tests) and all(t.ok for t in self.tests)

    @property
    def positives(self) -> List[AuditTest]:
        return [t for t in self.tests if t.expected_pass]

    @property
    def negatives(self) -> List[AuditTest]:
        return [t for t in self.tests if not t.expected_pass]


def exhaustive_workload(target: AuditTarget) -> Dict[str, int]:
    """Realizations each exhaustive audit would enumerate per database."""
    q, P, b = target.q, target.P, target.writes_per_user
    return {
        'submodel_privacy': q ** (2 * target.ell * target.M),
        'update_privacy': comb(P, b) * (q - 1) ** (b * target.ell) * factorial(P) * q ** b * q ** (P * P),
        'storage_security': q * q ** (target.noise_degree + 1),
    }


def uniformity_p_value(counts: np.ndarray) -> float:
    counts = np.asarray(counts)
    if counts.sum() == 0:
        return 1.0
    _, p = chisquare(counts)
    return float(p)


def independence_p_value(table: np.ndarray) -> float:
    """Homogeneity of the rows; categories never observed are dropped first."""
    table = np.asarray(table)
    table = table[:, table.sum(axis=0) > 0]
    table = table[table.sum(axis=1) > 0]
    if table.shape[0] < 2 or table.shape[1] < 2:
        return 1.0
    _, p, _, _ = chi2_contingency(table)
    return float(p)


def multiset_distance(left: Counter, right: Counter) -> int:
    return sum(((left - right) + (right - left)).values())


class PrivacyAuditor:
    """Runs the three audits over single-database views."""

    def __init__(self, target: AuditTarget, trials: int = 10000, significance: float = 0.01,
                 exhaustive: str = 'auto', logger=None, show_progress: bool = False):
        self.target = target
        self.trials = trials
        self.significance = significance
        self.logger = logger
        self.show_progress = show_progress
        self.warnings: List[str] = []
        self.mode = self._select_mode(exhaustive)

    def _warn(self, message: str):
        if message not in self.warnings:
            self.warnings.append(message)
            if self.logger:
                self.logger.warning(message)

    def _select_mode(self, exhaustive: str) -> str:
        workload = exhaustive_workload(self.target)
        feasible = max(workload.values()) <= EXHAUSTIVE_LIMIT
        exhaustive = str(exhaustive).lower()
        if exhaustive == 'false':
            mode = 'statistical'
        elif feasible:
            mode = 'exhaustive'
        else:
            if exhaustive == 'true':
                self._warn(f"Exhaustive audit infeasible (workload {workload}); using statistical mode")
            mode = 'statistical'
        if mode == 'statistical' and self.target.q > STATISTICAL_FIELD_LIMIT:
            self._warn(
                f"q={self.target.q} exceeds {STATISTICAL_FIELD_LIMIT}: statistical audits are "
                f"underpowered and only exhaustive audits give exact results; statistical-only mode"
            )
        return mode

    def _check_power(self, categories: int, samples: int, what: str):
        if samples / max(categories, 1) < MIN_EXPECTED_COUNT:
            self._warn(
                f"Underpowered {what}: {samples} samples over {categories} categories "
                f"(< {MIN_EXPECTED_COUNT} expected per category)"
            )

    def _progress(self, iterable, desc: str):
        return tqdm(iterable, desc=desc, disable=not self.show_progress, leave=False)

    def _finish(self, audit: str, tests: List[AuditTest]) -> AuditReport:
        report = AuditReport(tests=tests, warnings=list(self.warnings))
        if self.logger:
            for test in tests:
                self.logger.log_audit_result(test)
        return report

    def _statistical_test(self, audit: str, name: str, control: str, p_values: Sequence[float],
                          samples: int, expected_pass: bool) -> AuditTest:
        threshold = self.significance / max(len(p_values), 1)
        worst = min(p_values) if p_values else 1.0
        return AuditTest(
            audit=audit, name=name, mode='statistical', control=control,
            statistic=worst, threshold=threshold, samples=samples,
            passed=worst > threshold, expected_pass=expected_pass,
            note=f"min p-value over {len(p_values)} cells, Bonferroni-corrected",
        )

    @staticmethod
    def _control_name(policy: NoisePolicy) -> str:
        if policy.is_honest:
            return 'honest'
        return next(name for name in ('zero-query-noise', 'zero-storage-noise',
                                      'zero-update-noise', 'published-permutation')
                    if getattr(policy, name.replace('-', '_')))

    # ------------------------------------------------------------------
    # Submodel privacy: queries independent of theta
    # ------------------------------------------------------------------

    def audit_submodel_privacy(self, policy: NoisePolicy = NoisePolicy(),
                               expected_pass: bool = True) -> AuditReport:
        control = self._control_name(policy)
        if self.mode == 'exhaustive':
            tests = [self._exhaustive_submodel(policy, control, expected_pass)]
        else:
            tests = [self._statistical_submodel(policy, control, expected_pass)]
        return self._finish('submodel_privacy', tests)

    def _exhaustive_submodel(self, policy, control, expected_pass) -> AuditTest:
        """Two rounds of queries; fresh noise each round; multisets per theta must coincide."""
        t = self.target
        support = policy.support('query', t.field, t.ell * t.M).reshape(-1, t.ell, t.M)
        distance = samples = 0
        for n, alpha in enumerate(t.alphas, start=1):
            multisets = []
            for theta in range(1, t.M + 1):
                rows = as_rows(query_vector(t.field, t.f, alpha, theta, t.M, support))
                views = Counter(DatabaseView(database=n, queries=(first, second))
                                for first, second in product(rows, repeat=2))
                assert_secret_free(next(iter(views)))
                multisets.append(views)
                samples += sum(views.values())
            distance += sum(multiset_distance(multisets[0], other) for other in multisets[1:])
        return AuditTest(
            audit='submodel_privacy', name='query_view_multiset', mode='exhaustive',
            control=control, statistic=float(distance), threshold=0.0, samples=samples,
            passed=distance == 0, expected_pass=expected_pass,
            note='two-round query views, multiset difference across theta',
        )

    def _statistical_submodel(self, policy, control, expected_pass) -> AuditTest:
        """
        One simulation per theta from the same setup seed and update script;
        each database's query view is collected from the run and tabulated
        per coordinate.
        """
        t = self.target
        width = t.ell * t.M
        tables = np.zeros((len(t.alphas), width, t.M, t.q), dtype=np.int64)
        for theta in range(1, t.M + 1):
            orchestrator = PRUWOrchestrator(t.protocol_params(), noise_policy=policy)
            for trial in self._progress(range(1, self.trials + 1), f"submodel audit (theta={theta})"):
                update = random_sparse_update(t.field, t.P, t.ell, t.r,
                                              noise_stream(t.seed, 'audit:update', trial))
                session = orchestrator.open_session(theta, session_id=f"audit{theta}-{trial}")
                orchestrator.run_round(RoundPlan(round=trial, writers=[WriterPlan(session, update)]))
            for n in range(1, len(t.alphas) + 1):
                view = collect_view(orchestrator, n)
                assert_secret_free(view)
                observed = np.array(view.queries, dtype=np.int64)
                for j in range(width):
                    tables[n - 1, j, theta - 1] = np.bincount(observed[:, j], minlength=t.q)

        p_values = []
        for per_db in tables:
            for table in per_db:
                p_values.extend(uniformity_p_value(row) for row in table)
                p_values.append(independence_p_value(table))
        self._check_power(t.q, self.trials, 'query marginal test')
        return self._statistical_test('submodel_privacy', 'query_marginals', control,
                                      p_values, self.trials * t.M, expected_pass)

    # ------------------------------------------------------------------
    # Update privacy: positions and symbols independent of the update
    # ------------------------------------------------------------------

    def audit_update_privacy(self, policy: NoisePolicy = NoisePolicy(),
                             expected_pass: bool = True) -> AuditReport:
        control = self._control_name(policy)
        if self.mode == 'exhaustive':
            tests = [self._exhaustive_update(policy, control, expected_pass)]
        else:
            tests = self._statistical_update(policy, control, expected_pass)
        return self._finish('update_privacy', tests)

    @staticmethod
    def _pairs_view(n: int, pairs, reversing) -> DatabaseView:
        return DatabaseView(
            database=n,
            write_pairs=tuple((pair.permuted_position, pair.update_symbol.value) for pair in pairs),
            reversing_matrix=as_rows(reversing.array),
        )

    def _exhaustive_update(self, policy, control, expected_pass) -> AuditTest:
        """
        Enumerate B, nonzero deltas, P~, Z^ and Z_bar; the posterior of the
        first symbol of subpacket 1 given the view must equal the prior.
        """
        t = self.target
        field = t.field
        q, P, ell, b = t.q, t.P, t.ell, t.writes_per_user
        prior = PriorDistribution.from_rate(Fraction(b, P), q)
        if policy.published_permutation:
            permutations = [Permutation.identity(P)]
        else:
            permutations = list(Permutation.enumerate_all(P))
        z_bar_support = [field.matrix(z) for z in policy.support('reversing', field, P * P).reshape(-1, P, P)]
        z_hat_support = to_ints(policy.support('update', field, b))
        delta_support = list(product(range(1, q), repeat=b * ell))

        worst = Fraction(0)
        samples = 0
        for n, alpha in enumerate(t.alphas, start=1):
            reversing = {
                perm: [build_reversing_matrix(perm.reversing_matrix(field), z_bar, t.f, alpha)
                       for z_bar in z_bar_support]
                for perm in permutations
            }
            joint: Counter = Counter()
            totals: Counter = Counter()
            for subset in combinations(range(1, P + 1), b):
                for flat in delta_support:
                    update = SparseUpdate(subset, {s: tuple(flat[i * ell:(i + 1) * ell])
                                                   for i, s in enumerate(subset)})
                    secret = update.delta(1, ell)[0]
                    for z_hat in z_hat_support:
                        z_full = np.zeros(P, dtype=np.int64)
                        z_full[[s - 1 for s in subset]] = z_hat
                        for perm in permutations:
                            pairs = write_pairs_for(field, t.f, update, perm, alpha, z_full)
                            for matrix in reversing[perm]:
                                view = self._pairs_view(n, pairs, matrix)
                                joint[(view, secret)] += 1
                                totals[view] += 1
            assert_secret_free(next(iter(totals)))
            samples += sum(totals.values())
            for view, total in totals.items():
                for value in range(q):
                    gap = abs(Fraction(joint[(view, value)], total) - prior.probability(value))
                    worst = max(worst, gap)

        return AuditTest(
            audit='update_privacy', name='update_posterior_equals_prior', mode='exhaustive',
            control=control, statistic=float(worst), threshold=0.0, samples=samples,
            passed=worst == 0, expected_pass=expected_pass,
            note=f"prior: 0 w.p. {prior.zero_mass}, each nonzero w.p. {prior.nonzero_mass_each}",
        )

    def _statistical_update(self, policy, control, expected_pass) -> List[AuditTest]:
        t = self.target
        field = t.field
        q, P, ell = t.q, t.P, t.ell
        b = t.writes_per_user
        size = b if 0 < b < P else 1
        subset = tuple(range(1, size + 1))
        index_of = {c: i for i, c in enumerate(combinations(range(1, P + 1), size))}

        rng = noise_stream(t.seed, 'audit:setup')
        position_counts = np.zeros(len(index_of), dtype=np.int64)
        symbol_tables = np.zeros((len(t.alphas), 2, q), dtype=np.int64)
        reversing_counts = np.zeros((len(t.alphas), P * P, q), dtype=np.int64)

        for trial in self._progress(range(self.trials), 'update audit'):
            perm = sample_permutation(P, rng, policy)
            z_bar = field.matrix(policy.sample('reversing', field, rng, (P, P)))
            z_hat = np.zeros(P, dtype=np.int64)
            z_hat[:size] = to_ints(policy.sample('update', field, rng, (size,)))
            planted = trial % 2
            dense = np.zeros((P, ell), dtype=np.int64)
            if planted:
                dense[:size] = to_ints(field.random_nonzero_array(rng, (size, ell)))
            update = SparseUpdate.from_dense(dense, subset)
            R = perm.reversing_matrix(field)
            for n, alpha in enumerate(t.alphas, start=1):
                pairs = write_pairs_for(field, t.f, update, perm, alpha, z_hat)
                view = self._pairs_view(n, pairs, build_reversing_matrix(R, z_bar, t.f, alpha))
                if trial == 0:
                    assert_secret_free(view)
                if n == 1:
                    position_counts[index_of[view.positions()]] += 1
                symbol_tables[n - 1, planted, view.symbols()[0]] += 1
                flat = [v for row in view.reversing_matrix for v in row]
                reversing_counts[n - 1, np.arange(P * P), flat] += 1

        self._check_power(len(index_of), self.trials, 'position-set test')
        self._check_power(q, self.trials // 2, 'update-symbol test')

        position_p = [uniformity_p_value(position_counts)] if len(index_of) > 1 else []
        symbol_p = []
        for table in symbol_tables:
            symbol_p.extend(uniformity_p_value(row) for row in table)
            symbol_p.append(independence_p_value(table))
        reversing_p = [uniformity_p_value(counts) for per_db in reversing_counts for counts in per_db]

        # A sabotaged channel is only expected to break the test that observes it.
        positions_expected = expected_pass or not (policy.is_honest or policy.published_permutation)
        symbols_expected = expected_pass or not (policy.is_honest or policy.zero_update_noise)
        tests = [
            self._statistical_test('update_privacy', 'position_set_uniform', control,
                                   position_p + reversing_p, self.trials, positions_expected),
            self._statistical_test('update_privacy', 'update_symbol_marginals', control,
                                   symbol_p, self.trials, symbols_expected),
        ]
        tests[0].note += f"; |B|={size} over {len(index_of)} subsets plus R_n entries"
        return tests

    # ------------------------------------------------------------------
    # Storage security: stored symbols independent of the models
    # ------------------------------------------------------------------

    def audit_storage_security(self, policy: NoisePolicy = NoisePolicy(),
                               expected_pass: bool = True) -> AuditReport:
        control = self._control_name(policy)
        if self.mode == 'exhaustive':
            tests = [self._exhaustive_storage(policy, control, expected_pass)]
        else:
            tests = [self._statistical_storage(policy, control, expected_pass)]
        # The zero-storage-noise control targets the initial encoding only.
        if not policy.zero_storage_noise:
            tests.append(self._post_write_storage(policy, control, expected_pass))
        return self._finish('storage_security', tests)

    def _encoded_batch(self, planted: int, noise, alpha: int) -> np.ndarray:
        """
        encode_storage over a batch: realization i plays subpacket i, every
        model symbol is `planted`. Returns (K, ell*M) stored symbols.
        """
        t = self.target
        models = np.full((t.M, noise.shape[0], t.ell), planted, dtype=np.int64)
        return to_ints(encode_storage(t.field, models, noise, t.f, alpha))

    def _exhaustive_storage(self, policy, control, expected_pass) -> AuditTest:
        """Each stored symbol has its own noise, so per-symbol multisets decide the whole storage."""
        t = self.target
        support = to_ints(policy.support('storage', t.field, t.noise_degree + 1))
        noise = np.broadcast_to(support[:, np.newaxis, np.newaxis, :],
                                (support.shape[0], t.ell, t.M, support.shape[1]))
        distance = samples = 0
        for n, alpha in enumerate(t.alphas, start=1):
            by_planted = [self._encoded_batch(planted, noise, alpha) for planted in range(t.q)]
            for j in range(t.ell * t.M):
                multisets = [Counter(DatabaseView(database=n, storage=(((int(v),),),)) for v in stored[:, j])
                             for stored in by_planted]
                assert_secret_free(next(iter(multisets[0])))
                samples += sum(sum(m.values()) for m in multisets)
                distance += sum(multiset_distance(multisets[0], other) for other in multisets[1:])
        return AuditTest(
            audit='storage_security', name='stored_symbol_multiset', mode='exhaustive',
            control=control, statistic=float(distance), threshold=0.0, samples=samples,
            passed=distance == 0, expected_pass=expected_pass,
            note='multiset of encoded values for every planted W against W=0',
        )

    def _statistical_storage(self, policy, control, expected_pass) -> AuditTest:
        t = self.target
        width = t.ell * t.M
        p_values = []
        for n, alpha in enumerate(t.alphas, start=1):
            tables = np.zeros((width, 2, t.q), dtype=np.int64)
            for planted in (0, 1):
                rng = noise_stream(t.seed, 'audit:storage', n, planted)
                noise = policy.sample('storage', t.field, rng, (self.trials, t.ell, t.M, t.noise_degree + 1))
                stored = self._encoded_batch(planted, noise, alpha)
                assert_secret_free(DatabaseView(database=n, storage=(as_rows(stored[:1]),)))
                for j in range(width):
                    tables[j, planted] = np.bincount(stored[:, j], minlength=t.q)
            for table in tables:
                p_values.extend(uniformity_p_value(row) for row in table)
                p_values.append(independence_p_value(table))
        self._check_power(t.q, self.trials, 'storage marginal test')
        return self._statistical_test('storage_security', 'stored_symbol_marginals', control,
                                      p_values, 2 * self.trials, expected_pass)

    def _post_write_storage(self, policy, control, expected_pass) -> AuditTest:
        """
        Fresh setup per trial with every model symbol planted at 0 or 1, one
        write applied by each DatabaseServer, then subpacket 1 of S_n tabulated.
        """
        t = self.target
        trials = max(1, self.trials // POST_WRITE_TRIAL_SHARE)
        width = t.ell * t.M
        tables = np.zeros((len(t.alphas), width, 2, t.q), dtype=np.int64)
        for planted in (0, 1):
            models = np.full((t.M, t.P, t.ell), planted, dtype=np.int64)
            for trial in self._progress(range(trials), f"post-write storage (W={planted})"):
                params = t.protocol_params(seed=t.seed + 2 * trial + planted)
                setup = SetupCoordinator(params, noise_policy=policy).setup(models)
                session = ClientSession('audit', 1, setup.permutation_handout, params, policy)
                session.begin_round(1)
                update = random_sparse_update(t.field, t.P, t.ell, t.r,
                                              noise_stream(params.seed, 'audit:update'))
                pairs = emit_write_pairs(session, update)
                for state in setup.databases:
                    server = DatabaseServer(params, state)
                    u_tilde = server.collect_write(pairs[server.n], session.session_id)
                    server.apply_write(u_tilde, session.build_query(server.n))
                    view = DatabaseView(database=server.n, storage=(as_rows(server.state.storage),))
                    if trial == 0:
                        assert_secret_free(view)
                    for j, symbol in enumerate(view.storage[0][0]):
                        tables[server.n - 1, j, planted, symbol] += 1

        p_values = []
        for per_db in tables:
            for table in per_db:
                p_values.extend(uniformity_p_value(row) for row in table)
                p_values.append(independence_p_value(table))
        self._check_power(t.q, trials, 'post-write storage test')
        return self._statistical_test('storage_security', 'stored_symbols_after_write', control,
                                      p_values, 2 * trials, expected_pass)

    # ------------------------------------------------------------------

    def run_all(self, sabotage: Optional[str] = None) -> AuditReport:
        """
        All three audits under the given policy (honest unless sabotaged),
        followed by every negative control.
        """
        policy = NoisePolicy.from_sabotage(sabotage)
        report = AuditReport()
        report.extend(self.audit_submodel_privacy(policy))
        report.extend(self.audit_update_privacy(policy))
        report.extend(self.audit_storage_security(policy))

        runners = {
            'submodel_privacy': self.audit_submodel_privacy,
            'update_privacy': self.audit_update_privacy,
            'storage_security': self.audit_storage_security,
        }
        for audit, mode in NEGATIVE_CONTROLS:
            report.extend(runners[audit](NoisePolicy.from_sabotage(mode), expected_pass=False))
        report.warnings = list(self.warnings)
        return report
