"""
System parameters for the PRUW scheme.
Validates the structural constraints, generates the public evaluation
constants and evaluates the closed-form reading/writing costs.
"""

import math
import numbers
from dataclasses import dataclass, field as dataclass_field, replace
from fractions import Fraction
from functools import cached_property
from typing import List, Optional, Sequence, Tuple, Union

from field.linear_algebra import vanishing_product
from field.noise import noise_stream
from field.prime_field import FIELD_MODULUS_LIMIT, PrimeField, is_prime


Rational = Union[Fraction, float]


class ParameterError(ValueError):
    """One or more structural constraints are violated."""

    def __init__(self, violations: Sequence[str]):
        self.violations = list(violations)
        super().__init__('; '.join(self.violations))


class FieldTooSmallError(ParameterError):
    """F_q cannot hold the distinct constants the scheme needs."""


def as_rate(value) -> Fraction:
    """Parse a rate given as int, float, Fraction or 'a/b' string exactly."""
    if isinstance(value, Fraction):
        return value
    if isinstance(value, float):
        return Fraction(repr(value))
    return Fraction(str(value).strip())


@dataclass(frozen=True)
class SystemParams:
    """Raw, possibly invalid, system parameterization."""
    N: int
    M: int
    P: int
    ell: int
    L: int
    q: int
    f: Tuple[int, ...] = ()
    alpha: Tuple[int, ...] = ()
    r: Fraction = Fraction(0)
    r_prime_cap: Optional[Fraction] = None
    seed: int = 0

    @classmethod
    def create(cls, N: int, M: int, P: int, ell: int, q: int, r=0, seed: int = 0,
               L: Optional[int] = None, f: Optional[Sequence[int]] = None,
               alpha: Optional[Sequence[int]] = None, r_prime_cap=None) -> 'SystemParams':
        """
        Build params, generating f/alpha from the seed when not given.

        Raises:
            ParameterError: listing every type or range violation, before
                any constant is generated
        """
        if L is None and _is_int(P) and _is_int(ell):
            L = P * ell
        params = cls(
            N=N, M=M, P=P, ell=ell, L=L, q=q,
            f=_as_tuple(f), alpha=_as_tuple(alpha),
            r=_parse_rate(r),
            r_prime_cap=_parse_rate(r_prime_cap) if r_prime_cap is not None else None,
            seed=seed,
        )
        violations = structural_violations(params)
        if violations:
            raise ParameterError(violations)
        if not params.f or not params.alpha:
            gen_f, gen_alpha = generate_constants(N, ell, q, seed)
            params = replace(params, f=params.f or gen_f, alpha=params.alpha or gen_alpha)
        return replace(params, N=int(N), M=int(M), P=int(P), ell=int(ell), L=int(params.L),
                       q=int(q), seed=int(seed),
                       f=tuple(int(x) for x in params.f), alpha=tuple(int(x) for x in params.alpha))


def _is_int(value) -> bool:
    return isinstance(value, numbers.Integral) and not isinstance(value, bool)


def _as_tuple(values):
    if values is None:
        return ()
    if isinstance(values, (list, tuple)):
        return tuple(values)
    return values


def _parse_rate(value):
    """The exact rate, or the raw value for structural_violations to report."""
    if isinstance(value, bool):
        return value
    try:
        return as_rate(value)
    except (TypeError, ValueError, ZeroDivisionError):
        return value


@dataclass(frozen=True)
class PriorDistribution:
    """Globally known prior of a single parameter update."""
    zero_mass: Fraction
    nonzero_mass_each: Fraction
    q: int

    @classmethod
    def from_rate(cls, r, q: int) -> 'PriorDistribution':
        r = as_rate(r)
        return cls(zero_mass=1 - r, nonzero_mass_each=r / (q - 1), q=q)

    def probability(self, value: int) -> Fraction:
        return self.zero_mass if value % self.q == 0 else self.nonzero_mass_each

    @property
    def total(self) -> Fraction:
        return self.zero_mass + (self.q - 1) * self.nonzero_mass_each


@dataclass(frozen=True)
class ValidatedParams:
    """Params that passed validate(); the handle every protocol actor takes."""
    params: SystemParams
    field: PrimeField = dataclass_field(compare=False)

    def __getattr__(self, name):
        # Only reached for names not defined here: delegate to the raw params.
        if name.startswith('__') or name in ('params', 'field'):
            raise AttributeError(name)
        return getattr(self.params, name)

    @property
    def writes_per_user(self) -> int:
        """P*r, the number of nonzero subpackets each writer sends."""
        return int(self.params.P * self.params.r)

    @property
    def noise_degree(self) -> int:
        """Storage noise polynomial degree (2*ell)."""
        return 2 * self.params.ell

    @cached_property
    def scaling_constants(self) -> Tuple[int, ...]:
        """c_n = prod_i (f_i - alpha_n) for each database."""
        return tuple(vanishing_product(self.field, self.params.f, a) for a in self.params.alpha)

    @cached_property
    def exact_log_q_p(self) -> Optional[int]:
        """log_q P when it is an integer, else None."""
        return exact_log(self.params.P, self.params.q)

    @property
    def log_q_p(self) -> Rational:
        exact = self.exact_log_q_p
        if exact is not None:
            return Fraction(exact)
        return math.log(self.params.P) / math.log(self.params.q)

    @cached_property
    def position_symbols(self) -> int:
        """Whole q-ary symbols needed to carry an index in {1..P}."""
        return position_symbols(self.params.P, self.params.q)

    @property
    def position_slack(self) -> Rational:
        """Per-position difference between wire symbols and log_q P."""
        return self.position_symbols - self.log_q_p

    def database_indices(self) -> range:
        return range(1, self.params.N + 1)


def exact_log(P: int, q: int) -> Optional[int]:
    power, k = 1, 0
    while power < P:
        power *= q
        k += 1
    return k if power == P else None


def position_symbols(P: int, q: int) -> int:
    power, k = 1, 0
    while power < P:
        power *= q
        k += 1
    return k


def structural_violations(params: SystemParams) -> List[str]:
    """Type and range checks that need no constants; ill-typed fields skip the checks built on them."""
    violations = []
    ints = {}
    for name in ('N', 'M', 'P', 'ell', 'L', 'q', 'seed'):
        value = getattr(params, name)
        if _is_int(value):
            ints[name] = int(value)
        elif not (name == 'L' and value is None):
            violations.append(f"{name} must be an integer, got {value!r}")
    for name in ('N', 'M', 'P', 'ell', 'L'):
        if name in ints and ints[name] < 1:
            violations.append(f"{name} must be a positive integer")
    if {'N', 'ell'} <= ints.keys() and ints['N'] != 4 * ints['ell'] + 2:
        violations.append("N must equal 4ℓ+2")
    if {'L', 'P', 'ell'} <= ints.keys() and ints['L'] != ints['P'] * ints['ell']:
        violations.append("L must equal P·ℓ")
    if 'q' in ints:
        if not is_prime(ints['q']):
            violations.append("q must be prime")
        elif ints['q'] >= FIELD_MODULUS_LIMIT:
            violations.append(f"q must be below {FIELD_MODULUS_LIMIT}")
    if not isinstance(params.r, Fraction):
        violations.append(f"r must be a rate such as 0.25 or '1/4', got {params.r!r}")
    elif not 0 <= params.r <= 1:
        violations.append("r must lie in [0, 1]")
    elif 'P' in ints and (ints['P'] * params.r).denominator != 1:
        violations.append("P·r must be a non-negative integer")
    if params.r_prime_cap is not None:
        if not isinstance(params.r_prime_cap, Fraction):
            violations.append(f"r_prime_cap must be a rate such as 0.5 or '1/2', got {params.r_prime_cap!r}")
        elif not 0 <= params.r_prime_cap <= 1:
            violations.append("r_prime_cap must lie in [0, 1]")
    if 'seed' in ints and not 0 <= ints['seed'] < 2 ** 64:
        violations.append("seed must be a 64-bit unsigned integer")
    for name in ('f', 'alpha'):
        if not _constants_typed(getattr(params, name)):
            violations.append(f"{name} must be a list of integers")
    return violations


def _constants_typed(values) -> bool:
    return isinstance(values, tuple) and all(_is_int(x) for x in values)


def _constant_violations(params: SystemParams) -> List[str]:
    violations = []
    if not (_constants_typed(params.f) and _constants_typed(params.alpha)
            and all(_is_int(getattr(params, name)) for name in ('N', 'ell', 'q'))):
        return violations
    q = params.q
    if len(params.f) != params.ell:
        violations.append(f"f must hold exactly ℓ={params.ell} constants")
    if len(params.alpha) != params.N:
        violations.append(f"alpha must hold exactly N={params.N} constants")
    if any(not 0 <= x < q for x in params.f + params.alpha):
        violations.append("constants must lie in [0, q)")
    combined = params.f + params.alpha
    if len(set(combined)) != len(combined):
        violations.append("f and alpha constants must be distinct")
    if any(a % q == 0 for a in params.alpha):
        violations.append("every α_n must be nonzero")
    if any((fi - a) % q == 0 for fi in params.f for a in params.alpha):
        violations.append("f_i must differ from every α_n")
    return violations


def validate(params: SystemParams) -> ValidatedParams:
    """
    Check every structural invariant of the scheme.

    Returns:
        ValidatedParams handle

    Raises:
        ParameterError: listing every violated constraint
    """
    violations = structural_violations(params) + _constant_violations(params)
    if violations:
        raise ParameterError(violations)
    return ValidatedParams(params=params, field=PrimeField(params.q))


def generate_constants(N: int, ell: int, q: int, seed: int) -> Tuple[Tuple[int, ...], Tuple[int, ...]]:
    """
    Deterministically pick N distinct nonzero α's and ℓ distinct f's
    (distinct from every α; f may be 0) from F_q.

    Raises:
        FieldTooSmallError: if F_q has fewer than N nonzero or N+ℓ total elements
    """
    if q - 1 < N or q < N + ell:
        raise FieldTooSmallError([
            f"field too small: q={q} cannot hold {N} nonzero α's and {ell} further distinct f's"
        ])
    rng = noise_stream(seed, 'constants')
    alpha = tuple(int(a) + 1 for a in rng.choice(q - 1, size=N, replace=False))
    taken = set(alpha)
    candidates = rng.choice(q, size=N + ell, replace=False)
    f = tuple(int(c) for c in candidates if int(c) not in taken)[:ell]
    return f, alpha


def generate_audit_constants(ell: int, q: int, seed: int) -> Tuple[Tuple[int, ...], int]:
    """Constants for a single database's view: ℓ f's and one α."""
    f, alpha = generate_constants(1, ell, q, seed)
    return f, alpha[0]


def theoretical_read_cost(params: ValidatedParams, r_prime) -> Rational:
    """C_R = (4r' + (4/N)(1+r') log_q P) / (1 - 2/N)."""
    rp = as_rate(r_prime)
    N = params.N
    return (4 * rp + Fraction(4, N) * (1 + rp) * params.log_q_p) / (1 - Fraction(2, N))


def theoretical_write_cost(params: ValidatedParams, r=None) -> Rational:
    """C_W = 4r(1 + log_q P) / (1 - 2/N)."""
    rate = params.r if r is None else as_rate(r)
    return 4 * rate * (1 + params.log_q_p) / (1 - Fraction(2, params.N))


def baseline_cost(N: int) -> Fraction:
    """Per-phase cost of the scheme without sparsification: 2/(1 - 2/N)."""
    return Fraction(2) / (1 - Fraction(2, N))
