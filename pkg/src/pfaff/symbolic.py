"""Exact scalar arithmetic: expression trees, derivatives, evaluation, zero testing.

Expressions are sympy objects restricted (by the DSL grammar) to rational
constants, the imaginary unit, variables, sums, products, integer powers,
exp/sin/cos/ln, and abstract function symbols.  Differentiating an abstract
function introduces a formal partial-derivative atom.  Everything here is a
pure function over immutable values; sampling takes an explicit seed.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from fractions import Fraction
from random import Random
from typing import Mapping, Optional

import sympy as sp
from sympy.core.function import AppliedUndef

from .errors import DomainError, UnboundVariableError

Expr = sp.Expr
IMAGINARY_UNIT = sp.I

# Functions the DSL (and the engine) may apply to subexpressions.
KNOWN_FUNCTIONS = {"exp": sp.exp, "sin": sp.sin, "cos": sp.cos, "ln": sp.log}


def symbol(name: str) -> sp.Symbol:
    return sp.Symbol(name)


def as_expr(value) -> Expr:
    """Lift ints, Fractions, strings and sympy objects into an Expr."""
    if isinstance(value, Fraction):
        return sp.Rational(value.numerator, value.denominator)
    return sp.sympify(value, rational=True)


# ---------------------------------------------------------------------------
# canonical form


def _pythagorean_pass(e: Expr) -> Expr:
    """Combine c*sin(u)**2*r + c*cos(u)**2*r into c*r; repeat to fixpoint."""
    if not e.is_Add:
        return e
    terms = list(e.args)
    combined = True
    while combined:
        combined = False
        for i, term in enumerate(terms):
            for factor in sp.Mul.make_args(term):
                if not (factor.is_Pow and factor.exp.is_Integer and factor.exp >= 2
                        and isinstance(factor.base, sp.sin)):
                    continue
                u = factor.base.args[0]
                partner = term * sp.cos(u) ** 2 / sp.sin(u) ** 2
                for j, other in enumerate(terms):
                    if j != i and other == partner:
                        terms[i] = term / sp.sin(u) ** 2
                        del terms[j]
                        combined = True
                        break
                if combined:
                    break
            if combined:
                break
    return sp.Add(*terms)


def simplify_expr(e: Expr) -> Expr:
    """Canonical form: constant folding, flatten/sort, i**2 -> -1 (automatic),
    full distribution, and the sin**2+cos**2 -> 1 collection rule."""
    return _pythagorean_pass(sp.expand(as_expr(e)))


def diff(e: Expr, v) -> Expr:
    """Exact partial derivative; abstract functions yield formal derivatives."""
    v = symbol(v) if isinstance(v, str) else v
    return sp.diff(as_expr(e), v)


# ---------------------------------------------------------------------------
# evaluation


@dataclass(frozen=True)
class Point:
    """Variable bindings for evaluation; `mode` selects exact or float arithmetic."""

    values: Mapping[str, object]
    mode: str = "exact"  # "exact" | "float"

    def binding(self) -> dict:
        out = {}
        for name, value in self.values.items():
            if self.mode == "exact" and not isinstance(value, float):
                out[sp.Symbol(name)] = as_expr(value)
            else:
                out[sp.Symbol(name)] = sp.Float(value)
        return out


_BAD_VALUES = (sp.zoo, sp.oo, -sp.oo, sp.nan)


def eval_expr(e: Expr, point: Point):
    """Evaluate at a point.  Exact mode returns a sympy number (exact whenever
    the expression is rational in its inputs); float mode returns complex."""
    e = as_expr(e)
    abstract = e.atoms(AppliedUndef) | e.atoms(sp.Derivative)
    if abstract:
        names = ", ".join(sorted(str(a) for a in abstract))
        raise UnboundVariableError(f"cannot evaluate abstract symbols: {names}")
    missing = {s.name for s in e.free_symbols} - set(point.values)
    if missing:
        raise UnboundVariableError(f"unbound variables: {', '.join(sorted(missing))}")
    result = e.xreplace(point.binding())
    if result.has(*_BAD_VALUES):
        raise DomainError(f"undefined value while evaluating {e}")
    if point.mode == "float":
        value = complex(result.evalf(17))
        if value != value:  # NaN
            raise DomainError(f"undefined value while evaluating {e}")
        return value
    return result


# ---------------------------------------------------------------------------
# zero testing


class ZeroStatus(enum.Enum):
    ZERO = "zero"
    NONZERO = "nonzero"
    UNKNOWN = "unknown"


@dataclass(frozen=True)
class SamplerConfig:
    """Reproducible sampling: seed, sample count, float threshold, and the
    rational box values are drawn from."""

    seed: int = 0
    samples: int = 16
    threshold: float = 1e-9
    box: tuple = (-3, 3)
    max_denominator: int = 7

    def spawn(self, index: int) -> "SamplerConfig":
        """Derive a child config with a deterministic per-task seed."""
        child = (self.seed * 0x9E3779B1 + index) % (2**32)
        return SamplerConfig(child, self.samples, self.threshold, self.box,
                             self.max_denominator)


@dataclass(frozen=True)
class ZeroVerdict:
    """Tri-state vanishing verdict.  `exact` distinguishes canonical results
    from sampled (probabilistic) ones; NONZERO always carries a witness."""

    status: ZeroStatus
    exact: bool
    samples: int = 0
    seed: int = 0
    witness: Optional[dict] = None

    def __bool__(self):  # truthy when the tested quantity vanished
        return self.status is ZeroStatus.ZERO

    @property
    def is_zero(self):
        return self.status is ZeroStatus.ZERO

    @property
    def is_nonzero(self):
        return self.status is ZeroStatus.NONZERO

    def describe(self) -> str:
        tag = "exact" if self.exact else "probabilistic"
        return f"{self.status.value} [{tag}]"


def _sample_atoms(e: Expr):
    """Atoms to randomize: free symbols plus abstract function/derivative
    atoms, each treated as an independent unknown."""
    atoms = set(e.free_symbols)
    atoms |= e.atoms(AppliedUndef)
    atoms |= e.atoms(sp.Derivative)
    return sorted(atoms, key=sp.default_sort_key)


def _random_rational(rng: Random, cfg: SamplerConfig) -> sp.Rational:
    den = rng.randint(1, cfg.max_denominator)
    lo, hi = cfg.box
    num = 0
    while num == 0:
        num = rng.randint(int(lo * den), int(hi * den))
    return sp.Rational(num, den)


def _numeric_zero(value: Expr, threshold: float):
    """Return (is_zero, exact_flag, magnitude) for a fully substituted number."""
    re_part, im_part = value.as_real_imag()
    if re_part.is_Rational and im_part.is_Rational:
        return (re_part == 0 and im_part == 0), True, None
    approx = value.evalf(20)
    if approx.has(*_BAD_VALUES):
        raise DomainError(str(value))
    c = complex(approx)
    if c != c:
        raise DomainError(str(value))
    return abs(c) <= threshold, False, abs(c)


def is_zero(e: Expr, cfg: SamplerConfig = SamplerConfig(),
            force_sampling: bool = False) -> ZeroVerdict:
    """Decide whether an expression vanishes identically.

    The canonical form deciding Zero exactly is tried first; otherwise the
    expression is sampled at `cfg.samples` random rational points (abstract
    function and derivative atoms are treated as independent unknowns).
    """
    e = as_expr(e)
    if not force_sampling:
        canonical = simplify_expr(e)
        if canonical == 0:
            return ZeroVerdict(ZeroStatus.ZERO, exact=True, seed=cfg.seed)
        e = canonical
    rng = Random(cfg.seed)
    atoms = _sample_atoms(e)
    if not atoms:
        try:
            vanished, exact, _ = _numeric_zero(e, cfg.threshold)
        except DomainError:
            return ZeroVerdict(ZeroStatus.UNKNOWN, exact=False, samples=0, seed=cfg.seed)
        if vanished:
            return ZeroVerdict(ZeroStatus.ZERO, exact=exact, samples=1, seed=cfg.seed)
        return ZeroVerdict(ZeroStatus.NONZERO, exact=exact, samples=1,
                           seed=cfg.seed, witness={})
    evaluated = 0
    for _ in range(cfg.samples):
        mapping = {a: _random_rational(rng, cfg) for a in atoms}
        try:
            value = e.xreplace(mapping)
            vanished, exact, _ = _numeric_zero(value, cfg.threshold)
        except DomainError:
            continue
        evaluated += 1
        if not vanished:
            witness = {str(a): str(v) for a, v in mapping.items()}
            return ZeroVerdict(ZeroStatus.NONZERO, exact=exact,
                               samples=evaluated, seed=cfg.seed, witness=witness)
    if evaluated == 0:
        return ZeroVerdict(ZeroStatus.UNKNOWN, exact=False, samples=0, seed=cfg.seed)
    return ZeroVerdict(ZeroStatus.ZERO, exact=False, samples=evaluated, seed=cfg.seed)


def merge_verdicts(verdicts) -> ZeroVerdict:
    """Combine verdicts of several components: Zero iff all Zero; NonZero as
    soon as one component is; Unknown if nothing is decidable."""
    verdicts = list(verdicts)
    if not verdicts:
        return ZeroVerdict(ZeroStatus.ZERO, exact=True)
    for v in verdicts:
        if v.is_nonzero:
            return v
    if any(v.status is ZeroStatus.UNKNOWN for v in verdicts):
        return ZeroVerdict(ZeroStatus.UNKNOWN, exact=False,
                           seed=verdicts[0].seed)
    exact = all(v.exact for v in verdicts)
    samples = max(v.samples for v in verdicts)
    return ZeroVerdict(ZeroStatus.ZERO, exact=exact, samples=samples,
                       seed=verdicts[0].seed)


def parse_expr(text: str, vars, funcs=None, scalars=None) -> Expr:
    """Parse an expression in the DSL grammar over the declared names."""
    from . import dsl

    return dsl.parse_expr(text, vars, funcs=funcs, scalars=scalars)
