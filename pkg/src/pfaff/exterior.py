"""Exterior algebra over n declared base variables.

Forms store coefficients on strictly increasing index tuples; reordering
signs are absorbed at construction time, so structural equality is a map
comparison.  The 2-form/matrix convention is F = sum_{j<k} F_jk dx^j^dx^k
with no factor 1/2.  All values are immutable and all operations pure.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Dict, Iterable, Optional, Sequence, Tuple

import sympy as sp

from .errors import DegreeError, VarietyDimensionError, VarietyMismatchError
from .symbolic import (Expr, Point, SamplerConfig, ZeroStatus, ZeroVerdict,
                       as_expr, eval_expr, is_zero, merge_verdicts,
                       simplify_expr)

Index = Tuple[int, ...]


def _sort_with_sign(indices: Sequence[int]):
    """Sort an index tuple, returning (sign, tuple) or None on a repeat."""
    idx = list(indices)
    sign = 1
    for i in range(1, len(idx)):
        j = i
        while j > 0 and idx[j - 1] > idx[j]:
            idx[j - 1], idx[j] = idx[j], idx[j - 1]
            sign = -sign
            j -= 1
    for i in range(1, len(idx)):
        if idx[i - 1] == idx[i]:
            return None
    return sign, tuple(idx)


@dataclass(frozen=True)
class Variety:
    """Ordered base variables; the volume form follows the declared order."""

    names: Tuple[str, ...]

    def __post_init__(self):
        names = tuple(self.names)
        object.__setattr__(self, "names", names)
        if not names:
            raise VarietyDimensionError("a variety needs at least one variable")
        if len(set(names)) != len(names):
            raise VarietyDimensionError(f"duplicate variable names in {names}")

    @property
    def n(self) -> int:
        return len(self.names)

    @property
    def symbols(self) -> Tuple[sp.Symbol, ...]:
        return tuple(sp.Symbol(name) for name in self.names)

    def index(self, name: str) -> int:
        return self.names.index(name)

    def covector_label(self, indices: Index) -> str:
        if not indices:
            return "1"
        return "^".join(f"d{self.names[i]}" for i in indices)

    def volume_form(self) -> "DifferentialForm":
        return DifferentialForm(self, self.n, {tuple(range(self.n)): sp.Integer(1)})


class DifferentialForm:
    """Degree-graded map from increasing index tuples to coefficients."""

    __slots__ = ("variety", "degree", "coeffs")

    def __init__(self, variety: Variety, degree: int, coeffs: Dict[Index, Expr]):
        if degree < 0:
            raise DegreeError(f"negative degree {degree}")
        clean: Dict[Index, Expr] = {}
        for idx, c in coeffs.items():
            c = as_expr(c)
            if c == 0:
                continue
            if len(idx) != degree:
                raise DegreeError(f"index {idx} does not match degree {degree}")
            if any(i < 0 or i >= variety.n for i in idx):
                raise DegreeError(f"index {idx} out of range for {variety.names}")
            if list(idx) != sorted(idx) or len(set(idx)) != len(idx):
                raise DegreeError(f"index {idx} is not strictly increasing")
            clean[idx] = c
        if degree > variety.n and clean:
            raise DegreeError(f"degree {degree} form on {variety.n} variables "
                              "must vanish")
        self.variety = variety
        self.degree = degree
        self.coeffs = clean

    # -- constructors ------------------------------------------------------

    @classmethod
    def zero(cls, variety: Variety, degree: int) -> "DifferentialForm":
        return cls(variety, degree, {})

    @classmethod
    def scalar(cls, variety: Variety, value) -> "DifferentialForm":
        return cls(variety, 0, {(): as_expr(value)})

    @classmethod
    def one_form(cls, variety: Variety, components: Sequence) -> "DifferentialForm":
        if len(components) != variety.n:
            raise DegreeError("one component per base variable expected")
        return cls(variety, 1, {(i,): as_expr(c) for i, c in enumerate(components)})

    @classmethod
    def from_terms(cls, variety: Variety, degree: int,
                   terms: Iterable[Tuple[Sequence[int], object]]) -> "DifferentialForm":
        """Build from (index, coefficient) pairs in any index order."""
        coeffs: Dict[Index, Expr] = {}
        for indices, c in terms:
            sorted_ = _sort_with_sign(indices)
            if sorted_ is None:
                continue
            sign, idx = sorted_
            coeffs[idx] = coeffs.get(idx, sp.Integer(0)) + sign * as_expr(c)
        return cls(variety, degree, coeffs)

    # -- basic protocol ----------------------------------------------------

    def coefficient(self, indices: Sequence[int]) -> Expr:
        sorted_ = _sort_with_sign(indices)
        if sorted_ is None:
            return sp.Integer(0)
        sign, idx = sorted_
        return sign * self.coeffs.get(idx, sp.Integer(0))

    @property
    def is_structurally_zero(self) -> bool:
        return not self.coeffs

    def scalar_part(self) -> Expr:
        if self.degree != 0:
            raise DegreeError("scalar_part needs a 0-form")
        return self.coeffs.get((), sp.Integer(0))

    def canonical(self) -> "DifferentialForm":
        return DifferentialForm(self.variety, self.degree,
                                {i: simplify_expr(c) for i, c in self.coeffs.items()})

    def map_coeffs(self, fn) -> "DifferentialForm":
        return DifferentialForm(self.variety, self.degree,
                                {i: fn(c) for i, c in self.coeffs.items()})

    def __eq__(self, other):
        return (isinstance(other, DifferentialForm)
                and self.variety == other.variety
                and self.degree == other.degree
                and self.coeffs == other.coeffs)

    def __hash__(self):
        return hash((self.variety, self.degree, tuple(sorted(self.coeffs))))

    def __add__(self, other: "DifferentialForm") -> "DifferentialForm":
        _check_same_variety(self, other)
        if self.degree != other.degree:
            if self.is_structurally_zero:
                return other
            if other.is_structurally_zero:
                return self
            raise DegreeError(f"cannot add degrees {self.degree} and {other.degree}")
        coeffs = dict(self.coeffs)
        for idx, c in other.coeffs.items():
            coeffs[idx] = coeffs.get(idx, sp.Integer(0)) + c
        return DifferentialForm(self.variety, self.degree, coeffs)

    def __sub__(self, other: "DifferentialForm") -> "DifferentialForm":
        return self + (-other)

    def __neg__(self) -> "DifferentialForm":
        return self.map_coeffs(lambda c: -c)

    def __mul__(self, scalar) -> "DifferentialForm":
        scalar = as_expr(scalar)
        return self.map_coeffs(lambda c: c * scalar)

    __rmul__ = __mul__

    def __xor__(self, other: "DifferentialForm") -> "DifferentialForm":
        return wedge(self, other)

    def terms(self):
        return sorted(self.coeffs.items())

    def as_text(self) -> str:
        if not self.coeffs:
            return "0"
        parts = []
        for idx, c in self.terms():
            label = self.variety.covector_label(idx)
            if label == "1":
                parts.append(f"({c})")
            elif c == 1:
                parts.append(label)
            else:
                parts.append(f"({c})*{label}")
        return " + ".join(parts)

    def __repr__(self):
        return f"DifferentialForm({self.as_text()!r})"


@dataclass(frozen=True)
class DirectionField:
    """Contravariant components with an optional scale factor rho."""

    variety: Variety
    components: Tuple[Expr, ...]
    rho: Expr = sp.Integer(1)

    def __post_init__(self):
        comps = tuple(as_expr(c) for c in self.components)
        object.__setattr__(self, "components", comps)
        object.__setattr__(self, "rho", as_expr(self.rho))
        if len(comps) != self.variety.n:
            raise VarietyDimensionError(
                f"{self.variety.n} components expected, got {len(comps)}")

    def scaled_components(self) -> Tuple[Expr, ...]:
        return tuple(self.rho * c for c in self.components)

    def is_structurally_zero(self) -> bool:
        return all(c == 0 for c in self.components)


def _check_same_variety(a, b):
    if a.variety != b.variety:
        raise VarietyMismatchError(
            f"operands on different varieties: {a.variety.names} vs {b.variety.names}")


# ---------------------------------------------------------------------------
# core operations


def wedge(a: DifferentialForm, b: DifferentialForm) -> DifferentialForm:
    """Exterior product; graded-commutative, signs from index sorting."""
    _check_same_variety(a, b)
    degree = a.degree + b.degree
    if degree > a.variety.n:
        return DifferentialForm.zero(a.variety, degree)
    coeffs: Dict[Index, Expr] = {}
    for ia, ca in a.coeffs.items():
        for ib, cb in b.coeffs.items():
            sorted_ = _sort_with_sign(ia + ib)
            if sorted_ is None:
                continue
            sign, idx = sorted_
            coeffs[idx] = coeffs.get(idx, sp.Integer(0)) + sign * ca * cb
    return DifferentialForm(a.variety, degree, coeffs)


def wedge_power(a: DifferentialForm, k: int) -> DifferentialForm:
    if k < 1:
        raise DegreeError("wedge_power needs k >= 1")
    out = a
    for _ in range(k - 1):
        out = wedge(out, a)
    return out


def d(a: DifferentialForm) -> DifferentialForm:
    """Exterior derivative; satisfies d(d(a)) = 0 and the graded Leibniz rule."""
    variety = a.variety
    coeffs: Dict[Index, Expr] = {}
    for idx, c in a.coeffs.items():
        for m, symbol in enumerate(variety.symbols):
            dc = sp.diff(c, symbol)
            if dc == 0:
                continue
            sorted_ = _sort_with_sign((m,) + idx)
            if sorted_ is None:
                continue
            sign, new_idx = sorted_
            coeffs[new_idx] = coeffs.get(new_idx, sp.Integer(0)) + sign * dc
    degree = a.degree + 1
    if degree > variety.n:
        return DifferentialForm.zero(variety, degree)
    return DifferentialForm(variety, degree, coeffs)


def interior(V: DirectionField, a: DifferentialForm) -> DifferentialForm:
    """Interior product i(rho V) a; an antiderivation with i(V) o i(V) = 0."""
    _check_same_variety(V, a)
    if a.degree == 0:
        return DifferentialForm.zero(a.variety, 0)
    comps = V.components
    rho = V.rho
    coeffs: Dict[Index, Expr] = {}
    for idx, c in a.coeffs.items():
        for k, i_k in enumerate(idx):
            comp = comps[i_k]
            if comp == 0:
                continue
            sign = -1 if k % 2 else 1
            rest = idx[:k] + idx[k + 1:]
            coeffs[rest] = coeffs.get(rest, sp.Integer(0)) + sign * rho * comp * c
    return DifferentialForm(a.variety, a.degree - 1, coeffs)


def lie(V: DirectionField, a: DifferentialForm):
    """First-law split of the Lie differential of a 1-form:
    returns (Q, W, U) with W = i(V)dA, U = i(V)A, Q = W + dU."""
    _check_same_variety(V, a)
    if a.degree != 1:
        raise DegreeError("lie splits the Lie differential of a 1-form")
    W = interior(V, d(a))
    U = interior(V, a)
    Q = W + d(U)
    return Q, W, U


def lie_any(V: DirectionField, a: DifferentialForm) -> DifferentialForm:
    """Lie differential i(V)da + d(i(V)a) for a form of any degree."""
    _check_same_variety(V, a)
    return interior(V, d(a)) + d(interior(V, a))


def matrix_of_2form(F: DifferentialForm):
    """Antisymmetric coefficient matrix M with M[j][k] = coeff of dx^j^dx^k."""
    if F.degree != 2:
        raise DegreeError("matrix_of_2form needs a 2-form")
    n = F.variety.n
    M = [[sp.Integer(0)] * n for _ in range(n)]
    for (j, k), c in F.coeffs.items():
        M[j][k] = c
        M[k][j] = -c
    return M


def form_from_matrix(variety: Variety, M) -> DifferentialForm:
    """Rebuild the 2-form sum_{j<k} M[j][k] dx^j^dx^k."""
    coeffs = {}
    for j in range(variety.n):
        for k in range(j + 1, variety.n):
            coeffs[(j, k)] = as_expr(M[j][k])
    return DifferentialForm(variety, 2, coeffs)


# ---------------------------------------------------------------------------
# verdicts and evaluation


def form_is_zero(a: DifferentialForm, cfg: SamplerConfig = SamplerConfig(),
                 force_sampling: bool = False) -> ZeroVerdict:
    """Vanishing verdict for a form: all coefficients must vanish."""
    if a.is_structurally_zero:
        return ZeroVerdict(ZeroStatus.ZERO, exact=True, seed=cfg.seed)
    return merge_verdicts(is_zero(c, cfg, force_sampling=force_sampling)
                          for _, c in a.terms())


def evaluate_form(a: DifferentialForm, point: Point):
    """Coefficient values at a point, keyed by increasing index tuples."""
    return {idx: eval_expr(c, point) for idx, c in a.terms()}
