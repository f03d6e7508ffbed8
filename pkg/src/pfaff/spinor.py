"""Eigen-analysis of antisymmetric coefficient matrices at a point.

Real antisymmetric matrices have spectra {+i mu, -i mu, 0...}; the non-zero
eigendirections are complex and isotropic (null quadratic form) and define
the spinor process class, while zero eigendirections are the extremal
(Hamiltonian) vectors.  Eigenvalues come from closed-form characteristic
polynomials (sizes 2-4), never from an iterative solver; rational input is
analysed exactly, float input through scaled tolerances.
"""

from __future__ import annotations

import cmath
from dataclasses import dataclass
from typing import List, Optional, Sequence, Tuple

import sympy as sp

from .errors import (EngineInvariantError, NotAntisymmetricError, NotPTD3Error,
                     SizeUnsupportedError)
from .exterior import DifferentialForm, DirectionField, d, matrix_of_2form
from .symbolic import (Expr, Point, SamplerConfig, as_expr, eval_expr, is_zero)
from .thermo import ptd

ZERO_EIGEN_RTOL = 1e-12
FLOAT_EIGEN_TOL = 1e-9

EXTREMAL = "ExtremalVector"
SPINOR = "Spinor"


@dataclass(frozen=True)
class EigenPair:
    """One eigenvalue/eigendirection of an antisymmetric matrix."""

    eigenvalue: object
    direction: Tuple[object, ...]
    kind: str
    degenerate: bool = False
    exact: bool = True


def _as_exact(entry) -> Optional[sp.Rational]:
    e = as_expr(entry)
    if e.is_Integer or e.is_Rational:
        return e
    return None


def _check_antisymmetric(M: Sequence[Sequence[float]]):
    n = len(M)
    if any(len(row) != n for row in M):
        raise NotAntisymmetricError("matrix is not square")
    worst = 0.0
    for j in range(n):
        for k in range(n):
            worst = max(worst, abs(float(M[j][k] + M[k][j])))
    if worst > 1e-12:
        raise NotAntisymmetricError(f"max |M + M^T| entry is {worst:.3e}")


def _closed_form_mus(M, sqrt):
    """Non-negative rotation rates mu with spectrum {+i mu, -i mu} + zeros."""
    n = len(M)
    if n == 2:
        return [abs(M[0][1])] if not _is_zero_entry(M[0][1]) else [], n
    if n == 3:
        s = M[0][1] ** 2 + M[0][2] ** 2 + M[1][2] ** 2
        return ([sqrt(s)] if not _is_zero_entry(s) else []), n
    p = sum(M[j][k] ** 2 for j in range(4) for k in range(j + 1, 4))
    pf = M[0][1] * M[2][3] - M[0][2] * M[1][3] + M[0][3] * M[1][2]
    disc = p ** 2 - 4 * pf ** 2
    root = sqrt(disc)
    mus = []
    for mu_sq in ((p + root) / 2, (p - root) / 2):
        if not _is_zero_entry(mu_sq):
            mus.append(sqrt(mu_sq))
    return mus, n


def _is_zero_entry(v) -> bool:
    if isinstance(v, sp.Expr):
        return sp.simplify(v) == 0
    return abs(v) == 0


def _normalize(vec, is_small):
    for v in vec:
        if not is_small(v):
            return tuple(x / v for x in vec)
    return tuple(vec)


def _nullspace_float(rows: List[List[complex]], tol: float) -> List[List[complex]]:
    n = len(rows)
    m = [list(map(complex, row)) for row in rows]
    pivots = []
    r = 0
    for c in range(n):
        p = max(range(r, n), key=lambda i: abs(m[i][c]), default=None)
        if p is None or abs(m[p][c]) <= tol:
            continue
        m[r], m[p] = m[p], m[r]
        pivot = m[r][c]
        m[r] = [v / pivot for v in m[r]]
        for i in range(n):
            if i != r:
                f = m[i][c]
                if abs(f) > 0:
                    m[i] = [a - f * b for a, b in zip(m[i], m[r])]
        pivots.append(c)
        r += 1
    free = [c for c in range(n) if c not in pivots]
    basis = []
    for fc in free:
        vec = [0j] * n
        vec[fc] = 1.0 + 0j
        for rr, pc in enumerate(pivots):
            vec[pc] = -m[rr][fc]
        basis.append(vec)
    return basis


def eigen_antisymmetric(M: Sequence[Sequence[object]]) -> List[EigenPair]:
    """All eigenpairs of a real antisymmetric matrix of size 2, 3, or 4.

    Spinors (eigenvalue != 0) come first, ordered +i mu before -i mu with the
    larger rate first; extremal vectors (eigenvalue 0) follow.  Directions are
    normalized so the first non-vanishing component is 1.
    """
    n = len(M)
    if n not in (2, 3, 4):
        raise SizeUnsupportedError(f"supported sizes are 2..4, got {n}")
    exact_entries = [[_as_exact(M[j][k]) for k in range(n)] for j in range(n)]
    exact = all(e is not None for row in exact_entries for e in row)
    float_entries = [[float(M[j][k]) for k in range(n)] for j in range(n)]
    _check_antisymmetric(float_entries)
    scale = max((abs(v) for row in float_entries for v in row), default=0.0)
    if exact:
        return _eigen_exact(exact_entries)
    return _eigen_float(float_entries, scale)


def _eigen_exact(M) -> List[EigenPair]:
    n = len(M)
    mus, _ = _closed_form_mus(M, sp.sqrt)
    eigenvalues = []
    for mu in sorted(mus, key=lambda m: -float(m)):
        eigenvalues.extend([sp.I * mu, -sp.I * mu])
    eigenvalues.extend([sp.Integer(0)] * (n - len(eigenvalues)))
    matrix = sp.Matrix(M)
    pairs = []
    seen = set()
    for lam in eigenvalues:
        if lam in seen:
            continue
        seen.add(lam)
        multiplicity = eigenvalues.count(lam)
        basis = (matrix - lam * sp.eye(n)).nullspace()
        if len(basis) != multiplicity:
            raise EngineInvariantError(
                f"eigenspace dimension {len(basis)} != multiplicity {multiplicity}")
        for vec in basis:
            direction = _normalize(tuple(sp.nsimplify(sp.simplify(v)) for v in vec),
                                   lambda v: sp.simplify(v) == 0)
            kind = EXTREMAL if lam == 0 else SPINOR
            pairs.append(EigenPair(lam, direction, kind,
                                   degenerate=multiplicity > 1, exact=True))
    return _ordered(pairs)


def _eigen_float(M, scale) -> List[EigenPair]:
    n = len(M)
    tol = max(scale, 1e-300) * ZERO_EIGEN_RTOL
    mus, _ = _closed_form_mus(M, lambda v: cmath.sqrt(v).real)
    mus = [mu for mu in mus if mu > tol]
    eigenvalues: List[complex] = []
    for mu in sorted(mus, reverse=True):
        eigenvalues.extend([1j * mu, -1j * mu])
    eigenvalues.extend([0j] * (n - len(eigenvalues)))
    pairs = []
    consumed = 0
    idx = 0
    while idx < len(eigenvalues):
        lam = eigenvalues[idx]
        multiplicity = sum(1 for e in eigenvalues if abs(e - lam) <= tol)
        rows = [[M[j][k] - (lam if j == k else 0) for k in range(n)]
                for j in range(n)]
        basis = _nullspace_float(rows, tol)
        take = min(multiplicity, len(basis))
        if take == 0:
            raise EngineInvariantError(f"no eigenvector found for {lam}")
        for vec in basis[:take]:
            direction = _normalize(tuple(vec), lambda v: abs(v) <= tol)
            kind = EXTREMAL if abs(lam) <= tol else SPINOR
            pairs.append(EigenPair(lam, direction, kind,
                                   degenerate=multiplicity > 1, exact=False))
        consumed += take
        idx += multiplicity
    return _ordered(pairs)


def _ordered(pairs: List[EigenPair]) -> List[EigenPair]:
    def key(pair: EigenPair):
        lam = complex(pair.eigenvalue)
        spinor_rank = 0 if pair.kind == SPINOR else 1
        return (spinor_rank, -abs(lam.imag), 0 if lam.imag >= 0 else 1)

    return sorted(pairs, key=key)


def is_isotropic(components: Sequence[object]) -> bool:
    """True when the (unconjugated) quadratic form sum s_k^2 vanishes."""
    total = sum(as_expr(c) ** 2 for c in components)
    total = sp.simplify(total)
    if total.is_number and total.is_rational is not False and total == 0:
        return True
    return abs(complex(sp.N(total, 20))) < 1e-12


@dataclass
class EigenSplit:
    """Zero and non-zero eigendirections of [dA] at a point."""

    extremals: Tuple[EigenPair, ...]
    spinors: Tuple[EigenPair, ...]
    rank: int
    ptd: int
    matrix: Tuple[Tuple[object, ...], ...]


def classify_eigendirections(A: DifferentialForm, at: Point,
                             cfg: SamplerConfig = SamplerConfig()) -> EigenSplit:
    """Evaluate [dA] at a point, split its eigendirections, and cross-check
    the extremal counts implied by the pointwise Pfaff dimension."""
    M = matrix_of_2form(d(A))
    n = A.variety.n
    values = [[eval_expr(M[j][k], at) for k in range(n)] for j in range(n)]
    if all(v.is_Integer or v.is_Rational for row in values for v in row):
        entries = values
    else:
        entries = [[complex(sp.N(v, 17)).real for v in row] for row in values]
    pairs = eigen_antisymmetric(entries)
    extremals = tuple(p for p in pairs if p.kind == EXTREMAL)
    spinors = tuple(p for p in pairs if p.kind == SPINOR)
    rank = len(spinors)
    report = ptd(A, at=at, cfg=cfg)
    expected = {(3, 3): 1, (3, 4): 2, (4, 4): 0}.get((report.ptd, n))
    if expected is not None and len(extremals) != expected:
        raise EngineInvariantError(
            f"PTD {report.ptd} on {n} variables should give {expected} "
            f"extremal directions, found {len(extremals)}")
    return EigenSplit(extremals=extremals, spinors=spinors, rank=rank,
                      ptd=report.ptd,
                      matrix=tuple(tuple(row) for row in values))


@dataclass
class SpinorExperiment:
    """First-law reports for the two piecewise-linear spinor combinations."""

    spinor_plus: EigenPair
    spinor_minus: EigenPair
    field: DirectionField
    field_perp: DirectionField
    report: object
    report_perp: object
    q_wedge_dq: DifferentialForm
    q_wedge_dq_perp: DifferentialForm
    balanced: object  # verdict for Q^dQ after imposing b^2 = a^2


def spinor_combination_experiment(A: DifferentialForm, a: Expr, b: Expr,
                                  rho: Expr = sp.Integer(1),
                                  cfg: SamplerConfig = SamplerConfig()) -> SpinorExperiment:
    """Drive the action along V = (a*Sp1 + b*Sp2)/2 and its quarter-turn
    partner Vperp = -i(a*Sp1 - b*Sp2)/2 and test the b^2 = a^2 cancellation."""
    from .thermo import first_law  # local import keeps module load order simple

    if A.variety.n != 3:
        raise NotPTD3Error("the experiment runs on a 3-variable variety")
    report = ptd(A, cfg=cfg)
    if report.ptd != 3:
        raise NotPTD3Error(f"action has Pfaff dimension {report.ptd}, need 3")
    M = matrix_of_2form(d(A))
    if any(as_expr(M[j][k]).free_symbols for j in range(3) for k in range(3)):
        raise NotPTD3Error("the experiment needs constant vorticity coefficients")
    pairs = eigen_antisymmetric(M)
    spinors = [p for p in pairs if p.kind == SPINOR]
    if len(spinors) != 2:
        raise NotPTD3Error("expected exactly two spinor eigendirections")
    plus = next(p for p in spinors if sp.im(sp.sympify(p.eigenvalue)) > 0)
    minus = next(p for p in spinors if sp.im(sp.sympify(p.eigenvalue)) < 0)
    a = as_expr(a)
    b = as_expr(b)
    comps = tuple((a * s1 + b * s2) / 2
                  for s1, s2 in zip(plus.direction, minus.direction))
    comps_perp = tuple(-sp.I * (a * s1 - b * s2) / 2
                       for s1, s2 in zip(plus.direction, minus.direction))
    field = DirectionField(A.variety, comps, rho)
    field_perp = DirectionField(A.variety, comps_perp, rho)
    rep = first_law(A, field, cfg)
    rep_perp = first_law(A, field_perp, cfg)
    balanced_form = rep.q_wedge_dq
    if b.is_Symbol:
        balanced_form = balanced_form.map_coeffs(
            lambda c: sp.expand(c).subs(b ** 2, a ** 2))
    from .exterior import form_is_zero

    balanced = form_is_zero(balanced_form, cfg.spawn(21))
    return SpinorExperiment(
        spinor_plus=plus, spinor_minus=minus,
        field=field, field_perp=field_perp,
        report=rep, report_perp=rep_perp,
        q_wedge_dq=rep.q_wedge_dq, q_wedge_dq_perp=rep_perp.q_wedge_dq,
        balanced=balanced,
    )
