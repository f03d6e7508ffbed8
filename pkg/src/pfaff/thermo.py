"""Pfaff sequence, Pfaff topological dimension, torsion vector, first-law
process reports, and the irreversibility test Q^dQ != 0.

Sign conventions are all derived from one rule: the torsion field satisfies
i(T)Omega = A^dA with component extraction T^m = (-1)^(m-1) times the
coefficient of the 3-form basis monomial omitting dx^m.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from random import Random
from typing import List, Optional, Sequence, Tuple

import sympy as sp

from .errors import DegreeError, EngineInvariantError, VarietyDimensionError
from .exterior import (DifferentialForm, DirectionField, Variety, d,
                       evaluate_form, form_is_zero, interior, lie, wedge,
                       wedge_power)
from .symbolic import (Expr, Point, SamplerConfig, ZeroStatus, ZeroVerdict,
                       as_expr, is_zero, merge_verdicts, simplify_expr)

TABLE1 = {1: "Equilibrium", 2: "Isolated", 3: "Closed", 4: "Open"}

PROCESS_CLASSES = ("Associated", "Extremal", "Characteristic", "Helmholtz",
                   "Bernoulli-exact", "Adiabatic")


def table1_class(ptd: int) -> Optional[str]:
    """Thermodynamic system class as a pure function of the PTD."""
    if ptd in TABLE1:
        return TABLE1[ptd]
    if ptd > 4:
        return "Higher"
    return None


def sequence_label(position: int) -> str:
    """Name of the 1-based sequence element: A, dA, A^dA, dA^dA, ..."""
    if position == 1:
        return "A"
    if position == 2:
        return "dA"
    k = position // 2
    if position % 2:
        return "A^dA" if k == 1 else f"A^(dA)^{k}"
    return "dA^dA" if k == 2 else f"(dA)^{k}"


def pfaff_sequence(A: DifferentialForm) -> List[DifferentialForm]:
    """The sequence [A, dA, A^dA, dA^dA, ...] up to degree n."""
    if A.degree != 1:
        raise DegreeError("the Pfaff sequence starts from a 1-form")
    n = A.variety.n
    dA = d(A)
    out = [A]
    power = None
    for position in range(2, n + 1):
        if position % 2 == 0:
            power = dA if power is None else wedge(power, dA)
            out.append(power)
        else:
            out.append(wedge(A, power))
    return out


@dataclass
class PfaffReport:
    """Classification of a 1-form by its Pfaff sequence."""

    variety: Variety
    labels: Tuple[str, ...]
    sequence: Tuple[DifferentialForm, ...]
    verdicts: Tuple[ZeroVerdict, ...]
    ptd: int
    table1: Optional[str]
    note: Optional[str]
    at: Optional[Point]
    exact: bool
    monotone_violation: bool
    drop_points: Tuple[dict, ...]
    seed: int


def _pointwise_verdict(element: DifferentialForm, at: Point,
                       threshold: float) -> ZeroVerdict:
    values = evaluate_form(element, at)
    exact = at.mode == "exact"
    for idx, value in values.items():
        if exact and value.is_number and value.is_rational is not False:
            vanished = value == 0
        else:
            vanished = abs(complex(sp.N(value, 17))) <= threshold
        if not vanished:
            witness = {element.variety.covector_label(idx): str(value)}
            return ZeroVerdict(ZeroStatus.NONZERO, exact=exact, samples=1,
                               witness=witness)
    return ZeroVerdict(ZeroStatus.ZERO, exact=exact, samples=1)


def _scan_drop_points(element: DifferentialForm, cfg: SamplerConfig,
                      limit: int = 3) -> Tuple[dict, ...]:
    """Sample points where a (domain-)nonzero element vanishes numerically."""
    coeffs = [c for _, c in element.terms()]
    atoms = set()
    for c in coeffs:
        expr = as_expr(c)
        if expr.atoms(sp.Derivative) or any(
                a.is_Function and not a.is_number for a in expr.atoms(sp.Function)):
            return ()
        atoms |= expr.free_symbols
    atoms = sorted(atoms, key=sp.default_sort_key)
    if not atoms:
        return ()
    rng = Random(cfg.seed ^ 0x5D70)
    drops = []
    for _ in range(cfg.samples):
        point = {a: sp.Rational(rng.randint(-3, 3), rng.randint(1, 3)) for a in atoms}
        try:
            values = [complex(sp.N(c.xreplace(point), 17)) for c in coeffs]
        except (TypeError, ValueError):
            continue
        if all(abs(v) <= cfg.threshold for v in values):
            drops.append({str(a): str(v) for a, v in point.items()})
            if len(drops) >= limit:
                break
    return tuple(drops)


def ptd(A: DifferentialForm, at: Optional[Point] = None,
        cfg: SamplerConfig = SamplerConfig()) -> PfaffReport:
    """Pfaff topological dimension with Table-1 classification.

    With a point the vanishing of each sequence element is decided at that
    point; without one, per-element verdicts come from the zero-test service
    and the report describes the generic (domain) dimension.
    """
    seq = pfaff_sequence(A)
    labels = tuple(sequence_label(i + 1) for i in range(len(seq)))
    if at is not None:
        verdicts = tuple(_pointwise_verdict(el, at, cfg.threshold) for el in seq)
    else:
        verdicts = tuple(form_is_zero(el, cfg.spawn(i))
                         for i, el in enumerate(seq))
    dim = 0
    for i, v in enumerate(verdicts):
        if v.is_nonzero:
            dim = i + 1
    violation = any(verdicts[i].is_zero and verdicts[j].is_nonzero
                    for i in range(len(verdicts))
                    for j in range(i + 1, len(verdicts)))
    n = A.variety.n
    cls = table1_class(dim) if dim else None
    note = None
    if dim == 0:
        note = "action vanishes; no classification"
        cls = None
    elif n != 4:
        if dim <= 4:
            note = f"class mapping assumes 4 base variables; this variety has {n}"
        else:
            cls = "Higher"
            note = f"PTD {dim} exceeds the Table-1 range"
    drop_points: Tuple[dict, ...] = ()
    if at is None and dim:
        drop_points = _scan_drop_points(seq[dim - 1], cfg)
    return PfaffReport(
        variety=A.variety,
        labels=labels,
        sequence=tuple(seq),
        verdicts=verdicts,
        ptd=dim,
        table1=cls,
        note=note,
        at=at,
        exact=all(v.exact for v in verdicts),
        monotone_violation=violation,
        drop_points=drop_points,
        seed=cfg.seed,
    )


# ---------------------------------------------------------------------------
# topological torsion


def _require_four(A: DifferentialForm):
    if A.variety.n != 4:
        raise VarietyDimensionError(
            f"torsion needs a 4-variable variety, got {A.variety.n}")


def torsion_vector(A: DifferentialForm) -> DirectionField:
    """The direction field T with i(T)Omega4 = A^dA."""
    _require_four(A)
    if A.degree != 1:
        raise DegreeError("torsion_vector needs a 1-form")
    K = wedge(A, d(A))
    comps = []
    for m in range(4):
        omit = tuple(i for i in range(4) if i != m)
        sign = -1 if m % 2 else 1
        comps.append(sign * K.coeffs.get(omit, sp.Integer(0)))
    T = DirectionField(A.variety, tuple(comps))
    rebuilt = interior(T, A.variety.volume_form())
    if not (rebuilt - K).canonical().is_structurally_zero:
        raise EngineInvariantError("i(T)Omega4 != A^dA after extraction")
    return T


def divergence4(V: DirectionField) -> Expr:
    """Plain 4-divergence of the scaled components."""
    total = sp.Integer(0)
    for comp, symbol in zip(V.scaled_components(), V.variety.symbols):
        total += sp.diff(comp, symbol)
    return total


def sigma(A: DifferentialForm, check: bool = True) -> Expr:
    """Dissipation coefficient: dA^dA = (2 sigma) Omega4 = (div T) Omega4."""
    _require_four(A)
    dA = d(A)
    parity = wedge(dA, dA)
    coeff = parity.coeffs.get((0, 1, 2, 3), sp.Integer(0))
    value = coeff / 2
    if check:
        exact_d = (d(wedge(A, dA)) - parity).canonical()
        if not exact_d.is_structurally_zero:
            raise EngineInvariantError("d(A^dA) != dA^dA")
        div = divergence4(torsion_vector(A))
        if simplify_expr(div - 2 * value) != 0:
            raise EngineInvariantError("div4(T) != 2 sigma")
    return value


# ---------------------------------------------------------------------------
# first law


@dataclass
class ProcessReport:
    """First-law decomposition and class tags for one (action, process) pair."""

    action: DifferentialForm
    process: DirectionField
    U: DifferentialForm
    W: DifferentialForm
    Q: DifferentialForm
    dW: DifferentialForm
    dQ: DifferentialForm
    q_wedge_dq: DifferentialForm
    w_wedge_dw: DifferentialForm
    class_verdicts: dict
    tags: Tuple[str, ...]
    reversible: ZeroVerdict
    notes: Tuple[str, ...] = ()

    @property
    def irreversible(self) -> bool:
        return self.reversible.is_nonzero


def first_law(A: DifferentialForm, V: DirectionField,
              cfg: SamplerConfig = SamplerConfig()) -> ProcessReport:
    """Apply the magic-formula split Q = W + dU and classify the process."""
    Q, W, U = lie(V, A)
    dW = d(W)
    dQ = d(Q)
    q_dq = wedge(Q, dQ)
    w_dw = wedge(W, dW)
    verdicts = {
        "Associated": is_zero(U.scalar_part(), cfg.spawn(1)),
        "Extremal": form_is_zero(W, cfg.spawn(2)),
        "Helmholtz": form_is_zero(dW, cfg.spawn(3)),
        "Adiabatic": form_is_zero(interior(V, Q), cfg.spawn(4)),
    }
    verdicts["Characteristic"] = merge_verdicts(
        [verdicts["Associated"], verdicts["Extremal"]])
    verdicts["Bernoulli-exact"] = verdicts["Helmholtz"]
    reversible = form_is_zero(q_dq, cfg.spawn(5))
    if verdicts["Extremal"].is_zero and not verdicts["Helmholtz"].is_zero:
        raise EngineInvariantError("extremal process with dW != 0")
    tags = tuple(name for name in PROCESS_CLASSES if verdicts[name].is_zero)
    notes = []
    if verdicts["Helmholtz"].is_zero:
        notes.append("work form closed; potential construction not attempted, "
                     "so Bernoulli-exact is certified only up to closedness")
    return ProcessReport(
        action=A, process=V, U=U, W=W, Q=Q, dW=dW, dQ=dQ,
        q_wedge_dq=q_dq, w_wedge_dw=w_dw,
        class_verdicts=verdicts, tags=tags, reversible=reversible,
        notes=tuple(notes),
    )


def find_proportionality(W: DifferentialForm, A: DifferentialForm,
                         cfg: SamplerConfig = SamplerConfig()) -> Optional[Expr]:
    """A factor s with W = s*A, or None when the components are inconsistent."""
    if W.variety != A.variety:
        raise VarietyDimensionError("forms on different varieties")
    if W.degree != 1 or A.degree != 1:
        raise DegreeError("find_proportionality compares 1-forms")
    if W.canonical().is_structurally_zero:
        return sp.Integer(0)
    a_coeffs = A.canonical()
    candidate = None
    for idx, c in a_coeffs.terms():
        w_c = W.coeffs.get(idx, sp.Integer(0))
        candidate = sp.cancel(w_c / c)
        break
    if candidate is None:
        return None  # A vanishes but W does not
    for i in range(A.variety.n):
        delta = W.coeffs.get((i,), sp.Integer(0)) - candidate * A.coeffs.get(
            (i,), sp.Integer(0))
        if not is_zero(sp.cancel(sp.together(delta)), cfg).is_zero:
            return None
    return candidate


# ---------------------------------------------------------------------------
# torsion property suite


@dataclass
class TorsionCheckReport:
    """Results of the five structural torsion identities."""

    torsion: DirectionField
    sigma: Expr
    divergence: Expr
    checks: Tuple[Tuple[str, ZeroVerdict], ...]

    @property
    def all_hold(self) -> bool:
        return all(v.is_zero for _, v in self.checks)


def torsion_property_check(A: DifferentialForm,
                           cfg: SamplerConfig = SamplerConfig()) -> TorsionCheckReport:
    """Verify, with V = T: i(T)A = 0, W = sigma*A, Q^dQ = sigma^2 A^dA,
    i(T)Q = 0, and d(A^dA) = (div T) Omega4."""
    _require_four(A)
    T = torsion_vector(A)
    sig = sigma(A, check=False)
    div = divergence4(T)
    Q, W, U = lie(T, A)
    torsion_3form = wedge(A, d(A))
    omega = A.variety.volume_form()
    checks = (
        ("interior_action_vanishes", is_zero(U.scalar_part(), cfg.spawn(11))),
        ("work_is_sigma_action", form_is_zero(W - sig * A, cfg.spawn(12))),
        ("qdq_is_sigma_sq_torsion",
         form_is_zero(wedge(Q, d(Q)) - sig**2 * torsion_3form, cfg.spawn(13))),
        ("adiabatic", form_is_zero(interior(T, Q), cfg.spawn(14))),
        ("parity_is_divergence",
         form_is_zero(d(torsion_3form) - div * omega, cfg.spawn(15))),
    )
    return TorsionCheckReport(torsion=T, sigma=sig, divergence=div, checks=checks)
