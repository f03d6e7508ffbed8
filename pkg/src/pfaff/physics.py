"""Electromagnetic and hydrodynamic instantiations of the exterior engine.

A 1-form A = A.dr - phi dt on an ordered {x, y, z, t} variety induces field
intensities through F = dA; processes V4 = [V, 1] reproduce the Lorentz work
split, the Euler/Bernoulli/Helmholtz constraint hierarchy, and the
Navier-Stokes residual.  All sign conventions are inherited from the engine
rule i(T)Omega4 = A^dA; printed engineering forms that differ by a sign are
reported against that rule, never patched into it.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Sequence, Tuple

import sympy as sp

from .errors import (DecompositionFailure, DegreeError, EngineInvariantError,
                     PfaffError, SizeUnsupportedError, VarietyDimensionError)
from .exterior import (DifferentialForm, DirectionField, Variety, d,
                       form_is_zero, interior, matrix_of_2form, wedge,
                       wedge_power)
from .symbolic import (Expr, SamplerConfig, ZeroVerdict, as_expr, is_zero,
                       simplify_expr)
from . import thermo

SPACETIME = Variety(("x", "y", "z", "t"))


def _require_spacetime(variety: Variety):
    if variety.n != 4:
        raise VarietyDimensionError(
            f"this operation needs 4 base variables (3 spatial + time), "
            f"got {variety.n}")


# ---------------------------------------------------------------------------
# spatial vector calculus over the first three variables


def grad(f: Expr, variety: Variety) -> Tuple[Expr, Expr, Expr]:
    sx, sy, sz = variety.symbols[:3]
    f = as_expr(f)
    return (sp.diff(f, sx), sp.diff(f, sy), sp.diff(f, sz))


def div(v: Sequence[Expr], variety: Variety) -> Expr:
    sx, sy, sz = variety.symbols[:3]
    return (sp.diff(as_expr(v[0]), sx) + sp.diff(as_expr(v[1]), sy)
            + sp.diff(as_expr(v[2]), sz))


def curl(v: Sequence[Expr], variety: Variety) -> Tuple[Expr, Expr, Expr]:
    sx, sy, sz = variety.symbols[:3]
    vx, vy, vz = (as_expr(c) for c in v)
    return (sp.diff(vz, sy) - sp.diff(vy, sz),
            sp.diff(vx, sz) - sp.diff(vz, sx),
            sp.diff(vy, sx) - sp.diff(vx, sy))


def vector_laplacian(v: Sequence[Expr], variety: Variety) -> Tuple[Expr, Expr, Expr]:
    """Delta v = grad(div v) - curl(curl v); reconciles both viscous forms."""
    g = grad(div(v, variety), variety)
    cc = curl(curl(v, variety), variety)
    return tuple(a - b for a, b in zip(g, cc))


def dot(u: Sequence[Expr], v: Sequence[Expr]) -> Expr:
    return sum(as_expr(a) * as_expr(b) for a, b in zip(u, v))


def cross(u: Sequence[Expr], v: Sequence[Expr]) -> Tuple[Expr, Expr, Expr]:
    ux, uy, uz = (as_expr(c) for c in u)
    vx, vy, vz = (as_expr(c) for c in v)
    return (uy * vz - uz * vy, uz * vx - ux * vz, ux * vy - uy * vx)


# ---------------------------------------------------------------------------
# field extraction


@dataclass
class FieldBundle:
    """Field intensities of an action 1-form; hydro flavor exposes the
    acceleration/vorticity aliases a = -E, omega = B."""

    E: Tuple[Expr, Expr, Expr]
    B: Tuple[Expr, Expr, Expr]
    potential: Expr
    vector_potential: Tuple[Expr, Expr, Expr]
    action: DifferentialForm
    flavor: str = "EM"

    @property
    def a(self) -> Tuple[Expr, Expr, Expr]:
        return tuple(-e for e in self.E)

    @property
    def omega(self) -> Tuple[Expr, Expr, Expr]:
        return self.B


def em_fields(A: DifferentialForm, flavor: str = "EM") -> FieldBundle:
    """E = -dA/dt - grad phi and B = curl A, cross-checked against the
    antisymmetric matrix slots of F = dA."""
    _require_spacetime(A.variety)
    if A.degree != 1:
        raise DegreeError("em_fields needs a 1-form")
    time = A.variety.symbols[3]
    a_vec = tuple(A.coeffs.get((m,), sp.Integer(0)) for m in range(3))
    phi = -A.coeffs.get((3,), sp.Integer(0))
    e_vec = tuple(-sp.diff(a_vec[m], time) - g
                  for m, g in enumerate(grad(phi, A.variety)))
    b_vec = curl(a_vec, A.variety)
    M = matrix_of_2form(d(A))
    slots = {
        "B_z": (M[0][1], b_vec[2]), "B_x": (M[1][2], b_vec[0]),
        "B_y": (-M[0][2], b_vec[1]), "E_x": (M[0][3], e_vec[0]),
        "E_y": (M[1][3], e_vec[1]), "E_z": (M[2][3], e_vec[2]),
    }
    for name, (matrix_value, field_value) in slots.items():
        if simplify_expr(matrix_value - field_value) != 0:
            raise EngineInvariantError(f"field slot {name} disagrees with [dA]")
    return FieldBundle(E=e_vec, B=b_vec, potential=phi, vector_potential=a_vec,
                       action=A, flavor=flavor)


def induction_residuals(bundle: FieldBundle):
    """The d(dA) = 0 identities: curl(-a) + d omega/dt and div omega."""
    variety = bundle.action.variety
    time = variety.symbols[3]
    neg_a = tuple(-c for c in bundle.a)
    faraday = tuple(c + sp.diff(w, time)
                    for c, w in zip(curl(neg_a, variety), bundle.omega))
    return faraday, div(bundle.omega, variety)


# ---------------------------------------------------------------------------
# Lorentz work split


@dataclass
class LorentzWork:
    work: DifferentialForm
    force_covector: Tuple[Expr, Expr, Expr]   # spatial part, -rho(E + VxB)
    power: Expr                               # dt coefficient, rho(V.E)
    bundle: FieldBundle


def lorentz_work(A: DifferentialForm, V: DirectionField) -> LorentzWork:
    """Split W = i(rho V4)dA into -rho(E + VxB).dr + rho(V.E)dt."""
    _require_spacetime(A.variety)
    if V.variety != A.variety:
        raise VarietyDimensionError("process field lives on a different variety")
    if simplify_expr(V.components[3] - 1) != 0:
        raise VarietyDimensionError("process must be parameterized by time "
                                    "(fourth component 1)")
    bundle = em_fields(A)
    spatial = V.components[:3]
    rho = V.rho
    vxb = cross(spatial, bundle.B)
    force = tuple(-rho * (e + c) for e, c in zip(bundle.E, vxb))
    power = rho * dot(spatial, bundle.E)
    work = interior(V, d(A))
    recombined = DifferentialForm(A.variety, 1, {
        (0,): force[0], (1,): force[1], (2,): force[2], (3,): power})
    if not (work - recombined).canonical().is_structurally_zero:
        raise EngineInvariantError("Lorentz split does not recombine to i(V)dA")
    return LorentzWork(work=work, force_covector=force, power=power, bundle=bundle)


# ---------------------------------------------------------------------------
# Navier-Stokes parameters


@dataclass
class NSParams:
    """Velocity, pressure, density, body potential, and viscosities.

    The expansion coefficient lam and bulk viscosity mu_b are tied by
    lam = mu_b - upsilon; give either (or both, consistently).
    """

    v: Tuple[Expr, Expr, Expr]
    rho: Expr = sp.Integer(1)
    P: Expr = sp.Integer(0)
    phi: Expr = sp.Integer(0)
    upsilon: Expr = sp.Integer(0)
    lam: Optional[Expr] = None
    mu_b: Optional[Expr] = None
    variety: Variety = SPACETIME

    def __post_init__(self):
        self.v = tuple(as_expr(c) for c in self.v)
        if len(self.v) != 3:
            raise VarietyDimensionError("velocity needs exactly 3 components")
        self.rho = as_expr(self.rho)
        self.P = as_expr(self.P)
        self.phi = as_expr(self.phi)
        self.upsilon = as_expr(self.upsilon)
        _require_spacetime(self.variety)
        if self.lam is None and self.mu_b is None:
            self.lam = sp.Integer(0)
            self.mu_b = self.upsilon
        elif self.lam is None:
            self.mu_b = as_expr(self.mu_b)
            self.lam = self.mu_b - self.upsilon
        elif self.mu_b is None:
            self.lam = as_expr(self.lam)
            self.mu_b = self.lam + self.upsilon
        else:
            self.lam = as_expr(self.lam)
            self.mu_b = as_expr(self.mu_b)
            if simplify_expr(self.lam - (self.mu_b - self.upsilon)) != 0:
                raise PfaffError("inconsistent viscosities: lam != mu_b - upsilon")

    def acceleration(self) -> Tuple[Expr, Expr, Expr]:
        """a = dv/dt + grad(v.v/2 + lam div v), from the assembled action."""
        time = self.variety.symbols[3]
        potential = dot(self.v, self.v) / 2 + self.lam * div(self.v, self.variety)
        g = grad(potential, self.variety)
        return tuple(sp.diff(c, time) + gc for c, gc in zip(self.v, g))


def assemble_action(params: NSParams) -> DifferentialForm:
    """A = v.dr - (v.v/2 + lam div v) dt."""
    potential = dot(params.v, params.v) / 2 + params.lam * div(params.v,
                                                               params.variety)
    coeffs = {(m,): params.v[m] for m in range(3)}
    coeffs[(3,)] = -potential
    return DifferentialForm(params.variety, 1, coeffs)


def process_field(params: NSParams) -> DirectionField:
    """V4 = [v, 1] scaled by rho."""
    return DirectionField(params.variety, params.v + (sp.Integer(1),), params.rho)


# ---------------------------------------------------------------------------
# Euler and Navier-Stokes residuals


@dataclass
class ResidualReport:
    residual: Tuple[Expr, Expr, Expr]
    verdicts: Tuple[ZeroVerdict, ZeroVerdict, ZeroVerdict]
    time_relation: Optional[Expr] = None
    time_verdict: Optional[ZeroVerdict] = None

    @property
    def satisfied(self) -> bool:
        return all(v.is_zero for v in self.verdicts)


def _transport(params: NSParams) -> Tuple[Expr, Expr, Expr]:
    """dv/dt + grad(v.v/2) - v x curl v."""
    variety = params.variety
    time = variety.symbols[3]
    kinetic = grad(dot(params.v, params.v) / 2, variety)
    vxw = cross(params.v, curl(params.v, variety))
    return tuple(sp.diff(c, time) + k - w
                 for c, k, w in zip(params.v, kinetic, vxw))


def euler_check(params: NSParams,
                cfg: SamplerConfig = SamplerConfig()) -> ResidualReport:
    """Residual of the inviscid equation of motion
    dv/dt + grad(v.v/2) - v x curl v + grad(P)/rho = 0,
    plus the time-component relation dP/dt = rho (v . a)."""
    variety = params.variety
    pressure = grad(params.P, variety)
    residual = tuple(t + g / params.rho
                     for t, g in zip(_transport(params), pressure))
    verdicts = tuple(is_zero(r, cfg.spawn(31 + i)) for i, r in enumerate(residual))
    time = variety.symbols[3]
    kinetic = grad(dot(params.v, params.v) / 2, variety)
    accel = tuple(sp.diff(c, time) + k for c, k in zip(params.v, kinetic))
    time_relation = sp.diff(params.P, time) - params.rho * dot(params.v, accel)
    return ResidualReport(residual=residual, verdicts=verdicts,
                          time_relation=time_relation,
                          time_verdict=is_zero(time_relation, cfg.spawn(34)))


def helmholtz_master_residual(params: NSParams) -> Tuple[Expr, Expr, Expr]:
    """curl(v x omega) - d omega/dt; zero for vorticity-conserving flows."""
    variety = params.variety
    time = variety.symbols[3]
    omega = curl(params.v, variety)
    lhs = curl(cross(params.v, omega), variety)
    return tuple(l - sp.diff(w, time) for l, w in zip(lhs, omega))


def ns_residual(params: NSParams, incompressible: bool = False,
                cfg: SamplerConfig = SamplerConfig()) -> ResidualReport:
    """Componentwise residual of the momentum equation
    dv/dt + grad(v.v/2) - v x curl v
        = -grad phi - grad(P)/rho + upsilon Delta v - (mu_b + upsilon) grad div v,
    with Delta v expanded as grad(div v) - curl(curl v).  Incompressible mode
    drops the grad div v correction."""
    variety = params.variety
    body = grad(params.phi, variety)
    pressure = grad(params.P, variety)
    lap = vector_laplacian(params.v, variety)
    expansion = grad(div(params.v, variety), variety)
    residual = []
    for i, t in enumerate(_transport(params)):
        r = t + body[i] + pressure[i] / params.rho - params.upsilon * lap[i]
        if not incompressible:
            r += (params.mu_b + params.upsilon) * expansion[i]
        residual.append(r)
    residual = tuple(residual)
    verdicts = tuple(is_zero(r, cfg.spawn(41 + i)) for i, r in enumerate(residual))
    return ResidualReport(residual=residual, verdicts=verdicts)


# ---------------------------------------------------------------------------
# work 1-form decomposition W = -dP + varpi_j (dx^j - v^j dt)


@dataclass
class NSWorkReport:
    action: DifferentialForm
    work: DifferentialForm
    fluctuation: DifferentialForm           # sum varpi_j (dx^j - v^j dt)
    varpi: Tuple[Expr, Expr, Expr]          # solved coefficients
    varpi_closure: Tuple[Expr, Expr, Expr]  # rho upsilon curl curl v
    closure_match: Tuple[ZeroVerdict, ...]       # varpi - closure
    closure_match_flipped: Tuple[ZeroVerdict, ...]  # varpi + closure
    bernoulli: ZeroVerdict                  # fluctuation vanishes, W = -dP
    notes: Tuple[str, ...]


def ns_work_form(params: NSParams, varpi: Optional[Sequence[Expr]] = None,
                 cfg: SamplerConfig = SamplerConfig()) -> NSWorkReport:
    """Decompose W + dP into fluctuation terms varpi_j (dx^j - v^j dt).

    The solved varpi are read off the spatial slots; the dt slot must then
    balance against -sum varpi_j v^j, otherwise the requested pressure is not
    a process invariant and DecompositionFailure is raised.  The solved
    coefficients are compared (both signs) against the rho*upsilon*curl curl v
    closure; on exact momentum-equation solutions they reproduce it up to the
    engine's orientation.
    """
    action = assemble_action(params)
    V4 = process_field(params)
    work = interior(V4, d(action))
    p_form = DifferentialForm.scalar(params.variety, params.P)
    fluct = work + d(p_form)
    solved = tuple(fluct.coeffs.get((m,), sp.Integer(0)) for m in range(3))
    dt_slot = fluct.coeffs.get((3,), sp.Integer(0))
    dt_residual = simplify_expr(dt_slot + dot(solved, params.v))
    if dt_residual != 0:
        verdict = is_zero(dt_residual, cfg.spawn(51))
        if not verdict.is_zero:
            raise DecompositionFailure(
                "W + dP keeps a dt component beyond -sum varpi_j v^j dt; "
                "the pressure is not a first integral of the process",
                residual=dt_residual)
    coeffs = {}
    for m in range(3):
        coeffs[(m,)] = solved[m]
    coeffs[(3,)] = -dot(solved, params.v)
    fluctuation = DifferentialForm(params.variety, 1, coeffs)
    if varpi is not None:
        closure = tuple(as_expr(c) for c in varpi)
    else:
        closure = tuple(params.rho * params.upsilon * c
                        for c in curl(curl(params.v, params.variety),
                                      params.variety))
    match = tuple(is_zero(s - c, cfg.spawn(52 + i))
                  for i, (s, c) in enumerate(zip(solved, closure)))
    flipped = tuple(is_zero(s + c, cfg.spawn(55 + i))
                    for i, (s, c) in enumerate(zip(solved, closure)))
    bernoulli = form_is_zero(fluctuation, cfg.spawn(58))
    notes = []
    if bernoulli.is_zero:
        notes.append("no fluctuation part: W = -dP, Bernoulli class")
    if all(v.is_zero for v in flipped) and not all(v.is_zero for v in match):
        notes.append("solved varpi equals minus the upsilon*curl curl v "
                     "closure; the engine orientation fixes this sign")
    return NSWorkReport(action=action, work=work, fluctuation=fluctuation,
                        varpi=solved, varpi_closure=closure,
                        closure_match=match, closure_match_flipped=flipped,
                        bernoulli=bernoulli, notes=tuple(notes))


# ---------------------------------------------------------------------------
# hydrodynamic torsion and dissipation


def eliminated_acceleration(params: NSParams) -> Tuple[Expr, Expr, Expr]:
    """a = dv/dt + grad(v.v/2 + lam div v) with the time derivative removed
    through the momentum equation (assumed satisfied)."""
    variety = params.variety
    vxw = cross(params.v, curl(params.v, variety))
    body = grad(params.phi, variety)
    pressure = grad(params.P, variety)
    cc = curl(curl(params.v, variety), variety)
    expansion = grad(div(params.v, variety), variety)
    return tuple(vxw[i] - body[i] - pressure[i] / params.rho
                 - params.upsilon * cc[i] - params.upsilon * expansion[i]
                 for i in range(3))


def hydro_torsion(params: NSParams) -> DirectionField:
    """Torsion direction field of the assembled action, written in fluid
    variables with the acceleration eliminated: [a x v - phi_action omega, -v.omega]."""
    variety = params.variety
    omega = curl(params.v, variety)
    a_elim = eliminated_acceleration(params)
    potential = dot(params.v, params.v) / 2 + params.lam * div(params.v, variety)
    spatial = tuple(c - potential * w
                    for c, w in zip(cross(a_elim, params.v), omega))
    helicity = dot(params.v, omega)
    return DirectionField(variety, spatial + (-helicity,))


def hydro_sigma(params: NSParams) -> Expr:
    """Dissipation coefficient sigma = -a.omega with a eliminated:
    grad(phi).omega + grad(P)/rho.omega + upsilon(curl curl v).omega
    + upsilon grad(div v).omega."""
    omega = curl(params.v, params.variety)
    return -dot(eliminated_acceleration(params), omega)


def shear_term(params: NSParams) -> Expr:
    """The shear-viscosity part of sigma; proportional to omega . curl omega,
    so it vanishes whenever the vorticity field has Pfaff dimension 2."""
    omega = curl(params.v, params.variety)
    return params.upsilon * dot(curl(curl(params.v, params.variety),
                                     params.variety), omega)


# ---------------------------------------------------------------------------
# the constrained-Lagrangian action and its top wedge power


@dataclass
class CartanHilbertReport:
    action: DifferentialForm
    variety: Variety
    modes: int
    top_power: DifferentialForm              # (dA)^(n+1)
    top_nonzero: ZeroVerdict
    action_wedge_top: ZeroVerdict            # A ^ (dA)^(n+1) = 0
    factorization: ZeroVerdict               # (n+1)! (sum (dL/dv - p) dv) ^ Omega
    canonical_collapse: ZeroVerdict          # p -> dL/dv kills the top power
    momentum_deviation: DifferentialForm     # sum (dL/dv^k - p_k) dv^k
    two_form_rank: int


def cartan_hilbert(n: int, L: Expr,
                   cfg: SamplerConfig = SamplerConfig()) -> CartanHilbertReport:
    """Build A = L dt + p_k (dq^k - v^k dt) on {q, v, p, t} coordinates and
    verify the top-wedge-power identities for n modes (1 or 2)."""
    if n not in (1, 2):
        raise SizeUnsupportedError("supported mode counts are 1 and 2")
    if n == 1:
        names = ("q", "v", "p", "t")
    else:
        names = ("q1", "q2", "v1", "v2", "p1", "p2", "t")
    variety = Variety(names)
    syms = {name: sp.Symbol(name) for name in names}
    L = as_expr(L)
    extra = {str(s) for s in L.free_symbols} - set(names)
    if extra:
        raise PfaffError(f"Lagrangian uses undeclared symbols: {sorted(extra)}")
    q = [syms[f"q{k+1}" if n > 1 else "q"] for k in range(n)]
    v = [syms[f"v{k+1}" if n > 1 else "v"] for k in range(n)]
    p = [syms[f"p{k+1}" if n > 1 else "p"] for k in range(n)]
    coeffs = {}
    for k in range(n):
        coeffs[(variety.index(str(q[k])),)] = p[k]
    coeffs[(variety.index("t"),)] = L - sum(p[k] * v[k] for k in range(n))
    action = DifferentialForm(variety, 1, coeffs)
    dA = d(action)
    top = wedge_power(dA, n + 1)
    top_nonzero = form_is_zero(top, cfg.spawn(61))
    awt = form_is_zero(wedge(action, top), cfg.spawn(62))
    deviation = DifferentialForm(variety, 1, {
        (variety.index(str(v[k])),): sp.diff(L, v[k]) - p[k] for k in range(n)})
    omega_indices = ([variety.index(str(p[k])) for k in range(n)]
                     + [variety.index(str(q[k])) for k in range(n)]
                     + [variety.index("t")])
    omega = DifferentialForm.from_terms(variety, 2 * n + 1,
                                        [(tuple(omega_indices), 1)])
    expected = wedge(deviation, omega) * sp.Integer(math.factorial(n + 1))
    factorization = form_is_zero(top - expected, cfg.spawn(63))
    substitution = {p[k]: sp.diff(L, v[k]) for k in range(n)}
    collapsed = action.map_coeffs(lambda c: c.subs(substitution))
    collapsed_top = wedge_power(d(collapsed), n + 1)
    canonical_collapse = form_is_zero(collapsed_top, cfg.spawn(64))
    rank = 2 * (n + 1) if top_nonzero.is_nonzero else 2 * n
    return CartanHilbertReport(
        action=action, variety=variety, modes=n, top_power=top,
        top_nonzero=top_nonzero, action_wedge_top=awt,
        factorization=factorization, canonical_collapse=canonical_collapse,
        momentum_deviation=deviation, two_form_rank=rank)
