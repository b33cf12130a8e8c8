"""Variational identity evaluation and the nonexistence machinery.

The Pucci-Serrin identity splits into an interior part

    (N/2 - a - m) int |D^m u|^2 + a int u g(u) - N int G(u)

and a boundary part -(1/2) int_bd |D^m u|^2 (nu . (x - y)) ds, where y is a
star center of the domain.  For a solution both sides agree, so their gap is
a quadrature-resolution diagnostic.  With the default multiplier
a = (N - 2m)/2 the |D^m u|^2 coefficient vanishes identically and the sign
of int (g(u) u - 2N/(N - 2m) G(u)) decides the star-shaped nonexistence
test.  N here is the geometric dimension of the domain.

The sweep drives the mountain-pass solver over a lambda grid on the
untruncated right-hand side f(s) + lambda |s|^(p-1) s under an amplitude
cap: nonexistence shows up as concentration past the cap (collapse), and the
certified rows feed fitted constants for the threshold estimates.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from fractions import Fraction
from typing import Callable, Sequence

import numpy as np

from .errors import GeometryError, HypothesisError, ValidationError
from .exponents import (
    ProblemExponents,
    STRICT_SUBCRITICAL,
    WIDE_SUBCRITICAL,
    as_fraction,
    classify_p,
    critical_exponent,
    lambda_lower,
)
from .mountain_pass import EnergyNonlinearity, SolveConfig, mountain_pass
from .nonlinearity import Nonlinearity, check_growth_dominance
from .operators import DIRICHLET, Domain, GridField, PolyharmonicOperator, build_operator


def geometric_dimension(domain: Domain) -> int:
    if domain.kind == "ball":
        return domain.dim
    return 1 if domain.kind == "interval" else 2


def _boundary_samples(domain: Domain) -> list[tuple[np.ndarray, np.ndarray]]:
    """(point, outward normal) pairs covering the boundary quadrature."""
    if domain.kind == "interval":
        L = domain.length
        return [
            (np.array([0.0]), np.array([-1.0])),
            (np.array([L]), np.array([1.0])),
        ]
    if domain.kind == "ball":
        R, d = domain.radius, domain.dim
        pairs = []
        for k in range(d):
            for s in (-1.0, 1.0):
                nu = np.zeros(d)
                nu[k] = s
                pairs.append((R * nu, nu))
        return pairs
    lx, ly = domain.lx, domain.ly
    pairs = []
    for yv in domain.y:
        pairs.append((np.array([0.0, yv]), np.array([-1.0, 0.0])))
        pairs.append((np.array([lx, yv]), np.array([1.0, 0.0])))
    for xv in domain.x:
        pairs.append((np.array([xv, 0.0]), np.array([0.0, -1.0])))
        pairs.append((np.array([xv, ly]), np.array([0.0, 1.0])))
    return pairs


def star_center(
    domain: Domain,
    boundary: Sequence[tuple[np.ndarray, np.ndarray]] | None = None,
) -> np.ndarray:
    """Centroid (interval, rectangle) or center (ball), verified to satisfy
    (x - y) . nu >= 0 at every boundary sample; a failed check raises, which
    is the not-star-shaped outcome."""
    if domain.kind == "interval":
        y = np.array([domain.length / 2.0])
    elif domain.kind == "ball":
        y = np.zeros(domain.dim)
    else:
        y = np.array([domain.lx / 2.0, domain.ly / 2.0])
    pairs = _boundary_samples(domain) if boundary is None else boundary
    for point, normal in pairs:
        if float(np.dot(np.asarray(point) - y, np.asarray(normal))) < 0.0:
            raise GeometryError(
                f"domain is not star-shaped about {y.tolist()}: "
                f"(x - y) . nu < 0 at x = {np.asarray(point).tolist()}"
            )
    return y


@dataclass(frozen=True)
class IdentityReport:
    a: float
    y: tuple
    interior_term: float
    boundary_term: float
    residual: float
    foufou: float | None
    sign_verdict: str
    resolution: float           # coarsest grid step behind the quadrature
    nodes: int

    def as_dict(self) -> dict:
        d = {
            "a": self.a,
            "y": list(self.y),
            "interior_term": self.interior_term,
            "boundary_term": self.boundary_term,
            "residual": self.residual,
            "sign_verdict": self.sign_verdict,
            "resolution": self.resolution,
            "nodes": self.nodes,
        }
        if self.foufou is not None:
            d["foufou"] = self.foufou
        return d


VERDICT_CONSISTENT = "identity-consistent (Dirichlet, star-shaped)"
VERDICT_POSITIVE = "foufou positive: outside the sign test"
VERDICT_NOT_APPLICABLE = "not-applicable (N <= 2m)"


def _face_offsets(domain: Domain, y: np.ndarray) -> dict[str, float]:
    """nu . (x - y) per boundary face; constant on flat faces and spheres."""
    if domain.kind == "interval":
        return {"x=0": float(y[0]), "x=L": float(domain.length - y[0])}
    if domain.kind == "ball":
        if not np.allclose(y, 0.0):
            raise ValidationError(
                "the radial grid only represents the centered star point y = 0"
            )
        return {"r=R": float(domain.radius)}
    return {
        "x=0": float(y[0]),
        "x=lx": float(domain.lx - y[0]),
        "y=0": float(y[1]),
        "y=ly": float(domain.ly - y[1]),
    }


def pucci_serrin(
    op: PolyharmonicOperator,
    u: np.ndarray | GridField,
    g: Callable[[np.ndarray], np.ndarray],
    G: Callable[[np.ndarray], np.ndarray],
    a: float | None = None,
    y: np.ndarray | None = None,
) -> IdentityReport:
    """Evaluate both sides of the variational identity in strong form.

    The interior uses the operator's quadrature (int |D^m u|^2 is the form,
    exact under summation by parts), the boundary uses the one-sided traces.
    Rejects fields that violate the boundary conditions.
    """
    if isinstance(u, GridField):
        u = u.values
    u = op.domain.check_values(u)
    N = geometric_dimension(op.domain)
    m = op.m
    if a is None:
        a = (N - 2 * m) / 2.0
    if y is None:
        y = star_center(op.domain)

    gu = g(u)
    Gu = G(u)
    coeff = N / 2.0 - a - m
    interior = (
        coeff * op.form(u)
        + a * op.domain.integrate(u * gu)
        - N * op.domain.integrate(Gu)
    )

    offsets = _face_offsets(op.domain, y)
    boundary = 0.0
    for face in op.boundary_trace(u):
        boundary -= 0.5 * offsets[face.label] * float(
            np.dot(face.weights, face.values**2)
        )

    if N > 2 * m:
        foufou = op.domain.integrate(gu * u - (2.0 * N / (N - 2 * m)) * Gu)
        scale = op.domain.integrate(np.abs(gu * u)) + (
            2.0 * N / (N - 2 * m)
        ) * op.domain.integrate(np.abs(Gu))
        if foufou <= 1e-6 * (1.0 + scale):
            verdict = VERDICT_CONSISTENT
        else:
            verdict = VERDICT_POSITIVE
    else:
        foufou = None
        verdict = VERDICT_NOT_APPLICABLE

    steps = [op.domain.hx, op.domain.hy] if op.domain.kind == "rectangle" else [op.domain.h]
    return IdentityReport(
        a=float(a),
        y=tuple(float(v) for v in y),
        interior_term=float(interior),
        boundary_term=float(boundary),
        residual=float(interior - boundary),
        foufou=foufou,
        sign_verdict=verdict,
        resolution=max(steps),
        nodes=op.domain.n,
    )


def nonexistence_verdict(lam: float, q, pe: ProblemExponents) -> str:
    """Sign-based verdict for (-Delta)^m u = |u|^(q-1) u + lam u -type
    problems on star-shaped Dirichlet domains: negative lam needs q at or
    above the critical exponent, lam = 0 needs strictly above."""
    q = as_fraction(q)
    crit = critical_exponent(pe)
    if (lam < 0 and q >= crit) or (lam == 0 and q > crit):
        return "no nontrivial solution"
    return "outside identity-based criteria"


@dataclass(frozen=True)
class SweepProblem:
    """Untruncated lambda sweep: (-Delta)^m u = f(u) + lam |u|^(p-1) u."""

    domain: Domain
    m: int
    bc: str
    f: Nonlinearity
    p: object                   # exact rational
    q: object                   # growth exponent of f, exact rational
    N: int | None = None
    s0: float = 10.0            # amplitude cap; beyond it a run is a collapse
    config: SolveConfig = field(default_factory=SolveConfig)


@dataclass(frozen=True)
class SweepRow:
    lam: float
    verdict: str                # "certified" | "uncertified" | "collapse"
    amplitude: float
    residual: float
    rel_residual: float
    mass: float                 # int |u|^(p+1)
    foufou: float | None
    energy: float
    converged: bool

    def as_dict(self) -> dict:
        d = {
            "lam": self.lam,
            "verdict": self.verdict,
            "amplitude": self.amplitude,
            "residual": self.residual,
            "rel_residual": self.rel_residual,
            "mass": self.mass,
            "energy": self.energy,
            "converged": self.converged,
        }
        if self.foufou is not None:
            d["foufou"] = self.foufou
        return d


@dataclass
class ThresholdReport:
    rows: list[SweepRow]
    lam_star: float | None
    slope: float | None
    slope_target: float
    n_certified: int
    C1_fit: float | None
    C2_fit: float | None
    lam_lower_empirical: float | None
    s0: float

    def as_dict(self) -> dict:
        return {
            "rows": [r.as_dict() for r in self.rows],
            "lam_star": self.lam_star,
            "slope": self.slope,
            "slope_target": self.slope_target,
            "n_certified": self.n_certified,
            "C1_fit": self.C1_fit,
            "C2_fit": self.C2_fit,
            "lam_lower_empirical": self.lam_lower_empirical,
            "s0": self.s0,
        }


def _sweep_row(problem: SweepProblem, lam: float, p: float, N: int) -> SweepRow:
    op = build_operator(problem.domain, problem.m, problem.bc)
    en = EnergyNonlinearity.untruncated(problem.f, lam, p)
    cfg = replace(problem.config, amplitude_cap=problem.s0)
    try:
        rep = mountain_pass(op, en, cfg)
    except GeometryError:
        # concentration past the cap, or no ridge at all: the collapse row
        return SweepRow(
            lam=lam, verdict="collapse", amplitude=0.0, residual=0.0,
            rel_residual=0.0, mass=0.0, foufou=0.0 if N > 2 * problem.m else None,
            energy=0.0, converged=False,
        )
    u = rep.u.values
    applied_sup = float(np.max(np.abs(op.apply(u))))
    rel = rep.residual_sup / (1.0 + applied_sup)
    certified = (
        rep.converged
        and 1e-3 < rep.sup_u <= problem.s0
        and rel <= 1e-3
    )
    mass = op.domain.integrate(np.abs(u) ** (p + 1.0))
    if N > 2 * problem.m:
        foufou = op.domain.integrate(
            en.g(u) * u - (2.0 * N / (N - 2 * problem.m)) * en.G(u)
        )
    else:
        foufou = None
    return SweepRow(
        lam=lam,
        verdict="certified" if certified else "uncertified",
        amplitude=rep.sup_u,
        residual=rep.residual_sup,
        rel_residual=rel,
        mass=mass,
        foufou=foufou,
        energy=rep.energy,
        converged=rep.converged,
    )


def nonexistence_sweep(
    problem: SweepProblem,
    lambda_grid: Sequence[float],
    jobs: int = 1,
) -> ThresholdReport:
    """Run the capped solver across the grid and fit the threshold data.

    Certification per row: converged, amplitude in (1e-3, s0], relative
    strong-form residual <= 1e-3.  The smallest certified lambda is the
    empirical threshold; over the certified rows the mass int |u|^(p+1) is
    regressed against lambda and the two envelope constants are fitted as
    C1 = max mass / lam^((p+1)/(q-p)) and C2 = min mass * lam^((p+1)/(p-1)).
    """
    if problem.bc != DIRICHLET:
        raise ValidationError("the sweep is a Dirichlet-setting construction")
    lams = [float(v) for v in lambda_grid]
    if not lams:
        raise ValidationError("lambda grid is empty")
    if any(not (math.isfinite(v) and v >= 0.0) for v in lams):
        raise ValidationError("lambda grid entries must be finite and >= 0")
    star_center(problem.domain)

    N_exp = problem.N if problem.N is not None else getattr(problem.domain, "dim", None)
    if N_exp is None:
        raise ValidationError("exponent-side dimension N required for non-ball domains")
    pe = ProblemExponents(N=N_exp, m=problem.m, p=as_fraction(problem.p))
    if classify_p(pe) not in (WIDE_SUBCRITICAL, STRICT_SUBCRITICAL):
        raise ValidationError(
            f"perturbation exponent p = {pe.p} must be subcritical for the sweep"
        )
    q = as_fraction(problem.q)
    if q <= pe.p:
        raise ValidationError("growth exponent q must exceed p")
    dom_check = check_growth_dominance(problem.f, float(q))
    if not dom_check.passed:
        raise HypothesisError(
            "f fails the superlinear dominance hypothesis: "
            f"difference_ok={dom_check.difference_ok}, lower_ok={dom_check.lower_ok}"
        )

    p = float(pe.p)
    N_geom = geometric_dimension(problem.domain)
    lams_sorted = sorted(lams)
    if jobs > 1:
        from concurrent.futures import ThreadPoolExecutor

        with ThreadPoolExecutor(max_workers=jobs) as pool:
            rows = list(pool.map(
                lambda lv: _sweep_row(problem, lv, p, N_geom), lams_sorted
            ))
    else:
        rows = [_sweep_row(problem, lv, p, N_geom) for lv in lams_sorted]

    certified = [r for r in rows if r.verdict == "certified"]
    positive = [r for r in certified if r.lam > 0.0]
    lam_star = min((r.lam for r in certified), default=None)

    t_upper = float((pe.p + 1) / (q - pe.p))
    slope = None
    if len(positive) >= 2:
        xs = np.log([r.lam for r in positive])
        ys = np.log([r.mass for r in positive])
        slope = float(np.polyfit(xs, ys, 1)[0])
    C1_fit = max((r.mass / r.lam**t_upper for r in positive), default=None)
    C2_fit = None
    lam_lower_emp = None
    if pe.p > 1:
        t_lower = float((pe.p + 1) / (pe.p - 1))
        C2_fit = min((r.mass * r.lam**t_lower for r in positive), default=None)
        if C1_fit and C2_fit:
            lam_lower_emp = lambda_lower(C1_fit, C2_fit, pe.p, q).value

    return ThresholdReport(
        rows=rows,
        lam_star=lam_star,
        slope=slope,
        slope_target=t_upper,
        n_certified=len(certified),
        C1_fit=C1_fit,
        C2_fit=C2_fit,
        lam_lower_empirical=lam_lower_emp,
        s0=problem.s0,
    )
