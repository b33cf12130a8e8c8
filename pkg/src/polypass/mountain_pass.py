"""Numerical mountain-pass solver for the truncated variational problems,
plus the full existence pipeline (solve -> detruncate -> certify) and the
two-signed-solution variant.

The functional is I(u) = (1/2) form(u) - int G(u).  The algorithm is path
deformation with ray peak re-selection: join 0 to a negative-energy endpoint
v by a discrete path, locate the path maximizer, lift it to the maximum of I
along its own ray, then push it downhill along the Sobolev gradient (the H_m
Riesz representative of I', one operator solve), accepting steps only when
the ray peak value of the trial strictly decreases.  Neighbors are re-spaced
locally and the loop stops when the gradient norm at the maximizer drops
under tolerance.  The peak re-selection is load bearing: descending raw node
values lets nodes slide off both flanks of the ridge and the sampled maximum
drains to zero (measured), while a ray peak can never fall under the minimax
level, so the descent settles on the saddle instead.

Endpoints: v = direction * b0 * scale * w0 with w0 the form-normalized
principal eigenfunction and b0 doubled from 1 until I(v) <= 0.  For scaled
truncations, scale = alpha^(-nu/(p+1)) tracks the blowup of the analytic
endpoint; for plain problems it is 1.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from scipy.optimize import minimize_scalar

from .errors import GeometryError, HypothesisError, ValidationError
from .exponents import ProblemExponents, as_fraction, classify_p, STRICT_SUBCRITICAL
from .nonlinearity import (
    Nonlinearity,
    TruncatedNonlinearity,
    calibrate_truncation,
    truncate,
)
from .operators import DIRICHLET, NAVIER, Domain, GridField, PolyharmonicOperator, build_operator


@dataclass(frozen=True)
class SolveConfig:
    """Plumbing knobs for the path-deformation loop."""

    path_nodes: int = 40
    grad_tol: float = 1e-6
    max_outer: int = 5000
    backtrack_shrink: float = 0.5
    max_backtracks: int = 40
    max_doublings: int = 60
    amplitude_cap: float | None = None

    def __post_init__(self):
        if self.path_nodes < 3:
            raise ValidationError("path needs at least 3 nodes")
        if not (self.grad_tol > 0 and self.max_outer > 0):
            raise ValidationError("tolerances and iteration caps must be positive")
        if not (0.0 < self.backtrack_shrink < 1.0):
            raise ValidationError("backtrack shrink must lie in (0, 1)")
        if self.max_backtracks < 1 or self.max_doublings < 1:
            raise ValidationError("backtrack/doubling caps must be >= 1")
        if self.amplitude_cap is not None and not self.amplitude_cap > 0:
            raise ValidationError("amplitude cap must be positive")


@dataclass(frozen=True)
class EnergyNonlinearity:
    """Right-hand side g and primitive G entering I(u) = form/2 - int G(u).

    direction picks which cone the endpoint points into (+1/-1), scale is
    the endpoint amplitude factor, and (alpha, nu, p) ride along for
    detruncation bookkeeping when the g comes from a scaled cut-off.
    """

    g: Callable[[np.ndarray], np.ndarray]
    G: Callable[[np.ndarray], np.ndarray]
    p: float
    label: str = "custom"
    direction: float = 1.0
    endpoint_scale: float = 1.0
    alpha: float | None = None
    nu: float | None = None

    @classmethod
    def from_truncation(
        cls, tn: TruncatedNonlinearity, variant: str = "both"
    ) -> "EnergyNonlinearity":
        scale = tn.alpha ** (-tn.params.nu / (tn.p + 1.0))
        if variant == "both":
            g, G, direction = tn.g_alpha, tn.G_alpha, +1.0
        elif variant == "plus":
            g, G, direction = tn.g_plus, tn.G_plus, +1.0
        elif variant == "minus":
            g, G, direction = tn.g_minus, tn.G_minus, -1.0
        else:
            raise ValidationError(f"unknown truncation variant: {variant!r}")
        return cls(
            g=g, G=G, p=tn.p,
            label=f"truncated-{variant}(alpha={tn.alpha})",
            direction=direction, endpoint_scale=scale,
            alpha=tn.alpha, nu=tn.params.nu,
        )

    @classmethod
    def untruncated(cls, f: Nonlinearity, lam: float, p) -> "EnergyNonlinearity":
        p = float(p)
        lam = float(lam)
        if not (np.isfinite(lam) and lam >= 0.0):
            raise ValidationError("lambda must be finite and >= 0")
        if not p >= 1.0:
            raise ValidationError("perturbation exponent p must be >= 1")

        def g(s):
            return f.f(s) + lam * np.sign(s) * np.abs(s) ** p

        def G(s):
            return f.F(s) + lam * np.abs(s) ** (p + 1.0) / (p + 1.0)

        return cls(g=g, G=G, p=p, label=f"untruncated({f.kind}, lambda={lam})")


def energy(op: PolyharmonicOperator, en: EnergyNonlinearity, u: np.ndarray) -> float:
    u = op.domain.check_values(u)
    return 0.5 * op.form(u) - op.domain.integrate(en.G(u))


def euler_residual(
    op: PolyharmonicOperator, en: EnergyNonlinearity, u: np.ndarray
) -> GridField:
    """Strong-form defect apply(u) - g(u), zero at a discrete solution."""
    u = op.domain.check_values(u)
    return GridField(op.domain, op.apply(u) - en.g(u))


def sobolev_gradient(
    op: PolyharmonicOperator, en: EnergyNonlinearity, u: np.ndarray
) -> GridField:
    """H_m-metric gradient w = u - solve(g(u)); I'(u)v = <w, v> in the form
    inner product, so sqrt(form(w)) is the reported gradient norm."""
    u = op.domain.check_values(u)
    return GridField(op.domain, u - op.solve(en.g(u)))


def nehari_defect(op: PolyharmonicOperator, en: EnergyNonlinearity, u: np.ndarray) -> float:
    """I'(u)u = form(u) - int g(u) u, evaluated without forming w."""
    u = op.domain.check_values(u)
    return op.form(u) - op.domain.integrate(en.g(u) * u)


@dataclass
class SolveReport:
    """Outcome of one mountain-pass run plus certification bookkeeping."""

    u: GridField
    energy: float
    grad_norm: float
    nehari: float
    sup_u: float
    converged: bool
    iterations: int
    b0: float
    initial_path_max: float
    path_max_history: list[float]
    backtracks: int
    residual_sup: float
    message: str = ""
    alpha: float | None = None
    nu: float | None = None
    lam: float | None = None
    sup_v: float | None = None
    diagnostics: dict = field(default_factory=dict)
    sign_ok: bool | None = None

    def as_dict(self) -> dict:
        d = {
            "energy": self.energy,
            "grad_norm": self.grad_norm,
            "nehari": self.nehari,
            "sup_u": self.sup_u,
            "converged": self.converged,
            "iterations": self.iterations,
            "b0": self.b0,
            "initial_path_max": self.initial_path_max,
            "path_max_history": self.path_max_history,
            "backtracks": self.backtracks,
            "residual_sup": self.residual_sup,
            "message": self.message,
            "diagnostics": self.diagnostics,
        }
        for key in ("alpha", "nu", "lam", "sup_v", "sign_ok"):
            val = getattr(self, key)
            if val is not None:
                d[key] = val
        return d


def _ray_peak(op, en, cfg, u) -> tuple[float, float]:
    """Maximize t -> I(t u) over t > 0: coarse grid to bracket the global
    maximum, then a bounded scalar refine.  The upper end T is doubled until
    the energy goes nonpositive, so the hump is always inside [0, T]."""
    fu = op.form(u)
    if not fu > 0.0:
        raise GeometryError("ray through a null direction; no ridge")
    Gu = lambda t: op.domain.integrate(en.G(t * u))
    phi = lambda t: 0.5 * t * t * fu - Gu(t)
    T = 1.0
    for _ in range(cfg.max_doublings):
        if phi(T) <= 0.0:
            break
        T *= 2.0
    else:
        raise GeometryError(
            "energy stays positive along the ray within the doubling cap; "
            "no mountain-pass geometry"
        )
    ts = T * np.linspace(0.0, 1.0, 65)[1:]
    vals = np.array([phi(t) for t in ts])
    j = int(np.argmax(vals))
    lo = ts[j - 1] if j > 0 else ts[j] / 64.0
    hi = ts[j + 1] if j < len(ts) - 1 else ts[j]
    res = minimize_scalar(
        lambda t: -phi(t), bounds=(lo, hi), method="bounded",
        options={"xatol": 1e-13 * T},
    )
    t_hat = float(res.x)
    return t_hat, phi(t_hat)


def _endpoint(op, en, cfg) -> tuple[np.ndarray, float]:
    _, w0 = op.principal_eigenpair()
    base = en.direction * en.endpoint_scale * w0
    b = 1.0
    for _ in range(cfg.max_doublings):
        v = b * base
        if cfg.amplitude_cap is not None and np.max(np.abs(v)) > cfg.amplitude_cap:
            raise GeometryError(
                "mountain-pass endpoint exceeds the amplitude cap before "
                "reaching negative energy"
            )
        if energy(op, en, v) <= 0.0:
            return v, b
        b *= 2.0
    raise GeometryError(
        "no negative-energy endpoint within the doubling cap; "
        "the functional has no mountain-pass geometry in this direction"
    )


def mountain_pass(
    op: PolyharmonicOperator,
    en: EnergyNonlinearity,
    cfg: SolveConfig | None = None,
) -> SolveReport:
    """Path-deformation mountain pass; see the module docstring.

    Raises GeometryError when no ridge exists (or an amplitude cap pinches
    the run); iteration exhaustion returns a partial report with
    converged = False.
    """
    cfg = cfg or SolveConfig()
    v, b0 = _endpoint(op, en, cfg)
    n = cfg.path_nodes
    ts = np.linspace(0.0, 1.0, n)
    path = [t * v for t in ts]
    E = np.array([energy(op, en, z) for z in path])
    initial_max = float(np.max(E))
    if initial_max <= 0.0:
        raise GeometryError(
            "initial path has no positive maximum; no ridge between 0 and the endpoint"
        )

    history = [initial_max]
    total_backtracks = 0
    message = "iteration cap reached"
    converged = False
    it = 0
    i_star = int(np.argmax(E))

    for it in range(1, cfg.max_outer + 1):
        i_star = int(np.argmax(E))        # ties break to the smallest index
        if i_star in (0, n - 1):
            raise GeometryError("path maximum sits at an endpoint; ridge lost")

        # lift the maximizer onto the ridge before descending
        t_hat, e_peak = _ray_peak(op, en, cfg, path[i_star])
        u = t_hat * path[i_star]
        path[i_star] = u
        E[i_star] = e_peak
        if cfg.amplitude_cap is not None and np.max(np.abs(u)) > cfg.amplitude_cap:
            raise GeometryError("iterate escaped the amplitude cap (concentration)")

        w = sobolev_gradient(op, en, u).values
        gn2 = op.form(w)
        gn = math.sqrt(max(gn2, 0.0))
        if gn <= cfg.grad_tol:
            converged = True
            message = "gradient norm under tolerance at the path maximizer"
            break

        sigma = 1.0
        accepted = False
        for _ in range(cfg.max_backtracks):
            trial = u - sigma * w
            try:
                t_trial, e_trial = _ray_peak(op, en, cfg, trial)
            except GeometryError:
                t_trial, e_trial = None, math.inf
            if e_trial <= e_peak - 1e-4 * sigma * gn2:
                accepted = True
                break
            sigma *= cfg.backtrack_shrink
            total_backtracks += 1
        if not accepted:
            message = "line search stalled before the gradient tolerance"
            break

        path[i_star] = t_trial * trial
        E[i_star] = e_trial
        if cfg.amplitude_cap is not None and np.max(np.abs(path[i_star])) > cfg.amplitude_cap:
            raise GeometryError("iterate escaped the amplitude cap (concentration)")

        # local re-spacing, never allowed to raise the path maximum
        cur_max = float(np.max(E))
        for j in (i_star - 1, i_star + 1):
            if 0 < j < n - 1:
                cand = 0.5 * (path[j - 1] + path[j + 1])
                e_cand = energy(op, en, cand)
                if e_cand <= cur_max:
                    path[j] = cand
                    E[j] = e_cand

        new_max = float(np.max(E))
        if new_max < history[-1]:
            history.append(new_max)

    if not converged:
        # report the current maximizer; siblings near a converged level sit
        # within roundoff of each other, so re-selection is only meaningful
        # when the loop did not already settle on a node
        i_star = int(np.argmax(E))
    u = path[i_star]
    res = euler_residual(op, en, u).values
    gn = math.sqrt(max(op.form(sobolev_gradient(op, en, u).values), 0.0))
    sup_u = float(np.max(np.abs(u)))
    report = SolveReport(
        u=GridField(op.domain, u),
        energy=energy(op, en, u),
        grad_norm=gn,
        nehari=nehari_defect(op, en, u),
        sup_u=sup_u,
        converged=converged,
        iterations=it,
        b0=b0,
        initial_path_max=initial_max,
        path_max_history=history,
        backtracks=total_backtracks,
        residual_sup=float(np.max(np.abs(res))),
        message=message,
        alpha=en.alpha,
        nu=en.nu,
    )
    if en.alpha is not None:
        report.sup_v = en.alpha * sup_u
        if en.p > 1.0:
            report.lam = en.alpha ** (1.0 - en.p)
        # fitted-constant forms of the level and energy-norm upper bounds:
        # level <= C alpha^-nu and form <= C alpha^-nu
        report.diagnostics = {
            "level_constant": report.energy * en.alpha**en.nu,
            "form_value": op.form(u),
            "form_constant": op.form(u) * en.alpha**en.nu,
        }
    else:
        report.diagnostics = {"form_value": op.form(u)}
    return report


@dataclass
class ExistenceProblem:
    """Full problem description for the existence pipeline."""

    domain: Domain
    m: int
    bc: str
    f: Nonlinearity
    p: object                  # exact rational (int, str, Fraction)
    alpha: float
    N: int | None = None       # exponent-side dimension; defaults to ball dim
    config: SolveConfig = field(default_factory=SolveConfig)

    def exponents(self) -> ProblemExponents:
        N = self.N if self.N is not None else getattr(self.domain, "dim", None)
        if N is None:
            raise ValidationError(
                "exponent-side dimension N required for non-ball domains"
            )
        return ProblemExponents(N=N, m=self.m, p=as_fraction(self.p))


@dataclass
class ExistenceResult:
    outcome: str               # "certified" | "alpha-too-large" | "not-converged"
    report: SolveReport
    lambda1: float
    s0p: float
    nu: float
    v: GridField | None = None
    lam: float | None = None
    untruncated_residual_sup: float | None = None
    certified: bool = False


def solve_existence(problem: ExistenceProblem) -> ExistenceResult:
    """Calibrate, truncate, run the mountain pass, then detruncate:
    when sup|alpha u| < s0'/2 the cut-off was never active on the solution,
    v = alpha u solves the original problem at lambda = alpha^(1-p), and the
    certificate re-checks the untruncated residual and sup|v| < 1."""
    if not (0.0 < problem.alpha < 1.0):
        raise ValidationError(
            "existence pipeline needs a truncation scale alpha in (0, 1)"
        )
    pe = problem.exponents()
    if classify_p(pe) != STRICT_SUBCRITICAL:
        raise ValidationError(
            f"perturbation exponent p = {pe.p} must be strictly subcritical "
            f"(1 < p < {pe.N + 2 * pe.m}/{pe.N - 2 * pe.m})"
        )
    p = float(pe.p)
    op = build_operator(problem.domain, problem.m, problem.bc)
    lam1, _ = op.principal_eigenpair()
    params = calibrate_truncation(problem.f, lam1)
    tn = truncate(problem.f, params, problem.alpha, p)
    en = EnergyNonlinearity.from_truncation(tn)
    report = mountain_pass(op, en, problem.config)

    base = ExistenceResult(
        outcome="not-converged",
        report=report,
        lambda1=lam1,
        s0p=params.s0p,
        nu=params.nu,
    )
    if not report.converged:
        return base
    if not report.sup_v < params.s0p / 2.0:
        base.outcome = "alpha-too-large"
        return base

    alpha = problem.alpha
    v = alpha * report.u.values
    lam = alpha ** (1.0 - p)
    applied = op.apply(v)
    resid = applied - problem.f.f(v) - lam * np.sign(v) * np.abs(v) ** p
    sup_resid = float(np.max(np.abs(resid)))
    tolerance = 1e-4 * (1.0 + float(np.max(np.abs(applied))))
    sup_v = float(np.max(np.abs(v)))
    base.v = GridField(op.domain, v)
    base.lam = lam
    base.untruncated_residual_sup = sup_resid
    base.certified = sup_resid <= tolerance and sup_v < 1.0
    base.outcome = "certified" if base.certified else "not-converged"
    return base


def _check_sign_hypothesis(f: Nonlinearity) -> None:
    s = 2.0 ** -np.arange(0.0, 21.0)
    for side in (s, -s):
        if not np.all(f.f(side) * side > 0.0):
            raise HypothesisError(
                "two-signed variant requires f(s) s > 0 for 0 < |s| <= 1"
            )


def solve_two_signed(problem: ExistenceProblem) -> tuple[SolveReport, SolveReport]:
    """Mountain pass on the one-sided nonlinearities; the plus run lands in
    the positive cone and the minus run in the negative cone (checked on the
    reports), and each solves the unsigned problem since g matches its
    one-sided variant on the matching cone."""
    if problem.bc != NAVIER and problem.m != 1:
        raise ValidationError(
            "two-signed variant requires Navier conditions (m = 1 Dirichlet "
            "is the same operator)"
        )
    if not (0.0 < problem.alpha < 1.0):
        raise ValidationError(
            "two-signed pipeline needs a truncation scale alpha in (0, 1)"
        )
    _check_sign_hypothesis(problem.f)
    pe = problem.exponents()
    if classify_p(pe) != STRICT_SUBCRITICAL:
        raise ValidationError(
            f"perturbation exponent p = {pe.p} must be strictly subcritical"
        )
    p = float(pe.p)
    op = build_operator(problem.domain, problem.m, problem.bc)
    lam1, _ = op.principal_eigenpair()
    params = calibrate_truncation(problem.f, lam1)
    tn = truncate(problem.f, params, problem.alpha, p)

    reports = []
    for variant in ("plus", "minus"):
        en = EnergyNonlinearity.from_truncation(tn, variant)
        rep = mountain_pass(op, en, problem.config)
        u = rep.u.values
        if variant == "plus":
            rep.sign_ok = bool(np.min(u) > 0.0)
        else:
            rep.sign_ok = bool(np.max(u) < 0.0)
        # solution of the unsigned problem: g agrees with the one-sided g on
        # the cone the iterate lives in
        full = EnergyNonlinearity.from_truncation(tn, "both")
        rep.diagnostics["full_residual_sup"] = float(
            np.max(np.abs(euler_residual(op, full, u).values))
        )
        reports.append(rep)
    return reports[0], reports[1]
