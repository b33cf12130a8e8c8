import json
import math

import numpy as np
import pytest

from polypass.errors import GeometryError, HypothesisError, ValidationError
from polypass.mountain_pass import (
    EnergyNonlinearity,
    ExistenceProblem,
    SolveConfig,
    energy,
    euler_residual,
    mountain_pass,
    nehari_defect,
    sobolev_gradient,
    solve_existence,
    solve_two_signed,
)
from polypass.nonlinearity import (
    calibrate_truncation,
    negative_singular,
    power_exp,
    pure_power,
    truncate,
    zero_nonlinearity,
)
from polypass.operators import Domain, build_operator

from _shooting import radial_profile


def cubic_energy():
    # g(s) = s^3 with no extra term: lambda = 1, f = 0
    return EnergyNonlinearity.untruncated(zero_nonlinearity(), 1.0, 3)


@pytest.fixture(scope="module")
def ball_cubic():
    op = build_operator(Domain.ball(1.0, 3, 200), 1, "dirichlet")
    rep = mountain_pass(op, cubic_energy(), SolveConfig(grad_tol=1e-6))
    return op, rep


@pytest.fixture(scope="module")
def signed_pair():
    prob = ExistenceProblem(
        domain=Domain.ball(1.0, 3, 100), m=1, bc="dirichlet",
        f=pure_power(7.0), p=3, alpha=0.25,
    )
    return solve_two_signed(prob)


def test_config_validation():
    with pytest.raises(ValidationError):
        SolveConfig(path_nodes=2)
    with pytest.raises(ValidationError):
        SolveConfig(grad_tol=0.0)
    with pytest.raises(ValidationError):
        SolveConfig(backtrack_shrink=1.0)
    with pytest.raises(ValidationError):
        SolveConfig(max_backtracks=0)
    with pytest.raises(ValidationError):
        SolveConfig(amplitude_cap=-2.0)


def test_energy_nonlinearity_variants():
    f = power_exp(7.0)
    params = calibrate_truncation(f, math.pi**2)
    tn = truncate(f, params, 0.25, 3.0)
    both = EnergyNonlinearity.from_truncation(tn)
    plus = EnergyNonlinearity.from_truncation(tn, "plus")
    minus = EnergyNonlinearity.from_truncation(tn, "minus")
    assert both.direction == 1.0 and plus.direction == 1.0
    assert minus.direction == -1.0
    assert both.alpha == 0.25 and both.nu == params.nu
    scale = 0.25 ** (-params.nu / 4.0)
    assert abs(both.endpoint_scale - scale) < 1e-15
    with pytest.raises(ValidationError):
        EnergyNonlinearity.from_truncation(tn, "sideways")
    with pytest.raises(ValidationError):
        EnergyNonlinearity.untruncated(f, -1.0, 3.0)
    with pytest.raises(ValidationError):
        EnergyNonlinearity.untruncated(f, 1.0, 0.5)


def test_gradient_matches_finite_difference():
    op = build_operator(Domain.interval(1.0, 64), 1, "dirichlet")
    en = cubic_energy()
    x = op.domain.x
    u = np.sin(np.pi * x) + 0.3 * np.sin(2.0 * np.pi * x)
    d = np.sin(3.0 * np.pi * x) - 0.5 * np.sin(np.pi * x)
    eps = 1e-5
    fd = (energy(op, en, u + eps * d) - energy(op, en, u - eps * d)) / (2.0 * eps)
    exact = op.domain.inner(euler_residual(op, en, u).values, d)
    assert abs(fd - exact) <= 1e-7 * (1.0 + abs(exact))
    # the Sobolev gradient represents the same derivative in the form inner
    w = sobolev_gradient(op, en, u).values
    via_w = op.inner(op.apply(w), d)
    assert abs(via_w - exact) <= 1e-10 * (1.0 + abs(exact))


def test_nehari_defect_is_residual_pairing():
    op = build_operator(Domain.ball(1.0, 3, 64), 1, "dirichlet")
    en = cubic_energy()
    u = 5.0 * (1.0 - op.domain.r**2)
    lhs = nehari_defect(op, en, u)
    rhs = op.domain.inner(euler_residual(op, en, u).values, u)
    assert abs(lhs - rhs) <= 1e-11 * (1.0 + abs(lhs))


def test_no_ridge_raises_geometry_error():
    op = build_operator(Domain.interval(1.0, 32), 1, "dirichlet")
    dead = EnergyNonlinearity(
        g=lambda s: np.zeros_like(s), G=lambda s: np.zeros_like(s), p=1.0
    )
    with pytest.raises(GeometryError):
        mountain_pass(op, dead, SolveConfig(max_doublings=8))


def test_ball_cubic_matches_radial_shooting(ball_cubic):
    op, rep = ball_cubic
    assert rep.converged
    assert rep.grad_norm <= 1e-6
    exact = radial_profile(op.domain.r)
    err = np.max(np.abs(rep.u.values - exact))
    # second-order scheme; the measured constant is about 21
    assert err <= 30.0 / 200**2
    assert np.min(rep.u.values) > 0.0


def test_converged_run_invariants(ball_cubic):
    op, rep = ball_cubic
    form = rep.diagnostics["form_value"]
    assert rep.energy > 0.0
    assert abs(rep.nehari) <= 10.0 * 1e-6 * (1.0 + form)
    assert rep.energy <= rep.initial_path_max
    hist = np.array(rep.path_max_history)
    assert hist[0] == rep.initial_path_max
    assert np.all(np.diff(hist) < 0.0)
    assert rep.b0 >= 1.0
    assert rep.residual_sup < 1e-3


def test_interval_navier_bilaplacian_run():
    op = build_operator(Domain.interval(1.0, 128), 2, "navier")
    rep = mountain_pass(op, cubic_energy())
    assert rep.converged
    assert np.min(rep.u.values) > 0.0
    form = rep.diagnostics["form_value"]
    assert abs(rep.nehari) <= 10.0 * 1e-6 * (1.0 + form)


def test_truncated_report_carries_scaling_data():
    f = power_exp(7.0)
    op = build_operator(Domain.ball(1.0, 3, 100), 1, "dirichlet")
    lam1, _ = op.principal_eigenpair()
    tn = truncate(f, calibrate_truncation(f, lam1), 0.25, 3.0)
    rep = mountain_pass(op, EnergyNonlinearity.from_truncation(tn))
    assert rep.converged
    assert rep.alpha == 0.25
    assert rep.lam == pytest.approx(0.25 ** (-2.0))
    assert rep.sup_v == pytest.approx(0.25 * rep.sup_u)
    for key in ("level_constant", "form_value", "form_constant"):
        assert key in rep.diagnostics


def test_level_and_form_follow_alpha_scaling():
    # nu = 1/2 source; fitted slopes must stay under nu with slack 0.1
    f = negative_singular(0.5)
    alphas = (0.25, 0.0625, 0.015625)
    levels, forms = [], []
    for alpha in alphas:
        op = build_operator(Domain.interval(1.0, 128), 1, "dirichlet")
        lam1, _ = op.principal_eigenpair()
        tn = truncate(f, calibrate_truncation(f, lam1), alpha, 3.0)
        rep = mountain_pass(op, EnergyNonlinearity.from_truncation(tn))
        assert rep.converged
        levels.append(rep.energy)
        forms.append(rep.diagnostics["form_value"])
    la = np.log(1.0 / np.asarray(alphas))
    assert np.polyfit(la, np.log(levels), 1)[0] <= 0.5 + 0.1
    assert np.polyfit(la, np.log(forms), 1)[0] <= 0.5 + 0.1


def test_solution_stable_under_mesh_refinement(ball_cubic):
    _, fine = ball_cubic
    op = build_operator(Domain.ball(1.0, 3, 100), 1, "dirichlet")
    coarse = mountain_pass(op, cubic_energy(), SolveConfig(grad_tol=1e-6))
    assert coarse.converged
    assert abs(coarse.sup_u - fine.sup_u) <= 0.01 * fine.sup_u


def test_existence_certifies_small_alpha():
    res = solve_existence(ExistenceProblem(
        domain=Domain.ball(1.0, 3, 100), m=1, bc="dirichlet",
        f=power_exp(7.0), p=3, alpha=1.0 / 64.0,
    ))
    assert res.outcome == "certified"
    assert res.certified
    rep = res.report
    assert rep.converged
    assert rep.sup_v < res.s0p / 2.0
    assert res.lam == pytest.approx(4096.0)
    v = res.v.values
    assert np.max(np.abs(v)) < 1.0
    op = build_operator(Domain.ball(1.0, 3, 100), 1, "dirichlet")
    applied_sup = np.max(np.abs(op.apply(v)))
    assert res.untruncated_residual_sup <= 1e-4 * (1.0 + applied_sup)


def test_existence_flags_large_alpha():
    res = solve_existence(ExistenceProblem(
        domain=Domain.ball(1.0, 3, 64), m=1, bc="dirichlet",
        f=power_exp(7.0), p=3, alpha=0.25,
    ))
    assert res.outcome == "alpha-too-large"
    assert not res.certified
    assert res.v is None
    assert res.report.sup_v >= res.s0p / 2.0


def test_existence_rejects_bad_exponents():
    dom = Domain.ball(1.0, 3, 64)
    f = power_exp(7.0)
    for p in (1, 5, 6):  # linear, critical, supercritical for N=3, m=1
        with pytest.raises(ValidationError):
            solve_existence(ExistenceProblem(
                domain=dom, m=1, bc="dirichlet", f=f, p=p, alpha=0.125,
            ))
    with pytest.raises(ValidationError):
        solve_existence(ExistenceProblem(
            domain=Domain.interval(1.0, 64), m=1, bc="dirichlet",
            f=f, p=3, alpha=0.125,  # N missing for a non-ball domain
        ))
    with pytest.raises(ValidationError):
        solve_existence(ExistenceProblem(
            domain=dom, m=1, bc="dirichlet", f=f, p=3, alpha=1.0,
        ))


def test_two_signed_pure_power_mirrors(signed_pair):
    rp, rm = signed_pair
    assert rp.converged and rm.converged
    assert rp.sign_ok and rm.sign_ok
    assert np.min(rp.u.values) > 0.0
    assert np.max(rm.u.values) < 0.0
    mirror = np.max(np.abs(rp.u.values + rm.u.values))
    assert mirror <= 1e-8 * (1.0 + rp.sup_u)
    for rep in (rp, rm):
        assert np.isfinite(rep.diagnostics["full_residual_sup"])


def test_two_signed_exponential_pair_is_asymmetric():
    rp, rm = solve_two_signed(ExistenceProblem(
        domain=Domain.interval(1.0, 128), m=2, bc="navier",
        f=power_exp(7.0), p=3, alpha=0.25, N=5,
    ))
    assert rp.converged and rm.converged
    assert rp.sign_ok and rm.sign_ok
    # the exponential factor breaks the odd symmetry: the cones split in
    # energy (measured split about 9.5e-4, stable in the gradient tolerance)
    assert abs(rp.energy - rm.energy) > 1e-5
    gap = np.max(np.abs(rp.u.values + rm.u.values))
    assert gap > 1e-9 * (1.0 + rp.sup_u)


def test_two_signed_preconditions():
    dom = Domain.ball(1.0, 3, 64)
    with pytest.raises(HypothesisError):
        solve_two_signed(ExistenceProblem(
            domain=dom, m=1, bc="dirichlet",
            f=negative_singular(0.5), p=3, alpha=0.25,
        ))
    with pytest.raises(HypothesisError):
        solve_two_signed(ExistenceProblem(
            domain=dom, m=1, bc="dirichlet",
            f=zero_nonlinearity(), p=3, alpha=0.25,
        ))
    with pytest.raises(ValidationError):
        solve_two_signed(ExistenceProblem(
            domain=Domain.interval(1.0, 64), m=2, bc="dirichlet",
            f=pure_power(7.0), p=3, alpha=0.25, N=5,
        ))


def test_amplitude_cap_detects_concentration():
    op = build_operator(Domain.ball(1.0, 3, 200), 1, "dirichlet")
    en = EnergyNonlinearity.untruncated(pure_power(7.0), 0.0, 3)
    with pytest.raises(GeometryError):
        mountain_pass(op, en, SolveConfig(amplitude_cap=3.0))


def test_iteration_cap_returns_partial_report():
    op = build_operator(Domain.ball(1.0, 3, 64), 1, "dirichlet")
    rep = mountain_pass(op, cubic_energy(), SolveConfig(max_outer=3))
    assert not rep.converged
    assert "cap" in rep.message
    assert np.all(np.isfinite(rep.u.values))
    hist = np.array(rep.path_max_history)
    assert np.all(np.diff(hist) < 0.0)


def test_report_dict_serializes(signed_pair):
    rp, _ = signed_pair
    d = rp.as_dict()
    text = json.dumps(d, sort_keys=True)
    back = json.loads(text)
    assert back["converged"] is True
    assert back["sign_ok"] is True
    assert "full_residual_sup" in back["diagnostics"]
