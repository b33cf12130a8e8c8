import random
from fractions import Fraction

import pytest

from polypass.errors import ValidationError
from polypass.exponents import (
    CONFORMAL,
    SUBCONFORMAL,
    TERMINAL,
    ChainEntry,
    ProblemExponents,
    as_fraction,
    bootstrap_chain,
    classify_p,
    critical_exponent,
    fraction_json,
    gamma_and_nu,
    lambda_lower,
    ledger_json,
    ledger_table,
    nonexistence_delta,
    scaling_alpha,
    scaling_lambda,
    sobolev_step,
)

F = Fraction


def test_as_fraction_accepts_exact_forms():
    assert as_fraction(3) == F(3)
    assert as_fraction("3/2") == F(3, 2)
    assert as_fraction(F(7, 5)) == F(7, 5)


def test_as_fraction_rejects_floats_and_bools():
    with pytest.raises(ValidationError):
        as_fraction(1.5)
    with pytest.raises(ValidationError):
        as_fraction(True)
    with pytest.raises(ValidationError):
        as_fraction("not a number")


def test_problem_exponents_validation():
    with pytest.raises(ValidationError, match="N >= 2m\\+1 violated"):
        ProblemExponents(N=4, m=2, p=F(3, 2))
    with pytest.raises(ValidationError):
        ProblemExponents(N=3, m=0, p=F(3, 2))
    with pytest.raises(ValidationError):
        ProblemExponents(N=3, m=1, p=F(-1, 2))
    pe = ProblemExponents(N=7, m=1, p="3/2", q="7")
    assert pe.p == F(3, 2) and pe.q == F(7)


def test_critical_exponent_values():
    assert critical_exponent(ProblemExponents(3, 1, 1)) == 5
    assert critical_exponent(ProblemExponents(5, 2, 1)) == 9
    assert critical_exponent(ProblemExponents(7, 1, 1)) == F(9, 5)


def test_critical_exponent_decreasing_in_N():
    prev = None
    for N in range(3, 30):
        c = critical_exponent(ProblemExponents(N, 1, 1))
        if prev is not None:
            assert c < prev
        prev = c


def test_classify_p():
    assert classify_p(ProblemExponents(7, 1, "3/2")) == "strict-subcritical"
    assert classify_p(ProblemExponents(7, 1, 1)) == "wide-subcritical"
    assert classify_p(ProblemExponents(7, 1, "9/5")) == "critical"
    assert classify_p(ProblemExponents(7, 1, 2)) == "supercritical"
    assert classify_p(ProblemExponents(7, 1, "1/2")) == "sublinear"


def test_sobolev_step_branches():
    pe = ProblemExponents(7, 1, "3/2")
    step = sobolev_step("28/15", pe)
    assert step.branch == SUBCONFORMAL and step.next_q == 4

    pe5 = ProblemExponents(5, 1, 2)
    step = sobolev_step("5/2", pe5)
    assert step.branch == CONFORMAL and step.next_q == 6

    step = sobolev_step(4, pe)
    assert step.branch == TERMINAL and step.next_q is None

    with pytest.raises(ValidationError):
        sobolev_step(1, pe)


# frozen chain oracles, worked out by hand in exact arithmetic
def test_chain_7_1_3half():
    ledger = bootstrap_chain(ProblemExponents(7, 1, "3/2"))
    assert [e.q for e in ledger.chain] == [F(28, 15), F(8, 3), F(112, 15)]
    assert [e.branch for e in ledger.chain] == [SUBCONFORMAL, SUBCONFORMAL, TERMINAL]
    assert ledger.k0 == 2
    assert ledger.gamma_paper == 9
    assert ledger.gamma_iterated == F(103, 16)
    assert ledger.nu_lower == F(1, 9)
    assert ledger.beta_paper == F(8, 51)


def test_chain_3_1_2_immediate_regularity():
    ledger = bootstrap_chain(ProblemExponents(3, 1, 2))
    assert ledger.chain == (ChainEntry(F(3), TERMINAL),)
    assert ledger.k0 == 0
    assert ledger.gamma_paper is None
    assert ledger.gamma_iterated == 2
    assert ledger.nu_lower == F(1, 2)


def test_chain_5_1_2_conformal_middle():
    ledger = bootstrap_chain(ProblemExponents(5, 1, 2))
    assert [e.q for e in ledger.chain] == [F(5, 3), F(5, 2), F(3)]
    assert [e.branch for e in ledger.chain] == [SUBCONFORMAL, CONFORMAL, TERMINAL]
    assert ledger.k0 == 1
    assert ledger.gamma_paper == 32
    assert ledger.gamma_iterated == 5
    assert ledger.nu_lower == F(1, 32)


def test_bootstrap_rejects_non_strict_subcritical():
    with pytest.raises(ValidationError):
        bootstrap_chain(ProblemExponents(7, 1, 1))
    with pytest.raises(ValidationError):
        bootstrap_chain(ProblemExponents(7, 1, 2))


def test_gamma_and_nu_matches_ledger():
    pe = ProblemExponents(7, 1, "3/2")
    ledger = bootstrap_chain(pe)
    gp, gi, nu = gamma_and_nu(pe, ledger)
    assert (gp, gi, nu) == (ledger.gamma_paper, ledger.gamma_iterated, ledger.nu_lower)


def _random_strict_subcritical(rng: random.Random) -> ProblemExponents:
    while True:
        m = rng.randint(1, 5)
        N = rng.randint(2 * m + 1, 25)
        crit = F(N + 2 * m, N - 2 * m)
        den = rng.randint(2, 60)
        num = rng.randint(1, den - 1)
        p = 1 + (crit - 1) * F(num, den)
        if 1 < p < crit:
            return ProblemExponents(N, m, p)


def test_chain_properties_random_sample():
    rng = random.Random(20240817)
    for _ in range(200):
        pe = _random_strict_subcritical(rng)
        ledger = bootstrap_chain(pe)
        chain = ledger.chain
        qs = [e.q for e in chain]
        assert all(a < b for a, b in zip(qs, qs[1:])), (pe, qs)
        assert chain[-1].branch == TERMINAL
        assert all(2 * pe.m * e.q <= pe.N for e in chain[:-1])
        assert ledger.k0 == sum(1 for e in chain if e.branch == SUBCONFORMAL)

        # sign claim behind the closed form: 1/q1 < B
        B = F(2 * pe.m) * pe.p / (pe.N * (pe.p - 1))
        assert 1 / qs[0] - B < 0

        # first upgraded exponent dominates p whenever the step is subconformal
        if chain[0].branch == SUBCONFORMAL:
            q1_star = sobolev_step(qs[0], pe).next_q
            assert q1_star > F(2 * pe.N, pe.N - 2 * pe.m) > pe.p

        expected_nu = (
            1 / ledger.gamma_iterated
            if ledger.gamma_paper is None
            else 1 / max(ledger.gamma_paper, ledger.gamma_iterated)
        )
        assert ledger.nu_lower == expected_nu


def test_delta_values():
    assert nonexistence_delta(3, 7) == F(1, 3)
    with pytest.raises(ValidationError):
        nonexistence_delta(1, 7)
    with pytest.raises(ValidationError):
        nonexistence_delta(3, 3)


def test_delta_increasing_in_q():
    prev = None
    for q in [4, 5, 6, 7, 8, 9, 10]:
        d = nonexistence_delta(3, q)
        if prev is not None:
            assert d > prev
        prev = d


def test_lambda_lower():
    res = lambda_lower(2.0, 2.0, 3, 7)
    assert res.branch == "delta-power" and res.value == 1.0
    res = lambda_lower(None, 4.0, 1, 7)
    assert res.branch == "p=1" and res.value == 0.25
    with pytest.raises(ValidationError):
        lambda_lower(0.0, 1.0, 3, 7)


def test_scaling_maps():
    assert scaling_alpha(16.0, 3) == 0.25
    assert scaling_alpha(1.0, 3) == 1.0
    assert scaling_lambda(0.25, 3) == 16.0
    with pytest.raises(ValidationError):
        scaling_alpha(16.0, 1)
    with pytest.raises(ValidationError):
        scaling_lambda(1.5, 3)


def test_scaling_round_trip():
    rng = random.Random(7)
    for _ in range(100):
        lam = 10 ** rng.uniform(0, 6)
        p = F(rng.randint(2, 9), rng.randint(1, 3))
        if p <= 1:
            continue
        back = scaling_lambda(scaling_alpha(lam, p), p)
        assert abs(back - lam) <= 1e-14 * lam


def test_serialization():
    ledger = bootstrap_chain(ProblemExponents(7, 1, "3/2", q=7))
    doc = ledger_json(ledger)
    assert doc["chain"][0]["q"]["fraction"] == "28/15"
    assert doc["gamma_paper"]["decimal"] == 9.0
    # delta at the ledger's own exponents: ((5/2)/(11/2) + (5/2)/(1/2))^-1
    assert doc["delta"]["fraction"] == "11/60"
    assert fraction_json(None) is None
    text = ledger_table(ledger)
    assert "28/15" in text and "k0" in text
