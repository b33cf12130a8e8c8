"""Exact rational exponent calculus for (-Delta)^m u = f(u) + lam |u|^(p-1) u.

Every threshold handled here is a ratio of integers in disguise: the
critical Sobolev exponent (N+2m)/(N-2m), the integrability bootstrap
chain q_1, q_2, ..., the decay exponents gamma and nu that control how
hard the truncated problems may be pushed, and the scaling map between
the perturbation weight lam and the truncation scale alpha.

Comparisons of the form 2mq vs N are equality-sensitive (the conformal
case is a single rational point), so this module runs on
fractions.Fraction end to end.  Floating point appears only at the
serialization boundary (fraction_json) and in the lam <-> alpha scaling
maps, which are float-valued by nature.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

from .errors import ValidationError

SUBCONFORMAL = "subconformal"   # 2mq < N: one more integrability upgrade
CONFORMAL = "conformal"         # 2mq = N: borderline embedding
TERMINAL = "terminal"           # 2mq > N: sup bounds reached, chain stops

STRICT_SUBCRITICAL = "strict-subcritical"
WIDE_SUBCRITICAL = "wide-subcritical"
CRITICAL = "critical"
SUPERCRITICAL = "supercritical"
SUBLINEAR = "sublinear"

_CHAIN_CAP = 1000


def as_fraction(x: int | str | Fraction) -> Fraction:
    """Exact conversion.  Floats are rejected on purpose: a float p would
    poison every 2mq-vs-N comparison downstream."""
    if isinstance(x, Fraction):
        return x
    if isinstance(x, bool) or not isinstance(x, (int, str)):
        raise ValidationError(
            "exact rational required (int, 'a/b' string, or Fraction), "
            f"got {type(x).__name__}"
        )
    try:
        return Fraction(x)
    except (ValueError, ZeroDivisionError) as exc:
        raise ValidationError(f"not a rational literal: {x!r}") from exc


@dataclass(frozen=True)
class ProblemExponents:
    """Dimension N, operator order m, perturbation exponent p and, when the
    nonexistence machinery is in play, the growth exponent q of f."""

    N: int
    m: int
    p: Fraction
    q: Fraction | None = None

    def __post_init__(self) -> None:
        for name in ("N", "m"):
            v = getattr(self, name)
            if isinstance(v, bool) or not isinstance(v, int):
                raise ValidationError(f"{name} must be a plain integer")
        if self.m < 1:
            raise ValidationError("m must be >= 1")
        if self.N < 2 * self.m + 1:
            raise ValidationError("N >= 2m+1 violated")
        object.__setattr__(self, "p", as_fraction(self.p))
        if self.p <= 0:
            raise ValidationError("p must be positive")
        if self.q is not None:
            object.__setattr__(self, "q", as_fraction(self.q))
            if self.q <= 0:
                raise ValidationError("q must be positive when given")


def critical_exponent(pe: ProblemExponents) -> Fraction:
    """(N+2m)/(N-2m).  The ProblemExponents constructor already enforces
    N >= 2m+1, which keeps the denominator positive."""
    return Fraction(pe.N + 2 * pe.m, pe.N - 2 * pe.m)


def classify_p(pe: ProblemExponents) -> str:
    """Total classification of p against the critical exponent.

    The existence pipeline requires strict-subcritical (1 < p < critical);
    the nonexistence machinery also accepts the boundary case p = 1, which
    is reported as wide-subcritical.  Values in (0,1) are labelled
    sublinear so the function stays total.
    """
    crit = critical_exponent(pe)
    if pe.p < 1:
        return SUBLINEAR
    if pe.p == 1:
        return WIDE_SUBCRITICAL
    if pe.p < crit:
        return STRICT_SUBCRITICAL
    if pe.p == crit:
        return CRITICAL
    return SUPERCRITICAL


@dataclass(frozen=True)
class SobolevStep:
    """Outcome of one embedding step at integrability level q."""

    branch: str                  # SUBCONFORMAL, CONFORMAL or TERMINAL
    next_q: Fraction | None      # upgraded exponent q*, None when terminal


def sobolev_step(q: int | str | Fraction, pe: ProblemExponents) -> SobolevStep:
    """One step of the regularity bootstrap at level q.

    2mq < N upgrades to q* = qN/(N-2mq); the borderline 2mq = N embeds
    into every finite power, and the chain continues at the specific
    choice q* = p(N+1)/(2m), engineered so the following entry lands
    strictly above N/(2m); 2mq > N means sup bounds are available and the
    chain stops.
    """
    q = as_fraction(q)
    if q <= 1:
        raise ValidationError("sobolev step requires q > 1")
    two_mq = 2 * pe.m * q
    if two_mq < pe.N:
        return SobolevStep(SUBCONFORMAL, q * pe.N / (pe.N - two_mq))
    if two_mq == pe.N:
        return SobolevStep(CONFORMAL, pe.p * (pe.N + 1) / (2 * pe.m))
    return SobolevStep(TERMINAL, None)


@dataclass(frozen=True)
class ChainEntry:
    q: Fraction
    branch: str


@dataclass(frozen=True)
class ExponentLedger:
    """Exact record of the bootstrap chain and every derived threshold."""

    problem: ProblemExponents
    critical: Fraction
    chain: tuple[ChainEntry, ...]
    k0: int
    gamma_paper: Fraction | None
    gamma_iterated: Fraction
    nu_lower: Fraction
    beta_paper: Fraction | None
    delta: Fraction | None


def _closed_form_check(pe: ProblemExponents, chain: tuple[ChainEntry, ...]) -> None:
    # 1/q_{k+1} = p^k (1/q_1 - B) + B with B = 2mp/(N(p-1)), valid while
    # every step taken so far was subconformal.  Exact equality or bust.
    p = pe.p
    B = Fraction(2 * pe.m) * p / (pe.N * (p - 1))
    inv_q1 = 1 / chain[0].q
    for k, entry in enumerate(chain):
        if any(chain[j].branch != SUBCONFORMAL for j in range(k)):
            break
        expected = p**k * (inv_q1 - B) + B
        if 1 / entry.q != expected:
            raise RuntimeError(
                f"bootstrap chain disagrees with its closed form at step {k}: "
                f"1/q = {1 / entry.q}, closed form {expected}"
            )


def _gamma_values(
    pe: ProblemExponents, k0: int, first_subconformal: bool
) -> tuple[Fraction | None, Fraction, Fraction]:
    p, N, m = pe.p, pe.N, pe.m
    if p == 1:
        raise ValidationError("gamma is undefined at p = 1 (division by p-1)")
    gamma_paper: Fraction | None = None
    if first_subconformal:
        # only stated under 2N/(p(N-2m)) < N/(2m), i.e. q_1 subconformal
        lead = Fraction(2 * m) * p**3 / (N * (p - 1))
        second = Fraction(2 * m, 1) / (N * (p - 1)) - Fraction(N - 2 * m, 2 * N)
        if second <= 0:
            raise RuntimeError("gamma denominator not positive; broken precondition")
        gamma_paper = lead / second
    e = 1 + p / 2
    for _ in range(k0):
        e = 1 + p * e
    gamma_iterated = e
    worst = gamma_iterated if gamma_paper is None else max(gamma_paper, gamma_iterated)
    return gamma_paper, gamma_iterated, 1 / worst


def bootstrap_chain(pe: ProblemExponents) -> ExponentLedger:
    """Iterate the integrability upgrade from q_1 = 2N/(p(N-2m)) until sup
    bounds are reached, recording the branch taken at every level.

    The iteration is the authoritative definition of k0 (the number of
    subconformal entries); the closed form for 1/q_k is recomputed and
    must agree exactly on the subconformal prefix.
    """
    if classify_p(pe) != STRICT_SUBCRITICAL:
        raise ValidationError(
            "bootstrap chain requires strict-subcritical p "
            f"(1 < p < {critical_exponent(pe)}), got p = {pe.p}"
        )
    p = pe.p
    q = Fraction(2 * pe.N) / (p * (pe.N - 2 * pe.m))
    entries: list[ChainEntry] = []
    for _ in range(_CHAIN_CAP):
        step = sobolev_step(q, pe)
        entries.append(ChainEntry(q, step.branch))
        if step.branch == TERMINAL:
            break
        q = step.next_q / p
    else:
        raise RuntimeError(
            f"bootstrap chain exceeded {_CHAIN_CAP} steps; "
            "this contradicts strict subcriticality"
        )
    chain = tuple(entries)
    _closed_form_check(pe, chain)
    k0 = sum(1 for e in chain if e.branch == SUBCONFORMAL)
    gamma_paper, gamma_iterated, nu_lower = _gamma_values(
        pe, k0, chain[0].branch == SUBCONFORMAL
    )
    beta = Fraction(2 * pe.m) * p / (pe.N * (p - 1))
    beta_paper = beta * 1 / (Fraction(2 * pe.m) * p / (p - 1) - 1 / chain[0].q)
    delta = None
    if pe.q is not None and pe.q > p:
        delta = nonexistence_delta(p, pe.q)
    return ExponentLedger(
        problem=pe,
        critical=critical_exponent(pe),
        chain=chain,
        k0=k0,
        gamma_paper=gamma_paper,
        gamma_iterated=gamma_iterated,
        nu_lower=nu_lower,
        beta_paper=beta_paper,
        delta=delta,
    )


def gamma_and_nu(
    pe: ProblemExponents, ledger: ExponentLedger
) -> tuple[Fraction | None, Fraction, Fraction]:
    """Decay exponents governing the truncated solutions.

    gamma_paper is the closed-form value, defined only when the chain
    starts subconformally.  gamma_iterated accumulates the affine update
    e <- 1 + p e (one application per subconformal entry) on top of
    e_0 = 1 + p/2 from the energy bound.  nu_lower is the reciprocal of
    the conservative max of the two: a smaller nu_lower only strengthens
    the hypothesis it feeds.
    """
    return _gamma_values(pe, ledger.k0, ledger.chain[0].branch == SUBCONFORMAL)


def nonexistence_delta(
    p: int | str | Fraction, q: int | str | Fraction
) -> Fraction:
    """delta = ((p+1)/(q-p) + (p+1)/(p-1))^(-1), the exponent tying the
    fitted constants of the threshold inequalities to the lower bound on
    lam.  p = 1 is served by the reciprocal branch of lambda_lower, not
    by this formula."""
    p, q = as_fraction(p), as_fraction(q)
    if p < 1:
        raise ValidationError("delta requires p >= 1")
    if p == 1:
        raise ValidationError(
            "p = 1 takes the reciprocal lower-bound branch, not the delta formula"
        )
    if q <= p:
        raise ValidationError("delta requires q > p")
    return 1 / ((p + 1) / (q - p) + (p + 1) / (p - 1))


@dataclass(frozen=True)
class LambdaLowerBound:
    value: float
    branch: str     # "delta-power" or "p=1"


def lambda_lower(
    C1: float | None,
    C2: float,
    p: int | str | Fraction,
    q: int | str | Fraction,
) -> LambdaLowerBound:
    """Lower threshold for lam below which no nontrivial solution exists,
    computed from fitted constants.

    For p > 1 the bound is (C2/C1)^delta.  For p = 1 the bound collapses
    to the reciprocal of a single constant, passed in the C2 slot (C1 is
    ignored on that branch).
    """
    p = as_fraction(p)
    if not (isinstance(C2, (int, float)) and C2 > 0):
        raise ValidationError("C2 must be a positive number")
    if p == 1:
        return LambdaLowerBound(1.0 / float(C2), "p=1")
    if not (isinstance(C1, (int, float)) and C1 > 0):
        raise ValidationError("C1 must be a positive number")
    delta = nonexistence_delta(p, q)
    return LambdaLowerBound((float(C2) / float(C1)) ** float(delta), "delta-power")


def scaling_alpha(lam: float, p: int | str | Fraction) -> float:
    """alpha = lam^(-1/(p-1)): the truncation scale realizing weight lam."""
    p = as_fraction(p)
    if p == 1:
        raise ValidationError("scaling degenerate at p = 1")
    if p < 1:
        raise ValidationError("scaling requires p > 1")
    if not lam > 0:
        raise ValidationError("lam must be positive")
    return float(lam) ** float(-1 / (p - 1))


def scaling_lambda(alpha: float, p: int | str | Fraction) -> float:
    """Inverse map lam = alpha^(1-p) for alpha in (0, 1]."""
    p = as_fraction(p)
    if p == 1:
        raise ValidationError("scaling degenerate at p = 1")
    if p < 1:
        raise ValidationError("scaling requires p > 1")
    if not 0 < alpha <= 1:
        raise ValidationError("alpha must lie in (0, 1]")
    return float(alpha) ** float(1 - p)


# -- serialization ----------------------------------------------------------

def fraction_json(x: Fraction | None) -> dict | None:
    if x is None:
        return None
    return {"fraction": f"{x.numerator}/{x.denominator}", "decimal": float(x)}


def ledger_json(ledger: ExponentLedger) -> dict:
    pe = ledger.problem
    return {
        "problem": {
            "N": pe.N,
            "m": pe.m,
            "p": fraction_json(pe.p),
            "q": fraction_json(pe.q),
        },
        "classification": classify_p(pe),
        "critical": fraction_json(ledger.critical),
        "chain": [
            {"q": fraction_json(e.q), "branch": e.branch} for e in ledger.chain
        ],
        "k0": ledger.k0,
        "gamma_paper": fraction_json(ledger.gamma_paper),
        "gamma_iterated": fraction_json(ledger.gamma_iterated),
        "nu_lower": fraction_json(ledger.nu_lower),
        "beta_paper": fraction_json(ledger.beta_paper),
        "delta": fraction_json(ledger.delta),
    }


def ledger_table(ledger: ExponentLedger) -> str:
    """Aligned text rendering of the ledger, one row per chain entry."""
    pe = ledger.problem
    head = [
        f"N = {pe.N}   m = {pe.m}   p = {pe.p}   critical = {ledger.critical}",
        f"classification: {classify_p(pe)}",
        "",
        f"{'k':>3}  {'q_k':>16}  {'2m q_k vs N':>12}  branch",
    ]
    rows = []
    for k, e in enumerate(ledger.chain, start=1):
        two_mq = 2 * pe.m * e.q
        rel = "<" if two_mq < pe.N else ("=" if two_mq == pe.N else ">")
        rows.append(f"{k:>3}  {str(e.q):>16}  {f'{two_mq} {rel} {pe.N}':>12}  {e.branch}")
    tail = [
        "",
        f"k0             = {ledger.k0}",
        f"gamma (closed) = {ledger.gamma_paper if ledger.gamma_paper is not None else 'absent'}",
        f"gamma (iter.)  = {ledger.gamma_iterated}",
        f"nu_lower       = {ledger.nu_lower}",
        f"beta (info)    = {ledger.beta_paper if ledger.beta_paper is not None else 'absent'}",
    ]
    if ledger.delta is not None:
        tail.append(f"delta          = {ledger.delta}")
    return "\n".join(head + rows + tail)
