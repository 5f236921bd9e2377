"""Word metrics, relative infinitesimals, and the scale-invariant valuation.

A point x in (0,1) inspected at a primary scale epsilon < x has relative
infinitesimals: points xt with 0 < xt < epsilon tied to x by the inversion
xt/epsilon = (epsilon/x)/lam.  The valuation |xt|_u = lim log_{1/eps}(eps/xt)
grades such points by their scaling exponent and induces a norm and a measure
that stay informative where Lebesgue measure and Hausdorff dimension degenerate.
Everything here evaluates those limits numerically along explicit scale
schedules; algebraically exact identities (the inversion involution, the
telescoping exponent relations) stay on ``Fraction`` arithmetic.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Iterable, List, Optional, Sequence, Tuple, Union

from .construction import CantorSystem, FluctuatingFamily, MiddleAlpha, level_profile
from .errors import (
    DomainError,
    IncompatibleWords,
    InversionOutOfRange,
    NonConvergent,
    NotInSet,
    UnsupportedSystem,
)
from .numerics import BigScalar, as_big, eval_limit, linear_fit, log_base
from .set_statistics import lebesgue_measure_limit

__all__ = [
    "WordRep",
    "InfinitesimalContext",
    "ValuationEstimate",
    "RhoEstimate",
    "word_encode",
    "natural_ultrametric",
    "relative_infinitesimal",
    "valuation",
    "valuation_trace",
    "valued_neighbours",
    "valued_norm_triadic",
    "sequence_norm_limit",
    "scale_norm_infimum",
    "endpoint_exponent",
    "valued_measure_estimate",
    "growth_of_measure_demo",
    "valuated_exponent_estimate",
    "renormalised_valuation",
]

Number = Union[Fraction, BigScalar]


# ---------------------------------------------------------------------------
# words and the natural ultrametric
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class WordRep:
    """Leading binary digits of a point's bridge address (left 0, right 1)."""

    digits: Tuple[int, ...]
    beta: Fraction

    @property
    def length(self) -> int:
        return len(self.digits)

    def __str__(self) -> str:
        return "".join(str(d) for d in self.digits)


def word_encode(system: MiddleAlpha, x, n: int) -> WordRep:
    """Resolve a set point to its depth-n bridge address.

    Gap endpoints belong to their flanking bridges (they are set points);
    interior gap points raise NotInSet at the depth where they fall out.
    """
    if not isinstance(system, MiddleAlpha):
        raise UnsupportedSystem("word encoding is defined for MiddleAlpha systems")
    if n < 0:
        raise DomainError(f"word length must be >= 0, got {n}")
    pt = x if isinstance(x, (Fraction, BigScalar)) else Fraction(x)
    if pt < 0 or pt > 1:
        raise NotInSet(f"{pt} lies outside [0,1]")
    lo, hi = Fraction(0), Fraction(1)
    beta = system.beta
    digits: List[int] = []
    for d in range(1, n + 1):
        width = (hi - lo) * beta
        if pt <= lo + width:
            digits.append(0)
            hi = lo + width
        elif pt >= hi - width:
            digits.append(1)
            lo = hi - width
        else:
            raise NotInSet(f"{pt} falls in a gap at depth {d}")
    return WordRep(tuple(digits), beta)


def natural_ultrametric(x: WordRep, y: WordRep, p) -> Number:
    """p**(-L) with L the index of the first differing digit; 0 for equal words."""
    if x.beta != y.beta:
        raise IncompatibleWords(
            f"words encode different systems (beta {x.beta} vs {y.beta})"
        )
    if not p > 1:
        raise DomainError(f"the metric base must exceed 1, got {p}")
    shared = min(x.length, y.length)
    first_diff = None
    for i in range(shared):
        if x.digits[i] != y.digits[i]:
            first_diff = i
            break
    if first_diff is None:
        if x.length == y.length:
            return Fraction(0)
        first_diff = shared  # one word refines the other; they differ there
    if isinstance(p, (int, Fraction)):
        return Fraction(p) ** -first_diff
    return as_big(p) ** -first_diff


# ---------------------------------------------------------------------------
# relative infinitesimals and the valuation
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class InfinitesimalContext:
    """A point x, a primary scale epsilon, and the inversion parameter lam.

    Only positivity and lam in (0,1] are checked here; the relation
    epsilon < lam*x that makes the inversion land inside (0, epsilon) is
    enforced where the inversion is evaluated.
    """

    x: Number
    epsilon: Number
    lam: Number = Fraction(1)

    def __post_init__(self):
        if not self.x > 0:
            raise DomainError(f"x must be positive, got {self.x}")
        if not self.epsilon > 0:
            raise DomainError(f"epsilon must be positive, got {self.epsilon}")
        if not (0 < self.lam <= 1):
            raise DomainError(f"lam must lie in (0,1], got {self.lam}")


def relative_infinitesimal(ctx: InfinitesimalContext) -> Number:
    """The inversion xt = epsilon**2/(lam*x); exact on Rational inputs.

    Applying it twice with the same epsilon and lam returns x identically.
    """
    xt = ctx.epsilon * ctx.epsilon / (ctx.lam * ctx.x)
    if not xt < ctx.epsilon:
        raise InversionOutOfRange(
            f"inversion of x={ctx.x} at epsilon={ctx.epsilon}, lam={ctx.lam} "
            f"gives {xt} >= epsilon; the scale is not below lam*x"
        )
    return xt


@dataclass(frozen=True)
class ValuationEstimate:
    """A valuation (or norm) limit with the scale schedule that produced it."""

    value: BigScalar
    error_bound: BigScalar
    scale_schedule: str


def valuation_trace(
    xtilde_of_eps: Callable[[Number], Number], scale_schedule: Iterable[Number]
) -> List[Tuple[Number, BigScalar]]:
    """(epsilon, log_{1/eps}(eps/xt)) along the schedule, for traces and CSV."""
    out = []
    for eps in scale_schedule:
        if not 0 < eps < 1:
            raise DomainError(f"scales must lie in (0,1), got {eps}")
        xt = xtilde_of_eps(eps)
        if not 0 < xt < eps:
            raise DomainError(
                f"xt(eps) must lie in (0, eps); got {xt} at eps={eps}"
            )
        term = as_big(xt).ln() / as_big(eps).ln() - 1
        out.append((eps, term))
    return out


def valuation(
    xtilde_of_eps: Callable[[Number], Number],
    scale_schedule: Iterable[Number],
    tol=None,
    method: str = "aitken",
) -> ValuationEstimate:
    """Limit of log_{1/eps}(eps/xt(eps)) along a shrinking scale schedule.

    Constant-multiple infinitesimals xt = mu*eps grade to 0; power laws
    xt = eps**(1+a) grade to a at every scale.  NonConvergent (carrying the
    partial estimate) propagates from the limit evaluator.
    """
    trace = valuation_trace(xtilde_of_eps, scale_schedule)
    if len(trace) < 3:
        raise DomainError("scale schedule must provide at least 3 scales")
    est = eval_limit([t for _, t in trace], method=method, tol=tol, max_terms=len(trace))
    schedule = f"{len(trace)} scales from {as_big(trace[0][0])} to {as_big(trace[-1][0])}"
    return ValuationEstimate(est.value, est.error_bound, schedule)


def valued_neighbours(
    x, valuation_values: Sequence
) -> List[Tuple[BigScalar, BigScalar]]:
    """Pairs (x**(1-v), x**(1+v)) bracketing x for each valuation value v."""
    pt = as_big(x)
    if not 0 < pt < 1:
        raise DomainError(f"x must lie in (0,1), got {pt}")
    out = []
    for v in valuation_values:
        val = as_big(v)
        if val < 0 or val > 1:
            raise DomainError(f"valuation values lie in [0,1], got {val}")
        out.append((pt ** (1 - val), pt ** (1 + val)))
    return out


def valued_norm_triadic(x, n: int, m: int = 8) -> ValuationEstimate:
    """Norm of a depth-n middle-third point: inf over its valued neighbours.

    The candidate valuations are the dyadic plateau increments i*2**-n for
    i = 1..m (capped at 1); each gives a neighbour x**(1-v) and a norm
    candidate log_{1/x}(neighbour/x) = v, and the infimum lands on 2**-n.
    ``error_bound`` reports the defect of the closed-form identity
    2**-n = 3**(-n*log_3(2)) at working precision.
    """
    if n < 0:
        raise DomainError(f"depth must be >= 0, got {n}")
    if m < 1:
        raise DomainError(f"need at least one secondary value, got {m}")
    try:
        word_encode(MiddleAlpha(Fraction(1, 3)), x, n)
    except NotInSet as exc:
        raise DomainError(f"x does not resolve to depth {n}: {exc}") from exc
    pt = as_big(x)
    if not 0 < pt < 1:
        raise DomainError("the norm needs x in (0,1)")
    step = Fraction(1, 2**n)
    values = [i * step for i in range(1, m + 1) if i * step <= 1]
    inv_x = 1 / pt
    candidates = [
        log_base(inv_x, plus / pt) for (plus, _minus) in valued_neighbours(pt, values)
    ]
    norm = min(candidates)
    s = log_base(3, 2)
    identity_gap = abs(norm - as_big(3) ** (-(n * s)))
    return ValuationEstimate(
        norm, identity_gap, f"dyadic valuations i/2^{n}, i = 1..{len(values)}"
    )


def sequence_norm_limit(
    epsilon, l, n_max: int = 1024, lam=Fraction(1), tol=None
) -> ValuationEstimate:
    """Norm limit of the deformed scale sequence eps_n = eps**(n - n*l).

    At primary scale eps**n the deformed term has relative infinitesimal
    eps**(n + n*l)/lam, whose valuation log_{eps^-n}(eps^n/xt) equals
    l + log(lam)/(n*log(eps)) and converges to l: the sequence converges in
    the valued norm although it diverges from 0 in |.|.  lam only shifts the
    transient (scale_norm_infimum gives the companion plain-norm limit 0).
    """
    eps = as_big(epsilon)
    if not 0 < eps < 1:
        raise DomainError(f"epsilon must lie in (0,1), got {eps}")
    target = as_big(l)
    if not 0 < target < 1:
        raise DomainError(f"l must lie in (0,1), got {target}")
    lam_b = as_big(lam)
    if not 0 < lam_b <= 1:
        raise DomainError(f"lam must lie in (0,1], got {lam_b}")
    if n_max < 4:
        raise DomainError("n_max must be >= 4 for three doubling steps")
    ln_eps = eps.ln()
    terms = []
    schedule = []
    n = 1
    while n <= n_max:
        xt = (eps ** (n * (1 + target))) / lam_b
        term = (n * ln_eps - xt.ln()) / (-(n * ln_eps))
        terms.append(term)
        schedule.append(n)
        n *= 2
    est = eval_limit(terms, method="aitken", tol=tol, max_terms=len(terms))
    return ValuationEstimate(
        est.value, est.error_bound, f"primary scales eps^n, n = {schedule}"
    )


def scale_norm_infimum(n: int, r_max: int = 64) -> Fraction:
    """Plain norm of the undeformed scale eps**n: inf over secondary depths r
    of r/(n+r), attained at r = 1 and vanishing as n grows."""
    if n < 1 or r_max < 1:
        raise DomainError("n and r_max must be >= 1")
    return min(Fraction(r, n + r) for r in range(1, r_max + 1))


# ---------------------------------------------------------------------------
# exponents and measures
# ---------------------------------------------------------------------------


def endpoint_exponent(c, b, n: int) -> BigScalar:
    """Solve c**(n-k) = b**n for k: the depth offset matching the two scales."""
    cb = as_big(c)
    bb = as_big(b)
    if not (0 < cb < 1 and 0 < bb < 1):
        raise DomainError(f"need 0 < c, b < 1, got c={cb}, b={bb}")
    if n < 1:
        raise DomainError(f"n must be >= 1, got {n}")
    return n * (1 - bb.ln() / cb.ln())


def valued_measure_estimate(system: MiddleAlpha, level: int) -> Fraction:
    """Covering sum of valued diameters over one refinement level.

    Each of the level's bridges is a clopen ball of valued diameter
    2**-level (the dyadic valuation depth), so the sum is exactly 1 at every
    level: the valued measure stays unit-normalised even where the Lebesgue
    measure of the set vanishes.
    """
    if not isinstance(system, MiddleAlpha):
        raise UnsupportedSystem(
            "the valued covering sum is defined here for MiddleAlpha systems"
        )
    if level < 1:
        raise DomainError(f"level must be >= 1, got {level}")
    count = level_profile(system, level)[level].bridge_count
    return Fraction(count, 2**level)


def growth_of_measure_demo(
    alpha, fat_target: CantorSystem, n_max: int = 256, tol=None, anchor=Fraction(2, 3)
) -> ValuationEstimate:
    """Deform a thin set's scales toward a fat target and recover its measure.

    With beta = alpha the thin reference scale and bt_n the fat target's
    depth-n bridge length, the deformed point
    x_n = beta**n * bt_n**(n*b_n) * anchor, with b_n = l*log(beta)/log(bt_n)
    and l the target's measure limit, has valuation l + O(1/n) at primary
    scale beta**n.  The limit therefore reports the fat set's measure through
    the valuation alone.  Doubling depths keep the 1/n transient geometric so
    the extrapolation is exact.
    """
    beta = as_big(alpha)
    if not 0 < beta < 1:
        raise DomainError(f"alpha must lie in (0,1), got {beta}")
    if not 0 < anchor < 1:
        raise DomainError(f"anchor must lie in (0,1), got {anchor}")
    measure = lebesgue_measure_limit(
        fat_target, Fraction(1, 10**12), max_depth=min(n_max, 64), numeric="big"
    )
    l_hat = measure.value
    if not l_hat > Fraction(1, 1000):
        raise DomainError(
            f"{fat_target.describe()} has vanishing measure ({l_hat}); "
            "the demo needs a fat target"
        )
    depths = []
    n = 4
    while n <= n_max:
        depths.append(n)
        n *= 2
    if len(depths) < 3:
        raise NonConvergent(f"n_max={n_max} leaves fewer than three doubling depths")
    profile = level_profile(fat_target, depths[-1], numeric="big")
    ln_beta = beta.ln()
    ln_anchor = as_big(anchor).ln()
    terms = []
    for n in depths:
        ln_bt = as_big(profile[n].bridge_length).ln()
        b_n = l_hat * ln_beta / ln_bt
        ln_xt = n * ln_beta + (n * b_n) * ln_bt + ln_anchor
        terms.append((n * ln_beta - ln_xt) / (-(n * ln_beta)))
    est = eval_limit(terms, method="aitken", tol=tol, max_terms=len(terms))
    return ValuationEstimate(
        est.value,
        est.error_bound,
        f"deformed scales beta^n at n = {depths}, beta = {beta}",
    )


@dataclass(frozen=True)
class RhoEstimate:
    """Decay exponent of the renormalised valuation sequence."""

    rho: BigScalar
    residual: BigScalar
    levels: Tuple[int, ...]


def valuated_exponent_estimate(
    system: FluctuatingFamily, depths: Sequence[int]
) -> RhoEstimate:
    """Regress the fluctuating family's shrink exponents to recover rho.

    The family's shrink levels m carry exact parameters q**-m, which are the
    renormalised valuations the double-logarithmic probe reads off.  The
    slope of log_3(q**-m) against m is -log_3(q), so rho = log_3(q):
    families with identical box dimension but different q separate here.
    """
    if not isinstance(system, FluctuatingFamily):
        raise UnsupportedSystem(
            "the valuated exponent is defined for the fluctuating family"
        )
    levels = sorted(
        {d - 1 for d in depths if d >= 1 and system.level_role(d) == "shrink"}
    )
    if len(levels) < 3:
        raise DomainError(
            f"depths {list(depths)} cover {len(levels)} shrink levels; need >= 3"
        )
    points = [(Fraction(m), log_base(3, system.alpha_at(m))) for m in levels]
    fit = linear_fit(points)
    return RhoEstimate(-fit.slope, fit.residual, tuple(levels))


def renormalised_valuation(xtilde, beta, n: int, v0) -> BigScalar:
    """Double-logarithmic residual exponent of xt against the scale beta**n.

    Strips the leading (beta**n)**(1+v0) factor and reads the remaining decay
    through log_{beta^n} twice; forward-constructed inputs
    xt = (beta**n)**(1+v0) * (beta**n)**((beta**n)**c) invert to c exactly.
    """
    bb = as_big(beta)
    if not 0 < bb < 1:
        raise DomainError(f"beta must lie in (0,1), got {bb}")
    if n < 1:
        raise DomainError(f"n must be >= 1, got {n}")
    base = bb**n
    inner = as_big(xtilde) / base ** (1 + as_big(v0))
    if not 0 < inner < 1:
        raise DomainError(
            f"stripped ratio {inner} is outside (0,1); v0 does not match the scale"
        )
    ln_base = base.ln()
    outer = inner.ln() / ln_base
    return outer.ln() / ln_base
