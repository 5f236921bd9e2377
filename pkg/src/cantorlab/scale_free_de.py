"""Two-scale products, the hopping identity, and locally constant solutions.

The scale change eta -> eta**2 turns the geometric ladder of scales into a
single hop, and the partial products over hopped scales solve the associated
difference equation exactly: product_minus converges to 1 - eta, product_plus
to 1 + eta, and the defect of the truncated hopping identity collapses
double-exponentially.  The last section checks that powers x**(1 + tau) with
tau a staircase plateau value are locally exact solutions: the exponent is
locally constant, so log-log increments reproduce 1 + tau except across a
plateau boundary.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, List, Sequence, Tuple, Union

from .cantor_function import phi
from .construction import CantorSystem
from .errors import DomainError, NonConvergent
from .numerics import BigScalar, as_big

__all__ = [
    "product_minus",
    "product_plus",
    "hopping_identity",
    "hopping_coverage",
    "coverage_steps_to",
    "PlateauSegment",
    "FlatnessRow",
    "LcfReport",
    "lcf_solution_check",
]

Number = Union[Fraction, BigScalar]

# eta**(2**(N+1)) as a Fraction needs ~2**(N+1) digits; beyond this depth the
# exact path would allocate gigabytes, so it is refused in favour of BigScalar.
_EXACT_DEPTH_CAP = 24


def _check_eta(eta) -> Number:
    val = eta if isinstance(eta, (Fraction, BigScalar)) else Fraction(eta)
    if not 0 < val < 1:
        raise DomainError(f"eta must lie in (0,1), got {val}")
    return val


def _check_depth(eta, n: int) -> None:
    if n < 0:
        raise DomainError(f"the product depth must be >= 0, got {n}")
    if isinstance(eta, Fraction) and n > _EXACT_DEPTH_CAP:
        raise DomainError(
            f"exact products beyond N={_EXACT_DEPTH_CAP} are astronomically "
            "large; pass eta as a BigScalar for large depths"
        )


def product_minus(eta, n: int) -> Number:
    """Partial product of 1/(1 + eta**(2**i)) for i = 0..n.

    Telescopes to (1 - eta)/(1 - eta**(2**(n+1))) and decreases to 1 - eta.
    Exact on Fraction input (small n); BigScalar input evaluates at its own
    precision, where deep factors round harmlessly to 1.
    """
    val = _check_eta(eta)
    _check_depth(val, n)
    out = val**0  # 1 in the input's arithmetic
    power = val
    for _ in range(n + 1):
        out = out / (1 + power)
        power = power * power
    return out


def product_plus(eta, n: int) -> Number:
    """1/(1 - eta) times the partial product of 1/(1 + eta**(2**i)), i = 1..n.

    Telescopes to (1 + eta)/(1 - eta**(2**(n+1))) and decreases to 1 + eta:
    the second exact solution of the hopping recursion, reached from the
    same factors with the i = 0 term replaced by the 1/(1 - eta) prefactor.
    """
    val = _check_eta(eta)
    _check_depth(val, n)
    out = 1 / (1 - val)
    power = val * val
    for _ in range(n):
        out = out / (1 + power)
        power = power * power
    return out


def hopping_identity(eta, n: int) -> Tuple[Number, Number, Number]:
    """(lhs, rhs, gap) for the truncated factorisation of 1/(1 - eta).

    lhs = 1/(1 - eta); rhs is the product of (1 + eta**(2**i)) for i = 0..n.
    The gap lhs - rhs equals eta**(2**(n+1))/(1 - eta) identically, so it
    squares (up to the constant 1 - eta) with each extra factor.
    """
    val = _check_eta(eta)
    _check_depth(val, n)
    lhs = 1 / (1 - val)
    rhs = val**0
    power = val
    for _ in range(n + 1):
        rhs = rhs * (1 + power)
        power = power * power
    return lhs, rhs, lhs - rhs


def hopping_coverage(eta, n: int) -> Tuple[Number, Number]:
    """Covered mass after n steps of the additive and hopped gap schedules.

    Additive steps remove eta of what remains (eta*(1-eta)**(i-1) each),
    covering 1 - (1 - eta)**n; hopping squares the remaining scale each
    step and covers 1 - eta**(2**n).  n = 0 is the starting state.
    """
    val = _check_eta(eta)
    if n < 0:
        raise DomainError(f"the step count must be >= 0, got {n}")
    _check_depth(val, max(n - 1, 0))
    remaining_add = (1 - val) ** n
    remaining_hop = val
    for _ in range(n):
        remaining_hop = remaining_hop * remaining_hop
    return 1 - remaining_add, 1 - remaining_hop


def coverage_steps_to(eta, delta, max_steps: int = 100000) -> Tuple[int, int]:
    """Smallest step counts leaving less than delta uncovered, per schedule."""
    val = _check_eta(eta)
    if not 0 < delta < 1:
        raise DomainError(f"delta must lie in (0,1), got {delta}")
    remaining = Fraction(1) if isinstance(val, Fraction) else val**0
    additive = 0
    while remaining >= delta:
        remaining = remaining * (1 - val)
        additive += 1
        if additive > max_steps:
            raise NonConvergent(
                f"additive coverage did not reach {delta} within {max_steps} steps"
            )
    remaining = val
    hopped = 0
    while remaining >= delta:
        remaining = remaining * remaining
        hopped += 1
        if hopped > max_steps:
            raise NonConvergent(
                f"hopped coverage did not reach {delta} within {max_steps} steps"
            )
    return additive, hopped


# ---------------------------------------------------------------------------
# locally constant exponents as solutions
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class PlateauSegment:
    """One consecutive sample pair with its staircase exponents."""

    x_lo: Fraction
    x_hi: Fraction
    tau_lo: Fraction
    tau_hi: Fraction
    plateau: bool
    exponent_residual: BigScalar

    @property
    def delta_tau(self) -> Fraction:
        return self.tau_hi - self.tau_lo

    @property
    def crossing(self) -> bool:
        return not self.plateau


@dataclass(frozen=True)
class FlatnessRow:
    """Worst finite-difference slope of the valuation at one primary scale."""

    epsilon: Fraction
    max_abs_slope: BigScalar
    oracle_slope: BigScalar


@dataclass(frozen=True)
class LcfReport:
    segments: Tuple[PlateauSegment, ...]
    flatness: Tuple[FlatnessRow, ...]

    @property
    def plateau_count(self) -> int:
        return sum(1 for s in self.segments if s.plateau)

    @property
    def crossing_count(self) -> int:
        return sum(1 for s in self.segments if s.crossing)


def lcf_solution_check(
    system: CantorSystem,
    x_samples: Iterable,
    eps_schedule: Sequence = (),
    max_depth: int = 64,
) -> LcfReport:
    """Check that x**(1 + tau(x)) behaves as a locally constant-exponent solution.

    tau is the staircase value of each sample.  Within a plateau the log-log
    increment of x**(1 + tau(x)) is exactly 1 + tau, so the residual
    |d log X / d log x - (1 + tau)| vanishes; across a plateau boundary the
    segment is flagged as a crossing and the residual measures the jump.
    The flatness rows track the valuation v = log x/log eps - 1 between
    neighbouring samples: its slope in x is 1/(x |log eps|), which dies as
    the primary scale shrinks - the sense in which valuations become
    locally constant.
    """
    pts = sorted({Fraction(x) for x in x_samples})
    if len(pts) < 2:
        raise DomainError("need at least two distinct sample points")
    if pts[0] <= 0 or pts[-1] >= 1:
        raise DomainError("samples must lie strictly inside (0,1)")
    taus = {x: phi(system, x, max_depth=max_depth) for x in pts}
    logs = {x: as_big(x).ln() for x in pts}
    segments: List[PlateauSegment] = []
    for lo, hi in zip(pts, pts[1:]):
        t_lo, t_hi = taus[lo], taus[hi]
        plateau = t_lo.exact and t_hi.exact and t_lo.value == t_hi.value
        d_log_x = logs[hi] - logs[lo]
        d_log_big = (1 + as_big(t_hi.value)) * logs[hi] - (
            1 + as_big(t_lo.value)
        ) * logs[lo]
        residual = abs(d_log_big / d_log_x - (1 + as_big(t_lo.value)))
        segments.append(
            PlateauSegment(lo, hi, t_lo.value, t_hi.value, plateau, residual)
        )
    flatness: List[FlatnessRow] = []
    for eps in eps_schedule:
        eps_f = Fraction(eps)
        if not 0 < eps_f < 1:
            raise DomainError(f"scales must lie in (0,1), got {eps_f}")
        abs_ln_eps = abs(as_big(eps_f).ln())
        worst = None
        worst_mid = None
        for lo, hi in zip(pts, pts[1:]):
            slope = abs((logs[hi] - logs[lo]) / (as_big(hi - lo) * abs_ln_eps))
            if worst is None or slope > worst:
                worst = slope
                worst_mid = (lo + hi) / 2
        oracle = 1 / (as_big(worst_mid) * abs_ln_eps)
        flatness.append(FlatnessRow(eps_f, worst, oracle))
    return LcfReport(tuple(segments), tuple(flatness))
