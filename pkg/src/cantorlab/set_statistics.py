"""Measure, dimension, thickness, and fatness diagnostics over refinement levels.

All statistics run off the streaming per-depth summaries of
``construction.level_profile``; nothing here materialises interval lists, so
depths in the hundreds are routine.  Rational systems keep exact arithmetic up
to the point where a logarithm is unavoidable.
"""

from __future__ import annotations

from fractions import Fraction
from typing import List, Optional, Sequence, Tuple, Union

from .construction import (
    CantorSystem,
    MiddleAlpha,
    MultiBranch,
    RefinementLevel,
    level_profile,
    refine_to,
)
from .errors import (
    DegenerateInput,
    DomainError,
    InhomogeneousSystem,
    NonConvergent,
    UnsupportedSystem,
)
from .numerics import (
    BigScalar,
    FitResult,
    LimitEstimate,
    as_big,
    eval_limit,
    get_default_precision,
    linear_fit,
    log_base,
)

__all__ = [
    "lebesgue_measure_limit",
    "box_dimension_estimate",
    "hausdorff_dimension_closed_form",
    "thickness",
    "thickness_is_infinite",
    "fattened_measure_excess",
    "fatness_exponent",
    "assert_homogeneous",
    "level_table",
    "fatness_table",
]

Number = Union[Fraction, BigScalar]

# Spread ratio above which a level no longer supports single-scale box counts.
HOMOGENEITY_SPREAD = Fraction(11, 10)


# ---------------------------------------------------------------------------
# measure
# ---------------------------------------------------------------------------


def lebesgue_measure_limit(
    system: CantorSystem,
    tol=None,
    *,
    max_depth: int = 64,
    method: str = "aitken",
    numeric: str = "auto",
    precision_bits: Optional[int] = None,
) -> LimitEstimate:
    """Limit of the total bridge length per depth.

    ``method`` is passed to ``eval_limit`` ("aitken" or "plain-tail"), or
    "fixed-depth" to evaluate the exact total at ``max_depth`` with no
    extrapolation (error_bound then reports the last per-depth decrement).
    Measure-zero systems converge to 0; fat systems to their limit measure.
    """
    rows = level_profile(system, max_depth, numeric=numeric, precision_bits=precision_bits)
    totals = [row.total_bridge_length for row in rows[1:]]
    if method == "fixed-depth":
        if max_depth < 2:
            raise DomainError("fixed-depth evaluation needs max_depth >= 2")
        value = as_big(totals[-1], precision_bits)
        step = abs(as_big(totals[-1] - totals[-2], precision_bits))
        return LimitEstimate(value, step, len(totals), True)
    return eval_limit(totals, method=method, tol=tol, max_terms=max_depth)


# ---------------------------------------------------------------------------
# dimension
# ---------------------------------------------------------------------------


def assert_homogeneous(level: RefinementLevel, max_spread: Fraction = HOMOGENEITY_SPREAD) -> None:
    """Require every bridge of a level to have (nearly) the same length."""
    lengths = [b.length for b in level.bridges]
    longest = max(lengths)
    shortest = min(lengths)
    if shortest <= 0 or longest > shortest * max_spread:
        raise InhomogeneousSystem(
            f"bridge lengths at depth {level.depth} spread beyond {max_spread}: "
            f"min {shortest}, max {longest}"
        )


def box_dimension_estimate(
    system: CantorSystem,
    min_depth: int,
    max_depth: int,
    *,
    numeric: str = "auto",
    precision_bits: Optional[int] = None,
) -> FitResult:
    """Box-counting dimension: slope of log N(depth) against log 1/length(depth).

    Covers the set by its own level bridges, so N is the bridge count and the
    box size is the (common) bridge length.  The returned ``slope`` is the
    estimate; ``residual`` measures deviation from pure power-law scaling.
    """
    if not 1 <= min_depth < max_depth:
        raise DomainError(f"need 1 <= min_depth < max_depth, got {min_depth}, {max_depth}")
    probe = refine_to(system, min(min_depth, 6), precision_bits=precision_bits)
    assert_homogeneous(probe)
    bits = precision_bits or get_default_precision()
    rows = level_profile(system, max_depth, numeric=numeric, precision_bits=precision_bits)
    points = []
    for row in rows[min_depth : max_depth + 1]:
        x = -as_big(row.bridge_length, bits).ln()
        y = as_big(row.bridge_count, bits).ln()
        points.append((x, y))
    return linear_fit(points)


def hausdorff_dimension_closed_form(
    system: CantorSystem, precision_bits: Optional[int] = None
) -> BigScalar:
    """log(branches) / log(1/scale) for uniformly self-similar systems."""
    if isinstance(system, MiddleAlpha):
        p, beta = 2, system.beta
    elif isinstance(system, MultiBranch):
        p, beta = system.p, system.beta
    else:
        raise UnsupportedSystem(
            f"{system.describe()} has no uniform contraction ratio; "
            "use box_dimension_estimate"
        )
    bits = precision_bits or get_default_precision()
    return log_base(as_big(1 / beta, bits), as_big(p, bits))


# ---------------------------------------------------------------------------
# thickness
# ---------------------------------------------------------------------------


def _bridge_gap_ratios(
    system: CantorSystem, max_depth: int, precision_bits: Optional[int]
) -> List[Number]:
    rows = level_profile(system, max_depth, precision_bits=precision_bits)
    return [row.bridge_length / row.gap_length for row in rows[1:]]


def thickness(
    system: CantorSystem, max_depth: int, precision_bits: Optional[int] = None
) -> Number:
    """Largest bridge-to-flanking-gap length ratio along the defining sequence.

    Each depth-d deletion leaves two bridges of the common length flanking a
    gap; the level's ratio is bridge/gap and the result is the sup over depths
    1..max_depth.  Exact systems return an exact Rational (MiddleAlpha gives
    beta/alpha with no tolerance).  The sup is taken over the system's own
    defining sequence only; optimising over all defining sequences is not
    attempted.
    """
    if max_depth < 1:
        raise DomainError(f"max_depth must be >= 1, got {max_depth}")
    return max(_bridge_gap_ratios(system, max_depth, precision_bits))


def thickness_is_infinite(
    system: CantorSystem,
    max_depth: int = 24,
    precision_bits: Optional[int] = None,
) -> bool:
    """Whether the per-depth bridge/gap ratios grow without apparent bound.

    Diagnostic, not a proof: reports True when the ratio sequence is strictly
    increasing over the deeper half of the observed depths and at least
    doubles across it.  Constant-ratio and oscillating systems report False.
    """
    if max_depth < 2:
        raise DomainError(f"max_depth must be >= 2, got {max_depth}")
    ratios = _bridge_gap_ratios(system, max_depth, precision_bits)
    tail = ratios[len(ratios) // 2 :]
    increasing = all(a < b for a, b in zip(tail, tail[1:]))
    return increasing and tail[-1] > tail[0] * 2


# ---------------------------------------------------------------------------
# fatness
# ---------------------------------------------------------------------------


def fattened_measure_excess(
    system: CantorSystem,
    epsilon,
    inventory_depth: int,
    precision_bits: Optional[int] = None,
) -> Number:
    """Extra length covered when every point moves by up to ``epsilon``.

    Fattening covers each gap from both flanking bridges, so a gap of length g
    contributes min(g, 2*epsilon).  The gap inventory is truncated at
    ``inventory_depth``; deeper gaps are narrower than the bridges there, whose
    total length bounds the truncation error.
    """
    if not epsilon > 0:
        raise DomainError(f"epsilon must be positive, got {epsilon}")
    rows = level_profile(system, inventory_depth, precision_bits=precision_bits)
    excess: Number = Fraction(0)
    two_eps = 2 * epsilon
    for row in rows[1:]:
        covered = row.gap_length if row.gap_length < two_eps else two_eps
        excess = covered * row.gaps_created + excess
    return excess


def fatness_exponent(
    system: CantorSystem,
    depths: Sequence[int],
    *,
    override_positive_measure: bool = False,
    inventory_margin: int = 40,
    precision_bits: Optional[int] = None,
) -> FitResult:
    """Scaling exponent of the fattened-measure excess.

    The fattening scales are scale**n for n in ``depths``, with scale the
    system's dominant gap decay ratio.  Returns the least-squares fit of
    log(excess) against log(epsilon); ``slope`` is the exponent.  Requires a
    positive-measure system unless ``override_positive_measure`` is set, in
    which case the same excess scaling of a measure-zero set's complement is
    reported.
    """
    depths = sorted(set(int(d) for d in depths))
    if len(depths) < 3:
        raise DomainError("need at least 3 fattening depths")
    if depths[0] < 1:
        raise DomainError("fattening depths must be >= 1")
    if not override_positive_measure:
        try:
            est = lebesgue_measure_limit(
                system, Fraction(1, 10**9), max_depth=48, precision_bits=precision_bits
            )
            positive = est.value > Fraction(1, 1000)
        except NonConvergent as exc:
            positive = exc.estimate is not None and exc.estimate.value > Fraction(1, 1000)
        if not positive:
            raise DomainError(
                "system appears to have measure zero; pass "
                "override_positive_measure=True to analyse the excess anyway"
            )
    scale = system.gap_scale()
    if scale is None:
        raise DomainError(f"{system.describe()} has no dominant gap scale")
    limit = system.depth_limit()
    inventory_depth = depths[-1] + inventory_margin
    if limit is not None:
        inventory_depth = min(inventory_depth, limit)
    bits = precision_bits or get_default_precision()
    points = []
    for n in depths:
        eps = scale**n
        excess = fattened_measure_excess(system, eps, inventory_depth, precision_bits)
        if not excess > 0:
            raise DegenerateInput(
                f"fattening by {eps} adds no measure: the system deletes nothing"
            )
        points.append((as_big(eps, bits).ln(), as_big(excess, bits).ln()))
    return linear_fit(points)


# ---------------------------------------------------------------------------
# tables for offline plotting
# ---------------------------------------------------------------------------


def level_table(
    system: CantorSystem,
    min_depth: int,
    max_depth: int,
    precision_bits: Optional[int] = None,
) -> List[dict]:
    """Rows of (depth, N, length, log N, log 1/length) for plotting."""
    if not 0 <= min_depth <= max_depth:
        raise DomainError(f"bad depth range {min_depth}..{max_depth}")
    bits = precision_bits or get_default_precision()
    rows = level_profile(system, max_depth, precision_bits=precision_bits)
    out = []
    for row in rows[min_depth:]:
        length = as_big(row.bridge_length, bits)
        out.append(
            {
                "depth": row.depth,
                "bridge_count": row.bridge_count,
                "bridge_length": row.bridge_length,
                "log_count": as_big(row.bridge_count, bits).ln(),
                "log_inv_length": -length.ln(),
            }
        )
    return out


def fatness_table(
    system: CantorSystem,
    depths: Sequence[int],
    *,
    inventory_margin: int = 40,
    precision_bits: Optional[int] = None,
) -> List[dict]:
    """Rows of (epsilon, fattened measure, excess) at the scheduled scales."""
    scale = system.gap_scale()
    if scale is None:
        raise DomainError(f"{system.describe()} has no dominant gap scale")
    inventory_depth = max(depths) + inventory_margin
    limit = system.depth_limit()
    if limit is not None:
        inventory_depth = min(inventory_depth, limit)
    rows = level_profile(system, inventory_depth, precision_bits=precision_bits)
    base_measure = rows[-1].total_bridge_length
    out = []
    for n in sorted(set(int(d) for d in depths)):
        eps = scale**n
        excess = fattened_measure_excess(system, eps, inventory_depth, precision_bits)
        out.append(
            {
                "epsilon": eps,
                "fattened_measure": base_measure + excess,
                "excess": excess,
            }
        )
    return out
