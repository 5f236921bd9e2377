"""Defining sequences for Cantor sets in the unit interval.

A system describes how each closed interval ("bridge") of a refinement level
splits into child bridges separated by deleted open intervals ("gaps").  All
built-in kinds delete centred gaps, so every bridge at a given depth has the
same length and deep levels can be summarised by scalar recurrences
(``level_profile``) instead of materialised interval lists (``refine_to``).

Endpoints stay exact ``Fraction`` values whenever the system's data is
rational; the fluctuating family, whose gap lengths involve irrational powers
of 3, uses ``BigScalar`` endpoints at the working precision.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, List, Optional, Tuple, Union

from .errors import DepthOverflow, DomainError, InvalidSystem
from .numerics import BigScalar, as_big, get_default_precision

__all__ = [
    "DEFAULT_MAX_BRIDGES",
    "SequenceSpec",
    "CantorSystem",
    "MiddleAlpha",
    "MultiBranch",
    "VariableFraction",
    "ExplicitGapSchedule",
    "FluctuatingFamily",
    "middle_third_system",
    "example2_system",
    "fluctuating_family",
    "Bridge",
    "Gap",
    "RefinementLevel",
    "LevelStats",
    "refine_to",
    "level_profile",
    "gap_lengths_at",
    "locate",
    "Location",
]

DEFAULT_MAX_BRIDGES = 1 << 24

Number = Union[Fraction, BigScalar]


# ---------------------------------------------------------------------------
# parameter sequences
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class SequenceSpec:
    """A rule-generated or explicit sequence of positive rationals.

    Rules, all indexed from n = 1:

    * ``geometric``: c * r**n
    * ``reciprocal-power``: c / (n + offset)**power
    * ``explicit``: a finite tuple of values
    """

    rule: str
    params: Tuple[Fraction, ...] = ()
    values: Optional[Tuple[Fraction, ...]] = None

    @classmethod
    def geometric(cls, c, r) -> "SequenceSpec":
        return cls("geometric", (Fraction(c), Fraction(r)))

    @classmethod
    def reciprocal_power(cls, c=1, power=2, offset=0) -> "SequenceSpec":
        return cls("reciprocal-power", (Fraction(c), Fraction(power), Fraction(offset)))

    @classmethod
    def explicit(cls, values: Iterable) -> "SequenceSpec":
        return cls("explicit", (), tuple(Fraction(v) for v in values))

    @property
    def depth_limit(self) -> Optional[int]:
        return len(self.values) if self.rule == "explicit" else None

    def value_at(self, n: int) -> Fraction:
        if n < 1:
            raise DomainError(f"sequence index must be >= 1, got {n}")
        if self.rule == "geometric":
            c, r = self.params
            return c * r**n
        if self.rule == "reciprocal-power":
            c, power, offset = self.params
            if power.denominator != 1:
                raise DomainError("reciprocal-power exponent must be an integer")
            return c / Fraction(n + offset) ** int(power)
        if self.rule == "explicit":
            if n > len(self.values):
                raise DepthOverflow(
                    f"explicit sequence has {len(self.values)} entries, index {n} requested"
                )
            return self.values[n - 1]
        raise DomainError(f"unknown sequence rule {self.rule!r}")

    def describe(self) -> str:
        if self.rule == "explicit":
            return f"explicit[{len(self.values)}]"
        return f"{self.rule}{tuple(str(p) for p in self.params)}"


# ---------------------------------------------------------------------------
# systems
# ---------------------------------------------------------------------------


class CantorSystem:
    """Base class: a rule for splitting bridges, one refinement step at a time."""

    kind: str = "abstract"
    branches: int = 2  # bridges produced per bridge
    exact: bool = True  # whether endpoints can stay Fraction

    @property
    def gaps_per_bridge(self) -> int:
        return self.branches - 1

    def depth_limit(self) -> Optional[int]:
        return None

    def gap_scale(self) -> Optional[Fraction]:
        """Dominant per-depth decay ratio of gap lengths, when well defined."""
        return None

    # Split rule: either a per-depth fraction of the host bridge length or a
    # per-depth absolute length (identical for every bridge of the level).
    def gap_fraction_at(self, depth: int) -> Optional[Fraction]:
        return None

    def gap_absolute_at(self, depth: int, precision_bits: int) -> Optional[Number]:
        return None

    def describe(self) -> str:
        return self.kind


@dataclass(frozen=True)
class MiddleAlpha(CantorSystem):
    """Delete the centred fraction ``alpha`` of every bridge at every depth."""

    alpha: Fraction

    kind = "middle-alpha"
    branches = 2
    exact = True

    def __post_init__(self):
        object.__setattr__(self, "alpha", Fraction(self.alpha))
        if not 0 < self.alpha < 1:
            raise InvalidSystem(f"alpha must lie in (0,1), got {self.alpha}")

    @property
    def beta(self) -> Fraction:
        return (1 - self.alpha) / 2

    def gap_fraction_at(self, depth: int) -> Fraction:
        return self.alpha

    def gap_scale(self) -> Fraction:
        return self.beta

    def describe(self) -> str:
        return f"middle-alpha({self.alpha})"


@dataclass(frozen=True)
class MultiBranch(CantorSystem):
    """Split each bridge into ``p`` equal bridges separated by ``q = p - 1``
    equal gaps: widths ``beta`` and ``alpha`` as fractions of the host, with
    q*alpha + p*beta = 1."""

    p: int
    q: int
    alpha: Fraction
    beta: Fraction

    kind = "multi-branch"
    exact = True

    def __post_init__(self):
        object.__setattr__(self, "alpha", Fraction(self.alpha))
        object.__setattr__(self, "beta", Fraction(self.beta))
        if self.p < 2:
            raise InvalidSystem(f"p must be >= 2, got {self.p}")
        if self.q != self.p - 1:
            raise InvalidSystem(
                f"interleaved layout needs q = p - 1, got p={self.p}, q={self.q}"
            )
        if not (self.alpha > 0 and self.beta > 0):
            raise InvalidSystem("alpha and beta must be positive")
        if self.q * self.alpha + self.p * self.beta != 1:
            raise InvalidSystem(
                f"q*alpha + p*beta must equal 1, got {self.q * self.alpha + self.p * self.beta}"
            )

    @property
    def branches(self) -> int:  # type: ignore[override]
        return self.p

    def gap_fraction_at(self, depth: int) -> Fraction:
        return self.alpha

    def gap_scale(self) -> Fraction:
        return self.beta

    def describe(self) -> str:
        return f"multi-branch(p={self.p},alpha={self.alpha},beta={self.beta})"


@dataclass(frozen=True)
class VariableFraction(CantorSystem):
    """Binary system deleting the centred fraction ``fractions(n)`` at depth n."""

    fractions: SequenceSpec

    kind = "variable-fraction"
    branches = 2
    exact = True

    def depth_limit(self) -> Optional[int]:
        return self.fractions.depth_limit

    def gap_fraction_at(self, depth: int) -> Fraction:
        f = self.fractions.value_at(depth)
        if not 0 < f < 1:
            raise InvalidSystem(f"deleted fraction at depth {depth} is {f}, not in (0,1)")
        return f

    def describe(self) -> str:
        return f"variable-fraction({self.fractions.describe()})"


@dataclass(frozen=True)
class ExplicitGapSchedule(CantorSystem):
    """Binary system deleting a centred gap of absolute length ``gaps(n)`` from
    every bridge at depth n."""

    gaps: SequenceSpec

    kind = "explicit-gap-schedule"
    branches = 2
    exact = True

    def depth_limit(self) -> Optional[int]:
        return self.gaps.depth_limit

    def gap_absolute_at(self, depth: int, precision_bits: int) -> Fraction:
        g = self.gaps.value_at(depth)
        if g <= 0:
            raise InvalidSystem(f"gap length at depth {depth} is {g}, not positive")
        return g

    def gap_scale(self) -> Optional[Fraction]:
        if self.gaps.rule == "geometric":
            return self.gaps.params[1]
        return None

    def describe(self) -> str:
        return f"explicit-gap-schedule({self.gaps.describe()})"


# The fluctuating family alternates around the middle-third schedule: at odd
# parameter levels m >= start_level the gap shrinks to 3**(-(m+1)*(1+q**-m)),
# and the following level enlarges its gaps so the pair deletes exactly the
# middle-third total.  Deviations therefore never accumulate: the deletion
# series still sums to 1 and bridge lengths return to 3**-depth after every
# pair.  Early levels, where q**-m is too large for the perturbation to stay
# small, are left untouched; ``start_level=None`` picks the first odd m with
# (m+1) * q**-m <= 1/50.
_FLUCTUATION_START_BOUND = Fraction(1, 50)


@dataclass(frozen=True)
class FluctuatingFamily(CantorSystem):
    q: int
    start_level: Optional[int] = None

    kind = "fluctuating-family"
    branches = 2
    exact = False

    def __post_init__(self):
        if self.q < 2:
            raise InvalidSystem(f"q must be >= 2, got {self.q}")
        if self.start_level is not None:
            if self.start_level < 1 or self.start_level % 2 == 0:
                raise InvalidSystem(
                    f"start_level must be an odd level >= 1, got {self.start_level}"
                )

    @property
    def effective_start(self) -> int:
        if self.start_level is not None:
            return self.start_level
        m = 1
        while (m + 1) * Fraction(1, self.q**m) > _FLUCTUATION_START_BOUND:
            m += 2
        return m

    def level_role(self, depth: int) -> str:
        """Role of the deletion step creating ``depth``: plain | shrink | balance."""
        m = depth - 1
        start = self.effective_start
        if m < start:
            return "plain"
        return "shrink" if (m - start) % 2 == 0 else "balance"

    def alpha_at(self, level: int) -> Fraction:
        """Exact parameter value q**-level carried by a shrink level."""
        return Fraction(1, self.q**level)

    def shrink_levels(self, max_depth: int) -> List[int]:
        """Parameter levels m with the exact q**-m value, for depths <= max_depth."""
        start = self.effective_start
        return [m for m in range(start, max_depth) if (m - start) % 2 == 0]

    def gap_absolute_at(self, depth: int, precision_bits: int) -> BigScalar:
        role = self.level_role(depth)
        three = as_big(3, precision_bits)
        if role == "plain":
            return three ** (-depth)
        if role == "shrink":
            a = self.alpha_at(depth - 1)
            return three ** (-(depth * (1 + as_big(a, precision_bits))))
        # Balance step: restore the pair's deleted total to the middle-third
        # value.  The previous depth removed one gap per bridge, this depth
        # removes two per previous bridge, hence the factor 1/2.
        prev = depth - 1
        a = self.alpha_at(prev - 1)
        shortfall = three ** (-prev) - three ** (-(prev * (1 + as_big(a, precision_bits))))
        return three ** (-depth) + shortfall / 2

    def gap_scale(self) -> Fraction:
        return Fraction(1, 3)

    def describe(self) -> str:
        return f"fluctuating-family(q={self.q},start={self.effective_start})"


def middle_third_system() -> MiddleAlpha:
    return MiddleAlpha(Fraction(1, 3))


def example2_system(delta) -> ExplicitGapSchedule:
    """Fat system deleting 2**(n-1) centred gaps of length delta/3**n at depth n.

    The deleted series sums to delta, so the limit set keeps measure 1 - delta.
    """
    delta = Fraction(delta)
    if not 0 < delta < 1:
        raise InvalidSystem(f"delta must lie in (0,1), got {delta}")
    return ExplicitGapSchedule(SequenceSpec.geometric(delta, Fraction(1, 3)))


def fluctuating_family(q: int, start_level: Optional[int] = None) -> FluctuatingFamily:
    return FluctuatingFamily(q, start_level)


# ---------------------------------------------------------------------------
# refinement data
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Bridge:
    left: Number
    right: Number

    @property
    def length(self) -> Number:
        return self.right - self.left


@dataclass(frozen=True)
class Gap:
    left: Number
    right: Number
    depth: int  # refinement depth whose deletion created this gap

    @property
    def length(self) -> Number:
        return self.right - self.left


@dataclass(frozen=True)
class RefinementLevel:
    depth: int
    bridges: Tuple[Bridge, ...]
    gaps: Tuple[Gap, ...]  # every gap created at depths <= depth, sorted by position

    def to_json_dict(self) -> dict:
        return {
            "depth": self.depth,
            "bridges": [
                {"left": _decimal(b.left), "right": _decimal(b.right)} for b in self.bridges
            ],
            "gaps": [
                {"left": _decimal(g.left), "right": _decimal(g.right), "depth": g.depth}
                for g in self.gaps
            ],
        }

    def to_json(self) -> str:
        return json.dumps(self.to_json_dict(), sort_keys=True)


def _decimal(x: Number) -> str:
    return as_big(x).to_decimal_string()


@dataclass(frozen=True)
class LevelStats:
    """Homogeneous per-depth summary: every bridge of a level is congruent."""

    depth: int
    bridge_count: int
    bridge_length: Number
    gap_length: Optional[Number]  # length of each gap created at this depth
    gaps_created: int
    total_bridge_length: Number
    cumulative_gap_length: Number


# ---------------------------------------------------------------------------
# operations
# ---------------------------------------------------------------------------


def _check_depth(system: CantorSystem, depth: int) -> None:
    if depth < 0:
        raise DomainError(f"depth must be >= 0, got {depth}")
    limit = system.depth_limit()
    if limit is not None and depth > limit:
        raise DepthOverflow(
            f"{system.describe()} defines {limit} refinement depths, {depth} requested"
        )


def _split_lengths(
    system: CantorSystem, depth: int, length: Number, precision_bits: int
) -> Tuple[Number, Number]:
    """(child bridge length, gap length) for one bridge at ``depth``."""
    frac = system.gap_fraction_at(depth)
    if frac is not None:
        gap = length * frac
    else:
        gap = system.gap_absolute_at(depth, precision_bits)
        if not system.exact and isinstance(length, BigScalar):
            gap = as_big(gap, precision_bits)
    p, q = system.branches, system.gaps_per_bridge
    child = (length - gap * q) / p
    if not (gap > 0 and child > 0):
        raise InvalidSystem(
            f"{system.describe()}: depth-{depth} gap {gap} does not fit in a bridge of length {length}"
        )
    return child, gap


def refine_to(
    system: CantorSystem,
    depth: int,
    max_bridges: int = DEFAULT_MAX_BRIDGES,
    precision_bits: Optional[int] = None,
) -> RefinementLevel:
    """Materialise the bridges and gaps of a refinement level.

    Raises DepthOverflow when the level would hold more than ``max_bridges``
    bridges; deep levels of homogeneous systems should use ``level_profile``.
    """
    _check_depth(system, depth)
    bits = precision_bits or get_default_precision()
    if system.branches**depth > max_bridges:
        raise DepthOverflow(
            f"depth {depth} needs {system.branches**depth} bridges, cap is {max_bridges}"
        )
    if system.exact:
        lo: Number = Fraction(0)
        hi: Number = Fraction(1)
    else:
        lo = as_big(0, bits)
        hi = as_big(1, bits)
    bridges = [(lo, hi)]
    gaps: List[Gap] = []
    for d in range(1, depth + 1):
        child, gap = _split_lengths(system, d, bridges[0][1] - bridges[0][0], bits)
        nxt: List[Tuple[Number, Number]] = []
        for left, right in bridges:
            # Anchor the outermost children on the parent's own endpoints so
            # rounding never drifts the boundary of a bridge across depths.
            kids: List[Tuple[Number, Number]] = []
            x = left
            for k in range(system.branches - 1):
                kids.append((x, x + child))
                x = x + child + gap
            kids.append((right - child, right))
            nxt.extend(kids)
            for (_, gap_lo), (gap_hi, _) in zip(kids, kids[1:]):
                gaps.append(Gap(gap_lo, gap_hi, d))
        bridges = nxt
    gaps.sort(key=lambda g: g.left)
    return RefinementLevel(
        depth,
        tuple(Bridge(left, right) for left, right in bridges),
        tuple(gaps),
    )


def level_profile(
    system: CantorSystem,
    max_depth: int,
    numeric: str = "auto",
    precision_bits: Optional[int] = None,
) -> List[LevelStats]:
    """Per-depth scalar summaries from depth 0 through ``max_depth``.

    ``numeric`` selects the arithmetic: "exact" (Fraction, only for rational
    systems), "big" (BigScalar), or "auto" (exact when the system allows it).
    The recurrence touches one bridge per depth, so depths in the tens of
    thousands are cheap.
    """
    _check_depth(system, max_depth)
    bits = precision_bits or get_default_precision()
    if numeric not in ("auto", "exact", "big"):
        raise DomainError(f"unknown numeric mode {numeric!r}")
    use_exact = system.exact if numeric == "auto" else numeric == "exact"
    if use_exact and not system.exact:
        raise DomainError(f"{system.describe()} has no exact arithmetic path")
    length: Number = Fraction(1) if use_exact else as_big(1, bits)
    cum_gap: Number = Fraction(0) if use_exact else as_big(0, bits)
    count = 1
    out = [LevelStats(0, 1, length, None, 0, length, cum_gap)]
    for d in range(1, max_depth + 1):
        child, gap = _split_lengths(system, d, length, bits)
        if not use_exact:
            child, gap = as_big(child, bits), as_big(gap, bits)
        gaps_created = count * system.gaps_per_bridge
        cum_gap = cum_gap + gap * gaps_created
        count *= system.branches
        length = child
        out.append(
            LevelStats(d, count, length, gap, gaps_created, length * count, cum_gap)
        )
    return out


def gap_lengths_at(level: RefinementLevel, depth: int) -> Tuple[Number, ...]:
    """Lengths of the gaps created exactly at ``depth`` within a materialised level."""
    if depth < 1:
        raise DomainError(f"gaps exist from depth 1, got {depth}")
    if depth > level.depth:
        raise DepthOverflow(
            f"level holds depths up to {level.depth}, gap depth {depth} requested"
        )
    return tuple(g.length for g in level.gaps if g.depth == depth)


@dataclass(frozen=True)
class Location:
    kind: str  # "bridge" | "gap" | "outside"
    index: Optional[int]


def locate(level: RefinementLevel, x) -> Location:
    """Classify a point against a refinement level.

    Gap endpoints report the gap (deleted intervals keep their endpoints for
    plateau purposes), interior bridge points report the bridge, anything
    outside [0, 1] reports outside.
    """
    if isinstance(x, (int, float, str)) and not isinstance(x, bool):
        x = Fraction(x) if not isinstance(x, str) else as_big(x)
    if x < 0 or x > 1:
        return Location("outside", None)
    lo, hi = 0, len(level.gaps) - 1
    while lo <= hi:
        mid = (lo + hi) // 2
        g = level.gaps[mid]
        if x < g.left:
            hi = mid - 1
        elif x > g.right:
            lo = mid + 1
        else:
            return Location("gap", mid)
    lo, hi = 0, len(level.bridges) - 1
    while lo <= hi:
        mid = (lo + hi) // 2
        b = level.bridges[mid]
        if x < b.left:
            hi = mid - 1
        elif x > b.right:
            lo = mid + 1
        else:
            return Location("bridge", mid)
    # Bridges and closed gaps tile [0,1]; reaching here means x slipped between
    # adjacent floats, which exact arithmetic rules out.
    raise DomainError(f"point {x} could not be classified at depth {level.depth}")
