"""The devil's-staircase function of a binary Cantor system.

``phi`` maps [0,1] onto [0,1], is non-decreasing, and is constant on every
deleted gap: the gap created when the depth-d bridge of dyadic index k splits
carries the plateau value (2k+1)/2**d, gap endpoints included.  Values are
exact ``Fraction`` dyadics throughout; only the location of x within bridge
intervals uses the system's own arithmetic.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import List, Optional, Tuple, Union

from .construction import CantorSystem, _split_lengths, refine_to
from .errors import DomainError, UnsupportedSystem
from .numerics import BigScalar, get_default_precision

__all__ = [
    "PhiValue",
    "phi",
    "phi_middle_third_digits",
    "phi_increment_check",
    "staircase_table",
]

Number = Union[Fraction, BigScalar]


@dataclass(frozen=True)
class PhiValue:
    """A resolved staircase value.

    ``exact`` marks plateau hits (x landed in a gap, endpoints included) and
    the two boundary points 0 and 1.  Otherwise ``value`` is the lower dyadic
    bracket at ``depth_used`` and the true value lies within 2**-depth_used
    above it.
    """

    value: Fraction
    exact: bool
    depth_used: int


def _coerce_point(x) -> Number:
    if isinstance(x, (Fraction, BigScalar)):
        return x
    if isinstance(x, int) and not isinstance(x, bool):
        return Fraction(x)
    if isinstance(x, float):
        return Fraction(x)
    if isinstance(x, str):
        return Fraction(x) if "/" in x or "." not in x else Fraction(x)
    raise DomainError(f"cannot interpret {x!r} as a point in [0,1]")


def _require_binary(system: CantorSystem) -> None:
    if system.branches != 2:
        raise UnsupportedSystem(
            f"{system.describe()} splits into {system.branches} branches; "
            "the staircase takes dyadic values and needs binary branching"
        )


def phi(system: CantorSystem, x, max_depth: int = 64) -> PhiValue:
    """Evaluate the staircase by descending the refinement tree.

    Points resolving to a gap at depth d <= max_depth get the exact plateau
    value; Cantor-set points get the lower dyadic bracket at max_depth.  For
    systems on non-exact arithmetic, points within the rounding guard band of
    a gap boundary are classified onto the boundary (and hence the plateau).
    """
    _require_binary(system)
    if max_depth < 1:
        raise DomainError(f"max_depth must be >= 1, got {max_depth}")
    pt = _coerce_point(x)
    if pt < 0 or pt > 1:
        raise DomainError(f"phi is defined on [0,1], got {pt}")
    if pt == 0:
        return PhiValue(Fraction(0), True, 0)
    if pt == 1:
        return PhiValue(Fraction(1), True, 0)
    bits = get_default_precision()
    if system.exact:
        lo: Number = Fraction(0)
        hi: Number = Fraction(1)
        slack: Number = Fraction(0)
    else:
        lo = BigScalar(0, bits)
        hi = BigScalar(1, bits)
        slack = BigScalar(Fraction(1, 2 ** (bits // 2)), bits)
    index = 0
    limit = system.depth_limit()
    depth_cap = max_depth if limit is None else min(max_depth, limit)
    for d in range(1, depth_cap + 1):
        child, _gap = _split_lengths(system, d, hi - lo, bits)
        left_end = lo + child
        right_start = hi - child
        if left_end - slack <= pt <= right_start + slack:
            return PhiValue(Fraction(2 * index + 1, 2**d), True, d)
        if pt < left_end:
            hi = left_end
            index = 2 * index
        else:
            lo = right_start
            index = 2 * index + 1
    return PhiValue(Fraction(index, 2**depth_cap), False, depth_cap)


def phi_middle_third_digits(x, digits: int = 64) -> Fraction:
    """Digit-rule evaluation for the middle-third staircase.

    Expand x in base 3, stop at the first digit 1 (keeping it), rewrite the
    digits 2 as 1, and read the result in base 2.  Exact on rational input and
    agrees with ``phi`` on the middle-third system to the shared resolution.
    """
    if digits < 1:
        raise DomainError(f"digits must be >= 1, got {digits}")
    if isinstance(x, BigScalar):
        num, den = x.value.as_integer_ratio()
        pt = Fraction(int(num), int(den))
    else:
        pt = Fraction(x)
    if pt < 0 or pt > 1:
        raise DomainError(f"the staircase is defined on [0,1], got {pt}")
    if pt == 1:
        return Fraction(1)
    value = Fraction(0)
    rem = pt
    for i in range(1, digits + 1):
        rem *= 3
        digit = int(rem)
        rem -= digit
        if digit >= 1:
            value += Fraction(1, 2**i)
        if digit == 1:
            break
    return value


def phi_increment_check(system: CantorSystem, depth: int) -> bool:
    """Whether every depth-`depth` bridge has endpoint values 2**-depth apart.

    This holds for any binary system regardless of gap sizes: the staircase
    distributes dyadic mass by branching alone.
    """
    _require_binary(system)
    if depth < 1:
        raise DomainError(f"depth must be >= 1, got {depth}")
    level = refine_to(system, depth)
    step = Fraction(1, 2**depth)
    for bridge in level.bridges:
        a = phi(system, bridge.left, max_depth=depth)
        b = phi(system, bridge.right, max_depth=depth)
        if b.value - a.value != step:
            return False
    return True


def staircase_table(
    system: CantorSystem, samples: int, max_depth: int = 48
) -> List[Tuple[Fraction, PhiValue]]:
    """(x, phi(x)) on the uniform grid i/samples, for CSV export."""
    if samples < 1:
        raise DomainError(f"samples must be >= 1, got {samples}")
    return [
        (Fraction(i, samples), phi(system, Fraction(i, samples), max_depth))
        for i in range(samples + 1)
    ]
