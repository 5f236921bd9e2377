"""Arbitrary-precision scalars, limit extrapolation, and least-squares fits.

Everything else in the package funnels its floating arithmetic through
``BigScalar``, a thin immutable wrapper around ``gmpy2.mpfr`` that records the
precision each value was computed at.  Binary operations round at the larger
of the two operand precisions, so precision requests propagate through a
computation without global state.  Exact rational work uses
``fractions.Fraction`` (re-exported as ``Rational``); operations that can stay
exact should prefer it and only drop into ``BigScalar`` when a logarithm or a
non-rational power forces them to.

The default working precision is 256 bits and can be overridden with the
``CANTORLAB_PRECISION_BITS`` environment variable or ``set_default_precision``.
"""

from __future__ import annotations

import os
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Iterable, Iterator, Sequence, Tuple, Union

import gmpy2
from gmpy2 import mpfr, mpq

from .errors import DegenerateInput, DomainError, NonConvergent

__all__ = [
    "Rational",
    "BigScalar",
    "LimitEstimate",
    "FitResult",
    "get_default_precision",
    "set_default_precision",
    "as_big",
    "eval_limit",
    "log_base",
    "linear_fit",
]

Rational = Fraction

_PRECISION_ENV = "CANTORLAB_PRECISION_BITS"
_MIN_PRECISION = 8
_MPFR_TYPE = type(mpfr(0))
_MPQ_TYPE = type(mpq(0))


def _read_env_precision() -> int:
    raw = os.environ.get(_PRECISION_ENV)
    if raw is None:
        return 256
    try:
        bits = int(raw)
    except ValueError as exc:
        raise DomainError(f"{_PRECISION_ENV} must be an integer, got {raw!r}") from exc
    if bits < _MIN_PRECISION:
        raise DomainError(f"{_PRECISION_ENV} must be >= {_MIN_PRECISION}, got {bits}")
    return bits


_default_precision = _read_env_precision()


def get_default_precision() -> int:
    """Return the working precision, in bits, used when none is requested."""
    return _default_precision


def set_default_precision(bits: int) -> None:
    """Set the default working precision for newly created scalars."""
    global _default_precision
    if bits < _MIN_PRECISION:
        raise DomainError(f"precision must be >= {_MIN_PRECISION} bits, got {bits}")
    _default_precision = int(bits)


def _ctx(bits: int):
    return gmpy2.context(precision=bits)


BigLike = Union["BigScalar", int, Fraction, float, str]


class BigScalar:
    """An immutable arbitrary-precision real number with a recorded precision.

    Arithmetic between two ``BigScalar`` values is carried out, and rounded,
    at the larger of the two precisions.  Exact operands (``int``,
    ``Fraction``) participate without premature rounding.
    """

    __slots__ = ("value", "precision_bits")

    def __init__(self, value: BigLike, precision_bits: int | None = None):
        if isinstance(value, BigScalar):
            bits = precision_bits or value.precision_bits
            raw = value.value
        elif isinstance(value, _MPFR_TYPE):
            bits = precision_bits or value.precision
            raw = value
        else:
            bits = precision_bits or _default_precision
            if isinstance(value, Fraction):
                raw = mpq(value.numerator, value.denominator)
            elif isinstance(value, str):
                raw = value.strip()
            else:
                raw = value
        with _ctx(bits):
            self.value = mpfr(raw)
        if gmpy2.is_nan(self.value):
            raise DomainError("BigScalar cannot hold NaN")
        self.precision_bits = bits

    # -- construction helpers -------------------------------------------------

    @classmethod
    def from_decimal_string(cls, text: str, precision_bits: int | None = None) -> "BigScalar":
        return cls(text, precision_bits)

    def to_decimal_string(self) -> str:
        """Decimal form with enough digits to round-trip at this precision."""
        return str(self.value)

    # -- arithmetic -----------------------------------------------------------

    def _coerce(self, other):
        # Exact types pass through untouched; gmpy2 rounds them only once,
        # inside the operation itself.
        if isinstance(other, BigScalar):
            return other.value, other.precision_bits
        if isinstance(other, int):
            return other, 0
        if isinstance(other, Fraction):
            return mpq(other.numerator, other.denominator), 0
        if isinstance(other, float):
            return other, 53
        if isinstance(other, _MPFR_TYPE):
            return other, other.precision
        if isinstance(other, _MPQ_TYPE):
            return other, 0
        return NotImplemented, 0

    def _binary(self, other, op):
        raw, bits = self._coerce(other)
        if raw is NotImplemented:
            return NotImplemented
        prec = max(self.precision_bits, bits)
        with _ctx(prec):
            out = op(self.value, raw)
        return BigScalar(out, prec)

    def _rbinary(self, other, op):
        raw, bits = self._coerce(other)
        if raw is NotImplemented:
            return NotImplemented
        prec = max(self.precision_bits, bits)
        with _ctx(prec):
            out = op(raw, self.value)
        return BigScalar(out, prec)

    def __add__(self, other):
        return self._binary(other, lambda a, b: a + b)

    __radd__ = __add__

    def __sub__(self, other):
        return self._binary(other, lambda a, b: a - b)

    def __rsub__(self, other):
        return self._rbinary(other, lambda a, b: a - b)

    def __mul__(self, other):
        return self._binary(other, lambda a, b: a * b)

    __rmul__ = __mul__

    def __truediv__(self, other):
        if _is_zero(other):
            raise DomainError("division by zero")
        return self._binary(other, lambda a, b: a / b)

    def __rtruediv__(self, other):
        if self.value == 0:
            raise DomainError("division by zero")
        return self._rbinary(other, lambda a, b: a / b)

    def __pow__(self, other):
        return self._binary(other, lambda a, b: a ** b)

    def __rpow__(self, other):
        return self._rbinary(other, lambda a, b: a ** b)

    # gmpy2 rounds even negation and abs in the *active* context, so these
    # must run inside the operand's own precision context.
    def __neg__(self):
        with _ctx(self.precision_bits):
            return BigScalar(-self.value, self.precision_bits)

    def __abs__(self):
        with _ctx(self.precision_bits):
            return BigScalar(abs(self.value), self.precision_bits)

    # -- transcendentals ------------------------------------------------------

    def ln(self) -> "BigScalar":
        if self.value <= 0:
            raise DomainError(f"log of non-positive value {self.value}")
        with _ctx(self.precision_bits):
            return BigScalar(gmpy2.log(self.value), self.precision_bits)

    def exp(self) -> "BigScalar":
        with _ctx(self.precision_bits):
            return BigScalar(gmpy2.exp(self.value), self.precision_bits)

    def sqrt(self) -> "BigScalar":
        if self.value < 0:
            raise DomainError("sqrt of negative value")
        with _ctx(self.precision_bits):
            return BigScalar(gmpy2.sqrt(self.value), self.precision_bits)

    # -- comparisons (exact, no rounding) --------------------------------------

    def _cmp_raw(self, other):
        raw, _ = self._coerce(other)
        return raw

    def __eq__(self, other):
        raw = self._cmp_raw(other)
        return NotImplemented if raw is NotImplemented else self.value == raw

    def __lt__(self, other):
        raw = self._cmp_raw(other)
        return NotImplemented if raw is NotImplemented else self.value < raw

    def __le__(self, other):
        raw = self._cmp_raw(other)
        return NotImplemented if raw is NotImplemented else self.value <= raw

    def __gt__(self, other):
        raw = self._cmp_raw(other)
        return NotImplemented if raw is NotImplemented else self.value > raw

    def __ge__(self, other):
        raw = self._cmp_raw(other)
        return NotImplemented if raw is NotImplemented else self.value >= raw

    def __hash__(self):
        return hash(self.value)

    def __float__(self):
        return float(self.value)

    def __int__(self):
        return int(self.value)

    def __bool__(self):
        return self.value != 0

    def __repr__(self):
        return f"BigScalar({str(self.value)!r}, {self.precision_bits})"

    def __str__(self):
        return str(self.value)


def _is_zero(x) -> bool:
    if isinstance(x, BigScalar):
        return x.value == 0
    try:
        return x == 0
    except TypeError:
        return False


def as_big(x: BigLike, precision_bits: int | None = None) -> BigScalar:
    """Coerce ``x`` to a BigScalar, reusing it unchanged when possible."""
    if isinstance(x, BigScalar) and (
        precision_bits is None or precision_bits == x.precision_bits
    ):
        return x
    return BigScalar(x, precision_bits)


# ---------------------------------------------------------------------------
# limit evaluation
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class LimitEstimate:
    """Result of extrapolating a convergent sequence.

    ``error_bound`` is a heuristic: the distance between the last two
    extrapolants (or raw terms, for the plain-tail method).  It is not a
    rigorous enclosure.
    """

    value: BigScalar
    error_bound: BigScalar
    terms_used: int
    converged: bool


class _AitkenTable:
    """Incrementally maintained iterated delta-squared table.

    Column 0 holds the raw terms; column k+1 holds the Aitken transform of
    column k.  The best estimate is the deepest (most accelerated) entry
    available.  When a transform denominator vanishes the sequence is locally
    exact and the untransformed term is carried forward.
    """

    def __init__(self):
        self.columns: list[list[BigScalar]] = [[]]

    def push(self, term: BigScalar) -> None:
        self.columns[0].append(term)
        k = 0
        while len(self.columns[k]) >= 3:
            col = self.columns[k]
            x0, x1, x2 = col[-3], col[-2], col[-1]
            d1 = x2 - x1
            d2 = d1 - (x1 - x0)
            if d2.value == 0:
                nxt = x2
            else:
                nxt = x2 - d1 * d1 / d2
            if k + 1 == len(self.columns):
                self.columns.append([])
            target = self.columns[k + 1]
            # Each pushed term unlocks exactly one new entry per column.
            if len(target) < len(col) - 2:
                target.append(nxt)
                k += 1
            else:
                break

    def best(self) -> BigScalar | None:
        for col in reversed(self.columns):
            if col:
                return col[-1]
        return None


def eval_limit(
    seq: Iterable[BigLike] | Callable[[int], BigLike],
    method: str = "aitken",
    tol: BigLike | None = None,
    max_terms: int = 64,
) -> LimitEstimate:
    """Estimate the limit of a convergent sequence.

    ``seq`` is an iterable of terms (or a callable evaluated at n = 1, 2, ...).
    ``method`` is ``"plain-tail"`` (take the last term, stop when successive
    terms agree to ``tol``) or ``"aitken"`` (iterated delta-squared
    acceleration, which recovers geometric limits essentially exactly).

    Raises NonConvergent, carrying the best estimate, if ``max_terms`` terms
    are consumed without two successive estimates agreeing to ``tol``.
    """
    if method not in ("plain-tail", "aitken"):
        raise DomainError(f"unknown method {method!r}")
    if max_terms < 3:
        raise DomainError("max_terms must be at least 3")
    tol_big = as_big(tol) if tol is not None else as_big(Fraction(1, 2 ** (_default_precision // 2)))
    if not tol_big > 0:
        raise DomainError("tol must be positive")

    if callable(seq):
        iterator: Iterator[BigLike] = (seq(n) for n in range(1, max_terms + 1))
    else:
        iterator = iter(seq)

    table = _AitkenTable() if method == "aitken" else None
    prev_estimate: BigScalar | None = None
    estimate: BigScalar | None = None
    err: BigScalar | None = None
    used = 0
    for raw in iterator:
        term = as_big(raw)
        used += 1
        if table is not None:
            table.push(term)
            estimate = table.best()
        else:
            estimate = term
        if prev_estimate is not None:
            err = abs(estimate - prev_estimate)
            if used >= 3 and err < tol_big:
                return LimitEstimate(estimate, err, used, True)
        prev_estimate = estimate
        if used >= max_terms:
            break
    if used < 3:
        raise DomainError("sequence must yield at least 3 terms")
    best = LimitEstimate(estimate, err if err is not None else abs(estimate), used, False)
    raise NonConvergent(
        f"no convergence to tol={tol_big} after {used} terms (method={method})",
        estimate=best,
    )


# ---------------------------------------------------------------------------
# logarithms and fits
# ---------------------------------------------------------------------------


def log_base(base: BigLike, x: BigLike) -> BigScalar:
    """log of ``x`` in base ``base``; both must be positive and base != 1."""
    b = as_big(base)
    v = as_big(x)
    if not b > 0 or b == 1:
        raise DomainError(f"log base must be positive and != 1, got {b}")
    if not v > 0:
        raise DomainError(f"log argument must be positive, got {v}")
    return v.ln() / b.ln()


@dataclass(frozen=True)
class FitResult:
    slope: BigScalar
    intercept: BigScalar
    residual: BigScalar  # root-mean-square vertical deviation
    points_used: int


def linear_fit(points: Sequence[Tuple[BigLike, BigLike]]) -> FitResult:
    """Ordinary least squares fit of y against x.

    Exactly collinear points give a residual at the rounding floor.  Raises
    DegenerateInput when fewer than two distinct abscissae are supplied.
    """
    pts = [(as_big(x), as_big(y)) for x, y in points]
    n = len(pts)
    if n < 2:
        raise DegenerateInput("linear_fit needs at least two points")
    inv_n = Fraction(1, n)
    x_bar = sum((x for x, _ in pts), start=as_big(0)) * inv_n
    y_bar = sum((y for _, y in pts), start=as_big(0)) * inv_n
    sxx = as_big(0)
    sxy = as_big(0)
    for x, y in pts:
        dx = x - x_bar
        sxx = sxx + dx * dx
        sxy = sxy + dx * (y - y_bar)
    if sxx.value == 0:
        raise DegenerateInput("linear_fit needs at least two distinct x values")
    slope = sxy / sxx
    intercept = y_bar - slope * x_bar
    ss = as_big(0)
    for x, y in pts:
        dev = y - (slope * x + intercept)
        ss = ss + dev * dev
    residual = (ss * inv_n).sqrt()
    return FitResult(slope, intercept, residual, n)
