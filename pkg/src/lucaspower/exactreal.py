"""Midpoint-radius (ball) real arithmetic on top of MPFR.

A :class:`PrecReal` stands for every real number within ``rad`` of ``mid``.
Midpoints are rounded to nearest at the working precision; radii are
carried at a short fixed precision and always rounded upward, so every
result encloses the exact image of its inputs.  Precision is a per-value
attribute; there is no ambient precision.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Callable, Optional, Union

import gmpy2
from gmpy2 import mpfr, mpq, mpz

from .errors import DomainError, PrecisionError

RAD_PREC = 64
DEFAULT_PREC = 192
DEFAULT_CEILING = 4096
MIN_PREC = 64

Number = Union[int, Fraction, "PrecReal"]
Source = Callable[[int], "PrecReal"]


@lru_cache(maxsize=None)
def _ctx(prec: int, rnd: str) -> gmpy2.context:
    mode = {"n": gmpy2.RoundToNearest, "u": gmpy2.RoundUp, "d": gmpy2.RoundDown}[rnd]
    return gmpy2.context(precision=prec, round=mode)


_UP = _ctx(RAD_PREC, "u")
_ZERO = mpfr(0)


def _same(x: mpfr):
    # negation, abs and halving are exact at the operand's own precision;
    # bare operators would round to gmpy2's global 53-bit context
    return _ctx(max(x.precision, 2), "n")


def _neg(x: mpfr) -> mpfr:
    return _same(x).minus(x)


def _abs(x: mpfr) -> mpfr:
    return _same(x).abs(x)


def _scale2(x: mpfr, k: int) -> mpfr:
    return _same(x).mul_2exp(x, k)


def _ulp(x: mpfr, prec: int) -> mpfr:
    # full ulp of x at prec bits; bounds round-to-nearest error of any op yielding x
    if x == 0:
        return _ZERO
    return _scale2(mpfr(1), gmpy2.get_exp(x) - prec)


def _to_q(x) -> Fraction:
    q = mpq(x)
    return Fraction(int(q.numerator), int(q.denominator))


def _round_q(value: Fraction, ctx) -> mpfr:
    return ctx.div(mpz(value.numerator), mpz(value.denominator))


class Sign(enum.Enum):
    NEGATIVE = -1
    ZERO = 0
    POSITIVE = 1
    UNKNOWN = None


@dataclass(frozen=True)
class PrecReal:
    mid: mpfr
    rad: mpfr
    prec: int

    # construction ------------------------------------------------------

    @classmethod
    def exact(cls, value: Union[int, Fraction, str], prec: int = DEFAULT_PREC) -> "PrecReal":
        """Enclose an exact integer, rational, or decimal string."""
        if isinstance(value, PrecReal):
            return value
        if isinstance(value, str):
            value = Fraction(value)
        value = Fraction(value)
        mid = _round_q(value, _ctx(prec, "n"))
        if _to_q(mid) == value:
            return cls(mid, _ZERO, prec)
        return cls(mid, _ulp(mid, prec), prec)

    @classmethod
    def from_bounds(cls, lo: Fraction, hi: Fraction, prec: int) -> "PrecReal":
        if lo > hi:
            raise DomainError("empty interval")
        mid = _round_q((lo + hi) / 2, _ctx(prec, "n"))
        q = _to_q(mid)
        rad = _round_q(max(q - lo, hi - q), _UP)
        return cls(mid, rad, prec)

    # views --------------------------------------------------------------

    @property
    def lower(self) -> Fraction:
        return _to_q(self.mid) - _to_q(self.rad)

    @property
    def upper(self) -> Fraction:
        return _to_q(self.mid) + _to_q(self.rad)

    def contains(self, value: Union[int, Fraction]) -> bool:
        return self.lower <= Fraction(value) <= self.upper

    def sign(self) -> Sign:
        if self.rad == 0 and self.mid == 0:
            return Sign.ZERO
        if self.lower > 0:
            return Sign.POSITIVE
        if self.upper < 0:
            return Sign.NEGATIVE
        return Sign.UNKNOWN

    def floor(self) -> Optional[int]:
        """Common floor of every point in the ball, or None if it varies."""
        lo, hi = self.lower, self.upper
        f = math.floor(lo)
        return f if math.floor(hi) == f else None

    def ceil_upper(self) -> int:
        return math.ceil(self.upper)

    def floor_lower(self) -> int:
        return math.floor(self.lower)

    def __float__(self) -> float:
        return float(self.mid)

    def __repr__(self) -> str:
        return f"PrecReal({self.mid:.20g} +/- {float(self.rad):.3g}, prec={self.prec})"

    # arithmetic ---------------------------------------------------------

    def _coerce(self, other) -> "PrecReal":
        if isinstance(other, PrecReal):
            return other
        if isinstance(other, (int, Fraction)):
            return PrecReal.exact(other, self.prec)
        return NotImplemented

    def __add__(self, other):
        other = self._coerce(other)
        return NotImplemented if other is NotImplemented else add(self, other)

    __radd__ = __add__

    def __sub__(self, other):
        other = self._coerce(other)
        return NotImplemented if other is NotImplemented else sub(self, other)

    def __rsub__(self, other):
        other = self._coerce(other)
        return NotImplemented if other is NotImplemented else sub(other, self)

    def __mul__(self, other):
        other = self._coerce(other)
        return NotImplemented if other is NotImplemented else mul(self, other)

    __rmul__ = __mul__

    def __truediv__(self, other):
        other = self._coerce(other)
        return NotImplemented if other is NotImplemented else div(self, other)

    def __rtruediv__(self, other):
        other = self._coerce(other)
        return NotImplemented if other is NotImplemented else div(other, self)

    def __neg__(self):
        return neg(self)

    def __abs__(self):
        return absolute(self)

    def __pow__(self, k: int):
        return pow_int(self, k)


def _prec(*xs: PrecReal) -> int:
    return max(x.prec for x in xs)


def _finish(mid: mpfr, rad: mpfr, prec: int) -> PrecReal:
    return PrecReal(mid, _UP.add(rad, _ulp(mid, prec)), prec)


def add(x: PrecReal, y: PrecReal) -> PrecReal:
    p = _prec(x, y)
    return _finish(_ctx(p, "n").add(x.mid, y.mid), _UP.add(x.rad, y.rad), p)


def sub(x: PrecReal, y: PrecReal) -> PrecReal:
    p = _prec(x, y)
    return _finish(_ctx(p, "n").sub(x.mid, y.mid), _UP.add(x.rad, y.rad), p)


def neg(x: PrecReal) -> PrecReal:
    return PrecReal(_neg(x.mid), x.rad, x.prec)


def absolute(x: PrecReal) -> PrecReal:
    if x.lower >= 0:
        return x
    if x.upper <= 0:
        return neg(x)
    hi = _ctx(x.prec, "u").add(_abs(x.mid), x.rad)
    half = _scale2(hi, -1)
    return PrecReal(half, _UP.add(half, 0), x.prec)


def mul(x: PrecReal, y: PrecReal) -> PrecReal:
    p = _prec(x, y)
    ax, ay = _abs(x.mid), _abs(y.mid)
    rad = _UP.add(_UP.add(_UP.mul(ax, y.rad), _UP.mul(ay, x.rad)), _UP.mul(x.rad, y.rad))
    return _finish(_ctx(p, "n").mul(x.mid, y.mid), rad, p)


def div(x: PrecReal, y: PrecReal) -> PrecReal:
    p = _prec(x, y)
    ay = _abs(y.mid)
    down = _ctx(RAD_PREC, "d")
    gap = down.sub(ay, y.rad)
    if gap <= 0:
        raise DomainError("division by an interval containing zero")
    num = _UP.add(_UP.mul(_abs(x.mid), y.rad), _UP.mul(ay, x.rad))
    rad = _UP.div(num, down.mul(down.add(ay, 0), gap))
    return _finish(_ctx(p, "n").div(x.mid, y.mid), rad, p)


def ln(x: PrecReal) -> PrecReal:
    down = _ctx(RAD_PREC, "d")
    low = down.sub(x.mid, x.rad)
    if low <= 0:
        raise DomainError("logarithm of a non-positive interval")
    return _finish(_ctx(x.prec, "n").log(x.mid), _UP.div(x.rad, low), x.prec)


def exp(x: PrecReal) -> PrecReal:
    rad = _UP.mul(_UP.exp(x.mid), _UP.expm1(x.rad))
    return _finish(_ctx(x.prec, "n").exp(x.mid), rad, x.prec)


def sqrt(x: PrecReal) -> PrecReal:
    down = _ctx(RAD_PREC, "d")
    low = down.sub(x.mid, x.rad)
    if low < 0:
        raise DomainError("square root of a negative interval")
    mid = _ctx(x.prec, "n").sqrt(x.mid)
    if x.rad == 0:
        return _finish(mid, _ZERO, x.prec)
    if low == 0:
        return _finish(mid, _UP.sqrt(_UP.add(x.mid, x.rad)), x.prec)
    return _finish(mid, _UP.div(x.rad, down.add(down.sqrt(low), down.sqrt(x.mid))), x.prec)


def pow_int(x: PrecReal, k: int) -> PrecReal:
    if k < 0:
        return div(PrecReal.exact(1, x.prec), pow_int(x, -k))
    if k == 0:
        return PrecReal.exact(1, x.prec)
    if k == 1:
        return x
    am = _abs(x.mid)
    up = _ctx(x.prec + 16, "u")
    down = _ctx(x.prec + 16, "d")
    spread = _UP.add(up.sub(up.pow(up.add(am, x.rad), k), down.pow(am, k)), 0)
    return _finish(_ctx(x.prec, "n").pow(x.mid, k), spread, x.prec)


def arith(op: str, *args, prec: Optional[int] = None) -> PrecReal:
    """Dispatch by operation name; plain numbers are enclosed at ``prec``."""
    table = {
        "add": add, "sub": sub, "mul": mul, "div": div, "neg": neg,
        "abs": absolute, "ln": ln, "exp": exp, "sqrt": sqrt,
    }
    if op == "pow_int":
        base, k = args
        return pow_int(_lift(base, prec), int(k))
    if op not in table:
        raise ValueError(f"unknown operation {op!r}")
    return table[op](*(_lift(a, prec) for a in args))


def _lift(v, prec) -> PrecReal:
    if isinstance(v, PrecReal):
        return v
    return PrecReal.exact(v, prec or DEFAULT_PREC)


# constants --------------------------------------------------------------

def const_eval(name: str, prec: int = DEFAULT_PREC, p: Optional[int] = None) -> PrecReal:
    if prec < MIN_PREC:
        raise ValueError(f"precision must be at least {MIN_PREC} bits")
    guard = prec + 32
    if name == "sqrt5":
        value = sqrt(PrecReal.exact(5, guard))
    elif name == "alpha":
        value = (sqrt(PrecReal.exact(5, guard)) + 1) / 2
    elif name == "beta":
        value = (1 - sqrt(PrecReal.exact(5, guard))) / 2
    elif name == "log_alpha":
        value = ln(const_eval("alpha", guard))
    elif name == "log2":
        value = ln(PrecReal.exact(2, guard))
    elif name == "log_p":
        if p is None or p < 2:
            raise ValueError("log_p needs p >= 2")
        value = ln(PrecReal.exact(p, guard))
    else:
        raise ValueError(f"unknown constant {name!r}")
    return _rebase(value, prec)


def _rebase(x: PrecReal, prec: int) -> PrecReal:
    mid = _ctx(prec, "n").add(x.mid, 0)
    shift = abs(_to_q(mid) - _to_q(x.mid))
    return PrecReal(mid, _UP.add(x.rad, _round_q(shift, _UP)), prec)


def alpha(prec: int) -> PrecReal:
    return const_eval("alpha", prec)


def log_alpha(prec: int) -> PrecReal:
    return const_eval("log_alpha", prec)


def log_p(p: int, prec: int) -> PrecReal:
    return const_eval("log_p", prec, p=p)


# comparisons --------------------------------------------------------------

def compare(x: Number, y: Number) -> Sign:
    if not isinstance(x, PrecReal):
        x = PrecReal.exact(x, y.prec if isinstance(y, PrecReal) else DEFAULT_PREC)
    if not isinstance(y, PrecReal):
        y = PrecReal.exact(y, x.prec)
    if x.rad == 0 and y.rad == 0:
        a, b = _to_q(x.mid), _to_q(y.mid)
        return Sign.ZERO if a == b else (Sign.POSITIVE if a > b else Sign.NEGATIVE)
    if x.lower > y.upper:
        return Sign.POSITIVE
    if x.upper < y.lower:
        return Sign.NEGATIVE
    return Sign.UNKNOWN


def precision_schedule(start: int = DEFAULT_PREC, ceiling: int = DEFAULT_CEILING):
    prec = start
    while prec <= ceiling:
        yield prec
        prec *= 2


def certify(source: Source, accept: Callable[[PrecReal], bool],
            start: int = DEFAULT_PREC, ceiling: int = DEFAULT_CEILING,
            what: str = "quantity") -> PrecReal:
    """Evaluate ``source`` at doubling precision until ``accept`` holds."""
    for prec in precision_schedule(start, ceiling):
        value = source(prec)
        if accept(value):
            return value
    raise PrecisionError(f"could not certify {what} below {ceiling} bits")


def certified_sign(source: Source, start: int = DEFAULT_PREC,
                   ceiling: int = DEFAULT_CEILING, what: str = "sign") -> Sign:
    value = certify(source, lambda v: v.sign() is not Sign.UNKNOWN, start, ceiling, what)
    return value.sign()


def certify_less(lhs: Source, rhs: Source, start: int = DEFAULT_PREC,
                 ceiling: int = DEFAULT_CEILING, what: str = "inequality") -> bool:
    """True iff lhs < rhs, decided with certified enclosures."""
    sign = certified_sign(lambda prec: lhs(prec) - rhs(prec), start, ceiling, what)
    return sign is Sign.NEGATIVE


def nearest_integer_distance(x: PrecReal):
    """Enclose ||x||; ``nearest`` is None when x straddles a half-integer."""
    if x.rad >= 0.25:
        raise DomainError("enclosure too wide to bound the distance to an integer")
    lo, hi = x.lower, x.upper
    n_lo = math.floor(lo + Fraction(1, 2))
    n_hi = math.floor(hi + Fraction(1, 2))
    if n_lo == n_hi:
        d = absolute(x - n_lo)
        return d, n_lo
    # interval crosses n_lo + 1/2
    near = min(abs(lo - n_lo), abs(hi - n_hi))
    return PrecReal.from_bounds(near, Fraction(1, 2), x.prec), None


def to_decimal(x: PrecReal, digits: int = 40) -> tuple:
    """Decimal ``(approx, err)`` strings whose ball still encloses ``x``."""
    from decimal import Decimal, localcontext, ROUND_HALF_EVEN, ROUND_CEILING

    mid = _to_q(x.mid)
    with localcontext() as ctx:
        ctx.prec = digits
        ctx.rounding = ROUND_HALF_EVEN
        approx = Decimal(mid.numerator) / Decimal(mid.denominator)
        total = _to_q(x.rad) + abs(Fraction(approx) - mid)
        ctx.prec = 3
        ctx.rounding = ROUND_CEILING
        err = Decimal(total.numerator) / Decimal(total.denominator) if total else Decimal(0)
    return format(approx, "f") if abs(approx) < Decimal(10) ** 30 else str(approx), str(err)


def from_decimal(approx: str, err: str, prec: int) -> PrecReal:
    a, e = Fraction(approx), Fraction(err)
    return PrecReal.from_bounds(a - e, a + e, prec)
