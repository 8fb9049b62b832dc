"""Certified continued fractions of ball-enclosed irrationals.

A partial quotient is accepted only when it is shared by the expansions of
both exact endpoints of the enclosure; a shared prefix is common to every
real in between.  When too few quotients agree, the source is re-evaluated
at doubled precision.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import List, Tuple

from . import exactreal as er
from .errors import PrecisionError
from .exactreal import PrecReal


@dataclass(frozen=True)
class Convergent:
    p: int
    q: int
    index: int

    def as_fraction(self) -> Fraction:
        return Fraction(self.p, self.q)


@dataclass(frozen=True)
class ContinuedFraction:
    quotients: Tuple[int, ...]
    source: er.Source
    prec_used: int
    prec_start: int = er.DEFAULT_PREC
    ceiling: int = er.DEFAULT_CEILING

    @property
    def certified_upto(self) -> int:
        return len(self.quotients) - 1

    def convergents(self) -> List[Convergent]:
        out = []
        p0, p1 = 0, 1  # p_{-2}, p_{-1}
        q0, q1 = 1, 0
        for k, a in enumerate(self.quotients):
            p0, p1 = p1, a * p1 + p0
            q0, q1 = q1, a * q1 + q0
            out.append(Convergent(p1, q1, k))
        return out

    def extend(self, count: int) -> "ContinuedFraction":
        if count <= self.certified_upto:
            return self
        return expand(self.source, count, self.prec_used, self.ceiling)


def _cf_of_rational(x: Fraction, limit: int) -> List[int]:
    out = []
    num, den = x.numerator, x.denominator
    while den and len(out) < limit:
        a, r = divmod(num, den)
        out.append(a)
        num, den = den, r
    return out


def common_prefix(lo: Fraction, hi: Fraction, limit: int) -> List[int]:
    """Partial quotients shared by every real in [lo, hi]."""
    a = _cf_of_rational(lo, limit + 2)
    b = _cf_of_rational(hi, limit + 2)
    out = []
    for i, (x, y) in enumerate(zip(a, b)):
        # a quotient is safe only when neither endpoint terminates at it
        if x != y or i + 1 >= len(a) or i + 1 >= len(b):
            break
        out.append(x)
        if len(out) == limit:
            break
    return out


def expand(source: er.Source, count: int, prec: int = 512,
           ceiling: int = er.DEFAULT_CEILING) -> ContinuedFraction:
    """Quotients a_0..a_count of the real enclosed by ``source``."""
    if count < 0:
        raise ValueError("count must be nonnegative")
    start = prec
    while prec <= ceiling:
        x = source(prec)
        qs = common_prefix(x.lower, x.upper, count + 1)
        if len(qs) == count + 1:
            return ContinuedFraction(tuple(qs), source, prec, start, ceiling)
        prec *= 2
    raise PrecisionError(f"could not certify {count + 1} partial quotients below {ceiling} bits")


def convergent(cf: ContinuedFraction, k: int) -> Convergent:
    if k < 0 or k > cf.certified_upto:
        raise IndexError(f"convergent {k} is beyond the certified range 0..{cf.certified_upto}")
    return cf.convergents()[k]


def first_q_above(cf: ContinuedFraction, threshold: int) -> Tuple[Convergent, ContinuedFraction]:
    """Least-index convergent with q_k > threshold, extending on demand."""
    if threshold < 1:
        raise ValueError("threshold must be positive")
    while True:
        for c in cf.convergents():
            if c.q > threshold:
                return c, cf
        cf = cf.extend(cf.certified_upto + 16)


def index_covering(cf: ContinuedFraction, bound: int) -> Tuple[int, ContinuedFraction]:
    """Smallest K with q_K > bound (so every y <= bound satisfies y < q_K)."""
    c, cf = first_q_above(cf, bound)
    return c.index, cf


def max_quotient(cf: ContinuedFraction, upto: int) -> int:
    return max(cf.quotients[: upto + 1])


def legendre_gap_bound(a_max_quot: int, a_max: int, numerator_const,
                       prec: int = er.DEFAULT_PREC):
    """Largest g with alpha^g < numerator_const*(a_M + 2)*a_max.

    Returns ``(g, threshold)``; both ``alpha^g < threshold`` and
    ``alpha^(g+1) >= threshold`` are certified.
    """
    threshold = PrecReal.exact(Fraction(numerator_const) * (a_max_quot + 2) * a_max, prec)
    ratio = er.ln(threshold) / er.const_eval("log_alpha", prec)
    g = ratio.floor()
    if g is None:
        raise PrecisionError("gap bound sits on an integer; raise precision")
    if Fraction(g) == ratio.lower:
        g -= 1
    return g, threshold


def legendre_lower_verified(cf: ContinuedFraction, x: er.Source, a_max_quot: int,
                            upto: int, prec: int) -> bool:
    """|q_k x - p_k| > 1/((a_M + 2) q_k) for every k < upto."""
    xv = x(prec)
    for c in cf.convergents()[: upto]:
        if c.q == 0:
            continue
        lhs = abs(xv * c.q - c.p)
        rhs = PrecReal.exact(Fraction(1, (a_max_quot + 2) * c.q), prec)
        if lhs.lower <= rhs.upper:
            return False
    return True
