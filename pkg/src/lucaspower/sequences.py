"""Binary recurrences A_n, B_n with A_{n+2} = a*A_{n+1} + A_n.

``A`` starts 0, 1 and ``B`` starts 2, a; with a = 1 these are the Fibonacci
and Lucas numbers.  Everything here is exact integer arithmetic except
:func:`binet_residual` and :func:`lucas_growth_check`, which use balls.
"""

from __future__ import annotations

import enum
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from typing import Iterable, List, NamedTuple, Optional

from . import exactreal as er


class Kind(enum.Enum):
    FIBONACCI = "fibonacci"
    LUCAS = "lucas"


@dataclass(frozen=True)
class RecurrenceSpec:
    kind: Kind
    a_param: int = 1

    def __post_init__(self):
        if self.a_param < 1:
            raise ValueError("a_param must be >= 1")

    @property
    def label(self) -> str:
        base = "F" if self.kind is Kind.FIBONACCI else "L"
        return base if self.a_param == 1 else f"{base}[a={self.a_param}]"


LUCAS = RecurrenceSpec(Kind.LUCAS)
FIBONACCI = RecurrenceSpec(Kind.FIBONACCI)


class SolutionTriple(NamedTuple):
    n: int
    m: int
    a_exp: int

    def holds(self, spec: RecurrenceSpec, p: int) -> bool:
        return self.n >= self.m >= 0 and term(spec, self.n) + term(spec, self.m) == p ** self.a_exp


def _seeds(spec: RecurrenceSpec):
    return (0, 1) if spec.kind is Kind.FIBONACCI else (2, spec.a_param)


def terms(spec: RecurrenceSpec, count: int) -> List[int]:
    """U_0 .. U_{count-1} by the recurrence."""
    u0, u1 = _seeds(spec)
    out = []
    for _ in range(count):
        out.append(u0)
        u0, u1 = u1, spec.a_param * u1 + u0
    return out


def term_iterative(spec: RecurrenceSpec, n: int) -> int:
    u0, u1 = _seeds(spec)
    for _ in range(n):
        u0, u1 = u1, spec.a_param * u1 + u0
    return u0


def _doubling(a: int, n: int):
    # returns (A_n, A_{n+1})
    if n == 0:
        return 0, 1
    x, y = _doubling(a, n >> 1)
    even = x * (2 * y - a * x)
    odd = x * x + y * y
    if n & 1:
        return odd, a * odd + even
    return even, odd


def term(spec: RecurrenceSpec, n: int) -> int:
    """Exact U_n by fast doubling."""
    if n < 0:
        raise ValueError("index must be nonnegative")
    x, y = _doubling(spec.a_param, n)
    if spec.kind is Kind.FIBONACCI:
        return x
    return 2 * y - spec.a_param * x


def binet_residual(n: int, prec: int = er.DEFAULT_PREC) -> er.PrecReal:
    """Enclosure of L_n - alpha^n - beta^n."""
    if n < 0:
        raise ValueError("index must be nonnegative")
    # alpha^n grows by n*log2(alpha) bits; keep the ball tight enough
    work = prec + int(0.7 * n) + 16
    a = er.const_eval("alpha", work)
    b = er.const_eval("beta", work)
    return er.PrecReal.exact(term(LUCAS, n), work) - er.pow_int(a, n) - er.pow_int(b, n)


def lucas_growth_check(n: int, prec: int = er.DEFAULT_PREC,
                       ceiling: int = er.DEFAULT_CEILING) -> bool:
    """Certify 0.94*alpha^n < L_n < 1.15*alpha^n for n >= 2."""
    if n < 2:
        raise ValueError("bounds are stated for n >= 2")
    ln_ = term(LUCAS, n)

    def power(p):
        return er.pow_int(er.const_eval("alpha", p + n), n)

    lower = er.certify_less(lambda p: power(p) * er.PrecReal.exact("0.94", p),
                            lambda p: er.PrecReal.exact(ln_, p), prec, ceiling, "lower bound")
    upper = er.certify_less(lambda p: er.PrecReal.exact(ln_, p),
                            lambda p: power(p) * er.PrecReal.exact("1.15", p), prec, ceiling, "upper bound")
    return lower and upper


def as_prime_power(x: int, p: int) -> Optional[int]:
    if x <= 0:
        raise ValueError("x must be positive")
    k = 0
    while x % p == 0:
        x //= p
        k += 1
    return k if x == 1 else None


def doubled_term_excluded(spec: RecurrenceSpec, p: int, n: int) -> bool:
    """2*U_n = p^a is impossible for odd p once 2*U_n > 1, by parity."""
    return p % 2 == 1 and 2 * term(spec, n) > 1


def _search_rows(spec, p, values, rows, allow_equal, m_min, a_min):
    found = []
    for n in rows:
        top = n + 1 if allow_equal else n
        for m in range(m_min, top):
            s = values[n] + values[m]
            if s <= 0:
                continue
            a = as_prime_power(s, p)
            if a is not None and a >= a_min:
                found.append(SolutionTriple(n, m, a))
    return found


def search_solutions(spec: RecurrenceSpec, p: int, n_max: int, allow_equal: bool = False,
                     m_min: int = 0, a_min: int = 0, workers: int = 1) -> List[SolutionTriple]:
    """All (n, m, a) with m_min <= m < n <= n_max (m <= n if allow_equal)."""
    if n_max < 0:
        return []
    values = terms(spec, n_max + 1)
    rows: Iterable[int] = range(max(m_min, 0), n_max + 1)
    if workers > 1:
        chunks = [list(rows)[i::workers] for i in range(workers)]
        with ProcessPoolExecutor(workers) as pool:
            parts = pool.map(_search_rows, *zip(*[
                (spec, p, values, c, allow_equal, m_min, a_min) for c in chunks]))
            found = [t for part in parts for t in part]
    else:
        found = _search_rows(spec, p, values, rows, allow_equal, m_min, a_min)
    return sorted(set(found))
