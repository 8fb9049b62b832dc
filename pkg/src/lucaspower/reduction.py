"""Baker-Davenport reduction in the Dujella-Petho form, and the two case
sweeps over the gap u = n - m that shrink the linear-forms bound on n.

For a gap u the linear form involves rho(u) = 1 + alpha^(-u).  When rho(u)
is exactly p^s * alpha^t the shift mu is an integer combination of kappa and
1, epsilon can never be positive, and the gap is closed instead by the
homogeneous convergent bound |x*kappa - y| > 1/((a_M + 2) x).
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import List, Optional, Sequence, Tuple

from . import exactreal as er
from .cfrac import ContinuedFraction, expand, first_q_above, index_covering, max_quotient
from .errors import PrecisionError, ReductionError
from .exactreal import PrecReal, Sign

RETRIES = 10


class CaseSign(enum.Enum):
    Z_POSITIVE = "z>0"
    Z_NEGATIVE = "z<0"


@dataclass(frozen=True)
class ReductionInstance:
    kappa: er.Source
    mu: er.Source
    A: er.Source
    B: er.Source
    M: int
    # (s, t) with mu = s*kappa + t exactly, when known
    mu_relation: Optional[Tuple[int, int]] = None
    variable: str = "m"

    def __post_init__(self):
        if self.M < 1:
            raise ValueError("M must be >= 1")


@dataclass
class ReductionResult:
    q_used: Optional[int]
    epsilon: Optional[PrecReal]
    reduced_bound: int
    attempts: List[Tuple[int, str]] = field(default_factory=list)
    method: str = "dujella-petho"
    a_max_quot: Optional[int] = None
    prec_used: int = 0


def constant(value) -> er.Source:
    value = Fraction(value)
    return lambda prec: PrecReal.exact(value, prec)


# the core lemma -----------------------------------------------------------------

def _epsilon(inst: ReductionInstance, q: int, prec: int) -> PrecReal:
    d_mu, _ = er.nearest_integer_distance(inst.mu(prec) * q)
    d_kappa, _ = er.nearest_integer_distance(inst.kappa(prec) * q)
    return d_mu - d_kappa * inst.M


def _bound_from(inst: ReductionInstance, q: int, eps: PrecReal, prec: int) -> int:
    val = er.ln(inst.A(prec) * q / PrecReal.from_bounds(eps.lower, eps.upper, prec)) / er.ln(inst.B(prec))
    return max(0, val.ceil_upper())


def dujella_petho(inst: ReductionInstance, cf: Optional[ContinuedFraction] = None,
                  prec: int = er.DEFAULT_PREC, ceiling: int = er.DEFAULT_CEILING,
                  retries: int = RETRIES) -> ReductionResult:
    """Reduce: no m in [reduced_bound + 1, M] solves 0 < m*kappa - n + mu < A*B^-m."""
    if inst.B(prec).lower <= 1 or inst.A(prec).lower <= 0:
        raise ValueError("need A > 0 and B > 1")
    if cf is None:
        cf = expand(inst.kappa, 40, max(prec, 256), ceiling)
    first, cf = first_q_above(cf, 6 * inst.M)
    if cf.certified_upto < first.index + retries:
        cf = cf.extend(first.index + retries)
    attempts = []
    for conv in cf.convergents()[first.index: first.index + retries]:
        q = conv.q
        status = "unknown"
        for p in er.precision_schedule(prec, ceiling):
            try:
                eps = _epsilon(inst, q, p)
            except er.DomainError:
                continue
            sign = eps.sign()
            if sign is Sign.POSITIVE:
                attempts.append((q, "positive"))
                return ReductionResult(q, eps, _bound_from(inst, q, eps, p), attempts,
                                       prec_used=p)
            if sign in (Sign.NEGATIVE, Sign.ZERO):
                status = "nonpositive"
                break
        attempts.append((q, status))
    raise ReductionError(
        f"no convergent with q > 6M gave a certified epsilon > 0 ({len(attempts)} tried)",
        attempts)


def homogeneous_bound(inst: ReductionInstance, cf: Optional[ContinuedFraction] = None,
                      prec: int = er.DEFAULT_PREC, ceiling: int = er.DEFAULT_CEILING) -> ReductionResult:
    """Close the case mu = s*kappa + t via the convergent lower bound."""
    if inst.mu_relation is None:
        raise ValueError("instance has no integer relation for mu")
    s, _ = inst.mu_relation
    if cf is None:
        cf = expand(inst.kappa, 40, max(prec, 256), ceiling)
    # every x = m + s with 1 <= x <= M + |s| lies below q_K
    K, cf = index_covering(cf, inst.M + abs(s))
    a_m = max_quotient(cf, K)
    A, B = inst.A(prec), inst.B(prec)
    # B^m / (m + s) is nondecreasing once (B - 1)(m + s) >= 1
    start = max(0, 1 - s, math.ceil((1 / (B - 1)).upper) - s)
    rhs_coeff = A * (a_m + 2)
    m = start
    while True:
        lhs = er.pow_int(B, m)
        if lhs.lower >= (rhs_coeff * (m + s)).upper:
            break
        m += 1
        if m > inst.M:
            raise ReductionError("homogeneous bound did not drop below M", [])
    return ReductionResult(None, None, m, [], method="homogeneous", a_max_quot=a_m, prec_used=prec)


def reduce_instance(inst: ReductionInstance, cf=None, prec=er.DEFAULT_PREC,
                    ceiling=er.DEFAULT_CEILING) -> ReductionResult:
    if inst.mu_relation is not None:
        return homogeneous_bound(inst, cf, prec, ceiling)
    return dujella_petho(inst, cf, prec, ceiling)


# exact arithmetic in Z[alpha], alpha^2 = alpha + 1 -----------------------------------

def _zmul(x, y):
    a, b = x
    c, d = y
    return (a * c + b * d, a * d + b * c + b * d)


def _zpow(k: int):
    # alpha^-1 = alpha - 1
    base = (0, 1) if k >= 0 else (-1, 1)
    out = (1, 0)
    for _ in range(abs(k)):
        out = _zmul(out, base)
    return out


def _norm(x) -> int:
    a, b = x
    return a * a + a * b - b * b


def rho_decomposition(gap: int, p: int) -> Optional[Tuple[int, int]]:
    """(s, t) with 1 + alpha^-gap = p^s * alpha^t exactly, or None."""
    x = _zpow(gap)
    num = (x[0] + 1, x[1])  # alpha^gap + 1
    norm = abs(_norm(num))
    s = 0
    while norm % (p * p) == 0:
        norm //= p * p
        s += 1
    if norm != 1:
        return None
    ps = p ** s
    if num[0] % ps or num[1] % ps:
        return None
    unit = (num[0] // ps, num[1] // ps)
    # unit > 0 is alpha^t for some t; F-coordinates grow so a short scan suffices
    for t in range(-2 * gap - 2, 2 * gap + 3):
        if _zpow(t) == unit:
            return s, t - gap
    return None


def build_case_instance(case_sign: CaseSign, gap: int, p: int, M: int) -> ReductionInstance:
    if gap < 1:
        raise ValueError("gap must be >= 1")

    def log_rho(prec):
        a = er.const_eval("alpha", prec)
        return er.ln(er.pow_int(a, -gap) + 1)

    la = lambda prec: er.const_eval("log_alpha", prec)
    lp = lambda prec: er.const_eval("log_p", prec, p=p)
    rel = rho_decomposition(gap, p)
    if case_sign is CaseSign.Z_POSITIVE:
        # 0 < a*kappa - n + mu < 5 alpha^-n, and n > a*kappa + mu - 1 gives
        # alpha^-n < alpha^(1-mu) p^-a
        kappa = lambda prec: lp(prec) / la(prec)
        mu = lambda prec: -log_rho(prec) / la(prec)
        A = lambda prec: er.exp((1 - mu(prec)) * la(prec)) * 5
        B = lambda prec: PrecReal.exact(p, prec)
        relation = None if rel is None else (-rel[0], -rel[1])
        return ReductionInstance(kappa, mu, A, B, M, relation, "a")
    kappa = lambda prec: la(prec) / lp(prec)
    mu = lambda prec: log_rho(prec) / lp(prec)
    A = constant(negative_case_A(p))
    B = lambda prec: er.const_eval("alpha", prec)
    relation = None if rel is None else (rel[1], rel[0])
    return ReductionInstance(kappa, mu, A, B, M, relation, "n")


def negative_case_A(p: int) -> Fraction:
    # 4/log p <= 4 when p >= 3
    if p >= 3:
        return Fraction(4)
    return Fraction(math.ceil(4 / math.log(p) * 10) + 1, 10)


@dataclass
class GapRecord:
    gap: int
    result: ReductionResult
    n_bound: int


@dataclass
class SweepResult:
    case_sign: CaseSign
    max_reduced_bound: int
    max_n_bound: int
    per_gap: List[GapRecord]


def n_bound_for(case_sign: CaseSign, inst: ReductionInstance, reduced: int, prec: int) -> int:
    if case_sign is CaseSign.Z_NEGATIVE:
        return reduced
    # n < a*kappa + mu with a <= reduced
    return math.floor((inst.kappa(prec) * reduced + inst.mu(prec)).upper)


def run_reduction_sweep(case_sign: CaseSign, gaps: Sequence[int], p: int, M: int,
                        prec: int = er.DEFAULT_PREC, ceiling: int = er.DEFAULT_CEILING) -> SweepResult:
    gaps = list(gaps)
    if not gaps:
        raise ValueError("empty gap range")
    first = build_case_instance(case_sign, gaps[0], p, M)
    cf = expand(first.kappa, 60, max(prec, 256), ceiling)
    records = []
    for g in gaps:
        inst = build_case_instance(case_sign, g, p, M)
        try:
            res = reduce_instance(inst, cf, prec, ceiling)
        except ReductionError as exc:
            err = ReductionError(f"gap {g}: {exc}", exc.attempts)
            err.gap = g
            raise err from exc
        except PrecisionError as exc:
            err = PrecisionError(f"gap {g}: {exc}")
            err.gap = g
            raise err from exc
        records.append(GapRecord(g, res, n_bound_for(case_sign, inst, res.reduced_bound, prec)))
    return SweepResult(case_sign, max(r.result.reduced_bound for r in records),
                       max(r.n_bound for r in records), records)
