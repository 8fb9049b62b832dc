"""Heights, two- and three-logarithm lower bounds, and the crude bounds
on (n, m, a) for L_n + L_m = p^a with n > m and n above the search floor.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional, Sequence, Tuple, Union

from . import exactreal as er
from .errors import DomainError, PrecisionError
from .exactreal import PrecReal

Q = Fraction


# heights ------------------------------------------------------------------

@dataclass(frozen=True)
class AlgebraicNumberDesc:
    minpoly_coeffs: Tuple[int, ...]
    conjugate_moduli: Tuple[er.Source, ...]

    def __post_init__(self):
        if not self.minpoly_coeffs or self.minpoly_coeffs[0] == 0:
            raise ValueError("leading coefficient must be nonzero")
        if len(self.conjugate_moduli) != self.degree:
            raise ValueError("need one conjugate modulus per root")

    @property
    def degree(self) -> int:
        return len(self.minpoly_coeffs) - 1


def rational_integer(k: int) -> AlgebraicNumberDesc:
    return AlgebraicNumberDesc((1, -k), (lambda prec: PrecReal.exact(abs(k), prec),))


def golden_ratio() -> AlgebraicNumberDesc:
    return AlgebraicNumberDesc(
        (1, -1, -1),
        (lambda prec: er.const_eval("alpha", prec),
         lambda prec: abs(er.const_eval("beta", prec))),
    )


def _log_max1(x: PrecReal) -> PrecReal:
    if x.lower >= 1:
        return er.ln(x)
    if x.upper <= 1:
        return PrecReal.exact(0, x.prec)
    top = er.ln(PrecReal.exact(x.upper, x.prec))
    return PrecReal.from_bounds(Q(0), top.upper, x.prec)


def height(desc: AlgebraicNumberDesc, prec: int = er.DEFAULT_PREC) -> PrecReal:
    total = er.ln(PrecReal.exact(abs(desc.minpoly_coeffs[0]), prec))
    for modulus in desc.conjugate_moduli:
        total = total + _log_max1(modulus(prec))
    return total / desc.degree


def height_combine(rule: str, h_inputs: Sequence[PrecReal], s: int = 1,
                   prec: int = er.DEFAULT_PREC) -> PrecReal:
    """Upper bound for the height of a sum, product, or power."""
    if rule == "power":
        (h,) = h_inputs
        return h * abs(s) if s else PrecReal.exact(0, h.prec)
    total = PrecReal.exact(0, prec)
    for h in h_inputs:
        total = total + h
    if rule == "sum":
        return total + er.const_eval("log2", prec) * (len(h_inputs) - 1)
    if rule == "product":
        return total
    raise ValueError(f"unknown rule {rule!r}")


def ball_max(*xs: PrecReal) -> PrecReal:
    """Enclosure of max over the given balls."""
    prec = max(x.prec for x in xs)
    lo = max(x.lower for x in xs)
    hi = max(x.upper for x in xs)
    for x in xs:
        if x.lower >= max(y.upper for y in xs if y is not x):
            return x
    return PrecReal.from_bounds(lo, hi, prec)


# lower bounds for linear forms ----------------------------------------------

LMN_CONSTANT = Q("30.9")


@dataclass(frozen=True)
class LmnInstance:
    b1: int
    b2: int
    D: int
    logA1: Union[PrecReal, Fraction]
    logA2: Union[PrecReal, Fraction]
    log_gamma1: Optional[PrecReal] = None
    log_gamma2: Optional[PrecReal] = None

    def __post_init__(self):
        if self.b1 < 1 or self.b2 < 1:
            raise ValueError("b1, b2 must be positive")
        if Q(_val(self.logA1).lower) <= 0 or Q(_val(self.logA2).lower) <= 0:
            raise ValueError("log A_i must be positive")


def _val(x, prec=er.DEFAULT_PREC) -> PrecReal:
    return x if isinstance(x, PrecReal) else PrecReal.exact(x, prec)


def lmn_bprime(inst: LmnInstance, prec: int = er.DEFAULT_PREC) -> PrecReal:
    la1, la2 = _val(inst.logA1, prec), _val(inst.logA2, prec)
    return PrecReal.exact(inst.b1, prec) / (la2 * inst.D) + PrecReal.exact(inst.b2, prec) / (la1 * inst.D)


def lmn_max_term(inst: LmnInstance, prec: int = er.DEFAULT_PREC) -> PrecReal:
    return ball_max(er.ln(lmn_bprime(inst, prec)),
                    PrecReal.exact(Q(21, inst.D), prec),
                    PrecReal.exact(Q(1, 2), prec))


def lmn_lower_bound(inst: LmnInstance, prec: int = er.DEFAULT_PREC) -> PrecReal:
    """Lower bound for log|b2 log g2 - b1 log g1| (two logarithms)."""
    mx = lmn_max_term(inst, prec)
    coeff = PrecReal.exact(LMN_CONSTANT * inst.D ** 4, prec)
    return -(coeff * mx * mx * _val(inst.logA1, prec) * _val(inst.logA2, prec))


def lmn_validate(inst: LmnInstance, h1: PrecReal, h2: PrecReal) -> bool:
    """Check log A_i >= max{h_i, |log g_i|/D, 1/D} with certified comparisons."""
    for logA, h, lg in ((inst.logA1, h1, inst.log_gamma1), (inst.logA2, h2, inst.log_gamma2)):
        la = _val(logA, h.prec)
        needs = [h, PrecReal.exact(Q(1, inst.D), h.prec)]
        if lg is not None:
            needs.append(abs(lg) / inst.D)
        if any(la.lower < x.upper for x in needs):
            return False
    return True


@dataclass(frozen=True)
class MatveevInstance:
    l: int
    D: int
    A: Tuple[Union[PrecReal, Fraction], ...]
    B: Union[PrecReal, Fraction, int]
    real_field: bool = True

    def __post_init__(self):
        if self.l < 1 or len(self.A) != self.l:
            raise ValueError("need l >= 1 and one A_j per logarithm")
        if any(_val(a).lower < Q("0.16") for a in self.A):
            raise ValueError("every A_j must be at least 0.16")


def matveev_constant(l: int, D: int, real_field: bool = True,
                     prec: int = er.DEFAULT_PREC) -> PrecReal:
    """The factor depending only on l and D (everything but prod A_j and 1 + log B)."""
    if real_field:
        head, k, e = Q(7, 5) * 30 ** (l + 3), l, 9
    else:
        head, k, e = Q(3) * 30 ** (l + 4), l + 1, 11
    # k ** (e/2)
    kpow = PrecReal.exact(k ** (e // 2), prec) * er.sqrt(PrecReal.exact(k, prec))
    one_log_d = er.ln(PrecReal.exact(D, prec)) + 1
    return PrecReal.exact(head * D ** 2, prec) * kpow * one_log_d


def matveev_lower_bound(inst: MatveevInstance, prec: int = er.DEFAULT_PREC) -> PrecReal:
    c = matveev_constant(inst.l, inst.D, inst.real_field, prec)
    prod = PrecReal.exact(1, prec)
    for a in inst.A:
        prod = prod * _val(a, prec)
    one_log_b = er.ln(_val(inst.B, prec)) + 1
    return -(c * prod * one_log_b)


# multiplicative independence ----------------------------------------------------

def _factor(k: int) -> dict:
    out, d = {}, 2
    while d * d <= k:
        while k % d == 0:
            out[d] = out.get(d, 0) + 1
            k //= d
        d += 1
    if k > 1:
        out[k] = out.get(k, 0) + 1
    return out


def integers_independent(x: int, y: int) -> bool:
    """x, y > 1 are multiplicatively independent iff their exponent vectors are."""
    fx, fy = _factor(abs(x)), _factor(abs(y))
    primes = sorted(set(fx) | set(fy))
    u = [fx.get(q, 0) for q in primes]
    v = [fy.get(q, 0) for q in primes]
    if not any(u) or not any(v):
        return False
    return any(u[i] * v[j] - u[j] * v[i] for i in range(len(u)) for j in range(i + 1, len(u)))


def golden_norm() -> int:
    # norm of a root of X^2 - X - 1 is the constant term (degree is even)
    _, _, c0 = golden_ratio().minpoly_coeffs
    return c0


def multiplicative_independence_check(p: int) -> bool:
    """alpha and p are independent: alpha^x = p^y forces (-1)^x = p^(2y)."""
    if p < 2:
        raise ValueError("p must be >= 2")
    unit = abs(golden_norm()) == 1
    # p^(2y) = +-1 only for y = 0, then alpha^x = 1 with alpha > 1 gives x = 0
    return unit and p ** 2 != 1


# crude bounds -------------------------------------------------------------------

def ceil_tenth(x: PrecReal) -> Fraction:
    return Q(math.ceil(x.upper * 10), 10)


@dataclass
class CrudeBounds:
    p: int
    n_floor: int
    a_coeff: PrecReal                 # c1 = log 2 / log p
    logA_alpha: Fraction              # LMN log A for alpha
    logA_p: Fraction                  # LMN log A for p
    bprime_coeff: PrecReal            # b' < bprime_coeff * n
    lmn_aggregate: PrecReal           # 30.9 * D^4 * logA1 * logA2
    gap_coeff: PrecReal               # (n-m) log alpha < gap_coeff * max^2
    matveev_A: Tuple[Fraction, Fraction]
    matveev_C: PrecReal
    log_guard: PrecReal               # 1 + log(n+1) <= log_guard * log n
    three_log_coeff: PrecReal
    combined_coeff: PrecReal
    branch_const: PrecReal            # n < branch_const * log n in the 21/2 branch
    branch_const_bound: int
    branch_log_bound: int
    n_upper: int
    log_alpha: PrecReal
    checks: dict = field(default_factory=dict)

    def gap_bound_fn(self, n: int) -> PrecReal:
        prec = self.gap_coeff.prec
        x = _max_log2n(n, prec)
        return self.gap_coeff * x * x / self.log_alpha


def _max_log2n(n: int, prec: int) -> PrecReal:
    return ball_max(er.ln(PrecReal.exact(2 * n, prec)), PrecReal.exact(Q(21, 2), prec))


def _fixed_point(c: float, f, start: float = math.e ** 2, tol: float = 1e-3) -> float:
    n = start
    for _ in range(10_000):
        nxt = c * f(n)
        if abs(nxt - n) <= tol * abs(nxt):
            return nxt
        n = nxt
    raise PrecisionError("fixed-point iteration did not converge")


def round_up_2sf(x) -> int:
    """Round up to two significant figures; exact for integers."""
    if isinstance(x, int):
        step = 10 ** max(len(str(x)) - 2, 0)
        return -(-x // step) * step
    e = int(math.floor(math.log10(x))) - 1
    return math.ceil(x / 10 ** e) * 10 ** e


def _certify_bound(coeff: PrecReal, f_ball, guess: int, prec: int) -> int:
    """Smallest 2-significant-figure N >= guess with coeff*f(N)/N certified <= 1."""
    n = guess
    for _ in range(200):
        ratio = coeff * f_ball(n, prec) / PrecReal.exact(n, prec)
        if ratio.upper <= 1:
            return n
        e = int(math.floor(math.log10(n))) - 1
        n += 10 ** e
    raise PrecisionError("could not certify the fixed-point bound")


def derive_crude_bounds(p: int, n_floor: int = 200, prec: int = er.DEFAULT_PREC) -> CrudeBounds:
    if n_floor < 200:
        raise DomainError("the crude bounds assume n > 200")
    one = lambda v: PrecReal.exact(v, prec)
    la = er.const_eval("log_alpha", prec)
    lp = er.const_eval("log_p", prec, p=p)
    l2 = er.const_eval("log2", prec)
    l3 = er.const_eval("log_p", prec, p=3)
    D = 2
    c1 = l2 / lp

    # two logarithms: gamma1 = alpha, gamma2 = p
    h_alpha = height(golden_ratio(), prec)
    h_p = height(rational_integer(p), prec)
    logA1 = max(ceil_tenth(h_alpha), ceil_tenth(la / D), Q(1, D))
    logA2 = max(ceil_tenth(h_p), ceil_tenth(lp / D), Q(1, D))
    inst = LmnInstance(1, 1, D, logA1, logA2, la, lp)
    valid = lmn_validate(inst, h_alpha, h_p)
    # b' = n/(D logA2) + a/(D logA1) with a < (n+2) c1 and n > n_floor
    nf = n_floor + 1
    bcoef = one(1) / (one(logA2) * D) + c1 * one(Q(nf + 2, nf)) / (one(logA1) * D)
    bprime_ok = bcoef.upper < 2
    lmn_agg = one(LMN_CONSTANT * D ** 4 * logA1 * logA2)
    max_sq_floor = one(Q(21, 2)) * one(Q(21, 2))
    gap_coeff = lmn_agg + l3 / max_sq_floor

    # three logarithms: eta = p, alpha, 1 + alpha^(m-n)
    A_p = ceil_tenth(ball_max(h_p * D, lp, one(Q("0.16"))))
    A_alpha = ceil_tenth(ball_max(h_alpha * D, la, one(Q("0.16"))))
    C = matveev_constant(3, D, True, prec)
    # 2h(1 + alpha^(m-n)) <= 2 log 2 + (n-m) log alpha <= 2 + (n-m) log alpha
    a3_ok = (l2 * 2).upper <= 2
    guard = (er.ln(one(nf + 1)) + 1) / er.ln(one(nf))
    three_log = C * one(A_p * A_alpha) * guard
    lead = one(2) + l3
    combined = (three_log * (lmn_agg + lead / max_sq_floor)
            + l2 / (er.ln(one(nf)) * max_sq_floor)) / la

    c = float(combined.upper)
    branch_const = combined * max_sq_floor
    guess_const = round_up_2sf(_fixed_point(float(branch_const.upper), math.log))
    branch_const_bound = _certify_bound(
        branch_const, lambda n, pr: er.ln(PrecReal.exact(n, pr)), guess_const, prec)
    f_log = lambda n: math.log(n) * math.log(2 * n) ** 2
    guess_log = round_up_2sf(_fixed_point(c, f_log))

    def f_full(n, pr):
        x = _max_log2n(n, pr)
        return er.ln(PrecReal.exact(n, pr)) * x * x

    n_upper = _certify_bound(combined, f_full, max(guess_log, nf), prec)
    checks = {
        "lmn_parameters_valid": valid,
        "bprime_below_2n": bprime_ok,
        "matveev_A3_absorbs_2log2": a3_ok,
        "independent": multiplicative_independence_check(p),
        "ratio_decreasing_from": n_upper >= math.e ** 3,
    }
    return CrudeBounds(
        p=p, n_floor=n_floor, a_coeff=c1, logA_alpha=logA1, logA_p=logA2,
        bprime_coeff=bcoef, lmn_aggregate=lmn_agg, gap_coeff=gap_coeff,
        matveev_A=(A_p, A_alpha), matveev_C=C, log_guard=guard, three_log_coeff=three_log,
        combined_coeff=combined, branch_const=branch_const, branch_const_bound=branch_const_bound,
        branch_log_bound=guess_log, n_upper=n_upper, log_alpha=la, checks=checks,
    )


def solve_branch_bounds(coeff: Fraction) -> Tuple[int, int]:
    """Fixed-point solutions of n < coeff*110.25*log n and n < coeff*log n*log^2(2n)."""
    c = float(coeff)
    first = round_up_2sf(_fixed_point(c * 110.25, math.log))
    second = round_up_2sf(_fixed_point(c, lambda n: math.log(n) * math.log(2 * n) ** 2))
    return first, second
