import time
from math import gcd
from fractions import Fraction

import mpmath
import pytest
from hypothesis import given, strategies as st

from lucaspower import cfrac
from lucaspower import exactreal as er
from lucaspower.errors import PrecisionError
from lucaspower.exactreal import PrecReal



@pytest.fixture(autouse=True, scope="module")
def mp_digits():
    with mpmath.workdps(300):
        yield

KAPPA = lambda prec: er.const_eval("log_p", prec, p=3) / er.const_eval("log_alpha", prec)
GOLDEN = lambda prec: er.const_eval("alpha", prec)
Q41 = 4977896525362041575
Q42 = 805929983250536127817


@pytest.fixture(scope="module")
def kappa_cf():
    return cfrac.expand(KAPPA, 60, 512)


def mp_quotients(x, count):
    out = []
    for _ in range(count):
        a = int(mpmath.floor(x))
        out.append(a)
        x = 1 / (x - a)
    return out


def test_golden_ratio_is_all_ones():
    assert cfrac.expand(GOLDEN, 5).quotients == (1,) * 6


def test_quotients_match_independent_oracle(kappa_cf):
    x = mpmath.log(3) / mpmath.log((1 + mpmath.sqrt(5)) / 2)
    assert list(kappa_cf.quotients) == mp_quotients(x, 61)
    assert kappa_cf.quotients[:15] == (2, 3, 1, 1, 6, 1, 49, 1, 2, 2, 1, 1, 2, 1, 2)


def test_reference_denominators_and_max_quotient(kappa_cf):
    t0 = time.perf_counter()
    cf = cfrac.expand(KAPPA, 42, 512)
    assert time.perf_counter() - t0 < 5
    assert cfrac.convergent(cf, 41).q == Q41
    assert cfrac.convergent(cf, 42).q == Q42
    assert cfrac.max_quotient(cf, 42) == 161
    assert cf.quotients.index(161) == 42


def test_determinant_identity(kappa_cf):
    convs = kappa_cf.convergents()
    assert convs[0].q == 1
    for k in range(1, len(convs)):
        a, b = convs[k - 1], convs[k]
        assert b.p * a.q - a.p * b.q == (-1) ** (k - 1)


def test_convergents_alternate_and_tighten(kappa_cf):
    x = KAPPA(1024)
    prev = None
    for c in kappa_cf.convergents()[:50]:
        err = x * c.q - c.p
        sign = err.sign()
        assert sign.value == (1 if c.index % 2 == 0 else -1)
        if prev is not None:
            assert abs(err).upper < prev.lower
        prev = abs(err)


def test_legendre_quality(kappa_cf):
    a_m = cfrac.max_quotient(kappa_cf, 42)
    assert cfrac.legendre_lower_verified(kappa_cf, KAPPA, a_m, 42, 1024)


def test_best_approximation_brute_force():
    x = KAPPA(256)
    cf = cfrac.expand(KAPPA, 20, 256)
    denoms = {c.q for c in cf.convergents()}
    best = None
    for q in range(1, 10_001):
        d, _ = er.nearest_integer_distance(x * q)
        if best is None or d.upper < best:
            # a strict record of ||q x|| is attained only at convergent denominators
            assert q in denoms
            best = d.lower


def test_legendre_criterion_on_rationals():
    # |x - p/q| < 1/(2q^2) forces p/q to be a convergent
    x = KAPPA(512)
    cf = cfrac.expand(KAPPA, 25, 512)
    convs = {(c.p, c.q) for c in cf.convergents()}
    for q in range(1, 3000):
        p = (x * q).floor_lower()
        for pp in (p, p + 1):
            if (abs(x - Fraction(pp, q)) * (2 * q * q)).upper < 1:
                g = gcd(pp, q)
                assert (pp // g, q // g) in convs


def test_first_q_above_extends(kappa_cf):
    short = cfrac.expand(KAPPA, 10, 512)
    c, longer = cfrac.first_q_above(short, 6 * 12 * 10 ** 19)
    assert c.q == Q42 and c.index == 42
    assert longer.certified_upto >= 42
    K, _ = cfrac.index_covering(kappa_cf, 12 * 10 ** 19)
    assert K == 42


def test_convergent_beyond_range():
    cf = cfrac.expand(GOLDEN, 5)
    with pytest.raises(IndexError):
        cfrac.convergent(cf, 6)


def test_uncertifiable_rational_limit():
    # a rational ends its expansion, so asking for more quotients fails
    third = lambda prec: PrecReal.exact(Fraction(1, 3), prec)
    with pytest.raises(PrecisionError):
        cfrac.expand(third, 5, 64, 256)


@given(st.fractions(min_value=Fraction(1, 100), max_value=100, max_denominator=10**6),
       st.fractions(min_value=0, max_value=Fraction(1, 10**8), max_denominator=10**12))
def test_common_prefix_is_shared(lo, width):
    hi = lo + width
    prefix = cfrac.common_prefix(lo, hi, 30)
    mid = (lo + hi) / 2
    assert cfrac._cf_of_rational(mid, len(prefix)) == prefix


def test_gap_bound_canonical():
    g, threshold = cfrac.legendre_gap_bound(161, 12 * 10 ** 19, 7)
    assert g == 110
    assert threshold.contains(Fraction("1.3692e23"))
    la = er.const_eval("log_alpha", 192)
    assert (la * 110).upper < er.ln(threshold).lower < (la * 111).lower


def test_gap_bound_floor_convention():
    # alpha^2 = 2.618 < 3 < alpha^3
    g, _ = cfrac.legendre_gap_bound(Fraction(1), Fraction(1), Fraction(1))
    assert g == 2
