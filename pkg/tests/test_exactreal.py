import random
from fractions import Fraction

import mpmath
import pytest
from hypothesis import given, settings, strategies as st

from lucaspower import exactreal as er
from lucaspower.errors import DomainError, PrecisionError
from lucaspower.exactreal import PrecReal, Sign
from lucaspower.sequences import LUCAS, term



@pytest.fixture(autouse=True, scope="module")
def mp_digits():
    with mpmath.workdps(120):
        yield

rationals = st.fractions(min_value=-10**6, max_value=10**6, max_denominator=10**6)


def mp(q: Fraction):
    return mpmath.mpf(q.numerator) / q.denominator


def encloses(ball: PrecReal, value) -> bool:
    lo, hi = ball.lower, ball.upper
    return mp(lo) <= value <= mp(hi)


def test_containment_random_rationals():
    rng = random.Random(1234)
    ops = ["add", "sub", "mul", "div", "ln", "exp", "sqrt"]
    violations = 0
    for _ in range(10_000):
        x = Fraction(rng.randint(-10**8, 10**8), rng.randint(1, 10**6))
        y = Fraction(rng.randint(-10**8, 10**8), rng.randint(1, 10**6)) or Fraction(1)
        prec = rng.choice([64, 128, 192, 333])
        op = rng.choice(ops)
        bx, by = PrecReal.exact(x, prec), PrecReal.exact(y, prec)
        if op == "add":
            got, want = bx + by, mp(x) + mp(y)
        elif op == "sub":
            got, want = bx - by, mp(x) - mp(y)
        elif op == "mul":
            got, want = bx * by, mp(x) * mp(y)
        elif op == "div":
            got, want = bx / by, mp(x) / mp(y)
        elif op == "ln":
            ax = abs(x) or Fraction(1)
            got, want = er.ln(PrecReal.exact(ax, prec)), mpmath.log(mp(ax))
        elif op == "exp":
            small = x / 10**6
            got, want = er.exp(PrecReal.exact(small, prec)), mpmath.exp(mp(small))
        else:
            got, want = er.sqrt(PrecReal.exact(abs(x), prec)), mpmath.sqrt(mp(abs(x)))
        violations += not encloses(got, want)
    assert violations == 0


@given(rationals, rationals)
def test_compare_antisymmetric(x, y):
    bx, by = PrecReal.exact(x), PrecReal.exact(y)
    a, b = er.compare(bx, by), er.compare(by, bx)
    if a is Sign.UNKNOWN:
        assert b is Sign.UNKNOWN
    else:
        assert a.value == -b.value


@given(rationals)
def test_exact_balls_hold_their_value(x):
    assert PrecReal.exact(x).contains(x)


@given(rationals, st.integers(0, 7))
def test_pow_int_contains_exact_power(x, k):
    assert er.pow_int(PrecReal.exact(x, 128), k).contains(x ** k)


def test_alpha_times_beta_is_minus_one():
    prod = er.const_eval("alpha", 256) * er.const_eval("beta", 256)
    assert prod.contains(-1)
    assert prod.rad < Fraction(1, 2 ** 240)


def test_log_alpha_against_mpmath():
    la = er.const_eval("log_alpha", 256)
    assert encloses(la, mpmath.log((1 + mpmath.sqrt(5)) / 2))
    assert er.to_decimal(la, 10)[0].startswith("0.48121182")


def test_radius_shrinks_with_precision():
    radii = [er.const_eval("log_p", prec, p=3).rad for prec in (64, 128, 256, 512, 1024)]
    assert all(b < a for a, b in zip(radii, radii[1:]))


def test_alpha_power_111_brackets_lucas():
    a111 = er.pow_int(er.const_eval("alpha", 256), 111)
    l111 = term(LUCAS, 111)
    # alpha^111 = L_111 - beta^111 with -1e-23 < beta^111 < 0
    assert l111 < a111.lower and a111.upper < l111 + Fraction(1, 10**22)
    assert abs(float(a111) - 1.5763e23) < 1e20


def test_division_by_ball_straddling_zero():
    with pytest.raises(DomainError):
        PrecReal.exact(1) / PrecReal.from_bounds(Fraction(-1, 10), Fraction(1, 10), 64)


def test_log_of_nonpositive():
    with pytest.raises(DomainError):
        er.ln(PrecReal.exact(0))
    with pytest.raises(DomainError):
        er.ln(PrecReal.exact(-2))


def test_certify_reports_precision_exhaustion():
    # the sign of exactly zero can never be decided
    zero = lambda prec: er.const_eval("log_alpha", prec) - er.const_eval("log_alpha", prec)
    with pytest.raises(PrecisionError):
        er.certified_sign(zero, 64, 512)


def test_certify_less_decides_close_values():
    lhs = lambda prec: er.const_eval("log_p", prec, p=3) / er.const_eval("log_alpha", prec)
    rhs = lambda prec: PrecReal.exact(Fraction(2283, 1000), prec)
    # log3/log(alpha) = 2.28302...
    assert er.certify_less(rhs, lhs)


def test_negation_keeps_full_precision():
    x = PrecReal.exact(Fraction(27, 10), 192)
    assert (-x).contains(Fraction(-27, 10))
    assert abs(x - 3).contains(Fraction(3, 10))


def test_nearest_integer_distance():
    d, k = er.nearest_integer_distance(PrecReal.exact(Fraction(27, 10)))
    assert k == 3 and d.contains(Fraction(3, 10))
    d, k = er.nearest_integer_distance(PrecReal.exact(Fraction(5, 2)))
    assert d.contains(Fraction(1, 2))


def test_decimal_round_trip_is_outward():
    x = er.const_eval("sqrt5", 192)
    approx, err = er.to_decimal(x, 30)
    y = er.from_decimal(approx, err, 192)
    assert y.lower <= x.lower and x.upper <= y.upper


@settings(max_examples=50)
@given(st.integers(64, 600))
def test_sqrt5_squared_contains_five(prec):
    s = er.const_eval("sqrt5", prec)
    assert (s * s).contains(5)
