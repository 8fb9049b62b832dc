import time

import pytest
from hypothesis import given, strategies as st

from lucaspower import sequences as sq
from lucaspower.sequences import FIBONACCI, LUCAS, RecurrenceSpec, SolutionTriple, Kind

LUCAS_P2 = {(0, 0, 2), (1, 1, 1), (2, 1, 2), (3, 3, 3), (4, 1, 3), (7, 2, 5)}
# positive indices and exponent; F4+F1 and F4+F2 are both 5
FIB_P2 = {(1, 1, 1), (2, 1, 1), (2, 2, 1), (3, 3, 2), (4, 1, 2), (4, 2, 2), (5, 4, 3),
          (6, 6, 4), (7, 4, 4)}


def test_first_terms():
    assert sq.terms(LUCAS, 10) == [2, 1, 3, 4, 7, 11, 18, 29, 47, 76]
    assert sq.terms(FIBONACCI, 10) == [0, 1, 1, 2, 3, 5, 8, 13, 21, 34]


def test_doubling_matches_iteration():
    lucas, fib = sq.terms(LUCAS, 10_001), sq.terms(FIBONACCI, 10_001)
    for n in list(range(0, 300)) + [997, 4096, 9999, 10_000]:
        assert sq.term(LUCAS, n) == lucas[n]
        assert sq.term(FIBONACCI, n) == fib[n]


@given(st.integers(1, 3000))
def test_lucas_fibonacci_identity(n):
    assert sq.term(LUCAS, n) == sq.term(FIBONACCI, n - 1) + sq.term(FIBONACCI, n + 1)


@given(st.integers(1, 5), st.integers(0, 400))
def test_general_recurrence_doubling(a, n):
    for kind in Kind:
        spec = RecurrenceSpec(kind, a)
        assert sq.term(spec, n) == sq.term_iterative(spec, n)


@pytest.mark.parametrize("n", [0, 1, 5, 50, 500])
def test_binet_residual_contains_zero(n):
    assert sq.binet_residual(n).contains(0)


def test_lucas_growth_bounds_2_to_1000():
    assert all(sq.lucas_growth_check(n) for n in range(2, 1001))


def test_lucas_growth_rejects_small_index():
    with pytest.raises(ValueError):
        sq.lucas_growth_check(1)


def test_prime_power_detection():
    assert sq.as_prime_power(1, 3) == 0
    assert sq.as_prime_power(81, 3) == 4
    assert sq.as_prime_power(82, 3) is None
    with pytest.raises(ValueError):
        sq.as_prime_power(0, 3)


def test_lucas_p3_search():
    t0 = time.perf_counter()
    sols = sq.search_solutions(LUCAS, 3, 200)
    assert time.perf_counter() - t0 < 1.0
    assert sols == [SolutionTriple(1, 0, 1), SolutionTriple(4, 0, 2)]
    assert all(s.holds(LUCAS, 3) for s in sols)


def test_lucas_p2_search():
    assert set(sq.search_solutions(LUCAS, 2, 200, allow_equal=True)) == LUCAS_P2


def test_fibonacci_p2_search():
    got = sq.search_solutions(FIBONACCI, 2, 200, allow_equal=True, m_min=1, a_min=1)
    assert set(got) == FIB_P2


def test_search_empty_range():
    assert sq.search_solutions(LUCAS, 3, 0) == []
    assert sq.search_solutions(LUCAS, 3, -1) == []


def test_search_parallel_matches_serial():
    serial = sq.search_solutions(LUCAS, 2, 120, allow_equal=True)
    assert sq.search_solutions(LUCAS, 2, 120, allow_equal=True, workers=3) == serial


def test_doubled_term_parity():
    assert all(sq.doubled_term_excluded(LUCAS, 3, n) for n in range(300))
    assert not sq.doubled_term_excluded(LUCAS, 2, 0)
