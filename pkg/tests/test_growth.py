from fractions import Fraction

import pytest
from hypothesis import given
from hypothesis import strategies as st

from mtlambda.growth import (
    GrowthModel,
    Inconsistent,
    NotPotOrdinaryShape,
    NotStabilized,
    conjecture_cm_exponent,
    f,
    fit_growth,
    model_residuals,
    predicted_lambda_bsd,
    predicted_lambda_quad,
    predicted_lambda_ss,
    q,
    stable_lambda,
)
from mtlambda.mazur_tate import IwasawaInvariants

odd_primes = st.sampled_from([3, 5, 7, 11, 13, 17, 23, 31])


def q_alternating(n, p):
    # p^{n-1} - p^{n-2} + ... ending at p - 1 (n even) or p^2 - p (n odd)
    return sum((-1) ** k * p ** (n - 1 - k) for k in range(2 * (n // 2)))


def test_q_examples():
    assert q(2, 11) == 10
    assert q(3, 11) == 110
    assert (q(0, 11), q(1, 11)) == (0, 0)


@given(st.integers(0, 30), odd_primes)
def test_q_matches_alternating_sum_and_recurrence(n, p):
    assert q(n, p) == q_alternating(n, p)
    if n >= 2:
        assert q(n, p) == p * q(n - 1, p) + (p - 1) * (n % 2 == 0)


def test_f_examples():
    assert f(1, 23, 10) == 19
    assert f(2, 11, 4) == 37
    assert all(f(n, 7, 0) == 0 for n in range(1, 6))


@given(st.integers(1, 12), odd_primes, st.integers(0, 11))
def test_f_telescopes(n, p, d):
    assert sum(f(k, p, d) for k in range(1, n + 1)) == (p ** n * d) // 12 - d // 12
    if (p ** (n - 1) * (p - 1) * d) % 12 == 0:
        assert f(n, p, d) == (p - 1) * d * p ** (n - 1) // 12


def test_predicted_examples():
    assert predicted_lambda_quad(7, 2, 0) == 21
    assert predicted_lambda_quad(11, 1, 3) == 8
    assert predicted_lambda_ss(3, 2, 0, 0) == 5
    assert predicted_lambda_bsd(13, 1, 6, 0) == 6
    assert predicted_lambda_bsd(7, 1, 4, 5) == 7
    with pytest.raises(NotPotOrdinaryShape):
        predicted_lambda_bsd(5, 1, 1, 0)


@given(st.integers(2, 15), odd_primes, st.integers(0, 50))
def test_quad_differences(n, p, lam):
    diff = predicted_lambda_quad(p, n, lam) - predicted_lambda_quad(p, n - 1, lam)
    assert 2 * diff == (p - 1) ** 2 * p ** (n - 2)


@given(st.integers(1, 15), odd_primes, st.integers(0, 50))
def test_bsd_equals_quad_at_d6(n, p, lam):
    assert predicted_lambda_bsd(p, n, 6, lam) == predicted_lambda_quad(p, n, lam)


@given(st.integers(2, 15), odd_primes, st.integers(0, 20), st.integers(0, 20))
def test_ss_parity_and_differences(n, p, lp, lm):
    a = predicted_lambda_ss(p, n, lp, lm)
    b = predicted_lambda_ss(p, n - 1, lp, lm)
    sel = (lm - lp) if n % 2 else (lp - lm)
    expected = (p - 1) * (p ** (n - 1) - p ** (n - 2)) // 2 + q(n, p) - q(n - 1, p) + sel
    assert a - b == expected
    assert predicted_lambda_ss(p, n, lp + 1, lm) - a == (n % 2 == 0)


def test_fit_examples():
    m = fit_growth([(n, 7 * 11 ** (n - 1)) for n in range(1, 5)], 11)
    assert (m.a, m.b, m.c_even, m.c_odd) == (7, 0, 0, 0)
    pts = [(n, 4 * 11 ** (n - 1) + 3 * q(n - 1, 11) + (3 if n % 2 == 0 else 1)) for n in range(1, 5)]
    m = fit_growth(pts, 11)
    assert (m.a, m.b, m.c_even, m.c_odd, m.index_convention) == (4, 3, 3, 1, "q_{n-1}")


def test_fit_needs_data():
    with pytest.raises(ValueError):
        fit_growth([(1, 1), (2, 3), (3, 5)], 5)
    with pytest.raises(ValueError):
        fit_growth([(1, 1), (3, 3), (5, 5), (7, 7)], 5)


def test_fit_inconsistent():
    with pytest.raises(Inconsistent) as err:
        fit_growth([(1, 1), (2, 1), (3, 1), (4, 1), (5, 2)], 3)
    assert err.value.residuals is not None


@given(odd_primes, st.integers(-20, 20), st.integers(-20, 20), st.integers(-20, 20), st.integers(-20, 20),
       st.sampled_from(["q_{n-1}", "q_n"]), st.integers(4, 7))
def test_fit_recovers_synthetic_models(p, a, b, ce, co, conv, count):
    truth = GrowthModel(p, Fraction(a), Fraction(b), Fraction(ce), Fraction(co), conv)
    pts = [(n, truth.predict(n)) for n in range(1, count + 1)]
    m = fit_growth(pts, p)
    assert model_residuals(m, pts) == {}
    # the recovered model agrees with the truth beyond the fitted range too
    for n in range(count + 1, count + 4):
        assert m.predict(n) == truth.predict(n)
    assert 0 <= m.b < p + 1


@given(odd_primes, st.integers(0, 20), st.integers(0, 10), st.integers(0, 5), st.integers(0, 5))
def test_fit_with_pinned_a(p, a, b, ce, co):
    truth = GrowthModel(p, Fraction(a), Fraction(b), Fraction(ce), Fraction(co))
    pts = [(n, truth.predict(n)) for n in range(1, 4)]
    m = fit_growth(pts, p, a=a)
    assert m.a == a and model_residuals(m, pts) == {}


def test_stable_lambda():
    assert stable_lambda([3, 3]) == 3
    assert stable_lambda([5, 2, 2]) == 2
    with pytest.raises(NotStabilized):
        stable_lambda([2, 3])
    inv = [IwasawaInvariants(0, 4, 32, True), IwasawaInvariants(1, 4, 32, True)]
    assert stable_lambda(inv) == 4
    with pytest.raises(NotStabilized):
        stable_lambda([IwasawaInvariants(0, 4, 32, True), IwasawaInvariants(None, None, 32, False)])


def test_conjecture_examples():
    assert conjecture_cm_exponent(0, (0, 0), 0, 1, 5) == 0
    assert conjecture_cm_exponent(4, (2, 9), 7, 0, 5) == 11
    assert conjecture_cm_exponent(1, (2, 9), 0, 3, 5) == 125 + (q(3, 5) + 9) * 3


@given(st.integers(0, 50), st.integers(0, 9), st.integers(0, 9), st.integers(0, 9), st.integers(0, 8), odd_primes)
def test_conjecture_monotone_in_m(M, lp, lm, nu, n, p):
    assert conjecture_cm_exponent(M + 1, (lp, lm), nu, n, p) > conjecture_cm_exponent(M, (lp, lm), nu, n, p)
