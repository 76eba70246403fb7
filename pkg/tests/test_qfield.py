import random
from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from affine_rmatrix.qfield import (ONE, ZERO, CycloValue, InadmissibleOrder, LaurentPoly, NotDivisible,
                                   PoleAtRoot, RatQ, check_admissible, cyclotomic_poly, evaluate_at_root,
                                   is_regular_at_root, pochhammer_finite, poisson_limit_quotient,
                                   q_binomial_bracket, q_bracket, q_exponential_series, q_factorial_bracket)

q = RatQ.q_power(1)


def L(d):
    return LaurentPoly(d)


# ---------------------------------------------------------------- q-numbers
def test_q_bracket_small():
    assert q_bracket(0) == L({})
    assert q_bracket(1) == L({0: 1})
    assert q_bracket(2) == L({1: 1, -1: 1})
    with pytest.raises(ValueError):
        q_bracket(-1)


def test_q_binomial_examples():
    assert q_binomial_bracket(2, 1) == q_bracket(2)
    for m in range(6):
        assert q_binomial_bracket(m, 0) == L({0: 1})
    # brute force: [4]!/([2]![2]!) by exact rational division
    ratio = RatQ.from_laurent(q_factorial_bracket(4)) / RatQ.from_laurent(q_factorial_bracket(2) ** 2)
    assert RatQ.from_laurent(q_binomial_bracket(4, 2)) == ratio
    assert q_binomial_bracket(4, 2) == L({4: 1, 2: 1, 0: 2, -2: 1, -4: 1})
    with pytest.raises(ValueError):
        q_binomial_bracket(2, 3)


def _pascal(m, n):
    # [m,n] = q^-n [m-1,n] + q^(m-n) [m-1,n-1]
    if n == 0 or n == m:
        return L({0: 1})
    return L({-n: 1}) * _pascal(m - 1, n) + L({m - n: 1}) * _pascal(m - 1, n - 1)


@pytest.mark.parametrize("m", range(9))
def test_q_binomial_matches_pascal_recursion(m):
    for n in range(m + 1):
        assert q_binomial_bracket(m, n) == _pascal(m, n)


def test_pochhammer_finite():
    assert pochhammer_finite(q, 0) == ONE
    a = (q * q + RatQ(3)) / (q + ONE)
    assert pochhammer_finite(a, 1) == ONE - a
    assert pochhammer_finite(q, 2) == (ONE - q) * (ONE - q * q)
    with pytest.raises(ValueError):
        pochhammer_finite(q, -1)


def test_q_exponential_coefficients():
    c = q_exponential_series(4)
    assert c[0] == ONE and c[1] == ONE
    assert c[2] == ONE / (ONE + q * q)


@pytest.mark.parametrize("maxdeg", [1, 4, 8])
def test_q_exponential_inverts_pochhammer(maxdeg):
    # ((1-q^2) z; q^2)_inf = sum_n (-1)^n q^(n(n-1)) ((1-q^2) z)^n / (q^2;q^2)_n
    c = q_exponential_series(maxdeg)
    q2 = q * q
    p = []
    for n in range(maxdeg + 1):
        qq = ONE   # (q^2;q^2)_n
        for k in range(1, n + 1):
            qq = qq * (ONE - q2 ** k)
        p.append(RatQ(-1) ** n * q2 ** (n * (n - 1) // 2) * (ONE - q2) ** n / qq)
    for n in range(maxdeg + 1):
        s = ZERO
        for k in range(n + 1):
            s = s + c[k] * p[n - k]
        assert s == (ONE if n == 0 else ZERO)


# ---------------------------------------------------------------- RatQ canonical form
def _rand_laurent(rng, deg=4):
    return LaurentPoly({k: Fraction(rng.randint(-5, 5), rng.randint(1, 3)) for k in range(-2, deg)})


def _rand_ratq(rng):
    num = _rand_laurent(rng)
    den = _rand_laurent(rng)
    while den.is_zero():
        den = _rand_laurent(rng)
    return RatQ.from_laurent(num) / RatQ.from_laurent(den)


def test_canonical_idempotent_1000():
    rng = random.Random(7)
    for _ in range(1000):
        f = _rand_ratq(rng)
        once = f.canonicalize()
        assert once.canonicalize().canonical() == once.canonical()
        assert once == f


def test_canonical_unique_across_representations():
    rng = random.Random(3)
    for _ in range(100):
        f = _rand_ratq(rng)
        g = _rand_laurent(rng)
        if g.is_zero():
            continue
        h = RatQ.from_laurent(f.numerator * g) / RatQ.from_laurent(f.denominator * g)
        assert h.canonical() == f.canonical()


def test_string_roundtrip():
    rng = random.Random(11)
    for _ in range(50):
        f = _rand_ratq(rng)
        assert RatQ.from_string(f.to_string()) == f
        assert RatQ.from_string(str(f)) == f
    g = RatQ.from_string("(1*q^0+1/3*q^-1)/(1*q^2+3*q^0)")
    assert g == (ONE + q.inverse() / RatQ(3)) / (q * q + RatQ(3))


def test_zero_denominator_rejected():
    with pytest.raises(ZeroDivisionError):
        RatQ(1, 0)


# ---------------------------------------------------------------- roots of unity
def test_admissibility():
    assert check_admissible(1) == 1
    assert check_admissible(3) == 3
    for bad in (2, 4, 0, -3):
        with pytest.raises(InadmissibleOrder):
            check_admissible(bad)
    with pytest.raises(InadmissibleOrder):
        check_admissible(3, "A2")   # gcd(3, 3) != 1
    with pytest.raises(InadmissibleOrder):
        check_admissible(9, "G2")
    assert check_admissible(5, "G2") == 5


def test_regularity_examples():
    assert is_regular_at_root(q, 3)
    assert not is_regular_at_root(ONE / (q * q + q + ONE), 3)
    assert is_regular_at_root(ONE / (q + q.inverse()), 3)
    with pytest.raises(InadmissibleOrder):
        is_regular_at_root(q, 2)


def test_evaluation_examples():
    assert evaluate_at_root(q * q + q + ONE, 3).is_zero()
    for ell in (1, 3, 5, 7):
        assert evaluate_at_root(ONE, ell) == CycloValue.rational(ell, 1)
    assert evaluate_at_root(q + q.inverse(), 1) == CycloValue.rational(1, 2)
    with pytest.raises(PoleAtRoot):
        evaluate_at_root(ONE / (q * q + q + ONE), 3)


def test_cyclotomic_poly():
    assert list(cyclotomic_poly(3).coeffs()) == [1, 1, 1]
    e = CycloValue.eps_power(5, 1)
    assert (e ** 5) == CycloValue.rational(5, 1)
    assert e ** 4 * e == CycloValue.rational(5, 1)
    d = e.to_json()
    assert CycloValue.from_json(d) == e


def test_poisson_limit_quotient():
    assert poisson_limit_quotient(q - ONE) == CycloValue.rational(1, 1)
    assert poisson_limit_quotient(q * q - ONE) == CycloValue.rational(1, 2)
    assert poisson_limit_quotient(q - q.inverse()) == CycloValue.rational(1, 2)
    with pytest.raises(NotDivisible):
        poisson_limit_quotient(q)


# ---------------------------------------------------------------- properties
small = st.integers(-4, 4)
laurents = st.dictionaries(st.integers(-3, 3), small, max_size=4).map(LaurentPoly)


@st.composite
def ratqs(draw, ell):
    num = draw(laurents)
    # denominators built from factors regular at ell
    facs = draw(st.lists(st.sampled_from([1, 2, 4, 6, 10]).filter(lambda m: m % ell or ell == 1 and m != 1),
                         max_size=2))
    den = ONE
    for m in facs:
        den = den * _cyc(m)
    return RatQ.from_laurent(num) / den


def _cyc(m):
    coeffs = [int(c) for c in cyclotomic_poly(m).coeffs()]
    return RatQ.from_laurent(LaurentPoly({k: c for k, c in enumerate(coeffs)}))


@settings(max_examples=60, deadline=None)
@given(st.sampled_from([1, 3, 5, 7]), st.data())
def test_evaluation_is_homomorphism(ell, data):
    f = data.draw(ratqs(ell))
    g = data.draw(ratqs(ell))
    ef, eg = evaluate_at_root(f, ell), evaluate_at_root(g, ell)
    assert evaluate_at_root(f * g, ell) == ef * eg
    assert evaluate_at_root(f + g, ell) == ef + eg


@settings(max_examples=80, deadline=None)
@given(laurents, laurents, laurents)
def test_laurent_ring_axioms(a, b, c):
    assert a + b == b + a
    assert a * b == b * a
    assert (a * b) * c == a * (b * c)
    assert a * (b + c) == a * b + a * c
    assert all(v != 0 for v in (a * b).coeffs.values())
