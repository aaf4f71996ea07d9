import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from pcbsde import ConfigurationError, NumericalEvaluationError, example1, expect, expect_weighted, hermite_rule
from pcbsde.problems import FbsdeProblem

SQRT_PI = math.sqrt(math.pi)


def gauss_moment(m):
    """Closed-form integral of x**m exp(-x**2) over the real line."""
    if m % 2:
        return 0.0
    k = m // 2
    return math.prod(range(1, 2 * k, 2)) * SQRT_PI / 2 ** k


def normal_moment(k):
    return 0 if k % 2 else math.prod(range(1, k, 2))


def constant_problem(b, sigma):
    return FbsdeProblem(
        name="const", terminal_time=1.0, x0=0.0,
        drift=lambda t, x: np.full(np.shape(x), b), diffusion=lambda t, x: np.full(np.shape(x), sigma),
        generator=lambda t, y, z: 0.0 * y, terminal_y=lambda x: x, terminal_z=lambda x: 0.0 * x + sigma,
    )


def poly_expectation(coeffs, mean, sd):
    """E[p(mean + sd*xi)] for standard normal xi, by binomial expansion."""
    total = 0.0
    for m, c in enumerate(coeffs):
        total += c * sum(math.comb(m, k) * mean ** (m - k) * sd ** k * normal_moment(k) for k in range(m + 1))
    return total


def poly_weighted_expectation(coeffs, mean, sd, sqrt_delta):
    """E[sqrt(delta)*xi * p(mean + sd*xi)]."""
    total = 0.0
    for m, c in enumerate(coeffs):
        total += c * sum(math.comb(m, k) * mean ** (m - k) * sd ** k * normal_moment(k + 1) for k in range(m + 1))
    return sqrt_delta * total


def test_low_order_rules():
    r1 = hermite_rule(1)
    assert r1.nodes.tolist() == [0.0]
    assert r1.weights[0] == pytest.approx(1.7724538509055159, rel=1e-15)
    r2 = hermite_rule(2)
    np.testing.assert_allclose(r2.nodes, [-0.7071067811865476, 0.7071067811865476], rtol=1e-15)
    np.testing.assert_allclose(r2.weights, [SQRT_PI / 2] * 2, rtol=1e-15)


@pytest.mark.parametrize("K", [1, 2, 3, 5, 12, 20, 33, 64])
def test_rule_invariants(K):
    r = hermite_rule(K)
    assert np.all(np.diff(r.nodes) > 0)
    np.testing.assert_allclose(r.nodes, -r.nodes[::-1], atol=1e-13, rtol=0)
    assert np.all(r.weights > 0)
    assert abs(r.weights.sum() - SQRT_PI) <= 1e-13 * SQRT_PI
    ref_x, ref_w = np.polynomial.hermite.hermgauss(K)
    np.testing.assert_allclose(r.nodes, ref_x, atol=1e-13)
    np.testing.assert_allclose(r.weights, ref_w, rtol=1e-10, atol=1e-300)


@pytest.mark.parametrize("K", [4, 12, 24])
def test_moment_exactness(K):
    r = hermite_rule(K)
    for m in range(2 * K):
        got = float(np.sum(r.weights * r.nodes ** m))
        exact = gauss_moment(m)
        if exact == 0:
            assert abs(got) <= 1e-10 * gauss_moment(m + 1)
        else:
            assert abs(got - exact) <= 1e-10 * exact


def test_degree_22_moment_k12():
    r = hermite_rule(12)
    double_fact_21 = math.prod(range(1, 22, 2))
    exact = double_fact_21 * SQRT_PI / 2 ** 11
    assert float(np.sum(r.weights * r.nodes ** 22)) == pytest.approx(exact, rel=1e-10)


@pytest.mark.parametrize("K", [0, 65, -3, 2.5, True])
def test_order_out_of_range(K):
    with pytest.raises(ConfigurationError):
        hermite_rule(K)


def test_rule_is_deterministic():
    a, b = hermite_rule(12), hermite_rule(12)
    assert a.nodes.tobytes() == b.nodes.tobytes() and a.weights.tobytes() == b.weights.tobytes()


def test_expect_examples(rule12):
    p = constant_problem(0.3, 1.7)
    assert expect(lambda x: np.ones_like(x), 0.4, 0.0, 0.2, p, rule12) == pytest.approx(1.0, rel=1e-15)
    assert expect(lambda x: x, 2.0, 0.0, 0.1, p, rule12) == pytest.approx(2.03, rel=1e-14)
    bm = constant_problem(0.0, 1.0)
    assert expect(lambda x: x ** 2, 0.7, 0.0, 0.05, bm, rule12) == pytest.approx(0.49 + 0.05, rel=1e-14)


def test_expect_weighted_examples(rule12):
    bm = constant_problem(0.0, 1.0)
    assert abs(expect_weighted(lambda x: np.full_like(x, 3.0), 0.5, 0.0, 0.1, bm, rule12)) <= 1e-16
    assert expect_weighted(lambda x: x, 0.5, 0.0, 0.1, bm, rule12) == pytest.approx(0.1, rel=1e-14)
    assert expect_weighted(lambda x: x ** 2, 1.3, 0.0, 0.1, bm, rule12) == pytest.approx(2 * 1.3 * 0.1, rel=1e-14)


def test_array_launch_points(rule12):
    bm = constant_problem(0.0, 1.0)
    xs = np.linspace(-2, 2, 7)
    got = expect(lambda x: x ** 2, xs, 0.0, 0.25, bm, rule12)
    np.testing.assert_allclose(got, xs ** 2 + 0.25, rtol=1e-14)
    got = expect_weighted(lambda x: x ** 2, xs, 0.0, 0.25, bm, rule12)
    np.testing.assert_allclose(got, 2 * xs * 0.25, rtol=1e-13, atol=1e-15)


coeff_lists = st.lists(st.floats(-2, 2), min_size=1, max_size=24)


@settings(max_examples=60, deadline=None)
@given(coeffs=coeff_lists, x=st.floats(-2, 2), b=st.floats(-1, 1), sigma=st.floats(0.2, 2), delta=st.floats(1e-3, 1))
def test_polynomial_exactness(coeffs, x, b, sigma, delta):
    rule = hermite_rule(12)
    p = constant_problem(b, sigma)

    def v(q):
        return np.polynomial.polynomial.polyval(q, coeffs)

    mean, sd = x + b * delta, sigma * math.sqrt(delta)
    scale = poly_expectation([abs(c) for c in coeffs], abs(mean), sd) + 1.0
    assert abs(expect(v, x, 0.0, delta, p, rule) - poly_expectation(coeffs, mean, sd)) <= 1e-12 * scale

    wcoeffs = coeffs[:23]  # degree <= 2K - 2

    def w(q):
        return np.polynomial.polynomial.polyval(q, wcoeffs)

    exact = poly_weighted_expectation(wcoeffs, mean, sd, math.sqrt(delta))
    wscale = poly_expectation([abs(c) for c in wcoeffs], abs(mean), sd) * (1 + sd) + 1.0
    assert abs(expect_weighted(w, x, 0.0, delta, p, rule) - exact) <= 1e-12 * wscale


@settings(max_examples=40, deadline=None)
@given(a=st.floats(-5, 5), x=st.floats(-3, 3), delta=st.floats(1e-3, 1))
def test_linearity(a, x, delta):
    rule = hermite_rule(12)
    p = example1()

    def v(q):
        return np.sin(q)

    def w(q):
        return np.exp(-q ** 2)

    for op in (expect, expect_weighted):
        combined = op(lambda q: a * v(q) + w(q), x, 0.0, delta, p, rule)
        separate = a * op(v, x, 0.0, delta, p, rule) + op(w, x, 0.0, delta, p, rule)
        assert abs(combined - separate) <= 1e-13 * (abs(a) + 1)


def test_zero_increment_short_circuit(rule12):
    p = example1()
    x = 0.123456789
    assert expect(np.sin, x, 0.3, 0.0, p, rule12) == np.sin(x)
    assert expect_weighted(np.sin, x, 0.3, 0.0, p, rule12) == 0.0
    xs = np.linspace(-1, 1, 5)
    assert np.array_equal(expect(np.cos, xs, 0.3, 0.0, p, rule12), np.cos(xs))
    assert np.array_equal(expect_weighted(np.cos, xs, 0.3, 0.0, p, rule12), np.zeros(5))


def test_non_finite_integrand_reports_abscissa(rule12):
    p = example1()
    with pytest.raises(NumericalEvaluationError) as info:
        expect(lambda q: np.where(q > 0.5, np.inf, q), 0.0, 0.0, 0.5, p, rule12)
    assert info.value.where > 0.5


def test_negative_delta_and_degenerate_diffusion(rule12):
    with pytest.raises(ConfigurationError):
        expect(np.sin, 0.0, 0.0, -0.1, example1(), rule12)
    with pytest.raises(ConfigurationError):
        expect(np.sin, 0.0, 0.0, 0.1, constant_problem(0.0, 0.0), rule12)
