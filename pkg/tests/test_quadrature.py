import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from spfp.quadrature import (DEGREE, ORDER, QuadratureError, QuadratureRule, indexed, integrate_cells,
                             integrate_finite, integrate_semi_infinite, nodes_weights)

RULES = list(QuadratureRule)


@pytest.mark.parametrize("rule", RULES)
def test_constant_integrand(rule):
    assert integrate_finite(lambda x: np.ones_like(x), 0.0, 1.0, rule) == pytest.approx(1.0, abs=1e-15)


@pytest.mark.parametrize("rule", RULES)
def test_exact_to_design_degree(rule):
    for k in range(DEGREE[rule] + 1):
        val = integrate_finite(lambda x: x ** k, 0.0, 1.0, rule)
        assert val == pytest.approx(1.0 / (k + 1), rel=1e-12)


@pytest.mark.parametrize("rule", [r for r in RULES if r is not QuadratureRule.GL10])
def test_not_exact_past_design_degree(rule):
    k = DEGREE[rule] + 1
    assert abs(integrate_finite(lambda x: x ** k, 0.0, 1.0, rule) - 1.0 / (k + 1)) > 1e-6


def test_cubic_gauss_legendre():
    assert integrate_finite(lambda x: x ** 3, 0.0, 1.0, "gl10") == pytest.approx(0.25, abs=1e-15)


def test_open_rules_avoid_endpoints():
    for rule in RULES:
        x, w = nodes_weights(rule)
        assert np.all((x > 0) & (x < 1))
        assert math.fsum(w) == pytest.approx(1.0, abs=1e-15)
        assert np.allclose(x, 1.0 - x[::-1])


def test_sine_errors_ordered_by_rule():
    errs = [abs(integrate_finite(np.sin, 0.0, math.pi, r, panels=4) - 2.0) for r in RULES]
    assert errs[0] > errs[1] > errs[2] > errs[3]


@pytest.mark.parametrize("rule", [QuadratureRule.NC2, QuadratureRule.NC4, QuadratureRule.NC6])
def test_composite_convergence_order(rule):
    panels = np.array([4, 8, 16])
    errs = np.array([abs(integrate_finite(np.exp, 0.0, 1.0, rule, int(n)) - math.expm1(1.0)) for n in panels])
    slope = -np.polyfit(np.log(panels), np.log(errs), 1)[0]
    assert slope == pytest.approx(ORDER[rule], rel=0.2)


def test_cells_match_finite():
    edges = np.linspace(-1.0, 2.0, 7)
    cells = integrate_cells(np.cos, edges, "nc6")
    for k in range(6):
        assert cells[k] == pytest.approx(integrate_finite(np.cos, edges[k], edges[k + 1], "nc6"), rel=1e-14)


def test_reversed_limits_rejected():
    with pytest.raises(ValueError):
        integrate_finite(np.sin, 1.0, 0.0)


def test_nonfinite_integrand_reports_node():
    with pytest.raises(QuadratureError, match="node"):
        with np.errstate(divide="ignore"):
            integrate_finite(lambda x: 1.0 / (x - 0.5), 0.0, 1.0, "nc2")


def test_semi_infinite_gaussian():
    val = integrate_semi_infinite(lambda z: np.exp(-z * z / 2), 0.0)
    assert val == pytest.approx(math.sqrt(math.pi / 2), rel=1e-12)


def test_semi_infinite_first_moment():
    assert integrate_semi_infinite(lambda z: z * np.exp(-z * z / 2), 0.0) == pytest.approx(1.0, rel=1e-12)


def test_semi_infinite_cauchy_tail():
    assert integrate_semi_infinite(lambda z: 1.0 / (1 + z * z), 0.0) == pytest.approx(math.pi / 2, rel=1e-10)


def test_semi_infinite_vectorized_lower_limits():
    a = np.array([0.0, 0.5, 3.0])
    vals = integrate_semi_infinite(lambda z: np.exp(-z), a)
    assert np.allclose(vals, np.exp(-a), rtol=1e-12)


def test_indexed_integrand_sees_its_row():
    a = np.array([0.0, 1.0])
    rates = np.array([1.0, 2.0])

    @indexed
    def f(z, idx):
        return np.exp(-rates[idx, None] * z)

    vals = integrate_semi_infinite(f, a)
    assert np.allclose(vals, np.exp(-rates * a) / rates, rtol=1e-12)


def test_semi_infinite_divergence_raises():
    with pytest.raises(QuadratureError):
        integrate_semi_infinite(lambda z: 1.0 / (1.0 + z), 0.0, max_panels=30)


@settings(max_examples=40, deadline=None)
@given(st.lists(st.floats(-5, 5), min_size=1, max_size=6), st.floats(-3, 3), st.floats(0.1, 3))
def test_gl10_exact_on_random_polynomials(coeffs, a, width):
    b = a + width
    p = np.polynomial.Polynomial(coeffs)
    exact = p.integ()(b) - p.integ()(a)
    assert integrate_finite(p, a, b, "gl10") == pytest.approx(exact, rel=1e-12, abs=1e-12)
