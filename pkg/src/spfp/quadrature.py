"""Quadrature rules for cell integrals and semi-infinite tails.

Open Newton-Cotes layouts on the reference panel [0, 1]:

    nc2  midpoint rule, node 1/2                           (exact to degree 1)
    nc4  Milne rule, nodes 1/4, 1/2, 3/4, weights (2, -1, 2)/3   (degree 3)
    nc6  5-point open rule, nodes k/6 for k = 1..5,
         weights (11, -14, 26, -14, 11)/20                 (degree 5)

None of them evaluates a panel endpoint.  ``gl10`` is 10-point Gauss-Legendre
(degree 19).
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import Callable

import numpy as np


# panel width ratio for semi-infinite integrals
GROWTH = 1.5


class QuadratureError(ArithmeticError):
    """Raised for non-finite integrand values or a non-converged tail."""


class QuadratureRule(str, enum.Enum):
    NC2 = "nc2"
    NC4 = "nc4"
    NC6 = "nc6"
    GL10 = "gl10"


# design degree and convergence order per panel
DEGREE = {QuadratureRule.NC2: 1, QuadratureRule.NC4: 3, QuadratureRule.NC6: 5, QuadratureRule.GL10: 19}
ORDER = {rule: deg + 1 for rule, deg in DEGREE.items()}


def _reference_rules():
    gl_x, gl_w = np.polynomial.legendre.leggauss(10)
    return {
        QuadratureRule.NC2: (np.array([0.5]), np.array([1.0])),
        QuadratureRule.NC4: (np.array([0.25, 0.5, 0.75]), np.array([2.0, -1.0, 2.0]) / 3.0),
        QuadratureRule.NC6: (np.arange(1, 6) / 6.0, np.array([11.0, -14.0, 26.0, -14.0, 11.0]) / 20.0),
        QuadratureRule.GL10: (0.5 * (gl_x + 1.0), 0.5 * gl_w),
    }


_RULES = _reference_rules()


def nodes_weights(rule) -> tuple[np.ndarray, np.ndarray]:
    """Nodes and weights of ``rule`` on [0, 1] (copies)."""
    x, w = _RULES[QuadratureRule(rule)]
    return x.copy(), w.copy()


def _check_finite(values, nodes):
    bad = ~np.isfinite(values)
    if np.any(bad):
        node = np.broadcast_to(nodes, values.shape)[bad].flat[0]
        raise QuadratureError(f"non-finite integrand value at node x={node!r}")


def integrate_finite(integrand: Callable, a: float, b: float, rule="gl10", panels: int = 1) -> float:
    """Composite ``rule`` approximation of the integral of ``integrand`` over [a, b].

    ``integrand`` must accept a numpy array of nodes.
    """
    if b < a:
        raise ValueError(f"need a <= b, got a={a}, b={b}")
    if panels < 1:
        raise ValueError("panels must be >= 1")
    if a == b:
        return 0.0
    t, w = _RULES[QuadratureRule(rule)]
    h = (b - a) / panels
    left = a + h * np.arange(panels)
    nodes = left[:, None] + h * t[None, :]
    values = np.asarray(integrand(nodes), dtype=float)
    _check_finite(values, nodes)
    return float(h * np.sum(values @ w))


def integrate_cells(integrand: Callable, edges: np.ndarray, rule="gl10") -> np.ndarray:
    """One-panel ``rule`` integral on every cell [edges[k], edges[k+1]]."""
    edges = np.asarray(edges, dtype=float)
    t, w = _RULES[QuadratureRule(rule)]
    h = np.diff(edges)
    nodes = edges[:-1, None] + h[:, None] * t[None, :]
    values = np.asarray(integrand(nodes), dtype=float)
    _check_finite(values, nodes)
    return h * (values @ w)


def integrate_semi_infinite(integrand: Callable, a, tol: float = 1e-12, h0: float = 0.5,
                            max_panels: int = 400):
    """Integral of ``integrand`` over [a, inf) with geometrically growing panels.

    Panels start at width ``h0`` and grow by ``GROWTH``; each is integrated with
    Gauss-Legendre 10.  Summation stops once a panel contributes less than
    ``tol`` times the accumulated absolute integral.

    ``a`` may be an array: the integrand then receives nodes of shape
    ``(len(a), 10)`` and every lower limit is handled in one sweep.
    """
    if tol <= 0:
        raise ValueError("tol must be positive")
    scalar = np.ndim(a) == 0
    a = np.atleast_1d(np.asarray(a, dtype=float))
    t, w = _RULES[QuadratureRule.GL10]

    total = np.zeros_like(a)
    mass = np.zeros_like(a)
    active = np.ones(a.shape, dtype=bool)
    left = a.copy()
    h = float(h0)
    last = np.zeros_like(a)
    for k in range(max_panels):
        idx = np.nonzero(active)[0]
        nodes = left[idx, None] + h * t[None, :]
        values = np.asarray(integrand(nodes, idx) if _wants_index(integrand) else integrand(nodes), dtype=float)
        _check_finite(values, nodes)
        piece = h * (values @ w)
        total[idx] += piece
        mass[idx] += np.abs(piece)
        last[idx] = piece
        left[idx] += h
        h *= GROWTH
        if k >= 2:
            done = np.abs(piece) <= tol * mass[idx]
            active[idx[done]] = False
        if not active.any():
            break
    else:
        i = int(np.nonzero(active)[0][0])
        raise QuadratureError(
            f"semi-infinite integral from a={a[i]!r} did not converge in {max_panels} panels: "
            f"accumulated {total[i]!r}, last increment {last[i]!r}"
        )
    return float(total[0]) if scalar else total


def _wants_index(fn) -> bool:
    return getattr(fn, "wants_index", False)


def indexed(fn):
    """Mark an integrand as taking ``(nodes, idx)``, ``idx`` selecting the active lower limits."""
    fn.wants_index = True
    return fn
