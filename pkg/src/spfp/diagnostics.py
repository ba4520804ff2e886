"""Discrete functionals tracked along a trajectory, and the Wirtinger check."""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass
from typing import Callable

import numpy as np

from .models import DensityModel, FPModel, GeneralizedGaussian
from .quadrature import integrate_semi_infinite
from .scheme import Grid, SchemeWeights

LOG_FLOOR = 1e-300
NEGATIVE_TOL = -1e-12


@dataclass
class DiagnosticRecord:
    t: float
    mass: float
    entropy: float
    dissipation: float
    hellinger: float
    rel_l1: float
    d_p: float | None = None
    moment: float | None = None
    floored: bool = False

    def as_dict(self):
        return asdict(self)


def _nonneg(f):
    f = np.asarray(f, dtype=float)
    if np.min(f) < NEGATIVE_TOL:
        raise ValueError(f"density has negative entry {np.min(f):.3e}")
    return np.maximum(f, 0.0)


def discrete_entropy(f, e, dx: float) -> float:
    """dx * sum f log(f/e), with 0 log 0 = 0."""
    f = _nonneg(f)
    e = np.asarray(e, dtype=float)
    pos = f > 0
    return dx * math.fsum(f[pos] * np.log(f[pos] / e[pos]))


def discrete_dissipation(f, e, w: SchemeWeights, return_flag: bool = False):
    """Entropy production of the scheme, sum over interfaces of

        (log u_{i+1} - log u_i)(u_{i+1} - u_i) e_hat kappa_{i+1/2} / dx,   u = f/e,

    with e_hat the logarithmic mean of neighbouring equilibrium values.
    """
    f = _nonneg(f)
    e = np.asarray(e, dtype=float)
    floored = bool(np.any(f == 0))
    u = f / e
    logu = np.log(np.maximum(u, LOG_FLOOR))
    e0, e1 = e[:-1], e[1:]
    r = np.log(e1 / e0)
    with np.errstate(invalid="ignore", divide="ignore"):
        ehat = np.where(np.abs(r) < 1e-10, e0 * (1.0 - 0.5 * r), e1 * e0 * r / (e1 - e0))
    terms = np.diff(logu) * np.diff(u) * ehat * w.kappa_half / w.dx
    val = math.fsum(terms)
    return (val, floored) if return_flag else val


def hellinger_distance(f, e, dx: float) -> float:
    f = _nonneg(f)
    return math.sqrt(dx * math.fsum((np.sqrt(f) - np.sqrt(e)) ** 2))


def relative_l1_error(f, e) -> float:
    """sum_i |f_i - e_i|/e_i (no dx weight, so it grows with N)."""
    f = np.asarray(f, dtype=float)
    e = np.asarray(e, dtype=float)
    return math.fsum(np.abs(f - e) / e)


def weighted_l1_error(f, e, dx: float) -> float:
    """dx * sum_i |f_i - e_i|/e_i."""
    return dx * relative_l1_error(f, e)


def d_p_functional(f, e, dx: float, p: float) -> float:
    """dx * sum [(f/e)^p - 1]^2 e for 1/2 <= p <= 1."""
    if not 0.5 <= p <= 1.0:
        raise ValueError(f"p must lie in [1/2, 1], got {p}")
    f = _nonneg(f)
    e = np.asarray(e, dtype=float)
    return dx * math.fsum(((f / e) ** p - 1.0) ** 2 * e)


def moment_functional(f, grid: Grid, p: float, beta: float, c_beta: float | None = None,
                      verbatim: bool = False) -> float:
    """Weighted L^{2p} moment of ``f`` against the generalized Gaussian.

    Returns ``c^(1-2p) dx sum (1+x^2)^(beta(2p-1)) f^(2p)``, i.e.
    ``dx sum (f/g)^(2p) g`` for ``g = c (1+x^2)^-beta``.  ``c`` defaults to
    the whole-line normalization; pass the truncated-domain constant to
    compare with ``d_p`` taken against the truncated equilibrium.

    ``verbatim=True`` uses the prefactor ``1/c`` at every ``p`` instead; the
    two agree at ``p = 1``.
    """
    if not 0.5 <= p <= 1.0:
        raise ValueError(f"p must lie in [1/2, 1], got {p}")
    if not beta > 0.5:
        raise ValueError(f"beta must exceed 1/2, got {beta}")
    c = GeneralizedGaussian(beta).norm_const if c_beta is None else c_beta
    f = _nonneg(f)
    x = grid.x
    s = grid.dx * math.fsum((1.0 + x * x) ** (beta * (2.0 * p - 1.0)) * f ** (2.0 * p))
    return s / c if verbatim else s * c ** (1.0 - 2.0 * p)


def record(t: float, f, e, w: SchemeWeights, p: float | None = None, beta: float | None = None,
           c_beta: float | None = None) -> DiagnosticRecord:
    dx = w.dx
    diss, floored = discrete_dissipation(f, e, w, return_flag=True)
    rec = DiagnosticRecord(
        t=t,
        mass=dx * math.fsum(f),
        entropy=discrete_entropy(f, e, dx),
        dissipation=diss,
        hellinger=hellinger_distance(f, e, dx),
        rel_l1=relative_l1_error(f, e),
        floored=floored,
    )
    if p is not None:
        rec.d_p = d_p_functional(f, e, dx, p)
        if beta is not None:
            rec.moment = moment_functional(f, w.grid, p, beta, c_beta=c_beta)
    return rec


def _expectation(d: DensityModel, fn: Callable, tol: float) -> float:
    """E[fn(X)] under the even density ``d`` as two half-line integrals."""
    right = integrate_semi_infinite(lambda y: fn(y) * d.pdf(y), 0.0, tol=tol, h0=0.25)
    left = integrate_semi_infinite(lambda y: fn(-y) * d.pdf(y), 0.0, tol=tol, h0=0.25)
    return right + left


def wirtinger_check(model: FPModel | DensityModel, phi: Callable, dphi: Callable, p: float,
                    tol: float = 1e-12) -> tuple[float, float]:
    """(E|phi - E phi|^p, (2p)^p E[kappa^p |phi'|^p]) with kappa the Heaviside-drift coefficient."""
    if p < 1:
        raise ValueError("p must be >= 1")
    d = model.density if isinstance(model, FPModel) else model
    mean = _expectation(d, phi, tol)
    lhs = _expectation(d, lambda y: np.abs(phi(y) - mean) ** p, tol)
    rhs = (2.0 * p) ** p * _expectation(d, lambda y: d.kappa(y) ** p * np.abs(dphi(y)) ** p, tol)
    return lhs, rhs


def fit_decay_rate(ts, values, window: tuple[float, float]) -> float:
    """Least-squares slope of log(value) against log(t) inside ``window``."""
    ts = np.asarray(ts, dtype=float)
    values = np.asarray(values, dtype=float)
    lo, hi = window
    sel = (ts >= lo) & (ts <= hi) & (ts > 0)
    if np.count_nonzero(sel) < 5:
        raise ValueError(f"need at least 5 points in window {window}, got {np.count_nonzero(sel)}")
    if np.any(values[sel] <= 0):
        raise ValueError("values must be positive inside the window")
    lt, lv = np.log(ts[sel]), np.log(values[sel])
    if np.ptp(lt) == 0:
        raise ValueError("degenerate window")
    slope, _ = np.polyfit(lt, lv, 1)
    return float(slope)


@dataclass(frozen=True)
class PowerLawFit:
    slope: float
    first_half: float
    second_half: float

    @property
    def is_power_law(self) -> bool:
        scale = max(abs(self.first_half), abs(self.second_half))
        return abs(self.first_half - self.second_half) <= 0.2 * scale


def power_law_check(ts, values, window: tuple[float, float]) -> PowerLawFit:
    """Slopes over the window and over its two halves (split at the geometric midpoint)."""
    lo, hi = window
    mid = math.sqrt(lo * hi) if lo > 0 else 0.5 * (lo + hi)
    return PowerLawFit(
        fit_decay_rate(ts, values, window),
        fit_decay_rate(ts, values, (lo, mid)),
        fit_decay_rate(ts, values, (mid, hi)),
    )


def entropy_comparison_constants(h0: float, functions: dict[str, Callable]) -> dict[str, float]:
    """c such that c * h(0) matches the entropy at t = 0, per comparison function h."""
    return {name: h0 / fn(0.0) for name, fn in functions.items()}
