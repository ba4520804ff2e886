"""Drift, equilibrium densities and the diffusion coefficients built from them.

For an even density ``e`` with distribution function ``F`` the Heaviside-drift
coefficient is

    kappa(x) = F(x)/e(x)        (x < 0),      (1 - F(x))/e(x)      (x > 0)

and for the smooth drift ``tanh(x/eps)``

    kappa_eps(x) e(x) = int_{|x|}^inf tanh(y/eps) e(y) dy,

which makes ``e`` the zero-flux steady state of
``f_t = (d/dx)[(kappa_eps f)_x + tanh(x/eps) f]``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from scipy import special
from scipy.interpolate import PchipInterpolator

from .quadrature import QuadratureRule, indexed, integrate_semi_infinite, nodes_weights

DEFAULT_EPS = 0.01
DEFAULT_TOL = 1e-12


class UnsupportedOperation(NotImplementedError):
    pass


def drift_theta(x, eps: float):
    """The smoothed sign drift ``tanh(x/eps)``."""
    if not eps > 0:
        raise ValueError(f"eps must be positive, got {eps!r}")
    return np.tanh(np.asarray(x, dtype=float) / eps)


class DensityModel:
    """Even, strictly positive probability density on the line."""

    smooth = True

    def pdf(self, x):
        raise NotImplementedError

    def logpdf(self, x):
        return np.log(self.pdf(x))

    def dlogpdf(self, x):
        """d/dx log e(x)."""
        raise UnsupportedOperation(f"{type(self).__name__} has no smooth log-derivative")

    def kappa(self, x):
        """Heaviside-drift diffusion coefficient."""
        raise NotImplementedError

    def tail_ratio(self, y, x):
        """e(y)/e(x), evaluated without forming either factor."""
        return np.exp(self.logpdf(y) - self.logpdf(x))

    def __call__(self, x):
        return self.pdf(x)


@dataclass(frozen=True)
class Gaussian(DensityModel):
    """Standard normal density."""

    @property
    def norm_const(self) -> float:
        return 1.0 / math.sqrt(2.0 * math.pi)

    def pdf(self, x):
        x = np.asarray(x, dtype=float)
        return self.norm_const * np.exp(-0.5 * x * x)

    def logpdf(self, x):
        x = np.asarray(x, dtype=float)
        return math.log(self.norm_const) - 0.5 * x * x

    def dlogpdf(self, x):
        return -np.asarray(x, dtype=float)

    def cdf(self, x):
        return special.ndtr(x)

    def kappa(self, x):
        # Mills ratio: (1 - Phi(|x|))/phi(x) = sqrt(pi/2) erfcx(|x|/sqrt 2)
        ax = np.abs(np.asarray(x, dtype=float))
        return math.sqrt(math.pi / 2.0) * special.erfcx(ax / math.sqrt(2.0))

    def tail_ratio(self, y, x):
        return np.exp(-0.5 * (y - x) * (y + x))

    def kappa_substitution_integrand(self, z, x):
        """Integrand of kappa(x) after the change of variables z^2 = y^2 - x^2."""
        return z / np.sqrt(z * z + x * x) * np.exp(-0.5 * z * z)

    def substitution_root(self, z, x):
        return np.sqrt(z * z + x * x)

    def variance(self) -> float:
        return 1.0


@dataclass(frozen=True)
class GeneralizedGaussian(DensityModel):
    """``C_beta (1 + x^2)^(-beta)``; normalizable for beta > 1/2."""

    beta: float

    def __post_init__(self):
        if not self.beta > 0.5:
            raise ValueError(f"generalized Gaussian needs beta > 1/2, got {self.beta!r}")

    @property
    def norm_const(self) -> float:
        b = self.beta
        return math.exp(math.lgamma(b) - math.lgamma(b - 0.5)) / math.sqrt(math.pi)

    @property
    def gamma(self) -> float:
        """int_0^inf (1 + z^2)^(-beta) dz, the kappa(0) value."""
        b = self.beta
        return 0.5 * math.sqrt(math.pi) * math.exp(math.lgamma(b - 0.5) - math.lgamma(b))

    def pdf(self, x):
        x = np.asarray(x, dtype=float)
        return self.norm_const * (1.0 + x * x) ** (-self.beta)

    def logpdf(self, x):
        x = np.asarray(x, dtype=float)
        return math.log(self.norm_const) - self.beta * np.log1p(x * x)

    def dlogpdf(self, x):
        x = np.asarray(x, dtype=float)
        return -2.0 * self.beta * x / (1.0 + x * x)

    def _upper_tail(self, x):
        # int_{|x|}^inf (1+y^2)^-beta dy = B(beta-1/2, 1/2) I_t(beta-1/2, 1/2) / 2,  t = 1/(1+x^2)
        ax = np.abs(np.asarray(x, dtype=float))
        a = self.beta - 0.5
        t = 1.0 / (1.0 + ax * ax)
        return 0.5 * special.beta(a, 0.5) * special.betainc(a, 0.5, t)

    def cdf(self, x):
        x = np.asarray(x, dtype=float)
        tail = self.norm_const * self._upper_tail(x)
        return np.where(x < 0, tail, 1.0 - tail)

    def kappa(self, x):
        x = np.asarray(x, dtype=float)
        return (1.0 + x * x) ** self.beta * self._upper_tail(x)

    def tail_ratio(self, y, x):
        return ((1.0 + x * x) / (1.0 + y * y)) ** self.beta

    def kappa_substitution_integrand(self, z, x):
        """Integrand of kappa(x) after 1 + y^2 = (1 + x^2)(1 + z^2)."""
        s = 1.0 + x * x
        return z * s / np.sqrt(z * z * s + x * x) * (1.0 + z * z) ** (-self.beta)

    def substitution_root(self, z, x):
        return np.sqrt((1.0 + x * x) * (1.0 + z * z) - 1.0)

    def variance(self) -> float:
        if not self.beta > 1.5:
            return math.inf
        return 1.0 / (2.0 * self.beta - 3.0)


class TabulatedDensity(DensityModel):
    """Density given on a table, interpolated by a monotone (PCHIP) cubic.

    The table is rescaled to unit mass.  ``F`` is the exact antiderivative of
    the interpolant, so ``F' = e`` holds on the whole table range.
    """

    smooth = False

    def __init__(self, xs, values):
        xs = np.asarray(xs, dtype=float)
        values = np.asarray(values, dtype=float)
        if xs.ndim != 1 or xs.shape != values.shape or xs.size < 4:
            raise ValueError("need matching 1-D tables with at least 4 entries")
        if np.any(np.diff(xs) <= 0):
            raise ValueError("table abscissae must be strictly increasing")
        if np.any(~np.isfinite(values)) or np.any(values <= 0):
            raise ValueError("table values must be finite and positive")
        raw = PchipInterpolator(xs, values, extrapolate=False)
        mass = float(raw.antiderivative()(xs[-1]))
        self.xs = xs
        self.values = values / mass
        self._interp = PchipInterpolator(xs, self.values, extrapolate=False)
        self._cum = self._interp.antiderivative()
        self.total = float(self._cum(xs[-1]))

    @classmethod
    def from_file(cls, path) -> "TabulatedDensity":
        """Two whitespace-separated columns: x, e(x)."""
        data = np.loadtxt(Path(path), ndmin=2)
        if data.shape[1] != 2:
            raise ValueError(f"{path}: expected two columns, got {data.shape[1]}")
        return cls(data[:, 0], data[:, 1])

    def _check_range(self, x):
        x = np.asarray(x, dtype=float)
        if np.any(x < self.xs[0]) or np.any(x > self.xs[-1]):
            raise ValueError(f"evaluation outside table range [{self.xs[0]}, {self.xs[-1]}]")
        return x

    def pdf(self, x):
        return self._interp(self._check_range(x))

    def cdf(self, x):
        return self._cum(self._check_range(x))

    def kappa(self, x):
        x = self._check_range(x)
        F = self._cum(x)
        return np.where(x < 0, F, self.total - F) / self._interp(x)

    def tail_ratio(self, y, x):
        return self._interp(y) / self._interp(x)


def density_eval(d: DensityModel, x):
    return d.pdf(x)


def kappa_heaviside(d: DensityModel, x):
    return d.kappa(x)


def m_eps(d: DensityModel, eps: float, tol: float = DEFAULT_TOL) -> float:
    """Mass of ``|tanh(y/eps)| e(y)``; strictly below one."""
    if not eps > 0:
        raise ValueError(f"eps must be positive, got {eps!r}")
    if isinstance(d, TabulatedDensity):
        return float(_tabulated_tanh_mass(d, eps, np.array([d.xs[0]]), np.array([d.xs[-1]]))[0])
    half = integrate_semi_infinite(lambda y: np.tanh(y / eps) * d.pdf(y), 0.0, tol=tol, h0=0.5 * eps)
    return 2.0 * half


def _tabulated_tanh_mass(d: TabulatedDensity, eps, lo, hi):
    """int_lo^hi |tanh(y/eps)| e(y) dy elementwise, splitting at 0 and refining near it."""
    ref = np.concatenate([-eps * 0.25 * 2.0 ** np.arange(12)[::-1], [0.0], eps * 0.25 * 2.0 ** np.arange(12)])
    t, w = nodes_weights(QuadratureRule.GL10)
    out = np.empty(len(lo))
    for k, (a, b) in enumerate(zip(lo, hi)):
        pts = np.concatenate([[a, b], d.xs[(d.xs > a) & (d.xs < b)], ref[(ref > a) & (ref < b)]])
        pts = np.unique(pts)
        h = np.diff(pts)
        y = pts[:-1, None] + h[:, None] * t[None, :]
        vals = np.abs(np.tanh(y / eps)) * d._interp(y)
        out[k] = np.sum(h * (vals @ w))
    return out


@dataclass(frozen=True)
class FPModel:
    """Fokker-Planck problem with drift ``tanh(x/eps)`` and steady state ``density``."""

    density: DensityModel
    eps: float = DEFAULT_EPS
    tol: float = DEFAULT_TOL
    m_eps: float = field(init=False)

    def __post_init__(self):
        if not self.eps > 0:
            raise ValueError(f"eps must be positive, got {self.eps!r}")
        object.__setattr__(self, "m_eps", m_eps(self.density, self.eps, self.tol))

    def theta(self, x):
        return drift_theta(x, self.eps)

    def kappa(self, x):
        return self.density.kappa(x)

    def kappa_eps(self, x):
        """Diffusion coefficient for the tanh drift; even in ``x``."""
        x = np.asarray(x, dtype=float)
        d = self.density
        if isinstance(d, TabulatedDensity):
            return _tabulated_kappa_eps(d, self.eps, x)
        ax = np.abs(x).ravel()
        eps = self.eps

        @indexed
        def integrand(y, idx):
            x0 = ax[idx, None]
            return np.tanh(y / eps) * d.tail_ratio(y, x0)

        val = integrate_semi_infinite(integrand, ax, tol=self.tol, h0=0.5 * eps)
        return val.reshape(x.shape) if x.ndim else float(val[0])

    def kappa_eps_prime(self, x):
        """-theta - kappa_eps * d/dx log e; needs a smooth density."""
        if not self.density.smooth:
            raise UnsupportedOperation("kappa_eps' needs a density with a smooth log-derivative")
        return -self.theta(x) - self.kappa_eps(x) * self.density.dlogpdf(x)

    def stationarity_residual(self, x):
        """d/dx[kappa_eps e] + theta e, with the derivative taken from kappa_eps_prime."""
        x = np.asarray(x, dtype=float)
        e = self.density.pdf(x)
        de = e * self.density.dlogpdf(x)
        return self.kappa_eps_prime(x) * e + self.kappa_eps(x) * de + self.theta(x) * e


def _tabulated_kappa_eps(d: TabulatedDensity, eps, x):
    x = d._check_range(x)
    flat = x.ravel()
    lo = np.where(flat < 0, d.xs[0], flat)
    hi = np.where(flat < 0, flat, d.xs[-1])
    out = _tabulated_tanh_mass(d, eps, lo, hi) / d._interp(flat)
    return out.reshape(x.shape) if x.ndim else float(out[0])


def kappa_eps(model: FPModel, x):
    return model.kappa_eps(x)


def kappa_eps_prime(model: FPModel, x):
    return model.kappa_eps_prime(x)


def kappa_substitution(d: DensityModel, x, eps: float | None = None, tol: float = DEFAULT_TOL):
    """kappa (or kappa_eps when ``eps`` is given) via the substitution integral in ``z``.

    Independent route used to cross-check the closed forms and the direct
    ``y``-integral.
    """
    x = np.atleast_1d(np.asarray(x, dtype=float))
    ax = np.abs(x)

    @indexed
    def integrand(z, idx):
        x0 = ax[idx, None]
        val = d.kappa_substitution_integrand(z, x0)
        if eps is not None:
            val = val * np.tanh(d.substitution_root(z, x0) / eps)
        return val

    h0 = 0.5 * min(eps if eps else 1.0, 1.0)
    return integrate_semi_infinite(integrand, np.zeros_like(ax), tol=tol, h0=h0)


def sandwich_constants(model: FPModel, sample_xs) -> tuple[float, float]:
    """(min, max) over the samples of kappa_eps/kappa."""
    xs = np.asarray(sample_xs, dtype=float)
    if xs.size == 0:
        raise ValueError("need at least one sample point")
    ratio = model.kappa_eps(xs) / model.kappa(xs)
    return float(np.min(ratio)), float(np.max(ratio))


def growth_bounds(model: FPModel, sample_xs) -> tuple[float, float]:
    """Sup over the samples of |theta|/(1+|x|) and kappa_eps/(1+|x|)."""
    xs = np.asarray(sample_xs, dtype=float)
    w = 1.0 + np.abs(xs)
    return float(np.max(np.abs(model.theta(xs)) / w)), float(np.max(model.kappa_eps(xs) / w))
