"""Structure-preserving finite-volume discretization on a uniform grid.

Node-centred cells ``f_i`` at ``x_i``; interfaces at the midpoints.  The
interface flux

    F_{i+1/2} = C [(1 - delta) f_{i+1} + delta f_i] + kappa_{i+1/2} (f_{i+1} - f_i)/dx

approximates ``kappa_eps f_x + (theta + kappa_eps') f`` and
``df_i/dt = (F_{i+1/2} - F_{i-1/2})/dx`` with zero flux through both ends.
The exponential-fitting weight ``delta`` makes the flux vanish whenever
``f_{i+1}/f_i = exp(-lambda_{i+1/2})``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .models import FPModel
from .quadrature import QuadratureRule, integrate_cells

# weight modes: quadrature rule per cell, or the exact-equilibrium weights
WEIGHT_MODES = {
    "sp2": QuadratureRule.NC2,
    "sp4": QuadratureRule.NC4,
    "sp6": QuadratureRule.NC6,
    "spG": QuadratureRule.GL10,
    "exact": None,
}


@dataclass(frozen=True)
class Grid:
    L: float
    N: int

    def __post_init__(self):
        if not self.L > 0:
            raise ValueError(f"L must be positive, got {self.L!r}")
        if int(self.N) != self.N or self.N < 3:
            raise ValueError(f"N must be an integer >= 3, got {self.N!r}")

    @property
    def dx(self) -> float:
        return 2.0 * self.L / (self.N - 1)

    @property
    def x(self) -> np.ndarray:
        # symmetric construction keeps x[i] == -x[N-1-i] exactly
        i = np.arange(self.N)
        x = self.dx * (i - (self.N - 1) / 2.0)
        x[0], x[-1] = -self.L, self.L
        return x

    @property
    def x_half(self) -> np.ndarray:
        i = np.arange(self.N - 1)
        return self.dx * (i + 0.5 - (self.N - 1) / 2.0)

    @property
    def edges(self) -> np.ndarray:
        """Cell boundaries between consecutive nodes (one cell per interface)."""
        return self.x


def build_grid(L: float, N: int) -> Grid:
    return Grid(float(L), int(N))


@dataclass(frozen=True)
class SchemeWeights:
    grid: Grid
    lam: np.ndarray
    C: np.ndarray
    delta: np.ndarray
    kappa_half: np.ndarray
    mode: str

    @property
    def dx(self) -> float:
        return self.grid.dx

    def tridiagonal(self):
        """(lower, diag, upper) of the matrix A with rhs(f) = A f.

        ``lower[i]`` multiplies f_{i-1} in row i (``lower[0]`` unused),
        ``upper[i]`` multiplies f_{i+1} (``upper[-1]`` unused).
        """
        dx = self.dx
        a = self.C * self.delta - self.kappa_half / dx      # coefficient of f_i in F_{i+1/2}
        b = self.C * (1.0 - self.delta) + self.kappa_half / dx  # coefficient of f_{i+1}
        n = self.grid.N
        lower = np.zeros(n)
        diag = np.zeros(n)
        upper = np.zeros(n)
        diag[:-1] += a / dx
        diag[1:] -= b / dx
        upper[:-1] = b / dx
        lower[1:] = -a / dx
        return lower, diag, upper


# below the cutoff the direct form loses ~eps/|lam| to cancellation; the series
# 1/2 - sum_k B_2k lam^(2k-1) / (2k)! through lam^11 is exact to rounding there
_SERIES_CUTOFF = 0.25
_SERIES = (1 / 12, -1 / 720, 1 / 30240, -1 / 1209600, 1 / 47900160, -691 / 1307674368000)


def delta_from_lambda(lam):
    """1/lam + 1/(1 - exp(lam)), stable for every finite ``lam``; tends to 0 and 1 at +-inf."""
    lam = np.asarray(lam, dtype=float)
    small = np.abs(lam) < _SERIES_CUTOFF
    with np.errstate(divide="ignore", over="ignore", invalid="ignore"):
        safe = np.where(small, 1.0, lam)
        direct = 1.0 / safe - 1.0 / np.expm1(safe)
    ls = np.where(small, lam, 0.0)
    l2 = ls * ls
    acc = np.zeros_like(ls)
    for c in reversed(_SERIES):
        acc = c + l2 * acc
    out = np.where(small, 0.5 - ls * acc, direct)
    return float(out) if out.ndim == 0 else out


def delta_exact(e_i, e_ip1):
    """Weight that keeps the sampled equilibrium exactly stationary."""
    e_i = np.asarray(e_i, dtype=float)
    e_ip1 = np.asarray(e_ip1, dtype=float)
    if np.any(e_i <= 0) or np.any(e_ip1 <= 0):
        raise ValueError("equilibrium values must be positive")
    # equals 1/(log e_i - log e_ip1) + e_ip1/(e_ip1 - e_i); routed through the stable form
    return delta_from_lambda(np.log(e_i) - np.log(e_ip1))


def _lambda_integrand(model: FPModel):
    def integrand(y):
        k = model.kappa_eps(y)
        dk = -model.theta(y) - k * model.density.dlogpdf(y)
        return (model.theta(y) + dk) / k
    return integrand


def compute_lambdas(model: FPModel, grid: Grid, rule) -> np.ndarray:
    """Cell integrals of (theta + kappa_eps')/kappa_eps for every interface."""
    return integrate_cells(_lambda_integrand(model), grid.edges, rule)


def compute_lambda(model: FPModel, grid: Grid, i: int, rule) -> float:
    """Single-interface version of :func:`compute_lambdas` (0-based ``i``)."""
    if not 0 <= i < grid.N - 1:
        raise IndexError(f"interface index {i} out of range")
    return float(integrate_cells(_lambda_integrand(model), grid.edges[i:i + 2], rule)[0])


def build_weights(model: FPModel, grid: Grid, mode: str = "exact") -> SchemeWeights:
    if mode not in WEIGHT_MODES:
        raise ValueError(f"unknown weight mode {mode!r}; expected one of {sorted(WEIGHT_MODES)}")
    dx = grid.dx
    kappa_half = np.asarray(model.kappa_eps(grid.x_half), dtype=float)
    if mode == "exact":
        e = model.density.pdf(grid.x)
        lam = np.log(e[:-1]) - np.log(e[1:])
        delta = delta_exact(e[:-1], e[1:])
    else:
        lam = compute_lambdas(model, grid, WEIGHT_MODES[mode])
        delta = delta_from_lambda(lam)
    C = kappa_half * lam / dx
    return SchemeWeights(grid, lam, C, np.asarray(delta), kappa_half, mode)


def fluxes(f, w: SchemeWeights) -> np.ndarray:
    """All N-1 interior interface fluxes."""
    f = np.asarray(f, dtype=float)
    return (w.C * ((1.0 - w.delta) * f[1:] + w.delta * f[:-1])
            + w.kappa_half * (f[1:] - f[:-1]) / w.dx)


def numerical_flux(f, w: SchemeWeights, i: int) -> float:
    """Flux through interface ``i`` (between nodes i and i+1, 0-based)."""
    if not 0 <= i < w.grid.N - 1:
        raise IndexError(f"interface index {i} out of range")
    f = np.asarray(f, dtype=float)
    return float(w.C[i] * ((1.0 - w.delta[i]) * f[i + 1] + w.delta[i] * f[i])
                 + w.kappa_half[i] * (f[i + 1] - f[i]) / w.dx)


def rhs(f, w: SchemeWeights) -> np.ndarray:
    F = fluxes(f, w)
    out = np.empty(len(F) + 1)
    out[0] = F[0]
    out[1:-1] = F[1:] - F[:-1]
    out[-1] = -F[-1]
    return out / w.dx


def equilibrium_samples(model: FPModel, grid: Grid) -> np.ndarray:
    """Steady state on the truncated domain: e at the nodes, scaled to unit discrete mass."""
    e = model.density.pdf(grid.x)
    return e / (grid.dx * np.sum(e))
