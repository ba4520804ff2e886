"""Explicit RK4, SSP-RK3 and backward Euler for the semi-discrete scheme."""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, replace

import numpy as np
from scipy.linalg import solve_banded

from .scheme import SchemeWeights, rhs

NEGATIVITY_FLOOR = -1e-12


class NumericalFailure(ArithmeticError):
    """NaN, a negative density or a singular implicit system during time stepping."""


class Method(str, enum.Enum):
    RK4 = "rk4"
    SSP_RK3 = "ssp_rk3"
    IMPLICIT_EULER = "implicit_euler"


@dataclass(frozen=True)
class TimeIntegrator:
    method: Method
    dt: float

    def __post_init__(self):
        object.__setattr__(self, "method", Method(self.method))
        if not (self.dt > 0 and math.isfinite(self.dt)):
            raise ValueError(f"dt must be positive and finite, got {self.dt!r}")


@dataclass(frozen=True)
class SolverState:
    """Time, cell values and the compensation term of the summed updates.

    ``carry`` holds the low-order bits lost when adding each increment to
    ``f`` (Kahan summation); without it the rounding of tiny increments near
    equilibrium makes the discrete mass drift.
    """

    t: float
    f: np.ndarray
    step_count: int = 0
    carry: np.ndarray | None = None

    @property
    def mass(self) -> float:
        return math.fsum(self.f)


def cfl_dt_explicit(w: SchemeWeights, dx: float | None = None) -> float:
    """Positivity bound dx^2 / (2 (M dx + D)) for SSP explicit steps."""
    dx = w.dx if dx is None else dx
    M = float(np.max(np.abs(w.C)))
    D = float(np.max(w.kappa_half))
    return dx * dx / (2.0 * (M * dx + D))


def cfl_dt_implicit(w: SchemeWeights, dx: float | None = None) -> float:
    """Bound dx / (2M) for the implicit step; ``inf`` without drift."""
    dx = w.dx if dx is None else dx
    M = float(np.max(np.abs(w.C)))
    return math.inf if M == 0 else dx / (2.0 * M)


# Steppers return the increment f^{n+1} - f^n rather than the new state.

def rk4_increment(f, w, dt):
    k1 = rhs(f, w)
    k2 = rhs(f + 0.5 * dt * k1, w)
    k3 = rhs(f + 0.5 * dt * k2, w)
    k4 = rhs(f + dt * k3, w)
    return dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4)


def ssp_rk3_increment(f, w, dt):
    """Shu-Osher three-stage SSP scheme, written as an increment."""
    k1 = rhs(f, w)
    f1 = f + dt * k1
    k2 = rhs(f1, w)
    f2 = f + 0.25 * dt * (k1 + k2)
    k3 = rhs(f2, w)
    return dt / 6.0 * (k1 + k2 + 4.0 * k3)


def implicit_euler_increment(f, w, dt):
    # (I - dt A) d = dt A f  <=>  (I - dt A)(f + d) = f
    lower, diag, upper = w.tridiagonal()
    n = len(f)
    ab = np.zeros((3, n))
    ab[0, 1:] = -dt * upper[:-1]
    ab[1] = 1.0 - dt * diag
    ab[2, :-1] = -dt * lower[1:]
    try:
        return solve_banded((1, 1), ab, dt * rhs(f, w))
    except (np.linalg.LinAlgError, ValueError) as exc:
        raise NumericalFailure(f"singular backward Euler system (dt={dt}): {exc}") from exc


def rk4_step(f, w, dt):
    return f + rk4_increment(f, w, dt)


def ssp_rk3_step(f, w, dt):
    return f + ssp_rk3_increment(f, w, dt)


def implicit_euler_step(f, w, dt):
    return f + implicit_euler_increment(f, w, dt)


_INCREMENTS = {
    Method.RK4: rk4_increment,
    Method.SSP_RK3: ssp_rk3_increment,
    Method.IMPLICIT_EULER: implicit_euler_increment,
}


def advance(state: SolverState, w: SchemeWeights, integ: TimeIntegrator, dt: float | None = None) -> SolverState:
    """One step of ``integ`` (or of length ``dt`` when given, e.g. a final partial step)."""
    dt = integ.dt if dt is None else dt
    inc = _INCREMENTS[integ.method](state.f, w, dt)
    carry = np.zeros_like(state.f) if state.carry is None else state.carry
    y = inc - carry
    f = state.f + y
    carry = (f - state.f) - y
    if not np.all(np.isfinite(f)):
        raise NumericalFailure(f"non-finite values after step {state.step_count + 1} (t={state.t + dt})")
    fmin = float(np.min(f))
    if fmin < NEGATIVITY_FLOOR:
        raise NumericalFailure(
            f"negative density {fmin:.3e} after step {state.step_count + 1} (t={state.t + dt}) "
            f"with {integ.method.value}, dt={dt}"
        )
    return replace(state, t=state.t + dt, f=f, step_count=state.step_count + 1, carry=carry)


def step_schedule(T: float, dt: float) -> list[float]:
    """Step sizes reaching ``T`` exactly; the last one is clamped."""
    n = max(1, math.ceil(T / dt - 1e-9))
    steps = [dt] * (n - 1)
    steps.append(T - dt * (n - 1))
    return steps
