import math
from dataclasses import replace

import numpy as np
import pytest

from spfp.integrators import (Method, NumericalFailure, SolverState, TimeIntegrator, advance, cfl_dt_explicit,
                              cfl_dt_implicit, implicit_euler_step, rk4_step, ssp_rk3_step, step_schedule)
from spfp.models import FPModel, Gaussian, GeneralizedGaussian
from spfp.scheme import build_grid, build_weights, equilibrium_samples

GAUSS = FPModel(Gaussian(), 0.01)


def bimodal(grid):
    x = grid.x
    f = np.exp(-2.5 * (x - 1) ** 2) + np.exp(-2.5 * (x + 1) ** 2)
    return f / (grid.dx * f.sum())


@pytest.fixture(scope="module")
def test1():
    g = build_grid(5, 101)
    return g, build_weights(GAUSS, g, "exact")


def test_integrator_validation():
    with pytest.raises(ValueError):
        TimeIntegrator("rk4", 0.0)
    with pytest.raises(ValueError):
        TimeIntegrator("rk4", math.inf)
    with pytest.raises(ValueError):
        TimeIntegrator("euler", 0.1)
    assert TimeIntegrator("ssp_rk3", 0.1).method is Method.SSP_RK3


def test_cfl_formulas(test1):
    _, w = test1
    flat = replace(w, C=np.zeros_like(w.C), kappa_half=np.ones_like(w.kappa_half))
    assert cfl_dt_explicit(flat, 0.1) == pytest.approx(0.005, rel=1e-15)
    assert cfl_dt_implicit(flat, 0.1) == math.inf
    unit = replace(w, C=np.ones_like(w.C))
    assert cfl_dt_implicit(unit, 0.1) == pytest.approx(0.05, rel=1e-15)
    doubled = replace(w, kappa_half=2 * w.kappa_half)
    assert cfl_dt_explicit(doubled) < cfl_dt_explicit(w)


def test_cfl_on_test1(test1):
    g, w = test1
    diffusive = g.dx ** 2 / 5
    assert cfl_dt_explicit(w) >= diffusive
    assert cfl_dt_implicit(w) >= cfl_dt_explicit(w)


@pytest.mark.parametrize("method", list(Method))
def test_equilibrium_is_fixed_point(test1, method):
    g, w = test1
    e = equilibrium_samples(GAUSS, g)
    state = SolverState(0.0, e.copy())
    integ = TimeIntegrator(method, 0.002)
    for _ in range(20):
        state = advance(state, w, integ)
    assert np.max(np.abs(state.f - e)) <= 1e-14


@pytest.mark.parametrize("method", [Method.SSP_RK3, Method.IMPLICIT_EULER])
def test_positivity_under_cfl(test1, method):
    g, w = test1
    bound = cfl_dt_explicit(w) if method is Method.SSP_RK3 else cfl_dt_implicit(w)
    state = SolverState(0.0, bimodal(g))
    integ = TimeIntegrator(method, bound)
    for _ in range(300):
        state = advance(state, w, integ)
        assert np.min(state.f) >= 0


def test_implicit_euler_keeps_positivity_at_large_steps(test1):
    g, w = test1
    state = SolverState(0.0, bimodal(g))
    integ = TimeIntegrator("implicit_euler", 1.0)
    for _ in range(10):
        state = advance(state, w, integ)
        assert np.min(state.f) >= 0


@pytest.mark.parametrize("method", list(Method))
def test_mass_conserved(test1, method):
    g, w = test1
    f0 = bimodal(g)
    state = SolverState(0.0, f0)
    integ = TimeIntegrator(method, 0.002)
    for _ in range(500):
        state = advance(state, w, integ)
    assert abs(g.dx * state.mass - 1.0) <= 1e-13


def test_step_functions_agree_with_advance(test1):
    g, w = test1
    f = bimodal(g)
    for step, method in ((rk4_step, "rk4"), (ssp_rk3_step, "ssp_rk3"), (implicit_euler_step, "implicit_euler")):
        s = advance(SolverState(0.0, f), w, TimeIntegrator(method, 0.001))
        assert np.array_equal(s.f, step(f, w, 0.001))
        assert s.t == 0.001 and s.step_count == 1


def test_implicit_euler_solves_linear_system(test1):
    g, w = test1
    f = bimodal(g)
    dt = 0.05
    fn = implicit_euler_step(f, w, dt)
    lower, diag, upper = w.tridiagonal()
    A = np.diag(diag) + np.diag(lower[1:], -1) + np.diag(upper[:-1], 1)
    assert np.allclose(fn - dt * A @ fn, f, atol=1e-13)


def _run(f, w, method, dt, T):
    state = SolverState(0.0, f)
    integ = TimeIntegrator(method, dt)
    for h in step_schedule(T, dt):
        state = advance(state, w, integ, h)
    return state.f


@pytest.mark.parametrize("method, order", [("rk4", 4), ("ssp_rk3", 3), ("implicit_euler", 1)])
def test_self_convergence_order(method, order):
    g = build_grid(5, 41)
    w = build_weights(GAUSS, g, "exact")
    f0 = bimodal(g)
    dts = [0.004, 0.002, 0.001, 0.0005]
    sols = [_run(f0, w, method, dt, 0.2) for dt in dts]
    diffs = [g.dx * np.sum(np.abs(a - b)) for a, b in zip(sols[:-1], sols[1:])]
    slope = np.polyfit(np.log(dts[:-1]), np.log(diffs), 1)[0]
    assert slope == pytest.approx(order, abs=0.3)


def test_rk4_single_step_local_error():
    # one step against two half-steps: difference O(dt^5)
    g = build_grid(5, 41)
    w = build_weights(FPModel(GeneralizedGaussian(3.0)), g, "spG")
    f0 = bimodal(g)
    dts = np.array([0.004, 0.002, 0.001])
    diffs = [np.max(np.abs(rk4_step(f0, w, dt) - rk4_step(rk4_step(f0, w, dt / 2), w, dt / 2))) for dt in dts]
    slope = np.polyfit(np.log(dts), np.log(diffs), 1)[0]
    assert slope == pytest.approx(5.0, abs=0.3)


def test_negativity_raises(test1):
    g, w = test1
    f = np.zeros(g.N)
    f[50] = 1 / g.dx
    with pytest.raises(NumericalFailure, match="negative"):
        advance(SolverState(0.0, f), w, TimeIntegrator("rk4", 0.05))


def test_nan_raises(test1):
    g, w = test1
    f = bimodal(g)
    f[3] = np.nan
    with pytest.raises(NumericalFailure, match="non-finite"):
        advance(SolverState(0.0, f), w, TimeIntegrator("rk4", 0.001))


def test_step_schedule_hits_end_time():
    steps = step_schedule(1.0, 0.3)
    assert len(steps) == 4
    assert math.fsum(steps) == pytest.approx(1.0, abs=1e-15)
    long = step_schedule(40.0, 0.002)
    assert len(long) == 20000
    assert math.fsum(long) == pytest.approx(40.0, abs=1e-12)
