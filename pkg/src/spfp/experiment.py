"""Run configuration, initial data, the time loop and file output."""

from __future__ import annotations

import csv
import dataclasses
import logging
import math
import warnings
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .diagnostics import DiagnosticRecord, entropy_comparison_constants, record
from .integrators import (Method, NumericalFailure, SolverState, TimeIntegrator, advance,
                          cfl_dt_explicit, cfl_dt_implicit, step_schedule)
from .models import DEFAULT_EPS, FPModel, Gaussian, GeneralizedGaussian
from .scheme import WEIGHT_MODES, Grid, SchemeWeights, build_grid, build_weights, equilibrium_samples

log = logging.getLogger(__name__)

BIMODAL_C = 2.5
DIAGNOSTIC_COLUMNS = ("t", "mass", "entropy", "dissipation", "hellinger", "rel_l1", "d_p", "moment")


class ConfigError(ValueError):
    pass


class CFLViolation(NumericalFailure):
    pass


@dataclass
class RunConfig:
    test: str = "gaussian"
    beta: float = 3.0
    eps: float = DEFAULT_EPS
    L: float = 5.0
    N: int = 101
    T: float = 40.0
    dt: str = "diffusive"
    integrator: str = "rk4"
    weights: str = "exact"
    initial: str = "bimodal"
    out: str | None = None
    record_every: int = 50
    strict_cfl: bool = False
    p: float = 0.75
    plots: bool = False

    def __post_init__(self):
        try:
            self.beta = float(self.beta)
            self.eps = float(self.eps)
            self.L = float(self.L)
            self.N = int(self.N)
            self.T = float(self.T)
            self.record_every = int(self.record_every)
            self.p = float(self.p)
            self.dt = str(self.dt)
        except (TypeError, ValueError) as exc:
            raise ConfigError(f"bad numeric config value: {exc}") from exc
        self.strict_cfl = _as_bool(self.strict_cfl)
        self.plots = _as_bool(self.plots)
        if self.test not in ("gaussian", "generalized_gaussian"):
            raise ConfigError(f"test must be 'gaussian' or 'generalized_gaussian', got {self.test!r}")
        for name in ("eps", "L", "T", "p"):
            if not getattr(self, name) > 0:
                raise ConfigError(f"{name} must be positive")
        if self.test == "generalized_gaussian" and not self.beta > 0.5:
            raise ConfigError("beta must exceed 1/2")
        if self.N < 3:
            raise ConfigError("N must be at least 3")
        if self.record_every < 1:
            raise ConfigError("record_every must be at least 1")
        if not 0.5 <= self.p <= 1.0:
            raise ConfigError("p must lie in [1/2, 1]")
        if self.weights not in WEIGHT_MODES:
            raise ConfigError(f"weights must be one of {sorted(WEIGHT_MODES)}")
        try:
            Method(self.integrator)
        except ValueError:
            raise ConfigError(f"integrator must be one of {[m.value for m in Method]}") from None
        if self.dt not in ("diffusive", "cfl"):
            try:
                if not float(self.dt) > 0:
                    raise ValueError
            except ValueError:
                raise ConfigError(f"dt must be 'diffusive', 'cfl' or a positive number, got {self.dt!r}") from None

    def model(self) -> FPModel:
        density = Gaussian() if self.test == "gaussian" else GeneralizedGaussian(self.beta)
        return FPModel(density, self.eps)

    def grid(self) -> Grid:
        return build_grid(self.L, self.N)


def _as_bool(v) -> bool:
    if isinstance(v, str):
        if v.strip().lower() in ("1", "true", "yes", "on"):
            return True
        if v.strip().lower() in ("0", "false", "no", "off", ""):
            return False
        raise ConfigError(f"not a boolean: {v!r}")
    return bool(v)


def read_config_file(path) -> dict:
    """Flat ``key = value`` lines; ``#`` starts a comment."""
    out = {}
    fields = {f.name for f in dataclasses.fields(RunConfig)}
    try:
        lines = Path(path).read_text().splitlines()
    except OSError as exc:
        raise ConfigError(f"cannot read config file {path}: {exc}") from exc
    for n, line in enumerate(lines, 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{path}:{n}: expected key = value")
        key, value = (s.strip() for s in line.split("=", 1))
        key = key.replace("-", "_")
        if key not in fields:
            raise ConfigError(f"{path}:{n}: unknown key {key!r}")
        out[key] = value
    return out


def build_initial(config: RunConfig, grid: Grid, model: FPModel | None = None) -> np.ndarray:
    """Initial cell values with unit discrete mass."""
    x = grid.x
    if config.initial == "bimodal":
        f = np.exp(-BIMODAL_C * (x - 1.0) ** 2) + np.exp(-BIMODAL_C * (x + 1.0) ** 2)
    elif config.initial == "equilibrium":
        return equilibrium_samples(model or config.model(), grid)
    else:
        try:
            data = np.loadtxt(config.initial, ndmin=2)
        except (OSError, ValueError) as exc:
            raise ConfigError(f"cannot read initial data {config.initial}: {exc}") from exc
        if data.shape[1] != 2:
            raise ConfigError(f"{config.initial}: expected two columns x, f")
        if np.any(data[:, 1] < 0) or not np.any(data[:, 1] > 0):
            raise ConfigError(f"{config.initial}: values must be nonnegative and not all zero")
        f = np.interp(x, data[:, 0], data[:, 1], left=0.0, right=0.0)
        if not np.any(f > 0):
            raise ConfigError(f"{config.initial}: no mass on the grid")
    return f / (grid.dx * math.fsum(f))


def resolve_dt(config: RunConfig, w: SchemeWeights, grid: Grid) -> tuple[float, float]:
    """(dt, positivity bound for the chosen integrator)."""
    method = Method(config.integrator)
    bound = cfl_dt_implicit(w) if method is Method.IMPLICIT_EULER else cfl_dt_explicit(w)
    # dx^2 / L, written so that e.g. L = 5, N = 101 gives exactly 0.002
    diffusive = 4.0 * config.L / (config.N - 1) ** 2
    if config.dt == "diffusive":
        dt = diffusive
        if dt > bound:
            if config.strict_cfl:
                dt = bound
            else:
                warnings.warn(f"dt = dx^2/L = {diffusive:.6g} exceeds the positivity bound {bound:.6g}",
                              RuntimeWarning, stacklevel=2)
    elif config.dt == "cfl":
        dt = bound if math.isfinite(bound) else diffusive
    else:
        dt = float(config.dt)
        if dt > bound:
            if config.strict_cfl:
                raise CFLViolation(f"dt = {dt:.6g} exceeds the positivity bound {bound:.6g}")
            warnings.warn(f"dt = {dt:.6g} exceeds the positivity bound {bound:.6g}", RuntimeWarning,
                          stacklevel=2)
    return dt, bound


@dataclass
class RunResult:
    config: RunConfig
    records: list[DiagnosticRecord]
    f: np.ndarray
    grid: Grid
    e: np.ndarray
    weights: SchemeWeights
    dt: float
    dt_bound: float
    min_f: float = math.inf
    max_mass_drift: float = 0.0
    entropy_constants: dict = field(default_factory=dict)

    def series(self, name: str) -> np.ndarray:
        return np.array([getattr(r, name) for r in self.records], dtype=float)


def run_experiment(config: RunConfig, write: bool = True, every_step=None) -> RunResult:
    """Build model, grid and weights, integrate to ``config.T`` and record diagnostics.

    ``every_step(state)`` is called after each step when given.
    """
    model = config.model()
    grid = config.grid()
    w = build_weights(model, grid, config.weights)
    e = equilibrium_samples(model, grid)
    f0 = build_initial(config, grid, model)
    dt, bound = resolve_dt(config, w, grid)
    integ = TimeIntegrator(config.integrator, dt)

    beta = config.beta if config.test == "generalized_gaussian" else None
    # equilibrium restricted to the grid: c (1+x^2)^-beta with c fixed by unit discrete mass
    c_beta = None
    if beta is not None:
        c_beta = float(e[0] * (1.0 + grid.x[0] ** 2) ** beta)
    p = config.p

    def rec(state):
        return record(state.t, state.f, e, w, p=p, beta=beta, c_beta=c_beta)

    state = SolverState(0.0, f0)
    mass0 = math.fsum(f0)
    records = [rec(state)]
    min_f = float(np.min(f0))
    drift = 0.0
    schedule = step_schedule(config.T, dt)
    log.info("running %s to T=%g with dt=%.6g (%d steps)", config.test, config.T, dt, len(schedule))
    for n, h in enumerate(schedule, 1):
        state = advance(state, w, integ, h)
        # n * dt instead of the running sum keeps recorded times free of drift
        state = dataclasses.replace(state, t=config.T if n == len(schedule) else n * dt)
        min_f = min(min_f, float(np.min(state.f)))
        drift = max(drift, abs(math.fsum(state.f) - mass0) / mass0)
        if every_step is not None:
            every_step(state)
        if n % config.record_every == 0 or n == len(schedule):
            records.append(rec(state))

    result = RunResult(config, records, state.f, grid, e, w, dt, bound, min_f, drift)
    result.entropy_constants = entropy_comparison_constants(records[0].entropy, COMPARISON_FUNCTIONS)
    if write and config.out:
        emit_outputs(result)
    return result


# comparison curves for the entropy; (1+t)^-1 stands in for 1/t so both are finite at t = 0
COMPARISON_FUNCTIONS = {
    "inverse": lambda t: 1.0 / (1.0 + t),
    "exp_quarter": lambda t: math.exp(-t / 4.0),
}


def _fmt(v) -> str:
    if v is None:
        return ""
    return format(float(v), ".17g")


def emit_outputs(result: RunResult, out_dir=None) -> list[Path]:
    out = Path(out_dir or result.config.out)
    try:
        out.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise OSError(f"cannot create output directory {out}: {exc}") from exc
    written = []

    path = out / "diagnostics.csv"
    with open(path, "w", newline="") as fh:
        wr = csv.writer(fh, lineterminator="\n")
        wr.writerow(DIAGNOSTIC_COLUMNS)
        for r in result.records:
            wr.writerow([_fmt(getattr(r, c)) for c in DIAGNOSTIC_COLUMNS])
    written.append(path)

    path = out / "solution.csv"
    with open(path, "w", newline="") as fh:
        wr = csv.writer(fh, lineterminator="\n")
        wr.writerow(("x", "f", "e"))
        for row in zip(result.grid.x, result.f, result.e):
            wr.writerow([_fmt(v) for v in row])
    written.append(path)

    path = out / "manifest.txt"
    with open(path, "w") as fh:
        for key, value in dataclasses.asdict(result.config).items():
            fh.write(f"{key} = {value}\n")
        fh.write(f"resolved_dt = {_fmt(result.dt)}\n")
        fh.write(f"positivity_dt_bound = {_fmt(result.dt_bound)}\n")
        fh.write(f"dx = {_fmt(result.grid.dx)}\n")
        fh.write(f"m_eps = {_fmt(result.config.model().m_eps)}\n")
        fh.write(f"steps = {len(step_schedule(result.config.T, result.dt))}\n")
        for name, c in result.entropy_constants.items():
            fh.write(f"entropy_comparison_{name} = {_fmt(c)}\n")
    written.append(path)

    if result.config.plots:
        written.extend(_plots(result, out))
    return written


def _plots(result: RunResult, out: Path) -> list[Path]:
    import matplotlib
    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    # fixed id salt so identical runs give identical SVG bytes
    matplotlib.rcParams["svg.hashsalt"] = "spfp"

    t = result.series("t")
    H = result.series("entropy")
    fig, ax = plt.subplots(figsize=(5, 3.5))
    pos = H > 0
    ax.semilogy(t[pos], H[pos], label="H")
    for name, c in result.entropy_constants.items():
        fn = COMPARISON_FUNCTIONS[name]
        ax.semilogy(t, [c * fn(s) for s in t], "--", label=name)
    ax.set_xlabel("t")
    ax.set_ylabel("relative entropy")
    ax.legend()
    fig.tight_layout()
    p1 = out / "entropy.svg"
    fig.savefig(p1, metadata={"Date": None})
    plt.close(fig)

    fig, ax = plt.subplots(figsize=(5, 3.5))
    ax.plot(result.grid.x, result.f, label="f(T)")
    ax.plot(result.grid.x, result.e, ":", label="e")
    ax.set_xlabel("x")
    ax.legend()
    fig.tight_layout()
    p2 = out / "solution.svg"
    fig.savefig(p2, metadata={"Date": None})
    plt.close(fig)
    return [p1, p2]
