"""Structure-preserving finite-volume solver for Fokker-Planck equations with a tanh drift
and a position-dependent diffusion chosen so that a prescribed density is stationary."""

from .models import FPModel, Gaussian, GeneralizedGaussian, TabulatedDensity
from .scheme import Grid, build_grid, build_weights, equilibrium_samples
from .integrators import Method, SolverState, TimeIntegrator, advance
from .experiment import RunConfig, run_experiment

__all__ = [
    "FPModel", "Gaussian", "GeneralizedGaussian", "TabulatedDensity",
    "Grid", "build_grid", "build_weights", "equilibrium_samples",
    "Method", "SolverState", "TimeIntegrator", "advance",
    "RunConfig", "run_experiment",
]
__version__ = "0.1.0"
