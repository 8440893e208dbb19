"""Monte Carlo LRM hedge ratios for IG-OU Barndorff-Nielsen--Shephard models."""

__version__ = "0.1.0"

from .errors import AssumptionError, GridRejectedError, InvalidStateError
from .levy_kernel import LevyKernel
from .lrm import LrmResult, SweepResult, lrm_call, lrm_put, strike_sweep
from .model import PRESETS, BnsModel, ModelParams, check_assumption, preset
from .paths import McConfig, simulate_path, simulate_terminal
from .pricer import McEstimate, digital_term, price_call, price_put
from .quadrature import QuadratureGrid, build_grid, integrate_against_g

__all__ = [
    "AssumptionError", "BnsModel", "GridRejectedError", "InvalidStateError", "LevyKernel",
    "LrmResult", "McConfig", "McEstimate", "ModelParams", "PRESETS", "QuadratureGrid", "SweepResult",
    "build_grid", "check_assumption", "digital_term", "integrate_against_g", "lrm_call", "lrm_put",
    "preset", "price_call", "price_put", "simulate_path", "simulate_terminal", "strike_sweep",
]
