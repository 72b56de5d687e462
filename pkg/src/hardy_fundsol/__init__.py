"""Solver and verifier for fundamental solutions of Schrodinger operators
with inverse-square potentials on punctured space."""

__version__ = "0.1.0"

from .closed_forms import (
    DimensionParams,
    MuParams,
    PotentialSpec,
    TauPair,
    custom_potential,
    dimension_params,
    gamma_mu,
    green_ball_closed_form,
    inverse_square_potential,
    mu_params,
    phi_mu,
    tau_pair,
    v_rho,
    vrho_potential,
)
from .grid import LogGrid, RadialFunction, default_grid

__all__ = [
    "__version__",
    "DimensionParams", "MuParams", "PotentialSpec", "TauPair",
    "custom_potential", "dimension_params", "gamma_mu",
    "green_ball_closed_form", "inverse_square_potential", "mu_params",
    "phi_mu", "tau_pair", "v_rho", "vrho_potential",
    "LogGrid", "RadialFunction", "default_grid",
]
