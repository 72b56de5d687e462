"""Closed forms for the model operator -Delta - mu/|x|^2 on R^N minus origin.

Indicial roots tau_-(mu) <= tau_+(mu) solve tau*(tau+N-2)+mu = 0. The model
fundamental solutions are

    phi_mu(r) = r^tau_-                  (mu < mu0)
                r^{-(N-2)/2} * (-ln r)   (mu = mu0, sign-changing)
    gamma_mu(r) = r^tau_+

with mu0 = (N-2)^2/4 the critical coupling. The normalization constant of the
weighted Dirac-mass identity is c_mu = 2*sqrt(mu0-mu)*|S^{N-1}| below mu0 and
|S^{N-1}| at mu0. The interpolating potential family is

    v_rho(r) = r^{-2} * (1 + rho r^2) / (1 + r^2),

coupling 1 at the origin and rho at infinity.

All powers are evaluated as exp(a*ln r) so radii across [1e-12, 1e12] neither
overflow nor lose the exponent.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from .errors import (
    DegenerateMu,
    MuOutOfRange,
    NonpositiveRadius,
    RhoBelowOne,
)

__all__ = [
    "DimensionParams",
    "TauPair",
    "PotentialSpec",
    "MuParams",
    "dimension_params",
    "tau_pair",
    "mu_params",
    "phi_mu",
    "gamma_mu",
    "green_ball_closed_form",
    "v_rho",
    "inverse_square_potential",
    "vrho_potential",
    "custom_potential",
    "rpow",
]


def rpow(r, a):
    """r**a via exp(a*ln r); r may be a positive scalar or array."""
    return np.exp(a * np.log(r))


def _check_radius(r):
    if np.any(np.asarray(r) <= 0.0):
        raise NonpositiveRadius(f"radius must be positive, got {r}")


@dataclass(frozen=True)
class DimensionParams:
    """Dimension-dependent constants.

    sphere_area is the surface measure of the unit sphere, 2*pi^{N/2}/Gamma(N/2);
    c_N = 1/((N-2)*sphere_area) normalizes the Newtonian kernel c_N |x|^{2-N}.
    """

    N: int
    mu0: float = field(init=False)
    sphere_area: float = field(init=False)
    c_N: float = field(init=False)

    def __post_init__(self):
        if self.N < 3:
            raise MuOutOfRange(f"dimension must be >= 3, got {self.N}")
        object.__setattr__(self, "mu0", (self.N - 2) ** 2 / 4.0)
        area = 2.0 * math.pi ** (self.N / 2.0) / math.gamma(self.N / 2.0)
        object.__setattr__(self, "sphere_area", area)
        object.__setattr__(self, "c_N", 1.0 / ((self.N - 2) * area))


def dimension_params(N: int) -> DimensionParams:
    return DimensionParams(N)


@dataclass(frozen=True)
class TauPair:
    """Indicial roots of tau*(tau+N-2)+mu = 0."""

    tau_minus: float
    tau_plus: float
    degenerate: bool


def tau_pair(mu: float, dim: DimensionParams) -> TauPair:
    """Both indicial roots; degenerate flag set iff mu equals mu0 exactly."""
    if not (0.0 < mu <= dim.mu0):
        raise MuOutOfRange(f"mu must lie in (0, {dim.mu0}], got {mu}")
    half = (dim.N - 2) / 2.0
    if mu == dim.mu0:
        return TauPair(-half, -half, True)
    root = math.sqrt(dim.mu0 - mu)
    return TauPair(-half - root, -half + root, False)


@dataclass(frozen=True)
class PotentialSpec:
    """A radial inverse-square-type potential with shape metadata.

    kind is one of "inverse_square", "vrho", "custom". c0 bounds |V - r^{-2}|
    uniformly (signed per regime). origin_limit and infinity_limit are the
    limits of V(r)*r^2 at 0 and infinity. Custom potentials carry a
    numpy-vectorized evaluator and the Holder exponent of their deviation,
    used to bound series truncation; smoothness is not verified at runtime
    beyond finite sampling.
    """

    kind: str
    rho: Optional[float] = None
    evaluator: Optional[Callable] = None
    holder_gamma: Optional[float] = None
    c0: float = 0.0
    origin_limit: float = 1.0
    infinity_limit: float = 1.0

    def __call__(self, r):
        _check_radius(r)
        r = np.asarray(r, dtype=float)
        if self.kind == "inverse_square":
            out = rpow(r, -2.0)
        elif self.kind == "vrho":
            out = (1.0 + self.rho * r * r) / (1.0 + r * r) * rpow(r, -2.0)
        else:
            out = np.asarray(self.evaluator(r), dtype=float)
        return out if out.ndim else float(out)

    def deviation(self, r):
        """V(r) - r^{-2}, in a cancellation-free form where one exists."""
        _check_radius(r)
        r = np.asarray(r, dtype=float)
        if self.kind == "inverse_square":
            out = np.zeros_like(r)
        elif self.kind == "vrho":
            out = (self.rho - 1.0) / (1.0 + r * r)
        else:
            out = np.asarray(self.evaluator(r), dtype=float) - rpow(r, -2.0)
        return out if out.ndim else float(out)

    def coupling(self, r):
        """V(r) * r^2."""
        _check_radius(r)
        r = np.asarray(r, dtype=float)
        if self.kind == "inverse_square":
            out = np.ones_like(r)
        elif self.kind == "vrho":
            out = (1.0 + self.rho * r * r) / (1.0 + r * r)
        else:
            out = np.asarray(self.evaluator(r), dtype=float) * r * r
        return out if out.ndim else float(out)

    def cache_key(self):
        if self.kind == "custom":
            return (self.kind, id(self.evaluator))
        return (self.kind, self.rho)


def inverse_square_potential() -> PotentialSpec:
    return PotentialSpec(kind="inverse_square", c0=0.0, origin_limit=1.0,
                         infinity_limit=1.0)


def vrho_potential(rho: float) -> PotentialSpec:
    if rho < 1.0:
        raise RhoBelowOne(f"rho must be >= 1, got {rho}")
    return PotentialSpec(kind="vrho", rho=float(rho), c0=rho - 1.0,
                         origin_limit=1.0, infinity_limit=float(rho))


def custom_potential(evaluator, holder_gamma, c0, origin_limit,
                     infinity_limit) -> PotentialSpec:
    return PotentialSpec(kind="custom", evaluator=evaluator,
                         holder_gamma=float(holder_gamma), c0=float(c0),
                         origin_limit=float(origin_limit),
                         infinity_limit=float(infinity_limit))


def v_rho(rho: float, r):
    """The interpolating family value V_rho(r)."""
    if rho < 1.0:
        raise RhoBelowOne(f"rho must be >= 1, got {rho}")
    _check_radius(r)
    r = np.asarray(r, dtype=float)
    out = (1.0 + rho * r * r) / (1.0 + r * r) * rpow(r, -2.0)
    return out if out.ndim else float(out)


@dataclass(frozen=True)
class MuParams:
    """Coupling mu with its dimension block, indicial roots and mass constant."""

    mu: float
    dim: DimensionParams
    taus: TauPair
    c_mu: float


def mu_params(mu: float, dim: DimensionParams) -> MuParams:
    taus = tau_pair(mu, dim)
    if taus.degenerate:
        c = dim.sphere_area
    else:
        c = 2.0 * math.sqrt(dim.mu0 - mu) * dim.sphere_area
    return MuParams(float(mu), dim, taus, c)


def phi_mu(params: MuParams, r):
    """Singular model solution: r^tau_- below mu0, r^{-(N-2)/2}(-ln r) at mu0."""
    _check_radius(r)
    r = np.asarray(r, dtype=float)
    if params.taus.degenerate:
        out = rpow(r, params.taus.tau_minus) * (-np.log(r))
    else:
        out = rpow(r, params.taus.tau_minus)
    return out if out.ndim else float(out)


def gamma_mu(params: MuParams, r):
    """Regular model solution r^tau_+."""
    _check_radius(r)
    r = np.asarray(r, dtype=float)
    out = rpow(r, params.taus.tau_plus)
    return out if out.ndim else float(out)


def green_ball_closed_form(params: MuParams, R: float, r):
    """Ball kernel r^tau_- - R^{tau_- - tau_+} r^tau_+; zero at r=R.

    Defined for mu < mu0 only; no closed form is provided at the critical
    coupling (the radial solver handles that case numerically).
    """
    if params.taus.degenerate:
        raise DegenerateMu("ball kernel closed form requires mu < mu0")
    _check_radius(r)
    if R <= 0:
        raise NonpositiveRadius(f"ball radius must be positive, got {R}")
    if np.any(np.asarray(r) > R * (1 + 1e-12)):
        raise NonpositiveRadius(f"requires r <= R = {R}")
    r = np.asarray(r, dtype=float)
    tm, tp = params.taus.tau_minus, params.taus.tau_plus
    out = rpow(r, tm) - rpow(R, tm - tp) * rpow(r, tp)
    return out if out.ndim else float(out)
