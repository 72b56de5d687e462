"""Singular radial ODE engine.

For radial V the equation (-Delta - mu V) u = 0 reduces in s = ln r to

    w'' + (N-2) w' + q(s) w = 0,      q(s) = mu V(e^s) e^{2s}.

Near the origin the two local solutions behave like r^tau_- (singular branch)
and r^tau_+ (regular branch); series initialization at small radius seeds the
integrator. Ball problems on B_R with boundary value zero and prescribed
singular data k are solved by two-branch superposition

    u = k u_sing + c u_reg,    c = -k u_sing(R) / u_reg(R).

The full-space minimal solution with mass k is the increasing limit of the
ball solutions. Raw zero-boundary probes converge only algebraically in R, so
the convergence test matches each stage against the decaying far-field branch
instead: when the coupling at infinity is subcritical, the fast branch
r^{lambda_-} is integrated inward from R (its stable direction) and glued to
the origin basis through Wronskians, which are exact invariants of the
equation up to the factor e^{-(N-2)s}. The resulting per-stage limit
estimates converge geometrically and their successive relative changes are
what the tolerance is applied to; the zero-boundary sequence is still built
and checked for the monotone increase that underpins minimality.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from . import kernels
from .closed_forms import MuParams, PotentialSpec, phi_mu
from .errors import (
    IntegrationOverflow,
    RminTooLarge,
    ScheduleTooShort,
    SeriesNotApplicable,
    StepFailure,
    RegularBranchVanishes,
    HardyFundsolError,
)
from .grid import LogGrid, RadialFunction

__all__ = [
    "LogGrid",
    "RadialFunction",
    "BallSolution",
    "MinimalSolutionResult",
    "ode_coefficients",
    "frobenius_init",
    "integrate",
    "solve_ball_bvp",
    "minimal_solution",
]

DEFAULT_TOL_ODE = 1e-10
DEFAULT_TOL_BVP = 1e-8
DEFAULT_TOL_MIN = 1e-8
DEFAULT_DIVERGENCE_CAP = 1e12

_TABLE_REFINE = 8


def ode_coefficients(potential: PotentialSpec, mu: float, s: float) -> float:
    """Zeroth-order coefficient q(s) = mu V(e^s) e^{2s} of the log-radius form."""
    return float(mu) * float(potential.coupling(math.exp(s)))


def _kernel_args(potential: PotentialSpec, mu: float, grid: LogGrid):
    """Map a potential onto compiled-kernel arguments (kind, rho, q-table)."""
    if potential.kind == "inverse_square":
        return kernels.KIND_INVERSE_SQUARE, 0.0, None, 0.0, 0.0
    if potential.kind == "vrho":
        return kernels.KIND_VRHO, float(potential.rho), None, 0.0, 0.0
    count = (grid.count - 1) * _TABLE_REFINE + 1
    s_t = np.linspace(grid.s_min, grid.s_max, count)
    table = mu * np.asarray(potential.coupling(np.exp(s_t)), dtype=float)
    inv_h = (count - 1) / (grid.s_max - grid.s_min)
    return kernels.KIND_TABLE, 0.0, table, grid.s_min, inv_h


def _indicial_poly(x: float, N: int, mu: float) -> float:
    return x * (x + N - 2) + mu


def _check_rmin(potential: PotentialSpec, r_min: float):
    """Deviation |V r^2 - 1| must stay <= 0.5 down from r_min (finite sampling)."""
    radii = r_min * np.logspace(-6, 0, 13)
    dev = np.abs(np.asarray(potential.coupling(radii)) - 1.0)
    if np.max(dev) > 0.5:
        raise RminTooLarge(
            f"|V r^2 - 1| exceeds 0.5 on (0, {r_min}]; move r_min inward"
        )


def _origin_series_coeffs(potential: PotentialSpec, params: MuParams,
                          tau: float, order: int):
    """Even-power correction coefficients a2, a4 (and the next one for the
    truncation estimate) of u = r^tau (1 + a2 r^2 + a4 r^4 + ...)."""
    N = params.dim.N
    mu = params.mu
    if potential.kind == "inverse_square":
        return [0.0, 0.0], 0.0
    if potential.kind != "vrho":
        if order > 0:
            raise SeriesNotApplicable(
                "only the leading term is supported for custom potentials"
            )
        return [0.0, 0.0], 0.0
    lam = mu * (potential.rho - 1.0)
    coeffs = [1.0]
    for kk in range(1, 4):
        den = _indicial_poly(tau + 2 * kk, N, mu)
        if abs(den) < 1e-9:
            raise SeriesNotApplicable(
                f"resonant correction at power tau+{2 * kk}"
            )
        acc = 0.0
        for m in range(1, kk + 1):
            acc += (-1.0) ** (m + 1) * coeffs[kk - m]
        coeffs.append(-lam * acc / den)
    a = coeffs[1:3]
    if order == 0:
        a = [0.0, 0.0]
        next_coeff = coeffs[1]
    elif order == 1:
        a = [coeffs[1], 0.0]
        next_coeff = coeffs[2]
    else:
        next_coeff = coeffs[3]
    return a, next_coeff


def frobenius_init(potential: PotentialSpec, params: MuParams, branch: str,
                   r_min: float, order: int = 2):
    """Series initialization (u, du/ds, relative truncation bound) at r_min.

    branch is "singular" or "regular". Power-law branches use
    u = r^tau (1 + a2 r^2 + a4 r^4); at the critical coupling the singular
    branch is r^{-(N-2)/2}(-ln r) with a (s-1) r^{tau+2} correction available
    at order 1 for the interpolating family.
    """
    if branch not in ("singular", "regular"):
        raise ValueError(f"unknown branch {branch!r}")
    if order not in (0, 1, 2):
        raise ValueError(f"order must be 0, 1 or 2, got {order}")
    _check_rmin(potential, r_min)
    s = math.log(r_min)
    taus = params.taus
    N = params.dim.N

    if taus.degenerate and branch == "singular":
        tau = taus.tau_minus
        lead = math.exp(tau * s) * (-s)
        dlead = math.exp(tau * s) * (-tau * s - 1.0)
        if potential.kind == "inverse_square":
            amp = 0.0
        elif potential.kind == "vrho":
            amp = params.mu * (potential.rho - 1.0) / 4.0
        else:
            if order > 0:
                raise SeriesNotApplicable(
                    "critical-coupling corrections only for the closed-form family"
                )
            amp = params.mu * potential.c0 / 4.0
        r2 = math.exp(2.0 * s)
        corr_rel = abs(amp) * r2 * (abs(s) + 1.0) / max(abs(s), 1.0)
        if order == 0 or potential.kind == "inverse_square":
            return lead, dlead, corr_rel
        if order == 2:
            raise SeriesNotApplicable(
                "second-order correction not available at the critical coupling"
            )
        g = amp * (s - 1.0) * math.exp((tau + 2.0) * s)
        dg = amp * math.exp((tau + 2.0) * s) * ((tau + 2.0) * (s - 1.0) + 1.0)
        trunc = corr_rel * corr_rel
        return lead + g, dlead + dg, trunc

    tau = taus.tau_minus if branch == "singular" else taus.tau_plus
    a, next_coeff = _origin_series_coeffs(potential, params, tau, order)
    r2 = math.exp(2.0 * s)
    r4 = r2 * r2
    base = math.exp(tau * s)
    u = base * (1.0 + a[0] * r2 + a[1] * r4)
    du = base * (tau + (tau + 2.0) * a[0] * r2 + (tau + 4.0) * a[1] * r4)
    if potential.kind == "custom":
        gam = potential.holder_gamma if potential.holder_gamma is not None else 1.0
        dev = abs(float(potential.coupling(r_min)) - 1.0)
        den = abs(_indicial_poly(tau + gam, N, params.mu))
        trunc = params.mu * dev / max(den, 1e-2)
    else:
        trunc = abs(next_coeff) * r2 ** (order + 1)
    return u, du, trunc


def _far_series_coeffs(potential: PotentialSpec, params: MuParams, lam: float,
                       order: int):
    """Inverse-power corrections of the far-field branch r^lam (1 + b2 r^-2 + ...)."""
    N = params.dim.N
    mu = params.mu
    t_inf = potential.infinity_limit
    if potential.kind == "inverse_square":
        return [0.0, 0.0]
    if potential.kind != "vrho":
        return [0.0, 0.0]

    def poly(x):
        return x * (x + N - 2) + mu * t_inf

    lamc = mu * (potential.rho - 1.0)
    b2 = lamc / poly(lam - 2.0) if order >= 1 else 0.0
    b4 = lamc * (b2 - 1.0) / poly(lam - 4.0) if order >= 2 else 0.0
    return [b2, b4]


def _far_field_init(potential: PotentialSpec, params: MuParams, r_init: float,
                    order: int = 2):
    """Init (w, dw/ds) of the decaying far-field branch at r_init.

    Requires a subcritical coupling at infinity. Returns (w, dw, lam).
    """
    mu = params.mu
    mu0 = params.dim.mu0
    t_inf = potential.infinity_limit
    if not mu * t_inf < mu0:
        raise HardyFundsolError(
            "far-field coupling is critical or supercritical; no decaying branch"
        )
    N = params.dim.N
    lam = -(N - 2) / 2.0 - math.sqrt(mu0 - mu * t_inf)
    b = _far_series_coeffs(potential, params, lam, order)
    s = math.log(r_init)
    z2 = math.exp(-2.0 * s)
    z4 = z2 * z2
    base = math.exp(lam * s)
    w = base * (1.0 + b[0] * z2 + b[1] * z4)
    dw = base * (lam + (lam - 2.0) * b[0] * z2 + (lam - 4.0) * b[1] * z4)
    return w, dw, lam


def integrate(potential: PotentialSpec, params: MuParams, init, s0: float,
              grid: LogGrid, rtol: float = DEFAULT_TOL_ODE) -> RadialFunction:
    """March (w, w') from s0 across the grid; s0 must be the first or last node.

    Marching from the end where the tracked branch dominates keeps round-off
    leakage into the complementary branch damped instead of amplified.
    """
    nodes = grid.nodes
    tol = 1e-9 * max(abs(nodes[0]), 1.0)
    if abs(s0 - nodes[0]) <= tol:
        start_at_end = False
    elif abs(s0 - nodes[-1]) <= 1e-9 * max(abs(nodes[-1]), 1.0):
        start_at_end = True
    else:
        raise ValueError("s0 must coincide with the first or last grid node")
    kind, rho, table, t_s0, t_inv_h = _kernel_args(potential, params.mu, grid)
    w0, v0 = float(init[0]), float(init[1])
    w, v, status, s_last = kernels.march(
        nodes, w0, v0, start_at_end, params.dim.N - 2, kind, params.mu,
        rho=rho, table=table, table_s0=t_s0, table_inv_h=t_inv_h, rtol=rtol,
    )
    if status == kernels.STATUS_STEP_FAILURE:
        raise StepFailure("adaptive step control failed", s_last=s_last)
    if status == kernels.STATUS_OVERFLOW:
        raise IntegrationOverflow("solution magnitude exceeded 1e300",
                                  s_last=s_last)
    return RadialFunction(grid, w)


def _march_raw(potential, params, init, grid, start_at_end, rtol):
    """Like integrate() but returns raw value and derivative arrays."""
    kind, rho, table, t_s0, t_inv_h = _kernel_args(potential, params.mu, grid)
    w, v, status, s_last = kernels.march(
        grid.nodes, float(init[0]), float(init[1]), start_at_end,
        params.dim.N - 2, kind, params.mu, rho=rho, table=table,
        table_s0=t_s0, table_inv_h=t_inv_h, rtol=rtol,
    )
    if status == kernels.STATUS_STEP_FAILURE:
        raise StepFailure("adaptive step control failed", s_last=s_last)
    if status == kernels.STATUS_OVERFLOW:
        raise IntegrationOverflow("solution magnitude exceeded 1e300",
                                  s_last=s_last)
    return w, v


@dataclass
class BallSolution:
    """Zero-boundary solution on B_R with singular data k at the origin."""

    R: float
    k: float
    u: RadialFunction
    regular_multiplier: float
    positive: bool
    boundary_residual: float


@dataclass
class MinimalSolutionResult:
    """Outcome of the increasing ball-solution scheme.

    verdict is "converged", "diverged" or "positivity_breakdown". trace holds
    the zero-boundary probe values per stage; limit_trace the far-matched
    limit estimates the tolerance was applied to.
    """

    verdict: str
    probe_point: float
    radii_used: list[float] = field(default_factory=list)
    trace: list[float] = field(default_factory=list)
    limit_trace: list[float] = field(default_factory=list)
    u: Optional[RadialFunction] = None
    regular_multiplier: Optional[float] = None
    R_fail: Optional[float] = None
    reason: str = ""


class _OriginBasis:
    """Both origin branches marched outward on a grid, with derivatives."""

    def __init__(self, potential, params, grid, rtol):
        r_min = float(np.exp(grid.s_min))
        order = 2 if potential.kind != "custom" else 0
        try:
            us, vs, _ = frobenius_init(potential, params, "singular", r_min,
                                       order)
        except SeriesNotApplicable:
            us, vs, _ = frobenius_init(potential, params, "singular", r_min, 0)
        try:
            ur, vr, _ = frobenius_init(potential, params, "regular", r_min,
                                       order)
        except SeriesNotApplicable:
            ur, vr, _ = frobenius_init(potential, params, "regular", r_min, 0)
        self.sing_w, self.sing_v = _march_raw(potential, params, (us, vs),
                                              grid, False, rtol)
        self.reg_w, self.reg_v = _march_raw(potential, params, (ur, vr),
                                            grid, False, rtol)
        self.grid = grid


def _wronskian(w1, v1, w2, v2):
    return w1 * v2 - w2 * v1


def solve_ball_bvp(potential: PotentialSpec, params: MuParams, k: float,
                   R: float, grid: LogGrid, rtol: float = DEFAULT_TOL_ODE,
                   tol_bvp: float = DEFAULT_TOL_BVP,
                   _basis: Optional[_OriginBasis] = None) -> BallSolution:
    """Zero-boundary ball problem by two-branch superposition.

    R snaps to the nearest grid node; the snapped radius is recorded in the
    result. Positivity is scanned over the nodes strictly inside the ball.
    """
    if k < 0:
        raise ValueError("k must be >= 0")
    j = grid.nearest_index(math.log(R))
    if j < 8:
        raise ValueError("ball boundary too close to the inner grid end")
    R_eff = float(np.exp(grid.nodes[j]))
    sub = grid.prefix(j)
    if k == 0.0:
        zero = RadialFunction(sub, np.zeros(sub.count))
        return BallSolution(R_eff, 0.0, zero, 0.0, False, 0.0)
    basis = _basis or _OriginBasis(potential, params, grid, rtol)
    reg_scale = float(np.max(np.abs(basis.reg_w[: j + 1])))
    if abs(basis.reg_w[j]) < 1e-14 * reg_scale:
        raise RegularBranchVanishes(
            f"regular branch vanishes at R={R_eff:.6g}"
        )
    c = -k * basis.sing_w[j] / basis.reg_w[j]
    u_vals = k * basis.sing_w[: j + 1] + c * basis.reg_w[: j + 1]
    positive = bool(np.min(u_vals[:j]) > 0.0)
    boundary_residual = float(abs(u_vals[j]))
    u = RadialFunction(sub, u_vals)
    if boundary_residual > tol_bvp * float(np.max(np.abs(u_vals))):
        raise HardyFundsolError("boundary residual above tolerance")
    return BallSolution(R_eff, float(k), u, float(c), positive,
                        boundary_residual)


def _far_matched_multiplier(potential, params, grid, j, basis, rtol,
                            order=2):
    """Regular-branch multiplier of the minimal solution, matched to the
    decaying far-field branch at node j. Returns (c_inf, A, far_w, far_v)."""
    r_init = float(np.exp(grid.nodes[j]))
    w0, v0, _ = _far_field_init(potential, params, r_init, order)
    sub = grid.prefix(j)
    far_w, far_v = _march_raw(potential, params, (w0, v0), sub, True, rtol)
    ws, vs = basis.sing_w[0], basis.sing_v[0]
    wr, vr = basis.reg_w[0], basis.reg_v[0]
    wf, vf = far_w[0], far_v[0]
    denom = _wronskian(ws, vs, wr, vr)
    A = _wronskian(wf, vf, wr, vr) / denom
    B = -_wronskian(wf, vf, ws, vs) / denom
    return B / A, A, far_w, far_v


def minimal_solution(potential: PotentialSpec, params: MuParams, k: float,
                     R_schedule: Sequence[float], probe_r: float,
                     grid: LogGrid, tol_min: float = DEFAULT_TOL_MIN,
                     divergence_cap: float = DEFAULT_DIVERGENCE_CAP,
                     rtol: float = DEFAULT_TOL_ODE) -> MinimalSolutionResult:
    """Increasing ball-solution scheme for the minimal mass-k solution.

    Zero-boundary solutions are built for each schedule radius and their probe
    values checked for the monotone increase that underpins minimality, for
    positivity, and against the divergence cap. When the far field admits a
    decaying branch, each stage also produces a far-matched limit estimate;
    convergence is declared once the relative change of that estimate stays
    below tol_min for two consecutive stages, and the returned function is the
    far branch integrated inward from the outer grid end, normalized to carry
    singular data k.
    """
    schedule = [float(R) for R in R_schedule]
    if any(b <= a for a, b in zip(schedule, schedule[1:])):
        raise ValueError("R_schedule must be strictly increasing")
    if not schedule:
        raise ValueError("R_schedule must be nonempty")
    p_idx = grid.nearest_index(math.log(probe_r))
    probe_point = float(np.exp(grid.nodes[p_idx]))
    if probe_point >= schedule[0]:
        raise ValueError("probe_r must lie below the first schedule radius")

    if k == 0.0:
        zero = RadialFunction(grid, np.zeros(grid.count))
        return MinimalSolutionResult("converged", probe_point,
                                     radii_used=[], trace=[], limit_trace=[],
                                     u=zero, regular_multiplier=0.0)

    basis = _OriginBasis(potential, params, grid, rtol)
    far_possible = params.mu * potential.infinity_limit < params.dim.mu0
    cap_abs = divergence_cap * k * abs(phi_mu(params, probe_point))

    radii, trace, limit_trace = [], [], []
    c_estimates = []
    for R in schedule:
        j = grid.nearest_index(math.log(R))
        if j <= p_idx + 4:
            raise ValueError("schedule radius too close to the probe point")
        R_eff = float(np.exp(grid.nodes[j]))
        try:
            ball = solve_ball_bvp(potential, params, k, R_eff, grid,
                                  rtol=rtol, _basis=basis)
        except RegularBranchVanishes:
            return MinimalSolutionResult(
                "positivity_breakdown", probe_point, radii_used=radii,
                trace=trace, limit_trace=limit_trace, R_fail=R_eff,
                reason="regular branch vanishes at the boundary")
        radii.append(ball.R)
        p = float(ball.u.values[p_idx])
        if trace and p < trace[-1] - 1e-9 * max(abs(p), abs(trace[-1])):
            # Monotone increase in R is guaranteed while the comparison
            # principle holds on the balls; its failure is the earliest
            # signature of a supercritical far field, ahead of sign changes.
            trace.append(p)
            return MinimalSolutionResult(
                "positivity_breakdown", probe_point, radii_used=radii,
                trace=trace, limit_trace=limit_trace, R_fail=ball.R,
                reason="probe sequence lost monotone increase")
        trace.append(p)
        if not ball.positive:
            return MinimalSolutionResult(
                "positivity_breakdown", probe_point, radii_used=radii,
                trace=trace, limit_trace=limit_trace, R_fail=ball.R,
                reason="ball solution lost positivity")
        if p > cap_abs:
            return MinimalSolutionResult(
                "diverged", probe_point, radii_used=radii, trace=trace,
                limit_trace=limit_trace)

        if far_possible:
            order = 2 if potential.kind != "custom" else 0
            c_inf, _, _, _ = _far_matched_multiplier(
                potential, params, grid, j, basis, rtol, order)
            c_estimates.append(c_inf)
            p_hat = k * (basis.sing_w[p_idx] + c_inf * basis.reg_w[p_idx])
            limit_trace.append(float(p_hat))
            if len(limit_trace) >= 3:
                scale = max(abs(limit_trace[-1]), 1e-300)
                d1 = abs(limit_trace[-1] - limit_trace[-2]) / scale
                d2 = abs(limit_trace[-2] - limit_trace[-3]) / scale
                if d1 < tol_min and d2 < tol_min:
                    return _finalize_converged(
                        potential, params, k, grid, basis, rtol,
                        probe_point, radii, trace, limit_trace)

    raise ScheduleTooShort(
        "schedule exhausted without convergence or divergence", trace=trace)


def _finalize_converged(potential, params, k, grid, basis, rtol, probe_point,
                        radii, trace, limit_trace):
    order = 2 if potential.kind != "custom" else 0
    c_inf, A, far_w, far_v = _far_matched_multiplier(
        potential, params, grid, grid.count - 1, basis, rtol, order)
    u_vals = (k / A) * far_w
    u = RadialFunction(grid, u_vals).with_fitted_tags()
    if np.min(u_vals) <= 0.0:
        return MinimalSolutionResult(
            "positivity_breakdown", probe_point, radii_used=radii,
            trace=trace, limit_trace=limit_trace,
            R_fail=float(np.exp(grid.s_max)))
    return MinimalSolutionResult(
        "converged", probe_point, radii_used=radii, trace=trace,
        limit_trace=limit_trace, u=u, regular_multiplier=float(k * c_inf))
