"""Asymptotics, quantitative bounds, certificates, and the existence
threshold of the interpolating potential family.

Existence certificates are explicit super-solutions: a function ubar with
(-Delta - mu V) ubar >= 0 dominates the monotone ball scheme and forces
convergence. Below the critical coupling the two-power barrier
phi_mu + k' phi_mu' works whenever the coupling at infinity stays below
mu0/mu; at the critical coupling a three-part barrier with a cutoff carries
the same role for potentials dipping below the exact inverse square.
Nonexistence is certified by the annulus amplification argument: once the
far coupling exceeds beta, any positive solution gains a factor sigma on
dyadically growing annuli, and sigma * theta^{N-2+tau_-} >= 1 makes the
Newtonian representation diverge.

All certificates are checked numerically: the barrier residual is evaluated
by finite differences on the grid and must not dip below -tol_cert after
scaling. A certificate is evidence only when that check passes.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .closed_forms import (
    DimensionParams,
    MuParams,
    PotentialSpec,
    gamma_mu,
    mu_params,
    phi_mu,
    rpow,
    vrho_potential,
)
from .errors import (
    BracketInvalid,
    CertificateFailed,
    EpsilonOutOfRange,
    HardyFundsolError,
    MuOutOfRange,
    MuPrimeOutOfRange,
    NoAdmissibleMuPrime,
    NonpositiveValues,
    RadiusOutOfRange,
    ScheduleTooShort,
    TailDivergence,
    WindowTooSmall,
)
from .grid import (
    LogGrid,
    RadialFunction,
    default_grid,
    fd_log_derivatives,
    fit_log_slope,
)
from . import green_ops, radial_engine

__all__ = [
    "ExponentFit",
    "SupersolutionCertificate",
    "NonexistenceCertificate",
    "ThresholdReport",
    "Classification",
    "SolverConfig",
    "fit_exponent",
    "origin_mass_fit",
    "check_lower_bound",
    "check_envelope",
    "local_integrability",
    "operator_residual_scaled",
    "supersolution_certificate",
    "decay_barrier_value",
    "decay_barrier_params",
    "decay_barrier_residual_check",
    "critical_supersolution",
    "nonexistence_certificate",
    "optimize_epsilon",
    "certificate_beta_threshold",
    "classify_rho",
    "estimate_rho_star",
]

DEFAULT_TOL_CERT = 1e-7


# ---------------------------------------------------------------------------
# exponent fitting and pointwise bounds

@dataclass
class ExponentFit:
    exponent: float
    log_slope_residual: float
    window: tuple
    log_correction: bool


def fit_exponent(u: RadialFunction, window, allow_log: bool = False) -> ExponentFit:
    """Power-law exponent of u over [r_lo, r_hi] by log-log least squares.

    With allow_log (windows inside r < 1 only) a model with an extra (-ln r)
    factor competes on residual; the winner is returned with log_correction
    set accordingly.
    """
    r_lo, r_hi = window
    r = u.grid.r
    mask = (r >= r_lo * (1 - 1e-12)) & (r <= r_hi * (1 + 1e-12))
    if np.count_nonzero(mask) < 8:
        raise WindowTooSmall(f"window {window} holds fewer than 8 nodes")
    vals = u.values[mask]
    if np.any(vals <= 0.0):
        raise NonpositiveValues("u must be positive on the fit window")
    s = u.grid.nodes[mask]
    ln_u = np.log(vals)
    slope, _, resid = fit_log_slope(s, ln_u)
    best = ExponentFit(float(slope), resid, (r_lo, r_hi), False)
    if allow_log and np.all(s < 0.0):
        slope2, _, resid2 = fit_log_slope(s, ln_u - np.log(-s))
        if resid2 < best.log_slope_residual:
            best = ExponentFit(float(slope2), resid2, (r_lo, r_hi), True)
    return best


def origin_mass_fit(u: RadialFunction, params: MuParams, nodes: int = 5) -> float:
    """Singular data lim u/phi_mu at the origin from the innermost nodes.

    Below the critical coupling the ratio behaves like k + c r^{tau_+ - tau_-}
    there, so a two-parameter fit removes the regular-branch admixture.
    """
    r = u.grid.r[:nodes]
    y = u.values[:nodes] / phi_mu(params, r)
    if params.taus.degenerate:
        # ratio behaves like k + c/(-ln r) at the critical coupling
        A = np.column_stack([np.ones(nodes), 1.0 / (-np.log(r))])
    else:
        dt = params.taus.tau_plus - params.taus.tau_minus
        A = np.column_stack([np.ones(nodes), rpow(r, dt)])
    coef, *_ = np.linalg.lstsq(A, y, rcond=None)
    return float(coef[0])


def check_lower_bound(u: RadialFunction, params: MuParams, k: float) -> bool:
    """True iff u >= k * phi_mu * (1 - 1e-6) at every node."""
    return bool(np.all(u.values >= k * phi_mu(params, u.grid.r) * (1 - 1e-6)))


def check_envelope(u: RadialFunction, params: MuParams, k: float,
                   mu_prime: float):
    """Two-sided envelope on r >= 1: k*phi_mu <= u <= c1*phi_mu'.

    Returns (holds, c1_est) with c1_est the grid maximum of u/phi_mu' on
    r >= 1. The bound counts as holding only if the ratio has stopped
    growing over the outer decade, otherwise the true supremum may sit
    beyond the grid.
    """
    if not params.mu < mu_prime < params.dim.mu0:
        raise MuPrimeOutOfRange(
            f"mu' must lie in ({params.mu}, {params.dim.mu0}), got {mu_prime}"
        )
    pprime = mu_params(mu_prime, params.dim)
    r = u.grid.r
    mask = r >= 1.0 - 1e-12
    ratio = u.values[mask] / phi_mu(pprime, r[mask])
    c1 = float(np.max(ratio))
    lower_ok = bool(np.all(
        u.values[mask] >= k * phi_mu(params, r[mask]) * (1 - 1e-6)
    ))
    n_tail = max(2, int(0.1 * ratio.size))
    tail_ok = ratio[-1] <= ratio[-n_tail] * (1 + 1e-9)
    return bool(lower_ok and tail_ok), c1


def local_integrability(potential: PotentialSpec, dim: DimensionParams,
                        shells: int = 40):
    """Quadrature of sphere_area * int_0^1 (V - r^{-2}) r dr with divergence
    detection from the decay of dyadic-shell contributions."""
    gauss_x, gauss_w = np.polynomial.legendre.leggauss(16)
    vals = []
    for j in range(shells):
        a, b = -(j + 1) * math.log(2.0), -j * math.log(2.0)
        s = 0.5 * (b - a) * gauss_x + 0.5 * (a + b)
        r = np.exp(s)
        integrand = np.asarray(potential.deviation(r)) * r * r
        vals.append(0.5 * (b - a) * float(np.sum(gauss_w * integrand)))
    vals = np.array(vals)
    total = float(np.sum(vals))
    scale = float(np.max(np.abs(vals)))
    if scale == 0.0:
        return True, 0.0
    active = np.abs(vals) > 1e-14 * scale
    if np.count_nonzero(active[-10:]) == 0:
        return True, dim.sphere_area * total
    last = np.abs(vals[-10:])
    last = np.where(last > 0, last, 1e-300)
    decay = float(np.mean(np.log(last[:-1] / last[1:])))
    if decay < 0.1:
        return False, math.inf
    q = math.exp(-decay)
    tail = float(abs(vals[-1])) * q / (1.0 - q) * math.copysign(1.0, vals[-1])
    return True, dim.sphere_area * (total + tail)


# ---------------------------------------------------------------------------
# finite-difference residual of the operator

def operator_residual_scaled(values: np.ndarray, grid: LogGrid,
                             potential: PotentialSpec, params: MuParams):
    """Scaled residual of (-Delta - mu V) applied to grid samples.

    Derivatives come from fourth-order finite differences in s; the residual
    is divided by scale(r)/r^2 with scale = |phi_mu| + gamma_mu, which stays
    positive across the sign change of the critical-coupling branch. Returns
    (scaled residual, valid slice).
    """
    d1, d2, sl = fd_log_derivatives(values, grid.h)
    r = grid.r
    q = params.mu * np.asarray(potential.coupling(r))
    raw = -(d2 + (params.dim.N - 2) * d1 + q * values)  # times r^2
    scale = np.abs(phi_mu(params, r)) + gamma_mu(params, r)
    return raw / scale, sl


# ---------------------------------------------------------------------------
# super-solution certificate below the critical coupling

@dataclass
class SupersolutionCertificate:
    mu_prime: float
    k_star: float
    constants: dict
    grid_min_residual: float
    valid: bool


def _barrier_min_residual(values, grid, potential, params):
    """Minimum residual of a positive barrier, scaled by its own magnitude.

    Scaling by the barrier rather than by phi_mu keeps finite-difference
    cancellation noise bounded when the comparison coefficient is large; the
    sign of the true residual, which is what the certificate asserts, does
    not depend on the scale.
    """
    d1, d2, sl = fd_log_derivatives(values, grid.h)
    r = grid.r
    q = params.mu * np.asarray(potential.coupling(r))
    raw = -(d2 + (params.dim.N - 2) * d1 + q * values)
    scale = np.abs(values) + 1e-300
    return float(np.min((raw / scale)[sl]))


def supersolution_certificate(potential: PotentialSpec, params: MuParams,
                              mu_prime: float,
                              grid: Optional[LogGrid] = None,
                              tol_cert: float = DEFAULT_TOL_CERT,
                              ) -> SupersolutionCertificate:
    """Certificate that phi_mu + k* phi_mu' dominates the operator.

    The constants follow the two-region comparison: near the origin the
    bounded excess of the coupling is absorbed by the mu'-branch at rate
    (mu'-mu)/r^2, outside by the margin mu' - alpha' mu. Validity is decided
    by the finite-difference residual on the grid; a failed check retries
    once with the coefficient doubled, then fails hard.
    """
    if params.taus.degenerate:
        raise MuOutOfRange("certificate requires mu < mu0")
    mu = params.mu
    mu0 = params.dim.mu0
    alpha = potential.infinity_limit
    if not (alpha * mu < mu_prime < mu0):
        raise NoAdmissibleMuPrime(
            f"mu' must lie in ({alpha * mu}, {mu0}), got {mu_prime}"
        )
    c0 = potential.c0
    if c0 > 0:
        r_prime = min(math.sqrt((mu_prime - mu) / (2.0 * c0 * mu)), 1.0)
    else:
        r_prime = 1.0
    pprime = mu_params(mu_prime, params.dim)
    delta = pprime.taus.tau_minus - params.taus.tau_minus
    if delta >= 2.0:
        raise CertificateFailed(
            "branch separation too wide for the near-origin comparability"
        )
    iota = r_prime ** (2.0 - delta)
    iota_prime = r_prime ** delta
    k0 = 2.0 * c0 * mu * iota / (mu_prime - mu)
    alpha_prime = 0.5 * (alpha + mu_prime / mu)
    k1 = (alpha_prime - 1.0) * mu / ((mu_prime - alpha_prime * mu) * iota_prime)
    k_star = max(k0, k1)
    if k_star == 0.0:
        k_star = 1.0

    grid = grid or default_grid()
    constants = {
        "k0": k0, "k1": k1, "r_prime": r_prime, "iota": iota,
        "iota_prime": iota_prime, "alpha_prime": alpha_prime,
    }
    for _ in range(2):
        ubar = phi_mu(params, grid.r) + k_star * phi_mu(pprime, grid.r)
        min_res = _barrier_min_residual(ubar, grid, potential, params)
        if min_res >= -tol_cert:
            return SupersolutionCertificate(mu_prime, k_star, constants,
                                            min_res, True)
        k_star *= 2.0
    raise CertificateFailed(
        f"barrier residual {min_res:.3e} below -{tol_cert} after retry"
    )


# ---------------------------------------------------------------------------
# decay barriers for potentials below the exact inverse square

def decay_barrier_params(params: MuParams, c5: float):
    """Barrier coefficient t and admissible outer radius r_t."""
    mu, mu0 = params.mu, params.dim.mu0
    if params.taus.degenerate:
        return max(2.0, 8.0 * c5 * mu0), 1.0
    t = max(1.0, c5 * mu / (mu0 - mu))
    r_t = t ** (-1.0 / math.sqrt(mu0 - mu))
    return t, r_t


def decay_barrier_value(params: MuParams, c5: float, r: float) -> float:
    """Sub-solution barrier phi_mu - t r^{-(N-2)/2} (with an extra
    sqrt(-ln r) factor at the critical coupling).

    The value is defined on (0, r_t), resp. (0, 1) at the critical coupling;
    only its positive part enters comparison arguments, so negative values
    are legitimate output.
    """
    t, r_t = decay_barrier_params(params, c5)
    half = (params.dim.N - 2) / 2.0
    if params.taus.degenerate:
        if not 0.0 < r < 1.0:
            raise RadiusOutOfRange(f"requires 0 < r < 1, got {r}")
        return float(phi_mu(params, r) - t * r ** (-half) * math.sqrt(-math.log(r)))
    if not 0.0 < r < r_t:
        raise RadiusOutOfRange(f"requires 0 < r < {r_t}, got {r}")
    return float(phi_mu(params, r) - t * r ** (-half))


def decay_barrier_residual_check(params: MuParams, c5: float,
                                 potential: PotentialSpec,
                                 n_samples: int = 1000,
                                 tol_cert: float = DEFAULT_TOL_CERT):
    """Finite-difference check that the barrier is a sub-solution.

    Samples the admissible range (capped at 1/4 at the critical coupling),
    evaluates the operator by five-point differences in s, and returns
    (passed, max scaled residual); passing means the residual stays below
    tol_cert everywhere sampled.
    """
    t, r_t = decay_barrier_params(params, c5)
    upper = 0.25 if params.taus.degenerate else r_t * (1 - 1e-9)
    radii = np.exp(np.linspace(math.log(1e-5), math.log(upper), n_samples))
    half = (params.dim.N - 2) / 2.0
    h = 1e-3
    offsets = np.arange(-2, 3)[:, None] * h
    s = np.log(radii)[None, :] + offsets
    rr = np.exp(s)
    if params.taus.degenerate:
        w = phi_mu(params, rr) - t * rpow(rr, -half) * np.sqrt(-s)
    else:
        w = phi_mu(params, rr) - t * rpow(rr, -half)
    d1 = (-w[4] + 8 * w[3] - 8 * w[1] + w[0]) / (12 * h)
    d2 = (-w[4] + 16 * w[3] - 30 * w[2] + 16 * w[1] - w[0]) / (12 * h * h)
    q = params.mu * np.asarray(potential.coupling(radii))
    raw = -(d2 + (params.dim.N - 2) * d1 + q * w[2])
    scale = np.abs(phi_mu(params, radii)) + gamma_mu(params, radii)
    res = raw / scale
    worst = float(np.max(res))
    return worst <= tol_cert, worst


# ---------------------------------------------------------------------------
# critical-coupling certificate

def _cutoff(t):
    """Monotone quintic cutoff: 1 on [0,1], 0 on [2,inf), C^2 overall."""
    t = np.asarray(t, dtype=float)
    u = np.clip(t - 1.0, 0.0, 1.0)
    val = 1.0 - (10.0 * u ** 3 - 15.0 * u ** 4 + 6.0 * u ** 5)
    return np.where(t <= 1.0, 1.0, np.where(t >= 2.0, 0.0, val))


def critical_supersolution(params_mu0: MuParams, potential: PotentialSpec,
                           varrho: float, grid: Optional[LogGrid] = None,
                           tol_cert: float = DEFAULT_TOL_CERT,
                           budget: int = 25) -> SupersolutionCertificate:
    """Three-part barrier at the critical coupling for V <= r^{-2} with
    coupling bound varrho < 1 at infinity.

    Searches the comparison couplings, the matching radius, and the two
    coefficients in the proof's order until the finite-difference residual
    clears -tol_cert on the whole grid.
    """
    if not params_mu0.taus.degenerate:
        raise MuOutOfRange("requires the critical coupling mu = mu0")
    if not varrho < 1.0:
        raise NoAdmissibleMuPrime(
            f"requires a coupling bound varrho < 1 at infinity, got {varrho}"
        )
    grid = grid or default_grid()
    r = grid.r
    mu0 = params_mu0.dim.mu0
    coupling = np.asarray(potential.coupling(r))
    phi0 = phi_mu(params_mu0, r)
    gam0 = gamma_mu(params_mu0, r)

    last_res = -math.inf
    for f1 in (0.25, 0.5):
        vr_p = varrho + f1 * (1.0 - varrho)
        for f2 in (0.5, 0.75):
            vr_pp = vr_p + f2 * (1.0 - vr_p)
            eps_pp = math.sqrt(mu0 * (1.0 - vr_pp))
            r_prime = None
            for cand in (2.0, 4.0, 8.0, 16.0):
                outside = r >= cand
                if np.all(coupling[outside] <= vr_p + 1e-12):
                    r_prime = cand
                    break
            if r_prime is None:
                continue
            gam_pp = rpow(r, -(params_mu0.dim.N - 2) / 2.0 + eps_pp)
            lam = (1.0 - _cutoff(r / r_prime)) * gam_pp
            r_star = max(math.exp(1.0 / eps_pp), 2.0 * r_prime)
            k_pp = 1.1 * math.log(r_star) * r_star ** (-eps_pp) / (vr_pp - vr_p)
            k_p = max(2.0 * math.log(2.0 * r_prime), 1.0)
            for _ in range(budget):
                ubar = phi0 + k_p * gam0 + k_pp * lam
                min_res = _barrier_min_residual(ubar, grid, potential,
                                                params_mu0)
                if min_res >= -tol_cert:
                    constants = {
                        "k_prime": k_p, "k_dprime": k_pp,
                        "varrho_prime": vr_p, "varrho_dprime": vr_pp,
                        "r_prime": r_prime,
                    }
                    return SupersolutionCertificate(
                        vr_pp * mu0, k_p, constants, min_res, True)
                last_res = max(last_res, min_res)
                k_p *= 2.0
    raise CertificateFailed(
        f"no valid three-part barrier found (best residual {last_res:.3e})"
    )


# ---------------------------------------------------------------------------
# nonexistence certificate

@dataclass
class NonexistenceCertificate:
    beta: float
    epsilon: float
    theta: float
    sigma_lb: float
    amplification: float
    verdict: str  # "nonexistence" | "inconclusive"


def nonexistence_certificate(dim: DimensionParams, mu: float, beta: float,
                             epsilon: float) -> NonexistenceCertificate:
    """Annulus-amplification certificate from the far coupling beta.

    theta fixes the annulus geometry, sigma_lb bounds the per-annulus gain
    from below, and the verdict is nonexistence exactly when sigma_lb > 1
    and sigma_lb * theta^{N-2+tau_-} >= 1.
    """
    if beta <= 1.0:
        raise ValueError(f"beta must exceed 1, got {beta}")
    eps_max = (beta - 1.0) / (beta + 1.0)
    if not (0.0 < epsilon < eps_max):
        raise EpsilonOutOfRange(
            f"epsilon must lie in (0, {eps_max}), got {epsilon}"
        )
    taus = mu_params(mu, dim).taus
    kappa = dim.N - 2 + taus.tau_minus
    theta = min(((1.0 + beta) / 2.0) ** (1.0 / kappa),
                1.0 - 2.0 ** (1.0 / (2.0 - dim.N)))
    gain = theta ** kappa
    sigma_lb = (beta - 2.0 * gain) * (1.0 - epsilon)
    amplification = sigma_lb * gain
    verdict = ("nonexistence"
               if sigma_lb > 1.0 and amplification >= 1.0
               else "inconclusive")
    return NonexistenceCertificate(beta, epsilon, theta, sigma_lb,
                                   amplification, verdict)


def optimize_epsilon(dim: DimensionParams, mu: float, beta: float,
                     iters: int = 60) -> float:
    """Golden-section search for the epsilon maximizing the amplification."""
    eps_max = (beta - 1.0) / (beta + 1.0)
    lo, hi = 1e-12 * eps_max, eps_max * (1.0 - 1e-12)

    def amp(e):
        return nonexistence_certificate(dim, mu, beta, e).amplification

    inv_phi = (math.sqrt(5.0) - 1.0) / 2.0
    a, b = lo, hi
    c, d = b - inv_phi * (b - a), a + inv_phi * (b - a)
    fc, fd = amp(c), amp(d)
    for _ in range(iters):
        if fc >= fd:
            b, d, fd = d, c, fc
            c = b - inv_phi * (b - a)
            fc = amp(c)
        else:
            a, c, fc = c, d, fd
            d = a + inv_phi * (b - a)
            fd = amp(d)
    return c if fc >= fd else d


def certificate_beta_threshold(dim: DimensionParams, mu: float,
                               tol: float = 1e-9) -> float:
    """Smallest far coupling at which the optimized certificate fires.

    This is an upper bound for the true onset of nonexistence within the
    sufficient condition, not the onset itself.
    """
    lo, hi = 1.0 + 1e-9, 1e4

    def fires(beta):
        eps = optimize_epsilon(dim, mu, beta)
        return nonexistence_certificate(dim, mu, beta, eps).verdict == "nonexistence"

    if fires(lo):
        return lo
    if not fires(hi):
        raise HardyFundsolError("certificate never fires below beta = 1e4")
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if fires(mid):
            hi = mid
        else:
            lo = mid
    return hi


# ---------------------------------------------------------------------------
# classification of the interpolating family and the threshold bracket

@dataclass
class SolverConfig:
    """Numerical knobs shared by the classification pipeline."""

    grid: LogGrid = field(default_factory=default_grid)
    r_schedule: tuple = (1e1, 1e2, 1e3, 1e4, 1e5, 1e6)
    probe_r: float = 1e-3
    k: float = 1.0
    tol_ode: float = radial_engine.DEFAULT_TOL_ODE
    tol_bvp: float = radial_engine.DEFAULT_TOL_BVP
    tol_min: float = radial_engine.DEFAULT_TOL_MIN
    tol_fp: float = green_ops.DEFAULT_TOL_FP
    tol_cert: float = DEFAULT_TOL_CERT
    tol_bisect: float = 1e-6
    max_iters: int = green_ops.DEFAULT_MAX_ITERS
    divergence_cap: float = 1e12
    numeric_budget: int = 8


@dataclass
class Classification:
    kind: str  # "existence" | "nonexistence" | "undetermined"
    evidence: str
    details: dict = field(default_factory=dict)


def _existence_by_certificate(rho, params, config):
    mu, mu0 = params.mu, params.dim.mu0
    if rho * mu >= mu0:
        return None
    lo, hi = rho * mu, mu0
    for frac in (0.5, 0.25, 0.75):
        mu_prime = lo + frac * (hi - lo)
        try:
            cert = supersolution_certificate(
                vrho_potential(rho), params, mu_prime, grid=config.grid,
                tol_cert=config.tol_cert)
        except (CertificateFailed, NoAdmissibleMuPrime):
            continue
        return cert
    return None


def classify_rho(rho: float, params: MuParams,
                 config: Optional[SolverConfig] = None,
                 allow_numeric: bool = True) -> Classification:
    """Existence/nonexistence/undetermined for the family parameter rho.

    Certificates are consulted first (cheap and conclusive); the numerical
    solver with the independent fixed-point oracle breaks ties when allowed.
    Solver failures land in undetermined with diagnostics, never in a claim.
    """
    if rho < 1.0:
        raise ValueError("rho must be >= 1")
    config = config or SolverConfig()
    cert = _existence_by_certificate(rho, params, config)
    if cert is not None:
        return Classification(
            "existence", f"supersolution(mu'={cert.mu_prime:.12g})",
            {"certificate": cert})
    eps = optimize_epsilon(params.dim, params.mu, rho) if rho > 1.0 else None
    if eps is not None:
        ncert = nonexistence_certificate(params.dim, params.mu, rho, eps)
        if ncert.verdict == "nonexistence":
            return Classification(
                "nonexistence",
                f"amplification(beta={rho:.12g}, eps={eps:.3g})",
                {"certificate": ncert})
    if not allow_numeric:
        return Classification("undetermined", "certificates inconclusive",
                              {})
    potential = vrho_potential(rho)
    details = {"numeric": True}
    try:
        sol = radial_engine.minimal_solution(
            potential, params, config.k, list(config.r_schedule),
            config.probe_r, config.grid, tol_min=config.tol_min,
            divergence_cap=config.divergence_cap, rtol=config.tol_ode)
    except ScheduleTooShort as exc:
        details["trace"] = exc.trace
        return Classification("undetermined",
                              "schedule exhausted without verdict", details)
    except HardyFundsolError as exc:
        return Classification("undetermined", f"solver failure: {exc}",
                              details)
    details["verdict"] = sol.verdict
    if sol.reason:
        details["reason"] = sol.reason
    if sol.verdict == "converged":
        ok = (check_lower_bound(sol.u, params, config.k)
              and origin_mass_fit(sol.u, params) > 0)
        if ok:
            return Classification("existence", "minimal-solution construction",
                                  details)
        return Classification("undetermined",
                              "converged but bound checks failed", details)
    try:
        oracle = green_ops.picard_iterate(
            potential, params, config.k, max_iters=config.max_iters,
            grid=config.grid, tol_fp=config.tol_fp,
            divergence_cap=config.divergence_cap)
        oracle_verdict = oracle.verdict
    except TailDivergence:
        oracle_verdict = "tail_divergence"
    except HardyFundsolError as exc:
        return Classification("undetermined", f"oracle failure: {exc}",
                              details)
    details["oracle"] = oracle_verdict
    if oracle_verdict in ("diverging", "tail_divergence"):
        return Classification("nonexistence",
                              "solver breakdown with concurring oracle",
                              details)
    return Classification("undetermined",
                          "solver breakdown but oracle inconclusive", details)


@dataclass
class ThresholdReport:
    rho_lo: float
    rho_hi: float
    evaluations: list
    bracket_width: float


def estimate_rho_star(params: MuParams, bracket, tol: float,
                      config: Optional[SolverConfig] = None) -> ThresholdReport:
    """Bracket the existence threshold of the interpolating family.

    Refines the existence frontier from below and the nonexistence frontier
    from above by bisection on classify_rho. Undetermined outcomes narrow
    the frontier intervals without ever being promoted to a claim; the
    reported bracket is [largest existence, smallest nonexistence] and its
    width includes any undetermined band. Expensive numeric classifications
    are limited by the config budget; certificates are always available.
    """
    config = config or SolverConfig()
    lo, hi = float(bracket[0]), float(bracket[1])
    if not lo < hi:
        raise BracketInvalid(f"degenerate bracket ({lo}, {hi})")
    if tol <= 0:
        raise ValueError("tol must be positive")

    evaluations = []
    numeric_used = 0

    def classify(rho):
        nonlocal numeric_used
        allow = numeric_used < config.numeric_budget
        c = classify_rho(rho, params, config, allow_numeric=allow)
        if c.details.get("numeric"):
            numeric_used += 1
        evaluations.append((rho, c.kind, c.evidence))
        return c

    c_lo = classify(lo)
    if c_lo.kind != "existence":
        raise BracketInvalid(
            f"lower endpoint {lo} classifies as {c_lo.kind}, not existence")
    c_hi = classify(hi)
    if c_hi.kind != "nonexistence":
        raise BracketInvalid(
            f"upper endpoint {hi} classifies as {c_hi.kind}, not nonexistence")

    rho_lo, rho_hi = lo, hi
    # classical bisection while the midpoints stay conclusive
    u_lo = u_hi = None
    while rho_hi - rho_lo > tol:
        mid = 0.5 * (rho_lo + rho_hi)
        c = classify(mid)
        if c.kind == "existence":
            rho_lo = mid
        elif c.kind == "nonexistence":
            rho_hi = mid
        else:
            u_lo = u_hi = mid
            break
    if u_lo is not None:
        # refine the existence frontier on [rho_lo, u_lo]
        while u_lo - rho_lo > tol:
            mid = 0.5 * (rho_lo + u_lo)
            c = classify(mid)
            if c.kind == "existence":
                rho_lo = mid
            else:
                u_lo = mid
        # refine the nonexistence frontier on [u_hi, rho_hi]
        while rho_hi - u_hi > tol:
            mid = 0.5 * (u_hi + rho_hi)
            c = classify(mid)
            if c.kind == "nonexistence":
                rho_hi = mid
            else:
                u_hi = mid

    evaluations.sort(key=lambda t: t[0])
    kinds = [k for _, k, _ in evaluations]
    for i, ki in enumerate(kinds):
        if ki == "nonexistence" and "existence" in kinds[i + 1:]:
            raise HardyFundsolError(
                "classification trace violates monotonicity in rho")
    return ThresholdReport(rho_lo, rho_hi, evaluations, rho_hi - rho_lo)
