"""Command-line entry point.

    hardy-fundsol <subcommand> --config <path> [--out <dir>] [--plots]

Subcommands: solve, verify, exponent, certify-exist, certify-nonexist,
threshold, iterate. Exit code 0 on success, 2 on undetermined or
inconclusive verdicts, 1 on errors. HARDY_FUNDSOL_THREADS caps the worker
pool used for independent sub-tasks.
"""

from __future__ import annotations

import argparse
import os
import sys
import time
from concurrent.futures import ThreadPoolExecutor

import numpy as np

from . import analysis, green_ops, radial_engine, verifier
from .closed_forms import gamma_mu, phi_mu
from .config import ExperimentConfig, load_config, worker_count
from .errors import (
    BracketInvalid,
    CertificateFailed,
    ConfigInvalid,
    HardyFundsolError,
    ScheduleTooShort,
)
from .grid import RadialFunction
from .report import (
    write_plots,
    write_report,
    write_solution_table,
    write_timings,
)

EXIT_OK = 0
EXIT_ERROR = 1
EXIT_UNDETERMINED = 2


def _solve_minimal(cfg: ExperimentConfig):
    sc = cfg.solver
    return radial_engine.minimal_solution(
        cfg.potential, cfg.params, cfg.k, list(sc.r_schedule), sc.probe_r,
        cfg.grid, tol_min=sc.tol_min, divergence_cap=sc.divergence_cap,
        rtol=sc.tol_ode)


def cmd_solve(cfg: ExperimentConfig, out_dir: str, plots: bool) -> int:
    timings = {}
    t0 = time.perf_counter()
    try:
        sol = _solve_minimal(cfg)
    except ScheduleTooShort as exc:
        write_report(out_dir, "solve", cfg.resolved,
                     {"verdict": "undetermined", "probe_trace": exc.trace},
                     cfg.grid)
        return EXIT_UNDETERMINED
    timings["minimal_solution"] = time.perf_counter() - t0

    results = {
        "verdict": sol.verdict,
        "probe_point": sol.probe_point,
        "radii_used": sol.radii_used,
        "probe_trace": sol.trace,
    }
    if sol.verdict != "converged":
        results["R_fail"] = sol.R_fail
        results["reason"] = sol.reason
        write_report(out_dir, "solve", cfg.resolved, results, cfg.grid)
        write_timings(out_dir, timings)
        return EXIT_UNDETERMINED

    u = sol.u
    params = cfg.params
    phi = phi_mu(params, cfg.grid.r)
    gamma = gamma_mu(params, cfg.grid.r)

    if cfg.k == 0.0:
        results["note"] = "zero mass requested; the solution is identically 0"
        write_solution_table(out_dir, u, phi, gamma)
        write_report(out_dir, "solve", cfg.resolved, results, cfg.grid)
        write_timings(out_dir, timings)
        return EXIT_OK

    t0 = time.perf_counter()
    results["regular_multiplier"] = sol.regular_multiplier
    results["origin_mass_fit"] = analysis.origin_mass_fit(u, params)
    results["lower_bound_holds"] = analysis.check_lower_bound(u, params, cfg.k)
    fit_in = analysis.fit_exponent(u, (cfg.grid.r[0], cfg.grid.r[0] * 1e2),
                                   allow_log=params.taus.degenerate)
    results["origin_exponent"] = fit_in.exponent
    fit_out = analysis.fit_exponent(
        u, (cfg.grid.r[-1] * 1e-3, cfg.grid.r[-1] * 1e-1))
    results["infinity_exponent"] = fit_out.exponent
    alpha = cfg.potential.infinity_limit
    if alpha * params.mu < params.dim.mu0 and not params.taus.degenerate:
        mu_prime = 0.5 * (alpha * params.mu + params.dim.mu0)
        holds, c1 = analysis.check_envelope(u, params, cfg.k, mu_prime)
        results["envelope"] = {"mu_prime": mu_prime, "holds": holds,
                               "c1_est": c1}
    mass = verifier.distributional_mass(u, cfg.potential, params,
                                        verifier.bump(1.0))
    results["k_estimate"] = mass.k_estimate
    results["mass_error_estimate"] = mass.quadrature_error_estimate
    timings["analysis"] = time.perf_counter() - t0

    if not params.taus.degenerate:
        t0 = time.perf_counter()
        trace = green_ops.picard_iterate(
            cfg.potential, params, cfg.k, max_iters=cfg.solver.max_iters,
            grid=cfg.grid, tol_fp=cfg.solver.tol_fp,
            divergence_cap=cfg.solver.divergence_cap)
        mask = (cfg.grid.r >= 1e-3) & (cfg.grid.r <= 1e3)
        agree = float(np.max(np.abs(
            trace.final.values[mask] / u.values[mask] - 1.0)))
        results["oracle"] = {"verdict": trace.verdict,
                             "iterations": len(trace.residuals),
                             "agreement_mid_range": agree}
        timings["fixed_point_oracle"] = time.perf_counter() - t0

    write_solution_table(out_dir, u, phi, gamma)
    if plots:
        write_plots(out_dir, u, phi, gamma, cfg.k)
    write_report(out_dir, "solve", cfg.resolved, results, cfg.grid)
    write_timings(out_dir, timings)
    return EXIT_OK


def cmd_verify(cfg: ExperimentConfig, out_dir: str, plots: bool) -> int:
    params = cfg.params
    block = cfg.resolved["verify"]
    target = block["target"]
    r = cfg.grid.r
    if target == "phi_mu":
        u = RadialFunction(cfg.grid, cfg.k * phi_mu(params, r))
    else:
        u = RadialFunction(cfg.grid, cfg.k * gamma_mu(params, r))
    u = RadialFunction(cfg.grid, u.values)  # tags fitted per-mass below
    sign_changing = bool(np.any(u.values <= 0.0))
    radii = list(block["test_function_radii"])
    if sign_changing:
        radii = [R for R in radii if R < 1.0] or [0.5]

    def one(R):
        return verifier.distributional_mass(
            u, cfg.potential, params, verifier.bump(R))

    with ThreadPoolExecutor(max_workers=worker_count()) as pool:
        reports = list(pool.map(one, radii))

    results = {
        "target": target,
        "masses": [
            {"test_function": rep.test_function_id,
             "k_estimate": rep.k_estimate,
             "error_estimate": rep.quadrature_error_estimate}
            for rep in reports
        ],
    }
    if sign_changing:
        results["note"] = ("input changes sign away from the origin; "
                           "test functions restricted inside the unit ball")
    if not params.taus.degenerate:
        results["normalization_identity"] = \
            green_ops.normalization_identity_check(params, cfg.grid)
    write_report(out_dir, "verify", cfg.resolved, results, cfg.grid)
    return EXIT_OK


def cmd_exponent(cfg: ExperimentConfig, out_dir: str, plots: bool) -> int:
    try:
        sol = _solve_minimal(cfg)
    except ScheduleTooShort as exc:
        write_report(out_dir, "exponent", cfg.resolved,
                     {"verdict": "undetermined", "probe_trace": exc.trace},
                     cfg.grid)
        return EXIT_UNDETERMINED
    if sol.verdict != "converged":
        write_report(out_dir, "exponent", cfg.resolved,
                     {"verdict": sol.verdict}, cfg.grid)
        return EXIT_UNDETERMINED
    block = cfg.resolved["exponent"]
    fits = []
    for w in block["windows"]:
        fit = analysis.fit_exponent(sol.u, tuple(w),
                                    allow_log=block["allow_log"])
        fits.append({"window": list(w), "exponent": fit.exponent,
                     "residual": fit.log_slope_residual,
                     "log_correction": fit.log_correction})
    write_report(out_dir, "exponent", cfg.resolved,
                 {"verdict": "converged", "fits": fits}, cfg.grid)
    return EXIT_OK


def cmd_certify_exist(cfg: ExperimentConfig, out_dir: str, plots: bool) -> int:
    block = cfg.resolved["certify_exist"]
    variant = block["variant"]
    params = cfg.params
    results = {"variant": variant}
    try:
        if variant == "subcritical":
            if "mu_prime" not in block:
                raise ConfigInvalid(
                    "invalid config at certify_exist.mu_prime: required",
                    field="certify_exist.mu_prime")
            cert = analysis.supersolution_certificate(
                cfg.potential, params, block["mu_prime"], cfg.grid,
                tol_cert=cfg.solver.tol_cert)
        elif variant == "critical":
            if "varrho" not in block:
                raise ConfigInvalid(
                    "invalid config at certify_exist.varrho: required",
                    field="certify_exist.varrho")
            cert = analysis.critical_supersolution(
                params, cfg.potential, block["varrho"], cfg.grid,
                tol_cert=cfg.solver.tol_cert)
        else:
            c5 = block.get("c5", 0.0)
            passed, worst = analysis.decay_barrier_residual_check(
                params, c5, cfg.potential, tol_cert=cfg.solver.tol_cert)
            t, r_t = analysis.decay_barrier_params(params, c5)
            results.update({"passed": passed, "max_scaled_residual": worst,
                            "t": t, "r_t": r_t})
            write_report(out_dir, "certify-exist", cfg.resolved, results,
                         cfg.grid)
            return EXIT_OK if passed else EXIT_UNDETERMINED
    except CertificateFailed as exc:
        results["outcome"] = f"certificate failed: {exc}"
        write_report(out_dir, "certify-exist", cfg.resolved, results,
                     cfg.grid)
        return EXIT_UNDETERMINED
    results.update({
        "outcome": "valid",
        "mu_prime": cert.mu_prime,
        "k_star": cert.k_star,
        "constants": cert.constants,
        "grid_min_residual": cert.grid_min_residual,
    })
    write_report(out_dir, "certify-exist", cfg.resolved, results, cfg.grid)
    return EXIT_OK


def cmd_certify_nonexist(cfg: ExperimentConfig, out_dir: str,
                         plots: bool) -> int:
    block = cfg.resolved["certify_nonexist"]
    beta = float(block["beta"])
    eps = block.get("epsilon")
    params = cfg.params
    if eps is None:
        eps = analysis.optimize_epsilon(params.dim, params.mu, beta)
        eps_source = "optimized"
    else:
        eps_source = "configured"
    cert = analysis.nonexistence_certificate(params.dim, params.mu, beta, eps)
    results = {
        "beta": cert.beta, "epsilon": cert.epsilon,
        "epsilon_source": eps_source,
        "theta": cert.theta, "sigma_lb": cert.sigma_lb,
        "amplification": cert.amplification, "verdict": cert.verdict,
    }
    write_report(out_dir, "certify-nonexist", cfg.resolved, results, cfg.grid)
    return EXIT_OK if cert.verdict == "nonexistence" else EXIT_UNDETERMINED


def cmd_threshold(cfg: ExperimentConfig, out_dir: str, plots: bool) -> int:
    block = cfg.resolved["threshold"]
    sc = cfg.solver
    timings = {}
    t0 = time.perf_counter()
    rep = analysis.estimate_rho_star(cfg.params, tuple(block["bracket"]),
                                     block["tol"], sc)
    timings["threshold"] = time.perf_counter() - t0
    results = {
        "rho_lo": rep.rho_lo,
        "rho_hi": rep.rho_hi,
        "bracket_width": rep.bracket_width,
        "evaluations": [
            {"rho": rho, "classification": kind, "evidence": ev}
            for rho, kind, ev in rep.evaluations
        ],
    }
    write_report(out_dir, "threshold", cfg.resolved, results, cfg.grid)
    write_timings(out_dir, timings)
    return EXIT_OK


def cmd_iterate(cfg: ExperimentConfig, out_dir: str, plots: bool) -> int:
    block = cfg.resolved["iterate"]
    sc = cfg.solver
    trace = green_ops.picard_iterate(
        cfg.potential, cfg.params, cfg.k, max_iters=sc.max_iters,
        grid=cfg.grid, tol_fp=sc.tol_fp, divergence_cap=sc.divergence_cap,
        store_iterates=block["store_iterates"])
    results = {
        "verdict": trace.verdict,
        "iterations": len(trace.residuals),
        "residuals": trace.residuals,
        "probe_values": trace.probe_values,
    }
    os.makedirs(out_dir, exist_ok=True)
    with open(os.path.join(out_dir, "iteration_trace.csv"), "w",
              encoding="utf-8") as fh:
        fh.write("iteration,residual,probe_value\n")
        for i, res in enumerate(trace.residuals):
            fh.write(f"{i + 1},{res:.17g},{trace.probe_values[i + 1]:.17g}\n")
    write_report(out_dir, "iterate", cfg.resolved, results, cfg.grid)
    return EXIT_OK if trace.verdict != "max_iters" else EXIT_UNDETERMINED


_COMMANDS = {
    "solve": cmd_solve,
    "verify": cmd_verify,
    "exponent": cmd_exponent,
    "certify-exist": cmd_certify_exist,
    "certify-nonexist": cmd_certify_nonexist,
    "threshold": cmd_threshold,
    "iterate": cmd_iterate,
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="hardy-fundsol",
        description="fundamental solutions of inverse-square Schrodinger "
                    "operators: solve, certify, verify, bracket",
    )
    sub = parser.add_subparsers(dest="subcommand", required=True)
    for name in _COMMANDS:
        sp = sub.add_parser(name)
        sp.add_argument("--config", required=True, help="JSON config path")
        sp.add_argument("--out", default="hardy-fundsol-out",
                        help="output directory (default: hardy-fundsol-out)")
        sp.add_argument("--plots", action="store_true",
                        help="emit vector-graphics plots")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = load_config(args.config)
        return _COMMANDS[args.subcommand](cfg, args.out, args.plots)
    except ConfigInvalid as exc:
        print(f"error: {exc}" + (f" (field: {exc.field})" if exc.field else ""),
              file=sys.stderr)
        return EXIT_ERROR
    except BracketInvalid as exc:
        print(f"error: BracketInvalid: {exc}", file=sys.stderr)
        return EXIT_ERROR
    except HardyFundsolError as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_ERROR
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
