"""Acceptance suite: one test per criterion, each printing a pass line.

Run with `pytest tests/test_acceptance.py -v -s` (or -rA) to see the lines.
Timed criteria assume compiled kernels; the session fixture warms them up.
"""

import filecmp
import json
import math
import time

import numpy as np
import pytest

from hardy_fundsol import analysis, cli, green_ops, radial_engine, verifier
from hardy_fundsol.closed_forms import (
    custom_potential,
    dimension_params,
    gamma_mu,
    inverse_square_potential,
    mu_params,
    phi_mu,
    vrho_potential,
)
from hardy_fundsol.errors import NoAdmissibleMuPrime
from hardy_fundsol.grid import LogGrid, RadialFunction


def _report(n, text):
    print(f"ACCEPTANCE {n} PASS: {text}")


def test_criterion_1_closed_form_reproduction():
    """Both branch integrations reproduce the model power laws to 1e-8."""
    grid = LogGrid.from_radii(1e-6, 1e3, 3001)
    pot = inverse_square_potential()
    t0 = time.perf_counter()
    worst = 0.0
    for N in (3, 4, 5):
        dim = dimension_params(N)
        for frac in (0.3, 0.75, 0.96):
            p = mu_params(frac * dim.mu0, dim)
            # singular branch marched inward from its dominant end
            r_top = float(np.exp(grid.s_max))
            u0, du0, _ = radial_engine.frobenius_init(pot, p, "singular",
                                                      r_top)
            sing = radial_engine.integrate(pot, p, (u0, du0), grid.s_max,
                                           grid)
            err = np.max(np.abs(
                sing.values / np.exp(p.taus.tau_minus * grid.nodes) - 1.0))
            worst = max(worst, err)
            # regular branch marched outward
            r_bot = float(np.exp(grid.s_min))
            u0, du0, _ = radial_engine.frobenius_init(pot, p, "regular",
                                                      r_bot)
            reg = radial_engine.integrate(pot, p, (u0, du0), grid.s_min,
                                          grid)
            err = np.max(np.abs(
                reg.values / np.exp(p.taus.tau_plus * grid.nodes) - 1.0))
            worst = max(worst, err)
    elapsed = time.perf_counter() - t0
    assert worst < 1e-8
    assert elapsed < 5.0
    _report(1, f"branch reproduction max rel err {worst:.2e} in "
               f"{elapsed:.2f} s")


def test_criterion_2_distributional_identity(p316, dim3, grid):
    pot = inverse_square_potential()
    phi = RadialFunction(grid, phi_mu(p316, grid.r)).with_fitted_tags()
    gam = RadialFunction(grid, gamma_mu(p316, grid.r)).with_fitted_tags()
    worst_phi = worst_gam = 0.0
    for R in (0.5, 1.0, 2.0):
        k = verifier.distributional_mass(phi, pot, p316,
                                         verifier.bump(R)).k_estimate
        worst_phi = max(worst_phi, abs(k - 1.0))
        k = verifier.distributional_mass(gam, pot, p316,
                                         verifier.bump(R)).k_estimate
        worst_gam = max(worst_gam, abs(k))
    assert worst_phi < 1e-6
    assert worst_gam < 1e-6
    p0 = mu_params(dim3.mu0, dim3)
    phi0 = RadialFunction(grid, phi_mu(p0, grid.r))
    k0 = verifier.distributional_mass(phi0, pot, p0,
                                      verifier.bump(0.5)).k_estimate
    assert abs(k0 - 1.0) < 1e-5
    assert p316.c_mu == pytest.approx(2.0 * math.pi, rel=1e-15)
    _report(2, f"mass errors: singular {worst_phi:.2e}, regular "
               f"{worst_gam:.2e}, critical {abs(k0 - 1):.2e}; "
               f"c_mu = 2*pi exactly")


def test_criterion_3_normalization_identity(grid):
    rng = np.random.RandomState(20240809)
    t0 = time.perf_counter()
    worst = 0.0
    for _ in range(10):
        N = int(rng.choice([3, 4, 5]))
        dim = dimension_params(N)
        mu = float(rng.uniform(0.05, 0.95)) * dim.mu0
        val = green_ops.normalization_identity_check(mu_params(mu, dim), grid)
        worst = max(worst, abs(val - 1.0))
    elapsed = time.perf_counter() - t0
    assert worst < 1e-8
    assert elapsed < 2.0
    _report(3, f"unit-normalization identity err {worst:.2e} over 10 "
               f"couplings in {elapsed:.2f} s")


def test_criterion_4_minimal_solution(p316, grid, vrho12_minimal,
                                      vrho12_picard):
    t0 = time.perf_counter()
    res = vrho12_minimal
    assert res.verdict == "converged"
    k_fit = analysis.origin_mass_fit(res.u, p316)
    assert abs(k_fit - 1.0) < 1e-4
    assert analysis.check_lower_bound(res.u, p316, 1.0)
    holds, c1 = analysis.check_envelope(res.u, p316, 1.0, 0.23)
    assert holds and np.isfinite(c1)
    trace = vrho12_picard
    assert trace.verdict == "fixed_point"
    mask = (grid.r >= 1e-3) & (grid.r <= 1e3)
    agree = float(np.max(np.abs(
        trace.final.values[mask] / res.u.values[mask] - 1.0)))
    assert agree < 1e-4
    elapsed = time.perf_counter() - t0
    assert elapsed < 30.0
    _report(4, f"converged; origin data {k_fit:.8f}; envelope c1 "
               f"{c1:.4f}; oracle agreement {agree:.2e}")


def test_criterion_5_nonexistence(p316, dim3, grid):
    cert = analysis.nonexistence_certificate(dim3, 3 / 16, 9.0, 0.1)
    assert cert.theta == 0.5
    assert cert.amplification >= 1.0
    assert cert.verdict == "nonexistence"
    verdicts = {}
    for rho in (9.0, 225.0):
        res = radial_engine.minimal_solution(
            vrho_potential(rho), p316, 1.0,
            [1e1, 1e2, 1e3, 1e4, 1e5, 1e6], 1e-3, grid)
        verdicts[rho] = res.verdict
        assert res.verdict in ("diverged", "positivity_breakdown")
    _report(5, f"theta exactly 0.5, amplification "
               f"{cert.amplification:.4f}; schedules: {verdicts}")


def test_criterion_6_threshold_bracketing(p316):
    cfg = analysis.SolverConfig()
    rep = analysis.estimate_rho_star(p316, (1.05, 9.0), 1e-9, cfg)
    assert rep.rho_lo >= 4.0 / 3.0 - 1e-9
    rhos = [r for r, _, _ in rep.evaluations]
    assert rhos == sorted(rhos)
    kinds = [k for _, k, _ in rep.evaluations]
    for i, ki in enumerate(kinds):
        if ki == "nonexistence":
            assert "existence" not in kinds[i + 1:]
    _report(6, f"bracket [{rep.rho_lo:.10f}, {rep.rho_hi:.6f}], width "
               f"{rep.bracket_width:.6f} (threshold location left open)")


def test_criterion_7_certificate_suite(p316, dim3, grid):
    cert = analysis.supersolution_certificate(vrho_potential(1.2), p316,
                                              0.23, grid)
    assert cert.valid and cert.grid_min_residual >= -1e-7

    c5 = 0.5
    pot_dip = custom_potential(
        lambda r: r ** -2.0 - c5 / (1.0 + np.maximum(-np.log(r), 0.0)),
        0.5, c5, 1.0, 1.0)
    passed, worst = analysis.decay_barrier_residual_check(p316, c5, pot_dip)
    assert passed

    with pytest.raises(NoAdmissibleMuPrime):
        alpha_mu = vrho_potential(1.2).infinity_limit * p316.mu
        analysis.supersolution_certificate(vrho_potential(1.2), p316,
                                           alpha_mu, grid)

    p0 = mu_params(dim3.mu0, dim3)
    varrho = 0.5
    pot_crit = custom_potential(
        lambda r: np.minimum(1.0, varrho + (1 - varrho) / (1 + r * r))
        * r ** -2.0,
        0.5, 1.0 - varrho, 1.0, varrho)
    crit = analysis.critical_supersolution(p0, pot_crit, varrho, grid)
    assert crit.valid and crit.grid_min_residual >= -1e-7
    _report(7, f"subcritical k*={cert.k_star:.4f}; barrier residual "
               f"{worst:.2e}; critical certificate k'={crit.k_star:.1f}")


def test_criterion_8_integrability(dim3):
    worst = 0.0
    for rho in (1.0, 2.0, 5.0):
        finite, val = analysis.local_integrability(vrho_potential(rho), dim3)
        assert finite
        exact = 4.0 * math.pi * (rho - 1.0) * math.log(2.0) / 2.0
        worst = max(worst, abs(val - exact))
        assert abs(val - exact) < 1e-8
    log_pot = custom_potential(
        lambda r: (1.0 + 1.0 / np.maximum(-np.log(np.minimum(r, 0.99)), 1e-2))
        * r ** -2.0,
        0.5, 1.0, 1.0, 1.0)
    finite, val = analysis.local_integrability(log_pot, dim3)
    assert not finite and math.isinf(val)
    _report(8, f"closed-form match err {worst:.2e}; logarithmic "
               f"counterexample flagged divergent")


def test_criterion_9_determinism_and_exit_codes(tmp_path):
    def write(name, data):
        path = tmp_path / name
        path.write_text(json.dumps(data))
        return str(path)

    base = {"dimension": 3, "mu": 0.1875,
            "potential": {"kind": "vrho", "rho": 1.2}}
    cfg = write("solve.json", base)
    assert cli.main(["solve", "--config", cfg, "--out",
                     str(tmp_path / "a")]) == 0
    assert cli.main(["solve", "--config", cfg, "--out",
                     str(tmp_path / "b")]) == 0
    for name in ("report.json", "report.txt", "solution.csv"):
        assert filecmp.cmp(tmp_path / "a" / name, tmp_path / "b" / name,
                           shallow=False)

    model = {"dimension": 3, "mu": 0.1875,
             "potential": {"kind": "inverse_square"}}
    corpus = [
        ("solve", base, 0),
        ("solve", model, 0),
        ("solve", {**base, "potential": {"kind": "vrho", "rho": 9.0}}, 2),
        ("verify", model, 0),
        ("verify", {**model, "mu": 0.25}, 0),
        ("certify-exist", {**base, "certify_exist":
                           {"variant": "subcritical", "mu_prime": 0.23}}, 0),
        ("certify-exist", {**base, "certify_exist":
                           {"variant": "subcritical", "mu_prime": 0.2249}}, 1),
        ("certify-nonexist", {**model, "certify_nonexist":
                              {"beta": 9.0, "epsilon": 0.1}}, 0),
        ("certify-nonexist", {**model, "certify_nonexist":
                              {"beta": 1.01}}, 2),
        ("threshold", {**model, "threshold":
                       {"bracket": [2.0, 2.0], "tol": 1e-3}}, 1),
        ("solve", {"dimension": 3,
                   "potential": {"kind": "inverse_square"}}, 1),
        ("iterate", base, 0),
    ]
    assert len(corpus) == 12
    for i, (sub, data, expected) in enumerate(corpus):
        cfg = write(f"c{i}.json", data)
        code = cli.main([sub, "--config", cfg, "--out",
                         str(tmp_path / f"o{i}")])
        assert code == expected, f"case {i} ({sub}): {code} != {expected}"
    _report(9, "byte-identical repeated solve; exit codes honored on the "
               "12-config corpus")
