import math

import numpy as np
import pytest

from hardy_fundsol import verifier
from hardy_fundsol.closed_forms import (
    gamma_mu,
    inverse_square_potential,
    mu_params,
    phi_mu,
    vrho_potential,
)
from hardy_fundsol.errors import NegativeU, SupportExceedsGrid
from hardy_fundsol.grid import LogGrid, RadialFunction


def test_bump_shape():
    xi = verifier.bump(1.0)
    assert xi.value(0.0) == 1.0
    assert xi.value(1.0) == 0.0
    assert xi.d1(1.0) == 0.0
    assert xi.value(1 / math.sqrt(2)) == pytest.approx(0.125, rel=1e-12)
    # radial smoothness at the origin: zero slope
    assert xi.d1(1e-12) == pytest.approx(0.0, abs=1e-11)
    # C^2 across the support boundary
    assert xi.d2(1.0 - 1e-9) == pytest.approx(0.0, abs=1e-7)


def test_bump_derivatives_match_finite_differences():
    xi = verifier.bump(1.3)
    h = 1e-4  # balances truncation against round-off in the second difference
    for r in (0.2, 0.7, 1.1):
        fd1 = (xi.value(r + h) - xi.value(r - h)) / (2 * h)
        assert xi.d1(r) == pytest.approx(fd1, abs=1e-7)
        fd2 = (xi.value(r + h) - 2 * xi.value(r) + xi.value(r - h)) / h ** 2
        assert xi.d2(r) == pytest.approx(fd2, abs=1e-6)


def test_lstar_apply_model_drops_potential_term(p316):
    # for the exact inverse square the deviation term vanishes identically
    xi = verifier.bump(1.0)
    pot = inverse_square_potential()
    r = np.array([0.3, 0.9])
    expected = (-xi.d2(r)
                - (p316.dim.N - 1 + 2 * p316.taus.tau_plus) * xi.d1(r) / r)
    assert np.allclose(verifier.lstar_apply(xi, p316, pot, r), expected,
                       rtol=1e-14)


def test_lstar_apply_constant_probe(p316):
    # a locally constant test function isolates the potential term
    flat = verifier.TestFunction(1.0, lambda r: np.ones_like(np.asarray(r, dtype=float)),
                                 lambda r: np.zeros_like(np.asarray(r, dtype=float)),
                                 lambda r: np.zeros_like(np.asarray(r, dtype=float)),
                                 1.0, "flat")
    pot = vrho_potential(2.0)
    r = 0.125
    val = verifier.lstar_apply(flat, p316, pot, r)
    assert val == pytest.approx(-p316.mu * pot.deviation(r), rel=1e-12)


def test_lstar_apply_origin_limit(p316):
    # xi'(r) = xi''(0) r + O(r^2), so the limit is -xi''(0) (N + 2 tau_+)
    xi = verifier.bump(1.0)
    pot = inverse_square_potential()
    limit = -xi.d2(0.0) * (p316.dim.N + 2 * p316.taus.tau_plus)
    assert verifier.lstar_apply(xi, p316, pot, 1e-8) == pytest.approx(
        limit, rel=1e-6)


def test_mass_of_model_solutions(p316, grid):
    pot = inverse_square_potential()
    phi = RadialFunction(grid, phi_mu(p316, grid.r)).with_fitted_tags()
    gam = RadialFunction(grid, gamma_mu(p316, grid.r)).with_fitted_tags()
    for R in (0.5, 1.0, 2.0):
        rep = verifier.distributional_mass(phi, pot, p316, verifier.bump(R))
        assert rep.k_estimate == pytest.approx(1.0, abs=1e-6)
        rep = verifier.distributional_mass(gam, pot, p316, verifier.bump(R))
        assert rep.k_estimate == pytest.approx(0.0, abs=1e-6)


def test_mass_test_function_independence(p316, grid):
    pot = inverse_square_potential()
    phi = RadialFunction(grid, phi_mu(p316, grid.r)).with_fitted_tags()
    ks = [verifier.distributional_mass(phi, pot, p316, verifier.bump(R)).k_estimate
          for R in (0.5, 1.0, 2.0)]
    assert max(ks) - min(ks) < 1e-6


def test_mass_linearity(p316, grid):
    pot = inverse_square_potential()
    a, b = 1.7, 0.4
    phi_v = phi_mu(p316, grid.r)
    gam_v = gamma_mu(p316, grid.r)
    combo = RadialFunction(grid, a * phi_v + b * gam_v).with_fitted_tags()
    xi = verifier.bump(1.0)
    k_combo = verifier.distributional_mass(combo, pot, p316, xi).k_estimate
    k_phi = verifier.distributional_mass(
        RadialFunction(grid, phi_v).with_fitted_tags(), pot, p316, xi).k_estimate
    k_gam = verifier.distributional_mass(
        RadialFunction(grid, gam_v).with_fitted_tags(), pot, p316, xi).k_estimate
    assert k_combo == pytest.approx(a * k_phi + b * k_gam, abs=1e-8)


def test_mass_critical_coupling(dim3, grid):
    p0 = mu_params(dim3.mu0, dim3)
    phi0 = RadialFunction(grid, phi_mu(p0, grid.r))
    rep = verifier.distributional_mass(phi0, inverse_square_potential(), p0,
                                       verifier.bump(0.5))
    assert rep.k_estimate == pytest.approx(1.0, abs=1e-5)


def test_mass_grid_refinement_order(p316):
    errs = []
    for n in (251, 501, 1001, 2001):
        g = LogGrid.from_radii(1e-6, 1e6, n)
        phi = RadialFunction(g, phi_mu(p316, g.r)).with_fitted_tags()
        rep = verifier.distributional_mass(phi, inverse_square_potential(),
                                           p316, verifier.bump(1.0))
        errs.append(abs(rep.k_estimate - 1.0))
    for e0, e1 in zip(errs, errs[1:]):
        assert e1 < 1e-10 or e0 / e1 >= 4.0


def test_mass_weight_bounded_near_origin(p316, grid):
    # the measure weight keeps the integrand O(r) at the origin
    weight_exp = p316.taus.tau_plus + p316.dim.N - 1
    assert weight_exp >= (p316.dim.N - 2) / 2
    pot = inverse_square_potential()
    xi = verifier.bump(1.0)
    integrand = (phi_mu(p316, 1e-6)
                 * verifier.lstar_apply(xi, p316, pot, 1e-6)
                 * 1e-6 ** weight_exp)
    assert abs(integrand) < 1e-4


def test_mass_of_ball_solution(p316, grid):
    # zero-boundary solutions carry the prescribed mass for test functions
    # supported inside the ball
    from hardy_fundsol import radial_engine
    ball = radial_engine.solve_ball_bvp(vrho_potential(1.2), p316, 1.0,
                                        10.0, grid)
    rep = verifier.distributional_mass(ball.u, vrho_potential(1.2), p316,
                                       verifier.bump(1.0))
    assert rep.k_estimate == pytest.approx(1.0, abs=1e-6)


def test_mass_minimal_solution_with_k2(p316, grid):
    from hardy_fundsol import radial_engine
    res = radial_engine.minimal_solution(
        vrho_potential(1.2), p316, 2.0, [1e1, 1e2, 1e3, 1e4, 1e5, 1e6],
        1e-3, grid)
    rep = verifier.distributional_mass(res.u, vrho_potential(1.2), p316,
                                       verifier.bump(1.0))
    assert rep.k_estimate == pytest.approx(2.0, rel=1e-2)


def test_mass_errors(p316, grid):
    pot = inverse_square_potential()
    phi = RadialFunction(grid, phi_mu(p316, grid.r)).with_fitted_tags()
    with pytest.raises(SupportExceedsGrid):
        verifier.distributional_mass(phi, pot, p316, verifier.bump(1e7))
    neg = RadialFunction(grid, phi_mu(p316, grid.r) - 2.0)
    with pytest.raises(NegativeU):
        verifier.distributional_mass(neg, pot, p316, verifier.bump(1.0))


def test_normalization_identity_reexported(p316, grid):
    assert verifier.normalization_identity_check(p316, grid) == pytest.approx(
        1.0, abs=1e-8)
