import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from hardy_fundsol.closed_forms import (
    dimension_params,
    gamma_mu,
    green_ball_closed_form,
    mu_params,
    phi_mu,
    tau_pair,
    v_rho,
    vrho_potential,
)
from hardy_fundsol.errors import (
    DegenerateMu,
    MuOutOfRange,
    NonpositiveRadius,
    RhoBelowOne,
)


@pytest.mark.parametrize("N,area", [
    (3, 4 * math.pi),
    (4, 2 * math.pi ** 2),
    (5, 8 * math.pi ** 2 / 3),
])
def test_sphere_area(N, area):
    dim = dimension_params(N)
    assert dim.sphere_area == pytest.approx(area, rel=1e-14)
    assert dim.c_N * (N - 2) * dim.sphere_area == pytest.approx(1.0, rel=1e-14)
    assert dim.mu0 == (N - 2) ** 2 / 4


def test_tau_pair_examples():
    d3 = dimension_params(3)
    t = tau_pair(0.25, d3)
    assert (t.tau_minus, t.tau_plus, t.degenerate) == (-0.5, -0.5, True)
    t = tau_pair(3 / 16, d3)
    assert t.tau_minus == pytest.approx(-0.75, abs=1e-15)
    assert t.tau_plus == pytest.approx(-0.25, abs=1e-15)
    assert not t.degenerate
    t = tau_pair(0.75, dimension_params(4))
    assert t.tau_minus == pytest.approx(-1.5, abs=1e-15)
    assert t.tau_plus == pytest.approx(-0.5, abs=1e-15)


def test_tau_pair_errors():
    d3 = dimension_params(3)
    with pytest.raises(MuOutOfRange):
        tau_pair(0.0, d3)
    with pytest.raises(MuOutOfRange):
        tau_pair(-1.0, d3)
    with pytest.raises(MuOutOfRange):
        tau_pair(0.2500001, d3)


@settings(derandomize=True, max_examples=120)
@given(
    N=st.sampled_from([3, 4, 5]),
    frac=st.floats(min_value=1e-6, max_value=1.0),
)
def test_tau_root_and_vieta_identities(N, frac):
    dim = dimension_params(N)
    mu = frac * dim.mu0
    t = tau_pair(mu, dim)
    for tau in (t.tau_minus, t.tau_plus):
        assert abs(tau * (tau + N - 2) + mu) < 1e-12
    assert abs(t.tau_minus + t.tau_plus + (N - 2)) < 1e-12
    assert abs(t.tau_minus * t.tau_plus - mu) < 1e-12
    assert t.tau_minus <= t.tau_plus <= 0.0


def test_c_mu_two_branch_formula():
    d3 = dimension_params(3)
    p = mu_params(3 / 16, d3)
    assert p.c_mu == 2 * math.sqrt(d3.mu0 - 3 / 16) * d3.sphere_area
    assert p.c_mu == pytest.approx(2 * math.pi, rel=1e-15)
    p0 = mu_params(d3.mu0, d3)
    assert p0.c_mu == d3.sphere_area


def test_phi_mu_values():
    d3 = dimension_params(3)
    p = mu_params(3 / 16, d3)
    assert phi_mu(p, 4.0) == pytest.approx(4 ** -0.75, rel=1e-14)
    p0 = mu_params(0.25, d3)
    assert phi_mu(p0, math.exp(-1)) == pytest.approx(math.exp(0.5), rel=1e-14)
    assert phi_mu(p0, 1.0) == 0.0
    with pytest.raises(NonpositiveRadius):
        phi_mu(p, 0.0)


def test_gamma_mu_values():
    d3 = dimension_params(3)
    p = mu_params(3 / 16, d3)
    assert gamma_mu(p, 16.0) == pytest.approx(0.5, rel=1e-14)
    p0 = mu_params(0.25, d3)
    assert gamma_mu(p0, 4.0) == pytest.approx(0.5, rel=1e-14)
    with pytest.raises(NonpositiveRadius):
        gamma_mu(p, -1.0)


def test_branch_separation_at_small_radius():
    d3 = dimension_params(3)
    p = mu_params(3 / 16, d3)
    r = 1e-6
    ratio = phi_mu(p, r) / gamma_mu(p, r)
    exact = math.exp((p.taus.tau_minus - p.taus.tau_plus) * math.log(r))
    assert ratio == pytest.approx(exact, rel=1e-10)
    assert ratio > 1e2


def test_green_ball_closed_form():
    d3 = dimension_params(3)
    p = mu_params(3 / 16, d3)
    val = green_ball_closed_form(p, 1.0, 0.25)
    assert val == pytest.approx(0.25 ** -0.75 - 0.25 ** -0.25, rel=1e-14)
    assert val == pytest.approx(1.414214, abs=5e-7)
    assert green_ball_closed_form(p, 1.0, 1.0) == pytest.approx(0.0, abs=1e-14)
    assert green_ball_closed_form(p, 2.0, 1.0) == pytest.approx(
        1 - 2 ** -0.5, rel=1e-14)
    r = np.logspace(-4, -0.01, 50)
    assert np.all(green_ball_closed_form(p, 1.0, r) > 0)
    with pytest.raises(DegenerateMu):
        green_ball_closed_form(mu_params(0.25, d3), 1.0, 0.5)


def test_v_rho_values():
    assert v_rho(2.0, 1.0) == pytest.approx(1.5, rel=1e-14)
    r = np.logspace(-3, 3, 20)
    assert np.max(np.abs(v_rho(1.0, r) * r ** 2 - 1.0)) < 1e-14
    # coupling tends to 1 at the origin
    assert v_rho(5.0, 1e-8) * 1e-16 == pytest.approx(1.0, rel=1e-12)
    with pytest.raises(RhoBelowOne):
        v_rho(0.5, 1.0)
    with pytest.raises(NonpositiveRadius):
        v_rho(2.0, 0.0)


@settings(derandomize=True, max_examples=60)
@given(rho=st.floats(min_value=1.0, max_value=1e4))
def test_v_rho_envelope(rho):
    r = np.logspace(-6, 6, 101)
    diff = v_rho(rho, r) - r ** -2.0
    exact = (rho - 1.0) / (1.0 + r * r)
    # difference of two large near-equal quantities: compare at their scale
    assert np.all(np.abs(diff - exact) <= 1e-12 * r ** -2.0 + 1e-12 * exact)
    dev = vrho_potential(rho).deviation(r)
    assert np.all(dev >= 0.0)
    assert np.all(dev <= (rho - 1.0) + 1e-12)


def test_v_rho_envelope_dense_grid():
    r = np.logspace(-6, 6, 10_000)
    for rho in (1.0, 1.2, 5.0, 200.0):
        diff = vrho_potential(rho).deviation(r)
        assert np.all(diff >= 0.0)
        assert np.all(diff <= rho - 1.0)


def test_vrho_potential_metadata():
    pot = vrho_potential(3.0)
    assert pot.origin_limit == 1.0
    assert pot.infinity_limit == 3.0
    assert pot.c0 == 2.0
