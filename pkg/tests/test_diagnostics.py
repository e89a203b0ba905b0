"""Observables against 1D quadrature oracles; identity discriminators."""

import numpy as np
import pytest

from frontlab.diagnostics import (
    TimeSeries,
    burning_rate,
    check_steady_identity,
    front_position,
    nusselt,
    nz_norm,
    u_sup,
    winn_functional,
)
from frontlab.errors import ConfigurationError
from frontlab.front import FrontSolution, linear_profile, tau0_speed
from frontlab.grid import (
    ScalarField,
    constant_field,
    field_from_function,
    make_grid,
    temperature_bc,
)
from frontlab.laminar import ReactionModel, laminar_speed, profile_eval


def _profile_field(g, prof):
    vals = np.broadcast_to(profile_eval(prof, g.x)[:, None], g.shape).copy()
    return ScalarField(g, vals, temperature_bc())


def test_burning_rate_trivial_cases():
    g = make_grid(10.0, 2.0, 65, 9)
    r = ReactionModel("step_linear", 0.25)
    cold = constant_field(g, 0.2)
    burned = constant_field(g, 1.0)
    assert burning_rate(cold, r) == 0.0
    assert burning_rate(burned, r) == 0.0


def test_burning_rate_laminar_wave_identity():
    # 1D wave identity: integral of f along the profile equals c0; the
    # reaction jump at the ignition point costs O(h), so the grid is fine
    r = ReactionModel("step_linear", 0.25)
    prof = laminar_speed(r, tol=1e-6)
    g = make_grid(40.0, 2.0, 1537, 9)
    T = _profile_field(g, prof)
    assert burning_rate(T, r) == pytest.approx(prof.c0, rel=0.02)


def test_nusselt_against_1d_quadrature():
    r = ReactionModel("quad_ignition", 0.25)
    prof = laminar_speed(r, tol=1e-6)
    g = make_grid(40.0, 2.0, 641, 9)
    T = _profile_field(g, prof)
    oracle = float(np.trapezoid(prof.dphi**2, prof.xs))
    assert nusselt(T) == pytest.approx(oracle, rel=0.02)
    assert nusselt(constant_field(g, 0.3)) <= 1e-25


def test_nz_norm_planar_floor_and_mode():
    g = make_grid(2.0, 1.0, 33, 65)
    planar = field_from_function(g, lambda X, Z: 1 / (1 + np.exp(X)), temperature_bc())
    assert nz_norm(planar) <= 1e-24
    mode = field_from_function(g, lambda X, Z: np.cos(np.pi * Z / g.lam), temperature_bc())
    # integral of (pi/lam)^2 sin^2 over the strip
    expect = 2 * g.a * (np.pi / g.lam) ** 2 * (g.lam / 2)
    assert nz_norm(mode) == pytest.approx(expect, rel=0.01)


def test_u_sup_measures_horizontal_component():
    g = make_grid(2.0, 1.0, 65, 33)

    class FakeFlow:
        v = field_from_function(g, lambda X, Z: 0.7 * np.sin(np.pi * Z / g.lam))
        w = constant_field(g, 100.0)

    assert u_sup(FakeFlow()) == pytest.approx(0.7, rel=1e-3)


def test_winn_functional_values():
    g = make_grid(10.0, 2.0, 65, 9)
    assert winn_functional(constant_field(g, 0.0)) == 0.0
    assert winn_functional(constant_field(g, 1.0)) == pytest.approx(0.0, abs=1e-15)
    assert winn_functional(constant_field(g, 0.5)) == pytest.approx(g.a / 2, rel=1e-12)


def test_winn_functional_laminar_oracle():
    r = ReactionModel("quad_ignition", 0.25)
    prof = laminar_speed(r, tol=1e-6)
    g = make_grid(40.0, 2.0, 641, 9)
    T = _profile_field(g, prof)
    oracle = float(np.trapezoid(prof.phi * (1.0 - prof.phi), prof.xs))
    assert winn_functional(T) == pytest.approx(oracle, rel=0.02)


def test_front_position_cases():
    g = make_grid(20.0, 2.0, 257, 9)
    c = tau0_speed(0.25, g.a)
    prof = np.broadcast_to(linear_profile(c, g.a, g.x)[:, None], g.shape).copy()
    T = ScalarField(g, prof, temperature_bc())
    level = linear_profile(c, g.a, 0.0)
    assert abs(front_position(T, level)) <= g.hx
    assert front_position(ScalarField(g, np.zeros(g.shape)), 0.5) == -g.a
    # integer-cell translation moves the result exactly
    k = 7
    shifted = np.full(g.shape, 0.0)
    shifted[k:, :] = prof[:-k, :]
    shifted[:k, :] = 1.0
    p0 = front_position(T, 0.5)
    p1 = front_position(ScalarField(g, shifted), 0.5)
    assert p1 - p0 == pytest.approx(k * g.hx, abs=1e-12)


def _fake_solution(g, T_values, c, tau):
    T = ScalarField(g, T_values, temperature_bc())
    return FrontSolution(
        c=c, T=T, omega=None, flow=None, tau=tau,
        residual_T=0.0, residual_omega=0.0, normalization_residual=0.0,
    )


def test_steady_identity_tau0_closed_form():
    g = make_grid(20.0, 2.0, 257, 9)
    r = ReactionModel("step_linear", 0.25)
    c = tau0_speed(0.25, g.a)
    vals = np.broadcast_to(linear_profile(c, g.a, g.x)[:, None], g.shape).copy()
    sol = _fake_solution(g, vals, c, 0.0)
    assert check_steady_identity(sol, r) <= 1e-3


def test_steady_identity_rejects_random_fields():
    g = make_grid(20.0, 2.0, 129, 9)
    r = ReactionModel("step_linear", 0.25)
    rng = np.random.default_rng(0)
    vals = np.clip(rng.random(g.shape), 0, 1)
    sol = _fake_solution(g, vals, 1.0, 1.0)
    assert check_steady_identity(sol, r) > 0.2


def test_timeseries_running_averages():
    ts = TimeSeries()
    rng = np.random.default_rng(1)
    t = 0.0
    for _ in range(200):
        ts.append(t, *rng.random(7))
        t += 0.05 + 0.01 * rng.random()
    bars = ts.recomputed_bars()
    for name, col in (("V", "Vbar"), ("N", "Nbar"), ("U_sup", "Ubar"), ("Nz", "Nzbar")):
        stored = ts.column(col)
        assert np.abs(stored[1:] - bars[name][1:]).max() <= 1e-12 * np.abs(stored[1:]).max()


def test_timeseries_rejects_nonincreasing_time():
    ts = TimeSeries()
    ts.append(0.0, 1, 1, 1, 1, 1, 1, 0)
    ts.append(0.5, 1, 1, 1, 1, 1, 1, 0)
    with pytest.raises(ConfigurationError):
        ts.append(0.5, 1, 1, 1, 1, 1, 1, 0)


def test_timeseries_window_average():
    ts = TimeSeries()
    for k in range(101):
        t = 0.1 * k
        ts.append(t, 2.0 + np.sin(t), 0, 0, 0, 0, 0, 0)
    # average of 2 + sin over [2, 8]
    expect = 2.0 + (np.cos(2.0) - np.cos(8.0)) / 6.0
    assert ts.window_average("V", 2.0, 8.0) == pytest.approx(expect, abs=1e-3)
