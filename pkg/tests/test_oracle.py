"""Periodic ODE oracle: convergence, conservation, closed-form reductions."""

import numpy as np
import pytest

from ekemq import (
    ModelSpec,
    RateFunction,
    extract_boundary,
    integrate_periodic,
)
from ekemq.oracle import TrigInterpolant


def test_mm1_reduces_to_truncated_geometric(mm1_dist):
    rho = 0.6
    cap = mm1_dist.level_cap
    norm = 1.0 - rho ** (cap + 1)
    assert np.abs(mm1_dist.idle[:, 0] - (1 - rho) / norm).max() < 1e-10
    for j in (1, 2, 5, 10, 20):
        target = (1 - rho) * rho ** j / norm
        assert np.abs(mm1_dist.levels[:, j - 1, 0] - target).max() < 1e-10


def test_mm1_boundary_is_flat(mm1_boundary):
    u = np.linspace(0.0, 1.0, 13)
    rho = 0.6
    norm = 1.0 - rho ** 61
    assert np.abs(mm1_boundary.idle_at(u) - 0.4 / norm).max() < 1e-10
    assert np.abs(mm1_boundary.first_at(u) - 0.24 / norm).max() < 1e-10


def test_total_mass_is_one(periodic74_dist):
    assert np.abs(periodic74_dist.total_mass() - 1.0).max() < 1e-12


def test_nonnegative_and_converged(periodic74_dist):
    assert periodic74_dist.idle.min() > -1e-12
    assert periodic74_dist.levels.min() > -1e-12
    assert periodic74_dist.residual <= 1e-10
    assert periodic74_dist.periods < 200


def test_cap_leakage_negligible(periodic74_dist):
    assert periodic74_dist.cap_mass() < 1e-30


def test_grid_refinement_consistency(periodic74_spec, periodic74_dist):
    coarse = integrate_periodic(periodic74_spec, level_cap=50, grid_size=256,
                                tol=1e-10)
    ts = np.arange(16) / 16.0
    fine_vals = periodic74_dist.levels_at(ts)
    coarse_vals = coarse.levels_at(ts)
    assert np.abs(fine_vals - coarse_vals).max() < 1e-8


def test_level_cap_insensitivity(periodic74_spec, periodic74_dist):
    wider = integrate_periodic(periodic74_spec, level_cap=60, grid_size=512,
                               tol=1e-10)
    ts = np.arange(8) / 8.0
    a = periodic74_dist.levels_at(ts)[:, :40, :]
    b = wider.levels_at(ts)[:, :40, :]
    assert np.abs(a - b).max() < 1e-9
    assert np.abs(periodic74_dist.idle_at(ts) - wider.idle_at(ts)).max() < 1e-9


def test_interpolation_matches_grid_samples(periodic74_dist):
    grid = periodic74_dist.grid
    idx = [0, 17, 256, 511]
    at = periodic74_dist.idle_at(grid[idx])
    assert np.abs(at - periodic74_dist.idle[idx]).max() < 1e-9
    lv = periodic74_dist.levels_at(grid[idx])
    assert np.abs(lv - periodic74_dist.levels[idx]).max() < 1e-9


def test_level_mass_and_ordering(periodic74_dist):
    m1 = periodic74_dist.level_mass(1)
    m5 = periodic74_dist.level_mass(5)
    assert np.all(m1 > 0)
    assert np.all(m5 < m1)


def test_boundary_rejects_negative_values(periodic74_dist):
    boundary = extract_boundary(periodic74_dist)
    u = np.linspace(0.0, 2.0, 29)
    assert boundary.idle_at(u).min() >= 0.0
    assert boundary.first_at(u).min() >= 0.0
    assert boundary.idle_at(u).shape == (29, 7)
    assert boundary.first_at(u).shape == (29, 28)


def test_boundary_periodicity(periodic74_boundary):
    u = np.linspace(0.0, 1.0, 11)
    a = periodic74_boundary.idle_at(u)
    b = periodic74_boundary.idle_at(u + 3.0)
    assert np.abs(a - b).max() < 1e-12


def test_trig_interpolant_exact_on_bandlimited_data():
    grid = np.arange(16) / 16.0
    samples = (1.3 + 0.4 * np.cos(2 * np.pi * grid)
               - 0.9 * np.sin(2 * np.pi * 3 * grid))
    interp = TrigInterpolant(samples[:, None])
    dense = np.linspace(0.0, 2.0, 101)
    expected = (1.3 + 0.4 * np.cos(2 * np.pi * dense)
                - 0.9 * np.sin(2 * np.pi * 3 * dense))
    assert np.abs(interp(dense)[:, 0] - expected).max() < 1e-12


def test_unconverged_run_raises():
    spec = ModelSpec(1, 1, RateFunction(3.0), RateFunction(5.0))
    with pytest.raises(RuntimeError):
        integrate_periodic(spec, level_cap=40, grid_size=32, tol=1e-13,
                           max_periods=3)


def test_oracle_validates_arguments(mm1_spec):
    with pytest.raises(ValueError):
        integrate_periodic(mm1_spec, level_cap=0)
    with pytest.raises(ValueError):
        integrate_periodic(mm1_spec, level_cap=10, grid_size=3)
