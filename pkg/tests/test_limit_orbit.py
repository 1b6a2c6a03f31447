import numpy as np
import pytest

from vortexchoreo.limit_orbit import LimitOrbit, limit_orbit_eval, limit_rhs, seed_orbit
from vortexchoreo.orbit_finder import spectral_derivative


def test_disk_start_point(disk):
    frame, _ = disk
    orb = LimitOrbit(0.2, 0.0, frame)
    assert abs(limit_orbit_eval(orb, 0.0) - 0.8) < 1e-12


def test_disk_half_distance(disk):
    frame, _ = disk
    orb = LimitOrbit(0.1, 0.0, frame)
    assert abs(orb.period - np.pi) < 1e-12
    assert abs(orb.eval(orb.period / 4) - 0.9j) < 1e-10


def test_seed_period(disk, perturbed):
    assert abs(seed_orbit(disk[0]).period - 2 * np.pi) < 1e-12
    frame = perturbed[0]
    seed = seed_orbit(frame)
    assert seed.epsilon == frame.delta
    assert abs(seed.period - frame.total_length) < 1e-12


def test_epsilon_range(disk):
    frame, _ = disk
    with pytest.raises(ValueError):
        LimitOrbit(0.0, 0.0, frame)
    with pytest.raises(ValueError):
        LimitOrbit(0.3, 0.0, frame)


@pytest.mark.parametrize("which", ["disk", "perturbed"])
@pytest.mark.parametrize("eps_frac", [1.0, 0.5])
def test_solves_limit_system(request, which, eps_frac):
    frame, _ = request.getfixturevalue(which)
    orb = LimitOrbit(eps_frac * frame.delta, 0.3, frame)
    t, u = orb.samples(256)
    du = spectral_derivative(u, orb.period)
    assert np.max(np.abs(du - limit_rhs(frame, u))) < 1e-8
    assert np.max(np.abs(orb.velocity(t) - limit_rhs(frame, u))) < 1e-10


@pytest.mark.parametrize("which", ["disk", "perturbed"])
def test_distance_constant_and_speed(request, which):
    frame, _ = request.getfixturevalue(which)
    orb = LimitOrbit(0.7 * frame.delta, 1.1, frame)
    t, u = orb.samples(200)
    tc = frame.project(u)
    assert np.max(np.abs(tc.d - orb.epsilon)) < 1e-9
    L = frame.total_length
    gap = (tc.sigma - orb.phase(t) + 0.5 * L) % L - 0.5 * L
    assert np.max(np.abs(gap)) < 1e-9


def test_seeding_phases(perturbed):
    frame, _ = perturbed
    orb = seed_orbit(frame)
    n = 4
    L = frame.total_length
    theta = np.arange(n) * L / n
    sig = frame.project(orb.eval(theta)).sigma
    gaps = np.diff(np.append(sig, sig[0] + L))
    assert np.allclose(gaps, L / n, atol=1e-9)
