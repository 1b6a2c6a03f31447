import json

import numpy as np
import pytest

from oracles import omega, r_of_s, s_of_r
from vortexchoreo.asymptotics import (
    AsymptoticsReport,
    analyze_family,
    disk_angular_velocity,
    disk_distance_residual,
    disk_loop_radius,
    disk_r_of_s,
    disk_s_of_r,
    disk_speed_residual,
    fit_exponent,
    verify_distance_law,
    verify_family_derivative,
    verify_speed_law,
)
from vortexchoreo.errors import InsufficientFamily, PhaseMismatch
from vortexchoreo.orbit_finder import ContinuationFamily, orbit_loop


@pytest.mark.parametrize("n", [2, 3, 5])
def test_closed_forms_match_oracles(n):
    for s in (0.3, 0.5, 0.9, 0.97):
        assert disk_angular_velocity(n, s) == pytest.approx(omega(n, s), rel=1e-14)
        assert disk_r_of_s(n, s) == pytest.approx(r_of_s(n, s), rel=1e-14)
    for r in (0.08, 0.04, 0.02, 0.01):
        assert abs(disk_s_of_r(n, r) - s_of_r(n, r)) < 1e-13


def test_disk_residual_scaling():
    rs = np.array([0.08, 0.04, 0.02, 0.01])
    dist = np.array([disk_distance_residual(3, r) for r in rs])
    assert np.all(np.diff(dist / rs**2) < 0)
    assert fit_exponent(rs, dist) > 2.5
    speed = np.array([disk_speed_residual(3, r) for r in rs])
    assert fit_exponent(rs, speed) > 1.2


def test_disk_s_of_r_range():
    with pytest.raises(ValueError):
        disk_s_of_r(3, 0.0)
    with pytest.raises(ValueError):
        disk_s_of_r(3, 1.0)


def test_fit_exponent():
    r = np.geomspace(0.08, 0.01, 10)
    assert fit_exponent(r, 3.0 * r**2.7) == pytest.approx(2.7)
    with pytest.raises(InsufficientFamily):
        fit_exponent(r[:3], r[:3], fit_grid=None)


def test_insufficient_family(families, disk):
    frame, ev = disk
    _, family = families("disk", 2)
    short = ContinuationFamily(family.r_grid[:3], family.orbits[:3], n=2)
    with pytest.raises(InsufficientFamily):
        verify_distance_law(short, frame, ev)
    narrow = ContinuationFamily(family.r_grid[:5], family.orbits[:5], n=2)
    with pytest.raises(InsufficientFamily):
        verify_speed_law(narrow, frame, ev)


@pytest.mark.parametrize("n", [2, 3])
def test_disk_family_matches_oracles(families, disk, n):
    frame, ev = disk
    _, family = families("disk", n)
    records, _ = verify_distance_law(family, frame, ev)
    assert [rec.r for rec in records] == sorted((rec.r for rec in records), reverse=True)
    for rec in records:
        assert abs(rec.max_distance_residual - disk_distance_residual(n, rec.r)) < 1e-7
        assert abs(rec.max_speed_residual - disk_speed_residual(n, rec.r)) < 1e-7
    _, _, tang = verify_speed_law(family, frame, ev, records)
    assert tang is None


def test_disk_loop_is_circle(families, disk):
    frame, _ = disk
    _, family = families("disk", 3)
    for orbit in family.orbits:
        _, u = orbit_loop(frame, orbit)
        expect = disk_loop_radius(3, orbit.r_label, frame.delta)
        assert np.max(np.abs(np.abs(u) - expect)) < 1e-7


def test_disk_derivative_radial(families, disk):
    frame, _ = disk
    _, family = families("disk", 3)
    small = sorted(family.orbits, key=lambda o: o.r_label)[:2]
    (t, u1), (_, u2) = (orbit_loop(frame, o) for o in small)
    dq = (u1 - u2) / (small[0].r_label - small[1].r_label)
    radial = np.real(np.conj(dq) * u1 / np.abs(u1))
    assert np.max(np.abs(dq - radial * u1 / np.abs(u1))) < 1e-6
    assert np.all(radial < 0)
    r1, r2 = small[0].r_label, small[1].r_label
    oracle = (disk_loop_radius(3, r1, frame.delta) - disk_loop_radius(3, r2, frame.delta)) / (r1 - r2)
    assert np.max(np.abs(radial - oracle)) < 1e-4
    # the quotient approaches -delta/2 as r decreases
    mids, devs, _ = verify_family_derivative(family, frame)
    assert np.all(np.diff(devs) < 0)


def test_perturbed_derivative_sign(families, perturbed):
    frame, _ = perturbed
    _, family = families("perturbed", 2)
    small = sorted(family.orbits, key=lambda o: o.r_label)[:2]
    (t, u1), (_, u2) = (orbit_loop(frame, o) for o in small)
    dq = (u1 - u2) / (small[0].r_label - small[1].r_label)
    _, nu, kappa = frame.frame_at(small[0].section_sigma + t)
    assert np.all(kappa > 0)
    assert np.all(np.real(np.conj(dq) * nu) < 0)


def test_phase_mismatch(families, perturbed):
    frame, _ = perturbed
    _, family = families("perturbed", 2)
    moved = ContinuationFamily(family.r_grid, list(family.orbits), n=2)
    moved.orbits[-1] = type(moved.orbits[-1])(**{**vars(moved.orbits[-1]), "section_sigma": 0.5})
    with pytest.raises(PhaseMismatch):
        verify_family_derivative(moved, frame)


def test_report_outputs(families, perturbed, tmp_path):
    frame, ev = perturbed
    _, family = families("perturbed", 2)
    report = analyze_family(family, frame, ev)
    assert isinstance(report, AsymptoticsReport)
    assert report.passed and not report.tangency_trivial
    report.write(tmp_path / "asymptotics.json")
    data = json.loads((tmp_path / "asymptotics.json").read_text())
    assert data["pass"] is True
    assert set(data["checks"]) == {"distance", "speed", "tangency", "family_derivative"}
    assert len(data["records"]) == len(family.orbits)
    paths = report.write_gnuplot(tmp_path)
    rows = np.loadtxt(paths[0])
    assert rows.shape == (len(family.orbits), 2)
    again = analyze_family(family, frame, ev)
    assert json.dumps(again.to_dict()) == json.dumps(report.to_dict())
