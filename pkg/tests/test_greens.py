import json

import numpy as np
import pytest

import oracles
from vortexchoreo.errors import BoundaryPoint, CoincidentPoints, OutsideDomain
from vortexchoreo.greens import check_assumption


def interior(ev, rng, n, radius=0.85):
    w = radius * np.sqrt(rng.uniform(0, 1, n)) * np.exp(2j * np.pi * rng.uniform(0, 1, n))
    return ev.domain.phi(w)


def fd_grad(fun, z, h=1e-6):
    return (fun(z + h) - fun(z - h)) / (2 * h) + 1j * (fun(z + 1j * h) - fun(z - 1j * h)) / (2 * h)


class TestDiskValues:
    def test_green(self, disk):
        _, ev = disk
        assert ev.green(0.0, 0.5) == pytest.approx(np.log(2) / (2 * np.pi), abs=1e-15)
        assert ev.green(0.0, 0.5) == pytest.approx(0.1103178, abs=1e-7)
        assert ev.green(0.3, 0.6j) == ev.green(0.6j, 0.3)
        for x, y in [(0.2, 0.7j), (-0.4 + 0.1j, 0.3 - 0.5j)]:
            assert ev.green(x, y) == pytest.approx(oracles.green(x, y), abs=1e-14)

    def test_green_vanishes_at_boundary(self, disk):
        _, ev = disk
        assert abs(ev.green(0.2, 1 - 1e-3)) < 1e-3
        vals = [ev.green(0.2, 1 - 10.0**-k) for k in range(2, 6)]
        assert all(abs(b) < abs(a) for a, b in zip(vals, vals[1:]))

    def test_grad1(self, disk):
        _, ev = disk
        assert ev.grad1_green(0.0, 0.5) == pytest.approx(3 / (4 * np.pi), abs=1e-15)

    def test_robin(self, disk):
        _, ev = disk
        assert ev.robin(0.0) == 0.0
        # -(1/2pi) log 0.64; the commonly quoted 0.0710316 is a rounding slip
        assert ev.robin(0.6) == pytest.approx(0.0710288, abs=1e-7)
        assert ev.robin(0.6) == pytest.approx(oracles.robin(0.6), abs=1e-15)
        vals = [ev.robin(1 - 1e-4 * k) for k in range(1, 6)]
        assert all(b < a for a, b in zip(vals, vals[1:]))

    def test_grad_robin(self, disk):
        _, ev = disk
        assert ev.grad_robin(0.5) == pytest.approx(2 / (3 * np.pi), abs=1e-15)
        assert ev.grad_robin(0.0) == 0

    def test_conformal_radius(self, disk):
        frame, ev = disk
        assert ev.conformal_radius(0.6) == pytest.approx(0.64, abs=1e-15)
        q = np.exp(1j * np.linspace(0, 2 * np.pi, 17))
        assert np.all(ev.conformal_radius(q) == 0)
        assert np.max(np.abs(ev.grad_conformal_radius(q) + 2 * q)) < 1e-15
        d = np.linspace(0.01, 0.19, 10)
        p, nu, _ = frame.frame_at(1.3)
        assert np.max(np.abs(ev.conformal_radius(p - d * nu) - (2 * d - d * d))) < 1e-14

    def test_errors(self, disk):
        _, ev = disk
        with pytest.raises(CoincidentPoints):
            ev.green(0.3, 0.3)
        with pytest.raises(BoundaryPoint):
            ev.robin(1.0)
        with pytest.raises(OutsideDomain):
            ev.green(1.5, 0.2)


@pytest.mark.parametrize("which", ["disk", "perturbed"])
class TestProperties:
    def get(self, request, which):
        return request.getfixturevalue(which)

    def test_symmetry(self, request, which, rng):
        _, ev = self.get(request, which)
        x, y = interior(ev, rng, 200), interior(ev, rng, 200)
        assert np.max(np.abs(ev.green(x, y) - ev.green(y, x))) < 1e-12

    def test_grad1_fd(self, request, which, rng):
        _, ev = self.get(request, which)
        x, y = interior(ev, rng, 50), interior(ev, rng, 50)
        keep = np.abs(x - y) > 0.1
        x, y = x[keep], y[keep]
        g = ev.grad1_green(x, y)
        fd = fd_grad(lambda s: ev.green(s, y), x)
        assert np.max(np.abs(g - fd) / np.abs(g)) < 1e-6

    def test_grad_robin_fd(self, request, which, rng):
        _, ev = self.get(request, which)
        z = interior(ev, rng, 50)
        g = ev.grad_robin(z)
        fd = fd_grad(ev.robin, z)
        assert np.max(np.abs(g - fd) / np.maximum(np.abs(g), 1e-3)) < 1e-6

    def test_grad_rho_fd(self, request, which, rng):
        _, ev = self.get(request, which)
        z = interior(ev, rng, 50)
        g = ev.grad_conformal_radius(z)
        fd = fd_grad(ev.conformal_radius, z)
        assert np.max(np.abs(g - fd) / np.maximum(np.abs(g), 1e-3)) < 1e-6

    def test_rho_robin_consistency(self, request, which, rng):
        _, ev = self.get(request, which)
        z = interior(ev, rng, 100)
        assert np.max(np.abs(ev.conformal_radius(z) - np.exp(-2 * np.pi * ev.robin(z)))) < 1e-12

    def test_regular_part_harmonic(self, request, which):
        _, ev = self.get(request, which)
        x, h = ev.domain.phi(0.1 + 0.05j), 1e-3
        pts = ev.domain.phi(np.array([0.4 + 0.3j, -0.5 + 0.2j, 0.1 - 0.6j]))
        g = lambda z: ev.regular_part(x, z)
        lap = (g(pts + h) + g(pts - h) + g(pts + 1j * h) + g(pts - 1j * h) - 4 * g(pts)) / h**2
        assert np.max(np.abs(lap)) < 1e-4

    def test_assumption_report(self, request, which, tmp_path):
        frame, ev = self.get(request, which)
        path = tmp_path / "report.json"
        rep = check_assumption(ev, frame, report_path=path)
        assert rep.passed
        assert rep.max_grad_rho_deviation < 1e-8
        assert rep.max_grad_rho_fd_deviation < 1e-5
        assert rep.max_hessian_deviation < 1e-5
        assert min(rep.green_decay_exponent, rep.green_hessian_decay_exponent) >= 0.9
        assert rep.mixed_tangential_decay_exponent >= 0.9
        data = json.loads(path.read_text())
        for key in ("boundary_samples", "max_grad_rho_deviation", "max_hessian_deviation",
                    "green_decay_exponent", "pass"):
            assert key in data
        assert data["pass"] is True


def test_results_independent_of_history(perturbed, rng):
    _, ev = perturbed
    x, y = interior(ev, rng, 20), interior(ev, rng, 20)
    first = ev.green(x, y)
    ev.green(y, x)
    ev.grad1_green(interior(ev, rng, 20), y)
    assert np.array_equal(ev.green(x, y), first)
    assert np.array_equal(ev.clone().green(x, y), first)
