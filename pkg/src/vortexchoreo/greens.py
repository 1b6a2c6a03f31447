"""Dirichlet Green function, Robin function and conformal radius.

Everything is evaluated in the unit disk, where the Green function is known
in closed form,

    G(a, b) = (1/2pi) log(|1 - a conj(b)| / |a - b|),

and transported to the domain through the Riemann map ``f = Phi^{-1}``:
``G_Omega(x, y) = G(f(x), f(y))``. Gradients are complex numbers
``d/dx1 + i d/dx2``; for an analytic ``f`` the chain rule reads
``grad (u o f) = (grad u)(f) * conj(f')``.
"""
from __future__ import annotations

import json
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from .errors import BoundaryPoint, CoincidentPoints, InversionFailure, OutsideDomain
from .geometry import BoundaryFrame, DomainMap

INV_2PI = 1.0 / (2.0 * np.pi)
FD_STEP = 1e-5


def disk_green(a, b):
    return INV_2PI * np.log(np.abs(1.0 - a * np.conj(b)) / np.abs(a - b))


def disk_grad1_green(a, b):
    return -INV_2PI * np.conj(1.0 / (a - b) + np.conj(b) / (1.0 - a * np.conj(b)))


def grad_log_rho(domain: DomainMap, w):
    """Gradient of ``log rho`` at ``x = Phi(w)``."""
    g = -2.0 * w / (1.0 - np.abs(w) ** 2)
    if domain.is_identity:
        return g
    d1 = domain.dphi(w)
    return (g + np.conj(domain.d2phi(w) / d1)) * np.conj(1.0 / d1)


class GreenEvaluator:
    """Green-function evaluator for one :class:`DomainMap`.

    Stateless apart from the domain, so results depend only on the
    arguments.
    """

    def __init__(self, domain: DomainMap, tolerance: float = 1e-13):
        self.domain = domain
        self.tolerance = tolerance
        w = np.exp(2j * np.pi * np.arange(256) / 256)
        self.scale = float(np.max(np.abs(domain.phi(w))))

    def clone(self) -> "GreenEvaluator":
        return GreenEvaluator(self.domain, self.tolerance)

    # -- conformal transport ---------------------------------------------
    def to_disk(self, x):
        """Riemann map ``f(x)`` onto the unit disk."""
        x = np.asarray(x, dtype=complex)
        if self.domain.is_identity:
            return x
        return self.domain.inverse(x, None, self.tolerance)

    def _inside(self, w, what):
        if np.any(np.abs(w) >= 1.0):
            raise OutsideDomain(f"{what} must lie inside the domain")

    def _coincident(self, x, y):
        if np.any(np.abs(np.asarray(x) - np.asarray(y)) < 1e-10 * self.scale):
            raise CoincidentPoints("arguments of the Green function coincide")

    # -- Green function --------------------------------------------------
    def green(self, x, y):
        """Dirichlet Green function ``G(x, y)``."""
        self._coincident(x, y)
        a, b = self.to_disk(x), self.to_disk(y)
        self._inside(a, "x")
        self._inside(b, "y")
        return disk_green(a, b)

    def regular_part(self, x, y):
        """``g(x, y) = -(1/2pi) log|x - y| - G(x, y)``."""
        return -INV_2PI * np.log(np.abs(np.asarray(x) - np.asarray(y))) - self.green(x, y)

    def grad1_green(self, x, y):
        """Gradient of ``G`` in its first argument."""
        self._coincident(x, y)
        a, b = self.to_disk(x), self.to_disk(y)
        self._inside(a, "x")
        self._inside(b, "y")
        g = disk_grad1_green(a, b)
        if self.domain.is_identity:
            return g
        return g * np.conj(1.0 / self.domain.dphi(a))

    def hess1_green(self, x, y, step=None):
        """``(..., 2, 2)`` Hessian of ``G`` in the first argument (central differences)."""
        return _fd_jacobian(lambda s: self.grad1_green(s, y), x, step or FD_STEP * self.scale)

    def mixed_green(self, x, y, step=None):
        """``(..., 2, 2)`` matrix of second derivatives: rows index ``x``, columns ``y``."""
        return _fd_jacobian(lambda s: self.grad1_green(x, s), y, step or FD_STEP * self.scale)

    # -- conformal radius and Robin function -----------------------------
    def _rho_parts(self, w):
        d1 = self.domain.dphi(w)
        one = 1.0 - np.abs(w) ** 2
        return one * np.abs(d1), d1

    def conformal_radius(self, z):
        """``rho = (1 - |f|^2)/|f'|``; exactly 0 on the boundary."""
        w = self.to_disk(z)
        if np.any(np.abs(w) > 1.0 + 1e-12):
            raise OutsideDomain("z lies outside the domain")
        rho, _ = self._rho_parts(w)
        return np.where(np.abs(w) >= 1.0 - 1e-15, 0.0, rho)

    def conformal_radius_extended(self, z):
        """The analytic formula for ``rho`` without domain checks (for differencing)."""
        return self._rho_parts(self.to_disk(z))[0]

    def grad_conformal_radius(self, z):
        """Analytic gradient of ``rho``; valid up to and across the boundary."""
        w = self.to_disk(z)
        rho, d1 = self._rho_parts(w)
        if self.domain.is_identity:
            return -2.0 * w
        d2 = self.domain.d2phi(w)
        grad_w = -2.0 * w * np.abs(d1) + rho * np.conj(d2 / d1)
        return grad_w * np.conj(1.0 / d1)

    def hess_conformal_radius(self, z, step=None):
        """``(..., 2, 2)`` Hessian of ``rho`` by central differences of the gradient."""
        h = _fd_jacobian(self.grad_conformal_radius, z, step or FD_STEP * self.scale)
        return 0.5 * (h + np.swapaxes(h, -1, -2))

    def robin(self, z):
        """Robin function ``h(z) = g(z, z) = -(1/2pi) log rho(z)``."""
        rho = self.conformal_radius(z)
        if np.any(rho <= 0):
            raise BoundaryPoint("Robin function is infinite on the boundary")
        return -INV_2PI * np.log(rho)

    def grad_robin(self, z):
        rho = self.conformal_radius(z)
        if np.any(rho <= 0):
            raise BoundaryPoint("Robin function is infinite on the boundary")
        return -INV_2PI * self.grad_conformal_radius(z) / rho


def _fd_jacobian(grad, z, h):
    """Jacobian of a complex-valued gradient field as real ``(..., 2, 2)``."""
    z = np.asarray(z, dtype=complex)
    gx = (grad(z + h) - grad(z - h)) / (2 * h)
    gy = (grad(z + 1j * h) - grad(z - 1j * h)) / (2 * h)
    col_x = np.stack([gx.real, gx.imag], axis=-1)
    col_y = np.stack([gy.real, gy.imag], axis=-1)
    return np.stack([col_x, col_y], axis=-1)


@dataclass
class AssumptionReport:
    boundary_samples: int
    max_grad_rho_deviation: float
    max_grad_rho_fd_deviation: float
    max_hessian_deviation: float
    green_decay_exponent: float
    green_hessian_decay_exponent: float
    mixed_tangential_decay_exponent: float
    fitted_constants: dict = field(default_factory=dict)
    thresholds: dict = field(default_factory=dict)
    passed: bool = False

    def to_dict(self) -> dict:
        out = asdict(self)
        out["pass"] = out.pop("passed")
        return out

    def write(self, path) -> None:
        Path(path).write_text(json.dumps(self.to_dict(), indent=2, sort_keys=True) + "\n")


def _slope(d, values):
    return float(np.polyfit(np.log(d), np.log(values), 1)[0])


def check_assumption(
    ev: GreenEvaluator,
    frame: BoundaryFrame,
    report_path=None,
    n_boundary: int = 64,
    separation: float = 0.3,
    grad_tol: float = 1e-5,
    hess_tol: float = 1e-5,
    min_exponent: float = 0.9,
) -> AssumptionReport:
    """Numerically check the boundary behaviour of ``rho`` and ``G``.

    On ``n_boundary`` boundary points ``q`` compares ``grad rho(q)`` with
    ``-2 nu(q)`` (analytically and by differences of ``rho``) and the
    Hessian with ``-2 kappa(q) Id``. For interior ``w`` at distance at least
    ``separation`` from tube points ``z = q - d nu``, fits the decay
    exponents of ``|grad_1 G|``, ``|grad_1^2 G|`` and of the tangential column
    ``|grad_2 grad_1 G (i nu)|`` against ``d`` over ``d = 2^-3 .. 2^-8 delta``.
    """
    L = frame.total_length
    sigma = np.arange(n_boundary) * (L / n_boundary)
    q, nu, kappa = frame.frame_at(sigma)

    grad = ev.grad_conformal_radius(q)
    grad_dev = float(np.max(np.abs(grad + 2.0 * nu)))
    h = FD_STEP * ev.scale
    fd = (ev.conformal_radius_extended(q + h) - ev.conformal_radius_extended(q - h)) / (2 * h)
    fd = fd + 1j * (ev.conformal_radius_extended(q + 1j * h) - ev.conformal_radius_extended(q - 1j * h)) / (2 * h)
    grad_fd_dev = float(np.max(np.abs(fd + 2.0 * nu)))
    hess = ev.hess_conformal_radius(q)
    hess_dev = float(np.max(np.abs(hess + 2.0 * kappa[:, None, None] * np.eye(2))))

    d = frame.delta * 2.0 ** -np.arange(3, 9)
    anchors = sigma[:: max(1, n_boundary // 8)]
    exps = {"grad": [], "hess": [], "mixed": []}
    consts = {"grad": 0.0, "hess": 0.0, "mixed": 0.0}
    for s0 in anchors:
        p0, nu0, _ = frame.frame_at(s0)
        z = p0 - d * nu0
        # one far partner (domain centre) and one at roughly the minimal separation
        p1, nu1, _ = frame.frame_at(s0 + 1.2 * separation)
        partners = [ev.domain.phi(0.0), p1 - 0.5 * separation * nu1]
        for w in partners:
            if np.min(np.abs(w - z)) < separation:
                continue
            w = np.full(z.shape, w, dtype=complex)
            g = np.abs(ev.grad1_green(w, z))
            hh = np.linalg.norm(ev.hess1_green(w, z, step=1e-6 * ev.scale), axis=(-2, -1), ord=2)
            mixed = ev.mixed_green(w, z, step=1e-3 * d[-1])
            t = np.stack([-nu0.imag, nu0.real])
            m = np.linalg.norm(mixed @ t, axis=-1)
            for key, vals in (("grad", g), ("hess", hh), ("mixed", m)):
                exps[key].append(_slope(d, vals))
                consts[key] = max(consts[key], float(np.max(vals / d)))

    report = AssumptionReport(
        boundary_samples=n_boundary,
        max_grad_rho_deviation=grad_dev,
        max_grad_rho_fd_deviation=grad_fd_dev,
        max_hessian_deviation=hess_dev,
        green_decay_exponent=min(exps["grad"]),
        green_hessian_decay_exponent=min(exps["hess"]),
        mixed_tangential_decay_exponent=min(exps["mixed"]),
        fitted_constants=consts,
        thresholds={"grad_tol": grad_tol, "hess_tol": hess_tol, "min_exponent": min_exponent},
    )
    report.passed = bool(
        grad_dev < grad_tol
        and grad_fd_dev < grad_tol
        and hess_dev < hess_tol
        and report.green_decay_exponent >= min_exponent
        and report.green_hessian_decay_exponent >= min_exponent
        and report.mixed_tangential_decay_exponent >= min_exponent
    )
    if report_path is not None:
        report.write(report_path)
    return report
