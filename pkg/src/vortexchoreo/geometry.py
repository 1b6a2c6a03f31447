"""Domain maps, boundary frames and tube coordinates near the boundary.

The domain is the image of the closed unit disk under a polynomial map
``Phi(w) = w + sum_k c_k w**k`` (identity for the unit disk). The boundary
curve is ``gamma(theta) = Phi(exp(i theta))``, traversed counterclockwise, so
the unit tangent is ``i*nu`` with ``nu`` the exterior unit normal and the
curvature is positive on convex arcs.

Arc length is computed spectrally: ``|Phi'(exp(i theta))|`` is a smooth
periodic function, so its Fourier series integrates term by term to an
arc-length function ``sigma(theta)`` that is accurate to rounding level.
"""
from __future__ import annotations

import enum
from dataclasses import dataclass
from functools import cached_property
from typing import NamedTuple

import numpy as np
from numpy.polynomial import polynomial as npoly
from scipy.interpolate import PchipInterpolator
from scipy.optimize import minimize_scalar

from .errors import (
    CurvatureSingularity,
    InversionFailure,
    MapNotInjective,
    NoConvergence,
    OutsideTube,
)

GEOMETRY_TOL = 1e-10
DISK_DELTA = 0.2
TWO_PI = 2.0 * np.pi


class DomainKind(str, enum.Enum):
    UNIT_DISK = "unit_disk"
    PERTURBED_DISK = "perturbed_disk"


@dataclass(frozen=True)
class DomainMap:
    """Conformal description of a simply connected domain.

    Parameters
    ----------
    kind : DomainKind or str
        ``"unit_disk"`` or ``"perturbed_disk"``.
    coefficients : sequence of complex
        ``c_2, c_3, ...`` of ``Phi(w) = w + c_2 w^2 + c_3 w^3 + ...``.
        Must be empty for the unit disk.
    delta : float, optional
        Tube radius override. By default 0.2 for the unit disk and a
        curvature/reach based rule otherwise (see :func:`boundary_frame`).
    """

    kind: DomainKind = DomainKind.UNIT_DISK
    coefficients: tuple = ()
    delta: float | None = None

    def __post_init__(self):
        kind = DomainKind(self.kind)
        coeffs = tuple(complex(c) for c in self.coefficients)
        if kind is DomainKind.UNIT_DISK and coeffs:
            raise ValueError("unit_disk takes no coefficients")
        if not all(np.isfinite(c) for c in coeffs):
            raise ValueError("coefficients must be finite")
        object.__setattr__(self, "kind", kind)
        object.__setattr__(self, "coefficients", coeffs)
        if self.delta is not None and not (np.isfinite(self.delta) and self.delta > 0):
            raise ValueError("delta must be a positive finite number")
        if self.injectivity_margin <= 0:
            raise MapNotInjective(
                f"sum k|c_k| = {1 - self.injectivity_margin:.6g} >= 1; "
                "Phi is not guaranteed injective on the unit disk"
            )

    @classmethod
    def unit_disk(cls, delta=None):
        return cls(DomainKind.UNIT_DISK, (), delta)

    @classmethod
    def perturbed_disk(cls, coefficients, delta=None):
        return cls(DomainKind.PERTURBED_DISK, tuple(coefficients), delta)

    @property
    def injectivity_margin(self) -> float:
        """Lower bound ``1 - sum k|c_k|`` for ``|Phi'|`` on the closed disk."""
        return 1.0 - sum(k * abs(c) for k, c in enumerate(self.coefficients, start=2))

    @property
    def is_identity(self) -> bool:
        return not any(self.coefficients)

    @cached_property
    def _poly(self):
        return np.array([0.0, 1.0, *self.coefficients], dtype=complex)

    @cached_property
    def _derivs(self):
        out = [self._poly]
        for _ in range(3):
            out.append(npoly.polyder(out[-1]) if len(out[-1]) > 1 else np.zeros(1, complex))
        return out

    def phi(self, w):
        return _horner(self._derivs[0], w)

    def dphi(self, w):
        return _horner(self._derivs[1], w)

    def d2phi(self, w):
        return _horner(self._derivs[2], w)

    def d3phi(self, w):
        return _horner(self._derivs[3], w)

    def inverse(self, x, guess=None, tol=1e-13, maxiter=50):
        """Solve ``Phi(w) = x`` by damped Newton iteration.

        ``guess`` warm-starts the iteration; the cold start is ``w = x``.
        """
        x = np.asarray(x, dtype=complex)
        if self.is_identity:
            return x.copy()
        if guess is None:
            w = x.copy()
        else:
            w = np.array(np.broadcast_to(guess, x.shape), dtype=complex)
        res = self.phi(w) - x
        for _ in range(maxiter):
            step = res / self.dphi(w)
            w_new = w - step
            if np.max(np.abs(step), initial=0.0) <= tol:
                return w_new
            res_new = self.phi(w_new) - x
            worse = np.abs(res_new) > np.abs(res) * (1 + 1e-12) + 1e-15
            lam = 1.0
            while np.any(worse) and lam > 1e-6:
                lam *= 0.5
                w_new = np.where(worse, w - lam * step, w_new)
                res_new = np.where(worse, self.phi(w_new) - x, res_new)
                worse = worse & (np.abs(res_new) > np.abs(res))
            w, res = w_new, res_new
        raise InversionFailure(f"map inversion did not converge in {maxiter} iterations")

    def to_dict(self) -> dict:
        out = {"kind": self.kind.value}
        if self.kind is DomainKind.PERTURBED_DISK:
            out["coefficients"] = [[c.real, c.imag] for c in self.coefficients]
        if self.delta is not None:
            out["delta"] = self.delta
        return out

    @classmethod
    def from_dict(cls, spec: dict) -> "DomainMap":
        kind = DomainKind(spec["kind"])
        coeffs = [complex(re, im) for re, im in spec.get("coefficients", [])]
        return cls(kind, tuple(coeffs), spec.get("delta"))


def _horner(coeffs, w):
    w = np.asarray(w)
    out = np.full(w.shape, coeffs[-1], dtype=complex)
    for c in coeffs[-2::-1]:
        out = out * w + c
    return out


class FrameSamples(NamedTuple):
    sigma: np.ndarray
    gamma: np.ndarray
    nu: np.ndarray
    kappa: np.ndarray


class TubeCoordinates(NamedTuple):
    """Nearest boundary point ``p``, distance ``d`` and arc length ``sigma``.

    ``nu`` and ``kappa`` are the normal and curvature at ``p``.
    """

    p: np.ndarray
    d: np.ndarray
    sigma: np.ndarray
    nu: np.ndarray
    kappa: np.ndarray


class BoundaryFrame:
    """Arc-length description of the boundary curve of a :class:`DomainMap`.

    Build with :func:`boundary_frame`. All evaluation methods accept scalars
    or arrays of arc length (any real value; periodic with ``total_length``).
    """

    def __init__(self, domain: DomainMap, n_samples: int, delta: float | None = None):
        self.domain = domain
        self._spec = _speed_spectrum(domain)
        self.total_length = float(TWO_PI * self._spec[0].real)

        n_seed = max(4 * n_samples, 1024)
        th = np.linspace(0.0, TWO_PI, n_seed + 1)
        sig = self.sigma_of_theta(th)
        self._theta_lookup = PchipInterpolator(sig, th)
        self._seed_theta = th[:-1]
        self._seed_gamma = domain.phi(np.exp(1j * th[:-1]))

        sigma = np.arange(n_samples) * (self.total_length / n_samples)
        theta = self.theta_of_sigma(sigma)
        gamma, nu, kappa = self._at_theta(theta)
        self.samples = FrameSamples(sigma, gamma, nu, kappa)
        self.scale = float(np.max(np.abs(self._seed_gamma)))
        self.max_kappa = float(np.max(np.abs(self._at_theta(self._seed_theta)[2])))
        self.reach = _estimate_reach(self.samples)
        if delta is None:
            delta = domain.delta
        if delta is None:
            if domain.kind is DomainKind.UNIT_DISK:
                delta = DISK_DELTA
            else:
                delta = 0.5 * min(1.0 / self.max_kappa, self.reach)
        if self.max_kappa * delta >= 1.0:
            raise ValueError(f"tube radius {delta} violates |kappa| < 1/delta")
        self.delta = float(delta)
        # nearest-point projection is unique below the reach; keep a margin
        self.max_depth = float(0.9 * min(1.0 / self.max_kappa, self.reach))

    # -- parametrization -------------------------------------------------
    def sigma_of_theta(self, theta):
        theta = np.asarray(theta, dtype=float)
        a = self._spec
        k = np.arange(1, len(a))
        out = a[0].real * theta
        if len(k):
            e = np.exp(1j * np.multiply.outer(theta, k)) - 1.0
            out = out + 2.0 * np.real(e @ (a[1:] / (1j * k)))
        return out

    def theta_of_sigma(self, sigma):
        sigma = np.asarray(sigma, dtype=float)
        L = self.total_length
        wraps = np.floor(sigma / L)
        rem = sigma - wraps * L
        theta = self._theta_lookup(rem)
        for _ in range(30):
            f = self.sigma_of_theta(theta) - rem
            theta = theta - f / np.abs(self.domain.dphi(np.exp(1j * theta)))
            if np.all(np.abs(f) < 1e-12 * L):
                break
        return theta + TWO_PI * wraps

    def _derivatives(self, theta):
        w = np.exp(1j * np.asarray(theta, dtype=float))
        d1, d2, d3 = self.domain.dphi(w), self.domain.d2phi(w), self.domain.d3phi(w)
        g0 = self.domain.phi(w)
        g1 = 1j * w * d1
        g2 = -w * d1 - w * w * d2
        g3 = -1j * w * d1 - 3j * w * w * d2 - 1j * w**3 * d3
        return g0, g1, g2, g3

    def _at_theta(self, theta):
        g0, g1, g2, _ = self._derivatives(theta)
        speed = np.abs(g1)
        nu = -1j * g1 / speed
        kappa = np.imag(np.conj(g1) * g2) / speed**3
        return g0, nu, kappa

    def gamma(self, sigma):
        return self.domain.phi(np.exp(1j * self.theta_of_sigma(sigma)))

    def nu(self, sigma):
        return self._at_theta(self.theta_of_sigma(sigma))[1]

    def tangent(self, sigma):
        return 1j * self.nu(sigma)

    def kappa(self, sigma):
        return self._at_theta(self.theta_of_sigma(sigma))[2]

    def kappa_prime(self, sigma):
        """Derivative of curvature with respect to arc length."""
        _, g1, g2, g3 = self._derivatives(self.theta_of_sigma(sigma))
        s = np.abs(g1)
        num = np.imag(np.conj(g1) * g2)
        dk_dtheta = (np.imag(np.conj(g1) * g3) * s**3 - 3.0 * num * s * np.real(np.conj(g1) * g2)) / s**6
        return dk_dtheta / s

    def frame_at(self, sigma):
        """Return ``(gamma, nu, kappa)`` at the given arc lengths."""
        return self._at_theta(self.theta_of_sigma(sigma))

    # -- projection -------------------------------------------------------
    def project(self, z, limit: float | None = None) -> TubeCoordinates:
        """Nearest-point projection onto the boundary.

        Raises :class:`OutsideTube` if a point lies outside the domain or at
        distance ``>= limit`` (default ``max_depth``) from the boundary.
        """
        z = np.asarray(z, dtype=complex)
        shape = z.shape
        zf = z.ravel()
        theta = self._seed(zf)
        phi = self.domain
        ok = np.zeros(zf.shape, bool)
        for _ in range(50):
            w = np.exp(1j * theta)
            d1, d2 = phi.dphi(w), phi.d2phi(w)
            g1 = 1j * w * d1
            g2 = -w * d1 - w * w * d2
            diff = phi.phi(w) - zf
            grad = np.real(np.conj(diff) * g1)
            hess = np.abs(g1) ** 2 + np.real(np.conj(diff) * g2)
            step = np.where(hess > 0, grad / np.where(hess > 0, hess, 1.0), 0.0)
            theta = theta - step
            ok = (hess > 0) & (np.abs(step) < 1e-14)
            if np.all(ok):
                break
        if not np.all(ok):
            theta = np.where(ok, theta, self._fallback(zf, theta, ok))
        p, nu, kappa = self._at_theta(theta)
        diff = zf - p
        d = np.abs(diff)
        outward = np.real(np.conj(diff) * nu)
        limit = self.max_depth if limit is None else limit
        if np.any(outward > GEOMETRY_TOL * self.scale):
            raise OutsideTube("point lies outside the domain")
        if np.any(d >= limit):
            raise OutsideTube(f"distance {d.max():.6g} to the boundary exceeds tube limit {limit:.6g}")
        sigma = np.mod(self.sigma_of_theta(theta), self.total_length)
        return TubeCoordinates(
            p.reshape(shape), d.reshape(shape), sigma.reshape(shape), nu.reshape(shape), kappa.reshape(shape)
        )

    def _seed(self, zf):
        out = np.empty(zf.shape)
        chunk = max(1, 2_000_000 // len(self._seed_gamma))
        for i in range(0, len(zf), chunk):
            dist = np.abs(zf[i:i + chunk, None] - self._seed_gamma[None, :])
            out[i:i + chunk] = self._seed_theta[np.argmin(dist, axis=1)]
        return out

    def _fallback(self, zf, theta, ok):
        out = theta.copy()
        h = TWO_PI / len(self._seed_theta)
        for i in np.flatnonzero(~ok):
            z0 = zf[i]
            t0 = self._seed(np.array([z0]))[0]
            res = minimize_scalar(
                lambda t: abs(self.domain.phi(np.exp(1j * t)) - z0) ** 2,
                bounds=(t0 - 2 * h, t0 + 2 * h),
                method="bounded",
                options={"xatol": 1e-14},
            )
            if not res.success:
                raise NoConvergence("boundary projection did not converge")
            out[i] = res.x
        return out


def _speed_spectrum(domain: DomainMap, max_n: int = 1 << 16):
    """Fourier coefficients of ``|Phi'(exp(i theta))|`` (non-negative modes)."""
    if domain.is_identity:
        return np.array([1.0 + 0j])
    n = 256
    while True:
        theta = np.arange(n) * (TWO_PI / n)
        a = np.fft.rfft(np.abs(domain.dphi(np.exp(1j * theta)))) / n
        tail = np.max(np.abs(a[n // 4:]))
        if tail < 1e-16 * abs(a[0]) or n >= max_n:
            break
        n *= 2
    keep = np.flatnonzero(np.abs(a) > 2e-16 * abs(a[0]))
    return a[: keep[-1] + 1]


def _estimate_reach(samples: FrameSamples, max_points: int = 1024) -> float:
    """Reach of the boundary curve from pairwise sample geometry.

    Uses ``inf |x - y|^2 / (2 |<x - y, nu_x>|)`` over sample pairs, which
    captures both the curvature radius and half the narrowest bottleneck.
    """
    stride = max(1, len(samples.gamma) // max_points)
    g = samples.gamma[::stride]
    nu = samples.nu[::stride]
    diff = g[None, :] - g[:, None]
    normal = np.abs(np.real(np.conj(diff) * nu[:, None]))
    with np.errstate(divide="ignore", invalid="ignore"):
        ratio = np.abs(diff) ** 2 / (2.0 * normal)
    np.fill_diagonal(ratio, np.inf)
    return float(np.min(ratio[np.isfinite(ratio)]))


def boundary_frame(domain: DomainMap, n_samples: int = 512, delta: float | None = None) -> BoundaryFrame:
    """Build the arc-length boundary frame of ``domain``.

    ``n_samples`` (>= 64) arc-length-uniform samples are stored in
    ``frame.samples``; evaluation between samples is exact up to rounding.
    """
    if n_samples < 64:
        raise ValueError("n_samples must be at least 64")
    if domain.injectivity_margin <= 0:
        raise MapNotInjective("map is not injective")
    return BoundaryFrame(domain, int(n_samples), delta)


def project_to_boundary(frame: BoundaryFrame, z) -> TubeCoordinates:
    return frame.project(z)


def _check_r(frame, r):
    if not (0.0 <= r <= frame.delta):
        raise ValueError(f"r must lie in [0, delta={frame.delta}]")


def chi_r(frame: BoundaryFrame, r: float, z):
    """Fibrewise contraction ``p(z) - (r/delta) d(z) nu(p(z))`` of the tube."""
    _check_r(frame, r)
    tc = frame.project(z)
    return tc.p - (r / frame.delta) * tc.d * tc.nu


def chi_r_inverse(frame: BoundaryFrame, r: float, z):
    """Inverse of :func:`chi_r`; scales the distance by ``delta/r``."""
    if not (0.0 < r <= frame.delta):
        raise ValueError(f"r must lie in (0, delta={frame.delta}]")
    tc = frame.project(z)
    d_new = (frame.delta / r) * tc.d
    if np.any(d_new >= frame.max_depth):
        raise OutsideTube("preimage under chi_r leaves the tube")
    return tc.p - d_new * tc.nu


def tube_jacobian(nu, a, b):
    """2x2 matrices ``a nu nu^T + b (i nu)(i nu)^T`` for complex ``nu``."""
    nu = np.asarray(nu, dtype=complex)
    n = np.stack([nu.real, nu.imag], axis=-1)
    t = np.stack([-nu.imag, nu.real], axis=-1)
    a = np.asarray(a, dtype=float)[..., None, None]
    b = np.asarray(b, dtype=float)[..., None, None]
    return a * n[..., :, None] * n[..., None, :] + b * t[..., :, None] * t[..., None, :]


def chi_r_jacobian(frame: BoundaryFrame, r: float, z) -> np.ndarray:
    """Derivative of :func:`chi_r` as a real ``(..., 2, 2)`` array."""
    _check_r(frame, r)
    tc = frame.project(z)
    one_minus = 1.0 - tc.d * tc.kappa
    if np.any(np.abs(one_minus) < 1e-8):
        raise CurvatureSingularity("1 - d*kappa vanishes")
    delta = frame.delta
    tangential = (delta - r * tc.d * tc.kappa) / (delta * one_minus)
    return tube_jacobian(tc.nu, np.full(np.shape(tc.d), r / delta), tangential)
