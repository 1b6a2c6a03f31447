"""Kirchhoff-Routh Hamiltonian, its symplectic vector field and time integration.

For strengths ``k_j`` the Hamiltonian is

    H(z) = sum_{j != k} k_j k_k G(z_j, z_k) - sum_k k_k^2 h(z_k)

(ordered pairs) and the motion is ``k_j dz_j/dt = -i grad_{z_j} H``.
"""
from __future__ import annotations

import csv
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import BoundaryAbort, CollisionAbort, CollisionTooClose, IntegrationAbort, InversionFailure, OutsideDomain
from .greens import INV_2PI, GreenEvaluator, disk_green, disk_grad1_green, grad_log_rho
from .ode import dop853

COLLISION_TOL = 1e-6
BOUNDARY_MARGIN = 1e-6
ENERGY_DRIFT_TOL = 1e-9
RTOL = 1e-11
ATOL = 1e-13


@dataclass
class VortexConfiguration:
    """Positions (complex) and strengths of ``N`` point vortices."""

    positions: np.ndarray
    strengths: np.ndarray | None = None

    def __post_init__(self):
        self.positions = np.atleast_1d(np.asarray(self.positions, dtype=complex)).copy()
        if self.positions.ndim != 1:
            raise ValueError("positions must be a 1-d sequence of complex numbers")
        if self.strengths is None:
            self.strengths = np.ones(len(self.positions))
        else:
            self.strengths = np.atleast_1d(np.asarray(self.strengths, dtype=float)).copy()
        if self.strengths.shape != self.positions.shape:
            raise ValueError("strengths must match positions")
        if np.any(self.strengths == 0):
            raise ValueError("vortex strengths must be nonzero")

    @property
    def n(self) -> int:
        return len(self.positions)

    def permuted(self, perm) -> "VortexConfiguration":
        perm = np.asarray(perm)
        return VortexConfiguration(self.positions[perm], self.strengths[perm])

    def rotated(self, angle: float) -> "VortexConfiguration":
        return VortexConfiguration(self.positions * np.exp(1j * angle), self.strengths)

    def min_separation(self) -> float:
        if self.n < 2:
            return np.inf
        diff = np.abs(self.positions[:, None] - self.positions[None, :])
        return float(np.min(diff[~np.eye(self.n, dtype=bool)]))


@dataclass
class Trajectory:
    times: np.ndarray
    positions: np.ndarray  # (n_times, N)
    energies: np.ndarray
    strengths: np.ndarray = field(default=None)

    @property
    def states(self) -> list[VortexConfiguration]:
        return [VortexConfiguration(p, self.strengths) for p in self.positions]

    @property
    def energy_drift(self) -> float:
        h0 = self.energies[0]
        return float(np.max(np.abs(self.energies - h0)) / (1.0 + abs(h0)))

    def write_csv(self, path) -> None:
        n = self.positions.shape[1]
        header = ["t"] + [f"{part}_z{j + 1}" for j in range(n) for part in ("re", "im")] + ["H"]
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(header)
            for t, z, h in zip(self.times, self.positions, self.energies):
                row = [t] + [v for zj in z for v in (zj.real, zj.imag)] + [h]
                w.writerow([f"{v:.17g}" for v in row])

    @classmethod
    def read_csv(cls, path, strengths=None) -> "Trajectory":
        data = np.loadtxt(Path(path), delimiter=",", skiprows=1, ndmin=2)
        pos = data[:, 1:-1:2] + 1j * data[:, 2:-1:2]
        return cls(data[:, 0], pos, data[:, -1], strengths)


def _check_separation(z, ev, tol):
    n = len(z)
    if n > 1:
        diff = np.abs(z[:, None] - z[None, :])
        diff[np.diag_indices(n)] = np.inf
        if np.min(diff) < tol * ev.scale:
            raise CollisionTooClose(f"vortices closer than {tol * ev.scale:.3g}")


def grad_hamiltonian(ev: GreenEvaluator, z, strengths):
    """``grad_{z_j} H`` for all ``j`` as a complex array.

    ``z`` may carry leading batch axes; the last axis indexes vortices.
    """
    z = np.asarray(z, dtype=complex)
    k = np.asarray(strengths, dtype=float)
    w = ev.to_disk(z)
    if np.any(np.abs(w) >= 1.0):
        raise OutsideDomain("vortex outside the domain")
    grad = (k * k * INV_2PI) * grad_log_rho(ev.domain, w)  # -k^2 grad h
    n = z.shape[-1]
    if n > 1:
        a, b = w[..., :, None], w[..., None, :]
        with np.errstate(divide="ignore", invalid="ignore"):
            g = disk_grad1_green(a, b)
        g[..., np.arange(n), np.arange(n)] = 0.0
        if not ev.domain.is_identity:
            g = g * np.conj(1.0 / ev.domain.dphi(w))[..., :, None]
        grad = grad + 2.0 * k * (g @ k)
    return grad


def hamiltonian(ev: GreenEvaluator, cfg: VortexConfiguration, collision_tol: float = COLLISION_TOL) -> float:
    z, k = cfg.positions, cfg.strengths
    _check_separation(z, ev, collision_tol)
    w = ev.to_disk(z)
    if np.any(np.abs(w) >= 1.0):
        raise OutsideDomain("vortex outside the domain")
    rho = (1.0 - np.abs(w) ** 2) * np.abs(ev.domain.dphi(w))
    energy = float(np.sum(k * k * INV_2PI * np.log(rho)))
    n = len(z)
    if n > 1:
        jj, kk = np.nonzero(~np.eye(n, dtype=bool))
        energy += float(np.sum(k[jj] * k[kk] * disk_green(w[jj], w[kk])))
    return energy


def vector_field(ev: GreenEvaluator, cfg: VortexConfiguration, collision_tol: float = COLLISION_TOL):
    """Velocities ``-(i/k_j) grad_{z_j} H``."""
    _check_separation(cfg.positions, ev, collision_tol)
    return -1j / cfg.strengths * grad_hamiltonian(ev, cfg.positions, cfg.strengths)


@dataclass
class IntegrateOptions:
    rtol: float = RTOL
    atol: float = ATOL
    collision_tol: float = COLLISION_TOL
    boundary_margin: float = BOUNDARY_MARGIN
    n_samples: int | None = None
    # adds unfold * grad H to the field; nonzero only inside the orbit finder
    unfold: float = 0.0


def _rhs(ev, strengths, unfold):
    k = np.asarray(strengths, dtype=float)
    rot = -1j / k

    def fun(t, z):
        try:
            g = grad_hamiltonian(ev, z, k)
        except (OutsideDomain, InversionFailure):
            return np.full(z.shape, np.nan, dtype=complex)
        if unfold:
            return rot * g + unfold * g
        return rot * g

    return fun


def _guard(ev, opts):
    coll = opts.collision_tol * ev.scale

    def check(t, z):
        n = len(z)
        if n > 1:
            diff = np.abs(z[:, None] - z[None, :])
            diff[np.diag_indices(n)] = np.inf
            if np.min(diff) < coll:
                raise CollisionAbort(f"collision at t={t:.17g}", t=t)
        w = ev.to_disk(z)
        if np.any(1.0 - np.abs(w) < opts.boundary_margin):
            raise BoundaryAbort(f"vortex reached the boundary margin at t={t:.17g}", t=t)

    return check


def flow(ev: GreenEvaluator, z0, t: float, strengths=None, opts: IntegrateOptions | None = None, t_eval=None):
    """Integrate positions ``z0`` over time ``t``; returns the solver output."""
    opts = opts or IntegrateOptions()
    z0 = np.asarray(z0, dtype=complex)
    k = np.ones(len(z0)) if strengths is None else strengths
    return dop853(
        _rhs(ev, k, opts.unfold), 0.0, z0, t, rtol=opts.rtol, atol=opts.atol,
        t_eval=t_eval, check=_guard(ev, opts),
    )


def integrate(ev: GreenEvaluator, cfg: VortexConfiguration, t_end: float, opts: IntegrateOptions | None = None,
              t_eval=None) -> Trajectory:
    """Integrate the vortex system from ``cfg`` up to ``t_end``.

    Output times are ``t_eval`` if given, else ``opts.n_samples`` uniform
    samples, else just the two end points. Negative ``t_end`` integrates
    backwards in time.

    Raises
    ------
    CollisionAbort, BoundaryAbort, StepSizeUnderflow
        With the partial trajectory attached as ``partial``.
    """
    opts = opts or IntegrateOptions()
    if t_end == 0:
        raise ValueError("t_end must be nonzero")
    _check_separation(cfg.positions, ev, opts.collision_tol)
    _guard(ev, opts)(0.0, cfg.positions)
    if t_eval is None:
        n = opts.n_samples or 2
        t_eval = np.linspace(0.0, t_end, n)
    t_eval = np.asarray(t_eval, dtype=float)
    try:
        sol = flow(ev, cfg.positions, t_end, cfg.strengths, opts, t_eval)
    except IntegrationAbort as exc:
        if exc.partial is not None:
            exc.partial = _trajectory(ev, exc.partial.t, exc.partial.y, cfg.strengths)
        raise
    return _trajectory(ev, sol.t, sol.y, cfg.strengths)


def _trajectory(ev, times, positions, strengths):
    energies = np.array([hamiltonian(ev, VortexConfiguration(z, strengths), 0.0) for z in positions])
    return Trajectory(times, positions, energies, np.array(strengths, dtype=float))
