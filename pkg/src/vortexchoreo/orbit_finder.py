"""Choreographic periodic orbits near the boundary by shooting and continuation.

A choreography of ``N`` identical vortices with period ``T`` is determined by
its initial configuration ``z(0)`` through the return condition

    flow_{T/N}(z(0)) = roll(z(0), -1),

i.e. after ``T/N`` vortex ``k`` occupies the former position of vortex
``k + 1``. Orbits are labelled by ``r`` with ``T = 2 pi r L``.

The Newton system is made square and regular in two steps. A phase condition
pins the boundary arc-length coordinate of vortex 1 to ``section_sigma``,
removing the time-shift degeneracy. The Hamiltonian structure makes one
return equation redundant (the residual is orthogonal to ``grad H``), so the
vector field is unfolded to ``f + lam grad H`` with an extra unknown ``lam``
that vanishes at a solution. With ``T`` free, the energy is prescribed
instead.
"""
from __future__ import annotations

import json
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np

from .dynamics import (
    IntegrateOptions,
    Trajectory,
    VortexConfiguration,
    flow,
    grad_hamiltonian,
    hamiltonian,
    integrate,
)
from .errors import (
    ContinuationStalled,
    CurvatureSingularity,
    IntegrationAbort,
    InversionFailure,
    NewtonDiverged,
    NoConvergence,
    OutsideDomain,
    OutsideTube,
    SeparationViolated,
    SingularJacobian,
)
from .geometry import BoundaryFrame, DomainMap, boundary_frame
from .greens import GreenEvaluator

NEWTON_TOL = 1e-10
FD_STEP = 1e-7
MAX_NEWTON = 25
MAX_HALVINGS = 8
LOOP_SAMPLES = 256
MIN_PERIOD_FACTORS = (2, 3, 4, 5, 6)

# failures that make a Newton trial point unusable
_TRIAL_ERRORS = (IntegrationAbort, OutsideDomain, OutsideTube, InversionFailure)


def _pack(z):
    return np.concatenate([z.real, z.imag])


def _unpack(x, n):
    return x[:n] + 1j * x[n:2 * n]


def _wrap(s, period):
    return (s + 0.5 * period) % period - 0.5 * period


@dataclass
class ChoreographyProblem:
    """Data for finding one choreography of ``n`` identical vortices at parameter ``r``."""

    frame: BoundaryFrame
    evaluator: GreenEvaluator
    n: int
    r: float
    section_sigma: float = 0.0
    newton_tol: float = NEWTON_TOL
    fd_step: float = FD_STEP
    max_iter: int = MAX_NEWTON
    rtol: float = 1e-10
    atol: float = 1e-12
    samples: int = LOOP_SAMPLES
    jobs: int = 1

    def __post_init__(self):
        if self.n < 1:
            raise ValueError("n must be at least 1")
        if not (0.0 < self.r < self.r_max):
            raise ValueError(f"r={self.r} must lie in (0, r_max={self.r_max:.6g})")

    @classmethod
    def create(cls, domain: DomainMap, n: int, r: float, **kwargs) -> "ChoreographyProblem":
        frame = boundary_frame(domain)
        return cls(frame, GreenEvaluator(domain), n, r, **kwargs)

    @property
    def domain(self) -> DomainMap:
        return self.frame.domain

    @property
    def r_max(self) -> float:
        return r_max(self.frame, self.n)

    @property
    def period(self) -> float:
        return 2.0 * np.pi * self.r * self.frame.total_length

    def with_r(self, r: float) -> "ChoreographyProblem":
        return replace(self, r=r)

    def seed(self) -> VortexConfiguration:
        """Initial guess from the boundary expansion ``gamma - (r + kappa r^2/2) nu``."""
        L = self.frame.total_length
        sigma = self.section_sigma + np.arange(self.n) * (L / self.n)
        gamma, nu, kappa = self.frame.frame_at(sigma)
        z = gamma - (self.r + 0.5 * kappa * self.r**2) * nu
        if self.n > 1:
            diff = np.abs(z[:, None] - z[None, :])[~np.eye(self.n, dtype=bool)]
            if np.min(diff) <= 0.5 * L / self.n * _chord_factor(self.n):
                raise SeparationViolated("seed points are too close for this r")
        return VortexConfiguration(z)

    def options(self, unfold: float = 0.0) -> IntegrateOptions:
        return IntegrateOptions(rtol=self.rtol, atol=self.atol, unfold=unfold)


def _chord_factor(n):
    # chord/arc ratio for n equally spaced points on a circle, capped at 1
    return min(1.0, math.sin(math.pi / n) / (math.pi / n)) if n > 1 else 1.0


def r_max(frame: BoundaryFrame, n: int) -> float:
    """Largest admissible continuation parameter ``min(delta/2, L/(8n))``."""
    return min(0.5 * frame.delta, frame.total_length / (8.0 * n))


@dataclass
class PeriodicOrbit:
    initial: VortexConfiguration
    period: float
    r_label: float
    residual_norm: float
    section_sigma: float = 0.0
    unfold: float = 0.0
    iterations: int = 0
    energy: float = float("nan")
    trajectory: Trajectory | None = None

    @property
    def n(self) -> int:
        return self.initial.n

    def loop(self):
        """Samples of ``v(t) = z_1(2 pi r t)`` on a uniform grid of ``[0, L)``."""
        tr = self.trajectory
        t = tr.times[:-1] / (2.0 * np.pi * self.r_label)
        return t, tr.positions[:-1, 0]

    def choreography_defect(self) -> float:
        """``max |z_k(t) - z_1(t + (k-1)T/N)|`` over the stored samples."""
        pos = self.trajectory.positions[:-1]
        m, n = pos.shape
        shift = m // n
        return max(
            (float(np.max(np.abs(pos[:, k] - np.roll(pos[:, 0], -k * shift)))) for k in range(1, n)),
            default=0.0,
        )

    def to_dict(self) -> dict:
        return {
            "r": self.r_label,
            "T": self.period,
            "N": self.n,
            "initial_positions": [[float(z.real), float(z.imag)] for z in self.initial.positions],
            "residual_norm": self.residual_norm,
            "section_sigma": self.section_sigma,
            "unfold": self.unfold,
            "iterations": self.iterations,
            "energy": self.energy,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "PeriodicOrbit":
        z = np.array([complex(a, b) for a, b in data["initial_positions"]])
        return cls(
            VortexConfiguration(z),
            float(data["T"]),
            float(data["r"]),
            float(data["residual_norm"]),
            float(data.get("section_sigma", 0.0)),
            float(data.get("unfold", 0.0)),
            int(data.get("iterations", 0)),
            float(data.get("energy", float("nan"))),
        )


@dataclass
class StepDiagnostics:
    r: float
    iterations: int
    halvings: int
    residual_norm: float
    unfold: float


@dataclass
class ContinuationFamily:
    r_grid: list
    orbits: list = field(default_factory=list)
    diagnostics: list = field(default_factory=list)
    complete: bool = False
    message: str = ""
    n: int = 0
    section_sigma: float = 0.0
    total_length: float = float("nan")

    def manifest(self) -> dict:
        return {
            "N": self.n,
            "r_grid": list(map(float, self.r_grid)),
            "complete": self.complete,
            "message": self.message,
            "section_sigma": self.section_sigma,
            "total_length": self.total_length,
            "orbits": [
                {**o.to_dict(), "file": f"orbit_{i:03d}.json", "trajectory": f"orbit_{i:03d}.csv"}
                for i, o in enumerate(self.orbits)
            ],
            "diagnostics": [vars(d) for d in self.diagnostics],
        }

    def write(self, out_dir) -> Path:
        out = Path(out_dir)
        out.mkdir(parents=True, exist_ok=True)
        for i, orb in enumerate(self.orbits):
            (out / f"orbit_{i:03d}.json").write_text(json.dumps(orb.to_dict(), indent=2) + "\n")
            if orb.trajectory is not None:
                orb.trajectory.write_csv(out / f"orbit_{i:03d}.csv")
        path = out / "family.json"
        path.write_text(json.dumps(self.manifest(), indent=2) + "\n")
        return path


# -- shooting ---------------------------------------------------------------

_WORKER_EV: dict = {}


def _worker_flow(args):
    domain_spec, z0, t, unfold, rtol, atol = args
    key = json.dumps(domain_spec, sort_keys=True)
    ev = _WORKER_EV.get(key)
    if ev is None:
        ev = _WORKER_EV[key] = GreenEvaluator(DomainMap.from_dict(domain_spec))
    try:
        return flow(ev, z0, t, None, IntegrateOptions(rtol=rtol, atol=atol, unfold=unfold)).y_final
    except _TRIAL_ERRORS:
        return None


class _Shooter:
    """Residual and finite-difference Jacobian of the shooting equations."""

    def __init__(self, problem: ChoreographyProblem, free_period: bool, energy: float | None, pool):
        self.p = problem
        self.free = free_period
        self.energy = energy
        self.pool = pool

    def split(self, x):
        n = self.p.n
        z = _unpack(x, n)
        lam = x[2 * n]
        T = x[2 * n + 1] if self.free else self.p.period
        return z, lam, T

    def _equations(self, x, z_end):
        p = self.p
        z, lam, T = self.split(x)
        ret = _pack(z_end - np.roll(z, -1))
        sigma = p.frame.project(z[0]).sigma
        rows = [ret, [_wrap(sigma - p.section_sigma, p.frame.total_length)]]
        if self.free:
            rows.append([hamiltonian(p.evaluator, VortexConfiguration(z), 0.0) - self.energy])
        return np.concatenate(rows)

    def _flow_one(self, x):
        z, lam, T = self.split(x)
        return flow(self.p.evaluator, z, T / self.p.n, None, self.p.options(lam)).y_final

    def residual(self, x):
        return self._equations(x, self._flow_one(x))

    def jacobian(self, x, R):
        h = self.p.fd_step
        points = []
        for j in range(len(x)):
            xj = x.copy()
            xj[j] += h
            points.append(xj)
        if self.pool is None:
            ends = []
            for xj in points:
                try:
                    ends.append(self._flow_one(xj))
                except _TRIAL_ERRORS:
                    ends.append(None)
        else:
            spec = self.p.domain.to_dict()
            args = []
            for xj in points:
                z, lam, T = self.split(xj)
                args.append((spec, z, T / self.p.n, lam, self.p.rtol, self.p.atol))
            ends = list(self.pool.map(_worker_flow, args))
        J = np.empty((len(R), len(x)))
        for j, (xj, end) in enumerate(zip(points, ends)):
            if end is None:
                raise SingularJacobian("flow undefined at a finite-difference point")
            J[:, j] = (self._equations(xj, end) - R) / h
        return J


def _newton(shooter: _Shooter, x):
    p = shooter.p
    R = shooter.residual(x)
    norm = float(np.max(np.abs(R)))
    J = None
    for it in range(p.max_iter + 1):
        if norm < p.newton_tol:
            return _polish(shooter, x, R, norm, J) + (it,)
        if it == p.max_iter:
            break
        J = shooter.jacobian(x, R)
        if not np.all(np.isfinite(J)) or np.linalg.cond(J) > 1e13:
            raise SingularJacobian("shooting Jacobian is singular")
        dx = np.linalg.solve(J, -R)
        step = 1.0
        for _ in range(8):
            try:
                R_new = shooter.residual(x + step * dx)
                norm_new = float(np.max(np.abs(R_new)))
            except _TRIAL_ERRORS:
                norm_new = np.inf
            if norm_new < norm or (step == 1.0 and norm_new < 10 * p.newton_tol):
                break
            step *= 0.5
        else:
            raise NewtonDiverged(f"no descent after backtracking (residual {norm:.3g})")
        x, R, norm = x + step * dx, R_new, norm_new
    raise NewtonDiverged(f"Newton did not converge in {p.max_iter} iterations (residual {norm:.3g})")


def _polish(shooter: _Shooter, x, R, norm, J):
    """One chord step with the last Jacobian, kept only if it lowers the residual.

    Near the boundary the return map shears strongly, so a residual just
    below tolerance can grow by two orders of magnitude over a full period.
    """
    if J is None:
        return x, norm
    try:
        x_new = x + np.linalg.solve(J, -R)
        norm_new = float(np.max(np.abs(shooter.residual(x_new))))
    except _TRIAL_ERRORS + (np.linalg.LinAlgError,):
        return x, norm
    return (x_new, norm_new) if norm_new < norm else (x, norm)


def _pool(jobs):
    return ProcessPoolExecutor(max_workers=jobs) if jobs and jobs > 1 else None


def _finish(problem, z, T, lam, norm, iterations, with_trajectory=True):
    ev = problem.evaluator
    cfg = VortexConfiguration(z)
    traj = None
    if with_trajectory:
        m = problem.n * math.ceil(problem.samples / problem.n)
        t_eval = np.arange(m + 1) * (T / m)
        t_eval[-1] = T
        traj = integrate(ev, cfg, T, problem.options(lam), t_eval=t_eval)
    return PeriodicOrbit(
        cfg, float(T), problem.r, norm, problem.section_sigma, float(lam), iterations,
        hamiltonian(ev, cfg, 0.0), traj,
    )


def shoot(problem: ChoreographyProblem, guess: VortexConfiguration | None = None, T_guess: float | None = None,
          *, free_period: bool = False, energy: float | None = None, lam_guess: float = 0.0,
          with_trajectory: bool = True) -> PeriodicOrbit:
    """Solve the choreography return condition by Newton's method.

    With ``free_period=False`` the period is fixed to ``2 pi r L`` and
    ``T_guess`` is ignored. With ``free_period=True`` the period is an
    unknown started from ``T_guess`` and the energy is pinned to ``energy``
    (default: the energy of the guess).

    Raises
    ------
    NewtonDiverged, SingularJacobian
    """
    guess = guess or problem.seed()
    if guess.n != problem.n:
        raise ValueError("guess has the wrong number of vortices")
    if free_period and energy is None:
        energy = hamiltonian(problem.evaluator, guess, 0.0)
    x = np.concatenate([_pack(guess.positions), [lam_guess]])
    if free_period:
        x = np.concatenate([x, [T_guess if T_guess is not None else problem.period]])
    pool = _pool(problem.jobs)
    try:
        shooter = _Shooter(problem, free_period, energy, pool)
        x, norm, its = _newton(shooter, x)
    finally:
        if pool is not None:
            pool.shutdown()
    z, lam, T = shooter.split(x)
    return _finish(problem, z, T, lam, norm, its, with_trajectory)


def return_residual(problem: ChoreographyProblem, orbit: PeriodicOrbit, t: float) -> float:
    """``max |flow_t(z0) - roll(z0, -1)|`` for the orbit's initial state."""
    z0 = orbit.initial.positions
    end = flow(problem.evaluator, z0, t, None, problem.options(orbit.unfold)).y_final
    return float(np.max(np.abs(end - np.roll(z0, -1))))


@dataclass
class MinimalityCheck:
    residuals: dict
    threshold: float

    @property
    def passed(self) -> bool:
        return all(v > self.threshold for v in self.residuals.values())


def check_minimality(problem: ChoreographyProblem, orbit: PeriodicOrbit,
                     factors=MIN_PERIOD_FACTORS) -> MinimalityCheck:
    """Confirm the return condition fails at ``T/(m N)`` for each ``m`` in ``factors``."""
    res = {m: return_residual(problem, orbit, orbit.period / (m * problem.n)) for m in factors}
    return MinimalityCheck(res, 100.0 * problem.newton_tol)


def resolve_free_period(problem: ChoreographyProblem, orbit: PeriodicOrbit,
                        period_offset: float = 1e-4) -> PeriodicOrbit:
    """Re-solve with the period free and the energy pinned to the orbit's energy.

    Newton starts from the period perturbed by the relative ``period_offset``
    so that the re-solve is a genuine solve rather than a zero-step check.
    """
    return shoot(problem, orbit.initial, orbit.period * (1.0 + period_offset), free_period=True,
                 energy=orbit.energy, lam_guess=orbit.unfold, with_trajectory=False)


# -- continuation -----------------------------------------------------------

def geometric_grid(r_start: float, r_end: float, steps: int) -> np.ndarray:
    if steps < 2:
        raise ValueError("steps must be at least 2")
    if not (0.0 < r_end < r_start):
        raise ValueError("need 0 < r_end < r_start")
    return np.geomspace(r_start, r_end, steps)


def _predict(problem, r, history):
    """Secant predictor in ``r`` from up to two previous orbits."""
    if not history:
        return problem.with_r(r).seed()
    r1, z1 = history[-1]
    if len(history) == 1:
        base_then = problem.with_r(r1).seed().positions
        return VortexConfiguration(problem.with_r(r).seed().positions + (z1 - base_then))
    r0, z0 = history[-2]
    return VortexConfiguration(z1 + (r - r1) / (r1 - r0) * (z1 - z0))


_STEP_ERRORS = (NoConvergence, SingularJacobian, SeparationViolated, CurvatureSingularity) + _TRIAL_ERRORS


def continue_family(problem: ChoreographyProblem, r_start: float | None = None, r_end: float | None = None,
                    steps: int | None = None, *, r_grid=None, max_halvings: int = MAX_HALVINGS) -> ContinuationFamily:
    """Follow the choreography family from ``r_start`` down to ``r_end``.

    The first orbit is seeded from the boundary expansion, later ones by a
    secant predictor. A failed step is retried at half the distance in ``r``
    up to ``max_halvings`` times.

    Raises
    ------
    ContinuationStalled
        With the partial family attached as ``family``.
    """
    grid = np.asarray(r_grid if r_grid is not None else geometric_grid(r_start, r_end, steps), dtype=float)
    if len(grid) < 1 or np.any(np.diff(grid) >= 0) or grid[-1] <= 0:
        raise ValueError("r_grid must be positive and strictly decreasing")
    family = ContinuationFamily(
        list(map(float, grid)), n=problem.n, section_sigma=problem.section_sigma,
        total_length=problem.frame.total_length,
    )
    rmax = problem.r_max
    if grid[0] >= rmax:
        family.message = f"r_grid starts at {grid[0]:.6g}, above r_max={rmax:.6g}"
        raise ContinuationStalled(family.message, family)

    history = []  # (r, z0) of accepted orbits, including intermediate ones
    for r_target in grid:
        halvings = 0
        r_from = history[-1][0] if history else None
        while True:
            r_try = r_target if r_from is None else r_from + (r_target - r_from) * 0.5**halvings
            try:
                prob = problem.with_r(float(r_try))
                orbit = shoot(prob, _predict(problem, r_try, history),
                              with_trajectory=bool(r_try == r_target))
            except _STEP_ERRORS as exc:
                halvings += 1
                if halvings > max_halvings or r_from is None:
                    family.message = f"continuation stalled at r={r_try:.6g}: {exc}"
                    raise ContinuationStalled(family.message, family) from exc
                continue
            history.append((float(r_try), orbit.initial.positions))
            if r_try == r_target:
                break
            # intermediate point accepted; march on toward the target
            r_from, halvings = float(r_try), 0
        family.orbits.append(orbit)
        family.diagnostics.append(
            StepDiagnostics(float(r_target), orbit.iterations, halvings, orbit.residual_norm, orbit.unfold)
        )
    family.complete = True
    return family


# -- reduced residual -------------------------------------------------------

@dataclass
class LoopSetting:
    """What the loop residual needs: geometry, Green evaluator and vortex count.

    A :class:`ChoreographyProblem` can be used wherever a ``LoopSetting`` is
    expected.
    """

    frame: BoundaryFrame
    evaluator: GreenEvaluator
    n: int


def spectral_derivative(values, period: float):
    """Derivative of uniformly sampled periodic data by FFT."""
    m = values.shape[-1]
    k = np.fft.fftfreq(m, d=1.0 / m)
    if m % 2 == 0:
        k[m // 2] = 0.0
    return np.fft.ifft(np.fft.fft(values, axis=-1) * (2j * np.pi / period) * k, axis=-1)


def spectral_shift(values, shift: float, period: float):
    """Samples of ``u(t + shift)`` for uniformly sampled periodic ``u``."""
    m = values.shape[-1]
    k = np.fft.fftfreq(m, d=1.0 / m)
    phase = np.exp(2j * np.pi * k * shift / period)
    if m % 2 == 0:
        phase[m // 2] = np.cos(np.pi * m * shift / period)
    return np.fft.ifft(np.fft.fft(values, axis=-1) * phase, axis=-1)


def _loop_shifts(frame, u, n):
    L = frame.total_length
    m = len(u)
    out = np.empty((n, m), dtype=complex)
    for k in range(n):
        s = k * L / n
        q = k * m / n
        out[k] = np.roll(u, -int(round(q))) if abs(q - round(q)) < 1e-12 else spectral_shift(u, s, L)
    return out


def apply_inverse_tube_jacobian(frame: BoundaryFrame, r: float, tc, w):
    """``[D chi_r(u)]^{-1} w`` for tube coordinates ``tc`` of ``u``."""
    delta = frame.delta
    one_minus = 1.0 - tc.d * tc.kappa
    tau = 1j * tc.nu
    a = delta / r
    b = delta * one_minus / (delta - r * tc.d * tc.kappa)
    return a * np.real(np.conj(tc.nu) * w) * tc.nu + b * np.real(np.conj(tau) * w) * tau


def orthogonality_weight(frame: BoundaryFrame, r: float, tc):
    """``lambda(r, u) = (delta - r d kappa) / (delta^2 (1 - d kappa))``."""
    delta = frame.delta
    return (delta - r * tc.d * tc.kappa) / (delta**2 * (1.0 - tc.d * tc.kappa))


def reduced_residual(problem: LoopSetting | ChoreographyProblem, u, r: float, min_separation: float | None = None):
    """Residual ``F(r, u)`` of the rescaled choreography equation.

    Parameters
    ----------
    u : array_like of complex, shape (M,)
        Loop sampled at ``M >= 128`` uniform times over ``[0, L)``.
    r : float
        ``r = 0`` evaluates the limit form ``u' - (1 - d kappa)(delta/d) i nu``.

    Raises
    ------
    SeparationViolated
        If two rescaled vortices come closer than ``min_separation``.
    OutsideTube
    """
    frame = problem.frame
    u = np.asarray(u, dtype=complex)
    if u.ndim != 1 or len(u) < 128:
        raise ValueError("loop must have at least 128 samples")
    L = frame.total_length
    du = spectral_derivative(u, L)
    tc = frame.project(u)
    if r == 0:
        return du - (1.0 - tc.d * tc.kappa) * (frame.delta / tc.d) * 1j * tc.nu
    if not (0.0 < r <= frame.delta):
        raise ValueError(f"r must lie in [0, delta={frame.delta}]")
    n = problem.n
    shifted = _loop_shifts(frame, u, n)
    tcs = frame.project(shifted)
    z = tcs.p - (r / frame.delta) * tcs.d * tcs.nu  # chi_r of every shifted copy
    if n > 1:
        sep = min_separation if min_separation is not None else 1e-6 * problem.evaluator.scale
        gaps = np.abs(z[:, None, :] - z[None, :, :])
        gaps[np.arange(n), np.arange(n)] = np.inf
        if np.min(gaps) < sep:
            raise SeparationViolated("rescaled vortices collide along the loop")
    g1 = grad_hamiltonian(problem.evaluator, z.T, np.ones(n))[:, 0]
    return du + 2.0 * np.pi * r * apply_inverse_tube_jacobian(frame, r, tc, 1j * g1)


def orthogonality_defect(problem: LoopSetting | ChoreographyProblem, u, r: float):
    """Return ``(<F, lambda i u'>, ||F||, ||u'||)`` in ``L^2(0, L)`` by the trapezoidal rule."""
    frame = problem.frame
    u = np.asarray(u, dtype=complex)
    L = frame.total_length
    F = reduced_residual(problem, u, r)
    du = spectral_derivative(u, L)
    lam = orthogonality_weight(frame, r, frame.project(u))
    inner = L * np.mean(np.real(np.conj(F) * lam * 1j * du))
    return float(inner), float(np.sqrt(L * np.mean(np.abs(F) ** 2))), float(np.sqrt(L * np.mean(np.abs(du) ** 2)))


def residual_r_derivative_at_zero(frame: BoundaryFrame, u):
    """Closed form ``d/dr F(0, u) = (1/2) kappa' d nu - (1/2)(1 - d kappa) kappa i nu``."""
    tc = frame.project(u)
    kp = frame.kappa_prime(tc.sigma)
    return 0.5 * kp * tc.d * tc.nu - 0.5 * (1.0 - tc.d * tc.kappa) * tc.kappa * 1j * tc.nu


def orbit_loop(frame: BoundaryFrame, orbit: PeriodicOrbit):
    """Loop coordinates ``u(t) = chi_r^{-1}(z_1(2 pi r t))`` on a uniform grid of ``[0, L)``."""
    t, v = orbit.loop()
    tc = frame.project(v)
    return t, tc.p - (frame.delta / orbit.r_label) * tc.d * tc.nu
