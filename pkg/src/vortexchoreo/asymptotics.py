"""Small-``r`` expansions of choreography families, checked numerically.

For a family of choreographies with ``T = 2 pi r L`` and loop
``v(t) = z_1(2 pi r t)`` the expected behaviour is

* distance: ``d(v) = r + kappa r^2 / 2 + o(r^2)``,
* velocity: ``v' = (1 - r kappa) i nu + o(r)``,
* loop variable ``u = chi_r^{-1}(v)``: ``d/dr u = -(delta/2) kappa nu`` at ``r = 0``.

The ``o(.)`` statements are tested through fitted decay exponents. The disk
has closed forms (rigidly rotating polygons) that serve as scalar oracles.
"""
from __future__ import annotations

import json
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np
from scipy.optimize import brentq, minimize_scalar

from .dynamics import grad_hamiltonian
from .errors import InsufficientFamily, PhaseMismatch
from .geometry import BoundaryFrame
from .greens import GreenEvaluator
from .orbit_finder import ContinuationFamily, orbit_loop, spectral_derivative

DISTANCE_EXPONENT_MIN = 2.5
SPEED_EXPONENT_MIN = 1.2
TANGENCY_EXPONENT_MIN = 1.0
DERIVATIVE_HALVING_FACTOR = 1.5
FIT_GRID = (0.08, 0.04, 0.02, 0.01)
# below this the tangency defect counts as identically zero
TANGENCY_FLOOR = 1e-12


# -- disk closed forms ------------------------------------------------------

def disk_angular_velocity(n: int, s):
    """Angular velocity of the rigidly rotating ``n``-gon of radius ``s`` in the unit disk."""
    s = np.asarray(s, dtype=float)
    return (n / (1.0 - s ** (2 * n)) - 0.5 * (n + 1)) / (np.pi * s * s)


def disk_r_of_s(n: int, s):
    """Parameter ``r`` of the disk ``n``-gon choreography of radius ``s``."""
    s = np.asarray(s, dtype=float)
    s2n = s ** (2 * n)
    return s * s * (1.0 - s2n) / (n - 1 + (n + 1) * s2n)


def disk_s_of_r(n: int, r: float) -> float:
    """Invert :func:`disk_r_of_s` on the branch with ``s -> 1`` as ``r -> 0``."""
    peak = minimize_scalar(lambda s: -disk_r_of_s(n, s), bounds=(1e-3, 1.0 - 1e-12), method="bounded",
                           options={"xatol": 1e-14})
    if r <= 0 or r >= -peak.fun:
        raise ValueError(f"r={r} outside the range of the disk family")
    return brentq(lambda s: disk_r_of_s(n, s) - r, peak.x, 1.0, xtol=1e-16, rtol=1e-15, maxiter=200)


def disk_distance_residual(n: int, r: float) -> float:
    s = disk_s_of_r(n, r)
    return abs((1.0 - s) - r - 0.5 * r * r)


def disk_speed_residual(n: int, r: float) -> float:
    s = disk_s_of_r(n, r)
    return abs(2.0 * np.pi * r * s * disk_angular_velocity(n, s) - (1.0 - r))


def disk_loop_radius(n: int, r: float, delta: float) -> float:
    """Radius of the loop ``chi_r^{-1}(v)`` for the disk family."""
    return 1.0 - (delta / r) * (1.0 - disk_s_of_r(n, r))


# -- report -----------------------------------------------------------------

@dataclass
class OrbitRecord:
    r: float
    max_distance_residual: float
    max_speed_residual: float
    max_tangency_defect: float
    h1_distance_to_gamma_minus_r_nu: float
    distance_ratio: float  # E(r) / r^2
    speed_ratio: float  # speed residual / r


@dataclass
class AsymptoticsReport:
    n: int
    records: list = field(default_factory=list)
    distance_exponent: float = float("nan")
    speed_exponent: float = float("nan")
    tangency_exponent: float | None = None
    tangency_trivial: bool = False
    family_derivative_r: list = field(default_factory=list)
    family_derivative_residuals: list = field(default_factory=list)
    family_derivative_halving_factor: float = float("nan")
    thresholds: dict = field(default_factory=lambda: {
        "distance_exponent": DISTANCE_EXPONENT_MIN,
        "speed_exponent": SPEED_EXPONENT_MIN,
        "tangency_exponent": TANGENCY_EXPONENT_MIN,
        "derivative_halving_factor": DERIVATIVE_HALVING_FACTOR,
    })

    @property
    def checks(self) -> dict:
        tang = self.tangency_trivial or (
            self.tangency_exponent is not None and self.tangency_exponent >= TANGENCY_EXPONENT_MIN
        )
        return {
            "distance": bool(self.distance_exponent >= DISTANCE_EXPONENT_MIN),
            "speed": bool(self.speed_exponent >= SPEED_EXPONENT_MIN),
            "tangency": bool(tang),
            "family_derivative": bool(self.family_derivative_halving_factor >= DERIVATIVE_HALVING_FACTOR),
        }

    @property
    def passed(self) -> bool:
        return all(self.checks.values())

    def to_dict(self) -> dict:
        out = asdict(self)
        out["checks"] = self.checks
        out["pass"] = self.passed
        return out

    def write(self, path) -> None:
        Path(path).write_text(json.dumps(self.to_dict(), indent=2) + "\n")

    def write_gnuplot(self, out_dir) -> list[Path]:
        """Whitespace-separated ``r value`` columns for external plotting."""
        out = Path(out_dir)
        out.mkdir(parents=True, exist_ok=True)
        paths = []
        for name, key in (("distance", "max_distance_residual"), ("speed", "max_speed_residual")):
            path = out / f"{name}_residual.dat"
            rows = [f"{rec.r:.17g} {getattr(rec, key):.17g}" for rec in self.records]
            path.write_text(f"# r {key}\n" + "\n".join(rows) + "\n")
            paths.append(path)
        return paths


def _check_family(family: ContinuationFamily, min_orbits: int = 4, min_span: float = 8.0):
    rs = [o.r_label for o in family.orbits]
    if len(rs) < min_orbits or max(rs) / min(rs) < min_span * (1 - 1e-9):
        raise InsufficientFamily(f"need at least {min_orbits} orbits spanning a factor {min_span} in r")


def fit_exponent(r, values, fit_grid=FIT_GRID) -> float:
    """Slope of ``log values`` against ``log r``.

    Uses the points whose ``r`` matches ``fit_grid`` when all of them are
    present, otherwise every point.
    """
    r = np.asarray(r, dtype=float)
    values = np.asarray(values, dtype=float)
    if fit_grid is not None:
        idx = [int(np.argmin(np.abs(r - g))) for g in fit_grid]
        if all(abs(r[i] - g) <= 1e-9 * g for i, g in zip(idx, fit_grid)):
            r, values = r[idx], values[idx]
    if len(r) < 4:
        raise InsufficientFamily("exponent fits need at least 4 points")
    return float(np.polyfit(np.log(r), np.log(values), 1)[0])


def _orbit_quantities(frame: BoundaryFrame, ev: GreenEvaluator, orbit):
    r = orbit.r_label
    t, v = orbit.loop()
    tc = frame.project(v)
    dist = float(np.max(np.abs(tc.d - r - 0.5 * tc.kappa * r * r)))
    pos = orbit.trajectory.positions[:-1]
    vdot = -2.0 * np.pi * r * 1j * grad_hamiltonian(ev, pos, np.ones(orbit.n))[:, 0]
    speed = float(np.max(np.abs(np.abs(vdot) - (1.0 - r * tc.kappa))))
    tang = float(np.max(np.abs(np.real(np.conj(tc.nu) * vdot)) / np.abs(vdot)))
    L = frame.total_length
    gamma, nu, _ = frame.frame_at(orbit.section_sigma + t)
    w = v - (gamma - r * nu)
    dw = spectral_derivative(w, L)
    h1 = float(np.sqrt(L * np.mean(np.abs(w) ** 2 + np.abs(dw) ** 2)))
    return OrbitRecord(r, dist, speed, tang, h1, dist / r**2, speed / r)


def orbit_records(family: ContinuationFamily, frame: BoundaryFrame, ev: GreenEvaluator) -> list[OrbitRecord]:
    recs = [_orbit_quantities(frame, ev, o) for o in family.orbits]
    return sorted(recs, key=lambda rec: -rec.r)


def verify_distance_law(family: ContinuationFamily, frame: BoundaryFrame, ev: GreenEvaluator,
                        records=None) -> tuple[list, float]:
    """Distance residuals ``max_t |d(v) - r - kappa r^2/2|`` and their decay exponent."""
    _check_family(family)
    records = records or orbit_records(family, frame, ev)
    return records, fit_exponent([x.r for x in records], [x.max_distance_residual for x in records])


def verify_speed_law(family: ContinuationFamily, frame: BoundaryFrame, ev: GreenEvaluator,
                     records=None) -> tuple[list, float, float | None]:
    """Speed residuals and exponents for ``|v'| - (1 - r kappa)`` and the tangency defect.

    The tangency exponent is ``None`` when the defect vanishes to rounding
    on every orbit (the disk, by symmetry).
    """
    _check_family(family)
    records = records or orbit_records(family, frame, ev)
    rs = [x.r for x in records]
    speed = fit_exponent(rs, [x.max_speed_residual for x in records])
    tang_vals = [x.max_tangency_defect for x in records]
    tang = None if max(tang_vals) < TANGENCY_FLOOR else fit_exponent(rs, tang_vals)
    return records, speed, tang


def verify_family_derivative(family: ContinuationFamily, frame: BoundaryFrame, count: int = 4):
    """Compare difference quotients of the loop ``u`` in ``r`` with ``-(delta/2) kappa nu``.

    Uses consecutive pairs among the ``count`` smallest ``r`` of the family.
    Returns the pair midpoints (geometric), the max deviations and the
    deviation reduction factor per halving of ``r`` from a log-log fit.

    Raises
    ------
    PhaseMismatch
        If the loops are not anchored at the same section or sampled alike.
    """
    orbits = sorted(family.orbits, key=lambda o: -o.r_label)[-count:]
    if len(orbits) < 3:
        raise InsufficientFamily("need at least three orbits")
    loops = []
    for o in orbits:
        t, u = orbit_loop(frame, o)
        s0 = frame.project(u[0]).sigma
        gap = (s0 - o.section_sigma + 0.5 * frame.total_length) % frame.total_length - 0.5 * frame.total_length
        if abs(gap) > 1e-6:
            raise PhaseMismatch("loop is not anchored at the section")
        loops.append((o.r_label, t, u))
    if len({len(u) for _, _, u in loops}) != 1:
        raise PhaseMismatch("loops sampled on different grids")
    t = loops[0][1]
    _, nu, kappa = frame.frame_at(orbits[0].section_sigma + t)
    target = -0.5 * frame.delta * kappa * nu
    mids, devs = [], []
    for (r1, _, u1), (r2, _, u2) in zip(loops[:-1], loops[1:]):
        mids.append(float(np.sqrt(r1 * r2)))
        devs.append(float(np.max(np.abs((u1 - u2) / (r1 - r2) - target))))
    slope = float(np.polyfit(np.log(mids), np.log(devs), 1)[0])
    return mids, devs, float(2.0**slope)


def analyze_family(family: ContinuationFamily, frame: BoundaryFrame, ev: GreenEvaluator) -> AsymptoticsReport:
    """Run all verifiers and collect an :class:`AsymptoticsReport`."""
    records = orbit_records(family, frame, ev)
    _, dist = verify_distance_law(family, frame, ev, records)
    _, speed, tang = verify_speed_law(family, frame, ev, records)
    mids, devs, factor = verify_family_derivative(family, frame)
    return AsymptoticsReport(
        n=family.n,
        records=records,
        distance_exponent=dist,
        speed_exponent=speed,
        tangency_exponent=tang,
        tangency_trivial=tang is None,
        family_derivative_r=mids,
        family_derivative_residuals=devs,
        family_derivative_halving_factor=factor,
    )
