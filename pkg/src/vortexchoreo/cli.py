"""Command line front end.

Every subcommand reads one JSON run configuration (``--config``) and writes
its results to an output directory (``--out`` or ``output_dir``). Result
files are deterministic; wall-clock timings go to ``timing.json``.

Exit codes: 0 success, 2 configuration error, 3 runtime or check failure,
4 continuation stalled. Errors are also reported as JSON on stderr.
"""
from __future__ import annotations

import argparse
import json
import sys
import time
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import asymptotics, orbit_finder
from .dynamics import ATOL, RTOL, IntegrateOptions, VortexConfiguration, integrate
from .errors import ConfigError, ContinuationStalled, MapNotInjective, VortexError
from .geometry import GEOMETRY_TOL, DomainMap, boundary_frame
from .greens import GreenEvaluator, check_assumption
from .limit_orbit import LimitOrbit

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_FAILURE = 3
EXIT_STALLED = 4

COMMANDS = ("simulate", "find-family", "check-domain", "limit-orbit", "residual")


@dataclass
class Tolerances:
    newton_tol: float = orbit_finder.NEWTON_TOL
    energy_drift_tol: float = 1e-9
    geometry_tol: float = GEOMETRY_TOL
    rtol: float = RTOL
    atol: float = ATOL


@dataclass
class RunConfig:
    """Validated run configuration (the JSON document, parsed)."""

    domain: DomainMap
    n_vortices: int = 1
    strengths: list | None = None
    initial_positions: list | None = None
    t_end: float | None = None
    n_samples: int = 101
    r_grid: dict | None = None
    r: float | None = None
    epsilon: float | None = None
    loop_file: str | None = None
    loop_samples: int = orbit_finder.LOOP_SAMPLES
    section_sigma: float = 0.0
    tolerances: Tolerances = field(default_factory=Tolerances)
    output_dir: str = "out"
    jobs: int = 1

    # -- parsing ----------------------------------------------------------
    @classmethod
    def from_dict(cls, data: dict) -> "RunConfig":
        if not isinstance(data, dict):
            raise ConfigError("configuration must be a JSON object")
        known = set(cls.__dataclass_fields__) | {"polygon_radius"}
        for key in data:
            if key not in known:
                raise ConfigError(f"unknown configuration field '{key}'", key)
        domain = _parse_domain(data.get("domain", {"kind": "unit_disk"}))
        n = _int(data, "n_vortices", 1, minimum=1)
        strengths = data.get("strengths")
        if strengths is not None:
            strengths = [_float_value(v, "strengths") for v in _list(strengths, "strengths")]
            if len(strengths) != n or any(v == 0 for v in strengths):
                raise ConfigError("strengths must be n_vortices nonzero numbers", "strengths")
        positions = data.get("initial_positions")
        if positions is not None and "polygon_radius" in data:
            raise ConfigError("give either initial_positions or polygon_radius", "polygon_radius")
        if "polygon_radius" in data:
            s = _float_value(data["polygon_radius"], "polygon_radius")
            z = s * np.exp(2j * np.pi * np.arange(n) / n)
            positions = [[float(c.real), float(c.imag)] for c in z]
        if positions is not None:
            positions = [_pair(p, "initial_positions") for p in _list(positions, "initial_positions")]
            if len(positions) != n:
                raise ConfigError("initial_positions must have n_vortices entries", "initial_positions")
        t_end = data.get("t_end")
        if t_end is not None:
            t_end = _float_value(t_end, "t_end")
            if t_end == 0:
                raise ConfigError("t_end must be nonzero", "t_end")
        r_grid = data.get("r_grid")
        if r_grid is not None:
            r_grid = _parse_grid(r_grid)
        r = data.get("r")
        if r is not None:
            r = _float_value(r, "r")
            if r < 0:
                raise ConfigError("r must be nonnegative", "r")
        eps = data.get("epsilon")
        if eps is not None:
            eps = _positive(eps, "epsilon")
        tol_data = data.get("tolerances", {})
        if not isinstance(tol_data, dict):
            raise ConfigError("tolerances must be an object", "tolerances")
        tols = {}
        for key, value in tol_data.items():
            if key not in Tolerances.__dataclass_fields__:
                raise ConfigError(f"unknown tolerance '{key}'", f"tolerances.{key}")
            tols[key] = _positive(value, f"tolerances.{key}")
        loop_file = data.get("loop_file")
        if loop_file is not None and not isinstance(loop_file, str):
            raise ConfigError("loop_file must be a path string", "loop_file")
        output_dir = data.get("output_dir", "out")
        if not isinstance(output_dir, str):
            raise ConfigError("output_dir must be a path string", "output_dir")
        return cls(
            domain=domain,
            n_vortices=n,
            strengths=strengths,
            initial_positions=positions,
            t_end=t_end,
            n_samples=_int(data, "n_samples", 101, minimum=2),
            r_grid=r_grid,
            r=r,
            epsilon=eps,
            loop_file=loop_file,
            loop_samples=_int(data, "loop_samples", orbit_finder.LOOP_SAMPLES, minimum=128),
            section_sigma=_float_value(data.get("section_sigma", 0.0), "section_sigma"),
            tolerances=Tolerances(**tols),
            output_dir=output_dir,
            jobs=_int(data, "jobs", 1, minimum=1),
        )

    @classmethod
    def load(cls, path) -> "RunConfig":
        try:
            data = json.loads(Path(path).read_text())
        except OSError as exc:
            raise ConfigError(f"cannot read configuration: {exc}", "config") from exc
        except json.JSONDecodeError as exc:
            raise ConfigError(f"invalid JSON: {exc}", "config") from exc
        return cls.from_dict(data)

    def to_dict(self) -> dict:
        out = {
            "domain": self.domain.to_dict(),
            "n_vortices": self.n_vortices,
            "n_samples": self.n_samples,
            "loop_samples": self.loop_samples,
            "section_sigma": self.section_sigma,
            "tolerances": vars(self.tolerances).copy(),
            "output_dir": self.output_dir,
            "jobs": self.jobs,
        }
        for key in ("strengths", "initial_positions", "t_end", "r_grid", "r", "epsilon", "loop_file"):
            value = getattr(self, key)
            if value is not None:
                out[key] = value
        return out

    # -- derived values ---------------------------------------------------
    def grid(self) -> np.ndarray:
        g = self.r_grid
        if "values" in g:
            return np.asarray(g["values"], dtype=float)
        return orbit_finder.geometric_grid(g["start"], g["end"], g["steps"])


def _parse_domain(spec) -> DomainMap:
    if not isinstance(spec, dict):
        raise ConfigError("domain must be an object", "domain")
    for key in spec:
        if key not in ("kind", "coefficients", "delta"):
            raise ConfigError(f"unknown domain field '{key}'", f"domain.{key}")
    try:
        coeffs = spec.get("coefficients", [])
        for c in _list(coeffs, "domain.coefficients"):
            _pair(c, "domain.coefficients")
        return DomainMap.from_dict(spec)
    except MapNotInjective:
        raise
    except ConfigError:
        raise
    except (KeyError, TypeError, ValueError) as exc:
        raise ConfigError(f"invalid domain: {exc}", "domain") from exc


def _parse_grid(g) -> dict:
    if isinstance(g, list):
        g = {"values": g}
    if not isinstance(g, dict):
        raise ConfigError("r_grid must be an object or a list", "r_grid")
    if "values" in g:
        vals = [_positive(v, "r_grid") for v in _list(g["values"], "r_grid")]
        if len(vals) < 1 or any(b >= a for a, b in zip(vals, vals[1:])):
            raise ConfigError("r_grid must be strictly decreasing", "r_grid")
        return {"values": vals}
    try:
        start, end = _positive(g["start"], "r_grid.start"), _positive(g["end"], "r_grid.end")
        steps = g["steps"]
    except KeyError as exc:
        raise ConfigError(f"r_grid needs start, end and steps (missing {exc})", "r_grid") from exc
    if not isinstance(steps, int) or isinstance(steps, bool) or steps < 2:
        raise ConfigError("r_grid.steps must be an integer >= 2", "r_grid.steps")
    if end >= start:
        raise ConfigError("r_grid must be strictly decreasing (end < start)", "r_grid")
    return {"start": start, "end": end, "steps": steps}


def _list(value, name):
    if not isinstance(value, list):
        raise ConfigError(f"{name} must be a list", name)
    return value


def _pair(value, name):
    if not (isinstance(value, list) and len(value) == 2):
        raise ConfigError(f"{name} entries must be [re, im] pairs", name)
    return [_float_value(value[0], name), _float_value(value[1], name)]


def _float_value(value, name) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float)) or not np.isfinite(value):
        raise ConfigError(f"{name} must be a finite number", name)
    return float(value)


def _positive(value, name) -> float:
    v = _float_value(value, name)
    if v <= 0:
        raise ConfigError(f"{name} must be positive", name)
    return v


def _int(data, name, default, minimum):
    value = data.get(name, default)
    if isinstance(value, bool) or not isinstance(value, int) or value < minimum:
        raise ConfigError(f"{name} must be an integer >= {minimum}", name)
    return value


# -- commands ---------------------------------------------------------------

class CommandFailed(Exception):
    def __init__(self, code, payload):
        super().__init__(payload.get("message", ""))
        self.code = code
        self.payload = payload


def _write_json(path: Path, data) -> None:
    path.write_text(json.dumps(data, indent=2) + "\n")


def _require(cfg: RunConfig, name: str, command: str):
    if getattr(cfg, name) is None:
        raise ConfigError(f"{command} requires '{name}'", name)


def cmd_simulate(cfg: RunConfig, out: Path) -> int:
    _require(cfg, "initial_positions", "simulate")
    _require(cfg, "t_end", "simulate")
    ev = GreenEvaluator(cfg.domain)
    try:
        state = VortexConfiguration([complex(a, b) for a, b in cfg.initial_positions], cfg.strengths)
    except ValueError as exc:
        raise ConfigError(str(exc), "initial_positions") from exc
    opts = IntegrateOptions(rtol=cfg.tolerances.rtol, atol=cfg.tolerances.atol, n_samples=cfg.n_samples)
    traj = integrate(ev, state, cfg.t_end, opts)
    traj.write_csv(out / "trajectory.csv")
    drift = traj.energy_drift
    allowed = cfg.tolerances.energy_drift_tol * max(1.0, abs(cfg.t_end))
    manifest = {
        "command": "simulate",
        "config": cfg.to_dict(),
        "energy_drift": drift,
        "energy_drift_ok": bool(drift < allowed),
        "samples": len(traj.times),
        "files": {"trajectory": "trajectory.csv"},
    }
    _write_json(out / "manifest.json", manifest)
    return EXIT_OK if drift < allowed else EXIT_FAILURE


def cmd_find_family(cfg: RunConfig, out: Path) -> int:
    _require(cfg, "r_grid", "find-family")
    grid = cfg.grid()
    frame = boundary_frame(cfg.domain)
    ev = GreenEvaluator(cfg.domain)
    rmax = orbit_finder.r_max(frame, cfg.n_vortices)
    manifest = {"command": "find-family", "config": cfg.to_dict(), "r_max": rmax}
    if grid[0] >= rmax:
        message = f"r_grid starts at {grid[0]:.6g}, above r_max={rmax:.6g}"
        manifest.update(complete=False, message=message)
        _write_json(out / "manifest.json", manifest)
        raise ContinuationStalled(message)
    problem = orbit_finder.ChoreographyProblem(
        frame, ev, cfg.n_vortices, float(grid[0]), section_sigma=cfg.section_sigma,
        newton_tol=cfg.tolerances.newton_tol, samples=cfg.loop_samples, jobs=cfg.jobs,
    )
    try:
        family = orbit_finder.continue_family(problem, r_grid=grid)
    except ContinuationStalled as exc:
        if exc.family is not None:
            exc.family.write(out)
        manifest.update(complete=False, message=str(exc), family="family.json")
        _write_json(out / "manifest.json", manifest)
        raise
    family.write(out)
    report = asymptotics.analyze_family(family, frame, ev)
    report.write(out / "asymptotics.json")
    report.write_gnuplot(out)
    manifest.update(
        complete=True,
        family="family.json",
        asymptotics="asymptotics.json",
        checks=report.checks,
        pass_=report.passed,
    )
    manifest["pass"] = manifest.pop("pass_")
    _write_json(out / "manifest.json", manifest)
    return EXIT_OK if report.passed else EXIT_FAILURE


def _geometry_self_test(frame, tol) -> dict:
    L = frame.total_length
    sigma = np.linspace(0.0, L, 97)[:-1]
    gamma, nu, _ = frame.frame_at(sigma)
    closure = float(abs(frame.gamma(L) - frame.gamma(0.0)))
    d = 0.5 * frame.delta
    tc = frame.project(gamma - d * nu)
    gap = np.abs((tc.sigma - sigma + 0.5 * L) % L - 0.5 * L)
    recon = float(max(np.max(np.abs(tc.d - d)), np.max(gap)))
    unit_normal = float(np.max(np.abs(np.abs(nu) - 1.0)))
    return {
        "closure": closure,
        "projection_roundtrip": recon,
        "unit_normal": unit_normal,
        "pass": bool(max(closure, recon, unit_normal) < tol),
    }


def cmd_check_domain(cfg: RunConfig, out: Path) -> int:
    frame = boundary_frame(cfg.domain)
    ev = GreenEvaluator(cfg.domain)
    report = check_assumption(ev, frame)
    report.write(out / "assumption_report.json")
    geo = _geometry_self_test(frame, cfg.tolerances.geometry_tol)
    summary = {
        "command": "check-domain",
        "config": cfg.to_dict(),
        "total_length": frame.total_length,
        "delta": frame.delta,
        "max_kappa": frame.max_kappa,
        "geometry": geo,
        "assumption_pass": report.passed,
        "pass": bool(report.passed and geo["pass"]),
    }
    _write_json(out / "manifest.json", summary)
    return EXIT_OK if summary["pass"] else EXIT_FAILURE


def cmd_limit_orbit(cfg: RunConfig, out: Path) -> int:
    frame = boundary_frame(cfg.domain)
    eps = cfg.epsilon if cfg.epsilon is not None else frame.delta
    try:
        orb = LimitOrbit(eps, cfg.section_sigma, frame)
    except ValueError as exc:
        raise ConfigError(str(exc), "epsilon") from exc
    t, u = orb.samples(cfg.loop_samples)
    # loop time runs over [0, L) so that the file feeds the residual command
    tau = t * (frame.total_length / orb.period)
    _write_loop(out / "limit_orbit.csv", tau, u)
    _write_json(out / "manifest.json", {
        "command": "limit-orbit",
        "config": cfg.to_dict(),
        "epsilon": eps,
        "period": orb.period,
        "total_length": frame.total_length,
        "delta": frame.delta,
        "files": {"loop": "limit_orbit.csv"},
    })
    return EXIT_OK


def _write_loop(path, t, u):
    rows = np.column_stack([t, u.real, u.imag])
    np.savetxt(path, rows, delimiter=",", fmt="%.17g", header="t,re_u,im_u", comments="")


def _read_loop(path):
    try:
        data = np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)
    except OSError as exc:
        raise ConfigError(f"cannot read loop file: {exc}", "loop_file") from exc
    except ValueError as exc:
        raise ConfigError(f"malformed loop file: {exc}", "loop_file") from exc
    if data.shape[1] < 3:
        raise ConfigError("loop file needs columns t,re_u,im_u", "loop_file")
    return data[:, 0], data[:, 1] + 1j * data[:, 2]


def cmd_residual(cfg: RunConfig, out: Path) -> int:
    _require(cfg, "loop_file", "residual")
    _require(cfg, "r", "residual")
    t, u = _read_loop(cfg.loop_file)
    frame = boundary_frame(cfg.domain)
    if cfg.r > frame.delta:
        raise ConfigError(f"r must not exceed delta={frame.delta:.6g}", "r")
    if len(u) < 128:
        raise ConfigError("loop needs at least 128 samples", "loop_file")
    ev = GreenEvaluator(cfg.domain)
    problem = orbit_finder.LoopSetting(frame, ev, cfg.n_vortices)
    F = orbit_finder.reduced_residual(problem, u, cfg.r)
    np.savetxt(out / "residual.csv", np.column_stack([t, F.real, F.imag]), delimiter=",", fmt="%.17g",
               header="t,re_F,im_F", comments="")
    inner, nF, ndu = orbit_finder.orthogonality_defect(problem, u, cfg.r)
    _write_json(out / "manifest.json", {
        "command": "residual",
        "config": cfg.to_dict(),
        "max_residual": float(np.max(np.abs(F))),
        "l2_residual": nF,
        "orthogonality": inner,
        "orthogonality_relative": abs(inner) / (nF * ndu) if nF * ndu > 0 else 0.0,
        "files": {"residual": "residual.csv"},
    })
    return EXIT_OK


HANDLERS = {
    "simulate": cmd_simulate,
    "find-family": cmd_find_family,
    "check-domain": cmd_check_domain,
    "limit-orbit": cmd_limit_orbit,
    "residual": cmd_residual,
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="vortexchoreo", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        p = sub.add_parser(name)
        p.add_argument("--config", required=True, help="JSON run configuration")
        p.add_argument("--out", help="output directory (overrides output_dir)")
        p.add_argument("--jobs", type=int, help="worker processes for Jacobian columns")
    return parser


def _error(code, exc, field_name=None) -> int:
    payload = {"error": type(exc).__name__, "message": str(exc), "exit_code": code}
    if field_name is not None:
        payload["field"] = field_name
    print(json.dumps(payload), file=sys.stderr)
    return code


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = RunConfig.load(args.config)
        if args.jobs is not None:
            if args.jobs < 1:
                raise ConfigError("--jobs must be at least 1", "jobs")
            cfg.jobs = args.jobs
        if args.out is not None:
            cfg.output_dir = args.out
    except MapNotInjective as exc:
        return _error(EXIT_CONFIG, exc, "domain.coefficients")
    except ConfigError as exc:
        return _error(EXIT_CONFIG, exc, exc.field)
    out = Path(cfg.output_dir)
    out.mkdir(parents=True, exist_ok=True)
    start = time.perf_counter()
    try:
        code = HANDLERS[args.command](cfg, out)
    except ConfigError as exc:
        code = _error(EXIT_CONFIG, exc, exc.field)
    except ContinuationStalled as exc:
        code = _error(EXIT_STALLED, exc)
    except (VortexError, ValueError) as exc:
        code = _error(EXIT_FAILURE, exc)
    _write_json(out / "timing.json", {"command": args.command, "wall_time_s": time.perf_counter() - start,
                                      "exit_code": code})
    return code


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
