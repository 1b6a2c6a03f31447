"""Explicit solutions of the boundary limit system.

In tube coordinates the limit flow ``u' = (1 - d kappa)(delta/d) i nu`` keeps
the distance ``d = eps`` fixed and advances the foot point along the boundary
at constant arc-length speed ``delta/eps``. Every solution is therefore a
parallel curve of the boundary with period ``(eps/delta) L``.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .geometry import BoundaryFrame


@dataclass(frozen=True)
class LimitOrbit:
    epsilon: float
    sigma0: float
    frame: BoundaryFrame

    def __post_init__(self):
        if not (0.0 < self.epsilon <= self.frame.delta):
            raise ValueError(f"epsilon must lie in (0, delta={self.frame.delta}]")

    @property
    def period(self) -> float:
        return self.epsilon / self.frame.delta * self.frame.total_length

    @property
    def speed(self) -> float:
        """Arc-length speed of the foot point."""
        return self.frame.delta / self.epsilon

    def phase(self, t):
        return self.sigma0 + self.speed * np.asarray(t, dtype=float)

    def eval(self, t):
        gamma, nu, _ = self.frame.frame_at(self.phase(t))
        return gamma - self.epsilon * nu

    def velocity(self, t):
        """Right-hand side of the limit system along the orbit."""
        _, nu, kappa = self.frame.frame_at(self.phase(t))
        return (1.0 - self.epsilon * kappa) * self.speed * 1j * nu

    def samples(self, m: int):
        """``m`` uniform samples over one period as ``(t, u)``."""
        t = np.arange(m) * (self.period / m)
        return t, self.eval(t)


def limit_orbit_eval(orb: LimitOrbit, t):
    return orb.eval(t)


def limit_rhs(frame: BoundaryFrame, u):
    """Limit vector field ``(1 - d kappa)(delta/d) i nu`` at tube points ``u``."""
    tc = frame.project(u)
    return (1.0 - tc.d * tc.kappa) * (frame.delta / tc.d) * 1j * tc.nu


def seed_orbit(frame: BoundaryFrame) -> LimitOrbit:
    """The limit orbit at distance ``delta``; its period is the boundary length."""
    return LimitOrbit(frame.delta, 0.0, frame)
