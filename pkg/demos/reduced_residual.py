"""The rescaled choreography equation on loops in the boundary tube.

A loop u in the tube of radius delta is mapped to the physical curve
chi_r(u) at distance about r from the wall. The residual F(r, u) vanishes
exactly on choreographies. At r = 0 it reduces to the limit flow, whose
solutions are parallel curves of the boundary. For every loop, solution or
not, F(r, u) is L^2-orthogonal to lambda(r, u) i u'.

Run: python3 demos/reduced_residual.py
"""
import numpy as np

from vortexchoreo import DomainMap, GreenEvaluator, LoopSetting, boundary_frame, reduced_residual, seed_orbit
from vortexchoreo.orbit_finder import orthogonality_defect

domain = DomainMap.perturbed_disk([0.05])
frame = boundary_frame(domain)
setting = LoopSetting(frame, GreenEvaluator(domain), n=3)

_, u0 = seed_orbit(frame).samples(256)
print(f"limit orbit at distance delta: max |F(0, u0)| = {np.max(np.abs(reduced_residual(setting, u0, 0.0))):.1e}")
for r in (0.05, 0.02, 0.01):
    print(f"  same loop, r = {r}: max |F(r, u0)| = {np.max(np.abs(reduced_residual(setting, u0, r))):.3e}")

rng = np.random.default_rng(7)
L = frame.total_length
t = np.arange(256) * L / 256
print("\nwobbly loops: relative size of <F, lambda i u'>")
for trial in range(5):
    k = np.arange(1, 6)
    phase = rng.uniform(0, 2 * np.pi, 5)
    wobble = (np.cos(2 * np.pi * np.outer(t, k) / L + phase) / k**2).sum(axis=1)
    gamma, nu, _ = frame.frame_at(t + 0.1 * wobble)
    u = gamma - frame.delta * (1 + 0.2 * wobble) * nu
    inner, nF, ndu = orthogonality_defect(setting, u, 0.02)
    print(f"  loop {trial}: ||F|| = {nF:.3f}, relative inner product = {abs(inner) / (nF * ndu):.1e}")
