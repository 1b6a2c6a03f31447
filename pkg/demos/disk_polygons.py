"""Rigidly rotating vortex polygons in the unit disk.

N identical vortices on a circle of radius s rotate rigidly with angular
velocity omega(s). Integrating the Kirchhoff-Routh dynamics from the polygon
and comparing with the rotation shows how well the integrator keeps the
exact solution and the energy.

Run: python3 demos/disk_polygons.py
"""
import numpy as np

from vortexchoreo import DomainMap, GreenEvaluator, IntegrateOptions, VortexConfiguration, integrate
from vortexchoreo.asymptotics import disk_angular_velocity

ev = GreenEvaluator(DomainMap.unit_disk())

print(f"{'N':>2} {'s':>5} {'omega':>10} {'period':>9} {'max |z - exact|':>16} {'energy drift':>13}")
for n in (2, 3, 5):
    for s in (0.3, 0.5, 0.9):
        om = float(disk_angular_velocity(n, s))
        period = 2 * np.pi / abs(om)
        z0 = s * np.exp(2j * np.pi * np.arange(n) / n)
        tr = integrate(ev, VortexConfiguration(z0), period, IntegrateOptions(n_samples=65))
        exact = z0[None, :] * np.exp(1j * om * tr.times)[:, None]
        err = np.max(np.abs(tr.positions - exact))
        print(f"{n:>2} {s:>5.2f} {om:>10.5f} {period:>9.4f} {err:>16.2e} {tr.energy_drift:>13.2e}")

# Close to the wall the polygon spins fast: its own image system dominates.
print("\nomega grows like 1/(1 - s) near the boundary:")
for s in (0.9, 0.95, 0.99):
    print(f"  s = {s:.2f}: omega * (1 - s) = {disk_angular_velocity(3, s) * (1 - s):.4f}")
