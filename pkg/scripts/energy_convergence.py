"""Discrete energy of the manufactured solution at t = 0 against the exact 20/3.

    python scripts/energy_convergence.py [N ...]
"""
import sys

import numpy as np

from timo_pinn.diagnostics import discrete_energy
from timo_pinn.physics import PhysicalParams
from timo_pinn.sampling import uniform_grid

EXACT = 20 / 3


def energy_t0(n: int) -> float:
    g = uniform_grid(n, n, 0.01)
    t, x = np.meshgrid(g.ts, g.xs, indexing="ij")
    u = 4 * np.exp(t) * x * (1 - x)
    return float(discrete_energy(g, [u] * 4, PhysicalParams()).Es[0])


def main(ns):
    prev = None
    print(f"{'N':>6} {'E0':>12} {'error':>10} {'ratio':>6}")
    for n in ns:
        e0 = energy_t0(n)
        err = abs(e0 - EXACT)
        ratio = f"{prev / err:6.3f}" if prev else ""
        print(f"{n:6d} {e0:12.8f} {err:10.3e} {ratio}")
        prev = err


if __name__ == "__main__":
    main([int(a) for a in sys.argv[1:]] or [250, 500, 1000, 2000, 4000])
