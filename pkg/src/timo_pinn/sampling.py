"""Collocation sets and uniform evaluation grids.

Random draws use numpy's ``PCG64`` bit generator (a 128-bit linear
congruential generator with a permuted output function) seeded directly with
the integer seed.  Its output stream and ``Generator.random`` conversion to
doubles are platform independent, so a seed pins the set everywhere.

Draw order from the single stream: interior x, interior t, boundary times,
initial x.  Exact zeros (probability 2**-53 per draw) are redrawn so every
point lies strictly inside its open interval.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class CollocationSet:
    interior_x: np.ndarray
    interior_t: np.ndarray
    boundary_t: np.ndarray
    initial_x: np.ndarray
    seed: int

    def __len__(self):
        return self.interior_x.size


@dataclass(frozen=True)
class EvalGrid:
    xs: np.ndarray
    ts: np.ndarray

    @property
    def hx(self) -> float:
        return 1.0 / (self.xs.size - 1)

    @property
    def ht(self) -> float:
        return (self.ts[-1] - self.ts[0]) / (self.ts.size - 1)


def _open_unit(rng: np.random.Generator, n: int) -> np.ndarray:
    u = rng.random(n)
    bad = u == 0.0
    while bad.any():
        u[bad] = rng.random(int(bad.sum()))
        bad = u == 0.0
    return u


def sample_collocation(N: int, T: float, seed: int, n_boundary: int | None = None,
                       n_initial: int | None = None) -> CollocationSet:
    """Uniform i.i.d. points: N interior (x, t), boundary times, initial x."""
    n_boundary = N if n_boundary is None else n_boundary
    n_initial = N if n_initial is None else n_initial
    if min(N, n_boundary, n_initial) < 1:
        raise ValueError("collocation sizes must be at least 1")
    if not T > 0:
        raise ValueError("T must be positive")
    rng = np.random.default_rng(seed)
    x = _open_unit(rng, N)
    t = T * _open_unit(rng, N)
    tb = T * _open_unit(rng, n_boundary)
    xi = _open_unit(rng, n_initial)
    return CollocationSet(x, t, tb, xi, seed)


def uniform_grid(N_x: int, N_t: int, T: float) -> EvalGrid:
    """N_x + 1 nodes on [0, 1] and N_t + 1 nodes on [0, T], endpoints included."""
    if N_x < 2 or N_t < 2:
        raise ValueError("grid needs at least 2 intervals in each direction")
    if not T > 0:
        raise ValueError("T must be positive")
    xs = np.arange(N_x + 1) / N_x
    ts = (np.arange(N_t + 1) * T) / N_t  # one rounding per node
    return EvalGrid(xs, ts)
