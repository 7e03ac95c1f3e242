"""Discrete energy, decay-rate regression, and error metrics."""
from __future__ import annotations

import enum
import math
import warnings
from dataclasses import dataclass

import numpy as np

from .physics import PhysicalParams
from .sampling import EvalGrid


@dataclass
class EnergySeries:
    ts: np.ndarray
    Es: np.ndarray

    def __post_init__(self):
        self.ts = np.asarray(self.ts, dtype=np.float64)
        self.Es = np.asarray(self.Es, dtype=np.float64)
        if self.ts.shape != self.Es.shape:
            raise ValueError("ts and Es must have the same length")


class DecayModel(str, enum.Enum):
    EXPONENTIAL = "exponential"   # ln E against t
    POLYNOMIAL = "polynomial"     # ln E against ln t
    LOGARITHMIC = "logarithmic"   # ln E against ln ln t


# order also breaks R^2 ties
MODELS = (DecayModel.EXPONENTIAL, DecayModel.POLYNOMIAL, DecayModel.LOGARITHMIC)


@dataclass
class DecayFit:
    model: DecayModel
    slope: float
    intercept: float
    r_squared: float
    E_inf: float
    n_points: int

    def to_dict(self) -> dict:
        return {"model": self.model.value, "slope": self.slope, "intercept": self.intercept,
                "r_squared": self.r_squared, "E_inf": self.E_inf, "n_points": self.n_points}


def discrete_energy(grid: EvalGrid, fields, p: PhysicalParams) -> EnergySeries:
    """Rectangle-rule / forward-difference energy at t_0 .. t_{N_t - 1}.

    ``fields`` holds four value grids (phi, psi, theta, q), each of shape
    ``(N_t + 1, N_x + 1)`` indexed ``[time, space]``.  Spatial terms are taken
    at the right node x_{j+1} of each cell with weight 1/N_x; the last time
    node has no forward difference and therefore no energy entry.
    """
    phi, psi, theta, q = (np.asarray(f, dtype=np.float64) for f in fields)
    shape = (grid.ts.size, grid.xs.size)
    for f in (phi, psi, theta, q):
        if f.shape != shape:
            raise ValueError(f"field grid has shape {f.shape}, expected {shape}")
    N_x = grid.xs.size - 1
    dt = np.diff(grid.ts)[:, None]
    dx = np.diff(grid.xs)[None, :]

    phi_t = (phi[1:, 1:] - phi[:-1, 1:]) / dt
    psi_t = (psi[1:, 1:] - psi[:-1, 1:]) / dt
    now = slice(None, -1)
    psi_x = (psi[now, 1:] - psi[now, :-1]) / dx
    shear = (phi[now, 1:] - phi[now, :-1]) / dx + psi[now, 1:]
    density = (p.rho1 * phi_t**2 + p.rho2 * psi_t**2 + p.b * psi_x**2 + p.k * shear**2
               + p.rho3 * theta[now, 1:] ** 2 + p.tau * q[now, 1:] ** 2)
    Es = density.sum(axis=1) / (2.0 * N_x)
    return EnergySeries(grid.ts[:-1].copy(), Es)


def _abscissa(model: DecayModel, t: np.ndarray) -> np.ndarray:
    if model is DecayModel.EXPONENTIAL:
        return t
    if model is DecayModel.POLYNOMIAL:
        return np.log(t)
    return np.log(np.log(t))


def _usable(model: DecayModel, t, E):
    ok = E > 0
    if model is DecayModel.POLYNOMIAL:
        ok &= t > 0
    elif model is DecayModel.LOGARITHMIC:
        ok &= t > 1  # ln ln t needs t > 1
    return ok


def e_infinity(series: EnergySeries) -> float:
    """Mean of the final 10% of energy samples."""
    n = max(1, math.ceil(0.1 * series.Es.size))
    return float(series.Es[-n:].mean())


def fit_decay(series: EnergySeries, model: DecayModel | str, t_cut: float | None = None) -> DecayFit:
    """Least-squares line through ln E against t, ln t or ln ln t for t > t_cut."""
    model = DecayModel(model)
    t, E = series.ts, series.Es
    if t_cut is None:
        t_cut = 0.2 * t[-1]
    tail = t > t_cut
    nonpos = tail & ~(E > 0)
    if nonpos.any():
        warnings.warn(f"dropping {int(nonpos.sum())} nonpositive energy samples from the fit")
    mask = tail & _usable(model, t, E)
    n = int(mask.sum())
    if n < 3:
        raise ValueError(f"{model.value} fit needs at least 3 usable points after t > {t_cut}, got {n}")
    X = _abscissa(model, t[mask])
    Y = np.log(E[mask])
    A = np.column_stack([X, np.ones_like(X)])
    (slope, intercept), *_ = np.linalg.lstsq(A, Y, rcond=None)
    resid = Y - (slope * X + intercept)
    ss_tot = float(((Y - Y.mean()) ** 2).sum())
    ss_res = float((resid**2).sum())
    r2 = 1.0 - ss_res / ss_tot if ss_tot > 0 else 1.0
    return DecayFit(model, float(slope), float(intercept), r2, e_infinity(series), n)


def classify_decay(series: EnergySeries, t_cut: float | None = None, tie_tol: float = 1e-12):
    """Fit all three models; best is the highest R^2 (ties favour the earlier model)."""
    fits = {m: fit_decay(series, m, t_cut) for m in MODELS}
    best = MODELS[0]
    for m in MODELS[1:]:
        if fits[m].r_squared > fits[best].r_squared + tie_tol:
            best = m
    return best, fits


def relative_error(pred, exact) -> float:
    pred = np.asarray(pred, dtype=np.float64)
    exact = np.asarray(exact, dtype=np.float64)
    if pred.shape != exact.shape:
        raise ValueError(f"shape mismatch {pred.shape} vs {exact.shape}")
    denom = np.linalg.norm(exact.ravel())
    if denom == 0:
        raise ValueError("exact field has zero norm")
    return float(np.linalg.norm((pred - exact).ravel()) / denom)


def l2_error_series(pred, exact, grid: EvalGrid | None = None) -> np.ndarray:
    """Discrete 2-norm over x of pred - exact at every time and field.

    ``pred`` and ``exact`` are ``(4, N_t + 1, N_x + 1)`` stacks (or one such
    grid); the result has shape ``(N_t + 1, 4)`` (or ``(N_t + 1,)``).
    """
    pred = np.asarray(pred, dtype=np.float64)
    exact = np.asarray(exact, dtype=np.float64)
    if pred.shape != exact.shape:
        raise ValueError(f"shape mismatch {pred.shape} vs {exact.shape}")
    if grid is not None and pred.shape[-2:] != (grid.ts.size, grid.xs.size):
        raise ValueError("grids do not match the evaluation grid")
    err = np.sqrt(((pred - exact) ** 2).sum(axis=-1))
    return err.T if err.ndim == 2 else err
