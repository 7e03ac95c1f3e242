"""Run orchestration: train, evaluate on the diagnostic grid, write artifacts."""
from __future__ import annotations

import csv
import json
import logging
import platform
import time
from pathlib import Path

import numpy as np

from . import __version__
from .config import ExperimentConfig
from .diagnostics import (MODELS, discrete_energy, e_infinity, fit_decay, l2_error_series,
                          relative_error)
from .network import FIELD_NAMES, NetworkParams, evaluate_values
from .physics import exact_solution, stability_number
from .sampling import EvalGrid, uniform_grid
from .training import train, write_history

log = logging.getLogger(__name__)


def evaluate_on_grid(params: NetworkParams, grid: EvalGrid) -> np.ndarray:
    """Network values as a ``(4, N_t + 1, N_x + 1)`` stack."""
    T, X = np.meshgrid(grid.ts, grid.xs, indexing="ij")
    vals = evaluate_values(params, X.ravel(), T.ravel())
    return vals.T.reshape(4, grid.ts.size, grid.xs.size)


def exact_on_grid(grid: EvalGrid) -> np.ndarray:
    T, X = np.meshgrid(grid.ts, grid.xs, indexing="ij")
    u = exact_solution(X, T).phi.val
    return np.stack([u, u, u, u])


def fit_all(series, t_cut=None) -> dict:
    """Every decay model that can be fitted; failures are reported, not raised."""
    out = {}
    for m in MODELS:
        try:
            out[m.value] = fit_decay(series, m, t_cut).to_dict()
        except ValueError as exc:
            out[m.value] = {"model": m.value, "error": str(exc)}
    ok = [m for m in MODELS if "error" not in out[m.value]]
    best = None
    for m in ok:
        if best is None or out[m.value]["r_squared"] > out[best.value]["r_squared"] + 1e-12:
            best = m
    out["best"] = best.value if best else None
    out["E_inf"] = e_infinity(series)
    return out


def _fmt(v) -> str:
    return f"{v:.17g}"


def analyze(params: NetworkParams, cfg: ExperimentConfig, out_dir) -> dict:
    """Energy, decay fits and (if available) errors against the exact solution."""
    if tuple(params.sizes) != tuple(cfg.train.layer_sizes):
        raise ValueError(f"checkpoint layer sizes {params.sizes} do not match "
                         f"config {tuple(cfg.train.layer_sizes)}")
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    p = cfg.train.physics
    grid = uniform_grid(cfg.n_x, cfg.n_t, p.T)
    pred = evaluate_on_grid(params, grid)
    series = discrete_energy(grid, pred, p)
    with open(out / "energy.csv", "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(("t", "E"))
        w.writerows((_fmt(t), _fmt(e)) for t, e in zip(series.ts, series.Es))
    fits = fit_all(series, cfg.t_cut)
    (out / "fits.json").write_text(json.dumps(fits, indent=2))
    summary = {"fits": fits, "E0": float(series.Es[0]), "E_last": float(series.Es[-1])}
    if cfg.has_exact_solution:
        exact = exact_on_grid(grid)
        l2 = l2_error_series(pred, exact, grid)
        rel = [relative_error(pred[i], exact[i]) for i in range(4)]
        with open(out / "errors.csv", "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(("t",) + tuple(f"l2_{n}" for n in FIELD_NAMES))
            for t, row in zip(grid.ts, l2):
                w.writerow([_fmt(t)] + [_fmt(v) for v in row])
            w.writerow(["relative"] + [_fmt(v) for v in rel])
        summary["relative_error"] = dict(zip(FIELD_NAMES, rel))
    return summary


def run(cfg: ExperimentConfig, out_dir) -> dict:
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    cfg = cfg.resolved()
    tc = cfg.train
    t0 = time.perf_counter()
    params, history = train(tc, out_dir=out)
    train_seconds = time.perf_counter() - t0
    write_history(history, out / "loss_history.csv")
    summary = analyze(params, cfg, out)
    manifest = {
        "config": cfg.to_dict(),
        "chi": stability_number(tc.physics),
        "seeds": {"init": tc.seed, "collocation": tc.sample_seed},
        "initialisation": "glorot-uniform weights, zero biases",
        "generator": "numpy PCG64",
        "optimizer": {"name": "adam", "lr": tc.lr, "beta1": tc.beta1, "beta2": tc.beta2,
                      "eps": tc.eps},
        "final_loss": history[-1],
        "train_seconds": train_seconds,
        "summary": summary,
        "versions": {"timo_pinn": __version__, "numpy": np.__version__,
                     "python": platform.python_version()},
    }
    (out / "manifest.json").write_text(json.dumps(manifest, indent=2))
    return manifest
