"""Loss assembly, Adam, and the full-batch training loop."""
from __future__ import annotations

import csv
import logging
import math
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable

import numpy as np

from . import autodiff as ad
from .network import DEFAULT_LAYERS, FieldEval, NetworkParams, forward_stacked, init_params, split_fields
from .physics import (BoundarySpec, InitialData, PhysicalParams, boundary_residuals,
                      initial_residuals, pde_residuals, source_terms)
from .sampling import CollocationSet, sample_collocation

log = logging.getLogger(__name__)

LOSS_COLUMNS = ("mse_pde1", "mse_pde2", "mse_pde3", "mse_pde4",
                "mse_bc0", "mse_bc1", "mse_ic_val", "mse_ic_vel")


class TrainingDiverged(RuntimeError):
    """Raised when the loss or its gradient stops being finite."""

    def __init__(self, msg, last_good: NetworkParams | None = None):
        super().__init__(msg)
        self.last_good = last_good


@dataclass
class TrainConfig:
    physics: PhysicalParams = field(default_factory=PhysicalParams)
    boundary: BoundarySpec = field(default_factory=BoundarySpec)
    initial: InitialData = field(default_factory=InitialData)
    use_sources: bool = False
    paper_literal_aggregation: bool = False
    layer_sizes: tuple = DEFAULT_LAYERS
    epochs: int = 10000
    n_collocation: int = 3000
    n_boundary: int | None = None
    n_initial: int | None = None
    lr: float = 5e-4
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8
    seed: int = 0          # network initialisation
    sample_seed: int = 1   # collocation draw
    log_every: int = 1

    def __post_init__(self):
        if self.epochs < 1:
            raise ValueError("epochs must be >= 1")
        if self.log_every < 1:
            raise ValueError("log_every must be >= 1")
        self.layer_sizes = tuple(self.layer_sizes)
        if self.n_boundary is None:
            self.n_boundary = self.n_collocation
        if self.n_initial is None:
            self.n_initial = self.n_collocation

    def sample(self) -> CollocationSet:
        return sample_collocation(self.n_collocation, self.physics.T, self.sample_seed,
                                  self.n_boundary, self.n_initial)


@dataclass
class LossBreakdown:
    total: float
    mse: tuple
    tape: ad.Tape | None = field(default=None, repr=False, compare=False)
    total_node: ad.Var | None = field(default=None, repr=False, compare=False)

    def as_row(self) -> dict:
        return {"total": self.total, **dict(zip(LOSS_COLUMNS, self.mse))}


def _mean_sq(terms, literal: bool):
    """Mean over points of the squared deviations.

    Per-term (default): sum_k r_k**2.  Literal: (sum_k r_k)**2, which lets
    deviations of opposite sign cancel.
    """
    if literal:
        return ad.mean(ad.square(ad.stack_sum(list(terms))))
    return ad.mean(ad.stack_sum([ad.square(r) for r in terms]))


Evaluator = Callable[[np.ndarray, np.ndarray, int], FieldEval]


def assemble_loss(evaluate: Evaluator, batch: CollocationSet, cfg: TrainConfig):
    """The eight MSE terms and their unweighted sum.

    ``evaluate(x, t, order)`` returns the fields at the given points; it may
    return taped variables (network training) or plain arrays (e.g. the
    exact solution).
    """
    p = cfg.physics
    xi, ti = batch.interior_x, batch.interior_t
    interior = evaluate(xi, ti, 2)
    src = source_terms(xi, ti) if cfg.use_sources else None
    pde = [ad.mean(ad.square(r)) for r in pde_residuals(interior, p, src)]

    tb = batch.boundary_t
    order_b = cfg.boundary.order
    left = evaluate(np.zeros_like(tb), tb, order_b)
    right = evaluate(np.ones_like(tb), tb, order_b)
    terms0, terms1 = boundary_residuals(left, right, cfg.boundary, tb)
    lit = cfg.paper_literal_aggregation
    bc = [_mean_sq(terms0, lit), _mean_sq(terms1, lit)]

    x0 = batch.initial_x
    init = evaluate(x0, np.zeros_like(x0), 1)
    values, velocities = initial_residuals(init, cfg.initial, x0)
    ic = [_mean_sq(values, lit), _mean_sq(velocities, lit)]

    parts = pde + bc + ic
    return ad.stack_sum(parts), parts


def network_evaluator(sizes, flat) -> Evaluator:
    def evaluate(x, t, order):
        return split_fields(forward_stacked(sizes, flat, x, t, order))
    return evaluate


def compute_loss(params: NetworkParams, batch: CollocationSet, cfg: TrainConfig) -> LossBreakdown:
    """Loss of the network, recorded on a fresh tape (parameters are its only leaf)."""
    tape = ad.Tape()
    flat = tape.parameter(params.flat)
    total, parts = assemble_loss(network_evaluator(params.sizes, flat), batch, cfg)
    return LossBreakdown(float(total.value), tuple(float(m.value) for m in parts), tape, total)


def loss_and_grad(params: NetworkParams, batch: CollocationSet, cfg: TrainConfig):
    lb = compute_loss(params, batch, cfg)
    return lb, ad.param_gradient(lb.tape, lb.total_node)


@dataclass
class AdamState:
    m: np.ndarray
    v: np.ndarray
    step: int = 0
    lr: float = 5e-4
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8

    @classmethod
    def fresh(cls, n: int, lr=5e-4, beta1=0.9, beta2=0.999, eps=1e-8) -> "AdamState":
        return cls(np.zeros(n), np.zeros(n), 0, lr, beta1, beta2, eps)


def adam_step(state: AdamState, params: NetworkParams, grads: np.ndarray):
    """Bias-corrected Adam update; returns new (state, params), inputs untouched."""
    grads = np.asarray(grads, dtype=np.float64)
    if grads.shape != params.flat.shape:
        raise ValueError(f"gradient shape {grads.shape} != parameter shape {params.flat.shape}")
    if not np.all(np.isfinite(grads)):
        raise TrainingDiverged(f"non-finite gradient at Adam step {state.step + 1}", params)
    step = state.step + 1
    m = state.beta1 * state.m + (1.0 - state.beta1) * grads
    v = state.beta2 * state.v + (1.0 - state.beta2) * grads * grads
    m_hat = m / (1.0 - state.beta1**step)
    v_hat = v / (1.0 - state.beta2**step)
    flat = params.flat - state.lr * m_hat / (np.sqrt(v_hat) + state.eps)
    new_state = AdamState(m, v, step, state.lr, state.beta1, state.beta2, state.eps)
    return new_state, NetworkParams(params.sizes, flat, params.seed, params.epoch + 1)


def train(cfg: TrainConfig, out_dir=None, params: NetworkParams | None = None,
          callback=None):
    """Full-batch Adam on a fixed collocation set.

    Returns ``(params, history)``; history rows are dicts with ``epoch``,
    ``total`` and the eight MSE columns, logged every ``cfg.log_every``
    epochs (and at the last one).  The logged loss is the one whose gradient
    produced that epoch's update.
    """
    batch = cfg.sample()
    if params is None:
        params = init_params(cfg.layer_sizes, cfg.seed)
    state = AdamState.fresh(params.flat.size, cfg.lr, cfg.beta1, cfg.beta2, cfg.eps)
    history = []
    t0 = time.perf_counter()
    for epoch in range(cfg.epochs):
        lb, grad = loss_and_grad(params, batch, cfg)
        if not math.isfinite(lb.total):
            _checkpoint(params, out_dir)
            raise TrainingDiverged(f"non-finite loss at epoch {epoch}", params)
        if epoch % cfg.log_every == 0 or epoch == cfg.epochs - 1:
            history.append({"epoch": epoch, **lb.as_row()})
        if callback is not None:
            callback(epoch, lb)
        try:
            state, params = adam_step(state, params, grad)
        except TrainingDiverged:
            _checkpoint(params, out_dir)
            raise
        if epoch % 500 == 0:
            log.info("epoch %d loss %.4e (%.1fs)", epoch, lb.total, time.perf_counter() - t0)
    _checkpoint(params, out_dir)
    return params, history


def _checkpoint(params, out_dir):
    if out_dir is not None:
        Path(out_dir).mkdir(parents=True, exist_ok=True)
        params.save(Path(out_dir) / "checkpoint.json")


def write_history(history, path) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(("epoch", "total") + LOSS_COLUMNS)
        for row in history:
            w.writerow([row["epoch"]] + [f"{row[c]:.17g}" for c in ("total",) + LOSS_COLUMNS])


def read_history(path) -> list[dict]:
    with open(path, newline="") as fh:
        return [{k: (int(v) if k == "epoch" else float(v)) for k, v in row.items()}
                for row in csv.DictReader(fh)]
