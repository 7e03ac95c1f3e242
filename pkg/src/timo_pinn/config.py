"""Experiment configuration and the named preset catalog."""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field, fields, replace
from pathlib import Path

from .physics import (BUMP, BoundaryKind, BoundarySpec, DampingKind, InitialData,
                      PhysicalParams, stability_number)
from .training import TrainConfig


@dataclass
class ExperimentConfig:
    name: str = "custom"
    train: TrainConfig = field(default_factory=TrainConfig)
    n_x: int = 200           # diagnostic grid intervals in x
    n_t: int = 3000          # diagnostic grid intervals in t
    t_cut: float | None = None
    out_dir: str | None = None

    def resolved(self) -> "ExperimentConfig":
        """Copy with every implicit default replaced by its value."""
        t_cut = 0.2 * self.train.physics.T if self.t_cut is None else self.t_cut
        return replace(self, t_cut=t_cut)

    @property
    def has_exact_solution(self) -> bool:
        return self.train.use_sources

    def to_dict(self) -> dict:
        tc = self.train
        train = {f.name: getattr(tc, f.name) for f in fields(tc)
                 if f.name not in ("physics", "boundary", "initial")}
        train["layer_sizes"] = list(tc.layer_sizes)
        train["physics"] = tc.physics.to_dict()
        train["boundary"] = tc.boundary.to_dict()
        train["initial"] = tc.initial.to_dict()
        return {"name": self.name, "n_x": self.n_x, "n_t": self.n_t, "t_cut": self.t_cut,
                "out_dir": self.out_dir, "train": train}

    @classmethod
    def from_dict(cls, d: dict) -> "ExperimentConfig":
        d = dict(d)
        train = dict(d.pop("train", {}))
        physics = PhysicalParams(**train.pop("physics", {}))
        boundary = BoundarySpec(**train.pop("boundary", {}))
        initial = InitialData(**train.pop("initial", {}))
        known = {f.name for f in fields(TrainConfig)}
        unknown = set(train) - known
        if unknown:
            raise ValueError(f"unknown train fields: {sorted(unknown)}")
        tc = TrainConfig(physics=physics, boundary=boundary, initial=initial, **train)
        unknown = set(d) - {f.name for f in fields(cls)}
        if unknown:
            raise ValueError(f"unknown config fields: {sorted(unknown)}")
        return cls(train=tc, **d)

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2)

    @classmethod
    def load(cls, path) -> "ExperimentConfig":
        doc = json.loads(Path(path).read_text())
        if "preset" in doc:
            base = preset(doc.pop("preset")).to_dict()
            base.update({k: v for k, v in doc.items() if k != "train"})
            base["train"].update(doc.get("train", {}))
            doc = base
        return cls.from_dict(doc)


CASE1 = dict(rho1=1.0, rho2=2.0, rho3=1.0, b=1.0, k=1.0, delta=1.0, beta=1.0, tau=1.0)
CASE2 = dict(rho1=2.0, rho2=2.0, rho3=1.0, b=1.0, k=2.0, delta=math.sqrt(2.0 / 3.0),
             beta=1.0, tau=3.0)
DIRICHLET = BoundarySpec(BoundaryKind.DIRICHLET_ALL)


def _manufactured():
    p = PhysicalParams(mu=1.0, damping=DampingKind.LINEAR, T=1.0)
    return ExperimentConfig("manufactured", TrainConfig(physics=p, boundary=DIRICHLET,
                                                        use_sources=True, epochs=10000),
                            n_x=200, n_t=1000)


def _stability(name, params, T, mu=0.0, damping=DampingKind.NONE, initial=None):
    def build():
        p = PhysicalParams(**params, mu=mu, damping=damping, T=T)
        tc = TrainConfig(physics=p, boundary=DIRICHLET, epochs=8000,
                         initial=initial or InitialData())
        return ExperimentConfig(name, tc)
    return build


PRESETS = {
    "manufactured": _manufactured,
    "case1": _stability("case1", CASE1, T=40.0),
    "case2": _stability("case2", CASE2, T=30.0),
    "linear-damped": _stability("linear-damped", CASE2, T=30.0, mu=1.0,
                                damping=DampingKind.LINEAR),
    "quadratic-damped": _stability("quadratic-damped", CASE2, T=30.0, mu=1.0,
                                   damping=DampingKind.QUADRATIC),
    "singular-damped": _stability("singular-damped", CASE2, T=30.0, mu=1.0,
                                  damping=DampingKind.SINGULAR_EXP),
    # theta_0(0) != 0: a constant temperature offset on top of the bump
    "case2-thermal": _stability("case2-thermal", CASE2, T=10.0,
                                initial=InitialData(theta0=(0.5,) + BUMP[1:])),
}


def preset(name: str) -> ExperimentConfig:
    try:
        return PRESETS[name]()
    except KeyError:
        raise KeyError(f"unknown preset {name!r}; valid presets: {', '.join(PRESETS)}") from None


def catalog() -> list[dict]:
    rows = []
    for name in PRESETS:
        cfg = preset(name)
        p = cfg.train.physics
        rows.append({"name": name, "chi": stability_number(p), **p.to_dict(),
                     "epochs": cfg.train.epochs, "boundary": cfg.train.boundary.kind.value,
                     "sources": cfg.train.use_sources})
    return rows
