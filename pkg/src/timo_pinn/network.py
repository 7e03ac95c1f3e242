"""Fully connected tanh network mapping (x, t) to (phi, psi, theta, q)."""
from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import autodiff as ad
from .jets import Jet2, seed_stacked, stacked_affine, stacked_tanh

DEFAULT_LAYERS = (2, 100, 100, 100, 100, 100, 4)
FIELD_NAMES = ("phi", "psi", "theta", "q")


@dataclass
class FieldEval:
    phi: Jet2
    psi: Jet2
    theta: Jet2
    q: Jet2

    def __iter__(self):
        return iter((self.phi, self.psi, self.theta, self.q))


@dataclass
class LayerSpec:
    sizes: tuple = DEFAULT_LAYERS

    def __post_init__(self):
        self.sizes = tuple(int(n) for n in self.sizes)
        if len(self.sizes) < 2 or any(n <= 0 for n in self.sizes):
            raise ValueError(f"invalid layer sizes {self.sizes}")
        if self.sizes[0] != 2 or self.sizes[-1] != 4:
            raise ValueError("network must map 2 inputs (x, t) to 4 outputs")

    @property
    def n_params(self) -> int:
        return param_count(self.sizes)


def param_count(sizes) -> int:
    return sum(a * b + b for a, b in zip(sizes[:-1], sizes[1:]))


def layer_slices(sizes):
    """(weight slice, weight shape, bias slice) per layer in the flat vector."""
    out, offset = [], 0
    for n_in, n_out in zip(sizes[:-1], sizes[1:]):
        w = slice(offset, offset + n_in * n_out)
        offset += n_in * n_out
        b = slice(offset, offset + n_out)
        offset += n_out
        out.append((w, (n_out, n_in), b))
    return out


@dataclass
class NetworkParams:
    """Layer sizes plus every weight and bias in one flat float64 vector.

    Per layer the weight matrix (shape ``(n_out, n_in)``, row-major) comes
    first, followed by the bias vector.
    """

    sizes: tuple
    flat: np.ndarray
    seed: int | None = None
    epoch: int = 0

    def __post_init__(self):
        self.sizes = LayerSpec(self.sizes).sizes
        self.flat = np.asarray(self.flat, dtype=np.float64)
        if self.flat.shape != (param_count(self.sizes),):
            raise ValueError(
                f"flat parameter vector has shape {self.flat.shape}, "
                f"expected ({param_count(self.sizes)},) for sizes {self.sizes}"
            )

    def unflatten(self):
        return [
            (self.flat[w].reshape(shape), self.flat[b])
            for w, shape, b in layer_slices(self.sizes)
        ]

    @classmethod
    def from_layers(cls, layers, seed=None) -> "NetworkParams":
        sizes = [layers[0][0].shape[1]] + [W.shape[0] for W, _ in layers]
        flat = np.concatenate([np.concatenate([W.ravel(), b]) for W, b in layers])
        return cls(tuple(sizes), flat, seed)

    def to_json(self) -> str:
        nums = ",".join(f"{v:.17g}" for v in self.flat)
        head = json.dumps({"layer_sizes": list(self.sizes), "seed": self.seed, "epoch": self.epoch})
        return head[:-1] + f', "flat_params": [{nums}]}}'

    @classmethod
    def from_json(cls, text: str) -> "NetworkParams":
        doc = json.loads(text)
        return cls(tuple(doc["layer_sizes"]), np.array(doc["flat_params"], dtype=np.float64),
                   doc.get("seed"), doc.get("epoch", 0))

    def save(self, path) -> None:
        Path(path).write_text(self.to_json())

    @classmethod
    def load(cls, path) -> "NetworkParams":
        return cls.from_json(Path(path).read_text())


def init_params(spec: LayerSpec | tuple = DEFAULT_LAYERS, seed: int = 0) -> NetworkParams:
    """Glorot-uniform weights, zero biases, drawn from PCG64(seed)."""
    sizes = spec.sizes if isinstance(spec, LayerSpec) else LayerSpec(spec).sizes
    rng = np.random.default_rng(seed)
    flat = np.zeros(param_count(sizes))
    for w, (n_out, n_in), _ in layer_slices(sizes):
        bound = np.sqrt(6.0 / (n_in + n_out))
        flat[w] = rng.uniform(-bound, bound, size=n_out * n_in)
    return NetworkParams(sizes, flat, seed)


def forward_stacked(sizes, flat, x, t, order: int = 2):
    """Network output as a stacked jet of shape ``(K, n_points, 4)``.

    ``flat`` may be a plain array or a tape ``Var``; in the latter case every
    operation is recorded.
    """
    J = seed_stacked(x, t, order)
    slices = layer_slices(sizes)
    for i, (w, shape, b) in enumerate(slices):
        W = ad.reshape(flat[w], shape)
        J = stacked_affine(J, W, flat[b])
        if i < len(slices) - 1:
            J = stacked_tanh(J)
    return J


def split_fields(J) -> FieldEval:
    """Turn a stacked ``(K, n, 4)`` output jet into four component-wise jets."""
    K = J.shape[0]
    jets = []
    for j in range(4):
        comps = [J[c, :, j] for c in range(K)] + [None] * (6 - K)
        jets.append(Jet2(*comps))
    return FieldEval(*jets)


def forward(params: NetworkParams, x, t, order: int = 2) -> FieldEval:
    """Evaluate the four fields and their partials at (x, t).

    Scalar inputs give scalar components; array inputs give arrays.
    """
    scalar = np.ndim(x) == 0 and np.ndim(t) == 0
    fe = split_fields(forward_stacked(params.sizes, params.flat, x, t, order))
    if scalar:
        fe = FieldEval(*(Jet2(*(None if c is None else float(c[0]) for c in jet.as_tuple()))
                         for jet in fe))
    return fe


def evaluate_values(params: NetworkParams, x, t, chunk: int = 65536) -> np.ndarray:
    """Field values only, shape ``(n, 4)``; evaluated in chunks to bound memory."""
    x = np.ravel(np.asarray(x, dtype=np.float64))
    t = np.ravel(np.asarray(t, dtype=np.float64))
    out = np.empty((x.size, 4))
    for lo in range(0, x.size, chunk):
        hi = min(lo + chunk, x.size)
        out[lo:hi] = forward_stacked(params.sizes, params.flat, x[lo:hi], t[lo:hi], order=0)[0]
    return out
