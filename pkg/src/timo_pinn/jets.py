"""Second-order forward-mode jets over the two inputs (x, t).

A jet carries a value and its partials ``dx, dt, dxx, dtt, dxt``.  Inside the
network jets travel as *stacked* arrays whose leading axis indexes the
components in that order.  A stacked jet may be truncated:

    order 0 -> (val,)
    order 1 -> (val, dx, dt)
    order 2 -> (val, dx, dt, dxx, dtt, dxt)

so points that only need values or first partials (boundary and initial
sets) do not pay for the second-order terms.  The stacked primitives are
tape-aware (see :mod:`timo_pinn.autodiff`), which gives reverse-over-forward
parameter gradients.

:class:`Jet2` is the component-wise view used by the physics code.
"""
from __future__ import annotations

from dataclasses import dataclass, fields
from typing import Any

import numpy as np

from . import autodiff as ad

COMPONENTS = ("val", "dx", "dt", "dxx", "dtt", "dxt")
ORDER_SIZE = {0: 1, 1: 3, 2: 6}


@dataclass
class Jet2:
    """Value plus partials.  Components are floats, arrays or tape ``Var``s;
    ``None`` marks a partial that was not propagated (truncated jet)."""

    val: Any
    dx: Any = 0.0
    dt: Any = 0.0
    dxx: Any = 0.0
    dtt: Any = 0.0
    dxt: Any = 0.0

    def as_tuple(self):
        return tuple(getattr(self, c) for c in COMPONENTS)

    def stacked(self) -> np.ndarray:
        comps = [c for c in self.as_tuple() if c is not None]
        return np.stack([np.asarray(c, dtype=np.float64) for c in comps])

    @classmethod
    def from_stacked(cls, J) -> "Jet2":
        k = len(J) if not isinstance(J, ad.Var) else J.shape[0]
        comps = [J[i] for i in range(k)] + [None] * (6 - k)
        return cls(*comps)

    def __add__(self, other):
        return jet_add(self, other)

    def __mul__(self, other):
        if isinstance(other, Jet2):
            return jet_mul(self, other)
        return jet_scale(self, other)

    __rmul__ = __mul__


def seed_inputs(x: float, t: float) -> tuple[Jet2, Jet2]:
    """Input jets: d/dx of x is 1, d/dt of t is 1, every other partial 0."""
    zero = np.zeros_like(np.asarray(x, dtype=np.float64))
    one = np.ones_like(zero)
    if np.ndim(zero) == 0:
        zero, one = 0.0, 1.0
    xj = Jet2(x, one, zero, zero, zero, zero)
    tj = Jet2(t, zero, one, zero, zero, zero)
    return xj, tj


def seed_stacked(x, t, order: int = 2) -> np.ndarray:
    """Stacked input jets of shape ``(K, n_points, 2)``; column 0 is x, 1 is t."""
    x = np.atleast_1d(np.asarray(x, dtype=np.float64))
    t = np.atleast_1d(np.asarray(t, dtype=np.float64))
    if x.shape != t.shape:
        raise ValueError("x and t must have the same shape")
    J = np.zeros((ORDER_SIZE[order], x.size, 2))
    J[0, :, 0] = x
    J[0, :, 1] = t
    if order >= 1:
        J[1, :, 0] = 1.0
        J[2, :, 1] = 1.0
    return J


# ---------------------------------------------------------------------------
# stacked kernels: arrays of shape (K, ...) with K in {1, 3, 6}


def _unary_fwd(J, f0, f1, f2):
    K = J.shape[0]
    out = np.empty_like(J)
    out[0] = f0
    if K >= 3:
        np.multiply(f1, J[1], out=out[1])
        np.multiply(f1, J[2], out=out[2])
    if K == 6:
        tmp = np.empty_like(J[0])
        for c, (a, b) in ((3, (1, 1)), (4, (2, 2)), (5, (1, 2))):
            np.multiply(J[a], J[b], out=out[c])
            out[c] *= f2
            np.multiply(f1, J[c], out=tmp)
            out[c] += tmp
    return out


def _unary_vjp(G, J, f1, f2, f3):
    """Cotangent of a scalar function applied to a jet; f1..f3 are its
    first three derivatives evaluated at the jet value."""
    K = J.shape[0]
    gJ = np.empty_like(J)
    gv = gJ[0]
    np.multiply(G[0], f1, out=gv)
    if K == 1:
        return gJ
    tmp = np.empty_like(gv)
    acc = np.empty_like(gv)
    # first-order partials: f2 * sum_d G_d J_d
    np.multiply(G[1], J[1], out=acc)
    np.multiply(G[2], J[2], out=tmp)
    acc += tmp
    np.multiply(G[1], f1, out=gJ[1])
    np.multiply(G[2], f1, out=gJ[2])
    if K == 6:
        for c in (3, 4, 5):
            np.multiply(G[c], J[c], out=tmp)
            acc += tmp
        acc *= f2
        gv += acc
        # f3 * (G_xx J_x^2 + G_tt J_t^2 + G_xt J_x J_t)
        np.multiply(J[1], J[1], out=acc)
        acc *= G[3]
        np.multiply(J[2], J[2], out=tmp)
        tmp *= G[4]
        acc += tmp
        np.multiply(J[1], J[2], out=tmp)
        tmp *= G[5]
        acc += tmp
        acc *= f3
        gv += acc
        # second-order outputs feed back into the first partials
        np.multiply(G[3], J[1], out=acc)
        acc *= 2.0
        np.multiply(G[5], J[2], out=tmp)
        acc += tmp
        acc *= f2
        gJ[1] += acc
        np.multiply(G[4], J[2], out=acc)
        acc *= 2.0
        np.multiply(G[5], J[1], out=tmp)
        acc += tmp
        acc *= f2
        gJ[2] += acc
        for c in (3, 4, 5):
            np.multiply(G[c], f1, out=gJ[c])
    else:
        acc *= f2
        gv += acc
    return gJ


def _tanh_derivs(y):
    """(s, s2, s3): first three derivatives of tanh given y = tanh(v)."""
    y2 = y * y
    s = 1.0 - y2
    s2 = y * s
    s2 *= -2.0
    # -2 s^2 + 4 y^2 s = 2 s (2 y^2 - s)
    s3 = 2.0 * y2
    s3 -= s
    s3 *= s
    s3 *= 2.0
    return s, s2, s3


def tanh_fwd(J):
    if J.shape[0] == 1:
        return np.tanh(J)
    y = np.tanh(J[0])
    s, s2, _ = _tanh_derivs(y)
    return _unary_fwd(J, y, s, s2)


def tanh_vjp(G, out, J):
    s, s2, s3 = _tanh_derivs(out[0])
    return (_unary_vjp(G, J, s, s2, s3),)


def exp_fwd(J):
    e = np.exp(J[0])
    return _unary_fwd(J, e, e, e)


def exp_vjp(G, out, J):
    e = out[0]
    return (_unary_vjp(G, J, e, e, e),)


def reciprocal_fwd(J):
    r = 1.0 / J[0]
    return _unary_fwd(J, r, -r * r, 2.0 * r * r * r)


def reciprocal_vjp(G, out, J):
    r = out[0]
    r2 = r * r
    return (_unary_vjp(G, J, -r2, 2.0 * r2 * r, -6.0 * r2 * r2),)


def mul_fwd(U, V):
    K = U.shape[0]
    out = np.empty(np.broadcast_shapes(U.shape, V.shape))
    out[0] = U[0] * V[0]
    if K >= 3:
        out[1] = U[1] * V[0] + U[0] * V[1]
        out[2] = U[2] * V[0] + U[0] * V[2]
    if K == 6:
        out[3] = U[3] * V[0] + 2.0 * U[1] * V[1] + U[0] * V[3]
        out[4] = U[4] * V[0] + 2.0 * U[2] * V[2] + U[0] * V[4]
        out[5] = U[5] * V[0] + U[1] * V[2] + U[2] * V[1] + U[0] * V[5]
    return out


def _mul_cotangent(G, V):
    K = G.shape[0]
    gU = np.empty(G.shape)
    gU[0] = sum(G[c] * V[c] for c in range(K))
    if K >= 3:
        gU[1] = G[1] * V[0]
        gU[2] = G[2] * V[0]
    if K == 6:
        gU[1] += 2.0 * G[3] * V[1] + G[5] * V[2]
        gU[2] += 2.0 * G[4] * V[2] + G[5] * V[1]
        gU[3] = G[3] * V[0]
        gU[4] = G[4] * V[0]
        gU[5] = G[5] * V[0]
    return gU


def mul_vjp(G, out, U, V):
    return _mul_cotangent(G, V), _mul_cotangent(G, U)


# BLAS picks kernels by matrix shape, and different kernels round differently.
# Multiplying in blocks of one fixed row count makes every row's result a
# function of that row alone, so a point evaluates identically in any batch.
ROW_BLOCK = 768


def rowwise_matmul(A, B):
    """``A @ B`` for 2-D ``A`` with results independent of the other rows."""
    m = A.shape[0]
    out = np.empty((m, B.shape[1]))
    full = m - m % ROW_BLOCK
    for i in range(0, full, ROW_BLOCK):
        np.matmul(A[i:i + ROW_BLOCK], B, out=out[i:i + ROW_BLOCK])
    if full < m:
        pad = np.zeros((ROW_BLOCK, A.shape[1]))
        pad[: m - full] = A[full:]
        out[full:] = (pad @ B)[: m - full]
    return out


def affine_fwd(J, W, b):
    """Linear layer on a stacked jet.  J: (K, ..., n_in), W: (n_out, n_in)."""
    n_out, n_in = W.shape
    A = np.ascontiguousarray(J).reshape(-1, n_in)
    out = rowwise_matmul(A, np.ascontiguousarray(W.T)).reshape(J.shape[:-1] + (n_out,))
    out[0] += b
    return out


def affine_vjp(G, out, J, W, b):
    n_out, n_in = W.shape
    gJ = G @ W
    gW = G.reshape(-1, n_out).T @ J.reshape(-1, n_in)
    gb = G[0].reshape(-1, n_out).sum(axis=0)
    return gJ, gW, gb


stacked_tanh = ad.primitive("jet_tanh", tanh_fwd, tanh_vjp)
stacked_exp = ad.primitive("jet_exp", exp_fwd, exp_vjp)
stacked_reciprocal = ad.primitive("jet_reciprocal", reciprocal_fwd, reciprocal_vjp)
stacked_mul = ad.primitive("jet_mul", mul_fwd, mul_vjp)
stacked_affine = ad.primitive("jet_affine", affine_fwd, affine_vjp)


# ---------------------------------------------------------------------------
# Jet2-level operations


def _is_scalar(u: Jet2) -> bool:
    return all(c is None or np.ndim(c) == 0 for c in u.as_tuple())


def _apply(kernel, *jets: Jet2) -> Jet2:
    """Run a stacked kernel on Jet2 operands (scalars get a length-1 axis)."""
    scalar = all(_is_scalar(j) for j in jets)
    arrays = [j.stacked() for j in jets]
    if scalar:
        arrays = [a[:, None] for a in arrays]
    out = kernel(*arrays)
    if scalar:
        return Jet2(*(float(c) for c in out[:, 0]), *[None] * (6 - out.shape[0]))
    return Jet2.from_stacked(out)


def jet_add(u: Jet2, v: Jet2) -> Jet2:
    return Jet2(*(a + b for a, b in zip(u.as_tuple(), v.as_tuple())))


def jet_scale(u: Jet2, c: float) -> Jet2:
    return Jet2(*(None if a is None else c * a for a in u.as_tuple()))


def jet_mul(u: Jet2, v: Jet2) -> Jet2:
    return _apply(mul_fwd, u, v)


def jet_tanh(u: Jet2) -> Jet2:
    return _apply(tanh_fwd, u)


def jet_exp(u: Jet2) -> Jet2:
    return _apply(exp_fwd, u)


def jet_reciprocal(u: Jet2) -> Jet2:
    return _apply(reciprocal_fwd, u)


def jet_affine(W, b, u: list[Jet2]) -> list[Jet2]:
    """Apply ``W @ u + b`` to a vector of jets; ``b`` only touches values."""
    W = np.atleast_2d(np.asarray(W, dtype=np.float64))
    b = np.atleast_1d(np.asarray(b, dtype=np.float64))
    if W.shape[1] != len(u) or W.shape[0] != b.shape[0]:
        raise ValueError(
            f"dimension mismatch: W {W.shape}, b {b.shape}, {len(u)} input jets"
        )
    scalar = all(_is_scalar(j) for j in u)
    J = np.stack([j.stacked() for j in u], axis=-1)
    out = affine_fwd(J, W, b)
    if scalar:
        pad = [None] * (6 - out.shape[0])
        return [Jet2(*(float(c) for c in out[:, i]), *pad) for i in range(W.shape[0])]
    return [Jet2.from_stacked(out[..., i]) for i in range(W.shape[0])]


def jet_components(u: Jet2) -> dict:
    return {f.name: getattr(u, f.name) for f in fields(u)}
