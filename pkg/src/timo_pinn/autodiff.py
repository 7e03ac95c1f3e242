"""Reverse-mode tape over numpy arrays.

A :class:`Tape` records every primitive applied to :class:`Var` operands,
together with the vector-Jacobian product of that primitive.  The reverse
sweep walks the record backwards in exact reverse order of recording, so the
accumulation order (and therefore every bit of the gradient) is fixed.

Primitives are plain numpy functions wrapped with :func:`primitive`; called
on ordinary arrays they just compute, called with at least one ``Var`` they
record themselves.  This lets the physics code be written once and run both
on evaluated fields and on taped fields.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Any, Callable, Sequence

import numpy as np


@dataclass(frozen=True)
class Node:
    op: str
    args: tuple            # ("var", index) or ("const", value) per operand
    fwd: Callable | None   # None for leaves
    vjp: Callable | None
    value: np.ndarray


class Tape:
    def __init__(self):
        self.nodes: list[Node] = []
        self._params: list[int] = []

    def __len__(self):
        return len(self.nodes)

    def _push(self, node: Node) -> "Var":
        self.nodes.append(node)
        return Var(self, len(self.nodes) - 1)

    def parameter(self, value) -> "Var":
        """Register a differentiable leaf; gradients come back in registration order."""
        var = self._push(Node("param", (), None, None, np.asarray(value, dtype=np.float64)))
        self._params.append(var.index)
        return var

    def constant(self, value) -> "Var":
        return self._push(Node("const", (), None, None, np.asarray(value, dtype=np.float64)))

    def record(self, op: str, fwd: Callable, vjp: Callable, args: Sequence, value) -> "Var":
        spec = []
        for a in args:
            if isinstance(a, Var):
                if a.tape is not self:
                    raise ValueError("operand belongs to a different tape")
                spec.append(("var", a.index))
            else:
                spec.append(("const", a))
        return self._push(Node(op, tuple(spec), fwd, vjp, value))

    def replay(self) -> list[np.ndarray]:
        """Recompute every node from the leaves, in recording order."""
        values: list[np.ndarray] = []
        for node in self.nodes:
            if node.fwd is None:
                values.append(node.value)
            else:
                values.append(node.fwd(*_resolve(node.args, values)))
        return values

    def backward(self, loss: "Var") -> list[np.ndarray | None]:
        if not isinstance(loss, Var) or loss.tape is not self:
            raise ValueError("loss node is not recorded on this tape")
        if np.ndim(loss.value) != 0:
            raise ValueError("loss node must be a scalar")
        values = [n.value for n in self.nodes]
        grads: list[np.ndarray | None] = [None] * len(self.nodes)
        grads[loss.index] = np.ones_like(loss.value)
        for i in range(loss.index, -1, -1):
            g = grads[i]
            node = self.nodes[i]
            if g is None or node.vjp is None:
                continue
            operands = _resolve(node.args, values)
            in_grads = node.vjp(g, node.value, *operands)
            for (kind, ref), gi in zip(node.args, in_grads):
                if kind != "var" or gi is None:
                    continue
                gi = _unbroadcast(gi, np.shape(values[ref]))
                grads[ref] = gi if grads[ref] is None else grads[ref] + gi
        return grads

    def gradient(self, loss: "Var") -> np.ndarray:
        grads = self.backward(loss)
        parts = []
        for i in self._params:
            g = grads[i]
            parts.append(np.zeros(self.nodes[i].value.size) if g is None else np.ravel(g))
        return np.concatenate(parts) if parts else np.zeros(0)


def param_gradient(tape: Tape, loss: "Var") -> np.ndarray:
    """d(loss)/d(parameters), flattened in parameter registration order."""
    return tape.gradient(loss)


def _resolve(args, values):
    return [values[ref] if kind == "var" else ref for kind, ref in args]


def _unbroadcast(g, shape):
    g = np.asarray(g)
    if g.shape == shape:
        return g
    while g.ndim > len(shape):
        g = g.sum(axis=0)
    for axis, n in enumerate(shape):
        if n == 1 and g.shape[axis] != 1:
            g = g.sum(axis=axis, keepdims=True)
    return g


class Var:
    """Handle to a node on a tape."""

    __slots__ = ("tape", "index")
    __array_ufunc__ = None  # make numpy defer to the reflected operators

    def __init__(self, tape: Tape, index: int):
        self.tape = tape
        self.index = index

    @property
    def value(self) -> np.ndarray:
        return self.tape.nodes[self.index].value

    @property
    def shape(self):
        return np.shape(self.value)

    def __repr__(self):
        return f"Var(#{self.index}, {self.tape.nodes[self.index].op}, shape={self.shape})"

    def __getitem__(self, key):
        return getitem(self, key)

    def __add__(self, other):
        return add(self, other)

    def __radd__(self, other):
        return add(other, self)

    def __sub__(self, other):
        return sub(self, other)

    def __rsub__(self, other):
        return sub(other, self)

    def __mul__(self, other):
        return mul(self, other)

    def __rmul__(self, other):
        return mul(other, self)

    def __neg__(self):
        return neg(self)

    def __truediv__(self, other):
        if isinstance(other, Var):
            return mul(self, reciprocal(other))
        return mul(self, 1.0 / np.asarray(other, dtype=np.float64))

    def __pow__(self, n):
        if n != 2:
            raise NotImplementedError("only squaring is supported")
        return square(self)

    def reshape(self, *shape):
        return reshape(self, shape[0] if len(shape) == 1 else shape)

    def sum(self):
        return sum_all(self)

    def mean(self):
        return mean(self)


def value_of(x: Any):
    return x.value if isinstance(x, Var) else x


def primitive(name: str, fwd: Callable, vjp: Callable) -> Callable:
    """Wrap a numpy function so it records on a tape when handed a ``Var``.

    ``vjp(g, out, *operands)`` returns one cotangent per operand (``None``
    for operands that are not differentiated).
    """
    def apply(*args):
        tape = None
        for a in args:
            if isinstance(a, Var):
                tape = a.tape
                break
        vals = [value_of(a) for a in args]
        out = fwd(*vals)
        if tape is None:
            return out
        return tape.record(name, fwd, vjp, args, out)

    apply.__name__ = name
    apply.fwd = fwd
    apply.vjp = vjp
    return apply


add = primitive("add", np.add, lambda g, out, a, b: (g, g))
sub = primitive("sub", np.subtract, lambda g, out, a, b: (g, -g))
neg = primitive("neg", np.negative, lambda g, out, a: (-g,))
mul = primitive("mul", np.multiply, lambda g, out, a, b: (g * b, g * a))
square = primitive("square", np.square, lambda g, out, a: (2.0 * a * g,))
exp = primitive("exp", np.exp, lambda g, out, a: (g * out,))
reciprocal = primitive("reciprocal", np.reciprocal, lambda g, out, a: (-g * out * out,))
tanh = primitive("tanh", np.tanh, lambda g, out, a: (g * (1.0 - out * out),))
sum_all = primitive("sum", np.sum, lambda g, out, a: (np.broadcast_to(g, np.shape(a)),))
mean = primitive(
    "mean", np.mean, lambda g, out, a: (np.broadcast_to(g / np.size(a), np.shape(a)),)
)


def _where_vjp(g, out, mask, fill, x):
    return None, None, np.where(mask, 0.0, g)


# the mask is a constant: no gradient flows through masked entries
where = primitive("where", lambda mask, fill, x: np.where(mask, fill, x), _where_vjp)


def _getitem_vjp(g, out, a, key):
    full = np.zeros(np.shape(a))
    full[key] = g
    return full, None


getitem = primitive("getitem", lambda a, key: a[key], _getitem_vjp)
reshape = primitive(
    "reshape",
    lambda a, shape: np.reshape(a, shape),
    lambda g, out, a, shape: (np.reshape(g, np.shape(a)), None),
)


def stack_sum(terms: Sequence) -> Any:
    """Left-to-right sum; keeps accumulation order explicit."""
    total = terms[0]
    for t in terms[1:]:
        total = total + t
    return total
