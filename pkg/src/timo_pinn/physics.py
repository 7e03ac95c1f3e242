"""Thermoelastic Timoshenko system with second sound (Cattaneo heat flux).

    rho1 phi_tt - k (phi_x + psi)_x                          = 0
    rho2 psi_tt - b psi_xx + k (phi_x + psi) + delta theta_x + D(psi_t) = 0
    rho3 theta_t + q_x + delta psi_xt                        = 0
    tau q_t + beta q + theta_x                               = 0

on (0, 1) x (0, T).  ``D`` is the damping law selected by
:class:`DampingKind`.  All functions here accept plain floats, numpy arrays
or tape variables interchangeably.
"""
from __future__ import annotations

import enum
import math
from dataclasses import asdict, dataclass

import numpy as np

from . import autodiff as ad
from .jets import Jet2
from .network import FieldEval

SINGULAR_CUTOFF = 1e-6


class DampingKind(str, enum.Enum):
    NONE = "none"
    LINEAR = "linear"
    QUADRATIC = "quadratic"
    SINGULAR_EXP = "singular_exp"


@dataclass
class PhysicalParams:
    rho1: float = 1.0
    rho2: float = 1.0
    rho3: float = 1.0
    b: float = 1.0
    k: float = 1.0
    delta: float = 1.0
    beta: float = 1.0
    tau: float = 1.0
    mu: float = 0.0
    damping: DampingKind = DampingKind.NONE
    T: float = 1.0

    def __post_init__(self):
        self.damping = DampingKind(self.damping)
        for name in ("rho1", "rho2", "rho3", "b", "k", "delta", "beta", "tau", "T"):
            v = getattr(self, name)
            # delta = 0 decouples the heat equation; allowed for analysis only
            ok = v >= 0 if name == "delta" else v > 0
            if not (ok and math.isfinite(v)):
                raise ValueError(f"{name} must be positive and finite, got {v}")
        if not (self.mu >= 0 and math.isfinite(self.mu)):
            raise ValueError(f"mu must be nonnegative, got {self.mu}")

    def to_dict(self) -> dict:
        d = asdict(self)
        d["damping"] = self.damping.value
        return d


def stability_number(p: PhysicalParams) -> float:
    """chi; zero exactly when the undamped system decays exponentially."""
    return (p.tau - p.rho1 / (p.k * p.rho3)) * (p.rho2 / p.b - p.rho1 * p.b / p.k) - (
        p.tau * p.delta**2 * p.rho1 / (p.b * p.k * p.rho3)
    )


def damping_value(psi_t, kind: DampingKind | str, mu: float):
    """Damping contribution to the rotation equation."""
    kind = DampingKind(kind)
    if kind is DampingKind.NONE:
        return 0.0 * psi_t
    if kind is DampingKind.LINEAR:
        return mu * psi_t
    if kind is DampingKind.QUADRATIC:
        return mu * (psi_t * psi_t)
    # (mu / s) exp(-1/s^2); below the cutoff exp underflows to exactly 0
    scalar = np.ndim(ad.value_of(psi_t)) == 0 and not isinstance(psi_t, ad.Var)
    small = np.abs(ad.value_of(psi_t)) < SINGULAR_CUTOFF
    safe = ad.where(small, 1.0, psi_t)
    r = ad.reciprocal(safe)
    out = ad.where(small, 0.0, mu * r * ad.exp(-(r * r)))
    return float(out) if scalar else out


def pde_residuals(f: FieldEval, p: PhysicalParams, src=None):
    phi, psi, th, q = f.phi, f.psi, f.theta, f.q
    r1 = p.rho1 * phi.dtt - p.k * (phi.dxx + psi.dx)
    r2 = (p.rho2 * psi.dtt - p.b * psi.dxx + p.k * (phi.dx + psi.val) + p.delta * th.dx
          + damping_value(psi.dt, p.damping, p.mu))
    r3 = p.rho3 * th.dt + q.dx + p.delta * psi.dxt
    r4 = p.tau * q.dt + p.beta * q.val + th.dx
    if src is not None:
        r1, r2, r3, r4 = r1 - src[0], r2 - src[1], r3 - src[2], r4 - src[3]
    return r1, r2, r3, r4


def source_terms(x, t):
    """Forcing for the manufactured solution 4 e^t x (1 - x) (unit constants, mu = 1)."""
    e = 4.0 * np.exp(t)
    return (
        e * (-x * x + 3.0 * x + 1.0),
        e * (-3.0 * x * x - x + 4.0),
        e * (-x * x - 3.0 * x + 2.0),
        e * (-2.0 * x * x + 1.0),
    )


def exact_solution(x, t) -> FieldEval:
    e = np.exp(t)
    u = 4.0 * e * x * (1.0 - x)
    ux = 4.0 * e * (1.0 - 2.0 * x)
    uxx = -8.0 * e * np.ones_like(u)
    jet = Jet2(val=u, dx=ux, dt=u, dxx=uxx, dtt=u, dxt=ux)
    if np.ndim(u) == 0:
        jet = Jet2(*(float(c) for c in jet.as_tuple()))
    return FieldEval(jet, jet, jet, jet)


# ---------------------------------------------------------------------------
# boundary and initial data


def poly(coeffs, s):
    """Evaluate sum_i coeffs[i] s**i (an empty list is the zero function)."""
    out = 0.0 * np.asarray(s, dtype=np.float64)
    for c in reversed(list(coeffs)):
        out = out * s + c
    return out


BUMP = (0.0, 4.0, -4.0)  # 4 x (1 - x)


class BoundaryKind(str, enum.Enum):
    MIXED = "mixed"              # phi_x, psi, q
    DIRICHLET_ALL = "dirichlet"  # phi, psi, q


@dataclass
class BoundarySpec:
    """Boundary data as polynomials in t, three per end (phi-term, psi, q)."""

    kind: BoundaryKind = BoundaryKind.DIRICHLET_ALL
    left: tuple = ((), (), ())
    right: tuple = ((), (), ())

    def __post_init__(self):
        self.kind = BoundaryKind(self.kind)
        self.left = tuple(tuple(c) for c in self.left)
        self.right = tuple(tuple(c) for c in self.right)
        if len(self.left) != 3 or len(self.right) != 3:
            raise ValueError("boundary data needs three functions per endpoint")

    @property
    def order(self) -> int:
        return 1 if self.kind is BoundaryKind.MIXED else 0

    def to_dict(self) -> dict:
        return {"kind": self.kind.value, "left": [list(c) for c in self.left],
                "right": [list(c) for c in self.right]}


@dataclass
class InitialData:
    """Initial profiles as polynomials in x; default 4x(1-x) everywhere."""

    phi0: tuple = BUMP
    phi1: tuple = BUMP
    psi0: tuple = BUMP
    psi1: tuple = BUMP
    theta0: tuple = BUMP
    q0: tuple = BUMP

    def __post_init__(self):
        for name in ("phi0", "phi1", "psi0", "psi1", "theta0", "q0"):
            setattr(self, name, tuple(float(c) for c in getattr(self, name)))

    @classmethod
    def zero(cls) -> "InitialData":
        return cls((), (), (), (), (), ())

    def to_dict(self) -> dict:
        return {k: list(v) for k, v in asdict(self).items()}


def boundary_residuals(f0: FieldEval, f1: FieldEval, spec: BoundarySpec, t):
    """Per-condition deviations at x = 0 and x = 1.  theta gets no condition."""
    def terms(f, data):
        first = f.phi.dx if spec.kind is BoundaryKind.MIXED else f.phi.val
        return (first - poly(data[0], t), f.psi.val - poly(data[1], t),
                f.q.val - poly(data[2], t))

    return terms(f0, spec.left), terms(f1, spec.right)


def initial_residuals(f: FieldEval, data: InitialData, x):
    values = (
        f.phi.val - poly(data.phi0, x),
        f.psi.val - poly(data.psi0, x),
        f.theta.val - poly(data.theta0, x),
        f.q.val - poly(data.q0, x),
    )
    velocities = (f.phi.dt - poly(data.phi1, x), f.psi.dt - poly(data.psi1, x))
    return values, velocities
