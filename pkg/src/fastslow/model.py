"""Domain types for adaptive phase-oscillator networks.

The state of the network is a pair (theta, a): N oscillator phases on the
torus (the slow variables) and an N x N matrix of coupling weights (the
fast variables).  A coupling is a pair of functions: ``gamma`` acts on
phase differences in the phase equation, and ``target`` is the value each
weight relaxes toward in the adaptation equation.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np
from numpy.typing import NDArray

FloatArray = NDArray[np.float64]

TWO_PI = 2.0 * np.pi


class ContractError(ValueError):
    """An argument violates a documented precondition."""


class CapabilityError(ContractError):
    """A coupling lacks derivative data required by the requested operation."""


class IntegrationError(RuntimeError):
    """Numerical integration produced a non-finite state or diverged."""


class ExperimentError(RuntimeError):
    """An experiment could not produce a meaningful result from its inputs."""


def wrap_phase(x):
    """Map angles to the canonical representative in [0, 2*pi).

    Accepts scalars or arrays.  Non-finite input is rejected because a NaN
    phase silently poisons every downstream trigonometric evaluation.
    """
    x = np.asarray(x, dtype=float)
    if not np.all(np.isfinite(x)):
        raise ContractError("phase values must be finite")
    wrapped = np.mod(x, TWO_PI)
    # mod can return 2*pi itself when x is a tiny negative number
    wrapped = np.where(wrapped >= TWO_PI, wrapped - TWO_PI, wrapped)
    if wrapped.ndim == 0:
        return float(wrapped)
    return wrapped


def phase_distance(a, b) -> float:
    """Largest wrapped angular distance between two phase vectors.

    Component distance is min(|a-b| mod 2pi, 2pi - |a-b| mod 2pi); the
    vector distance is the maximum over components.  This is a metric on
    the torus.
    """
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    if a.shape != b.shape:
        raise ContractError(f"phase vectors differ in shape: {a.shape} vs {b.shape}")
    d = np.abs(a - b) % TWO_PI
    return float(np.max(np.minimum(d, TWO_PI - d))) if a.size else 0.0


@dataclass(frozen=True, eq=False)
class ModelParams:
    """Network size, natural frequencies and time-scale separation.

    Parameters
    ----------
    n_nodes : int
        Number of oscillators, at least 1.  Certificate experiments need
        at least 3 nodes; that is enforced where the certificate runs.
    omega : array of float
        Natural frequencies, radians per slow-time unit, length n_nodes.
    epsilon : float
        Time-scale separation, strictly positive.  Experiments use values
        well below 1 but the library does not cap it.
    """

    n_nodes: int
    omega: FloatArray
    epsilon: float

    def __post_init__(self):
        if self.n_nodes < 1:
            raise ContractError(f"n_nodes must be >= 1, got {self.n_nodes}")
        om = np.asarray(self.omega, dtype=float)
        if om.shape != (self.n_nodes,):
            raise ContractError(
                f"omega must have shape ({self.n_nodes},), got {om.shape}")
        if not np.all(np.isfinite(om)):
            raise ContractError("omega must be finite")
        if not (np.isfinite(self.epsilon) and self.epsilon > 0):
            raise ContractError(f"epsilon must be > 0, got {self.epsilon}")
        object.__setattr__(self, "omega", om)


@dataclass(frozen=True, eq=False)
class FullState:
    """Phases plus weight matrix, dimensions tied together."""

    theta: FloatArray
    weights: FloatArray

    def __post_init__(self):
        th = np.asarray(self.theta, dtype=float)
        w = np.asarray(self.weights, dtype=float)
        n = th.shape[0] if th.ndim == 1 else -1
        if th.ndim != 1:
            raise ContractError("theta must be a 1-d array")
        if w.shape != (n, n):
            raise ContractError(
                f"weights must have shape ({n}, {n}), got {w.shape}")
        if not np.all(np.isfinite(w)):
            raise ContractError("weights must be finite")
        object.__setattr__(self, "theta", th)
        object.__setattr__(self, "weights", w)

    @property
    def n_nodes(self) -> int:
        return self.theta.shape[0]


PhaseFn = Callable[..., object]
PairFn = Callable[..., object]


@dataclass(frozen=True)
class Coupling:
    """Evaluation contract for a coupling pair.

    ``gamma`` is the phase-difference coupling entering the phase equation;
    ``target`` is the adaptation target the weights relax toward.  Both must
    be 2*pi-periodic in every argument and broadcast elementwise over numpy
    arrays.  Derivatives are optional: supply what the intended operations
    need (first order for the corrected reduced field, full second order
    for the analytic certificate).  Derivatives may be closed form or
    finite-difference backed; either way they must be consistent with the
    function one order below.

    Naming: ``gamma_d1`` is d gamma / d phi, ``target_du`` and ``target_dv``
    are the partials in the first and second slot, and so on for second
    order.
    """

    gamma: PhaseFn
    target: PairFn
    gamma_d1: Optional[PhaseFn] = None
    gamma_d2: Optional[PhaseFn] = None
    target_du: Optional[PairFn] = None
    target_dv: Optional[PairFn] = None
    target_duu: Optional[PairFn] = None
    target_duv: Optional[PairFn] = None
    target_dvv: Optional[PairFn] = None

    def has_first_order(self) -> bool:
        return self.gamma_d1 is not None and self.target_du is not None \
            and self.target_dv is not None

    def has_second_order(self) -> bool:
        return self.has_first_order() and self.gamma_d2 is not None \
            and self.target_duv is not None and self.target_dvv is not None


def require_first_order(coupling) -> None:
    if not coupling.has_first_order():
        raise CapabilityError(
            "coupling lacks first-order derivative data "
            "(gamma_d1, target_du, target_dv)")


def require_second_order(coupling) -> None:
    if not coupling.has_second_order():
        raise CapabilityError(
            "coupling lacks second-order derivative data "
            "(gamma_d2, target_duv, target_dvv)")


@dataclass(frozen=True)
class KuramotoCoupling:
    """Adaptive Kuramoto coupling: gamma(phi) = sin(phi),
    target(u, v) = alpha + cos(u - v), all derivatives in closed form.

    Structurally interchangeable with :class:`Coupling` (bound methods in
    place of stored callables).
    """

    alpha: float

    def __post_init__(self):
        if not np.isfinite(self.alpha):
            raise ContractError(f"alpha must be finite, got {self.alpha}")

    def gamma(self, phi):
        return np.sin(phi)

    def gamma_d1(self, phi):
        return np.cos(phi)

    def gamma_d2(self, phi):
        return -np.sin(phi)

    def target(self, u, v):
        return self.alpha + np.cos(u - v)

    def target_du(self, u, v):
        return -np.sin(u - v)

    def target_dv(self, u, v):
        return np.sin(u - v)

    def target_duu(self, u, v):
        return -np.cos(u - v)

    def target_duv(self, u, v):
        return np.cos(u - v)

    def target_dvv(self, u, v):
        return -np.cos(u - v)

    def has_first_order(self) -> bool:
        return True

    def has_second_order(self) -> bool:
        return True


def make_kuramoto(alpha: float) -> KuramotoCoupling:
    """Build the adaptive Kuramoto coupling with adaptation offset alpha."""
    return KuramotoCoupling(alpha=float(alpha))
