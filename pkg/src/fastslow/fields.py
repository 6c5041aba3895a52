"""Vector fields of the fast-slow network and its reduced phase dynamics.

The full system in slow time is

    d theta_i / dt = omega_i + (1/N) sum_j a_ij gamma(theta_j - theta_i)
    d a_ij / dt    = (-a_ij + target(theta_i, theta_j)) / epsilon

The weight equation relaxes each a_ij toward ``target(theta_i, theta_j)``
on the fast time scale.  Freezing the phases gives the layer dynamics,
whose equilibrium surface is the matrix ``critical_weights(theta)``.
Substituting that surface (plus its first-order correction in epsilon)
into the phase equation produces closed phase-only fields, implemented
here as :class:`ReducedField`.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .model import (
    ContractError,
    FloatArray,
    FullState,
    ModelParams,
    require_first_order,
)


def _check_shapes(params: ModelParams, theta, weights=None):
    n = params.n_nodes
    theta = np.asarray(theta, dtype=float)
    if theta.shape != (n,):
        raise ContractError(f"theta must have shape ({n},), got {theta.shape}")
    if weights is None:
        return theta
    weights = np.asarray(weights, dtype=float)
    if weights.shape != (n, n):
        raise ContractError(
            f"weights must have shape ({n}, {n}), got {weights.shape}")
    return theta, weights


def pair_differences(theta: FloatArray) -> FloatArray:
    """Matrix of phase differences with entry (i, j) = theta_j - theta_i."""
    theta = np.asarray(theta, dtype=float)
    return theta[None, :] - theta[:, None]


def phase_rhs(params: ModelParams, coupling, theta, weights) -> FloatArray:
    """Slow equation right-hand side.

    Component i is omega_i + (1/N) sum_j weights[i, j] * gamma(theta_j - theta_i).
    The sum runs over every j including j = i.
    """
    theta, weights = _check_shapes(params, theta, weights)
    g = coupling.gamma(pair_differences(theta))
    return params.omega + (weights * g).sum(axis=1) / params.n_nodes


def weight_rhs(coupling, theta, weights) -> FloatArray:
    """Adaptation right-hand side, entry (i, j) = -a_ij + target(theta_i, theta_j).

    This is the raw adaptation field, not divided by epsilon.
    """
    theta = np.asarray(theta, dtype=float)
    weights = np.asarray(weights, dtype=float)
    n = theta.shape[0]
    if weights.shape != (n, n):
        raise ContractError(
            f"weights must have shape ({n}, {n}), got {weights.shape}")
    return -weights + coupling.target(theta[:, None], theta[None, :])


def layer_rhs(coupling, theta_frozen, weights) -> FloatArray:
    """Fast-time weight field with the phases held fixed.

    Identical to :func:`weight_rhs`; the separate name marks the frozen-phase
    reading where this is the full right-hand side in fast time.
    """
    return weight_rhs(coupling, theta_frozen, weights)


def full_rhs(params: ModelParams, coupling, state: FullState):
    """Both time derivatives of the full system in slow time.

    Returns (dtheta, dweights) with dweights = weight_rhs / epsilon.
    """
    dtheta = phase_rhs(params, coupling, state.theta, state.weights)
    dweights = weight_rhs(coupling, state.theta, state.weights) / params.epsilon
    return dtheta, dweights


def critical_weights(coupling, theta) -> FloatArray:
    """Equilibrium weight matrix of the layer dynamics, entry (i, j) =
    target(theta_i, theta_j)."""
    theta = np.asarray(theta, dtype=float)
    return np.asarray(coupling.target(theta[:, None], theta[None, :]), dtype=float)


def weight_correction(params: ModelParams, coupling, theta) -> FloatArray:
    """First-order (in epsilon) correction to the equilibrium weights.

    Entry (i, j) is
        - target_du(theta_i, theta_j) * f_i - target_dv(theta_i, theta_j) * f_j
    where f = phase_rhs evaluated on the equilibrium surface.  The correction
    accounts for the slow drift of the phases pulling the weights slightly
    off the instantaneous equilibrium.
    """
    require_first_order(coupling)
    theta = _check_shapes(params, theta)
    f = phase_rhs(params, coupling, theta, critical_weights(coupling, theta))
    du = coupling.target_du(theta[:, None], theta[None, :])
    dv = coupling.target_dv(theta[:, None], theta[None, :])
    return -(du * f[:, None] + dv * f[None, :])


def pair_correction(params: ModelParams, coupling, i: int, j: int, theta) -> float:
    """Frequency-driven two-node term of the corrected reduced field.

    Value: -gamma(theta_j - theta_i) * (target_du(theta_i, theta_j) * omega_i
    + target_dv(theta_i, theta_j) * omega_j).  Scaled by epsilon/N when summed
    into the field.
    """
    require_first_order(coupling)
    theta = _check_shapes(params, theta)
    n = params.n_nodes
    if not (0 <= i < n and 0 <= j < n):
        raise ContractError(f"indices ({i}, {j}) out of range for {n} nodes")
    ti, tj = theta[i], theta[j]
    return float(-coupling.gamma(tj - ti)
                 * (coupling.target_du(ti, tj) * params.omega[i]
                    + coupling.target_dv(ti, tj) * params.omega[j]))


def triplet_interaction(coupling, i: int, j: int, k: int, theta) -> float:
    """Three-node term of the corrected reduced field.

    Value:
        - gamma(theta_j - theta_i) * target_du(theta_i, theta_j)
            * target(theta_i, theta_k) * gamma(theta_k - theta_i)
        - gamma(theta_j - theta_i) * target_dv(theta_i, theta_j)
            * target(theta_j, theta_k) * gamma(theta_k - theta_j)

    Equal indices are permitted; the double sum in the reduced field runs
    over all pairs (j, k) and the diagonal terms are kept as written.
    """
    require_first_order(coupling)
    theta = np.asarray(theta, dtype=float)
    n = theta.shape[0]
    if not (0 <= i < n and 0 <= j < n and 0 <= k < n):
        raise ContractError(f"indices ({i}, {j}, {k}) out of range for {n} nodes")
    ti, tj, tk = theta[i], theta[j], theta[k]
    g_ji = coupling.gamma(tj - ti)
    first = g_ji * coupling.target_du(ti, tj) * coupling.target(ti, tk) \
        * coupling.gamma(tk - ti)
    second = g_ji * coupling.target_dv(ti, tj) * coupling.target(tj, tk) \
        * coupling.gamma(tk - tj)
    return float(-first - second)


@dataclass(frozen=True)
class ReducedField:
    """Phase-only vector field obtained by substituting the (corrected)
    equilibrium weight surface into the phase equation.

    order 0: component i = omega_i + (1/N) sum_j target(theta_i, theta_j)
             * gamma(theta_j - theta_i).
    order 1: order-0 value plus epsilon/N times the pair-correction sum and
             epsilon/N^2 times the triplet-interaction double sum.

    The field is an explicit truncation; terms beyond first order in epsilon
    are dropped by definition.
    """

    order: int
    params: ModelParams
    coupling: object

    def __post_init__(self):
        if self.order not in (0, 1):
            raise ContractError(f"order must be 0 or 1, got {self.order}")
        if self.order == 1:
            require_first_order(self.coupling)

    @property
    def n_nodes(self) -> int:
        return self.params.n_nodes

    def __call__(self, theta) -> FloatArray:
        theta = _check_shapes(self.params, theta)
        c = self.coupling
        n = self.params.n_nodes
        eps = self.params.epsilon
        w0 = critical_weights(c, theta)
        diffs = pair_differences(theta)
        g = np.asarray(c.gamma(diffs), dtype=float)
        base = self.params.omega + (w0 * g).sum(axis=1) / n
        if self.order == 0:
            return base
        du = c.target_du(theta[:, None], theta[None, :])
        dv = c.target_dv(theta[:, None], theta[None, :])
        om = self.params.omega
        pair_sum = (-g * (du * om[:, None] + dv * om[None, :])).sum(axis=1)
        # s_i = sum_k target(theta_i, theta_k) gamma(theta_k - theta_i) is the
        # inner sum shared by both triplet summands
        s = (w0 * g).sum(axis=1)
        triplet_sum = (-g * (du * s[:, None] + dv * s[None, :])).sum(axis=1)
        return base + (eps / n) * pair_sum + (eps / n ** 2) * triplet_sum


def reduced_rhs(field: ReducedField, theta) -> FloatArray:
    """Evaluate a reduced field, mirroring the call syntax of phase_rhs."""
    return field(theta)
