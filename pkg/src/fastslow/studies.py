"""Trajectory experiments: attraction to the slow weight surface and
reduction-error scaling in epsilon.

Both studies produce fitted scalars with the fit inputs attached, so a
report can always be re-derived from its own raw data.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Optional, Sequence

import numpy as np

from .fields import ReducedField, critical_weights, weight_correction
from .integrate import IntegrationConfig, default_config, integrate_full, \
    integrate_reduced
from .model import (
    ContractError,
    ExperimentError,
    FloatArray,
    FullState,
    IntegrationError,
    ModelParams,
    phase_distance,
)

# log-log fits with r^2 below this carry the poor-fit flag
MIN_R_SQUARED = 0.98

# attraction fits use samples with distance inside these bounds; the lower
# bound keeps the fit clear of the numerical floor, the upper bound (times
# the initial distance) trims the earliest samples where the linearized
# rate has not taken over yet
ATTRACTION_WINDOW_FLOOR = 1e-8
ATTRACTION_WINDOW_CEIL_FRACTION = 0.5

# below this, reduction errors are treated as identically zero and no
# slope is fitted
DEGENERATE_ERROR_FLOOR = 1e-12


@dataclass(frozen=True, eq=False)
class SlopeFit:
    """Least-squares line through (log x, log y).

    xs must be strictly decreasing and positive (epsilon sweeps are always
    stated largest first); ys positive.  poor_fit marks r_squared below
    0.98, in which case the slope should not be quoted as an order.
    """

    xs: FloatArray
    ys: FloatArray
    slope: float
    intercept: float
    r_squared: float
    poor_fit: bool


def fit_loglog(xs, ys) -> SlopeFit:
    xs = np.asarray(xs, dtype=float)
    ys = np.asarray(ys, dtype=float)
    if xs.ndim != 1 or xs.size < 2 or xs.shape != ys.shape:
        raise ContractError("need two equally long 1-d arrays with >= 2 points")
    if np.any(xs <= 0) or np.any(ys <= 0):
        raise ContractError("log-log fit needs strictly positive data")
    if np.any(np.diff(xs) >= 0):
        raise ContractError("xs must be strictly decreasing")
    lx = np.log(xs)
    ly = np.log(ys)
    slope, intercept = np.polyfit(lx, ly, 1)
    predicted = slope * lx + intercept
    ss_res = float(np.sum((ly - predicted) ** 2))
    ss_tot = float(np.sum((ly - np.mean(ly)) ** 2))
    r_squared = 1.0 if ss_tot == 0.0 else 1.0 - ss_res / ss_tot
    return SlopeFit(xs=xs, ys=ys, slope=float(slope), intercept=float(intercept),
                    r_squared=r_squared, poor_fit=r_squared < MIN_R_SQUARED)


def distance_to_slow_manifold(params: ModelParams, coupling, state: FullState,
                              order: int) -> float:
    """Frobenius distance from the weight matrix to the equilibrium surface
    (order 0) or to the surface plus its first-order correction (order 1)."""
    if order not in (0, 1):
        raise ContractError(f"order must be 0 or 1, got {order}")
    surface = critical_weights(coupling, state.theta)
    if order == 1:
        surface = surface + params.epsilon * weight_correction(
            params, coupling, state.theta)
    return float(np.linalg.norm(state.weights - surface))


@dataclass(frozen=True, eq=False)
class AttractionReport:
    """Fitted exponential approach to the corrected weight surface.

    fitted_rate_per_fast_time is the decay exponent of the Frobenius
    distance per unit of fast time t / epsilon; the exact linearized value
    is 1.  fit_window is (first, last) fast time used; residual is the RMS
    misfit of log distance inside the window.
    """

    epsilon: float
    fitted_rate_per_fast_time: float
    fit_window: tuple
    residual: float
    n_points: int
    fast_times: FloatArray
    distances: FloatArray


def attraction_study(params: ModelParams, coupling, initial: FullState,
                     config: IntegrationConfig) -> AttractionReport:
    """Integrate the full system from off-surface initial data and fit the
    decay of the order-1 manifold distance against fast time.

    The initial distance must be at least 0.1; starting on the surface
    leaves nothing to fit.  Samples enter the fit while their distance lies
    in [1e-8, half the initial distance].  An empty window is an
    experiment error.
    """
    d0 = distance_to_slow_manifold(params, coupling, initial, order=1)
    if d0 < 0.1:
        raise ContractError(
            f"initial state must start off the surface (distance >= 0.1), "
            f"got {d0:.3g}")
    traj = integrate_full(params, coupling, initial, config)
    dists = np.empty(traj.n_samples)
    for row in range(traj.n_samples):
        state = FullState(theta=traj.thetas[row], weights=traj.weights[row])
        dists[row] = distance_to_slow_manifold(params, coupling, state, order=1)
    fast_times = traj.times / params.epsilon
    ceil = ATTRACTION_WINDOW_CEIL_FRACTION * d0
    mask = (dists >= ATTRACTION_WINDOW_FLOOR) & (dists <= ceil)
    if np.count_nonzero(mask) < 2:
        raise ExperimentError(
            "attraction fit window is empty; the trajectory either stayed "
            "near its initial distance or hit the numerical floor at once")
    s = fast_times[mask]
    logd = np.log(dists[mask])
    slope, intercept = np.polyfit(s, logd, 1)
    resid = float(np.sqrt(np.mean((logd - (slope * s + intercept)) ** 2)))
    return AttractionReport(
        epsilon=params.epsilon,
        fitted_rate_per_fast_time=float(-slope),
        fit_window=(float(s[0]), float(s[-1])),
        residual=resid,
        n_points=int(s.size),
        fast_times=fast_times,
        distances=dists,
    )


@dataclass(frozen=True, eq=False)
class ConvergenceReport:
    """Reduction errors against epsilon for both truncation orders.

    fits are None when the degenerate flag is set (all errors at machine
    level, nothing to fit; this happens for synchronized starts with zero
    frequencies).
    """

    epsilons: FloatArray
    errors_order0: FloatArray
    errors_order1: FloatArray
    fit_order0: Optional[SlopeFit]
    fit_order1: Optional[SlopeFit]
    degenerate: bool


def convergence_study(params_base: ModelParams, coupling, theta0,
                      epsilons: Sequence[float], t_end: float = 2.0,
                      dt_factor: float = 0.05,
                      max_samples: int = 2000) -> ConvergenceReport:
    """Compare full-system phases against both reduced fields across an
    epsilon sweep.

    For each epsilon the full system starts on the corrected weight surface
    (suppressing the initial fast transient up to its own higher-order
    error) and the error is the largest phase distance over the sampled
    window [0, t_end].  Requires at least 3 epsilon values, strictly
    decreasing, and dt_factor <= 0.1 so every run clears the integrator
    guard before any integration starts.
    """
    eps = np.asarray(list(epsilons), dtype=float)
    if eps.size < 3:
        raise ContractError(f"need at least 3 epsilon values, got {eps.size}")
    if np.any(eps <= 0) or np.any(np.diff(eps) >= 0):
        raise ContractError("epsilons must be positive and strictly decreasing")
    if dt_factor > 0.1:
        raise ContractError(
            f"dt_factor={dt_factor} violates the dt <= epsilon/10 guard")
    theta0 = np.asarray(theta0, dtype=float)

    errs0 = np.empty(eps.size)
    errs1 = np.empty(eps.size)
    for m, e in enumerate(eps):
        params = replace(params_base, epsilon=float(e))
        config = default_config(float(e), t_end, dt_factor, max_samples)
        w0 = critical_weights(coupling, theta0) \
            + float(e) * weight_correction(params, coupling, theta0)
        try:
            full = integrate_full(params, coupling,
                                  FullState(theta=theta0, weights=w0), config)
            red0 = integrate_reduced(
                ReducedField(order=0, params=params, coupling=coupling),
                theta0, config)
            red1 = integrate_reduced(
                ReducedField(order=1, params=params, coupling=coupling),
                theta0, config)
        except IntegrationError as exc:
            raise ExperimentError(
                f"integration failed at epsilon={e}: {exc}") from exc
        errs0[m] = max(phase_distance(full.thetas[r], red0.thetas[r])
                       for r in range(full.n_samples))
        errs1[m] = max(phase_distance(full.thetas[r], red1.thetas[r])
                       for r in range(full.n_samples))

    degenerate = bool(max(errs0.max(), errs1.max()) < DEGENERATE_ERROR_FLOOR)
    if degenerate:
        return ConvergenceReport(epsilons=eps, errors_order0=errs0,
                                 errors_order1=errs1, fit_order0=None,
                                 fit_order1=None, degenerate=True)
    return ConvergenceReport(
        epsilons=eps,
        errors_order0=errs0,
        errors_order1=errs1,
        fit_order0=fit_loglog(eps, errs0),
        fit_order1=fit_loglog(eps, errs1),
        degenerate=False,
    )
