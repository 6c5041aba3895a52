"""Fixed-step RK4 integration of the full system and the reduced fields.

The full system is stiff in the weights: their linearization about the
equilibrium surface is exactly -(1/epsilon) times the identity, so an
explicit scheme is stable for dt below roughly 2.78 * epsilon.  We enforce
the much stricter dt <= epsilon / 10 as a hard error and default to
epsilon / 20, which keeps the fast transient accurately resolved rather
than merely stable.

Phases are canonicalized only in stored snapshots.  The carried state is
left unwrapped so that stage arithmetic never crosses the branch cut.
"""

from __future__ import annotations

import io
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .fields import phase_rhs, weight_rhs
from .model import (
    ContractError,
    FloatArray,
    FullState,
    IntegrationError,
    ModelParams,
    wrap_phase,
)

MAX_DEFAULT_SAMPLES = 10_000


@dataclass(frozen=True)
class IntegrationConfig:
    """Step size, horizon and sampling stride, all in slow time."""

    dt: float
    t_end: float
    sample_every: int = 1

    def __post_init__(self):
        if not (np.isfinite(self.dt) and self.dt > 0):
            raise ContractError(f"dt must be > 0, got {self.dt}")
        if not (np.isfinite(self.t_end) and self.t_end > 0):
            raise ContractError(f"t_end must be > 0, got {self.t_end}")
        if self.dt > self.t_end:
            raise ContractError(
                f"dt={self.dt} exceeds t_end={self.t_end}")
        if int(self.sample_every) != self.sample_every or self.sample_every < 1:
            raise ContractError(
                f"sample_every must be a positive integer, got {self.sample_every}")

    @property
    def n_steps(self) -> int:
        return int(round(self.t_end / self.dt))


def default_config(epsilon: float, t_end: float, dt_factor: float = 0.05,
                   max_samples: int = MAX_DEFAULT_SAMPLES) -> IntegrationConfig:
    """Config with dt = epsilon * dt_factor and at most max_samples stored rows."""
    dt = epsilon * dt_factor
    n_steps = int(round(t_end / dt))
    sample_every = max(1, int(np.ceil(n_steps / max_samples)))
    return IntegrationConfig(dt=dt, t_end=t_end, sample_every=sample_every)


@dataclass(frozen=True, eq=False)
class Trajectory:
    """Uniformly sampled trajectory.

    ``thetas`` has one row per stored sample (phases canonical in [0, 2*pi));
    ``weights`` is the matching stack of weight matrices, or None for
    phase-only trajectories.  Times are uniform with spacing
    dt * sample_every.
    """

    times: FloatArray
    thetas: FloatArray
    weights: Optional[FloatArray] = None

    def __post_init__(self):
        t = np.asarray(self.times, dtype=float)
        if t.ndim != 1 or t.size < 2:
            raise ContractError("times must be a 1-d array with >= 2 entries")
        gaps = np.diff(t)
        if np.any(gaps <= 0):
            raise ContractError("times must be strictly increasing")
        if np.max(np.abs(gaps - gaps[0])) > 1e-12:
            raise ContractError("times must be uniformly spaced to 1e-12")
        object.__setattr__(self, "times", t)
        object.__setattr__(self, "thetas", np.asarray(self.thetas, dtype=float))
        if self.thetas.shape[0] != t.size:
            raise ContractError("thetas row count must match times")
        if self.weights is not None:
            object.__setattr__(self, "weights",
                               np.asarray(self.weights, dtype=float))
            if self.weights.shape[0] != t.size:
                raise ContractError("weights stack must match times")

    @property
    def n_samples(self) -> int:
        return self.times.size

    def final_state(self) -> FullState:
        if self.weights is None:
            raise ContractError("phase-only trajectory has no weight matrix")
        return FullState(theta=self.thetas[-1], weights=self.weights[-1])


def rk4_step(rhs, state: FloatArray, dt: float) -> FloatArray:
    """One classical Runge-Kutta step on a flat state array.

    Raises IntegrationError if any stage produces a non-finite value.
    """
    k1 = rhs(state)
    k2 = rhs(state + 0.5 * dt * k1)
    k3 = rhs(state + 0.5 * dt * k2)
    k4 = rhs(state + dt * k3)
    out = state + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
    if not np.all(np.isfinite(out)):
        raise IntegrationError("non-finite value in Runge-Kutta stage")
    return out


def _sample_times(config: IntegrationConfig) -> FloatArray:
    n_steps = config.n_steps
    stored = np.arange(0, n_steps + 1, config.sample_every)
    return stored, stored * config.dt


def integrate_full(params: ModelParams, coupling, initial: FullState,
                   config: IntegrationConfig) -> Trajectory:
    """Integrate the stiffly-scaled full system in slow time.

    Rejects dt > epsilon / 10 before taking any step; explicit RK4 on the
    fast weight relaxation is only trustworthy well inside its stability
    region.
    """
    n = params.n_nodes
    if initial.n_nodes != n:
        raise ContractError(
            f"initial state has {initial.n_nodes} nodes, params have {n}")
    # allow dt == epsilon/10 up to rounding in the division itself
    if config.dt > params.epsilon / 10.0 * (1.0 + 1e-12):
        raise ContractError(
            f"dt={config.dt} exceeds the stability guard epsilon/10 = "
            f"{params.epsilon / 10.0}")

    omega = params.omega
    eps = params.epsilon

    def rhs(flat):
        theta = flat[:n]
        w = flat[n:].reshape(n, n)
        g = coupling.gamma(theta[None, :] - theta[:, None])
        dtheta = omega + (w * g).sum(axis=1) / n
        dw = (-w + coupling.target(theta[:, None], theta[None, :])) / eps
        return np.concatenate([dtheta, dw.ravel()])

    state = np.concatenate([np.asarray(initial.theta, dtype=float),
                            np.asarray(initial.weights, dtype=float).ravel()])
    stored_steps, times = _sample_times(config)
    thetas = np.empty((times.size, n))
    weights = np.empty((times.size, n, n))
    thetas[0] = wrap_phase(state[:n])
    weights[0] = state[n:].reshape(n, n)
    out = 1
    for step in range(1, config.n_steps + 1):
        try:
            state = rk4_step(rhs, state, config.dt)
        except IntegrationError as exc:
            raise IntegrationError(
                f"full-system integration failed at t={step * config.dt:.6g} "
                f"(step {step}): {exc}") from exc
        if out < times.size and step == stored_steps[out]:
            thetas[out] = wrap_phase(state[:n])
            weights[out] = state[n:].reshape(n, n)
            out += 1
    return Trajectory(times=times, thetas=thetas, weights=weights)


def integrate_reduced(field, initial_theta, config: IntegrationConfig) -> Trajectory:
    """Integrate a phase-only reduced field.  No epsilon guard applies;
    the reduced field carries no fast relaxation."""
    theta0 = np.asarray(initial_theta, dtype=float)
    n = field.n_nodes
    if theta0.shape != (n,):
        raise ContractError(
            f"initial theta must have shape ({n},), got {theta0.shape}")

    state = theta0.copy()
    stored_steps, times = _sample_times(config)
    thetas = np.empty((times.size, n))
    thetas[0] = wrap_phase(state)
    out = 1
    for step in range(1, config.n_steps + 1):
        try:
            state = rk4_step(field, state, config.dt)
        except IntegrationError as exc:
            raise IntegrationError(
                f"reduced integration failed at t={step * config.dt:.6g} "
                f"(step {step}): {exc}") from exc
        if out < times.size and step == stored_steps[out]:
            thetas[out] = wrap_phase(state)
            out += 1
    return Trajectory(times=times, thetas=thetas)


def trajectory_to_csv(traj: Trajectory, stream) -> None:
    """Write a trajectory as CSV with 17 significant digits.

    Header: time, theta_1..theta_N, then a_1_1..a_N_N row-major when
    weights are present.
    """
    n = traj.thetas.shape[1]
    cols = ["time"] + [f"theta_{i + 1}" for i in range(n)]
    if traj.weights is not None:
        cols += [f"a_{i + 1}_{j + 1}" for i in range(n) for j in range(n)]
    stream.write(",".join(cols) + "\n")
    for row in range(traj.n_samples):
        vals = [traj.times[row]] + list(traj.thetas[row])
        if traj.weights is not None:
            vals += list(traj.weights[row].ravel())
        stream.write(",".join(f"{v:.17g}" for v in vals) + "\n")


def trajectory_csv_string(traj: Trajectory) -> str:
    buf = io.StringIO()
    trajectory_to_csv(traj, buf)
    return buf.getvalue()
