"""Mixed-derivative certification that a phase field is genuinely nonpairwise.

A field whose every component splits into two-node functions has vanishing
mixed second derivatives d^2 F_i / (d theta_j d theta_k) for pairwise
distinct (i, j, k).  A single nonzero mixed derivative therefore certifies
that no pairwise decomposition exists.  The converse is false, so the
negative outcome is reported as absence of evidence, never as a proof of
pairwiseness.

Two evaluation routes are kept deliberately separate: a 4-point central
finite-difference stencil applied to any callable field, and an exact
chain-rule differentiation of the triplet-interaction terms.  Tests compare
them; neither replaces the other.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .fields import ReducedField
from .model import (
    ContractError,
    FloatArray,
    require_second_order,
    wrap_phase,
)

DEFAULT_FD_STEP = 1e-3
DEFAULT_SCAN_SEED = 20240817
DEFAULT_RANDOM_POINTS = 50

DECISION_CERTIFIED = "NonpairwiseCertified"
DECISION_NO_EVIDENCE = "NoEvidence"

# FD values below max(10 * measured pairwise noise floor, this) never certify
MIN_THRESHOLD = 1e-6


@dataclass(frozen=True, eq=False)
class CertificateReport:
    """Outcome of a nonpairwise-certification scan.

    ``fd_value`` is the finite-difference mixed derivative of the scanned
    field at the maximizing tuple.  ``analytic_value`` is the exact mixed
    derivative of the bare triplet double sum at the same tuple (without
    the epsilon / N^2 prefactor carried by the field); it is present only
    when the scanned field exposes coupling data of second order.
    """

    index_triple: tuple
    point: FloatArray
    fd_value: float
    analytic_value: Optional[float]
    decision: str
    fd_step: float
    threshold: float
    noise_floor: float


def mixed_second_derivative_fd(field, i: int, j: int, k: int, theta,
                               step: float = DEFAULT_FD_STEP) -> float:
    """Central 4-point estimate of d^2 field_i / (d theta_j d theta_k).

    Truncation error is O(step^2).  The indices must be pairwise distinct;
    the pairwise-vanishing statement this certificate rests on says nothing
    about repeated indices.
    """
    if len({i, j, k}) != 3:
        raise ContractError(f"indices must be pairwise distinct, got ({i}, {j}, {k})")
    if not (np.isfinite(step) and step > 0):
        raise ContractError(f"step must be > 0, got {step}")
    theta = np.asarray(theta, dtype=float)
    ej = np.zeros_like(theta)
    ek = np.zeros_like(theta)
    ej[j] = step
    ek[k] = step
    val = (field(theta + ej + ek)[i]
           - field(theta + ej - ek)[i]
           - field(theta - ej + ek)[i]
           + field(theta - ej - ek)[i])
    return float(val) / (4.0 * step * step)


def _mixed_derivative_of_triplet(coupling, a: float, b: float, d: float) -> float:
    """Exact d^2/(db dd) of the triplet interaction with phases (a, b, d)
    in the (first, second, third) slots.

    The interaction is
        t = - gamma(b - a) * target_du(a, b) * target(a, d) * gamma(d - a)
            - gamma(b - a) * target_dv(a, b) * target(b, d) * gamma(d - b)
    and both factors in each product depend on at most one of (b, d) except
    the final target * gamma pair in the second summand, which needs the
    product rule in both variables.
    """
    c = coupling
    g_ba = c.gamma(b - a)
    g1_ba = c.gamma_d1(b - a)
    # first summand: (b-dependent prefix) * (d-dependent suffix)
    d_prefix_db = g1_ba * c.target_du(a, b) + g_ba * c.target_duv(a, b)
    d_suffix_dd = c.target_dv(a, d) * c.gamma(d - a) \
        + c.target(a, d) * c.gamma_d1(d - a)
    first = -d_prefix_db * d_suffix_dd
    # second summand: suffix target(b, d) * gamma(d - b) depends on both
    suffix_dd = c.target_dv(b, d) * c.gamma(d - b) \
        + c.target(b, d) * c.gamma_d1(d - b)
    suffix_dd_db = (c.target_duv(b, d) * c.gamma(d - b)
                    - c.target_dv(b, d) * c.gamma_d1(d - b)
                    + c.target_du(b, d) * c.gamma_d1(d - b)
                    - c.target(b, d) * c.gamma_d2(d - b))
    second = -(g1_ba * c.target_dv(a, b) * suffix_dd
               + g_ba * c.target_dvv(a, b) * suffix_dd
               + g_ba * c.target_dv(a, b) * suffix_dd_db)
    return float(first + second)


def triplet_mixed_derivative(coupling, i: int, j: int, k: int, theta) -> float:
    """Exact mixed derivative d^2/(d theta_j d theta_k) of the sum of the
    two triplet interactions with node i first and (j, k) in either order.

    Only those two summands of the full double sum survive the mixed
    derivative when i, j, k are pairwise distinct: every other term misses
    one of the two differentiation variables.  Multiply by epsilon / N^2
    to obtain the corresponding contribution at field level.
    """
    if len({i, j, k}) != 3:
        raise ContractError(f"indices must be pairwise distinct, got ({i}, {j}, {k})")
    require_second_order(coupling)
    theta = np.asarray(theta, dtype=float)
    n = theta.shape[0]
    if not (0 <= i < n and 0 <= j < n and 0 <= k < n):
        raise ContractError(f"indices ({i}, {j}, {k}) out of range for {n} nodes")
    direct = _mixed_derivative_of_triplet(coupling, theta[i], theta[j], theta[k])
    swapped = _mixed_derivative_of_triplet(coupling, theta[i], theta[k], theta[j])
    return direct + swapped


def anchor_point(n_nodes: int) -> FloatArray:
    """Scan anchor: second phase at pi/2, all others at 0.

    At this point, with Kuramoto coupling and the triple (0, 1, 2), the
    analytic mixed derivative collapses to -alpha, which makes it a
    guaranteed hit for the scan whenever alpha is away from zero.
    """
    if n_nodes < 3:
        raise ContractError(f"anchor point needs >= 3 nodes, got {n_nodes}")
    p = np.zeros(n_nodes)
    p[1] = np.pi / 2.0
    return p


def default_scan_points(n_nodes: int, seed: int = DEFAULT_SCAN_SEED,
                        n_random: int = DEFAULT_RANDOM_POINTS) -> list:
    """Anchor point plus seeded uniform random phase vectors."""
    rng = np.random.default_rng(seed)
    points = [anchor_point(n_nodes)]
    for _ in range(n_random):
        points.append(rng.uniform(0.0, 2.0 * np.pi, n_nodes))
    return points


def scan_mixed_derivatives(field, points: Sequence, triples=None,
                           fd_step: float = DEFAULT_FD_STEP):
    """FD mixed derivatives of every (triple, point) candidate.

    Returns a list of rows (i, j, k, point_index, value), ordered
    lexicographically in (i, j, k, point_index).  That fixed order makes
    the downstream argmax tie-breaking deterministic.
    """
    n = field.n_nodes
    if triples is None:
        triples = list(itertools.permutations(range(n), 3))
    rows = []
    for (i, j, k) in triples:
        for g, theta in enumerate(points):
            value = mixed_second_derivative_fd(field, i, j, k, theta, fd_step)
            rows.append((i, j, k, g, value))
    return rows


def _pairwise_reference(field):
    """A field from the same family that is pairwise by construction, used
    to measure the FD noise floor.  None when no such companion exists."""
    if isinstance(field, ReducedField):
        if field.order == 0:
            return field
        return ReducedField(order=0, params=field.params, coupling=field.coupling)
    if isinstance(field, PushforwardField):
        ref = _pairwise_reference(field.base)
        if ref is None:
            return None
        return PushforwardField(base=ref, permutation=field.permutation,
                                shifts=field.shifts)
    return None


def certify_nonpairwise(field, points=None, triples=None,
                        fd_step: float = DEFAULT_FD_STEP,
                        noise_field=None,
                        scan_seed: int = DEFAULT_SCAN_SEED,
                        n_random_points: int = DEFAULT_RANDOM_POINTS
                        ) -> CertificateReport:
    """Scan (triple, point) candidates and decide whether the field is
    certified nonpairwise.

    The decision threshold is max(10 * noise_floor, 1e-6), where the noise
    floor is the largest |FD value| of the same scan applied to a pairwise
    reference field (the uncorrected member of the family, or an explicit
    ``noise_field``).  Self-calibration means an order-0 field can never
    certify itself, which is the honest outcome for a pairwise field.

    Returns the report at the maximizer of |FD value|; ties resolve to the
    lexicographically first (i, j, k, point index).
    """
    n = field.n_nodes
    if n < 3:
        raise ContractError(
            f"certification needs at least 3 nodes, got {n}")
    if points is None:
        points = default_scan_points(n, seed=scan_seed, n_random=n_random_points)
    points = [np.asarray(p, dtype=float) for p in points]
    if not points:
        raise ContractError("scan needs at least one point")

    rows = scan_mixed_derivatives(field, points, triples, fd_step)
    best = rows[0]
    for row in rows[1:]:
        if abs(row[4]) > abs(best[4]):
            best = row

    reference = noise_field if noise_field is not None else _pairwise_reference(field)
    if reference is not None and reference is not field:
        ref_rows = scan_mixed_derivatives(reference, points, triples, fd_step)
        noise_floor = max(abs(r[4]) for r in ref_rows)
    elif reference is field:
        noise_floor = max(abs(r[4]) for r in rows)
    else:
        noise_floor = 0.0
    threshold = max(10.0 * noise_floor, MIN_THRESHOLD)

    i, j, k, g, value = best
    decision = DECISION_CERTIFIED if abs(value) > threshold else DECISION_NO_EVIDENCE

    analytic = None
    if isinstance(field, ReducedField) and field.order == 1:
        coupling = field.coupling
        if hasattr(coupling, "has_second_order") and coupling.has_second_order():
            analytic = triplet_mixed_derivative(coupling, i, j, k, points[g])

    return CertificateReport(
        index_triple=(i, j, k),
        point=points[g],
        fd_value=value,
        analytic_value=analytic,
        decision=decision,
        fd_step=fd_step,
        threshold=threshold,
        noise_floor=noise_floor,
    )


def node_respecting_transform(theta, permutation, shifts) -> FloatArray:
    """Relabel nodes by a permutation and shift each phase, component i of
    the output being theta[permutation[i]] + shifts[i], canonicalized."""
    theta = np.asarray(theta, dtype=float)
    perm = _check_permutation(permutation, theta.shape[0])
    shifts = np.asarray(shifts, dtype=float)
    if shifts.shape != theta.shape:
        raise ContractError(
            f"shifts must have shape {theta.shape}, got {shifts.shape}")
    if not np.all(np.isfinite(shifts)):
        raise ContractError("shifts must be finite")
    return wrap_phase(theta[perm] + shifts)


def _check_permutation(permutation, n: int) -> np.ndarray:
    perm = np.asarray(permutation, dtype=int)
    if perm.shape != (n,) or sorted(perm.tolist()) != list(range(n)):
        raise ContractError(
            f"permutation must rearrange 0..{n - 1}, got {permutation}")
    return perm


@dataclass(frozen=True, eq=False)
class PushforwardField:
    """Image of a phase field under a shift-and-permute coordinate change.

    With y_i = theta[perm[i]] + shifts[i], component i of the pushed field
    at y equals component perm[i] of the base field at the preimage point.
    For these transforms the chain-rule factors are all 1, so mixed
    derivatives transport to relabeled indices and transformed points with
    their values unchanged.
    """

    base: object
    permutation: tuple
    shifts: tuple

    def __post_init__(self):
        perm = _check_permutation(self.permutation, self.base.n_nodes)
        object.__setattr__(self, "permutation", tuple(int(p) for p in perm))
        object.__setattr__(self, "shifts",
                           tuple(float(s) for s in self.shifts))
        if len(self.shifts) != self.base.n_nodes:
            raise ContractError("shifts length must match the node count")

    @property
    def n_nodes(self) -> int:
        return self.base.n_nodes

    def __call__(self, y) -> FloatArray:
        y = np.asarray(y, dtype=float)
        perm = np.asarray(self.permutation, dtype=int)
        inv = np.empty_like(perm)
        inv[perm] = np.arange(perm.size)
        shifts = np.asarray(self.shifts, dtype=float)
        theta = y[inv] - shifts[inv]
        return self.base(theta)[perm]


def pushforward_certificate_invariance(field, permutation, shifts, point,
                                       triple, fd_step: float = DEFAULT_FD_STEP):
    """FD mixed derivative before and after a shift-and-permute pushforward.

    ``before`` is taken at (triple, point) on the original field.  ``after``
    is taken on the pushed-forward field at the relabeled triple (inverse
    permutation applied to each index) and the transformed point.  The two
    agree up to FD tolerance.
    """
    point = np.asarray(point, dtype=float)
    i, j, k = triple
    before = mixed_second_derivative_fd(field, i, j, k, point, fd_step)
    pushed = PushforwardField(base=field, permutation=tuple(permutation),
                              shifts=tuple(shifts))
    perm = np.asarray(pushed.permutation, dtype=int)
    inv = np.empty_like(perm)
    inv[perm] = np.arange(perm.size)
    moved_point = node_respecting_transform(point, permutation, shifts)
    after = mixed_second_derivative_fd(
        pushed, int(inv[i]), int(inv[j]), int(inv[k]), moved_point, fd_step)
    return before, after
