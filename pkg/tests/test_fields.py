import numpy as np
import pytest

from fastslow import (
    CapabilityError,
    ContractError,
    Coupling,
    FullState,
    ModelParams,
    ReducedField,
    critical_weights,
    full_rhs,
    make_kuramoto,
    pair_correction,
    pair_differences,
    phase_rhs,
    triplet_interaction,
    weight_correction,
    weight_rhs,
)

TWO_PI = 2 * np.pi


def random_setup(seed, n=4, alpha=0.7, epsilon=0.01):
    rng = np.random.default_rng(seed)
    params = ModelParams(n_nodes=n, omega=rng.uniform(-1.0, 1.0, n),
                         epsilon=epsilon)
    coupling = make_kuramoto(alpha)
    theta = rng.uniform(0.0, TWO_PI, n)
    weights = rng.normal(size=(n, n))
    return params, coupling, theta, weights


# ---------------------------------------------------------------------------
# naive-loop oracles: every vectorized field must agree with a direct
# transcription of the sums


def naive_phase_rhs(params, coupling, theta, weights):
    n = params.n_nodes
    out = np.empty(n)
    for i in range(n):
        acc = 0.0
        for j in range(n):
            acc += weights[i, j] * coupling.gamma(theta[j] - theta[i])
        out[i] = params.omega[i] + acc / n
    return out


def naive_weight_rhs(coupling, theta, weights):
    n = theta.size
    out = np.empty((n, n))
    for i in range(n):
        for j in range(n):
            out[i, j] = -weights[i, j] + coupling.target(theta[i], theta[j])
    return out


def naive_reduced(field, theta):
    p, c = field.params, field.coupling
    n = p.n_nodes
    w0 = critical_weights(c, theta)
    out = np.empty(n)
    for i in range(n):
        base = p.omega[i]
        for j in range(n):
            base += w0[i, j] * c.gamma(theta[j] - theta[i]) / n
        if field.order == 0:
            out[i] = base
            continue
        pair_sum = 0.0
        for j in range(n):
            pair_sum += pair_correction(p, c, i, j, theta)
        trip_sum = 0.0
        for j in range(n):
            for k in range(n):
                trip_sum += triplet_interaction(c, i, j, k, theta)
        out[i] = base + p.epsilon * pair_sum / n + p.epsilon * trip_sum / n**2
    return out


@pytest.mark.parametrize("seed", [0, 1, 2])
def test_phase_rhs_matches_naive(seed):
    params, coupling, theta, weights = random_setup(seed)
    got = phase_rhs(params, coupling, theta, weights)
    want = naive_phase_rhs(params, coupling, theta, weights)
    assert np.max(np.abs(got - want)) < 1e-14


@pytest.mark.parametrize("seed", [0, 1, 2])
def test_weight_rhs_matches_naive(seed):
    params, coupling, theta, weights = random_setup(seed)
    got = weight_rhs(coupling, theta, weights)
    want = naive_weight_rhs(coupling, theta, weights)
    assert np.max(np.abs(got - want)) < 1e-14


@pytest.mark.parametrize("order", [0, 1])
@pytest.mark.parametrize("seed", [3, 4])
def test_reduced_field_matches_naive(order, seed):
    params, coupling, theta, _ = random_setup(seed, n=5)
    field = ReducedField(order=order, params=params, coupling=coupling)
    got = field(theta)
    want = naive_reduced(field, theta)
    assert np.max(np.abs(got - want)) < 1e-13


def test_phase_rhs_two_node_by_hand():
    # N=2, w = [[0, 1], [1, 0]], theta = (0, pi/2), omega = 0:
    # node 0 sees sin(pi/2)/2 = 0.5, node 1 sees sin(-pi/2)/2 = -0.5
    params = ModelParams(n_nodes=2, omega=np.zeros(2), epsilon=0.1)
    c = make_kuramoto(0.0)
    theta = np.array([0.0, np.pi / 2])
    w = np.array([[0.0, 1.0], [1.0, 0.0]])
    got = phase_rhs(params, c, theta, w)
    assert np.allclose(got, [0.5, -0.5], atol=1e-15)


def test_pair_differences_orientation():
    theta = np.array([0.0, 1.0, 3.0])
    d = pair_differences(theta)
    assert d[0, 1] == pytest.approx(1.0)
    assert d[1, 0] == pytest.approx(-1.0)
    assert d[0, 2] == pytest.approx(3.0)


def test_full_rhs_scaling_and_consistency():
    params, coupling, theta, weights = random_setup(5)
    state = FullState(theta=theta, weights=weights)
    dtheta, dweights = full_rhs(params, coupling, state)
    assert np.allclose(dtheta, phase_rhs(params, coupling, theta, weights))
    assert np.allclose(dweights * params.epsilon,
                       weight_rhs(coupling, theta, weights), atol=1e-14)


# ---------------------------------------------------------------------------
# critical surface and its first correction


def test_weight_rhs_vanishes_on_critical_surface():
    params, coupling, theta, _ = random_setup(6)
    w0 = critical_weights(coupling, theta)
    assert np.max(np.abs(weight_rhs(coupling, theta, w0))) < 1e-14


def test_critical_weights_values():
    c = make_kuramoto(0.7)
    theta = np.array([0.0, np.pi / 2])
    w0 = critical_weights(c, theta)
    assert w0[0, 0] == pytest.approx(1.7)
    assert w0[0, 1] == pytest.approx(0.7)  # cos(-pi/2) = 0
    assert w0[1, 0] == pytest.approx(0.7)


def test_weight_correction_hand_case():
    # N=2, alpha=1, omega=(1,0), theta=(0,pi/2).
    # Drift on the surface: f = (1 + 0.5*sin(pi/2)*h00? ...) worked out
    # directly: f = (1.5, -0.5); correction[0,1] =
    # -(du*f0 + dv*f1) = -(-sin(-pi/2)*1.5 + sin(-pi/2)*(-0.5)) = -2.
    params = ModelParams(n_nodes=2, omega=np.array([1.0, 0.0]), epsilon=0.01)
    c = make_kuramoto(1.0)
    theta = np.array([0.0, np.pi / 2])
    h1 = weight_correction(params, c, theta)
    assert h1[0, 1] == pytest.approx(-2.0, abs=1e-14)


def fd_weight_correction(params, coupling, theta, step=1e-6):
    """Independent oracle: minus the Jacobian of the critical surface
    contracted with the on-surface drift, each column by central FD."""
    f = phase_rhs(params, coupling, theta,
                  critical_weights(coupling, theta))
    n = theta.size
    out = np.zeros((n, n))
    for m in range(n):
        bumped = theta.copy()
        bumped[m] += step
        hi = critical_weights(coupling, bumped)
        bumped[m] -= 2 * step
        lo = critical_weights(coupling, bumped)
        out -= (hi - lo) / (2 * step) * f[m]
    return out


@pytest.mark.parametrize("seed", range(6))
def test_weight_correction_matches_fd_oracle(seed):
    params, coupling, theta, _ = random_setup(seed, n=4)
    got = weight_correction(params, coupling, theta)
    want = fd_weight_correction(params, coupling, theta)
    assert np.max(np.abs(got - want)) < 1e-6


def test_correction_term_decomposition():
    # The full corrected-surface contribution h1_ij * gamma_ij splits into
    # the frequency-driven pair term plus the mean of the triplet terms
    # over the third index; this is the identity behind
    # test_order1_equals_substitution.
    params, coupling, theta, _ = random_setup(7, n=4)
    n = params.n_nodes
    h1 = weight_correction(params, coupling, theta)
    g = coupling.gamma(pair_differences(theta))
    for i in range(n):
        for j in range(n):
            trip_mean = sum(triplet_interaction(coupling, i, j, k, theta)
                            for k in range(n)) / n
            want = pair_correction(params, coupling, i, j, theta) + trip_mean
            assert h1[i, j] * g[i, j] == pytest.approx(want, abs=1e-13)


def test_triplet_interaction_star_value():
    # theta = (0, pi/2, 0), alpha = 0.7, indices (0, 1, 2): the first
    # summand dies because gamma(theta_k - theta_i) = sin(0) = 0 and the
    # second is -(1 * (-1) * 0.7 * (-1)) = -alpha
    c = make_kuramoto(0.7)
    theta = np.array([0.0, np.pi / 2, 0.0])
    val = triplet_interaction(c, 0, 1, 2, theta)
    assert val == pytest.approx(-0.7, abs=1e-15)
    # the defining product, written out once as an anchor:
    want = -c.gamma(theta[1] - theta[0]) * c.target_du(theta[0], theta[1]) \
        * c.target(theta[0], theta[2]) * c.gamma(theta[2] - theta[0]) \
        - c.gamma(theta[1] - theta[0]) * c.target_dv(theta[0], theta[1]) \
        * c.target(theta[1], theta[2]) * c.gamma(theta[2] - theta[1])
    assert val == pytest.approx(want, abs=1e-15)


# ---------------------------------------------------------------------------
# reduced field structure


def test_order0_equals_surface_drift():
    params, coupling, theta, _ = random_setup(8, n=5)
    field = ReducedField(order=0, params=params, coupling=coupling)
    w0 = critical_weights(coupling, theta)
    assert np.array_equal(field(theta),
                          phase_rhs(params, coupling, theta, w0))


def test_order1_is_affine_in_epsilon():
    base, coupling, theta, _ = random_setup(9, n=5)
    import dataclasses
    f0 = ReducedField(order=0, params=base, coupling=coupling)(theta)
    eps1 = ReducedField(order=1, params=base, coupling=coupling)(theta)
    doubled = dataclasses.replace(base, epsilon=2 * base.epsilon)
    eps2 = ReducedField(order=1, params=doubled, coupling=coupling)(theta)
    ratio = (eps2 - f0) / (eps1 - f0)
    assert np.max(np.abs(ratio - 2.0)) < 1e-12


def test_order1_equals_substitution():
    """Evaluating the frozen-weight drift on the corrected surface
    reproduces the first-order field to rounding; the two routes are
    algebraically identical for this model family."""
    for seed in range(5):
        params, coupling, theta, _ = random_setup(seed, n=5)
        field = ReducedField(order=1, params=params, coupling=coupling)
        w = critical_weights(coupling, theta) \
            + params.epsilon * weight_correction(params, coupling, theta)
        direct = field(theta)
        substituted = phase_rhs(params, coupling, theta, w)
        scale = max(1.0, np.max(np.abs(direct)))
        assert np.max(np.abs(direct - substituted)) < 1e-13 * scale


def test_rotational_equivariance():
    # adding a common constant to every phase leaves both orders unchanged
    params, coupling, theta, _ = random_setup(10, n=5)
    for order in (0, 1):
        field = ReducedField(order=order, params=params, coupling=coupling)
        for shift in (0.3, np.pi, 5.0):
            assert np.max(np.abs(field(theta + shift) - field(theta))) < 1e-13


def test_order1_requires_first_order_coupling():
    params = ModelParams(n_nodes=3, omega=np.zeros(3), epsilon=0.01)
    bare = Coupling(gamma=np.sin, target=lambda u, v: np.cos(u - v))
    with pytest.raises(CapabilityError):
        ReducedField(order=1, params=params, coupling=bare)
    # order 0 never needs derivatives
    field = ReducedField(order=0, params=params, coupling=bare)
    assert field(np.zeros(3)).shape == (3,)


def test_reduced_field_rejects_bad_order():
    params = ModelParams(n_nodes=3, omega=np.zeros(3), epsilon=0.01)
    with pytest.raises(ContractError):
        ReducedField(order=2, params=params, coupling=make_kuramoto(0.1))


def test_field_rejects_wrong_shape():
    params = ModelParams(n_nodes=3, omega=np.zeros(3), epsilon=0.01)
    field = ReducedField(order=0, params=params, coupling=make_kuramoto(0.1))
    with pytest.raises(ContractError):
        field(np.zeros(4))
