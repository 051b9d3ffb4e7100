"""Core opinion-dynamics behavior against independent oracles.

The oracles here are deliberately naive: a scalar loop for one update and
plain fixed-point iteration for the equilibrium, so any indexing or
vectorization mistake in the library shows up as a disagreement.
"""

import numpy as np
import pytest

from conftest import complete_network, random_instance
from fjattack import (
    ConvergenceError,
    FjParameters,
    InfluenceNetwork,
    OpinionTrajectory,
    ValidationError,
    closed_form_outcome,
    fj_step,
    simulate,
)


def step_oracle(params, z, pinned=(), pinned_value=1.0):
    """One update computed entry by entry in pure Python."""
    n = params.network.agent_count
    theta, s, w = params.stubbornness, params.intrinsic, params.influence
    out = []
    for i in range(n):
        if i in pinned:
            out.append(pinned_value)
            continue
        acc = 0.0
        for j in range(n):
            acc += w[i, j] * z[j]
        out.append(theta[i] * s[i] + (1.0 - theta[i]) * acc)
    return np.array(out)


def fixed_point_oracle(params, tol=1e-12, max_rounds=100_000):
    """Iterate the update map until successive states agree to tol."""
    z = np.array(params.intrinsic)
    for _ in range(max_rounds):
        nxt = step_oracle(params, z)
        if np.max(np.abs(nxt - z)) <= tol:
            return nxt
        z = nxt
    raise AssertionError("oracle iteration did not settle")


def two_agent_params():
    network = InfluenceNetwork(2, ((0, 1), (1, 0)))
    return FjParameters(
        network=network,
        intrinsic=np.array([0.0, 1.0]),
        stubbornness=np.array([0.5, 0.5]),
        influence=np.array([[0.0, 1.0], [1.0, 0.0]]),
    )


def test_step_two_agent_hand_value():
    params = two_agent_params()
    out = fj_step(params, np.array([0.0, 1.0]))
    assert np.allclose(out, [0.5, 0.5], atol=1e-15)


def test_step_full_stubbornness_returns_intrinsic():
    network, params = random_instance(11, n=6)
    stubborn = FjParameters(
        network=network,
        intrinsic=params.intrinsic,
        stubbornness=np.ones(6),
        influence=params.influence,
    )
    z = np.random.default_rng(0).uniform(0, 1, 6)
    assert np.array_equal(fj_step(stubborn, z), stubborn.intrinsic)


def test_step_pinning_overrides_update():
    params = two_agent_params()
    out = fj_step(params, np.array([0.0, 1.0]), pinned=(1,), pinned_value=1.0)
    assert np.allclose(out, [0.5, 1.0], atol=1e-15)


def test_step_matches_scalar_oracle():
    for seed in range(12):
        network, params = random_instance(seed)
        rng = np.random.default_rng(seed + 1000)
        z = rng.uniform(0, 1, network.agent_count)
        pinned = tuple(rng.choice(network.agent_count, size=1))
        got = fj_step(params, z, pinned=pinned, pinned_value=1.0)
        want = step_oracle(params, z, pinned=pinned, pinned_value=1.0)
        assert np.max(np.abs(got - want)) <= 1e-14


def test_step_stays_in_unit_box():
    for seed in range(8):
        network, params = random_instance(seed, theta_range=(0.0, 1.0))
        z = np.random.default_rng(seed).uniform(0, 1, network.agent_count)
        out = fj_step(params, z)
        assert out.min() >= 0.0 and out.max() <= 1.0


def test_step_rejects_bad_inputs():
    params = two_agent_params()
    with pytest.raises(ValidationError):
        fj_step(params, np.array([0.0, 1.0, 0.5]))
    with pytest.raises(ValidationError):
        fj_step(params, np.array([0.0, 1.5]))
    with pytest.raises(ValidationError):
        fj_step(params, np.array([0.0, 1.0]), pinned=(7,))


def test_simulate_two_agent_limit():
    trajectory = simulate(two_agent_params(), np.array([0.0, 1.0]), 200)
    assert np.max(np.abs(trajectory.values[-1] - [1 / 3, 2 / 3])) <= 1e-8


def test_simulate_full_stubbornness_rows():
    network, params = random_instance(5, n=5)
    stubborn = FjParameters(
        network=network,
        intrinsic=params.intrinsic,
        stubbornness=np.ones(5),
        influence=params.influence,
    )
    z0 = np.random.default_rng(2).uniform(0, 1, 5)
    trajectory = simulate(stubborn, z0, 4)
    assert np.array_equal(trajectory.values[0], z0)
    for row in trajectory.values[1:]:
        assert np.array_equal(row, stubborn.intrinsic)


def test_simulate_single_round_equals_one_step():
    network, params = random_instance(3)
    z0 = np.random.default_rng(3).uniform(0, 1, network.agent_count)
    trajectory = simulate(params, z0, 1)
    assert trajectory.values.shape == (2, network.agent_count)
    assert np.array_equal(trajectory.values[1], fj_step(params, z0))


def test_simulate_rejects_zero_rounds():
    params = two_agent_params()
    with pytest.raises(ValidationError):
        simulate(params, np.array([0.0, 1.0]), 0)


def test_simulate_differences_contract():
    for seed in range(6):
        network, params = random_instance(seed, theta_range=(0.1, 0.9))
        z0 = np.random.default_rng(seed).uniform(0, 1, network.agent_count)
        values = simulate(params, z0, 60).values
        gaps = np.max(np.abs(np.diff(values, axis=0)), axis=1)
        assert np.all(gaps[1:] <= gaps[:-1] + 1e-15)


def test_closed_form_two_agent():
    outcome = closed_form_outcome(two_agent_params())
    assert np.max(np.abs(outcome.fixed_point - [1 / 3, 2 / 3])) <= 1e-12
    assert abs(outcome.g - 1.0) <= 1e-12


def test_closed_form_full_stubbornness():
    network, params = random_instance(9, n=7)
    stubborn = FjParameters(
        network=network,
        intrinsic=params.intrinsic,
        stubbornness=np.ones(7),
        influence=params.influence,
    )
    outcome = closed_form_outcome(stubborn)
    assert np.allclose(outcome.fixed_point, stubborn.intrinsic, atol=1e-12)
    assert abs(outcome.g - stubborn.intrinsic.sum()) <= 1e-12


def test_closed_form_matches_iteration_oracle():
    for seed in range(6):
        network, params = random_instance(seed, theta_range=(0.15, 0.9))
        outcome = closed_form_outcome(params)
        oracle = fixed_point_oracle(params)
        assert np.max(np.abs(outcome.fixed_point - oracle)) <= 1e-10
        assert 0.0 <= outcome.g <= network.agent_count


def test_closed_form_matches_long_simulation():
    for seed in range(10):
        network, params = random_instance(seed)
        outcome = closed_form_outcome(params)
        trajectory = simulate(params, np.array(params.intrinsic), 500)
        assert abs(outcome.g - trajectory.values[-1].sum()) <= 1e-8


def test_permutation_equivariance():
    rng = np.random.default_rng(17)
    network, params = random_instance(17, n=8)
    n = network.agent_count
    perm = rng.permutation(n)
    permuted_edges = tuple((int(perm[a]), int(perm[b])) for a, b in network.edges)
    inverse = np.argsort(perm)
    permuted = FjParameters(
        network=InfluenceNetwork(n, permuted_edges),
        intrinsic=params.intrinsic[inverse],
        stubbornness=params.stubbornness[inverse],
        influence=params.influence[np.ix_(inverse, inverse)],
    )
    base = closed_form_outcome(params)
    moved = closed_form_outcome(permuted)
    assert abs(base.g - moved.g) <= 1e-10
    assert np.max(np.abs(moved.fixed_point[perm[np.arange(n)]] - base.fixed_point)) <= 1e-10


def test_network_validation():
    with pytest.raises(ValidationError):
        InfluenceNetwork(0, ())
    with pytest.raises(ValidationError):
        InfluenceNetwork(3, ((0, 0),))
    with pytest.raises(ValidationError):
        InfluenceNetwork(3, ((0, 3),))
    with pytest.raises(ValidationError):
        InfluenceNetwork(3, ((0, 1), (1, 0)))  # agent 2 has no in-neighbor


def test_network_budgets_and_degrees():
    network = complete_network(7)
    assert network.leader_budget() == 2
    assert network.out_degree(0) == 6
    assert network.target_budget(0) == 1
    star = InfluenceNetwork(4, ((0, 1), (0, 2), (0, 3), (1, 0)))
    assert star.out_degree(0) == 3
    assert star.target_budget(0) == 0
    assert star.target_budget(1) == 0
    assert sorted(star.out_neighbors(0)) == [1, 2, 3]
    assert sorted(star.in_neighbors(0)) == [1]


def test_parameters_validation():
    network = InfluenceNetwork(2, ((0, 1), (1, 0)))
    good = dict(
        network=network,
        intrinsic=np.array([0.2, 0.8]),
        stubbornness=np.array([0.5, 0.5]),
        influence=np.array([[0.0, 1.0], [1.0, 0.0]]),
    )
    FjParameters(**good)
    bad_row = dict(good, influence=np.array([[0.0, 0.9], [1.0, 0.0]]))
    with pytest.raises(ValidationError):
        FjParameters(**bad_row)
    off_support = dict(good, influence=np.array([[0.5, 0.5], [1.0, 0.0]]))
    with pytest.raises(ValidationError):
        FjParameters(**off_support)
    bad_theta = dict(good, stubbornness=np.array([0.5, 1.5]))
    with pytest.raises(ValidationError):
        FjParameters(**bad_theta)
    bad_s = dict(good, intrinsic=np.array([-0.1, 0.8]))
    with pytest.raises(ValidationError):
        FjParameters(**bad_s)


def test_parameters_zero_stubbornness_spectral_gate():
    # theta = 0 on a bidirectional pair gives spectral radius exactly 1.
    network = InfluenceNetwork(2, ((0, 1), (1, 0)))
    with pytest.raises((ValidationError, ConvergenceError)):
        FjParameters(
            network=network,
            intrinsic=np.array([0.2, 0.8]),
            stubbornness=np.zeros(2),
            influence=np.array([[0.0, 1.0], [1.0, 0.0]]),
        )


def test_trajectory_validation():
    with pytest.raises(ValidationError):
        OpinionTrajectory(rounds=0, values=np.zeros((1, 2)), pinned=())
    with pytest.raises(ValidationError):
        OpinionTrajectory(rounds=2, values=np.zeros((2, 2)), pinned=())
    with pytest.raises(ValidationError):
        OpinionTrajectory(rounds=1, values=np.full((2, 2), 1.5), pinned=())
