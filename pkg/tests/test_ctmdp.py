import itertools
import math

import numpy as np
import pytest

from helpers import add_reward_constant, random_model
from statmfg import (
    ConsumerParams,
    CorruptionParams,
    DegenerateDynamics,
    ModelSpec,
    Polynomial,
    PolyTerm,
    batch_optimal_q_values,
    consumer_model,
    corruption_model,
    discrete_policy_value,
    optimal_action_sets,
    policy_value,
    solve_optimal_value,
    uniformize,
)
from statmfg.library import consumer_thresholds

CHANGE, STAY = 0, 1


def brute_force_value(model, m):
    """Componentwise max of ``V^d`` over all deterministic strategies, via explicit inverses."""
    S, A = model.shape
    Q, r = model.rates_at(m), model.rewards_at(m)
    best = np.full(S, -np.inf)
    for d in itertools.product(range(A), repeat=S):
        Qd = np.array([Q[i, :, d[i]] for i in range(S)])
        rd = np.array([r[i, d[i]] for i in range(S)])
        best = np.maximum(best, np.linalg.inv(model.beta * np.eye(S) - Qd) @ rd)
    return best


def test_consumer_uniformization():
    mdp = uniformize(consumer_model(ConsumerParams(b=1.0, epsilon=0.2, beta=0.5)), [0.5, 0.5])
    assert mdp.alpha == pytest.approx(2 / 3)
    assert mdp.uniformization_rate == pytest.approx(1.0)
    np.testing.assert_allclose(mdp.transition_probs[0, :, STAY], [0.8, 0.2])
    np.testing.assert_allclose(mdp.transition_probs[0, :, CHANGE], [0.0, 1.0])
    np.testing.assert_allclose(mdp.transition_probs.sum(axis=1), 1.0)


def test_uniformization_requires_some_motion():
    model = ModelSpec.create(2, 1, 0.5, {}, {})
    with pytest.raises(DegenerateDynamics):
        uniformize(model, [0.5, 0.5])
    with pytest.raises(DegenerateDynamics):
        solve_optimal_value(model, [0.5, 0.5])


def test_stay_stay_value_at_barycenter():
    model = consumer_model(ConsumerParams(c=0.5, beta=0.5))
    V = policy_value(model, [0.5, 0.5], [STAY, STAY])
    np.testing.assert_allclose(V, [math.log(0.5) / 0.5] * 2, rtol=1e-12)


def test_change_stay_value_matches_explicit_inverse():
    p = ConsumerParams(c=0.5, beta=0.5, b=1.0, epsilon=0.2)
    model = consumer_model(p)
    m = np.array([0.3, 0.7])
    Qd = np.array([[-p.b, p.b], [p.epsilon, -p.epsilon]])
    rd = np.log(m) - np.array([p.c, 0.0])
    expected = np.linalg.inv(p.beta * np.eye(2) - Qd) @ rd
    np.testing.assert_allclose(policy_value(model, m, [CHANGE, STAY]), expected, rtol=1e-12)


def test_zero_rewards_give_zero_value():
    model = corruption_model(CorruptionParams())
    base = ModelSpec.create(3, 2, 0.3, dict(model.rates), {})
    V = solve_optimal_value(base, [0.2, 0.3, 0.5])
    np.testing.assert_array_equal(V, 0.0)


def test_discrete_and_continuous_values_agree(rng):
    for _ in range(10):
        model = random_model(rng)
        S, A = model.shape
        m = rng.dirichlet(np.ones(S))
        pi = rng.dirichlet(np.ones(A), size=S)
        np.testing.assert_allclose(
            discrete_policy_value(uniformize(model, m), pi), policy_value(model, m, pi), rtol=1e-10, atol=1e-12
        )


def test_optimal_value_matches_brute_force(rng):
    for _ in range(30):
        model = random_model(rng)
        m = rng.dirichlet(np.ones(model.num_states))
        V = solve_optimal_value(model, m)
        np.testing.assert_allclose(V, brute_force_value(model, m), rtol=1e-10, atol=1e-10)


def test_consumer_optimal_value_at_barycenter():
    # at (1/2, 1/2) staying is strictly better, so V* is the stay x stay value
    model = consumer_model(ConsumerParams(c=0.5, beta=0.5))
    np.testing.assert_allclose(solve_optimal_value(model, [0.5, 0.5]), [2 * math.log(0.5)] * 2, rtol=1e-12)
    assert optimal_action_sets(model, [0.5, 0.5]).action_sets == ((STAY,), (STAY,))


def test_consumer_action_sets_around_thresholds():
    p = ConsumerParams(c=0.5)
    model = consumer_model(p)
    d1, d2 = consumer_thresholds(p)
    sets = lambda x: optimal_action_sets(model, [x, 1 - x]).action_sets
    assert sets(d1) == ((CHANGE, STAY), (STAY,))
    assert sets(d1 - 1e-6) == ((CHANGE,), (STAY,))
    assert sets(d1 + 1e-6) == ((STAY,), (STAY,))
    assert sets(d2) == ((STAY,), (CHANGE, STAY))
    assert sets(d2 + 1e-6) == ((STAY,), (CHANGE,))


def test_corruption_tie_at_threshold():
    model = corruption_model(CorruptionParams())
    at = optimal_action_sets(model, [0.3, 0.4, 0.3])
    assert at.action_sets == ((0, 1), (0, 1), (0, 1))
    assert at.num_optimal == 8
    below = optimal_action_sets(model, [0.3, 0.4 - 1e-6, 0.3 + 1e-6])
    assert below.action_sets == ((STAY,), (CHANGE,), (0, 1))
    above = optimal_action_sets(model, [0.3, 0.4 + 1e-6, 0.3 - 1e-6])
    assert above.action_sets == ((CHANGE,), (STAY,), (0, 1))
    assert above.contains((CHANGE, STAY, STAY)) and not above.contains((STAY, STAY, STAY))


def test_reward_shift_moves_value_by_kappa_over_beta(rng):
    for kappa in (-3.0, 0.5, 7.0):
        model = random_model(rng)
        S, A = model.shape
        m = rng.dirichlet(np.ones(S))
        shifted = add_reward_constant(model, {(i, a): kappa for i in range(S) for a in range(A)})
        np.testing.assert_allclose(
            solve_optimal_value(shifted, m), solve_optimal_value(model, m) + kappa / model.beta, rtol=1e-10, atol=1e-10
        )
        assert optimal_action_sets(shifted, m).action_sets == optimal_action_sets(model, m).action_sets


def test_batch_q_values_match_pointwise(rng):
    for _ in range(5):
        model = random_model(rng)
        ms = rng.dirichlet(np.ones(model.num_states), size=20)
        batch = batch_optimal_q_values(model, ms)
        for k, m in enumerate(ms):
            np.testing.assert_allclose(batch[k], optimal_action_sets(model, m).q_values, rtol=1e-9, atol=1e-9)


def test_q_values_of_optimal_actions_vanish_against_value(rng):
    # beta V*_i = max_a (r + Q V*)_i
    model = random_model(rng, S=3, A=3)
    m = rng.dirichlet(np.ones(3))
    opt = optimal_action_sets(model, m)
    np.testing.assert_allclose(opt.q_values.max(axis=1), model.beta * opt.value, rtol=1e-10, atol=1e-10)


def test_tolerances_must_be_positive():
    model = consumer_model(ConsumerParams())
    with pytest.raises(ValueError):
        solve_optimal_value(model, [0.5, 0.5], tol=0.0)
    with pytest.raises(ValueError):
        optimal_action_sets(model, [0.5, 0.5], tie_tol=-1.0)


def test_polynomial_reward_constant_model():
    rates = {(0, 1, 0): Polynomial.constant(1.0, 2), (1, 0, 0): Polynomial.constant(1.0, 2)}
    rewards = {(0, 0): (PolyTerm(Polynomial.constant(1.0, 2)),)}
    model = ModelSpec.create(2, 1, 0.5, rates, rewards)
    V = solve_optimal_value(model, [0.5, 0.5])
    # generator [[-1, 1], [1, -1]], beta 1/2: V = (beta I - Q)^{-1} (1, 0)
    np.testing.assert_allclose(V, np.linalg.solve([[1.5, -1.0], [-1.0, 1.5]], [1.0, 0.0]))
