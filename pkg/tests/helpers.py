"""Random models and independent oracles shared by the test modules."""
from __future__ import annotations

import itertools

import numpy as np
from scipy.linalg import null_space

from statmfg.ctmdp import optimal_action_sets
from statmfg.model import ModelSpec, Monomial, Polynomial, PolyTerm, RegLogTerm


def random_polynomial(rng, S, max_degree=2, n_terms=2, coef_range=(0.0, 1.0)):
    terms = []
    for _ in range(n_terms):
        powers = [0] * S
        for _ in range(rng.integers(0, max_degree + 1)):
            powers[rng.integers(S)] += 1
        terms.append(Monomial(float(rng.uniform(*coef_range)), tuple(powers)))
    return Polynomial(tuple(terms))


def random_model(rng, S=None, A=None, irreducible=True, max_degree=2, log_rewards=True) -> ModelSpec:
    """Random game with polynomial rates (nonnegative coefficients) and mixed rewards.

    With ``irreducible=True`` every off-diagonal rate has a strictly positive
    constant part, so every generator is irreducible everywhere.
    """
    S = int(S or rng.integers(2, 4))
    A = int(A or rng.integers(1, 4))
    rates = {}
    for i, j, a in itertools.product(range(S), range(S), range(A)):
        if i == j:
            continue
        base = rng.uniform(0.1, 1.0) if irreducible or rng.random() < 0.7 else 0.0
        poly = Polynomial.constant(base, S) + random_polynomial(rng, S, max_degree, 1)
        rates[(i, j, a)] = poly
    rewards = {}
    for i, a in itertools.product(range(S), range(A)):
        terms = [PolyTerm(random_polynomial(rng, S, max_degree, 2, (-2.0, 2.0)))]
        if log_rewards and rng.random() < 0.3:
            terms.append(RegLogTerm(float(rng.uniform(-1, 1)), int(rng.integers(S)), float(rng.uniform(-1, 1))))
        rewards[(i, a)] = tuple(terms)
    return ModelSpec.create(S, A, float(rng.uniform(0.1, 0.9)), rates, rewards)


def add_reward_constant(model: ModelSpec, shifts) -> ModelSpec:
    """Copy of ``model`` with constants ``shifts[(i, a)]`` added to rewards."""
    rewards = {k: tuple(v) for k, v in model.rewards.items()}
    for (i, a), kappa in shifts.items():
        rewards[(i, a)] = rewards.get((i, a), ()) + (PolyTerm(Polynomial.constant(kappa, model.num_states)),)
    return ModelSpec(
        model.num_states, model.num_actions, model.beta, dict(model.rates), rewards, model.delta, model.autocompleted
    )


def with_ties(model: ModelSpec, m, rng, fraction=0.7) -> ModelSpec:
    """Raise suboptimal rewards so that they tie exactly with the best action at ``m``.

    ``V*(m)`` is unchanged, but ``D(m)`` gains the tied actions.
    """
    opt = optimal_action_sets(model, m)
    shifts = {}
    for i in range(model.num_states):
        best = opt.q_values[i].max()
        for a in range(model.num_actions):
            if a not in opt.action_sets[i] and rng.random() < fraction:
                shifts[(i, a)] = best - opt.q_values[i, a]
    return add_reward_constant(model, shifts) if shifts else model


def random_generator(rng, S, sparsity=0.3):
    """Random irreducible conservative generator (rejection sampling on sparsity)."""
    while True:
        q = rng.uniform(0.05, 2.0, size=(S, S)) * (rng.random((S, S)) > sparsity)
        np.fill_diagonal(q, 0.0)
        np.fill_diagonal(q, -q.sum(axis=1))
        if _strongly_connected(q):
            return q


def _strongly_connected(q):
    # breadth-first search from every node, independent of the library code
    S = len(q)
    for s in range(S):
        seen, stack = {s}, [s]
        while stack:
            k = stack.pop()
            for j in np.nonzero(q[k] > 0)[0]:
                if j != k and j not in seen:
                    seen.add(j)
                    stack.append(j)
        if len(seen) < S:
            return False
    return True


def nullspace_stationary(q):
    """Stationary distribution from the null space of ``q.T`` (oracle)."""
    ns = null_space(np.asarray(q).T)
    assert ns.shape[1] == 1, "stationary distribution not unique"
    v = ns[:, 0]
    return v / v.sum()


def random_strategy(rng, S, A):
    return rng.dirichlet(np.ones(A), size=S)


def mixture_of(strategies, weights, A):
    pi = np.zeros((len(strategies[0]), A))
    for d, w in zip(strategies, weights):
        pi[np.arange(len(d)), list(d)] += w
    return pi
