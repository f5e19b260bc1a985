"""Individual control problem for a frozen population distribution.

For fixed ``m`` a single player faces a continuous-time MDP with rates
``Q(m)``, rewards ``r(m)`` and discount ``beta``. It is solved through the
uniformized discrete-time MDP with discount ``alpha = |Q| / (beta + |Q|)``,
where ``|Q| = max_{i,a} -Q[i, i, a]``.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np

from .errors import DegenerateDynamics, SingularSystem
from .model import ModelSpec, as_distribution, as_strategy

__all__ = [
    "DiscreteMDP",
    "OptimalitySummary",
    "uniformize",
    "policy_value",
    "discrete_policy_value",
    "solve_optimal_value",
    "optimal_action_sets",
    "q_values",
    "batch_optimal_q_values",
    "DEFAULT_TIE_TOL",
]

DEFAULT_TIE_TOL = 1e-8


@dataclass(frozen=True)
class DiscreteMDP:
    alpha: float
    transition_probs: np.ndarray  # (S, S, A), rows P[i, :, a] stochastic
    rewards: np.ndarray  # (S, A)
    uniformization_rate: float


@dataclass(frozen=True)
class OptimalitySummary:
    """Optimal value and per-state optimal action sets at one ``m``.

    The deterministic optimal set is the product ``action_sets[0] x ... x
    action_sets[S-1]``; it is enumerated only on request.
    """

    value: np.ndarray
    action_sets: tuple[tuple[int, ...], ...]
    q_values: np.ndarray  # (S, A) continuous-time r + Q V*

    @property
    def det_optimal(self) -> tuple[tuple[int, ...], ...]:
        return self.action_sets

    @property
    def num_optimal(self) -> int:
        return int(np.prod([len(o) for o in self.action_sets]))

    def strategies(self):
        """Iterate over every deterministic optimal strategy."""
        return itertools.product(*self.action_sets)

    def contains(self, actions) -> bool:
        return all(a in o for a, o in zip(actions, self.action_sets))


def _uniformize_arrays(Q: np.ndarray, r: np.ndarray, beta: float):
    S = Q.shape[0]
    norm = float(np.max(-Q[np.arange(S), np.arange(S), :]))
    if not norm > 0.0:
        raise DegenerateDynamics("all transition rates vanish; cannot uniformize")
    P = Q / norm + np.eye(S)[:, :, None]
    return norm / (beta + norm), P, r / (beta + norm), norm


def uniformize(model: ModelSpec, m) -> DiscreteMDP:
    """Equivalent discrete-time MDP at ``m``."""
    m = as_distribution(m, model.num_states)
    alpha, P, rbar, norm = _uniformize_arrays(model.rates_at(m), model.rewards_at(m), model.beta)
    return DiscreteMDP(alpha, P, rbar, norm)


def _mix(Q: np.ndarray, r: np.ndarray, pi: np.ndarray):
    return np.einsum("ija,ia->ij", Q, pi), np.einsum("ia,ia->i", r, pi)


def _solve(mat, rhs):
    try:
        out = np.linalg.solve(mat, rhs)
    except np.linalg.LinAlgError as exc:
        raise SingularSystem(str(exc)) from exc
    if not np.all(np.isfinite(out)):
        raise SingularSystem("policy evaluation produced non-finite values")
    return out


def _policy_value_arrays(Q, r, beta, pi):
    Qpi, rpi = _mix(Q, r, pi)
    return _solve(beta * np.eye(Q.shape[0]) - Qpi, rpi)


def policy_value(model: ModelSpec, m, pi) -> np.ndarray:
    """Discounted value of stationary strategy ``pi``: solves ``(beta I - Q^pi) V = r^pi``."""
    S, A = model.shape
    m = as_distribution(m, S)
    pi = as_strategy(pi, S, A)
    return _policy_value_arrays(model.rates_at(m), model.rewards_at(m), model.beta, pi)


def discrete_policy_value(mdp: DiscreteMDP, pi) -> np.ndarray:
    """Value of ``pi`` in the uniformized MDP: solves ``(I - alpha P^pi) V = rbar^pi``."""
    pi = np.asarray(pi, dtype=float)
    P, r = _mix(mdp.transition_probs, mdp.rewards, pi)
    return _solve(np.eye(len(r)) - mdp.alpha * P, r)


def _policy_iteration(Q, r, beta, tol):
    """Optimal value and a deterministic optimal policy, by policy iteration.

    Each evaluation is an exact linear solve of the uniformized system. An
    action is replaced only if it improves by more than
    ``tol * (1 - alpha) * (1 + |V_i|)``, so the error of ``V_i`` is bounded by
    ``tol * (1 + max |V|)``: relative for large values, absolute near zero.
    """
    alpha, P, rbar, _ = _uniformize_arrays(Q, r, beta)
    S, A = r.shape
    rows = np.arange(S)
    policy = np.argmax(rbar, axis=1)
    eye = np.eye(S)
    threshold = tol * (1.0 - alpha)
    for _ in range(10 * A ** min(S, 6) + 100):
        V = _solve(eye - alpha * P[rows, :, policy], rbar[rows, policy])
        qv = rbar + alpha * np.einsum("ija,j->ia", P, V)
        best = np.argmax(qv, axis=1)
        improve = qv[rows, best] - qv[rows, policy] > threshold * (1.0 + np.abs(V))
        if not improve.any():
            return V, policy
        policy = np.where(improve, best, policy)
    raise SingularSystem("policy iteration failed to terminate")


def q_values(Q: np.ndarray, r: np.ndarray, V: np.ndarray) -> np.ndarray:
    """Continuous-time action values ``r[i, a] + sum_j Q[i, j, a] V[j]``."""
    return r + np.einsum("ija,j->ia", Q, V)


def solve_optimal_value(model: ModelSpec, m, tol: float = 1e-12) -> np.ndarray:
    """Optimal value ``V*(m)`` with error at most ``tol * (1 + max |V*|)``."""
    if not tol > 0:
        raise ValueError("tol must be positive")
    m = as_distribution(m, model.num_states)
    V, _ = _policy_iteration(model.rates_at(m), model.rewards_at(m), model.beta, tol)
    return V


def _action_sets_from_q(qv: np.ndarray, tie_tol: float):
    best = qv.max(axis=1)
    band = tie_tol * (1.0 + np.abs(best))
    return tuple(tuple(int(a) for a in np.nonzero(row >= b - w)[0]) for row, b, w in zip(qv, best, band))


def _summary_arrays(Q, r, beta, tie_tol, tol=1e-12):
    V, _ = _policy_iteration(Q, r, beta, tol)
    qv = q_values(Q, r, V)
    return OptimalitySummary(V, _action_sets_from_q(qv, tie_tol), qv)


def optimal_action_sets(model: ModelSpec, m, tie_tol: float = DEFAULT_TIE_TOL) -> OptimalitySummary:
    """``V*(m)`` and the sets ``O_i(m)`` of actions within the relative tie band of the best."""
    if not tie_tol > 0:
        raise ValueError("tie_tol must be positive")
    m = as_distribution(m, model.num_states)
    return _summary_arrays(model.rates_at(m), model.rewards_at(m), model.beta, tie_tol)


def batch_optimal_q_values(model: ModelSpec, ms: np.ndarray, tol: float = 1e-12) -> np.ndarray:
    """Continuous-time action values under ``V*`` for many distributions, shape (N, S, A).

    Vectorized policy iteration; used by the grid scan of the mixed search.
    """
    Qs = model.rates_many(ms)
    rs = model.rewards_many(ms)
    N, S, _, A = Qs.shape
    diag = -Qs[:, np.arange(S), np.arange(S), :]
    norms = diag.reshape(N, -1).max(axis=1)
    if np.any(norms <= 0):
        raise DegenerateDynamics("all transition rates vanish at some grid point")
    beta = model.beta
    alpha = norms / (beta + norms)
    P = Qs / norms[:, None, None, None] + np.eye(S)[None, :, :, None]
    rbar = rs / (beta + norms)[:, None, None]
    policy = np.argmax(rbar, axis=2)
    s_idx = np.arange(S)[None, :]
    eye = np.eye(S)
    active = np.ones(N, dtype=bool)
    V = np.zeros((N, S))
    for _ in range(10 * A ** min(S, 6) + 100):
        idx = np.nonzero(active)[0]
        if not len(idx):
            break
        pol = policy[idx]
        Pd = P[idx[:, None], s_idx, :, pol]  # (n, S, S)
        rd = rbar[idx[:, None], s_idx, pol]
        Vi = np.linalg.solve(eye - alpha[idx, None, None] * Pd, rd[..., None])[..., 0]
        V[idx] = Vi
        qv = rbar[idx] + alpha[idx, None, None] * np.einsum("nija,nj->nia", P[idx], Vi)
        best = np.argmax(qv, axis=2)
        cur = np.take_along_axis(qv, pol[..., None], axis=2)[..., 0]
        gain = np.take_along_axis(qv, best[..., None], axis=2)[..., 0] - cur
        improve = gain > tol * (1.0 - alpha[idx, None]) * (1.0 + np.abs(Vi))
        policy[idx] = np.where(improve, best, pol)
        active[idx] = improve.any(axis=1)
    else:
        raise SingularSystem("batched policy iteration failed to terminate")
    return rs + np.einsum("nija,nj->nia", Qs, V)
