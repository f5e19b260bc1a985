"""Game data model: population-dependent rates and rewards.

A model has ``S`` states and ``A`` actions. For every triple ``(i, j, a)`` the
transition rate ``Q[i, j, a](m)`` is a polynomial in the population
distribution ``m``; for every pair ``(i, a)`` the reward ``r[i, a](m)`` is a
sum of polynomial terms and regularized-log terms ``coef * ln(f(m_k)) +
offset``, where ``f`` is the quadratic floor

    f(y) = y**2 / (2 delta) + delta / 2   if y <= delta
    f(y) = y                              otherwise.

All indices are 0-based in Python; the file format uses 1-based indices.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from functools import cached_property
from types import MappingProxyType
from typing import Iterable, Mapping, Sequence, Union

import numpy as np

from .errors import MalformedModel

__all__ = [
    "Monomial",
    "Polynomial",
    "PolyTerm",
    "RegLogTerm",
    "ModelSpec",
    "Violation",
    "ValidationReport",
    "regularize",
    "evaluate_rates",
    "evaluate_rewards",
    "validate_model",
    "as_distribution",
    "as_strategy",
    "deterministic_strategy",
    "is_deterministic",
    "all_deterministic_strategies",
    "simplex_vertices",
]

SIMPLEX_TOL = 1e-12
ROW_SUM_TOL = 1e-10
OFFDIAG_TOL = 1e-12
DEFAULT_DELTA = 1e-6


@dataclass(frozen=True)
class Monomial:
    """``coef * prod_k m_k ** powers[k]``."""

    coef: float
    powers: tuple[int, ...]

    def __post_init__(self):
        object.__setattr__(self, "coef", float(self.coef))
        object.__setattr__(self, "powers", tuple(int(p) for p in self.powers))

    @property
    def degree(self) -> int:
        return sum(self.powers)


@dataclass(frozen=True)
class Polynomial:
    terms: tuple[Monomial, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "terms", tuple(self.terms))

    @classmethod
    def constant(cls, value: float, num_states: int) -> "Polynomial":
        return cls((Monomial(value, (0,) * num_states),))

    @classmethod
    def linear(cls, coef: float, state: int, num_states: int) -> "Polynomial":
        """``coef * m[state]``."""
        powers = [0] * num_states
        powers[state] = 1
        return cls((Monomial(coef, tuple(powers)),))

    @property
    def degree(self) -> int:
        return max((t.degree for t in self.terms if t.coef != 0.0), default=0)

    def __call__(self, m) -> float:
        m = np.asarray(m, dtype=float)
        return float(sum(t.coef * np.prod(m ** np.array(t.powers)) for t in self.terms))

    def __neg__(self) -> "Polynomial":
        return Polynomial(tuple(Monomial(-t.coef, t.powers) for t in self.terms))

    def __add__(self, other: "Polynomial") -> "Polynomial":
        return Polynomial(self.terms + other.terms)


@dataclass(frozen=True)
class PolyTerm:
    poly: Polynomial


@dataclass(frozen=True)
class RegLogTerm:
    """``coef * ln(f(m[state])) + offset``."""

    coef: float
    state: int
    offset: float = 0.0


RewardTerm = Union[PolyTerm, RegLogTerm]


def regularize(y, delta: float):
    """The quadratic floor ``f``; increasing on [0, 1] with ``f(0) = delta / 2``."""
    y = np.asarray(y, dtype=float)
    return np.where(y <= delta, y * y / (2.0 * delta) + delta / 2.0, y)


@dataclass(frozen=True, eq=False)
class ModelSpec:
    """Immutable definition of a finite-state, finite-action mean field game.

    Use :meth:`create` to build a model with diagonal rates filled in
    automatically; the constructor takes the rate table as given.
    """

    num_states: int
    num_actions: int
    beta: float
    rates: Mapping[tuple[int, int, int], Polynomial]
    rewards: Mapping[tuple[int, int], tuple[RewardTerm, ...]]
    delta: float = DEFAULT_DELTA
    autocompleted: frozenset = field(default_factory=frozenset)
    state_names: tuple[str, ...] | None = None
    action_names: tuple[str, ...] | None = None

    def __post_init__(self):
        S, A = self.num_states, self.num_actions
        if not isinstance(S, (int, np.integer)) or S <= 1:
            raise MalformedModel(f"states must be an integer > 1, got {S!r}")
        if not isinstance(A, (int, np.integer)) or A < 1:
            raise MalformedModel(f"actions must be a positive integer, got {A!r}")
        if not 0.0 < float(self.beta) < 1.0:
            raise MalformedModel(f"beta must lie in (0, 1), got {self.beta!r}")
        if not float(self.delta) > 0.0:
            raise MalformedModel(f"delta must be positive, got {self.delta!r}")
        object.__setattr__(self, "beta", float(self.beta))
        object.__setattr__(self, "delta", float(self.delta))

        rates = {}
        for key, poly in dict(self.rates).items():
            i, j, a = (int(k) for k in key)
            if not (0 <= i < S and 0 <= j < S and 0 <= a < A):
                raise MalformedModel(f"rate index (i={i + 1}, j={j + 1}, a={a + 1}) out of range")
            self._check_poly(poly, f"rate (i={i + 1}, j={j + 1}, a={a + 1})")
            rates[(i, j, a)] = poly
        rewards = {}
        for key, terms in dict(self.rewards).items():
            i, a = (int(k) for k in key)
            if not (0 <= i < S and 0 <= a < A):
                raise MalformedModel(f"reward index (i={i + 1}, a={a + 1}) out of range")
            terms = tuple(terms)
            for term in terms:
                where = f"reward (i={i + 1}, a={a + 1})"
                if isinstance(term, PolyTerm):
                    self._check_poly(term.poly, where)
                elif isinstance(term, RegLogTerm):
                    if not 0 <= int(term.state) < S:
                        raise MalformedModel(f"{where}: reglog state_index {term.state + 1} out of range")
                else:
                    raise MalformedModel(f"{where}: unknown term {term!r}")
            rewards[(i, a)] = terms
        object.__setattr__(self, "rates", MappingProxyType(rates))
        object.__setattr__(self, "rewards", MappingProxyType(rewards))
        object.__setattr__(self, "autocompleted", frozenset(self.autocompleted))
        for name, size in (("state_names", S), ("action_names", A)):
            names = getattr(self, name)
            if names is not None:
                names = tuple(str(n) for n in names)
                if len(names) != size:
                    raise MalformedModel(f"{name} must have {size} entries")
                object.__setattr__(self, name, names)

    def __reduce__(self):
        # mapping proxies do not pickle; rebuild from plain dicts
        return (
            ModelSpec,
            (
                self.num_states,
                self.num_actions,
                self.beta,
                dict(self.rates),
                dict(self.rewards),
                self.delta,
                self.autocompleted,
                self.state_names,
                self.action_names,
            ),
        )

    def _check_poly(self, poly, where):
        if not isinstance(poly, Polynomial):
            raise MalformedModel(f"{where}: expected a Polynomial, got {type(poly).__name__}")
        for t in poly.terms:
            if len(t.powers) != self.num_states:
                raise MalformedModel(
                    f"{where}: monomial has {len(t.powers)} exponents, "
                    f"references states outside 1..{self.num_states}"
                )
            if any(p < 0 for p in t.powers):
                raise MalformedModel(f"{where}: negative exponent in {t.powers}")
            if not np.isfinite(t.coef):
                raise MalformedModel(f"{where}: non-finite coefficient")

    @classmethod
    def create(
        cls,
        num_states: int,
        num_actions: int,
        beta: float,
        rates: Mapping[tuple[int, int, int], Polynomial],
        rewards: Mapping[tuple[int, int], Sequence[RewardTerm]],
        delta: float = DEFAULT_DELTA,
        state_names=None,
        action_names=None,
    ) -> "ModelSpec":
        """Build a model, completing every omitted diagonal rate.

        A missing ``(i, i, a)`` entry becomes minus the sum of the row's
        off-diagonal polynomials, which makes the row conservative by
        construction. Completed entries are listed in ``autocompleted``.
        """
        rates = dict(rates)
        completed = set()
        for i, a in itertools.product(range(num_states), range(num_actions)):
            if (i, i, a) in rates:
                continue
            diag = Polynomial()
            for j in range(num_states):
                if j != i and (i, j, a) in rates:
                    diag = diag + (-rates[(i, j, a)])
            if diag.terms:
                rates[(i, i, a)] = diag
            completed.add((i, a))
        return cls(
            num_states,
            num_actions,
            beta,
            rates,
            {k: tuple(v) for k, v in rewards.items()},
            delta,
            frozenset(completed),
            state_names,
            action_names,
        )

    @property
    def shape(self) -> tuple[int, int]:
        return self.num_states, self.num_actions

    @cached_property
    def is_constant_dynamics(self) -> bool:
        return all(p.degree == 0 for p in self.rates.values())

    @cached_property
    def _rate_tables(self):
        S, A = self.shape
        coefs, powers, index = [], [], []
        for (i, j, a), poly in self.rates.items():
            for t in poly.terms:
                coefs.append(t.coef)
                powers.append(t.powers)
                index.append((i * S + j) * A + a)
        return _scatter_tables(coefs, powers, index, S, S * S * A)

    @cached_property
    def _reward_tables(self):
        S, A = self.shape
        coefs, powers, index = [], [], []
        log_coefs, log_states, log_index, offsets = [], [], [], np.zeros(S * A)
        for (i, a), terms in self.rewards.items():
            for term in terms:
                if isinstance(term, PolyTerm):
                    for t in term.poly.terms:
                        coefs.append(t.coef)
                        powers.append(t.powers)
                        index.append(i * A + a)
                else:
                    log_coefs.append(term.coef)
                    log_states.append(term.state)
                    log_index.append(i * A + a)
                    offsets[i * A + a] += term.offset
        poly = _scatter_tables(coefs, powers, index, S, S * A)
        log_scatter = np.zeros((len(log_coefs), S * A))
        log_scatter[np.arange(len(log_coefs)), log_index] = 1.0
        return poly, (np.array(log_coefs, dtype=float), np.array(log_states, dtype=int), log_scatter), offsets

    def rates_many(self, ms: np.ndarray) -> np.ndarray:
        """Rate tensors for a batch of distributions, shape (N, S, S, A). No validation."""
        ms = np.atleast_2d(np.asarray(ms, dtype=float))
        S, A = self.shape
        flat = _eval_monomials(ms, *self._rate_tables)
        return flat.reshape(len(ms), S, S, A)

    def rewards_many(self, ms: np.ndarray) -> np.ndarray:
        """Reward matrices for a batch of distributions, shape (N, S, A). No validation."""
        ms = np.atleast_2d(np.asarray(ms, dtype=float))
        S, A = self.shape
        poly, (lc, ls, lscatter), offsets = self._reward_tables
        flat = _eval_monomials(ms, *poly) + offsets
        if len(lc):
            flat = flat + (lc * np.log(regularize(ms[:, ls], self.delta))) @ lscatter
        return flat.reshape(len(ms), S, A)

    def rates_at(self, m) -> np.ndarray:
        return self.rates_many(m)[0]

    def rewards_at(self, m) -> np.ndarray:
        return self.rewards_many(m)[0]

    def state_label(self, i: int) -> str:
        return self.state_names[i] if self.state_names else str(i + 1)

    def action_label(self, a: int) -> str:
        return self.action_names[a] if self.action_names else str(a + 1)


def _scatter_tables(coefs, powers, index, num_states, width):
    coefs = np.array(coefs, dtype=float)
    powers = np.array(powers, dtype=float).reshape(len(coefs), num_states)
    scatter = np.zeros((len(coefs), width))
    scatter[np.arange(len(coefs)), index] = 1.0
    return coefs, powers, scatter


def _eval_monomials(ms, coefs, powers, scatter):
    if not len(coefs):
        return np.zeros((len(ms), scatter.shape[1]))
    monos = np.prod(ms[:, None, :] ** powers[None, :, :], axis=2)
    return (monos * coefs) @ scatter


# ---------------------------------------------------------------------------
# distributions and strategies


def as_distribution(m, num_states: int | None = None) -> np.ndarray:
    """Validate a population distribution and return it as a float array.

    Entries may undershoot zero by at most 1e-12; such entries are clipped.
    """
    m = np.array(m, dtype=float).reshape(-1)
    if num_states is not None and m.shape != (num_states,):
        raise ValueError(f"distribution must have {num_states} entries, got {m.shape[0]}")
    if not np.all(np.isfinite(m)):
        raise ValueError("distribution has non-finite entries")
    if m.min() < -SIMPLEX_TOL:
        raise ValueError(f"distribution has negative entry {m.min():.3g}")
    if abs(m.sum() - 1.0) > SIMPLEX_TOL:
        raise ValueError(f"distribution sums to {m.sum():.15g}, not 1")
    return np.clip(m, 0.0, None)


def deterministic_strategy(actions: Sequence[int], num_actions: int) -> np.ndarray:
    """One-hot ``S x A`` matrix for the action vector ``actions`` (0-based)."""
    actions = np.asarray(actions, dtype=int)
    if actions.min() < 0 or actions.max() >= num_actions:
        raise ValueError(f"actions {tuple(actions)} out of range for {num_actions} actions")
    pi = np.zeros((len(actions), num_actions))
    pi[np.arange(len(actions)), actions] = 1.0
    return pi


def as_strategy(pi, num_states: int, num_actions: int) -> np.ndarray:
    """Validate a stationary strategy.

    Accepts an ``S x A`` matrix of action probabilities or a length-``S``
    sequence of action indices (a deterministic strategy).
    """
    arr = np.asarray(pi)
    if arr.ndim == 1 and arr.shape == (num_states,) and np.issubdtype(arr.dtype, np.integer):
        return deterministic_strategy(arr, num_actions)
    arr = np.array(arr, dtype=float)
    if arr.shape != (num_states, num_actions):
        raise ValueError(f"strategy must have shape ({num_states}, {num_actions}), got {arr.shape}")
    if arr.min() < -SIMPLEX_TOL:
        raise ValueError("strategy has negative probabilities")
    if np.max(np.abs(arr.sum(axis=1) - 1.0)) > SIMPLEX_TOL:
        raise ValueError("strategy rows must sum to 1")
    return np.clip(arr, 0.0, None)


def is_deterministic(pi: np.ndarray, tol: float = 1e-12) -> bool:
    pi = np.asarray(pi)
    return bool(np.all(np.isclose(pi.max(axis=1), 1.0, atol=tol, rtol=0)))


def all_deterministic_strategies(num_states: int, num_actions: int) -> Iterable[tuple[int, ...]]:
    return itertools.product(range(num_actions), repeat=num_states)


def simplex_vertices(num_states: int) -> np.ndarray:
    return np.eye(num_states)


# ---------------------------------------------------------------------------
# public evaluation API


def evaluate_rates(model: ModelSpec, m) -> np.ndarray:
    """Rate tensor ``Q[i, j, a](m)`` of shape (S, S, A)."""
    return model.rates_at(as_distribution(m, model.num_states))


def evaluate_rewards(model: ModelSpec, m) -> np.ndarray:
    """Reward matrix ``r[i, a](m)`` of shape (S, A); finite on the whole simplex."""
    return model.rewards_at(as_distribution(m, model.num_states))


@dataclass(frozen=True)
class Violation:
    kind: str  # "negative off-diagonal" | "nonzero row sum"
    location: str
    m: tuple[float, ...]
    index: tuple[int, ...]  # 1-based (i, j, a) or (i, a)
    value: float

    def __str__(self):
        idx = ",".join(str(k) for k in self.index)
        return f"{self.kind} at {self.location} (Q[{idx}] = {self.value:.6g})"


@dataclass(frozen=True)
class ValidationReport:
    num_points: int
    violations: tuple[Violation, ...]
    autocompleted: tuple[tuple[int, int], ...]  # 1-based (i, a)
    worst_offdiag: float
    worst_row_sum: float

    @property
    def ok(self) -> bool:
        return not self.violations

    @property
    def worst(self) -> Violation | None:
        if not self.violations:
            return None
        return max(self.violations, key=lambda v: abs(v.value))

    def summary(self) -> str:
        lines = [
            f"checked {self.num_points} simplex points: "
            + ("pass" if self.ok else f"FAIL ({len(self.violations)} violations)"),
            f"min off-diagonal rate {self.worst_offdiag:.6g}, max |row sum| {self.worst_row_sum:.3g}",
        ]
        if self.autocompleted:
            lines.append(
                "auto-completed diagonals (i, a): " + ", ".join(f"({i},{a})" for i, a in self.autocompleted)
            )
        if self.worst is not None:
            lines.append(f"worst: {self.worst}")
        return "\n".join(lines)


def validate_model(model: ModelSpec, num_samples: int = 100, seed: int = 0) -> ValidationReport:
    """Check off-diagonal nonnegativity and zero row sums at sample points.

    The sample always contains every vertex and the barycenter; the
    remaining ``num_samples - S - 1`` points are uniform on the simplex.
    Violations are reported, never raised.
    """
    if num_samples < 1:
        raise ValueError("num_samples must be >= 1")
    S, A = model.shape
    points = [(f"vertex e_{k + 1}", np.eye(S)[k]) for k in range(S)]
    points.append(("barycenter", np.full(S, 1.0 / S)))
    rng = np.random.default_rng(seed)
    extra = max(0, num_samples - len(points))
    for n, p in enumerate(rng.dirichlet(np.ones(S), size=extra)):
        points.append((f"sample #{n + 1}", p))

    ms = np.array([p for _, p in points])
    Q = model.rates_many(ms)
    violations = []
    off = ~np.eye(S, dtype=bool)
    worst_off = float(np.min(Q[:, off, :])) if S > 1 else 0.0
    row_sums = Q.sum(axis=2)
    worst_row = float(np.max(np.abs(row_sums)))
    for n, (label, p) in enumerate(points):
        for i, j, a in zip(*np.nonzero((Q[n] < -OFFDIAG_TOL) & off[:, :, None])):
            violations.append(
                Violation("negative off-diagonal", label, tuple(p), (i + 1, j + 1, a + 1), float(Q[n, i, j, a]))
            )
        for i, a in zip(*np.nonzero(np.abs(row_sums[n]) > ROW_SUM_TOL)):
            violations.append(Violation("nonzero row sum", label, tuple(p), (i + 1, a + 1), float(row_sums[n, i, a])))
    return ValidationReport(
        len(points),
        tuple(violations),
        tuple(sorted((i + 1, a + 1) for i, a in model.autocompleted)),
        worst_off,
        worst_row,
    )
