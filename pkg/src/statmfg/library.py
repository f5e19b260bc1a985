"""Built-in example games and their closed-form solutions.

Two models are provided:

* a two-provider consumer choice game with constant dynamics and
  log-utility rewards, whose equilibria are known in closed form;
* a three-state corruption game (states C, H, R) with social-pressure
  rates, for which the optimality regions, the invariant manifold and the
  candidate equilibria are available analytically.

The reference functions are independent of the numerical solver and are
used as oracles in the test suite.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import InvalidParams
from .model import ModelSpec, Polynomial, PolyTerm, RegLogTerm

__all__ = [
    "ConsumerParams",
    "CorruptionParams",
    "ReferenceEquilibrium",
    "ConsumerReference",
    "CorruptionCandidate",
    "CorruptionReference",
    "consumer_model",
    "consumer_reference",
    "corruption_model",
    "corruption_reference",
    "CONSUMER_CASES",
]

CHANGE, STAY = 0, 1
ACTION_NAMES = ("change", "stay")


@dataclass(frozen=True)
class ConsumerParams:
    b: float = 1.0
    epsilon: float = 0.2
    beta: float = 0.5
    c: float = 0.5
    s1: float = 0.0
    s2: float = 0.0
    delta: float = 1e-6

    def __post_init__(self):
        values = [self.b, self.epsilon, self.beta, self.c, self.s1, self.s2, self.delta]
        if not all(math.isfinite(v) for v in values):
            raise InvalidParams("consumer parameters must be finite")
        if not 0.0 < self.epsilon < self.b:
            raise InvalidParams(f"need 0 < epsilon < b, got epsilon={self.epsilon}, b={self.b}")
        if not 0.0 < self.beta < 1.0:
            raise InvalidParams(f"beta must lie in (0, 1), got {self.beta}")
        if not self.c > 0.0:
            raise InvalidParams(f"c must be positive, got {self.c}")
        if not self.delta > 0.0:
            raise InvalidParams(f"delta must be positive, got {self.delta}")


@dataclass(frozen=True)
class CorruptionParams:
    b: float = 0.3
    q_inf: float = 1.0
    q_soc: float = 2.0
    r: float = 0.5
    beta: float = 0.3

    def __post_init__(self):
        for name in ("b", "q_inf", "q_soc", "r"):
            v = getattr(self, name)
            if not (math.isfinite(v) and v > 0.0):
                raise InvalidParams(f"{name} must be strictly positive, got {v}")
        if not 0.0 < self.beta < 1.0:
            raise InvalidParams(f"beta must lie in (0, 1), got {self.beta}")


# ---------------------------------------------------------------------------
# consumer choice


def consumer_model(p: ConsumerParams) -> ModelSpec:
    """Two providers, actions (change, stay), constant switching rates.

    Rewards are ``ln f_delta(m_i) + s_i`` minus ``c`` when changing.
    """
    S = 2
    rates = {}
    for i in range(S):
        j = 1 - i
        rates[(i, j, CHANGE)] = Polynomial.constant(p.b, S)
        rates[(i, j, STAY)] = Polynomial.constant(p.epsilon, S)
    rewards = {}
    for i, s in enumerate((p.s1, p.s2)):
        rewards[(i, CHANGE)] = (RegLogTerm(1.0, i, s - p.c),)
        rewards[(i, STAY)] = (RegLogTerm(1.0, i, s),)
    return ModelSpec.create(
        S, 2, p.beta, rates, rewards, delta=p.delta, state_names=("1", "2"), action_names=ACTION_NAMES
    )


@dataclass(frozen=True)
class ReferenceEquilibrium:
    m: np.ndarray
    pi: np.ndarray
    kind: str
    label: str  # e.g. "change x stay" or "mixed in state 1"


@dataclass(frozen=True)
class ConsumerReference:
    d1: float
    d2: float
    case: str  # roman numeral i..viii
    equilibria: tuple[ReferenceEquilibrium, ...]

    @property
    def num_pure(self) -> int:
        return sum(e.kind == "pure" for e in self.equilibria)

    @property
    def num_mixed(self) -> int:
        return sum(e.kind == "mixed" for e in self.equilibria)


# (d1 category, d2 category) -> case label
CONSUMER_CASES = {
    ("A", "a"): "i",
    ("A", "b"): "ii",
    ("A", "c"): "iii",
    ("B", "a"): "iv",
    ("B", "b"): "v",
    ("B", "c"): "vi",
    ("C", "b"): "vii",
    ("C", "c"): "viii",
}


def _logistic(x: float) -> float:
    if x >= 0:
        return 1.0 / (1.0 + math.exp(-x))
    e = math.exp(x)
    return e / (1.0 + e)


def consumer_thresholds(p: ConsumerParams) -> tuple[float, float]:
    """Switching thresholds ``d1 < d2`` on ``m_1``."""
    k = p.c * (p.beta + 2.0 * p.epsilon) / (p.b - p.epsilon)
    u = p.s2 - p.s1
    return _logistic(-k + u), _logistic(k + u)


def consumer_reference(p: ConsumerParams) -> ConsumerReference:
    """Closed-form equilibrium set of the consumer game.

    Pure equilibria sit at the stationary points ``eps/(b+eps)``, ``1/2`` and
    ``b/(b+eps)`` of change x stay, stay x stay and stay x change; mixed ones
    sit at ``m_1 = d1`` (randomizing in state 1) or ``m_1 = d2`` (state 2).
    A mixed equilibrium on a boundary of its interval coincides with a pure
    one and is not listed separately.
    """
    d1, d2 = consumer_thresholds(p)
    b, eps = p.b, p.epsilon
    lo, hi = eps / (b + eps), b / (b + eps)

    cat1 = "A" if d1 < lo else ("B" if d1 <= 0.5 else "C")
    cat2 = "a" if d2 < 0.5 else ("b" if d2 <= hi else "c")
    key = (cat1, cat2)
    # d1 < d2 rules out d1 > 1/2 together with d2 < 1/2
    assert key in CONSUMER_CASES, f"impossible threshold combination d1={d1}, d2={d2}"
    case = CONSUMER_CASES[key]

    def pure(m1, d, label):
        pi = np.zeros((2, 2))
        pi[0, d[0]] = pi[1, d[1]] = 1.0
        return ReferenceEquilibrium(np.array([m1, 1.0 - m1]), pi, "pure", label)

    eqs = []
    if d1 >= lo:
        eqs.append(pure(lo, (CHANGE, STAY), "change x stay"))
    if lo < d1 < 0.5:
        m1, m2 = d1, 1.0 - d1
        w = eps * (m2 / m1 - 1.0) / (b - eps)
        eqs.append(ReferenceEquilibrium(np.array([m1, m2]), np.array([[w, 1 - w], [0.0, 1.0]]), "mixed", "mixed in state 1"))
    if d1 <= 0.5 <= d2:
        eqs.append(pure(0.5, (STAY, STAY), "stay x stay"))
    if 0.5 < d2 < hi:
        m1, m2 = d2, 1.0 - d2
        w = eps * (m1 / m2 - 1.0) / (b - eps)
        eqs.append(ReferenceEquilibrium(np.array([m1, m2]), np.array([[0.0, 1.0], [w, 1 - w]]), "mixed", "mixed in state 2"))
    if d2 <= hi:
        eqs.append(pure(hi, (STAY, CHANGE), "stay x change"))
    return ConsumerReference(d1, d2, case, tuple(eqs))


# ---------------------------------------------------------------------------
# corruption


def corruption_model(p: CorruptionParams) -> ModelSpec:
    """States (C, H, R), actions (change, stay), wages (10, 5, 0).

    Changing moves C -> H or H -> C at extra rate ``b``. Corrupt players are
    convicted at rate ``q_soc m_H``, honest ones are drawn to corruption at
    rate ``q_inf m_C`` and reserved players recover to H at rate ``r``
    whatever they do.
    """
    S = 3
    C, H, R = 0, 1, 2
    const = lambda v: Polynomial.constant(v, S)  # noqa: E731
    lin = lambda coef, k: Polynomial.linear(coef, k, S)  # noqa: E731
    rates = {}
    for a in (CHANGE, STAY):
        rates[(C, R, a)] = lin(p.q_soc, H)
        rates[(R, H, a)] = const(p.r)
    rates[(C, H, CHANGE)] = const(p.b)
    rates[(H, C, CHANGE)] = const(p.b) + lin(p.q_inf, C)
    rates[(H, C, STAY)] = lin(p.q_inf, C)
    rewards = {}
    for i, wage in enumerate((10.0, 5.0, 0.0)):
        for a in (CHANGE, STAY):
            rewards[(i, a)] = (PolyTerm(const(wage)),)
    return ModelSpec.create(S, 2, p.beta, rates, rewards, state_names=("C", "H", "R"), action_names=ACTION_NAMES)


def corruption_manifold(p: CorruptionParams, m_c):
    """Distribution with the given ``m_C`` on which the flow through R balances."""
    m_c = float(m_c)
    den = p.q_soc * m_c + p.r
    return np.array([m_c, p.r * (1.0 - m_c) / den, p.q_soc * m_c * (1.0 - m_c) / den])


@dataclass(frozen=True)
class CorruptionCandidate:
    label: str  # strategy in states (C, H)
    description: str
    m: np.ndarray | None  # None when flagged
    admissible: bool  # on the simplex and in the optimality region of its strategy
    note: str = ""


@dataclass(frozen=True)
class CorruptionReference:
    threshold: float  # tie value of m_H
    pure_candidates: tuple[CorruptionCandidate, ...]
    mixed_point: np.ndarray | None
    mixed_feasible: bool
    # feasible (pi_C_change, pi_H_change) satisfy b m_H pi_H - b m_C pi_C = rhs
    mixed_rhs: float | None = None
    params: CorruptionParams = field(default_factory=CorruptionParams)

    def manifold(self, m_c):
        return corruption_manifold(self.params, m_c)

    def manifold_residual(self, m) -> float:
        """Deviation of ``m`` from the invariant manifold parameterized by ``m_C``."""
        m = np.asarray(m, dtype=float)
        return float(np.max(np.abs(self.manifold(m[0]) - m)))

    def optimal_labels(self, m_h: float, tol: float = 1e-12) -> tuple[str, ...]:
        if m_h < self.threshold - tol:
            return ("stay x change",)
        if m_h > self.threshold + tol:
            return ("change x stay",)
        return ("stay x change", "change x stay", "tie")

    @property
    def equilibria(self) -> tuple[np.ndarray, ...]:
        pts = [c.m for c in self.pure_candidates if c.admissible]
        if self.mixed_feasible:
            pts.append(self.mixed_point)
        out = []
        for pt in pts:
            if all(np.max(np.abs(pt - q)) > 1e-9 for q in out):
                out.append(pt)
        return tuple(sorted(out, key=tuple))


def _on_simplex(m, tol=1e-12) -> bool:
    return bool(np.all(m >= -tol) and abs(m.sum() - 1.0) < 1e-9)


def corruption_reference(p: CorruptionParams) -> CorruptionReference:
    """Optimality threshold, invariant manifold and equilibrium candidates."""
    thr = (p.r + p.beta) / p.q_soc
    tol = 1e-12
    cands = []

    def add(label, desc, m, region_ok):
        m = np.asarray(m, dtype=float)
        ok = _on_simplex(m) and region_ok(m[1])
        cands.append(CorruptionCandidate(label, desc, m, ok))

    below = lambda mh: mh <= thr + tol  # noqa: E731
    above = lambda mh: mh >= thr - tol  # noqa: E731
    add("stay x change", "m_H = 0", corruption_manifold(p, 1.0), below)
    if p.q_soc == p.q_inf:
        cands.append(CorruptionCandidate("stay x change", "m_C = b/(q_soc - q_inf)", None, False, "q_soc == q_inf"))
        cands.append(CorruptionCandidate("change x stay", "m_H = b/(q_inf - q_soc)", None, False, "q_soc == q_inf"))
    else:
        m_c = p.b / (p.q_soc - p.q_inf)
        if 0.0 <= m_c <= 1.0:
            add("stay x change", "m_C = b/(q_soc - q_inf)", corruption_manifold(p, m_c), below)
        else:
            cands.append(CorruptionCandidate("stay x change", "m_C = b/(q_soc - q_inf)", None, False, "outside [0, 1]"))
        m_h = p.b / (p.q_inf - p.q_soc)
        if 0.0 <= m_h <= 1.0:
            m_c = p.r * (1.0 - m_h) / (p.q_soc * m_h + p.r)
            add("change x stay", "m_H = b/(q_inf - q_soc)", corruption_manifold(p, m_c), above)
        else:
            cands.append(CorruptionCandidate("change x stay", "m_H = b/(q_inf - q_soc)", None, False, "outside [0, 1]"))
    add("change x stay", "m_C = 0", corruption_manifold(p, 0.0), above)

    mixed, feasible, rhs = None, False, None
    if thr < 1.0:
        m_c = p.r * (p.q_soc - p.r - p.beta) / ((2 * p.r + p.beta) * p.q_soc)
        mixed = corruption_manifold(p, m_c)
        rhs = mixed[0] * mixed[1] * (p.q_soc - p.q_inf)
        feasible = -p.b * mixed[0] - tol <= rhs <= p.b * mixed[1] + tol
    return CorruptionReference(thr, tuple(cands), mixed, bool(feasible), rhs, p)
