"""Search for and certify stationary mean field equilibria.

A pair ``(m, pi)`` is a stationary equilibrium when ``m`` is invariant under
``Q^pi(m)`` and ``pi`` is optimal for the frozen distribution ``m``. Optimal
stationary strategies at ``m`` are exactly the mixtures of the deterministic
strategies in ``D(m)``, so the equilibrium distributions are the fixed points
of ``m -> conv{x^d(m) : d in D(m)}`` where ``x^d(m)`` is the stationary
distribution of ``Q^d(m)``.

The search has two parts:

* pure equilibria, one fixed-point problem ``m = x^d(m)`` per deterministic
  strategy ``d``, accepted when ``d`` is optimal at the solution;
* mixed equilibria, which can only sit where ``|D(m)| >= 2``. A grid scan
  finds switches of the optimal action, bisection puts a seed on the switch,
  and a square system in ``(m, z)`` with ``z[i, a] = m_i pi[i, a]`` is solved
  from there under the tie conditions.
"""
from __future__ import annotations

import itertools
import logging
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import least_squares, linprog

from .ctmdp import (
    DEFAULT_TIE_TOL,
    OptimalitySummary,
    _action_sets_from_q,
    _policy_iteration,
    _policy_value_arrays,
    _summary_arrays,
    batch_optimal_q_values,
    q_values,
)
from .errors import DegenerateDynamics, Infeasible, MFGError, NonConvergence, ReducibleGenerator, SingularSystem
from .hull import hull_distance_points
from .model import (
    ModelSpec,
    all_deterministic_strategies,
    as_distribution,
    as_strategy,
    deterministic_strategy,
)
from .stationary import (
    StationaryPoint,
    balance_residual,
    generator_from_rates,
    is_irreducible,
    stationary_distribution,
)

__all__ = [
    "SearchConfig",
    "BestResponseHull",
    "EquilibriumCertificate",
    "SearchResult",
    "best_response_vertices",
    "hull_distance",
    "find_pure_equilibria",
    "find_mixed_equilibria",
    "recover_strategy",
    "verify_equilibrium",
    "solve",
    "simplex_grid",
]

log = logging.getLogger(__name__)

SUPPORT_TOL = 1e-12
_SNAP = 1e-7
_DEFAULT_GRID = {2: 200, 3: 60, 4: 20, 5: 10}


@dataclass(frozen=True)
class SearchConfig:
    """Numerical settings of the equilibrium search.

    ``grid`` is the number of subdivisions per simplex edge; ``None`` picks
    200 for two states, 60 for three and coarser grids beyond.
    """

    grid: int | None = None
    multistart: int = 32
    damping: float = 0.5
    tie_tol: float = DEFAULT_TIE_TOL
    tol: float = 1e-9
    dedup_radius: float = 1e-6
    verify_tol: float = 1e-7
    max_iter: int = 300
    seed: int = 0
    workers: int = 1

    def __post_init__(self):
        for name in ("tie_tol", "tol", "dedup_radius", "verify_tol"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be positive")
        if self.grid is not None and self.grid < 2:
            raise ValueError("grid resolution must be >= 2")
        if not 0.0 < self.damping <= 1.0:
            raise ValueError("damping must lie in (0, 1]")
        if self.multistart < 0 or self.max_iter < 1 or self.workers < 1:
            raise ValueError("multistart >= 0, max_iter >= 1 and workers >= 1 required")

    def grid_for(self, num_states: int) -> int:
        if self.grid is not None:
            return self.grid
        return _DEFAULT_GRID.get(num_states, 8)


@dataclass(frozen=True)
class BestResponseHull:
    vertices: tuple[StationaryPoint, ...]
    strategies: tuple[tuple[int, ...], ...]
    summary: OptimalitySummary

    @property
    def points(self) -> np.ndarray:
        return np.array([v.dist for v in self.vertices])


@dataclass(frozen=True)
class EquilibriumCertificate:
    m: np.ndarray
    pi: np.ndarray
    stationarity_residual: float
    optimality_gap: float
    support: tuple[tuple[int, ...], ...]
    action_sets: tuple[tuple[int, ...], ...]
    kind: str  # "pure" | "mixed"
    tol: float
    hull_weights: np.ndarray | None = None
    hull_strategies: tuple[tuple[int, ...], ...] | None = None

    @property
    def stationary(self) -> bool:
        return self.stationarity_residual < self.tol

    @property
    def optimal(self) -> bool:
        return self.optimality_gap < self.tol

    @property
    def support_ok(self) -> bool:
        return all(set(s) <= set(o) for s, o in zip(self.support, self.action_sets))

    @property
    def passed(self) -> bool:
        return self.stationary and self.optimal and self.support_ok

    def failures(self) -> list[str]:
        out = []
        if not self.stationary:
            out.append(f"stationarity residual {self.stationarity_residual:.3g} >= {self.tol:g}")
        if not self.optimal:
            out.append(f"optimality gap {self.optimality_gap:.3g} >= {self.tol:g}")
        if not self.support_ok:
            out.append("strategy plays actions outside the optimal sets")
        return out

    def to_record(self) -> dict:
        rec = {
            "m": [float(v) for v in self.m],
            "pi": [[float(v) for v in row] for row in self.pi],
            "kind": self.kind,
            "stationarity_residual": float(self.stationarity_residual),
            "optimality_gap": float(self.optimality_gap),
            "strategy_support": [[a + 1 for a in s] for s in self.support],
        }
        if self.hull_weights is not None:
            rec["hull_strategies"] = [[a + 1 for a in d] for d in self.hull_strategies]
            rec["hull_weights"] = [float(w) for w in self.hull_weights]
        return rec


@dataclass
class SearchResult:
    equilibria: list[EquilibriumCertificate] = field(default_factory=list)
    warnings: list[str] = field(default_factory=list)
    failures: list[str] = field(default_factory=list)

    def warn(self, message: str):
        if message not in self.warnings:
            self.warnings.append(message)

    def merge(self, other: "SearchResult"):
        for w in other.warnings:
            self.warn(w)
        self.failures.extend(other.failures)

    @property
    def pure(self):
        return [c for c in self.equilibria if c.kind == "pure"]

    @property
    def mixed(self):
        return [c for c in self.equilibria if c.kind == "mixed"]


def _fmt(m) -> str:
    return "(" + ", ".join(f"{v:.6g}" for v in m) + ")"


def _label(d) -> str:
    return "(" + ",".join(str(a + 1) for a in d) + ")"


# ---------------------------------------------------------------------------
# best-response hull


def _hull_arrays(Q, r, beta, tie_tol):
    summary = _summary_arrays(Q, r, beta, tie_tol)
    S, A = r.shape
    vertices, strategies = [], []
    for d in summary.strategies():
        q = generator_from_rates(Q, deterministic_strategy(d, A))
        if not is_irreducible(q):
            raise ReducibleGenerator(f"Q^d is reducible for optimal strategy d={_label(d)}", strategy=d)
        vertices.append(stationary_distribution(q))
        strategies.append(tuple(d))
    return BestResponseHull(tuple(vertices), tuple(strategies), summary)


def best_response_vertices(model: ModelSpec, m, tie_tol: float = DEFAULT_TIE_TOL) -> BestResponseHull:
    """Stationary distributions ``x^d(m)`` of every optimal deterministic ``d``.

    Their convex hull is the best-response set at ``m``. Irreducibility is
    required of every optimal ``d``; otherwise :class:`ReducibleGenerator`
    names the first offender.
    """
    m = as_distribution(m, model.num_states)
    return _hull_arrays(model.rates_at(m), model.rewards_at(m), model.beta, tie_tol)


def hull_distance(point, hull) -> tuple[float, np.ndarray]:
    """Euclidean distance from ``point`` to the hull and the minimizing convex weights.

    ``hull`` is a :class:`BestResponseHull` or an array of vertex rows.
    """
    vertices = hull.points if isinstance(hull, BestResponseHull) else np.asarray(hull, dtype=float)
    return hull_distance_points(point, vertices)


# ---------------------------------------------------------------------------
# verification and strategy recovery


def _equivalent_actions(Q, r, i, a, b) -> bool:
    return bool(np.allclose(Q[i, :, a], Q[i, :, b], rtol=1e-12, atol=1e-14) and np.isclose(r[i, a], r[i, b], 1e-12, 1e-14))


def _representatives(Q, r, i, actions):
    """One action per class of actions with identical rates and rewards in state ``i``."""
    reps = []
    for a in actions:
        if not any(_equivalent_actions(Q, r, i, a, b) for b in reps):
            reps.append(a)
    return reps


def _kind(pi: np.ndarray, m: np.ndarray) -> str:
    populated = m > 0
    rows = pi[populated]
    if not len(rows):
        return "pure"
    return "mixed" if np.any(np.sum(rows > SUPPORT_TOL, axis=1) > 1) else "pure"


def _certificate(model, m, pi, tol, tie_tol, Q=None, r=None):
    if Q is None:
        Q, r = model.rates_at(m), model.rewards_at(m)
    q = generator_from_rates(Q, pi)
    summary = _summary_arrays(Q, r, model.beta, tie_tol)
    V = _policy_value_arrays(Q, r, model.beta, pi)
    support = tuple(tuple(int(a) for a in np.nonzero(row > SUPPORT_TOL)[0]) for row in pi)
    return EquilibriumCertificate(
        m=m,
        pi=pi,
        stationarity_residual=balance_residual(q, m),
        optimality_gap=float(np.max(np.abs(summary.value - V))),
        support=support,
        action_sets=summary.action_sets,
        kind=_kind(pi, m),
        tol=tol,
    )


def verify_equilibrium(model: ModelSpec, m, pi, tol: float = 1e-7, tie_tol: float = DEFAULT_TIE_TOL):
    """Certify ``(m, pi)`` directly from the definition.

    Checks ``|m^T Q^pi(m)|_inf < tol``, ``|V*(m) - V^pi(m)|_inf < tol`` and that
    every played action lies in the optimal set of its state. Works for
    reducible generators. Never raises on failure; inspect ``passed``.
    """
    S, A = model.shape
    m = as_distribution(m, S)
    pi = as_strategy(pi, S, A)
    return _certificate(model, m, pi, tol, tie_tol)


def recover_strategy(model: ModelSpec, m, opt: OptimalitySummary | None = None, rates_at=None) -> np.ndarray:
    """An optimal stationary strategy under which ``m`` is stationary.

    Solves for ``z[i, a] >= 0`` supported on the optimal sets with
    ``sum_a z[i, a] = m_i`` and ``sum_{i,a} Q[i, j, a](m) z[i, a] = 0``, then
    sets ``pi[i, a] = z[i, a] / m_i``. States with ``m_i = 0`` get the uniform
    distribution over their optimal actions. Actions with identical rates and
    rewards are merged onto the lowest index.

    ``rates_at`` evaluates rates, rewards and optimal sets at another
    distribution ``m'``; the result then realizes ``m`` as a point of the
    best-response set at ``m'``.

    Raises
    ------
    Infeasible
        If ``m`` is not a best response to itself (or to ``rates_at``).
    """
    S, A = model.shape
    m = as_distribution(m, S)
    at = m if rates_at is None else as_distribution(rates_at, S)
    Q, r = model.rates_at(at), model.rewards_at(at)
    if opt is None:
        opt = _summary_arrays(Q, r, model.beta, DEFAULT_TIE_TOL)
    cols = [(i, a) for i in range(S) for a in _representatives(Q, r, i, opt.action_sets[i])]
    n = len(cols)
    A_eq = np.zeros((2 * S, n))
    b_eq = np.zeros(2 * S)
    for k, (i, a) in enumerate(cols):
        A_eq[i, k] = 1.0
        A_eq[S:, k] = Q[i, :, a]
    b_eq[:S] = m
    res = linprog(np.zeros(n), A_eq=A_eq, b_eq=b_eq, bounds=[(0, None)] * n, method="highs")
    if res.status != 0:
        raise Infeasible(f"m={_fmt(m)} is not stationary under any optimal strategy ({res.message})")
    z = np.clip(res.x, 0.0, None)
    # re-solve on the basis for a residual at rounding level
    basis = z > 1e-12
    if basis.any():
        zb = np.linalg.lstsq(A_eq[:, basis], b_eq, rcond=None)[0]
        if np.all(zb >= 0):
            z = np.zeros(n)
            z[basis] = zb
    pi = np.zeros((S, A))
    for k, (i, a) in enumerate(cols):
        pi[i, a] = z[k]
    for i in range(S):
        if m[i] > 0 and pi[i].sum() > 0:
            pi[i] /= pi[i].sum()
        else:
            pi[i, list(opt.action_sets[i])] = 1.0 / len(opt.action_sets[i])
    return pi


# ---------------------------------------------------------------------------
# pure equilibria


def _seeds(num_states: int, cfg: SearchConfig) -> np.ndarray:
    rng = np.random.default_rng(cfg.seed)
    fixed = np.vstack([np.eye(num_states), np.full((1, num_states), 1.0 / num_states)])
    return np.vstack([fixed, rng.dirichlet(np.ones(num_states), size=cfg.multistart)])


def _project(m):
    m = np.clip(np.asarray(m, dtype=float), 0.0, None)
    return m / m.sum()


def _x_of(model, pi, m):
    return stationary_distribution(generator_from_rates(model.rates_at(m), pi), cross_check=False).dist


def _damped_iteration(model, pi, m0, cfg):
    """Iterate ``m <- (1 - lam) m + lam x^d(m)`` until ``|x^d(m) - m| < tol``."""
    m = m0
    for _ in range(cfg.max_iter):
        x = _x_of(model, pi, m)
        step = x - m
        if np.max(np.abs(step)) < cfg.tol:
            return x
        m = m + cfg.damping * step
    raise NonConvergence(f"damped iteration did not converge in {cfg.max_iter} steps")


def _balance_root(model, pi, m0, cfg):
    """Bounded least squares on ``m^T Q^pi(m) = 0``, ``sum m = 1``.

    Reaches fixed points the damped iteration is repelled from and points
    where ``Q^pi(m)`` is reducible.
    """

    def residual(m):
        return np.append(m @ generator_from_rates(model.rates_at(m), pi), m.sum() - 1.0)

    def balance(m):
        return balance_residual(generator_from_rates(model.rates_at(m), pi), m)

    sol = least_squares(residual, m0, bounds=(0.0, 1.0), xtol=1e-15, ftol=1e-15, gtol=1e-15, max_nfev=200)
    m = _project(sol.x)
    res = balance(m)
    # bounded solvers approach faces only asymptotically; try the face itself
    small = m < _SNAP
    if small.any() and not small.all():
        snapped = _project(np.where(small, 0.0, m))
        if balance(snapped) <= res:
            m, res = snapped, balance(snapped)
    if res < cfg.tol:
        return m
    raise NonConvergence(f"balance residual {np.max(np.abs(sol.fun)):.3g} after least squares")


def _dedup(points, radius):
    out = []
    for p in points:
        if all(np.max(np.abs(p - q)) > radius for q in out):
            out.append(p)
    return out


def _pure_task(model: ModelSpec, d, cfg: SearchConfig):
    """Fixed points of ``x^d`` at which ``d`` is optimal."""
    S, A = model.shape
    pi = deterministic_strategy(d, A)
    result = SearchResult()
    candidates = []
    if model.is_constant_dynamics:
        q = generator_from_rates(model.rates_at(np.full(S, 1.0 / S)), pi)
        if is_irreducible(q):
            candidates.append(stationary_distribution(q).dist)
        else:
            result.warn(f"constant generator of strategy {_label(d)} is reducible; its stationary set is not enumerated")
            for seed in _seeds(S, cfg):
                try:
                    candidates.append(_balance_root(model, pi, seed, cfg))
                except MFGError:
                    pass
    else:
        for k, seed in enumerate(_seeds(S, cfg)):
            found = False
            try:
                m = _damped_iteration(model, pi, seed, cfg)
                candidates.append(_balance_root(model, pi, m, cfg))
                found = True
            except ReducibleGenerator:
                result.warn(f"reducible generator met while iterating strategy {_label(d)}")
            except (NonConvergence, SingularSystem):
                pass
            try:
                candidates.append(_balance_root(model, pi, seed, cfg))
                found = True
            except (NonConvergence, SingularSystem):
                pass
            if not found:
                result.failures.append(f"strategy {_label(d)}, seed #{k}: no fixed point reached")
    for m in _dedup(candidates, cfg.dedup_radius):
        Q, r = model.rates_at(m), model.rewards_at(m)
        try:
            summary = _summary_arrays(Q, r, model.beta, cfg.tie_tol)
        except (DegenerateDynamics, SingularSystem) as exc:
            result.warn(f"cannot evaluate optimality at m={_fmt(m)}: {exc}")
            continue
        if not summary.contains(d):
            continue
        cert = _certificate(model, m, pi, cfg.verify_tol, cfg.tie_tol, Q, r)
        if cert.passed:
            result.equilibria.append(cert)
        else:
            result.warn(f"candidate {_fmt(m)} for strategy {_label(d)} failed verification: {cert.failures()}")
    return result


def _run(tasks, fn, model, cfg):
    workers = cfg.workers
    if workers > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            return list(pool.map(fn, [model] * len(tasks), tasks, [cfg] * len(tasks)))
    return [fn(model, t, cfg) for t in tasks]


def _attach_hull(model, cert, cfg, result):
    try:
        hull = best_response_vertices(model, cert.m, cfg.tie_tol)
    except ReducibleGenerator as exc:
        result.warn(f"reducible region at m={_fmt(cert.m)}: {exc}; certified by direct balance check only")
        return cert
    dist, weights = hull_distance(cert.m, hull)
    if dist > cfg.verify_tol:
        result.warn(f"equilibrium at m={_fmt(cert.m)} lies {dist:.3g} from its best-response hull")
    return EquilibriumCertificate(
        **{**cert.__dict__, "hull_weights": weights, "hull_strategies": hull.strategies}
    )


def _sort_key(cert):
    return tuple(np.round(cert.m, 12)) + (cert.kind,)


def find_pure_equilibria(model: ModelSpec, cfg: SearchConfig | None = None, report: SearchResult | None = None):
    """Equilibria in deterministic strategies.

    For constant dynamics the only candidate of ``d`` is the stationary
    distribution of ``Q^d``. Otherwise each seed is pushed through the damped
    iteration and polished by least squares on the balance equations, and
    least squares is also started from the raw seed. A candidate is kept iff
    ``d`` is optimal there. Failed seeds are recorded in ``report.failures``.
    """
    cfg = cfg or SearchConfig()
    report = report if report is not None else SearchResult()
    S, A = model.shape
    tasks = list(all_deterministic_strategies(S, A))
    found = []
    for part in _run(tasks, _pure_task, model, cfg):
        report.merge(part)
        for cert in part.equilibria:
            if all(np.max(np.abs(cert.m - c.m)) > cfg.dedup_radius for c in found):
                found.append(cert)
    found = [_attach_hull(model, c, cfg, report) for c in found]
    return sorted(found, key=_sort_key)


# ---------------------------------------------------------------------------
# mixed equilibria


def simplex_grid(num_states: int, n: int) -> np.ndarray:
    """All integer compositions of ``n`` into ``num_states`` parts, as rows."""
    rows = []
    for bars in itertools.combinations(range(n + num_states - 1), num_states - 1):
        prev, comp = -1, []
        for b in bars:
            comp.append(b - prev - 1)
            prev = b
        comp.append(n + num_states - 2 - prev)
        rows.append(comp)
    return np.array(rows, dtype=int)


def _strategic_tie(Q, r, sets) -> bool:
    return any(len(_representatives(Q, r, i, s)) > 1 for i, s in enumerate(sets))


def _advantage(model, m, i, a, b):
    Q, r = model.rates_at(m), model.rewards_at(m)
    V, _ = _policy_iteration(Q, r, model.beta, 1e-13)
    qv = q_values(Q, r, V)
    return qv[i, a] - qv[i, b]


def _bisect_switch(model, p, q, i, a, b, iters=80):
    """Point on segment [p, q] where action ``a`` (best at p) and ``b`` (best at q) tie in state ``i``."""
    lo, hi = 0.0, 1.0
    for _ in range(iters):
        mid = 0.5 * (lo + hi)
        if mid in (lo, hi):
            break
        if _advantage(model, _project((1 - mid) * p + mid * q), i, a, b) > 0:
            lo = mid
        else:
            hi = mid
    t = 0.5 * (lo + hi)
    return _project((1 - t) * p + t * q)


def _tie_seeds(model: ModelSpec, cfg: SearchConfig, report: SearchResult):
    S, A = model.shape
    n = cfg.grid_for(S)
    comps = simplex_grid(S, n)
    ms = comps / n
    qv = batch_optimal_q_values(model, ms)
    best = np.argmax(qv, axis=2)
    seeds = []
    Qs, rs = model.rates_many(ms), model.rewards_many(ms)
    for k in range(len(ms)):
        sets = _action_sets_from_q(qv[k], cfg.tie_tol)
        if _strategic_tie(Qs[k], rs[k], sets):
            seeds.append(ms[k])
    index = {tuple(c): k for k, c in enumerate(comps)}
    for k, c in enumerate(comps):
        for src, dst in itertools.permutations(range(S), 2):
            if c[src] == 0:
                continue
            nb = c.copy()
            nb[src] -= 1
            nb[dst] += 1
            j = index[tuple(nb)]
            if j < k:
                continue
            for i in np.nonzero(best[k] != best[j])[0]:
                a, b = best[k, i], best[j, i]
                if _equivalent_actions(Qs[k], rs[k], i, a, b) and _equivalent_actions(Qs[j], rs[j], i, a, b):
                    continue
                seeds.append(_bisect_switch(model, ms[k], ms[j], i, a, b))
    return seeds


def _solve_tie_system(model: ModelSpec, pattern, m0, cfg):
    """Solve for ``(m, z)`` with the actions of ``pattern`` tied and ``m`` stationary under ``z``.

    Unknowns are ``m`` and ``z[i, a]`` for ``a in pattern[i]``; equations are
    ``sum_a z[i, a] = m_i``, ``sum_{i,a} Q[i, j, a](m) z[i, a] = 0``,
    ``sum m = 1`` and ``qv[i, a] = qv[i, pattern[i][0]]`` with action values
    taken under the value of the strategy playing ``pattern[i][0]``.
    """
    S, A = model.shape
    cols = [(i, a) for i in range(S) for a in pattern[i]]
    col_state = np.array([i for i, _ in cols])
    col_action = np.array([a for _, a in cols])
    d0 = [p[0] for p in pattern]
    pi0 = deterministic_strategy(d0, A)
    ties = [(i, a, d0[i]) for i in range(S) for a in pattern[i][1:]]
    beta = model.beta

    def residual(v):
        m, z = v[:S], v[S:]
        Q, r = model.rates_at(m), model.rewards_at(m)
        sums = np.bincount(col_state, weights=z, minlength=S) - m
        flow = z @ Q[col_state, :, col_action]
        V = _policy_value_arrays(Q, r, beta, pi0)
        qv = q_values(Q, r, V)
        tie = [qv[i, a] - qv[i, b] for i, a, b in ties]
        return np.concatenate([sums, flow, [m.sum() - 1.0], tie])

    z0 = np.array([m0[i] / len(pattern[i]) for i, _ in cols])
    sol = least_squares(
        residual, np.concatenate([m0, z0]), bounds=(0.0, 1.0), xtol=1e-15, ftol=1e-15, gtol=1e-15, max_nfev=300
    )
    if np.max(np.abs(sol.fun)) > cfg.verify_tol:
        raise NonConvergence(f"tie system residual {np.max(np.abs(sol.fun)):.3g}")
    return _project(sol.x[:S])


def _mixed_task(model: ModelSpec, seeds, cfg: SearchConfig):
    result = SearchResult()
    candidates = []
    for seed in seeds:
        Q, r = model.rates_at(seed), model.rewards_at(seed)
        summary = _summary_arrays(Q, r, model.beta, cfg.tie_tol)
        pattern = tuple(tuple(_representatives(Q, r, i, s)) for i, s in enumerate(summary.action_sets))
        if all(len(p) == 1 for p in pattern):
            continue
        try:
            candidates.append(_solve_tie_system(model, pattern, seed, cfg))
        except (NonConvergence, SingularSystem, DegenerateDynamics) as exc:
            result.failures.append(f"tie seed {_fmt(seed)}: {exc}")
    for m in _dedup(candidates, cfg.dedup_radius):
        try:
            pi = recover_strategy(model, m, optimal_summary(model, m, cfg.tie_tol))
        except Infeasible:
            continue
        cert = _certificate(model, m, pi, cfg.verify_tol, cfg.tie_tol)
        if cert.passed:
            result.equilibria.append(cert)
    return result


def optimal_summary(model, m, tie_tol):
    return _summary_arrays(model.rates_at(m), model.rewards_at(m), model.beta, tie_tol)


def find_mixed_equilibria(
    model: ModelSpec,
    cfg: SearchConfig | None = None,
    report: SearchResult | None = None,
    pure=None,
):
    """Equilibria located on tie manifolds (points with two or more optimal strategies).

    Solutions whose recovered strategy is deterministic on every populated
    state are returned with ``kind="pure"``; solutions at the distribution of
    an entry of ``pure`` are dropped.
    """
    cfg = cfg or SearchConfig()
    report = report if report is not None else SearchResult()
    S, A = model.shape
    if A == 1:
        return []
    try:
        seeds = _tie_seeds(model, cfg, report)
    except (DegenerateDynamics, SingularSystem) as exc:
        report.warn(f"grid scan aborted: {exc}")
        return []
    chunks = [seeds[k :: cfg.workers] for k in range(cfg.workers)] if cfg.workers > 1 else [seeds]
    pure_ms = [c.m for c in (pure or [])]
    found = []
    for part in _run([c for c in chunks if c], _mixed_task, model, cfg):
        report.merge(part)
        for cert in part.equilibria:
            if any(np.max(np.abs(cert.m - pm)) <= cfg.dedup_radius for pm in pure_ms):
                continue
            if all(np.max(np.abs(cert.m - c.m)) > cfg.dedup_radius for c in found):
                found.append(cert)
    found = [_attach_hull(model, c, cfg, report) for c in found]
    return sorted(found, key=_sort_key)


def solve(model: ModelSpec, cfg: SearchConfig | None = None) -> SearchResult:
    """Run the pure and the mixed search and merge their certificates."""
    cfg = cfg or SearchConfig()
    result = SearchResult()
    pure = find_pure_equilibria(model, cfg, result)
    mixed = find_mixed_equilibria(model, cfg, result, pure=pure)
    result.equilibria = sorted(pure + mixed, key=_sort_key)
    log.info(
        "found %d equilibria (%d pure, %d mixed), %d warnings, %d failed starts",
        len(result.equilibria),
        len(result.pure),
        len(result.mixed),
        len(result.warnings),
        len(result.failures),
    )
    return result


def default_workers() -> int:
    """Parallelism degree from the ``MFG_THREADS`` environment variable (default 1)."""
    try:
        return max(1, int(os.environ.get("MFG_THREADS", "1")))
    except ValueError:
        return 1
