"""Generators, irreducibility and stationary distributions.

The stationary distribution of an irreducible conservative generator ``Q`` is
obtained from the bordered system ``Qt x = e_S``, where ``Qt`` is ``Q.T``
with its last row replaced by ones.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import InvalidCut, ReducibleGenerator, SingularSystem
from .model import ModelSpec, as_distribution, as_strategy

__all__ = [
    "StationaryPoint",
    "assemble_generator",
    "generator_from_rates",
    "is_irreducible",
    "bordered_matrix",
    "stationary_distribution",
    "cofactor_distribution",
    "balance_residual",
    "cut_residual",
    "minor_sign_check",
    "EDGE_TOL",
]

EDGE_TOL = 1e-12


@dataclass(frozen=True)
class StationaryPoint:
    dist: np.ndarray
    residual: float  # sup-norm of x^T Q
    cofactor_error: float  # max relative deviation of the cofactor formula


def generator_from_rates(Q: np.ndarray, pi: np.ndarray) -> np.ndarray:
    """Mix the action slices of a rate tensor by ``pi``."""
    return np.einsum("ija,ia->ij", Q, pi)


def assemble_generator(model: ModelSpec, m, pi) -> np.ndarray:
    """``Q^pi(m)[i, j] = sum_a Q[i, j, a](m) pi[i, a]``."""
    S, A = model.shape
    m = as_distribution(m, S)
    return generator_from_rates(model.rates_at(m), as_strategy(pi, S, A))


def is_irreducible(q: np.ndarray) -> bool:
    """Strong connectivity of the graph with an edge i -> j whenever ``q[i, j] > 1e-12``."""
    q = np.asarray(q, dtype=float)
    S = len(q)
    reach = (q > EDGE_TOL) | np.eye(S, dtype=bool)
    # transitive closure by repeated squaring; tiny matrices, no graph library needed
    for _ in range(max(1, int(np.ceil(np.log2(S))))):
        reach = (reach.astype(np.int64) @ reach.astype(np.int64)) > 0
    return bool(reach.all())


def bordered_matrix(q: np.ndarray) -> np.ndarray:
    """``q.T`` with the last row replaced by ones."""
    qt = np.array(q, dtype=float).T.copy()
    qt[-1, :] = 1.0
    return qt


def cofactor_distribution(q: np.ndarray) -> np.ndarray:
    """Stationary distribution via signed minors of ``q`` with row i and column S removed."""
    q = np.asarray(q, dtype=float)
    S = len(q)
    keep = np.arange(S - 1)
    signed = np.empty(S)
    for i in range(S):
        rows = np.delete(np.arange(S), i)
        minor = q[np.ix_(rows, keep)]
        signed[i] = (-1.0) ** (S + i + 1) * np.linalg.det(minor)  # i is 0-based
    return signed / signed.sum()


def balance_residual(q: np.ndarray, x: np.ndarray) -> float:
    return float(np.max(np.abs(np.asarray(x) @ np.asarray(q))))


def stationary_distribution(q: np.ndarray, cross_check: bool = True) -> StationaryPoint:
    """Unique stationary distribution of an irreducible generator.

    With ``cross_check=False`` the cofactor comparison is skipped and
    ``cofactor_error`` is NaN; the search loops use this.

    Raises
    ------
    ReducibleGenerator
        If ``q`` is not irreducible.
    SingularSystem
        If the bordered system cannot be solved.
    """
    q = np.asarray(q, dtype=float)
    if not is_irreducible(q):
        raise ReducibleGenerator("generator is not irreducible")
    rhs = np.zeros(len(q))
    rhs[-1] = 1.0
    try:
        x = np.linalg.solve(bordered_matrix(q), rhs)
    except np.linalg.LinAlgError as exc:
        raise SingularSystem(f"bordered system is singular: {exc}") from exc
    if not np.all(np.isfinite(x)):
        raise SingularSystem("bordered system produced non-finite values")
    x = np.clip(x, 0.0, None)
    x /= x.sum()
    err = float("nan")
    if cross_check:
        cof = cofactor_distribution(q)
        # irreducible chains have strictly positive stationary distributions
        err = float(np.max(np.abs(cof - x) / np.maximum(x, np.finfo(float).tiny)))
    return StationaryPoint(x, balance_residual(q, x), err)


def cut_residual(q: np.ndarray, x, t_set) -> float:
    """Probability flow into ``t_set`` minus flow out of it under ``x``.

    ``t_set`` holds 0-based state indices and must be a proper nonempty subset.
    """
    q = np.asarray(q, dtype=float)
    x = np.asarray(x, dtype=float)
    S = len(q)
    inside = np.zeros(S, dtype=bool)
    inside[list(t_set)] = True
    if not inside.any() or inside.all():
        raise InvalidCut("cut set must be a nonempty proper subset of the states")
    outside = ~inside
    inflow = np.sum(x[outside, None] * q[np.ix_(outside, inside)])
    outflow = np.sum(x[inside, None] * q[np.ix_(inside, outside)])
    return float(inflow - outflow)


def minor_sign_check(q: np.ndarray, rank_tol: float | None = None) -> bool:
    """Sign of the leading principal minor and the rank of an irreducible generator.

    True iff ``sign det(q[:-1, :-1]) == (-1)**(S+1)`` and ``rank q == S - 1``.
    """
    q = np.asarray(q, dtype=float)
    if not is_irreducible(q):
        raise ReducibleGenerator("generator is not irreducible")
    S = len(q)
    det = np.linalg.det(q[:-1, :-1])
    sign_ok = det != 0.0 and np.sign(det) == (-1.0) ** (S + 1)
    return bool(sign_ok and np.linalg.matrix_rank(q, tol=rank_tol) == S - 1)
