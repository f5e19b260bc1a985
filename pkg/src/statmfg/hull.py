"""Euclidean distance from a point to the convex hull of finitely many points."""
from __future__ import annotations

import numpy as np

__all__ = ["min_norm_point", "hull_distance_points"]


def _affine_minimizer(P: np.ndarray) -> np.ndarray:
    """Weights ``v`` (summing to one) minimizing ``|v @ P|`` over the affine hull of the rows."""
    k = len(P)
    kkt = np.zeros((k + 1, k + 1))
    kkt[:k, :k] = P @ P.T
    kkt[:k, k] = 1.0
    kkt[k, :k] = 1.0
    rhs = np.zeros(k + 1)
    rhs[k] = 1.0
    sol = np.linalg.lstsq(kkt, rhs, rcond=None)[0]
    v = sol[:k]
    return v / v.sum()


def min_norm_point(P: np.ndarray, eps: float = 1e-14, max_iter: int = 1000):
    """Minimum-norm point of ``conv(rows of P)`` (Wolfe 1976).

    Returns ``(x, weights)`` with ``x = weights @ P``, ``weights`` on the
    probability simplex.
    """
    P = np.asarray(P, dtype=float)
    n = len(P)
    scale = max(1.0, float(np.max(np.sum(P * P, axis=1))))
    first = int(np.argmin(np.sum(P * P, axis=1)))
    corral = [first]
    w = np.array([1.0])
    for _ in range(max_iter):
        x = w @ P[corral]
        j = int(np.argmin(P @ x))
        if P[j] @ x >= x @ x - eps * scale or j in corral:
            break
        corral.append(j)
        w = np.append(w, 0.0)
        while True:
            v = _affine_minimizer(P[corral])
            if np.all(v > eps):
                w = v
                break
            shrink = (v <= eps) & (w - v > 0)
            theta = np.min(w[shrink] / (w[shrink] - v[shrink])) if shrink.any() else 1.0
            theta = min(max(theta, 0.0), 1.0)
            w = theta * v + (1.0 - theta) * w
            keep = w > eps
            if keep.all():
                # numerical stall; drop the smallest weight
                keep[int(np.argmin(w))] = False
            corral = [c for c, k in zip(corral, keep) if k]
            w = w[keep]
            w = w / w.sum()
    weights = np.zeros(n)
    weights[corral] = w
    weights = np.clip(weights, 0.0, None)
    weights /= weights.sum()
    return weights @ P, weights


def hull_distance_points(point, vertices) -> tuple[float, np.ndarray]:
    """Distance from ``point`` to ``conv(vertices)`` and minimizing convex weights.

    Duplicate vertices are merged before the solve; the weight of a merged
    group is assigned to its first member.
    """
    point = np.asarray(point, dtype=float)
    V = np.atleast_2d(np.asarray(vertices, dtype=float))
    reps, owner = [], []
    for k, v in enumerate(V):
        for r_idx, r in enumerate(reps):
            if np.max(np.abs(V[r] - v)) <= 1e-15:
                owner.append(r_idx)
                break
        else:
            owner.append(len(reps))
            reps.append(k)
    x, w_rep = min_norm_point(V[reps] - point)
    weights = np.zeros(len(V))
    for r_idx, k in enumerate(reps):
        weights[k] = w_rep[r_idx]
    # recompute the distance from the returned weights for consistency
    return float(np.linalg.norm(weights @ V - point)), weights
