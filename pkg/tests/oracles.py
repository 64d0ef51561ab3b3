"""Independent brute-force oracles, written before and kept independent of
the implementations they check."""

from __future__ import annotations

import itertools
import math

import numpy as np


def brute_ndcg(ideal_order, evaluated_order, p):
    """Exponential-gain nDCG with rel = p / ideal rank, coded from scratch."""
    rel = {}
    for position, entity in enumerate(ideal_order):
        rel[entity] = p / (position + 1)

    def gain_sum(order):
        total = 0.0
        for position, entity in enumerate(order[:p]):
            numerator = 2.0 ** rel[entity] - 1.0
            denominator = math.log(position + 2, 2)
            total += numerator / denominator
        return total

    return gain_sum(evaluated_order) / gain_sum(ideal_order)


def brute_nnls(X, y):
    """NNLS by exhaustive active-set enumeration.

    The optimal support yields a feasible unconstrained least-squares
    solution attaining the constrained minimum, so the best feasible
    subset solution is the NNLS optimum. Only usable for small column
    counts.
    """
    X = np.asarray(X, dtype=float)
    y = np.asarray(y, dtype=float)
    n = X.shape[1]
    best_x = np.zeros(n)
    best_obj = float(np.dot(y, y))
    for r in range(1, n + 1):
        for cols in itertools.combinations(range(n), r):
            sol, *_ = np.linalg.lstsq(X[:, cols], y, rcond=None)
            if np.any(sol < -1e-12):
                continue
            x = np.zeros(n)
            x[list(cols)] = np.clip(sol, 0.0, None)
            obj = float(np.sum((X @ x - y) ** 2))
            if obj < best_obj - 1e-13:
                best_obj = obj
                best_x = x
    return best_x


def projected_gradient_nnls(X, y, tol=1e-10, max_iter=200000):
    """Accelerated projected gradient (FISTA with restart) to high accuracy."""
    X = np.asarray(X, dtype=float)
    y = np.asarray(y, dtype=float)
    n = X.shape[1]
    gram = X.T @ X
    xty = X.T @ y
    lipschitz = float(np.linalg.norm(gram, 2)) or 1.0
    step = 1.0 / lipschitz
    x = np.zeros(n)
    z = x.copy()
    momentum = 1.0
    for _ in range(max_iter):
        grad = gram @ z - xty
        x_next = np.clip(z - step * grad, 0.0, None)
        if np.dot(x_next - x, z - x_next) > 0:  # restart
            momentum = 1.0
            z = x_next
        else:
            momentum_next = (1.0 + math.sqrt(1.0 + 4.0 * momentum**2)) / 2.0
            z = x_next + ((momentum - 1.0) / momentum_next) * (x_next - x)
            momentum = momentum_next
        converged = np.all(np.abs(x_next - x) < tol * 1e-2)
        x = x_next
        g = gram @ x - xty
        if converged and np.all(g >= -tol) and np.all(np.abs(x * g) <= tol):
            break
    return x


def dense_pagerank(edges, nodes=(), damping=0.85, iterations=5000, tol=1e-15):
    """Power iteration on the dense transition matrix."""
    node_list = sorted({u for e in edges for u in e} | set(nodes))
    n = len(node_list)
    index = {u: i for i, u in enumerate(node_list)}
    out_counts = np.zeros(n)
    transition = np.zeros((n, n))
    for src, dst in edges:
        out_counts[index[src]] += 1
    for src, dst in edges:
        transition[index[dst], index[src]] += 1.0 / out_counts[index[src]]
    dangling = out_counts == 0

    v = np.full(n, 1.0 / n)
    for _ in range(iterations):
        dangling_mass = float(np.sum(v[dangling]))
        nxt = (1.0 - damping) / n + damping * (transition @ v + dangling_mass / n)
        if float(np.sum(np.abs(nxt - v))) < tol:
            v = nxt
            break
        v = nxt
    return {u: float(v[index[u]]) for u in node_list}


def brute_window_counts(day_indices, windows):
    """Window counts by direct filtering rather than prefix sums."""
    return {w: sum(1 for d in day_indices if d < w) for w in windows}
