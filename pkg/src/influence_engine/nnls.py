"""Active-set non-negative least squares (Lawson-Hanson)."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class NNLSResult:
    x: np.ndarray
    residual_norm: float
    iterations: int
    converged: bool

    def kkt_residuals(self, X: np.ndarray, y: np.ndarray) -> tuple[float, float]:
        """(max gradient violation, max complementary-slackness violation)."""
        g = X.T @ (X @ self.x - y)
        grad_violation = float(max(0.0, np.max(-g))) if g.size else 0.0
        slack_violation = float(np.max(np.abs(self.x * g))) if g.size else 0.0
        return grad_violation, slack_violation


def nnls(
    X: np.ndarray, y: np.ndarray, tol: float = 1e-10, max_iter: int | None = None
) -> NNLSResult:
    """Minimize ||Xw - y||^2 subject to w >= 0.

    Classic active-set iteration: grow the passive set one most-violating
    coordinate at a time, solving the unconstrained subproblem on the
    passive columns and backtracking along the segment to stay feasible.
    Non-negativity of the result is exact, not merely within tol.
    """
    X = np.asarray(X, dtype=float)
    y = np.asarray(y, dtype=float)
    if X.ndim != 2 or X.shape[0] < 1:
        raise ValueError("X must be a matrix with at least one row")
    if y.shape != (X.shape[0],):
        raise ValueError("y length must match X row count")
    n = X.shape[1]
    if max_iter is None:
        max_iter = max(3 * n, 30)

    x = np.zeros(n)
    passive = np.zeros(n, dtype=bool)
    w = X.T @ y  # gradient of -0.5*||Xx-y||^2 at x=0
    converged = True
    outer = 0

    scale = max(1.0, float(np.max(np.abs(w))) if n else 1.0)
    while True:
        candidates = ~passive
        if not candidates.any() or np.max(w[candidates]) <= tol * scale:
            break
        outer += 1
        if outer > max_iter:
            converged = False
            break
        j = int(np.flatnonzero(candidates)[np.argmax(w[candidates])])
        passive[j] = True

        while True:
            z = np.zeros(n)
            cols = np.flatnonzero(passive)
            z[cols], *_ = np.linalg.lstsq(X[:, cols], y, rcond=None)
            if np.all(z[cols] > 0):
                x = z
                break
            # step to the boundary of the feasible region along x -> z
            blocking = cols[z[cols] <= 0]
            alphas = x[blocking] / (x[blocking] - z[blocking])
            alpha = float(np.min(alphas))
            x = x + alpha * (z - x)
            drop = (np.abs(x) <= 1e-14) & passive
            x[drop] = 0.0
            passive[x <= 0] = False
            x[~passive] = 0.0

        w = X.T @ (y - X @ x)

    residual = float(np.linalg.norm(X @ x - y))
    return NNLSResult(x=x, residual_norm=residual, iterations=outer, converged=converged)
