"""Expectations over independent chi-square pairs by Gauss-Laguerre quadrature."""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from typing import Callable

import numpy as np
from scipy.linalg import eigh_tridiagonal


class QuadratureConvergenceError(RuntimeError):
    pass


@dataclass(frozen=True)
class QuadratureSpec:
    nodes_per_axis: int = 96
    target_rel_tol: float = 1e-9

    def __post_init__(self) -> None:
        if self.nodes_per_axis < 1:
            raise ValueError("nodes_per_axis must be positive")
        if not self.target_rel_tol > 0:
            raise ValueError("target_rel_tol must be positive")


@lru_cache(maxsize=64)
def gauss_laguerre(n: int, alpha: float) -> tuple[np.ndarray, np.ndarray]:
    """Nodes and normalized weights for the weight t^alpha e^-t on (0, inf).

    Golub-Welsch on the Jacobi matrix of the generalized Laguerre polynomials.
    Weights are normalized to sum to one, so they never involve Gamma(alpha+1)
    and stay finite for large alpha.
    """
    if alpha <= -1:
        raise ValueError("alpha must exceed -1")
    k = np.arange(n, dtype=float)
    diag = 2.0 * k + alpha + 1.0
    off = np.sqrt(k[1:] * (k[1:] + alpha))
    nodes, vecs = eigh_tridiagonal(diag, off)
    weights = vecs[0, :] ** 2
    weights /= weights.sum()
    nodes.setflags(write=False)
    weights.setflags(write=False)
    return nodes, weights


def chi2_rule(df: float, n: int) -> tuple[np.ndarray, np.ndarray]:
    """Quadrature rule for E[f(U)], U ~ chi-square(df). df = 0 is the point mass at 0."""
    if df == 0:
        return np.zeros(1), np.ones(1)
    if df < 0:
        raise ValueError("df must be non-negative")
    # U = 2T with T ~ Gamma(df/2, 1)
    t, w = gauss_laguerre(n, df / 2.0 - 1.0)
    return 2.0 * t, w


def _tensor_expectation(g, df_u: float, n: int) -> float:
    u, wu = chi2_rule(df_u, n)
    w, ww = chi2_rule(1.0, n)
    vals = np.asarray(g(u[:, None], w[None, :]), dtype=float)
    vals = np.broadcast_to(vals, (u.size, w.size))
    return float(wu @ vals @ ww)


def numeric_expectation(
    g: Callable[[np.ndarray, np.ndarray], np.ndarray],
    df_u: float,
    quad: QuadratureSpec = QuadratureSpec(),
) -> float:
    """E[g(U, W)] for independent U ~ chi-square(df_u) and W ~ chi-square(1).

    ``g`` is called once per rule on broadcastable node grids. The node count
    is doubled until two successive rules agree to ``quad.target_rel_tol``;
    two failed doublings raise QuadratureConvergenceError.
    """
    n = quad.nodes_per_axis
    prev = _tensor_expectation(g, df_u, n)
    for _ in range(2):
        n *= 2
        cur = _tensor_expectation(g, df_u, n)
        if abs(cur - prev) <= quad.target_rel_tol * max(abs(cur), 1e-300):
            return cur
        prev = cur
    raise QuadratureConvergenceError(
        f"no convergence to rel tol {quad.target_rel_tol} up to {n} nodes per axis"
    )
