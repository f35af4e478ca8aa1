"""Perron-Frobenius eigendata of an irreducible adjacency matrix."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ConvergenceError
from .graph import DirectedGraph, GraphMode, require_valid

__all__ = ["PerronData", "perron", "stationary_rb"]

DEFAULT_TOL = 1e-12
DEFAULT_MAX_ITER = 100_000
SHIFT = 1.0
_POLISH_PATIENCE = 20


@dataclass(frozen=True, eq=False)
class PerronData:
    """Dominant eigenvalue with positive right/left eigenvectors.

    ``phi`` has unit max-entry and ``phi_hat`` is scaled so that
    ``phi @ phi_hat == 1``.
    """

    lam: float
    phi: np.ndarray
    phi_hat: np.ndarray
    residual: float

    def __post_init__(self):
        for name in ("phi", "phi_hat"):
            arr = np.array(getattr(self, name), dtype=float)
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)

    def rescaled(self, s: float) -> "PerronData":
        """Same eigendata with ``phi -> s*phi`` and ``phi_hat -> phi_hat/s``."""
        return PerronData(self.lam, self.phi * s, self.phi_hat / s, self.residual)


def _dominant_vector(M, tol, max_iter):
    """Power iteration on ``M + SHIFT*I``; returns (eigenvalue of M, vector, residual).

    Once the residual is below ``tol`` iteration continues until it stops
    improving, so the vector is accurate to rounding rather than to ``tol``.
    """
    n = M.shape[0]
    shifted = M + SHIFT * np.eye(n)
    v = np.ones(n)
    best = (np.inf, None, None)
    stalled = 0
    for _ in range(max_iter):
        w = shifted @ v
        v = w / np.max(np.abs(w))
        Mv = M @ v
        lam = float(v @ Mv) / float(v @ v)
        residual = float(np.max(np.abs(Mv - lam * v)))
        if residual < best[0]:
            best, stalled = (residual, lam, v), 0
        else:
            stalled += 1
        if best[0] <= tol and (stalled >= _POLISH_PATIENCE or best[0] == 0.0):
            break
    residual, lam, v = best
    if residual > tol:
        raise ConvergenceError(f"power iteration did not converge in {max_iter} iterations", residual)
    return lam, v, residual


def perron(g: DirectedGraph, tol: float = DEFAULT_TOL, max_iter: int = DEFAULT_MAX_ITER) -> PerronData:
    """Perron root and eigenvectors of the adjacency matrix of ``g``.

    Iterates on ``A + I``, which is primitive for every irreducible ``A``,
    so periodic graphs (directed cycles and the like) converge too.
    """
    require_valid(g, GraphMode.DISCRETE_TIME)
    A = g.adjacency.astype(float)
    lam, phi, res_right = _dominant_vector(A, tol, max_iter)
    _, phi_hat, _ = _dominant_vector(A.T, tol, max_iter)
    if np.any(phi <= 0) or np.any(phi_hat <= 0):
        raise ConvergenceError("Perron vector is not strictly positive", max(res_right, tol))
    phi = phi / np.max(phi)
    phi_hat = phi_hat / float(phi @ phi_hat)
    # two-sided Rayleigh quotient: error is quadratic in the eigenvector errors
    lam = float(phi_hat @ A @ phi)
    res_left = float(np.max(np.abs(A.T @ phi_hat - lam * phi_hat)))
    residual = max(float(np.max(np.abs(A @ phi - lam * phi))), res_left)
    if residual > tol:
        raise ConvergenceError("eigen-residual above tolerance after normalization", residual)
    return PerronData(lam, phi, phi_hat, residual)


def stationary_rb(p: PerronData) -> np.ndarray:
    """Stationary law ``phi_i * phi_hat_i`` of the maximal-entropy chain."""
    pi = p.phi * p.phi_hat
    return pi / pi.sum()
