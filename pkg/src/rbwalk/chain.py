"""Maximal-entropy chains on a graph, in discrete and continuous time.

Builds the discrete transition matrix ``P`` and the jump-process generator
``Q`` from Perron eigendata, and evaluates the two entropy functionals:

* ``H(P) = -sum_ij pi_i p_ij log p_ij`` (nats per step)
* ``h_eta(Q) = -eta sum_i pi_i q_ii - sum_{i != j} pi_i q_ij log q_ij``
  (nats per unit time)
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .graph import DirectedGraph, GraphMode, require_valid
from .spectral import PerronData, stationary_rb

__all__ = [
    "DiscreteChain",
    "Generator",
    "EntropyConfig",
    "build_discrete_rb",
    "build_rb_generator",
    "scale_generator",
    "discrete_entropy_rate",
    "differential_entropy_rate",
    "retention_rate",
    "stationary_of_generator",
    "check_generator",
    "path_probability_formula",
    "result_bundle",
]

STATIONARY_RESIDUAL_TOL = 1e-10


def _frozen(a):
    a = np.array(a, dtype=float)
    a.setflags(write=False)
    return a


def xlogx(x):
    """Elementwise ``x log x`` with ``0 log 0 = 0``."""
    x = np.asarray(x, dtype=float)
    out = np.zeros_like(x)
    pos = x > 0
    out[pos] = x[pos] * np.log(x[pos])
    return out


@dataclass(frozen=True, eq=False)
class DiscreteChain:
    P: np.ndarray
    pi: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "P", _frozen(self.P))
        object.__setattr__(self, "pi", _frozen(self.pi))


@dataclass(frozen=True, eq=False)
class Generator:
    """Generator matrix ``Q`` (rows sum to zero) and its invariant law ``pi``."""

    Q: np.ndarray
    pi: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "Q", _frozen(self.Q))
        object.__setattr__(self, "pi", _frozen(self.pi))

    @classmethod
    def from_matrix(cls, Q) -> "Generator":
        return cls(Q, stationary_of_generator(Q))

    @property
    def rates(self) -> np.ndarray:
        return -np.diag(self.Q)

    @property
    def n(self) -> int:
        return self.Q.shape[0]


@dataclass(frozen=True)
class EntropyConfig:
    eta: float = 1.0

    def __post_init__(self):
        if not self.eta > 0:
            raise ValueError(f"eta must be positive, got {self.eta}")


def check_generator(q: Generator, g: DirectedGraph | None = None, tol: float = 1e-12) -> list[str]:
    """Return a list of violated generator invariants (empty when valid).

    Row and balance tolerances are relative to the largest rate.
    """
    Q, pi = q.Q, q.pi
    scale = max(1.0, float(np.max(np.abs(Q))))
    problems = []
    off = Q - np.diag(np.diag(Q))
    if np.any(off < 0):
        problems.append("negative off-diagonal rate")
    if np.any(np.diag(Q) >= 0):
        problems.append("nonnegative diagonal entry")
    if np.max(np.abs(Q.sum(axis=1))) > tol * scale:
        problems.append("rows do not sum to zero")
    if np.max(np.abs(Q.T @ pi)) > tol * scale:
        problems.append("pi is not invariant")
    if abs(pi.sum() - 1.0) > tol or np.any(pi <= 0):
        problems.append("pi is not a positive probability vector")
    if g is not None and np.any((off > 0) & (g.adjacency == 0)):
        problems.append("rate on a non-edge")
    return problems


def build_discrete_rb(p: PerronData, g: DirectedGraph) -> DiscreteChain:
    """``p_ij = a_ij phi_j / (lambda phi_i)``, stationary law ``phi * phi_hat``."""
    A = g.adjacency.astype(float)
    P = A * np.outer(1.0 / p.phi, p.phi) / p.lam
    return DiscreteChain(P, stationary_rb(p))


def build_rb_generator(p: PerronData, g: DirectedGraph) -> Generator:
    """``diag(phi)^-1 A diag(phi) - lambda I``; every holding rate equals lambda."""
    require_valid(g, GraphMode.CONTINUOUS_TIME)
    A = g.adjacency.astype(float)
    Q = A * np.outer(1.0 / p.phi, p.phi)
    np.fill_diagonal(Q, -p.lam)
    return Generator(Q, stationary_rb(p))


def scale_generator(q: Generator, cfg: EntropyConfig) -> Generator:
    """``exp(eta - 1) * Q``; the maximiser of ``h_eta``. Invariant law unchanged."""
    return Generator(np.exp(cfg.eta - 1.0) * q.Q, q.pi)


def discrete_entropy_rate(c: DiscreteChain) -> float:
    return float(-np.sum(c.pi[:, None] * xlogx(c.P)))


def retention_rate(q: Generator) -> float:
    """Average rate of leaving the current node, ``-sum_i pi_i q_ii``."""
    return float(-q.pi @ np.diag(q.Q))


def differential_entropy_rate(q: Generator, cfg: EntropyConfig = EntropyConfig()) -> float:
    off = q.Q - np.diag(np.diag(q.Q))
    return cfg.eta * retention_rate(q) - float(np.sum(q.pi[:, None] * xlogx(off)))


def stationary_of_generator(Q) -> np.ndarray:
    """Solve ``Q' pi = 0, sum(pi) = 1`` with the last balance row replaced.

    Raises ``np.linalg.LinAlgError`` when the system is singular (reducible
    support) or the solution is not a positive probability vector.
    """
    Q = np.asarray(Q, dtype=float)
    n = Q.shape[0]
    M = Q.T.copy()
    M[-1, :] = 1.0
    rhs = np.zeros(n)
    rhs[-1] = 1.0
    if np.linalg.cond(M) > 1e12:
        raise np.linalg.LinAlgError("generator balance system is singular; support not strongly connected")
    pi = np.linalg.solve(M, rhs)
    residual = float(np.max(np.abs(Q.T @ pi)))
    scale = max(1.0, float(np.max(np.abs(Q))))
    if residual > STATIONARY_RESIDUAL_TOL * scale or np.any(pi <= 0):
        raise np.linalg.LinAlgError(f"no positive invariant law (residual {residual:.3e})")
    return pi


def path_probability_formula(p: PerronData, i: int, j: int, steps: int, conditional: bool = False) -> float:
    """Probability of any single ``steps``-edge walk from ``i`` to ``j``.

    Stationary start gives ``phi_hat_i phi_j / lambda**N``; conditioning on
    ``X_0 = i`` gives ``phi_j / (phi_i lambda**N)``.
    """
    scale = p.lam ** float(steps)
    if conditional:
        return float(p.phi[j] / (p.phi[i] * scale))
    # phi_hat_i phi_j == pi_i phi_j / phi_i, which is free of the eigenvector scale
    pi_i = stationary_rb(p)[i]
    return float(pi_i * p.phi[j] / (p.phi[i] * scale))


def result_bundle(p: PerronData, chain: DiscreteChain, q: Generator | None, cfg: EntropyConfig) -> dict:
    """Plain-dict summary of a construction, ready for serialisation."""
    bundle = {
        "lambda": p.lam,
        "phi": p.phi.tolist(),
        "phi_hat": p.phi_hat.tolist(),
        "pi": chain.pi.tolist(),
        "P": chain.P.tolist(),
        "Q": None,
        "eta": cfg.eta,
        "h_eta": None,
        "H_discrete": discrete_entropy_rate(chain),
        "residual": p.residual,
    }
    if q is not None:
        scaled = scale_generator(q, cfg)
        bundle["Q"] = scaled.Q.tolist()
        bundle["h_eta"] = differential_entropy_rate(scaled, cfg)
    return bundle
