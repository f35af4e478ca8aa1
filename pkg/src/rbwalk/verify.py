"""Numerical certification of the maximal-entropy and path-equalisation claims.

Entropy maximality is attacked by random feasible generators and by
first-order perturbations around the optimum in flow coordinates
``r_ij = pi_i q_ij``; the upper bound is backed by the explicit dual pair
``beta = log phi``, ``alpha = 1 - beta``. Path equalisation is checked
exactly by enumerating walks and statistically by simulation.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field
from itertools import combinations

import numpy as np
from scipy import linalg, stats

from .chain import (
    DiscreteChain,
    EntropyConfig,
    Generator,
    build_discrete_rb,
    build_rb_generator,
    differential_entropy_rate,
    scale_generator,
)
from .errors import CertificationError
from .graph import DirectedGraph, GraphMode, count_paths, require_valid, walk_count_matrix
from .jumps import embed, sample_ensemble, transition_kernel
from .spectral import PerronData

__all__ = [
    "FlowMatrix",
    "DualCertificate",
    "SweepReport",
    "PathReport",
    "flow_of",
    "objective_f",
    "sample_feasible_generator",
    "random_circulation",
    "maximality_sweep",
    "dual_certificate",
    "enumerate_paths",
    "exact_path_check",
    "joint_sum_rule",
    "path_equalization_check",
    "jump_count_law",
    "flow_consistency",
]

SWEEP_SLACK = 1e-9
PERTURB_SLACK = 1e-8
PERTURB_STEP = 1e-4
DEFAULT_RATE_RANGE = (0.1, 10.0)
N_SIGMA = 4.0


@dataclass(frozen=True, eq=False)
class FlowMatrix:
    """Flow rates ``r_ij = pi_i q_ij``; the diagonal carries minus the outflow."""

    r: np.ndarray

    @property
    def row_balance(self) -> float:
        return float(np.max(np.abs(self.r.sum(axis=1))))

    @property
    def column_balance(self) -> float:
        return float(np.max(np.abs(self.r.sum(axis=0))))


def flow_of(q: Generator) -> FlowMatrix:
    return FlowMatrix(q.pi[:, None] * q.Q)


def objective_f(r: FlowMatrix, pi, g: DirectedGraph, eta: float = 1.0) -> float:
    """``-eta sum_i r_ii - sum_{i != j} r_ij a_ij log(r_ij / (pi_i a_ij))``.

    With ``r = flow_of(Q)`` this is ``h_eta(Q)``.
    """
    R = np.asarray(r.r if isinstance(r, FlowMatrix) else r, dtype=float)
    pi = np.asarray(pi, dtype=float)
    A = g.adjacency
    off = R - np.diag(np.diag(R))
    if np.any((off > 0) & (A == 0)):
        bad = [(int(a), int(b)) for a, b in zip(*np.nonzero((off > 0) & (A == 0)))]
        raise ValueError(f"flow on non-edges {bad}")
    mask = (off > 0) & (A == 1)
    i_idx = np.nonzero(mask)[0]
    vals = off[mask]
    return -eta * float(np.trace(R)) - float(np.sum(vals * np.log(vals / pi[i_idx])))


def sample_feasible_generator(g: DirectedGraph, seed, rate_range=DEFAULT_RATE_RANGE) -> Generator:
    """Log-uniform rates on the edges of ``g``, zero elsewhere."""
    lo, hi = rate_range
    if not 0 < lo <= hi:
        raise ValueError("need 0 < lo <= hi")
    rng = np.random.default_rng(seed)
    A = g.adjacency.astype(float)
    np.fill_diagonal(A, 0.0)
    Q = A * np.exp(rng.uniform(np.log(lo), np.log(hi), size=A.shape))
    np.fill_diagonal(Q, -Q.sum(axis=1))
    return Generator.from_matrix(Q)


def random_circulation(g: DirectedGraph, rng) -> np.ndarray:
    """Random edge flow with inflow = outflow at every node, max |entry| = 1.

    Drawn from the null space of the node-edge incidence matrix, so both
    balance constraints of the flow problem are preserved exactly.
    """
    edges = [(i, j) for i, j in g.edges if i != j]
    B = np.zeros((g.n, len(edges)))
    for e, (i, j) in enumerate(edges):
        B[i, e] += 1.0
        B[j, e] -= 1.0
    basis = linalg.null_space(B)
    d = basis @ rng.standard_normal(basis.shape[1])
    D = np.zeros((g.n, g.n))
    for e, (i, j) in enumerate(edges):
        D[i, j] = d[e]
    return D / np.max(np.abs(D))


@dataclass
class SweepReport:
    n: int
    eta: float
    trials: int
    seed: int
    ceiling: float
    h_at_optimum: float
    max_h: float
    min_margin: float
    mean_margin: float
    perturbations: int
    perturbation_step: float
    max_perturbation_increase: float
    passed: bool
    counterexample: dict | None = None

    def to_dict(self) -> dict:
        return asdict(self)


def maximality_sweep(g: DirectedGraph, p: PerronData, cfg: EntropyConfig = EntropyConfig(),
                     trials: int = 1000, seed: int = 0, perturbations: int = 100,
                     step: float = PERTURB_STEP, rate_range=DEFAULT_RATE_RANGE,
                     raise_on_failure: bool = True) -> SweepReport:
    """Check ``h_eta(Q) <= exp(eta-1) lambda`` on random and perturbed generators."""
    if trials < 1:
        raise ValueError("trials must be at least 1")
    require_valid(g, GraphMode.CONTINUOUS_TIME)
    ceiling = math.exp(cfg.eta - 1.0) * p.lam
    hs = np.empty(trials)
    counterexample = None
    for t in range(trials):
        q = sample_feasible_generator(g, [seed, t], rate_range)
        hs[t] = differential_entropy_rate(q, cfg)
        if hs[t] > ceiling + SWEEP_SLACK and counterexample is None:
            counterexample = {"trial": t, "h_eta": hs[t], "Q": q.Q.tolist()}

    best = scale_generator(build_rb_generator(p, g), cfg)
    h_best = differential_entropy_rate(best, cfg)
    r_best = flow_of(best).r
    edge_min = float(np.min(r_best[(g.adjacency == 1) & ~np.eye(g.n, dtype=bool)]))
    eps = min(step, 0.5 * edge_min, 0.5 * float(np.min(best.pi)))
    rng = np.random.default_rng([seed, trials, 1])
    worst = -np.inf
    for k in range(perturbations):
        D = random_circulation(g, rng)
        dpi = rng.standard_normal(g.n)
        dpi -= dpi.mean()
        dpi /= np.max(np.abs(dpi))
        R = r_best + eps * D
        np.fill_diagonal(R, 0.0)
        np.fill_diagonal(R, -R.sum(axis=1))
        pi = best.pi + eps * dpi
        q = Generator(R / pi[:, None], pi)
        increase = differential_entropy_rate(q, cfg) - h_best
        worst = max(worst, increase)
        if increase > PERTURB_SLACK and counterexample is None:
            counterexample = {"perturbation": k, "increase": increase, "Q": q.Q.tolist()}

    margins = ceiling - hs
    report = SweepReport(
        n=g.n, eta=cfg.eta, trials=trials, seed=seed, ceiling=ceiling, h_at_optimum=h_best,
        max_h=float(hs.max()), min_margin=float(margins.min()), mean_margin=float(margins.mean()),
        perturbations=perturbations, perturbation_step=eps,
        max_perturbation_increase=float(worst) if perturbations else 0.0,
        passed=counterexample is None, counterexample=counterexample,
    )
    if counterexample is not None and raise_on_failure:
        raise CertificationError("entropy ceiling exceeded", counterexample)
    return report


@dataclass(frozen=True, eq=False)
class DualCertificate:
    """Multipliers for the row/column balance constraints and what they certify.

    ``inner_max`` is ``sum_{i != j} pi_i (phi_j / phi_i) a_ij``;
    ``lagrangian`` is the full Lagrangian evaluated at the closed-form
    maximiser ``r*``; ``stationarity`` is the largest gradient entry there.
    """

    alpha: np.ndarray
    beta: np.ndarray
    r_star: np.ndarray
    inner_max: float
    lagrangian: float
    stationarity: float


def lagrangian(R, pi, alpha, beta, g: DirectedGraph) -> float:
    R = np.asarray(R, dtype=float)
    return (objective_f(R, pi, g)
            + float(alpha @ R.sum(axis=1))
            + float(beta @ R.sum(axis=0)))


def dual_certificate(p: PerronData, g: DirectedGraph, pi=None) -> DualCertificate:
    """Dual pair ``beta = log phi``, ``alpha = 1 - beta`` and its inner maximum.

    ``pi`` defaults to the maximal-entropy law ``phi * phi_hat``.
    """
    if pi is None:
        pi = p.phi * p.phi_hat / float(p.phi @ p.phi_hat)
    pi = np.asarray(pi, dtype=float)
    beta = np.log(p.phi)
    alpha = 1.0 - beta
    A = g.adjacency.astype(float)
    offmask = (A == 1) & ~np.eye(g.n, dtype=bool)
    exponent = alpha[:, None] + beta[None, :] - 1.0
    R = np.where(offmask, pi[:, None] * np.exp(exponent), 0.0)
    np.fill_diagonal(R, -R.sum(axis=1))
    inner = float(np.sum(np.where(offmask, pi[:, None] * np.outer(1.0 / p.phi, p.phi), 0.0)))
    value = lagrangian(R, pi, alpha, beta, g)
    # d/dr_ij of the edge terms is -log(r_ij / pi_i) - 1 + alpha_i + beta_j
    rows = np.nonzero(offmask)[0]
    grad = exponent[offmask] - np.log(R[offmask] / pi[rows])
    stationarity = float(np.max(np.abs(grad)))
    return DualCertificate(alpha, beta, R, inner, value, stationarity)


def enumerate_paths(g: DirectedGraph, i: int, j: int, steps: int, cap: int = 100_000) -> list[tuple[int, ...]]:
    """All walks of exactly ``steps`` edges from ``i`` to ``j``, lexicographically."""
    if steps < 1:
        raise ValueError("steps must be at least 1")
    total = count_paths(g, i, j, steps)
    if total > cap:
        raise ValueError(f"{total} walks exceed cap {cap}; use fewer steps")
    # reach[k][v]: v can reach j in exactly k steps
    reach = [walk_count_matrix(g, k)[:, j] > 0 for k in range(steps + 1)]
    succ = [g.successors(v) for v in range(g.n)]
    out = []
    path = [i]

    def dfs(v, left):
        if left == 0:
            if v == j:
                out.append(tuple(path))
            return
        for w in succ[v]:
            if reach[left - 1][w]:
                path.append(w)
                dfs(w, left - 1)
                path.pop()

    if reach[steps][i]:
        dfs(i, steps)
    return out


def _path_products(P, paths) -> np.ndarray:
    arr = np.asarray(paths, dtype=np.int64)
    return np.prod(P[arr[:, :-1], arr[:, 1:]], axis=1)


def exact_path_check(g: DirectedGraph, p: PerronData, chain: DiscreteChain, i: int, j: int,
                     steps: int, cap: int = 1_000_000) -> dict:
    """Per-walk probability products against ``phi_j / (phi_i lambda**N)``.

    Returns the largest product deviation and the error of the sum rule
    ``count * per-walk probability == (P**N)_ij``.
    """
    paths = enumerate_paths(g, i, j, steps, cap)
    formula = float(p.phi[j] / (p.phi[i] * p.lam**steps))
    deviation = float(np.max(np.abs(_path_products(chain.P, paths) - formula))) if paths else 0.0
    power = np.linalg.matrix_power(chain.P, steps)[i, j]
    return {
        "i": i, "j": j, "steps": steps, "count": len(paths), "per_path": formula,
        "max_deviation": deviation, "sum_rule_error": float(abs(len(paths) * formula - power)),
    }


def joint_sum_rule(g: DirectedGraph, p: PerronData, q: Generator, i: int, j: int, t_f: float,
                   tail: float = 1e-12) -> float:
    """Error of ``sum_N count_N Poisson(N; lambda t_f) phi_j/(phi_i lambda**N) = exp(Q t_f)_ij``."""
    mean = p.lam * t_f
    n_max = int(stats.poisson.isf(tail, mean)) + 1
    total = 0.0
    counts = np.eye(g.n, dtype=object)
    A = g.adjacency.astype(object)
    for N in range(n_max + 1):
        total += float(counts[i, j]) * stats.poisson.pmf(N, mean) * p.phi[j] / (p.phi[i] * p.lam**N)
        counts = counts @ A
    return float(abs(total - transition_kernel(q, t_f)[i, j]))


@dataclass
class PathReport:
    i: int
    j: int
    N: int
    t_f: float
    paths: list
    exact_prob_each: float
    joint_prob_each: float
    empirical_counts: dict
    samples: int
    seed: int
    vacuous: bool = False
    max_product_deviation: float = 0.0
    max_pair_z: float = 0.0
    max_joint_z: float = 0.0
    passed: bool = True
    notes: list = field(default_factory=list)

    def to_dict(self) -> dict:
        d = asdict(self)
        d["paths"] = [list(pth) for pth in self.paths]
        d["empirical_counts"] = {"-".join(map(str, k)): v for k, v in self.empirical_counts.items()}
        return d


def path_equalization_check(g: DirectedGraph, p: PerronData, i: int, j: int, steps: int,
                            t_f: float, samples: int, seed: int, q: Generator | None = None,
                            n_sigma: float = N_SIGMA) -> PathReport:
    """Exact and Monte Carlo check that all ``steps``-jump walks ``i -> j`` are equally likely.

    ``q`` overrides the simulated generator (defaults to the maximal-entropy one).
    """
    chain = build_discrete_rb(p, g)
    if q is None:
        q = build_rb_generator(p, g)
    paths = enumerate_paths(g, i, j, steps)
    exact = float(p.phi[j] / (p.phi[i] * p.lam**steps))
    joint = float(stats.poisson.pmf(steps, p.lam * t_f)) * exact
    report = PathReport(i, j, steps, t_f, paths, exact, joint, {}, samples, seed)
    if paths:
        report.max_product_deviation = float(np.max(np.abs(_path_products(chain.P, paths) - exact)))
        if report.max_product_deviation > 1e-12:
            report.passed = False
            report.notes.append("path products differ from the closed form")
    if len(paths) < 2:
        report.vacuous = True
        report.notes.append(f"{len(paths)} walk(s) of {steps} steps from {i} to {j}; nothing to compare")
        return report

    ens = sample_ensemble(embed(q), i, t_f, count=samples, seed=seed)
    rows = ens.paths_with(steps, j)
    found, counts = np.unique(rows, axis=0, return_counts=True) if len(rows) else ([], [])
    tally = {tuple(int(v) for v in r): int(c) for r, c in zip(found, counts)}
    report.empirical_counts = {pth: tally.get(pth, 0) for pth in paths}

    sd_pair = math.sqrt(2.0 * samples * joint)
    sd_one = math.sqrt(samples * joint * (1.0 - joint))
    c = report.empirical_counts
    report.max_pair_z = max(abs(c[a] - c[b]) / sd_pair for a, b in combinations(paths, 2))
    report.max_joint_z = max(abs(c[a] - samples * joint) / sd_one for a in paths)
    if report.max_pair_z >= n_sigma:
        report.passed = False
        report.notes.append("path frequencies differ beyond multinomial error")
    if report.max_joint_z >= n_sigma:
        report.passed = False
        report.notes.append("joint frequency off the Poisson-times-path value")
    return report


def jump_count_law(n_jumps, mean: float) -> dict:
    """Compare jump counts with Poisson(``mean``): z-score of the sample mean and a chi-square fit.

    Bins with expected count below 5 are merged into the nearest bin that
    reaches 5, so observed and expected totals agree.
    """
    n_jumps = np.asarray(n_jumps)
    S = len(n_jumps)
    z = (n_jumps.mean() - mean) / math.sqrt(mean / S)
    kmax = max(int(n_jumps.max()), int(stats.poisson.isf(1e-12, mean)))
    ks = np.arange(kmax + 1)
    expected = S * stats.poisson.pmf(ks, mean)
    expected[-1] += S * stats.poisson.sf(kmax, mean)
    observed = np.bincount(n_jumps, minlength=kmax + 1)[: kmax + 1].astype(float)
    big = np.flatnonzero(expected >= 5)
    lo, hi = big[0], big[-1]
    e = expected[lo:hi + 1].copy()
    o = observed[lo:hi + 1].copy()
    e[0] += expected[:lo].sum()
    o[0] += observed[:lo].sum()
    e[-1] += expected[hi + 1:].sum()
    o[-1] += observed[hi + 1:].sum()
    chi2 = float(np.sum((o - e) ** 2 / e))
    pvalue = float(stats.chi2.sf(chi2, len(e) - 1))
    return {"samples": S, "mean": float(n_jumps.mean()), "expected_mean": mean, "z": float(z),
            "chi2": chi2, "bins": len(e), "pvalue": pvalue}


def flow_consistency(g: DirectedGraph, count: int, seed: int) -> dict:
    """Largest ``|objective_f(flow_of(Q), pi) - h_1(Q)|`` and balance residuals over random Q."""
    worst_gap = worst_row = worst_col = 0.0
    for t in range(count):
        q = sample_feasible_generator(g, [seed, t, 7])
        r = flow_of(q)
        worst_gap = max(worst_gap, abs(objective_f(r, q.pi, g) - differential_entropy_rate(q)))
        worst_row = max(worst_row, r.row_balance)
        worst_col = max(worst_col, r.column_balance)
    return {"count": count, "max_gap": worst_gap, "max_row_balance": worst_row,
            "max_column_balance": worst_col}
