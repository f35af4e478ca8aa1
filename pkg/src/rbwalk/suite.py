"""End-to-end certification run on one graph, as used by ``rbwalk verify``."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .chain import (
    EntropyConfig,
    build_discrete_rb,
    build_rb_generator,
    check_generator,
    differential_entropy_rate,
    discrete_entropy_rate,
    scale_generator,
)
from .errors import CertificationError
from .graph import DirectedGraph
from .jumps import embed, exact_delta_entropy, sample_ensemble, small_delta_entropy, transition_kernel
from .spectral import perron
from .verify import (
    dual_certificate,
    exact_path_check,
    flow_consistency,
    joint_sum_rule,
    jump_count_law,
    maximality_sweep,
    path_equalization_check,
)

ETAS = (0.5, 1.0, 2.0, 5.0)
DELTAS = (1e-2, 1e-3, 1e-4)


@dataclass
class Check:
    name: str
    passed: bool
    observed: object
    tolerance: object
    detail: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {"name": self.name, "passed": bool(self.passed), "observed": self.observed,
                "tolerance": self.tolerance, "detail": self.detail}


@dataclass
class SuiteOptions:
    eta: float = 1.0
    trials: int = 1000
    perturbations: int = 100
    seed: int = 42
    i: int = 0
    j: int = 0
    steps: int = 2
    t_f: float = 1.0
    trajectories: int = 100_000
    max_steps_exact: int = 8
    tol: float = 1e-12


def delta_table(q, deltas=DELTAS) -> list[dict]:
    rows = []
    for d in deltas:
        exact = exact_delta_entropy(q, d)
        approx = small_delta_entropy(q, d)
        rows.append({"delta": d, "exact": exact, "expansion": approx, "ratio": exact / approx})
    return rows


def run_suite(g: DirectedGraph, opts: SuiteOptions = SuiteOptions(), generator_hook=None) -> list[Check]:
    """Run every certification; ``generator_hook`` may replace the constructed generator."""
    cfg = EntropyConfig(opts.eta)
    p = perron(g, tol=opts.tol)
    chain = build_discrete_rb(p, g)
    q = build_rb_generator(p, g)
    if generator_hook is not None:
        q = generator_hook(q)
    lam = p.lam
    checks = []

    problems = check_generator(q, g)
    checks.append(Check("generator_invariants", not problems, problems, 1e-12))

    h1 = differential_entropy_rate(q)
    checks.append(Check("entropy_attainment", abs(h1 - lam) <= 1e-10, h1, 1e-10, {"lambda": lam}))

    H = discrete_entropy_rate(chain)
    checks.append(Check("discrete_entropy_log_lambda", abs(H - math.log(lam)) <= 1e-10, H, 1e-10,
                        {"log_lambda": math.log(lam)}))

    gaps = {}
    for eta in sorted(set(ETAS) | {opts.eta}):
        c = EntropyConfig(eta)
        gaps[str(eta)] = differential_entropy_rate(scale_generator(q, c), c) - math.exp(eta - 1) * lam
    worst = max(abs(v) for v in gaps.values())
    checks.append(Check("scaled_family", worst <= 1e-10, worst, 1e-10, {"gaps": gaps}))

    identity = float(np.max(np.abs(q.Q - lam * (chain.P - np.eye(g.n)))))
    checks.append(Check("generator_discrete_identity", identity <= 1e-12, identity, 1e-12))

    try:
        sweep = maximality_sweep(g, p, cfg, trials=opts.trials, seed=opts.seed,
                                 perturbations=opts.perturbations)
        checks.append(Check("maximality_sweep", True, sweep.max_h, 1e-9, sweep.to_dict()))
    except CertificationError as exc:
        checks.append(Check("maximality_sweep", False, None, 1e-9, {"counterexample": exc.instance}))

    cert = dual_certificate(p, g)
    dual_err = max(abs(cert.inner_max - lam), abs(cert.lagrangian - lam))
    checks.append(Check("dual_certificate", dual_err <= 1e-10, cert.inner_max, 1e-10, {
        "alpha": cert.alpha.tolist(), "beta": cert.beta.tolist(),
        "lagrangian": cert.lagrangian, "stationarity": cert.stationarity}))

    flows = flow_consistency(g, 100, opts.seed)
    flow_ok = max(flows["max_gap"], flows["max_row_balance"], flows["max_column_balance"]) <= 1e-10
    checks.append(Check("flow_reparameterization", flow_ok, flows["max_gap"], 1e-10, flows))

    dev = err = 0.0
    max_n = opts.max_steps_exact if g.n <= 6 else min(opts.max_steps_exact, 4)
    for i in range(g.n):
        for j in range(g.n):
            for N in range(1, max_n + 1):
                res = exact_path_check(g, p, chain, i, j, N)
                dev, err = max(dev, res["max_deviation"]), max(err, res["sum_rule_error"])
    checks.append(Check("path_products_exact", dev <= 1e-12 and err <= 1e-10, dev, 1e-12,
                        {"max_steps": max_n, "sum_rule_error": err, "sum_rule_tolerance": 1e-10}))

    joint_err = joint_sum_rule(g, p, q, opts.i, opts.j, opts.t_f)
    checks.append(Check("joint_sum_rule", joint_err <= 1e-8, joint_err, 1e-8))

    report = path_equalization_check(g, p, opts.i, opts.j, opts.steps, opts.t_f,
                                     opts.trajectories, opts.seed, q=q)
    checks.append(Check("path_equalization_mc", report.passed, report.max_pair_z, 4.0, report.to_dict()))

    ens = sample_ensemble(embed(q), opts.i, opts.t_f, count=opts.trajectories, seed=opts.seed + 1)
    law = jump_count_law(ens.n_jumps, lam * opts.t_f)
    checks.append(Check("jump_count_poisson", abs(law["z"]) <= 3.0 and law["pvalue"] > 1e-3,
                        law["z"], {"z": 3.0, "pvalue": 1e-3}, law))

    semi = 0.0
    rng = np.random.default_rng([opts.seed, 99])
    for s, t in rng.uniform(0.0, 5.0, size=(5, 2)):
        semi = max(semi, float(np.max(np.abs(
            transition_kernel(q, s + t) - transition_kernel(q, s) @ transition_kernel(q, t)))))
    invariance = max(float(np.max(np.abs(q.pi @ transition_kernel(q, t) - q.pi))) for t in (0.1, 1.0, 10.0))
    checks.append(Check("kernel_semigroup", semi <= 1e-10 and invariance <= 1e-10, semi, 1e-10,
                        {"invariance": invariance}))

    table = delta_table(q)
    ratios = [row["ratio"] for row in table]
    monotone = all(abs(b - 1) < abs(a - 1) for a, b in zip(ratios, ratios[1:]))
    checks.append(Check("delta_expansion", monotone and abs(ratios[-1] - 1) <= 0.02,
                        ratios[-1], 0.02, {"table": table}))
    return checks
