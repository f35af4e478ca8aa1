import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from oracles import brute_force_walks, poisson_pmf
from rbwalk.chain import (
    EntropyConfig,
    build_discrete_rb,
    build_rb_generator,
    check_generator,
    differential_entropy_rate,
)
from rbwalk.errors import CertificationError
from rbwalk.graph import complete_graph, random_strongly_connected
from rbwalk.spectral import PerronData, perron
from rbwalk.verify import (
    dual_certificate,
    enumerate_paths,
    exact_path_check,
    flow_of,
    joint_sum_rule,
    jump_count_law,
    maximality_sweep,
    objective_f,
    path_equalization_check,
    random_circulation,
    sample_feasible_generator,
)

PLASTIC = 1.3247179572447458


def test_flow_two_cycle(two_cycle):
    r = flow_of(build_rb_generator(perron(two_cycle), two_cycle))
    np.testing.assert_allclose(r.r, [[-0.5, 0.5], [0.5, -0.5]], atol=1e-12)


def test_flow_k3(k3):
    r = flow_of(build_rb_generator(perron(k3), k3)).r
    np.testing.assert_allclose(r, np.where(np.eye(3) == 1, -2 / 3, 1 / 3), atol=1e-12)


def test_flow_plastic_balance(plastic):
    r = flow_of(build_rb_generator(perron(plastic), plastic))
    assert r.column_balance < 1e-10
    assert r.row_balance < 1e-10


def test_objective_examples(k3, two_cycle):
    q = build_rb_generator(perron(k3), k3)
    assert objective_f(flow_of(q), q.pi, k3) == pytest.approx(2.0, abs=1e-12)
    q2 = build_rb_generator(perron(two_cycle), two_cycle)
    assert objective_f(flow_of(q2), q2.pi, two_cycle) == pytest.approx(1.0, abs=1e-12)


def test_objective_uniform_circulation(k3):
    R = np.full((3, 3), 0.3)
    np.fill_diagonal(R, -0.6)
    pi = np.full(3, 1 / 3)
    by_hand = 1.8 - 1.8 * math.log(0.9)
    value = objective_f(R, pi, k3)
    assert value == pytest.approx(by_hand, abs=1e-14)
    assert value <= 2.0


def test_objective_support_violation(plastic):
    R = np.zeros((3, 3))
    R[0, 2] = 0.1
    R[0, 0] = -0.1
    with pytest.raises(ValueError, match="non-edges"):
        objective_f(R, np.full(3, 1 / 3), plastic)


def test_feasible_generator_deterministic(plastic):
    a = sample_feasible_generator(plastic, 3)
    b = sample_feasible_generator(plastic, 3)
    np.testing.assert_array_equal(a.Q, b.Q)
    assert check_generator(a, plastic) == []


def test_feasible_generator_unit_rates_is_rb(k3):
    q = sample_feasible_generator(k3, 0, rate_range=(1.0, 1.0))
    np.testing.assert_allclose(q.Q, build_rb_generator(perron(k3), k3).Q, atol=1e-12)


def test_feasible_generator_rate_range(k3):
    q = sample_feasible_generator(k3, 1, rate_range=(0.1, 10.0))
    off = q.Q[~np.eye(3, dtype=bool)]
    assert np.all((off >= 0.1) & (off <= 10.0))


def test_circulation_balances():
    rng = np.random.default_rng(0)
    for seed in range(10):
        g = random_strongly_connected(7, 0.3, seed)
        D = random_circulation(g, rng)
        np.testing.assert_allclose(D.sum(axis=1), D.sum(axis=0), atol=1e-12)
        assert np.all(D[g.adjacency == 0] == 0)
        assert np.max(np.abs(D)) == pytest.approx(1.0)


def test_sweep_k3(k3):
    report = maximality_sweep(k3, perron(k3), trials=1000, seed=0)
    assert report.passed
    assert report.max_h <= 2.0 + 1e-9
    assert report.ceiling == pytest.approx(2.0)
    assert report.max_perturbation_increase <= 1e-8


def test_sweep_plastic_ceiling(plastic):
    report = maximality_sweep(plastic, perron(plastic), trials=1000, seed=1)
    assert report.ceiling == pytest.approx(PLASTIC, abs=1e-10)
    assert report.max_h <= PLASTIC + 1e-9


def test_sweep_eta(plastic):
    cfg = EntropyConfig(2.5)
    report = maximality_sweep(plastic, perron(plastic), cfg, trials=300, seed=2)
    assert report.ceiling == pytest.approx(math.exp(1.5) * PLASTIC, abs=1e-9)
    assert report.h_at_optimum == pytest.approx(report.ceiling, abs=1e-10)
    assert report.passed


def test_sweep_zero_trials(k3):
    with pytest.raises(ValueError):
        maximality_sweep(k3, perron(k3), trials=0)


def test_sweep_detects_false_ceiling(k3):
    # claim lambda = 1 for K3; random generators easily beat that
    wrong = PerronData(1.0, np.ones(3), np.full(3, 1 / 3), 0.0)
    with pytest.raises(CertificationError) as err:
        maximality_sweep(k3, wrong, trials=200)
    assert err.value.instance["h_eta"] > 1.0


def test_dual_certificate_examples(k3, two_cycle, plastic):
    c = dual_certificate(perron(k3), k3)
    np.testing.assert_allclose(c.beta, c.beta[0])
    np.testing.assert_allclose(c.alpha, 1 - c.beta, atol=1e-12)
    assert c.inner_max == pytest.approx(2.0, abs=1e-10)
    assert dual_certificate(perron(two_cycle), two_cycle).inner_max == pytest.approx(1.0, abs=1e-10)
    cp = dual_certificate(perron(plastic), plastic)
    assert cp.inner_max == pytest.approx(PLASTIC, abs=1e-10)
    assert cp.lagrangian == pytest.approx(PLASTIC, abs=1e-10)
    assert cp.stationarity < 1e-12


def test_enumerate_examples(k3, two_cycle, plastic):
    assert enumerate_paths(k3, 0, 0, 2) == [(0, 1, 0), (0, 2, 0)]
    assert enumerate_paths(two_cycle, 0, 1, 2) == []
    assert enumerate_paths(plastic, 0, 0, 3) == [(0, 1, 2, 0)]


def test_enumerate_cap():
    with pytest.raises(ValueError, match="cap"):
        enumerate_paths(complete_graph(5), 0, 0, 8, cap=100)


@settings(max_examples=40, deadline=None)
@given(n=st.integers(2, 6), seed=st.integers(0, 2**32 - 1), steps=st.integers(1, 7), pick=st.integers(0, 35))
def test_enumerate_matches_brute_force(n, seed, steps, pick):
    g = random_strongly_connected(n, 0.35, seed)
    i, j = pick % n, (pick // n) % n
    assert enumerate_paths(g, i, j, steps) == sorted(brute_force_walks(g.adjacency.tolist(), i, j, steps))


@settings(max_examples=30, deadline=None)
@given(n=st.integers(2, 6), seed=st.integers(0, 2**32 - 1))
def test_exact_products_and_sum_rule(n, seed):
    g = random_strongly_connected(n, 0.3, seed)
    p = perron(g)
    c = build_discrete_rb(p, g)
    for N in range(1, 7):
        res = exact_path_check(g, p, c, seed % n, (seed // 7) % n, N)
        assert res["max_deviation"] <= 1e-12
        assert res["sum_rule_error"] <= 1e-10


def test_path_check_k3():
    g = complete_graph(3)
    p = perron(g)
    rep = path_equalization_check(g, p, 0, 0, 2, 1.0, samples=200_000, seed=3)
    assert rep.paths == [(0, 1, 0), (0, 2, 0)]
    assert rep.exact_prob_each == pytest.approx(0.25, abs=1e-12)
    assert rep.joint_prob_each == pytest.approx(poisson_pmf(2, 2.0) * 0.25, abs=1e-14)
    assert rep.joint_prob_each == pytest.approx(math.exp(-2) / 2, abs=1e-14)
    assert rep.joint_prob_each == pytest.approx(0.067668, abs=1e-6)
    assert rep.passed and not rep.vacuous
    assert sum(rep.empirical_counts.values()) > 0


def test_path_check_k3_three_steps():
    g = complete_graph(3)
    rep = path_equalization_check(g, perron(g), 0, 1, 3, 1.0, samples=50_000, seed=4)
    assert rep.paths == [(0, 1, 0, 1), (0, 1, 2, 1), (0, 2, 0, 1)]
    assert rep.exact_prob_each == pytest.approx(1 / 8, abs=1e-12)
    assert rep.max_product_deviation <= 1e-12


def test_path_check_vacuous(plastic):
    rep = path_equalization_check(plastic, perron(plastic), 0, 0, 3, 1.0, samples=1000, seed=0)
    assert rep.vacuous and rep.passed
    assert rep.paths == [(0, 1, 2, 0)]


def test_path_check_flags_wrong_generator(k3):
    p = perron(k3)
    skewed = sample_feasible_generator(k3, 0, rate_range=(0.2, 5.0))
    rep = path_equalization_check(k3, p, 0, 0, 2, 1.0, samples=200_000, seed=1, q=skewed)
    assert not rep.passed


@pytest.mark.parametrize("t_f", [0.5, 1.0, 3.0])
def test_joint_sum_rule(plastic, t_f):
    p = perron(plastic)
    q = build_rb_generator(p, plastic)
    for i in range(3):
        for j in range(3):
            assert joint_sum_rule(plastic, p, q, i, j, t_f) <= 1e-8


def test_jump_count_law_on_poisson_draws():
    draws = np.random.default_rng(0).poisson(2.0, size=100_000)
    law = jump_count_law(draws, 2.0)
    assert abs(law["z"]) < 4
    assert law["pvalue"] > 1e-3
    shifted = jump_count_law(draws + 1, 2.0)
    assert shifted["pvalue"] < 1e-10


def test_flow_objective_equals_entropy():
    for seed in range(20):
        g = random_strongly_connected(5, 0.4, seed)
        q = sample_feasible_generator(g, seed)
        assert objective_f(flow_of(q), q.pi, g) == pytest.approx(differential_entropy_rate(q), abs=1e-10)
