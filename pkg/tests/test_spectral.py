import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from oracles import plastic_root
from rbwalk.errors import ConvergenceError, GraphValidationError
from rbwalk.graph import DirectedGraph, cycle_graph, random_strongly_connected
from rbwalk.spectral import perron, stationary_rb

PLASTIC = 1.3247179572447458  # bisection on x**3 - x - 1, see oracles.plastic_root


def test_frozen_plastic_value():
    assert plastic_root() == pytest.approx(PLASTIC, abs=1e-15)


def test_k3(k3):
    p = perron(k3)
    assert p.lam == pytest.approx(2.0, abs=1e-12)
    np.testing.assert_allclose(p.phi, [1, 1, 1], atol=1e-12)
    np.testing.assert_allclose(p.phi * p.phi_hat, [1 / 3] * 3, atol=1e-12)


def test_two_cycle(two_cycle):
    p = perron(two_cycle)
    assert p.lam == pytest.approx(1.0, abs=1e-12)
    np.testing.assert_allclose(p.phi / p.phi[0], [1, 1], atol=1e-12)


def test_plastic(plastic):
    p = perron(plastic)
    assert abs(p.lam - PLASTIC) < 1e-9
    # A phi = lam phi forces phi ~ (1, lam, 1/lam); A' phi_hat = lam phi_hat forces (lam**2, lam, 1)
    np.testing.assert_allclose(p.phi / p.phi[0], [1, PLASTIC, 1 / PLASTIC], atol=1e-10)
    np.testing.assert_allclose(p.phi_hat / p.phi_hat[2], [PLASTIC**2, PLASTIC, 1], atol=1e-10)


def test_stationary_examples(k3, two_cycle, plastic):
    np.testing.assert_allclose(stationary_rb(perron(k3)), [1 / 3] * 3, atol=1e-12)
    np.testing.assert_allclose(stationary_rb(perron(two_cycle)), [0.5, 0.5], atol=1e-12)
    lam = PLASTIC
    w = np.array([lam**2, lam**2, 1 / lam])
    np.testing.assert_allclose(stationary_rb(perron(plastic)), w / w.sum(), atol=1e-10)


def test_periodic_graph_converges():
    p = perron(cycle_graph(7))
    assert p.lam == pytest.approx(1.0, abs=1e-12)
    np.testing.assert_allclose(p.phi, np.ones(7), atol=1e-12)


def test_rejects_reducible_graph():
    with pytest.raises(GraphValidationError):
        perron(DirectedGraph([[0, 1], [0, 0]]))


def test_non_convergence_carries_residual(plastic):
    with pytest.raises(ConvergenceError) as err:
        perron(plastic, max_iter=2)
    assert err.value.residual > 1e-12


def graphs():
    return st.builds(
        random_strongly_connected,
        n=st.integers(2, 8),
        density=st.floats(0.0, 0.7),
        seed=st.integers(0, 2**32 - 1),
    )


@settings(max_examples=50, deadline=None)
@given(g=graphs())
def test_perron_invariants(g):
    p = perron(g)
    A = g.adjacency
    assert np.all(p.phi > 0) and np.all(p.phi_hat > 0)
    assert abs(p.phi @ p.phi_hat - 1) < 1e-12
    assert p.residual <= 1e-12
    rows = A.sum(axis=1)
    assert rows.min() - 1e-12 <= p.lam <= rows.max() + 1e-12
    assert abs(stationary_rb(p).sum() - 1) < 1e-12


@settings(max_examples=30, deadline=None)
@given(g=graphs())
def test_shift_invariance(g):
    p = perron(g)
    shifted = perron(g.with_self_loops())
    assert shifted.lam - p.lam == pytest.approx(1.0, abs=1e-9)
    np.testing.assert_allclose(shifted.phi / shifted.phi.max(), p.phi / p.phi.max(), atol=1e-9)


@settings(max_examples=30, deadline=None)
@given(g=graphs(), s=st.floats(1e-3, 1e3))
def test_stationary_scale_free(g, s):
    p = perron(g)
    np.testing.assert_allclose(stationary_rb(p.rescaled(s)), stationary_rb(p), rtol=1e-12, atol=1e-15)


def test_matches_dense_eigensolver():
    for seed in range(10):
        g = random_strongly_connected(6, 0.3, seed)
        vals = np.linalg.eigvals(g.adjacency.astype(float))
        assert perron(g).lam == pytest.approx(max(vals.real), abs=1e-10)
