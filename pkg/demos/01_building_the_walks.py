"""
Maximal-entropy walks on a small graph
======================================

Build the discrete transition matrix and the jump-process generator for
the three-node graph 0->1, 1->0, 1->2, 2->0, and compare their entropy
rates with the Perron root.
"""

import math

import numpy as np

from rbwalk import (
    build_discrete_rb,
    build_rb_generator,
    differential_entropy_rate,
    discrete_entropy_rate,
    load_edge_list,
    perron,
)
from rbwalk.chain import EntropyConfig, scale_generator

np.set_printoptions(precision=6, suppress=True)

g = load_edge_list("0 1\n1 0\n1 2\n2 0\n")
p = perron(g)
print("Perron root   ", p.lam)           # real root of x**3 = x + 1
print("right vector  ", p.phi)
print("left vector   ", p.phi_hat, " <phi, phi_hat> =", p.phi @ p.phi_hat)

###############################################################################
# Discrete time: from node 1 the walk picks 0 or 2 with probabilities
# 1/lambda**2 and 1/lambda**3, which add to one because lambda**3 = lambda + 1.

chain = build_discrete_rb(p, g)
print(chain.P)
print("stationary law", chain.pi)
print("H(P) =", discrete_entropy_rate(chain), " log(lambda) =", math.log(p.lam))

###############################################################################
# Continuous time: every node is left at the same rate lambda, and the
# generator is lambda times (P - I).

q = build_rb_generator(p, g)
print(q.Q)
print("max |Q - lambda (P - I)| =", np.abs(q.Q - p.lam * (chain.P - np.eye(3))).max())
print("h_1(Q) =", differential_entropy_rate(q))

###############################################################################
# Weighting the timing information by eta scales the optimal generator by
# exp(eta - 1), and the optimal value with it.

for eta in (0.5, 1.0, 2.0):
    cfg = EntropyConfig(eta)
    h = differential_entropy_rate(scale_generator(q, cfg), cfg)
    print(f"eta={eta}:  h = {h:.10f}   exp(eta-1) lambda = {math.exp(eta - 1) * p.lam:.10f}")
