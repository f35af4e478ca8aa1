"""
Simulating the continuous-time walk
===================================

Sample trajectories from the embedded chain and exponential holding times,
then compare what they show with exact quantities: the jump-count law, the
end-state distribution ``exp(Q t)``, and the sampled-path entropy.
"""

import numpy as np
from scipy import stats

from rbwalk import build_rb_generator, complete_graph, discretize, embed, perron, sample_ensemble
from rbwalk.jumps import exact_delta_entropy, small_delta_entropy, transition_kernel

g = complete_graph(3)
p = perron(g)
q = build_rb_generator(p, g)
spec = embed(q)

ens = sample_ensemble(spec, start=0, horizon=1.0, count=100_000, seed=42)
first = ens.trajectory(0)
print("first path:", first.states, np.round(first.holding_times, 4))
print("sampled every 0.25:", discretize(first, 0.25))

###############################################################################
# All holding rates equal lambda, so the number of jumps by time t is
# Poisson(lambda t) whatever route the walker takes.

counts = np.bincount(ens.n_jumps)[:8] / len(ens)
print(" k  empirical  Poisson")
for k, c in enumerate(counts):
    print(f"{k:2d}  {c:.5f}    {stats.poisson.pmf(k, p.lam):.5f}")

###############################################################################
# End-state frequencies against the uniformized transition kernel.

print("empirical", np.bincount(ens.final_states, minlength=3) / len(ens))
print("exp(Q)   ", transition_kernel(q, 1.0)[0])

###############################################################################
# Sampling the path on a grid of width delta gives a discrete chain whose
# entropy per step approaches the leading-order expansion as delta shrinks.

for delta in (1e-2, 1e-3, 1e-4):
    exact = exact_delta_entropy(q, delta)
    approx = small_delta_entropy(q, delta)
    print(f"delta={delta:.0e}  exact={exact:.6e}  expansion={approx:.6e}  ratio={exact / approx:.6f}")
