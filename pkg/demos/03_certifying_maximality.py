"""
Checking maximality and path equalisation
=========================================

Random generators on the graph never beat the Perron root, the explicit
dual pair closes the gap, and every walk with the same endpoints and jump
count is equally likely.
"""

from rbwalk import perron, random_strongly_connected
from rbwalk.verify import dual_certificate, enumerate_paths, maximality_sweep, path_equalization_check

g = random_strongly_connected(5, 0.3, seed=3)
print(g)
p = perron(g)

report = maximality_sweep(g, p, trials=2000, seed=0)
print(f"ceiling {report.ceiling:.6f}, best random h {report.max_h:.6f}, "
      f"largest gain from a perturbation of the optimum {report.max_perturbation_increase:.2e}")

cert = dual_certificate(p, g)
print("dual value", cert.inner_max, "lagrangian at r*", cert.lagrangian, "gradient", cert.stationarity)

###############################################################################
# Pick a start, an end and a jump count with several competing walks.

i, j, N = 0, 0, 4
for N in range(2, 8):
    if len(enumerate_paths(g, i, j, N)) >= 2:
        break
rep = path_equalization_check(g, p, i, j, N, t_f=2.0, samples=400_000, seed=1)
print(f"{len(rep.paths)} walks {i}->{j} with {N} jumps, each with probability {rep.exact_prob_each:.6f}")
print(f"joint with exactly {N} jumps by t=2: {rep.joint_prob_each:.6f}")
for path, c in rep.empirical_counts.items():
    print("  ", path, c / rep.samples)
print("largest pairwise z:", round(rep.max_pair_z, 2))
