"""
Three Monte-Carlo routes to the same law
========================================

Population dynamics, sampling from a truncated weighted tree and an exact
recursion on small trees, each checked against the operator.
"""

# %%
import numpy as np

from rdekit import Grid, SolveConfig, apply_T, ks_distance, make_standard, solve
from rdekit.population_dynamics import (SamplePool, WeightedTree, popdyn_solve, popdyn_step,
                                        pwit_samples, tree_cost_recursion)

grid = Grid()
d = 2
F_d = solve(SolveConfig(d=d, grid=grid)).F_d

# %%
# One step of population dynamics applies T to the empirical law of the
# pool.  Two steps from zero should match T applied twice to the point mass.
pool = SamplePool.constant(0.0, 50_000, seed=1)
pool = popdyn_step(popdyn_step(pool, d), d)
law = apply_T(apply_T(make_standard("point_mass_at_0", grid), d), d)
print("two steps, KS vs operator:", ks_distance(pool.samples, law))

# %%
# Many steps: the pool drifts by half the limit shift each step, so it is
# re-centred by its median before the comparison.
res = popdyn_solve(d, F_d, N=50_000, steps=40, seed=3)
print(f"popdyn: shift {res.shift:+.4f}, KS vs F_d {res.ks_vs_Fd:.4f}")

# %%
# Root values of a depth-4 tree whose leaves carry 0 have the law of T^4
# applied to the point mass.
s = pwit_samples(50_000, 4, d, rng=np.random.default_rng(5))
law = make_standard("point_mass_at_0", grid)
for _ in range(4):
    law = apply_T(law, d)
print("tree sampling depth 4, KS vs operator:", ks_distance(s, law))

# %%
# On a finite tree the same min-recursion computes the change in optimal
# matching cost when the root is removed.
tree = WeightedTree.from_edges([(0, 1, 0.7), (0, 2, 0.4), (1, 3, 0.2), (1, 4, 1.1), (2, 5, 0.9)])
print("cost difference at the root:", tree_cost_recursion(tree))
