"""
Random assignment, d-factors and min-sum message passing
========================================================

Exact solvers on complete bipartite graphs with exp(1) weights, and the
message-passing heuristic whose message statistics follow T.
"""

# %%
import math

from rdekit import Grid, apply_T, ks_distance, make_standard
from rdekit.graph_solvers import (bp_decide, bp_run, compare_run, exact_dfactor, exact_matching,
                                  gen_instance, message_samples)

# %%
# The expected optimal assignment cost is sum_{k<=n} 1/k^2, which tends to
# pi^2/6 as n grows.
rep = compare_run(200, 1, 20, seed=1, with_bp=False)
print(f"mean cost {rep.mean_exact:.4f} +- {rep.stderr:.4f}, pi^2/6 = {math.pi ** 2 / 6:.4f}")

# %%
# Message passing from zero messages.  Given enough rounds it usually lands
# on the optimum.
inst = gen_instance(100, 11)
sol = bp_decide(inst, bp_run(inst, 1, 400), 1)
print("BP cost", sol.cost, "exact", exact_matching(inst).cost, "consistent", sol.consistent)

# %%
# d = 2: every vertex picks its two best edges.
inst = gen_instance(40, 12)
sol = bp_decide(inst, bp_run(inst, 2, 200), 2)
print("2-factor BP cost", sol.cost, "exact", exact_dfactor(inst, 2).cost)

# %%
# n times the messages after t rounds are distributed like T^t applied to
# the point mass.
inst = gen_instance(400, 2)
law = make_standard("point_mass_at_0", Grid())
for t in range(1, 6):
    law = apply_T(law, 1)
    msgs = bp_run(inst, 1, t)
    print(f"t={t} KS(messages, T^t) = {ks_distance(message_samples(inst, msgs), law):.3f}")
