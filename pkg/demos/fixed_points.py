"""
Fixed points of the d-th minimum map
====================================

Solve for the fixed point on the default grid for d = 1, 2, 3 and look at
a few of its features.
"""

# %%
# For d = 1 the fixed point is the standard logistic law, which gives an
# exact check of the solver.
import numpy as np

from rdekit import (Grid, SolveConfig, apply_T, inverse, make_standard, solve, sup_distance,
                    tail_diagnostics)

grid = Grid()
res = solve(SolveConfig(d=1, grid=grid, start="exp1"))
print("d=1 double steps:", res.iterations_used)
print("d=1 distance to logistic:", sup_distance(res.F_d, make_standard("logistic", grid)))

# %%
# Larger d: the median moves right and the tails change shape.  The tail
# ratios divide F by x^(d-1) e^(-x) on the right and 1-F by |x|^(d(d-1)) e^(dx)
# on the left, so values that stay bounded confirm those rates.
for d in (1, 2, 3):
    r = solve(SolveConfig(d=d, grid=grid))
    diag = tail_diagnostics(r.F_d, d)
    print(f"d={d} median {inverse(r.F_d, 0.5):+.5f} residual {r.residual:.1e} "
          f"tail ratios {np.round(diag.as_tuple(), 5)}")

# %%
# The result really is fixed: one more application of T barely moves it.
F2 = solve(SolveConfig(d=2, grid=grid)).F_d
print("||T F_2 - F_2|| =", sup_distance(apply_T(F2, 2), F2))
