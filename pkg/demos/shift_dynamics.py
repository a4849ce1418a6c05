"""
Raw iterates and the limit shift
================================

Plain iteration of T does not converge: even and odd iterates settle on two
translates of the fixed point.  The constant gap between them is gamma.
"""

# %%
import numpy as np

from rdekit import (Grid, SolveConfig, apply_T, random_monotone_start, shift_profile, shift_trace,
                    solve, two_cycle_check)

grid = Grid()
ref = solve(SolveConfig(d=1, grid=grid, start="point_mass_at_0"))
print("gamma from the point mass:", ref.gamma)

# %%
# Even iterates approach F_d(x - gamma/2) and odd iterates F_d(x + gamma/2).
rep = two_cycle_check(SolveConfig(d=1, grid=grid, start="point_mass_at_0"), ref, k=50)
print(f"even distance {rep.even_dist:.1e}, odd distance {rep.odd_dist:.1e}")

# %%
# Starting from a translate moves gamma by twice the translation.
moved = solve(SolveConfig(d=1, grid=grid, start=("shifted", "point_mass_at_0", 2.0)))
print("gamma after moving the start by 2:", moved.gamma, "difference", moved.gamma - ref.gamma)

# %%
# The shift between consecutive iterates starts location dependent.  Its
# inf rises and its sup falls until both meet at gamma.
rng = np.random.default_rng(7)
start = random_monotone_start(rng, grid)
tr = shift_trace(start, 2, k_max=30)
for k, lo, hi in list(zip(tr.ks, tr.inf_shift, tr.sup_shift))[::5]:
    print(f"k={k:2d}  inf {lo:+.8f}  sup {hi:+.8f}")
print("monotone:", tr.is_monotone())

# %%
# For the fixed point itself the shift is zero everywhere.
F = ref.F_d
prof = shift_profile(F, apply_T(F, 1))
print("largest shift of the fixed point:", np.abs(prof.shifts).max())
