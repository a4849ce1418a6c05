"""Location-dependent shifts between consecutive iterates.

For tail functions ``F`` and ``TF`` the shift ``h(x)`` is defined by
``F(x) = TF(x - h(x))``.  A constant shift ``c`` means ``F`` is ``TF``
translated right by ``c``.
"""
from __future__ import annotations

import csv
from dataclasses import dataclass, field

import numpy as np

from .dist_core import EPS_CORE, TailFunction, invert_levels
from .rde_operator import apply_T, check_d


@dataclass(frozen=True, eq=False)
class ShiftProfile:
    grid_xs: np.ndarray
    shifts: np.ndarray
    inf_shift: float
    sup_shift: float
    step: float

    def central(self, fraction: float = 0.5) -> np.ndarray:
        n = self.shifts.size
        cut = int(n * (1 - fraction) / 2)
        return self.shifts[cut: n - cut] if n - 2 * cut > 0 else self.shifts


def _core_mask(F: TailFunction, eps: float = EPS_CORE) -> np.ndarray:
    return (F.values >= eps) & (F.values <= 1 - eps) & (F.complement >= eps)


def shift_profile(F: TailFunction, TF: TailFunction, eps: float = EPS_CORE) -> ShiftProfile:
    if F.grid != TF.grid:
        raise ValueError("profiles need both functions on the same grid")
    # the levels of F on its core only need to be reachable by TF; requiring
    # TF's core at the same x would clip the tails when F and TF sit far apart
    core = _core_mask(F, eps) & (F.values < TF.values[0]) & (F.values > TF.values[-1])
    if not core.any():
        raise ValueError("F and TF have no common core region")
    y = F.values[core]
    xs = F.x[core]
    shifts = xs - invert_levels(TF, y, F.logit[core])
    if not np.all(np.isfinite(shifts)):
        raise ValueError("shift profile is not finite; are both inputs strictly decreasing?")
    return ShiftProfile(xs, shifts, float(shifts.min()), float(shifts.max()), F.grid.step)


def contraction_check(profile_F: ShiftProfile, profile_TF: ShiftProfile, tol: float | None = None) -> bool:
    """True when the shifts of (TF, T^2F) lie in ``[-sup, -inf]`` of those of (F, TF)."""
    if tol is None:
        tol = 10 * profile_F.step
    return bool(profile_TF.inf_shift >= -profile_F.sup_shift - tol
                and profile_TF.sup_shift <= -profile_F.inf_shift + tol)


def estimate_gamma(F: TailFunction, TF: TailFunction) -> float:
    """Median shift over the central half of the core region."""
    return float(np.median(shift_profile(F, TF).central(0.5)))


@dataclass
class ShiftTrace:
    """Shift statistics of the even iterates ``T^(2k) F`` against ``T^(2k+1) F``."""

    ks: list[int] = field(default_factory=list)
    inf_shift: list[float] = field(default_factory=list)
    sup_shift: list[float] = field(default_factory=list)
    gamma: list[float] = field(default_factory=list)

    def append(self, k: int, profile: ShiftProfile) -> None:
        self.ks.append(k)
        self.inf_shift.append(profile.inf_shift)
        self.sup_shift.append(profile.sup_shift)
        self.gamma.append(float(np.median(profile.central(0.5))))

    def is_monotone(self, slack: float = 1e-6) -> bool:
        lo = np.asarray(self.inf_shift)
        hi = np.asarray(self.sup_shift)
        return bool(np.all(np.diff(lo) >= -slack) and np.all(np.diff(hi) <= slack))

    @property
    def gaps(self) -> np.ndarray:
        return np.asarray(self.sup_shift) - np.asarray(self.inf_shift)

    def to_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["k", "inf_shift", "sup_shift", "gamma_estimate"])
            for row in zip(self.ks, self.inf_shift, self.sup_shift, self.gamma):
                w.writerow([row[0]] + [f"{v:.17g}" for v in row[1:]])


def shift_trace(F: TailFunction, d: int, k_max: int, k_min: int = 2) -> ShiftTrace:
    """Iterate ``T`` on ``F`` and record the even-step shift profiles for
    ``k_min <= k <= k_max``."""
    d = check_d(d)
    trace = ShiftTrace()
    G = F
    for j in range(2 * k_max + 1):
        TG = apply_T(G, d)
        if j % 2 == 0 and j // 2 >= k_min:
            trace.append(j // 2, shift_profile(G, TG))
        G = TG
    return trace
