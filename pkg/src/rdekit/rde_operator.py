"""The distributional map ``T = P o I`` for the d-th minimum recursion.

For ``X = min^(d)_j (xi_j - X_j)`` with ``xi`` a rate-1 Poisson process on
the half line and ``X_j`` i.i.d. with tail ``F``, the tail of ``X`` is

    TF(x) = P(IF(x)),   IF(x) = int_{-x}^inf F(t) dt,
    P(y)  = exp(-y) * sum_{i<d} y^i / i!.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import gammainc

from .dist_core import Grid, GridError, TailFunction, _jump_correction, evaluate

MAX_D = 16


def check_d(d) -> int:
    if isinstance(d, bool) or not isinstance(d, (int, np.integer)):
        raise TypeError(f"d must be an integer, got {d!r}")
    if not 1 <= d <= MAX_D:
        raise ValueError(f"d must be in [1, {MAX_D}], got {d}")
    return int(d)


def apply_P(y, d: int):
    """``exp(-y) * sum_{i<d} y^i/i!``, the probability that a Poisson(y)
    count is below ``d``."""
    d = check_d(d)
    y = np.asarray(y, dtype=float)
    if np.any(y < 0):
        raise ValueError("apply_P needs y >= 0")
    total = np.zeros_like(y)
    term = np.ones_like(y)
    for i in range(d):
        total = total + term
        term = term * y / (i + 1)
    # rounding can push the product a hair above 1 for tiny y
    out = np.minimum(np.exp(-y) * total, 1.0)
    return float(out) if out.ndim == 0 else out


def apply_P_complement(y, d: int):
    """``1 - P(y)`` without cancellation for small ``y``."""
    return gammainc(check_d(d), np.asarray(y, dtype=float))


@dataclass(frozen=True, eq=False)
class IntegralFunction:
    grid: Grid
    values: np.ndarray

    @property
    def x(self):
        return self.grid.points


def _right_integrals(F: TailFunction) -> np.ndarray:
    # R[i] = trapezoid integral of F over [x_i, x_max], one reverse pass
    v = F.values
    panels = 0.5 * F.grid.step * (v[1:] + v[:-1])
    R = np.zeros_like(v)
    R[:-1] = np.cumsum(panels[::-1])[::-1]
    if F.jumps:
        R += _jump_correction(F)
    return R


def apply_I(F: TailFunction) -> IntegralFunction:
    """``IF(x) = int_{-x}^inf F(t) dt`` on F's grid."""
    g = F.grid
    R = _right_integrals(F)
    if g.symmetric:
        vals = R[::-1].copy()
    else:
        x = g.points
        s = -x
        vals = np.interp(s, x, R, left=0.0, right=0.0)
        beyond = s < g.x_min
        vals[beyond] = R[0] + (g.x_min - s[beyond])
        vals[s > g.x_max] = 0.0
    return IntegralFunction(g, vals)


def apply_T(F: TailFunction, d: int) -> TailFunction:
    d = check_d(d)
    y = apply_I(F).values
    TF = TailFunction(F.grid, apply_P(y, d), apply_P_complement(y, d))
    try:
        TF.check()
    except GridError as exc:
        raise GridError(f"T F leaves the grid for d={d}: {exc}") from exc
    return TF


def iterate_T(F: TailFunction, d: int, k: int) -> list[TailFunction]:
    """``[F, TF, ..., T^k F]``."""
    out = [F]
    for _ in range(k):
        out.append(apply_T(out[-1], d))
    return out


def derivative_T(F: TailFunction, d: int) -> np.ndarray:
    """Analytic ``(TF)'(x) = -exp(-IF) IF^(d-1)/(d-1)! F(-x)`` on the grid."""
    d = check_d(d)
    y = apply_I(F).values
    F_reflected = evaluate(F, -F.x)
    return -np.exp(-y) * y ** (d - 1) / math.factorial(d - 1) * F_reflected


@dataclass(frozen=True)
class TailDiagnostics:
    right_ratio_min: float
    right_ratio_max: float
    left_ratio_min: float
    left_ratio_max: float

    def as_tuple(self):
        return (self.right_ratio_min, self.right_ratio_max, self.left_ratio_min, self.left_ratio_max)


def tail_diagnostics(F: TailFunction, d: int, right_window=(10.0, 25.0),
                     left_window=(-25.0, -10.0)) -> TailDiagnostics:
    """Ratios of F to its expected tail shapes over the probe windows.

    Right: ``F(x) / (x^(d-1) e^-x)``.  Left: ``(1-F(x)) / (|x|^(d(d-1)) e^(dx))``.
    """
    d = check_d(d)
    g = F.grid
    for lo, hi in (right_window, left_window):
        if lo < g.x_min or hi > g.x_max or lo >= hi:
            raise GridError(f"probe window [{lo}, {hi}] not inside grid [{g.x_min}, {g.x_max}]")
    x = F.x
    right = (x >= right_window[0]) & (x <= right_window[1])
    xr = x[right]
    r = F.values[right] / (xr ** (d - 1) * np.exp(-xr))
    left = (x >= left_window[0]) & (x <= left_window[1])
    xl = x[left]
    lr = F.complement[left] / (np.abs(xl) ** (d * (d - 1)) * np.exp(d * xl))
    return TailDiagnostics(float(r.min()), float(r.max()), float(lr.min()), float(lr.max()))
