"""Complementary CDFs sampled on a uniform grid.

A :class:`TailFunction` stores ``F(x) = P(X > x)`` at every grid point.  It
optionally carries the complement ``1 - F`` computed independently, which
keeps the far left tail meaningful where ``1 - F`` drops below double
precision relative to 1, and the positions and sizes of any atoms, so that
integrals of step functions stay exact.
"""
from __future__ import annotations

import csv
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from scipy.special import expit

EPS_CORE = 1e-8
BOUNDARY_TOL = 1e-6


class GridError(ValueError):
    """The grid cannot hold the requested distribution."""


@dataclass(frozen=True)
class Grid:
    x_min: float = -40.0
    x_max: float = 40.0
    step: float = 0.01

    def __post_init__(self):
        if not (self.x_min < 0 < self.x_max):
            raise GridError(f"need x_min < 0 < x_max, got [{self.x_min}, {self.x_max}]")
        if not self.step > 0:
            raise GridError(f"step must be positive, got {self.step}")

    @property
    def count(self) -> int:
        return int(round((self.x_max - self.x_min) / self.step)) + 1

    @property
    def points(self) -> np.ndarray:
        return self.x_min + np.arange(self.count) * self.step

    @property
    def symmetric(self) -> bool:
        x = self.points
        return bool(np.allclose(x, -x[::-1], rtol=0, atol=1e-9 * self.step))

    def to_dict(self) -> dict:
        return {"x_min": self.x_min, "x_max": self.x_max, "step": self.step}


def _logit(values, complement):
    with np.errstate(divide="ignore"):
        return np.log(values) - np.log(complement)


@dataclass(frozen=True, eq=False)
class TailFunction:
    """Complementary CDF on a grid.

    ``values[i]`` is ``F(grid.points[i])``.  Left of the grid ``F`` is taken
    to be 1 and right of it 0.
    """

    grid: Grid
    values: np.ndarray
    complement_values: np.ndarray | None = field(default=None, repr=False)
    jumps: tuple = ()
    left_limit: float = 1.0
    right_limit: float = 0.0

    def __post_init__(self):
        v = np.asarray(self.values, dtype=float)
        if v.shape != (self.grid.count,):
            raise GridError(f"expected {self.grid.count} values, got shape {v.shape}")
        v.setflags(write=False)
        object.__setattr__(self, "values", v)
        if self.complement_values is not None:
            c = np.asarray(self.complement_values, dtype=float)
            c.setflags(write=False)
            object.__setattr__(self, "complement_values", c)

    @property
    def x(self) -> np.ndarray:
        return self.grid.points

    @property
    def complement(self) -> np.ndarray:
        """``1 - F`` on the grid, accurate in the left tail when available."""
        if self.complement_values is not None:
            return self.complement_values
        return 1.0 - self.values

    @property
    def logit(self) -> np.ndarray:
        return _logit(self.values, self.complement)

    def check(self, tol: float = BOUNDARY_TOL) -> None:
        """Raise GridError unless the stored values form a valid tail function."""
        v = self.values
        if not np.all(np.isfinite(v)) or v.min() < -1e-12 or v.max() > 1 + 1e-12:
            raise GridError("values must lie in [0, 1]")
        if np.any(np.diff(v) > 1e-12):
            raise GridError("values must be nonincreasing")
        if abs(v[0] - 1.0) > tol:
            raise GridError(
                f"F(x_min) = {v[0]:.3g}, grid too narrow on the left (x_min={self.grid.x_min})")
        if abs(v[-1]) > tol:
            raise GridError(
                f"F(x_max) = {v[-1]:.3g}, grid too narrow on the right (x_max={self.grid.x_max})")

    def median(self) -> float:
        return inverse(self, 0.5)

    def to_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["x", "value"])
            for xi, vi in zip(self.x, self.values):
                w.writerow([f"{xi:.17g}", f"{vi:.17g}"])

    @classmethod
    def from_csv(cls, path) -> "TailFunction":
        data = np.loadtxt(Path(path), delimiter=",", skiprows=1, ndmin=2)
        x, v = data[:, 0], data[:, 1]
        step = float(np.round((x[-1] - x[0]) / (len(x) - 1), 12))
        return cls(Grid(float(x[0]), float(x[-1]), step), v)


# --- constructors -----------------------------------------------------------

def _exp1(x):
    F = np.where(x < 0, 1.0, np.exp(-np.maximum(x, 0.0)))
    C = np.where(x < 0, 0.0, -np.expm1(-np.maximum(x, 0.0)))
    return F, C


def _logistic(x):
    return expit(-x), expit(x)


def _point_mass(x):
    F = np.where(x < 0, 1.0, 0.0)
    return F, 1.0 - F


_JUMPS = {"point_mass_at_0": ((0.0, 1.0),)}
_ANALYTIC = {"exp1": _exp1, "logistic": _logistic, "point_mass_at_0": _point_mass}


def make_standard(name: str, grid: Grid | None = None, base=None, a: float = 0.0) -> TailFunction:
    """Sample a named complementary CDF on ``grid``.

    ``name`` is one of ``exp1``, ``logistic``, ``point_mass_at_0`` or
    ``shifted``.  For ``shifted`` the result is ``x -> base(x - a)`` where
    ``base`` is either one of the other names (evaluated exactly) or a
    :class:`TailFunction` (interpolated).
    """
    grid = grid or Grid()
    x = grid.points
    if name == "shifted":
        if base is None:
            raise ValueError("shifted needs a base")
        if isinstance(base, TailFunction):
            if base.grid != grid:
                raise GridError("base lives on a different grid")
            F = translate(base, a)
            F.check()
            return F
        if base not in _ANALYTIC:
            raise ValueError(f"unknown base distribution {base!r}")
        vals, comp = _ANALYTIC[base](x - a)
        jumps = tuple((p + a, size) for p, size in _JUMPS.get(base, ()))
    elif name in _ANALYTIC:
        vals, comp = _ANALYTIC[name](x)
        jumps = _JUMPS.get(name, ())
    else:
        raise ValueError(f"unknown distribution {name!r}")
    F = TailFunction(grid, vals, comp, jumps)
    F.check()
    return F


def translate(F: TailFunction, a: float) -> TailFunction:
    """Return ``x -> F(x - a)`` on the same grid.

    Interpolation is linear in logit coordinates where both neighbours are
    strictly inside (0, 1), which is exact for exponential tails; elsewhere it
    is linear in the values.  Functions with atoms cannot be translated off
    the grid this way; build them with ``make_standard("shifted", ...)``.
    """
    if F.jumps:
        raise ValueError("translate needs a tail function without atoms")
    x = F.x
    src = x - a
    lin_v = np.interp(src, x, F.values, left=F.left_limit, right=F.right_limit)
    lin_c = np.interp(src, x, F.complement, left=1 - F.left_limit, right=1 - F.right_limit)
    L = F.logit
    pos = np.clip((src - F.grid.x_min) / F.grid.step, 0, F.grid.count - 1)
    i = np.minimum(np.floor(pos).astype(int), F.grid.count - 2)
    t = pos - i
    Li, Lj = L[i], L[i + 1]
    ok = np.isfinite(Li) & np.isfinite(Lj) & (src >= x[0]) & (src <= x[-1])
    with np.errstate(invalid="ignore"):
        Ls = (1 - t) * Li + t * Lj
    vals = np.where(ok, expit(Ls), lin_v)
    comp = np.where(ok, expit(-Ls), lin_c)
    return TailFunction(F.grid, vals, comp)


def mixture(components, weights) -> TailFunction:
    """Tail function of the mixture law ``sum_i w_i F_i``."""
    w = np.asarray(weights, dtype=float)
    if w.ndim != 1 or len(components) != w.size or np.any(w < 0) or not np.isclose(w.sum(), 1):
        raise ValueError("weights must be nonnegative and sum to 1, one per component")
    grid = components[0].grid
    if any(c.grid != grid for c in components):
        raise GridError("mixture components must share a grid")
    vals = sum(wi * c.values for wi, c in zip(w, components))
    comp = sum(wi * c.complement for wi, c in zip(w, components))
    jumps = tuple((p, wi * size) for wi, c in zip(w, components) for p, size in c.jumps)
    return TailFunction(grid, vals, comp, jumps)


def random_monotone_start(rng: np.random.Generator, grid: Grid | None = None,
                          max_components: int = 4, spread: float = 5.0) -> TailFunction:
    """A random mixture of shifted exp1, logistic and point-mass laws."""
    grid = grid or Grid()
    m = int(rng.integers(1, max_components + 1))
    names = rng.choice(list(_ANALYTIC), size=m)
    comps = [make_standard("shifted", grid, base=str(nm), a=float(rng.uniform(-spread, spread)))
             for nm in names]
    return mixture(comps, rng.dirichlet(np.ones(m)))


# --- pointwise operations -----------------------------------------------------

def evaluate(F: TailFunction, x):
    """Linear interpolation of F, clamped to the limits outside the grid."""
    return np.interp(x, F.x, F.values, left=F.left_limit, right=F.right_limit)


def integrate_right(F: TailFunction, a: float) -> float:
    """Trapezoid value of the integral of F over ``[a, x_max]``."""
    g = F.grid
    if a < g.x_min - 1e-12:
        raise ValueError(f"a={a} is left of the grid (x_min={g.x_min})")
    if a >= g.x_max:
        return 0.0
    x, v = F.x, F.values
    k = int(np.searchsorted(x, a, side="right"))
    fa = float(evaluate(F, a))
    head = 0.5 * (fa + v[k]) * (x[k] - a)
    total = head + np.trapezoid(v[k:], x[k:])
    if F.jumps:
        total += _jump_correction(F)[k]
    return float(total)


def _jump_correction(F: TailFunction) -> np.ndarray:
    """Per-grid-point correction to right integrals for atoms.

    The trapezoid rule treats a drop of ``size`` inside the panel
    ``(x_k, x_k+1]`` at ``p`` as linear; the exact step contributes
    ``size * (p - x_k - step/2)`` more to every integral starting at or left
    of ``x_k``.
    """
    corr = np.zeros(F.grid.count)
    g = F.grid
    for p, size in F.jumps:
        if p <= g.x_min or p > g.x_max:
            continue
        k = int(np.ceil((p - g.x_min) / g.step - 1e-9)) - 1
        corr[: k + 1] += size * ((p - (g.x_min + k * g.step)) - 0.5 * g.step)
    return corr


def inverse(F: TailFunction, y):
    """Solve ``F(x) = y`` for ``y`` in ``[1e-8, 1 - 1e-8]``.

    Brackets by binary search, then interpolates linearly in logit
    coordinates (values when an endpoint is exactly 0 or 1).  An exact
    plateau at level ``y`` returns its midpoint.
    """
    y_arr = np.atleast_1d(np.asarray(y, dtype=float))
    if np.any(y_arr < EPS_CORE) or np.any(y_arr > 1 - EPS_CORE):
        raise ValueError("inverse is only defined for y in [1e-8, 1 - 1e-8]")
    out = invert_levels(F, y_arr, np.log(y_arr) - np.log1p(-y_arr))
    return float(out[0]) if np.ndim(y) == 0 else out


def invert_levels(F: TailFunction, y: np.ndarray, y_logit: np.ndarray) -> np.ndarray:
    """Vectorised core of :func:`inverse`; ``y_logit`` is ``logit(y)``
    supplied by the caller so accurate complements can be passed through."""
    x, v = F.x, F.values
    neg = -v
    lo = np.searchsorted(neg, -y, side="left")   # first index with F <= y
    hi = np.searchsorted(neg, -y, side="right")  # first index with F < y
    if np.any(lo == 0) or np.any(lo == len(v)):
        raise ValueError("y outside the range of F on this grid")
    out = np.empty_like(y)
    flat = hi > lo
    out[flat] = 0.5 * (x[lo[flat]] + x[hi[flat] - 1])
    i = lo[~flat] - 1
    L = F.logit
    Li, Lj = L[i], L[i + 1]
    with np.errstate(invalid="ignore", divide="ignore"):
        t_logit = (y_logit[~flat] - Li) / (Lj - Li)
        t_lin = (y[~flat] - v[i]) / (v[i + 1] - v[i])
    t = np.where(np.isfinite(Li) & np.isfinite(Lj), t_logit, t_lin)
    out[~flat] = x[i] + t * F.grid.step
    return out


def sup_distance(F: TailFunction, G: TailFunction) -> float:
    if F.grid != G.grid:
        raise GridError("sup_distance needs both functions on the same grid")
    return float(np.max(np.abs(F.values - G.values)))


@dataclass(frozen=True)
class Lip1Certificate:
    max_slope: float
    is_strictly_decreasing_on_core: bool
    core_interval: tuple[float, float]
    step: float

    @property
    def passes(self) -> bool:
        return self.max_slope <= 1 + 10 * self.step and self.is_strictly_decreasing_on_core


def certify_d1(F: TailFunction) -> Lip1Certificate:
    """Check the discrete 1-Lipschitz bound and strict decrease on the core."""
    v = F.values
    slopes = np.abs(np.diff(v)) / F.grid.step
    core = (v >= EPS_CORE) & (v <= 1 - EPS_CORE)
    idx = np.flatnonzero(core)
    if idx.size < 2:
        return Lip1Certificate(float(slopes.max()), False, (np.nan, np.nan), F.grid.step)
    seg = v[idx[0]: idx[-1] + 1]
    strict = bool(np.all(np.diff(seg) < 0))
    return Lip1Certificate(float(slopes.max()), strict, (float(F.x[idx[0]]), float(F.x[idx[-1]])),
                           F.grid.step)


def ks_distance(samples, F: TailFunction) -> float:
    """Kolmogorov-Smirnov distance between the sample ECDF and ``1 - F``."""
    s = np.sort(np.asarray(samples, dtype=float))
    n = s.size
    cdf = 1.0 - evaluate(F, s)
    i = np.arange(1, n + 1)
    return float(max(np.max(i / n - cdf), np.max(cdf - (i - 1) / n)))


def empirical_tail(samples, grid: Grid) -> TailFunction:
    """Empirical ``P(X > x)`` on the grid points."""
    s = np.sort(np.asarray(samples, dtype=float))
    above = s.size - np.searchsorted(s, grid.points, side="right")
    return TailFunction(grid, above / s.size)
