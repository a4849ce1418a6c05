"""Fixed point of ``T`` by plain two-step iteration.

Raw iterates of ``T`` oscillate between two translates of the fixed point,
so the inner loop applies ``T`` twice and the limit is re-centred by half of
the measured constant shift afterwards.
"""
from __future__ import annotations

import itertools
import json
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .dist_core import Grid, TailFunction, make_standard, sup_distance, translate
from .rde_operator import apply_T, check_d
from .shift_analysis import ShiftTrace, estimate_gamma, shift_profile

WARMUP = 6


class ConvergenceError(RuntimeError):
    def __init__(self, message, residual=None):
        super().__init__(message)
        self.residual = residual


@dataclass
class SolveConfig:
    d: int = 1
    grid: Grid = field(default_factory=Grid)
    start: object = "exp1"
    max_iters: int = 200
    tol: float = 1e-6
    record_trace: bool = False

    def __post_init__(self):
        self.d = check_d(self.d)
        if self.max_iters < 4:
            raise ValueError("max_iters must be at least 4")
        if not self.tol > 0:
            raise ValueError("tol must be positive")

    def start_function(self) -> TailFunction:
        if isinstance(self.start, TailFunction):
            return self.start
        if isinstance(self.start, tuple):  # ("shifted", base, a)
            _, base, a = self.start
            return make_standard("shifted", self.grid, base=base, a=a)
        return make_standard(self.start, self.grid)


@dataclass
class FixedPointResult:
    d: int
    F_d: TailFunction
    gamma: float
    iterations_used: int
    residual: float
    trace: ShiftTrace

    def metadata(self) -> dict:
        return {"d": self.d, "gamma": self.gamma, "iterations_used": self.iterations_used,
                "residual": self.residual, "grid": self.F_d.grid.to_dict()}

    def to_json(self, path) -> None:
        with open(path, "w") as fh:
            json.dump(self.metadata(), fh, indent=2)


def solve(cfg: SolveConfig) -> FixedPointResult:
    d = cfg.d
    G = cfg.start_function()
    for _ in range(WARMUP):
        G = apply_T(G, d)
    trace = ShiftTrace()
    residual = np.inf
    for it in range(1, cfg.max_iters + 1):
        TG = apply_T(G, d)
        if cfg.record_trace:
            trace.append(WARMUP // 2 + it - 1, shift_profile(G, TG))
        T2G = apply_T(TG, d)
        residual = sup_distance(T2G, G)
        G = T2G
        if residual < cfg.tol:
            break
    else:
        raise ConvergenceError(
            f"no convergence in {cfg.max_iters} double steps, last residual {residual:.3g}", residual)
    gamma = estimate_gamma(G, apply_T(G, d))
    F_d = translate(G, -gamma / 2)
    fp_residual = sup_distance(apply_T(F_d, d), F_d)
    if fp_residual > 10 * cfg.tol:
        raise ConvergenceError(f"re-centred limit has residual {fp_residual:.3g}", fp_residual)
    return FixedPointResult(d, F_d, gamma, it, fp_residual, trace)


@dataclass
class TwoCycleReport:
    even_dist: float
    odd_dist: float
    gamma: float
    gamma_history: list[float]
    k: int

    def passes(self, tol: float) -> bool:
        """Raw iterates only approach the translates at the rate of the
        shift contraction, so the bar is ``1000 * tol`` of the solver."""
        return self.even_dist < 1e3 * tol and self.odd_dist < 1e3 * tol

    @property
    def gamma_spread(self) -> float:
        return float(np.ptp(self.gamma_history))


def two_cycle_check(cfg: SolveConfig, reference: FixedPointResult | None = None, k: int = 50,
                   history: int = 10) -> TwoCycleReport:
    """Compare raw iterates ``T^(2k) F`` and ``T^(2k+1) F`` with the two
    translates of the fixed point predicted by the measured shift."""
    if reference is None:
        reference = solve(cfg)
    d = cfg.d
    G = cfg.start_function()
    gammas = []
    for j in range(k):
        TG = apply_T(G, d)
        if j >= k - history:
            gammas.append(estimate_gamma(G, TG))
        G = apply_T(TG, d)
    TG = apply_T(G, d)
    gamma = estimate_gamma(G, TG)
    gammas.append(gamma)
    even = sup_distance(G, translate(reference.F_d, gamma / 2))
    odd = sup_distance(TG, translate(reference.F_d, -gamma / 2))
    return TwoCycleReport(even, odd, gamma, gammas[-history:], k)


def uniqueness_probe(d: int, starts, grid: Grid | None = None, jobs: int = 4) -> tuple[list[FixedPointResult], float]:
    """Solve from several starts concurrently; return the results and the
    largest pairwise sup distance between the fixed points."""
    grid = grid or Grid()
    cfgs = [SolveConfig(d=d, grid=grid, start=s) for s in starts]
    with ThreadPoolExecutor(max_workers=jobs) as pool:
        results = list(pool.map(solve, cfgs))
    worst = max((sup_distance(a.F_d, b.F_d) for a, b in itertools.combinations(results, 2)),
                default=0.0)
    return results, worst
