"""Monte-Carlo solvers for the d-th minimum recursion.

Three independent routes to the law of ``X``: pooled population dynamics,
sampling from a depth-truncated Poisson weighted infinite tree, and the exact
cost-difference recursion on finite weighted trees (matching case).
"""
from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass, field

import numpy as np

from .dist_core import Grid, TailFunction, empirical_tail, inverse, ks_distance
from .rde_operator import check_d

CHUNK = 20_000


def dmin(points, d: int) -> float:
    """d-th smallest element."""
    a = np.asarray(points, dtype=float).ravel()
    if d < 1 or a.size < d:
        raise ValueError(f"need at least d={d} values, got {a.size}")
    return float(np.partition(a, d - 1)[d - 1])


@dataclass(frozen=True)
class PoissonTruncation:
    """Arrivals beyond ``window`` are dropped, but at least ``min_points`` are kept."""

    window: float = 60.0
    min_points: int | None = None

    def points_for(self, d: int) -> int:
        m = self.min_points if self.min_points is not None else d + 8
        if m <= d:
            raise ValueError(f"min_points={m} must exceed d={d}")
        if not self.window > 0:
            raise ValueError("window must be positive")
        return m


@dataclass
class SamplePool:
    samples: np.ndarray
    generation: int = 0
    seed: int = 0

    def __post_init__(self):
        self.samples = np.asarray(self.samples, dtype=float)
        if self.samples.size < 1000:
            raise ValueError("a pool needs at least 1000 samples")
        if not np.all(np.isfinite(self.samples)):
            raise ValueError("pool samples must be finite")

    @classmethod
    def constant(cls, value: float = 0.0, N: int = 100_000, seed: int = 0) -> "SamplePool":
        return cls(np.full(N, float(value)), 0, seed)

    @property
    def N(self) -> int:
        return self.samples.size

    def rng(self) -> np.random.Generator:
        # one stream per (seed, generation) so every step is reproducible on its own
        return np.random.default_rng(np.random.SeedSequence(self.seed, spawn_key=(self.generation,)))

    def to_csv(self, path) -> None:
        np.savetxt(path, self.samples, fmt="%.17g", header="sample", comments="")


def _arrivals(rng, rows: int, window: float, min_points: int) -> np.ndarray:
    """Rate-1 Poisson arrivals on [0, window] padded with +inf, but always at
    least ``min_points`` finite entries per row."""
    m = int(math.ceil(window + 6 * math.sqrt(window))) + min_points
    xi = np.cumsum(rng.standard_exponential((rows, m)), axis=1)
    while np.any(xi[:, -1] <= window):
        extra = np.cumsum(rng.standard_exponential((rows, m)), axis=1) + xi[:, -1:]
        xi = np.concatenate([xi, extra], axis=1)
    keep = xi <= window
    keep[:, :min_points] = True
    return np.where(keep, xi, np.inf)


def popdyn_step(pool: SamplePool, d: int, trunc: PoissonTruncation | None = None) -> SamplePool:
    """One generation: each new sample is the d-th minimum of ``xi_j - X_j``
    with ``X_j`` drawn with replacement from the current pool."""
    d = check_d(d)
    trunc = trunc or PoissonTruncation()
    m_min = trunc.points_for(d)
    rng = pool.rng()
    old = pool.samples
    new = np.empty(pool.N)
    for start in range(0, pool.N, CHUNK):
        rows = min(CHUNK, pool.N - start)
        xi = _arrivals(rng, rows, trunc.window, m_min)
        X = old[rng.integers(0, pool.N, size=xi.shape)]
        vals = xi - X
        new[start:start + rows] = np.partition(vals, d - 1, axis=1)[:, d - 1]
    return SamplePool(new, pool.generation + 1, pool.seed)


@dataclass
class PopdynResult:
    d: int
    N: int
    steps: int
    seed: int
    window: float
    pool: SamplePool
    shift: float
    empirical_tail: TailFunction
    ks_vs_Fd: float

    def metadata(self) -> dict:
        return {"d": self.d, "N": self.N, "steps": self.steps, "seed": self.seed,
                "lambda": self.window, "shift": self.shift, "ks_vs_Fd": self.ks_vs_Fd}

    def to_json(self, path) -> None:
        with open(path, "w") as fh:
            json.dump(self.metadata(), fh, indent=2)


def popdyn_solve(d: int, F_d: TailFunction, N: int = 100_000, steps: int = 60, seed: int = 0,
                 trunc: PoissonTruncation | None = None, grid: Grid | None = None) -> PopdynResult:
    """Run population dynamics from the point mass at 0 and compare the
    re-centred final pool with ``F_d``.

    The pool is only re-centred at readout, by the offset between its median
    and the median of ``F_d``.
    """
    if steps % 2:
        raise ValueError("steps must be even")
    trunc = trunc or PoissonTruncation()
    pool = SamplePool.constant(0.0, N, seed)
    for _ in range(steps):
        pool = popdyn_step(pool, d, trunc)
    shift = float(np.median(pool.samples) - inverse(F_d, 0.5))
    centred = pool.samples - shift
    tail = empirical_tail(centred, grid or F_d.grid)
    return PopdynResult(d, N, steps, seed, trunc.window, pool, shift, tail, ks_distance(centred, F_d))


# --- truncated PWIT ---------------------------------------------------------------

MAX_PWIT_NODES = 5_000_000


def pwit_samples(n: int, depth: int, d: int, trunc: PoissonTruncation | None = None, rng=None) -> np.ndarray:
    """``n`` independent root values of a depth-truncated PWIT.

    Every vertex keeps its first ``trunc.min_points`` children; vertices at
    the truncation depth carry the boundary value 0.  The result has the law
    of ``T^depth`` applied to the point mass at 0, up to the branching cut.
    """
    d = check_d(d)
    trunc = trunc or PoissonTruncation()
    b = trunc.points_for(d)
    if depth < 0:
        raise ValueError("depth must be nonnegative")
    if depth > 1 and b ** (depth - 1) > MAX_PWIT_NODES:
        raise ValueError(f"depth {depth} with branching {b} exceeds the node budget")
    rng = rng if rng is not None else np.random.default_rng()
    if depth == 0:
        return np.zeros(n)
    out = np.empty(n)
    per = max(1, MAX_PWIT_NODES // max(1, b ** (depth - 1)))
    for start in range(0, n, per):
        rows = min(per, n - start)
        # one level above the boundary, the value is just the d-th arrival
        vals = rng.standard_gamma(d, size=(rows,) + (b,) * (depth - 1))
        for _ in range(depth - 1):
            xi = np.cumsum(rng.standard_exponential(vals.shape), axis=-1)
            vals = np.partition(xi - vals, d - 1, axis=-1)[..., d - 1]
        out[start:start + rows] = vals
    return out


def pwit_sample(depth: int, d: int, trunc: PoissonTruncation | None = None, rng=None) -> float:
    return float(pwit_samples(1, depth, d, trunc, rng)[0])


# --- finite trees ------------------------------------------------------------------

@dataclass
class WeightedTree:
    """Undirected tree given as ``{vertex: {neighbour: weight}}``."""

    adjacency: dict = field(default_factory=dict)
    root: object = 0

    def __post_init__(self):
        adj = self.adjacency
        if self.root not in adj:
            raise ValueError("root is not a vertex")
        for u, nbrs in adj.items():
            for v, w in nbrs.items():
                if v not in adj or adj[v].get(u) != w:
                    raise ValueError(f"edge {u}-{v} is not symmetric")
                if not w > 0:
                    raise ValueError(f"edge {u}-{v} has nonpositive weight")
        n_edges = sum(len(n) for n in adj.values()) // 2
        if n_edges != len(adj) - 1 or len(self.order()) != len(adj):
            raise ValueError("graph is not a tree")

    @classmethod
    def from_edges(cls, edges, root=0) -> "WeightedTree":
        adj: dict = {root: {}}
        for u, v, w in edges:
            if u == v or v in adj.get(u, {}):
                raise ValueError(f"malformed edge {u}-{v}")
            adj.setdefault(u, {})[v] = w
            adj.setdefault(v, {})[u] = w
        return cls(adj, root)

    def order(self) -> list:
        """Vertices in BFS order from the root."""
        seen = {self.root}
        out = [self.root]
        for u in out:
            for v in self.adjacency[u]:
                if v not in seen:
                    seen.add(v)
                    out.append(v)
        return out

    def children(self) -> dict:
        parent = {self.root: None}
        kids: dict = {}
        for u in self.order():
            kids[u] = [v for v in self.adjacency[u] if v != parent[u]]
            for v in kids[u]:
                parent[v] = u
        return kids


def tree_cost_recursion(tree: WeightedTree) -> float:
    """Root value of ``D(v) = min_children (w(v, i) - D(i))`` with ``D = 0``
    at leaves.

    ``D(root)`` is the matching-cost difference ``C(T) - C(T minus root)``
    where a matching must cover every vertex that has children and leaves may
    stay unmatched at no cost.
    """
    kids = tree.children()
    if not kids[tree.root]:
        raise ValueError("tree has a single vertex")
    D = {}
    for u in reversed(tree.order()):
        if kids[u]:
            D[u] = min(tree.adjacency[u][i] - D[i] for i in kids[u])
        else:
            D[u] = 0.0
    return D[tree.root]


def read_pool_csv(path) -> np.ndarray:
    with open(path) as fh:
        rows = list(csv.reader(fh))
    return np.array([float(r[0]) for r in rows[1:]])
