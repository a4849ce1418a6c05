"""Minimum-weight d-factors on complete bipartite graphs with exp(1) weights.

Min-sum belief propagation is run with a synchronous schedule and messages
started at zero, which is the finite-n counterpart of iterating ``T`` from
the point mass at 0.  Exact answers come from the Hungarian method (d = 1)
and successive shortest paths on a unit-capacity flow network (any d).
"""
from __future__ import annotations

import csv
import heapq
import itertools
import json
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .rde_operator import check_d
from .seeding import substream

PI2_OVER_6 = math.pi ** 2 / 6


@dataclass(frozen=True, eq=False)
class Instance:
    n: int
    weights: np.ndarray
    seed: int | None = None


def gen_instance(n: int, seed) -> Instance:
    if n < 1:
        raise ValueError("n must be at least 1")
    rng = np.random.default_rng(seed)
    u = rng.random((n, n))
    w = -np.log1p(-u)
    w[w == 0] = np.finfo(float).tiny
    return Instance(n, w, seed)


def instance_from_weights(weights) -> Instance:
    w = np.asarray(weights, dtype=float)
    if w.ndim != 2 or w.shape[0] != w.shape[1]:
        raise ValueError("weights must be a square matrix")
    return Instance(w.shape[0], w)


# --- belief propagation ------------------------------------------------------------

@dataclass
class MessageSet:
    """``left_to_right[i, j]`` is the message from left vertex i to right
    vertex j; ``right_to_left[j, i]`` the reverse."""

    left_to_right: np.ndarray
    right_to_left: np.ndarray
    iteration: int = 0

    @classmethod
    def zeros(cls, n: int) -> "MessageSet":
        return cls(np.zeros((n, n)), np.zeros((n, n)), 0)


def _dmin_excluding(A: np.ndarray, d: int) -> np.ndarray:
    """``out[r, c]`` = d-th smallest of row r of A with column c left out."""
    part = np.partition(A, d, axis=1)
    dth = part[:, d - 1:d]
    nxt = part[:, d:d + 1]
    return np.where(A <= dth, nxt, dth)


def bp_step(inst: Instance, msgs: MessageSet, d: int, damping: float = 0.0) -> MessageSet:
    """Synchronous min-sum update; every new message reads only the previous generation."""
    d = check_d(d)
    if d >= inst.n:
        raise ValueError("bp_step needs d < n")
    W = inst.weights
    l2r = _dmin_excluding(W - msgs.right_to_left.T, d)
    r2l = _dmin_excluding(W.T - msgs.left_to_right.T, d)
    if damping:
        l2r = damping * msgs.left_to_right + (1 - damping) * l2r
        r2l = damping * msgs.right_to_left + (1 - damping) * r2l
    return MessageSet(l2r, r2l, msgs.iteration + 1)


def bp_run(inst: Instance, d: int, iters: int, damping: float = 0.0) -> MessageSet:
    msgs = MessageSet.zeros(inst.n)
    for _ in range(iters):
        msgs = bp_step(inst, msgs, d, damping)
    return msgs


@dataclass
class FactorSolution:
    edges: np.ndarray          # boolean n x n selection
    cost: float
    method: str
    consistent: bool = True

    def degrees_ok(self, d: int) -> bool:
        return bool(np.all(self.edges.sum(1) == d) and np.all(self.edges.sum(0) == d))

    def edge_set(self) -> set:
        return {tuple(map(int, e)) for e in np.argwhere(self.edges)}


def _select(scores: np.ndarray, d: int) -> np.ndarray:
    idx = np.argsort(scores, axis=1, kind="stable")[:, :d]
    sel = np.zeros(scores.shape, dtype=bool)
    np.put_along_axis(sel, idx, True, axis=1)
    return sel


def bp_decide(inst: Instance, msgs: MessageSet, d: int) -> FactorSolution:
    d = check_d(d)
    W = inst.weights
    left = _select(W - msgs.right_to_left.T, d)
    right = _select(W.T - msgs.left_to_right.T, d).T
    return FactorSolution(left, float(W[left].sum()), "bp", bool(np.array_equal(left, right)))


# --- exact solvers -------------------------------------------------------------------

def hungarian(cost: np.ndarray) -> np.ndarray:
    """Optimal assignment by the Hungarian method with row/column potentials.

    Rows are inserted one at a time; each insertion runs a Dijkstra-like
    search over reduced costs and augments along the shortest path.
    Returns ``col[i]`` for every row ``i``.
    """
    n = cost.shape[0]
    A = np.zeros((n + 1, n + 1))
    A[1:, 1:] = cost
    u = np.zeros(n + 1)
    v = np.zeros(n + 1)
    p = np.zeros(n + 1, dtype=int)     # p[j]: row matched to column j, 0 = free
    way = np.zeros(n + 1, dtype=int)
    for i in range(1, n + 1):
        p[0] = i
        j0 = 0
        minv = np.full(n + 1, np.inf)
        used = np.zeros(n + 1, dtype=bool)
        while True:
            used[j0] = True
            i0 = p[j0]
            free = ~used
            free[0] = False
            cur = A[i0] - u[i0] - v
            better = free & (cur < minv)
            minv[better] = cur[better]
            way[better] = j0
            masked = np.where(free, minv, np.inf)
            j1 = int(np.argmin(masked))
            delta = masked[j1]
            u[p[used]] += delta
            v[used] -= delta
            minv[free] -= delta
            j0 = j1
            if p[j0] == 0:
                break
        while j0:
            j1 = way[j0]
            p[j0] = p[j1]
            j0 = j1
    col = np.empty(n, dtype=int)
    col[p[1:] - 1] = np.arange(n)
    return col


def exact_matching(inst: Instance) -> FactorSolution:
    col = hungarian(inst.weights)
    sel = np.zeros((inst.n, inst.n), dtype=bool)
    sel[np.arange(inst.n), col] = True
    return FactorSolution(sel, float(inst.weights[sel].sum()), "hungarian")


def min_cost_dfactor(weights: np.ndarray, d: int) -> np.ndarray:
    """Successive shortest augmenting paths on
    source -> left (cap d) -> right (cap 1, cost w) -> sink (cap d).

    Node potentials keep reduced costs nonnegative so each augmentation is a
    Dijkstra search.  Returns the boolean selection of saturated edges.
    """
    n = weights.shape[0]
    if not 1 <= d <= n:
        raise ValueError(f"a {d}-factor needs 1 <= d <= n={n}")
    S, T = 2 * n, 2 * n + 1
    N = 2 * n + 2
    # adjacency lists of edge ids; edge arrays hold to, cap, cost
    to, cap, cst = [], [], []
    adj = [[] for _ in range(N)]

    def add(a, b, c, w):
        adj[a].append(len(to)); to.append(b); cap.append(c); cst.append(w)
        adj[b].append(len(to)); to.append(a); cap.append(0); cst.append(-w)

    for i in range(n):
        add(S, i, d, 0.0)
    lr = np.empty((n, n), dtype=int)
    for i in range(n):
        for j in range(n):
            lr[i, j] = len(to)
            add(i, n + j, 1, float(weights[i, j]))
    for j in range(n):
        add(n + j, T, d, 0.0)

    pot = [0.0] * N
    # initial potentials: shortest distances in the DAG S -> L -> R -> T
    for j in range(n):
        pot[n + j] = float(weights[:, j].min())
    pot[T] = min(pot[n:2 * n])
    flow = 0
    while flow < n * d:
        dist = [math.inf] * N
        prev = [-1] * N
        dist[S] = 0.0
        heap = [(0.0, S)]
        while heap:
            du, a = heapq.heappop(heap)
            if du > dist[a]:
                continue
            for e in adj[a]:
                if cap[e] > 0:
                    b = to[e]
                    nd = du + cst[e] + pot[a] - pot[b]
                    if nd < dist[b] - 1e-15:
                        dist[b] = nd
                        prev[b] = e
                        heapq.heappush(heap, (nd, b))
        if dist[T] == math.inf:
            raise RuntimeError("no augmenting path; d-factor infeasible")
        for a in range(N):
            if dist[a] < math.inf:
                pot[a] += dist[a]
        # bottleneck along the path
        push = math.inf
        b = T
        while b != S:
            e = prev[b]
            push = min(push, cap[e])
            b = to[e ^ 1]
        b = T
        while b != S:
            e = prev[b]
            cap[e] -= push
            cap[e ^ 1] += push
            b = to[e ^ 1]
        flow += push
    capa = np.asarray(cap)
    return capa[lr] == 0


def exact_dfactor(inst: Instance, d: int) -> FactorSolution:
    d = check_d(d)
    if d > inst.n:
        raise ValueError("a d-factor needs d <= n")
    sel = min_cost_dfactor(inst.weights, d)
    return FactorSolution(sel, float(inst.weights[sel].sum()), "mcmf")


def brute_force_matching(inst: Instance) -> FactorSolution:
    n = inst.n
    W = inst.weights
    best = min(itertools.permutations(range(n)), key=lambda p: W[np.arange(n), list(p)].sum())
    sel = np.zeros((n, n), dtype=bool)
    sel[np.arange(n), list(best)] = True
    return FactorSolution(sel, float(W[sel].sum()), "brute")


def brute_force_dfactor(inst: Instance, d: int) -> FactorSolution:
    """Enumerate 0/1 matrices with all row and column sums equal to d,
    row by row with column-capacity pruning."""
    n = inst.n
    W = inst.weights
    rows = [np.array(c) for c in itertools.combinations(range(n), d)]
    best = [math.inf, None]

    def rec(i, colsum, acc, chosen):
        if acc >= best[0]:
            return
        if i == n:
            if np.all(colsum == d):
                best[0], best[1] = acc, list(chosen)
            return
        remaining = n - i
        for r in rows:
            cs = colsum.copy()
            cs[r] += 1
            if np.any(cs > d) or np.any(cs + remaining - 1 < d):
                continue
            chosen.append(r)
            rec(i + 1, cs, acc + W[i, r].sum(), chosen)
            chosen.pop()

    rec(0, np.zeros(n, dtype=int), 0.0, [])
    sel = np.zeros((n, n), dtype=bool)
    for i, r in enumerate(best[1]):
        sel[i, r] = True
    return FactorSolution(sel, float(W[sel].sum()), "brute")


# --- comparison runs -------------------------------------------------------------------

@dataclass
class InstanceRow:
    instance_seed: int
    n: int
    d: int
    exact_cost: float
    bp_cost: float
    bp_consistent: bool
    gap: float


@dataclass
class CompareReport:
    n: int
    d: int
    bp_iters: int
    seed: int
    rows: list[InstanceRow] = field(default_factory=list)
    damping: float = 0.0

    @property
    def mean_exact(self) -> float:
        return float(np.mean([r.exact_cost for r in self.rows]))

    @property
    def stderr(self) -> float:
        c = np.array([r.exact_cost for r in self.rows])
        return float(c.std(ddof=1) / math.sqrt(c.size)) if c.size > 1 else float("nan")

    @property
    def inconsistent(self) -> int:
        return sum(not r.bp_consistent for r in self.rows)

    @property
    def bp_pass_rate(self) -> float:
        """Fraction of all instances where BP is consistent and hits the optimum."""
        ok = [r.bp_consistent and abs(r.gap) <= 1e-9 for r in self.rows]
        return float(np.mean(ok))

    @property
    def max_consistent_gap(self) -> float:
        gaps = [r.gap for r in self.rows if r.bp_consistent]
        return float(max(gaps)) if gaps else float("nan")

    def aggregate(self) -> dict:
        out = {"n": self.n, "d": self.d, "num_instances": len(self.rows),
               "mean_exact": self.mean_exact, "stderr": self.stderr,
               "bp_pass_rate": self.bp_pass_rate, "bp_inconsistent": self.inconsistent,
               "bp_iters": self.bp_iters, "seed": self.seed}
        if self.d == 1:
            out["pi2_over_6_gap"] = self.mean_exact - PI2_OVER_6
        if self.damping:
            out["damping"] = self.damping
        return out

    def to_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["instance_seed", "n", "d", "exact_cost", "bp_cost", "bp_consistent", "gap"])
            for r in self.rows:
                w.writerow([r.instance_seed, r.n, r.d, f"{r.exact_cost:.17g}", f"{r.bp_cost:.17g}",
                            int(r.bp_consistent), f"{r.gap:.17g}"])

    def to_json(self, path) -> None:
        with open(path, "w") as fh:
            json.dump(self.aggregate(), fh, indent=2)


def instance_seeds(seed: int, count: int) -> list[int]:
    ss = substream(seed, "graph_solvers", "instances")
    return [int(s) for s in ss.generate_state(count, dtype=np.uint64)]


def run_instance(n: int, d: int, bp_iters: int, instance_seed: int, damping: float = 0.0,
                 with_bp: bool = True) -> InstanceRow:
    inst = gen_instance(n, instance_seed)
    exact = exact_matching(inst) if d == 1 else exact_dfactor(inst, d)
    if with_bp and d < n:
        bp = bp_decide(inst, bp_run(inst, d, bp_iters, damping), d)
        bp_cost, consistent = bp.cost, bp.consistent
    else:
        bp_cost, consistent = float("nan"), False
    gap = (bp_cost - exact.cost) / exact.cost
    return InstanceRow(instance_seed, n, d, exact.cost, bp_cost, consistent, gap)


def compare_run(n: int, d: int, num_instances: int, bp_iters: int = 50, seed: int = 0,
                damping: float = 0.0, jobs: int = 1, with_bp: bool = True) -> CompareReport:
    d = check_d(d)
    seeds = instance_seeds(seed, num_instances)
    args = [(n, d, bp_iters, s, damping, with_bp) for s in seeds]
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as ex:
            rows = list(ex.map(run_instance, *zip(*args)))
    else:
        rows = [run_instance(*a) for a in args]
    return CompareReport(n, d, bp_iters, seed, rows, damping)


def message_samples(inst: Instance, msgs: MessageSet) -> np.ndarray:
    """All messages rescaled by ``n``, the PWIT scaling of the edge weights."""
    return inst.n * np.concatenate([msgs.left_to_right.ravel(), msgs.right_to_left.ravel()])
