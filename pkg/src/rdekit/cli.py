"""Command-line entry point: ``rdekit <command> [flags]``.

Every run writes its artifacts plus a ``run.json`` manifest into the output
directory.  Exit status is 0 on success, 1 on a numerical failure and 2 on
a configuration error.
"""
from __future__ import annotations

import argparse
import json
import logging
import os
import platform
import sys
import time
from dataclasses import asdict, dataclass, field, fields
from pathlib import Path

import numpy as np
import scipy

from . import __version__
from .dist_core import Grid, GridError, ks_distance, make_standard, certify_d1
from .fixed_point import ConvergenceError, SolveConfig, solve
from .graph_solvers import (bp_decide, bp_run, compare_run, exact_dfactor, exact_matching,
                            gen_instance)
from .population_dynamics import PoissonTruncation, popdyn_solve, pwit_samples
from .rde_operator import MAX_D, apply_T, tail_diagnostics
from .seeding import DEFAULT_SEED, substream_rng, substream_seed
from .shift_analysis import shift_trace

log = logging.getLogger("rdekit")

COMMANDS = ("solve-rde", "trace", "popdyn", "pwit", "bp", "exact", "compare", "diagnostics")
STARTS = ("exp1", "logistic", "point_mass_at_0")


class ConfigError(ValueError):
    pass


@dataclass
class RunConfig:
    command: str = "solve-rde"
    d: int = 1
    x_min: float = -40.0
    x_max: float = 40.0
    step: float = 0.01
    start: str = "exp1"
    tol: float = 1e-6
    max_iters: int = 200
    k: int = 50
    N: int = 100_000
    steps: int = 60
    window: float = 60.0
    depth: int = 4
    samples: int = 100_000
    n: int = 300
    num_instances: int = 50
    bp_iters: int = 50
    damping: float = 0.0
    seed: int = DEFAULT_SEED
    jobs: int = 1
    out_dir: str = field(default_factory=lambda: os.environ.get("RDE_OUT_DIR", "rde_out"))

    def validate(self) -> None:
        if self.command not in COMMANDS:
            raise ConfigError(f"command: unknown command {self.command!r}")
        if isinstance(self.d, bool) or not isinstance(self.d, int) or not 1 <= self.d <= MAX_D:
            raise ConfigError(f"d: must be an integer in [1, {MAX_D}], got {self.d!r}")
        try:
            Grid(self.x_min, self.x_max, self.step)
        except GridError as exc:
            raise ConfigError(f"grid: {exc}") from exc
        if self.start not in STARTS:
            raise ConfigError(f"start: must be one of {STARTS}")
        positive = {"tol": self.tol, "N": self.N, "n": self.n, "num_instances": self.num_instances,
                    "samples": self.samples, "window": self.window, "jobs": self.jobs}
        for name, value in positive.items():
            if not value > 0:
                raise ConfigError(f"{name}: must be positive, got {value!r}")
        if self.max_iters < 4:
            raise ConfigError("max_iters: must be at least 4")
        if self.steps < 0 or self.steps % 2:
            raise ConfigError("steps: must be a nonnegative even number")
        if self.N < 1000:
            raise ConfigError("N: a pool needs at least 1000 samples")
        if self.depth < 0 or self.k < 1 or self.bp_iters < 1:
            raise ConfigError("depth, k and bp_iters must be nonnegative/positive")
        if not 0 <= self.damping < 1:
            raise ConfigError("damping: must lie in [0, 1)")
        if self.command in ("bp", "exact", "compare") and self.d > self.n:
            raise ConfigError(f"d: must not exceed n={self.n}")
        if self.command == "bp" and self.d >= self.n:
            raise ConfigError(f"d: belief propagation needs d < n={self.n}")

    @property
    def grid(self) -> Grid:
        return Grid(self.x_min, self.x_max, self.step)


FLAG_NAMES = {"x_min": "--x-min", "x_max": "--x-max", "max_iters": "--max-iters",
              "num_instances": "--instances", "bp_iters": "--bp-iters", "out_dir": "--out-dir"}


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="rdekit", description=__doc__.splitlines()[0])
    p.add_argument("command", choices=COMMANDS)
    p.add_argument("--config", help="JSON file with RunConfig fields (or a run.json manifest)")
    for f in fields(RunConfig):
        if f.name == "command":
            continue
        flag = FLAG_NAMES.get(f.name, "--" + f.name.replace("_", "-"))
        kind = {"int": int, "float": float, "str": str}[f.type] if isinstance(f.type, str) else f.type
        p.add_argument(flag, dest=f.name, type=kind, default=None)
    p.add_argument("-v", "--verbose", action="store_true")
    return p


def resolve_config(argv) -> RunConfig:
    args = build_parser().parse_args(argv)
    values: dict = {}
    if args.config:
        try:
            with open(args.config) as fh:
                loaded = json.load(fh)
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError(f"config: cannot read {args.config}: {exc}") from exc
        loaded = loaded.get("config", loaded)
        known = {f.name for f in fields(RunConfig)}
        unknown = set(loaded) - known
        if unknown:
            raise ConfigError(f"config: unknown fields {sorted(unknown)}")
        values.update(loaded)
    values.update({k: v for k, v in vars(args).items()
                   if v is not None and k not in ("config", "verbose")})
    cfg = RunConfig(**values)
    cfg.validate()
    return cfg


# --- pipelines -----------------------------------------------------------------------

def _solve(cfg: RunConfig, start=None):
    return solve(SolveConfig(d=cfg.d, grid=cfg.grid, start=start or cfg.start,
                             max_iters=cfg.max_iters, tol=cfg.tol, record_trace=True))


def _cmd_solve(cfg, out: Path) -> dict:
    res = _solve(cfg)
    res.F_d.to_csv(out / "F_d.csv")
    res.to_json(out / "fixed_point.json")
    res.trace.to_csv(out / "trace.csv")
    return res.metadata()


def _cmd_trace(cfg, out: Path) -> dict:
    F = make_standard(cfg.start, cfg.grid)
    tr = shift_trace(F, cfg.d, cfg.k)
    tr.to_csv(out / "trace.csv")
    return {"monotone": tr.is_monotone(), "final_gap": float(tr.gaps[-1]),
            "final_gamma": tr.gamma[-1]}


def _cmd_popdyn(cfg, out: Path) -> dict:
    ref = _solve(cfg, "exp1")
    res = popdyn_solve(cfg.d, ref.F_d, N=cfg.N, steps=cfg.steps,
                       seed=substream_seed(cfg.seed, "population_dynamics", "pool"),
                       trunc=PoissonTruncation(cfg.window))
    res.pool.to_csv(out / "pool.csv")
    res.empirical_tail.to_csv(out / "empirical_tail.csv")
    res.to_json(out / "popdyn.json")
    return res.metadata()


def _cmd_pwit(cfg, out: Path) -> dict:
    rng = substream_rng(cfg.seed, "population_dynamics", "pwit")
    s = pwit_samples(cfg.samples, cfg.depth, cfg.d, PoissonTruncation(cfg.window), rng)
    F = make_standard("point_mass_at_0", cfg.grid)
    for _ in range(cfg.depth):
        F = apply_T(F, cfg.d)
    meta = {"d": cfg.d, "depth": cfg.depth, "samples": cfg.samples, "seed": cfg.seed,
            "ks_vs_operator": ks_distance(s, F)}
    np.savetxt(out / "pwit_samples.csv", s, fmt="%.17g", header="sample", comments="")
    with open(out / "pwit.json", "w") as fh:
        json.dump(meta, fh, indent=2)
    return meta


def _cmd_bp(cfg, out: Path) -> dict:
    inst = gen_instance(cfg.n, substream_seed(cfg.seed, "graph_solvers", "bp"))
    sol = bp_decide(inst, bp_run(inst, cfg.d, cfg.bp_iters, cfg.damping), cfg.d)
    meta = {"n": cfg.n, "d": cfg.d, "bp_iters": cfg.bp_iters, "damping": cfg.damping,
            "cost": sol.cost, "consistent": sol.consistent}
    np.savetxt(out / "bp_edges.csv", np.argwhere(sol.edges), fmt="%d", delimiter=",",
               header="i,j", comments="")
    with open(out / "bp.json", "w") as fh:
        json.dump(meta, fh, indent=2)
    return meta


def _cmd_exact(cfg, out: Path) -> dict:
    inst = gen_instance(cfg.n, substream_seed(cfg.seed, "graph_solvers", "exact"))
    sol = exact_matching(inst) if cfg.d == 1 else exact_dfactor(inst, cfg.d)
    meta = {"n": cfg.n, "d": cfg.d, "cost": sol.cost, "method": sol.method}
    np.savetxt(out / "exact_edges.csv", np.argwhere(sol.edges), fmt="%d", delimiter=",",
               header="i,j", comments="")
    with open(out / "exact.json", "w") as fh:
        json.dump(meta, fh, indent=2)
    return meta


def _cmd_compare(cfg, out: Path) -> dict:
    rep = compare_run(cfg.n, cfg.d, cfg.num_instances, cfg.bp_iters, cfg.seed,
                      damping=cfg.damping, jobs=cfg.jobs, with_bp=cfg.d < cfg.n)
    rep.to_csv(out / "report.csv")
    rep.to_json(out / "aggregate.json")
    return rep.aggregate()


def _cmd_diagnostics(cfg, out: Path) -> dict:
    ref = _solve(cfg, "exp1")
    F = make_standard(cfg.start, cfg.grid)
    rows = []
    for j in range(1, 13):
        F = apply_T(F, cfg.d)
        if j >= 2:
            rows.append((str(j), F))
    rows.append(("F_d", ref.F_d))
    with open(out / "diagnostics.csv", "w") as fh:
        fh.write("k,max_slope,d1_pass,right_ratio_min,right_ratio_max,left_ratio_min,left_ratio_max\n")
        for label, G in rows:
            cert = certify_d1(G)
            diag = (tail_diagnostics(G, cfg.d).as_tuple() if label == "F_d" or int(label) >= 4
                    else (float("nan"),) * 4)
            fh.write(",".join([label, f"{cert.max_slope:.17g}", str(int(cert.passes))]
                              + [f"{v:.17g}" for v in diag]) + "\n")
    return {"rows": len(rows)}


PIPELINES = {"solve-rde": _cmd_solve, "trace": _cmd_trace, "popdyn": _cmd_popdyn,
             "pwit": _cmd_pwit, "bp": _cmd_bp, "exact": _cmd_exact, "compare": _cmd_compare,
             "diagnostics": _cmd_diagnostics}


def run(cfg: RunConfig) -> int:
    try:
        cfg.validate()
        out = Path(cfg.out_dir)
        out.mkdir(parents=True, exist_ok=True)
        probe = out / ".write_probe"
        probe.write_text("")
        probe.unlink()
    except ConfigError as exc:
        log.error("config error: %s", exc)
        return 2
    except OSError as exc:
        log.error("config error: out_dir %s is not writable: %s", cfg.out_dir, exc)
        return 2
    log.info("running %s with seed %d", cfg.command, cfg.seed)
    t0 = time.perf_counter()
    status, summary = 0, {}
    try:
        summary = PIPELINES[cfg.command](cfg, out)
    except (ConvergenceError, GridError) as exc:
        log.error("numerical failure: %s", exc)
        status, summary = 1, {"error": str(exc)}
    manifest = {"config": asdict(cfg), "status": status, "summary": summary,
                "wall_time_s": time.perf_counter() - t0,
                "versions": {"rdekit": __version__, "python": platform.python_version(),
                             "numpy": np.__version__, "scipy": scipy.__version__}}
    with open(out / "run.json", "w") as fh:
        json.dump(manifest, fh, indent=2, default=float)
    return status


def main(argv=None) -> int:
    argv = sys.argv[1:] if argv is None else argv
    logging.basicConfig(level=logging.INFO if "-v" in argv or "--verbose" in argv else logging.WARNING,
                        format="%(levelname)s %(message)s")
    try:
        cfg = resolve_config(argv)
    except SystemExit as exc:  # argparse usage errors
        return int(exc.code or 0)
    except ConfigError as exc:
        log.error("config error: %s", exc)
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except TypeError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    return run(cfg)


if __name__ == "__main__":
    sys.exit(main())
