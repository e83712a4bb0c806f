"""Command-line front end: trial, sweep, solver-bench and validate."""
from __future__ import annotations

import argparse
import csv
import logging
import sys
import time
from pathlib import Path

import numpy as np
import yaml

from . import __version__, checks
from .assignment import bench_solvers
from .config import ConfigError, NetworkConfig, config_from_dict, load_config
from .montecarlo import AXES, SCHEMES, SweepResult, run_sweep, run_trials, summarize

log = logging.getLogger("risnoma")

SWEEP_HEADER = ["axis_value", "scheme", "mean_bps", "ci95_bps", "trials"]
TRIAL_HEADER = (["axis", "axis_value", "trial"]
                + [f"{s}_bps" for s in SCHEMES]
                + [f"{s}_qos_violations" for s in SCHEMES]
                + ["proposed_own_block_bps", "cross_block_ratio", "constraints_ok"])


def _num(x) -> str:
    """17 significant digits: parses back to the same double."""
    return f"{float(x):.17g}"


def single_point(cfg: NetworkConfig, trials: int, master_seed: int, threads: int = 1) -> SweepResult:
    """A trial batch at the config itself, shaped like a one-value sweep on N."""
    res = run_trials(cfg, trials, master_seed, threads)
    m, c = summarize(res)
    return SweepResult("N", [cfg.N], trials,
                       {s: np.array([m[s]]) for s in SCHEMES},
                       {s: np.array([c[s]]) for s in SCHEMES}, [res])


def _open(path: Path):
    try:
        return open(path, "w", newline="")
    except OSError as exc:
        raise OSError(f"cannot write {path}: {exc.strerror}") from exc


def emit_results(result: SweepResult, outdir, cfg: NetworkConfig, master_seed: int,
                 command: str = "sweep") -> dict[str, Path]:
    """Write sweep.csv, trials.csv and run_meta.yaml into ``outdir``."""
    outdir = Path(outdir)
    try:
        outdir.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise OSError(f"cannot create output directory {outdir}: {exc.strerror}") from exc
    paths = {"sweep": outdir / "sweep.csv", "trials": outdir / "trials.csv",
             "meta": outdir / "run_meta.yaml"}

    with _open(paths["sweep"]) as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(SWEEP_HEADER)
        for i, v in enumerate(result.values):
            for s in SCHEMES:
                w.writerow([v, s, _num(result.mean[s][i]), _num(result.ci95[s][i]),
                            result.trials])

    with _open(paths["trials"]) as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(TRIAL_HEADER)
        for v, batch in zip(result.values, result.results):
            for t in batch:
                w.writerow([result.axis, v, t.trial]
                           + [_num(t.sum_rate[s]) for s in SCHEMES]
                           + [t.qos_violations[s] for s in SCHEMES]
                           + [_num(t.proposed_own_block), _num(t.cross_block_ratio),
                              int(t.constraints_ok)])

    meta = {"version": __version__, "command": command, "master_seed": int(master_seed),
            "axis": result.axis, "values": [v for v in result.values],
            "trials": result.trials, "numpy": np.__version__, "config": cfg.to_dict()}
    try:
        paths["meta"].write_text(yaml.safe_dump(meta, sort_keys=False))
    except OSError as exc:
        raise OSError(f"cannot write {paths['meta']}: {exc.strerror}") from exc
    return paths


def load_run_meta(path) -> tuple[NetworkConfig, dict]:
    meta = yaml.safe_load(Path(path).read_text())
    return config_from_dict(meta["config"]), meta


def read_sweep_csv(path) -> list[dict]:
    with open(path, newline="") as fh:
        return list(csv.DictReader(fh))


def _parse_values(text: str, axis: str) -> list:
    conv = int if axis in ("U", "N") else float
    try:
        return [conv(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise ConfigError(f"--values {text!r}: expected comma-separated {conv.__name__}s")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="risnoma", description=__doc__)
    ap.add_argument("command", choices=["trial", "sweep", "solver-bench", "validate"])
    ap.add_argument("--config", type=Path, help="YAML config; missing fields take defaults")
    ap.add_argument("--out", type=Path, default=Path("results"), help="output directory")
    ap.add_argument("--trials", type=int, default=200,
                    help="trials per point (solver-bench: instances)")
    ap.add_argument("--sweep", choices=AXES, help="sweep axis")
    ap.add_argument("--values", help="comma-separated sweep values, ascending")
    ap.add_argument("--seed", type=int, help="master seed (default: config seed)")
    ap.add_argument("--threads", type=int, default=1)
    ap.add_argument("--dim", type=int, default=5, help="solver-bench tensor size")
    ap.add_argument("--verbose", "-v", action="store_true")
    return ap


def _cmd_simulate(args, cfg, seed) -> int:
    t0 = time.perf_counter()
    if args.command == "sweep":
        if not args.sweep or not args.values:
            raise ConfigError("sweep needs --sweep <axis> and --values <v1,v2,...>")
        values = _parse_values(args.values, args.sweep)
        for v in values:
            cfg.replace(**{args.sweep: v})      # validate every point up front
        result = run_sweep(cfg, args.sweep, values, args.trials, seed, args.threads)
    else:
        result = single_point(cfg, args.trials, seed, args.threads)
    paths = emit_results(result, args.out, cfg, seed, args.command)
    for i, v in enumerate(result.values):
        line = "  ".join(f"{s} {result.mean[s][i] / 1e6:.3f}±{result.ci95[s][i] / 1e6:.3f}"
                         for s in SCHEMES)
        print(f"{result.axis}={v}: {line} Mbit/s")
    bad = sum(not t.constraints_ok for batch in result.results for t in batch)
    print(f"wrote {paths['sweep']}, {paths['trials']}, {paths['meta']} "
          f"({time.perf_counter() - t0:.1f} s)")
    if bad:
        print(f"constraint check failed in {bad} trial(s)", file=sys.stderr)
        return 1
    return 0


def _cmd_bench(args, seed) -> int:
    rep = bench_solvers(args.trials, args.dim, seed)
    print(f"{rep.instances} instances {rep.dim}x{rep.dim}x{rep.dim}: "
          f"heuristic >= 95% of exact on {100 * rep.share_within(0.95):.1f}%, "
          f"mean ratio {rep.ratios.mean():.4f}, min {rep.ratios.min():.4f}")
    print(f"runtime exact {rep.exact_seconds:.2f} s, heuristic {rep.heuristic_seconds:.2f} s")
    args.out.mkdir(parents=True, exist_ok=True)
    path = args.out / "solver_bench.csv"
    with _open(path) as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["instance", "ratio"])
        for i, r in enumerate(rep.ratios):
            w.writerow([i, _num(r)])
    return 0


def _cmd_validate(cfg) -> int:
    ok = True
    for res in checks.run_all(cfg):
        print(f"{'PASS' if res.passed else 'FAIL'}  {res.name}: {res.detail} "
              f"({res.seconds:.2f} s)")
        ok &= res.passed
    return 0 if ok else 1


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        cfg = load_config(args.config) if args.config else NetworkConfig()
        seed = cfg.seed if args.seed is None else args.seed
        if args.trials < 1:
            raise ConfigError(f"--trials={args.trials}: must be >= 1")
        if args.threads < 1:
            raise ConfigError(f"--threads={args.threads}: must be >= 1")
        if args.command == "solver-bench":
            return _cmd_bench(args, seed)
        if args.command == "validate":
            return _cmd_validate(cfg)
        return _cmd_simulate(args, cfg, seed)
    except (ConfigError, OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
