"""Seeded trials and parameter sweeps with common random numbers."""
from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from . import baselines, scheduler
from .channel import generate_channels
from .config import NetworkConfig
from .phy import cascade_tensor
from .topology import generate_topology

SCHEMES = ("proposed", "opt", "mgf", "sgf")
AXES = ("U", "D_out", "N")


@dataclass
class TrialResult:
    trial: int
    sum_rate: dict[str, float]
    qos_violations: dict[str, int]
    solver_stats: list[tuple[float, float | None]] = field(default_factory=list)
    constraints_ok: bool = True
    proposed_own_block: float = float("nan")   # proposed rate under the own-block SINR
    cross_block_ratio: float = float("nan")    # extra received power from other blocks


@dataclass
class SweepResult:
    axis: str
    values: list
    trials: int
    mean: dict[str, np.ndarray]
    ci95: dict[str, np.ndarray]
    results: list[list[TrialResult]]           # [value][trial]


def trial_seed(master_seed: int, trial: int) -> np.random.SeedSequence:
    return np.random.SeedSequence(entropy=master_seed, spawn_key=(trial,))


def run_trial(cfg: NetworkConfig, seed: int | np.random.SeedSequence, trial: int = 0) -> TrialResult:
    """One network realization, all four schemes on the same channels.

    ``seed`` may be an int or a SeedSequence; topology and channels use two
    child streams, so changing N or D_out keeps the UE drops and direct links.
    """
    ss = seed if isinstance(seed, np.random.SeedSequence) else np.random.SeedSequence(seed)
    # explicit child keys: SeedSequence.spawn is stateful and would break reruns
    topo_ss, chan_ss = (np.random.SeedSequence(ss.entropy, spawn_key=ss.spawn_key + (k,))
                        for k in range(2))
    placement = generate_topology(cfg, np.random.default_rng(topo_ss))
    ch = generate_channels(placement, cfg, np.random.default_rng(chan_ss))

    Z = cascade_tensor(ch)
    state, qos = scheduler.run_joint_clustering(ch, cfg, Z)
    checks = scheduler.check_constraints(state, cfg)
    ok = all(v for k, v in checks.items() if k != "C1")

    full_pw = scheduler.received_powers_full(state, ch, cfg, Z)
    own_pw = scheduler.received_powers_own_block(state, ch, cfg, Z)
    proposed = scheduler.network_sum_rate(state, ch, cfg, full=True, Z=Z)
    own = scheduler.network_sum_rate(state, ch, cfg, full=False, Z=Z)

    clusters = baselines.benchmark_clusters(ch, cfg.R, cfg.K)
    sgf = baselines.sgf_noma_rate(clusters, ch, cfg)
    mgf = baselines.mgf_noma_rate(ch, cfg, clusters)
    opt = baselines.opt_pdnoma_rate(clusters, ch, cfg)

    return TrialResult(
        trial=trial,
        sum_rate={"proposed": proposed, "opt": opt.sum_rate,
                  "mgf": mgf.sum_rate, "sgf": sgf.sum_rate},
        qos_violations={"proposed": qos.violations, "opt": opt.qos_violations,
                        "mgf": mgf.qos_violations, "sgf": sgf.qos_violations},
        solver_stats=list(state.aa_stats),
        constraints_ok=ok,
        proposed_own_block=own,
        cross_block_ratio=float(np.sum(full_pw - own_pw) / np.sum(own_pw)),
    )


def mean_ci(values) -> tuple[float, float]:
    """Mean and normal-approximation 95% half-width (nan for n < 2).

    Uses exactly rounded sums, so the result does not depend on value order.
    """
    v = [float(x) for x in values]
    n = len(v)
    mean = math.fsum(v) / n
    if n < 2:
        return mean, float("nan")
    var = math.fsum((x - mean) ** 2 for x in v) / (n - 1)
    return mean, 1.96 * math.sqrt(var / n)


def _trial_job(args):
    cfg, master_seed, idx = args
    return run_trial(cfg, trial_seed(master_seed, idx), idx)


def run_trials(cfg: NetworkConfig, trials: int, master_seed: int | None = None,
               threads: int = 1) -> list[TrialResult]:
    master_seed = cfg.seed if master_seed is None else master_seed
    jobs = [(cfg, master_seed, i) for i in range(trials)]
    if threads > 1 and trials > 1:
        with ProcessPoolExecutor(max_workers=threads) as pool:
            return list(pool.map(_trial_job, jobs, chunksize=max(1, trials // (4 * threads))))
    return [_trial_job(j) for j in jobs]


def summarize(results: list[TrialResult]) -> tuple[dict[str, float], dict[str, float]]:
    means, cis = {}, {}
    for s in SCHEMES:
        means[s], cis[s] = mean_ci(r.sum_rate[s] for r in results)
    return means, cis


def run_sweep(cfg: NetworkConfig, axis: str, values, trials: int,
              master_seed: int | None = None, threads: int = 1) -> SweepResult:
    """Sweep one config field; trial i uses the same seed at every value."""
    if axis not in AXES:
        raise ValueError(f"axis must be one of {AXES}, got {axis!r}")
    values = list(values)
    if values != sorted(values):
        raise ValueError("sweep values must be sorted ascending")
    mean = {s: np.empty(len(values)) for s in SCHEMES}
    ci = {s: np.empty(len(values)) for s in SCHEMES}
    all_results = []
    for i, v in enumerate(values):
        v = int(v) if axis in ("U", "N") else float(v)
        res = run_trials(cfg.replace(**{axis: v}), trials, master_seed, threads)
        m, c = summarize(res)
        for s in SCHEMES:
            mean[s][i], ci[s][i] = m[s], c[s]
        all_results.append(res)
    return SweepResult(axis, values, trials, mean, ci, all_results)
