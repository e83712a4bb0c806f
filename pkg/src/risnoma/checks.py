"""Quick invariant suites behind the ``validate`` command."""
from __future__ import annotations

import time
from dataclasses import dataclass

import numpy as np

from . import assignment as aa
from .channel import complex_normal
from .config import NetworkConfig
from .montecarlo import run_trial, trial_seed
from .phy import align_phases, cascade, sic_sinr, rate


@dataclass
class SuiteResult:
    name: str
    passed: bool
    detail: str
    seconds: float = 0.0


def phase_coherence(seeds: int = 200, sizes=(1, 8, 256), rtol: float = 1e-9) -> SuiteResult:
    """Aligned cascade magnitude equals sum_n |g_n||h_n|."""
    worst = 0.0
    for s in range(seeds):
        rng = np.random.default_rng(s)
        for n in sizes:
            g, h = complex_normal(rng, n), complex_normal(rng, n)
            f = complex_normal(rng, 1)[0]
            got = abs(cascade(g, align_phases(f, g, h), h))
            want = float(np.sum(np.abs(g) * np.abs(h)))
            worst = max(worst, abs(got - want) / want)
    return SuiteResult("phase coherence", worst <= rtol, f"max rel err {worst:.2e}")


def sic_telescoping(seeds: int = 200, rtol: float = 1e-9) -> SuiteResult:
    worst = 0.0
    sigma2, W = 1e-13, 180e3
    for s in range(seeds):
        rng = np.random.default_rng(s)
        k = int(rng.integers(1, 5))
        pw = 10.0 ** rng.uniform(-15, -8, size=k)
        got = float(np.sum(rate(sic_sinr(pw, sigma2), W)))
        want = W * np.log2(1.0 + pw.sum() / sigma2)
        worst = max(worst, abs(got - want) / want)
    return SuiteResult("SIC telescoping", worst <= rtol, f"max rel err {worst:.2e}")


def assignment_oracle(instances: int = 30, dim: int = 4) -> SuiteResult:
    rng = np.random.default_rng(0)
    mismatches = 0
    for _ in range(instances):
        q = rng.uniform(size=(dim, dim, dim))
        if not np.isclose(aa.solve_exact(q).value, aa.solve_bruteforce(q).value,
                          rtol=0, atol=1e-12):
            mismatches += 1
    return SuiteResult("3D-AA oracle", mismatches == 0,
                       f"{mismatches}/{instances} exact-vs-brute-force mismatches")


def constraint_checks(cfg: NetworkConfig, trials: int = 3) -> SuiteResult:
    failed = [i for i in range(trials)
              if not run_trial(cfg, trial_seed(cfg.seed, i), i).constraints_ok]
    return SuiteResult("constraint checks", not failed,
                       f"{trials - len(failed)}/{trials} trials pass C2-C7")


def run_all(cfg: NetworkConfig) -> list[SuiteResult]:
    out = []
    for fn, args in ((phase_coherence, ()), (sic_telescoping, ()),
                     (assignment_oracle, ()), (constraint_checks, (cfg,))):
        t0 = time.perf_counter()
        res = fn(*args)
        res.seconds = time.perf_counter() - t0
        out.append(res)
    return out
