"""Acceptance gate: one test per criterion, each at its stated tolerance."""
import math
import time

import numpy as np
import pytest

from risnoma import assignment as aa, baselines as bl
from risnoma.channel import complex_normal
from risnoma.cli import emit_results, single_point
from risnoma.config import NetworkConfig, dbm_to_watt
from risnoma.montecarlo import mean_ci, run_trials, summarize
from risnoma.phy import align_phases, cascade, rate, sic_sinr

from conftest import record

TRIALS = 200
SEED = 20240601
DEFAULTS = NetworkConfig()


def _batch(cfg):
    t0 = time.perf_counter()
    res = run_trials(cfg, TRIALS, SEED)
    mean, ci = summarize(res)
    return {"results": res, "mean": mean, "ci": ci, "seconds": time.perf_counter() - t0}


@pytest.fixture(scope="module")
def defaults_run():
    return _batch(DEFAULTS)


@pytest.fixture(scope="module")
def n30_run():
    return _batch(DEFAULTS.replace(N=30))


def _disjoint_above(a, b):
    """Lower CI edge of a strictly above upper CI edge of b."""
    return a["mean"] - a["ci"] > b["mean"] + b["ci"]


def _point(run, scheme):
    return {"mean": run["mean"][scheme], "ci": run["ci"][scheme]}


def _paired(a, b, sa="proposed", sb="proposed"):
    """Mean and CI of the per-trial difference (diagnostic only)."""
    d = [x.sum_rate[sa] - y.sum_rate[sb] for x, y in zip(a["results"], b["results"])]
    m, c = mean_ci(d)
    return f"paired diff {m / 1e6:.3f}±{c / 1e6:.3f}"


def _fmt(run, scheme):
    return f"{run['mean'][scheme] / 1e6:.3f}±{run['ci'][scheme] / 1e6:.3f}"


def test_criterion_1_phase_alignment_identity():
    t0 = time.perf_counter()
    worst = 0.0
    for seed in range(1000):
        rng = np.random.default_rng(seed)
        for n in (1, 8, 256):
            g, h = complex_normal(rng, n), complex_normal(rng, n)
            f = complex_normal(rng, 1)[0]
            got = abs(cascade(g, align_phases(f, g, h), h))
            want = math.fsum(np.abs(g) * np.abs(h))
            worst = max(worst, abs(got - want) / want)
    elapsed = time.perf_counter() - t0
    ok = worst <= 1e-9 and elapsed < 5.0
    record(1, ok, f"max rel err {worst:.1e}, {elapsed:.2f} s")
    assert worst <= 1e-9
    assert elapsed < 5.0


def test_criterion_2_sic_telescoping():
    cfg = DEFAULTS
    worst = 0.0
    for seed in range(1000):
        rng = np.random.default_rng(seed)
        k = 1 + seed % 4
        # realistic direct gains: path loss 80-140 dB
        gains = 10 ** (-rng.uniform(8, 14, size=k)) * np.abs(complex_normal(rng, k)) ** 2
        pw = cfg.p_id_w * gains
        got = math.fsum(rate(sic_sinr(pw, cfg.noise_w), cfg.W))
        want = cfg.W * math.log2(1 + pw.sum() / cfg.noise_w)
        worst = max(worst, abs(got - want) / want)
    record(2, worst <= 1e-9, f"max rel err {worst:.1e}")
    assert worst <= 1e-9


def test_criterion_3_assignment_exactness_and_gap():
    t0 = time.perf_counter()
    rng = np.random.default_rng(SEED)
    mismatches = 0
    for _ in range(100):
        q = rng.uniform(size=(4, 4, 4))
        if aa.solve_exact(q).value != aa.solve_bruteforce(q).value:
            # sums over different triple orders may differ in the last ulp
            if not math.isclose(aa.solve_exact(q).value, aa.solve_bruteforce(q).value,
                                rel_tol=1e-14):
                mismatches += 1
    rep = aa.bench_solvers(1000, 5, seed=SEED)
    share = rep.share_within(0.95)
    elapsed = time.perf_counter() - t0
    ok = mismatches == 0 and share >= 0.95 and elapsed < 60.0
    record(3, ok, f"exact mismatches {mismatches}/100, heuristic >=95% on "
                  f"{100 * share:.1f}% of 1000, {elapsed:.1f} s")
    assert mismatches == 0
    assert share >= 0.95
    assert elapsed < 60.0


def test_criterion_4_constraints(defaults_run):
    res = defaults_run["results"]
    bad = [r.trial for r in res if not r.constraints_ok]
    c1 = sum(r.qos_violations["proposed"] for r in res)
    record(4, not bad, f"{len(res) - len(bad)}/{len(res)} trials pass C2-C7; "
                       f"C1 violations reported: {c1} UE-trials")
    assert len(res) == TRIALS
    assert not bad


def test_criterion_5_scheme_ordering():
    run = _batch(DEFAULTS.replace(N=64))
    p = _point(run, "proposed")
    vs_sgf = run["mean"]["proposed"] > run["mean"]["sgf"] and _disjoint_above(p, _point(run, "sgf"))
    vs_mgf = run["mean"]["proposed"] > run["mean"]["mgf"] and _disjoint_above(p, _point(run, "mgf"))
    fast = run["seconds"] < 600
    record(5, vs_sgf and vs_mgf and fast,
           f"N=64 proposed {_fmt(run, 'proposed')}, sgf {_fmt(run, 'sgf')}, "
           f"mgf {_fmt(run, 'mgf')} Mbit/s; vs sgf {_paired(run, run, sb='sgf')}; "
           f"{run['seconds']:.0f} s")
    assert vs_mgf, "proposed vs MGF: CIs overlap or wrong order"
    assert vs_sgf, "proposed vs SGF: CIs overlap or wrong order"
    assert fast


def test_criterion_6_n_monotonicity(defaults_run, n30_run):
    hi, lo = defaults_run, n30_run
    rises = _disjoint_above(_point(hi, "proposed"), _point(lo, "proposed"))
    flat = all(abs(hi["mean"][s] - lo["mean"][s]) < min(2 * hi["ci"][s], 2 * lo["ci"][s])
               for s in ("opt", "mgf", "sgf"))
    record(6, rises and flat,
           f"proposed N=30 {_fmt(lo, 'proposed')} -> N=256 {_fmt(hi, 'proposed')} Mbit/s; "
           f"{_paired(hi, lo)}; baselines flat: {flat}")
    assert flat
    assert rises, "proposed N=256 vs N=30: CIs overlap or wrong order"


def test_criterion_7_d_out_trend(defaults_run):
    far = _batch(DEFAULTS.replace(D_out=250.0))
    ok = _disjoint_above(_point(defaults_run, "proposed"), _point(far, "proposed"))
    record(7, ok, f"proposed D_out=50 {_fmt(defaults_run, 'proposed')} vs "
                  f"D_out=250 {_fmt(far, 'proposed')} Mbit/s; {_paired(defaults_run, far)}")
    assert ok, "proposed D_out=50 vs 250: CIs overlap or wrong order"


def test_criterion_8_opt_solver():
    # tight floors: q_u chosen so the weak UE is near its floor at P_max
    cfg = DEFAULTS.replace(q_u=4e5)
    rng = np.random.default_rng(SEED)
    pmax = dbm_to_watt(cfg.P_max)
    worst = 0.0
    for _ in range(100):
        weak = cfg.sinr_threshold * cfg.noise_w / pmax * rng.uniform(1.05, 30)
        gains = np.array([weak * 10 ** rng.uniform(0, 3), weak])
        p, ok = bl.opt_cluster_powers(gains, cfg)
        assert ok
        mine = float(np.sum(rate(sic_sinr(p * gains, cfg.noise_w), cfg.W)))
        _, grid = bl.grid_refine_powers(gains, cfg)
        worst = max(worst, abs(mine - grid) / grid)
    slack_ok = True
    for _ in range(100):
        gains = 10 ** (-rng.uniform(8, 11, size=2))
        if np.all(sic_sinr(pmax * gains, cfg.noise_w) >= cfg.sinr_threshold):
            p, ok = bl.opt_cluster_powers(gains, cfg)
            slack_ok &= ok and bool(np.all(p == pmax))
    record(8, worst <= 0.005 and slack_ok,
           f"max gap to grid oracle {100 * worst:.3f}%, all-P_max when slack: {slack_ok}")
    assert worst <= 0.005
    assert slack_ok


def test_criterion_9_end_to_end_determinism(tmp_path):
    cfg = DEFAULTS
    a = emit_results(single_point(cfg, 5, SEED), tmp_path / "a", cfg, SEED, "trial")
    b = emit_results(single_point(cfg, 5, SEED), tmp_path / "b", cfg, SEED, "trial")
    same = a["trials"].read_bytes() == b["trials"].read_bytes()
    record(9, same, "trials.csv byte-identical across reruns" if same else "trials.csv differs")
    assert same
