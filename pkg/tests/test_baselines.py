import math

import numpy as np
import pytest

from risnoma import baselines as bl
from risnoma.config import NetworkConfig, dbm_to_watt

from conftest import make_channels


def test_round_robin_clusters():
    assert bl.benchmark_clusters(np.array([8.0, 6.0, 4.0, 2.0]), 2, 2) == [[0, 2], [1, 3]]
    assert bl.benchmark_clusters(np.array([1.0, 3.0, 2.0]), 3, 1) == [[1], [2], [0]]
    with pytest.raises(ValueError):
        bl.benchmark_clusters(np.ones(5), 2, 2)


def test_sgf_examples():
    cfg = NetworkConfig(U=25, p_id=0.0)          # p = 1 mW
    s2 = cfg.noise_w
    f = math.sqrt(3 * s2 / cfg.p_id_w)
    ch = make_channels([f])
    assert bl.sgf_noma_rate([[0]], ch, cfg).sum_rate == pytest.approx(2 * cfg.W)
    ch = make_channels([f, f / 2])
    P = cfg.p_id_w * np.abs(ch.f) ** 2
    assert bl.sgf_noma_rate([[0, 1]], ch, cfg).sum_rate == pytest.approx(
        cfg.W * math.log2(1 + P.sum() / s2))


def test_mgf_levels():
    np.testing.assert_allclose(bl.mgf_levels_dbm(2, -40, 23), [-40, 23])
    lv = bl.mgf_levels_dbm(25, -40, 23)
    assert len(lv) == 25
    np.testing.assert_allclose(np.diff(lv), 63 / 24)
    np.testing.assert_array_equal(bl.mgf_levels_dbm(1, -40, 23), [23])


def test_mgf_power_monotone_in_gain():
    rng = np.random.default_rng(0)
    cfg = NetworkConfig(U=75, R=25)
    ch = make_channels(rng.standard_normal(75) * 1e-5)
    p = bl.mgf_powers(ch, cfg)
    order = bl.gain_order(np.abs(ch.f) ** 2)
    assert np.all(np.diff(p[order]) <= 0)
    assert p[order[0]] == pytest.approx(dbm_to_watt(23.0))
    assert p[order[-1]] == pytest.approx(dbm_to_watt(-40.0))


def test_mgf_equal_gains_finite():
    cfg = NetworkConfig(U=50, R=25)
    ch = make_channels(np.full(50, 1e-5))
    assert np.isfinite(bl.mgf_noma_rate(ch, cfg).sum_rate)


def test_opt_single_and_slack():
    cfg = NetworkConfig()
    p, ok = bl.opt_cluster_powers([1e-9], cfg)
    assert ok and p[0] == pytest.approx(dbm_to_watt(23.0))
    p, ok = bl.opt_cluster_powers([1e-9, 3e-10], cfg)
    assert ok and np.allclose(p, dbm_to_watt(23.0))


def _random_tight_pair(rng, cfg):
    # strong UE far above the weak one; weak one close to its floor at P_max
    weak = cfg.sinr_threshold * cfg.noise_w / dbm_to_watt(cfg.P_max) * rng.uniform(1.05, 30)
    strong = weak * 10 ** rng.uniform(0, 3)
    return np.array([strong, weak])


def test_opt_matches_grid_oracle():
    cfg = NetworkConfig(q_u=4e5)
    rng = np.random.default_rng(1)
    for _ in range(50):
        gains = _random_tight_pair(rng, cfg)
        p, ok = bl.opt_cluster_powers(gains, cfg)
        assert ok
        gam = bl.sic_sinr(p * gains, cfg.noise_w)
        assert np.all(gam >= cfg.sinr_threshold * (1 - 1e-9))
        mine = float(np.sum(bl.rate(gam, cfg.W)))
        _, grid = bl.grid_refine_powers(gains, cfg)
        assert mine >= grid * (1 - 0.005)


def test_opt_infeasible_falls_back():
    cfg = NetworkConfig(q_u=1e6)
    p, ok = bl.opt_cluster_powers([1e-16, 1e-16, 1e-16], cfg)
    assert not ok and np.allclose(p, dbm_to_watt(23.0))
    with pytest.raises(ValueError):
        bl.opt_cluster_powers(np.ones(7), cfg)


def test_opt_dominates_sgf_when_slack():
    cfg = NetworkConfig(U=50, R=25)
    rng = np.random.default_rng(2)
    ch = make_channels(rng.standard_normal(50) * 1e-4)
    cl = bl.benchmark_clusters(ch, 25, 2)
    sgf = bl.sgf_noma_rate(cl, ch, cfg)
    assert sgf.qos_violations == 0
    assert bl.opt_pdnoma_rate(cl, ch, cfg).sum_rate >= sgf.sum_rate


def test_baselines_ignore_ris():
    rng = np.random.default_rng(3)
    cfg = NetworkConfig(U=50, R=25)
    f = rng.standard_normal(50) * 1e-5
    a = make_channels(f, g=rng.standard_normal((2, 3)), h=rng.standard_normal((50, 2, 3)))
    b = make_channels(f, g=rng.standard_normal((2, 3)), h=rng.standard_normal((50, 2, 3)))
    cl = bl.benchmark_clusters(a, 25, 2)
    assert bl.benchmark_clusters(b, 25, 2) == cl
    for fn in (lambda ch: bl.sgf_noma_rate(cl, ch, cfg), lambda ch: bl.mgf_noma_rate(ch, cfg, cl),
               lambda ch: bl.opt_pdnoma_rate(cl, ch, cfg)):
        assert fn(a).sum_rate == fn(b).sum_rate
