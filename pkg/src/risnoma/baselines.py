"""RIS-free benchmark schemes: single-level GF-NOMA, multi-level GF-NOMA and
grant-based PD-NOMA with optimal per-cluster power control.

All three use the same round-robin clustering over the direct-link gains and
read only the direct channels f.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np

from .channel import ChannelSet
from .config import NetworkConfig, dbm_to_watt
from .phy import rate, sic_sinr

MAX_OPT_CLUSTER = 6


@dataclass
class SchemeRate:
    sum_rate: float          # bit/s
    qos_violations: int
    powers: np.ndarray       # (U,) transmit power, W
    infeasible_clusters: int = 0


def gain_order(gains: np.ndarray) -> np.ndarray:
    """Indices by descending gain, ties by ascending index."""
    gains = np.asarray(gains, dtype=float)
    return np.lexsort((np.arange(len(gains)), -gains))


def benchmark_clusters(ch_or_gains, R: int, K: int) -> list[list[int]]:
    """Deal UEs sorted by |f|^2 round-robin over R clusters."""
    gains = (np.abs(ch_or_gains.f) ** 2 if isinstance(ch_or_gains, ChannelSet)
             else np.asarray(ch_or_gains, dtype=float))
    U = len(gains)
    if U > R * K:
        raise ValueError(f"U={U} exceeds capacity R*K={R * K}")
    clusters = [[] for _ in range(R)]
    for i, u in enumerate(gain_order(gains)):
        clusters[i % R].append(int(u))
    return clusters


def _scheme_rate(clusters, gains, powers, cfg) -> SchemeRate:
    sigma2 = cfg.noise_w
    total = 0.0
    violations = 0
    for members in clusters:
        if not members:
            continue
        gam = sic_sinr(powers[members] * gains[members], sigma2)
        total += float(np.sum(rate(gam, cfg.W)))
        violations += int(np.count_nonzero(gam < cfg.sinr_threshold))
    return SchemeRate(total, violations, powers)


def sgf_noma_rate(clusters, ch: ChannelSet, cfg: NetworkConfig) -> SchemeRate:
    """Every UE transmits at p_id."""
    gains = np.abs(ch.f) ** 2
    return _scheme_rate(clusters, gains, np.full(ch.U, cfg.p_id_w), cfg)


def mgf_levels_dbm(R: int, p_min: float, p_max: float) -> np.ndarray:
    """R power levels evenly spaced in dBm, ascending; a single level is P_max."""
    if R == 1:
        return np.array([p_max])
    return p_min + np.arange(R) * (p_max - p_min) / (R - 1)


def mgf_powers(ch: ChannelSet, cfg: NetworkConfig) -> np.ndarray:
    """Contiguous gain groups; the strongest group gets P_max, the weakest P_min."""
    gains = np.abs(ch.f) ** 2
    order = gain_order(gains)                      # strongest first
    groups = np.array_split(order, cfg.R)
    levels = mgf_levels_dbm(cfg.R, cfg.P_min, cfg.P_max)[::-1]
    powers = np.empty(ch.U)
    for lvl, grp in zip(levels, groups):
        powers[grp] = dbm_to_watt(lvl)
    return powers


def mgf_noma_rate(ch: ChannelSet, cfg: NetworkConfig, clusters=None) -> SchemeRate:
    if clusters is None:
        clusters = benchmark_clusters(ch, cfg.R, cfg.K)
    return _scheme_rate(clusters, np.abs(ch.f) ** 2, mgf_powers(ch, cfg), cfg)


# ------------------------------------------------------------ OPT PD-NOMA


def _repair(order, upper, lower, theta, sigma2):
    """Largest received powers for a fixed decoding order meeting every SINR floor.

    Start from the upper bounds (capped so the order stays descending) and, for
    each violated floor, cut the interference below it starting from the
    last-decoded UE: a cut there relaxes every earlier floor at the same cost
    in total power. Returns None if infeasible.
    """
    n = len(order)
    x = np.array([upper[u] for u in order], dtype=float)
    lo = np.array([lower[u] for u in order], dtype=float)
    for i in range(1, n):
        x[i] = min(x[i], x[i - 1])
    if np.any(x < lo * (1 - 1e-12)):
        return None
    for i in range(n):
        need = x[i + 1:].sum() - (x[i] / theta - sigma2) if theta > 0 else -1.0
        j = n - 1
        while need > 0 and j > i:
            floor = max(lo[j], theta * (x[j + 1:].sum() + sigma2),
                        x[j + 1] if j + 1 < n else 0.0)
            cut = min(need, x[j] - floor)
            if cut > 0:
                x[j] -= cut
                need -= cut
            j -= 1
        if need > 1e-12 * max(x[i], sigma2):
            return None
    gam = x / (np.concatenate([np.cumsum(x[::-1])[::-1][1:], [0.0]]) + sigma2)
    if np.any(gam < theta * (1 - 1e-9)):
        return None
    return x


def opt_cluster_powers(gains, cfg: NetworkConfig):
    """Transmit powers (W) maximizing the cluster sum rate under SINR floors.

    The sum rate W log2(1 + sum_u p_u g_u / sigma^2) grows with every power, so
    all-P_max is optimal when it meets the floors. Otherwise each decoding
    order is repaired by projected descent and the best feasible one kept.
    Returns (powers, feasible); infeasible clusters fall back to all-P_max.
    """
    gains = np.asarray(gains, dtype=float)
    n = len(gains)
    if n > MAX_OPT_CLUSTER:
        raise ValueError(f"cluster size {n} > {MAX_OPT_CLUSTER} is not supported")
    pmax, pmin = dbm_to_watt(cfg.P_max), dbm_to_watt(cfg.P_min)
    sigma2, theta = cfg.noise_w, cfg.sinr_threshold
    upper = pmax * gains
    lower = pmin * gains
    natural = list(gain_order(gains))
    all_max = np.full(n, pmax)
    gam = sic_sinr(upper, sigma2)
    if np.all(gam >= theta):
        return all_max, True
    best, best_x = None, -np.inf
    for order in itertools.permutations(natural):
        x = _repair(list(order), upper, lower, theta, sigma2)
        if x is not None and x.sum() > best_x:
            best_x = x.sum()
            best = np.empty(n)
            best[list(order)] = x / gains[list(order)]
    if best is None:
        return all_max, False
    return np.clip(best, pmin, pmax), True


def opt_pdnoma_rate(clusters, ch: ChannelSet, cfg: NetworkConfig) -> SchemeRate:
    gains = np.abs(ch.f) ** 2
    powers = np.empty(ch.U)
    infeasible = 0
    for members in clusters:
        if not members:
            continue
        p, ok = opt_cluster_powers(gains[members], cfg)
        powers[members] = p
        infeasible += not ok
    out = _scheme_rate(clusters, gains, powers, cfg)
    out.infeasible_clusters = infeasible
    return out


def grid_refine_powers(gains, cfg: NetworkConfig, points: int = 50, levels: int = 3):
    """Nested-grid search over per-UE powers in dBm (clusters of <= 3 UEs).

    Each level scans ``points`` values per axis and zooms to +-1 step around
    the best feasible point. Returns (powers, sum_rate) or (None, nan).
    """
    gains = np.asarray(gains, dtype=float)
    n = len(gains)
    if n > 3:
        raise ValueError("grid refinement is limited to 3 UEs")
    sigma2, theta = cfg.noise_w, cfg.sinr_threshold
    lo = np.full(n, cfg.P_min)
    hi = np.full(n, cfg.P_max)
    best_p, best_r = None, -np.inf
    for _ in range(levels):
        axes = [np.linspace(lo[i], hi[i], points) for i in range(n)]
        grid = np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1).reshape(-1, n)
        rx = dbm_to_watt(grid) * gains
        gam = sic_sinr(rx, sigma2)
        feasible = np.all(gam >= theta, axis=-1)
        if not feasible.any():
            break
        r = np.sum(rate(gam, cfg.W), axis=-1)
        r = np.where(feasible, r, -np.inf)
        k = int(np.argmax(r))
        if r[k] > best_r:
            best_r, best_p = r[k], grid[k]
        step = (hi - lo) / (points - 1)
        lo = np.maximum(best_p - step, cfg.P_min)
        hi = np.minimum(best_p + step, cfg.P_max)
    if best_p is None:
        return None, float("nan")
    return dbm_to_watt(best_p), float(best_r)
