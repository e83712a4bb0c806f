"""Joint UE clustering and RIS block assignment/alignment.

Clusters are seeded with the R strongest UEs (direct-link SRS power), then
each round temporarily admits every awaiting UE to every cluster with every
block, keeps the best alignment target per entry, and commits one
3D assignment of (cluster, UE, block) triples.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np

from . import assignment as aa
from .channel import ChannelSet
from .config import ConfigError, NetworkConfig
from .phy import cascade_tensor, power_tensor, rate, sic_sinr

log = logging.getLogger(__name__)


@dataclass
class ClusterState:
    chi: np.ndarray                 # (U, R) bool, clustering matrix
    delta: np.ndarray               # (R, B, U) bool, RIS assignment tensor
    clusters: list[list[int]]       # members of every cluster, admission order
    aligned_ue: np.ndarray          # (B,) target UE of each block, -1 if unused
    trace: list[str] = field(default_factory=list)
    aa_stats: list[tuple[float, float | None]] = field(default_factory=list)

    @property
    def block_of_cluster(self) -> np.ndarray:
        """(R,) block assigned to each cluster, -1 when none."""
        out = np.full(self.delta.shape[0], -1)
        r, b, _ = np.nonzero(self.delta)
        out[r] = b
        return out

    def assignments(self) -> list[tuple[int, int, int]]:
        """(cluster, block, aligned UE) for every nonzero delta entry."""
        return [tuple(int(x) for x in t) for t in zip(*np.nonzero(self.delta))]

    def copy(self) -> "ClusterState":
        return ClusterState(self.chi.copy(), self.delta.copy(),
                            [list(c) for c in self.clusters], self.aligned_ue.copy(),
                            list(self.trace), list(self.aa_stats))


@dataclass
class QosReport:
    threshold: float
    sinr: np.ndarray        # (U,)
    satisfied: np.ndarray   # (U,) bool

    @property
    def violations(self) -> int:
        return int(np.count_nonzero(~self.satisfied))


def state_from_clusters(clusters, U: int, B: int, assigned=()) -> ClusterState:
    """Build a ClusterState from member lists and (cluster, block, target) triples."""
    R = len(clusters)
    chi = np.zeros((U, R), bool)
    for r, members in enumerate(clusters):
        chi[list(members), r] = True
    delta = np.zeros((R, B, U), bool)
    aligned = np.full(B, -1)
    for r, b, m in assigned:
        delta[r, b, m] = True
        aligned[b] = m
    return ClusterState(chi, delta, [list(c) for c in clusters], aligned)


def rss_order(ch: ChannelSet, p: float) -> np.ndarray:
    """UE indices by descending SRS power p|f_u|^2, ties by ascending index."""
    rss = p * np.abs(ch.f) ** 2
    return np.lexsort((np.arange(len(rss)), -rss))


def initialize_clusters(ch: ChannelSet, cfg: NetworkConfig) -> ClusterState:
    if ch.U < cfg.R:
        raise ConfigError(f"U={ch.U}: need at least R={cfg.R} UEs to seed the clusters")
    order = rss_order(ch, cfg.p_id_w)
    clusters = [[int(order[r])] for r in range(cfg.R)]
    return state_from_clusters(clusters, ch.U, ch.B)


class _Evaluator:
    """Cluster rates under the single-block SINR for arbitrary member sets."""

    def __init__(self, ch: ChannelSet, cfg: NetworkConfig, Z=None):
        self.cfg = cfg
        self.sigma2 = cfg.noise_w
        self.Z = cascade_tensor(ch) if Z is None else Z
        self.P = power_tensor(self.Z, ch.f, cfg.p_id_w, cfg.coherent_combining)  # (m, u, b)
        self.P0 = cfg.p_id_w * np.abs(ch.f) ** 2                                  # no RIS

    def rates(self, members: np.ndarray):
        """Rates for member sets ``members`` (..., T) with -1 padding.

        Returns (rate[..., B], target[..., B]): best alignment over members.
        """
        valid = members >= 0
        idx = np.where(valid, members, 0)
        # powers[..., j, t, b]: member t when the block is aligned to member j
        pw = self.P[idx[..., :, None], idx[..., None, :], :]
        pw = np.where(valid[..., None, :, None], pw, 0.0)
        pw = np.moveaxis(pw, -1, -2)                       # (..., j, b, t)
        r = np.sum(rate(sic_sinr(pw, self.sigma2), self.cfg.W), axis=-1)  # (..., j, b)
        r = np.where(valid[..., :, None], r, -np.inf)
        j = np.argmax(r, axis=-2)                          # first max -> lowest position
        best = np.take_along_axis(r, j[..., None, :], axis=-2)[..., 0, :]
        return best, np.take_along_axis(idx, j, axis=-1)

    def bare_rate(self, members: np.ndarray):
        valid = members >= 0
        pw = np.where(valid, self.P0[np.where(valid, members, 0)], 0.0)
        return np.sum(rate(sic_sinr(pw, self.sigma2), self.cfg.W), axis=-1)


def _member_array(clusters, rows=None):
    rows = range(len(clusters)) if rows is None else rows
    width = max((len(clusters[r]) for r in rows), default=0)
    out = np.full((len(rows), width), -1)
    for i, r in enumerate(rows):
        out[i, :len(clusters[r])] = clusters[r]
    return out


def build_cost_matrix(state: ClusterState, awaiting, ch: ChannelSet, cfg: NetworkConfig,
                      evaluator: _Evaluator | None = None) -> aa.CostTensor:
    """Cost q[r, a, b]: best rate of cluster r plus awaiting UE a with block b.

    The alignment target achieving it is stored in ``iota``.
    """
    ev = evaluator or _Evaluator(ch, cfg)
    awaiting = np.asarray(awaiting, dtype=int)
    R, A = len(state.clusters), len(awaiting)
    mem = _member_array(state.clusters)                      # (R, s)
    temp = np.concatenate([np.broadcast_to(mem[:, None, :], (R, A, mem.shape[1])),
                           np.broadcast_to(awaiting[None, :, None], (R, A, 1))], axis=-1)
    q, iota = ev.rates(temp)                                 # (R, A, B)
    return aa.CostTensor(q, iota)


def _stay_rates(state, ev):
    """Best rate and target of every cluster with each block, no admission."""
    return ev.rates(_member_array(state.clusters))          # (R, B)


def _assemble(state, cost, stay, awaiting, cfg, ev):
    """Square tensor with dummy rows/columns and capacity masks."""
    R, A, B = cost.q.shape
    V = max(R, A, B)
    Q = aa.pad_tensor(cost.q)
    Q = Q.copy() if Q is cost.q else Q
    iota = np.full((V, V, V), -1)
    iota[:R, :A, :B] = cost.iota
    stay_q, stay_t = stay
    sizes = np.array([len(c) for c in state.clusters])
    open_ = sizes < cfg.K
    n_open = int(open_.sum())
    penalty = -(V + 1.0) * max(float(np.abs(cost.q).max(initial=0.0)),
                               float(np.abs(stay_q).max(initial=0.0)), 1.0)
    # dummy block for a real (cluster, UE) pair: no RIS
    if V > B and A:
        mem = _member_array(state.clusters)
        temp = np.concatenate([np.broadcast_to(mem[:, None, :], (R, A, mem.shape[1])),
                               awaiting[None, :, None].repeat(R, 0)], axis=-1)
        Q[:R, :A, B:] = ev.bare_rate(temp)[..., None]
    # dummy UE for a real cluster: keep members, possibly keep a block
    if V > A:
        keep = stay_q if B == V else np.concatenate(
            [stay_q, np.broadcast_to(ev.bare_rate(_member_array(state.clusters))[:, None],
                                     (R, V - B))], axis=1)
        Q[:R, A:, :] = keep[:, None, :]
        iota[:R, A:, :B] = stay_t[:, None, :]
        if A >= n_open:
            Q[np.flatnonzero(open_), A:, :] = penalty
    # full clusters cannot admit
    Q[np.flatnonzero(~open_), :A, :] = penalty
    # every awaiting UE must be admitted once capacity is no longer in excess
    if V > R and A <= n_open:
        Q[R:, :A, :] = penalty
    return Q, iota, penalty, A <= n_open


def _solve(Q, cfg):
    V = Q.shape[0]
    exact = None
    if cfg.aa_solver == "exact" or (cfg.aa_solver == "auto" and V <= 6):
        res = aa.solve_exact(Q)
        exact = res.value
    else:
        res = aa.solve_heuristic(Q, cfg.aa_iterations)
    return res, exact


def _admission_round(state: ClusterState, ch, cfg, ev, k) -> ClusterState:
    admitted = set(np.flatnonzero(state.chi.any(axis=1)))
    awaiting = np.array([u for u in rss_order(ch, cfg.p_id_w) if u not in admitted], dtype=int)
    cost = build_cost_matrix(state, awaiting, ch, cfg, ev)
    stay = _stay_rates(state, ev)
    Q, iota, penalty, admit_all = _assemble(state, cost, stay, awaiting, cfg, ev)
    res, exact = _solve(Q, cfg)
    R, A, B = cost.q.shape
    state.aa_stats.append((res.value, exact))

    new = state.copy()
    new.delta[:] = False
    new.aligned_ue[:] = -1
    for r, a, b in res.triples:
        r, a, b = (r if r < R else -1), (a if a < A else -1), (b if b < B else -1)
        if r < 0:
            if admit_all and a >= 0:
                raise AssertionError(f"UE {awaiting[a]} left unadmitted with free capacity")
            continue
        if Q[r, a if a >= 0 else A, b if b >= 0 else B] <= penalty / 2:
            raise AssertionError("assignment selected a masked entry")
        if a >= 0:
            u = int(awaiting[a])
            new.clusters[r].append(u)
            new.chi[u, r] = True
        if b >= 0:
            target = int(iota[r, a if a >= 0 else A, b])
            new.delta[r, b, target] = True
            new.aligned_ue[b] = target
        msg = (f"round {k}: cluster {r} <- UE {awaiting[a] if a >= 0 else '-'}, "
               f"block {b if b >= 0 else '-'} aligned to "
               f"{new.aligned_ue[b] if b >= 0 else '-'}")
        new.trace.append(msg)
        log.debug(msg)
    return new


def run_joint_clustering(ch: ChannelSet, cfg: NetworkConfig, Z=None):
    """Seed, then K-1 admission rounds; returns (ClusterState, QosReport).

    With K = 1 one assignment round still runs over the singleton clusters
    so the blocks get assigned.
    """
    state = initialize_clusters(ch, cfg)
    ev = _Evaluator(ch, cfg, Z)
    rounds = max(cfg.K - 1, 1)
    for k in range(1, rounds + 1):
        state = _admission_round(state, ch, cfg, ev, k)
    if not state.chi.any(axis=1).all():
        raise AssertionError("some UEs were never admitted")
    report = qos_report(state, ch, cfg, ev.Z)
    return state, report


# ------------------------------------------------------------- evaluation


def received_powers_full(state: ClusterState, ch: ChannelSet, cfg: NetworkConfig, Z=None):
    """(U,) received power of every UE with all configured blocks reflecting."""
    Z = cascade_tensor(ch) if Z is None else Z
    p = cfg.p_id_w
    r_idx, b_idx, m_idx = np.nonzero(state.delta)
    cas = Z[m_idx, :, b_idx]                                # (n_assigned, U)
    if cfg.coherent_combining:
        return p * np.abs(cas.sum(axis=0) + ch.f) ** 2
    return p * (np.sum(np.abs(cas) ** 2, axis=0) + np.abs(ch.f) ** 2)


def received_powers_own_block(state: ClusterState, ch, cfg, Z=None):
    """(U,) received power counting only the UE's own cluster block."""
    Z = cascade_tensor(ch) if Z is None else Z
    p = cfg.p_id_w
    out = p * np.abs(ch.f) ** 2
    for r, b, m in state.assignments():
        members = state.clusters[r]
        c = Z[m, members, b]
        if cfg.coherent_combining:
            out[members] = p * np.abs(c + ch.f[members]) ** 2
        else:
            out[members] = out[members] + p * np.abs(c) ** 2
    return out


def cluster_sinrs(state: ClusterState, powers: np.ndarray, sigma2: float) -> np.ndarray:
    """(U,) SIC SINR of every UE within its cluster for given received powers."""
    gam = np.zeros(len(powers))
    for members in state.clusters:
        if members:
            gam[members] = sic_sinr(powers[members], sigma2)
    return gam


def network_sum_rate(state: ClusterState, ch: ChannelSet, cfg: NetworkConfig,
                     full: bool = True, Z=None) -> float:
    """Network sum rate with all-block (full) or own-block (simplified) SINR."""
    pw = (received_powers_full if full else received_powers_own_block)(state, ch, cfg, Z)
    return float(np.sum(rate(cluster_sinrs(state, pw, cfg.noise_w), cfg.W)))


def qos_report(state: ClusterState, ch: ChannelSet, cfg: NetworkConfig, Z=None) -> QosReport:
    gam = cluster_sinrs(state, received_powers_full(state, ch, cfg, Z), cfg.noise_w)
    thr = cfg.sinr_threshold
    return QosReport(threshold=thr, sinr=gam, satisfied=gam >= thr)


def check_constraints(state: ClusterState, cfg: NetworkConfig, ch: ChannelSet | None = None,
                      Z=None) -> dict[str, bool | None]:
    """Pass flags for C1..C7 plus ``consistent`` (member lists, alignment
    vector and one-cluster-per-block bookkeeping). C1 is None without channels."""
    chi, delta = state.chi, state.delta
    U, R = chi.shape
    K = -(-U // R)
    B = delta.shape[1]
    out = {}
    out["C1"] = None if ch is None else bool(qos_report(state, ch, cfg, Z).satisfied.all())
    out["C2"] = bool(np.all(chi.sum(axis=1) == 1))
    out["C3"] = bool(np.all(chi.sum(axis=0) <= K))
    out["C4"] = bool(np.all(delta <= chi.T[:, None, :]))
    out["C5"] = bool(np.all((delta & chi.T[:, None, :]).sum(axis=(1, 2)) <= 1))
    out["C6"] = bool(delta.sum() <= B)
    out["C7"] = bool(chi.dtype == bool and delta.dtype == bool)
    lists_ok = all(sorted(np.flatnonzero(chi[:, r])) == sorted(state.clusters[r])
                   for r in range(R))
    align_ok = all(state.aligned_ue[b] == m for _, b, m in state.assignments())
    out["consistent"] = lists_ok and align_ok and bool(np.all(delta.sum(axis=(0, 2)) <= 1))
    return out
