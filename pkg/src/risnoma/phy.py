"""RIS phase alignment, received power, SIC ordering, SINR and rates.

Scalar functions mirror the per-user formulas one to one; the ``*_tensor`` and
``sic_*`` helpers evaluate the same quantities vectorized for the scheduler.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping, Sequence

import numpy as np

from .channel import ChannelSet


@dataclass(frozen=True)
class PhaseVector:
    phases: np.ndarray       # (N,) unit-modulus
    n_degenerate: int = 0    # elements whose phase was undefined (zero coefficient)


def _unit(z):
    z = np.asarray(z, dtype=complex)
    mag = np.abs(z)
    safe = np.where(mag > 0, mag, 1.0)
    return np.where(mag > 0, z / safe, 1.0), mag == 0


def align_phases(f_m: complex, g_b: np.ndarray, h_mb: np.ndarray) -> PhaseVector:
    """Co-phase the cascade g_b -> h_mb with the direct link f_m.

    phi_n = exp(j arg f_m) exp(-j arg g_n) exp(-j arg h_n); a zero coefficient
    contributes phase 0 and is counted in ``n_degenerate``.
    """
    g_b = np.asarray(g_b, dtype=complex)
    h_mb = np.asarray(h_mb, dtype=complex)
    if g_b.shape != h_mb.shape:
        raise ValueError("g_b and h_mb must have equal length")
    uf, _ = _unit(f_m)
    ug, zg = _unit(g_b)
    uh, zh = _unit(h_mb)
    phases = uf * np.conj(ug) * np.conj(uh)
    return PhaseVector(phases=phases, n_degenerate=int(np.count_nonzero(zg | zh)))


def cascade(g_b: np.ndarray, phase: PhaseVector, h_ub: np.ndarray) -> complex:
    """g_b^T diag(phi) h_ub."""
    return complex(np.sum(g_b * phase.phases * h_ub))


def received_power(u: int, b: int | None, phase: PhaseVector | None, ch: ChannelSet,
                   p: float, coherent: bool = False) -> float:
    """Power of UE u at the BS with block b (or no block) in the chain.

    Default combining adds |cascade|^2 and |f_u|^2 as separate powers.
    """
    f = ch.f[u]
    if b is None or phase is None:
        return float(p * abs(f) ** 2)
    c = cascade(ch.g[b], phase, ch.h[u, b])
    if coherent:
        return float(p * abs(c + f) ** 2)
    return float(p * (abs(c) ** 2 + abs(f) ** 2))


def sic_order(cluster: Sequence[int], powers: Mapping[int, float] | Sequence[float]) -> list[int]:
    """Decoding order: strongest first, ties by ascending UE index."""
    return sorted(cluster, key=lambda u: (-powers[u], u))


def _sinr_from_powers(order: list[int], powers, sigma2: float) -> dict[int, float]:
    out = {}
    for i, u in enumerate(order):
        interference = 0.0
        for z in order[i + 1:]:
            interference += powers[z]
        out[u] = powers[u] / (interference + sigma2)
    return out


def sinr_simplified(u: int, cluster: Sequence[int], b: int | None, phase: PhaseVector | None,
                    ch: ChannelSet, p: float, sigma2: float, coherent: bool = False) -> float:
    """SINR of u when only the cluster's own block b reflects."""
    if not cluster:
        raise ValueError("empty cluster")
    powers = {z: received_power(z, b, phase, ch, p, coherent) for z in cluster}
    return _sinr_from_powers(sic_order(cluster, powers), powers, sigma2)[u]


def full_received_powers(cluster: Sequence[int], configured: Mapping[int, PhaseVector],
                         ch: ChannelSet, p: float, coherent: bool = False) -> dict[int, float]:
    """Received power of every member with reflections from all configured blocks."""
    out = {}
    for z in cluster:
        terms = [cascade(ch.g[b], ph, ch.h[z, b]) for b, ph in configured.items()]
        if coherent:
            out[z] = float(p * abs(sum(terms) + ch.f[z]) ** 2)
        else:
            out[z] = float(p * (sum(abs(t) ** 2 for t in terms) + abs(ch.f[z]) ** 2))
    return out


def sinr_full(u: int, cluster: Sequence[int], configured: Mapping[int, PhaseVector],
              ch: ChannelSet, p: float, sigma2: float, coherent: bool = False) -> float:
    """SINR of u with every configured block (any cluster's) reflecting.

    ``configured`` maps block index -> phase vector for all blocks with a
    nonzero assignment entry.
    """
    if not cluster:
        raise ValueError("empty cluster")
    powers = full_received_powers(cluster, configured, ch, p, coherent)
    return _sinr_from_powers(sic_order(cluster, powers), powers, sigma2)[u]


def rate(sinr, W: float):
    return W * np.log2(1.0 + np.asarray(sinr))


def cluster_sum_rate(cluster: Sequence[int], b: int | None, aligned_ue: int | None,
                     ch: ChannelSet, p: float, sigma2: float, W: float,
                     coherent: bool = False) -> float:
    """Sum rate of a cluster with block b aligned to ``aligned_ue``."""
    if b is None or aligned_ue is None:
        phase = None
        b = None
    else:
        if aligned_ue not in cluster:
            raise ValueError("aligned_ue must be a cluster member")
        phase = align_phases(ch.f[aligned_ue], ch.g[b], ch.h[aligned_ue, b])
    powers = {z: received_power(z, b, phase, ch, p, coherent) for z in cluster}
    gam = _sinr_from_powers(sic_order(cluster, powers), powers, sigma2)
    return float(sum(rate(gam[z], W) for z in cluster))


def best_alignment(cluster: Sequence[int], b: int, ch: ChannelSet, p: float, sigma2: float,
                   W: float, coherent: bool = False) -> tuple[float, int]:
    """(max rate, target) over all alignment targets; ties keep the first member."""
    best = (-np.inf, -1)
    for j in cluster:
        r = cluster_sum_rate(cluster, b, j, ch, p, sigma2, W, coherent)
        if r > best[0]:
            best = (r, j)
    return best


# ---------------------------------------------------------------- vectorized


def alignment_tensor(ch: ChannelSet) -> tuple[np.ndarray, int]:
    """Phases phi[m, b, n] aligning every block b to every UE m, and the count
    of degenerate (zero-coefficient) elements."""
    uf, zf = _unit(ch.f)
    ug, zg = _unit(ch.g)
    uh, zh = _unit(ch.h)
    phi = uf[:, None, None] * np.conj(ug)[None] * np.conj(uh)
    return phi, int(np.count_nonzero(zg[None] | zh))


def cascade_tensor(ch: ChannelSet) -> np.ndarray:
    """Z[m, u, b] = g_b^T diag(phi[m, b]) h_u^b for every target m and user u."""
    phi, _ = alignment_tensor(ch)
    lhs = np.transpose(phi * ch.g[None], (1, 0, 2))       # (B, U_m, N)
    rhs = np.transpose(ch.h, (1, 2, 0))                   # (B, N, U_u)
    return np.transpose(lhs @ rhs, (1, 2, 0))             # (U_m, U_u, B)


def power_tensor(Z: np.ndarray, f: np.ndarray, p: float, coherent: bool = False) -> np.ndarray:
    """P[m, u, b]: received power of u when block b is aligned to m."""
    if coherent:
        return p * np.abs(Z + f[None, :, None]) ** 2
    return p * (np.abs(Z) ** 2 + (np.abs(f) ** 2)[None, :, None])


def sic_sinr(powers: np.ndarray, sigma2: float) -> np.ndarray:
    """SINR along the last axis under descending-power SIC (stable ties).

    Zero-power entries act as absent members: they decode last with SINR 0
    and add no interference.
    """
    powers = np.asarray(powers, dtype=float)
    order = np.argsort(-powers, axis=-1, kind="stable")
    srt = np.take_along_axis(powers, order, axis=-1)
    # interference seen by position i = sum of positions > i, exact 0 for the last
    tail = np.cumsum(srt[..., ::-1], axis=-1)[..., ::-1]
    interference = np.concatenate([tail[..., 1:], np.zeros_like(tail[..., :1])], axis=-1)
    gam_sorted = srt / (interference + sigma2)
    gam = np.empty_like(gam_sorted)
    np.put_along_axis(gam, order, gam_sorted, axis=-1)
    return gam


def sic_sum_rate(powers: np.ndarray, sigma2: float, W: float) -> np.ndarray:
    return np.sum(rate(sic_sinr(powers, sigma2), W), axis=-1)
