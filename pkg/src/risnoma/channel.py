"""UMa large-scale model and Rician/Rayleigh small-scale fading for every link.

Links: h (UE -> RIS block elements), g (RIS block elements -> BS) and
f (UE -> BS direct). Path loss and LoS probability follow the 3GPP TR 38.901
UMa tables; a link in LoS gets Rician factor ``cfg.K_los``, otherwise 0.
"""
from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .config import NetworkConfig
from .topology import Placement, horizontal_distance

SPEED_OF_LIGHT = 299_792_458.0


@dataclass(frozen=True)
class LinkStats:
    pathloss_linear: np.ndarray | float
    rician_k: np.ndarray | float
    is_los: np.ndarray | bool


@dataclass(frozen=True)
class ChannelSet:
    h: np.ndarray  # (U, B, N) complex
    g: np.ndarray  # (B, N) complex
    f: np.ndarray  # (U,) complex

    @property
    def U(self) -> int:
        return self.h.shape[0]

    @property
    def B(self) -> int:
        return self.h.shape[1]

    @property
    def N(self) -> int:
        return self.h.shape[2]


def _c_prime(h_ut):
    h_ut = np.asarray(h_ut, dtype=float)
    return np.where(h_ut <= 13.0, 0.0, (np.clip(h_ut - 13.0, 0.0, None) / 10.0) ** 1.5)


def los_probability(d2d, ue_height):
    """UMa LoS probability as a function of 2D distance and UT height."""
    d = np.asarray(d2d, dtype=float)
    if np.any(d < 0):
        raise ValueError("d2d must be non-negative")
    with np.errstate(divide="ignore", invalid="ignore"):
        base = 18.0 / d + np.exp(-d / 63.0) * (1.0 - 18.0 / d)
        corr = 1.0 + _c_prime(ue_height) * 1.25 * (d / 100.0) ** 3 * np.exp(-d / 150.0)
    p = np.where(d <= 18.0, 1.0, np.clip(base * corr, 0.0, 1.0))
    return p if p.ndim else float(p)


def breakpoint_distance(f_c, h_bs, h_ut, h_e=1.0):
    """d'_BP = 4 h'_BS h'_UT f_c / c with effective heights h' = h - h_E."""
    return 4.0 * max(h_bs - h_e, 0.0) * max(h_ut - h_e, 0.0) * f_c / SPEED_OF_LIGHT


def pathloss_db(d3d, d2d, f_c, is_los, h_bs, h_ut):
    """UMa path loss in dB (no shadow fading).

    ``h_bs``/``h_ut`` are the heights of the upper and lower link ends.
    """
    if not 0.5e9 <= f_c <= 100e9:
        raise ValueError(f"f_c={f_c} Hz outside the UMa validity range [0.5, 100] GHz")
    d3d = np.asarray(d3d, dtype=float)
    d2d = np.asarray(d2d, dtype=float)
    fghz = 20.0 * np.log10(f_c / 1e9)
    d_bp = breakpoint_distance(f_c, h_bs, h_ut)
    pl1 = 28.0 + 22.0 * np.log10(d3d) + fghz
    pl2 = (28.0 + 40.0 * np.log10(d3d) + fghz
           - 9.0 * np.log10(d_bp ** 2 + (h_bs - h_ut) ** 2))
    pl_los = np.where(d2d <= d_bp, pl1, pl2)
    pl_nlos = np.maximum(
        pl_los, 13.54 + 39.08 * np.log10(d3d) + fghz - 0.6 * (h_ut - 1.5))
    pl = np.where(is_los, pl_los, pl_nlos)
    return pl if pl.ndim else float(pl)


def complex_normal(rng: np.random.Generator, shape) -> np.ndarray:
    """Circularly-symmetric CN(0, 1) samples."""
    return (rng.standard_normal(shape) + 1j * rng.standard_normal(shape)) / np.sqrt(2.0)


def draw_link(stats: LinkStats, dim: int, rng: np.random.Generator, los_phasor=None):
    """Draw ``dim`` coefficients per link.

    Each entry is sqrt(1/lambda) (sqrt(K/(K+1)) c_los + sqrt(1/(K+1)) c_nlos);
    ``los_phasor`` must be unit-modulus and broadcastable to ``shape + (dim,)``
    (defaults to 1). Output shape is ``np.shape(stats.pathloss_linear) + (dim,)``.
    """
    if dim < 1:
        raise ValueError("dim must be >= 1")
    lam = np.asarray(stats.pathloss_linear, dtype=float)[..., None]
    k = np.asarray(stats.rician_k, dtype=float)[..., None]
    shape = lam.shape[:-1] + (dim,)
    nlos = complex_normal(rng, shape)
    los = np.ones(shape, complex) if los_phasor is None else np.broadcast_to(los_phasor, shape)
    return np.sqrt(1.0 / lam) * (np.sqrt(k / (k + 1.0)) * los + np.sqrt(1.0 / (k + 1.0)) * nlos)


def _link_stats(cfg, d3d, d2d, los_draw, h_bs, h_ut, force_los=False):
    p_los = los_probability(d2d, h_ut)
    is_los = np.ones_like(d2d, bool) if force_los else los_draw < p_los
    pl = pathloss_db(d3d, d2d, cfg.f_c, is_los, h_bs, h_ut)
    return LinkStats(10.0 ** (pl / 10.0), np.where(is_los, cfg.K_los, 0.0), is_los)


def _ula_phasor(distance, azimuth, element_index, wavelength):
    # half-wavelength spaced linear array along the y axis
    path = np.exp(-2j * np.pi * distance / wavelength)[..., None]
    return path * np.exp(-1j * np.pi * element_index * np.sin(azimuth)[..., None])


def generate_channels(placement: Placement, cfg: NetworkConfig,
                      rng: np.random.Generator) -> ChannelSet:
    """Draw one realization of h, g, f.

    Draw order is fixed (LoS states, then f, g, h fading) so that f and all LoS
    states do not depend on N for a given stream.
    """
    U, M, G, N = cfg.U, cfg.M, cfg.G, cfg.N
    B = M * G
    owner = placement.block_owner
    wavelength = SPEED_OF_LIGHT / cfg.f_c
    # element index of every block element along its physical RIS
    elem = (np.arange(B) % G)[:, None] * N + np.arange(N)[None, :]

    bs, ue, ris = placement.bs_pos, placement.ue_pos, placement.ris_pos
    d2_f = horizontal_distance(ue, bs)
    d3_f = np.linalg.norm(ue - bs, axis=-1)
    d2_g = horizontal_distance(ris, bs)
    d3_g = np.linalg.norm(ris - bs, axis=-1)
    d2_h = horizontal_distance(ue[:, None, :], ris[None, :, :])
    d3_h = np.linalg.norm(ue[:, None, :] - ris[None, :, :], axis=-1)
    # guard co-located UE/RIS columns; the RIS height offset keeps d3d > 0 anyway
    d3_h = np.maximum(d3_h, 1.0)

    u_f = rng.random(U)
    u_g = rng.random(M)
    u_h = rng.random((U, M))

    s_f = _link_stats(cfg, d3_f, d2_f, u_f, cfg.bs_height, cfg.ue_height)
    s_g = _link_stats(cfg, d3_g, d2_g, u_g, cfg.bs_height, cfg.ris_height,
                      force_los=cfg.force_ris_bs_los)
    h_hi, h_lo = max(cfg.ris_height, cfg.ue_height), min(cfg.ris_height, cfg.ue_height)
    s_h = _link_stats(cfg, d3_h, d2_h, u_h, h_hi, h_lo)

    f = draw_link(s_f, 1, rng, np.exp(-2j * np.pi * d3_f / wavelength)[:, None])[:, 0]

    az_g = np.arctan2(bs[1] - ris[:, 1], bs[0] - ris[:, 0])
    g_stats = LinkStats(s_g.pathloss_linear[owner], s_g.rician_k[owner], s_g.is_los[owner])
    g = draw_link(g_stats, N, rng,
                  _ula_phasor(d3_g[owner], az_g[owner], elem, wavelength))

    az_h = np.arctan2(ue[:, None, 1] - ris[None, :, 1], ue[:, None, 0] - ris[None, :, 0])
    h_stats = LinkStats(s_h.pathloss_linear[:, owner], s_h.rician_k[:, owner],
                        s_h.is_los[:, owner])
    h = draw_link(h_stats, N, rng,
                  _ula_phasor(d3_h[:, owner], az_h[:, owner], elem[None], wavelength))
    return ChannelSet(h=h, g=g, f=f)


def save_channels(ch: ChannelSet, path) -> None:
    """Dump a realization to an ``.npz`` archive with arrays ``h``, ``g``, ``f``."""
    np.savez_compressed(Path(path), h=ch.h, g=ch.g, f=ch.f)


def load_channels(path) -> ChannelSet:
    with np.load(Path(path)) as data:
        return ChannelSet(h=data["h"], g=data["g"], f=data["f"])
