"""Random cell geometry: BS at the origin, UEs in a disk, RISs in an annulus."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .config import ConfigError, NetworkConfig


@dataclass(frozen=True)
class Placement:
    bs_pos: np.ndarray       # (3,)
    ue_pos: np.ndarray       # (U, 3)
    ris_pos: np.ndarray      # (M, 3)
    block_owner: np.ndarray  # (B,) physical RIS of each block

    @property
    def block_pos(self) -> np.ndarray:
        """Position of every block; all G blocks of one RIS share its location."""
        return self.ris_pos[self.block_owner]


def derive_structure(cfg: NetworkConfig) -> tuple[int, int, int]:
    """Return (C, K, B): cluster count, maximum cluster size, RIS block count."""
    if cfg.U < cfg.R:
        raise ConfigError(f"U={cfg.U}: cluster initialization needs U >= R (R={cfg.R})")
    return cfg.R, -(-cfg.U // cfg.R), cfg.M * cfg.G


def _area_uniform(rng, n, r_in, r_out):
    # radius CDF of an area-uniform annulus is (r^2 - r_in^2) / (r_out^2 - r_in^2)
    u = rng.random(n)
    radius = np.sqrt(r_in ** 2 + u * (r_out ** 2 - r_in ** 2))
    angle = rng.uniform(0.0, 2.0 * np.pi, n)
    return radius * np.cos(angle), radius * np.sin(angle)


def generate_topology(cfg: NetworkConfig, rng: np.random.Generator) -> Placement:
    """Drop U UEs uniformly in the cell disk and M RISs uniformly in the annulus.

    UE draws are taken before RIS draws, so changing D_in/D_out with the same
    stream moves only the RISs.
    """
    _, _, B = derive_structure(cfg)
    ux, uy = _area_uniform(rng, cfg.U, 0.0, cfg.D)
    rx, ry = _area_uniform(rng, cfg.M, cfg.D_in, cfg.D_out)
    ue = np.column_stack([ux, uy, np.full(cfg.U, cfg.ue_height)])
    ris = np.column_stack([rx, ry, np.full(cfg.M, cfg.ris_height)])
    bs = np.array([0.0, 0.0, cfg.bs_height])
    owner = np.arange(B) // cfg.G
    return Placement(bs_pos=bs, ue_pos=ue, ris_pos=ris, block_owner=owner)


def horizontal_distance(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    return np.hypot(a[..., 0] - b[..., 0], a[..., 1] - b[..., 1])
