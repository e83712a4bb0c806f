"""Network configuration: defaults, validation and YAML (de)serialization."""
from __future__ import annotations

import dataclasses
import math
from dataclasses import dataclass, fields
from pathlib import Path

import yaml


class ConfigError(ValueError):
    """Raised when a configuration violates a field constraint."""


def dbm_to_watt(p_dbm):
    return 10.0 ** ((p_dbm - 30.0) / 10.0)


def watt_to_dbm(p_w):
    return 10.0 * math.log10(p_w) + 30.0


@dataclass(frozen=True)
class NetworkConfig:
    # counts
    U: int = 75
    R: int = 25
    M: int = 25
    G: int = 1
    N: int = 256
    # power / spectrum
    p_id: float = 21.0          # dBm
    W: float = 180e3            # Hz
    q_u: float = 1e5            # bit/s
    N0: float = -174.0          # dBm/Hz
    f_c: float = 5e9            # Hz
    P_max: float = 23.0         # dBm
    P_min: float = -40.0        # dBm
    # geometry, metres
    D: float = 250.0
    D_in: float = 15.0
    D_out: float = 50.0
    bs_height: float = 25.0
    ue_height: float = 1.5
    ris_height: float = 10.0
    # propagation
    K_los: float = 10.0 ** 0.9  # linear Rician factor of LoS links (9 dB)
    force_ris_bs_los: bool = False
    coherent_combining: bool = False
    # 3D assignment
    aa_solver: str = "auto"     # auto | heuristic | exact
    aa_iterations: int = 20
    seed: int = 0

    def __post_init__(self):
        self.validate()

    def validate(self):
        def bad(name, why):
            raise ConfigError(f"{name}={getattr(self, name)!r}: {why}")

        for name in ("U", "R", "M", "G", "N", "aa_iterations"):
            v = getattr(self, name)
            if isinstance(v, bool) or not isinstance(v, int):
                bad(name, "must be an integer")
            if v < 1:
                bad(name, "must be >= 1")
        if self.U < self.R:
            bad("U", f"must satisfy U >= R (R={self.R})")
        if self.M * self.G < self.R:
            bad("M", f"M*G={self.M * self.G} must be >= R={self.R}")
        if self.W <= 0:
            bad("W", "must be > 0")
        if self.q_u < 0:
            bad("q_u", "must be >= 0")
        if not 0.5e9 <= self.f_c <= 100e9:
            bad("f_c", "must lie in [0.5e9, 100e9] Hz")
        if self.D <= 0:
            bad("D", "must be > 0")
        if not 0 <= self.D_in <= self.D_out:
            bad("D_in", f"must satisfy 0 <= D_in <= D_out (D_out={self.D_out})")
        if self.D_out > self.D:
            bad("D_out", f"must satisfy D_out <= D (D={self.D})")
        if not self.P_min <= self.p_id <= self.P_max:
            bad("p_id", f"must satisfy P_min <= p_id <= P_max ([{self.P_min}, {self.P_max}])")
        if self.K_los < 0:
            bad("K_los", "must be >= 0")
        for name in ("bs_height", "ue_height", "ris_height"):
            if getattr(self, name) <= 0:
                bad(name, "must be > 0")
        if self.aa_solver not in ("auto", "heuristic", "exact"):
            bad("aa_solver", "must be one of auto, heuristic, exact")

    # derived quantities
    @property
    def B(self) -> int:
        return self.M * self.G

    @property
    def K(self) -> int:
        return -(-self.U // self.R)

    @property
    def p_id_w(self) -> float:
        return dbm_to_watt(self.p_id)

    @property
    def noise_w(self) -> float:
        """Noise power N0*W in watts."""
        return dbm_to_watt(self.N0 + 10.0 * math.log10(self.W))

    @property
    def sinr_threshold(self) -> float:
        """Per-UE QoS floor 2^(q_u/W) - 1."""
        return 2.0 ** (self.q_u / self.W) - 1.0

    def replace(self, **changes) -> "NetworkConfig":
        return dataclasses.replace(self, **changes)

    def to_dict(self) -> dict:
        return dataclasses.asdict(self)


_FIELD_TYPES = {f.name: f.type for f in fields(NetworkConfig)}


def _coerce(name, value):
    default = getattr(NetworkConfig, name)
    if isinstance(default, bool):
        if not isinstance(value, bool):
            raise ConfigError(f"{name}={value!r}: must be a boolean")
        return value
    if isinstance(default, int):
        if isinstance(value, float) and value.is_integer():
            value = int(value)
        if isinstance(value, bool) or not isinstance(value, int):
            raise ConfigError(f"{name}={value!r}: must be an integer")
        return value
    if isinstance(default, float):
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            raise ConfigError(f"{name}={value!r}: must be a number")
        return float(value)
    if not isinstance(value, str):
        raise ConfigError(f"{name}={value!r}: must be a string")
    return value


def config_from_dict(data: dict | None) -> NetworkConfig:
    data = data or {}
    if not isinstance(data, dict):
        raise ConfigError("config root must be a mapping of field names to values")
    unknown = sorted(set(data) - set(_FIELD_TYPES))
    if unknown:
        raise ConfigError(f"unknown config field(s): {', '.join(unknown)}")
    return NetworkConfig(**{k: _coerce(k, v) for k, v in data.items()})


def load_config(path) -> NetworkConfig:
    """Read a flat YAML mapping; missing fields take the default values."""
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    try:
        data = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        raise ConfigError(f"{path}: not valid YAML: {exc}") from exc
    return config_from_dict(data)


def dump_config(cfg: NetworkConfig) -> str:
    return yaml.safe_dump(cfg.to_dict(), sort_keys=False)


def save_config(cfg: NetworkConfig, path) -> None:
    Path(path).write_text(dump_config(cfg))
