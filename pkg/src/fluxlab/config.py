"""Versioned project configuration: one document of all module defaults.

Strict loading: unknown keys are rejected so typos fail loudly.  The CLI
reads FLUX_CONFIG (or --config) and merges flag overrides on top.
"""

from __future__ import annotations

import dataclasses
import json
import os
from dataclasses import dataclass, field
from pathlib import Path

SCHEMA_VERSION = 1


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class GeometryConfig:
    voxel_mm: float = 0.5
    n_slices: int = 25


@dataclass(frozen=True)
class LatticeConfig:
    wall_mm: float = 1.0
    solidity_min: float = 0.11
    solidity_max: float = 0.15


@dataclass(frozen=True)
class ShellConfig:
    spacing_mm: float = 8.0
    wire_diameter_mm: float = 1.8
    slope_deg: float = 45.0


@dataclass(frozen=True)
class ChannelConfig:
    radius_mm: float = 5.0
    anchor_width_mm: float = 8.0
    anchor_thickness_mm: float = 2.0


@dataclass(frozen=True)
class FeaConfig:
    youngs_modulus_mpa: float = 1.7  # Shore A 40 silicone estimate
    poisson_ratio: float = 0.45
    voxel_mm: float = 1.0
    sma_wire_mm: float = 0.75
    sma_coil_mm: float = 7.0
    sma_turns: int = 30
    sma_shear_modulus_mpa: float = 7500.0
    sma_recovery_stroke_mm: float = 24.0  # 40% of the default free length


@dataclass(frozen=True)
class SignalDefaults:
    sample_rate_hz: float = 100.0
    noise_rel: float = 0.005
    drift_rel_per_min: float = 0.001
    bend_coupling: float = 0.05
    twist_coupling: float = 0.02
    coil_turns: int = 50
    coil_radius_mm: float = 3.5
    coil_length_mm: float = 60.0


@dataclass(frozen=True)
class TrainDefaults:
    learning_rate: float = 0.001
    epochs: int = 200
    dropout: float = 0.3
    l2: float = 0.001
    batch_size: int = 16
    seed: int = 0
    windows_per_trace: int = 5


@dataclass(frozen=True)
class ControlDefaults:
    heat_capacity: float = 1.0
    convection: float = 0.05
    ambient_c: float = 25.0
    austenite_start_c: float = 45.0
    austenite_finish_c: float = 55.0
    cooling_hysteresis_c: float = 10.0
    dt_ms: float = 5.0


@dataclass(frozen=True)
class ServerConfig:
    host: str = "127.0.0.1"
    port: int = 8765
    preview_fe_voxel_mm: float = 2.0
    preview_phases: tuple = (0.5, 1.0)


@dataclass(frozen=True)
class ProjectConfig:
    schema_version: int = SCHEMA_VERSION
    geometry: GeometryConfig = GeometryConfig()
    lattice: LatticeConfig = LatticeConfig()
    shell: ShellConfig = ShellConfig()
    channel: ChannelConfig = ChannelConfig()
    fea: FeaConfig = FeaConfig()
    signal: SignalDefaults = SignalDefaults()
    train: TrainDefaults = TrainDefaults()
    control: ControlDefaults = ControlDefaults()
    server: ServerConfig = ServerConfig()

    def to_json(self) -> dict:
        return dataclasses.asdict(self)

    def save(self, path: str | Path) -> None:
        Path(path).write_text(json.dumps(self.to_json(), indent=2))


def _load_section(cls, data: dict, where: str):
    names = {f.name for f in dataclasses.fields(cls)}
    unknown = set(data) - names
    if unknown:
        raise ConfigError(f"unknown keys in {where}: {sorted(unknown)}")
    kwargs = {}
    for f in dataclasses.fields(cls):
        if f.name in data:
            value = data[f.name]
            if isinstance(value, list):
                value = tuple(value)
            kwargs[f.name] = value
    return cls(**kwargs)


def loads(data: dict) -> ProjectConfig:
    if not isinstance(data, dict):
        raise ConfigError("config must be a JSON object")
    version = data.get("schema_version", SCHEMA_VERSION)
    if version != SCHEMA_VERSION:
        raise ConfigError(f"config schema_version {version} unsupported "
                          f"(expected {SCHEMA_VERSION})")
    sections = {f.name: f.type for f in dataclasses.fields(ProjectConfig)
                if f.name != "schema_version"}
    unknown = set(data) - set(sections) - {"schema_version"}
    if unknown:
        raise ConfigError(f"unknown top-level config keys: {sorted(unknown)}")
    types = {"geometry": GeometryConfig, "lattice": LatticeConfig,
             "shell": ShellConfig, "channel": ChannelConfig,
             "fea": FeaConfig, "signal": SignalDefaults,
             "train": TrainDefaults, "control": ControlDefaults,
             "server": ServerConfig}
    kwargs = {}
    for name, cls in types.items():
        if name in data:
            kwargs[name] = _load_section(cls, data[name], name)
    return ProjectConfig(**kwargs)


def load(path: str | Path | None = None) -> ProjectConfig:
    """Read config from path, $FLUX_CONFIG, or fall back to defaults."""
    if path is None:
        path = os.environ.get("FLUX_CONFIG")
    if path is None:
        return ProjectConfig()
    p = Path(path)
    if not p.exists():
        raise ConfigError(f"config file {p} does not exist")
    try:
        return loads(json.loads(p.read_text()))
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config file {p} is not valid JSON: {exc}") from exc
