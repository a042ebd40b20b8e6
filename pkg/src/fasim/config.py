"""Run configuration: YAML schema, CLI overrides, and provenance digests.

Single-curve config (``ber``/``abep``)::

    name: fagim-bpsk            # optional, defaults to the scheme name
    scheme: fagim               # fagim | faim | faps
    surface: {w1: 2.0, w2: 4.0, n1: 2, n2: 4}
    grouping: {na1: 1, na2: 2}  # fagim only
    active: 2                   # faim/faps (fagim derives it from grouping)
    modulation: 2               # constellation order: 2 = BPSK, 4/16/64 = QAM
    rx_antennas: 2
    snr_db: {start: 0, stop: 20, step: 2}   # or an explicit list
    seed: 1
    min_errors: 200
    max_transmissions: 20000000
    threads: 1
    abep: {mode: exact, samples: 100000}    # optional, abep subcommand only

Comparison config (``compare``) carries the shared keys (``snr_db``,
``seed``, ``min_errors``, ``max_transmissions``, ``threads``, ``targets``)
at the top level and a ``schemes`` list of per-curve scheme blocks.
"""

from __future__ import annotations

import hashlib
import json
import math
from dataclasses import dataclass, replace

import yaml

from .errors import ConfigError
from .geometry import GroupingSpec, PortLayout, SurfaceSpec
from .modulation import Constellation, SchemeConfig

__all__ = [
    "CurveSpec",
    "RunConfig",
    "CompareConfig",
    "AbepSettings",
    "parse_snr_spec",
    "load_run_config",
    "load_compare_config",
    "config_digest",
]

DEFAULT_MIN_ERRORS = 200
DEFAULT_MAX_TRANSMISSIONS = 20_000_000
DEFAULT_GAIN_TARGETS = (1e-3, 1e-4)
LONG_GAIN_TARGET = 1e-5


@dataclass(frozen=True)
class CurveSpec:
    """One scheme's physical and modulation parameters."""

    name: str
    scheme: str
    w1: float
    w2: float
    n1: int
    n2: int
    na1: int | None
    na2: int | None
    active: int
    modulation: int
    rx_antennas: int

    def to_scheme_config(self) -> SchemeConfig:
        surface = SurfaceSpec(self.w1, self.w2, self.n1, self.n2)
        if self.scheme == "fagim":
            grouping = GroupingSpec.for_surface(surface, self.na1, self.na2)
            layout = PortLayout.grouped(surface, grouping)
        else:
            layout = PortLayout.raster(surface)
        constellation = Constellation.from_order(self.modulation)
        return SchemeConfig(self.scheme, layout, self.active, constellation, self.rx_antennas)

    def as_dict(self) -> dict:
        return {
            "name": self.name,
            "scheme": self.scheme,
            "surface": {"w1": self.w1, "w2": self.w2, "n1": self.n1, "n2": self.n2},
            "grouping": None if self.na1 is None else {"na1": self.na1, "na2": self.na2},
            "active": self.active,
            "modulation": self.modulation,
            "rx_antennas": self.rx_antennas,
        }


@dataclass(frozen=True)
class AbepSettings:
    mode: str = "exact"
    samples: int = 100_000


@dataclass(frozen=True)
class RunConfig:
    """Everything one BER run needs; deterministic given these fields."""

    curve: CurveSpec
    snr_db: tuple[float, ...]
    seed: int
    min_errors: int = DEFAULT_MIN_ERRORS
    max_transmissions: int = DEFAULT_MAX_TRANSMISSIONS
    threads: int = 1
    noiseless: bool = False
    abep: AbepSettings | None = None

    def __post_init__(self) -> None:
        if self.min_errors < 1:
            raise ConfigError(f"min_errors must be >= 1, got {self.min_errors}")
        if self.max_transmissions < 1:
            raise ConfigError(f"max_transmissions must be >= 1, got {self.max_transmissions}")
        if self.threads < 1:
            raise ConfigError(f"threads must be >= 1, got {self.threads}")
        if len(self.snr_db) == 0:
            raise ConfigError("snr grid is empty")
        if any(b <= a for a, b in zip(self.snr_db, self.snr_db[1:])):
            raise ConfigError("snr grid must be strictly increasing")
        if not 0 <= self.seed < 2**64:
            raise ConfigError("seed must fit in an unsigned 64-bit integer")

    def digest(self) -> str:
        payload = {
            "curve": self.curve.as_dict(),
            "snr_db": list(self.snr_db),
            "seed": self.seed,
            "min_errors": self.min_errors,
            "max_transmissions": self.max_transmissions,
            "noiseless": self.noiseless,
        }
        return config_digest(payload)


@dataclass(frozen=True)
class CompareConfig:
    """Several curves sharing the SNR grid, seed, and stopping rule."""

    curves: tuple[CurveSpec, ...]
    snr_db: tuple[float, ...]
    seed: int
    min_errors: int = DEFAULT_MIN_ERRORS
    max_transmissions: int = DEFAULT_MAX_TRANSMISSIONS
    threads: int = 1
    targets: tuple[float, ...] = DEFAULT_GAIN_TARGETS

    def __post_init__(self) -> None:
        if len(self.curves) < 2:
            raise ConfigError("comparison needs at least two schemes")
        names = [c.name for c in self.curves]
        if len(set(names)) != len(names):
            raise ConfigError(f"scheme names must be unique, got {names}")

    def run_configs(self) -> list[RunConfig]:
        return [
            RunConfig(
                curve,
                self.snr_db,
                self.seed,
                self.min_errors,
                self.max_transmissions,
                self.threads,
            )
            for curve in self.curves
        ]


def config_digest(payload: dict) -> str:
    """Short hex digest of the canonicalized config, for provenance columns."""
    canon = json.dumps(payload, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(canon.encode()).hexdigest()[:12]


def parse_snr_spec(spec) -> tuple[float, ...]:
    """SNR grid from ``start:step:stop`` text, a mapping, or a list of dB values."""
    if isinstance(spec, str):
        parts = spec.split(":")
        if len(parts) != 3:
            raise ConfigError(f"snr spec must be start:step:stop, got {spec!r}")
        try:
            start, step, stop = (float(p) for p in parts)
        except ValueError as exc:
            raise ConfigError(f"bad snr spec {spec!r}: {exc}") from None
        return _snr_range(start, step, stop)
    if isinstance(spec, dict):
        try:
            return _snr_range(float(spec["start"]), float(spec["step"]), float(spec["stop"]))
        except KeyError as exc:
            raise ConfigError(f"snr_db mapping is missing key {exc}") from None
    if isinstance(spec, (list, tuple)):
        return tuple(float(v) for v in spec)
    raise ConfigError(f"cannot interpret snr grid {spec!r}")


def _snr_range(start: float, step: float, stop: float) -> tuple[float, ...]:
    if step <= 0:
        raise ConfigError(f"snr step must be positive, got {step}")
    if stop < start:
        raise ConfigError(f"snr stop {stop} is below start {start}")
    count = int(math.floor((stop - start) / step + 1e-9)) + 1
    return tuple(float(start + i * step) for i in range(count))


def _require(mapping: dict, key: str, context: str):
    if key not in mapping:
        raise ConfigError(f"{context} is missing required key {key!r}")
    return mapping[key]


def _parse_curve(block: dict, fallback_name: str | None = None) -> CurveSpec:
    if not isinstance(block, dict):
        raise ConfigError(f"scheme block must be a mapping, got {type(block).__name__}")
    scheme = str(_require(block, "scheme", "scheme block"))
    surface = _require(block, "surface", f"scheme {scheme!r}")
    if not isinstance(surface, dict):
        raise ConfigError("surface must be a mapping with w1, w2, n1, n2")
    try:
        w1 = float(_require(surface, "w1", "surface"))
        w2 = float(_require(surface, "w2", "surface"))
        n1 = int(_require(surface, "n1", "surface"))
        n2 = int(_require(surface, "n2", "surface"))
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"bad surface block: {exc}") from None
    na1 = na2 = None
    if scheme == "fagim":
        grouping = _require(block, "grouping", "fagim scheme")
        if not isinstance(grouping, dict):
            raise ConfigError("grouping must be a mapping with na1, na2")
        na1 = int(_require(grouping, "na1", "grouping"))
        na2 = int(_require(grouping, "na2", "grouping"))
        active = na1 * na2
        if "active" in block and int(block["active"]) != active:
            raise ConfigError(
                f"fagim active={block['active']} conflicts with grouping {na1}x{na2}"
            )
    else:
        active = int(_require(block, "active", f"scheme {scheme!r}"))
    modulation = int(_require(block, "modulation", f"scheme {scheme!r}"))
    rx = int(_require(block, "rx_antennas", f"scheme {scheme!r}"))
    name = str(block.get("name", fallback_name or scheme))
    spec = CurveSpec(name, scheme, w1, w2, n1, n2, na1, na2, active, modulation, rx)
    try:
        spec.to_scheme_config()  # fail fast on inconsistent parameters
    except (ValueError, ConfigError) as exc:
        raise ConfigError(f"scheme {name!r}: {exc}") from None
    return spec


def _load_yaml(path: str) -> dict:
    try:
        with open(path, "r", encoding="utf-8") as fh:
            data = yaml.safe_load(fh)
    except FileNotFoundError:
        raise ConfigError(f"config file not found: {path}") from None
    except yaml.YAMLError as exc:
        raise ConfigError(f"cannot parse {path}: {exc}") from None
    if not isinstance(data, dict):
        raise ConfigError(f"config {path} must be a YAML mapping")
    return data


def _parse_abep(block) -> AbepSettings:
    if block is None:
        return AbepSettings()
    if not isinstance(block, dict):
        raise ConfigError("abep block must be a mapping")
    mode = str(block.get("mode", "exact"))
    if mode not in ("exact", "sampled"):
        raise ConfigError(f"abep mode must be 'exact' or 'sampled', got {mode!r}")
    return AbepSettings(mode, int(block.get("samples", 100_000)))


def _apply_overrides(data: dict, overrides: dict) -> dict:
    out = dict(data)
    for key, value in overrides.items():
        if value is not None:
            out[key] = value
    return out


def load_run_config(path: str, **overrides) -> RunConfig:
    """Load a single-curve config; keyword overrides (``seed``, ``snr_db``,
    ``min_errors``, ``max_transmissions``, ``threads``) replace file values."""
    data = _apply_overrides(_load_yaml(path), overrides)
    curve = _parse_curve(data)
    try:
        return RunConfig(
            curve=curve,
            snr_db=parse_snr_spec(_require(data, "snr_db", "config")),
            seed=int(data.get("seed", 0)),
            min_errors=int(data.get("min_errors", DEFAULT_MIN_ERRORS)),
            max_transmissions=int(data.get("max_transmissions", DEFAULT_MAX_TRANSMISSIONS)),
            threads=int(data.get("threads", 1)),
            noiseless=bool(data.get("noiseless", False)),
            abep=_parse_abep(data.get("abep")) if "abep" in data else None,
        )
    except (TypeError, ValueError) as exc:
        if isinstance(exc, ConfigError):
            raise
        raise ConfigError(f"bad config {path}: {exc}") from None


def load_compare_config(path: str, long_targets: bool = False, **overrides) -> CompareConfig:
    """Load a multi-scheme comparison config."""
    data = _apply_overrides(_load_yaml(path), overrides)
    blocks = _require(data, "schemes", "comparison config")
    if not isinstance(blocks, list):
        raise ConfigError("schemes must be a list of scheme blocks")
    curves = tuple(
        _parse_curve(b, fallback_name=f"scheme{i}") for i, b in enumerate(blocks)
    )
    targets = tuple(float(t) for t in data.get("targets", DEFAULT_GAIN_TARGETS))
    if long_targets and LONG_GAIN_TARGET not in targets:
        targets = targets + (LONG_GAIN_TARGET,)
    try:
        cfg = CompareConfig(
            curves=curves,
            snr_db=parse_snr_spec(_require(data, "snr_db", "comparison config")),
            seed=int(data.get("seed", 0)),
            min_errors=int(data.get("min_errors", DEFAULT_MIN_ERRORS)),
            max_transmissions=int(data.get("max_transmissions", DEFAULT_MAX_TRANSMISSIONS)),
            threads=int(data.get("threads", 1)),
            targets=targets,
        )
        cfg.run_configs()  # validates grid and stopping parameters
        return cfg
    except (TypeError, ValueError) as exc:
        if isinstance(exc, ConfigError):
            raise
        raise ConfigError(f"bad config {path}: {exc}") from None


def is_compare_config(path: str) -> bool:
    """Whether the file holds a multi-scheme comparison config."""
    return "schemes" in _load_yaml(path)


def with_threads(config: RunConfig, threads: int) -> RunConfig:
    """Same run with a different parallelism degree (results are identical)."""
    return replace(config, threads=threads)
