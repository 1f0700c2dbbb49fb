"""Run configuration, presets and the tabular result type."""

from __future__ import annotations

import csv
import io
import json
import math
import sys
from dataclasses import asdict, dataclass, field, fields, replace
from pathlib import Path
from typing import Any

import numpy as np

from ..analytics import LinkBudget, MPSK, modulation_from_name
from ..channel import (
    FsoSnrParams,
    MalagaParams,
    RayleighParams,
    make_gamma_gamma,
    make_k_distribution,
)
from ..relay import ChannelDependent, FixedGain
from ..simulate import McConfig

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

__all__ = [
    "AserCurve",
    "ChannelConfig",
    "ConfigError",
    "GridConfig",
    "METHODS",
    "McSettings",
    "PRESETS",
    "RunConfig",
    "db_to_linear",
    "linear_to_db",
    "load_config",
]

METHODS = ("exact", "approx", "asymptotic", "mc")
STRATEGIES = ("fixed", "channel_dependent")
CHANNEL_KINDS = ("malaga", "k", "gamma_gamma")


class ConfigError(ValueError):
    """Invalid run configuration (maps to exit code 2)."""


def db_to_linear(db):
    """Power ratio from decibels, 10**(dB/10)."""
    return np.power(10.0, np.asarray(db, dtype=float) / 10.0)


def linear_to_db(x):
    return 10.0 * np.log10(np.asarray(x, dtype=float))


@dataclass(frozen=True)
class ChannelConfig:
    """FSO channel. ``omega=None`` means Omega = 1 - 2 b0."""

    kind: str = "malaga"
    alpha: float = 10.0
    beta: int = 5
    rho: float = 0.5
    b0: float = 0.25
    omega: float | None = None
    phase_diff: float = 0.0

    def params(self) -> MalagaParams:
        if self.kind == "malaga":
            omega = 1.0 - 2.0 * self.b0 if self.omega is None else self.omega
            return MalagaParams(self.alpha, self.beta, self.rho, self.b0, omega, self.phase_diff)
        if self.kind == "k":
            return make_k_distribution(self.alpha, self.b0, self.beta)
        if self.kind == "gamma_gamma":
            return make_gamma_gamma(self.alpha, self.beta)
        raise ConfigError(f"channel kind must be one of {CHANNEL_KINDS}, got {self.kind!r}")


@dataclass(frozen=True)
class GridConfig:
    """SNR grid in dB for the RF hop.

    With ``linked`` the FSO hop follows at Gamma2 = Gamma1 + offset_db;
    otherwise it is held at ``gamma_bar_2_db``.
    """

    start: float = 0.0
    stop: float = 40.0
    step: float = 1.0
    linked: bool = True
    offset_db: float = 0.0
    gamma_bar_2_db: float | None = None

    def points(self) -> np.ndarray:
        if not self.step > 0:
            raise ConfigError("grid step must be positive")
        if self.stop < self.start:
            raise ConfigError("grid stop must not precede start")
        n = int(math.floor((self.stop - self.start) / self.step + 1e-9)) + 1
        return self.start + self.step * np.arange(n)

    def gamma_bars(self, snr_db: float) -> tuple[float, float]:
        g1 = float(db_to_linear(snr_db))
        if self.linked:
            return g1, float(db_to_linear(snr_db + self.offset_db))
        if self.gamma_bar_2_db is None:
            raise ConfigError("an unlinked grid needs gamma_bar_2_db")
        return g1, float(db_to_linear(self.gamma_bar_2_db))


@dataclass(frozen=True)
class McSettings:
    samples: int = 1_000_000
    seed: int = 0
    chunk_size: int = 1 << 16
    confidence_level: float = 0.997

    def to_mc(self) -> McConfig:
        return McConfig(self.samples, self.seed, min(self.chunk_size, self.samples),
                        self.confidence_level)


@dataclass(frozen=True)
class RunConfig:
    channel: ChannelConfig = field(default_factory=ChannelConfig)
    strategy: str = "fixed"
    c: float = 0.5
    modulations: tuple[str, ...] = ("bpsk", "qpsk", "8psk")
    grid: GridConfig = field(default_factory=GridConfig)
    methods: tuple[str, ...] = ("exact", "approx", "mc")
    mc: McSettings = field(default_factory=McSettings)
    xi_variant: str = "exact"
    out: str | None = None
    format: str = "csv"
    name: str = "fig2"

    def validate(self) -> "RunConfig":
        if not self.methods:
            raise ConfigError("methods must not be empty")
        bad = [m for m in self.methods if m not in METHODS]
        if bad:
            raise ConfigError(f"unknown methods {bad}; choose from {METHODS}")
        if len(set(self.methods)) != len(self.methods):
            raise ConfigError("methods must not repeat")
        if not self.modulations:
            raise ConfigError("modulations must not be empty")
        for m in self.modulations:
            try:
                modulation_from_name(m)
            except ValueError as exc:
                raise ConfigError(str(exc)) from None
        if self.strategy not in STRATEGIES:
            raise ConfigError(f"strategy must be one of {STRATEGIES}")
        if self.strategy == "fixed" and not self.c > 0:
            raise ConfigError("fixed-gain constant c must be positive")
        if self.xi_variant not in ("exact", "approx"):
            raise ConfigError("xi_variant must be 'exact' or 'approx'")
        if self.format not in ("csv", "json"):
            raise ConfigError("format must be 'csv' or 'json'")
        if self.grid.points().size == 0:
            raise ConfigError("grid is empty")
        try:
            self.channel.params()
            self.mc.to_mc()
        except ConfigError:
            raise
        except (TypeError, ValueError) as exc:
            raise ConfigError(str(exc)) from None
        return self

    # -- model objects ------------------------------------------------------

    def relay(self):
        return FixedGain(self.c) if self.strategy == "fixed" else ChannelDependent()

    def link_budget(self, snr_db: float) -> LinkBudget:
        g1, g2 = self.grid.gamma_bars(snr_db)
        return LinkBudget(RayleighParams(g1), FsoSnrParams(self.channel.params(), g2), self.relay())

    def mods(self):
        return [modulation_from_name(m) for m in self.modulations]

    def columns(self) -> list[str]:
        cols = ["snr_db"]
        for mod in self.mods():
            for method in METHODS:
                if method not in self.methods:
                    continue
                if method == "approx" and not isinstance(mod, MPSK):
                    continue
                cols.append(f"{mod.name}_{method}")
        if "mc" in self.methods:
            for mod in self.mods():
                cols += [f"{mod.name}_mc_lo", f"{mod.name}_mc_hi"]
        return cols

    # -- (de)serialisation --------------------------------------------------

    def to_dict(self) -> dict[str, Any]:
        d = asdict(self)
        d["modulations"] = list(self.modulations)
        d["methods"] = list(self.methods)
        return d

    @classmethod
    def from_dict(cls, data: dict[str, Any], base: "RunConfig | None" = None) -> "RunConfig":
        base = base or cls()
        known = {f.name for f in fields(cls)}
        unknown = set(data) - known
        if unknown:
            raise ConfigError(f"unknown configuration keys: {sorted(unknown)}")
        updates: dict[str, Any] = {}
        for key, value in data.items():
            if key == "channel":
                updates[key] = _sub(ChannelConfig, base.channel, value)
            elif key == "grid":
                updates[key] = _sub(GridConfig, base.grid, value)
            elif key == "mc":
                updates[key] = _sub(McSettings, base.mc, value)
            elif key in ("modulations", "methods"):
                if isinstance(value, str):
                    value = [v for v in value.split(",") if v.strip()]
                updates[key] = tuple(v.strip().lower() for v in value)
            else:
                updates[key] = value
        return replace(base, **updates)


def _sub(kind, base, value):
    if not isinstance(value, dict):
        raise ConfigError(f"{kind.__name__} section must be a table")
    known = {f.name for f in fields(kind)}
    unknown = set(value) - known
    if unknown:
        raise ConfigError(f"unknown keys in {kind.__name__}: {sorted(unknown)}")
    return replace(base, **value)


def load_config(path: str | Path, base: RunConfig | None = None) -> RunConfig:
    """Read a TOML (``.toml``) or JSON file on top of ``base``."""
    path = Path(path)
    try:
        raw = path.read_bytes()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from None
    try:
        if path.suffix.lower() == ".json":
            data = json.loads(raw)
        else:
            data = tomllib.loads(raw.decode("utf-8"))
    except (ValueError, tomllib.TOMLDecodeError) as exc:
        raise ConfigError(f"cannot parse config {path}: {exc}") from None
    if "preset" in data:
        preset = data.pop("preset")
        if preset not in PRESETS:
            raise ConfigError(f"unknown preset {preset!r}")
        base = PRESETS[preset]
    return RunConfig.from_dict(data, base)


_MALAGA = ChannelConfig()

PRESETS: dict[str, RunConfig] = {
    "fig2": RunConfig(name="fig2"),
    "fig3": RunConfig(modulations=("bpsk", "qpsk"), methods=("approx",), name="fig3"),
    "fig4": RunConfig(modulations=("8psk", "dpsk"), methods=("exact",), name="fig4"),
    "fig5": RunConfig(channel=replace(_MALAGA, rho=0.75), modulations=("bpsk", "qpsk", "8psk", "dpsk"),
                      methods=("exact", "asymptotic"), name="fig5"),
    "fig6": RunConfig(strategy="channel_dependent",
                      modulations=("bpsk", "qpsk", "8psk", "dpsk", "ncfsk"),
                      methods=("exact", "approx", "asymptotic", "mc"), name="fig6"),
    "fig7": RunConfig(channel=ChannelConfig(alpha=4.2, beta=2, rho=0.5, b0=0.25),
                      strategy="channel_dependent", modulations=("8psk", "dpsk"),
                      methods=("exact", "approx"), name="fig7"),
}


# ---------------------------------------------------------------------------
# Result table
# ---------------------------------------------------------------------------

def _fmt(x: float) -> str:
    return "nan" if math.isnan(x) else "%.17g" % x


@dataclass
class AserCurve:
    """One row per grid point; columns as named in ``columns``."""

    columns: list[str]
    rows: np.ndarray
    metadata: dict[str, Any]

    def column(self, name: str) -> np.ndarray:
        return self.rows[:, self.columns.index(name)]

    @property
    def snr_db(self) -> np.ndarray:
        return self.column("snr_db")

    def config(self) -> RunConfig:
        return RunConfig.from_dict(self.metadata["config"])

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(self.columns)
        for row in self.rows:
            w.writerow([_fmt(float(v)) for v in row])
        return buf.getvalue()

    def to_json(self) -> str:
        rows = [[None if math.isnan(float(v)) else float(v) for v in row] for row in self.rows]
        return json.dumps({"columns": self.columns, "rows": rows, "metadata": self.metadata},
                          indent=2, sort_keys=True) + "\n"

    def metadata_json(self) -> str:
        return json.dumps(self.metadata, indent=2, sort_keys=True) + "\n"

    def write(self, path: str | Path, fmt: str = "csv") -> list[Path]:
        path = Path(path)
        if fmt == "json":
            path.write_text(self.to_json())
            return [path]
        path.write_text(self.to_csv())
        meta = path.with_name(path.name + ".meta.json")
        meta.write_text(self.metadata_json())
        return [path, meta]

    @classmethod
    def read(cls, path: str | Path) -> "AserCurve":
        path = Path(path)
        if path.suffix.lower() == ".json":
            data = json.loads(path.read_text())
            rows = np.array([[math.nan if v is None else v for v in r] for r in data["rows"]],
                            dtype=float)
            return cls(data["columns"], rows, data["metadata"])
        lines = list(csv.reader(path.read_text().splitlines()))
        meta_path = path.with_name(path.name + ".meta.json")
        meta = json.loads(meta_path.read_text()) if meta_path.exists() else {}
        rows = np.array([[float(v) for v in r] for r in lines[1:]], dtype=float)
        return cls(lines[0], rows, meta)
