"""Flat ``key = value`` experiment configuration.

One assignment per line, ``#`` starts a comment. Lists are comma separated
and may contain inclusive ranges written ``a-b`` (``seeds = 0-29``).
"""
from __future__ import annotations

from dataclasses import dataclass, field, fields

from .errors import ConfigError

SCHEMES = ("chim", "zigbee", "both")
TOPOLOGIES = ("probabilistic", "geometric")


def _int_list(text):
    out = []
    for part in text.split(","):
        part = part.strip()
        if not part:
            continue
        head, dash, tail = part[1:].partition("-")
        if dash:
            lo, hi = int(part[0] + head), int(tail)
            if hi < lo:
                raise ValueError(f"empty range {part}")
            out.extend(range(lo, hi + 1))
        else:
            out.append(int(part))
    return out


@dataclass
class ExperimentConfig:
    scheme: str = "both"
    omega: list = field(default_factory=lambda: list(range(5, 55, 5)))
    sensors: int = 20           # K
    channels: int = 16          # M
    gts: int = 12               # G
    alpha: float = 0.2
    topology: str = "probabilistic"
    seeds: list = field(default_factory=lambda: list(range(30)))
    superframes: int = 100
    slot_ms: float = 1.0
    tx_power_dbm: float = -10.0
    output_dir: str = "results"
    inactive_slots: int = 0
    max_slot_offset: int = 0
    tiebreak: str = "diagonal"
    area_m: float = 20.0
    range_m: float = 3.0
    body_radius_m: float = 1.0
    beacon_interval_s: float = 1.0
    workers: int = 1
    checkpoint_every: int = 10
    # analyze subcommand
    surrounding_sensors: int = 10   # P
    family_size: int = 0            # m; 0 means q - 1 of the construction
    t_values: list = field(default_factory=lambda: [0, 1, 2])
    mc_samples: int = 10_000

    def validate(self) -> "ExperimentConfig":
        def bad(name, msg):
            raise ConfigError(msg, field=name)

        if self.scheme not in SCHEMES:
            bad("scheme", f"must be one of {', '.join(SCHEMES)}")
        if self.topology not in TOPOLOGIES:
            bad("topology", f"must be one of {', '.join(TOPOLOGIES)}")
        if self.tiebreak not in ("lexicographic", "diagonal"):
            bad("tiebreak", "must be lexicographic or diagonal")
        if self.sensors < 1:
            bad("sensors", "K must be >= 1")
        if self.channels < 2:
            bad("channels", "M must be >= 2")
        if self.gts < 0:
            bad("gts", "G must be >= 0")
        if not 0.0 <= self.alpha <= 1.0:
            bad("alpha", "must lie in [0, 1]")
        if not self.omega or min(self.omega) < 1:
            bad("omega", "needs at least one WBAN count, each >= 1")
        if not self.seeds:
            bad("seeds", "must not be empty")
        if min(self.seeds) < 0:
            bad("seeds", "must be non-negative")
        if self.superframes < 1:
            bad("superframes", "horizon must be >= 1")
        for name in ("slot_ms", "beacon_interval_s", "range_m", "area_m"):
            if getattr(self, name) <= 0:
                bad(name, "must be positive")
        if self.body_radius_m < 0:
            bad("body_radius_m", "must be non-negative")
        for name in ("inactive_slots", "max_slot_offset", "family_size"):
            if getattr(self, name) < 0:
                bad(name, "must be non-negative")
        if self.workers < 1:
            bad("workers", "must be >= 1")
        if self.checkpoint_every < 1:
            bad("checkpoint_every", "must be >= 1")
        if self.surrounding_sensors < 0:
            bad("surrounding_sensors", "must be non-negative")
        if self.mc_samples < 1:
            bad("mc_samples", "must be >= 1")
        if any(t < 0 or t > self.sensors for t in self.t_values):
            bad("t_values", "each t must lie in [0, sensors]")
        return self


_PARSERS = {}
for _f in fields(ExperimentConfig):
    _t = {"int": int, "float": float, "str": str, "list": _int_list}[_f.type]
    _PARSERS[_f.name] = _t


def parse_config(text: str) -> ExperimentConfig:
    values = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"expected 'key = value', got {raw.strip()!r}", line=lineno)
        key, value = (s.strip() for s in line.split("=", 1))
        if key not in _PARSERS:
            raise ConfigError(f"unknown key {key!r}", line=lineno)
        if key in values:
            raise ConfigError(f"duplicate key {key!r}", line=lineno)
        try:
            values[key] = _PARSERS[key](value)
        except ValueError as exc:
            raise ConfigError(f"bad value for {key!r}: {exc}", line=lineno) from None
    return ExperimentConfig(**values).validate()


def load_config(path) -> ExperimentConfig:
    with open(path) as fh:
        return parse_config(fh.read())
