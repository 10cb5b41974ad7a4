"""Flat ``key = value`` experiment configuration.

One key per line, ``#`` starts a comment, dotted prefixes act as
namespaces (``map.family``, ``tol.margin``, ``census.rho`` ...).  Values
stay strings until an experiment asks for them with a type.
"""
from __future__ import annotations

import math
import re
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

import numpy as np

from ..errors import PreconditionError

FORMATS = ("csv", "jsonl")

DEFAULT_TOLERANCES = {"margin": 1e-9, "rel": 1e-10}

_GRID = re.compile(r"^(linspace|logspace|arange)\((.*)\)$")


class ConfigError(PreconditionError):
    """Malformed or invalid configuration (a usage error)."""


def parse_flat(text: str) -> dict[str, str]:
    out: dict[str, str] = {}
    for n, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {n}: expected key = value, got {raw!r}")
        key, value = (s.strip() for s in line.split("=", 1))
        if not key:
            raise ConfigError(f"line {n}: empty key")
        if key in out:
            raise ConfigError(f"line {n}: duplicate key {key!r}")
        out[key] = value
    return out


def parse_grid(text: str) -> tuple[float, ...]:
    """``"1, 0.1"``, ``"linspace(2.8, 3.57, 200)"``, ``"logspace(-3, 0, 4)"`` or empty."""
    text = text.strip()
    if not text:
        return ()
    m = _GRID.match(text)
    try:
        if m:
            args = [float(a) for a in m.group(2).split(",")]
            if m.group(1) == "arange":
                vals = np.arange(*args)
            else:
                if len(args) != 3 or args[2] != int(args[2]) or args[2] < 0:
                    raise ValueError("need (start, stop, count)")
                vals = getattr(np, m.group(1))(args[0], args[1], int(args[2]))
            return tuple(float(v) for v in vals)
        return tuple(float(v) for v in text.split(",") if v.strip())
    except ValueError as e:
        raise ConfigError(f"bad parameter grid {text!r}: {e}") from None


@dataclass
class ExperimentConfig:
    experiment: str
    family: str = ""
    params: Optional[tuple] = None  # None means "experiment default", () an empty grid
    tolerances: dict = field(default_factory=lambda: dict(DEFAULT_TOLERANCES))
    seed: int = 0
    out_dir: str = "results"
    format: str = "csv"
    samples: Optional[int] = None
    workers: int = 1
    options: dict = field(default_factory=dict)  # remaining namespaced keys, as strings

    def __post_init__(self):
        self.validate()

    def validate(self) -> None:
        if not self.experiment:
            raise ConfigError("experiment id is required")
        for k, v in self.tolerances.items():
            if not (isinstance(v, (int, float)) and math.isfinite(v) and v > 0):
                raise ConfigError(f"tolerance {k!r} must be positive, got {v!r}")
        if not (isinstance(self.seed, int) and 0 <= self.seed < 2**64):
            raise ConfigError("seed must be an integer in [0, 2^64)")
        if self.format not in FORMATS:
            raise ConfigError(f"format must be one of {FORMATS}")
        if (self.samples is not None and self.samples < 0) or self.workers < 1:
            raise ConfigError("samples must be >= 0 and workers >= 1")
        if self.params is not None and any(not math.isfinite(p) for p in self.params):
            raise ConfigError("parameter grid must be finite")

    def grid(self, default) -> tuple:
        return tuple(default) if self.params is None else self.params

    def n_samples(self, default: int) -> int:
        return default if self.samples is None else self.samples

    def tol(self, name: str) -> float:
        try:
            return float(self.tolerances[name])
        except KeyError:
            raise ConfigError(f"missing tolerance tol.{name}") from None

    def opt(self, key: str, default=None, kind=str):
        """Typed namespaced option; string defaults go through the same conversion."""
        if key not in self.options and default is None:
            raise ConfigError(f"missing option {key!r}")
        raw = self.options.get(key, default)
        if not isinstance(raw, str):
            return raw
        try:
            if kind is bool:
                return raw.lower() in ("1", "true", "yes", "on")
            if kind is tuple:
                return parse_grid(raw)
            return kind(raw)
        except ValueError:
            raise ConfigError(f"option {key}={raw!r} is not a valid {kind.__name__}") from None

    @classmethod
    def from_mapping(cls, kv: dict[str, str], experiment: str | None = None) -> "ExperimentConfig":
        kv = dict(kv)
        exp = kv.pop("experiment.id", "") or (experiment or "")
        if experiment and exp != experiment:
            raise ConfigError(f"config is for {exp!r}, not {experiment!r}")
        tols = dict(DEFAULT_TOLERANCES)
        for k in [k for k in kv if k.startswith("tol.")]:
            try:
                tols[k[4:]] = float(kv.pop(k))
            except ValueError:
                raise ConfigError(f"tolerance {k!r} is not a number") from None

        def take_int(key, default):
            if key not in kv:
                return default
            try:
                return int(kv.pop(key))
            except ValueError:
                raise ConfigError(f"{key} must be an integer") from None

        return cls(
            experiment=exp,
            family=kv.pop("map.family", ""),
            params=parse_grid(kv.pop("map.params")) if "map.params" in kv else None,
            tolerances=tols,
            seed=take_int("run.seed", 0),
            out_dir=kv.pop("output.dir", "results"),
            format=kv.pop("output.format", "csv"),
            samples=take_int("run.samples", None),
            workers=take_int("run.workers", 1),
            options=kv,
        )

    @classmethod
    def load(cls, path, experiment: str | None = None) -> "ExperimentConfig":
        text = Path(path).read_text(encoding="utf-8")
        return cls.from_mapping(parse_flat(text), experiment)
