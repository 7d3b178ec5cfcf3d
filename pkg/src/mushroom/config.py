"""Run configuration: flat INI sections, validated before any computation."""

from __future__ import annotations

import configparser
from dataclasses import dataclass
from pathlib import Path

from .geometry import MushroomGeometry


@dataclass
class RunConfig:
    # geometry
    r1: float = 1.0
    r2: float = 2.0
    t: float = 1.0
    # solver
    h: float = 1.0 / 40.0
    count: int = 120
    symmetry: bool = True
    # quasimodes
    eps: float = 0.05
    lambda_max: float = 100.0
    c: float = 0.25
    # flow
    t0: float = 0.9
    t1: float = 1.1
    samples: int = 21
    jmax: int = 10
    dt: float = 0.02
    delta: float | None = None
    # run
    seed: int = 0
    mc_samples: int = 100_000
    cache_dir: str | None = None
    out_dir: str | None = None

    def geometry(self) -> MushroomGeometry:
        return MushroomGeometry(self.r1, self.r2, self.t)

    def validate(self):
        self.geometry()  # raises on bad r1/r2/t
        if self.h <= 0 or self.h > self.r1 / 10 + 1e-12:
            raise ValueError(f"solver h={self.h} must lie in (0, r1/10]")
        if self.count < 1:
            raise ValueError("count must be >= 1")
        if not 0.0 < self.eps < 0.3:
            raise ValueError("quasimode eps must lie in (0, 0.3)")
        if self.lambda_max <= 0:
            raise ValueError("lambda_max must be positive")
        if self.c <= 0:
            raise ValueError("cluster half-width c must be positive")
        if not (0 < self.t0 < self.t1 <= 2.0):
            raise ValueError("flow interval needs 0 < t0 < t1 <= 2")
        if self.samples < 2:
            raise ValueError("flow samples must be >= 2")
        if self.mc_samples < 1:
            raise ValueError("mc_samples must be >= 1")
        if self.dt <= 0:
            raise ValueError("dt must be positive")
        return self


_SECTIONS = {
    "geometry": ("r1", "r2", "t"),
    "solver": ("h", "count", "symmetry"),
    "quasimodes": ("eps", "lambda_max", "c"),
    "flow": ("t0", "t1", "samples", "jmax", "dt", "delta"),
    "run": ("seed", "mc_samples", "cache_dir", "out_dir"),
}

_TYPES = {
    "count": int, "samples": int, "jmax": int, "seed": int,
    "mc_samples": int, "symmetry": bool,
    "cache_dir": str, "out_dir": str,
}


def load_config(path: str | Path | None) -> RunConfig:
    cfg = RunConfig()
    if path is None:
        return cfg.validate()
    parser = configparser.ConfigParser()
    read = parser.read(path)
    if not read:
        raise FileNotFoundError(f"config file not found: {path}")
    for section, keys in _SECTIONS.items():
        if not parser.has_section(section):
            continue
        for key in keys:
            if parser.has_option(section, key):
                typ = _TYPES.get(key, float)
                if typ is bool:
                    val = parser.getboolean(section, key)
                elif typ is int:
                    val = parser.getint(section, key)
                elif typ is str:
                    val = parser.get(section, key)
                else:
                    val = parser.getfloat(section, key)
                setattr(cfg, key, val)
        extra = set(parser.options(section)) - set(keys)
        if extra:
            raise ValueError(f"unknown option(s) {sorted(extra)} in [{section}]")
    return cfg.validate()


def dump_config(cfg: RunConfig) -> str:
    """Serialise (the canonical key=value block used in manifests)."""
    lines = []
    for section, keys in _SECTIONS.items():
        lines.append(f"[{section}]")
        for key in keys:
            val = getattr(cfg, key)
            if val is not None:
                lines.append(f"{key}={val}")
        lines.append("")
    return "\n".join(lines)
