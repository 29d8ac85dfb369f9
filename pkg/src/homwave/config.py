"""Run configuration: one JSON file, overridable from the command line.

Schema (all keys optional except ``space``)::

    {
      "space": {"reference": "grid1d"}
             | {"path": "cloud.csv", "format": "coords|matrix|graph",
                "weights_path": null, "snowflake": 1.0},
      "delta": 0.25, "k_min": null, "k_max": null, "strict_delta": false,
      "samples": 256,
      "seeds": {"lattice": 0, "splines": 0, "experiments": 0},
      "tolerances": {...},           # see DEFAULT_TOLERANCES
      "experiments": {...},          # see DEFAULT_EXPERIMENTS
      "out": "out", "workers": 1
    }

``out`` and ``workers`` never influence results, so they are left out of the
configuration hash recorded in reports.
"""

from __future__ import annotations

import copy
import hashlib
import json
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Optional

__all__ = ["ConfigError", "RunConfig", "DEFAULT_TOLERANCES", "DEFAULT_EXPERIMENTS"]

DEFAULT_TOLERANCES = {
    "partition": 1e-12,
    "orthonormality": 1e-8,
    "cancellation": 1e-8,
    "reconstruction": 1e-8,
    "inv_sqrt": 1e-10,
    "cross_method": 1e-7,
    "neumann_coefficients": 1e-12,
    "isometry": 1e-10,
    "square_function": 1.0,
    "decay_slack": 1.05,
}

DEFAULT_EXPERIMENTS = {
    "atoms": 100,
    "molecules": 100,
    "decomposition_atoms": 50,
    "maximal_functions": 20,
    "maximal_lambdas": 20,
    "khintchine_vectors": 50,
    "khintchine_length": 32,
    "khintchine_trials": 2000,
    "sign_trials": 200,
    "cz_draws": 10,
    "band_limit": 100.0,
    "band_stability": 1.5,
    "khintchine_stability": 1.3,
    "cz_stability": 2.0,
    "decomposition_band": 100.0,
}

SEED_KEYS = ("lattice", "splines", "experiments")
UINT64 = 2**64


class ConfigError(ValueError):
    pass


@dataclass
class RunConfig:
    space: dict = field(default_factory=lambda: {"reference": "grid1d"})
    delta: float = 0.25
    k_min: Optional[int] = None
    k_max: Optional[int] = None
    strict_delta: bool = False
    samples: int = 256
    seeds: dict = field(default_factory=lambda: {k: 0 for k in SEED_KEYS})
    tolerances: dict = field(default_factory=lambda: dict(DEFAULT_TOLERANCES))
    experiments: dict = field(default_factory=lambda: dict(DEFAULT_EXPERIMENTS))
    out: str = "out"
    workers: int = 1

    def __post_init__(self):
        self.tolerances = {**DEFAULT_TOLERANCES, **(self.tolerances or {})}
        self.experiments = {**DEFAULT_EXPERIMENTS, **(self.experiments or {})}
        self.seeds = {**{k: 0 for k in SEED_KEYS}, **(self.seeds or {})}
        self.validate()

    def validate(self) -> None:
        if not isinstance(self.space, dict) or not ("reference" in self.space or "path" in self.space):
            raise ConfigError("space needs either 'reference' or 'path'")
        if not 0 < float(self.delta) < 1:
            raise ConfigError("delta must lie in (0, 1)")
        if self.k_min is not None and self.k_max is not None and self.k_min > self.k_max:
            raise ConfigError("k_min must not exceed k_max")
        if int(self.samples) < 1:
            raise ConfigError("samples must be at least 1")
        for key, value in self.tolerances.items():
            if not float(value) > 0:
                raise ConfigError(f"tolerance {key!r} must be positive")
        for key, value in self.seeds.items():
            if key not in SEED_KEYS:
                raise ConfigError(f"unknown seed {key!r}")
            if not (isinstance(value, int) and 0 <= value < UINT64):
                raise ConfigError(f"seed {key!r} must be an unsigned 64-bit integer")
        if int(self.workers) < 1:
            raise ConfigError("workers must be at least 1")

    @classmethod
    def from_file(cls, path) -> "RunConfig":
        path = Path(path)
        if not path.exists():
            raise ConfigError(f"config file not found: {path}")
        try:
            data = json.loads(path.read_text())
        except json.JSONDecodeError as exc:
            raise ConfigError(f"{path}: invalid JSON ({exc})") from exc
        unknown = set(data) - set(cls.__dataclass_fields__)
        if unknown:
            raise ConfigError(f"{path}: unknown keys {sorted(unknown)}")
        space = data.get("space")
        if isinstance(space, dict) and "path" in space:
            # relative data paths resolve against the config file
            space = dict(space)
            for key in ("path", "weights_path"):
                if space.get(key) and not Path(space[key]).is_absolute():
                    space[key] = str((path.parent / space[key]).resolve())
            data["space"] = space
        return cls(**data)

    def to_dict(self) -> dict:
        return copy.deepcopy(asdict(self))

    def result_fields(self) -> dict:
        d = self.to_dict()
        d.pop("out")
        d.pop("workers")
        return d

    def digest(self) -> str:
        blob = json.dumps(self.result_fields(), sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(blob.encode()).hexdigest()

    @property
    def out_dir(self) -> Path:
        return Path(self.out)
