"""Build, save and reload the artifact chain: nets, cubes, splines, basis."""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .config import RunConfig
from .datasets import reference_space
from .io import write_table
from .lattice import DyadicSystem, NetHierarchy, assign_parents, build_cubes, build_nets
from .space import MetricMeasureSpace, SpaceError, load_space
from .splines import SplineSystem, estimate_splines, load_splines, restore_splines, save_splines
from .wavelets import WaveletBasis, build_wavelets, load_basis, save_basis

__all__ = ["Artifacts", "ArtifactError", "load_config_space", "build_artifacts", "save_artifacts", "load_artifacts"]

CUBES_FILE = "cubes.json"
SPLINES_STEM = "splines"
NESTED_STEM = "splines_nested"
BASIS_STEM = "basis"
MANIFEST_FILE = "manifest.json"


class ArtifactError(RuntimeError):
    pass


@dataclass
class Artifacts:
    space: MetricMeasureSpace
    nets: NetHierarchy
    system: DyadicSystem
    splines: SplineSystem
    basis: WaveletBasis


def load_config_space(config: RunConfig) -> MetricMeasureSpace:
    source = config.space
    if "reference" in source:
        try:
            return reference_space(source["reference"])
        except KeyError:
            raise SpaceError(f"unknown reference space {source['reference']!r}") from None
    return load_space(
        source["path"],
        format=source.get("format", "coords"),
        weights_path=source.get("weights_path"),
        snowflake=float(source.get("snowflake", 1.0)),
    )


def _stage(name, fn, *args, **kwargs):
    try:
        return fn(*args, **kwargs)
    except (ValueError, RuntimeError) as exc:
        raise type(exc)(f"{name}: {exc}") from exc


def build_artifacts(config: RunConfig, space: MetricMeasureSpace = None) -> Artifacts:
    space = load_config_space(config) if space is None else space
    nets = _stage(
        "lattice",
        build_nets,
        space,
        delta=float(config.delta),
        k_min=config.k_min,
        k_max=config.k_max,
        strict=bool(config.strict_delta),
    )
    system = _stage("lattice", build_cubes, nets, assign_parents(nets, "nearest"))
    splines = _stage(
        "splines",
        estimate_splines,
        space,
        nets,
        R=int(config.samples),
        seed=int(config.seeds["splines"]),
        workers=int(config.workers),
    )
    basis = _stage(
        "wavelets",
        build_wavelets,
        splines,
        system,
        tol=float(config.tolerances["inv_sqrt"]),
        workers=int(config.workers),
    )
    return Artifacts(space, nets, system, splines, basis)


def _dump(path: Path, doc) -> None:
    path.write_text(json.dumps(doc, indent=1, sort_keys=True) + "\n")


def save_artifacts(art: Artifacts, config: RunConfig) -> dict:
    """Write every artifact into ``config.out``; returns the manifest."""
    out = config.out_dir
    try:
        out.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise ArtifactError(f"cannot create output directory {out}: {exc}") from exc
    _dump(out / CUBES_FILE, art.system.to_json())
    save_splines(art.splines, out / SPLINES_STEM)
    save_splines(art.splines, out / NESTED_STEM, nested=True)
    save_basis(art.basis, out / BASIS_STEM)
    nets = art.nets
    net_rows = np.array([[k, int(p)] for k in nets.levels for p in nets.nets[k]], dtype=np.float64)
    write_table(out / "nets", {"kind": "nets", "columns": ["k", "point"]}, net_rows)
    manifest = {
        "config_hash": config.digest(),
        "config": config.result_fields(),
        "points": art.space.n,
        "levels": [nets.k_min, nets.k_max],
        "net_sizes": [nets.size(k) for k in nets.levels],
        "wavelets": art.basis.count,
        "coarse": int(art.basis.coarse.shape[0]),
        "eps0": art.basis.eps0,
        "excluded_levels": art.basis.excluded_levels,
    }
    _dump(out / MANIFEST_FILE, manifest)
    return manifest


def load_artifacts(config: RunConfig, space: MetricMeasureSpace = None) -> Artifacts:
    out = config.out_dir
    needed = [
        out / MANIFEST_FILE,
        out / CUBES_FILE,
        out / f"{SPLINES_STEM}.json",
        out / f"{SPLINES_STEM}.bin",
        out / f"{BASIS_STEM}.json",
        out / f"{BASIS_STEM}.bin",
    ]
    missing = [str(p) for p in needed if not p.exists()]
    if missing:
        raise ArtifactError("missing artifacts (run `homwave build` first): " + ", ".join(missing))
    manifest = json.loads((out / MANIFEST_FILE).read_text())
    if manifest.get("config_hash") != config.digest():
        raise ArtifactError(f"artifacts in {out} were built from a different configuration")
    space = load_config_space(config) if space is None else space
    system = DyadicSystem.from_json(space, json.loads((out / CUBES_FILE).read_text()))
    nets = system.nets
    header, raw = load_splines(out / SPLINES_STEM)
    splines = restore_splines(nets, raw, int(header["samples"]), int(header["seed"]))
    basis = load_basis(space, out / BASIS_STEM)
    basis.system = system
    return Artifacts(space, nets, system, splines, basis)
