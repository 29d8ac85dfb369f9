"""Command-line driver.

    homwave build      build nets, cubes, splines and the wavelet basis
    homwave splines    estimate splines only
    homwave verify     run the check registry on built artifacts
    homwave analyze F  square-function norms of a function file
    homwave decompose F  molecular decomposition of a function file
    homwave report     render a verify report as text and CSV

Exit status: 0 on success, 1 when a pass-class check fails, 2 on bad input.
"""

from __future__ import annotations

import argparse
import csv
import json
import math
import sys
import time
from pathlib import Path

import numpy as np

from .config import ConfigError, RunConfig
from .hardy import coarse_energy, decompose, norm_iii, norm_iv, norm_v, save_decomposition
from .pipeline import ArtifactError, build_artifacts, load_artifacts, load_config_space, save_artifacts
from .space import SpaceError
from .splines import estimate_splines, save_splines, support_radii, verify_spline_regularity
from .lattice import build_nets
from .wavelets import analyze
from .suite import Report, _clean, run_suite

REPORT_FILE = "report.json"
TIMING_FILE = "timing.json"


class InputError(ValueError):
    pass


def read_function(path, n: int) -> np.ndarray:
    """One real per line; blank lines and ``#`` comments are skipped."""
    path = Path(path)
    if not path.exists():
        raise InputError(f"no such file: {path}")
    values = []
    for line_no, line in enumerate(path.read_text().splitlines(), start=1):
        text = line.split("#", 1)[0].strip()
        if not text:
            continue
        try:
            x = float(text)
        except ValueError:
            raise InputError(f"{path}:{line_no}: not a number: {text!r}") from None
        if not math.isfinite(x):
            raise InputError(f"{path}:{line_no}: value is not finite")
        values.append(x)
    if len(values) != n:
        raise InputError(f"{path}: {len(values)} values for a space of {n} points")
    return np.asarray(values)


def _config(args) -> RunConfig:
    config = RunConfig.from_file(args.config) if args.config else RunConfig()
    data = config.to_dict()
    if args.delta is not None:
        data["delta"] = args.delta
    if args.strict_delta:
        data["strict_delta"] = True
    if args.samples is not None:
        data["samples"] = args.samples
    if args.seed is not None:
        data["seeds"]["splines"] = args.seed
        data["seeds"]["experiments"] = args.seed
    if args.out is not None:
        data["out"] = args.out
    if args.workers is not None:
        data["workers"] = args.workers
    if args.space is not None:
        data["space"] = {"reference": args.space}
    return RunConfig(**data)


def _dump(path: Path, doc) -> None:
    path.write_text(json.dumps(_clean(doc), indent=1, sort_keys=True, allow_nan=False) + "\n")


def _record_timing(config: RunConfig, command: str, stages: dict) -> None:
    """Wall times live in a sidecar so reports stay byte-reproducible."""
    path = config.out_dir / TIMING_FILE
    doc = json.loads(path.read_text()) if path.exists() else {}
    doc[command] = {k: round(v, 4) for k, v in stages.items()}
    _dump(path, doc)


def cmd_build(config: RunConfig) -> int:
    start = time.perf_counter()
    art = build_artifacts(config)
    manifest = save_artifacts(art, config)
    _record_timing(config, "build", {"total": time.perf_counter() - start})
    print(
        f"built {manifest['points']} points, levels {manifest['levels'][0]}..{manifest['levels'][1]}, "
        f"{manifest['wavelets']} wavelets + {manifest['coarse']} coarse, eps0={manifest['eps0']} -> {config.out_dir}"
    )
    return 0


def cmd_splines(config: RunConfig) -> int:
    start = time.perf_counter()
    space = load_config_space(config)
    nets = build_nets(space, float(config.delta), config.k_min, config.k_max, strict=bool(config.strict_delta))
    splines = estimate_splines(space, nets, int(config.samples), int(config.seeds["splines"]), int(config.workers))
    out = config.out_dir
    out.mkdir(parents=True, exist_ok=True)
    save_splines(splines, out / "splines")
    save_splines(splines, out / "splines_nested", nested=True)
    reg = verify_spline_regularity(splines, seed=int(config.seeds["experiments"]))
    rows = []
    for entry in reg["levels"]:
        k = entry["k"]
        r_in, r_out = support_radii(splines, k)
        rows.append(
            {
                "k": k,
                "splines": splines.nets.size(k),
                "refinement_residual": splines.residuals.get(k),
                "eta_est": entry["eta_est"],
                "regular": entry["regular"],
                "r_in_min": float(r_in.min()),
                "r_out_max": float(r_out.max()),
            }
        )
    summary = {
        "samples": splines.samples,
        "seed": splines.seed,
        "partition_error": splines.partition_error(),
        "interpolation_error": splines.interpolation_error(),
        "residual_bound": 2.0 / math.sqrt(splines.samples),
        "levels": rows,
    }
    _dump(out / "splines_summary.json", summary)
    _write_csv(out / "splines_levels.csv", rows)
    _record_timing(config, "splines", {"total": time.perf_counter() - start})
    print(json.dumps(_clean(summary), indent=1, sort_keys=True))
    return 0


def cmd_verify(config: RunConfig) -> int:
    art = load_artifacts(config)
    timings: dict = {}
    report = run_suite(art, config, timings=timings)
    out = config.out_dir
    (out / REPORT_FILE).write_text(report.to_json())
    _record_timing(config, "verify", timings)
    for r in report.results:
        print(f"{r.status:4s}  {r.name:26s} {r.anchor}")
    print(f"{len(report.failed)} pass-class failures; report in {out / REPORT_FILE}")
    return report.exit_code


def _norms(f, art) -> dict:
    space, basis = art.space, art.basis
    cf = analyze(basis, f)
    return {
        "norm_iii": norm_iii(cf, basis),
        "norm_iv": norm_iv(cf, basis),
        "norm_v": norm_v(cf, basis),
        "coarse_energy": coarse_energy(cf),
        "l1": space.lp_norm(f, 1),
        "l2": space.lp_norm(f, 2),
        "eps0": basis.eps0,
    }


def cmd_analyze(config: RunConfig, function_path) -> int:
    art = load_artifacts(config)
    f = read_function(function_path, art.space.n)
    result = {"function": Path(function_path).name, **_norms(f, art)}
    _dump(config.out_dir / f"analysis_{Path(function_path).stem}.json", result)
    print(json.dumps(_clean(result), indent=1, sort_keys=True))
    return 0


def cmd_decompose(config: RunConfig, function_path) -> int:
    art = load_artifacts(config)
    f = read_function(function_path, art.space.n)
    cf = analyze(art.basis, f)
    dec = decompose(cf, art.basis)
    path = save_decomposition(dec, art.basis, config.out_dir / f"decomposition_{Path(function_path).stem}.json")
    print(f"{len(dec.pieces)} molecules, sum lambda = {dec.total:.6g}, ||phi||_1 = {dec.phi_l1:.6g} -> {path}")
    return 0


def _write_csv(path: Path, rows) -> None:
    if not rows:
        path.write_text("")
        return
    fields = list(rows[0])
    with open(path, "w", newline="") as fh:
        writer = csv.DictWriter(fh, fieldnames=fields, lineterminator="\n")
        writer.writeheader()
        for row in rows:
            writer.writerow({k: "" if row.get(k) is None else row.get(k) for k in fields})


def _scalars(measured: dict) -> str:
    parts = []
    for key in sorted(measured):
        v = measured[key]
        if isinstance(v, bool) or v is None:
            continue
        if isinstance(v, (int, float)):
            parts.append(f"{key}={v:.4g}" if isinstance(v, float) else f"{key}={v}")
    return " ".join(parts)


def cmd_report(config: RunConfig) -> int:
    path = config.out_dir / REPORT_FILE
    if not path.exists():
        raise ArtifactError(f"no report at {path}; run `homwave verify` first")
    report = Report.from_dict(json.loads(path.read_text()))
    rows = [
        {"name": r.name, "class": r.klass, "status": r.status, "anchor": r.anchor, "summary": _scalars(r.measured)}
        for r in report.results
    ]
    _write_csv(config.out_dir / "checks.csv", rows)
    try:
        gram_rows = report.get("gram_spectra").measured["levels"]
        _write_csv(
            config.out_dir / "gram_levels.csv",
            [
                {
                    "k": g["k"],
                    "size_M": g["size_M"],
                    "M_min": g["spectrum_M"][0],
                    "M_max": g["spectrum_M"][1],
                    "Mtilde_min": (g["spectrum_Mtilde"] or [None, None])[0],
                    "Mtilde_max": (g["spectrum_Mtilde"] or [None, None])[1],
                }
                for g in gram_rows
            ],
        )
    except KeyError:
        pass
    width = max(len(r["name"]) for r in rows) if rows else 0
    for r in rows:
        print(f"{r['status']:4s}  {r['name']:{width}s}  {r['summary']}")
    counts = report.to_dict()["summary"]
    print(f"pass {counts['pass']}  fail {counts['fail']}  info {counts['info']}  (config {report.config_hash[:12]})")
    return report.exit_code


def _parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", metavar="PATH", help="JSON run configuration")
    common.add_argument("--space", metavar="NAME", help="built-in reference space (grid1d, grid2d, snowflake, rgg)")
    common.add_argument("--delta", type=float, metavar="F", help="scale ratio delta in (0, 1)")
    common.add_argument("--strict-delta", action="store_true", help="require delta <= 1/96 and check the cube sandwich")
    common.add_argument("--samples", type=int, metavar="N", help="Monte Carlo draws for the splines")
    common.add_argument("--seed", type=int, metavar="N", help="seed for splines and experiments")
    common.add_argument("--out", metavar="DIR", help="output directory")
    common.add_argument("--workers", type=int, metavar="N", help="worker threads (results do not depend on it)")

    parser = argparse.ArgumentParser(prog="homwave", description=__doc__.split("\n\n")[0])
    sub = parser.add_subparsers(dest="command", required=True)
    sub.add_parser("build", parents=[common], help="build all artifacts")
    sub.add_parser("splines", parents=[common], help="estimate splines only")
    sub.add_parser("verify", parents=[common], help="run every registered check")
    for name in ("analyze", "decompose"):
        p = sub.add_parser(name, parents=[common], help=f"{name} a function file (one value per point)")
        p.add_argument("function", metavar="FILE")
    sub.add_parser("report", parents=[common], help="render the verify report")
    return parser


def main(argv=None) -> int:
    args = _parser().parse_args(argv)
    try:
        config = _config(args)
        if args.command == "build":
            return cmd_build(config)
        if args.command == "splines":
            return cmd_splines(config)
        if args.command == "verify":
            return cmd_verify(config)
        if args.command == "analyze":
            return cmd_analyze(config, args.function)
        if args.command == "decompose":
            return cmd_decompose(config, args.function)
        return cmd_report(config)
    except (ConfigError, SpaceError, ArtifactError, InputError, OSError, ValueError, RuntimeError) as exc:
        print(f"homwave {args.command}: error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
