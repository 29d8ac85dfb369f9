"""Monte Carlo spline functions over random dyadic systems.

The spline ``s^k_alpha(x)`` is the probability that ``x`` lies in the random
cube ``Q^k_alpha``.  Each draw fixes the whole hierarchy at once, so the same
random systems feed every level.

Two families are kept.  ``values`` holds the raw frequencies.  ``nested``
rebuilds coarse levels from the finest one through the estimated refinement
matrices, which makes the spline spaces exactly nested; the wavelet
construction relies on that.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Dict, Optional

import numpy as np

from .io import read_table, write_table
from .lattice import NetHierarchy, sample_random_system

__all__ = [
    "SplineSystem",
    "draw_seed",
    "estimate_splines",
    "refinement_coefficients",
    "verify_spline_regularity",
    "support_radii",
    "save_splines",
    "load_splines",
    "restore_splines",
]

NON_REGULAR_ETA = 0.1
MIN_PAIRS = 50
FIT_WINDOW = 4.0


def draw_seed(seed: int, index: int) -> np.random.SeedSequence:
    """Seed of draw ``index`` in a run seeded with ``seed``; reproducible on its own."""
    return np.random.SeedSequence(entropy=int(seed), spawn_key=(int(index),))


@dataclass
class SplineSystem:
    nets: NetHierarchy
    samples: int
    seed: int
    values: Dict[int, np.ndarray]
    nested: Dict[int, np.ndarray]
    mu: Dict[int, np.ndarray]
    p_coeffs: Dict[int, np.ndarray] = field(default_factory=dict)
    residuals: Dict[int, float] = field(default_factory=dict)
    interpolation_ok: Dict[int, bool] = field(default_factory=dict)
    eta_est: Dict[int, Optional[float]] = field(default_factory=dict)

    @property
    def space(self):
        return self.nets.space

    @property
    def levels(self) -> range:
        return self.nets.levels

    def nu(self, k: int, nested: bool = False) -> np.ndarray:
        """``nu^k_alpha``: integral of each spline."""
        s = self.nested[k] if nested else self.values[k]
        return s @ self.space.weights

    def partition_error(self, nested: bool = False) -> float:
        table = self.nested if nested else self.values
        return max(float(np.abs(table[k].sum(axis=0) - 1.0).max()) for k in self.levels)

    def interpolation_error(self, nested: bool = False) -> float:
        table = self.nested if nested else self.values
        worst = 0.0
        for k in self.levels:
            at_nets = table[k][:, self.nets.nets[k]]
            worst = max(worst, float(np.abs(at_nets - np.eye(at_nets.shape[0])).max()))
        return worst


def _draw_memberships(nets: NetHierarchy, seed) -> Dict[int, np.ndarray]:
    system = sample_random_system(nets, seed)
    return {k: nets.position(k)[system.cube_of[k]] for k in nets.levels}


def estimate_splines(
    space,
    nets: NetHierarchy,
    R: int = 256,
    seed: int = 0,
    workers: Optional[int] = None,
) -> SplineSystem:
    """Frequencies of cube membership over ``R`` random systems.

    Draw ``r`` uses :func:`draw_seed` ``(seed, r)``; counts are accumulated in
    draw order, so the result does not depend on ``workers``.
    """
    if R < 1:
        raise ValueError("R must be at least 1")
    if nets.space is not space:
        if nets.space.n != space.n or not np.array_equal(nets.space.dist, space.dist):
            raise ValueError("nets were built on a different space")
    n = space.n
    counts = {k: np.zeros((nets.size(k), n), dtype=np.int64) for k in nets.levels}
    cols = np.arange(n)
    seeds = [draw_seed(seed, r) for r in range(R)]
    # warm the candidate caches before threads share them
    nets.finest_candidates()
    for k in range(nets.k_min, nets.k_max):
        nets.parent_candidates(k)

    def accumulate(draw):
        for k, rows in draw.items():
            counts[k][rows, cols] += 1

    if workers is None or workers <= 1:
        for s in seeds:
            accumulate(_draw_memberships(nets, s))
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            for draw in pool.map(lambda s: _draw_memberships(nets, s), seeds):
                accumulate(draw)

    return restore_splines(nets, {k: counts[k] / float(R) for k in nets.levels}, R, seed)


def restore_splines(nets: NetHierarchy, values: Dict[int, np.ndarray], samples: int, seed: int) -> SplineSystem:
    """Rebuild the derived tables (volumes, refinement, nested family) from raw frequencies."""
    space = nets.space
    for k in nets.levels:
        if k not in values or values[k].shape != (nets.size(k), space.n):
            raise ValueError(f"spline table for level {k} does not match the nets")
    mu = {k: space.volumes(nets.nets[k], np.full(nets.size(k), nets.scale(k))) for k in nets.levels}
    splines = SplineSystem(nets=nets, samples=samples, seed=seed, values=dict(values), nested={}, mu=mu)
    refinement_coefficients(splines)
    splines.nested = _nested_splines(splines)
    return splines


def _nested_splines(splines: SplineSystem) -> Dict[int, np.ndarray]:
    nets = splines.nets
    top = nets.k_max
    nested = {top: splines.values[top].copy()}
    for k in range(top - 1, nets.k_min - 1, -1):
        nested[k] = splines.p_coeffs[k] @ nested[k + 1]
    return nested


def refinement_coefficients(splines: SplineSystem) -> Dict[int, np.ndarray]:
    """``p^k_{alpha beta} = s^k_alpha(x^{k+1}_beta)`` plus sup-norm residuals.

    When the finer level does not interpolate, the coefficients are refitted
    by least squares and the level is flagged in ``interpolation_ok``.
    """
    nets = splines.nets
    for k in range(nets.k_min, nets.k_max):
        fine = splines.values[k + 1]
        at_nets = fine[:, nets.nets[k + 1]]
        ok = bool(np.array_equal(at_nets, np.eye(at_nets.shape[0])))
        if ok:
            p = splines.values[k][:, nets.nets[k + 1]].copy()
        else:
            p = np.linalg.lstsq(fine.T, splines.values[k].T, rcond=None)[0].T
        splines.p_coeffs[k] = p
        splines.interpolation_ok[k] = ok
        splines.residuals[k] = float(np.abs(splines.values[k] - p @ fine).max())
    return splines.p_coeffs


def support_radii(splines: SplineSystem, k: int, nested: bool = False):
    """Per-spline radii ``(r_in, r_out)`` in units of ``delta**k``.

    ``s = 1`` on the open ball of radius ``r_in`` and ``s = 0`` outside the
    closed ball of radius ``r_out``.
    """
    s = (splines.nested if nested else splines.values)[k]
    d = splines.space.dist[splines.nets.nets[k]] / splines.nets.scale(k)
    r_in = np.where(s < 1.0, d, np.inf).min(axis=1)
    r_out = np.where(s > 0.0, d, 0.0).max(axis=1)
    return r_in, r_out


def verify_spline_regularity(
    splines: SplineSystem, max_pairs: int = 4000, seed: int = 0, nested: bool = False
) -> dict:
    """Fit ``log|s(x) - s(y)|`` against ``log(d(x, y) / delta**k)`` per level.

    Pairs with ``0 < d <= 4 delta**k`` (the spline support scale) are
    sampled, at most ``max_pairs`` per level.  Returns per-level ``eta_est``
    and ``C_est``; a level is flagged non-regular when its exponent falls
    below 0.1.  Levels whose splines are plain indicators (always the finest
    one) are reported but left out of the positivity check.  ``eta_pooled``
    fits the pairs of all checked levels at once.
    """
    rng = np.random.default_rng(seed)
    space, nets = splines.space, splines.nets
    table = splines.nested if nested else splines.values
    iu, ju = np.triu_indices(space.n, k=1)
    pair_d = space.dist[iu, ju]
    levels, pooled_t, pooled_d = [], [], []
    for k in nets.levels:
        scale = nets.scale(k)
        close = np.nonzero((pair_d > 0) & (pair_d <= FIT_WINDOW * scale))[0]
        if close.size > max_pairs:
            close = np.sort(rng.choice(close, size=max_pairs, replace=False))
        s = table[k]
        diff = np.abs(s[:, iu[close]] - s[:, ju[close]])
        t = np.broadcast_to(pair_d[close] / scale, diff.shape)
        usable = diff > 0
        pooled_t.append(t[usable])
        pooled_d.append(diff[usable])
        entry = {
            "k": k,
            "pairs": int(usable.sum()),
            "indicator": bool(np.all((s == 0.0) | (s == 1.0))),
            "eta_est": None,
            "C_est": None,
            "regular": None,
        }
        if entry["pairs"] >= 2 and np.unique(t[usable]).size >= 3:
            slope, _ = np.polyfit(np.log(t[usable]), np.log(diff[usable]), 1)
            eta = float(slope)
            entry["eta_est"] = eta
            entry["C_est"] = float((diff[usable] * t[usable] ** (-eta)).max())
            entry["regular"] = bool(eta >= NON_REGULAR_ETA)
        levels.append(entry)
        splines.eta_est[k] = entry["eta_est"]
    checked = [e for e in levels if e["pairs"] >= MIN_PAIRS and not e["indicator"]]
    ok = all(e["eta_est"] is not None and np.isfinite(e["eta_est"]) and e["eta_est"] > 0 for e in checked)
    # one regression over the pairs of every checked level
    pooled = None
    keep = [i for i, e in enumerate(levels) if e in checked]
    if keep:
        tt = np.concatenate([pooled_t[i] for i in keep])
        dd = np.concatenate([pooled_d[i] for i in keep])
        if np.unique(tt).size >= 3:
            pooled = float(np.polyfit(np.log(tt), np.log(dd), 1)[0])
    return {"levels": levels, "checked_levels": [e["k"] for e in checked], "eta_pooled": pooled, "ok": bool(ok)}


def save_splines(splines: SplineSystem, path, nested: bool = False):
    """Dense spline table: one row per ``(k, alpha)``."""
    table = splines.nested if nested else splines.values
    rows, keys = [], []
    for k in splines.levels:
        rows.append(table[k])
        keys.extend([[k, int(a)] for a in splines.nets.nets[k]])
    header = {
        "kind": "splines",
        "family": "nested" if nested else "raw",
        "delta": splines.nets.delta,
        "samples": splines.samples,
        "seed": splines.seed,
        "rows": keys,
    }
    return write_table(path, header, np.vstack(rows))


def load_splines(path):
    """Returns ``(header, {k: matrix})`` from a table written by :func:`save_splines`."""
    header, matrix = read_table(path)
    out: Dict[int, list] = {}
    for (k, _), row in zip(header["rows"], matrix):
        out.setdefault(int(k), []).append(row)
    return header, {k: np.vstack(v) for k, v in out.items()}
