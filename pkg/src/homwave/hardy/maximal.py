"""Dyadic and Hardy-Littlewood maximal functions, computed exactly on the cloud."""

from __future__ import annotations

import numpy as np

from ..lattice import DyadicSystem
from ..space import MetricMeasureSpace

__all__ = [
    "cube_averages",
    "dyadic_maximal",
    "hl_maximal",
    "level_set_cubes",
    "weak_type_check",
    "maximal_comparison",
    "maximal_domination_check",
    "lebesgue_differentiation_check",
]


def cube_averages(f, system: DyadicSystem, k: int) -> np.ndarray:
    """Average of ``|f|`` over each level-``k`` cube, aligned with the level-``k`` net."""
    w = system.space.weights
    pos = system.nets.position(k)[system.cube_of[k]]
    total = np.bincount(pos, weights=w * np.abs(np.asarray(f, dtype=np.float64)), minlength=system.nets.size(k))
    return total / system.cube_masses(k)


def dyadic_maximal(f, system: DyadicSystem) -> np.ndarray:
    out = np.zeros(system.space.n)
    for k in system.levels:
        pos = system.nets.position(k)[system.cube_of[k]]
        out = np.maximum(out, cube_averages(f, system, k)[pos])
    return out


def _ball_tables(space: MetricMeasureSpace):
    cache = space._sorted
    if "ends" not in cache:
        order, dsorted, _ = space.sorted_rows()
        ends = np.ones_like(dsorted, dtype=bool)
        ends[:, :-1] = dsorted[:, :-1] < dsorted[:, 1:]
        rank = np.empty_like(order)
        np.put_along_axis(rank, order, np.arange(space.n)[None, :].repeat(space.n, axis=0), axis=1)
        cache.update(ends=ends, rank=rank)
    return cache["ends"], cache["rank"]


def hl_maximal(f, space: MetricMeasureSpace, points=None) -> np.ndarray:
    """Supremum of ``|f|`` averages over all open balls containing each point.

    For a center ``c`` the distinct balls are prefixes of the points sorted by
    distance from ``c``, cut at the end of a tie group.  A point ``x`` lies
    in the prefixes ending at or after its own position, so a suffix maximum
    of prefix averages gives the best ball around ``c`` for every ``x``.
    With ``points`` only those entries are evaluated.
    """
    order, _, cmass = space.sorted_rows()
    ends, rank = _ball_tables(space)
    g = np.abs(np.asarray(f, dtype=np.float64)) * space.weights
    avg = np.cumsum(g[order], axis=1)
    avg /= cmass
    avg[~ends] = -np.inf
    suffix = np.maximum.accumulate(avg[:, ::-1], axis=1)[:, ::-1]
    pts = np.arange(space.n) if points is None else np.asarray(points, dtype=np.int64)
    return np.take_along_axis(suffix, rank[:, pts], axis=1).max(axis=0)


def level_set_cubes(f, system: DyadicSystem, lam: float):
    """Maximal cubes with ``|f|`` average above ``lam``, as ``[(k, alpha), ...]``."""
    chosen = []
    covered = np.zeros(system.space.n, dtype=bool)
    for k in system.levels:
        avg = cube_averages(f, system, k)
        alphas = system.nets.nets[k]
        for slot in np.nonzero(avg > lam)[0]:
            members = system.cube_of[k] == alphas[slot]
            # a cube already covered lies inside a coarser selected cube
            if not covered[members].any():
                chosen.append((k, int(alphas[slot])))
                covered |= members
    return chosen


def weak_type_check(f, system: DyadicSystem, lambdas) -> dict:
    """Weak (1,1) with constant 1 and the disjoint-cube structure of each level set."""
    space = system.space
    m = dyadic_maximal(f, system)
    l1 = space.lp_norm(f, 1)
    rows = []
    weak_ok = True
    structure_ok = True
    for lam in lambdas:
        level = m > lam
        measure = float(space.weights[level].sum())
        holds = bool(lam * measure <= l1)
        cubes = level_set_cubes(f, system, lam)
        union = np.zeros(space.n, dtype=int)
        for k, a in cubes:
            union += system.cube_of[k] == a
        disjoint = bool(union.max(initial=0) <= 1)
        equal = bool(np.array_equal(union > 0, level))
        weak_ok &= holds
        structure_ok &= disjoint and equal
        rows.append(
            {
                "lambda": float(lam),
                "measure": measure,
                "bound": l1 / lam,
                "holds": holds,
                "cubes": len(cubes),
                "disjoint": disjoint,
                "union_equals_level_set": equal,
            }
        )
    return {"weak_ok": bool(weak_ok), "structure_ok": bool(structure_ok), "rows": rows}


def maximal_comparison(f, system: DyadicSystem) -> dict:
    """Ratios between the dyadic and Hardy-Littlewood maximal functions; nothing asserted."""
    md = dyadic_maximal(f, system)
    mh = hl_maximal(f, system.space)
    pos = mh > 0
    dy_over_hl = md[pos] / mh[pos]
    hl_over_dy = mh[pos] / md[pos]
    return {
        "max_dyadic_over_hl": float(dy_over_hl.max()) if pos.any() else None,
        "max_hl_over_dyadic": float(hl_over_dy.max()) if pos.any() else None,
        "worst_point_hl_over_dyadic": int(np.nonzero(pos)[0][np.argmax(hl_over_dy)]) if pos.any() else None,
    }


def _closed_volumes(space: MetricMeasureSpace) -> np.ndarray:
    """``mu({z: d(c, z) <= d(c, x)})`` for every pair ``(c, x)``."""
    cache = space._sorted
    if "closed" not in cache:
        _, _, cmass = space.sorted_rows()
        ends, rank = _ball_tables(space)
        n = space.n
        idx = np.where(ends, np.arange(n)[None, :], n)
        group_end = np.minimum.accumulate(idx[:, ::-1], axis=1)[:, ::-1]
        end_mass = np.take_along_axis(cmass, group_end, axis=1)
        cache["closed"] = np.take_along_axis(end_mass, rank, axis=1)
    return cache["closed"]


def _indicator_maximal_at(space, core: np.ndarray, points: np.ndarray) -> np.ndarray:
    """Exact ``M(chi_core)`` at ``points`` via the candidate radii of each center.

    For a center ``c`` the ratio ``mu(W cap B) / mu(B)`` over closed balls
    only increases when the radius passes a point of ``W``, so the best ball
    containing ``x`` has radius ``d(c, x)`` or ``d(c, w)`` for some ``w`` in
    ``W`` farther than ``x``.
    """
    closed = _closed_volumes(space)
    w_idx = np.nonzero(core)[0]
    ww = space.weights[w_idx]
    d_cw = space.dist[:, w_idx]
    d_cx = space.dist[:, points]
    # mass of W inside the closed ball through each candidate
    inner_w = (d_cw[:, None, :] <= d_cw[:, :, None]) @ ww
    ratio_w = inner_w / closed[:, w_idx]
    inner_x = (d_cw[:, None, :] <= d_cx[:, :, None]) @ ww
    best = inner_x / closed[:, points]
    farther = d_cw[:, None, :] >= d_cx[:, :, None]
    best = np.maximum(best, np.where(farther, ratio_w[:, None, :], 0.0).max(axis=2))
    return best.max(axis=0)


def maximal_domination_check(basis, s: float = 1.0, eps0=None) -> dict:
    """Worst ``min_{x in Q} [M(chi_W)(x)]^(1/s)`` over all wavelets.

    ``chi_W**s = chi_W``, so one maximal function per core ball suffices.
    Small cube and core pairs use candidate radii, large ones the full
    prefix-average sweep; both are exact.
    """
    if not s > 0:
        raise ValueError("s must be positive")
    space = basis.space
    cores = basis.core_masks(eps0)
    values = np.zeros(basis.count)
    for i in range(basis.count):
        if not cores[i].any():
            continue
        k = int(basis.level[i])
        inside = np.nonzero(basis.system.cube_of[k] == basis.alpha[i])[0]
        if inside.size * int(cores[i].sum()) <= 4 * space.n:
            m = _indicator_maximal_at(space, cores[i], inside)
        else:
            m = hl_maximal(cores[i].astype(np.float64), space, inside)
        values[i] = float(m.min()) ** (1.0 / s)
    empty = int(np.count_nonzero(~cores.any(axis=1)))
    arg = int(np.argmin(values)) if values.size else None
    worst = float(values.min()) if values.size else 0.0
    return {
        "s": s,
        "worst_constant": worst,
        "worst_wavelet": arg,
        "empty_cores": empty,
        "ok": bool(worst > 0 and empty == 0),
    }


def lebesgue_differentiation_check(f, system: DyadicSystem) -> dict:
    """Finest-cube averages of ``f`` against ``f`` itself (exact when finest cubes are points)."""
    k = system.nets.k_max
    f = np.asarray(f, dtype=np.float64)
    w = system.space.weights
    pos = system.nets.position(k)[system.cube_of[k]]
    sums = np.bincount(pos, weights=w * f, minlength=system.nets.size(k))
    avg = (sums / system.cube_masses(k))[pos]
    err = float(np.abs(avg - f).max())
    return {"max_error": err, "singleton_cells": bool(system.nets.finest_is_complete()), "ok": bool(err <= 1e-12 * max(1.0, np.abs(f).max()))}
