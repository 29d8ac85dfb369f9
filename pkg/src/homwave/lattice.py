"""Nested separated nets and dyadic cube systems on a finite metric space.

Net points are identified by their point index in the cloud, so a point that
persists from level ``k`` to level ``k + 1`` keeps its identity.  Level ``k``
works at scale ``delta**k``; larger ``k`` is finer.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Dict, Optional

import numpy as np

from .space import MetricMeasureSpace, SpaceError

__all__ = [
    "STRICT_DELTA_MAX",
    "LatticeError",
    "NetHierarchy",
    "DyadicSystem",
    "build_nets",
    "assign_parents",
    "build_cubes",
    "sample_random_system",
    "verify_cube_axioms",
    "separated_sum_check",
]

STRICT_DELTA_MAX = 1.0 / 96.0
INNER_RADIUS = 1.0 / 3.0
OUTER_RADIUS = 4.0
PARENT_RADIUS = 2.0
FORCED_RADIUS = 1.0 / 3.0


class LatticeError(RuntimeError):
    """Internal consistency failure in a net hierarchy or cube system."""


def _greedy_extend(dist, order, radius, selected):
    """Extend ``selected`` to a maximal ``radius``-separated set, scanning ``order``."""
    chosen = list(selected)
    blocked = np.zeros(dist.shape[0], dtype=bool)
    for i in chosen:
        blocked |= dist[i] < radius
    for i in order:
        if not blocked[i]:
            chosen.append(int(i))
            blocked |= dist[i] < radius
    return chosen


@dataclass
class NetHierarchy:
    """Maximal ``delta**k``-separated nets for ``k_min <= k <= k_max``.

    ``nets[k]`` holds the point indices of the level-``k`` net, sorted
    ascending.  Nets are nested: ``nets[k]`` is a subset of ``nets[k + 1]``.
    """

    space: MetricMeasureSpace
    delta: float
    k_min: int
    k_max: int
    nets: Dict[int, np.ndarray]
    anchor: int = 0
    strict: bool = False
    _cache: dict = field(default_factory=dict, repr=False)

    @property
    def levels(self) -> range:
        return range(self.k_min, self.k_max + 1)

    def scale(self, k: int) -> float:
        return self.delta**k

    def size(self, k: int) -> int:
        return int(self.nets[k].size)

    def position(self, k: int) -> np.ndarray:
        """Array of length ``n`` mapping a point index to its slot in ``nets[k]`` (or -1)."""
        key = ("pos", k)
        if key not in self._cache:
            pos = np.full(self.space.n, -1, dtype=np.int64)
            pos[self.nets[k]] = np.arange(self.nets[k].size)
            self._cache[key] = pos
        return self._cache[key]

    def new_points(self, k: int) -> np.ndarray:
        """Points of ``nets[k + 1]`` that are not in ``nets[k]``."""
        return np.setdiff1d(self.nets[k + 1], self.nets[k])

    def parent_candidates(self, k: int):
        """Eligible parents at level ``k`` for each point of ``nets[k + 1]``.

        Returns ``(ptr, idx, forced)`` in CSR layout; ``forced[j]`` is the
        parent that must be chosen (closer than ``delta**k / 3``) or -1.
        """
        key = ("cand", k)
        if key not in self._cache:
            self._cache[key] = _candidates(self.space.dist, self.nets[k + 1], self.nets[k], self.scale(k))
        return self._cache[key]

    def finest_candidates(self):
        key = ("cand", "finest")
        if key not in self._cache:
            self._cache[key] = _candidates(
                self.space.dist, np.arange(self.space.n), self.nets[self.k_max], self.scale(self.k_max)
            )
        return self._cache[key]

    def finest_is_complete(self) -> bool:
        return self.size(self.k_max) == self.space.n


def _candidates(dist, children, parents, scale):
    sub = dist[np.ix_(children, parents)]
    eligible = sub < PARENT_RADIUS * scale
    counts = eligible.sum(axis=1)
    if np.any(counts == 0):
        raise LatticeError("a point has no eligible parent within 2*delta**k")
    ptr = np.concatenate([[0], np.cumsum(counts)])
    rows, cols = np.nonzero(eligible)
    idx = parents[cols]
    forced = np.full(children.size, -1, dtype=np.int64)
    close = sub < FORCED_RADIUS * scale
    has = close.any(axis=1)
    forced[has] = parents[np.argmax(close[has], axis=1)]
    return ptr, idx, forced


def build_nets(
    space: MetricMeasureSpace,
    delta: float = 0.25,
    k_min: Optional[int] = None,
    k_max: Optional[int] = None,
    strict: bool = False,
) -> NetHierarchy:
    """Greedy nested maximal separated nets.

    The anchor level (0, clamped into the requested range) scans points in
    descending weight, ties broken by index.  Finer levels extend the coarser
    net in the same order; coarser levels thin the next finer net.  With
    ``k_max=None`` the range extends until the net is the whole cloud; with
    ``k_min=None`` it extends down until the net is a single point.
    """
    if not 0 < delta < 1:
        raise SpaceError("delta must lie in (0, 1)")
    if strict and delta > STRICT_DELTA_MAX:
        raise SpaceError(f"strict mode needs delta <= 1/96, got {delta}")
    if k_min is not None and k_max is not None and k_min > k_max:
        raise SpaceError("k_min must not exceed k_max")
    n = space.n
    dist = space.dist
    order = np.lexsort((np.arange(n), -space.weights))
    anchor = 0
    if k_min is not None:
        anchor = max(anchor, k_min)
    if k_max is not None:
        anchor = min(anchor, k_max)

    nets = {anchor: _greedy_extend(dist, order, delta**anchor, [])}
    k = anchor
    while (k_max is None and len(nets[k]) < n) or (k_max is not None and k < k_max):
        prev = nets[k]
        k += 1
        nets[k] = _greedy_extend(dist, order, delta**k, prev)
        if k_max is None and k - anchor > 200:
            raise SpaceError("finest level did not saturate; duplicate points?")
    top = k
    rank = np.argsort(order)
    k = anchor
    while (k_min is None and len(nets[k]) > 1) or (k_min is not None and k > k_min):
        prev = np.asarray(nets[k])
        sub_order = prev[np.argsort(rank[prev], kind="stable")]
        k -= 1
        nets[k] = _greedy_extend(dist, sub_order, delta**k, [])
    bottom = k
    return NetHierarchy(
        space=space,
        delta=delta,
        k_min=bottom,
        k_max=top,
        nets={lvl: np.sort(np.asarray(pts, dtype=np.int64)) for lvl, pts in nets.items()},
        anchor=anchor,
        strict=strict,
    )


def _choose(ptr, idx, forced, rng):
    counts = np.diff(ptr)
    u = rng.random(counts.size)
    pick = ptr[:-1] + np.minimum((u * counts).astype(np.int64), counts - 1)
    out = idx[pick]
    return np.where(forced >= 0, forced, out)


def assign_parents(nets: NetHierarchy, mode: str = "nearest", seed: Optional[int] = None) -> Dict[int, np.ndarray]:
    """Parent of every level-``k + 1`` net point at level ``k``.

    Returns ``{k: parents}`` where ``parents`` is aligned with ``nets.nets[k + 1]``
    and holds point indices of level-``k`` net points.  ``nearest`` picks the
    closest eligible parent (smallest index on ties); ``random`` picks
    uniformly among parents within ``2 delta**k`` unless one lies within
    ``delta**k / 3``, which is then forced.  Persisting points are always their
    own parent.
    """
    dist = nets.space.dist
    parents = {}
    if mode == "nearest":
        for k in range(nets.k_min, nets.k_max):
            child, par = nets.nets[k + 1], nets.nets[k]
            sub = dist[np.ix_(child, par)]
            choice = par[np.argmin(sub, axis=1)]
            if np.any(sub.min(axis=1) >= PARENT_RADIUS * nets.scale(k)):
                raise LatticeError(f"no eligible parent at level {k}")
            parents[k] = choice
    elif mode == "random":
        rng = np.random.default_rng(seed)
        for k in range(nets.k_max - 1, nets.k_min - 1, -1):
            parents[k] = _choose(*nets.parent_candidates(k), rng)
    else:
        raise ValueError(f"unknown parent mode {mode!r}")
    return parents


@dataclass
class DyadicSystem:
    """Half-open dyadic cubes ``Q^k_alpha`` on the cloud.

    ``cube_of[k][x]`` is the net point ``alpha`` whose level-``k`` cube holds
    ``x``; ``parents[k]`` (aligned with ``nets.nets[k + 1]``) realises the
    partial order between consecutive levels.
    """

    nets: NetHierarchy
    parents: Dict[int, np.ndarray]
    cube_of: Dict[int, np.ndarray]
    mode: str = "nearest"
    seed: Optional[int] = None
    _cache: dict = field(default_factory=dict, repr=False)

    @property
    def space(self) -> MetricMeasureSpace:
        return self.nets.space

    @property
    def levels(self) -> range:
        return self.nets.levels

    def parent_map(self, k: int) -> np.ndarray:
        """Length-``n`` array sending a level-``k + 1`` net point to its level-``k`` parent."""
        key = ("pmap", k)
        if key not in self._cache:
            pm = np.full(self.space.n, -1, dtype=np.int64)
            pm[self.nets.nets[k + 1]] = self.parents[k]
            self._cache[key] = pm
        return self._cache[key]

    def ancestor(self, points, level_from: int, level_to: int) -> np.ndarray:
        """Level-``level_to`` ancestors of level-``level_from`` net points."""
        anc = np.asarray(points, dtype=np.int64)
        for j in range(level_from - 1, level_to - 1, -1):
            anc = self.parent_map(j)[anc]
        return anc

    def children(self, k: int, alpha: int) -> np.ndarray:
        """``L(k, alpha)``: level-``k + 1`` net points whose parent is ``alpha``."""
        return self.nets.nets[k + 1][self.parents[k] == alpha]

    def child_counts(self, k: int) -> np.ndarray:
        """``#L(k, alpha)`` aligned with ``nets.nets[k]``."""
        pos = self.nets.position(k)
        return np.bincount(pos[self.parents[k]], minlength=self.nets.size(k))

    def members(self, k: int, alpha: int) -> np.ndarray:
        return self.cube_of[k] == alpha

    def membership(self, k: int) -> np.ndarray:
        """Boolean matrix ``(|A_k|, n)`` of cube indicators at level ``k``."""
        pos = self.nets.position(k)
        m = np.zeros((self.nets.size(k), self.space.n), dtype=bool)
        m[pos[self.cube_of[k]], np.arange(self.space.n)] = True
        return m

    def cube_masses(self, k: int) -> np.ndarray:
        """``mu(Q^k_alpha)`` aligned with ``nets.nets[k]``."""
        key = ("mass", k)
        if key not in self._cache:
            pos = self.nets.position(k)
            self._cache[key] = np.bincount(
                pos[self.cube_of[k]], weights=self.space.weights, minlength=self.nets.size(k)
            )
        return self._cache[key]

    def to_json(self) -> dict:
        levels = []
        for k in self.levels:
            levels.append(
                {
                    "k": k,
                    "alphas": self.nets.nets[k].tolist(),
                    "cube_of": self.cube_of[k].tolist(),
                    "parent": self.parents[k - 1].tolist() if k > self.nets.k_min else None,
                }
            )
        return {
            "delta": self.nets.delta,
            "mode": self.mode,
            "seed": self.seed,
            "strict": self.nets.strict,
            "levels": levels,
        }

    @classmethod
    def from_json(cls, space: MetricMeasureSpace, data: dict) -> "DyadicSystem":
        levels = sorted(data["levels"], key=lambda lv: lv["k"])
        nets = NetHierarchy(
            space=space,
            delta=float(data["delta"]),
            k_min=levels[0]["k"],
            k_max=levels[-1]["k"],
            nets={lv["k"]: np.asarray(lv["alphas"], dtype=np.int64) for lv in levels},
            strict=bool(data.get("strict", False)),
        )
        parents = {lv["k"] - 1: np.asarray(lv["parent"], dtype=np.int64) for lv in levels[1:]}
        cube_of = {lv["k"]: np.asarray(lv["cube_of"], dtype=np.int64) for lv in levels}
        return cls(nets, parents, cube_of, mode=data.get("mode", "nearest"), seed=data.get("seed"))


def _cubes_from_finest(nets, parents, finest):
    cube_of = {nets.k_max: finest}
    for k in range(nets.k_max - 1, nets.k_min - 1, -1):
        pm = np.full(nets.space.n, -1, dtype=np.int64)
        pm[nets.nets[k + 1]] = parents[k]
        cube_of[k] = pm[cube_of[k + 1]]
    return cube_of


def build_cubes(nets: NetHierarchy, parents: Dict[int, np.ndarray], mode: str = "nearest", seed=None) -> DyadicSystem:
    """Cubes from a parent map: finest cells are nearest-net-point cells, coarser cubes are unions."""
    finest_net = nets.nets[nets.k_max]
    sub = nets.space.dist[:, finest_net]
    finest = finest_net[np.argmin(sub, axis=1)]
    return DyadicSystem(nets, parents, _cubes_from_finest(nets, parents, finest), mode=mode, seed=seed)


def sample_random_system(nets: NetHierarchy, seed: int) -> DyadicSystem:
    """One random dyadic system.

    Parents are drawn uniformly among eligible net points (forced when one is
    closer than ``delta**k / 3``), and so is the finest-level cell of each
    cloud point.
    """
    rng = np.random.default_rng(seed)
    finest = _choose(*nets.finest_candidates(), rng)
    parents = {}
    for k in range(nets.k_max - 1, nets.k_min - 1, -1):
        parents[k] = _choose(*nets.parent_candidates(k), rng)
    return DyadicSystem(nets, parents, _cubes_from_finest(nets, parents, finest), mode="random", seed=seed)


def _level_ratios(system: DyadicSystem, k: int):
    nets, space = system.nets, system.space
    alphas = nets.nets[k]
    d = space.dist[alphas]
    inside = system.cube_of[k][None, :] == alphas[:, None]
    inner = np.where(inside, np.inf, d).min(axis=1) / nets.scale(k)
    outer = np.where(inside, d, 0.0).max(axis=1) / nets.scale(k)
    return inner, outer


def verify_cube_axioms(system: DyadicSystem) -> dict:
    """Check the dyadic cube axioms exactly and measure the ball sandwich.

    ``inner_ratio`` is the largest ``r`` with ``B(x_alpha, r delta**k)``
    inside every cube; ``outer_ratio`` the smallest ``r`` with every cube
    inside ``B(x_alpha, r delta**k)``.  The sandwich ``1/3`` and ``4`` is
    asserted only for strict nets.
    """
    nets, space = system.nets, system.space
    n = space.n
    levels = list(system.levels)

    partition = all(
        system.cube_of[k].shape == (n,) and np.all(nets.position(k)[system.cube_of[k]] >= 0) for k in levels
    )
    nonempty = all(np.all(system.cube_masses(k) > 0) for k in levels)
    center_in_cube = all(np.array_equal(system.cube_of[k][nets.nets[k]], nets.nets[k]) for k in levels)

    nesting = True
    for k in levels[:-1]:
        # every finer cube sits inside exactly one coarser cube
        for ell in range(k + 1, nets.k_max + 1):
            pairs = np.unique(np.stack([system.cube_of[ell], system.cube_of[k]]), axis=1)
            if np.unique(pairs[0]).size != pairs.shape[1]:
                nesting = False
    union_of_children = all(
        np.array_equal(system.parent_map(k)[system.cube_of[k + 1]], system.cube_of[k]) for k in levels[:-1]
    )

    proximity = True
    worst_parent = 0.0
    for k in levels[:-1]:
        d = space.dist[nets.nets[k + 1], system.parents[k]]
        worst_parent = max(worst_parent, float((d / nets.scale(k)).max()))
        proximity &= bool(np.all(d < PARENT_RADIUS * nets.scale(k)))

    balls = {k: space.dist[nets.nets[k]] < OUTER_RADIUS * nets.scale(k) for k in levels}
    ball_inclusion = True
    for ell in levels:
        for k in range(nets.k_min, ell):
            anc = system.ancestor(nets.nets[ell], ell, k)
            outer = balls[k][nets.position(k)[anc]]
            if np.any(balls[ell] & ~outer):
                ball_inclusion = False

    inner_all, outer_all, per_level = [], [], []
    for k in levels:
        inner, outer = _level_ratios(system, k)
        finite = inner[np.isfinite(inner)]
        per_level.append(
            {
                "k": k,
                "cubes": int(inner.size),
                "inner_ratio": float(finite.min()) if finite.size else None,
                "outer_ratio": float(outer.max()) if outer.size and outer.max() > 0 else None,
            }
        )
        inner_all.extend(finite.tolist())
        if outer.max() > 0:
            outer_all.append(float(outer.max()))
    inner_ratio = min(inner_all) if inner_all else None
    outer_ratio = max(outer_all) if outer_all else None

    child_counts = [system.child_counts(k) for k in levels[:-1]]
    report = {
        "partition": bool(partition and nonempty),
        "nesting": bool(nesting and union_of_children),
        "ball_inclusion": bool(ball_inclusion),
        "parent_proximity": bool(proximity),
        "center_in_cube": bool(center_in_cube),
        "max_parent_distance_ratio": worst_parent,
        "inner_ratio": inner_ratio,
        "outer_ratio": outer_ratio,
        "levels": per_level,
        "max_children": int(max((c.max() for c in child_counts), default=1)),
        "min_children": int(min((c.min() for c in child_counts), default=1)),
        "strict": nets.strict,
        "sandwich": None,
        "lebesgue_finest": bool(nets.finest_is_complete() and np.all(system.cube_masses(nets.k_max) == space.weights[nets.nets[nets.k_max]])),
    }
    if nets.strict:
        inner_ok = inner_ratio is None or inner_ratio >= INNER_RADIUS
        outer_ok = outer_ratio is None or outer_ratio < OUTER_RADIUS
        report["sandwich"] = bool(inner_ok and outer_ok)
    return report


def separated_sum_check(space: MetricMeasureSpace, nets: NetHierarchy, k: int, eps: float = 1.0) -> dict:
    """Evaluate ``sup_a exp(eps d(a, Xi) / 2) sum_b exp(-eps d(a, b))``.

    ``Xi`` is the level-``k`` net with distances rescaled by ``delta**-k`` so
    that it is 1-separated.
    """
    if eps <= 0:
        raise ValueError("eps must be positive")
    d = space.dist[:, nets.nets[k]] / nets.scale(k)
    values = np.exp(eps * d.min(axis=1) / 2.0) * np.exp(-eps * d).sum(axis=1)
    arg = int(np.argmax(values))
    sup = float(values[arg])
    return {"k": k, "eps": eps, "sup": sup, "argmax": arg, "finite": bool(math.isfinite(sup))}
