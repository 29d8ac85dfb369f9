"""Finite metric measure spaces: construction, loading, ball volumes, doubling profile.

A cloud of ``n`` points stands in for a space of homogeneous type.  The metric
is stored as a dense ``n x n`` matrix and the measure as positive point masses,
so every integral is a weighted sum.  Balls are open: ``B(x, r) = {y : d(x, y) < r}``.
"""

from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional, Sequence

import numpy as np
from scipy.sparse import coo_matrix
from scipy.sparse.csgraph import shortest_path
from scipy.spatial.distance import cdist

__all__ = [
    "SpaceError",
    "MetricMeasureSpace",
    "SpaceProfile",
    "load_space",
    "volume",
    "doubling_profile",
    "triangle_violation",
]

TRIANGLE_TOL = 1e-9
_EXHAUSTIVE_TRIANGLE_LIMIT = 300
_RANDOM_TRIPLES = 1_000_000


class SpaceError(ValueError):
    """Raised for malformed or invalid metric measure space input."""


def triangle_violation(dist: np.ndarray, seed: int = 0) -> float:
    """Largest violation ``d(i,j) - d(i,k) - d(k,j)`` over checked triples.

    All triples are checked for up to 300 points; above that a fixed sample of
    ``10**6`` random triples is used.
    """
    n = dist.shape[0]
    if n < 3:
        return 0.0
    worst = -np.inf
    if n <= _EXHAUSTIVE_TRIANGLE_LIMIT:
        for k in range(n):
            excess = dist - (dist[:, k][:, None] + dist[k, :][None, :])
            worst = max(worst, float(excess.max()))
    else:
        rng = np.random.default_rng(seed)
        i, j, k = rng.integers(0, n, size=(3, _RANDOM_TRIPLES))
        worst = float((dist[i, j] - dist[i, k] - dist[k, j]).max())
    return max(worst, 0.0)


@dataclass(frozen=True)
class MetricMeasureSpace:
    """A finite point cloud with a metric and positive point masses.

    Parameters
    ----------
    dist : ndarray, shape (n, n)
        Symmetric distance matrix with zero diagonal.
    weights : ndarray, shape (n,)
        Strictly positive masses; ``mu(E) = weights[E].sum()``.
    ids : sequence of str, optional
        External point identifiers (defaults to ``"0" .. "n-1"``).
    coords : ndarray, optional
        Coordinates, when the metric was computed from them.
    """

    dist: np.ndarray
    weights: np.ndarray
    ids: tuple = ()
    coords: Optional[np.ndarray] = None
    _sorted: dict = field(default_factory=dict, repr=False, compare=False)

    def __post_init__(self):
        dist = np.ascontiguousarray(self.dist, dtype=np.float64)
        weights = np.ascontiguousarray(self.weights, dtype=np.float64).ravel()
        if dist.ndim != 2 or dist.shape[0] != dist.shape[1]:
            raise SpaceError("distance matrix must be square")
        n = dist.shape[0]
        if n == 0:
            raise SpaceError("empty space")
        if weights.shape != (n,):
            raise SpaceError(f"expected {n} weights, got {weights.shape[0]}")
        if not np.all(np.isfinite(weights)) or np.any(weights <= 0):
            raise SpaceError("weights must be finite and strictly positive")
        if not np.all(np.isfinite(dist)):
            raise SpaceError("distances must be finite (is the graph connected?)")
        if np.any(np.diag(dist) != 0):
            raise SpaceError("distance matrix must have a zero diagonal")
        if np.any(dist < 0):
            raise SpaceError("distances must be nonnegative")
        if not np.array_equal(dist, dist.T):
            raise SpaceError("distance matrix is not symmetric")
        ids = tuple(str(i) for i in self.ids) if len(self.ids) else tuple(str(i) for i in range(n))
        if len(ids) != n:
            raise SpaceError("ids length does not match number of points")
        dist.setflags(write=False)
        weights.setflags(write=False)
        object.__setattr__(self, "dist", dist)
        object.__setattr__(self, "weights", weights)
        object.__setattr__(self, "ids", ids)

    # -- constructors -----------------------------------------------------

    @classmethod
    def from_coords(cls, coords, weights=None, snowflake: float = 1.0, ids=None, check=True):
        """Euclidean metric on coordinates, optionally snowflaked to ``d**snowflake``."""
        coords = np.asarray(coords, dtype=np.float64)
        if coords.ndim == 1:
            coords = coords[:, None]
        if not 0 < snowflake <= 1:
            raise SpaceError("snowflake exponent must lie in (0, 1]")
        dist = cdist(coords, coords)
        if snowflake != 1.0:
            dist = dist**snowflake
        n = coords.shape[0]
        if weights is None:
            weights = np.full(n, 1.0 / n)
        space = cls(dist, weights, ids=tuple(ids) if ids is not None else (), coords=coords)
        if check:
            space.check_triangle()
        return space

    @classmethod
    def from_matrix(cls, dist, weights, ids=None, check=True):
        space = cls(np.asarray(dist, dtype=np.float64), weights, ids=tuple(ids) if ids is not None else ())
        if check:
            space.check_triangle()
        return space

    @classmethod
    def from_graph(cls, n: int, edges: Sequence, weights, ids=None):
        """Shortest-path metric of an undirected graph with positive edge lengths."""
        edges = np.asarray(edges, dtype=np.float64).reshape(-1, 3)
        u = edges[:, 0].astype(np.int64)
        v = edges[:, 1].astype(np.int64)
        length = edges[:, 2]
        if np.any(length <= 0):
            raise SpaceError("edge lengths must be positive")
        if np.any((u < 0) | (u >= n) | (v < 0) | (v >= n)):
            raise SpaceError("edge endpoint out of range")
        # duplicate edges: keep the shortest
        shortest = {}
        for a, b, ell in zip(u.tolist(), v.tolist(), length.tolist()):
            key = (min(a, b), max(a, b))
            shortest[key] = min(shortest.get(key, math.inf), ell)
        rows = [a for a, _ in shortest]
        cols = [b for _, b in shortest]
        graph = coo_matrix((list(shortest.values()), (rows, cols)), shape=(n, n)).tocsr()
        dist = shortest_path(graph, method="D", directed=False)
        if not np.all(np.isfinite(dist)):
            raise SpaceError("graph is not connected")
        dist = np.minimum(dist, dist.T)
        return cls(dist, weights, ids=tuple(ids) if ids is not None else ())

    # -- basic geometry ---------------------------------------------------

    @property
    def n(self) -> int:
        return self.dist.shape[0]

    @property
    def total_mass(self) -> float:
        return float(self.weights.sum())

    @property
    def diam(self) -> float:
        return float(self.dist.max())

    def check_triangle(self, tol: float = TRIANGLE_TOL) -> None:
        worst = triangle_violation(self.dist)
        if worst > tol:
            raise SpaceError(f"triangle inequality violated by {worst:.3g}")

    def ball(self, center: int, r: float) -> np.ndarray:
        """Boolean mask of the open ball ``B(center, r)``."""
        return self.dist[self._index(center)] < r

    def volume(self, center: int, r: float) -> float:
        return volume(self, center, r)

    def integrate(self, f) -> float:
        return float(np.dot(self.weights, np.asarray(f, dtype=np.float64)))

    def inner(self, f, g) -> float:
        return float(np.dot(self.weights * np.asarray(f, dtype=np.float64), np.asarray(g, dtype=np.float64)))

    def lp_norm(self, f, p: float) -> float:
        f = np.abs(np.asarray(f, dtype=np.float64))
        if math.isinf(p):
            return float(f.max()) if f.size else 0.0
        return float(np.dot(self.weights, f**p) ** (1.0 / p))

    def sorted_rows(self):
        """Per-point distance order, sorted distances and cumulative masses (cached)."""
        if "order" not in self._sorted:
            order = np.argsort(self.dist, axis=1, kind="stable")
            dsorted = np.take_along_axis(self.dist, order, axis=1)
            cmass = np.cumsum(self.weights[order], axis=1)
            self._sorted.update(order=order, dsorted=dsorted, cmass=cmass)
        return self._sorted["order"], self._sorted["dsorted"], self._sorted["cmass"]

    def volumes(self, centers, radii) -> np.ndarray:
        """Vectorised ``V(c, r)`` for paired arrays of centers and radii."""
        _, dsorted, cmass = self.sorted_rows()
        centers = np.asarray(centers, dtype=np.int64)
        radii = np.asarray(radii, dtype=np.float64)
        centers, radii = np.broadcast_arrays(centers, radii)
        flat_c = centers.ravel()
        flat_r = radii.ravel()
        out = np.empty(flat_r.shape, dtype=np.float64)
        for c in np.unique(flat_c):
            sel = flat_c == c
            m = np.searchsorted(dsorted[c], flat_r[sel], side="left")
            out[sel] = np.concatenate([[0.0], cmass[c]])[m]
        return out.reshape(radii.shape)

    def volumes_row(self, center: int, radii) -> np.ndarray:
        """``V(center, r)`` for an array of radii around one center."""
        _, dsorted, cmass = self.sorted_rows()
        radii = np.asarray(radii, dtype=np.float64)
        m = np.searchsorted(dsorted[center], radii, side="left")
        padded = np.concatenate([[0.0], cmass[center]])
        return padded[m]

    def pair_volume(self) -> np.ndarray:
        """Matrix ``V(x, y) = mu(B(x, d(x, y)))`` (open ball, so it excludes ``y``)."""
        order, dsorted, cmass = self.sorted_rows()
        n = self.n
        out = np.empty((n, n))
        padded = np.concatenate([np.zeros((n, 1)), cmass], axis=1)
        for x in range(n):
            m = np.searchsorted(dsorted[x], self.dist[x], side="left")
            out[x] = padded[x, m]
        return out

    def _index(self, center) -> int:
        c = int(center)
        if not 0 <= c < self.n:
            raise SpaceError(f"unknown point id {center}")
        return c


def volume(space: MetricMeasureSpace, center: int, r: float) -> float:
    """Mass of the open ball ``B(center, r)``."""
    if r < 0:
        raise SpaceError("radius must be nonnegative")
    c = space._index(center)
    return float(space.weights[space.dist[c] < r].sum())


# -- loading ---------------------------------------------------------------


def _read_csv(path: Path):
    try:
        with open(path, newline="") as fh:
            rows = [row for row in csv.reader(fh) if row and any(cell.strip() for cell in row)]
    except OSError as exc:
        raise SpaceError(f"cannot read {path}: {exc}") from exc
    if not rows:
        raise SpaceError(f"{path}: empty file")
    return [c.strip() for c in rows[0]], rows[1:]


def _float(cell: str, path, line: int) -> float:
    try:
        return float(cell)
    except ValueError:
        raise SpaceError(f"{path}:{line}: not a number: {cell!r}") from None


def load_space(path, format: str = "coords", weights_path=None, snowflake: float = 1.0) -> MetricMeasureSpace:
    """Load a space from disk.

    Formats
    -------
    coords
        CSV with header ``id,x1,...,xD,weight``.
    matrix
        JSON ``{"weights": [...], "dist": [[...], ...]}`` (optional ``"ids"``).
    graph
        CSV edge list ``u,v,length`` plus a node CSV ``id,weight``.  The node
        file defaults to ``<stem>.nodes.csv`` next to the edge file.
    """
    path = Path(path)
    if not path.exists():
        raise SpaceError(f"no such file: {path}")
    if format == "coords":
        header, rows = _read_csv(path)
        if len(header) < 3 or header[0] != "id" or header[-1] != "weight":
            raise SpaceError(f"{path}: header must be id,x1..xD,weight")
        dim = len(header) - 2
        ids, coords, weights = [], [], []
        for line, row in enumerate(rows, start=2):
            if len(row) != dim + 2:
                raise SpaceError(f"{path}:{line}: expected {dim + 2} fields")
            ids.append(row[0].strip())
            coords.append([_float(c, path, line) for c in row[1:-1]])
            weights.append(_float(row[-1], path, line))
        if np.any(np.asarray(weights) <= 0):
            raise SpaceError(f"{path}: nonpositive weight")
        return MetricMeasureSpace.from_coords(np.array(coords), np.array(weights), snowflake=snowflake, ids=ids)
    if format == "matrix":
        try:
            data = json.loads(path.read_text())
            dist = np.asarray(data["dist"], dtype=np.float64)
            weights = np.asarray(data["weights"], dtype=np.float64)
        except (ValueError, KeyError, TypeError) as exc:
            raise SpaceError(f"{path}: malformed matrix file ({exc})") from exc
        if snowflake != 1.0:
            dist = dist**snowflake
        return MetricMeasureSpace.from_matrix(dist, weights, ids=data.get("ids"))
    if format == "graph":
        node_path = Path(weights_path) if weights_path else path.with_name(path.stem + ".nodes.csv")
        header, rows = _read_csv(node_path)
        if header != ["id", "weight"]:
            raise SpaceError(f"{node_path}: header must be id,weight")
        ids = [row[0].strip() for row in rows]
        weights = [_float(row[1], node_path, line) for line, row in enumerate(rows, start=2)]
        index = {pid: i for i, pid in enumerate(ids)}
        header, rows = _read_csv(path)
        if header != ["u", "v", "length"]:
            raise SpaceError(f"{path}: header must be u,v,length")
        edges = []
        for line, row in enumerate(rows, start=2):
            if len(row) != 3:
                raise SpaceError(f"{path}:{line}: expected 3 fields")
            try:
                u, v = index[row[0].strip()], index[row[1].strip()]
            except KeyError as exc:
                raise SpaceError(f"{path}:{line}: unknown node {exc}") from None
            edges.append((u, v, _float(row[2], path, line)))
        space = MetricMeasureSpace.from_graph(len(ids), edges, weights, ids=ids)
        if snowflake != 1.0:
            space = MetricMeasureSpace.from_matrix(space.dist**snowflake, space.weights, ids=space.ids)
        return space
    raise SpaceError(f"unknown format {format!r}")


# -- doubling profile ------------------------------------------------------


@dataclass(frozen=True)
class SpaceProfile:
    """Empirical doubling envelope of a finite space.

    ``C_dbl`` is the largest ``V(x, 2r) / V(x, r)`` over sampled centers and
    every radius in the window; ``n = log2 C_dbl``.  ``n0_est`` is the smallest
    exponent with ``V(x, lam r) <= C_dbl lam**n0_est V(x, r)`` on the sampled
    triples, so it is an upper envelope of the true infimal exponent.
    """

    C_dbl: float
    n: float
    n0_est: float
    N0_est: int
    G0_est: float
    centers: tuple = ()
    r_min: float = 0.0
    r_max: float = math.inf

    def to_dict(self):
        return {
            "C_dbl": self.C_dbl,
            "n": self.n,
            "n0_est": self.n0_est,
            "N0_est": self.N0_est,
            "G0_est": self.G0_est,
            "r_min": float(self.r_min),
            "r_max": None if math.isinf(self.r_max) else float(self.r_max),
        }


def _interval_radii(drow: np.ndarray, r_min: float, r_max: float) -> np.ndarray:
    """One representative radius per interval on which ``V(x, r)`` and ``V(x, 2r)`` are constant."""
    breaks = np.unique(np.concatenate([drow, drow / 2.0]))
    breaks = breaks[breaks > 0]
    mids = np.concatenate([(breaks[:-1] + breaks[1:]) / 2.0, [breaks[-1] * 1.5] if breaks.size else []])
    if breaks.size:
        mids = np.concatenate([[breaks[0] / 2.0], mids])
    radii = mids[(mids >= r_min) & (mids <= r_max)]
    if r_min > 0 and r_min <= r_max:
        radii = np.concatenate([[r_min], radii])
    return radii


def _greedy_cover_count(dist_sub: np.ndarray, radius: float) -> int:
    remaining = np.ones(dist_sub.shape[0], dtype=bool)
    count = 0
    while remaining.any():
        i = int(np.argmax(remaining))
        remaining &= dist_sub[i] >= radius
        count += 1
    return count


def doubling_profile(
    space: MetricMeasureSpace,
    sample_count: int = 256,
    seed: int = 0,
    r_min: float = 0.0,
    r_max: float = math.inf,
    lambdas=None,
    cover_radii_per_center: int = 6,
) -> SpaceProfile:
    """Estimate doubling constants from sampled centers.

    For each sampled center every radius in ``[r_min, r_max]`` is scanned
    exactly (the ball masses are step functions), so ``C_dbl`` is the true
    supremum for those centers.  ``r_min`` excludes atomic scales where a
    finite cloud is not doubling in any useful sense.
    """
    if sample_count < 1:
        raise SpaceError("sample_count must be >= 1")
    n = space.n
    if n == 1:
        return SpaceProfile(1.0, 0.0, 0.0, 1, 0.0, centers=(0,), r_min=r_min, r_max=r_max)
    rng = np.random.default_rng(seed)
    if sample_count >= n:
        centers = np.arange(n)
    else:
        centers = np.sort(rng.choice(n, size=sample_count, replace=False))
    if lambdas is None:
        lambdas = 2.0 ** (np.arange(1, 13) / 2.0)
    lambdas = np.asarray(lambdas, dtype=np.float64)

    c_dbl = 1.0
    per_center = []
    for x in centers:
        radii = _interval_radii(space.dist[x], r_min, r_max)
        if radii.size == 0:
            continue
        v1 = space.volumes_row(x, radii)
        v2 = space.volumes_row(x, 2 * radii)
        ok = v1 > 0
        if ok.any():
            c_dbl = max(c_dbl, float((v2[ok] / v1[ok]).max()))
        per_center.append((x, radii[ok], v1[ok]))
    n_exp = math.log2(c_dbl)

    n0 = 0.0
    for x, radii, v1 in per_center:
        if radii.size == 0:
            continue
        big = np.outer(radii, lambdas)
        vl = space.volumes_row(x, big.ravel()).reshape(big.shape)
        excess = np.log(vl / v1[:, None] / c_dbl) / np.log(lambdas)[None, :]
        # beyond r_max the doubling chain is not controlled by C_dbl
        excess[big > r_max] = -np.inf
        n0 = max(n0, float(excess.max()))

    n0_cover = 1
    for x, radii, _ in per_center:
        if radii.size == 0:
            continue
        picks = np.unique(np.linspace(0, radii.size - 1, cover_radii_per_center).astype(int))
        for r in radii[picks]:
            members = np.flatnonzero(space.dist[x] < r)
            sub = space.dist[np.ix_(members, members)]
            n0_cover = max(n0_cover, _greedy_cover_count(sub, r / 2.0))
    return SpaceProfile(
        C_dbl=c_dbl,
        n=n_exp,
        n0_est=n0,
        N0_est=n0_cover,
        G0_est=math.log2(n0_cover),
        centers=tuple(int(c) for c in centers),
        r_min=r_min,
        r_max=r_max,
    )
