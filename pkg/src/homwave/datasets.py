"""Reference point clouds and writers for the on-disk space formats."""

from __future__ import annotations

import csv
import json
from pathlib import Path

import numpy as np
from scipy.sparse.csgraph import connected_components
from scipy.spatial.distance import cdist

from .space import MetricMeasureSpace

__all__ = [
    "grid_1d",
    "grid_2d",
    "snowflake_grid_1d",
    "random_geometric_graph",
    "reference_space",
    "write_coords",
    "write_matrix",
    "write_graph",
]


def grid_1d(n: int = 1024) -> MetricMeasureSpace:
    """``n`` equispaced points on [0, 1] with uniform weights ``1/n``."""
    x = np.linspace(0.0, 1.0, n) if n > 1 else np.zeros(1)
    return MetricMeasureSpace.from_coords(x, np.full(n, 1.0 / n))


def grid_2d(m: int = 32) -> MetricMeasureSpace:
    """``m x m`` grid on the unit square, uniform weights."""
    t = np.linspace(0.0, 1.0, m)
    xx, yy = np.meshgrid(t, t, indexing="ij")
    coords = np.column_stack([xx.ravel(), yy.ravel()])
    return MetricMeasureSpace.from_coords(coords, np.full(m * m, 1.0 / (m * m)))


def snowflake_grid_1d(n: int = 1024, eps: float = 0.7) -> MetricMeasureSpace:
    """1D grid under the snowflaked metric ``|x - y|**eps``."""
    x = np.linspace(0.0, 1.0, n)
    return MetricMeasureSpace.from_coords(x, np.full(n, 1.0 / n), snowflake=eps)


def _rgg_edges(coords: np.ndarray, radius: float):
    d = cdist(coords, coords)
    iu, ju = np.nonzero(np.triu(d < radius, k=1))
    return [(int(i), int(j), float(d[i, j])) for i, j in zip(iu, ju)]


def random_geometric_graph(n: int = 500, radius: float = 0.1, seed: int = 0):
    """Random geometric graph on the unit square with Euclidean edge lengths.

    The radius is grown by 10% steps until the graph is connected, so the
    returned space is always a genuine metric space.  Returns the space and
    the edge list ``(u, v, length)``.
    """
    rng = np.random.default_rng(seed)
    coords = rng.random((n, 2))
    while True:
        edges = _rgg_edges(coords, radius)
        adj = np.zeros((n, n), dtype=bool)
        for u, v, _ in edges:
            adj[u, v] = adj[v, u] = True
        ncomp, _ = connected_components(adj, directed=False)
        if ncomp == 1:
            break
        radius *= 1.1
    space = MetricMeasureSpace.from_graph(n, edges, np.full(n, 1.0 / n))
    return space, edges


def reference_space(name: str) -> MetricMeasureSpace:
    """The four acceptance spaces: ``grid1d``, ``grid2d``, ``snowflake``, ``rgg``."""
    if name == "grid1d":
        return grid_1d(1024)
    if name == "grid2d":
        return grid_2d(32)
    if name == "snowflake":
        return snowflake_grid_1d(1024, 0.7)
    if name == "rgg":
        return random_geometric_graph(500)[0]
    raise KeyError(name)


def _fmt(x: float) -> str:
    return repr(float(x))


def write_coords(path, coords, weights, ids=None) -> Path:
    path = Path(path)
    coords = np.asarray(coords, dtype=np.float64)
    if coords.ndim == 1:
        coords = coords[:, None]
    ids = ids if ids is not None else range(coords.shape[0])
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["id"] + [f"x{j + 1}" for j in range(coords.shape[1])] + ["weight"])
        for pid, row, wt in zip(ids, coords, weights):
            w.writerow([pid] + [_fmt(c) for c in row] + [_fmt(wt)])
    return path


def write_matrix(path, dist, weights) -> Path:
    path = Path(path)
    path.write_text(json.dumps({"weights": [float(w) for w in weights], "dist": np.asarray(dist).tolist()}))
    return path


def write_graph(path, edges, weights, ids=None) -> Path:
    """Write ``path`` (edges) and ``<stem>.nodes.csv`` (node weights)."""
    path = Path(path)
    ids = list(ids) if ids is not None else [str(i) for i in range(len(weights))]
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["u", "v", "length"])
        for u, v, ell in edges:
            w.writerow([ids[u], ids[v], _fmt(ell)])
    with open(path.with_name(path.stem + ".nodes.csv"), "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["id", "weight"])
        for pid, wt in zip(ids, weights):
            w.writerow([pid, _fmt(wt)])
    return path
