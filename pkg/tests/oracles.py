"""Independent reference computations used to cross-check the library.

Everything here is written from the definitions with plain loops or with
scipy routines, never by calling the code under test.
"""

from __future__ import annotations

import itertools
import math
from fractions import Fraction

import numpy as np
import scipy.linalg


def ball_volume(dist, weights, center, r):
    return sum(w for d, w in zip(dist[center], weights) if d < r)


def is_separated(dist, pts, r):
    return all(dist[a][b] >= r for a, b in itertools.combinations(pts, 2))


def is_maximal(dist, pts, r):
    """No cloud point could be added without breaking separation."""
    chosen = set(int(p) for p in pts)
    return all(any(dist[x][p] < r for p in chosen) for x in range(len(dist)) if x not in chosen)


def brute_max_separated_count(dist, r):
    """Largest size over all r-separated subsets (exhaustive; tiny inputs only)."""
    n = len(dist)
    best = 0
    for size in range(1, n + 1):
        if any(is_separated(dist, c, r) for c in itertools.combinations(range(n), size)):
            best = size
        else:
            break
    return best


def neumann_coefficient(j):
    """Exact j-th coefficient of (1 - t)^(-1/2): prod_{i<j} (2i + 1) / (2i + 2)."""
    c = Fraction(1)
    for i in range(j):
        c *= Fraction(2 * i + 1, 2 * i + 2)
    return c


def inv_sqrt_scipy(m):
    return np.real(scipy.linalg.inv(scipy.linalg.sqrtm(m)))


def hl_maximal_brute(f, dist, weights):
    """sup over open balls B(c, r) containing x of the |f| average; r ranges over all breakpoints."""
    n = len(weights)
    g = [abs(v) for v in f]
    best = [0.0] * n
    for c in range(n):
        radii = sorted(set(dist[c]))
        # every distinct open ball around c is B(c, d + tiny) for a distance value d
        for j, d in enumerate(radii):
            r = radii[j + 1] if j + 1 < len(radii) else d + 1.0
            members = [y for y in range(n) if dist[c][y] < r]
            mass = sum(weights[y] for y in members)
            avg = sum(weights[y] * g[y] for y in members) / mass
            for y in members:
                best[y] = max(best[y], avg)
    return np.array(best)


def dyadic_maximal_brute(f, cube_of, weights):
    """sup over cubes containing x of the |f| average, cubes given as label arrays per level."""
    n = len(weights)
    g = np.abs(np.asarray(f, dtype=float))
    best = np.zeros(n)
    for labels in cube_of.values():
        for lab in set(labels.tolist()):
            members = [x for x in range(n) if labels[x] == lab]
            mass = sum(weights[x] for x in members)
            avg = sum(weights[x] * g[x] for x in members) / mass
            for x in members:
                best[x] = max(best[x], avg)
    return best


def _transition(dist, children, parents, scale):
    """Row-stochastic matrix of the random parent rule (uniform within 2 scale, forced within scale/3)."""
    t = np.zeros((len(children), len(parents)))
    for i, c in enumerate(children):
        forced = [j for j, p in enumerate(parents) if dist[c][p] < scale / 3.0]
        if forced:
            t[i, forced[0]] = 1.0
            continue
        elig = [j for j, p in enumerate(parents) if dist[c][p] < 2.0 * scale]
        for j in elig:
            t[i, j] = 1.0 / len(elig)
    return t


def exact_splines(dist, nets, delta):
    """Exact probabilities P(x in Q^k_alpha) under independent per-level random choices.

    ``nets`` maps level to sorted point lists.  The finest cell of every cloud
    point is drawn by the same rule as parents.
    """
    n = len(dist)
    levels = sorted(nets)
    top = levels[-1]
    prob = {top: _transition(dist, list(range(n)), nets[top], delta**top).T}
    for k in reversed(levels[:-1]):
        step = _transition(dist, nets[k + 1], nets[k], delta**k)
        prob[k] = step.T @ prob[k + 1]
    return prob


def khintchine_exact(lam, q):
    """(E|sum lam w|^q)^(1/q) / ||lam||_2 over all sign patterns."""
    lam = np.asarray(lam, dtype=float)
    total = 0.0
    for signs in itertools.product((-1.0, 1.0), repeat=lam.size):
        total += abs(float(np.dot(signs, lam))) ** q
    return (total / 2**lam.size) ** (1.0 / q) / float(np.linalg.norm(lam))


def subspace_gap(a, b, weights):
    """Largest principal angle between row spans of ``a`` and ``b`` in the weighted inner product."""
    s = np.sqrt(weights)
    return float(np.max(scipy.linalg.subspace_angles((a * s).T, (b * s).T)))


def is_interval(points_sorted_positions):
    p = sorted(points_sorted_positions)
    return p == list(range(p[0], p[-1] + 1))


def molecule_annuli(f, dist_row, weights, radius, q):
    """Annulus L^q norms of f over {2^(j-1) r <= d < 2^j r}, j = 1, 2, ... up to the farthest point."""
    out = []
    j = 1
    far = max(dist_row)
    while True:
        total = 0.0
        for d, w, v in zip(dist_row, weights, f):
            if 2.0 ** (j - 1) * radius <= d < 2.0**j * radius:
                total += w * abs(v) ** q
        out.append(total ** (1.0 / q))
        if 2.0 ** (j - 1) * radius > far:
            break
        j += 1
    return out


def log2_floor(x):
    return math.floor(math.log2(x))
