"""Atoms and molecules on a finite cloud."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from ..space import MetricMeasureSpace

__all__ = ["Atom", "make_atom", "validate_atom", "validate_molecule", "annulus_constants"]

CANCEL_TOL = 1e-10
SIZE_RTOL = 1e-12


@dataclass
class Atom:
    values: np.ndarray
    center: int
    radius: float
    q: float

    @property
    def ball(self):
        return (self.center, self.radius)


def _lq(space, f, q):
    return space.lp_norm(f, q)


def _size_exponent(q: float) -> float:
    return -1.0 if math.isinf(q) else 1.0 / q - 1.0


def make_atom(space: MetricMeasureSpace, ball, q: float = math.inf, seed: int = 0) -> Atom:
    """Random zero-mean function on ``ball`` scaled to saturate the size bound."""
    center, radius = int(ball[0]), float(ball[1])
    if not q > 1:
        raise ValueError("q must exceed 1")
    inside = space.ball(center, radius)
    if inside.sum() < 2:
        raise ValueError("an atom needs a ball holding at least two points")
    rng = np.random.default_rng(seed)
    f = np.zeros(space.n)
    f[inside] = rng.standard_normal(int(inside.sum()))
    w = space.weights[inside]
    mass = float(w.sum())
    f[inside] -= float(np.dot(w, f[inside])) / mass
    norm = _lq(space, f, q)
    if norm == 0:
        raise ValueError("degenerate draw")
    f *= mass ** _size_exponent(q) / norm
    return Atom(values=f, center=center, radius=radius, q=q)


def validate_atom(space: MetricMeasureSpace, f, ball, q: float, tol: float = CANCEL_TOL) -> dict:
    f = np.asarray(f, dtype=np.float64)
    center, radius = int(ball[0]), float(ball[1])
    inside = space.ball(center, radius)
    mass = float(space.weights[inside].sum())
    norm = _lq(space, f, q)
    bound = mass ** _size_exponent(q) if mass > 0 else math.inf
    mean = float(np.dot(space.weights, f))
    support = bool(np.all(f[~inside] == 0))
    size = bool(norm <= bound * (1 + SIZE_RTOL))
    cancel = bool(abs(mean) <= tol)
    return {
        "support": support,
        "size": size,
        "cancellation": cancel,
        "norm": norm,
        "bound": bound,
        "mean": mean,
        "ok": support and size and cancel,
    }


def annulus_constants(space: MetricMeasureSpace, f, ball, q: float) -> np.ndarray:
    """Smallest ``eta_k`` (k = 1, 2, ...) meeting the annulus bounds for ``f``.

    The sequence stops at the first annulus beyond the farthest cloud point.
    """
    f = np.asarray(f, dtype=np.float64)
    center, radius = int(ball[0]), float(ball[1])
    mass = float(space.weights[space.ball(center, radius)].sum())
    d = space.dist[center]
    far = float(d.max())
    expo = _size_exponent(q)
    out = []
    k = 1
    while True:
        ring = (d < 2.0**k * radius) & (d >= 2.0 ** (k - 1) * radius)
        piece = np.where(ring, f, 0.0)
        out.append(_lq(space, piece, q) / (2.0 ** (k * expo) * mass**expo))
        if 2.0 ** (k - 1) * radius > far:
            break
        k += 1
    return np.asarray(out)


def validate_molecule(
    space: MetricMeasureSpace,
    f,
    ball,
    q: float,
    eta_seq: Optional[Sequence[float]] = None,
    tol: float = CANCEL_TOL,
) -> dict:
    """Check the three molecule conditions.

    Without ``eta_seq`` the measured annulus constants are used, so the decay
    condition holds by construction and the informative output is
    ``sum_k_eta`` together with ``size_ratio`` (norm over the size bound; a
    value above 1 is the multiplicative constant a rescaled molecule needs).
    """
    f = np.asarray(f, dtype=np.float64)
    center, radius = int(ball[0]), float(ball[1])
    mass = float(space.weights[space.ball(center, radius)].sum())
    if mass == 0:
        raise ValueError("ball holds no mass")
    bound = mass ** _size_exponent(q)
    norm = _lq(space, f, q)
    measured = annulus_constants(space, f, ball, q)
    ks = np.arange(1, measured.size + 1)
    if eta_seq is None:
        decay = True
    else:
        eta = np.zeros(measured.size)
        given = np.asarray(eta_seq, dtype=np.float64)[: measured.size]
        eta[: given.size] = given
        decay = bool(np.all(measured <= eta * (1 + SIZE_RTOL)))
    mean = float(np.dot(space.weights, f))
    size = bool(norm <= bound * (1 + SIZE_RTOL))
    cancel = bool(abs(mean) <= tol)
    return {
        "size": size,
        "decay": decay,
        "cancellation": cancel,
        "norm": norm,
        "bound": bound,
        "size_ratio": norm / bound,
        "mean": mean,
        "eta_measured": measured.tolist(),
        "sum_k_eta": float(np.dot(ks, measured)),
        "ok": size and decay and cancel,
    }
