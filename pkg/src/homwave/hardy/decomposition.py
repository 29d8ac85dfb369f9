"""Splitting a wavelet expansion into molecules by stopping on level sets.

Given wavelet coefficients ``a``, the core-ball square function ``phi`` is
thresholded at powers of two.  A coefficient's cube is "charged" at height
``2**k`` when the level set ``{phi > 2**k}`` fills more than ``1 / (2 C2)`` of
it; each coefficient goes to the last height at which its cube is charged,
grouped under the maximal charged cube containing it.  Each group sums to a
multiple of a molecule.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import List

import numpy as np

from ..io import write_table
from ..wavelets import CoefficientField, WaveletBasis
from .atoms import validate_molecule
from .norms import square_function_v

__all__ = ["Piece", "AtomicDecomposition", "decompose", "core_ball_constant", "molecule_report", "save_decomposition"]

BALL_FACTOR = 8.0


@dataclass
class Piece:
    height: int
    level: int
    center: int
    radius: float
    lam: float
    indices: np.ndarray
    molecule: np.ndarray


@dataclass
class AtomicDecomposition:
    pieces: List[Piece]
    total: float
    phi_l1: float
    C2: float
    heights: List[int] = field(default_factory=list)
    level_set_measures: List[float] = field(default_factory=list)

    @property
    def constant(self) -> float:
        """``sum lambda / ||phi||_1``."""
        return self.total / self.phi_l1 if self.phi_l1 > 0 else 0.0

    def synthesize(self) -> np.ndarray:
        if not self.pieces:
            return None
        return sum(p.lam * p.molecule for p in self.pieces)

    def partition_ok(self, nonzero: np.ndarray) -> bool:
        if not self.pieces:
            return nonzero.size == 0
        joined = np.concatenate([p.indices for p in self.pieces])
        return joined.size == np.unique(joined).size and np.array_equal(np.sort(joined), np.sort(nonzero))


def core_ball_constant(basis: WaveletBasis) -> float:
    """Measured ``C2 = max mu(Q) / mu(W)`` over all wavelets."""
    w_mass = basis.core_masks().astype(np.float64) @ basis.space.weights
    return float(max(1.0, (basis.cube_mass() / w_mass).max()))


def _ancestors(basis: WaveletBasis, k: int, alpha: int):
    """``(level, alpha)`` of every strictly coarser cube containing ``Q^k_alpha``."""
    cube_of = basis.system.cube_of
    return [(j, int(cube_of[j][alpha])) for j in range(basis.k_min, k)]


def decompose(coeffs, basis: WaveletBasis) -> AtomicDecomposition:
    a = coeffs.wavelet if isinstance(coeffs, CoefficientField) else np.asarray(coeffs)
    if a.shape != (basis.count,):
        raise ValueError("coefficient field does not match the basis")
    space = basis.space
    w = space.weights
    nonzero = np.nonzero(a)[0]
    phi = square_function_v(a, basis)
    phi_l1 = float(w @ phi)
    c2 = core_ball_constant(basis)
    if nonzero.size == 0:
        return AtomicDecomposition([], 0.0, phi_l1, c2)

    mass = basis.cube_mass()
    # lowest height: every nonzero coefficient's core ball sits above it
    floor = np.abs(a[nonzero]) / np.sqrt(mass[nonzero])
    k_low = int(math.floor(math.log2(float(floor.min())))) - 1
    k_high = int(math.ceil(math.log2(float(phi.max()))))

    cube_rows = np.zeros((basis.count, space.n), dtype=bool)
    for k in np.unique(basis.level):
        sel = basis.level == k
        cube_rows[sel] = basis.system.cube_of[int(k)][None, :] == basis.alpha[sel][:, None]

    def charged(height):
        omega = phi > 2.0**height
        filled = cube_rows.astype(np.float64) @ (w * omega)
        out = np.zeros(basis.count, dtype=bool)
        out[nonzero] = filled[nonzero] > mass[nonzero] / (2.0 * c2)
        return out, float(w @ omega)

    charges, measures = {}, []
    for h in range(k_low, k_high + 2):
        charges[h], m = charged(h)
        measures.append(m)

    pieces: List[Piece] = []
    total = 0.0
    for h in range(k_low, k_high + 1):
        exact = charges[h] & ~charges[h + 1]
        if not exact.any():
            continue
        in_c = np.nonzero(charges[h])[0]
        cubes = {(int(basis.level[i]), int(basis.alpha[i])) for i in in_c}
        maximal = sorted(c for c in cubes if not any(anc in cubes for anc in _ancestors(basis, *c)))
        owner = {}
        for i in np.nonzero(exact)[0]:
            k, al = int(basis.level[i]), int(basis.alpha[i])
            top = next(c for c in [*_ancestors(basis, k, al), (k, al)] if c in cubes and c in maximal)
            owner.setdefault(top, []).append(int(i))
        for (lev, cen) in maximal:
            idx = owner.get((lev, cen))
            if not idx:
                continue
            idx = np.asarray(idx, dtype=np.int64)
            func = a[idx] @ basis.values[idx]
            radius = BALL_FACTOR * basis.delta**lev
            vol = float(w[space.dist[cen] < radius].sum())
            l2 = math.sqrt(float(w @ func**2))
            lam = math.sqrt(vol) * l2
            if lam == 0:
                continue
            pieces.append(Piece(h, lev, cen, radius, lam, idx, func / lam))
            total += lam
    return AtomicDecomposition(
        pieces=pieces,
        total=total,
        phi_l1=phi_l1,
        C2=c2,
        heights=list(range(k_low, k_high + 2)),
        level_set_measures=measures,
    )


def molecule_report(decomposition: AtomicDecomposition, basis: WaveletBasis) -> dict:
    """Molecule conditions for each normalized piece, with the worst size ratio."""
    worst_ratio, worst_sum, ok = 0.0, 0.0, True
    for p in decomposition.pieces:
        rep = validate_molecule(basis.space, p.molecule, (p.center, p.radius), 2.0, tol=1e-8)
        worst_ratio = max(worst_ratio, rep["size_ratio"])
        worst_sum = max(worst_sum, rep["sum_k_eta"])
        ok &= rep["cancellation"] and math.isfinite(rep["sum_k_eta"])
    return {"pieces": len(decomposition.pieces), "max_size_ratio": worst_ratio, "max_sum_k_eta": worst_sum, "ok": bool(ok)}


def save_decomposition(decomposition: AtomicDecomposition, basis: WaveletBasis, path) -> Path:
    """Pieces as JSON plus a binary table of molecule values (one row per piece)."""
    path = Path(path)
    doc = {
        "total": decomposition.total,
        "phi_l1": decomposition.phi_l1,
        "constant": decomposition.constant,
        "C2": decomposition.C2,
        "pieces": [
            {
                "lambda": p.lam,
                "height": p.height,
                "cube": {"k": p.level, "alpha": p.center},
                "ball": {"center": p.center, "radius": p.radius},
                "indices": [
                    {"k": int(basis.level[i]), "alpha": int(basis.alpha[i]), "beta": int(basis.beta[i])} for i in p.indices
                ],
            }
            for p in decomposition.pieces
        ],
    }
    path.write_text(json.dumps(doc, indent=1, sort_keys=True))
    values = np.vstack([p.molecule for p in decomposition.pieces]) if decomposition.pieces else np.zeros((0, basis.space.n))
    write_table(path.with_name(path.stem + ".molecules"), {"kind": "molecules", "pieces": len(decomposition.pieces)}, values)
    return path
