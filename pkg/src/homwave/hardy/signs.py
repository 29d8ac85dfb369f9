"""Random-sign experiments: Khintchine moments, sign operators and kernels."""

from __future__ import annotations

import math

import numpy as np

from ..wavelets import CoefficientField, WaveletBasis, analyze
from .norms import norm_iii, norm_v

__all__ = [
    "random_signs",
    "random_sign_synthesis",
    "sign_isometry_error",
    "khintchine_ratio",
    "khintchine_check",
    "square_function_vs_signs",
    "sign_uniform_bound",
    "cz_kernel",
    "cz_kernel_check",
]


def random_signs(count: int, rng) -> np.ndarray:
    return rng.integers(0, 2, size=count) * 2.0 - 1.0


def random_sign_synthesis(coeffs, signs, basis: WaveletBasis) -> np.ndarray:
    """``T_eps f = sum eps <f, psi> psi`` over wavelets only."""
    c = coeffs.wavelet if isinstance(coeffs, CoefficientField) else np.asarray(coeffs)
    signs = np.asarray(signs, dtype=np.float64)
    if c.shape != (basis.count,) or signs.shape != (basis.count,):
        raise ValueError("coefficients and signs must match the basis")
    return (signs * c) @ basis.values


def sign_isometry_error(f, signs, basis: WaveletBasis) -> float:
    """``| ||T_eps f||_2 - ||P f||_2 |`` with ``P`` the projection onto the wavelet span."""
    cf = analyze(basis, f)
    w = basis.space.weights
    t = random_sign_synthesis(cf, signs, basis)
    pf = cf.wavelet @ basis.values
    return abs(math.sqrt(float(w @ t**2)) - math.sqrt(float(w @ pf**2)))


def khintchine_ratio(lam, q: float, trials: int, rng) -> float:
    """``(E|sum lam w|^q)^(1/q) / ||lam||_2`` over ``trials`` sign draws."""
    lam = np.asarray(lam, dtype=np.float64)
    l2 = float(np.linalg.norm(lam))
    if l2 == 0:
        return 1.0
    omegas = rng.integers(0, 2, size=(trials, lam.size)) * 2.0 - 1.0
    s = np.abs(omegas @ lam)
    return float(np.mean(s**q) ** (1.0 / q) / l2)


def khintchine_check(vectors, trials: int = 2000, q: float = 1.0, seed: int = 0) -> dict:
    """Two-sided constants ``C_low <= ratio <= C_high`` fitted over ``vectors``."""
    rng = np.random.default_rng(seed)
    ratios = np.array([khintchine_ratio(v, q, trials, rng) for v in np.atleast_2d(vectors)])
    lo, hi = float(ratios.min()), float(ratios.max())
    return {
        "q": q,
        "trials": trials,
        "ratio_min": lo,
        "ratio_max": hi,
        "constant": max(hi, 1.0 / lo),
        "ok": bool(np.all(np.isfinite(ratios)) and lo > 0),
    }


def square_function_vs_signs(f, basis: WaveletBasis, trials: int = 200, seed: int = 0, tolerance: float = 1.0) -> dict:
    """Compare ``||(sum |<f,psi>|^2 |psi|^2)^(1/2)||_1`` with sampled ``||T_eps f||_1``.

    The sampled maximum only bounds the true supremum from below, so the
    report flags that the comparison is sampled.
    """
    rng = np.random.default_rng(seed)
    cf = analyze(basis, f)
    lhs = norm_iii(cf, basis)
    w = basis.space.weights
    best = 0.0
    for _ in range(trials):
        t = random_sign_synthesis(cf, random_signs(basis.count, rng), basis)
        best = max(best, float(w @ np.abs(t)))
    return {
        "square_function_l1": lhs,
        "max_sign_l1": best,
        "ratio": lhs / best if best > 0 else (0.0 if lhs == 0 else math.inf),
        "tolerance": tolerance,
        "sampled": True,
        "ok": bool(lhs <= best * (1.0 + tolerance)),
    }


def sign_uniform_bound(f, basis: WaveletBasis, trials: int = 50, seed: int = 0) -> dict:
    """Largest core-ball norm of ``T_eps f`` over sampled signs, relative to that of ``f``."""
    rng = np.random.default_rng(seed)
    cf = analyze(basis, f)
    base = norm_v(cf, basis)
    worst = 0.0
    for _ in range(trials):
        signed = cf.wavelet * random_signs(basis.count, rng)
        worst = max(worst, norm_v(signed, basis))
    return {"base": base, "max_signed": worst, "ratio": worst / base if base > 0 else 0.0}


def cz_kernel(signs, basis: WaveletBasis, levels=None) -> np.ndarray:
    """``K(x, y) = sum eps psi(x) psi(y)`` over wavelets whose level lies in ``levels``."""
    signs = np.asarray(signs, dtype=np.float64)
    sel = np.ones(basis.count, dtype=bool) if levels is None else np.isin(basis.level, list(levels))
    v = basis.values[sel]
    return (v.T * signs[sel]) @ v


def cz_kernel_check(signs, basis: WaveletBasis, levels=None, triples: int = 20000, seed: int = 0) -> dict:
    """Size constant ``sup |K| V(x, y)`` and a smoothness fit on sampled triples.

    Smoothness uses triples with ``0 < d(x, x') <= d(x, y) / 2`` and fits
    ``|K(x,y) - K(x',y)| V(x, y)`` against ``d(x, x') / d(x, y)``.
    """
    space = basis.space
    kern = cz_kernel(signs, basis, levels)
    vol = space.pair_volume()
    off = ~np.eye(space.n, dtype=bool)
    size = float((np.abs(kern) * vol)[off].max())

    rng = np.random.default_rng(seed)
    x = rng.integers(0, space.n, size=triples)
    y = rng.integers(0, space.n, size=triples)
    xp = rng.integers(0, space.n, size=triples)
    dxy = space.dist[x, y]
    dxx = space.dist[x, xp]
    keep = (dxy > 0) & (dxx > 0) & (dxx <= dxy / 2)
    x, y, xp, dxy, dxx = x[keep], y[keep], xp[keep], dxy[keep], dxx[keep]
    diff = np.abs(kern[x, y] - kern[xp, y]) * vol[x, y]
    t = dxx / dxy
    use = diff > 0
    exponent, constant = None, None
    if use.sum() >= 2 and np.unique(t[use]).size >= 3:
        exponent = float(np.polyfit(np.log(t[use]), np.log(diff[use]), 1)[0])
        constant = float((diff[use] * t[use] ** (-exponent)).max())
    return {
        "size_constant": size,
        "smooth_exponent": exponent,
        "smooth_constant": constant,
        "triples": int(keep.sum()),
        "ok": bool(math.isfinite(size) and (constant is None or math.isfinite(constant))),
    }
