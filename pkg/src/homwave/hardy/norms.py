"""Square-function norms of wavelet coefficient fields.

Each norm is the weighted L1 norm of a pointwise square function built from
the wavelet coefficients; coarse coefficients never enter.
"""

from __future__ import annotations

import numpy as np

from ..wavelets import CoefficientField, WaveletBasis

__all__ = [
    "square_function_iii",
    "square_function_iv",
    "square_function_v",
    "norm_iii",
    "norm_iv",
    "norm_v",
    "coarse_energy",
    "phi",
]


def _coeffs(coeffs, basis: WaveletBasis) -> np.ndarray:
    c = coeffs.wavelet if isinstance(coeffs, CoefficientField) else np.asarray(coeffs)
    if c.shape != (basis.count,):
        raise ValueError(f"expected {basis.count} wavelet coefficients, got shape {c.shape}")
    return np.abs(c) ** 2


def _cube_indicator_weights(basis: WaveletBasis) -> np.ndarray:
    """Rows ``chi_Q / mu(Q)`` for the cube of each wavelet."""
    if "cube_rows" not in basis._cache:
        rows = np.zeros((basis.count, basis.space.n))
        for k in np.unique(basis.level):
            sel = np.nonzero(basis.level == k)[0]
            cube = basis.system.cube_of[int(k)]
            rows[sel] = cube[None, :] == basis.alpha[sel][:, None]
        basis._cache["cube_rows"] = rows / basis.cube_mass()[:, None]
    return basis._cache["cube_rows"]


def square_function_iii(coeffs, basis: WaveletBasis) -> np.ndarray:
    return np.sqrt(_coeffs(coeffs, basis) @ basis.values**2)


def square_function_iv(coeffs, basis: WaveletBasis) -> np.ndarray:
    return np.sqrt(_coeffs(coeffs, basis) @ _cube_indicator_weights(basis))


def square_function_v(coeffs, basis: WaveletBasis) -> np.ndarray:
    """``(sum |a|^2 R^2)^(1/2)`` with ``R = chi_W / sqrt(mu(Q))``; this is ``phi_S``."""
    return np.sqrt(_coeffs(coeffs, basis) @ basis.core_functions() ** 2)


phi = square_function_v


def norm_iii(coeffs, basis: WaveletBasis) -> float:
    return float(basis.space.weights @ square_function_iii(coeffs, basis))


def norm_iv(coeffs, basis: WaveletBasis) -> float:
    return float(basis.space.weights @ square_function_iv(coeffs, basis))


def norm_v(coeffs, basis: WaveletBasis) -> float:
    return float(basis.space.weights @ square_function_v(coeffs, basis))


def coarse_energy(coeffs: CoefficientField) -> float:
    return float(np.sum(np.abs(coeffs.coarse) ** 2))
