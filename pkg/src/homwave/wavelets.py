"""Orthonormal wavelets built from nested spline spaces.

``V_k`` is the span of the level-``k`` splines.  At each level the normalized
finer splines attached to new net points are projected onto the orthogonal
complement of ``V_k`` and orthonormalized with the inverse square root of
their Gram matrix.  Coarse scaling functions span ``V_{k_min}`` so the finite
expansion is complete.

All inner products are weighted sums over the cloud.  Internally functions are
stored "whitened" (multiplied by ``sqrt(weights)``) so that the weighted inner
product becomes the Euclidean one.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import List, Optional

import numpy as np

from .io import read_table, write_table
from .lattice import DyadicSystem, assign_parents, build_cubes
from .splines import SplineSystem

__all__ = [
    "GramError",
    "GramData",
    "WaveletBasis",
    "CoefficientField",
    "neumann_coefficients",
    "inv_sqrt",
    "gram",
    "build_wavelets",
    "analyze",
    "synthesize",
    "verify_decay",
    "verify_lower_bound",
    "riesz_check",
    "save_basis",
    "load_basis",
]

SINGULAR_RATIO = 1e-10
DEFAULT_TOL = 1e-10
MAX_NEUMANN_TERMS = 2_000_000


class GramError(ValueError):
    """Non-positive-definite input or a Neumann series that fails to converge."""


def neumann_coefficients(count: int) -> np.ndarray:
    """First ``count`` coefficients of ``(1 - t)**(-1/2) = sum p_n t**n``.

    ``p_n = binom(2n, n) / 4**n``, generated by ``p_n = p_{n-1} (2n - 1) / (2n)``.
    """
    p = np.empty(count)
    if count:
        p[0] = 1.0
    for i in range(1, count):
        p[i] = p[i - 1] * (2 * i - 1) / (2 * i)
    return p


def _power_norm(mat: np.ndarray, iters: int = 500) -> float:
    """Spectral norm of a symmetric PSD matrix by power iteration."""
    v = np.ones(mat.shape[0]) / math.sqrt(mat.shape[0])
    v = v + 1e-3 * np.sin(np.arange(mat.shape[0]) + 1.0)
    v /= np.linalg.norm(v)
    lam = 0.0
    for _ in range(iters):
        w = mat @ v
        nw = np.linalg.norm(w)
        if nw == 0:
            return 0.0
        v = w / nw
        if abs(nw - lam) <= 1e-15 * nw:
            lam = nw
            break
        lam = nw
    return float(lam)


def _series_length(rho: float, tol: float) -> int:
    # smallest N with p_N rho^N / (1 - rho) below tol / 10
    if rho <= 0:
        return 1
    if rho >= 1:
        raise GramError("Neumann series does not converge (spectral radius >= 1)")
    p, term, n = 1.0, 1.0, 0
    target = tol / 10.0 * (1.0 - rho)
    while p * term >= target:
        n += 1
        p *= (2 * n - 1) / (2 * n)
        term *= rho
        if n > MAX_NEUMANN_TERMS:
            raise GramError("Neumann series needs too many terms; spectrum too spread")
    return n + 1


def _matrix_series(a: np.ndarray, coeffs: np.ndarray) -> np.ndarray:
    """``sum_n coeffs[n] a**n`` by Paterson-Stockmeyer blocking."""
    m = a.shape[0]
    count = coeffs.size
    step = max(1, int(math.ceil(math.sqrt(count))))
    powers = [np.eye(m)]
    for _ in range(1, step):
        powers.append(powers[-1] @ a)
    jump = powers[-1] @ a
    blocks = int(math.ceil(count / step))
    result = np.zeros((m, m))
    for j in range(blocks - 1, -1, -1):
        chunk = np.zeros((m, m))
        for i, c in enumerate(coeffs[j * step : (j + 1) * step]):
            chunk += c * powers[i]
        result = result @ jump + chunk if j < blocks - 1 else chunk
    return result


def inv_sqrt(matrix, method: str = "eig", tol: float = DEFAULT_TOL, return_info: bool = False):
    """Inverse square root of a symmetric positive definite matrix.

    ``eig`` uses a symmetric eigendecomposition.  ``neumann`` writes
    ``M = c (I - A)`` with ``c = 2 ||M||`` and sums the binomial series of
    ``(I - A)**(-1/2)``, truncated once the tail bound drops below ``tol/10``.
    With ``return_info`` the result is ``(S, info)``.
    """
    m = np.asarray(matrix, dtype=np.float64)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise GramError("matrix must be square")
    if not np.allclose(m, m.T, rtol=0, atol=1e-12 * max(1.0, np.abs(m).max())):
        raise GramError("matrix must be symmetric")
    m = 0.5 * (m + m.T)
    info = {"method": method}
    if method == "eig":
        w, v = np.linalg.eigh(m)
        if w[0] <= 0:
            raise GramError(f"matrix is not positive definite (min eigenvalue {w[0]:.3e})")
        out = (v / np.sqrt(w)) @ v.T
        info["eigenrange"] = (float(w[0]), float(w[-1]))
    elif method == "neumann":
        if np.any(np.diag(m) <= 0):
            raise GramError("matrix is not positive definite")
        norm = _power_norm(m) * (1.0 + 1e-9)
        scale = 2.0 * norm
        a = np.eye(m.shape[0]) - m / scale
        rho = _power_norm(a)
        terms = _series_length(rho, tol)
        for _ in range(6):
            out = _matrix_series(a, neumann_coefficients(terms)) / math.sqrt(scale)
            residual = float(np.abs(out @ m @ out - np.eye(m.shape[0])).max())
            if residual <= max(tol, 10 * tol * np.abs(m).max()):
                break
            terms *= 2
            if terms > MAX_NEUMANN_TERMS:
                raise GramError("Neumann series did not converge within the term cap")
        else:
            raise GramError("Neumann series did not converge; spectrum too spread")
        info.update({"terms": int(terms), "norm": norm, "rho": rho, "residual": residual})
    else:
        raise ValueError(f"unknown method {method!r}")
    out = 0.5 * (out + out.T)
    return (out, info) if return_info else out


@dataclass
class GramData:
    """Gram matrices of one level and their spectral summary."""

    k: int
    M: np.ndarray
    Mtilde: Optional[np.ndarray]
    spectrum_M: tuple
    spectrum_Mtilde: Optional[tuple]
    norm: Optional[float]
    discrepancy: Optional[float]
    ill_conditioned: bool

    def to_dict(self) -> dict:
        return {
            "k": self.k,
            "size_M": int(self.M.shape[0]),
            "size_Mtilde": None if self.Mtilde is None else int(self.Mtilde.shape[0]),
            "spectrum_M": list(self.spectrum_M),
            "spectrum_Mtilde": None if self.spectrum_Mtilde is None else list(self.spectrum_Mtilde),
            "norm": self.norm,
            "discrepancy": self.discrepancy,
            "ill_conditioned": self.ill_conditioned,
        }


def _spectrum(mat):
    w = np.linalg.eigvalsh(mat)
    return float(w[0]), float(w[-1])


def _whitened(splines: SplineSystem, k: int) -> np.ndarray:
    return splines.nested[k] * np.sqrt(splines.space.weights)[None, :]


def _level_pieces(splines: SplineSystem, k: int):
    """Whitened projected family of level ``k`` and its Gram data."""
    nets = splines.nets
    coarse = _whitened(splines, k)
    m_k = (coarse @ coarse.T) / np.sqrt(np.outer(splines.mu[k], splines.mu[k]))
    spec_m = _spectrum(m_k)
    ill = spec_m[0] < SINGULAR_RATIO * spec_m[1]
    if k == nets.k_max:
        return GramData(k, m_k, None, spec_m, None, None, None, bool(ill)), None, None
    new = nets.new_points(k)
    if new.size == 0:
        return GramData(k, m_k, np.zeros((0, 0)), spec_m, None, None, 0.0, bool(ill)), new, None
    fine_pos = nets.position(k + 1)[new]
    fam = _whitened(splines, k + 1)[fine_pos].T / np.sqrt(splines.mu[k + 1][fine_pos])[None, :]
    q, _ = np.linalg.qr(coarse.T)
    projected = fam - q @ (q.T @ fam)
    mt = projected.T @ projected
    mt = 0.5 * (mt + mt.T)
    spec_t = _spectrum(mt)
    ill = ill or spec_t[0] < SINGULAR_RATIO * spec_t[1]
    data = GramData(
        k,
        m_k,
        mt,
        spec_m,
        spec_t,
        spec_t[1],
        float(np.abs(mt - fam.T @ fam).max()),
        bool(ill),
    )
    return data, new, projected


def gram(splines: SplineSystem, k: int) -> GramData:
    """Normalized spline Gram ``M_k`` and projected wavelet Gram at level ``k``."""
    return _level_pieces(splines, k)[0]


@dataclass
class CoefficientField:
    """Wavelet coefficients (aligned with the basis rows) plus coarse coefficients."""

    wavelet: np.ndarray
    coarse: np.ndarray

    def energy(self) -> float:
        return float(np.sum(np.abs(self.wavelet) ** 2) + np.sum(np.abs(self.coarse) ** 2))

    def copy(self) -> "CoefficientField":
        return CoefficientField(self.wavelet.copy(), self.coarse.copy())


@dataclass
class WaveletBasis:
    """Wavelets ``psi^k_{alpha,beta}`` on the cloud.

    Row ``i`` of ``values`` is the wavelet at level ``level[i]`` grouped under
    parent ``alpha[i]`` with center the new net point ``beta[i]``.
    """

    system: DyadicSystem
    values: np.ndarray
    level: np.ndarray
    alpha: np.ndarray
    beta: np.ndarray
    coarse: np.ndarray
    grams: List[GramData] = field(default_factory=list)
    eps0: Optional[float] = None
    excluded_levels: List[int] = field(default_factory=list)
    _cache: dict = field(default_factory=dict, repr=False)

    def __post_init__(self):
        # one memory layout whether built or loaded, so BLAS sums in the same order
        self.values = np.ascontiguousarray(self.values, dtype=np.float64)
        self.coarse = np.ascontiguousarray(self.coarse, dtype=np.float64)

    @property
    def space(self):
        return self.system.space

    @property
    def delta(self) -> float:
        return self.system.nets.delta

    @property
    def k_min(self) -> int:
        return self.system.nets.k_min

    @property
    def k_max(self) -> int:
        return self.system.nets.k_max

    @property
    def count(self) -> int:
        return int(self.values.shape[0])

    def scales(self) -> np.ndarray:
        return self.delta ** self.level.astype(np.float64)

    def cube_mass(self) -> np.ndarray:
        """``mu(Q^k_alpha)`` for each wavelet."""
        if "cube_mass" not in self._cache:
            out = np.empty(self.count)
            for k in np.unique(self.level):
                sel = self.level == k
                pos = self.system.nets.position(int(k))[self.alpha[sel]]
                out[sel] = self.system.cube_masses(int(k))[pos]
            self._cache["cube_mass"] = out
        return self._cache["cube_mass"]

    def core_masks(self, eps0: Optional[float] = None) -> np.ndarray:
        """Indicators of ``W = B(y, eps0 delta**k)``, one row per wavelet."""
        eps0 = self.eps0 if eps0 is None else eps0
        if eps0 is None:
            raise ValueError("eps0 not set; run verify_lower_bound first")
        return self.space.dist[self.beta] < (eps0 * self.scales())[:, None]

    def core_functions(self, eps0: Optional[float] = None) -> np.ndarray:
        """``R = chi_W / sqrt(mu(Q^k_alpha))``, one row per wavelet."""
        return self.core_masks(eps0) / np.sqrt(self.cube_mass())[:, None]

    def matrix(self) -> np.ndarray:
        """All basis functions as rows: wavelets first, then coarse functions."""
        return np.vstack([self.values, self.coarse])

    def orthonormality_error(self) -> float:
        b = self.matrix() * np.sqrt(self.space.weights)[None, :]
        return float(np.abs(b @ b.T - np.eye(b.shape[0])).max())

    def cancellation_errors(self) -> np.ndarray:
        return np.abs(self.values @ self.space.weights)

    def cross_level_error(self, splines: SplineSystem) -> float:
        """Largest ``|<psi, s>|`` between a level-``k`` wavelet and a level-``k`` spline."""
        worst = 0.0
        w = self.space.weights
        for k in np.unique(self.level):
            rows = self.values[self.level == k]
            worst = max(worst, float(np.abs((rows * w) @ splines.nested[int(k)].T).max()))
        return worst

    def analyze(self, f) -> CoefficientField:
        return analyze(self, f)

    def synthesize(self, coeffs: CoefficientField) -> np.ndarray:
        return synthesize(self, coeffs)


def _orthonormal_level(splines, k, method, tol):
    data, new, projected = _level_pieces(splines, k)
    if new is None or new.size == 0:
        return data, None, None
    if data.ill_conditioned:
        return data, new, None
    s = inv_sqrt(data.Mtilde, method=method, tol=tol)
    psi = (projected @ s).T / np.sqrt(splines.space.weights)[None, :]
    # anchor the sign at the wavelet center
    at_center = psi[np.arange(new.size), new]
    psi *= np.where(at_center < 0, -1.0, 1.0)[:, None]
    return data, new, psi


def build_wavelets(
    splines: SplineSystem,
    system: Optional[DyadicSystem] = None,
    method: str = "eig",
    tol: float = DEFAULT_TOL,
    workers: Optional[int] = None,
    lower_bound: bool = True,
) -> WaveletBasis:
    """Wavelet basis over every level of ``splines`` (finest net must be the whole cloud).

    ``system`` supplies the deterministic cubes used for grouping and core
    balls; by default nearest-parent cubes on the same nets.
    """
    nets = splines.nets
    if not nets.finest_is_complete():
        raise ValueError("finest net must contain every cloud point")
    if system is None:
        system = build_cubes(nets, assign_parents(nets, "nearest"))
    levels = list(range(nets.k_min, nets.k_max))
    if workers and workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(lambda k: _orthonormal_level(splines, k, method, tol), levels))
    else:
        results = [_orthonormal_level(splines, k, method, tol) for k in levels]

    rows, lv, al, be, grams, excluded = [], [], [], [], [], []
    for k, (data, new, psi) in zip(levels, results):
        grams.append(data)
        if new is None or new.size == 0:
            continue
        if psi is None:
            excluded.append(k)
            continue
        rows.append(psi)
        lv.append(np.full(new.size, k))
        be.append(new)
        al.append(system.parent_map(k)[new])
    grams.append(_level_pieces(splines, nets.k_max)[0])

    base = _whitened(splines, nets.k_min)
    if base.shape[0] == 1:
        coarse = np.ones((1, splines.space.n)) / math.sqrt(splines.space.total_mass)
    else:
        coarse = inv_sqrt(base @ base.T, method="eig", tol=tol) @ base / np.sqrt(splines.space.weights)[None, :]
    n = splines.space.n
    basis = WaveletBasis(
        system=system,
        values=np.vstack(rows) if rows else np.zeros((0, n)),
        level=np.concatenate(lv).astype(np.int64) if lv else np.zeros(0, dtype=np.int64),
        alpha=np.concatenate(al).astype(np.int64) if al else np.zeros(0, dtype=np.int64),
        beta=np.concatenate(be).astype(np.int64) if be else np.zeros(0, dtype=np.int64),
        coarse=coarse,
        grams=grams,
        excluded_levels=excluded,
    )
    if lower_bound and basis.count:
        verify_lower_bound(basis)
    return basis


def analyze(basis: WaveletBasis, f) -> CoefficientField:
    """Weighted inner products of ``f`` with every basis function."""
    f = np.asarray(f)
    if f.shape != (basis.space.n,):
        raise ValueError(f"expected {basis.space.n} values, got shape {f.shape}")
    wf = f * basis.space.weights
    return CoefficientField(basis.values @ wf, basis.coarse @ wf)


def synthesize(basis: WaveletBasis, coeffs: CoefficientField) -> np.ndarray:
    wav = np.asarray(coeffs.wavelet)
    coarse = np.asarray(coeffs.coarse)
    if wav.shape != (basis.count,) or coarse.shape != (basis.coarse.shape[0],):
        raise ValueError("coefficient field does not match the basis")
    return wav @ basis.values + coarse @ basis.coarse


def verify_decay(basis: WaveletBasis, bins: int = 40, slack: float = 1.05, hoelder_pairs: int = 20000, seed: int = 0) -> dict:
    """Exponential envelope of ``|psi(x)| sqrt(V(y, delta**k))`` in ``t = d(y, x) / delta**k``.

    ``nu_fit`` is the slope of a log-linear fit to per-bin maxima; ``C_fit``
    is the least constant making ``C_fit exp(-nu_fit t)`` dominate every
    sample.  Every sample is then checked against the envelope times
    ``slack``.  A companion fit of difference quotients over pairs closer
    than ``delta**k`` estimates a Hoelder exponent.
    """
    space = basis.space
    scales = basis.scales()
    vol = space.volumes(basis.beta, scales)
    profile = np.abs(basis.values) * np.sqrt(vol)[:, None]
    t = space.dist[basis.beta] / scales[:, None]
    top = float(t.max())
    edges = np.linspace(0.0, top + 1e-12, bins + 1)
    which = np.clip(np.searchsorted(edges, t, side="right") - 1, 0, bins - 1)
    bin_max = np.zeros(bins)
    np.maximum.at(bin_max, which.ravel(), profile.ravel())
    mids = 0.5 * (edges[:-1] + edges[1:])
    use = bin_max > 0
    nu = float(-np.polyfit(mids[use], np.log(bin_max[use]), 1)[0]) if use.sum() >= 2 else 0.0
    c_fit = float((profile * np.exp(nu * t)).max()) if profile.size else 0.0
    envelope = c_fit * np.exp(-nu * t)
    violations = int(np.count_nonzero(profile > slack * envelope))

    rng = np.random.default_rng(seed)
    iu, ju = np.triu_indices(space.n, k=1)
    pd = space.dist[iu, ju]
    q_all, t_all = [], []
    for k in np.unique(basis.level):
        scale = basis.delta ** float(k)
        close = np.nonzero((pd > 0) & (pd <= scale))[0]
        if close.size == 0:
            continue
        if close.size > hoelder_pairs:
            close = rng.choice(close, size=hoelder_pairs, replace=False)
        rows = np.nonzero(basis.level == k)[0]
        diff = np.abs(basis.values[np.ix_(rows, iu[close])] - basis.values[np.ix_(rows, ju[close])])
        diff *= np.sqrt(vol[rows])[:, None]
        q_all.append(diff.max(axis=0))
        t_all.append(pd[close] / scale)
    eta_est = None
    if q_all:
        q = np.concatenate(q_all)
        tt = np.concatenate(t_all)
        ok = q > 0
        if ok.sum() >= 2 and np.unique(tt[ok]).size >= 3:
            eta_est = float(np.polyfit(np.log(tt[ok]), np.log(q[ok]), 1)[0])
    return {
        "C_fit": c_fit,
        "nu_fit": nu,
        "slack": slack,
        "violations": violations,
        "samples": int(profile.size),
        "profile_max": float(profile.max()) if profile.size else 0.0,
        "eta_est": eta_est,
        "ok": bool(nu > 0 and violations == 0),
    }


def verify_lower_bound(basis: WaveletBasis, max_exponent: int = 12) -> dict:
    """Search ``eps0 = 2**-j`` for the core-ball lower bound.

    ``c_center`` is the smallest ``|psi(y)| sqrt(mu(Q^k_alpha))`` at wavelet
    centers.  ``eps0`` is the largest ``2**-j`` for which every core ball
    ``B(y, eps0 delta**k)`` lies inside its cube and keeps
    ``|psi| sqrt(mu(Q))`` above ``c_center / 2``.  The chosen value is stored
    on the basis.
    """
    space, system = basis.space, basis.system
    idx = np.arange(basis.count)
    mass = basis.cube_mass()
    scaled = np.abs(basis.values) * np.sqrt(mass)[:, None]
    at_center = scaled[idx, basis.beta]
    c_center = float(at_center.min()) if basis.count else 0.0
    mu_fine = space.volumes(basis.beta, basis.scales() * basis.delta)
    c3 = float((np.abs(basis.values[idx, basis.beta]) * np.sqrt(mu_fine)).min()) if basis.count else 0.0

    cube_rows = np.empty((basis.count, space.n), dtype=np.int64)
    for k in np.unique(basis.level):
        sel = basis.level == k
        cube_rows[sel] = system.cube_of[int(k)][None, :]
    inside = cube_rows == basis.alpha[:, None]

    table = []
    chosen = None
    for j in range(1, max_exponent + 1):
        eps = 2.0**-j
        core = space.dist[basis.beta] < (eps * basis.scales())[:, None]
        contained = bool(np.all(~core | inside))
        c_min = float(np.where(core, scaled, np.inf).min()) if basis.count else 0.0
        table.append({"eps0": eps, "contained": contained, "c_lower": c_min})
        if chosen is None and contained and c_min >= 0.5 * c_center and c_min > 0:
            chosen = table[-1]
    report = {
        "c_center": c_center,
        "c3": c3,
        "eps0": None,
        "c_lower": None,
        "ratio_min": None,
        "ratio_max": None,
        "table": table,
        "ok": False,
    }
    if chosen is not None:
        eps0 = chosen["eps0"]
        vol = space.volumes(basis.beta, eps0 * basis.scales())
        ratio = vol / mass
        report.update(
            eps0=eps0,
            c_lower=chosen["c_lower"],
            ratio_min=float(ratio.min()),
            ratio_max=float(ratio.max()),
            ok=True,
        )
        basis.eps0 = eps0
    return report


def riesz_check(splines: SplineSystem, k: int, trials: int = 200, seed: int = 0, nested: bool = True) -> dict:
    """Ratios ``||sum lambda_alpha s_alpha||_2 / (sum lambda_alpha**2 nu_alpha)**(1/2)`` for random ``lambda``."""
    rng = np.random.default_rng(seed)
    s = splines.nested[k] if nested else splines.values[k]
    nu = s @ splines.space.weights
    lam = rng.standard_normal((trials, s.shape[0]))
    f = lam @ s
    num = np.sqrt((f**2) @ splines.space.weights)
    den = np.sqrt((lam**2) @ nu)
    r = num / den
    return {"k": k, "r_min": float(r.min()), "r_max": float(r.max()), "trials": trials}


def save_basis(basis: WaveletBasis, path):
    """JSON header plus little-endian float64 value matrix (wavelets, then coarse rows)."""
    header = {
        "kind": "wavelet_basis",
        "delta": basis.delta,
        "k_min": basis.k_min,
        "k_max": basis.k_max,
        "eps0": basis.eps0,
        "levels": basis.level.tolist(),
        "alphas": basis.alpha.tolist(),
        "centers": basis.beta.tolist(),
        "scales": basis.scales().tolist(),
        "coarse_count": int(basis.coarse.shape[0]),
        "cubes": basis.system.to_json(),
    }
    return write_table(path, header, basis.matrix())


def load_basis(space, path) -> WaveletBasis:
    header, matrix = read_table(path)
    system = DyadicSystem.from_json(space, header["cubes"])
    count = len(header["levels"])
    return WaveletBasis(
        system=system,
        values=matrix[:count].copy(),
        level=np.asarray(header["levels"], dtype=np.int64),
        alpha=np.asarray(header["alphas"], dtype=np.int64),
        beta=np.asarray(header["centers"], dtype=np.int64),
        coarse=matrix[count:].copy(),
        eps0=header["eps0"],
    )
