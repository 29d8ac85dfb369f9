"""Registry of verifier checks and the report they produce.

Each check has a stable name, a descriptive anchor naming the property it
tests, and a class.  ``pass`` checks test identities that hold exactly on a
finite model and decide the exit status.  ``info`` checks record fitted
constants; their ``assertion_ok`` field reports a stability or sanity
assertion but never fails a run.
"""

from __future__ import annotations

import json
import math
import platform
from dataclasses import dataclass, field
from typing import Callable, Dict, List, Optional

import numpy as np

from . import __version__
from .config import RunConfig
from .hardy import (
    cz_kernel_check,
    decompose,
    khintchine_check,
    lebesgue_differentiation_check,
    make_atom,
    maximal_comparison,
    maximal_domination_check,
    molecule_report,
    norm_iii,
    norm_iv,
    norm_v,
    random_signs,
    sign_isometry_error,
    sign_uniform_bound,
    square_function_vs_signs,
    validate_atom,
    validate_molecule,
    weak_type_check,
)
from .lattice import separated_sum_check, verify_cube_axioms
from .pipeline import Artifacts
from .space import doubling_profile
from .splines import support_radii, verify_spline_regularity
from .wavelets import analyze, gram, inv_sqrt, neumann_coefficients, riesz_check, synthesize, verify_decay, verify_lower_bound

__all__ = ["Check", "CheckResult", "Report", "REGISTRY", "run_suite", "random_atoms", "Context"]

PASS, FAIL, INFO = "pass", "fail", "info"
EPS0_FLOOR = 2.0**-6


@dataclass
class CheckResult:
    name: str
    anchor: str
    klass: str
    status: str
    measured: dict

    def to_dict(self) -> dict:
        return {"name": self.name, "anchor": self.anchor, "class": self.klass, "status": self.status, "measured": self.measured}


@dataclass
class Check:
    name: str
    anchor: str
    klass: str
    run: Callable[["Context"], tuple]


@dataclass
class Report:
    config_hash: str
    results: List[CheckResult]
    versions: dict = field(default_factory=dict)

    @property
    def failed(self) -> List[CheckResult]:
        return [r for r in self.results if r.status == FAIL]

    @property
    def exit_code(self) -> int:
        return 1 if self.failed else 0

    def get(self, name: str) -> CheckResult:
        for r in self.results:
            if r.name == name:
                return r
        raise KeyError(name)

    def to_dict(self) -> dict:
        counts = {s: sum(r.status == s for r in self.results) for s in (PASS, FAIL, INFO)}
        return {
            "meta": {"config_hash": self.config_hash, "versions": self.versions},
            "summary": counts,
            "checks": [r.to_dict() for r in self.results],
        }

    def to_json(self) -> str:
        return json.dumps(_clean(self.to_dict()), indent=1, sort_keys=True, allow_nan=False) + "\n"

    @classmethod
    def from_dict(cls, data: dict) -> "Report":
        results = [CheckResult(c["name"], c["anchor"], c["class"], c["status"], c["measured"]) for c in data["checks"]]
        return cls(data["meta"]["config_hash"], results, data["meta"].get("versions", {}))


def _clean(obj):
    """JSON-safe copy: numpy scalars unwrapped, non-finite floats as strings."""
    if isinstance(obj, dict):
        return {str(k): _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _clean(obj.tolist())
    if isinstance(obj, (np.bool_, bool)):
        return bool(obj)
    if isinstance(obj, (np.integer, int)):
        return int(obj)
    if isinstance(obj, (np.floating, float)):
        x = float(obj)
        if math.isfinite(x):
            return x
        return "inf" if x > 0 else ("-inf" if x < 0 else "nan")
    return obj


def versions() -> dict:
    import scipy

    return {"homwave": __version__, "numpy": np.__version__, "scipy": scipy.__version__, "python": platform.python_version()}


# -- shared context ----------------------------------------------------------


class Context:
    """Artifacts plus lazily computed quantities shared between checks."""

    def __init__(self, art: Artifacts, config: RunConfig):
        self.art = art
        self.config = config
        self.tol = config.tolerances
        self.exp = config.experiments
        self._memo: Dict[str, object] = {}

    @property
    def space(self):
        return self.art.space

    @property
    def basis(self):
        return self.art.basis

    def rng(self, tag: int, offset: int = 0) -> np.random.Generator:
        """Independent stream per check, keyed by the experiments seed."""
        seq = np.random.SeedSequence(entropy=int(self.config.seeds["experiments"]), spawn_key=(int(tag), int(offset)))
        return np.random.default_rng(seq)

    def memo(self, key, fn):
        if key not in self._memo:
            self._memo[key] = fn()
        return self._memo[key]

    def cube_axioms(self):
        return self.memo("cubes", lambda: verify_cube_axioms(self.art.system))

    def lower_bound(self):
        return self.memo("lower", lambda: verify_lower_bound(self.basis))


def random_atoms(space, count: int, rng, q: float = math.inf):
    """Atoms on random balls with log-uniform radii between the local point spacing and a third of the diameter."""
    d = space.dist
    positive = d[d > 0]
    r_lo = 3.0 * float(positive.min())
    r_hi = max(space.diam / 3.0, 2.0 * r_lo)
    atoms = []
    while len(atoms) < count:
        c = int(rng.integers(space.n))
        r = float(np.exp(rng.uniform(math.log(r_lo), math.log(r_hi))))
        if space.ball(c, r).sum() < 2:
            continue
        atoms.append(make_atom(space, (c, r), q, seed=int(rng.integers(2**32))))
    return atoms


def _band(values) -> dict:
    v = np.asarray(values, dtype=np.float64)
    lo, hi = float(v.min()), float(v.max())
    return {"min": lo, "max": hi, "spread": hi / lo if lo > 0 else math.inf}


def _factor(a: float, b: float) -> float:
    if a <= 0 or b <= 0:
        return math.inf
    return max(a / b, b / a)


# -- lattice ------------------------------------------------------------------


def check_nets(ctx: Context):
    nets = ctx.art.nets
    dist = ctx.space.dist
    sep, cover, nested = True, True, True
    rows = []
    for k in nets.levels:
        pts = nets.nets[k]
        scale = nets.scale(k)
        sub = dist[np.ix_(pts, pts)]
        off = sub[~np.eye(pts.size, dtype=bool)]
        s_ok = bool(off.size == 0 or off.min() >= scale)
        reach = float(dist[:, pts].min(axis=1).max()) / scale
        # thinning a finer net adds at most a geometric tail of finer scales
        c_ok = bool(reach < 1.0 / (1.0 - nets.delta))
        n_ok = bool(k == nets.k_max or np.isin(pts, nets.nets[k + 1]).all())
        sep &= s_ok
        cover &= c_ok
        nested &= n_ok
        rows.append({"k": k, "size": int(pts.size), "separated": s_ok, "covering": c_ok, "covering_ratio": reach})
    finest_full = bool(nets.finest_is_complete())
    ok = sep and cover and nested and finest_full
    return ok, {"separated": sep, "covering": cover, "nested": nested, "finest_is_cloud": finest_full, "levels": rows}


def check_partition(ctx):
    r = ctx.cube_axioms()
    return r["partition"] and r["center_in_cube"], {"partition": r["partition"], "center_in_cube": r["center_in_cube"]}


def check_nesting(ctx):
    r = ctx.cube_axioms()
    return r["nesting"], {"nesting": r["nesting"], "max_children": r["max_children"], "min_children": r["min_children"]}


def check_ball_inclusion(ctx):
    r = ctx.cube_axioms()
    return r["ball_inclusion"], {"ball_inclusion": r["ball_inclusion"], "inner_ratio": r["inner_ratio"], "outer_ratio": r["outer_ratio"]}


def check_parent_proximity(ctx):
    r = ctx.cube_axioms()
    return r["parent_proximity"], {"max_parent_distance_ratio": r["max_parent_distance_ratio"]}


def check_sandwich(ctx):
    r = ctx.cube_axioms()
    m = {"strict": r["strict"], "inner_ratio": r["inner_ratio"], "outer_ratio": r["outer_ratio"], "sandwich": r["sandwich"]}
    # the sandwich is only guaranteed on strict runs
    m["applicable"] = bool(r["strict"])
    return (bool(r["sandwich"]) if r["strict"] else True), m


def check_finest_cells(ctx):
    r = ctx.cube_axioms()
    return r["lebesgue_finest"], {"lebesgue_finest": r["lebesgue_finest"]}


def check_separated_sum(ctx):
    nets = ctx.art.nets
    rows = []
    for k in nets.levels:
        rep = separated_sum_check(ctx.space, nets, k)
        rows.append({"k": k, "sup": rep["sup"]})
    sups = [r["sup"] for r in rows]
    return bool(np.all(np.isfinite(sups))), {"levels": rows, "max_sup": float(max(sups))}


def check_doubling(ctx):
    d = ctx.space.dist
    spacing = float(d[d > 0].min())
    prof = doubling_profile(ctx.space, sample_count=64, seed=int(ctx.config.seeds["experiments"]), r_min=8 * spacing)
    return bool(math.isfinite(prof.C_dbl)), prof.to_dict()


# -- splines ------------------------------------------------------------------


def check_spline_partition(ctx):
    s = ctx.art.splines
    raw, nested = s.partition_error(False), s.partition_error(True)
    return max(raw, nested) <= ctx.tol["partition"], {"raw": raw, "nested": nested, "tolerance": ctx.tol["partition"]}


def check_spline_interpolation(ctx):
    s = ctx.art.splines
    raw, nested = s.interpolation_error(False), s.interpolation_error(True)
    return raw == 0.0 and nested == 0.0, {"raw": raw, "nested": nested}


def check_spline_refinement(ctx):
    s = ctx.art.splines
    bound = 2.0 / math.sqrt(s.samples)
    worst = max(s.residuals.values(), default=0.0)
    return worst <= bound, {
        "max_residual": worst,
        "bound": bound,
        "samples": s.samples,
        "per_level": [{"k": k, "residual": s.residuals[k]} for k in sorted(s.residuals)],
    }


def check_spline_support(ctx):
    s = ctx.art.splines
    rows = []
    for k in s.levels:
        r_in, r_out = support_radii(s, k)
        rows.append({"k": k, "r_in_min": float(r_in.min()), "r_out_max": float(r_out.max())})
    ok = all(r["r_in_min"] >= 1.0 / 8.0 and r["r_out_max"] <= 8.0 for r in rows)
    return ok, {"levels": rows, "strict": ctx.art.nets.strict}


def check_spline_regularity(ctx):
    rep = verify_spline_regularity(ctx.art.splines, seed=int(ctx.config.seeds["experiments"]))
    return rep["ok"], rep


def check_riesz(ctx):
    s = ctx.art.splines
    rows = [riesz_check(s, k, trials=100, seed=int(ctx.config.seeds["experiments"])) for k in s.levels]
    lo = min(r["r_min"] for r in rows)
    hi = max(r["r_max"] for r in rows)
    return lo > 0 and math.isfinite(hi), {"levels": rows, "r_min": lo, "r_max": hi}


# -- wavelets -----------------------------------------------------------------


def check_orthonormality(ctx):
    err = ctx.basis.orthonormality_error()
    return err <= ctx.tol["orthonormality"], {"max_gram_deviation": err, "tolerance": ctx.tol["orthonormality"]}


def check_cancellation(ctx):
    errs = ctx.basis.cancellation_errors()
    worst = float(errs.max()) if errs.size else 0.0
    return worst <= ctx.tol["cancellation"], {"max_integral": worst, "tolerance": ctx.tol["cancellation"]}


def check_cross_level(ctx):
    err = ctx.basis.cross_level_error(ctx.art.splines)
    return err <= ctx.tol["orthonormality"], {"max_inner_product": err}


def check_round_trip(ctx):
    rng = ctx.rng(1)
    space, basis = ctx.space, ctx.basis
    w = space.weights
    worst_rt, worst_pl = 0.0, 0.0
    for _ in range(5):
        f = rng.standard_normal(space.n)
        cf = analyze(basis, f)
        back = synthesize(basis, cf)
        worst_rt = max(worst_rt, float(np.abs(back - f).max()))
        energy = float(w @ f**2)
        worst_pl = max(worst_pl, abs(cf.energy() - energy) / energy)
    tol = ctx.tol["reconstruction"]
    return max(worst_rt, worst_pl) <= tol, {"round_trip": worst_rt, "plancherel_relative": worst_pl, "tolerance": tol}


def check_dimensions(ctx):
    basis, nets = ctx.basis, ctx.art.nets
    per_level = {int(k): int(np.count_nonzero(basis.level == k)) for k in np.unique(basis.level)}
    expected = {k: int(nets.new_points(k).size) for k in range(nets.k_min, nets.k_max)}
    total = basis.count + int(basis.coarse.shape[0])
    ok = total == ctx.space.n and int(basis.coarse.shape[0]) == nets.size(nets.k_min)
    ok = ok and all(per_level.get(k, 0) == v for k, v in expected.items())
    return ok, {
        "wavelets": basis.count,
        "coarse": int(basis.coarse.shape[0]),
        "points": ctx.space.n,
        "per_level": [{"k": k, "count": per_level.get(k, 0)} for k in sorted(expected)],
    }


def check_inv_sqrt(ctx):
    s = ctx.art.splines
    rows = []
    worst = 0.0
    for k in range(s.nets.k_min, s.nets.k_max):
        g = gram(s, k)
        if g.Mtilde is None or g.Mtilde.size == 0:
            continue
        a = inv_sqrt(g.Mtilde, "eig", tol=ctx.tol["inv_sqrt"])
        b, info = inv_sqrt(g.Mtilde, "neumann", tol=ctx.tol["inv_sqrt"], return_info=True)
        diff = float(np.abs(a - b).max())
        worst = max(worst, diff)
        rows.append({"k": k, "size": int(g.Mtilde.shape[0]), "difference": diff, "terms": info.get("terms")})
    tol = ctx.tol["cross_method"]
    return worst <= tol, {"max_difference": worst, "tolerance": tol, "levels": rows}


def check_neumann_coefficients(ctx):
    n = 65
    got = neumann_coefficients(n)
    exact = np.array([math.comb(2 * j, j) / 4**j for j in range(n)])
    err = float(np.abs(got - exact).max())
    return err <= ctx.tol["neumann_coefficients"], {"terms": n, "max_error": err}


def check_gram_spectra(ctx):
    s = ctx.art.splines
    rows = [gram(s, k).to_dict() for k in s.levels]
    ill = [r["k"] for r in rows if r["ill_conditioned"]]
    return not ill, {"levels": rows, "ill_conditioned_levels": ill, "excluded_levels": list(ctx.basis.excluded_levels)}


def check_lower_bound(ctx):
    rep = ctx.lower_bound()
    ok = bool(rep["ok"] and rep["c_lower"] is not None and rep["c_lower"] > 0)
    measured = {k: rep[k] for k in ("eps0", "c_lower", "c_center", "c3", "ratio_min", "ratio_max")}
    # the reference floor and volume band are reported; only existence is an identity
    measured["floor_ok"] = bool(
        ok and rep["eps0"] >= EPS0_FLOOR and 1e-3 <= rep["ratio_min"] and rep["ratio_max"] <= 1.0
    )
    return ok, measured


def check_decay(ctx):
    rep = verify_decay(ctx.basis, slack=ctx.tol["decay_slack"], seed=int(ctx.config.seeds["experiments"]))
    return rep["ok"], rep


# -- hardy --------------------------------------------------------------------


def check_atoms(ctx):
    atoms = ctx.memo("atoms", lambda: random_atoms(ctx.space, int(ctx.exp["atoms"]), ctx.rng(2)))
    bad = [i for i, a in enumerate(atoms) if not validate_atom(ctx.space, a.values, a.ball, a.q)["ok"]]
    return not bad, {"atoms": len(atoms), "failed": bad}


def check_molecules(ctx):
    basis, space = ctx.basis, ctx.space
    rng = ctx.rng(3)
    count = min(int(ctx.exp["molecules"]), basis.count)
    picks = np.sort(rng.choice(basis.count, size=count, replace=False))
    worst_sum, worst_ratio, bad = 0.0, 0.0, []
    for i in picks:
        y = int(basis.beta[i])
        r = basis.delta ** float(basis.level[i])
        m = basis.values[i] / math.sqrt(space.volume(y, r))
        rep = validate_molecule(space, m, (y, r), 2.0)
        worst_sum = max(worst_sum, rep["sum_k_eta"])
        worst_ratio = max(worst_ratio, rep["size_ratio"])
        if not (rep["ok"] and math.isfinite(rep["sum_k_eta"])):
            bad.append(int(i))
    return not bad, {"molecules": int(count), "failed": bad, "max_sum_k_eta": worst_sum, "max_size_ratio": worst_ratio}


def _test_functions(ctx, tag):
    rng = ctx.rng(tag)
    n = ctx.space.n
    out = []
    for i in range(int(ctx.exp["maximal_functions"])):
        kind = i % 3
        if kind == 0:
            f = rng.standard_normal(n)
        elif kind == 1:
            f = np.zeros(n)
            f[rng.choice(n, size=max(1, n // 50), replace=False)] = rng.exponential(size=max(1, n // 50))
        else:
            f = rng.random(n) ** 4
        out.append(f)
    return out


def _weak_rows(ctx):
    def run():
        rows = []
        for f in _test_functions(ctx, 4):
            top = float(np.abs(f).max())
            lambdas = np.logspace(math.log10(top) - 3, math.log10(top), int(ctx.exp["maximal_lambdas"]))
            rows.append(weak_type_check(f, ctx.art.system, lambdas))
        return rows

    return ctx.memo("weak", run)


def check_weak_type(ctx):
    rows = _weak_rows(ctx)
    worst = max(r2["measure"] / r2["bound"] for r in rows for r2 in r["rows"])
    return all(r["weak_ok"] for r in rows), {"functions": len(rows), "constant": 1.0, "max_ratio_to_bound": worst}


def check_level_sets(ctx):
    rows = _weak_rows(ctx)
    return all(r["structure_ok"] for r in rows), {"functions": len(rows)}


def check_lebesgue(ctx):
    reps = [lebesgue_differentiation_check(f, ctx.art.system) for f in _test_functions(ctx, 5)[:5]]
    return all(r["ok"] for r in reps), {"max_error": max(r["max_error"] for r in reps)}


def check_maximal_domination(ctx):
    ctx.lower_bound()
    rep = maximal_domination_check(ctx.basis)
    return rep["ok"], rep


def check_maximal_comparison(ctx):
    reps = [maximal_comparison(f, ctx.art.system) for f in _test_functions(ctx, 6)[:5]]
    hl = max(r["max_hl_over_dyadic"] for r in reps)
    dy = max(r["max_dyadic_over_hl"] for r in reps)
    return bool(math.isfinite(hl) and math.isfinite(dy)), {"max_hl_over_dyadic": hl, "max_dyadic_over_hl": dy}


def _norm_band(ctx, offset):
    atoms = random_atoms(ctx.space, int(ctx.exp["atoms"]), ctx.rng(7, offset))
    r3, r4 = [], []
    for a in atoms:
        cf = analyze(ctx.basis, a.values)
        v = norm_v(cf, ctx.basis)
        r3.append(norm_iii(cf, ctx.basis) / v)
        r4.append(norm_iv(cf, ctx.basis) / v)
    return _band(r3), _band(r4)


def check_norm_bands(ctx):
    ctx.lower_bound()
    b3, b4 = _norm_band(ctx, 0)
    c3, c4 = _norm_band(ctx, 1)
    limit, stab = ctx.exp["band_limit"], ctx.exp["band_stability"]
    drift = max(
        _factor(b3["min"], c3["min"]),
        _factor(b3["max"], c3["max"]),
        _factor(b4["min"], c4["min"]),
        _factor(b4["max"], c4["max"]),
    )
    ok = b3["spread"] <= limit and b4["spread"] <= limit and drift <= stab
    return ok, {"iii_over_v": b3, "iv_over_v": b4, "rerun_iii_over_v": c3, "rerun_iv_over_v": c4, "seed_drift": drift}


def check_norm_axioms(ctx):
    rng = ctx.rng(8)
    basis = ctx.basis
    ctx.lower_bound()
    worst_h, worst_t = 0.0, -math.inf
    for _ in range(10):
        f, g = rng.standard_normal((2, ctx.space.n))
        c = float(rng.uniform(-3, 3))
        cf, cg = analyze(basis, f), analyze(basis, g)
        for norm in (norm_iii, norm_iv, norm_v):
            nf = norm(cf, basis)
            worst_h = max(worst_h, abs(norm(c * cf.wavelet, basis) - abs(c) * nf) / max(nf, 1e-300))
            worst_t = max(worst_t, norm(cf.wavelet + cg.wavelet, basis) - nf - norm(cg, basis))
    ok = worst_h <= 1e-12 and worst_t <= 1e-12
    return ok, {"homogeneity_relative": worst_h, "triangle_excess": worst_t}


def _decompositions(ctx):
    def run():
        ctx.lower_bound()
        atoms = random_atoms(ctx.space, int(ctx.exp["decomposition_atoms"]), ctx.rng(9))
        out = []
        for a in atoms:
            cf = analyze(ctx.basis, a.values)
            out.append((cf, decompose(cf, ctx.basis)))
        return out

    return ctx.memo("decomp", run)


def check_decomposition(ctx):
    worst, part = 0.0, True
    for cf, dec in _decompositions(ctx):
        target = cf.wavelet @ ctx.basis.values
        synth = dec.synthesize()
        got = np.zeros_like(target) if synth is None else synth
        worst = max(worst, float(np.abs(got - target).max()))
        part &= dec.partition_ok(np.nonzero(cf.wavelet)[0])
    ok = part and worst <= ctx.tol["reconstruction"]
    return ok, {"runs": len(_decompositions(ctx)), "max_resynthesis_error": worst, "partition": bool(part)}


def check_decomposition_band(ctx):
    decs = [d for _, d in _decompositions(ctx)]
    band = _band([d.constant for d in decs])
    mol = [molecule_report(d, ctx.basis) for d in decs[:5]]
    ok = band["spread"] <= ctx.exp["decomposition_band"]
    return ok, {
        "C_band": band,
        "C2": decs[0].C2 if decs else None,
        "pieces_max": max(len(d.pieces) for d in decs),
        "molecule_max_size_ratio": max(m["max_size_ratio"] for m in mol),
        "molecules_ok": all(m["ok"] for m in mol),
    }


def _khintchine(ctx, offset):
    rng = ctx.rng(10, offset)
    vecs = rng.standard_normal((int(ctx.exp["khintchine_vectors"]), int(ctx.exp["khintchine_length"])))
    trials = int(ctx.exp["khintchine_trials"])
    seed = int(rng.integers(2**32))
    return [khintchine_check(vecs, trials, q, seed=seed + i) for i, q in enumerate((1.0, 4.0))]


def check_khintchine(ctx):
    first, second = _khintchine(ctx, 0), _khintchine(ctx, 1)
    drift = max(max(_factor(a["ratio_min"], b["ratio_min"]), _factor(a["ratio_max"], b["ratio_max"])) for a, b in zip(first, second))
    ok = all(r["ok"] for r in first + second) and drift <= ctx.exp["khintchine_stability"]
    return ok, {
        "q1": {k: first[0][k] for k in ("ratio_min", "ratio_max", "constant")},
        "q4": {k: first[1][k] for k in ("ratio_min", "ratio_max", "constant")},
        "trials": first[0]["trials"],
        "seed_drift": drift,
    }


def check_sign_isometry(ctx):
    rng = ctx.rng(11)
    worst = 0.0
    for _ in range(10):
        f = rng.standard_normal(ctx.space.n)
        worst = max(worst, sign_isometry_error(f, random_signs(ctx.basis.count, rng), ctx.basis))
    return worst <= ctx.tol["isometry"], {"max_error": worst}


def check_square_vs_signs(ctx):
    ctx.lower_bound()
    atoms = ctx.memo("atoms", lambda: random_atoms(ctx.space, int(ctx.exp["atoms"]), ctx.rng(2)))
    seed = int(ctx.rng(12).integers(2**32))
    reps = [square_function_vs_signs(a.values, ctx.basis, int(ctx.exp["sign_trials"]), seed + i, ctx.tol["square_function"]) for i, a in enumerate(atoms[:5])]
    return all(r["ok"] for r in reps), {"max_ratio": max(r["ratio"] for r in reps), "sampled": True, "tolerance": ctx.tol["square_function"]}


def check_sign_uniform(ctx):
    ctx.lower_bound()
    atoms = ctx.memo("atoms", lambda: random_atoms(ctx.space, int(ctx.exp["atoms"]), ctx.rng(2)))
    seed = int(ctx.rng(13).integers(2**32))
    reps = [sign_uniform_bound(a.values, ctx.basis, 20, seed + i) for i, a in enumerate(atoms[:5])]
    worst = max(r["ratio"] for r in reps)
    return bool(math.isfinite(worst)), {"max_ratio": worst}


def check_cz_kernel(ctx):
    rng = ctx.rng(14)
    reps = []
    for i in range(int(ctx.exp["cz_draws"])):
        signs = random_signs(ctx.basis.count, rng)
        reps.append(cz_kernel_check(signs, ctx.basis, triples=5000, seed=int(rng.integers(2**32))))
    sizes = [r["size_constant"] for r in reps]
    drift = max(sizes) / min(sizes) if min(sizes) > 0 else math.inf
    ok = all(r["ok"] for r in reps) and drift <= ctx.exp["cz_stability"]
    exps = [r["smooth_exponent"] for r in reps if r["smooth_exponent"] is not None]
    return ok, {
        "size_constant": _band(sizes),
        "smooth_exponent": _band(exps) if exps else None,
        "draw_drift": drift,
    }


REGISTRY: List[Check] = [
    Check("nets", "nets: separation, covering, nesting", PASS, check_nets),
    Check("cube_partition", "cubes: partition of the cloud at every level", PASS, check_partition),
    Check("cube_nesting", "cubes: children tile parents", PASS, check_nesting),
    Check("cube_ball_inclusion", "cubes: inner and outer balls", PASS, check_ball_inclusion),
    Check("cube_parent_proximity", "cubes: parent within twice the scale", PASS, check_parent_proximity),
    Check("cube_sandwich", "cubes: one-third to four sandwich (strict delta)", PASS, check_sandwich),
    Check("finest_cells", "cubes: finest cells are points", PASS, check_finest_cells),
    Check("separated_sum", "nets: exponentially weighted net sums", INFO, check_separated_sum),
    Check("doubling_profile", "space: empirical doubling constants", INFO, check_doubling),
    Check("spline_partition", "splines: partition of unity", PASS, check_spline_partition),
    Check("spline_interpolation", "splines: interpolation at net points", PASS, check_spline_interpolation),
    Check("spline_refinement", "splines: refinement residual within Monte Carlo error", PASS, check_spline_refinement),
    Check("spline_support", "splines: support radii", INFO, check_spline_support),
    Check("spline_regularity", "splines: Hoelder exponent fit", INFO, check_spline_regularity),
    Check("spline_riesz", "splines: Riesz bounds", INFO, check_riesz),
    Check("gram_spectra", "wavelets: Gram spectra", INFO, check_gram_spectra),
    Check("inv_sqrt_cross", "wavelets: inverse square root, eigen vs Neumann", PASS, check_inv_sqrt),
    Check("neumann_coefficients", "wavelets: Neumann coefficients of (1-t)^(-1/2)", PASS, check_neumann_coefficients),
    Check("wavelet_orthonormality", "wavelets: orthonormal basis", PASS, check_orthonormality),
    Check("wavelet_cancellation", "wavelets: zero integral", PASS, check_cancellation),
    Check("wavelet_cross_level", "wavelets: orthogonal to the coarser spline space", PASS, check_cross_level),
    Check("reconstruction", "wavelets: Plancherel and round trip", PASS, check_round_trip),
    Check("dimensions", "wavelets: one wavelet per new net point", PASS, check_dimensions),
    Check("lower_bound", "wavelets: lower bound on a core ball", PASS, check_lower_bound),
    Check("decay", "wavelets: exponential decay envelope", INFO, check_decay),
    Check("atoms", "hardy: random atoms are valid", PASS, check_atoms),
    Check("molecules", "hardy: normalized wavelets are molecules", PASS, check_molecules),
    Check("weak_type", "maximal: dyadic weak (1,1) with constant one", PASS, check_weak_type),
    Check("level_sets", "maximal: level sets are disjoint unions of maximal cubes", PASS, check_level_sets),
    Check("lebesgue_differentiation", "maximal: finest averages recover the function", PASS, check_lebesgue),
    Check("maximal_domination", "maximal: core-ball maximal function bounded below on cubes", PASS, check_maximal_domination),
    Check("maximal_comparison", "maximal: dyadic vs Hardy-Littlewood", INFO, check_maximal_comparison),
    Check("norm_axioms", "hardy: square-function norms are seminorms", PASS, check_norm_axioms),
    Check("norm_bands", "hardy: square-function norm equivalence bands", INFO, check_norm_bands),
    Check("decomposition", "hardy: molecular decomposition resynthesizes", PASS, check_decomposition),
    Check("decomposition_band", "hardy: decomposition constant band", INFO, check_decomposition_band),
    Check("khintchine", "signs: Khintchine bracket", INFO, check_khintchine),
    Check("sign_isometry", "signs: random-sign operators are L2 isometries", PASS, check_sign_isometry),
    Check("square_function_vs_signs", "signs: square function vs sampled sign sums", INFO, check_square_vs_signs),
    Check("sign_uniform_bound", "signs: core-ball norm under sign changes", INFO, check_sign_uniform),
    Check("cz_kernel", "signs: kernel size and smoothness constants", INFO, check_cz_kernel),
]


def run_suite(art: Artifacts, config: RunConfig, only: Optional[List[str]] = None, timings: Optional[dict] = None) -> Report:
    """Run the registered checks in order.  ``timings`` (if given) receives wall seconds per check."""
    import time

    ctx = Context(art, config)
    results = []
    for check in REGISTRY:
        if only is not None and check.name not in only:
            continue
        start = time.perf_counter()
        try:
            ok, measured = check.run(ctx)
        except Exception as exc:  # a crashing verifier is a failed check, not a crashed run
            ok, measured = False, {"error": f"{type(exc).__name__}: {exc}"}
        if timings is not None:
            timings[check.name] = time.perf_counter() - start
        if check.klass == PASS:
            status = PASS if ok else FAIL
        else:
            status = INFO
            measured = dict(measured)
            measured["assertion_ok"] = ok
        results.append(CheckResult(check.name, check.anchor, check.klass, status, _clean(measured)))
    return Report(config.digest(), results, versions())
