"""Atoms, square-function norms, molecular decomposition and random signs.

Run:  python demos/03_hardy_norms.py
"""

import math

import numpy as np

from homwave import build_nets, estimate_splines
from homwave.datasets import grid_1d
from homwave.hardy import (
    decompose,
    dyadic_maximal,
    khintchine_check,
    make_atom,
    molecule_report,
    norm_iii,
    norm_iv,
    norm_v,
    sign_isometry_error,
    validate_atom,
    weak_type_check,
)
from homwave.lattice import assign_parents, build_cubes
from homwave.wavelets import analyze, build_wavelets

space = grid_1d(256)
nets = build_nets(space, 0.25)
system = build_cubes(nets, assign_parents(nets, "nearest"))
basis = build_wavelets(estimate_splines(space, nets, R=256, seed=1), system)

# An atom: supported on a ball, mean zero, sup-norm at most 1 / mu(ball).
atom = make_atom(space, (64, 0.05), seed=3)
print("atom checks:", {k: v for k, v in validate_atom(space, atom.values, atom.ball, math.inf).items() if k in ("support", "size", "cancellation")})

# Three square-function norms of its wavelet coefficients stay within a band.
print("\nnorm ratios over 20 atoms of varying size:")
rng = np.random.default_rng(0)
ratios = []
for i in range(20):
    a = make_atom(space, (int(rng.integers(space.n)), float(rng.uniform(0.02, 0.3))), seed=i)
    cf = analyze(basis, a.values)
    v = norm_v(cf, basis)
    ratios.append((norm_iii(cf, basis) / v, norm_iv(cf, basis) / v))
ratios = np.array(ratios)
print(f"  iii / v in [{ratios[:, 0].min():.2f}, {ratios[:, 0].max():.2f}]")
print(f"  iv  / v in [{ratios[:, 1].min():.2f}, {ratios[:, 1].max():.2f}]")

# Stopping on level sets of the core-ball square function splits the atom into molecules.
cf = analyze(basis, atom.values)
dec = decompose(cf, basis)
resynth = np.abs(dec.synthesize() - cf.wavelet @ basis.values).max()
print(f"\ndecomposition: {len(dec.pieces)} molecules, sum lambda = {dec.total:.3f}, ||phi||_1 = {dec.phi_l1:.3f}")
print(f"  constant sum lambda / ||phi||_1 = {dec.constant:.2f}, resynthesis error {resynth:.1e}")
print(f"  molecule report: {molecule_report(dec, basis)}")

# The dyadic maximal function is weak (1,1) with constant exactly one.
f = rng.standard_normal(space.n) * (rng.random(space.n) < 0.05)
rows = weak_type_check(f, system, np.logspace(-3, 0, 6) * np.abs(f).max())["rows"]
print("\nweak (1,1): lambda * |{M f > lambda}|  vs  ||f||_1")
for r in rows:
    print(f"  lambda {r['lambda']:.4f}: {r['lambda'] * r['measure']:.4f} <= {r['lambda'] * r['bound']:.4f}  ({r['cubes']} maximal cubes)")
print(f"  max of M f: {dyadic_maximal(f, system).max():.3f}")

# Random signs: an isometry on L2, and Khintchine for scalar sums.
signs = rng.choice([-1.0, 1.0], size=basis.count)
print(f"\nsign operator isometry error {sign_isometry_error(f, signs, basis):.1e}")
kh = khintchine_check(rng.standard_normal((20, 32)), trials=2000, q=1.0)
print(f"Khintchine q=1: E|sum| / l2 in [{kh['ratio_min']:.3f}, {kh['ratio_max']:.3f}]")
