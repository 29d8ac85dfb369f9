"""From a point cloud to random dyadic cubes and the splines they average to.

Run:  python demos/01_cubes_and_splines.py
"""

import numpy as np

from homwave import build_nets, estimate_splines
from homwave.datasets import grid_1d
from homwave.lattice import assign_parents, build_cubes, sample_random_system, verify_cube_axioms
from homwave.space import doubling_profile

space = grid_1d(256)
print(f"cloud: {space.n} points on [0, 1], total mass {space.total_mass:.3f}")

profile = doubling_profile(space, sample_count=256, r_min=8 / 255)
print(f"doubling constant away from atomic scales ~ {profile.C_dbl:.2f}, dimension ~ {profile.n:.2f}")

# Nets at scales delta**k, nested from coarse to fine, finest = every point.
nets = build_nets(space, 0.25)
for k in nets.levels:
    print(f"  level {k:2d}: scale {nets.scale(k):.5f}, {nets.size(k):4d} net points")

# A deterministic cube system (nearest parent) and the axioms it satisfies.
system = build_cubes(nets, assign_parents(nets, "nearest"))
rep = verify_cube_axioms(system)
print("nearest-parent cubes:", {k: rep[k] for k in ("partition", "nesting", "ball_inclusion", "parent_proximity")})

# Random systems move cube boundaries around; the forced rule pins cells near centers.
k = 2
alpha = int(nets.nets[k][3])
members = [np.nonzero(sample_random_system(nets, seed).cube_of[k] == alpha)[0] for seed in range(3)]
for seed, m in enumerate(members):
    print(f"  draw {seed}: cube of x_{alpha} at level {k} spans points {m.min()}..{m.max()}")

# Averaging many draws gives splines s^k_alpha(x) = P(x in Q^k_alpha).
splines = estimate_splines(space, nets, R=256, seed=1)
s = splines.values[k][nets.position(k)[alpha]]
support = np.nonzero(s)[0]
print(f"spline at x_{alpha}: support {support.min()}..{support.max()}, value 1 at its center: {s[alpha] == 1.0}")
print(f"partition of unity error {splines.partition_error():.1e}, interpolation error {splines.interpolation_error()}")
print(f"largest refinement residual {max(splines.residuals.values()):.3f} (bound 2/sqrt(R) = {2 / 16:.3f})")

print("\nspline profile (one row per 8 points):")
for i in range(max(0, support.min() - 8), min(space.n, support.max() + 9), 8):
    print(f"  x_{i:3d}  {'#' * int(round(40 * s[i])):40s} {s[i]:.2f}")
