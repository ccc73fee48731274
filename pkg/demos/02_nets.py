"""Greedy and lattice 1-nets of Euclidean balls.

Run: python3 demos/02_nets.py
"""

from __future__ import annotations

import time

import numpy as np

from netext.nets import build_greedy_net, build_lattice_net, lattice_slack, nearest_net_point, verify_net_covering

print("greedy net of [-2, 2]:", build_greedy_net(1, 2.0).points[:, 0])
net1 = build_greedy_net(1, 2.0)
print("nearest to 0.6:", nearest_net_point(net1, [0.6]), " nearest to 0.5 (tie):", nearest_net_point(net1, [0.5]))

print("\n dim radius  points  separation  covering  bound   seconds")
for dim, radius in ((2, 5.0), (3, 4.0), (4, 4.0), (6, 2.5)):
    t0 = time.perf_counter()
    net = build_greedy_net(dim, radius)
    cover = verify_net_covering(net, 20_000, 0)
    print(f"{dim:4d} {radius:6.1f} {len(net.points):7d} {net.separation:11.4f} {cover:9.4f} "
          f"{1 + lattice_slack(dim):6.3f} {time.perf_counter() - t0:8.2f}")

# The checkerboard lattice needs no construction at all and scales to n = 8.
print("\nD_n/sqrt2 lattice nets:")
for dim in (2, 4, 8):
    lat = build_lattice_net(dim, 5.0)
    cover = verify_net_covering(lat, 20_000, 1)
    print(f"  n={dim}: separation {lat.separation:.4f}, covering {cover:.4f} <= {lat.covering_bound:.4f}")

rng = np.random.default_rng(0)
print("sample of lattice net points in the radius-5 ball (n=8):")
print(build_lattice_net(8, 5.0).sample(rng, 3))
