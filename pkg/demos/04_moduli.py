"""Moduli of continuity and net distances of the candidate extensions.

The natural extension tracks f exactly but its modulus stays large at small
scales; the zero map is as continuous as can be but drifts away from f in
proportion to the net radius.  Neither can have both properties.

Run: python3 demos/04_moduli.py
"""

from __future__ import annotations

import numpy as np

from netext.extensions import natural_extension, nearest_point_extension, zero_extension
from netext.modulus import estimate_gamma, estimate_modulus
from netext.nets import ProductNet, build_greedy_net
from netext.spaces import ProductShape

scales = np.array([1e-3, 1e-2, 0.1, 0.5, 1.0])
print("omega_hat(s) of the natural extension, product of components p = 2..P, n = 3:")
print("   P " + " ".join(f"{s:>8g}" for s in scales))
for P in (2, 6, 12, 24):
    shape = ProductShape(2, P, 3)
    t = estimate_modulus(natural_extension(shape), shape, scales, 200, 0)
    print(f"{P:4d} " + " ".join(f"{v:8.4f}" for v in t.estimates))

shape = ProductShape(2, 8, 3)
net = ProductNet(build_greedy_net(3, 3.0), shape)
t = estimate_modulus(nearest_point_extension(net), shape, scales, 200, 0)
print("\nnearest-point extension (jumps across Voronoi walls):", np.round(t.estimates, 4))

print("\ngamma = sup over net points of ||F(x) - f(x)||_Y, n = 4:")
for R in (2.0, 4.0, 8.0):
    shape = ProductShape(2, 8, 4)
    pnet = ProductNet(build_greedy_net(4, R), shape)
    g_zero = estimate_gamma(zero_extension(shape), pnet, 2000, 0).value
    g_nat = estimate_gamma(natural_extension(shape), pnet, 2000, 0).value
    print(f"  R={R:4.1f}: zero map {g_zero:7.4f}   natural {g_nat:.1f}")
