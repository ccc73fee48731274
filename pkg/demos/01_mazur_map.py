"""The Mazur map sends the l_2 sphere onto the l_p sphere, and is only 2/p-Hoelder.

Run: python3 demos/01_mazur_map.py
"""

from __future__ import annotations

import numpy as np

from netext.mazur import holder_bound_sides, holder_bound_suite, mazur, mazur_inverse, scalar_bound_suite
from netext.spaces import lq_norm

rng = np.random.default_rng(1)
v = rng.standard_normal(5)
v /= np.linalg.norm(v)

print("unit l_2 vector v:", np.round(v, 4))
for p in (2, 4, 10):
    w = mazur(v, p)
    print(f"p={p:2d}  ||M_p v||_p = {lq_norm(w, p):.15f}   round trip error "
          f"{np.abs(mazur_inverse(w, p) - v).max():.1e}")

# The Hoelder bound is tight on antipodal pairs; close pairs are far from it.
print("\nratio lhs/rhs of ||M_p x - M_p y||_p <= 2^(1-2/p) ||x-y||^(2/p):")
x = rng.standard_normal(5)
for label, y in (("antipodal", -x), ("nearby", x + 1e-3 * rng.standard_normal(5)),
                 ("independent", rng.standard_normal(5))):
    lhs, rhs = holder_bound_sides(x, y, 6)
    print(f"  {label:11s} {lhs / rhs:.6f}")

# Near zero the map stretches distances: s -> s^(2/p) blows up the ratio.
print("\n|M_p(s) - M_p(0)| / s for shrinking s, p = 8:")
for s in (1e-1, 1e-2, 1e-4):
    print(f"  s={s:.0e}: {mazur([s], 8)[0] / s:10.2f}")

print("\nrandomized suites:")
print(" ", scalar_bound_suite(200_000, seed=0))
for r in holder_bound_suite(20_000, seed=0):
    print(" ", r.name, "violations:", r.violations, "max ratio:", r.max_ratio)
