"""The choice-of-parameters argument, run on three candidate extensions.

For t below 1/(sqrt2 e^2) pick p = ceil(ln(1/(2t^2))) and a huge k.  If F
were uniformly continuous with finite gamma, the modulus at sqrt2 t would
have to stay above (2t^2)^(1/p)/2 >= 1/(2e) for every small t.  The
pipeline reports the floor, the measured modulus and gamma, and checks each
step of the inequality chain with real symmetrization at a small k.

Run: python3 demos/05_contradiction.py
"""

from __future__ import annotations

import math

from netext.extensions import builtin_candidate
from netext.nets import ProductNet, build_greedy_net
from netext.verifier import VerifierConfig, contradiction_pipeline

cfg = VerifierConfig(n=5, P=16, samples_per_scale=500, product_samples_per_scale=100,
                     gamma_samples=1000, transfer_samples=500)
net = ProductNet(build_greedy_net(cfg.n, cfg.net_radius), cfg.shape)

print(f"1/(2e) = {1 / (2 * math.e):.6f}\n")
for name in ("natural", "zero", "nearest"):
    cand = builtin_candidate(name, cfg.shape, net)
    for t in (0.05, 0.01):
        out = contradiction_pipeline(cand, t, cfg, net)
        a = out["analytic"]
        k = a["k"]
        k_text = "infinite" if k["infinite"] else f"10^{k['log10_k']:.1f}"
        print(f"{name:8s} t={t:<5} p={a['p']:2d} floor={a['floor']:.4f} "
              f"omega_hat={a['omega_sqrt2t']:.4f} gamma={a['gamma']:.4f} k={k_text:>10s} "
              f"checks={'all hold' if out['consistent'] else 'FAIL'}")
        for flag in out["flags"]:
            print(f"{'':9s}- {flag}")
