"""Build the deformed 2x2 Hermite family numerically and compare with the closed forms."""
from __future__ import annotations

import numpy as np

from mvtoda import diffop, mvop
from mvtoda.hermite import (HermiteParams, casimir, closed_form_g2x2, closed_form_p2x2,
                            hermite_weight)

p = HermiteParams((1.0,))
w = hermite_weight(p)
nmax = 8
xs = np.linspace(-2.0, 2.0, 9)
for t in (-0.5, 0.0, 0.5):
    rule = mvop.default_rule(w, nmax, w.exponent_degree)
    fam = mvop.build_family(w, t, nmax, rule)
    op = diffop.compute_g(fam, casimir(p), rule)
    dp = max(np.max(np.abs(fam.evaluate(xs)[n] - closed_form_p2x2(n, xs, t))) for n in range(nmax + 1))
    dg = 0.0
    for n in range(1, nmax):
        for j, ref in zip((1, 0, -1), closed_form_g2x2(n, t)):
            dg = max(dg, np.max(np.abs(op.get(j, n) - ref)))
    print(f"t={t:+.1f}  max |P_n - closed| = {dp:.1e}  max |G_j - closed| = {dg:.1e}")

print("P_1 at t=0:")
print(np.real_if_close(mvop.build_family(w, 0.0, 2).polys[1].coeffs).round(12))
