"""Check dL/dt = [L, L+] for the truncated block matrices of the scalar x^2 flow."""
from __future__ import annotations

from mvtoda import lax
from mvtoda.presets import scalar_weight, symbol

w = scalar_weight("x2")
rep = lax.verify_lax(w, symbol("x2", 1), t=0.1, h=1e-4, nblocks=10)
print(f"scalar x^2 flow, t=0.1: max interior |dL/dt - [L, L+]| = {rep.max_residual:.1e}")
print(f"bracket bands vs toda_rhs: {rep.algebra_residual:.1e}; bandwidth preserved: {rep.band_preserved}")
