"""Calibrating the initial control from the jump condition.

Off the balanced growth path the initial share of labour in goods production
is not free: it is the root of a scalar residual built from two improper
integrals. The script scans that residual, shows its single sign change and
refines the root for a few endowments.
"""

import numpy as np

from lucas_uzawa import InitialEndowment, ModelParams, calibrate, jump_residual

params = ModelParams(beta=0.5, sigma=2.0, rho=0.04, delta=0.05, gamma=0.1)
endowment = InitialEndowment(1.0, 1.0)

print("  u0     residual")
for u in np.linspace(0.1, 0.9, 9):
    print(f"{u:5.2f} {jump_residual(params, endowment, u):+.6e}")

for h0 in (0.5, 1.0, 10 / 9, 1.4):
    cal, diag = calibrate(params, InitialEndowment(1.0, h0))
    print(f"h0={h0:.4f}: u0={cal.u0:.10f} c0={cal.c0:.6f} z0={cal.z0:.6f} "
          f"bracket=({diag.bracket[0]:.4f}, {diag.bracket[1]:.4f}) residual={diag.residual:.1e}")
