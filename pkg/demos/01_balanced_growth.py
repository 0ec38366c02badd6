"""Balanced growth: derived constants and the constant-ratio solution.

Starting on the balanced growth path every closed form collapses to a pure
exponential. This script prints the derived rates for the baseline model and
its externality variant, then shows k, c and h growing at their long-run
rates while the control stays flat.
"""

import numpy as np

from lucas_uzawa import InitialEndowment, ModelParams, assemble_solution, derive_constants

baseline = ModelParams(beta=0.5, sigma=2.0, rho=0.04, delta=0.05, gamma=0.1)
externality = baseline.replace(theta=0.1)

for label, params in (("baseline", baseline), ("externality", externality)):
    dc = derive_constants(params)
    print(f"{label:12s} eta={dc.eta:.4f} chi={dc.chi:.4f} xi={dc.xi:.4f} "
          f"varphi={dc.varphi:.4f} z*={dc.z_star:.4f} u*={dc.u_star:.6f}")

# h0 chosen so that h0**eta * u* / k0 equals z*
dc = derive_constants(baseline)
h0 = (dc.z_star / dc.u_star) ** (1 / dc.eta)
sol = assemble_solution(baseline, InitialEndowment(1.0, h0))
t = np.array([0.0, 25.0, 50.0, 100.0])
tr = sol.evaluate(t, with_integrals=False)
print("\n    t        k          c          h        u")
for row in zip(t, tr.k, tr.c, tr.h, tr.u_form1):
    print("{:5.0f} {:10.6f} {:10.6f} {:10.6f} {:8.6f}".format(*row))
print(f"\nk(100)/k(0) = {tr.k[-1] / tr.k[0]:.6f}, exp(100*chi) = {np.exp(100 * dc.chi):.6f}")
