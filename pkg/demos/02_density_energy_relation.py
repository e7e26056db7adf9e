#!/usr/bin/env python3
"""Map out rho(e) for a Gaussian repulsion and check its proven structure.

The density is strictly increasing in e below e_star = sqrt(2) pi^3/||v||_1^2
(and above a second threshold), with rho' <= 16/||v||_1, e*rho(e) strictly
increasing everywhere, and rho*e(rho) convex at low density. The sweep
produces all of it in one pass, warm-starting each solve from the last.
"""

import numpy as np

from bosegas import SolverConfig, gaussian_potential, make_grid, sweep

v_probe = gaussian_potential(1.0, 1.0, make_grid(64, 10.0))
print(f"gaussian(1,1): ||v||_1 = {v_probe.norms.v_l1:.4f}, "
      f"e_star = {v_probe.e_star:.4f}, large-e threshold = {v_probe.e_large:.4f}")
print("(the two proven monotonicity windows overlap for this potential)\n")

e_values = np.geomspace(1e-5, 0.5, 12)
config = SolverConfig(n=65535, r_max=40.0 / np.sqrt(e_values[0]))
v = gaussian_potential(1.0, 1.0, config.grid_for(e_values[0]))
record = sweep(v, e_values, config)

convexity_label = "2rho'^2-rho rho''"
print(f"{'e':>10} {'rho':>12} {'rho_prime':>10} {'fd':>10} "
      f"{'e*rho':>11} {convexity_label:>17}")
for row in record.rows:
    fd = f"{row.rho_prime_fd:10.6f}" if np.isfinite(row.rho_prime_fd) else "         -"
    cx = f"{row.convexity_indicator:17.4f}" if np.isfinite(row.convexity_indicator) else "                -"
    print(f"{row.e:10.2e} {row.rho:12.6e} {row.rho_prime_analytic:10.6f} "
          f"{fd}{row.e_rho:12.4e} {cx}")

rows = record.converged_rows
print(f"\nall rho' > 0:                {all(r.rho_prime_analytic > 0 for r in rows)}")
print(f"all rho' <= 16/||v||_1:      "
      f"{all(r.rho_prime_analytic <= 16 / v.norms.v_l1 for r in rows)}")
print(f"e*rho strictly increasing:   {all(r.e_rho_increasing for r in rows)}")
interior = [r.convexity_indicator for r in rows[1:-1]]
print(f"convexity indicator > 0:     {all(c > 0 for c in interior)}")
print("\nlow-density slope check: rho ~ e/(2 pi a0) gives "
      f"rho' -> {1/(2*np.pi*v.a0):.4f}; measured at the smallest e: "
      f"{rows[0].rho_prime_analytic:.4f}")
