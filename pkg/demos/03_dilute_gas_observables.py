#!/usr/bin/env python3
"""Dilute-regime observables: energy law, depletion, and the k^-4 tail.

At low density the solved states reproduce the universal expressions in
terms of the scattering length alone: the two-term energy expansion
e = 2 pi rho a0 (1 + 128/(15 sqrt(pi)) sqrt(rho a0^3) + ...), the
condensate depletion 8 sqrt(rho a0^3)/(3 sqrt(pi)), and the momentum
distribution plateau k^4 M(k) -> 4 e^2/rho.
"""

import numpy as np

from bosegas import (SolverConfig, gaussian_potential, lhy_coefficient,
                     make_grid, observables_report, solve_fixed_e)
from bosegas.grids import fast_grid_size

v0 = gaussian_potential(1.0, 1.0, make_grid(64, 10.0))
a0 = v0.a0
print(f"scattering length of gaussian(1,1): a0 = {a0:.10f}")
print(f"second-order energy coefficient 128/(15 sqrt(pi)) = {lhy_coefficient():.6f}\n")

for target in (1e-4, 1e-5, 1e-6):
    # place e by the energy law itself, then solve and measure
    rho_t = target / a0**3
    e = 2 * np.pi * rho_t * a0 * (1 + lhy_coefficient() * np.sqrt(target))
    r_max = 400.0 / np.sqrt(e)
    config = SolverConfig(n=fast_grid_size(int(r_max / 0.25)), r_max=r_max)
    state = solve_fixed_e(gaussian_potential(1.0, 1.0, config.grid_for(e)),
                          e, config)
    report = observables_report(state, a0=a0)

    print(f"rho a0^3 = {report.rho_a0_cubed:.3e}  (e = {state.e:.3e})")
    print(f"  e/(2 pi rho a0)            = {state.e/(2*np.pi*state.rho*a0):.6f}")
    print(f"  second-order ratio          = {report.lhy_ratio:.4f}   (-> 1)")
    print(f"  depletion eta               = {report.eta:.6e}")
    print(f"  eta / (8 sqrt(x)/3 sqrt(pi)) = {report.eta/report.eta_bogolyubov:.4f}")
    if report.momentum_samples:
        plateau = [k4m / report.tan_constant for _, _, k4m in report.momentum_samples]
        print(f"  k^4 M(k) rho/(4e^2) window  = [{min(plateau):.3f}, {max(plateau):.3f}]")
    fit = report.decay
    if fit.predicted_amplitude:
        print(f"  tail exponent / amp ratio   = {fit.exponent:.3f} / "
              f"{fit.measured_amplitude/fit.predicted_amplitude:.4f}")
    print()
