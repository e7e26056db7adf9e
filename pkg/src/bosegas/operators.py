"""Resolvent operators acting on radial fields.

Four operators, all positivity preserving for repulsive v:

  G_e  = (-Delta + 4e)^-1                       diagonal in k
  K_e  = (-Delta + v + 4e)^-1                   damped fixed point via G_e
  Y_e  = (-Delta + 4e(1 - C_{rho u}))^-1        diagonal in k
  fK_e = (-Delta + v + 4e(1 - C_{rho u}))^-1    damped fixed point via Y_e

C_{rho u} is convolution by rho*u (a probability density), so Y_e's Fourier
multiplier is 1/(k^2 + 4e(1 - rho*uhat(k))), bounded below by sqrt(8e)|k|.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from .errors import ConfigurationError, ConvergenceError, InvariantViolation
from .grids import (FREQUENCY, POSITION, RadialField, RadialGrid,
                    fourier_radial, inverse_fourier_radial)
from .potentials import Potential, QualityWarning

DEFAULT_TOL = 1e-10
MAX_ITER = 10_000
MIN_DAMPING = 1.0 / 16.0
POSITIVITY_SLACK = 1e-10


@dataclass(frozen=True)
class LinearSolveReport:
    iterations: int
    final_residual: float
    converged: bool


@dataclass(frozen=True)
class OperatorContext:
    """Frozen ingredients of Y_e and fK_e for one converged state."""

    e: float
    v: Potential
    rho_u_hat: RadialField   # the function rho * uhat(k) on the k-grid
    grid: RadialGrid

    def __post_init__(self):
        if self.e <= 0:
            raise ConfigurationError("operator context needs e > 0")
        if self.rho_u_hat.space != FREQUENCY:
            raise ConfigurationError("rho_u_hat must be frequency-tagged")
        w = self.rho_u_hat.values
        if np.any(w < -1e-9) or np.any(w > 1.0 + 1e-9):
            k_bad = self.grid.k[int(np.argmax((w < -1e-9) | (w > 1.0 + 1e-9)))]
            raise InvariantViolation(
                f"rho*uhat out of (0, 1) at k = {k_bad:.6g}; state is not a valid "
                "solution (refine the grid or check the input)"
            )
        m = self.multiplier()
        floor = np.sqrt(8.0 * self.e) * self.grid.k
        bad = m < floor * (1.0 - 1e-9)
        if np.any(bad):
            k_bad = self.grid.k[int(np.argmax(bad))]
            raise InvariantViolation(
                f"multiplier k^2 + 4e(1 - rho*uhat) below its sqrt(8e)k floor at "
                f"k = {k_bad:.6g}; state violates the spectral lower bound"
            )

    def multiplier(self) -> np.ndarray:
        k = self.grid.k
        return k * k + 4.0 * self.e * (1.0 - self.rho_u_hat.values)


def _diagonal_apply(psi: RadialField, denominator: np.ndarray) -> RadialField:
    psi_hat = fourier_radial(psi)
    return inverse_fourier_radial(
        RadialField(psi.grid, psi_hat.values / denominator, FREQUENCY)
    )


def _warn_ringing(out: np.ndarray, psi: np.ndarray, label: str) -> np.ndarray:
    """Clamp sub-1e-10 negative ringing on sign-definite output; warn if worse."""
    if np.all(psi >= 0) and out.size:
        scale = max(float(np.max(np.abs(out))), 1e-300)
        worst = float(np.min(out))
        if worst < -POSITIVITY_SLACK * scale:
            warnings.warn(
                f"{label} lost positivity beyond ringing tolerance "
                f"(min {worst:.3e} vs scale {scale:.3e}); grid may be under-resolved",
                QualityWarning, stacklevel=3,
            )
        elif worst < 0:
            out = np.where(out < 0, 0.0, out)
    return out


def apply_Ge(psi: RadialField, e: float) -> RadialField:
    """G_e psi, Fourier multiplier 1/(k^2+4e); kernel exp(-2 sqrt(e)|x|)/(4 pi |x|)."""
    if e <= 0:
        raise ConfigurationError("apply_Ge needs e > 0")
    out = _diagonal_apply(psi, psi.grid.k**2 + 4.0 * e)
    vals = _warn_ringing(out.values, psi.values, "G_e")
    return RadialField(psi.grid, vals, POSITION)


def apply_Ye(psi: RadialField, ctx: OperatorContext) -> RadialField:
    """Y_e psi through the diagonal multiplier of the context."""
    out = _diagonal_apply(psi, ctx.multiplier())
    vals = _warn_ringing(out.values, psi.values, "Y_e")
    return RadialField(psi.grid, vals, POSITION)


def _damped_richardson(psi: RadialField, v_values: np.ndarray, resolvent_diag: np.ndarray,
                       tol: float, max_iter: int, label: str,
                       x0: np.ndarray | None = None):
    """Solve (kM + v) w = psi where kM is diagonal in k with entries resolvent_diag.

    Iteration: w <- (1-omega) w + omega * kM^-1 (psi - v w), with omega halved
    whenever the forward residual grows (floor 1/16). The forward operator is
    tracked algebraically (A w is linear in the update), with periodic
    recomputation to stop float drift.
    """
    grid = psi.grid
    psi_norm = psi.norm_l2()
    if psi_norm == 0.0:
        return RadialField(grid, np.zeros(grid.n), POSITION), LinearSolveReport(0, 0.0, True)

    def kM_inv(x_values):
        xh = fourier_radial(RadialField(grid, x_values, POSITION))
        return inverse_fourier_radial(
            RadialField(grid, xh.values / resolvent_diag, FREQUENCY)
        ).values

    def kM(x_values):
        xh = fourier_radial(RadialField(grid, x_values, POSITION))
        return inverse_fourier_radial(
            RadialField(grid, xh.values * resolvent_diag, FREQUENCY)
        ).values

    if x0 is None:
        w = np.zeros(grid.n)
        Aw = np.zeros(grid.n)      # kM w, maintained incrementally
    else:
        w = np.asarray(x0, dtype=float).copy()
        Aw = kM(w)
    omega = 1.0
    prev_res = np.inf
    res = np.inf
    for it in range(1, max_iter + 1):
        t = psi.values - v_values * w
        res = float(np.sqrt(grid.integrate((Aw + v_values * w - psi.values) ** 2))) / psi_norm
        if res <= tol:
            return RadialField(grid, w, POSITION), LinearSolveReport(it - 1, res, True)
        if res > prev_res * (1.0 + 1e-12):
            omega = max(omega * 0.5, MIN_DAMPING)
        prev_res = res
        step = kM_inv(t)
        w = (1.0 - omega) * w + omega * step
        Aw = (1.0 - omega) * Aw + omega * t
        if it % 64 == 0:
            Aw = kM(w)
    return RadialField(grid, w, POSITION), LinearSolveReport(max_iter, res, False)


def apply_Ke(psi: RadialField, e: float, v: Potential, tol: float = DEFAULT_TOL,
             max_iter: int = MAX_ITER,
             x0: np.ndarray | None = None) -> tuple[RadialField, LinearSolveReport]:
    """K_e psi = (-Delta + v + 4e)^-1 psi by damped fixed point through G_e."""
    if e <= 0:
        raise ConfigurationError("apply_Ke needs e > 0")
    out, report = _damped_richardson(
        psi, v.samples.values, psi.grid.k**2 + 4.0 * e, tol, max_iter, "K_e", x0=x0
    )
    vals = _warn_ringing(out.values, psi.values, "K_e")
    return RadialField(psi.grid, vals, POSITION), report


def apply_frakKe(psi: RadialField, ctx: OperatorContext, tol: float = DEFAULT_TOL,
                 max_iter: int = MAX_ITER) -> tuple[RadialField, LinearSolveReport]:
    """fK_e psi by damped fixed point through Y_e (resolvent identity)."""
    out, report = _damped_richardson(
        psi, ctx.v.samples.values, ctx.multiplier(), tol, max_iter, "fK_e"
    )
    vals = _warn_ringing(out.values, psi.values, "fK_e")
    return RadialField(psi.grid, vals, POSITION), report


def symmetry_check(phi: RadialField, psi: RadialField, ctx: OperatorContext,
                   tol: float = DEFAULT_TOL) -> float:
    """Relative defect of int phi fK_e psi = int psi fK_e phi (self-adjointness)."""
    k_psi, rep1 = apply_frakKe(psi, ctx, tol=tol)
    k_phi, rep2 = apply_frakKe(phi, ctx, tol=tol)
    if not (rep1.converged and rep2.converged):
        raise ConvergenceError("fK_e solve in symmetry check did not converge")
    a = ctx.grid.integrate(phi.values * k_psi.values)
    b = ctx.grid.integrate(psi.values * k_phi.values)
    return abs(a - b) / max(abs(a), 1e-300)


def frakKe_l2_bound(e: float) -> float:
    """Operator constant of ||fK_e psi||_2 <= (1/pi) (2e)^(-1/4) ||psi||_1."""
    return (2.0 * e) ** (-0.25) / np.pi


def xi_field(ctx: OperatorContext, rho_u: RadialField) -> RadialField:
    """xi = Y_e(rho u); flat at the value sqrt(2e)/(3 pi^2) as e -> 0."""
    return apply_Ye(rho_u, ctx)


def xi_flatness(ctx: OperatorContext, rho_u: RadialField,
                radii=(0.1, 1.0, 10.0)) -> dict:
    """Relative deviation of xi from its small-e constant at probe radii."""
    from .grids import evaluate

    xi = xi_field(ctx, rho_u)
    target = np.sqrt(2.0 * ctx.e) / (3.0 * np.pi**2)
    deviations = {}
    for r in radii:
        deviations[r] = abs(evaluate(xi, r) - target) / (np.sqrt(2.0 * ctx.e))
    return {"target": target, "deviations": deviations,
            "max_deviation": max(deviations.values())}
