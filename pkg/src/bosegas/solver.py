"""Self-consistent solution of the pair-correlation ground-state system.

The system solved for an integrable u on R^3, at fixed energy per particle e:

    (-Delta + 4e + v) u = v + 2 e rho (u*u),      2e/rho = int (1-u) v dx

Two schemes converge to the same discrete fixed point:

* ``fourier_self_consistent`` (default): in k-space the equation is a
  quadratic in rho*uhat(k) whose integrable root is
  rho*uhat = y / (kappa^2+1 + sqrt((kappa^2+1)^2 - y)),
  y = (rho/2e) Shat(k), kappa = k/(2 sqrt(e)), S = (1-u) v.
* ``real_space_monotone``: u_{n+1} = K_e(v + 2 e rho_n (u_n*u_n)) with
  rho_n = 2e / int (1-u_n) v, starting from u_0 = 0. Iterates increase
  pointwise toward the solution.

Solutions decay like r^-4, so plain grid quadrature of int u misses an
O(1/r_max) tail. Integrals of u carry a tail-and-image correction whose
leading coefficient comes from the exact small-k form of rho*uhat:
rho*uhat = 1 - sqrt(2+beta) kappa + O(kappa^2) with
beta = -(rho/4e) d^2/dkappa^2 Shat(0) = (rho/3) int |x|^2 S dx, giving
rho u ~ sqrt(2+beta)/(2 pi^2 sqrt(e)) r^-4.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field, replace

import numpy as np
from scipy.optimize import brentq

from .errors import ConfigurationError, ConvergenceError, InvariantViolation
from .grids import (FREQUENCY, POSITION, RadialField, RadialGrid, auto_r_max,
                    convolve, fourier_radial, inverse_fourier_radial, make_grid)
from .operators import OperatorContext, apply_frakKe, apply_Ke
from .potentials import Potential, QualityWarning

FOURIER = "fourier_self_consistent"
MONOTONE = "real_space_monotone"
CROSS_VALIDATED = "cross_validated"
_SCHEMES = (FOURIER, MONOTONE, CROSS_VALIDATED)

# Image corrections sum this many reflections of the tail model about the
# grid boundary. Pointwise the images die like l^-3, but their r^2-weighted
# mass only like l^-4, so the integral corrections need a few dozen terms.
_N_IMAGES = 32


@dataclass(frozen=True)
class SolverConfig:
    n: int = 4096
    r_max: float | None = None          # None: auto healing-length scaling
    r_max_scale: float = 40.0
    outer_tol: float = 1e-10
    max_outer: int = 500
    scheme: str = FOURIER
    inner_tol: float = 1e-12
    inner_max_iter: int = 10_000
    warm_start: bool = True             # continuation across sweep rows

    def __post_init__(self):
        if self.n < 16:
            raise ConfigurationError(f"solver grids need n >= 16, got {self.n}")
        if self.scheme not in _SCHEMES:
            raise ConfigurationError(f"unknown scheme {self.scheme!r}; pick one of {_SCHEMES}")
        if self.outer_tol <= 10.0 * self.inner_tol:
            raise ConfigurationError("outer_tol must exceed 10x the inner tolerance")

    def grid_for(self, e_min: float) -> RadialGrid:
        r_max = self.r_max if self.r_max is not None else auto_r_max(e_min, self.r_max_scale)
        return make_grid(self.n, r_max)


@dataclass(frozen=True)
class TailModel:
    """u ~ c4/r^4 + c6/r^6 beyond the fit window; c4 is predicted, c6 fitted."""

    c4: float
    c6: float
    window: tuple[float, float]

    def profile(self, r):
        r = np.asarray(r, dtype=float)
        return self.c4 / r**4 + self.c6 / r**6

    def tail_integral(self, r_max: float) -> float:
        """int_{r_max}^inf 4 pi r^2 (c4/r^4 + c6/r^6) dr."""
        return 4.0 * np.pi * (self.c4 / r_max + self.c6 / (3.0 * r_max**3))


@dataclass
class SolutionState:
    """Converged bundle (e, rho, u, S, transforms, diagnostics) of one solve."""

    e: float
    rho: float
    u: RadialField
    u_hat: RadialField              # stores rho * uhat
    S: RadialField
    S_hat: RadialField
    potential: Potential
    config: SolverConfig
    iterations: int
    scheme_used: str
    pde_residual: float
    constraint_residual: float
    tail_mass: float                # rho * (tail integral beyond r_max)
    integral_u: float               # tail- and image-corrected int u
    beta_curvature: float           # -(rho/4e) d^2_kappa Shat(0)
    tail: TailModel
    cross_check: float | None = None
    monotone_iterates: bool | None = None
    notes: list = field(default_factory=list)
    _cache: dict = field(default_factory=dict, repr=False)

    @property
    def grid(self) -> RadialGrid:
        return self.u.grid

    @property
    def context(self) -> OperatorContext:
        if "context" not in self._cache:
            self._cache["context"] = OperatorContext(
                e=self.e, v=self.potential, rho_u_hat=self.u_hat, grid=self.grid
            )
        return self._cache["context"]

    def u_convolution(self) -> RadialField:
        if "u_conv" not in self._cache:
            self._cache["u_conv"] = convolve(self.u, self.u)
        return self._cache["u_conv"]

    def frakKe_v(self) -> RadialField:
        """fK_e v, the workhorse field of every derivative and observable."""
        if "frakKe_v" not in self._cache:
            out, report = apply_frakKe(
                self.potential.samples, self.context,
                tol=self.config.inner_tol, max_iter=self.config.inner_max_iter,
            )
            if not report.converged:
                raise ConvergenceError(
                    f"fK_e v solve stalled at residual {report.final_residual:.3e}"
                )
            self._cache["frakKe_v"] = out
        return self._cache["frakKe_v"]

    def normalization_defect(self) -> float:
        return abs(self.rho * self.integral_u - 1.0)

    def radicand_min(self) -> float:
        g = self.grid
        kappa2 = g.k**2 / (4.0 * self.e)
        return float(np.min((kappa2 + 1.0) ** 2
                            - self.rho / (2.0 * self.e) * self.S_hat.values))

    def check_invariants(self, norm_tol: float = 1e-6) -> dict:
        """Evaluate the state contract; returns name -> (value, ok)."""
        v1 = self.potential.norms.v_l1
        checks = {
            "u_nonneg": (float(np.min(self.u.values)), np.min(self.u.values) >= -1e-10),
            "u_le_one": (float(np.max(self.u.values)), np.max(self.u.values) <= 1.0 + 1e-10),
            "normalization": (self.normalization_defect(),
                              self.normalization_defect() <= norm_tol),
            "density_bracket": (self.rho,
                                2.0 * self.e / v1 <= self.rho <= 4.0 * self.e / v1),
            "constraint": (self.constraint_residual, self.constraint_residual <= 1e-8),
            "radicand_nonneg": (self.radicand_min(), self.radicand_min() >= 0.0),
            "pde_residual": (self.pde_residual, self.pde_residual <= 1e-7),
        }
        return checks

    def require_invariants(self, norm_tol: float = 1e-6):
        failed = {k: v for k, (v, ok) in self.check_invariants(norm_tol).items() if not ok}
        if failed:
            raise InvariantViolation(
                f"converged state violates {sorted(failed)} (values {failed}); "
                "increase r_max and/or n"
            )


# ---------------------------------------------------------------------------
# tail machinery
# ---------------------------------------------------------------------------

def _image_sum(r: np.ndarray, r_max: float, power: float, n_images: int = _N_IMAGES):
    """Boundary images of s -> s^-power under odd periodization of s^(1-power)."""
    out = np.zeros_like(r)
    for l in range(1, n_images + 1):
        out += ((2 * l * r_max + r) ** (1.0 - power)
                - (2 * l * r_max - r) ** (1.0 - power)) / r
    return out


def _tail_basis(r: np.ndarray, r_max: float, power: float) -> np.ndarray:
    """s^-power plus its boundary images (what the grid actually sees)."""
    return r ** (-power) + _image_sum(r, r_max, power)


def _s_tail_coefficients(v: Potential, s_values: np.ndarray, grid: RadialGrid):
    """Fit S ~ c1 r^-p + c2 r^-(p+2) over the trailing half-decade."""
    p = v.tail_power
    sel = grid.r >= 0.5 * grid.r_max
    r = grid.r[sel]
    design = np.column_stack([r ** (-p), r ** (-p - 2.0)])
    coef, *_ = np.linalg.lstsq(design, s_values[sel], rcond=None)
    return float(coef[0]), float(coef[1])


def _s_moment(v: Potential, s_values: np.ndarray, grid: RadialGrid, weight_power: int) -> float:
    """int |x|^weight_power S d^3x with the algebraic tail of v restored."""
    base = grid.integrate(grid.r**weight_power * s_values)
    if v.tail_power is None:
        return base
    p = v.tail_power
    if p - 2.0 - weight_power <= 1.0:
        return np.inf
    c1, c2 = _s_tail_coefficients(v, s_values, grid)
    R = grid.r_max
    q1 = p - 3.0 - weight_power
    q2 = p - 1.0 - weight_power
    return base + 4.0 * np.pi * (c1 * R ** (-q1) / q1 + c2 * R ** (-q2) / q2)


def fit_tail_model(u_values: np.ndarray, grid: RadialGrid, e: float, rho: float,
                   beta_curvature: float) -> TailModel:
    """Predicted r^-4 amplitude plus an image-aware least-squares r^-6 term.

    The c4 amplitude is not fitted: it is sqrt(2+beta)/(2 pi^2 sqrt(e) rho)
    from the small-k kink of rho*uhat, exact given beta. Only the subleading
    c6 is fitted, against basis functions that include the odd-periodization
    images the grid solution actually contains.
    """
    c4 = np.sqrt(2.0 + beta_curvature) / (2.0 * np.pi**2 * np.sqrt(e) * rho)
    R = grid.r_max
    lo = max(0.25 * R, 10.0 / np.sqrt(e))
    hi = 0.6 * R
    sel = (grid.r >= lo) & (grid.r <= hi)
    if hi <= 1.3 * lo or np.count_nonzero(sel) < 8:
        return TailModel(c4=c4, c6=0.0, window=(lo, hi))
    r = grid.r[sel]
    resid = u_values[sel] - c4 * _tail_basis(r, R, 4.0)
    basis6 = _tail_basis(r, R, 6.0)
    c6 = float(np.dot(basis6, resid) / np.dot(basis6, basis6))
    return TailModel(c4=c4, c6=c6, window=(lo, hi))


def corrected_field_integral(values: np.ndarray, grid: RadialGrid, tail: TailModel) -> float:
    """int f d^3x for a grid field that is the odd-periodization of a
    function behaving like the tail model beyond the grid."""
    base = grid.integrate(values)
    image4 = _image_sum(grid.r, grid.r_max, 4.0)
    image6 = _image_sum(grid.r, grid.r_max, 6.0)
    image_mass = grid.integrate(tail.c4 * image4 + tail.c6 * image6)
    # the image functions do not vanish at r_max (they cancel the model
    # there), so the zero-endpoint trapezoid needs the boundary weight back
    R = np.array([grid.r_max])
    img_R = float(tail.c4 * _image_sum(R, grid.r_max, 4.0)[0]
                  + tail.c6 * _image_sum(R, grid.r_max, 6.0)[0])
    image_mass += 2.0 * np.pi * grid.dr * grid.r_max**2 * img_R
    return base - image_mass + tail.tail_integral(grid.r_max)


# ---------------------------------------------------------------------------
# the two schemes
# ---------------------------------------------------------------------------

def _constraint_integral(v: Potential, u_values: np.ndarray, grid: RadialGrid) -> float:
    """int (1-u) v dx, with the algebraic tail of v restored when present."""
    s_values = (1.0 - u_values) * v.samples.values
    return _s_moment(v, s_values, grid, 0)


def _fourier_iteration(v: Potential, e: float, config: SolverConfig, grid: RadialGrid,
                       u0: np.ndarray | None):
    """Self-consistent k-space iteration; returns (u, rho, iterations, history)."""
    kappa2 = grid.k**2 / (4.0 * e)
    a = kappa2 + 1.0
    v_vals = v.samples.values
    u = np.zeros(grid.n) if u0 is None else u0.copy()
    omega = 1.0
    prev_delta = np.inf
    history = []
    for it in range(1, config.max_outer + 1):
        s_vals = (1.0 - u) * v_vals
        neg = s_vals < 0
        if np.any(neg):
            # transient u > 1 overshoot; clamped S keeps the radicand safe
            s_vals = np.where(neg, 0.0, s_vals)
        s_hat = fourier_radial(RadialField(grid, s_vals, POSITION))
        s0 = _s_moment(v, s_vals, grid, 0)
        rho = 2.0 * e / s0
        y = rho / (2.0 * e) * s_hat.values
        radicand = a * a - y
        bad = radicand < -1e-12 * a * a
        if np.any(bad):
            k_bad = grid.k[int(np.argmax(bad))]
            raise InvariantViolation(
                f"radicand of the k-space root went negative at k = {k_bad:.6g} "
                f"(min {np.min(radicand):.3e}); the grid under-resolves this "
                "state - increase n and/or r_max"
            )
        radicand = np.maximum(radicand, 0.0)
        # a - sqrt(a^2 - y) cancels catastrophically at large k; this form
        # keeps full relative precision in the spectral tail
        rho_u_hat = y / (a + np.sqrt(radicand))
        u_new = inverse_fourier_radial(
            RadialField(grid, rho_u_hat / rho, FREQUENCY)
        ).values
        delta = float(np.max(np.abs(u_new - u)))
        history.append(delta)
        if delta > prev_delta * (1.0 + 1e-12):
            omega = max(0.5 * omega, 1.0 / 16.0)
        prev_delta = delta
        u = (1.0 - omega) * u + omega * u_new
        if delta <= config.outer_tol:
            return u, rho, it, history
    raise ConvergenceError(
        f"k-space iteration did not reach {config.outer_tol} in "
        f"{config.max_outer} iterations (last delta {history[-1]:.3e})",
        history=history,
    )


def _monotone_iteration(v: Potential, e: float, config: SolverConfig, grid: RadialGrid,
                        u0: np.ndarray | None):
    """Pointwise-increasing real-space construction from u_0 = 0."""
    v_field = v.samples
    u = np.zeros(grid.n) if u0 is None else u0.copy()
    rho = 2.0 * e / _constraint_integral(v, u, grid)
    monotone = True
    history = []
    inner_guess = None
    for it in range(1, config.max_outer + 1):
        u_field = RadialField(grid, u, POSITION)
        conv = convolve(u_field, u_field)
        rhs = RadialField(grid, v_field.values + 2.0 * e * rho * conv.values, POSITION)
        u_next, report = apply_Ke(
            rhs, e, v, tol=config.inner_tol, max_iter=config.inner_max_iter,
            x0=inner_guess,
        )
        if not report.converged:
            raise ConvergenceError(
                f"inner K_e solve stalled at residual {report.final_residual:.3e} "
                f"on outer iteration {it}"
            )
        inner_guess = u_next.values
        delta = float(np.max(np.abs(u_next.values - u)))
        history.append(delta)
        if np.min(u_next.values - u) < -1e-9:
            monotone = False
        u = u_next.values
        rho_new = 2.0 * e / _constraint_integral(v, u, grid)
        if rho_new < rho - 1e-9 * rho:
            monotone = False
        rho = rho_new
        if delta <= config.outer_tol:
            return u, rho, it, monotone, history
    raise ConvergenceError(
        f"monotone iteration did not reach {config.outer_tol} in "
        f"{config.max_outer} iterations (last delta {history[-1]:.3e})",
        history=history,
    )


def _build_state(v: Potential, e: float, config: SolverConfig, grid: RadialGrid,
                 u_values: np.ndarray, rho: float, iterations: int,
                 scheme_used: str) -> SolutionState:
    u = RadialField(grid, u_values, POSITION)
    u_hat_plain = fourier_radial(u)
    rho_u_hat = RadialField(grid, np.clip(rho * u_hat_plain.values, 0.0, 1.0), FREQUENCY)
    s_vals = np.maximum((1.0 - u_values) * v.samples.values, 0.0)
    S = RadialField(grid, s_vals, POSITION)
    S_hat = fourier_radial(S)

    constraint = _constraint_integral(v, u_values, grid)
    constraint_residual = abs(constraint - 2.0 * e / rho) / (2.0 * e / rho)

    m2_s = _s_moment(v, s_vals, grid, 2)
    beta_curvature = rho * m2_s / 3.0

    tail = fit_tail_model(u_values, grid, e, rho, beta_curvature)
    integral_u = corrected_field_integral(u_values, grid, tail)
    tail_mass = rho * tail.tail_integral(grid.r_max)

    # PDE residual with the Laplacian applied spectrally
    conv = convolve(u, u)
    lap4e = inverse_fourier_radial(
        RadialField(grid, (grid.k**2 + 4.0 * e) * u_hat_plain.values, FREQUENCY)
    )
    resid = (lap4e.values + v.samples.values * u_values
             - v.samples.values - 2.0 * e * rho * conv.values)
    pde_residual = float(np.sqrt(grid.integrate(resid**2))
                         / np.sqrt(grid.integrate(v.samples.values**2)))

    state = SolutionState(
        e=e, rho=rho, u=u, u_hat=rho_u_hat, S=S, S_hat=S_hat,
        potential=v, config=config, iterations=iterations, scheme_used=scheme_used,
        pde_residual=pde_residual, constraint_residual=constraint_residual,
        tail_mass=tail_mass, integral_u=integral_u,
        beta_curvature=beta_curvature, tail=tail,
    )
    state._cache["u_conv"] = conv
    return state


def solve_fixed_e(v: Potential, e: float, config: SolverConfig | None = None,
                  u0: RadialField | None = None) -> SolutionState:
    """Solve the system at fixed e; returns a converged SolutionState.

    With ``cross_validated`` both schemes run and must agree in L-infinity
    within 1e-6. The k-space scheme falls back to the monotone construction
    automatically if it fails to converge.
    """
    if e <= 0:
        raise ConfigurationError("solve_fixed_e needs e > 0")
    config = config or SolverConfig()
    grid = config.grid_for(e)
    v = v.resampled(grid)
    u0_values = None
    if u0 is not None:
        if u0.grid.n != grid.n or u0.grid.r_max != grid.r_max:
            raise ConfigurationError("warm start field lives on a different grid")
        u0_values = u0.values

    monotone_flag = None
    if config.scheme == CROSS_VALIDATED:
        u_f, rho_f, it_f, _ = _fourier_iteration(v, e, config, grid, u0_values)
        u_m, rho_m, it_m, monotone_flag, _ = _monotone_iteration(v, e, config, grid, None)
        gap = float(np.max(np.abs(u_f - u_m)))
        if gap > 1e-6:
            raise InvariantViolation(
                f"scheme cross-validation failed: L-inf gap {gap:.3e} exceeds 1e-6"
            )
        state = _build_state(v, e, config, grid, u_f, rho_f, it_f + it_m, CROSS_VALIDATED)
        state.cross_check = gap
        state.monotone_iterates = monotone_flag
        return state

    if config.scheme == MONOTONE:
        u_m, rho_m, it, monotone_flag, _ = _monotone_iteration(v, e, config, grid, u0_values)
        state = _build_state(v, e, config, grid, u_m, rho_m, it, MONOTONE)
        state.monotone_iterates = monotone_flag
        return state

    try:
        u_f, rho_f, it, _ = _fourier_iteration(v, e, config, grid, u0_values)
        return _build_state(v, e, config, grid, u_f, rho_f, it, FOURIER)
    except ConvergenceError:
        warnings.warn(
            "k-space iteration stalled; falling back to the monotone scheme",
            QualityWarning, stacklevel=2,
        )
        u_m, rho_m, it, monotone_flag, _ = _monotone_iteration(v, e, config, grid, None)
        state = _build_state(v, e, config, grid, u_m, rho_m, it, MONOTONE + "(fallback)")
        state.monotone_iterates = monotone_flag
        return state


# ---------------------------------------------------------------------------
# derivatives in e
# ---------------------------------------------------------------------------

def rho_prime(state: SolutionState) -> float:
    """Analytic drho/de from the closed ratio

        (e/rho) rho' = (1 + rho int (fK_e v)(rho u*u - 2u))
                       / (1 - rho^2 int (fK_e v) u*u).

    The denominator is provably positive; it is asserted here.
    """
    kv = state.frakKe_v().values
    grid = state.grid
    u = state.u.values
    conv = state.u_convolution().values
    rho = state.rho
    int_kv_conv = grid.integrate(kv * conv)
    int_kv_u = grid.integrate(kv * u)
    denominator = 1.0 - rho**2 * int_kv_conv
    if denominator <= 0.0:
        raise InvariantViolation(
            f"rho' denominator {denominator:.3e} is not positive; state is "
            "inconsistent (0 <= fK_e v <= 1 must have failed)"
        )
    numerator = 1.0 + rho * (rho * int_kv_conv - 2.0 * int_kv_u)
    return float(state.rho / state.e * numerator / denominator)


def u_prime(state: SolutionState, rho_prime_value: float) -> RadialField:
    """u' = fK_e(-4u + 2 rho u*u + 2 e rho' u*u), the e-derivative of u."""
    conv = state.u_convolution().values
    payload = RadialField(
        state.grid,
        -4.0 * state.u.values
        + (2.0 * state.rho + 2.0 * state.e * rho_prime_value) * conv,
        POSITION,
    )
    out, report = apply_frakKe(payload, state.context,
                               tol=state.config.inner_tol,
                               max_iter=state.config.inner_max_iter)
    if not report.converged:
        raise ConvergenceError(
            f"fK_e solve for u' stalled at residual {report.final_residual:.3e}"
        )
    return out


def u_prime_integral(state: SolutionState, uprime: RadialField,
                     rho_prime_value: float) -> float:
    """Tail-corrected int u' dx (u' inherits the r^-4 tail of u).

    The predicted r^-4 amplitude of u' is the e-derivative of the one for u,
    computable from local quadratures: with C = c4(e),
    C'/C = beta'/(2(2+beta)) - 1/(2e) - rho'/rho and
    beta' = (rho'/rho) beta - (rho/3) int |x|^2 v u' dx.
    """
    grid = state.grid
    beta = state.beta_curvature
    m2_vu = grid.integrate(grid.r**2 * state.potential.samples.values * uprime.values)
    beta_p = rho_prime_value / state.rho * beta - state.rho / 3.0 * m2_vu
    log_deriv = (beta_p / (2.0 * (2.0 + beta)) - 1.0 / (2.0 * state.e)
                 - rho_prime_value / state.rho)
    c4p = state.tail.c4 * log_deriv
    R = grid.r_max
    lo, hi = state.tail.window
    sel = (grid.r >= lo) & (grid.r <= hi)
    if np.count_nonzero(sel) >= 8:
        r = grid.r[sel]
        resid = uprime.values[sel] - c4p * _tail_basis(r, R, 4.0)
        basis6 = _tail_basis(r, R, 6.0)
        c6p = float(np.dot(basis6, resid) / np.dot(basis6, basis6))
    else:
        c6p = 0.0
    return corrected_field_integral(uprime.values, grid, TailModel(c4p, c6p, (lo, hi)))


def rho_prime_fd(v: Potential, state: SolutionState, rel_step: float = 1e-4) -> float:
    """Centered finite difference of rho(e), warm-started from the state."""
    de = rel_step * state.e
    cfg = replace(state.config, r_max=state.grid.r_max)
    hi = solve_fixed_e(v, state.e + de, cfg, u0=state.u)
    lo = solve_fixed_e(v, state.e - de, cfg, u0=state.u)
    return float((hi.rho - lo.rho) / (2.0 * de))


# ---------------------------------------------------------------------------
# sweeps and inversion
# ---------------------------------------------------------------------------

@dataclass
class SweepRow:
    e: float
    rho: float = np.nan
    e_rho: float = np.nan
    rho_prime_analytic: float = np.nan
    rho_prime_fd: float = np.nan
    rho_second: float = np.nan
    convexity_indicator: float = np.nan
    regime: str = ""
    e_rho_increasing: bool = True
    state: SolutionState | None = None
    error: str | None = None


@dataclass
class SweepRecord:
    rows: list
    potential_name: str
    grid_n: int
    grid_r_max: float
    e_star: float
    e_large: float

    def column(self, name: str) -> np.ndarray:
        return np.array([getattr(row, name) for row in self.rows])

    @property
    def converged_rows(self) -> list:
        return [row for row in self.rows if row.error is None]


def _regime_label(e: float, v: Potential) -> str:
    if e < v.e_star:
        return "proven_small_e"
    if e > v.e_large:
        return "proven_large_e"
    return "outside proven monotonicity regime"


def sweep(v: Potential, e_values, config: SolverConfig | None = None,
          fd_check: bool = False) -> SweepRecord:
    """Warm-started continuation over an increasing e-grid.

    Produces rho, analytic rho', finite-difference rho' (from neighbor rows,
    or dedicated +-1e-4 e solves when ``fd_check``), rho'' by centered
    differencing of the analytic rho' column, the convexity indicator
    2 rho'^2 - rho rho'', and the e*rho(e) monotonicity flags. Rows that
    fail to solve are recorded and the sweep continues.
    """
    e_values = np.asarray(list(e_values), dtype=float)
    if np.any(np.diff(e_values) <= 0):
        raise ConfigurationError("sweep needs strictly increasing e values")
    config = config or SolverConfig()
    grid = config.grid_for(float(e_values[0]))
    cfg = replace(config, r_max=grid.r_max)
    v = v.resampled(grid)

    rows = []
    u_prev = None
    for e in e_values:
        row = SweepRow(e=float(e))
        try:
            state = solve_fixed_e(v, float(e), cfg,
                                  u0=u_prev if config.warm_start else None)
            row.rho = state.rho
            row.e_rho = float(e) * state.rho
            row.rho_prime_analytic = rho_prime(state)
            row.regime = _regime_label(float(e), v)
            row.state = state
            if fd_check:
                row.rho_prime_fd = rho_prime_fd(v, state)
            u_prev = state.u
        except (ConvergenceError, InvariantViolation) as exc:
            row.error = str(exc)
        rows.append(row)

    good = [i for i, row in enumerate(rows) if row.error is None]
    # neighbor-based FD column where dedicated solves were not requested
    if not fd_check:
        for idx in range(len(good)):
            if 0 < idx < len(good) - 1:
                im, i0, ip = good[idx - 1], good[idx], good[idx + 1]
                hm = rows[i0].e - rows[im].e
                hp = rows[ip].e - rows[i0].e
                rows[i0].rho_prime_fd = float(
                    (hm**2 * rows[ip].rho - hp**2 * rows[im].rho
                     + (hp**2 - hm**2) * rows[i0].rho) / (hm * hp * (hm + hp))
                )
    # rho'' from the analytic rho' column and the convexity indicator
    for idx in range(1, len(good) - 1):
        im, i0, ip = good[idx - 1], good[idx], good[idx + 1]
        rows[i0].rho_second = float(
            (rows[ip].rho_prime_analytic - rows[im].rho_prime_analytic)
            / (rows[ip].e - rows[im].e)
        )
        rows[i0].convexity_indicator = float(
            2.0 * rows[i0].rho_prime_analytic**2 - rows[i0].rho * rows[i0].rho_second
        )
    for idx in range(1, len(good)):
        prev, cur = rows[good[idx - 1]], rows[good[idx]]
        if cur.e_rho <= prev.e_rho:
            cur.e_rho_increasing = False

    return SweepRecord(
        rows=rows, potential_name=v.name, grid_n=grid.n, grid_r_max=grid.r_max,
        e_star=v.e_star, e_large=v.e_large,
    )


def solve_fixed_rho(v: Potential, rho_target: float,
                    config: SolverConfig | None = None,
                    rho_rtol: float = 1e-8) -> SolutionState:
    """Invert rho(e): find e with rho(e) = rho_target.

    The initial bracket [rho ||v||_1 / 4, rho ||v||_1 / 2] is guaranteed by
    the density bracket 2e/||v||_1 <= rho(e) <= 4e/||v||_1. If the bracket
    does not straddle (possible outside the proven monotone regimes) a log
    scan locates sign changes and reports multiplicity.
    """
    if rho_target <= 0:
        raise ConfigurationError("solve_fixed_rho needs rho_target > 0")
    config = config or SolverConfig()
    v1 = v.norms.v_l1
    e_lo = rho_target * v1 / 4.0
    e_hi = rho_target * v1 / 2.0
    grid = config.grid_for(e_lo)
    cfg = replace(config, r_max=grid.r_max)

    cache: dict[float, SolutionState] = {}
    warm: list = [None]

    def rho_defect(e: float) -> float:
        state = solve_fixed_e(v, e, cfg, u0=warm[0])
        warm[0] = state.u
        cache[e] = state
        return state.rho / rho_target - 1.0

    f_lo = rho_defect(e_lo)
    f_hi = rho_defect(e_hi)
    if f_lo == 0.0:
        return cache[e_lo]
    if f_hi == 0.0:
        return cache[e_hi]
    if f_lo * f_hi > 0:
        # non-monotone or bracket-degenerate: scan for sign changes
        scan = np.geomspace(e_lo / 4.0, e_hi * 4.0, 25)
        values = [rho_defect(float(e)) for e in scan]
        crossings = [i for i in range(len(scan) - 1) if values[i] * values[i + 1] <= 0]
        if not crossings:
            raise ConvergenceError(
                f"no e with rho(e) = {rho_target:g} found in "
                f"[{scan[0]:.3g}, {scan[-1]:.3g}]"
            )
        if len(crossings) > 1:
            warnings.warn(
                f"rho(e) = {rho_target:g} has {len(crossings)} candidate roots; "
                "returning the smallest-e one", QualityWarning, stacklevel=2,
            )
        i = crossings[0]
        e_lo, e_hi = float(scan[i]), float(scan[i + 1])
        f_lo, f_hi = values[i], values[i + 1]

    e_root = brentq(rho_defect, e_lo, e_hi, xtol=1e-300, rtol=1e-14, maxiter=200)
    state = cache.get(e_root) or solve_fixed_e(v, float(e_root), cfg, u0=warm[0])
    defect = abs(state.rho - rho_target) / rho_target
    if defect > rho_rtol:
        raise ConvergenceError(
            f"density inversion stopped at |rho - target|/target = {defect:.3e}"
        )
    return state
