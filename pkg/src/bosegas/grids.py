"""Radial grids, 3D spherically symmetric Fourier transforms, and quadrature.

Fourier convention: ``fhat(k) = int exp(i k.x) f(|x|) d^3x``, which for a
radial function reduces to ``fhat(k) = (4 pi / k) int_0^inf r sin(kr) f(r) dr``
with inverse ``f(r) = 1/(2 pi^2 r) int_0^inf k sin(kr) fhat(k) dk``.

On a uniform grid r_j = j*dr (j = 1..n, dr = r_max/(n+1)) with conjugate
wavenumbers k_m = m*pi/r_max, the sine integrals become a type-I discrete
sine transform of r*f(r), so the forward/inverse pair is exactly invertible
(dr * dk * (n+1) = pi) and convolution is diagonal in k.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable

import numpy as np
from scipy.fft import dst
from scipy.interpolate import CubicSpline

from .errors import ConfigurationError, GridMismatchError

POSITION = "position"
FREQUENCY = "frequency"

# Smallest grid accepted; production solves use n >= 16 (enforced by the
# solver config), but tiny grids are legal for direct transform work.
_MIN_NODES = 4


@dataclass(frozen=True)
class RadialGrid:
    """Paired real-space / frequency-space radial sampling.

    Attributes
    ----------
    n : int
        Number of interior nodes.
    r_max : float
        Truncation radius; the implied Dirichlet endpoints r=0 and
        r=r_max carry no nodes.
    """

    n: int
    r_max: float
    r: np.ndarray = field(repr=False, compare=False)
    k: np.ndarray = field(repr=False, compare=False)
    dr: float = field(compare=False)
    dk: float = field(compare=False)

    def integrate(self, values: np.ndarray) -> float:
        """3D position-space integral 4 pi int r^2 f dr by the trapezoid
        rule consistent with the sine transform (zero endpoints implied)."""
        return float(4.0 * np.pi * self.dr * np.sum(self.r * self.r * values))

    def integrate_k(self, values: np.ndarray) -> float:
        """3D frequency-space integral int f(k) d^3k / (2 pi)^3."""
        return float(self.dk / (2.0 * np.pi**2) * np.sum(self.k * self.k * values))

    def sine_sum(self, position_values: np.ndarray, k_points: np.ndarray) -> np.ndarray:
        """Transform evaluated at arbitrary k > 0 by the direct sine sum.

        O(n) per point; used for off-grid wavenumbers.
        """
        k_points = np.atleast_1d(np.asarray(k_points, dtype=float))
        weights = self.r * position_values
        out = np.empty_like(k_points)
        for i, kk in enumerate(k_points):
            out[i] = np.dot(weights, np.sin(kk * self.r))
        return 4.0 * np.pi * self.dr * out / k_points


def make_grid(n: int, r_max: float) -> RadialGrid:
    """Build conjugate radial/wavenumber grids with n interior nodes."""
    if not isinstance(n, (int, np.integer)):
        raise ConfigurationError(f"grid size must be an integer, got {n!r}")
    if n < _MIN_NODES:
        raise ConfigurationError(f"grid size n={n} is too small (need n >= {_MIN_NODES})")
    if not np.isfinite(r_max) or r_max <= 0:
        raise ConfigurationError(f"r_max must be positive and finite, got {r_max!r}")
    dr = r_max / (n + 1)
    dk = np.pi / r_max
    j = np.arange(1, n + 1, dtype=float)
    return RadialGrid(n=int(n), r_max=float(r_max), r=j * dr, k=j * dk, dr=dr, dk=dk)


@dataclass(frozen=True)
class RadialField:
    """Samples of a spherically symmetric function on a RadialGrid."""

    grid: RadialGrid
    values: np.ndarray
    space: str = POSITION

    def __post_init__(self):
        values = np.asarray(self.values, dtype=float)
        if values.shape != (self.grid.n,):
            raise ConfigurationError(
                f"field has {values.shape} values for a grid of {self.grid.n} nodes"
            )
        if not np.all(np.isfinite(values)):
            raise ConfigurationError("field values must all be finite")
        if self.space not in (POSITION, FREQUENCY):
            raise ConfigurationError(f"unknown space tag {self.space!r}")
        object.__setattr__(self, "values", values)

    def integral(self) -> float:
        if self.space == POSITION:
            return self.grid.integrate(self.values)
        return self.grid.integrate_k(self.values)

    def norm_l2(self) -> float:
        """L2(R^3) norm by the same quadrature as the transform."""
        if self.space == POSITION:
            return float(np.sqrt(self.grid.integrate(self.values**2)))
        return float(np.sqrt(self.grid.integrate_k(self.values**2)))


def zeros_like(grid: RadialGrid, space: str = POSITION) -> RadialField:
    return RadialField(grid, np.zeros(grid.n), space)


def field_from_profile(grid: RadialGrid, profile, space: str = POSITION) -> RadialField:
    nodes = grid.r if space == POSITION else grid.k
    return RadialField(grid, np.asarray(profile(nodes), dtype=float), space)


def _sine_transform(values: np.ndarray) -> np.ndarray:
    # scipy's DST-I carries a factor 2 relative to the plain sine sum.
    return 0.5 * dst(values, type=1)


def fourier_radial(f: RadialField) -> RadialField:
    """Forward transform fhat(k) = (4 pi / k) int r sin(kr) f(r) dr."""
    if f.space != POSITION:
        raise GridMismatchError("fourier_radial expects a position-space field")
    g = f.grid
    coeffs = _sine_transform(g.r * f.values)
    return RadialField(g, (4.0 * np.pi * g.dr / g.k) * coeffs, FREQUENCY)


def inverse_fourier_radial(fhat: RadialField) -> RadialField:
    """Inverse transform f(r) = 1/(2 pi^2 r) int k sin(kr) fhat(k) dk."""
    if fhat.space != FREQUENCY:
        raise GridMismatchError("inverse_fourier_radial expects a frequency-space field")
    g = fhat.grid
    coeffs = _sine_transform(g.k * fhat.values)
    return RadialField(g, (g.dk / (2.0 * np.pi**2 * g.r)) * coeffs, POSITION)


def convolve(f: RadialField, g: RadialField) -> RadialField:
    """3D convolution of two radial position-space fields via the transform."""
    if f.space != POSITION or g.space != POSITION:
        raise GridMismatchError("convolve expects two position-space fields")
    if f.grid is not g.grid and (f.grid.n != g.grid.n or f.grid.r_max != g.grid.r_max):
        raise GridMismatchError("convolve requires both fields on the same grid")
    fhat = fourier_radial(f)
    ghat = fourier_radial(g)
    return inverse_fourier_radial(
        RadialField(f.grid, fhat.values * ghat.values, FREQUENCY)
    )


@dataclass(frozen=True)
class Moments:
    """Low-order moments and Lp norms of a position-space field."""

    m0: float
    m2: float
    m4: float
    lp_norms: dict


def moments(f: RadialField, p_list: Iterable[float] = (1.0, 2.0)) -> Moments:
    """Moments int |x|^(2m) f d^3x and norms (4 pi int r^2 |f|^p dr)^(1/p)."""
    if f.space != POSITION:
        raise GridMismatchError("moments expects a position-space field")
    g = f.grid
    r2 = g.r * g.r
    m0 = g.integrate(f.values)
    m2 = g.integrate(r2 * f.values)
    m4 = g.integrate(r2 * r2 * f.values)
    norms = {}
    for p in p_list:
        norms[p] = float(g.integrate(np.abs(f.values) ** p) ** (1.0 / p))
    return Moments(m0=m0, m2=m2, m4=m4, lp_norms=norms)


def evaluate(f: RadialField, r, tail_power: float | None = None,
             tail_coeff: float | None = None):
    """Evaluate a position-space field at arbitrary radii.

    Cubic interpolation between nodes (even extension through r=0), exact at
    the nodes. Beyond r_max the field is zero unless a decaying tail is
    requested: with ``tail_power`` set, the continuation is
    ``tail_coeff / r**tail_power``; a missing coefficient is fitted from the
    last decade of nodes.
    """
    if f.space != POSITION:
        raise GridMismatchError("evaluate expects a position-space field")
    g = f.grid
    scalar = np.isscalar(r)
    r_arr = np.atleast_1d(np.asarray(r, dtype=float))
    if np.any(r_arr < 0):
        raise ConfigurationError("evaluate requires r >= 0")

    # Even extension: mirror the two innermost nodes across r=0 so the
    # interpolant has zero odd part at the origin.
    x = np.concatenate(([-g.r[1], -g.r[0]], g.r))
    y = np.concatenate(([f.values[1], f.values[0]], f.values))
    spline = CubicSpline(x, y, extrapolate=True)

    out = np.zeros_like(r_arr)
    inside = r_arr <= g.r[-1]
    out[inside] = spline(r_arr[inside])
    outside = ~inside
    if np.any(outside):
        if tail_power is not None:
            coeff = tail_coeff
            if coeff is None:
                coeff = fit_tail_coefficient(f, tail_power)
            out[outside] = coeff / r_arr[outside] ** tail_power
        # else: zero beyond the grid
    return float(out[0]) if scalar else out


def fit_tail_coefficient(f: RadialField, tail_power: float,
                         window: tuple[float, float] = (0.1, 1.0)) -> float:
    """Least-squares amplitude of A / r^p over a trailing radius window.

    ``window`` is in units of r_max; default uses the last decade.
    """
    g = f.grid
    lo, hi = window[0] * g.r_max, window[1] * g.r_max
    sel = (g.r >= lo) & (g.r <= hi)
    if not np.any(sel):
        raise ConfigurationError("tail window contains no grid nodes")
    basis = g.r[sel] ** (-tail_power)
    return float(np.dot(basis, f.values[sel]) / np.dot(basis, basis))


def plancherel_defect(f: RadialField) -> float:
    """Relative mismatch of 4pi int r^2 f^2 dr against its k-space value.

    Identically zero (to round-off) for the conjugate-grid transform; kept
    as a diagnostic of quadrature/transform consistency.
    """
    fhat = fourier_radial(f)
    lhs = f.grid.integrate(f.values**2)
    rhs = f.grid.integrate_k(fhat.values**2)
    return abs(lhs - rhs) / max(abs(lhs), 1e-300)


def healing_integral_check(grid: RadialGrid) -> float:
    """Quadrature of int ((k^2+1)/sqrt((k^2+1)^2 - 1) - 1) d^3k / (2 pi)^3.

    The exact value is 1/(3 pi^2 sqrt(2)); the k-grid trapezoid sum is
    completed with the integrand's k^-2 tail fitted at the last node.
    """
    k = grid.k
    integrand = (k * k + 1.0) / np.sqrt((k * k + 1.0) ** 2 - 1.0) - 1.0
    radial = k * k * integrand
    bulk = grid.dk * (np.sum(radial[:-1]) + 0.5 * radial[-1])
    # integrand ~ 1/(2 k^2) at large k, so the radial integrand tends to a
    # k^-2-integrable remainder; fit the coefficient at the boundary node.
    tail_coeff = radial[-1] * k[-1] ** 2
    tail = tail_coeff / k[-1]
    return float((bulk + tail) / (2.0 * np.pi**2))


def auto_r_max(e_min: float, scale: float = 40.0) -> float:
    """Default truncation radius from healing-length scaling."""
    if e_min <= 0:
        raise ConfigurationError("auto_r_max needs e_min > 0")
    return scale / np.sqrt(e_min)


def fast_grid_size(n_min: int) -> int:
    """Smallest n >= n_min whose DST-I is FFT-friendly.

    The type-I transform of length n runs as an FFT of length 2(n+1), so n+1
    should be 5-smooth; a power-of-two n is close to the worst possible case.
    """
    from scipy.fft import next_fast_len
    return int(next_fast_len(int(n_min) + 1, real=True)) - 1
