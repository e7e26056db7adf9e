import numpy as np
import pytest

from bosegas import (ConfigurationError, CROSS_VALIDATED, MONOTONE,
                     ExplicitSolutionSpec, InvariantViolation, SolverConfig,
                     explicit_potential, rho_prime, rho_prime_fd,
                     solve_fixed_e, solve_fixed_rho, sweep, u_prime,
                     u_prime_integral)
from bosegas.solver import _fourier_iteration, _monotone_iteration


class TestSolveFixedE:
    def test_explicit_closed_form(self, state_explicit, explicit_spec):
        u_exact = explicit_spec.u_profile(state_explicit.grid.r)
        assert np.max(np.abs(state_explicit.u.values - u_exact)) < 1e-8
        assert state_explicit.rho == pytest.approx(explicit_spec.rho, rel=1e-9)

    def test_invariants_on_converged_states(self, state_explicit, state_gauss):
        for state in (state_explicit, state_gauss):
            state.require_invariants()

    def test_density_bracket(self, state_gauss):
        v1 = state_gauss.potential.norms.v_l1
        assert 2 * state_gauss.e / v1 <= state_gauss.rho <= 4 * state_gauss.e / v1

    def test_rejects_nonpositive_e(self, gauss_small):
        with pytest.raises(ConfigurationError):
            solve_fixed_e(gauss_small, -1.0, SolverConfig(n=256, r_max=20.0))

    def test_warm_start_converges_faster(self, gauss_small):
        config = SolverConfig(n=2047, r_max=60.0)
        cold = solve_fixed_e(gauss_small, 0.5, config)
        warm = solve_fixed_e(gauss_small, 0.5001, config, u0=cold.u)
        assert warm.iterations < cold.iterations

    def test_config_validation(self):
        with pytest.raises(ConfigurationError):
            SolverConfig(n=8)
        with pytest.raises(ConfigurationError):
            SolverConfig(scheme="newton")
        with pytest.raises(ConfigurationError):
            SolverConfig(outer_tol=1e-12, inner_tol=1e-12)


class TestSchemes:
    def test_cross_validated(self, gauss_small):
        config = SolverConfig(n=2047, r_max=60.0, scheme=CROSS_VALIDATED)
        state = solve_fixed_e(gauss_small, 0.3, config)
        assert state.cross_check is not None
        assert state.cross_check <= 1e-6
        assert state.monotone_iterates

    def test_monotone_iterates_increase(self, gauss_small):
        config = SolverConfig(n=2047, r_max=60.0, scheme=MONOTONE)
        state = solve_fixed_e(gauss_small, 0.3, config)
        assert state.monotone_iterates
        assert state.scheme_used == MONOTONE

    def test_fourier_matches_monotone_rho(self, gauss_small):
        config = SolverConfig(n=2047, r_max=60.0)
        grid = config.grid_for(0.3)
        v = gauss_small.resampled(grid)
        u_f, rho_f, _, _ = _fourier_iteration(v, 0.3, config, grid, None)
        u_m, rho_m, _, mono, _ = _monotone_iteration(v, 0.3, config, grid, None)
        assert mono
        assert abs(rho_f - rho_m) / rho_f < 5e-9
        assert np.max(np.abs(u_f - u_m)) < 1e-8

    def test_fallback_on_stiff_case(self, recwarn):
        # strong potential at small e: the k-space map is not contractive
        config = SolverConfig(n=8191, r_max=400.0, max_outer=120)
        v = explicit_potential(ExplicitSolutionSpec(1.0, 0.5, 1.0),
                               config.grid_for(0.01))
        state = solve_fixed_e(v, 0.01, config)
        assert state.scheme_used.endswith("(fallback)")
        assert state.monotone_iterates


class TestSolveFixedRho:
    def test_explicit_density_target(self, explicit_spec):
        config = SolverConfig(n=8191, r_max=400.0)
        v = explicit_potential(explicit_spec, config.grid_for(0.5))
        state = solve_fixed_rho(v, 2.0 / np.pi**2, config)
        assert state.e == pytest.approx(1.0, abs=1e-6)

    def test_round_trip_self_consistency(self, gauss_small):
        config = SolverConfig(n=2047, r_max=60.0)
        direct = solve_fixed_e(gauss_small, 0.4, config)
        back = solve_fixed_rho(gauss_small, direct.rho, config)
        assert back.e == pytest.approx(0.4, rel=1e-8)

    def test_bracket_endpoints_straddle(self, gauss_small):
        config = SolverConfig(n=2047, r_max=60.0)
        target = 0.1
        v1 = gauss_small.norms.v_l1
        lo = solve_fixed_e(gauss_small, target * v1 / 4.0, config)
        hi = solve_fixed_e(gauss_small, target * v1 / 2.0, config)
        assert lo.rho <= target <= hi.rho

    def test_rejects_nonpositive_target(self, gauss_small):
        with pytest.raises(ConfigurationError):
            solve_fixed_rho(gauss_small, 0.0)


class TestDerivatives:
    def test_rho_prime_positive_and_bounded(self, state_gauss):
        rp = rho_prime(state_gauss)
        assert 0.0 < rp <= 16.0 / state_gauss.potential.norms.v_l1

    def test_rho_prime_against_centered_fd(self, state_gauss):
        rp = rho_prime(state_gauss)
        fd = rho_prime_fd(state_gauss.potential, state_gauss)
        assert rp == pytest.approx(fd, rel=0.01)

    def test_rho_prime_denominator_in_unit_interval(self, state_explicit):
        kv = state_explicit.frakKe_v().values
        conv = state_explicit.u_convolution().values
        den = 1.0 - state_explicit.rho**2 * state_explicit.grid.integrate(kv * conv)
        assert 0.0 < den < 1.0

    def test_u_prime_identities(self, state_gauss):
        rp = rho_prime(state_gauss)
        up = u_prime(state_gauss, rp)
        g = state_gauss.grid
        # differentiating the constraint reproduces rho'
        lhs = (state_gauss.rho / state_gauss.e
               + state_gauss.rho**2 / (2 * state_gauss.e)
               * g.integrate(up.values * state_gauss.potential.samples.values))
        assert abs(lhs - rp) <= 1e-6 * abs(rp)
        # differentiating the normalization: int u' = -rho'/rho^2
        total = u_prime_integral(state_gauss, up, rp)
        assert total == pytest.approx(-rp / state_gauss.rho**2, rel=1e-4)

    def test_u_prime_against_centered_fd(self, gauss_small):
        config = SolverConfig(n=4095, r_max=100.0)
        e = 0.5
        state = solve_fixed_e(gauss_small.resampled(config.grid_for(e)), e, config)
        rp = rho_prime(state)
        up = u_prime(state, rp)
        de = 1e-4 * e
        hi = solve_fixed_e(state.potential, e + de, config, u0=state.u)
        lo = solve_fixed_e(state.potential, e - de, config, u0=state.u)
        fd = (hi.u.values - lo.u.values) / (2 * de)
        num = np.sqrt(state.grid.integrate((up.values - fd) ** 2))
        den = np.sqrt(state.grid.integrate(fd**2))
        assert num / den < 0.01


class TestSweep:
    def test_single_row_degenerate(self, gauss_small):
        config = SolverConfig(n=2047, r_max=60.0)
        record = sweep(gauss_small, [0.3], config)
        row = record.rows[0]
        assert row.error is None
        assert np.isnan(row.convexity_indicator)
        assert np.isnan(row.rho_prime_fd)

    def test_small_sweep_columns(self, gauss_small):
        config = SolverConfig(n=2047, r_max=60.0)
        record = sweep(gauss_small, np.geomspace(0.05, 0.3, 5), config)
        assert all(row.error is None for row in record.rows)
        assert all(row.rho_prime_analytic > 0 for row in record.rows)
        assert all(row.e_rho_increasing for row in record.rows)
        interior = record.rows[1:-1]
        assert all(np.isfinite(row.convexity_indicator) for row in interior)
        assert all(row.convexity_indicator > 0 for row in interior)
        fd = record.column("rho_prime_fd")[1:-1]
        an = record.column("rho_prime_analytic")[1:-1]
        np.testing.assert_allclose(an, fd, rtol=0.02)

    def test_rejects_unsorted_e(self, gauss_small):
        with pytest.raises(ConfigurationError):
            sweep(gauss_small, [0.3, 0.1], SolverConfig(n=2047, r_max=60.0))

    def test_regime_labels(self, gauss_small):
        config = SolverConfig(n=2047, r_max=60.0)
        record = sweep(gauss_small, [0.1, 2.0], config)
        assert record.rows[0].regime == "proven_small_e"
        assert record.rows[1].regime == "proven_large_e"


def test_rho_u_hat_tends_to_one_at_small_k(gauss_small):
    # the constraint forces rho*uhat(0) = 1; at the smallest grid k the
    # deviation is the kink term sqrt(2+beta) k/(2 sqrt(e)), so the 5e-3
    # window needs r_max * sqrt(e) >~ 450
    e = 0.01
    config = SolverConfig(n=32767, r_max=800.0 / np.sqrt(e))
    state = solve_fixed_e(gauss_small.resampled(config.grid_for(e)), e, config)
    assert abs(state.u_hat.values[0] - 1.0) <= 5e-3
    # and it is strictly below one for k > 0
    assert np.all(state.u_hat.values < 1.0)


class TestUnderResolution:
    def test_invariant_violation_surfaces(self, explicit_spec):
        config = SolverConfig(n=64, r_max=8.0)
        v = explicit_potential(explicit_spec, config.grid_for(1.0))
        state = solve_fixed_e(v, 1.0, config)
        with pytest.raises(InvariantViolation):
            state.require_invariants()
