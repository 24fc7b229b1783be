import math

import numpy as np
import pytest
from scipy.integrate import solve_ivp

from sigmaevo.errors import GridMismatchError, ParameterError
from sigmaevo.params import EquationParams
from sigmaevo.spectral import (FieldState, GridSpec, MultiplierCache,
                               Propagator, characteristic_roots, energy,
                               fractional_derivative, fractional_symbol,
                               linear_evolve, mode_coefficients,
                               propagator_multipliers, read_field,
                               synthesize, wrap_time, write_field,
                               write_state_csv)


def oracle_multipliers(t, xi, sigma, delta, rtol=1e-12):
    """Independent route: adaptive integration of the per-mode ODE."""
    b = 1.0 if delta == 0 else (xi ** (2 * delta) if xi > 0 else 0.0)
    c = xi ** (2 * sigma) if xi > 0 else 0.0

    def rhs(_, y):
        return [y[1], -b * y[1] - c * y[0]]

    if t == 0:
        return 1.0, 0.0
    s0 = solve_ivp(rhs, [0, t], [1, 0], rtol=rtol, atol=1e-15, method="DOP853")
    s1 = solve_ivp(rhs, [0, t], [0, 1], rtol=rtol, atol=1e-15, method="DOP853")
    return s0.y[0][-1], s1.y[0][-1]


class TestGrid:
    def test_power_of_two_required(self):
        with pytest.raises(ParameterError):
            GridSpec(1, 100, 1.0)

    def test_cell_volume(self):
        g = GridSpec(2, 8, 2.0)
        assert g.cell_volume == pytest.approx((4.0 / 8) ** 2)

    def test_frequencies(self):
        g = GridSpec(1, 8, 2.0)
        xi = g.wavenumber_axis()
        assert xi[0] == 0.0
        assert xi[1] == pytest.approx(math.pi / 2.0)
        assert np.min(xi) == pytest.approx(-math.pi / 2.0 * 4)

    def test_roundtrip_identity(self):
        g = GridSpec(2, 32, 3.0)
        rng = np.random.default_rng(0)
        u = rng.standard_normal(g.shape)
        v = g.ifft(g.fft(u))
        assert np.max(np.abs(u - v)) < 1e-12 * np.max(np.abs(u))

    def test_field_shape_checked(self):
        g = GridSpec(1, 16, 1.0)
        with pytest.raises(GridMismatchError):
            g.fft(np.zeros(8))


class TestRoots:
    def test_zero_mode_double_root(self):
        assert characteristic_roots(0.0, 2, 1) == (0.0, 0.0)

    def test_unit_mode_frictional(self):
        lp, lm = characteristic_roots(1.0, 1, 0)
        assert lp == pytest.approx((-1 + 1j * math.sqrt(3)) / 2)
        assert lm == pytest.approx((-1 - 1j * math.sqrt(3)) / 2)

    def test_quadratic_formula_case(self):
        lp, lm = characteristic_roots(2.0, 1, 0.5)
        assert lp == pytest.approx(-1 + 1j * math.sqrt(3))
        assert lm == pytest.approx(-1 - 1j * math.sqrt(3))

    def test_exact_double_root(self):
        # frictional case coalesces at |xi| = 1/2
        lp, lm = characteristic_roots(0.5, 1, 0)
        assert lp == pytest.approx(-0.5)
        assert lm == pytest.approx(-0.5)

    def test_vieta_residuals(self):
        rng = np.random.default_rng(7)
        for _ in range(50):
            sigma = rng.uniform(1, 3)
            delta = rng.uniform(0, sigma / 2)
            g = GridSpec(1, 128, rng.uniform(1, 50))
            cache = MultiplierCache.build(g, sigma, delta)
            sum_resid = np.abs(cache.lam_plus + cache.lam_minus + cache.b)
            prod_resid = np.abs(cache.lam_plus * cache.lam_minus - cache.c)
            scale = np.maximum(1.0, np.abs(cache.b) + np.abs(cache.c))
            assert np.max(sum_resid / scale) < 1e-12
            assert np.max(prod_resid / scale) < 1e-12
            assert np.all(cache.lam_plus.real <= 1e-15)
            assert np.all(cache.lam_minus.real <= 1e-15)


class TestPropagators:
    def test_initial_conditions_exact(self):
        for xi in (0.0, 0.3, 5.0):
            K0, K1 = propagator_multipliers(0.0, xi, 1.5, 0.5)
            assert K0 == 1.0
            assert K1 == 0.0

    def test_zero_mode_linear_growth(self):
        # with delta > 0 nothing damps the zero mode: K1(t, 0) = t exactly
        for t in (0.1, 1.0, 10.0):
            K0, K1 = propagator_multipliers(t, 0.0, 2, 1)
            assert K0 == pytest.approx(1.0, abs=1e-12)
            assert K1 == pytest.approx(t, abs=1e-12)

    def test_zero_mode_frictional(self):
        # delta = 0 damping acts at xi = 0 too: K1(t, 0) = 1 - exp(-t)
        K0, K1 = propagator_multipliers(2.0, 0.0, 1, 0)
        assert K0 == pytest.approx(1.0, abs=1e-12)
        assert K1 == pytest.approx(1.0 - math.exp(-2.0), rel=1e-12)

    def test_against_ode_oracle(self):
        K0, K1 = propagator_multipliers(1.0, 1.0, 1, 0)
        o0, o1 = oracle_multipliers(1.0, 1.0, 1, 0)
        assert K0.real == pytest.approx(o0, abs=1e-10)
        assert K1.real == pytest.approx(o1, abs=1e-10)

    def test_near_degenerate_series_branch(self):
        # just off the coalescence shell the difference quotient would lose
        # digits; compare against the oracle there
        for xi in (0.5, 0.5 + 1e-7, 0.5 - 1e-7):
            K0, K1 = propagator_multipliers(0.7, xi, 1, 0)
            o0, o1 = oracle_multipliers(0.7, xi, 1, 0, rtol=1e-13)
            assert abs(K0.real - o0) < 1e-10
            assert abs(K1.real - o1) < 1e-10

    def test_derivative_multipliers(self):
        g = GridSpec(1, 64, 5.0)
        cache = MultiplierCache.build(g, 1.3, 0.4)
        dt = 1e-6
        p0 = Propagator.build(cache, 0.5 - dt)
        p1 = Propagator.build(cache, 0.5 + dt)
        pm = Propagator.build(cache, 0.5)
        fd0 = (p1.K0 - p0.K0) / (2 * dt)
        fd1 = (p1.K1 - p0.K1) / (2 * dt)
        assert np.max(np.abs(fd0 - pm.D0)) < 1e-5
        assert np.max(np.abs(fd1 - pm.D1)) < 1e-5

    def test_multipliers_bounded_in_time(self):
        # damping keeps |K0| and the scaled |K1| bounded uniformly in t
        g = GridSpec(1, 256, 10.0)
        for sigma, delta in ((1.0, 0.0), (2.0, 1.0), (1.5, 0.5)):
            cache = MultiplierCache.build(g, sigma, delta)
            scale = np.sqrt(np.maximum(1.0, cache.c))
            for t in (0.01, 0.1, 1.0, 10.0, 100.0):
                prop = Propagator.build(cache, t)
                nonzero = cache.c > 0   # the xi = 0 mode may grow linearly
                assert np.max(np.abs(prop.K0[nonzero])) < 10.0
                assert np.max((np.abs(prop.K1) * scale)[nonzero]) < 10.0


class TestLinearEvolve:
    def setup_method(self):
        self.grid = GridSpec(1, 256, 20.0)
        self.params = EquationParams(sigma=1, delta=0, m=1, n=1, p=3, r=1)
        x = self.grid.axis()
        self.u0 = np.exp(-x ** 2)

    def test_time_zero_identity(self):
        st = linear_evolve(self.u0, np.zeros_like(self.u0), 0.0, self.params, self.grid)
        assert np.array_equal(st.u, self.u0) or np.max(np.abs(st.u - self.u0)) < 1e-14
        assert np.max(np.abs(st.ut)) < 1e-14

    def test_single_mode_amplitude(self):
        g = GridSpec(1, 128, np.pi)
        u0 = np.cos(g.axis())
        p = self.params
        st = linear_evolve(u0, np.zeros_like(u0), 1.0, p, g)
        K0, _ = propagator_multipliers(1.0, 1.0, p.sigma, p.delta)
        # the evolved field is Re(K0) cos(x) for real data on a single mode
        expected = K0.real * u0
        assert np.max(np.abs(st.u - expected)) < 1e-12

    def test_mean_growth_with_structural_damping(self):
        p = EquationParams(sigma=2, delta=1, m=1, n=1, p=2, r=2)
        u1 = np.exp(-self.grid.axis() ** 2)
        st = linear_evolve(np.zeros_like(u1), u1, 4.0, p, self.grid)
        assert np.mean(st.u) == pytest.approx(4.0 * np.mean(u1), rel=1e-12)

    def test_semigroup_property(self):
        u1 = 0.3 * np.exp(-(self.grid.axis() - 2) ** 2)
        a = linear_evolve(self.u0, u1, 0.8, self.params, self.grid)
        b = linear_evolve(a.u, a.ut, 0.7, self.params, self.grid)
        direct = linear_evolve(self.u0, u1, 1.5, self.params, self.grid)
        scale = np.max(np.abs(direct.u))
        assert np.max(np.abs(b.u - direct.u)) < 1e-10 * scale
        assert np.max(np.abs(b.ut - direct.ut)) < 1e-10 * max(scale, np.max(np.abs(direct.ut)))

    def test_energy_dissipation_monotone(self):
        times = np.linspace(0, 5, 41)
        uh0 = self.grid.fft(self.u0)
        uth0 = self.grid.fft(np.zeros_like(self.u0))
        cache = MultiplierCache.build(self.grid, self.params.sigma, self.params.delta)
        es = []
        for t in times:
            uh, uth = Propagator.build(cache, float(t)).apply(uh0, uth0)
            es.append(energy(uh, uth, self.grid, self.params.sigma))
        assert np.all(np.diff(es) <= 1e-12 * es[0])

    def test_grid_mismatch(self):
        with pytest.raises(GridMismatchError):
            linear_evolve(self.u0[:128], np.zeros(128), 1.0, self.params, self.grid)


class TestFractionalDerivative:
    def test_identity_at_zero(self):
        g = GridSpec(1, 64, 2.0)
        u = np.sin(g.axis())
        assert np.array_equal(fractional_derivative(u, 0.0, g), u)

    def test_laplacian_of_cosine(self):
        g = GridSpec(1, 128, np.pi)
        u = np.cos(g.axis())
        out = fractional_derivative(u, 2.0, g)
        assert np.max(np.abs(out - u)) < 1e-12

    def test_first_power_scales_mode(self):
        g = GridSpec(1, 128, np.pi)
        u = np.cos(2 * g.axis())
        out = fractional_derivative(u, 1.0, g)
        assert np.max(np.abs(out - 2 * u)) < 1e-12

    def test_symbol_zero_mode(self):
        xisq = np.array([0.0, 1.0, 4.0])
        assert fractional_symbol(xisq, 0.0).tolist() == [1.0, 1.0, 1.0]
        assert fractional_symbol(xisq, 3.0)[0] == 0.0

    def test_negative_power_rejected(self):
        g = GridSpec(1, 64, 1.0)
        with pytest.raises(ParameterError):
            fractional_derivative(np.zeros(g.shape), -1.0, g)


class TestBandLimited:
    def test_real_and_reproducible_across_grids(self):
        rng = np.random.default_rng(3)
        coeffs = mode_coefficients(8, 1, rng)
        g1 = GridSpec(1, 64, 2.0)
        g2 = GridSpec(1, 256, 2.0)
        u1 = synthesize(coeffs, g1)
        u2 = synthesize(coeffs, g2)
        # same continuum field: samples of u2 at u1's points coincide
        assert np.max(np.abs(u2[::4] - u1)) < 1e-10 * max(1.0, np.max(np.abs(u1)))
        assert abs(np.mean(u1)) < 1e-13


class TestTwoDimensional:
    def test_gaussian_l1_closed_form(self):
        from sigmaevo.norms import lebesgue_norm
        g = GridSpec(2, 128, 12.0)
        r2 = sum(c * c for c in g.coords())
        u = np.exp(-r2)
        assert lebesgue_norm(u, 1, g) == pytest.approx(np.pi, rel=1e-10)

    def test_plancherel(self):
        from sigmaevo.norms import lebesgue_norm, sobolev_norm
        g = GridSpec(2, 64, 2.0)
        u = synthesize(mode_coefficients(8, 2, np.random.default_rng(1)), g)
        assert sobolev_norm(u, 0, g) == pytest.approx(lebesgue_norm(u, 2, g), rel=1e-10)

    def test_linear_energy_decay(self):
        g = GridSpec(2, 64, 15.0)
        p = EquationParams(sigma=1, delta=0.5, m=1, n=2, p=2, r=1)
        r2 = sum(c * c for c in g.coords())
        u0 = np.exp(-r2)
        uh0 = g.fft(u0)
        uth0 = g.fft(np.zeros_like(u0))
        cache = MultiplierCache.build(g, p.sigma, p.delta)
        es = []
        for t in np.linspace(0, 4, 17):
            uh, uth = Propagator.build(cache, float(t)).apply(uh0, uth0)
            es.append(energy(uh, uth, g, p.sigma))
        assert np.all(np.diff(es) <= 1e-12 * es[0])

    def test_semigroup(self):
        g = GridSpec(2, 32, 8.0)
        p = EquationParams(sigma=2, delta=1, m=1, n=2, p=2, r=2)
        r2 = sum(c * c for c in g.coords())
        u0 = np.exp(-r2)
        u1 = 0.5 * np.exp(-2 * r2)
        a = linear_evolve(u0, u1, 0.6, p, g)
        b = linear_evolve(a.u, a.ut, 0.9, p, g)
        direct = linear_evolve(u0, u1, 1.5, p, g)
        scale = np.max(np.abs(direct.u))
        assert np.max(np.abs(b.u - direct.u)) < 1e-10 * scale


class TestFieldIO:
    def test_binary_roundtrip(self, tmp_path):
        g = GridSpec(1, 64, 3.0)
        u = np.exp(-g.axis() ** 2)
        path = tmp_path / "field.bin"
        write_field(path, u, g, time=2.5)
        v, g2, t = read_field(path)
        assert np.array_equal(u, v)
        assert g2 == g
        assert t == 2.5

    def test_csv_export(self, tmp_path):
        g = GridSpec(1, 8, 1.0)
        st = FieldState(np.arange(8.0), np.zeros(8), 0.0)
        path = tmp_path / "state.csv"
        write_state_csv(path, st, g)
        lines = path.read_text().strip().splitlines()
        assert lines[0] == "x,u,ut"
        assert len(lines) == 9


class TestWrapTime:
    def test_far_boundary_is_safe(self):
        g = GridSpec(1, 1024, 200.0)
        u0 = np.exp(-g.axis() ** 2)
        tw = wrap_time(g, 1.0, 0.0, g.fft(u0), support_radius=5.0)
        assert tw > 80.0

    def test_small_torus_wraps_early(self):
        g = GridSpec(1, 256, 5.0)
        u0 = np.exp(-g.axis() ** 2)
        tw = wrap_time(g, 1.0, 0.0, g.fft(u0), support_radius=2.0)
        assert tw < 80.0
