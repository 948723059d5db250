import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from weldnorm.seminorm import (BoundaryFunction, NonFiniteSample, QuadratureConfig,
                               dirichlet_energy_halfplane, h_half_inner, h_half_seminorm_sq,
                               pullback, seminorm_report, transport_to_circle, unit_disk_integral)
from weldnorm.sphere import INF, Mobius, cayley
from weldnorm.welding import REAL_LINE, UNIT_CIRCLE, example_h, identity, mobius_welding

from .conftest import random_real_mobius


def line_fn(f, knots=()):
    return BoundaryFunction(f, REAL_LINE, tuple(knots))


def circle_fn(f, knots=()):
    return BoundaryFunction(f, UNIT_CIRCLE, tuple(knots))


BUMP = line_fn(lambda x: 1.0 / (1.0 + x * x))
ODD = line_fn(lambda x: x / (1.0 + x * x))
WINDOW = line_fn(lambda x: np.arctan(x + 1.0) - np.arctan(x - 1.0))
COS = circle_fn(lambda z: np.real(z))
SIN = circle_fn(lambda z: np.imag(z))


def fourier_seminorm(values):
    """sum_n |n| |c_n|^2 from equispaced samples on the circle."""
    c = np.fft.fft(values) / len(values)
    n = np.fft.fftfreq(len(values), 1.0 / len(values))
    return float(np.sum(np.abs(n) * np.abs(c) ** 2))


class TestConfig:
    def test_defaults(self):
        cfg = QuadratureConfig()
        assert (cfg.gauss_order, cfg.panels_per_interval, cfg.target_rel_tol) == (12, 16, 1e-4)
        assert cfg.diagonal_offset == pytest.approx(0.5 / 12)

    @pytest.mark.parametrize("kw", [{"gauss_order": 1}, {"panels_per_interval": 0},
                                    {"diagonal_offset": 1.5}, {"target_rel_tol": 0.0}])
    def test_rejects_bad_values(self, kw):
        with pytest.raises(ValueError):
            QuadratureConfig(**kw)

    def test_json_round_trip(self):
        cfg = QuadratureConfig(gauss_order=8, panels_per_interval=4)
        assert QuadratureConfig.from_json(cfg.to_json()) == cfg


class TestSeminorm:
    def test_constant_is_zero(self):
        assert h_half_seminorm_sq(BoundaryFunction.constant(3.0)) == 0.0

    def test_line_bump(self):
        assert h_half_seminorm_sq(BUMP) == pytest.approx(0.125, abs=1e-3)

    def test_cosine(self):
        assert h_half_seminorm_sq(COS) == pytest.approx(0.5, abs=1e-4)

    @pytest.mark.parametrize("coeffs", [(0.3, -0.2, 0.1), (1.0, 0.0, 0.5, 0.25)])
    def test_trigonometric_polynomials_match_fourier(self, coeffs):
        def u(z):
            t = np.angle(z)
            return sum(a * np.cos((k + 1) * t + 0.3 * k) for k, a in enumerate(coeffs))
        exact = sum((k + 1) * a * a / 2 for k, a in enumerate(coeffs))
        assert h_half_seminorm_sq(circle_fn(u)) == pytest.approx(exact, rel=1e-6)

    def test_smooth_non_polynomial_matches_fourier(self):
        def u(z):
            return np.exp(np.cos(np.angle(z)))
        t = np.linspace(0, 2 * np.pi, 256, endpoint=False)
        exact = fourier_seminorm(np.exp(np.cos(t)))
        assert h_half_seminorm_sq(circle_fn(u)) == pytest.approx(exact, rel=1e-5)

    def test_kinked_function_with_knots(self):
        # |sin t| has a kink at 0 and pi; its Fourier series decays like 1/n^2
        u = circle_fn(lambda z: np.abs(np.imag(z)), knots=(1.0, -1.0))
        t = np.linspace(0, 2 * np.pi, 1 << 16, endpoint=False)
        exact = fourier_seminorm(np.abs(np.sin(t)))
        assert h_half_seminorm_sq(u) == pytest.approx(exact, rel=1e-4)

    def test_step_diverges(self):
        step = circle_fn(lambda z: (np.imag(z) > 0).astype(float), knots=(1.0, -1.0))
        res = seminorm_report(step)
        assert math.isinf(res.value) and not res.converged

    def test_nan_sample(self):
        with pytest.raises(NonFiniteSample):
            h_half_seminorm_sq(line_fn(lambda x: np.where(x > 0, np.nan, 0.0)))

    def test_report_diagnostics(self):
        res = seminorm_report(BUMP)
        assert res.converged and res.doublings >= 1 and res.rel_change <= 1e-4


class TestInner:
    def test_against_constant(self):
        assert h_half_inner(BUMP, BoundaryFunction.constant(1.0)) == 0.0

    def test_orthogonal_frequencies(self):
        assert abs(h_half_inner(COS, SIN)) <= 1e-6

    def test_matches_seminorm(self):
        assert h_half_inner(BUMP, BUMP) == pytest.approx(h_half_seminorm_sq(BUMP), rel=1e-9)

    def test_polarization_is_exact_at_fixed_resolution(self):
        cfg = QuadratureConfig(max_doublings=0)
        u, v = BUMP, WINDOW
        lhs = h_half_inner(u, v, cfg)
        rhs = (h_half_seminorm_sq(u + v, cfg) - h_half_seminorm_sq(u - v, cfg)) / 4
        assert lhs == pytest.approx(rhs, rel=1e-8)

    def test_polarization_adaptive(self):
        u, v = BUMP, ODD.scaled(0.5) + WINDOW
        lhs = h_half_inner(u, v)
        rhs = (h_half_seminorm_sq(u + v) - h_half_seminorm_sq(u - v)) / 4
        assert lhs == pytest.approx(rhs, rel=1e-4)


class TestTransport:
    def test_constant(self):
        w = transport_to_circle(BoundaryFunction.constant(2.0))
        assert np.allclose(w(np.exp(1j * np.linspace(0.1, 6, 7))), 2.0)

    def test_bump_value(self):
        w = transport_to_circle(BUMP)
        assert w.domain == UNIT_CIRCLE
        assert h_half_seminorm_sq(w) == pytest.approx(0.125, abs=1e-3)

    def test_knot_images(self):
        w = transport_to_circle(line_fn(lambda x: x, knots=(0.0, 1.0, 3.0, INF)))
        C = cayley()
        expected = [C(0.0), C(1.0), C(3.0), 1.0]
        assert len(w.knots) == 4
        for e in expected:
            assert min(abs(e - k) for k in w.knots) <= 1e-14

    def test_values_correspond(self):
        w = transport_to_circle(BUMP)
        x = np.array([-3.0, 0.2, 7.0])
        assert np.allclose(w(cayley().apply_array(x)), BUMP(x), atol=1e-12)


class TestPullback:
    def test_identity(self):
        p = pullback(BUMP, identity())
        x = np.linspace(-5, 5, 11)
        assert np.allclose(p(x), BUMP(x))

    def test_rotation_of_cosine(self):
        rot = mobius_welding(Mobius(1j, 0, 0, -1j), UNIT_CIRCLE)
        p = pullback(COS, rot)
        z = np.exp(1j * np.linspace(0, 6, 13))
        assert np.allclose(p(z), -COS(z), atol=1e-14)
        assert h_half_seminorm_sq(p) == pytest.approx(0.5, abs=1e-4)

    def test_mobius_isometry_sample(self):
        T = Mobius(2.0, 1.0, 0.5, 1.0)
        base = h_half_seminorm_sq(BUMP)
        assert h_half_seminorm_sq(pullback(BUMP, mobius_welding(T))) == pytest.approx(base, rel=1e-6)

    @pytest.mark.slow
    def test_mobius_isometry_fifty_maps(self):
        rng = np.random.default_rng(11)
        base = h_half_seminorm_sq(WINDOW)
        for _ in range(50):
            T = random_real_mobius(rng)
            val = h_half_seminorm_sq(pullback(WINDOW, mobius_welding(T)))
            assert val == pytest.approx(base, rel=1e-4)

    def test_knots_include_preimages(self):
        u = line_fn(lambda x: np.abs(x - 1.0), knots=(1.0,))
        p = pullback(u, example_h())
        for k in (0.0, 1.0, 3.0):
            assert any(abs(complex(k) - complex(j)) <= 1e-12 for j in p.knots)

    def test_operator_bound_for_example_welding(self):
        K = 10.0
        kt = K * K + 1 / (K * K)
        for u in (BUMP, ODD, WINDOW):
            assert h_half_seminorm_sq(pullback(u, example_h())) <= kt * h_half_seminorm_sq(u)


def _harmonic_energy(dF):
    return dirichlet_energy_halfplane(lambda z: np.abs(dF(z)) ** 2)


class TestDirichlet:
    def test_constant(self):
        assert dirichlet_energy_halfplane(lambda z: np.zeros(z.shape)) == 0.0

    def test_bump_extension(self):
        # Im(-1/(z+i)) extends 1/(1+x^2); its complex gradient is 1/(z+i)^2
        assert _harmonic_energy(lambda z: 1.0 / (z + 1j) ** 2) == pytest.approx(0.125, abs=1e-4)

    def test_log_derivative_of_dilation(self):
        # log|T'| for T(z) = 2z is the constant log 2; its complex gradient is T''/T'
        T = Mobius(2, 0, 0, 1)
        energy = _harmonic_energy(lambda z: T.second_derivative_array(z) / T.derivative_array(z))
        assert energy == 0.0

    def test_unit_disk_area(self):
        res = unit_disk_integral(lambda z: np.ones(z.shape))
        assert res.value == pytest.approx(math.pi, rel=1e-12)

    @pytest.mark.parametrize("u, dF", [
        (BUMP, lambda z: 1.0 / (z + 1j) ** 2),
        (ODD, lambda z: 1.0 / (z + 1j) ** 2),
        (WINDOW, lambda z: 1.0 / (z - 1 + 1j) - 1.0 / (z + 1 + 1j)),
    ])
    def test_douglas_consistency(self, u, dF):
        boundary = h_half_seminorm_sq(u)
        interior = _harmonic_energy(dF)
        assert abs(boundary - interior) <= 1e-3 * max(1.0, interior)


@settings(max_examples=20)
@given(st.floats(-3, 3), st.floats(0.2, 5))
def test_seminorm_invariant_under_affine_maps(shift, scale):
    T = Mobius(scale, shift, 0, 1)
    base = h_half_seminorm_sq(BUMP)
    assert h_half_seminorm_sq(pullback(BUMP, mobius_welding(T))) == pytest.approx(base, rel=1e-4)


@settings(max_examples=20)
@given(st.floats(-2, 2), st.floats(-2, 2))
def test_seminorm_scales_quadratically(a, b):
    u = BUMP.scaled(a) + ODD.scaled(b)
    val = h_half_seminorm_sq(u)
    assert val >= 0.0
    assert h_half_seminorm_sq(u.scaled(2.0)) == pytest.approx(4.0 * val, rel=1e-9, abs=1e-15)
