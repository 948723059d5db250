import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from weldnorm.preschwarz import (B, B_area_integral, B_star, C_op, ConformalMap, DiskPair,
                                 MobiusMap, QuadraticMap, chart_derivative, disk_image,
                                 equipotential_transform, grunsky_log_term, loewner_energy_boundary,
                                 loewner_energy_innerproduct, loewner_energy_interior,
                                 loewner_energy_log_form, map_from_json, same_disk, schwarzian,
                                 halfplane_preschwarzian_energy, arclength_factorization_energy)
from weldnorm.sphere import (EXTERIOR_DISK, INF, LOWER_HALF_PLANE, UNIT_DISK, UPPER_HALF_PLANE,
                             Mobius, is_inf, mobius_apply, spherical_distance)
from weldnorm.welding import identity, mobius_welding

from .conftest import complex_mobius, disk_automorphism


class Shifted(ConformalMap):
    """z + a/(z + 2i) on the upper half-plane; Re f' > 0 there, so it is univalent."""

    disk = UPPER_HALF_PLANE

    def __init__(self, a=0.3):
        self.a = a

    def jet(self, z):
        z = np.asarray(z, dtype=complex)
        q = 1.0 / (z + 2j)
        a = self.a
        return z + a * q, 1 - a * q**2, 2 * a * q**3, -6 * a * q**4


def in_unit_disk(rng, r=0.7):
    return r * math.sqrt(rng.uniform()) * np.exp(2j * np.pi * rng.uniform())


F = QuadraticMap(0.25)


class TestB:
    def test_mobius_is_zero(self):
        f = MobiusMap(Mobius(1, 2j, 0.5, 1))
        z = np.array([0.1, -0.3 + 0.2j, 0.5j])
        assert np.max(np.abs(B(f, z, 0.2 - 0.1j))) <= 1e-12
        assert np.max(np.abs(B(f, z, 1.0))) <= 1e-12

    def test_diagonal_value_is_zero(self):
        assert B(F, 0.3, 0.3) == 0

    def test_diagonal_linear_term(self):
        w = 0.2 + 0.1j
        z = w + 1e-3 * np.exp(0.4j)
        expected = -schwarzian(F, w) * (z - w) / 6
        assert abs(B(F, z, w) - expected) <= 1e-6

    def test_root_and_image_at_infinity(self):
        f = Shifted()
        z = np.array([0.3 + 1j, -2 + 0.5j])
        _, f1, f2, _ = f.jet(z)
        assert is_inf(f.value(INF))
        assert np.allclose(B(f, z, INF), -0.5 * f2 / f1, atol=1e-15)

    def test_decay_at_infinity(self):
        f = Shifted()
        vals = []
        for r in (1e2, 1e4, 1e6):
            z = r * np.exp(1j * np.array([0.3, 1.5, 2.8]))
            vals.append(np.max(np.abs(B(f, z, INF)) * np.abs(z) ** 2))
        assert max(vals) <= 10 * vals[0]

    def test_schwarzian_of_quadratic(self):
        z = 0.3 - 0.2j
        f1, f2 = 1 + 0.5 * z, 0.5
        assert schwarzian(F, z) == pytest.approx(-1.5 * (f2 / f1) ** 2, abs=1e-15)

    def test_diagonal_finite_difference(self):
        rng = np.random.default_rng(8)
        for _ in range(20):
            w = in_unit_disk(rng, 0.5)
            d = 1e-3 * np.exp(2j * np.pi * rng.uniform())
            est = (B(F, w + d, w) - B(F, w - d, w)) / (2 * d)
            assert abs(est + schwarzian(F, w) / 6) <= 1e-6

    def test_composition_rule(self):
        rng = np.random.default_rng(2)
        for _ in range(1000 // 50):
            M = disk_automorphism(rng)
            g = MobiusMap(M)
            fg = F.precompose(M)
            z = np.array([in_unit_disk(rng) for _ in range(50)])
            w = in_unit_disk(rng)
            lhs = B(fg, z, w)
            rhs = B(F, M.apply_array(z), M(w)) * M.derivative_array(z) + B(g, z, w)
            assert np.max(np.abs(lhs - rhs)) <= 1e-10

    @settings(max_examples=40)
    @given(complex_mobius, complex_mobius, st.integers(0, 2**32 - 1))
    def test_mobius_covariance(self, S, T, seed):
        rng = np.random.default_rng(seed)
        E = disk_image(T.inverse(), UNIT_DISK)
        G = F.precompose(T).postcompose(S)
        zs = [E.from_unit_disk()(in_unit_disk(rng)) for _ in range(3)]
        z, w = np.array(zs[:2]), zs[2]
        lhs = B(G, z, w)
        rhs = B(F, T.apply_array(z), T(w)) * T.derivative_array(z)
        assert np.allclose(lhs, rhs, rtol=1e-8, atol=1e-10)


class TestBstarC:
    G = MobiusMap(Mobius(1, 0.3, 0.2, 1), EXTERIOR_DISK)

    def test_mobius_pair_zero(self):
        f = MobiusMap(Mobius(2, 1, 1, 1))
        u = 0.3 + 0.1j
        us = UNIT_DISK.reflect(u)
        g = MobiusMap(Mobius(2, 1, 1, 1), EXTERIOR_DISK)
        v = us  # g(v) = f(u*) because g and f share the formula
        z = np.array([0.1, -0.2j])
        assert np.max(np.abs(B_star(f, g, UNIT_DISK, z, u, v))) <= 1e-12
        assert np.max(np.abs(C_op(f, g, UNIT_DISK, z, u, v))) <= 1e-12

    def test_reduces_to_B_on_boundary(self):
        u = np.exp(0.7j)
        v = mobius_apply(self.G.T.inverse(), F.value(u))
        z = np.array([0.2, 0.1 + 0.4j, -0.5j])
        assert np.max(np.abs(B_star(F, self.G, UNIT_DISK, z, u, v) - B(F, z, u))) <= 1e-12

    def test_infinite_terms_dropped(self):
        g = MobiusMap(Mobius(2, 0, 0, 0.5), EXTERIOR_DISK)
        z = np.array([0.2, 0.1 + 0.4j])
        _, f1, f2, _ = F.jet(z)
        assert np.allclose(B_star(F, g, UNIT_DISK, z, 0.0, INF), -0.5 * f2 / f1, atol=1e-15)

    def test_C_is_B_minus_Bstar(self):
        rng = np.random.default_rng(4)
        z = np.array([in_unit_disk(rng) for _ in range(1000)])
        for _ in range(5):
            u = in_unit_disk(rng)
            v = UNIT_DISK.reflect(in_unit_disk(rng))
            c = C_op(F, self.G, UNIT_DISK, z, u, v)
            diff = B(F, z, u) - B_star(F, self.G, UNIT_DISK, z, u, v)
            assert np.max(np.abs(c - diff) / np.maximum(1.0, np.abs(c))) <= 1e-12

    @settings(max_examples=40)
    @given(complex_mobius, complex_mobius, st.integers(0, 2**32 - 1))
    def test_covariance(self, S, T, seed):
        rng = np.random.default_rng(seed)
        E = disk_image(T.inverse(), UNIT_DISK)
        Fm = F.precompose(T).postcompose(S)
        Gm = self.G.precompose(T).postcompose(S)
        M = E.from_unit_disk()
        z, u = M(in_unit_disk(rng)), M(in_unit_disk(rng))
        v = E.reflect(M(in_unit_disk(rng)))
        dT = T.derivative_array(np.array([z]))[0]
        for op in (B_star, C_op):
            lhs = op(Fm, Gm, E, z, u, v)
            rhs = op(F, self.G, UNIT_DISK, T(z), T(u), T(v)) * dT
            assert abs(lhs - rhs) <= 1e-10 * max(1.0, abs(rhs)) * max(1.0, abs(dT))


class TestMaps:
    def test_quadratic_bounds(self):
        with pytest.raises(ValueError):
            QuadraticMap(0.6)

    def test_precompose_chain_rule(self):
        M = disk_automorphism(np.random.default_rng(0))
        G = F.precompose(M)
        z = np.array([0.1 + 0.2j])
        d = 1e-6
        fd = (G.jet(z + d)[0] - G.jet(z - d)[0]) / (2 * d)
        assert np.allclose(G.jet(z)[1], fd, atol=1e-8)

    def test_json(self):
        f = map_from_json({"kind": "quadratic", "a": [0.1, 0.2]})
        assert isinstance(f, QuadraticMap) and f.a == 0.1 + 0.2j
        g = map_from_json({"kind": "mobius", "matrix": Mobius(1, 0, 0, 1).to_json(),
                           "disk": "exterior_disk"})
        assert same_disk(g.disk, EXTERIOR_DISK)
        with pytest.raises(ValueError):
            map_from_json({"kind": "spline"})

    def test_pair_needs_complementary_disks(self):
        with pytest.raises(ValueError):
            DiskPair(F, MobiusMap(Mobius.identity(), UNIT_DISK))

    def test_chart_derivative_at_infinity(self):
        g = MobiusMap(Mobius(2, 0, 0, 0.5), EXTERIOR_DISK)  # z -> 4z
        # in the chart 1/z at both ends the map is w -> w/4
        assert chart_derivative(g, INF) == pytest.approx(0.25)


def mobius_pair(T):
    return DiskPair(MobiusMap(T, UNIT_DISK), MobiusMap(T, EXTERIOR_DISK))


class TestEnergies:
    T = Mobius(2, 0.5j, 0.3, 1)

    def test_boundary_mobius(self):
        assert loewner_energy_boundary(mobius_pair(self.T), np.exp(0.3j)).value <= 1e-6

    def test_interior_mobius(self):
        pair = mobius_pair(self.T)
        for u, v in ((0.0, INF), (0.3 + 0.2j, 2.0), (-0.5j, 1.5 + 1j)):
            assert abs(loewner_energy_interior(pair, u, v).value) <= 1e-5

    def test_log_form_mobius(self):
        pair = mobius_pair(self.T)
        assert abs(loewner_energy_log_form(pair, 0.0).value) <= 1e-6
        assert abs(loewner_energy_log_form(pair, 0.2 - 0.4j).value) <= 1e-6

    def test_grunsky_term_for_dilation(self):
        # f = 2z on the disk, g = 2z outside: f'(0) = 2, g'(inf) = 2 in the chart 1/z
        S = Mobius(2, 0, 0, 1)
        assert grunsky_log_term(mobius_pair(S), 0.0) == pytest.approx(0.0, abs=1e-9)

    def test_log_form_needs_bounded_disk(self):
        pair = DiskPair(MobiusMap(Mobius.identity(), UPPER_HALF_PLANE),
                        MobiusMap(Mobius.identity(), LOWER_HALF_PLANE))
        with pytest.raises(ValueError):
            loewner_energy_log_form(pair, 1j)

    def test_innerproduct_mobius(self):
        T = Mobius(2, 1, 0, 0.5)
        pair = DiskPair(MobiusMap(T, UPPER_HALF_PLANE), MobiusMap(T, LOWER_HALF_PLANE),
                        identity())
        a, b = loewner_energy_innerproduct(pair)
        assert abs(a) <= 1e-9 and abs(b) <= 1e-9

    def test_factorization_identity(self):
        assert arclength_factorization_energy(identity(), identity()) == 0.0
        T = mobius_welding(Mobius(3, 1, 0, 1))
        assert arclength_factorization_energy(T, T) <= 1e-12

    def test_boundary_at_infinity_matches_preschwarzian_areas(self):
        pair = DiskPair(Shifted(), MobiusMap(Mobius.identity(), LOWER_HALF_PLANE))
        a = loewner_energy_boundary(pair, INF).value
        b = halfplane_preschwarzian_energy(pair).value
        assert a > 0 and a == pytest.approx(b, rel=1e-6)

    def test_integral_invariance(self):
        rng = np.random.default_rng(6)
        w = 0.3 * np.exp(0.5j)
        base = B_area_integral(F, w).value
        for _ in range(3):
            T = disk_automorphism(rng) @ Mobius(1, 0.2, 0, 1)  # moves the disk off centre
            moved = B_area_integral(F.precompose(T), T.inverse()(w)).value
            assert moved == pytest.approx(base, rel=1e-4)

    def test_integral_at_boundary_root(self):
        base = B_area_integral(F, 1.0).value
        T = Mobius(1, 0.5, 0.5, 1)  # a disk automorphism fixing +-1
        moved = B_area_integral(F.precompose(T), T.inverse()(1.0)).value
        assert moved == pytest.approx(base, rel=1e-4)


class TestEquipotential:
    def test_values(self):
        T = equipotential_transform(2)
        assert T(0) == pytest.approx(0.5j)
        assert T(1j) == pytest.approx(1j)
        assert spherical_distance(T(INF), 2j) <= 1e-15

    @given(st.integers(2, 50))
    def test_fixes_i_for_every_n(self, n):
        T = equipotential_transform(n)
        assert abs(T(1j) - 1j) <= 1e-12 and abs(T(INF) - 1j * n) <= 1e-12 * n

    def test_rejects_small_n(self):
        with pytest.raises(ValueError):
            equipotential_transform(1)
