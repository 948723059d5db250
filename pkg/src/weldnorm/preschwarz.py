"""Normalized pre-Schwarzian operators and Loewner-energy formulas built on them.

A conformal map here is anything that can report its 3-jet (value and first
three derivatives) on arrays of points of its disk.  Precomposition and
postcomposition by Möbius maps are closed under this interface, and every
area integral is carried to the unit disk by such a precomposition before
the polar quadrature runs.
"""

from __future__ import annotations

import math

import numpy as np

from .seminorm import (BoundaryFunction, QuadratureConfig, QuadratureResult,
                       h_half_inner, seminorm_report,
                       unit_disk_integral)
from .sphere import (EXTERIOR_DISK, INF, LOWER_HALF_PLANE, UNIT_DISK, UPPER_HALF_PLANE,
                     Cline, Disk, Mobius, ext, is_inf, mobius_apply)
from .welding import REAL_LINE, Welding, invert

DIAGONAL_BAND = 1e-8
J = Mobius(0, 1, 1, 0)  # z -> 1/z


def _jet_compose(outer, inner):
    """Faà di Bruno up to order three: jets of outer at inner's value, and inner."""
    g0, g1, g2, g3 = outer
    h0, h1, h2, h3 = inner
    d1 = g1 * h1
    d2 = g2 * h1**2 + g1 * h2
    if g3 is None or h3 is None:
        d3 = None
    else:
        d3 = g3 * h1**3 + 3.0 * g2 * h1 * h2 + g1 * h3
    return g0, d1, d2, d3


def _mobius_jet(T: Mobius, z):
    z = np.asarray(z, dtype=complex)
    return (T.apply_array(z), T.derivative_array(z), T.second_derivative_array(z),
            T.third_derivative_array(z))


def disk_image(M: Mobius, D: Disk) -> Disk:
    """The disk M(D); Möbius maps keep the left side of an oriented cline on the left."""
    pts = [mobius_apply(M, p) for p in D.boundary.sample_points()]
    return Disk(Cline.from_points(*pts))


def same_disk(A: Disk, B: Disk, tol: float = 1e-9) -> bool:
    """Whether two disks agree, up to round-off in their boundary parameters."""
    if all(A.boundary.side(p, tol) == 0 for p in B.boundary.sample_points()):
        inner = B.reflect(B.from_unit_disk()(0.5))
        return not A.contains(inner)
    return False


class ConformalMap:
    """A univalent map on ``disk`` exposing its 3-jet."""

    disk: Disk

    def jet(self, z):
        raise NotImplementedError

    def value(self, z) -> complex:
        """f(z) on the closed disk, returning INF at poles and handling z = INF."""
        z = ext(z)
        if is_inf(z):
            return self._value_at_infinity()
        v = complex(self.jet(np.array([z]))[0][0])
        return INF if not np.isfinite(v) else v

    def _value_at_infinity(self):
        # radial limit inside the disk; growth proportional to the radius means a pole
        M = self.disk.from_unit_disk()
        q = mobius_apply(M.inverse(), INF)
        near, nearer = (M(q * (1 - e)) for e in (1e-6, 1e-9))
        a, b = (complex(self.jet(np.array([p]))[0][0]) for p in (near, nearer))
        if not np.isfinite(b) or abs(b) > 100 * max(1.0, abs(a)):
            return INF
        return b

    def boundary_log_speed(self, x) -> np.ndarray:
        """log|f'| at finite boundary points."""
        return np.log(np.abs(self.jet(np.asarray(x, dtype=complex))[1]))

    def boundary_knots(self) -> tuple:
        return ()

    def precompose(self, M: Mobius) -> "ConformalMap":
        return Precomposed(self, M)

    def postcompose(self, S: Mobius) -> "ConformalMap":
        return Postcomposed(S, self)


class MobiusMap(ConformalMap):
    def __init__(self, T: Mobius, disk: Disk = UNIT_DISK):
        self.T = T
        self.disk = disk

    def jet(self, z):
        return _mobius_jet(self.T, z)

    def value(self, z):
        return mobius_apply(self.T, ext(z))

    def precompose(self, M):
        return MobiusMap(self.T @ M, disk_image(M.inverse(), self.disk))

    def postcompose(self, S):
        return MobiusMap(S @ self.T, self.disk)


class QuadraticMap(ConformalMap):
    """z + a z^2 on the unit disk; univalent for |a| <= 1/2."""

    def __init__(self, a: complex, disk: Disk = UNIT_DISK):
        if not abs(a) < 0.5:
            raise ValueError("z + a z^2 is univalent on the unit disk only for |a| <= 1/2")
        if disk != UNIT_DISK:
            raise ValueError("the quadratic family lives on the unit disk")
        self.a = complex(a)
        self.disk = disk

    def jet(self, z):
        z = np.asarray(z, dtype=complex)
        a = self.a
        return z + a * z * z, 1.0 + 2.0 * a * z, np.full(z.shape, 2.0 * a), np.zeros(z.shape, complex)


class Precomposed(ConformalMap):
    """base o M, defined on M^{-1}(base.disk)."""

    def __init__(self, base: ConformalMap, M: Mobius):
        if isinstance(base, Precomposed):
            base, M = base.base, base.M @ M
        self.base = base
        self.M = M
        self.disk = disk_image(M.inverse(), base.disk)

    def jet(self, z):
        m = _mobius_jet(self.M, z)
        return _jet_compose(self.base.jet(m[0]), m)

    def value(self, z):
        return self.base.value(mobius_apply(self.M, ext(z)))

    def boundary_log_speed(self, x):
        x = np.asarray(x, dtype=complex)
        return (self.base.boundary_log_speed(self.M.apply_array(x))
                + np.log(np.abs(self.M.derivative_array(x))))

    def boundary_knots(self):
        Mi = self.M.inverse()
        return tuple(mobius_apply(Mi, k) for k in self.base.boundary_knots())

    def precompose(self, M):
        return Precomposed(self.base, self.M @ M)


class Postcomposed(ConformalMap):
    """S o base for a Möbius S."""

    def __init__(self, S: Mobius, base: ConformalMap):
        if isinstance(base, Postcomposed):
            S, base = S @ base.S, base.base
        self.S = S
        self.base = base
        self.disk = base.disk

    def jet(self, z):
        inner = self.base.jet(z)
        return _jet_compose(_mobius_jet(self.S, inner[0]), inner)

    def value(self, z):
        return mobius_apply(self.S, self.base.value(z))

    def boundary_log_speed(self, x):
        x = np.asarray(x, dtype=complex)
        fx = self.base.jet(x)[0]
        return (self.base.boundary_log_speed(x)
                + np.log(np.abs(self.S.derivative_array(fx))))

    def boundary_knots(self):
        return self.base.boundary_knots()

    def precompose(self, M):
        return Postcomposed(self.S, self.base.precompose(M))


DISKS = {"unit_disk": UNIT_DISK, "exterior_disk": EXTERIOR_DISK,
         "upper_half_plane": UPPER_HALF_PLANE, "lower_half_plane": LOWER_HALF_PLANE}


def map_from_json(data: dict) -> ConformalMap:
    kind = data.get("kind")
    if kind == "mobius":
        disk = data.get("disk", "unit_disk")
        if disk not in DISKS:
            raise ValueError(f"unknown disk {disk!r}")
        return MobiusMap(Mobius.from_json(data["matrix"]), DISKS[disk])
    if kind == "quadratic":
        a = data["a"]
        return QuadraticMap(complex(a[0], a[1]) if isinstance(a, list) else complex(a))
    if kind == "zipper":
        from .zipper import SampledJordanCurve, geodesic_zipper
        pts = [complex(p[0], p[1]) for p in data["points"]]
        return geodesic_zipper(SampledJordanCurve.from_points(pts)).f
    raise ValueError(f"unknown map kind {kind!r}")


# -- the operators ----------------------------------------------------------

def _as_array(z):
    scalar = np.ndim(z) == 0
    return np.atleast_1d(np.asarray(z, dtype=complex)), scalar


def _normalized(jet, z, target, pole):
    """f'/(f - target) - 1/(z - pole) - f''/(2f'), dropping terms with an infinite point."""
    f0, f1, f2 = jet[0], jet[1], jet[2]
    out = -0.5 * f2 / f1
    if not is_inf(target):
        out = out + f1 / (f0 - target)
    if not is_inf(pole):
        out = out - 1.0 / (z - pole)
    return out


def schwarzian(f: ConformalMap, z):
    z, scalar = _as_array(z)
    _, f1, f2, f3 = f.jet(z)
    if f3 is None:
        raise ValueError("map does not expose a third derivative")
    s = f3 / f1 - 1.5 * (f2 / f1) ** 2
    return s[0] if scalar else s


def B(f: ConformalMap, z, w):
    """Normalized pre-Schwarzian B_f(z, w)."""
    z, scalar = _as_array(z)
    w = ext(w)
    fw = f.value(w)
    out = _normalized(f.jet(z), z, fw, w)
    if not is_inf(w) and not is_inf(fw):
        near = np.abs(z - w) < DIAGONAL_BAND
        if np.any(near):
            try:
                sw = schwarzian(f, w)
            except ValueError:
                sw = 0.0
            out = np.where(near, -sw * (z - w) / 6.0, out)
    return out[0] if scalar else out


def B_star(f: ConformalMap, g: ConformalMap, D: Disk, z, u, v):
    """f'/(f - g(v)) - 1/(z - u*) - f''/(2f'), u* the reflection of u across the boundary of D."""
    z, scalar = _as_array(z)
    out = _normalized(f.jet(z), z, g.value(v), D.reflect(ext(u)))
    return out[0] if scalar else out


def C_op(f: ConformalMap, g: ConformalMap, D: Disk, z, u, v):
    """B_f(z, u) - B*_{f,g}(z, u, v), written out so the f'' terms never appear."""
    z, scalar = _as_array(z)
    u = ext(u)
    f0, f1 = f.jet(z)[:2]
    fu, gv, us = f.value(u), g.value(v), D.reflect(u)
    out = np.zeros(z.shape, dtype=complex)
    if not is_inf(fu):
        out = out + f1 / (f0 - fu)
    if not is_inf(gv):
        out = out - f1 / (f0 - gv)
    if not is_inf(u):
        out = out - 1.0 / (z - u)
    if not is_inf(us):
        out = out + 1.0 / (z - us)
    return out[0] if scalar else out


# -- area integrals of the operators ------------------------------------------

def _form_integral(F: ConformalMap, terms, cfg) -> QuadratureResult:
    """Integral over F's disk of sum_k weight_k |sum_j sign_j N(F; target_j, pole_j)|^2.

    Each N is a 1-form in z, so precomposing with the Möbius map M from the
    unit disk multiplies it by M' and the area element absorbs |M'|^2.
    """
    M = F.disk.from_unit_disk()
    G = F.precompose(M)
    Mi = M.inverse()
    moved = [(wt, [(s, c, mobius_apply(Mi, ext(p))) for s, c, p in combo])
             for wt, combo in terms]

    def integrand(zeta):
        jet = G.jet(zeta)
        total = np.zeros(zeta.shape)
        for wt, combo in moved:
            acc = 0.0
            for s, c, q in combo:
                acc = acc + s * _normalized(jet, zeta, c, q)
            total = total + wt * np.abs(acc) ** 2
        return total

    return unit_disk_integral(integrand, cfg)


class DiskPair:
    """Conformal maps onto the two sides of one Jordan curve."""

    def __init__(self, f: ConformalMap, g: ConformalMap, welding: Welding | None = None):
        if not same_disk(f.disk.complement(), g.disk):
            raise ValueError("g must be defined on the complement of f's disk")
        self.f = f
        self.g = g
        self.welding = welding

    @property
    def D(self) -> Disk:
        return self.f.disk

    def weld(self, w):
        """g^{-1}(f(w)) for a boundary point w."""
        w = ext(w)
        if self.welding is not None:
            return ext(self.welding.eval(w))
        if isinstance(self.g, MobiusMap):
            return mobius_apply(self.g.T.inverse(), self.f.value(w))
        raise ValueError("pair has no welding to locate g^{-1}(f(w))")


def _sum_results(parts, scale=1.0):
    value = scale * math.fsum(p.value for p in parts)
    return QuadratureResult(value, all(p.converged for p in parts),
                            max(p.doublings for p in parts),
                            max(p.rel_change for p in parts))


def B_area_integral(F: ConformalMap, w, cfg: QuadratureConfig | None = None
                    ) -> QuadratureResult:
    """Integral of |B_F(z, w)|^2 over the disk of F."""
    w = ext(w)
    return _form_integral(F, [(1.0, [(1.0, F.value(w), w)])], cfg)


def loewner_energy_boundary(pair: DiskPair, w0, cfg: QuadratureConfig | None = None
                            ) -> QuadratureResult:
    w0 = ext(w0)
    w1 = pair.weld(w0)
    a = B_area_integral(pair.f, w0, cfg)
    b = B_area_integral(pair.g, w1, cfg)
    return _sum_results([a, b], 4.0 / math.pi)


def loewner_energy_interior(pair: DiskPair, u, v, cfg: QuadratureConfig | None = None
                            ) -> QuadratureResult:
    u, v = ext(u), ext(v)
    f, g, D = pair.f, pair.g, pair.D
    fu, gv = f.value(u), g.value(v)
    us, vs = D.reflect(u), D.complement().reflect(v)
    inside = _form_integral(f, [
        (4.0, [(1.0, fu, u)]),
        (-2.0, [(1.0, fu, u), (-1.0, gv, us)]),
    ], cfg)
    outside = _form_integral(g, [
        (4.0, [(1.0, fu, vs)]),
        (-2.0, [(1.0, gv, v), (-1.0, fu, vs)]),
    ], cfg)
    return _sum_results([inside, outside], 1.0 / math.pi)


def chart_derivative(F: ConformalMap, z, step: float = 1e-5) -> complex:
    """F'(z) read in the chart 1/z wherever z or F(z) is infinite."""
    z = ext(z)
    if is_inf(z):
        return chart_derivative(F.precompose(J), 0.0, step)
    if not is_inf(F.value(z)):
        return complex(F.jet(np.array([z]))[1][0])
    inv = F.postcompose(J)
    pts = np.array([z + step, z - step, z + 1j * step, z - 1j * step])
    d = inv.jet(pts)[1]
    return complex(np.mean(d))


def grunsky_log_term(pair: DiskPair, u) -> float:
    """4 log|f'(u) g~'(u~*) (u - u*)^2 / (f(u) - g(u*))^2| with the chart conventions."""
    u = ext(u)
    f, g = pair.f, pair.g
    us = pair.D.reflect(u)
    gu = g.value(us)
    val = math.log(abs(chart_derivative(f, u))) + math.log(abs(chart_derivative(g, us)))
    if not is_inf(us):
        val += 2.0 * math.log(abs(u - us))
    if not is_inf(gu):
        val -= 2.0 * math.log(abs(f.value(u) - gu))
    return 4.0 * val


def loewner_energy_log_form(pair: DiskPair, u, cfg: QuadratureConfig | None = None
                            ) -> QuadratureResult:
    """Interior formula at v = u*, with the C-integrals replaced by a logarithm.

    Needs a bounded disk D whose image is the bounded side of the curve.
    """
    u = ext(u)
    f, g, D = pair.f, pair.g, pair.D
    if not D.contains(u) or D.boundary.side(INF) >= 0:
        raise ValueError("log form needs a bounded disk D containing u")
    if is_inf(f.value(u)) or not math.isfinite(abs(f.value(u))):
        raise ValueError("f(u) must be finite")
    fu = f.value(u)
    a = _form_integral(f, [(4.0, [(1.0, fu, u)])], cfg)
    b = _form_integral(g, [(4.0, [(1.0, fu, u)])], cfg)
    res = _sum_results([a, b], 1.0 / math.pi)
    return QuadratureResult(res.value + grunsky_log_term(pair, u), res.converged,
                            res.doublings, res.rel_change)


def _fixes_infinity(F: ConformalMap) -> bool:
    return is_inf(F.value(INF))


def _log_speed_function(F: ConformalMap) -> BoundaryFunction:
    return BoundaryFunction(lambda x: F.boundary_log_speed(x), REAL_LINE,
                            tuple(F.boundary_knots()))


def _log_derivative_function(h: Welding) -> BoundaryFunction:
    def log_dh(x):
        with np.errstate(divide="ignore"):
            return np.log(np.abs(h.derivative(np.asarray(x))))
    return BoundaryFunction(log_dh, REAL_LINE, tuple(h.singular_points()))


def loewner_energy_innerproduct(pair: DiskPair, cfg: QuadratureConfig | None = None
                                ) -> tuple[float, float]:
    """2<log|f'|, log h'> and 2<log|g'|, log (h^{-1})'> on the real line."""
    if pair.D != UPPER_HALF_PLANE:
        raise ValueError("inner-product formula needs D = upper half-plane")
    if not (_fixes_infinity(pair.f) and _fixes_infinity(pair.g)):
        raise ValueError("inner-product formula needs f and g to fix infinity")
    h = pair.welding
    if h is None or h.domain != REAL_LINE:
        raise ValueError("inner-product formula needs the welding on the real line")
    a = 2.0 * h_half_inner(_log_speed_function(pair.f), _log_derivative_function(h), cfg)
    b = 2.0 * h_half_inner(_log_speed_function(pair.g),
                           _log_derivative_function(invert(h)), cfg)
    return a, b


def arclength_factorization_energy(H_f: Welding, H_g: Welding,
                                   cfg: QuadratureConfig | None = None) -> float:
    """2||log H_f'||^2 + 2||log H_g'||^2 for increasing homeomorphisms of the line."""
    a = seminorm_report(_log_derivative_function(H_f), cfg).value
    b = seminorm_report(_log_derivative_function(H_g), cfg).value
    return 2.0 * a + 2.0 * b


def halfplane_preschwarzian_energy(pair: DiskPair, cfg: QuadratureConfig | None = None
                          ) -> QuadratureResult:
    """(1/pi) of the integrals of |f''/f'|^2 and |g''/g'|^2 for maps fixing infinity."""
    if pair.D != UPPER_HALF_PLANE:
        raise ValueError("needs D = upper half-plane")
    parts = []
    for F in (pair.f, pair.g):
        if not _fixes_infinity(F):
            raise ValueError("maps must fix infinity")
        # 2 B_F(z, inf) = -F''/F' when F(inf) = inf
        parts.append(_form_integral(F, [(4.0, [(1.0, INF, INF)])], cfg))
    return _sum_results(parts, 1.0 / math.pi)


def equipotential_transform(n: int) -> Mobius:
    """T_n(z) = i (n z + i) / (z + n i), taking (0, i, inf) to (i/n, i, i n)."""
    if n < 2:
        raise ValueError("n must be at least 2")
    return Mobius(1j * n, -1.0, 1.0, 1j * n)
