"""Geodesic zipper: conformal maps of the two sides of a sampled Jordan curve.

One chain of elementary maps opens the whole curve.  The first map sends the
arc from z0 to z1 of the circle through z_n, z0, z1 to the real line; each following step folds the circular
arc from 0 to the next node down onto the real line; a final Möbius-and-square
map straightens the closing arc.  The composite Psi sends the curve it
interpolates onto the real line, the bounded side onto the upper half-plane
and the unbounded side onto the lower one, so f and g are the two branches
of Psi^{-1}.  All derivatives come from the chain rule through the elementary
maps.
"""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass
from functools import cached_property

import numpy as np
from scipy.interpolate import CubicSpline

from .preschwarz import ConformalMap, DiskPair, Postcomposed
from .sphere import INF, LOWER_HALF_PLANE, UPPER_HALF_PLANE, Mobius, cayley, ext, is_inf
from .welding import _MEAN_RULE, REAL_LINE, Sampled, Welding, angle_of, point_at

MIN_NODES = 16


class TooFewNodes(ValueError):
    pass


class SelfIntersecting(ValueError):
    pass


class NumericalBreakdown(ArithmeticError):
    pass


# -- curves -------------------------------------------------------------------

def _segments_cross(p, q, r, s) -> bool:
    def orient(a, b, c):
        return ((b - a).conjugate() * (c - a)).imag

    d1, d2 = orient(r, s, p), orient(r, s, q)
    d3, d4 = orient(p, q, r), orient(p, q, s)
    return (d1 * d2 < 0) and (d3 * d4 < 0)


def signed_area(z: np.ndarray) -> float:
    w = np.roll(z, -1)
    return 0.5 * float(np.sum(z.real * w.imag - w.real * z.imag))


@dataclass(frozen=True)
class SampledJordanCurve:
    """Closed polygon through ``points`` traversed counterclockwise."""

    points: np.ndarray

    @classmethod
    def from_points(cls, points, resample: int | None = None) -> "SampledJordanCurve":
        z = np.asarray(points, dtype=complex).ravel()
        if len(z) > 1 and abs(z[0] - z[-1]) <= 1e-14 * max(1.0, abs(z[0])):
            z = z[:-1]
        if len(z) < MIN_NODES:
            raise TooFewNodes(f"need at least {MIN_NODES} nodes, got {len(z)}")
        if signed_area(z) < 0:
            z = z[::-1].copy()
        curve = cls(z)
        curve.check_simple()
        return curve.resampled(resample) if resample else curve

    def __len__(self) -> int:
        return len(self.points)

    @property
    def closed(self) -> np.ndarray:
        return np.append(self.points, self.points[0])

    @cached_property
    def arclength(self) -> np.ndarray:
        """Cumulative polygonal arc length at each node, starting from 0."""
        return np.concatenate(([0.0], np.cumsum(np.abs(np.diff(self.closed)))))[:-1]

    @property
    def length(self) -> float:
        return float(np.sum(np.abs(np.diff(self.closed))))

    @property
    def turning_angles(self) -> np.ndarray:
        """Exterior angle at each node, a discrete stand-in for the tangent angle's derivative."""
        d = np.diff(self.closed)
        return np.angle(d / np.roll(d, 1))

    def check_simple(self) -> None:
        z = self.closed
        n = len(self.points)
        seen = set()
        for p in self.points:
            key = (round(p.real, 14), round(p.imag, 14))
            if key in seen:
                raise SelfIntersecting("repeated node")
            seen.add(key)
        for i in range(n):
            for j in range(i + 2, n):
                if i == 0 and j == n - 1:
                    continue
                if _segments_cross(z[i], z[i + 1], z[j], z[j + 1]):
                    raise SelfIntersecting(f"segments {i} and {j} cross")

    def resampled(self, n: int) -> "SampledJordanCurve":
        """n nodes at (nearly) equal arc length along a periodic cubic spline."""
        if n < MIN_NODES:
            raise TooFewNodes(f"need at least {MIN_NODES} nodes, got {n}")
        z = self.closed
        t = np.concatenate(([0.0], np.cumsum(np.abs(np.diff(z)))))
        spline = CubicSpline(t, np.column_stack([z.real, z.imag]), bc_type="periodic")
        fine = np.linspace(0.0, t[-1], 64 * max(n, len(z)) + 1)
        speed = np.linalg.norm(spline(fine, 1), axis=1)
        s = np.concatenate(([0.0], np.cumsum(0.5 * (speed[1:] + speed[:-1]) * np.diff(fine))))
        targets = np.arange(n) * (s[-1] / n)
        xy = spline(np.interp(targets, s, fine))
        curve = SampledJordanCurve(xy[:, 0] + 1j * xy[:, 1])
        curve.check_simple()
        return curve

    # constructors for test shapes

    @classmethod
    def polar(cls, radius, n: int, center: complex = 0.0) -> "SampledJordanCurve":
        theta = 2.0 * math.pi * np.arange(n) / n
        r = np.asarray(radius(theta), dtype=float)
        return cls.from_points(center + r * np.exp(1j * theta))

    @classmethod
    def circle(cls, n: int, center: complex = 0.0, radius: float = 1.0) -> "SampledJordanCurve":
        return cls.polar(lambda t: np.full_like(t, radius), n, center)

    @classmethod
    def ellipse(cls, a: float, b: float, n: int) -> "SampledJordanCurve":
        theta = 2.0 * math.pi * np.arange(4 * n) / (4 * n)
        return cls.from_points(a * np.cos(theta) + 1j * b * np.sin(theta), resample=n)

    # I/O

    @classmethod
    def from_csv(cls, text: str, resample: int | None = None) -> "SampledJordanCurve":
        rows = [r for r in csv.reader(io.StringIO(text)) if r and not r[0].startswith("#")]
        pts = []
        for r in rows:
            try:
                pts.append(complex(float(r[0]), float(r[1])))
            except ValueError:
                continue  # header row
        return cls.from_points(pts, resample)

    @classmethod
    def from_json(cls, text: str, resample: int | None = None) -> "SampledJordanCurve":
        data = json.loads(text)
        if isinstance(data, dict):
            data = data["points"]
        return cls.from_points([complex(p[0], p[1]) for p in data], resample)

    def to_csv(self) -> str:
        return "".join(f"{float(p.real)!r},{float(p.imag)!r}\n" for p in self.points)


# -- elementary maps ----------------------------------------------------------

def _sqrt_upper(q, w):
    """Square root of q in the closed upper half-plane; on the real line, signed like w."""
    s = np.sqrt(q)
    s = np.where(s.imag < 0, -s, s)
    return np.where((s.imag == 0) & (w.real < 0), -s, s)


def _chain2(g, h):
    """(g o h) jets of order two: g given at h's value."""
    return g[0], g[1] * h[1], g[2] * h[1] ** 2 + g[1] * h[2]


@dataclass(frozen=True)
class DiscreteConformalPair:
    curve: SampledJordanCurve
    kappa: np.ndarray     # per fold step, Möbius parameter
    b: np.ndarray         # per fold step, half-width of the folded slit
    zeta0: float          # image of z0 before the final map, possibly infinite
    eps: int              # orientation making the bounded side the upper half-plane
    lam: complex = 1.0    # rotation sending the first arc to the negative axis
    shift: float = 0.0    # final real affine map, chosen so i goes to the
    scale: float = 1.0    # image of a point well inside the curve

    @property
    def rho(self) -> float:
        return 1.0 / self.zeta0

    @property
    def z0(self) -> complex:
        return complex(self.curve.points[0])

    @property
    def z1(self) -> complex:
        return complex(self.curve.points[1])

    @cached_property
    def f(self) -> "ZipperMap":
        return ZipperMap(self, +1)

    @cached_property
    def g(self) -> "ZipperMap":
        return ZipperMap(self, -1)

    @cached_property
    def welding(self) -> "ZipperWelding":
        return ZipperWelding(self)

    def disk_pair(self) -> DiskPair:
        return DiskPair(self.f, self.g, self.welding)

    def infinity_pair(self) -> DiskPair:
        """The same curve sent through infinity by 1/(z - z0); both maps fix infinity."""
        S = Mobius(0, 1, 1, -self.z0)
        return DiskPair(Postcomposed(S, self.f), Postcomposed(S, self.g), self.welding)

    def bounded_pair(self) -> DiskPair:
        """The pair moved to the unit disk and its exterior; 0 goes to the inner point."""
        M = cayley().inverse()
        return DiskPair(self.f.precompose(M), self.g.precompose(M))

    @property
    def junction(self) -> float:
        """Real coordinate of the last node z_n, where the closing arc starts."""
        return -self.shift / self.scale

    # forward map Psi on arbitrary points

    def forward(self, z) -> np.ndarray:
        z = np.atleast_1d(np.asarray(z, dtype=complex))
        with np.errstate(divide="ignore", invalid="ignore"):
            w = 1j * np.sqrt(self.lam * (z - self.z1) / (z - self.z0))
            for k, b in zip(self.kappa, self.b):
                t = w / (1.0 - k * w)
                w = _sqrt_upper(t * t + b * b, t)
            m = w / (1.0 - self.rho * w)
        return (self.eps * m * m - self.shift) / self.scale

    # real-line bookkeeping for boundary points

    def _push(self, level: int, w):
        """Real points at fold level ``level`` (0 = after the first map) to the final line.

        Returns the final coordinate, its derivative in w, and which side
        (+1 bounded, -1 unbounded) the point bounds.
        """
        w = np.asarray(w, dtype=float).copy()
        d = np.ones_like(w)
        with np.errstate(divide="ignore", invalid="ignore"):
            for k in range(level, len(self.b)):
                kap, b = self.kappa[k], self.b[k]
                den = 1.0 - kap * w
                t = np.where(np.isinf(w), -1.0 / kap if kap else np.inf, w / den)
                d = d / den**2
                out = np.copysign(np.sqrt(t * t + b * b), t)  # -0 keeps its side
                d = d * np.where(np.isinf(t), 1.0, t / out)
                w = out
            r = self.rho
            m = np.where(np.isinf(w), -1.0 / r if r else np.inf, w / (1.0 - r * w))
            d = d / (1.0 - r * w) ** 2
            X = (self.eps * m * m - self.shift) / self.scale
            d = d * self.eps * 2.0 * m / self.scale
        return X, d, np.sign(m) * self.eps

    def _pull(self, X, side: int):
        """Walk real X back until it lands on a folded slit.

        Returns the fold level reached and the real coordinate there; level -1
        marks points of the closing arc (where both sides agree).
        """
        X = np.asarray(X, dtype=float)
        x = self.eps * (self.shift + self.scale * X)
        level = np.full(X.shape, -2)
        w = np.where(x >= 0, side * self.eps * np.sqrt(np.abs(x)), 0.0)
        level[x < 0] = -1
        r = self.rho
        with np.errstate(divide="ignore", invalid="ignore"):
            w = np.where(np.isinf(w), 1.0 / r if r else np.inf, w / (1.0 + r * w))
            for k in range(len(self.b) - 1, -1, -1):
                active = level == -2
                kap, b = self.kappa[k], self.b[k]
                hit = active & (np.abs(w) < b)
                level[hit] = k + 1
                go = active & ~hit
                u = np.copysign(np.sqrt(np.maximum(w * w - b * b, 0.0)), w)
                u = np.where(np.isinf(w), w, u)
                back = np.where(np.isinf(u), 1.0 / kap if kap else np.inf, u / (1.0 + kap * u))
                w = np.where(go, back, w)
        level[level == -2] = 0
        return level, w

    def welding_values(self, X, side: int = +1):
        """h(X) and h'(X) for finite real X; side -1 gives the inverse welding."""
        X = np.asarray(X, dtype=float)
        level, w = self._pull(X, side)
        H = X.copy()
        dH = np.ones_like(X)
        for lv in np.unique(level[level >= 0]):
            sel = level == lv
            Xo, do, _ = self._push(int(lv), -w[sel])
            _, di, _ = self._push(int(lv), w[sel])
            H[sel] = Xo
            with np.errstate(invalid="ignore"):
                # both sides meet at a slit tip, where the ratio tends to 1
                dH[sel] = np.where(w[sel] == 0, 1.0, -do / di)
        return H, dH

    @cached_property
    def node_preimages(self) -> tuple[np.ndarray, np.ndarray]:
        """Real preimages of the nodes z_1 .. z_n on the bounded side and the unbounded side."""
        n = len(self.b)
        fa, ga = [], []
        for k in range(n):
            X, _, s = self._push(k + 1, np.array([self.b[k], -self.b[k]]))
            i = 0 if s[0] > 0 else 1
            fa.append(X[i])
            ga.append(X[1 - i])
        fa.append(self.junction)
        ga.append(self.junction)
        return np.array(fa), np.array(ga)

    def disk_normalization(self, center: complex) -> Mobius:
        """Möbius map of the unit disk onto the upper half-plane, 0 -> Psi(center), 1 -> inf."""
        q = complex(self.forward(center)[0])
        if not q.imag > 0:
            raise ValueError("center is not inside the curve")
        return Mobius(-q.conjugate(), q, -1.0, 1.0)


def geodesic_zipper(curve: SampledJordanCurve) -> DiscreteConformalPair:
    z = curve.points
    z0, z1 = complex(z[0]), complex(z[1])
    q_last = (complex(z[-1]) - z1) / (complex(z[-1]) - z0)
    lam = abs(q_last) / q_last
    with np.errstate(divide="ignore", invalid="ignore"):
        pts = 1j * np.sqrt(lam * (z[2:] - z1) / (z[2:] - z0))
    zeta0 = math.inf
    kappas, bs = [], []
    for j in range(len(pts)):
        a = pts[j]
        if not (np.isfinite(a) and a.imag > 1e-14 * abs(a)):
            raise NumericalBreakdown(f"node {j + 2} left the upper half-plane")
        kap = a.real / abs(a) ** 2
        b = abs(a) ** 2 / a.imag
        kappas.append(kap)
        bs.append(b)
        rest = pts[j + 1:]
        t = rest / (1.0 - kap * rest)
        pts[j + 1:] = _sqrt_upper(t * t + b * b, t)
        pts[j] = 0.0
        if math.isinf(zeta0):
            t0 = -1.0 / kap if kap else math.inf
        else:
            t0 = zeta0 / (1.0 - kap * zeta0) if kap * zeta0 != 1.0 else math.inf
        zeta0 = math.inf if math.isinf(t0) else math.copysign(math.sqrt(t0 * t0 + b * b), t0)
    if zeta0 == 0 or math.isnan(zeta0):
        raise NumericalBreakdown("first node collapsed onto the last")
    pair = DiscreteConformalPair(curve, np.array(kappas), np.array(bs), zeta0, 1, lam)
    # a point just left of the midpoint of the first arc lies in the bounded side
    mid = (z1 + z0 / lam) / (1.0 + 1.0 / lam)
    side = pair.forward(mid + 1e-4j * (z1 - z0))[0]
    if not np.isfinite(side) or side.imag == 0:
        raise NumericalBreakdown("could not orient the map")
    eps = -1 if side.imag < 0 else 1
    pair = DiscreteConformalPair(curve, pair.kappa, pair.b, zeta0, eps, lam)
    # spread the node preimages evenly: send i to the image of an inner point
    q = complex(pair.forward(_inner_point(curve, mid + 1e-4j * (z1 - z0)))[0])
    if not (np.isfinite(q) and q.imag > 0):
        raise NumericalBreakdown("inner point did not map into the upper half-plane")
    return DiscreteConformalPair(curve, pair.kappa, pair.b, zeta0, eps, lam, q.real, q.imag)


def _winding(z: np.ndarray, p: complex) -> float:
    d = np.append(z, z[0]) - p
    return float(np.sum(np.angle(d[1:] / d[:-1]))) / (2.0 * math.pi)


def _inner_point(curve: SampledJordanCurve, fallback: complex) -> complex:
    """The area centroid when it lies inside the curve, else the fallback point."""
    z = curve.points
    w = np.roll(z, -1)
    cross = z.real * w.imag - w.real * z.imag
    c = complex(np.sum((z + w) * cross) / (3.0 * np.sum(cross)))
    return c if abs(_winding(z, c) - 1.0) < 0.5 else fallback


class ZipperMap(ConformalMap):
    """Psi^{-1} on the upper (side +1) or lower (side -1) half-plane."""

    def __init__(self, pair: DiscreteConformalPair, side: int):
        self.pair = pair
        self.side = side
        self.disk = UPPER_HALF_PLANE if side > 0 else LOWER_HALF_PLANE

    def jet(self, X):
        p = self.pair
        X = np.asarray(X, dtype=complex)
        eps = p.eps
        x = eps * (p.shift + p.scale * X)
        with np.errstate(divide="ignore", invalid="ignore"):
            v = 1j * np.sqrt(-x)
            boundary = (x.imag == 0) & (x.real >= 0)
            v = np.where(boundary, self.side * eps * np.sqrt(np.abs(x.real)), v)
            c = eps * p.scale
            jet = (v, c / (2.0 * v), -c * c / (4.0 * v**3))
            r = p.rho
            den = 1.0 + r * v
            jet = _chain2((v / den, 1.0 / den**2, -2.0 * r / den**3), jet)
            for kap, b in zip(p.kappa[::-1], p.b[::-1]):
                w = jet[0]
                u = _sqrt_upper(w * w - b * b, w)
                jet = _chain2((u, w / u, -b * b / u**3), jet)
                den = 1.0 + kap * u
                jet = _chain2((u / den, 1.0 / den**2, -2.0 * kap / den**3), jet)
            w = jet[0]
            s = w * w
            jet = _chain2((s, 2.0 * w, np.full(w.shape, 2.0 + 0j)), jet)
            c = 1.0 / p.lam
            dz = c * (p.z0 - p.z1)
            den = 1.0 + c * s
            jet = _chain2(((p.z1 + c * s * p.z0) / den, dz / den**2, -2.0 * c * dz / den**3), jet)
        return jet[0], jet[1], jet[2], None

    def value(self, X):
        X = ext(X)
        if is_inf(X):
            return self.pair.z0
        v = complex(self.jet(np.array([X]))[0][0])
        return INF if not np.isfinite(v) else v

    def boundary_knots(self):
        return (self.pair.junction,)


DIAGONAL_WINDOW = 1e-3


class ZipperWelding(Welding):
    """Exact welding g^{-1} o f of the zipper curve on the real line."""

    domain = REAL_LINE

    def __init__(self, pair: DiscreteConformalPair, swap: bool = False):
        self.pair = pair
        self.swap = swap

    @property
    def knots(self):
        return (self.pair.junction,)

    def _values(self, x):
        x = np.asarray(x, dtype=float)
        finite = np.isfinite(x)
        h = x.copy()
        dh = np.ones_like(x)
        h[finite], dh[finite] = self.pair.welding_values(x[finite], -1 if self.swap else +1)
        return h, dh

    def _eval(self, x):
        return self._values(x)[0]

    def _derivative(self, x):
        return self._values(x)[1]

    def _eval_inverse(self, x):
        return ZipperWelding(self.pair, not self.swap)._eval(x)

    def log_abs_dq(self, x, y):
        out = super().log_abs_dq(x, y)
        y = ext(y)
        if is_inf(y):
            return out
        y = y.real
        x = np.asarray(x, dtype=float)
        # close to the diagonal the chain's round-off swamps h(x) - h(y), so
        # average h' over [y, x] instead
        near = np.abs(x - y) < DIAGONAL_WINDOW * (1.0 + abs(y))
        if np.any(near):
            t, w = _MEAN_RULE
            pts = y + np.outer(x[near] - y, t)
            mean = self._derivative(pts.ravel()).reshape(pts.shape) @ w
            out[near] = np.log(np.abs(mean))
        return out


# -- derived weldings ------------------------------------------------------------

def zipper_welding(pair: DiscreteConformalPair) -> ZipperWelding:
    return pair.welding


def welding_from_curve(curve: SampledJordanCurve | DiscreteConformalPair,
                       samples: int | None = None) -> Sampled:
    """The welding conjugated to the unit circle by the Cayley map, sampled with exact slopes."""
    pair = curve if isinstance(curve, DiscreteConformalPair) else geodesic_zipper(curve)
    m = samples or 8 * len(pair.curve)
    theta = (np.arange(m) + 0.5) * (2.0 * math.pi / m)
    X = point_at(theta, REAL_LINE)
    H, dH = pair.welding_values(X)
    phi = angle_of(H, REAL_LINE)
    slopes = dH * (1.0 + X * X) / (1.0 + H * H)
    return Sampled(theta, phi, slopes)


class SpeedWelding(Welding):
    """X -> integral of speed from origin to X, an increasing map of the real line.

    Integrals run between consecutive break points with a composite
    Gauss-Legendre rule, so a vector of points costs a handful of vectorized
    speed evaluations.
    """

    domain = REAL_LINE
    SUBPANELS = 8

    def __init__(self, speed, breaks=(), origin: float = 0.0):
        self.speed = speed
        self.origin = float(origin)
        pts = {self.origin} | {float(b) for b in breaks if np.isfinite(b)}
        self.breaks = np.array(sorted(pts))
        self._t, self._w = np.polynomial.legendre.leggauss(16)
        seg = self._segment(self.breaks[:-1], self.breaks[1:])
        cum = np.concatenate(([0.0], np.cumsum(seg)))
        self._cum = cum - cum[np.searchsorted(self.breaks, self.origin)]

    @property
    def knots(self):
        return (self.origin,)

    def _segment(self, a, b):
        """Integral of the speed over each [a_i, b_i]."""
        a = np.atleast_1d(np.asarray(a, dtype=float))
        b = np.atleast_1d(np.asarray(b, dtype=float))
        frac = np.linspace(0.0, 1.0, self.SUBPANELS + 1)
        lo = a[:, None] + (b - a)[:, None] * frac[None, :-1]
        hi = a[:, None] + (b - a)[:, None] * frac[None, 1:]
        mid, half = (lo + hi) / 2.0, (hi - lo) / 2.0
        x = mid[..., None] + half[..., None] * self._t
        with np.errstate(invalid="ignore"):
            vals = self.speed(x.ravel()).reshape(x.shape)
        # empty panels sit on a break, where the speed may be singular
        vals = np.where(half[..., None] == 0, 0.0, vals)
        return np.sum(vals * self._w * half[..., None], axis=(1, 2))

    def _tail(self, a, x):
        """Integral from a to each x on a geometric grid, for points beyond the outer breaks."""
        grid = np.concatenate(([0.0], np.geomspace(1e-6, 1.0, 40)))
        edges = a + (x[:, None] - a) * grid[None, :]
        seg = self._segment(edges[:, :-1].ravel(), edges[:, 1:].ravel())
        return seg.reshape(len(x), -1).sum(axis=1)

    def _eval(self, x):
        x = np.asarray(x, dtype=float)
        out = np.array(x, dtype=float)
        finite = np.isfinite(x)
        xf = x[finite]
        br = self.breaks
        k = np.clip(np.searchsorted(br, xf, side="right") - 1, 0, len(br) - 1)
        val = np.empty(xf.shape)
        inside = (xf >= br[0]) & (xf <= br[-1])
        if np.any(inside):
            ki = k[inside]
            val[inside] = self._cum[ki] + self._segment(br[ki], xf[inside])
        below = xf < br[0]
        if np.any(below):
            val[below] = self._cum[0] + self._tail(br[0], xf[below])
        above = xf > br[-1]
        if np.any(above):
            val[above] = self._cum[-1] + self._tail(br[-1], xf[above])
        out[finite] = val
        return out

    def _derivative(self, x):
        x = np.asarray(x, dtype=float)
        return np.where(np.isfinite(x), self.speed(np.where(np.isfinite(x), x, 0.0)), np.nan)

    def _eval_inverse(self, s):
        s = np.asarray(s, dtype=float)
        out = np.array(s, dtype=float)
        finite = np.isfinite(s)
        sf = s[finite]
        o = self.origin
        lo = np.full(sf.shape, -1.0)
        hi = np.full(sf.shape, 1.0)
        for _ in range(200):
            grow_lo = self._eval(o + lo) > sf
            grow_hi = self._eval(o + hi) < sf
            if not (grow_lo.any() or grow_hi.any()):
                break
            lo = np.where(grow_lo, 2.0 * lo, lo)
            hi = np.where(grow_hi, 2.0 * hi, hi)
        lo, hi = o + lo, o + hi
        for _ in range(80):
            mid = 0.5 * (lo + hi)
            below = self._eval(mid) < sf
            lo = np.where(below, mid, lo)
            hi = np.where(below, hi, mid)
        out[finite] = 0.5 * (lo + hi)
        return out


def arclength_factorization(pair: DiscreteConformalPair) -> tuple[SpeedWelding, SpeedWelding]:
    """Arc-length homeomorphisms H_f, H_g of the curve sent through infinity by 1/(z - z0).

    Both start at the node z_n, so h = H_g^{-1} o H_f.
    """
    ip = pair.infinity_pair()
    F, G = ip.f, ip.g
    fk, gk = pair.node_preimages

    def speed(M):
        return lambda x: np.exp(M.boundary_log_speed(np.asarray(x, dtype=float) + 0j))

    return (SpeedWelding(speed(F), fk, pair.junction),
            SpeedWelding(speed(G), gk, pair.junction))
