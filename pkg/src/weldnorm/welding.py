"""Orientation-preserving homeomorphisms of R-hat and S^1.

Points of the real line are floats (``inf`` is the point at infinity);
points of the unit circle are unit complex numbers.  Every welding exposes
vectorized ``eval``, ``eval_inverse`` and ``derivative`` together with
``log_abs_dq(x, y) = log|(h(x) - h(y)) / (x - y)|`` evaluated without
cancellation wherever the representation allows it.
"""

from __future__ import annotations

import math
from functools import cached_property

import numpy as np
from scipy.interpolate import CubicHermiteSpline

from .sphere import INF, Mobius, cayley, ext, is_inf, spherical_distance

TWO_PI = 2.0 * math.pi
REAL_LINE = "real_line"
UNIT_CIRCLE = "unit_circle"
DOMAINS = (REAL_LINE, UNIT_CIRCLE)


class DomainMismatch(ValueError):
    pass


def angle_of(x, domain: str) -> np.ndarray:
    """Circular coordinate in [0, 2pi); on R-hat the Cayley angle (inf -> 0)."""
    x = np.asarray(x)
    if domain == REAL_LINE:
        x = np.real(x).astype(float)
        with np.errstate(invalid="ignore"):
            t = math.pi + 2.0 * np.arctan(x)
        return np.where(np.isinf(x), 0.0, t)
    return np.mod(np.angle(x), TWO_PI)


def point_at(theta, domain: str):
    """Inverse of ``angle_of``."""
    theta = np.asarray(theta, dtype=float)
    if domain == REAL_LINE:
        with np.errstate(divide="ignore"):
            return -1.0 / np.tan(theta / 2.0)
    return np.exp(1j * theta)


def _as_domain_array(x, domain):
    if domain == REAL_LINE:
        return np.real(np.asarray(x, dtype=complex)).astype(float)
    return np.asarray(x, dtype=complex)


def _scalarize(fn):
    """Let array methods accept a single point, including the point at infinity."""

    def wrapper(self, x):
        if np.ndim(x) == 0:
            x = ext(x)
            if self.domain == REAL_LINE:
                if x.imag != 0 and not is_inf(x):
                    raise DomainMismatch(f"{x} is not on the real line")
                out = fn(self, np.array([x.real if not is_inf(x) else math.inf]))
            else:
                out = fn(self, np.array([x]))
            return out[0].item()
        return fn(self, x)

    wrapper.__name__ = fn.__name__
    wrapper.__doc__ = fn.__doc__
    return wrapper


class Welding:
    """Common interface; subclasses implement the ``_eval``-style array methods."""

    domain: str

    @property
    def knots(self) -> tuple:
        return ()

    @_scalarize
    def eval(self, x):
        return self._eval(_as_domain_array(x, self.domain))

    __call__ = eval

    @_scalarize
    def eval_inverse(self, x):
        return self._eval_inverse(_as_domain_array(x, self.domain))

    @_scalarize
    def derivative(self, x):
        return self._derivative(_as_domain_array(x, self.domain))

    def log_abs_dq(self, x, y):
        """log|(h(x) - h(y))/(x - y)| for finite x (array) and finite y with h(y) finite."""
        x = _as_domain_array(x, self.domain)
        hx = self._eval(x)
        hy = self.eval(y)
        if self.domain == UNIT_CIRCLE:
            return _log_chord_ratio(np.angle(hx), np.angle(hy), np.angle(x), np.angle(y))
        with np.errstate(divide="ignore", invalid="ignore"):
            return np.log(np.abs(hx - hy)) - np.log(np.abs(x - y))

    def singular_points(self) -> tuple:
        """Points where quadrature panels should break: knots and preimages of infinity."""
        pts = list(self.knots)
        if self.domain == REAL_LINE:
            pinf = self.eval_inverse(INF)
            if not any(spherical_distance(pinf, k) < 1e-14 for k in pts):
                pts.append(pinf)
        return tuple(pts)


_gl_t, _gl_w = np.polynomial.legendre.leggauss(12)
_MEAN_RULE = (0.5 * (_gl_t + 1.0), 0.5 * _gl_w)


def _log_chord_ratio(phx, phy, tx, ty):
    with np.errstate(divide="ignore"):
        return (np.log(np.abs(np.sin((phx - phy) / 2.0)))
                - np.log(np.abs(np.sin((tx - ty) / 2.0))))


def _knot_angles(knots, domain):
    return np.array([float(angle_of(np.array([k if domain == UNIT_CIRCLE else
                                               (math.inf if is_inf(k) else ext(k).real)]), domain)[0])
                     for k in knots])


class PiecewiseMobius(Welding):
    """A welding given by one Möbius branch per knot arc.

    ``branches[i]`` acts on the arc from ``knots[i]`` to ``knots[i+1]``
    (cyclically), following the orientation of the domain.  With no knots
    the single branch acts everywhere.
    """

    def __init__(self, knots, branches, domain: str = REAL_LINE, *, check: bool = True):
        if domain not in DOMAINS:
            raise DomainMismatch(f"unknown domain {domain!r}")
        self.domain = domain
        knots = [ext(k) for k in knots]
        branches = list(branches)
        if (len(knots) or 1) != len(branches):
            raise ValueError("need one branch per knot arc")
        if knots:
            ang = _knot_angles(knots, domain)
            order = np.argsort(ang, kind="stable")
            start = int(order[0])
            if not np.array_equal(order, np.roll(np.arange(len(knots)), -start)):
                raise ValueError("knots must be listed in cyclic order")
            self._angles = ang[order]
            knots = [knots[i] for i in order]
            branches = [branches[i] for i in order]
        else:
            self._angles = np.zeros(0)
        self._knots = tuple(knots)
        self.branches = tuple(branches)
        if check:
            self._validate()

    @property
    def knots(self) -> tuple:
        return self._knots

    def _branch_index(self, x):
        if len(self._knots) == 0:
            return np.zeros(np.shape(x), dtype=int)
        t = angle_of(x, self.domain)
        idx = np.searchsorted(self._angles, t, side="right") - 1
        return np.where(idx < 0, len(self._knots) - 1, idx)

    def _apply(self, x, which):
        x = np.asarray(x)
        idx = self._branch_index(x)
        out = np.empty(x.shape, dtype=complex)
        for i, T in enumerate(self.branches):
            m = idx == i
            if np.any(m):
                out[m] = which(T, x[m])
        return out

    def _finish(self, out):
        return out.real if self.domain == REAL_LINE else out

    def _eval(self, x):
        def ev(T, xs):
            res = T.apply_array(xs)
            bad = ~np.isfinite(xs)
            if np.any(bad):
                res[bad] = T(INF)
            return res
        return self._finish(self._apply(x, ev))

    def _derivative(self, x):
        return self._finish(self._apply(x, lambda T, xs: T.derivative_array(xs)))

    @cached_property
    def _inverse(self) -> "PiecewiseMobius":
        knots = [self.branches[i](k) for i, k in enumerate(self._knots)]
        return PiecewiseMobius(knots, [T.inverse() for T in self.branches],
                               self.domain, check=False)

    def _eval_inverse(self, x):
        return self._inverse._eval(x)

    def log_abs_dq(self, x, y):
        x = _as_domain_array(x, self.domain)
        y = ext(y)
        yv = np.array([y.real if self.domain == REAL_LINE else y])
        iy = int(self._branch_index(yv)[0])
        ix = self._branch_index(x)
        out = super().log_abs_dq(x, y)
        T = self.branches[iy]
        same = ix == iy
        if np.any(same):
            # Möbius difference quotient in closed form: 1/((cx+d)(cy+d))
            out[same] = -np.log(np.abs((T.c * x[same] + T.d) * (T.c * y + T.d)))
        return out

    def _validate(self):
        n = len(self._knots)
        if n == 0:
            return
        for i, k in enumerate(self._knots):
            left = self.branches[i - 1](k)
            right = self.branches[i](k)
            if spherical_distance(left, right) > 1e-10:
                raise ValueError(f"branches disagree at knot {k}: {left} vs {right}")
        # orientation: positive derivative along the cline at arc midpoints
        ang = np.append(self._angles, self._angles[0] + TWO_PI)
        mids = point_at((ang[:-1] + ang[1:]) / 2.0, self.domain)
        for i, (T, m) in enumerate(zip(self.branches, mids)):
            dt = self._tangent_speed(T, m)
            if not dt > 0:
                raise ValueError(f"branch {i} is not orientation preserving")
        images = _knot_angles([self.branches[i](k) for i, k in enumerate(self._knots)],
                              self.domain)
        shift = np.mod(images - images[0], TWO_PI)
        if n > 1 and not np.all(np.diff(shift) > 0):
            raise ValueError("branch images do not tile the cline in order")

    def _tangent_speed(self, T, m):
        if self.domain == REAL_LINE:
            return (1.0 / (T.c * m + T.d) ** 2).real
        dz = 1.0 / (T.c * m + T.d) ** 2
        return (dz * m / T(m)).real

    def to_json(self) -> dict:
        return {
            "domain": self.domain,
            "kind": "piecewise_mobius",
            "knots": [_point_json(k) for k in self._knots],
            "branches": [T.to_json() for T in self.branches],
        }


def _point_json(z):
    z = ext(z)
    return "inf" if is_inf(z) else [z.real, z.imag]


def _point_from_json(v):
    return INF if v == "inf" else complex(v[0], v[1])


def example_h() -> PiecewiseMobius:
    """Four Möbius branches glued at 0, 1, 3 and infinity; slope 7 at infinity."""
    return PiecewiseMobius(
        [0.0, 1.0, 3.0, INF],
        [Mobius(7, 0, 6, 1), Mobius(2, -9, 3, -10), Mobius(7, -18, 0, 1), Mobius(7, 0, 0, 1)],
    )


def corner_welding(ratio: float = 2.0) -> PiecewiseMobius:
    """x for x <= 0 and ratio*x for x > 0: log h' jumps, so the energy is infinite."""
    return PiecewiseMobius([0.0, INF], [Mobius(ratio, 0, 0, 1), Mobius(1, 0, 0, 1)])


def mobius_welding(T: Mobius, domain: str = REAL_LINE) -> PiecewiseMobius:
    return PiecewiseMobius([], [T], domain)


def identity(domain: str = REAL_LINE) -> PiecewiseMobius:
    return mobius_welding(Mobius.identity(), domain)


def _cyclic_sorted(points, domain):
    pts = []
    for p in points:
        if not any(spherical_distance(p, q) < 1e-13 for q in pts):
            pts.append(ext(p))
    ang = _knot_angles(pts, domain)
    return [pts[i] for i in np.argsort(ang, kind="stable")], np.sort(ang)


def _same_mobius(S: Mobius, T: Mobius, tol=1e-12) -> bool:
    return (np.allclose(S.matrix, T.matrix, atol=tol, rtol=0)
            or np.allclose(S.matrix, -T.matrix, atol=tol, rtol=0))


def _merge_equal_neighbours(knots, branches):
    n = len(knots)
    if n == 0:
        return knots, branches
    keep = [i for i in range(n) if not _same_mobius(branches[i - 1], branches[i])]
    if not keep:
        return [], [branches[0]]
    return [knots[i] for i in keep], [branches[i] for i in keep]


def _piecewise_from_pieces(h1: PiecewiseMobius, h2: PiecewiseMobius) -> PiecewiseMobius:
    dom = h2.domain
    cand = list(h2.knots) + [h2.eval_inverse(k) for k in h1.knots]
    knots, ang = _cyclic_sorted(cand, dom)
    if not knots:
        return PiecewiseMobius([], [h1.branches[0] @ h2.branches[0]], dom)
    ang_next = np.append(ang[1:], ang[0] + TWO_PI)
    mids = point_at((ang + ang_next) / 2.0, dom)
    i2 = h2._branch_index(mids)
    i1 = h1._branch_index(_as_domain_array(h2._eval(mids), dom))
    branches = [h1.branches[a] @ h2.branches[b] for a, b in zip(i1, i2)]
    knots, branches = _merge_equal_neighbours(knots, branches)
    return PiecewiseMobius(knots, branches, dom)


class Inverted(Welding):
    def __init__(self, h: Welding):
        self.h = h
        self.domain = h.domain

    @property
    def knots(self):
        return tuple(self.h.eval(k) for k in self.h.knots)

    def _eval(self, x):
        return self.h._eval_inverse(x)

    def _eval_inverse(self, x):
        return self.h._eval(x)

    def _derivative(self, x):
        return 1.0 / self.h._derivative(self.h._eval_inverse(x))

    def log_abs_dq(self, x, y):
        x = _as_domain_array(x, self.domain)
        return -self.h.log_abs_dq(self.h._eval_inverse(x), self.h.eval_inverse(y))


class Composed(Welding):
    """outer(inner(x))."""

    def __init__(self, outer: Welding, inner: Welding):
        if outer.domain != inner.domain:
            raise DomainMismatch("weldings live on different clines")
        self.outer, self.inner = outer, inner
        self.domain = inner.domain

    @property
    def knots(self):
        pts = list(self.inner.knots) + [self.inner.eval_inverse(k) for k in self.outer.knots]
        return tuple(_cyclic_sorted(pts, self.domain)[0])

    def _eval(self, x):
        return self.outer._eval(self.inner._eval(x))

    def _eval_inverse(self, x):
        return self.inner._eval_inverse(self.outer._eval_inverse(x))

    def _derivative(self, x):
        return self.outer._derivative(self.inner._eval(x)) * self.inner._derivative(x)

    def log_abs_dq(self, x, y):
        x = _as_domain_array(x, self.domain)
        return (self.outer.log_abs_dq(self.inner._eval(x), self.inner.eval(y))
                + self.inner.log_abs_dq(x, y))


def _cline_name(T: Mobius, target_domain: str) -> str:
    """Name of the cline mapped by T onto ``target_domain``."""
    Tinv = T.inverse()
    if target_domain == UNIT_CIRCLE:
        probes = np.exp(1j * np.array([0.3, 2.1, 4.0, 5.5]))
    else:
        probes = np.array([-2.3, 0.4, 1.7, 5.1])
    img = [Tinv(complex(p)) for p in probes]
    if all(is_inf(z) or abs(z.imag) < 1e-9 * max(1.0, abs(z)) for z in img):
        return REAL_LINE
    if all(not is_inf(z) and abs(abs(z) - 1.0) < 1e-9 * max(1.0, abs(z)) for z in img):
        return UNIT_CIRCLE
    raise DomainMismatch("conjugating map does not carry R-hat or S^1 onto the welding's cline")


def _range_name(S: Mobius, source_domain: str) -> str:
    return _cline_name(S.inverse(), source_domain)


class Conjugated(Welding):
    """S(h(T(x))) for a generic welding h."""

    def __init__(self, h: Welding, S: Mobius, T: Mobius):
        self.h, self.S, self.T = h, S, T
        self.domain = _cline_name(T, h.domain)
        if _range_name(S, h.domain) != self.domain:
            raise DomainMismatch("S and T must act between the same pair of clines")

    @property
    def knots(self):
        Ti = self.T.inverse()
        pts = [Ti(k) for k in self.h.knots]
        # the images of the conjugating maps' poles on the cline are smoothness breaks only
        return tuple(_cyclic_sorted(pts, self.domain)[0])

    def _to_inner(self, x):
        return _as_domain_array(self.T.apply_array(x), self.h.domain)

    def _eval(self, x):
        y = self.h._eval(self._to_inner(x))
        return _as_domain_array(self.S.apply_array(y), self.domain)

    def _eval_inverse(self, x):
        y = _as_domain_array(self.S.inverse().apply_array(x), self.h.domain)
        return _as_domain_array(self.T.inverse().apply_array(self.h._eval_inverse(y)), self.domain)

    def _derivative(self, x):
        tx = self._to_inner(x)
        hx = self.h._eval(tx)
        out = (self.S.derivative_array(hx) * self.h._derivative(tx)
               * self.T.derivative_array(x))
        return out.real if self.domain == REAL_LINE else out

    def log_abs_dq(self, x, y):
        x = _as_domain_array(x, self.domain)
        y = ext(y)
        tx, ty = self._to_inner(x), self.T(y)
        hx, hy = self.h._eval(tx), self.h.eval(ty)
        S, T = self.S, self.T
        return (-np.log(np.abs((S.c * hx + S.d) * (S.c * hy + S.d)))
                + self.h.log_abs_dq(tx, ty)
                - np.log(np.abs((T.c * x + T.d) * (T.c * y + T.d))))


class Sampled(Welding):
    """Monotone cubic Hermite interpolation of node/value pairs on S^1.

    Nodes and values are angles; the values are lifted so that both sequences
    increase by less than one turn.  Node slopes are centred differences,
    limited (Fritsch-Carlson) so the interpolant stays increasing.
    """

    domain = UNIT_CIRCLE

    def __init__(self, theta, phi, slopes=None):
        theta = np.asarray(theta, dtype=float)
        phi = np.asarray(phi, dtype=float)
        # lift values given modulo 2pi
        phi = phi + TWO_PI * np.concatenate(([0], np.cumsum(np.diff(phi) <= 0)))
        if theta.ndim != 1 or theta.shape != phi.shape or len(theta) < 4:
            raise ValueError("need at least four matching node/value pairs")
        if not (np.all(np.diff(theta) > 0) and theta[-1] - theta[0] < TWO_PI):
            raise ValueError("nodes must increase within one turn")
        if not (np.all(np.diff(phi) > 0) and phi[-1] - phi[0] < TWO_PI):
            raise ValueError("values must increase within one turn")
        self.theta, self.phi = theta, phi
        self._given_slopes = None if slopes is None else np.asarray(slopes, dtype=float)
        n, pad = len(theta), 3
        idx = np.arange(-pad, n + pad)
        turns = np.floor_divide(idx, n)
        tt = theta[idx % n] + TWO_PI * turns
        pp = phi[idx % n] + TWO_PI * turns
        if slopes is None:
            d = _centred_slopes(tt, pp)
        else:
            d = np.asarray(slopes, dtype=float)[idx % n]
        d = _fritsch_carlson(tt, pp, d)
        self.slopes = d[pad:pad + n]
        self._spline = CubicHermiteSpline(tt, pp, d)
        self._dspline = self._spline.derivative()

    @property
    def nodes(self):
        return tuple(np.exp(1j * self.theta))

    @property
    def knots(self):
        # the Hermite interpolant is C^1, so nodes need not split panels
        return ()

    def _lift(self, t):
        return self.theta[0] + np.mod(t - self.theta[0], TWO_PI)

    def eval_angle(self, t):
        return self._spline(self._lift(np.asarray(t, dtype=float)))

    def derivative_angle(self, t):
        return self._dspline(self._lift(np.asarray(t, dtype=float)))

    def _eval(self, x):
        return np.exp(1j * self.eval_angle(np.angle(x)))

    def _derivative(self, x):
        t = np.angle(x)
        return np.exp(1j * (self.eval_angle(t) - t)) * self.derivative_angle(t)

    def inverse_angle(self, p):
        p = self.phi[0] + np.mod(np.asarray(p, dtype=float) - self.phi[0], TWO_PI)
        k = np.clip(np.searchsorted(np.append(self.phi, self.phi[0] + TWO_PI), p) - 1,
                    0, len(self.theta) - 1)
        lo = self.theta[k]
        hi = np.append(self.theta, self.theta[0] + TWO_PI)[k + 1]
        for _ in range(64):
            mid = 0.5 * (lo + hi)
            below = self._spline(mid) < p
            lo = np.where(below, mid, lo)
            hi = np.where(below, hi, mid)
        return 0.5 * (lo + hi)

    def _eval_inverse(self, x):
        return np.exp(1j * self.inverse_angle(np.angle(x)))

    def log_abs_dq(self, x, y):
        tx = np.angle(np.asarray(x, dtype=complex))
        ty = float(np.angle(ext(y)))
        out = _log_chord_ratio(self.eval_angle(tx), self.eval_angle(ty), tx, ty)
        dt = np.angle(np.exp(1j * (tx - ty)))
        near = (np.abs(dt) < 1e-3) & (dt != 0.0)
        if np.any(near):
            # mean slope over [ty, tx] avoids cancelling two nearly equal angles
            t, w = _MEAN_RULE
            pts = ty + np.outer(dt[near], t)
            mean = self.derivative_angle(pts.ravel()).reshape(pts.shape) @ w
            d = dt[near]
            out[near] = np.log(np.abs(np.sin(mean * d / 2.0) / np.sin(d / 2.0)))
        return out

    def to_json(self) -> dict:
        out = {
            "domain": UNIT_CIRCLE,
            "kind": "sampled",
            "knots": [[float(math.cos(t)), float(math.sin(t))] for t in self.theta],
            "values": [[float(math.cos(p)), float(math.sin(p))] for p in self.phi],
            "node_angles": [float(t) for t in self.theta],
            "value_angles": [float(p) for p in self.phi],
        }
        if self._given_slopes is not None:
            out["slopes"] = [float(d) for d in self._given_slopes]
        return out


def _centred_slopes(t, p):
    d = np.empty_like(p)
    ht = np.diff(t)
    s = np.diff(p) / ht
    # three-point (non-uniform) centred difference
    d[1:-1] = (s[:-1] * ht[1:] + s[1:] * ht[:-1]) / (ht[:-1] + ht[1:])
    d[0], d[-1] = s[0], s[-1]
    return d


def _fritsch_carlson(t, p, d):
    d = np.maximum(d.copy(), 0.0)
    s = np.diff(p) / np.diff(t)
    for i in range(len(s)):
        a, b = d[i] / s[i], d[i + 1] / s[i]
        r = a * a + b * b
        if r > 9.0:
            tau = 3.0 / math.sqrt(r)
            d[i], d[i + 1] = tau * a * s[i], tau * b * s[i]
    return d


def sampled_on_line(x, y) -> Welding:
    """A sampled welding of R-hat fixing infinity, stored on S^1 through the Cayley map."""
    C = cayley()
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    tx = angle_of(np.append(x, math.inf), REAL_LINE)
    ty = angle_of(np.append(y, math.inf), REAL_LINE)
    order = np.argsort(tx)
    inner = Sampled(tx[order], ty[order])
    return Conjugated(inner, C.inverse(), C)


def compose(h1: Welding, h2: Welding) -> Welding:
    """h1 after h2."""
    if h1.domain != h2.domain:
        raise DomainMismatch("weldings live on different clines")
    if isinstance(h1, PiecewiseMobius) and isinstance(h2, PiecewiseMobius):
        return _piecewise_from_pieces(h1, h2)
    return Composed(h1, h2)


def invert(h: Welding) -> Welding:
    if isinstance(h, PiecewiseMobius):
        return h._inverse
    if isinstance(h, Inverted):
        return h.h
    return Inverted(h)


def conjugate(h: Welding, S: Mobius, T: Mobius) -> Welding:
    """x -> S(h(T(x))); T maps the new cline onto h's cline and S maps it back."""
    if isinstance(h, PiecewiseMobius):
        dom = _cline_name(T, h.domain)
        if _range_name(S, h.domain) != dom:
            raise DomainMismatch("S and T must act between the same pair of clines")
        Ti = T.inverse()
        knots = [Ti(k) for k in h.knots]
        branches = [S @ B @ T for B in h.branches]
        if dom == REAL_LINE:
            knots = [INF if is_inf(k) else complex(k.real, 0.0) for k in knots]
            branches = [_realify(B) for B in branches]
        return PiecewiseMobius(knots, branches, dom)
    return Conjugated(h, S, T)


def _realify(M: Mobius) -> Mobius:
    """Drop round-off imaginary parts from a map that should preserve R-hat."""
    m = M.matrix
    if np.max(np.abs(m.imag)) > 1e-9 * np.max(np.abs(m)):
        return M
    return Mobius(*(complex(v.real, 0.0) for v in m.ravel()))


def self_compose(h: Welding, n: int) -> Welding:
    if n < 1:
        raise ValueError("n must be positive")
    out = h
    for _ in range(n - 1):
        out = compose(h, out)
    return out


def _normalizer(y, domain) -> Mobius:
    """A Möbius map from R-hat onto the domain sending infinity to y."""
    y = ext(y)
    if domain == REAL_LINE:
        return Mobius.identity() if is_inf(y) else Mobius(y, -1, 1, 0)
    return Mobius(y, 0, 0, 1) @ cayley()


def normalize_fix_infty(h: Welding, y):
    """H = T_{h(y)}^{-1} o h o T_y on R-hat, which fixes infinity."""
    y = ext(y)
    Ty = _normalizer(y, h.domain)
    Thy = _normalizer(h.eval(y), h.domain)
    H = conjugate(h, Thy.inverse(), Ty)
    if isinstance(H, PiecewiseMobius):
        H = _pin_infinity(H)
    return H, Ty, Thy


def _pin_infinity(H: PiecewiseMobius) -> PiecewiseMobius:
    """Clear round-off in the lower-left entry of the branches that fix infinity."""
    j = int(H._branch_index(np.array([np.inf]))[0]) if H.knots else 0
    touch = {j}
    if any(is_inf(k) for k in H.knots):
        touch.add((j - 1) % len(H.knots))
    branches = list(H.branches)
    for j in touch:
        B = branches[j]
        scale = max(abs(B.a), abs(B.b), abs(B.d))
        if abs(B.c) <= 1e-12 * scale:
            branches[j] = Mobius(B.a, B.b, 0.0, B.d)
    return PiecewiseMobius(H.knots, branches, H.domain, check=False)


def welding_to_json(h: Welding) -> dict:
    if isinstance(h, (PiecewiseMobius, Sampled)):
        return h.to_json()
    raise TypeError(f"{type(h).__name__} has no JSON form")


def welding_from_json(data: dict) -> Welding:
    dom = data.get("domain")
    if dom not in DOMAINS:
        raise DomainMismatch(f"unknown domain {dom!r}")
    kind = data.get("kind")
    if kind == "piecewise_mobius":
        knots = [_point_from_json(k) for k in data["knots"]]
        branches = [Mobius.from_json(b) for b in data["branches"]]
        return PiecewiseMobius(knots, branches, dom)
    if kind == "sampled":
        return Sampled(data["node_angles"], data["value_angles"], data.get("slopes"))
    raise ValueError(f"unknown welding kind {kind!r}")
