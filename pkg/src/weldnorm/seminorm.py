"""H^{1/2} seminorms on circles, with singular-kernel tensor quadrature.

Functions on the extended real line are pulled back to the unit circle by
the Cayley transform before integration, so every double integral runs over
``[0, 2pi)^2`` with the chordal kernel ``1 / |e^{ia} - e^{ib}|^2``.  Panels
break at the non-smooth points of the integrand and are graded geometrically
towards each break.  The two factors of the tensor rule use Gauss orders
``n`` and ``n + 1`` whose nodes interlace, so no node pair ever sits on the
diagonal.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field
from functools import lru_cache
from typing import Callable

import numpy as np
from numpy.polynomial.legendre import leggauss

from .sphere import INF, cayley, ext, is_inf
from .welding import REAL_LINE, UNIT_CIRCLE, Welding, angle_of, point_at

TWO_PI = 2.0 * math.pi
DIVERGED = math.inf

# Smallest panel allowed by the geometric grading, in radians.  Below this the
# interlaced nodes are only a few ulps apart near theta = pi.
MIN_PANEL = 1e-12
_BLOCK = 1024


class NonFiniteSample(ValueError):
    """A boundary function returned NaN or an infinite value at a quadrature node."""


@dataclass(frozen=True)
class QuadratureConfig:
    panels_per_interval: int = 16
    gauss_order: int = 12
    diagonal_offset: float | None = None
    grading_levels: int = 8
    target_rel_tol: float = 1e-4
    abs_tol: float = 1e-12
    max_doublings: int = 3
    growth_factor: float = 1.10
    radial_delta: float = 1e-3
    angular_nodes: int = 128

    def __post_init__(self):
        if self.gauss_order < 2:
            raise ValueError("gauss_order must be at least 2")
        if self.panels_per_interval < 1:
            raise ValueError("panels_per_interval must be at least 1")
        if self.grading_levels < 0 or self.max_doublings < 0:
            raise ValueError("grading_levels and max_doublings must be non-negative")
        if not self.target_rel_tol > 0:
            raise ValueError("target_rel_tol must be positive")
        if self.diagonal_offset is None:
            object.__setattr__(self, "diagonal_offset", 0.5 / self.gauss_order)
        if not 0.0 < self.diagonal_offset < 1.0:
            raise ValueError("diagonal_offset is a fraction of a panel width in (0, 1)")
        if not 0.0 < self.radial_delta < 1.0 or self.angular_nodes < 8:
            raise ValueError("bad disk quadrature parameters")

    def level(self, k: int) -> tuple[int, int]:
        """Panels per interval and grading depth after k refinements."""
        return self.panels_per_interval * 2**k, self.grading_levels * (k + 1)

    def to_json(self) -> dict:
        return asdict(self)

    @classmethod
    def from_json(cls, data: dict) -> "QuadratureConfig":
        return cls(**data)


@dataclass(frozen=True)
class QuadratureResult:
    value: float
    converged: bool
    doublings: int
    rel_change: float
    history: tuple = field(default=(), repr=False)

    @property
    def diverged(self) -> bool:
        return math.isinf(self.value)


@dataclass(frozen=True)
class BoundaryFunction:
    """A real function on R-hat or the unit circle with its non-smooth points.

    ``func`` takes an array of points on the cline (floats on the line,
    complex numbers on the circle) and returns real values.
    """

    func: Callable[[np.ndarray], np.ndarray]
    domain: str = REAL_LINE
    knots: tuple = ()

    def __call__(self, x):
        return np.asarray(self.func(np.asarray(x)), dtype=float)

    def angle_form(self) -> tuple[Callable, np.ndarray]:
        """The function of the circular angle, and its break angles."""
        dom = self.domain

        def of_angle(t):
            return self(point_at(t, dom))

        pts = list(self.knots)
        if dom == REAL_LINE:
            pts.append(INF)
        return of_angle, _break_angles(pts, dom)

    def __add__(self, other: "BoundaryFunction") -> "BoundaryFunction":
        _same_domain(self, other)
        return BoundaryFunction(lambda x: self(x) + other(x), self.domain,
                                _union(self.knots, other.knots))

    def __sub__(self, other: "BoundaryFunction") -> "BoundaryFunction":
        _same_domain(self, other)
        return BoundaryFunction(lambda x: self(x) - other(x), self.domain,
                                _union(self.knots, other.knots))

    def scaled(self, c: float) -> "BoundaryFunction":
        return BoundaryFunction(lambda x: c * self(x), self.domain, self.knots)

    @classmethod
    def constant(cls, c: float, domain: str = REAL_LINE) -> "BoundaryFunction":
        return cls(lambda x: np.full(np.shape(x), float(c)), domain)


def _same_domain(u, v):
    if u.domain != v.domain:
        raise ValueError("boundary functions live on different clines")


def _union(a, b):
    out = list(a)
    for k in b:
        if not any(_close(k, j) for j in out):
            out.append(k)
    return tuple(out)


def _close(a, b):
    a, b = ext(a), ext(b)
    if is_inf(a) or is_inf(b):
        return is_inf(a) and is_inf(b)
    return abs(a - b) <= 1e-14 * max(1.0, abs(a))


def _break_angles(points, domain) -> np.ndarray:
    ang = []
    for p in points:
        p = ext(p)
        if domain == REAL_LINE:
            arg = np.array([math.inf if is_inf(p) else p.real])
        else:
            arg = np.array([p])
        ang.append(float(angle_of(arg, domain)[0]))
    return np.unique(np.mod(np.asarray(ang, dtype=float), TWO_PI))


def transport_to_circle(u: BoundaryFunction) -> BoundaryFunction:
    """u o C^{-1} on the unit circle, C the Cayley transform."""
    if u.domain == UNIT_CIRCLE:
        return u
    C = cayley()

    def on_circle(w):
        w = np.asarray(w, dtype=complex)
        x = -1.0 / np.tan(np.angle(w) / 2.0)
        return u(x)

    knots = [C(k) for k in u.knots] + [C(INF)]
    return BoundaryFunction(on_circle, UNIT_CIRCLE, _union((), knots))


def pullback(u: BoundaryFunction, h: Welding) -> BoundaryFunction:
    """u o h, breaking at the knots of h and the preimages of the knots of u."""
    if u.domain != h.domain:
        raise ValueError("function and welding live on different clines")
    pre = [h.eval_inverse(k) for k in u.knots]
    knots = _union(tuple(h.singular_points()), tuple(pre))

    def composed(x):
        return u(h._eval(np.asarray(x)))

    return BoundaryFunction(composed, u.domain, knots)


# -- panel layout ---------------------------------------------------------

def _panel_edges(breaks: np.ndarray, panels: int, levels: int) -> np.ndarray:
    """Uniform panels on each break interval plus geometric grading at both ends."""
    if len(breaks) == 0:
        breaks = np.array([0.0])
    b = np.append(breaks, breaks[0] + TWO_PI)
    edges = []
    for lo, hi in zip(b[:-1], b[1:]):
        width = (hi - lo) / panels
        e = list(lo + width * np.arange(panels))
        for j in range(1, levels + 1):
            d = width * 0.5**j
            if d < MIN_PANEL:
                break
            e.append(lo + d)
            e.append(hi - d)
        edges.extend(e)
    edges.append(b[-1])
    return np.unique(np.asarray(edges))


@lru_cache(maxsize=64)
def _gauss(n: int):
    return leggauss(n)


def _nodes(edges: np.ndarray, n: int):
    t, w = _gauss(n)
    lo, hi = edges[:-1], edges[1:]
    mid, half = (lo + hi) / 2.0, (hi - lo) / 2.0
    x = (mid[:, None] + half[:, None] * t[None, :]).ravel()
    wt = (half[:, None] * w[None, :]).ravel()
    return x, wt


def _sample(f, t):
    v = np.asarray(f(t), dtype=float)
    if not np.all(np.isfinite(v)):
        raise NonFiniteSample("boundary function is not finite at a quadrature node")
    return v


def _bilinear(ua, va, ta, wa, ub, vb, tb, wb) -> float:
    """(1/4pi^2) sum_ij wa_i wb_j (u_i - u_j)(v_i - v_j) / |e^{i ta_i} - e^{i tb_j}|^2.

    Blocked over rows; partial sums are combined in row order so the result
    does not depend on how the work is scheduled.
    """
    parts = []
    for s in range(0, len(ta), _BLOCK):
        sl = slice(s, s + _BLOCK)
        du = ua[sl, None] - ub[None, :]
        dv = du if va is ua else va[sl, None] - vb[None, :]
        chord = 2.0 * np.sin((ta[sl, None] - tb[None, :]) / 2.0)
        c2 = chord * chord
        # in the thinnest graded panels two nodes can round to the same float;
        # such a pair carries a bounded integrand on a negligible weight
        q = np.divide(du * dv, c2, out=np.zeros_like(c2), where=c2 != 0.0)
        parts.append(wa[sl] @ q @ wb)
    return math.fsum(parts) / (4.0 * math.pi**2)


def _fixed_rule(fu, fv, breaks, panels, levels, order) -> float:
    edges = _panel_edges(breaks, panels, levels)
    ta, wa = _nodes(edges, order)
    tb, wb = _nodes(edges, order + 1)
    ua, ub = _sample(fu, ta), _sample(fu, tb)
    if fv is None:
        va, vb = ua, ub
    else:
        va, vb = _sample(fv, ta), _sample(fv, tb)
    return _bilinear(ua, va, ta, wa, ub, vb, tb, wb)


def refine(evaluate: Callable[[int], float], cfg: QuadratureConfig,
           track_growth: bool = True) -> QuadratureResult:
    """Run ``evaluate(k)`` for k = 0, 1, ... until successive values agree.

    Returns the sentinel +inf when three successive refinements each grow the
    value by more than ``cfg.growth_factor``.
    """
    history = [evaluate(0)]
    rel = math.inf
    for k in range(1, cfg.max_doublings + 1):
        v = evaluate(k)
        prev = history[-1]
        history.append(v)
        diff = abs(v - prev)
        rel = diff / abs(v) if v != 0 else (0.0 if diff == 0 else math.inf)
        if rel <= cfg.target_rel_tol or diff <= cfg.abs_tol:
            return QuadratureResult(v, True, k, rel, tuple(history))
        if track_growth and k >= 3 and all(
                history[j] > cfg.growth_factor * history[j - 1] > 0
                for j in range(k - 2, k + 1)):
            return QuadratureResult(DIVERGED, False, k, rel, tuple(history))
    return QuadratureResult(history[-1], False, cfg.max_doublings, rel, tuple(history))


def seminorm_report(u: BoundaryFunction, cfg: QuadratureConfig | None = None,
                    v: BoundaryFunction | None = None) -> QuadratureResult:
    """Adaptive estimate of the seminorm squared of u, or of <u, v> when v is given."""
    cfg = cfg or QuadratureConfig()
    fu, bu = u.angle_form()
    fv = None
    breaks = bu
    if v is not None:
        _same_domain(u, v)
        fv, bv = v.angle_form()
        breaks = np.unique(np.concatenate([bu, bv]))

    def evaluate(k):
        panels, levels = cfg.level(k)
        return _fixed_rule(fu, fv, breaks, panels, levels, cfg.gauss_order)

    return refine(evaluate, cfg, track_growth=v is None)


def h_half_seminorm_sq(u: BoundaryFunction, cfg: QuadratureConfig | None = None) -> float:
    return seminorm_report(u, cfg).value


def h_half_inner(u: BoundaryFunction, v: BoundaryFunction,
                 cfg: QuadratureConfig | None = None) -> float:
    return seminorm_report(u, cfg, v).value


# -- area integrals ---------------------------------------------------------

def _radial_edges(levels: int, delta: float) -> np.ndarray:
    """[0, 1] split at 1/2, 3/4, ... until the last gap is below delta, then graded."""
    e = [0.0]
    gap = 0.5
    while gap > delta:
        e.append(1.0 - gap)
        gap /= 2.0
    for _ in range(levels):
        e.append(1.0 - gap)
        gap /= 2.0
    e.append(1.0)
    return np.unique(np.asarray(e))


def unit_disk_integral(fn: Callable[[np.ndarray], np.ndarray],
                       cfg: QuadratureConfig | None = None) -> QuadratureResult:
    """Adaptive polar Gauss rule for the area integral of fn over the unit disk.

    Radial Gauss-Legendre panels accumulate towards the circle; the angular
    direction uses the periodic trapezoid rule.  Each refinement doubles the
    angular count and adds grading levels near the boundary.
    """
    cfg = cfg or QuadratureConfig()
    t_gauss, w_gauss = _gauss(cfg.gauss_order)

    def evaluate(k):
        edges = _radial_edges(cfg.grading_levels * (k + 1), cfg.radial_delta)
        lo, hi = edges[:-1], edges[1:]
        r = ((lo + hi) / 2.0)[:, None] + ((hi - lo) / 2.0)[:, None] * t_gauss[None, :]
        wr = ((hi - lo) / 2.0)[:, None] * w_gauss[None, :]
        r, wr = r.ravel(), (wr * r).ravel()
        m = cfg.angular_nodes * 2**k
        theta = (np.arange(m) + 0.5) * (TWO_PI / m)
        ring = np.exp(1j * theta)
        vals = np.asarray(fn((r[:, None] * ring[None, :]).ravel()), dtype=float)
        if not np.all(np.isfinite(vals)):
            raise NonFiniteSample("area integrand is not finite at a node")
        vals = vals.reshape(len(r), m)
        return math.fsum(wi * math.fsum(row) * (TWO_PI / m) for wi, row in zip(wr, vals))

    return refine(evaluate, cfg)


def dirichlet_energy_halfplane(grad_sq: Callable[[np.ndarray], np.ndarray],
                               cfg: QuadratureConfig | None = None) -> float:
    """(1/2pi) times the integral of |grad F|^2 over the upper half-plane.

    ``grad_sq(z)`` returns |grad F(z)|^2 at points of the upper half-plane.
    The integral is moved to the unit disk by the inverse Cayley map; the
    Dirichlet integral is conformally invariant, picking up |(C^{-1})'|^2.
    """
    Ci = cayley().inverse()

    def on_disk(w):
        z = Ci.apply_array(w)
        return grad_sq(z) * np.abs(Ci.derivative_array(w)) ** 2

    res = unit_disk_integral(on_disk, cfg)
    return res.value / TWO_PI
