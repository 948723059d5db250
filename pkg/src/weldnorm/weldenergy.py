"""Rooted welding energies and the inequalities that bound them."""

from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field

import numpy as np

from .seminorm import BoundaryFunction, QuadratureConfig, seminorm_report
from .sphere import INF, ext, is_inf, spherical_distance
from .welding import REAL_LINE, UNIT_CIRCLE, Welding, compose, invert

GOLDEN = (math.sqrt(5.0) - 1.0) / 2.0
POLE_WINDOW = 1e-6


class KnotPoint(ValueError):
    """The welding has no derivative at the requested point."""


class Divergent(ArithmeticError):
    """Every probed root gave an infinite energy."""


def _on_cline(h: Welding, y):
    y = ext(y)
    if h.domain == REAL_LINE and not is_inf(y) and y.imag != 0:
        if abs(y.imag) > 1e-12 * (1.0 + abs(y.real)):
            raise ValueError(f"root {y} is not on the real line")
        y = complex(y.real, 0.0)  # round-off from a map onto the line
    if h.domain == UNIT_CIRCLE and (is_inf(y) or abs(abs(y) - 1.0) > 1e-9):
        raise ValueError(f"root {y} is not on the unit circle")
    return y


def L_values(h: Welding, x, y, pole=None) -> np.ndarray:
    """L_h(x, y) for an array of finite, non-knot points x and one root y.

    ``pole`` is the finite preimage of infinity on the line, if any.  L is
    smooth there, but h and h' both blow up and their rounding no longer
    cancels, so points within a small window take the mean of the two
    neighbours just outside it.  The root at infinity has the same problem
    for huge x when h(inf) is finite, handled by the 1/x tail.
    """
    y = _on_cline(h, y)
    x = np.asarray(x)
    with np.errstate(divide="ignore", invalid="ignore"):
        log_dh = np.log(np.abs(h.derivative(x)))
        if is_inf(y):
            c = h.eval(INF)
            if is_inf(c):
                return -log_dh
            out = 2.0 * np.log(np.abs(h.eval(x) - c)) - log_dh
            far = np.isfinite(x) & (np.abs(x) > 1.0 / POLE_WINDOW)
            if np.any(far):
                # h(x) - c cancels for huge x; L tends to its limit like 1/x
                R = 1.0 / POLE_WINDOW
                lo, hi = L_values(h, np.array([-R, R]), y)
                out = np.where(far, 0.5 * (hi + lo) + 0.5 * (hi - lo) * R / x, out)
        else:
            hy = h.eval(y)
            if is_inf(hy):
                return -log_dh - 2.0 * np.log(np.abs(x - y.real))
            out = 2.0 * h.log_abs_dq(x, y) - log_dh
            same = x == (y.real if h.domain == REAL_LINE else y)
            if np.any(same):
                out = np.where(same, log_dh, out)
    if pole is not None:
        step = POLE_WINDOW * (1.0 + abs(pole))
        near = np.isfinite(x) & (np.abs(x - pole) < 0.5 * step)
        if np.any(near):
            out = np.array(out, dtype=float)
            xn = x[near]
            out[near] = 0.5 * (L_values(h, xn - step, y) + L_values(h, xn + step, y))
    return out


def L(h: Welding, x, y) -> float:
    """Pointwise welding functional at a single pair of points."""
    x = _on_cline(h, x)
    if is_inf(x):
        raise KnotPoint("x must be finite")
    if any(spherical_distance(x, k) < 1e-14 for k in h.knots):
        raise KnotPoint(f"{x} is a knot of the welding")
    arg = np.array([x.real if h.domain == REAL_LINE else x])
    return float(L_values(h, arg, y)[0])


def L_function(h: Welding, y) -> BoundaryFunction:
    """x -> L_h(x, y) with breaks at the welding's singular points and the root."""
    y = _on_cline(h, y)
    knots = list(h.singular_points())
    if not any(spherical_distance(y, k) < 1e-14 for k in knots):
        knots.append(y)
    pole = None
    if h.domain == REAL_LINE:
        p = h.eval_inverse(INF)
        pole = None if is_inf(p) else p.real
    return BoundaryFunction(lambda x: L_values(h, x, y, pole), h.domain, tuple(knots))


@dataclass(frozen=True)
class EnergyReport:
    value: float
    root: complex
    converged: bool
    doublings: int
    rel_change: float
    K_h: float | None = None
    K_hinv: float | None = None
    error: str | None = None

    @property
    def finite(self) -> bool:
        return math.isfinite(self.value)

    def to_json(self) -> dict:
        d = asdict(self)
        d["root"] = _point_json(self.root)
        for key in ("value", "rel_change", "K_h", "K_hinv"):
            if d[key] is not None and not math.isfinite(d[key]):
                d[key] = "inf" if d[key] > 0 else "nan"
        return d


def _point_json(z):
    z = ext(z)
    return "inf" if is_inf(z) else [z.real, z.imag]


def K(h: Welding, y, cfg: QuadratureConfig | None = None) -> EnergyReport:
    """Seminorm squared of x -> L_h(x, y)."""
    y = _on_cline(h, y)
    res = seminorm_report(L_function(h, y), cfg)
    return EnergyReport(res.value, y, res.converged, res.doublings, res.rel_change)


def W(h: Welding, y, cfg: QuadratureConfig | None = None,
      h_inverse: Welding | None = None) -> EnergyReport:
    """K_h(y) + K_{h^{-1}}(h(y))."""
    y = _on_cline(h, y)
    hinv = h_inverse if h_inverse is not None else invert(h)
    a = K(h, y, cfg)
    b = K(hinv, h.eval(y), cfg)
    value = a.value + b.value
    return EnergyReport(value, y, a.converged and b.converged,
                        max(a.doublings, b.doublings),
                        max(a.rel_change, b.rel_change), a.value, b.value)


def resolve_threads(threads: int | None = None) -> int:
    if threads is None:
        env = os.environ.get("WELDNORM_THREADS")
        threads = int(env) if env else 1
    if threads < 1:
        raise ValueError("thread count must be positive")
    return threads


def scan_roots(window=(-1.5, 5.5), mesh: float = 0.05, domain: str = REAL_LINE,
               include_infinity: bool = True) -> list:
    """Mesh of roots; on the line the special root infinity comes last.

    On the circle the window is read as an interval of angles.
    """
    lo, hi = window
    if not hi > lo or not mesh > 0:
        raise ValueError("need window hi > lo and mesh > 0")
    n = int(math.floor((hi - lo) / mesh + 1e-9))
    ts = [round(lo + k * mesh, 12) for k in range(n + 1)]
    if domain == UNIT_CIRCLE:
        return [complex(math.cos(t), math.sin(t)) for t in ts]
    roots = [complex(t, 0.0) for t in ts]
    if include_infinity:
        roots.append(INF)
    return roots


def W_scan(h: Welding, roots, cfg: QuadratureConfig | None = None,
           threads: int | None = None) -> list[EnergyReport]:
    """One report per root, in input order.  A failing root is recorded, not raised."""
    hinv = invert(h)

    def one(y):
        try:
            return W(h, y, cfg, hinv)
        except (ValueError, ArithmeticError) as exc:
            return EnergyReport(math.nan, ext(y), False, 0, math.nan, error=str(exc))

    n = resolve_threads(threads)
    if n == 1:
        return [one(y) for y in roots]
    with ThreadPoolExecutor(max_workers=n) as pool:
        return list(pool.map(one, roots))


def local_maxima(reports: list[EnergyReport]) -> list[int]:
    """Indices of strict interior local maxima of a scan along a mesh."""
    vals = [r.value for r in reports]
    out = []
    for i in range(1, len(vals) - 1):
        a, b, c = vals[i - 1], vals[i], vals[i + 1]
        if all(math.isfinite(v) for v in (a, b, c)) and b > a and b >= c:
            out.append(i)
    return out


def golden_section(fn, lo: float, hi: float, width: float = 1e-3,
                   maximize: bool = True) -> tuple[float, float]:
    """Extremum of a unimodal function on [lo, hi] to the given bracket width."""
    sign = -1.0 if maximize else 1.0
    a, b = lo, hi
    c = b - GOLDEN * (b - a)
    d = a + GOLDEN * (b - a)
    fc, fd = sign * fn(c), sign * fn(d)
    while b - a > width:
        if fc < fd:
            b, d, fd = d, c, fc
            c = b - GOLDEN * (b - a)
            fc = sign * fn(c)
        else:
            a, c, fc = c, d, fd
            d = a + GOLDEN * (b - a)
            fd = sign * fn(d)
    if fc < fd:
        return c, sign * fc
    return d, sign * fd


def refine_extremum(h: Welding, lo: float, hi: float, cfg: QuadratureConfig | None = None,
                    maximize: bool = True, width: float = 1e-3) -> tuple[float, float]:
    """Golden-section refinement of y -> W_h(y) on a real bracket of the line."""
    if h.domain != REAL_LINE:
        raise ValueError("bracket refinement works in the line coordinate")
    hinv = invert(h)
    return golden_section(lambda t: W(h, complex(t, 0.0), cfg, hinv).value,
                          lo, hi, width, maximize)


@dataclass(frozen=True)
class Extrema:
    upper: float
    lower: float
    gap: float
    argmax: complex
    argmin: complex
    scan: tuple = field(default=(), repr=False)

    def to_json(self) -> dict:
        return {"upper": _num(self.upper), "lower": _num(self.lower), "gap": _num(self.gap),
                "argmax": _point_json(self.argmax), "argmin": _point_json(self.argmin)}


def _num(v):
    return v if math.isfinite(v) else ("inf" if v > 0 else "nan")


def W_extrema(h: Welding, cfg: QuadratureConfig | None = None, roots=None,
              threads: int | None = None, width: float = 1e-3,
              scan: list[EnergyReport] | None = None) -> Extrema:
    """Upper and lower energies: a coarse scan, then golden-section refinement."""
    if scan is None:
        if roots is None:
            roots = scan_roots(domain=h.domain)
        scan = W_scan(h, roots, cfg, threads)
    finite = [i for i, r in enumerate(scan) if r.finite]
    if not finite:
        if any(math.isinf(r.value) for r in scan):
            raise Divergent("every probed root gave an infinite energy")
        raise ValueError("no root could be evaluated")

    def best(maximize):
        i = (max if maximize else min)(finite, key=lambda j: scan[j].value)
        y, v = scan[i].root, scan[i].value
        neighbours = (i - 1 in finite and i + 1 in finite
                      and not is_inf(scan[i - 1].root) and not is_inf(scan[i + 1].root)
                      and not is_inf(y))
        if h.domain == REAL_LINE and neighbours:
            t, w = refine_extremum(h, scan[i - 1].root.real, scan[i + 1].root.real,
                                   cfg, maximize, width)
            if (w > v) == maximize and w != v:
                y, v = complex(t, 0.0), w
        return y, v

    ymax, upper = best(True)
    ymin, lower = best(False)
    return Extrema(upper, lower, upper - lower, ymax, ymin, tuple(scan))


def tilde_K(K: float) -> float:
    if K < 1:
        raise ValueError("quasiconformal constant must be at least 1")
    return K * K + 1.0 / (K * K)


def gap_bound(K: float, I_L: float) -> float:
    """Largest energy gap allowed for a K-quasicircle of Loewner energy I_L."""
    kt = tilde_K(K)
    return 0.5 * (kt - 1.0 / kt) * I_L


@dataclass(frozen=True)
class CompositionReport:
    lhs: float
    rhs: float
    slack: float
    W_outer: float
    W_inner: float
    consistent: bool

    def to_json(self) -> dict:
        return {k: _num(v) if isinstance(v, float) else v for k, v in asdict(self).items()}


def composition_bound_check(h1: Welding, h2: Welding, K1: float, K2: float, y,
                            cfg: QuadratureConfig | None = None) -> CompositionReport:
    """W_{h1 o h2}(y) against 2 Kt2 W_{h1}(h2(y)) + 2 Kt1 W_{h2}(y).

    A negative slack means the supplied constants cannot both be valid.
    """
    y = _on_cline(h2, y)
    lhs = W(compose(h1, h2), y, cfg).value
    w_outer = W(h1, h2.eval(y), cfg).value
    w_inner = W(h2, y, cfg).value
    rhs = 2.0 * tilde_K(K2) * w_outer + 2.0 * tilde_K(K1) * w_inner
    slack = rhs - lhs
    return CompositionReport(lhs, rhs, slack, w_outer, w_inner, bool(slack >= 0))


@dataclass(frozen=True)
class EntropyRow:
    n: int
    W: float
    bound: float
    slope: float
    holds: bool
    knots: int


def entropy_scan(h: Welding, n_max: int, K: float, cfg: QuadratureConfig | None = None,
                 max_knots: int = 256) -> dict:
    """W_{h^n}(inf) for n = 1..n_max with the induction bound at each n."""
    if h.domain != REAL_LINE or not is_inf(h.eval(INF)):
        raise ValueError("welding must fix infinity on the real line; normalize first")
    if n_max < 1:
        raise ValueError("n_max must be positive")
    kt = tilde_K(K)
    rows = []
    base = None
    hn = h
    for n in range(1, n_max + 1):
        if n > 1:
            hn = compose(h, hn)
        nk = len(hn.knots)
        if nk > max_knots:
            raise RuntimeError(f"h^{n} has {nk} knots, above the guard of {max_knots}")
        w = W(hn, INF, cfg).value
        if base is None:
            base = w
        bound = 2.0 * (n + 2) * kt ** (n - 1) * base
        slope = math.log(w) / n if w > 0 else -math.inf
        rows.append(EntropyRow(n, w, bound, slope, bool(w <= bound), nk))
    return {"rows": rows, "log_tilde_K": math.log(kt),
            "all_hold": all(r.holds for r in rows)}


@dataclass(frozen=True)
class ComparableReport:
    W: float
    lower: float
    upper: float
    universal: float
    within: bool
    universal_holds: bool

    def to_json(self) -> dict:
        return {k: _num(v) if isinstance(v, float) else v for k, v in asdict(self).items()}


def comparable_check(h: Welding, I_L: float, K: float, y,
                     cfg: QuadratureConfig | None = None,
                     w_value: float | None = None) -> ComparableReport:
    """Two-sided comparison of W_h(y) with the Loewner energy for a K-quasicircle."""
    kt = tilde_K(K)
    w = W(h, y, cfg).value if w_value is None else w_value
    lower = 0.5 * (3.0 + 1.0 / kt) * I_L
    upper = 0.5 * (3.0 + kt) * I_L
    universal = 1.5 * I_L
    return ComparableReport(w, lower, upper, universal, bool(lower <= w <= upper),
                            bool(universal <= w))
