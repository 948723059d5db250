"""Points, Möbius maps and generalized circles on the Riemann sphere.

Extended complex points are plain Python ``complex`` values; the point at
infinity is ``INF = complex(inf, 0)``.  Every operation here is total on the
sphere: poles and infinity are routed through the chart ``w = 1/z`` instead
of letting ``inf``/``nan`` arithmetic leak out.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass

import numpy as np

INF = complex(math.inf, 0.0)

# Inputs larger than this are evaluated in the chart w = 1/z.
CHART_SWITCH = 1e8


class DegenerateTriple(ValueError):
    pass


class ChartError(ValueError):
    pass


def is_inf(z) -> bool:
    return cmath.isinf(complex(z))


def ext(z) -> complex:
    """Coerce a number or the string ``"inf"`` to an extended complex point."""
    if isinstance(z, str):
        if z.strip().lower() in ("inf", "infinity", "+inf", "∞"):
            return INF
        z = complex(z.replace(" ", ""))
    z = complex(z)
    if cmath.isnan(z):
        raise ValueError("nan is not a point of the sphere")
    return INF if cmath.isinf(z) else z


def spherical_distance(z, w) -> float:
    """Chordal distance 2|z-w| / sqrt((1+|z|^2)(1+|w|^2)), symmetric in infinity."""
    z, w = ext(z), ext(w)
    if is_inf(z) and is_inf(w):
        return 0.0
    if is_inf(z):
        z, w = w, z
    if is_inf(w):
        return 2.0 / math.hypot(1.0, abs(z))
    return 2.0 * abs(z - w) / (math.hypot(1.0, abs(z)) * math.hypot(1.0, abs(w)))


@dataclass(frozen=True)
class Mobius:
    """z -> (az + b)/(cz + d), stored with ad - bc = 1."""

    a: complex
    b: complex
    c: complex
    d: complex

    def __post_init__(self):
        a, b, c, d = (complex(v) for v in (self.a, self.b, self.c, self.d))
        det = a * d - b * c
        if not cmath.isfinite(det) or abs(det) < 1e-300:
            raise ValueError("singular Möbius matrix")
        # already normalised matrices are kept bit-for-bit (JSON round trips)
        s = 1.0 if abs(det - 1.0) <= 1e-14 else cmath.sqrt(det)
        for name, v in zip("abcd", (a, b, c, d)):
            object.__setattr__(self, name, _tidy(v / s))

    @classmethod
    def identity(cls) -> "Mobius":
        return cls(1, 0, 0, 1)

    @classmethod
    def from_matrix(cls, m) -> "Mobius":
        m = np.asarray(m, dtype=complex)
        return cls(m[0, 0], m[0, 1], m[1, 0], m[1, 1])

    @property
    def matrix(self) -> np.ndarray:
        return np.array([[self.a, self.b], [self.c, self.d]])

    def __matmul__(self, other: "Mobius") -> "Mobius":
        """Composition: (S @ T)(z) = S(T(z))."""
        return Mobius.from_matrix(self.matrix @ other.matrix)

    def inverse(self) -> "Mobius":
        return Mobius(self.d, -self.b, -self.c, self.a)

    def __call__(self, z) -> complex:
        return mobius_apply(self, z)

    def preserves_real_line(self, tol: float = 1e-12) -> bool:
        # up to the PSL2 sign (and a factor i for orientation-reversing maps)
        m = self.matrix.ravel()
        k = np.argmax(np.abs(m))
        r = m / m[k]
        return bool(np.all(np.abs(r.imag) <= tol))

    def apply_array(self, z) -> np.ndarray:
        """Vectorized evaluation; poles map to INF and INF maps to a/c."""
        z = np.asarray(z, dtype=complex)
        with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
            num = self.a * z + self.b
            den = self.c * z + self.d
            out = np.where(den == 0, INF, num / den)
        far = ~np.isfinite(z)
        if np.any(far):
            out[far] = mobius_apply(self, INF)
        return out

    def derivative_array(self, z) -> np.ndarray:
        z = np.asarray(z, dtype=complex)
        return 1.0 / (self.c * z + self.d) ** 2

    def second_derivative_array(self, z) -> np.ndarray:
        z = np.asarray(z, dtype=complex)
        return -2.0 * self.c / (self.c * z + self.d) ** 3

    def third_derivative_array(self, z) -> np.ndarray:
        z = np.asarray(z, dtype=complex)
        return 6.0 * self.c**2 / (self.c * z + self.d) ** 4

    def to_json(self) -> list:
        return [[v.real, v.imag] for v in (self.a, self.b, self.c, self.d)]

    @classmethod
    def from_json(cls, data) -> "Mobius":
        return cls(*(complex(re, im) for re, im in data))


def _tidy(v: complex) -> complex:
    # normalise signed zeros so equal maps compare equal
    return complex(v.real + 0.0, v.imag + 0.0)


def mobius_apply(T: Mobius, z) -> complex:
    z = ext(z)
    if is_inf(z):
        return INF if T.c == 0 else T.a / T.c
    if abs(z) > CHART_SWITCH:
        w = 1.0 / z
        den = T.c + T.d * w
        return INF if den == 0 else (T.a + T.b * w) / den
    den = T.c * z + T.d
    return INF if den == 0 else (T.a * z + T.b) / den


def mobius_derivative(T: Mobius, z) -> complex:
    """Derivative of T at z, taken in the chart 1/z wherever z or T(z) is infinite."""
    z = ext(z)
    tz = mobius_apply(T, z)
    if not is_inf(z) and not is_inf(tz):
        return 1.0 / (T.c * z + T.d) ** 2
    if is_inf(z) and not is_inf(tz):
        # d/dw T(1/w) at w = 0
        return -1.0 / T.c**2
    if not is_inf(z):
        # d/dz 1/T(z) at the pole
        return -1.0 / (T.a * z + T.b) ** 2
    # d/dw 1/T(1/w) at w = 0
    return 1.0 / T.a**2


def _to_zero_one_inf(p1, p2, p3) -> Mobius:
    """The Möbius map sending (p1, p2, p3) to (0, 1, inf)."""
    if is_inf(p1):
        return Mobius(0, p2 - p3, 1, -p3)
    if is_inf(p2):
        return Mobius(1, -p1, 1, -p3)
    if is_inf(p3):
        return Mobius(1, -p1, 0, p2 - p1)
    return Mobius(p2 - p3, -p1 * (p2 - p3), p2 - p1, -p3 * (p2 - p1))


def _check_distinct(pts, tol=1e-12):
    for i in range(3):
        for j in range(i + 1, 3):
            if spherical_distance(pts[i], pts[j]) < tol:
                raise DegenerateTriple(f"points {pts[i]!r} and {pts[j]!r} coincide")


def mobius_from_triples(p1, p2, p3, q1, q2, q3) -> Mobius:
    """The unique Möbius map with T(p_i) = q_i."""
    p = [ext(v) for v in (p1, p2, p3)]
    q = [ext(v) for v in (q1, q2, q3)]
    _check_distinct(p)
    _check_distinct(q)
    return _to_zero_one_inf(*q).inverse() @ _to_zero_one_inf(*p)


def cross_ratio_defect(T: Mobius, x, y) -> float:
    """|(T(x)-T(y))^2 / (T'(x) T'(y) (x-y)^2)|, which is 1 for every Möbius T."""
    x, y = ext(x), ext(y)
    tx, ty = mobius_apply(T, x), mobius_apply(T, y)
    if any(map(is_inf, (x, y, tx, ty))):
        raise ChartError("cross-ratio defect needs finite points and images")
    dx, dy = 1.0 / (T.c * x + T.d) ** 2, 1.0 / (T.c * y + T.d) ** 2
    return abs((tx - ty) ** 2 / (dx * dy * (x - y) ** 2))


def cayley() -> Mobius:
    """(z - i)/(z + i): upper half-plane onto the unit disk, R-hat onto S^1."""
    return Mobius(1, -1j, 1, 1j)


@dataclass(frozen=True)
class Cline:
    """An oriented circle or line.

    Circles carry ``center``/``radius`` and are counterclockwise when
    ``ccw``; lines carry a base ``point`` and a unit ``direction`` of travel.
    """

    center: complex | None = None
    radius: float | None = None
    ccw: bool = True
    point: complex | None = None
    direction: complex | None = None

    @classmethod
    def circle(cls, center=0.0, radius=1.0, ccw=True) -> "Cline":
        if not radius > 0:
            raise ValueError("radius must be positive")
        return cls(center=complex(center), radius=float(radius), ccw=ccw)

    @classmethod
    def line(cls, point=0.0, direction=1.0) -> "Cline":
        direction = complex(direction)
        if direction == 0:
            raise ValueError("direction must be nonzero")
        return cls(point=complex(point), direction=direction / abs(direction))

    @classmethod
    def from_points(cls, p1, p2, p3, tol=1e-12) -> "Cline":
        """Cline through three points, oriented in the order p1 -> p2 -> p3."""
        p = [ext(v) for v in (p1, p2, p3)]
        _check_distinct(p)
        finite = [v for v in p if not is_inf(v)]
        if len(finite) == 2:
            i = [is_inf(v) for v in p].index(True)
            # travel order p_{i+1} -> p_{i+2} along the line
            u, v = p[(i + 1) % 3], p[(i + 2) % 3]
            return cls.line(u, v - u)
        a, b, c = p
        cross = ((b - a).conjugate() * (c - a)).imag
        if abs(cross) <= tol * abs(b - a) * abs(c - a):
            return cls.line(a, b - a if ((b - a).conjugate() * (c - a)).real > 0 else a - b)
        # circumcenter
        d = 2 * cross
        ab, ac = b - a, c - a
        center = a + 1j * (ab * abs(ac) ** 2 - ac * abs(ab) ** 2) / d
        return cls.circle(center, abs(a - center), ccw=cross > 0)

    @property
    def is_line(self) -> bool:
        return self.direction is not None

    def sample_points(self) -> tuple[complex, complex, complex]:
        """Three points in the cline's order of travel."""
        if self.is_line:
            return (self.point, self.point + self.direction, INF)
        s = 1 if self.ccw else -1
        return tuple(self.center + self.radius * cmath.exp(1j * s * t)
                     for t in (0.0, 2 * math.pi / 3, 4 * math.pi / 3))

    def side(self, z, tol=1e-12) -> int:
        """+1 left of the direction of travel, -1 right, 0 on the cline."""
        z = ext(z)
        if self.is_line:
            if is_inf(z):
                return 0
            s = ((z - self.point) * self.direction.conjugate()).imag
            return 0 if abs(s) <= tol * max(1.0, abs(z - self.point)) else (1 if s > 0 else -1)
        if is_inf(z):
            return -1 if self.ccw else 1
        r = abs(z - self.center) - self.radius
        if abs(r) <= tol * self.radius:
            return 0
        inside = 1 if r < 0 else -1
        return inside if self.ccw else -inside

    def reflect(self, u) -> complex:
        u = ext(u)
        if self.is_line:
            if is_inf(u):
                return INF
            return self.point + self.direction**2 * (u - self.point).conjugate()
        if is_inf(u):
            return self.center
        if u == self.center:
            return INF
        return self.center + self.radius**2 / (u - self.center).conjugate()

    def reversed(self) -> "Cline":
        if self.is_line:
            return Cline.line(self.point, -self.direction)
        return Cline.circle(self.center, self.radius, not self.ccw)

    def to_unit_circle(self) -> Mobius:
        """Orientation-preserving Möbius map of the cline onto the ccw unit circle."""
        return mobius_from_triples(*self.sample_points(), *UNIT_CIRCLE.sample_points())


@dataclass(frozen=True)
class Disk:
    """The component of the sphere to the left of an oriented cline."""

    boundary: Cline

    def complement(self) -> "Disk":
        return Disk(self.boundary.reversed())

    def contains(self, z) -> bool:
        return self.boundary.side(z) > 0

    def reflect(self, u) -> complex:
        return self.boundary.reflect(u)

    def from_unit_disk(self) -> Mobius:
        """A Möbius map carrying the unit disk onto this disk."""
        if self.boundary == UNIT_CIRCLE:
            return Mobius.identity()
        if self.boundary == UNIT_CIRCLE.reversed():
            return Mobius(0, 1j, 1j, 0)
        if self.boundary == REAL_LINE:
            return cayley().inverse()
        if self.boundary == REAL_LINE.reversed():
            return cayley().inverse() @ Mobius(0, 1j, 1j, 0)
        return self.boundary.to_unit_circle().inverse()


REAL_LINE = Cline.line(0.0, 1.0)
UNIT_CIRCLE = Cline.circle(0.0, 1.0)
UNIT_DISK = Disk(UNIT_CIRCLE)
EXTERIOR_DISK = UNIT_DISK.complement()
UPPER_HALF_PLANE = Disk(REAL_LINE)
LOWER_HALF_PLANE = UPPER_HALF_PLANE.complement()


def schwarz_reflect(D: Disk | Cline, u) -> complex:
    """Reflection of u across the boundary of D (an involution swapping D and D*)."""
    cl = D.boundary if isinstance(D, Disk) else D
    return cl.reflect(u)
