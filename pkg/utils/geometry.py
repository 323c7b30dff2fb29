"""Minkowski-space primitives: points, support regions and Poincaré maps.

Signature is (+,-,-,-). Every value here is immutable.
"""
from dataclasses import dataclass
from itertools import product

import numpy as np

from utils.config import GeometryError, ISOMETRY_TOL, LIGHTLIKE_TOL, SPACELIKE_MARGIN

ETA = np.diag([1.0, -1.0, -1.0, -1.0])


def _fmt(value):
    return repr(float(value))


@dataclass(frozen=True)
class FourVector:
    """Spacetime point (x0, x) with x a spatial 3-vector."""

    x0: float
    x: tuple = (0.0, 0.0, 0.0)

    def __post_init__(self):
        spatial = tuple(float(v) for v in self.x)
        if len(spatial) != 3:
            raise GeometryError(f"spatial part must have 3 components, got {len(spatial)}")
        object.__setattr__(self, "x0", float(self.x0))
        object.__setattr__(self, "x", spatial)
        if not np.all(np.isfinite(self.as_array())):
            raise GeometryError("four-vector components must be finite")

    @classmethod
    def of(cls, values):
        """Build from any length-4 sequence or pass a FourVector through."""
        if isinstance(values, FourVector):
            return values
        arr = np.asarray(values, dtype=float).ravel()
        if arr.size != 4:
            raise GeometryError(f"expected 4 components, got {arr.size}")
        return cls(arr[0], tuple(arr[1:]))

    def as_array(self):
        return np.array([self.x0, *self.x], dtype=float)

    @property
    def spatial(self):
        return np.array(self.x, dtype=float)

    def __add__(self, other):
        return FourVector.of(self.as_array() + FourVector.of(other).as_array())

    def __sub__(self, other):
        return FourVector.of(self.as_array() - FourVector.of(other).as_array())

    def __mul__(self, scalar):
        return FourVector.of(float(scalar) * self.as_array())

    __rmul__ = __mul__

    def __neg__(self):
        return FourVector.of(-self.as_array())

    def minkowski_dot(self, other):
        return float(self.as_array() @ ETA @ FourVector.of(other).as_array())

    @property
    def text(self):
        return " ".join(_fmt(v) for v in self.as_array())


ORIGIN = FourVector(0.0)


def minkowski_interval(x, y):
    """
    Squared interval between two points and its causal class

    Args:
        x: First point
        y: Second point

    Returns:
        Tuple (squared interval, 'spacelike' | 'lightlike' | 'timelike')
    """
    d = FourVector.of(x) - FourVector.of(y)
    s = d.minkowski_dot(d)
    if abs(s) <= LIGHTLIKE_TOL:
        return s, "lightlike"
    return s, ("timelike" if s > 0 else "spacelike")


class Region:
    """Base class of support regions."""

    def contains(self, x):
        raise NotImplementedError

    def causal_cover(self):
        """Ball products whose union has the same causal complement or a smaller one."""
        raise NotImplementedError

    def bounding_box(self):
        """Axis-aligned (lower, upper) corners as length-4 arrays."""
        raise NotImplementedError

    def sample(self, rng, n):
        """Draw n points of the region as an (n, 4) array."""
        lo, hi = self.bounding_box()
        out = []
        while len(out) < n:
            pts = rng.uniform(lo, hi, size=(max(4 * n, 64), 4))
            out.extend(p for p in pts if self.contains(p))
        return np.array(out[:n])

    def exact(self):
        return True


@dataclass(frozen=True)
class BallProduct(Region):
    """Time interval [t0, t1] times the spatial shell inner_radius <= |x - center| <= radius."""

    t0: float
    t1: float
    center: tuple
    radius: float
    inner_radius: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "center", tuple(float(v) for v in self.center))
        if self.t1 < self.t0:
            raise GeometryError("time interval of a ball product must be nonempty")
        if self.radius < 0 or self.inner_radius < 0 or self.inner_radius > self.radius:
            raise GeometryError("ball product radii must satisfy 0 <= inner <= outer")

    def contains(self, x):
        x = FourVector.of(x)
        rho = np.linalg.norm(x.spatial - np.array(self.center))
        return bool(self.t0 <= x.x0 <= self.t1 and self.inner_radius <= rho <= self.radius)

    def causal_cover(self):
        if self.inner_radius == 0.0:
            return (self,)
        return (BallProduct(self.t0, self.t1, self.center, self.radius),)

    def bounding_box(self):
        c = np.array(self.center)
        return (np.array([self.t0, *(c - self.radius)]),
                np.array([self.t1, *(c + self.radius)]))


@dataclass(frozen=True)
class DoubleCone(Region):
    """Causal diamond |x0 - c0| + |x - c| < radius (closed when ``closed`` is set)."""

    apex_center: FourVector
    radius: float
    closed: bool = False

    def __post_init__(self):
        object.__setattr__(self, "apex_center", FourVector.of(self.apex_center))
        if not self.radius > 0:
            raise GeometryError(f"double cone radius must be positive, got {self.radius}")

    def contains(self, x):
        x = FourVector.of(x)
        c = self.apex_center
        reach = abs(x.x0 - c.x0) + float(np.linalg.norm(x.spatial - c.spatial))
        return bool(reach <= self.radius) if self.closed else bool(reach < self.radius)

    def causal_cover(self):
        # the diamond is the causal completion of its base ball
        c = self.apex_center
        return (BallProduct(c.x0, c.x0, c.x, self.radius),)

    def bounding_box(self):
        c = self.apex_center.as_array()
        return c - self.radius, c + self.radius


@dataclass(frozen=True)
class SegmentTube(Region):
    """Points within Euclidean 4-distance ``radius`` of the segment [a, b]."""

    a: FourVector
    b: FourVector
    radius: float
    samples: int = 64

    def __post_init__(self):
        if self.radius < 0:
            raise GeometryError("tube radius must be non-negative")

    def _distance(self, x):
        a, b = self.a.as_array(), self.b.as_array()
        d = b - a
        dd = float(d @ d)
        u = 0.0 if dd == 0.0 else float(np.clip((x - a) @ d / dd, 0.0, 1.0))
        return float(np.linalg.norm(x - (a + u * d)))

    def contains(self, x):
        return self._distance(FourVector.of(x).as_array()) <= self.radius

    def causal_cover(self):
        a, b = self.a.as_array(), self.b.as_array()
        n = max(int(self.samples), 2)
        step = float(np.linalg.norm(b - a)) / (n - 1)
        grow = self.radius + 0.5 * step
        cover = []
        for u in np.linspace(0.0, 1.0, n):
            s = a + u * (b - a)
            cover.append(BallProduct(s[0] - grow, s[0] + grow, tuple(s[1:]), grow))
        return tuple(cover)

    def bounding_box(self):
        a, b = self.a.as_array(), self.b.as_array()
        return np.minimum(a, b) - self.radius, np.maximum(a, b) + self.radius

    def exact(self):
        return False


@dataclass(frozen=True)
class Union(Region):
    parts: tuple

    def __post_init__(self):
        if not self.parts:
            raise GeometryError("union of regions must be nonempty")
        object.__setattr__(self, "parts", tuple(self.parts))

    def contains(self, x):
        return any(part.contains(x) for part in self.parts)

    def causal_cover(self):
        return tuple(ball for part in self.parts for ball in part.causal_cover())

    def bounding_box(self):
        boxes = [part.bounding_box() for part in self.parts]
        return (np.min([b[0] for b in boxes], axis=0), np.max([b[1] for b in boxes], axis=0))

    def exact(self):
        return all(part.exact() for part in self.parts)


def union(*regions):
    """Flattening union constructor."""
    parts = []
    for region in regions:
        parts.extend(region.parts if isinstance(region, Union) else (region,))
    return parts[0] if len(parts) == 1 else Union(tuple(parts))


def _balls_spacelike(b1, b2, margin):
    # spatial gap must beat the largest time separation between the slabs
    gap = float(np.linalg.norm(np.array(b1.center) - np.array(b2.center))) - b1.radius - b2.radius
    dt = max(b1.t1 - b2.t0, b2.t1 - b1.t0)
    return gap - dt > margin


def regions_spacelike(r1, r2):
    """
    Decide whether every point of r1 is spacelike to every point of r2

    Exact for ball products and double cones; tube regions are covered
    by ball products and tested with a safety margin, so borderline
    configurations come out False.

    Args:
        r1: First region
        r2: Second region

    Returns:
        bool
    """
    margin = 0.0 if (r1.exact() and r2.exact()) else SPACELIKE_MARGIN
    return all(_balls_spacelike(b1, b2, margin)
               for b1 in r1.causal_cover() for b2 in r2.causal_cover())


def double_cone(c, rho, closed=False):
    """Open double cone {|x0 - c0| + |x - c| < rho}."""
    if not rho > 0:
        raise GeometryError(f"double cone radius must be positive, got {rho}")
    return DoubleCone(FourVector.of(c), float(rho), closed)


def contains(region, x):
    return region.contains(x)


@dataclass(frozen=True)
class PoincareMap:
    """Proper orthochronous Poincaré map x -> L x + y."""

    L: tuple
    y: FourVector = ORIGIN

    def __post_init__(self):
        mat = np.asarray(self.L, dtype=float)
        if mat.shape != (4, 4):
            raise GeometryError("Lorentz part must be a 4x4 matrix")
        if not np.allclose(mat.T @ ETA @ mat, ETA, atol=ISOMETRY_TOL, rtol=0.0):
            raise GeometryError("Lorentz part does not preserve the metric")
        if abs(np.linalg.det(mat) - 1.0) > 1e-9 or mat[0, 0] < 1.0 - ISOMETRY_TOL:
            raise GeometryError("Lorentz part must be proper and orthochronous")
        object.__setattr__(self, "L", tuple(tuple(float(v) for v in row) for row in mat))
        object.__setattr__(self, "y", FourVector.of(self.y))

    @property
    def matrix(self):
        return np.array(self.L, dtype=float)

    @property
    def rotation(self):
        """Spatial rotation block, or None when L mixes time and space."""
        mat = self.matrix
        if abs(mat[0, 0] - 1.0) > ISOMETRY_TOL or np.any(np.abs(mat[0, 1:]) > ISOMETRY_TOL) \
                or np.any(np.abs(mat[1:, 0]) > ISOMETRY_TOL):
            return None
        return mat[1:, 1:]

    @property
    def is_family_preserving(self):
        return self.rotation is not None

    def inverse(self):
        inv = np.linalg.inv(self.matrix)
        return PoincareMap(inv, FourVector.of(-inv @ self.y.as_array()))

    def compose(self, other):
        """self after other."""
        mat = self.matrix @ other.matrix
        return PoincareMap(mat, FourVector.of(self.matrix @ other.y.as_array() + self.y.as_array()))

    @property
    def text(self):
        flat = " ".join(_fmt(v) for row in self.L for v in row)
        return f"P(L={flat}, y={self.y.text})"


IDENTITY = PoincareMap(tuple(map(tuple, np.eye(4))))


def translation(y):
    return PoincareMap(tuple(map(tuple, np.eye(4))), FourVector.of(y))


def rotation(axis, angle, y=ORIGIN):
    """Spatial rotation by ``angle`` about ``axis`` (Rodrigues), then translate by y."""
    axis = np.asarray(axis, dtype=float)
    norm = np.linalg.norm(axis)
    if norm == 0.0:
        raise GeometryError("rotation axis must be nonzero")
    k = axis / norm
    kx = np.array([[0.0, -k[2], k[1]], [k[2], 0.0, -k[0]], [-k[1], k[0], 0.0]])
    rot = np.eye(3) + np.sin(angle) * kx + (1.0 - np.cos(angle)) * kx @ kx
    mat = np.eye(4)
    mat[1:, 1:] = rot
    return PoincareMap(mat, FourVector.of(y))


def boost(rapidity, axis=(1.0, 0.0, 0.0), y=ORIGIN):
    """Pure boost with the given rapidity along a spatial direction."""
    n = np.asarray(axis, dtype=float)
    n = n / np.linalg.norm(n)
    ch, sh = np.cosh(rapidity), np.sinh(rapidity)
    mat = np.eye(4)
    mat[0, 0] = ch
    mat[0, 1:] = sh * n
    mat[1:, 0] = sh * n
    mat[1:, 1:] += (ch - 1.0) * np.outer(n, n)
    return PoincareMap(mat, FourVector.of(y))


def poincare_apply(P, x):
    """
    Apply a Poincaré map to a point

    Args:
        P: PoincareMap
        x: FourVector

    Returns:
        FourVector L x + y
    """
    if not isinstance(P, PoincareMap):
        raise GeometryError("expected a PoincareMap")
    return FourVector.of(P.matrix @ FourVector.of(x).as_array() + P.y.as_array())


def transform_region(P, region):
    """Image of a region; exact for rotations and translations, a bounding superset otherwise."""
    if P.is_family_preserving:
        if isinstance(region, BallProduct):
            c = poincare_apply(P, FourVector(0.0, region.center))
            dt = P.y.x0
            return BallProduct(region.t0 + dt, region.t1 + dt, c.x, region.radius, region.inner_radius)
        if isinstance(region, DoubleCone):
            return DoubleCone(poincare_apply(P, region.apex_center), region.radius, region.closed)
        if isinstance(region, SegmentTube):
            return SegmentTube(poincare_apply(P, region.a), poincare_apply(P, region.b),
                               region.radius, region.samples)
    if isinstance(region, Union):
        return Union(tuple(transform_region(P, part) for part in region.parts))
    lo, hi = region.bounding_box()
    corners = np.array([poincare_apply(P, FourVector.of(np.where(bits, hi, lo))).as_array()
                        for bits in product((False, True), repeat=4)])
    lo, hi = corners.min(axis=0), corners.max(axis=0)
    center = 0.5 * (lo[1:] + hi[1:])
    return BallProduct(lo[0], hi[0], tuple(center), float(np.linalg.norm(hi[1:] - center)))
