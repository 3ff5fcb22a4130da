"""Planar primitives and window algebra shared by every estimator.

Observation windows are axis-aligned rectangles throughout; erosion by a
finite double cone therefore decouples into per-axis shrinks, which keeps
all edge-correction denominators closed form.
"""

from dataclasses import dataclass, field

import numpy as np

__all__ = [
    "Window",
    "DoubleCone",
    "OrientedRect",
    "PointPattern",
    "unit_vector",
    "rotation_matrix",
    "rotate_points",
    "wrapped_angle_distance",
    "in_double_cone",
    "in_oriented_rect",
    "cone_extents",
    "cone_erosion_area",
    "in_eroded_window",
    "translation_overlap_area",
]


@dataclass(frozen=True)
class Window:
    """Axis-aligned rectangular observation window."""

    xmin: float
    xmax: float
    ymin: float
    ymax: float

    def __post_init__(self):
        if not all(np.isfinite([self.xmin, self.xmax, self.ymin, self.ymax])):
            raise ValueError("window bounds must be finite")
        if self.xmin >= self.xmax or self.ymin >= self.ymax:
            raise ValueError("window must have strictly positive side lengths")

    @classmethod
    def square(cls, side, centre=(0.0, 0.0)):
        """Square window of the given side length centred at `centre`."""
        h = side / 2.0
        return cls(centre[0] - h, centre[0] + h, centre[1] - h, centre[1] + h)

    @property
    def l1(self):
        return self.xmax - self.xmin

    @property
    def l2(self):
        return self.ymax - self.ymin

    @property
    def area(self):
        return self.l1 * self.l2

    @property
    def side(self):
        """Side length; only defined for square windows."""
        if abs(self.l1 - self.l2) > 1e-12 * max(self.l1, self.l2):
            raise ValueError("window is not square")
        return self.l1

    @property
    def centre(self):
        return np.array([(self.xmin + self.xmax) / 2.0, (self.ymin + self.ymax) / 2.0])

    @property
    def circumradius(self):
        return 0.5 * float(np.hypot(self.l1, self.l2))

    def contains(self, points):
        """Boolean mask of points inside the closed window."""
        pts = np.atleast_2d(np.asarray(points, dtype=float))
        return (
            (pts[:, 0] >= self.xmin)
            & (pts[:, 0] <= self.xmax)
            & (pts[:, 1] >= self.ymin)
            & (pts[:, 1] <= self.ymax)
        )

    def sample_uniform(self, n, rng):
        """Draw n i.i.d. uniform locations in the window, shape (n, 2)."""
        xy = rng.random((int(n), 2))
        xy[:, 0] = self.xmin + xy[:, 0] * self.l1
        xy[:, 1] = self.ymin + xy[:, 1] * self.l2
        return xy

    def boundary_margin(self, points):
        """Distance from each point to the nearest window edge."""
        pts = np.atleast_2d(np.asarray(points, dtype=float))
        return np.minimum.reduce(
            [
                pts[:, 0] - self.xmin,
                self.xmax - pts[:, 0],
                pts[:, 1] - self.ymin,
                self.ymax - pts[:, 1],
            ]
        )


@dataclass(frozen=True)
class DoubleCone:
    """Infinite double cone with axis direction `axis` and half-angle `half_angle`.

    The axis angle is normalised modulo pi since the double cone is
    pi-periodic.
    """

    axis: float
    half_angle: float

    def __post_init__(self):
        if not np.isfinite(self.axis) or not np.isfinite(self.half_angle):
            raise ValueError("cone angles must be finite")
        if not 0.0 < self.half_angle <= np.pi / 2:
            raise ValueError("half_angle must lie in (0, pi/2]")
        object.__setattr__(self, "axis", float(np.mod(self.axis, np.pi)))


@dataclass(frozen=True)
class OrientedRect:
    """Rectangle centred at the origin with main axis at angle `axis`.

    `half_length` bounds the coordinate along the axis, `half_width` the
    orthogonal coordinate, so the rectangle has area 4 * half_width *
    half_length.
    """

    axis: float
    half_width: float
    half_length: float

    def __post_init__(self):
        if self.half_width <= 0 or self.half_length <= 0:
            raise ValueError("half_width and half_length must be positive")


@dataclass(frozen=True)
class PointPattern:
    """A finite planar point pattern together with its observation window.

    Points are stored as an (n, 2) float array.  All points must lie in the
    closed window and be pairwise distinct.
    """

    points: np.ndarray
    window: Window
    validate: bool = field(default=True, repr=False, compare=False)

    def __post_init__(self):
        pts = np.asarray(self.points, dtype=float)
        if pts.size == 0:
            pts = pts.reshape(0, 2)
        if pts.ndim != 2 or pts.shape[1] != 2:
            raise ValueError("points must be an (n, 2) array")
        object.__setattr__(self, "points", pts)
        if self.validate:
            if not np.all(np.isfinite(pts)):
                raise ValueError("point coordinates must be finite")
            inside = self.window.contains(pts)
            if pts.shape[0] and not inside.all():
                bad = np.flatnonzero(~inside)
                raise ValueError(f"{bad.size} point(s) outside the window, first at index {bad[0]}")
            if pts.shape[0] > 1:
                uniq = np.unique(pts, axis=0)
                if uniq.shape[0] != pts.shape[0]:
                    raise ValueError("pattern contains duplicate points")

    @property
    def n(self):
        return self.points.shape[0]

    @property
    def intensity(self):
        return self.n / self.window.area

    def __len__(self):
        return self.n


def unit_vector(alpha):
    """Unit vector (cos alpha, sin alpha)."""
    return np.array([np.cos(alpha), np.sin(alpha)])


def rotation_matrix(theta):
    c, s = np.cos(theta), np.sin(theta)
    return np.array([[c, -s], [s, c]])


def rotate_points(points, theta):
    """Rotate points about the origin by angle theta."""
    if not np.isfinite(theta):
        raise ValueError("rotation angle must be finite")
    pts = np.atleast_2d(np.asarray(points, dtype=float))
    return pts @ rotation_matrix(theta).T


def wrapped_angle_distance(a, b):
    """Shortest angular distance between directions a and b modulo pi."""
    d = np.abs(np.mod(np.asarray(a) - np.asarray(b), np.pi))
    return np.minimum(d, np.pi - d)


def in_double_cone(delta, cone):
    """Whether difference vector(s) fall inside the closed double cone.

    Raises for a zero vector, whose direction is undefined.
    """
    d = np.atleast_2d(np.asarray(delta, dtype=float))
    norms = np.hypot(d[:, 0], d[:, 1])
    if np.any(norms == 0.0):
        raise ValueError("direction of the zero vector is undefined")
    ang = np.mod(np.arctan2(d[:, 1], d[:, 0]), np.pi)
    out = wrapped_angle_distance(ang, cone.axis) <= cone.half_angle
    return out if np.asarray(delta).ndim > 1 else bool(out[0])

def in_oriented_rect(delta, rect):
    """Whether difference vector(s) fall inside the closed oriented rectangle."""
    d = np.atleast_2d(np.asarray(delta, dtype=float))
    u = unit_vector(rect.axis)
    t = d @ u
    s = d[:, 0] * (-u[1]) + d[:, 1] * u[0]
    out = (np.abs(t) <= rect.half_length) & (np.abs(s) <= rect.half_width)
    return out if np.asarray(delta).ndim > 1 else bool(out[0])


def _interval_contains_multiple(lo, hi, period, offset=0.0):
    # True iff some k*period + offset lies in [lo, hi]
    return np.floor((hi - offset) / period) >= np.ceil((lo - offset) / period)


def _max_abs_cos(lo, hi):
    if _interval_contains_multiple(lo, hi, np.pi):
        return 1.0
    return max(abs(np.cos(lo)), abs(np.cos(hi)))


def _max_abs_sin(lo, hi):
    if _interval_contains_multiple(lo, hi, np.pi, offset=np.pi / 2):
        return 1.0
    return max(abs(np.sin(lo)), abs(np.sin(hi)))


def cone_extents(cone):
    """Maximum |cos| and |sin| over the cone's angular support.

    A finite double cone of radius d then spans d*cx horizontally and d*cy
    vertically, which is all the rectangle erosion needs.
    """
    lo, hi = cone.axis - cone.half_angle, cone.axis + cone.half_angle
    return _max_abs_cos(lo, hi), _max_abs_sin(lo, hi)


def cone_erosion_area(win, cone, d):
    """Area of the window eroded by the finite double cone of radius d.

    Erosion of an axis-aligned rectangle by a centrally symmetric compact
    set is the rectangle shrunk by the set's coordinate extents, so the
    area is (l1 - 2*d*cx)+ * (l2 - 2*d*cy)+.  Returns 0 once the eroded
    set is empty.
    """
    if d < 0:
        raise ValueError("erosion radius must be non-negative")
    cx, cy = cone_extents(cone)
    w = win.l1 - 2.0 * d * cx
    h = win.l2 - 2.0 * d * cy
    if w <= 0.0 or h <= 0.0:
        return 0.0
    return w * h


def in_eroded_window(win, cone, d, point):
    """Whether point(s) lie in the window eroded by the finite double cone."""
    if d < 0:
        raise ValueError("erosion radius must be non-negative")
    cx, cy = cone_extents(cone)
    ex, ey = d * cx, d * cy
    pts = np.atleast_2d(np.asarray(point, dtype=float))
    out = (
        (pts[:, 0] >= win.xmin + ex)
        & (pts[:, 0] <= win.xmax - ex)
        & (pts[:, 1] >= win.ymin + ey)
        & (pts[:, 1] <= win.ymax - ey)
    )
    return out if np.asarray(point).ndim > 1 else bool(out[0])


def translation_overlap_area(win, delta):
    """Area of the window intersected with its translate by delta."""
    d = np.atleast_2d(np.asarray(delta, dtype=float))
    w = np.maximum(win.l1 - np.abs(d[:, 0]), 0.0)
    h = np.maximum(win.l2 - np.abs(d[:, 1]), 0.0)
    out = w * h
    return out if np.asarray(delta).ndim > 1 else float(out[0])
