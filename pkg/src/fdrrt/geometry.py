"""Planar state types, robot footprints, and collision primitives.

Everything here is immutable after construction and all operations are
pure functions, so the module is safe to use from concurrent roadmap
builds. Collision semantics are conservative: touching shapes count as
intersecting.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Sequence, Union

TWO_PI = 2.0 * math.pi


def wrap_angle(theta: float) -> float:
    """Wrap an angle to [-pi, pi); exact no-op for values already in range."""
    if -math.pi <= theta < math.pi:
        return theta
    return (theta + math.pi) % TWO_PI - math.pi


@dataclass(frozen=True)
class Configuration:
    """A single robot state: position, heading, signed curvature.

    The heading is normalized to [-pi, pi) at construction. Curvature
    bounds belong to the owning robot profile, not the configuration
    itself; see :meth:`RobotProfile.check_config`.
    """

    x: float
    y: float
    theta: float
    kappa: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "theta", wrap_angle(float(self.theta)))
        object.__setattr__(self, "x", float(self.x))
        object.__setattr__(self, "y", float(self.y))
        object.__setattr__(self, "kappa", float(self.kappa))

    def position(self) -> tuple[float, float]:
        return (self.x, self.y)

    def distance_to(self, other: "Configuration") -> float:
        return math.hypot(other.x - self.x, other.y - self.y)

    def as_tuple(self) -> tuple[float, float, float, float]:
        return (self.x, self.y, self.theta, self.kappa)


@dataclass(frozen=True)
class RectangleFootprint:
    """Axis dimensions of a rectangular body, referenced at its center."""

    length: float
    width: float

    def __post_init__(self):
        if self.length <= 0 or self.width <= 0:
            raise ValueError("footprint dimensions must be positive")

    @property
    def min_dimension(self) -> float:
        return min(self.length, self.width)

    @property
    def circumradius(self) -> float:
        return 0.5 * math.hypot(self.length, self.width)


@dataclass(frozen=True)
class DiskFootprint:
    radius: float

    def __post_init__(self):
        if self.radius <= 0:
            raise ValueError("footprint radius must be positive")

    @property
    def min_dimension(self) -> float:
        return 2.0 * self.radius

    @property
    def circumradius(self) -> float:
        return self.radius


Footprint = Union[RectangleFootprint, DiskFootprint]


@dataclass(frozen=True)
class RobotProfile:
    """Per-robot kinematic bounds and roadmap construction parameters."""

    id: str
    footprint: Footprint
    kappa_max: float
    sigma_max: float
    connection_radius_r: float
    roadmap_size_n: int

    def __post_init__(self):
        if self.kappa_max <= 0 or self.sigma_max <= 0:
            raise ValueError("kappa_max and sigma_max must be positive")
        if self.connection_radius_r <= 0:
            raise ValueError("connection_radius_r must be positive")
        if self.roadmap_size_n < 2:
            raise ValueError("roadmap_size_n must be at least 2")

    def check_config(self, q: Configuration, tol: float = 1e-9) -> None:
        if abs(q.kappa) > self.kappa_max + tol:
            raise ValueError(
                f"|kappa|={abs(q.kappa):.6g} exceeds kappa_max={self.kappa_max:.6g}"
            )


def collision_step(profile: RobotProfile, default: float = 0.1) -> float:
    """Sampling step for swept collision checks.

    Capped at half the smallest footprint dimension so that a footprint
    cannot pass over a point obstacle between consecutive samples.
    """
    return min(default, 0.5 * profile.footprint.min_dimension)


# ---------------------------------------------------------------------------
# Obstacles
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class DiskObstacle:
    center: tuple[float, float]
    radius: float

    def __post_init__(self):
        object.__setattr__(self, "center", (float(self.center[0]), float(self.center[1])))
        if self.radius < 0:
            raise ValueError("obstacle radius must be non-negative")


@dataclass(frozen=True)
class PolygonObstacle:
    """Strictly convex polygon with counter-clockwise winding."""

    vertices: tuple[tuple[float, float], ...]

    def __post_init__(self):
        verts = tuple((float(x), float(y)) for x, y in self.vertices)
        object.__setattr__(self, "vertices", verts)
        n = len(verts)
        if n < 3:
            raise ValueError("polygon needs at least 3 vertices")
        for i in range(n):
            ax, ay = verts[i]
            bx, by = verts[(i + 1) % n]
            cx, cy = verts[(i + 2) % n]
            cross = (bx - ax) * (cy - ay) - (by - ay) * (cx - ax)
            if cross <= 0:
                raise ValueError("polygon must be strictly convex and counter-clockwise")


Obstacle = Union[DiskObstacle, PolygonObstacle]


# ---------------------------------------------------------------------------
# Placed shapes
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class PlacedDisk:
    cx: float
    cy: float
    radius: float


@dataclass(frozen=True)
class PlacedPolygon:
    """Convex polygon in world coordinates, counter-clockwise."""

    vertices: tuple[tuple[float, float], ...]


OrientedShape = Union[PlacedDisk, PlacedPolygon]


def footprint_at(profile: RobotProfile, q: Configuration) -> OrientedShape:
    """Place the profile's footprint at a configuration.

    Rectangles are translated to (x, y) and rotated by theta; disks
    ignore heading.
    """
    fp = profile.footprint
    if isinstance(fp, DiskFootprint):
        return PlacedDisk(q.x, q.y, fp.radius)
    hl = 0.5 * fp.length
    hw = 0.5 * fp.width
    ct = math.cos(q.theta)
    st = math.sin(q.theta)
    # corners in CCW order starting front-right
    return PlacedPolygon((
        (q.x + hl * ct + hw * st, q.y + hl * st - hw * ct),
        (q.x + hl * ct - hw * st, q.y + hl * st + hw * ct),
        (q.x - hl * ct - hw * st, q.y - hl * st + hw * ct),
        (q.x - hl * ct + hw * st, q.y - hl * st - hw * ct),
    ))


def obstacle_shape(obs: Obstacle) -> OrientedShape:
    if isinstance(obs, DiskObstacle):
        return PlacedDisk(obs.center[0], obs.center[1], obs.radius)
    return PlacedPolygon(obs.vertices)


def shape_bounding_circle(shape: OrientedShape) -> tuple[float, float, float]:
    if isinstance(shape, PlacedDisk):
        return (shape.cx, shape.cy, shape.radius)
    xs = [v[0] for v in shape.vertices]
    ys = [v[1] for v in shape.vertices]
    cx = sum(xs) / len(xs)
    cy = sum(ys) / len(ys)
    r = max(math.hypot(x - cx, y - cy) for x, y in shape.vertices)
    return (cx, cy, r)


# ---------------------------------------------------------------------------
# Intersection tests (touching counts as intersecting)
# ---------------------------------------------------------------------------

def _project_interval(vertices, ax: float, ay: float) -> tuple[float, float]:
    lo = hi = vertices[0][0] * ax + vertices[0][1] * ay
    for x, y in vertices[1:]:
        d = x * ax + y * ay
        if d < lo:
            lo = d
        elif d > hi:
            hi = d
    return lo, hi


def _polygons_intersect(a: PlacedPolygon, b: PlacedPolygon) -> bool:
    # separating-axis test over the edge normals of both polygons
    for poly in (a.vertices, b.vertices):
        n = len(poly)
        for i in range(n):
            x1, y1 = poly[i]
            x2, y2 = poly[(i + 1) % n]
            ax = y1 - y2
            ay = x2 - x1
            lo_a, hi_a = _project_interval(a.vertices, ax, ay)
            lo_b, hi_b = _project_interval(b.vertices, ax, ay)
            if hi_a < lo_b or hi_b < lo_a:
                return False
    return True


def _point_in_convex(poly, px: float, py: float) -> bool:
    n = len(poly)
    for i in range(n):
        x1, y1 = poly[i]
        x2, y2 = poly[(i + 1) % n]
        if (x2 - x1) * (py - y1) - (y2 - y1) * (px - x1) < 0:
            return False
    return True


def _point_segment_distance(px, py, x1, y1, x2, y2) -> float:
    dx = x2 - x1
    dy = y2 - y1
    denom = dx * dx + dy * dy
    if denom == 0.0:
        return math.hypot(px - x1, py - y1)
    t = ((px - x1) * dx + (py - y1) * dy) / denom
    t = 0.0 if t < 0.0 else (1.0 if t > 1.0 else t)
    return math.hypot(px - (x1 + t * dx), py - (y1 + t * dy))


def point_polygon_distance(poly: Sequence[tuple[float, float]], px: float, py: float) -> float:
    """Distance from a point to a convex polygon; zero inside."""
    if _point_in_convex(poly, px, py):
        return 0.0
    n = len(poly)
    return min(
        _point_segment_distance(px, py, poly[i][0], poly[i][1],
                                poly[(i + 1) % n][0], poly[(i + 1) % n][1])
        for i in range(n)
    )


def shapes_intersect(a: OrientedShape, b: OrientedShape) -> bool:
    """True iff the closed shapes overlap; symmetric in its arguments."""
    a_disk = isinstance(a, PlacedDisk)
    b_disk = isinstance(b, PlacedDisk)
    if a_disk and b_disk:
        dx = b.cx - a.cx
        dy = b.cy - a.cy
        rr = a.radius + b.radius
        return dx * dx + dy * dy <= rr * rr
    if a_disk:
        return point_polygon_distance(b.vertices, a.cx, a.cy) <= a.radius
    if b_disk:
        return point_polygon_distance(a.vertices, b.cx, b.cy) <= b.radius
    return _polygons_intersect(a, b)


def config_in_collision(profile: RobotProfile, q: Configuration,
                        obstacles: Iterable[Obstacle]) -> bool:
    shape = footprint_at(profile, q)
    return any(shapes_intersect(shape, obstacle_shape(o)) for o in obstacles)


def path_in_collision(profile: RobotProfile, path, obstacles, step_ds: float) -> bool:
    """Sampled swept-volume check of a local path against static obstacles.

    Samples are placed at arc lengths 0, step_ds, 2*step_ds, ... plus the
    final endpoint, so halving step_ds only ever adds sample points and
    can never hide a collision that a coarser check found.
    """
    if step_ds <= 0:
        raise ValueError("step_ds must be positive")
    obstacles = list(obstacles)
    if not obstacles:
        return False
    shapes = [obstacle_shape(o) for o in obstacles]
    bounds = [shape_bounding_circle(s) for s in shapes]
    fp_r = profile.footprint.circumradius
    total = path.total_length
    s_values = []
    k = 0
    while k * step_ds < total:
        s_values.append(k * step_ds)
        k += 1
    s_values.append(total)
    for s in s_values:
        q = path.config_at(s)
        placed = None
        for shape, (bx, by, br) in zip(shapes, bounds):
            # cheap circle reject before the exact test
            if math.hypot(q.x - bx, q.y - by) > fp_r + br:
                continue
            if placed is None:
                placed = footprint_at(profile, q)
            if shapes_intersect(placed, shape):
                return True
    return False
