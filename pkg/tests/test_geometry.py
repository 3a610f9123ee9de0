import math

import pytest
from hypothesis import given, settings, strategies as st

from fdrrt.geometry import (
    Configuration,
    DiskFootprint,
    DiskObstacle,
    PlacedDisk,
    PlacedPolygon,
    PolygonObstacle,
    RectangleFootprint,
    RobotProfile,
    collision_step,
    config_in_collision,
    footprint_at,
    path_in_collision,
    shapes_intersect,
    wrap_angle,
)
from fdrrt.steering import Line, LocalPath


def box_profile(length=3.6, width=1.6):
    return RobotProfile("box", RectangleFootprint(length, width), 0.2, 0.6, 10.0, 2)


def disk_profile_r(radius):
    return RobotProfile("d", DiskFootprint(radius), 1.0, 3.0, 10.0, 2)


class TestConfiguration:
    def test_theta_normalized(self):
        q = Configuration(0, 0, 3 * math.pi, 0)
        assert -math.pi <= q.theta < math.pi
        assert q.theta == pytest.approx(math.pi, abs=1e-12) or q.theta == pytest.approx(-math.pi)

    @given(st.floats(-50, 50, allow_nan=False))
    def test_wrap_angle_range(self, t):
        w = wrap_angle(t)
        assert -math.pi <= w < math.pi
        assert math.isclose(math.sin(w), math.sin(t), abs_tol=1e-9)
        assert math.isclose(math.cos(w), math.cos(t), abs_tol=1e-9)


class TestFootprintAt:
    def test_rectangle_identity_pose(self):
        shape = footprint_at(box_profile(), Configuration(0, 0, 0, 0))
        xs = sorted(v[0] for v in shape.vertices)
        ys = sorted(v[1] for v in shape.vertices)
        assert xs == pytest.approx([-1.8, -1.8, 1.8, 1.8])
        assert ys == pytest.approx([-0.8, -0.8, 0.8, 0.8])

    def test_rectangle_quarter_turn(self):
        shape = footprint_at(box_profile(), Configuration(0, 0, math.pi / 2, 0))
        xs = sorted(v[0] for v in shape.vertices)
        ys = sorted(v[1] for v in shape.vertices)
        assert xs == pytest.approx([-0.8, -0.8, 0.8, 0.8])
        assert ys == pytest.approx([-1.8, -1.8, 1.8, 1.8])

    def test_disk_ignores_heading(self):
        shape = footprint_at(disk_profile_r(0.4), Configuration(2, 3, 1.2, 0))
        assert shape == PlacedDisk(2.0, 3.0, 0.4)


class TestShapesIntersect:
    def test_disks_with_gap(self):
        a = PlacedDisk(0, 0, 1.0)
        b = PlacedDisk(3, 0, 1.0)
        assert not shapes_intersect(a, b)

    def test_tangent_disks_touch_counts(self):
        assert shapes_intersect(PlacedDisk(0, 0, 1.0), PlacedDisk(2, 0, 1.0))

    def test_boxes_small_overlap(self):
        # hand separating-axis check: y-extents [-0.8, 0.8] and [0.7, 2.3]
        # overlap by 0.1 while x-extents coincide
        prof = box_profile()
        a = footprint_at(prof, Configuration(0, 0, 0, 0))
        b = footprint_at(prof, Configuration(0, 1.5, 0, 0))
        assert shapes_intersect(a, b)
        c = footprint_at(prof, Configuration(0, 1.7, 0, 0))
        assert not shapes_intersect(a, c)

    def test_disk_vs_polygon(self):
        tri = PlacedPolygon(((0, 0), (2, 0), (1, 2)))
        assert shapes_intersect(PlacedDisk(1, 1, 0.2), tri)       # inside
        assert shapes_intersect(PlacedDisk(3, 0, 1.0), tri)       # touching edge
        assert not shapes_intersect(PlacedDisk(5, 5, 0.5), tri)

    @given(
        st.tuples(st.floats(-5, 5), st.floats(-5, 5), st.floats(0.1, 2)),
        st.tuples(st.floats(-5, 5), st.floats(-5, 5), st.floats(0.1, 2)),
        st.floats(-math.pi, math.pi),
        st.floats(-math.pi, math.pi),
        st.booleans(),
        st.booleans(),
    )
    @settings(max_examples=150, deadline=None)
    def test_symmetry(self, pa, pb, ta, tb, disk_a, disk_b):
        prof_d = disk_profile_r(0.5)
        prof_b = box_profile(2.0, 1.0)
        qa = Configuration(pa[0], pa[1], ta, 0)
        qb = Configuration(pb[0], pb[1], tb, 0)
        a = footprint_at(prof_d if disk_a else prof_b, qa)
        b = footprint_at(prof_d if disk_b else prof_b, qb)
        assert shapes_intersect(a, b) == shapes_intersect(b, a)


class TestObstacleValidation:
    def test_polygon_needs_ccw_convex(self):
        with pytest.raises(ValueError):
            PolygonObstacle(((0, 0), (0, 1), (1, 1), (1, 0)))  # clockwise
        with pytest.raises(ValueError):
            PolygonObstacle(((0, 0), (1, 0)))
        PolygonObstacle(((0, 0), (1, 0), (1, 1), (0, 1)))  # ccw is fine


def straight_path(length, start=None):
    start = start or Configuration(0, 0, 0, 0)
    return LocalPath(start, [Line(length)])


class TestPathInCollision:
    def test_empty_space(self):
        prof = disk_profile_r(0.4)
        assert not path_in_collision(prof, straight_path(5.0), [], 0.1)
        far = DiskObstacle((0, 50), 1.0)
        assert not path_in_collision(prof, straight_path(5.0), [far], 0.1)

    def test_blocking_polygon_midpoint(self):
        prof = disk_profile_r(0.4)
        block = PolygonObstacle(((2.0, -0.5), (3.0, -0.5), (3.0, 0.5), (2.0, 0.5)))
        assert path_in_collision(prof, straight_path(5.0), [block], 0.1)

    def test_near_miss_clearance(self):
        # disk r=0.2 along y=0; point-like obstacle 0.15 m off the line.
        # minimum clearance 0.15 < 0.2, so dense sampling must report a hit
        prof = disk_profile_r(0.2)
        obs = DiskObstacle((2.5, 0.15), 0.0)
        assert path_in_collision(prof, straight_path(5.0), [obs], 0.05)
        clear = DiskObstacle((2.5, 0.25), 0.0)
        assert not path_in_collision(prof, straight_path(5.0), [clear], 0.05)

    @given(
        st.lists(
            st.tuples(st.floats(0, 6), st.floats(-1.5, 1.5), st.floats(0.05, 0.5)),
            min_size=0, max_size=4,
        ),
        st.floats(0.05, 1.5),
    )
    @settings(max_examples=80, deadline=None)
    def test_monotone_in_obstacles_and_step(self, obs_specs, ds):
        prof = disk_profile_r(0.3)
        path = straight_path(6.0)
        obstacles = [DiskObstacle((x, y), r) for x, y, r in obs_specs]
        hit = path_in_collision(prof, path, obstacles, ds)
        # adding an obstacle can never clear a collision
        more = obstacles + [DiskObstacle((100.0, 100.0), 0.5)]
        assert path_in_collision(prof, path, more, ds) == hit
        # halving the step can never clear a collision
        if hit:
            assert path_in_collision(prof, path, obstacles, ds / 2)

    def test_rejects_bad_step(self):
        with pytest.raises(ValueError):
            path_in_collision(disk_profile_r(0.3), straight_path(1.0), [], 0.0)


class TestCollisionStep:
    def test_capped_at_half_min_dimension(self):
        assert collision_step(box_profile()) == pytest.approx(0.1)
        assert collision_step(disk_profile_r(0.08)) == pytest.approx(0.08)


class TestConfigInCollision:
    def test_start_inside_obstacle(self):
        prof = disk_profile_r(0.4)
        obs = DiskObstacle((0.0, 0.0), 0.5)
        assert config_in_collision(prof, Configuration(0, 0, 0, 0), [obs])
        assert not config_in_collision(prof, Configuration(5, 0, 0, 0), [obs])
