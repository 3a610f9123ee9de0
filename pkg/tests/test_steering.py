import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from fdrrt.geometry import Configuration, DiskFootprint, RobotProfile, wrap_angle
from fdrrt.steering import (
    Arc,
    Clothoid,
    Line,
    LocalPath,
    is_reachable,
    sample_path,
    segment_from_list,
    segment_to_list,
    steer,
)
from integrator import closure_errors


CURVATURE_CONTINUITY_TOL = 1e-9
CLOSURE_POS_TOL = 1e-6
CLOSURE_ANG_TOL = 1e-6


def seg_end_curvature(seg):
    if isinstance(seg, Line):
        return 0.0
    if isinstance(seg, Arc):
        return seg.curvature
    return seg.start_curvature + seg.curvature_rate * seg.length


def seg_start_curvature(seg):
    if isinstance(seg, Line):
        return 0.0
    if isinstance(seg, Arc):
        return seg.curvature
    return seg.start_curvature


def assert_valid_local_path(path, profile, q1, q2):
    # curvature continuity across segment boundaries
    k = q1.kappa
    for seg in path.segments:
        assert abs(seg_start_curvature(seg) - k) <= CURVATURE_CONTINUITY_TOL
        k = seg_end_curvature(seg)
        assert seg.length >= 0.0
    assert abs(k - q2.kappa) <= 1e-9
    # bounds
    assert path.curvature_bounds_ok(profile)
    # total length bookkeeping and the metric lower bound
    assert path.total_length == pytest.approx(
        sum(s.length for s in path.segments), abs=1e-9)
    assert path.total_length >= q1.distance_to(q2) - 1e-9
    # independent closure
    pos_err, ang_err, kappa_err = closure_errors(path, q2)
    assert pos_err <= CLOSURE_POS_TOL
    assert ang_err <= CLOSURE_ANG_TOL
    assert kappa_err <= 1e-6


class TestSteerBasics:
    def test_collinear_aligned_gives_single_line(self, car_profile, origin):
        path = steer(origin, Configuration(5, 0, 0, 0), car_profile)
        assert path is not None
        assert len(path.segments) == 1
        assert isinstance(path.segments[0], Line)
        assert path.total_length == pytest.approx(5.0)

    def test_directly_behind_opposing_heading(self, car_profile, origin):
        path = steer(origin, Configuration(-5, 0, math.pi, 0), car_profile)
        if path is not None:
            # forward-only: must loop around
            assert path.total_length >= math.pi / car_profile.kappa_max - 1e-9
            assert_valid_local_path(path, car_profile, origin,
                                    Configuration(-5, 0, math.pi, 0))

    def test_quarter_turn_closure(self, origin):
        prof = RobotProfile("q", DiskFootprint(0.3), 0.25, 0.6, 50.0, 2)
        q2 = Configuration(4, 4, math.pi / 2, 0)
        path = steer(origin, q2, prof)
        assert path is not None
        assert_valid_local_path(path, prof, origin, q2)

    def test_steer_same_config_zero_length(self, car_profile):
        q = Configuration(1.5, -2.0, 0.3, 0.05)
        path = steer(q, q, car_profile)
        assert path is not None
        assert path.total_length == 0.0
        assert path.end == q

    def test_deterministic(self, car_profile, origin):
        q2 = Configuration(7, 2, 0.4, -0.1)
        p1 = steer(origin, q2, car_profile)
        p2 = steer(origin, q2, car_profile)
        assert p1 is not None and p2 is not None
        assert p1.segments == p2.segments

    def test_curvature_endpoints_matched(self, car_profile):
        q1 = Configuration(0, 0, 0, 0.15)
        q2 = Configuration(9, 1, 0.2, -0.12)
        path = steer(q1, q2, car_profile)
        assert path is not None
        assert_valid_local_path(path, car_profile, q1, q2)

    def test_max_length_prunes(self, car_profile, origin):
        q2 = Configuration(2.0, 0.8, 0.0, 0.0)  # needs a long maneuver
        free = steer(origin, q2, car_profile)
        capped = steer(origin, q2, car_profile, max_length=3.0)
        if free is not None and free.total_length > 4.0:
            assert capped is None or capped.total_length <= 3.75


class TestSteerClosureRandom:
    @pytest.mark.parametrize("kappa_max,sigma_max", [(0.2, 0.6), (1.0, 3.0), (2.0, 8.0)])
    def test_random_pairs_integrate_to_target(self, kappa_max, sigma_max):
        prof = RobotProfile("r", DiskFootprint(0.3), kappa_max, sigma_max, 50.0, 2)
        rng = np.random.default_rng(42)
        n_success = 0
        for _ in range(120):
            q1 = Configuration(0, 0, rng.uniform(-math.pi, math.pi),
                               rng.uniform(-kappa_max, kappa_max))
            q2 = Configuration(rng.uniform(-8, 8), rng.uniform(-8, 8),
                               rng.uniform(-math.pi, math.pi),
                               rng.uniform(-kappa_max, kappa_max))
            path = steer(q1, q2, prof)
            if path is None:
                continue
            n_success += 1
            assert_valid_local_path(path, prof, q1, q2)
        assert n_success >= 100  # the family should cover most queries


class TestSamplePath:
    def test_line_samples(self, origin):
        path = LocalPath(origin, [Line(1.0)])
        samples = sample_path(path, 0.5)
        assert [q.x for q in samples] == pytest.approx([0.0, 0.5, 1.0])

    def test_coarse_ds_gives_endpoints(self, origin):
        path = LocalPath(origin, [Line(2.0)])
        samples = sample_path(path, 5.0)
        assert len(samples) == 2
        assert samples[0] == path.start
        assert samples[-1] == path.end

    def test_arc_heading_closed_form(self, origin):
        # arc of curvature 0.5 and length pi turns the heading by 0.5*pi
        start = Configuration(0, 0, 0.3, 0.5)
        path = LocalPath(start, [Arc(0.5, math.pi)])
        samples = sample_path(path, 0.01)
        expected = wrap_angle(0.3 + 0.5 * math.pi)
        assert samples[-1].theta == pytest.approx(expected, abs=1e-6)

    def test_rejects_bad_ds(self, origin):
        with pytest.raises(ValueError):
            sample_path(LocalPath(origin, [Line(1.0)]), 0.0)

    def test_halving_ds_is_superset(self, origin):
        path = LocalPath(origin, [Line(3.7)])
        coarse = {round(q.x, 12) for q in sample_path(path, 0.4)}
        fine = {round(q.x, 12) for q in sample_path(path, 0.2)}
        assert coarse <= fine


class TestIsReachable:
    def test_ahead_within_radius(self, origin):
        q2 = Configuration(5, 0, 0, 0)
        path = LocalPath(origin, [Line(5.0)])
        assert is_reachable(origin, q2, path, 10.0)

    def test_too_long(self, origin):
        q2 = Configuration(12, 0, 0, 0)
        path = LocalPath(origin, [Line(12.0)])
        assert not is_reachable(origin, q2, path, 10.0)

    def test_perpendicular_is_not_in_front(self, origin):
        # dot product exactly zero fails the strict half-plane test
        q2 = Configuration(0, 3, 0, 0)
        path = LocalPath(origin, [Line(3.0)])
        assert not is_reachable(origin, q2, path, 10.0)

    @given(st.floats(-math.pi, math.pi), st.floats(0.2, 8.0), st.floats(-math.pi, math.pi))
    @settings(max_examples=100, deadline=None)
    def test_behind_half_plane_always_false(self, theta1, dist, off):
        q1 = Configuration(0, 0, theta1, 0)
        # place q2 strictly behind q1's heading
        ang = theta1 + math.pi / 2 + abs(off) % math.pi + 1e-3
        q2 = Configuration(dist * math.cos(ang), dist * math.sin(ang), 0, 0)
        dot = ((q2.x - q1.x) * math.cos(theta1) + (q2.y - q1.y) * math.sin(theta1))
        path = LocalPath(q1, [Line(dist)])
        if dot <= 0:
            assert not is_reachable(q1, q2, path, 1e9)


class TestSegmentSerialization:
    @pytest.mark.parametrize("seg", [
        Line(2.5),
        Arc(-0.2, 1.7),
        Clothoid(0.1, -0.6, 0.333),
    ])
    def test_round_trip(self, seg):
        assert segment_from_list(segment_to_list(seg)) == seg
