"""Benchmark environments: traffic intersection, warehouse, UAV field.

Generators are deterministic in (robot_count, seed) and emit plain
scenario files, so hand-written scenarios are first-class inputs to the
planner. Dimensions are proportionate to the footprints (3.6 m x 1.6 m
vehicles, 0.4 m and 0.2 m disks) and overridable through the layout
dataclasses.
"""

from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, field, replace

import numpy as np

from .geometry import (
    Configuration,
    DiskFootprint,
    DiskObstacle,
    Obstacle,
    PolygonObstacle,
    RectangleFootprint,
    RobotProfile,
    config_in_collision,
    footprint_at,
    shapes_intersect,
)
from .roadmap import (
    SamplingParams,
    build_roadmap,
    obstacle_from_dict,
    obstacle_to_dict,
    profile_from_dict,
    profile_to_dict,
)

FORMAT_VERSION = 1


class CapacityExceeded(ValueError):
    """More robots requested than the environment can host."""


class ScenarioInvariantError(ValueError):
    """Start/goal placements violate the scenario invariants."""


@dataclass(frozen=True)
class ScenarioRobot:
    profile: RobotProfile
    q_init: Configuration
    q_goal: Configuration
    via_points: tuple = ()


@dataclass(frozen=True)
class Scenario:
    name: str
    obstacles: tuple
    robots: tuple
    sampling: SamplingParams
    seed: int

    def __post_init__(self):
        object.__setattr__(self, "obstacles", tuple(self.obstacles))
        object.__setattr__(self, "robots", tuple(self.robots))
        validate_scenario(self)

    @property
    def robot_count(self) -> int:
        return len(self.robots)


def validate_scenario(sc: Scenario) -> None:
    for k, rb in enumerate(sc.robots):
        for q, tag in ((rb.q_init, "init"), (rb.q_goal, "goal")):
            if config_in_collision(rb.profile, q, sc.obstacles):
                raise ScenarioInvariantError(
                    f"robot {k} {tag} footprint intersects an obstacle")
    for field_name in ("q_init", "q_goal"):
        shapes = [footprint_at(rb.profile, getattr(rb, field_name))
                  for rb in sc.robots]
        for i in range(len(shapes)):
            for j in range(i + 1, len(shapes)):
                if shapes_intersect(shapes[i], shapes[j]):
                    raise ScenarioInvariantError(
                        f"robots {i} and {j} overlap at {field_name}")


def robot_sampling_params(sc: Scenario, robot_index: int) -> SamplingParams:
    """Per-robot sampling seed derived from the scenario seed."""
    derived = (sc.sampling.rng_seed * 1_000_003 + robot_index) % (2 ** 63)
    return replace(sc.sampling, rng_seed=derived)


def build_scenario_roadmaps(sc: Scenario):
    """One pruned local roadmap per robot."""
    out = []
    for i, rb in enumerate(sc.robots):
        out.append(build_roadmap(rb.q_init, rb.q_goal, rb.profile, sc.obstacles,
                                 robot_sampling_params(sc, i), rb.via_points))
    return out


def _rot(x: float, y: float, quarter_turns: int) -> tuple[float, float]:
    q = quarter_turns % 4
    if q == 0:
        return x, y
    if q == 1:
        return -y, x
    if q == 2:
        return -x, -y
    return y, -x


def _rot_config(c: Configuration, quarter_turns: int) -> Configuration:
    x, y = _rot(c.x, c.y, quarter_turns)
    return Configuration(x, y, c.theta + quarter_turns * math.pi / 2, c.kappa)


# ---------------------------------------------------------------------------
# Traffic intersection
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class IntersectionLayout:
    arm_length: float = 30.0
    lane_width: float = 3.5
    lanes_per_approach: int = 3
    vehicle_length: float = 3.6
    vehicle_width: float = 1.6
    kappa_max: float = 0.2
    sigma_max: float = 0.6
    connection_radius: float = 14.0
    roadmap_size: int = 30
    start_setback: float = 15.0
    # right turns exit shallower than left turns so that two maneuvers
    # merging into one lane end at well-separated depths
    right_exit_setback: float = 8.0
    corner_margin: float = 1.5
    left_turn_radius: float = 8.0
    right_turn_radius: float = 6.0


def _intersection_profile(layout: IntersectionLayout, rid: str) -> RobotProfile:
    return RobotProfile(
        id=rid,
        footprint=RectangleFootprint(layout.vehicle_length, layout.vehicle_width),
        kappa_max=layout.kappa_max,
        sigma_max=layout.sigma_max,
        connection_radius_r=layout.connection_radius,
        roadmap_size_n=layout.roadmap_size,
    )


def _intersection_route(layout: IntersectionLayout, lane: int):
    """Canonical west-approach route for a lane; lane 0 turns left,
    lane 1 goes straight, lane 2 turns right."""
    w = layout.lanes_per_approach * layout.lane_width     # junction half-width
    half = 0.5 * layout.lane_width
    y_lane = -(half + lane * layout.lane_width)
    x_start = -(w + layout.start_setback)
    init = Configuration(x_start, y_lane, 0.0, 0.0)
    if lane == 1 or layout.lanes_per_approach < 3:
        goal = Configuration(w + layout.start_setback, y_lane, 0.0, 0.0)
        return init, goal, ()
    if lane == 0:
        # left turn onto the lane at x = +half heading +y
        r = layout.left_turn_radius
        cx = half - r
        cy = y_lane + r
        entry = Configuration(cx, y_lane, 0.0, 0.0)
        exit_ = Configuration(half, cy, math.pi / 2, 0.0)
        goal = Configuration(half, w + layout.start_setback, math.pi / 2, 0.0)
        return init, goal, (entry, exit_)
    # right turn onto the lane at x = -half heading -y
    r = layout.right_turn_radius
    cx = -half - r
    cy = y_lane - r
    entry = Configuration(cx, y_lane, 0.0, 0.0)
    exit_ = Configuration(-half, cy, -math.pi / 2, 0.0)
    goal = Configuration(-half, -(w + layout.right_exit_setback), -math.pi / 2, 0.0)
    return init, goal, (entry, exit_)


def make_intersection(robot_count: int, seed: int,
                      layout: IntersectionLayout = IntersectionLayout(),
                      sampling: SamplingParams | None = None) -> Scenario:
    """Four-way intersection with per-lane maneuvers through the junction."""
    capacity = 4 * layout.lanes_per_approach
    if not 1 <= robot_count <= capacity:
        raise CapacityExceeded(f"robot_count must be in 1..{capacity}")
    w = layout.lanes_per_approach * layout.lane_width
    m = layout.corner_margin
    extent = w + layout.arm_length + 0.5 * layout.lane_width
    corner = PolygonObstacle((
        (w + m, w + m), (extent, w + m), (extent, extent), (w + m, extent)))
    obstacles = [PolygonObstacle(tuple(_rot(x, y, k) for x, y in corner.vertices))
                 for k in range(4)]
    rng = np.random.default_rng(seed)
    slots = [(approach, lane)
             for approach in range(4)
             for lane in range(layout.lanes_per_approach)]
    order = rng.permutation(len(slots))
    robots = []
    for k in range(robot_count):
        approach, lane = slots[int(order[k])]
        init, goal, vias = _intersection_route(layout, lane)
        robots.append(ScenarioRobot(
            profile=_intersection_profile(layout, f"veh{k}"),
            q_init=_rot_config(init, approach),
            q_goal=_rot_config(goal, approach),
            via_points=tuple(_rot_config(v, approach) for v in vias),
        ))
    sampling = sampling or SamplingParams(rng_seed=seed)
    return Scenario("intersection", tuple(obstacles), tuple(robots),
                    sampling, seed)


# ---------------------------------------------------------------------------
# Warehouse
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class WarehouseLayout:
    width: float = 18.0
    height: float = 12.0
    shelf_cols: int = 3
    shelf_rows: int = 2
    aisle_width: float = 2.5
    robot_radius: float = 0.4
    kappa_max: float = 1.0
    sigma_max: float = 6.0
    connection_radius: float = 7.0
    roadmap_size: int = 26
    endpoint_inset: float = 0.5
    # vertical aisles start deeper so no endpoint sits within a robot
    # diameter of a perpendicular aisle's endpoint near the hall corners
    cross_endpoint_inset: float = 2.2
    # spacing between robots sharing an aisle end
    stagger_gap: float = 2.2
    turn_radius: float = 2.0

    def shelf_size(self) -> tuple[float, float]:
        sw = (self.width - (self.shelf_cols + 1) * self.aisle_width) / self.shelf_cols
        sh = (self.height - (self.shelf_rows + 1) * self.aisle_width) / self.shelf_rows
        return sw, sh


def _warehouse_profile(layout: WarehouseLayout, rid: str) -> RobotProfile:
    return RobotProfile(
        id=rid,
        footprint=DiskFootprint(layout.robot_radius),
        kappa_max=layout.kappa_max,
        sigma_max=layout.sigma_max,
        connection_radius_r=layout.connection_radius,
        roadmap_size_n=layout.roadmap_size,
    )


def make_warehouse(robot_count: int, seed: int,
                   layout: WarehouseLayout = WarehouseLayout(),
                   sampling: SamplingParams | None = None) -> Scenario:
    """Shelf grid with aisle-following disk robots."""
    sw, sh = layout.shelf_size()
    if layout.aisle_width < 2 * layout.robot_radius + 0.4:
        raise ScenarioInvariantError("aisles too narrow for the robot diameter")
    if min(sw, sh) <= 0:
        raise ScenarioInvariantError("shelf grid does not fit the hall")
    a = layout.aisle_width
    obstacles = []
    for i in range(layout.shelf_cols):
        for j in range(layout.shelf_rows):
            x0 = a + i * (sw + a)
            y0 = a + j * (sh + a)
            obstacles.append(PolygonObstacle((
                (x0, y0), (x0 + sw, y0), (x0 + sw, y0 + sh), (x0, y0 + sh))))
    # one-way aisles: horizontal rows alternate +x/-x, columns +y/-y; the
    # second-to-last column is the shared corridor every turning route
    # merges onto, which is where the congestion lives
    h_centers = [0.5 * a + j * (sh + a) for j in range(layout.shelf_rows + 1)]
    v_centers = [0.5 * a + i * (sw + a) for i in range(layout.shelf_cols + 1)]
    h_dir = [1.0 if j % 2 == 0 else -1.0 for j in range(len(h_centers))]
    v_dir = [1.0 if i % 2 == 0 else -1.0 for i in range(len(v_centers))]
    corridor_idx = len(v_centers) - 2
    if v_dir[corridor_idx] < 0:
        v_dir[corridor_idx] = 1.0  # corridor always runs upward
    slots = _warehouse_slots(layout, h_centers, h_dir, v_centers, v_dir,
                             corridor_idx)
    if not 1 <= robot_count <= len(slots):
        raise CapacityExceeded(f"robot_count must be in 1..{len(slots)}")
    rng = np.random.default_rng(seed)
    # the corridor routes always ride along (they carry the congestion);
    # the straights are shuffled; the two most contended templates stay
    # last so they only appear near capacity
    n_z = sum(1 for s in slots if s[0] == "z")
    n_shuffled = max(1, len(slots) - 2)
    order = np.concatenate([
        rng.permutation(n_z) if n_z else np.empty(0, dtype=int),
        n_z + rng.permutation(n_shuffled - n_z),
        np.arange(n_shuffled, len(slots)),
    ]).astype(int)
    used: dict = {}
    robots = []
    for k in range(robot_count):
        init, goal, vias = _warehouse_place(layout, slots[int(order[k])], used)
        robots.append(ScenarioRobot(
            profile=_warehouse_profile(layout, f"agv{k}"),
            q_init=init, q_goal=goal, via_points=vias))
    sampling = sampling or SamplingParams(rng_seed=seed)
    return Scenario("warehouse", tuple(obstacles), tuple(robots), sampling, seed)


def _warehouse_slots(layout, h_centers, h_dir, v_centers, v_dir, corridor_idx):
    """Route templates: corridor Z-routes first, then straight aisles.

    The roster is sized so that no aisle end is claimed more than three
    times; deeper staggering starves the reference legs of room.
    """
    x_c = v_centers[corridor_idx]
    rows = list(range(len(h_centers)))
    slots = []
    for lo, hi in ((rows[0], rows[-1]), (rows[0], rows[1]), (rows[1], rows[-1])):
        if lo != hi:
            slots.append(("z", lo, hi, x_c))
    if len(h_centers) > 1:
        slots.append(("h", 1))
    for i in (len(v_centers) - 1, 0, 1):
        if 0 <= i < len(v_centers):
            slots.append(("v", i))
    slots.append(("h", 0))
    # the two most contended templates come last so they only appear in
    # near-capacity scenarios
    slots.append(("v", corridor_idx))
    if len(h_centers) > 1:
        slots.append(("h", 1))
    return slots


def _warehouse_place(layout, slot, used):
    """Start, goal, and turn via points for a route template.

    Robots sharing an aisle end are staggered by stagger_gap so that
    starts sit ahead of later starts and goals park short of earlier
    goals; ordering within an aisle is resolved by the planner.
    """
    a = layout.aisle_width
    sw, sh = layout.shelf_size()
    h_centers = [0.5 * a + j * (sh + a) for j in range(layout.shelf_rows + 1)]
    v_centers = [0.5 * a + i * (sw + a) for i in range(layout.shelf_cols + 1)]
    h_dir = [1.0 if j % 2 == 0 else -1.0 for j in range(len(h_centers))]
    v_dir = [1.0 if i % 2 == 0 else -1.0 for i in range(len(v_centers))]
    corridor_idx = len(v_centers) - 2
    if v_dir[corridor_idx] < 0:
        v_dir[corridor_idx] = 1.0
    ins = layout.endpoint_inset
    ins_v = layout.cross_endpoint_inset
    gap = layout.stagger_gap
    r = layout.turn_radius

    def claim(key):
        n = used.get(key, 0)
        used[key] = n + 1
        return n

    kind = slot[0]
    if kind == "h":
        j = slot[1]
        y = h_centers[j]
        d = h_dir[j]
        x0 = ins if d > 0 else layout.width - ins
        x1 = layout.width - ins if d > 0 else ins
        th = 0.0 if d > 0 else math.pi
        s_off = claim(("h", j, "s")) * gap
        g_off = claim(("h", j, "g")) * gap
        init = Configuration(x0 + d * s_off, y, th, 0.0)
        goal = Configuration(x1 - d * g_off, y, th, 0.0)
        return init, goal, ()
    if kind == "v":
        i = slot[1]
        x = v_centers[i]
        d = v_dir[i]
        y0 = ins_v if d > 0 else layout.height - ins_v
        y1 = layout.height - ins_v if d > 0 else ins_v
        th = math.pi / 2 if d > 0 else -math.pi / 2
        s_off = claim(("v", i, "s")) * gap
        g_off = claim(("v", i, "g")) * gap
        init = Configuration(x, y0 + d * s_off, th, 0.0)
        goal = Configuration(x, y1 - d * g_off, th, 0.0)
        return init, goal, ()
    # corridor Z-route: along entry row, up the corridor, out an exit row
    _, j_in, j_out, x_c = slot
    y_in = h_centers[j_in]
    y_out = h_centers[j_out]
    d_in = h_dir[j_in]
    d_out = h_dir[j_out]
    th_in = 0.0 if d_in > 0 else math.pi
    th_out = 0.0 if d_out > 0 else math.pi
    x_start = ins if d_in > 0 else layout.width - ins
    x_end = layout.width - ins if d_out > 0 else ins
    s_off = claim(("h", j_in, "s")) * gap
    g_off = claim(("h", j_out, "g")) * gap
    init = Configuration(x_start + d_in * s_off, y_in, th_in, 0.0)
    goal = Configuration(x_end - d_out * g_off, y_out, th_out, 0.0)
    vias = (
        Configuration(x_c - d_in * r, y_in, th_in, 0.0),
        Configuration(x_c, y_in + r, math.pi / 2, 0.0),
        Configuration(x_c, y_out - r, math.pi / 2, 0.0),
        Configuration(x_c + d_out * r, y_out, th_out, 0.0),
    )
    return init, goal, vias


# ---------------------------------------------------------------------------
# UAV field
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class UavFieldLayout:
    side: float = 20.0
    ring_radius: float = 8.5
    robot_radius: float = 0.2
    kappa_max: float = 2.0
    sigma_max: float = 8.0
    connection_radius: float = 6.0
    roadmap_size: int = 26


def _uav_profile(layout: UavFieldLayout, rid: str) -> RobotProfile:
    return RobotProfile(
        id=rid,
        footprint=DiskFootprint(layout.robot_radius),
        kappa_max=layout.kappa_max,
        sigma_max=layout.sigma_max,
        connection_radius_r=layout.connection_radius,
        roadmap_size_n=layout.roadmap_size,
    )


def make_uav_field(robot_count: int, seed: int,
                   layout: UavFieldLayout = UavFieldLayout(),
                   sampling: SamplingParams | None = None) -> Scenario:
    """Obstacle-free square; all routes cross near the center."""
    if not 1 <= robot_count <= 12:
        raise CapacityExceeded("robot_count must be in 1..12")
    cx = cy = 0.5 * layout.side
    rng = np.random.default_rng(seed)
    phase = rng.uniform(0.0, 2.0 * math.pi)
    # goals sit on the far side, offset by half a slot so that no pair
    # swaps endpoints exactly head-on
    slot = 2.0 * math.pi / max(robot_count, 2)
    robots = []
    for k in range(robot_count):
        a_start = phase + k * slot
        a_goal = a_start + math.pi + 0.5 * slot
        sx = cx + layout.ring_radius * math.cos(a_start)
        sy = cy + layout.ring_radius * math.sin(a_start)
        gx = cx + layout.ring_radius * math.cos(a_goal)
        gy = cy + layout.ring_radius * math.sin(a_goal)
        heading = math.atan2(gy - sy, gx - sx)
        robots.append(ScenarioRobot(
            profile=_uav_profile(layout, f"uav{k}"),
            q_init=Configuration(sx, sy, heading, 0.0),
            q_goal=Configuration(gx, gy, heading, 0.0)))
    sampling = sampling or SamplingParams(rng_seed=seed)
    return Scenario("uav_field", (), tuple(robots), sampling, seed)


GENERATORS = {
    "intersection": make_intersection,
    "warehouse": make_warehouse,
    "uav_field": make_uav_field,
}


# ---------------------------------------------------------------------------
# Persistence
# ---------------------------------------------------------------------------

def scenario_to_dict(sc: Scenario) -> dict:
    return {
        "format_version": FORMAT_VERSION,
        "name": sc.name,
        "seed": sc.seed,
        "sampling": asdict(sc.sampling),
        "obstacles": [obstacle_to_dict(o) for o in sc.obstacles],
        "robots": [
            {
                "profile": profile_to_dict(rb.profile),
                "init": list(rb.q_init.as_tuple()),
                "goal": list(rb.q_goal.as_tuple()),
                "via_points": [list(v.as_tuple()) for v in rb.via_points],
            }
            for rb in sc.robots
        ],
    }


def scenario_from_dict(data: dict) -> Scenario:
    if data.get("format_version") != FORMAT_VERSION:
        raise ValueError("unsupported scenario format version")
    robots = tuple(
        ScenarioRobot(
            profile=profile_from_dict(rb["profile"]),
            q_init=Configuration(*rb["init"]),
            q_goal=Configuration(*rb["goal"]),
            via_points=tuple(Configuration(*v) for v in rb["via_points"]),
        )
        for rb in data["robots"]
    )
    return Scenario(
        name=data["name"],
        obstacles=tuple(obstacle_from_dict(o) for o in data["obstacles"]),
        robots=robots,
        sampling=SamplingParams(**data["sampling"]),
        seed=data["seed"],
    )


def save_scenario(sc: Scenario, path) -> None:
    with open(path, "w") as f:
        json.dump(scenario_to_dict(sc), f, indent=1)
        f.write("\n")


def load_scenario(path) -> Scenario:
    with open(path) as f:
        return scenario_from_dict(json.load(f))
