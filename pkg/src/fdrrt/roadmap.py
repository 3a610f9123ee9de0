"""Directed local roadmaps for a single kinematically constrained robot.

A roadmap is built by sampling configurations along a reference path with
Gaussian noise, attempting steering connections in both directions against
every existing vertex, keeping only collision-free connections that pass
the reachability test, and finally pruning every vertex that cannot reach
the goal. The cost-to-goal table H doubles as the central planner's
direction heuristic.
"""

from __future__ import annotations

import heapq
import json
import math
from dataclasses import asdict, dataclass

import numpy as np

from .geometry import (
    Configuration,
    DiskFootprint,
    DiskObstacle,
    PolygonObstacle,
    RectangleFootprint,
    RobotProfile,
    collision_step,
    config_in_collision,
    path_in_collision,
    wrap_angle,
)
from .steering import LocalPath, is_reachable, segment_from_list, segment_to_list, steer

FORMAT_VERSION = 1
DUPLICATE_TOL = 1e-6


class GoalUnreachable(RuntimeError):
    """The goal has no incoming path after the sampling budget."""


class NoReferencePath(RuntimeError):
    """Start and goal cannot be joined by the steering family."""


@dataclass(frozen=True)
class SamplingParams:
    """Noise magnitudes for sampling around the reference path."""

    lateral_noise_sigma: float = 0.3
    heading_noise_sigma: float = 0.1
    curvature_noise_sigma: float = 0.05
    rng_seed: int = 0

    def __post_init__(self):
        if min(self.lateral_noise_sigma, self.heading_noise_sigma,
               self.curvature_noise_sigma) < 0:
            raise ValueError("noise sigmas must be non-negative")


class LocalRoadmap:
    """Directed roadmap with per-edge local paths and cost-to-goal values.

    Vertex 0 is always the start configuration; `goal_vertex` indexes the
    goal. Immutable by convention once built.
    """

    def __init__(self, vertices, edges, heuristic, goal_vertex, profile, params):
        self.vertices: list[Configuration] = list(vertices)
        self.edges: list[dict[int, LocalPath]] = [dict(e) for e in edges]
        self.heuristic: list[float] = list(heuristic)
        self.goal_vertex: int = goal_vertex
        self.profile: RobotProfile = profile
        self.params: SamplingParams = params

    def __eq__(self, other):
        return (isinstance(other, LocalRoadmap)
                and self.vertices == other.vertices
                and self.edges == other.edges
                and self.heuristic == other.heuristic
                and self.goal_vertex == other.goal_vertex
                and self.profile == other.profile
                and self.params == other.params)

    def __repr__(self):
        n_edges = sum(len(e) for e in self.edges)
        return f"LocalRoadmap({len(self.vertices)} vertices, {n_edges} edges)"

    @property
    def size(self) -> int:
        return len(self.vertices)

    def out_neighbors(self, v: int) -> list[int]:
        return sorted(self.edges[v])

    def edge_path(self, u: int, v: int) -> LocalPath:
        return self.edges[u][v]

    def edge_length(self, u: int, v: int) -> float:
        return self.edges[u][v].total_length


def join_paths(paths: list[LocalPath]) -> LocalPath:
    segments = []
    for p in paths:
        segments.extend(p.segments)
    return LocalPath(paths[0].start, segments)


def reference_path(q_init: Configuration, q_goal: Configuration,
                   profile: RobotProfile, obstacles=(), via_points=(),
                   check_collision: bool = True) -> LocalPath:
    """Steer through the optional via points to build the sampling spine.

    Roadmap construction samples along an unchecked spine (colliding
    samples and edges are rejected individually), so it passes
    check_collision=False; standalone callers get the collision-free
    guarantee by default.
    """
    waypoints = [q_init, *via_points, q_goal]
    legs = []
    for a, b in zip(waypoints[:-1], waypoints[1:]):
        leg = steer(a, b, profile)
        if leg is None:
            raise NoReferencePath(f"no steering connection {a.as_tuple()} -> {b.as_tuple()}")
        legs.append(leg)
    path = join_paths(legs)
    if check_collision and path_in_collision(profile, path, obstacles,
                                             collision_step(profile)):
        raise NoReferencePath("reference path collides with obstacles")
    return path


def random_config(pi_sample: LocalPath, params: SamplingParams,
                  profile: RobotProfile, rng=None) -> Configuration:
    """Sample uniformly along the reference path with additive noise.

    Deterministic for a given rng state; when no generator is supplied a
    fresh one is seeded from params.rng_seed.
    """
    if pi_sample.total_length <= 0:
        raise ValueError("reference path must have positive length")
    if rng is None:
        rng = np.random.default_rng(params.rng_seed)
    s = rng.uniform(0.0, pi_sample.total_length)
    base = pi_sample.config_at(s)
    lat = rng.normal(0.0, params.lateral_noise_sigma)
    dth = rng.normal(0.0, params.heading_noise_sigma)
    dka = rng.normal(0.0, params.curvature_noise_sigma)
    nx = -math.sin(base.theta)
    ny = math.cos(base.theta)
    kappa = min(max(base.kappa + dka, -profile.kappa_max), profile.kappa_max)
    return Configuration(base.x + lat * nx, base.y + lat * ny,
                         wrap_angle(base.theta + dth), kappa)


def cost_to_goal(roadmap: LocalRoadmap) -> list[float]:
    """Exact shortest directed path length from every vertex to the goal.

    Dijkstra on the reversed graph, weighted by local path lengths. The
    central planner compares edge cost plus heuristic, so hop counts
    would not do.
    """
    n = len(roadmap.vertices)
    reverse: list[list[tuple[int, float]]] = [[] for _ in range(n)]
    for u in range(n):
        for v, path in roadmap.edges[u].items():
            reverse[v].append((u, path.total_length))
    dist = [math.inf] * n
    dist[roadmap.goal_vertex] = 0.0
    heap = [(0.0, roadmap.goal_vertex)]
    while heap:
        d, v = heapq.heappop(heap)
        if d > dist[v]:
            continue
        for u, w in reverse[v]:
            nd = d + w
            if nd < dist[u]:
                dist[u] = nd
                heapq.heappush(heap, (nd, u))
    return dist


def prune_dead_nodes(roadmap: LocalRoadmap) -> LocalRoadmap:
    """Drop every vertex with no directed path to the goal."""
    h = roadmap.heuristic
    if not h:
        h = cost_to_goal(roadmap)
    if math.isinf(h[0]):
        raise GoalUnreachable("start vertex has no path to goal")
    keep = [i for i in range(len(roadmap.vertices)) if math.isfinite(h[i])]
    remap = {old: new for new, old in enumerate(keep)}
    vertices = [roadmap.vertices[i] for i in keep]
    edges = []
    for old in keep:
        edges.append({remap[v]: p for v, p in roadmap.edges[old].items() if v in remap})
    heuristic = [h[i] for i in keep]
    return LocalRoadmap(vertices, edges, heuristic, remap[roadmap.goal_vertex],
                        roadmap.profile, roadmap.params)


def _attempt_connection(rm: LocalRoadmap, u: int, v: int, obstacles, step: float) -> None:
    qa = rm.vertices[u]
    qb = rm.vertices[v]
    # necessary conditions for reachability, checked before steering
    dx = qb.x - qa.x
    dy = qb.y - qa.y
    r = rm.profile.connection_radius_r
    if dx * dx + dy * dy > r * r:
        return
    if dx * math.cos(qa.theta) + dy * math.sin(qa.theta) <= 0.0:
        return
    path = steer(qa, qb, rm.profile, max_length=r)
    if path is None:
        return
    if not is_reachable(qa, qb, path, r):
        return
    if path_in_collision(rm.profile, path, obstacles, step):
        return
    rm.edges[u][v] = path


def build_roadmap(q_init: Configuration, q_goal: Configuration,
                  profile: RobotProfile, obstacles, params: SamplingParams,
                  via_points=()) -> LocalRoadmap:
    """Build, score, and prune a local roadmap of exactly N vertices.

    The goal is inserted as a vertex up front (the composite query cannot
    terminate without it) and participates in connection attempts exactly
    like a sampled configuration.
    """
    profile.check_config(q_init)
    profile.check_config(q_goal)
    obstacles = list(obstacles)
    spine = reference_path(q_init, q_goal, profile, obstacles, via_points,
                           check_collision=False)
    step = collision_step(profile)
    rng = np.random.default_rng(params.rng_seed)

    rm = LocalRoadmap([q_init], [{}], [], 1, profile, params)

    def insert(q: Configuration) -> None:
        new = len(rm.vertices)
        rm.vertices.append(q)
        rm.edges.append({})
        for v in range(new):
            _attempt_connection(rm, v, new, obstacles, step)
            _attempt_connection(rm, new, v, obstacles, step)

    insert(q_goal)
    # via points seed the roadmap: exact spine configurations that bridge
    # the sparsely sampled turn regions (they count toward N)
    for via in via_points:
        if not config_in_collision(profile, via, obstacles):
            insert(via)

    n_target = profile.roadmap_size_n
    attempts = 0
    max_attempts = 400 * n_target
    while len(rm.vertices) < n_target:
        attempts += 1
        if attempts > max_attempts:
            raise GoalUnreachable(
                f"sampling budget exhausted at {len(rm.vertices)} of {n_target} vertices")
        q = random_config(spine, params, profile, rng)
        if any(abs(q.x - v.x) <= DUPLICATE_TOL and abs(q.y - v.y) <= DUPLICATE_TOL
               and abs(wrap_angle(q.theta - v.theta)) <= DUPLICATE_TOL
               and abs(q.kappa - v.kappa) <= DUPLICATE_TOL for v in rm.vertices):
            continue
        if config_in_collision(profile, q, obstacles):
            continue
        insert(q)

    rm.heuristic = cost_to_goal(rm)
    if math.isinf(rm.heuristic[0]):
        raise GoalUnreachable("no directed path from start to goal after sampling")
    return prune_dead_nodes(rm)


# ---------------------------------------------------------------------------
# Persistence
# ---------------------------------------------------------------------------

def _footprint_to_dict(fp):
    if isinstance(fp, RectangleFootprint):
        return {"type": "rectangle", "length": fp.length, "width": fp.width}
    return {"type": "disk", "radius": fp.radius}


def _footprint_from_dict(d):
    if d["type"] == "rectangle":
        return RectangleFootprint(d["length"], d["width"])
    if d["type"] == "disk":
        return DiskFootprint(d["radius"])
    raise ValueError(f"unknown footprint type {d['type']!r}")


def profile_to_dict(profile: RobotProfile) -> dict:
    return {
        "id": profile.id,
        "footprint": _footprint_to_dict(profile.footprint),
        "kappa_max": profile.kappa_max,
        "sigma_max": profile.sigma_max,
        "connection_radius_r": profile.connection_radius_r,
        "roadmap_size_n": profile.roadmap_size_n,
    }


def profile_from_dict(d: dict) -> RobotProfile:
    return RobotProfile(
        id=d["id"],
        footprint=_footprint_from_dict(d["footprint"]),
        kappa_max=d["kappa_max"],
        sigma_max=d["sigma_max"],
        connection_radius_r=d["connection_radius_r"],
        roadmap_size_n=d["roadmap_size_n"],
    )


def obstacle_to_dict(obs):
    if isinstance(obs, DiskObstacle):
        return {"type": "disk", "center": list(obs.center), "radius": obs.radius}
    return {"type": "polygon", "vertices": [list(v) for v in obs.vertices]}


def obstacle_from_dict(d):
    if d["type"] == "disk":
        return DiskObstacle((d["center"][0], d["center"][1]), d["radius"])
    if d["type"] == "polygon":
        return PolygonObstacle(tuple((v[0], v[1]) for v in d["vertices"]))
    raise ValueError(f"unknown obstacle type {d['type']!r}")


def roadmap_to_dict(rm: LocalRoadmap) -> dict:
    edges = []
    for u in range(len(rm.vertices)):
        for v in sorted(rm.edges[u]):
            path = rm.edges[u][v]
            edges.append({
                "from": u,
                "to": v,
                "length": path.total_length,
                "segments": [segment_to_list(s) for s in path.segments],
            })
    return {
        "format_version": FORMAT_VERSION,
        "vertices": [list(q.as_tuple()) for q in rm.vertices],
        "edges": edges,
        "heuristic": rm.heuristic,
        "goal_vertex": rm.goal_vertex,
        "provenance": {
            "profile": profile_to_dict(rm.profile),
            "sampling": asdict(rm.params),
        },
    }


def roadmap_from_dict(data: dict) -> LocalRoadmap:
    if data.get("format_version") != FORMAT_VERSION:
        raise ValueError("unsupported roadmap format version")
    vertices = [Configuration(*v) for v in data["vertices"]]
    edges: list[dict[int, LocalPath]] = [{} for _ in vertices]
    for e in data["edges"]:
        segs = [segment_from_list(s) for s in e["segments"]]
        edges[e["from"]][e["to"]] = LocalPath(vertices[e["from"]], segs)
    prov = data["provenance"]
    return LocalRoadmap(
        vertices, edges, list(data["heuristic"]), data["goal_vertex"],
        profile_from_dict(prov["profile"]),
        SamplingParams(**prov["sampling"]),
    )


def save_roadmap(rm: LocalRoadmap, path) -> None:
    with open(path, "w") as f:
        json.dump(roadmap_to_dict(rm), f)
        f.write("\n")


def load_roadmap(path) -> LocalRoadmap:
    with open(path) as f:
        return roadmap_from_dict(json.load(f))
