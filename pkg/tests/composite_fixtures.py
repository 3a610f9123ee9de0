"""Hand-built roadmaps with straight-line edges for planner tests.

Keeping the geometry on exact grid lines makes every conflict in the
composite space predictable by inspection.
"""

import math

from fdrrt.geometry import Configuration, DiskFootprint, RobotProfile
from fdrrt.roadmap import LocalRoadmap, SamplingParams, cost_to_goal
from fdrrt.steering import Line, LocalPath


def disk_profile(radius=0.4, r=100.0):
    return RobotProfile("disk", DiskFootprint(radius), 1.0, 3.0, r, 2)


def chain_roadmap(points, profile=None, extra_edges=()):
    """Roadmap whose vertices are waypoints joined by straight edges.

    Vertex 0 is the start, the last vertex is the goal. `extra_edges` is
    an iterable of (u, v) pairs to connect on top of the chain.
    """
    profile = profile or disk_profile()
    vertices = []
    for k, (x, y) in enumerate(points):
        if k + 1 < len(points):
            nx, ny = points[k + 1]
            theta = math.atan2(ny - y, nx - x)
        vertices.append(Configuration(x, y, theta, 0.0))
    edges = [{} for _ in vertices]
    pairs = list(zip(range(len(points) - 1), range(1, len(points)))) + list(extra_edges)
    for u, v in pairs:
        qa, qb = vertices[u], vertices[v]
        length = math.hypot(qb.x - qa.x, qb.y - qa.y)
        start = Configuration(qa.x, qa.y, math.atan2(qb.y - qa.y, qb.x - qa.x), 0.0)
        edges[u][v] = LocalPath(start, [Line(length)])
    rm = LocalRoadmap(vertices, edges, [], len(vertices) - 1, profile,
                      SamplingParams(rng_seed=0))
    rm.heuristic = cost_to_goal(rm)
    return rm


def crossing_pair(radius=0.4):
    """Two 20 m routes crossing at (10, 0); greedy lockstep collides there."""
    prof = disk_profile(radius)
    rm_a = chain_roadmap([(0, 0), (5, 0), (10, 0), (15, 0), (20, 0)], prof)
    rm_b = chain_roadmap([(10, -10), (10, -5), (10, 0), (10, 5), (10, 10)], prof)
    return [rm_a, rm_b]


def swap_pair(radius=0.4):
    """Two robots exchanging endpoints along the same segment."""
    prof = disk_profile(radius)
    rm_a = chain_roadmap([(0, 0), (5, 0)], prof)
    rm_b = chain_roadmap([(5, 0), (0, 0)], prof)
    return [rm_a, rm_b]


def crossing_pair_with_skips(radius=0.4):
    """Crossing routes with skip edges so either robot can change pace.

    Without redundant edges a chain roadmap forces every robot to advance
    in lockstep and the no-force baseline cannot desynchronize them.
    """
    prof = disk_profile(radius)
    pts_a = [(2.5 * k, 0) for k in range(9)]
    pts_b = [(10, -10 + 2.5 * k) for k in range(9)]
    skips = [(k, k + 2) for k in range(7)]
    rm_a = chain_roadmap(pts_a, prof, extra_edges=skips)
    rm_b = chain_roadmap(pts_b, prof, extra_edges=skips)
    return [rm_a, rm_b]
