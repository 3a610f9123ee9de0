"""Central multi-robot planner over the implicit tensor-product roadmap.

Two query algorithms share one expansion engine:

* ``fdrrt`` resolves blocked expansions by forcing a hybrid transition in
  which prioritized robots advance along their local edges while the rest
  hold position.
* ``drrt_star_baseline`` reports an expansion failure instead, falling
  back to random sampling, and returns the first solution it finds.

A composite vertex is a tuple of per-robot roadmap vertex indices. Every
composite transition advances each moving robot along one roadmap edge
per time step (holds stay put), and inter-robot collision checks sample
all robots at the same arc-length fraction of their own edges.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .geometry import (
    Configuration,
    PlacedPolygon,
    RectangleFootprint,
    footprint_at,
    shapes_intersect,
)
from .roadmap import LocalRoadmap
from .steering import LocalPath

CompositeVertex = tuple  # tuple[int, ...], one roadmap vertex index per robot

DEFAULT_SAMPLE_SPACING = 0.1
MIN_EDGE_SAMPLES = 10


@dataclass(frozen=True)
class PlannerLimits:
    max_iterations: int = 100_000
    max_wall_time_ms: float = 60_000.0


def default_edge_samples(longest_edge: float,
                         spacing: float = DEFAULT_SAMPLE_SPACING) -> int:
    """Samples per composite transition for inter-robot checks."""
    return max(MIN_EDGE_SAMPLES, int(math.ceil(longest_edge / spacing)))


# ---------------------------------------------------------------------------
# Collision checking over synchronized edge fractions
# ---------------------------------------------------------------------------

class EdgeSampler:
    """Caches per-edge footprint sample tracks at a given sample count."""

    def __init__(self, roadmaps: Sequence[LocalRoadmap]):
        self.roadmaps = list(roadmaps)
        self.profiles = [rm.profile for rm in self.roadmaps]
        self.circum = [p.footprint.circumradius for p in self.profiles]
        self.is_disk = [not isinstance(p.footprint, RectangleFootprint)
                        for p in self.profiles]
        self._cache: dict = {}
        self._static_cache: dict = {}
        self.relation_cache: dict = {}
        self.transition_cache: dict = {}

    def track(self, robot: int, u: int, v: int, m: int):
        """(positions, configs, bounding circle) for robot's edge u -> v."""
        key = (robot, u, v, m)
        hit = self._cache.get(key)
        if hit is not None:
            return hit
        rm = self.roadmaps[robot]
        if u == v:
            q = rm.vertices[u]
            pos = np.tile((q.x, q.y), (m + 1, 1))
            configs = [q] * (m + 1)
        else:
            path = rm.edges[u][v]
            total = path.total_length
            configs = [path.config_at(total * k / m) for k in range(m + 1)]
            pos = np.array([(q.x, q.y) for q in configs])
        cx = 0.5 * (pos[:, 0].min() + pos[:, 0].max())
        cy = 0.5 * (pos[:, 1].min() + pos[:, 1].max())
        rad = math.sqrt(((pos[:, 0] - cx) ** 2 + (pos[:, 1] - cy) ** 2).max())
        out = (pos, configs, (cx, cy, rad + self.circum[robot]))
        self._cache[key] = out
        return out

    def static_point(self, robot: int, u: int):
        key = (robot, u)
        hit = self._static_cache.get(key)
        if hit is None:
            q = self.roadmaps[robot].vertices[u]
            hit = (np.array([[q.x, q.y]]), [q],
                   (q.x, q.y, self.circum[robot]))
            self._static_cache[key] = hit
        return hit

    def pair_clear(self, i, track_i, j, track_j) -> bool:
        """True iff robots i and j never intersect over synchronized samples."""
        pos_i, cfg_i, (ax, ay, ar) = track_i
        pos_j, cfg_j, (bx, by, br) = track_j
        if math.hypot(ax - bx, ay - by) > ar + br:
            return True
        rr = self.circum[i] + self.circum[j]
        d2 = np.sum((pos_i - pos_j) ** 2, axis=1)
        close = d2 <= rr * rr
        if not close.any():
            return True
        if self.is_disk[i] and self.is_disk[j]:
            return False  # circumradius test is exact for two disks
        prof_i = self.profiles[i]
        prof_j = self.profiles[j]
        for k in np.nonzero(close)[0]:
            if shapes_intersect(footprint_at(prof_i, cfg_i[k]),
                                footprint_at(prof_j, cfg_j[k])):
                return False
        return True


def composite_edge_collision_free(v_from: CompositeVertex, v_to: CompositeVertex,
                                  move_flags: Sequence[bool],
                                  roadmaps: Sequence[LocalRoadmap],
                                  profiles=None,
                                  time_samples_m: Optional[int] = None,
                                  sampler: Optional[EdgeSampler] = None) -> bool:
    """Inter-robot soundness of one composite transition.

    Every moving robot is at arc-length fraction m/M of its own edge at
    sample m; held robots stay at their configuration. Static obstacles
    are not re-checked here, the roadmaps guarantee those per edge.
    """
    if sampler is None:
        sampler = EdgeSampler(roadmaps)
    n = len(v_from)
    key = None
    if time_samples_m is None:
        key = (v_from, v_to, tuple(move_flags))
        hit = sampler.transition_cache.get(key)
        if hit is not None:
            return hit
        longest = 0.0
        for i in range(n):
            if move_flags[i]:
                longest = max(longest, roadmaps[i].edge_length(v_from[i], v_to[i]))
        time_samples_m = default_edge_samples(longest)
    m = time_samples_m
    tracks = []
    for i in range(n):
        if move_flags[i]:
            tracks.append(sampler.track(i, v_from[i], v_to[i], m))
        else:
            pos, cfg, circle = sampler.static_point(i, v_from[i])
            tracks.append((np.broadcast_to(pos, (m + 1, 2)), cfg * (m + 1),
                           circle))
    result = True
    for i in range(n):
        for j in range(i + 1, n):
            if not sampler.pair_clear(i, tracks[i], j, tracks[j]):
                result = False
                break
        if not result:
            break
    if key is not None:
        sampler.transition_cache[key] = result
    return result


# ---------------------------------------------------------------------------
# Search tree
# ---------------------------------------------------------------------------

class SearchTree:
    """Tree over composite vertices, implicitly embedded in the roadmaps."""

    def __init__(self, root: CompositeVertex, roadmaps: Sequence[LocalRoadmap]):
        self.n_robots = len(root)
        self.vertex_positions = [
            np.array([[q.x, q.y] for q in rm.vertices]) for rm in roadmaps
        ]
        self.parent: dict = {root: None}
        self.moved: dict = {root: None}
        self.cost: dict = {root: 0.0}
        self.order: list = [root]
        # inverted index: per robot, roadmap vertex -> set of tree node ids
        self.by_robot_vertex: list[dict[int, set]] = [
            {root[i]: {0}} for i in range(self.n_robots)
        ]
        self.node_id: dict = {root: 0}

    def __contains__(self, v: CompositeVertex) -> bool:
        return v in self.parent

    @property
    def size(self) -> int:
        return len(self.order)

    def add(self, v: CompositeVertex, parent: CompositeVertex,
            moved: tuple, step_cost: float) -> None:
        if v in self.parent:
            raise ValueError("vertex already in tree")
        self.parent[v] = parent
        self.moved[v] = moved
        self.cost[v] = self.cost[parent] + step_cost
        nid = len(self.order)
        self.order.append(v)
        self.node_id[v] = nid
        for i in range(self.n_robots):
            self.by_robot_vertex[i].setdefault(v[i], set()).add(nid)

    def nearest(self, q_rand: CompositeVertex) -> CompositeVertex:
        """Tree node minimizing summed per-robot Euclidean distance."""
        total = np.zeros(len(self.order))
        idx = np.array([node for node in self.order], dtype=int)
        for i in range(self.n_robots):
            pos = self.vertex_positions[i][idx[:, i]]
            target = self.vertex_positions[i][q_rand[i]]
            total += np.hypot(pos[:, 0] - target[0], pos[:, 1] - target[1])
        return self.order[int(np.argmin(total))]

    def candidate_parents(self, v_new: CompositeVertex,
                          in_neighbors: list[dict[int, list[int]]]) -> list:
        """Tree nodes composite-adjacent to v_new (move or hold per robot)."""
        best: Optional[set] = None
        for i in range(self.n_robots):
            allowed = in_neighbors[i].get(v_new[i], [])
            ids: set = set()
            index = self.by_robot_vertex[i]
            for u in allowed:
                hit = index.get(u)
                if hit:
                    ids |= hit
            hit = index.get(v_new[i])
            if hit:
                ids |= hit
            if best is None:
                best = ids
            else:
                best &= ids
            if not best:
                return []
        assert best is not None
        return [self.order[nid] for nid in sorted(best)
                if self.order[nid] != v_new]


# ---------------------------------------------------------------------------
# Direction oracle
# ---------------------------------------------------------------------------

def direction_oracle(v_near: CompositeVertex, q_rand: CompositeVertex,
                     roadmaps: Sequence[LocalRoadmap],
                     heuristics: Sequence[Sequence[float]],
                     greedy: bool, rng) -> CompositeVertex:
    """Per-robot neighbor selection.

    Greedy mode picks the out-neighbor minimizing edge length plus
    cost-to-goal (the robot's own goal vertex may be kept); random mode
    picks a uniformly random out-neighbor. Ties break to the lowest
    vertex index.
    """
    out = []
    for i, rm in enumerate(roadmaps):
        v = v_near[i]
        nbrs = rm.out_neighbors(v)
        if greedy:
            h = heuristics[i]
            best_v = None
            best_cost = math.inf
            if v == rm.goal_vertex:
                best_v = v
                best_cost = 0.0
            for w in nbrs:
                c = rm.edge_length(v, w) + h[w]
                if best_v is None or c < best_cost:
                    best_cost = c
                    best_v = w
            out.append(best_v if best_v is not None else v)
        else:
            if not nbrs:
                out.append(v)
            else:
                out.append(nbrs[int(rng.integers(0, len(nbrs)))])
    return tuple(out)


# ---------------------------------------------------------------------------
# ForceConnect
# ---------------------------------------------------------------------------

@dataclass
class PriorityLedger:
    """Pairwise precedence bookkeeping for one forced connection."""

    higher: list[set] = field(default_factory=list)     # H_i
    lower: list[set] = field(default_factory=list)      # L_i
    undetermined: list[set] = field(default_factory=list)  # A_i

    @classmethod
    def empty(cls, n: int) -> "PriorityLedger":
        return cls([set() for _ in range(n)], [set() for _ in range(n)],
                   [set() for _ in range(n)])


def _blocks(sampler: EdgeSampler, i: int, start_cfg, j: int, track_j) -> bool:
    """Does robot i's start footprint intersect robot j's swept samples?"""
    pos_j, cfg_j, (bx, by, br) = track_j
    sx, sy = start_cfg.x, start_cfg.y
    if math.hypot(sx - bx, sy - by) > sampler.circum[i] + br:
        return False
    rr = sampler.circum[i] + sampler.circum[j]
    d2 = (pos_j[:, 0] - sx) ** 2 + (pos_j[:, 1] - sy) ** 2
    close = d2 <= rr * rr
    if not close.any():
        return False
    if sampler.is_disk[i] and sampler.is_disk[j]:
        return True
    shape_i = footprint_at(sampler.profiles[i], start_cfg)
    prof_j = sampler.profiles[j]
    for k in np.nonzero(close)[0]:
        if shapes_intersect(shape_i, footprint_at(prof_j, cfg_j[k])):
            return True
    return False


def _sweeps_overlap(sampler: EdgeSampler, i, track_i, j, track_j) -> bool:
    """Do the two swept sample sets intersect anywhere (not synchronized)?"""
    pos_i, cfg_i, (ax, ay, ar) = track_i
    pos_j, cfg_j, (bx, by, br) = track_j
    if math.hypot(ax - bx, ay - by) > ar + br:
        return False
    rr = sampler.circum[i] + sampler.circum[j]
    d2 = ((pos_i[:, None, 0] - pos_j[None, :, 0]) ** 2
          + (pos_i[:, None, 1] - pos_j[None, :, 1]) ** 2)
    close = d2 <= rr * rr
    if not close.any():
        return False
    if sampler.is_disk[i] and sampler.is_disk[j]:
        return True
    prof_i = sampler.profiles[i]
    prof_j = sampler.profiles[j]
    ks, ls = np.nonzero(close)
    for k, l in zip(ks, ls):
        if shapes_intersect(footprint_at(prof_i, cfg_i[k]),
                            footprint_at(prof_j, cfg_j[l])):
            return True
    return False


# pairwise relation codes for one forced connection
_REL_NONE = 0
_REL_I_PRIOR = 1
_REL_J_PRIOR = 2
_REL_MUTUAL = 3
_REL_UNDETERMINED = 4


def _pair_relation(sampler: EdgeSampler, roadmaps, i, edge_i, j, edge_j) -> int:
    """Cached interaction between robot i on edge_i and j on edge_j."""
    key = (i, edge_i, j, edge_j)
    hit = sampler.relation_cache.get(key)
    if hit is not None:
        return hit
    track_i = (sampler.static_point(i, edge_i[0]) if edge_i[0] == edge_i[1]
               else sampler.track(i, edge_i[0], edge_i[1], default_edge_samples(
                   roadmaps[i].edge_length(edge_i[0], edge_i[1]))))
    track_j = (sampler.static_point(j, edge_j[0]) if edge_j[0] == edge_j[1]
               else sampler.track(j, edge_j[0], edge_j[1], default_edge_samples(
                   roadmaps[j].edge_length(edge_j[0], edge_j[1]))))
    start_i = roadmaps[i].vertices[edge_i[0]]
    start_j = roadmaps[j].vertices[edge_j[0]]
    b_ij = _blocks(sampler, i, start_i, j, track_j)
    b_ji = _blocks(sampler, j, start_j, i, track_i)
    if b_ij and b_ji:
        rel = _REL_MUTUAL
    elif b_ij:
        rel = _REL_I_PRIOR
    elif b_ji:
        rel = _REL_J_PRIOR
    elif _sweeps_overlap(sampler, i, track_i, j, track_j):
        rel = _REL_UNDETERMINED
    else:
        rel = _REL_NONE
    sampler.relation_cache[key] = rel
    return rel


def build_priority_ledger(v_1: CompositeVertex, v_2: CompositeVertex,
                          roadmaps: Sequence[LocalRoadmap],
                          sampler: EdgeSampler) -> PriorityLedger:
    """Assign pairwise local priorities from path interactions.

    A robot whose start blocks another's path gets priority; mutual
    blocking leaves both behind (each lands in the other's higher set);
    overlapping paths whose starts are both clear go to the undetermined
    sets; disjoint paths do not interact.
    """
    n = len(v_1)
    ledger = PriorityLedger.empty(n)
    for i in range(n):
        for j in range(i + 1, n):
            rel = _pair_relation(sampler, roadmaps, i, (v_1[i], v_2[i]),
                                 j, (v_1[j], v_2[j]))
            if rel == _REL_MUTUAL:
                ledger.higher[i].add(j)
                ledger.higher[j].add(i)
            elif rel == _REL_I_PRIOR:
                ledger.higher[j].add(i)
                ledger.lower[i].add(j)
            elif rel == _REL_J_PRIOR:
                ledger.higher[i].add(j)
                ledger.lower[j].add(i)
            elif rel == _REL_UNDETERMINED:
                ledger.undetermined[i].add(j)
                ledger.undetermined[j].add(i)
    return ledger


def solution_set(ledger: PriorityLedger) -> set:
    """Robots allowed to advance.

    A robot advances when nothing outranks it and either it has no
    undetermined conflicts or it displaces no more robots than any of its
    undetermined partners (ties go to the lower robot index).
    """
    n = len(ledger.higher)
    s = set()
    for i in range(n):
        if ledger.higher[i]:
            continue
        a_i = ledger.undetermined[i]
        if not a_i:
            s.add(i)
            continue
        cost_i = len(a_i)
        if all(cost_i < len(ledger.undetermined[j])
               or (cost_i == len(ledger.undetermined[j]) and i < j)
               for j in a_i):
            s.add(i)
    return s


def force_connect(v_1: CompositeVertex, v_2: CompositeVertex,
                  roadmaps: Sequence[LocalRoadmap],
                  sampler: Optional[EdgeSampler] = None) -> Optional[CompositeVertex]:
    """Hybrid node where prioritized robots advance and the rest hold.

    Returns None when no robot may advance, when the hybrid node would
    be a no-op, or when the hybrid transition itself is not collision
    free.
    """
    if sampler is None:
        sampler = EdgeSampler(roadmaps)
    ledger = build_priority_ledger(v_1, v_2, roadmaps, sampler)
    s = solution_set(ledger)
    if not s:
        return None
    v_h = tuple(v_2[i] if i in s else v_1[i] for i in range(len(v_1)))
    if v_h == tuple(v_1):
        return None
    flags = tuple(v_h[i] != v_1[i] for i in range(len(v_1)))
    if not composite_edge_collision_free(v_1, v_h, flags, roadmaps,
                                         sampler=sampler):
        return None
    return v_h


# ---------------------------------------------------------------------------
# Expansion
# ---------------------------------------------------------------------------

class _Engine:
    """Shared expansion machinery for both query algorithms."""

    def __init__(self, roadmaps, heuristics, rng, force: bool):
        self.roadmaps = list(roadmaps)
        self.heuristics = list(heuristics)
        self.rng = rng
        self.force = force
        self.sampler = EdgeSampler(self.roadmaps)
        self.n = len(self.roadmaps)
        # in-neighbor lists per robot for candidate-parent lookup
        self.in_neighbors: list[dict[int, list[int]]] = []
        for rm in self.roadmaps:
            inn: dict[int, list[int]] = {}
            for u in range(len(rm.vertices)):
                for v in rm.edges[u]:
                    inn.setdefault(v, []).append(u)
            self.in_neighbors.append(inn)

    def transition_cost(self, v_from, v_to) -> float:
        c = 0.0
        for i in range(self.n):
            if v_from[i] != v_to[i]:
                c += self.roadmaps[i].edge_length(v_from[i], v_to[i])
        return c

    def expand(self, tree: SearchTree, v_last, q_f) -> Optional[CompositeVertex]:
        rng = self.rng
        if v_last is None:
            q_rand = tuple(int(rng.integers(0, len(rm.vertices)))
                           for rm in self.roadmaps)
            v_near = tree.nearest(q_rand)
            greedy = False
        else:
            q_rand = q_f
            v_near = v_last
            greedy = True
        v_new = direction_oracle(v_near, q_rand, self.roadmaps, self.heuristics,
                                 greedy, rng)
        if v_new in tree:
            # already reachable in the tree: hand it back as the next
            # greedy seed without mutating anything
            return None if v_new == v_near else v_new
        candidates = tree.candidate_parents(v_new, self.in_neighbors)
        if not candidates:
            return None
        scored = sorted(
            ((tree.cost[c] + self.transition_cost(c, v_new), tree.node_id[c], c)
             for c in candidates),
            key=lambda t: (t[0], t[1]),
        )
        v_best = scored[0][2]
        v_best_free = None
        for _cost, _nid, cand in scored:
            flags = tuple(cand[i] != v_new[i] for i in range(self.n))
            if composite_edge_collision_free(cand, v_new, flags, self.roadmaps,
                                             sampler=self.sampler):
                v_best_free = cand
                break
        if v_best_free is not None:
            flags = tuple(v_best_free[i] != v_new[i] for i in range(self.n))
            tree.add(v_new, v_best_free, flags,
                     self.transition_cost(v_best_free, v_new))
            return v_new
        if not self.force:
            return None
        v_h = force_connect(v_best, v_new, self.roadmaps, self.sampler)
        if v_h is None:
            return None
        if v_h in tree:
            # the hybrid adds nothing new and the tree is unchanged, so
            # returning it would pin the greedy walk to a fixed point;
            # fail instead and let the next iteration sample randomly
            return None
        flags = tuple(v_best[i] != v_h[i] for i in range(self.n))
        tree.add(v_h, v_best, flags, self.transition_cost(v_best, v_h))
        return v_h


def expand(tree: SearchTree, roadmaps, heuristics, v_last, q_f, rng,
           force: bool = True) -> Optional[CompositeVertex]:
    """One expansion step; see _Engine.expand for the shared machinery."""
    return _Engine(roadmaps, heuristics, rng, force).expand(tree, v_last, q_f)


# ---------------------------------------------------------------------------
# Plans
# ---------------------------------------------------------------------------

@dataclass
class RobotTrajectory:
    """Waypoints at uniform time steps plus the motion into each step."""

    waypoints: list[Configuration]
    motions: list[Optional[LocalPath]]  # None marks a hold step

    @property
    def length(self) -> float:
        return sum(m.total_length for m in self.motions if m is not None)


@dataclass
class CompositePlan:
    robots: list[RobotTrajectory]

    @property
    def horizon(self) -> int:
        return len(self.robots[0].motions)

    @property
    def total_length(self) -> float:
        return sum(r.length for r in self.robots)


@dataclass
class PlanResult:
    plan: Optional[CompositePlan]
    success: bool
    tree_size: int
    iterations: int
    wall_time_ms: float
    failure_reason: Optional[str] = None
    best_heuristic: Optional[float] = None

    @property
    def total_length(self) -> Optional[float]:
        return self.plan.total_length if self.plan is not None else None


def composite_start(roadmaps) -> CompositeVertex:
    return tuple(0 for _ in roadmaps)


def composite_goal(roadmaps) -> CompositeVertex:
    return tuple(rm.goal_vertex for rm in roadmaps)


def extract_plan(tree: SearchTree, q_i, q_f, roadmaps) -> CompositePlan:
    chain = [q_f]
    while chain[-1] != q_i:
        chain.append(tree.parent[chain[-1]])
    chain.reverse()
    robots = []
    for i, rm in enumerate(roadmaps):
        waypoints = [rm.vertices[v[i]] for v in chain]
        motions: list[Optional[LocalPath]] = []
        for a, b in zip(chain[:-1], chain[1:]):
            if a[i] == b[i]:
                motions.append(None)
            else:
                motions.append(rm.edges[a[i]][b[i]])
        robots.append(RobotTrajectory(waypoints, motions))
    return CompositePlan(robots)


def _best_heuristic(tree: SearchTree, heuristics) -> float:
    best = math.inf
    for v in tree.order:
        tot = sum(heuristics[i][v[i]] for i in range(len(v)))
        best = min(best, tot)
    return best


def _query(q_i, q_f, roadmaps, heuristics, limits, seed, force) -> PlanResult:
    if heuristics is None:
        heuristics = [rm.heuristic for rm in roadmaps]
    limits = limits or PlannerLimits()
    rng = np.random.default_rng(seed)
    engine = _Engine(roadmaps, heuristics, rng, force)
    tree = SearchTree(q_i, roadmaps)
    v_last: Optional[CompositeVertex] = q_i
    iterations = 0
    t0 = time.perf_counter()
    while q_f not in tree:
        if iterations >= limits.max_iterations:
            return PlanResult(None, False, tree.size, iterations,
                              (time.perf_counter() - t0) * 1e3,
                              "limit_exhausted",
                              _best_heuristic(tree, heuristics))
        if (limits.max_wall_time_ms
                and (time.perf_counter() - t0) * 1e3 > limits.max_wall_time_ms):
            return PlanResult(None, False, tree.size, iterations,
                              (time.perf_counter() - t0) * 1e3,
                              "limit_exhausted",
                              _best_heuristic(tree, heuristics))
        iterations += 1
        v_last = engine.expand(tree, v_last, q_f)
    wall = (time.perf_counter() - t0) * 1e3
    plan = extract_plan(tree, q_i, q_f, roadmaps)
    return PlanResult(plan, True, tree.size, iterations, wall)


def fdrrt(q_i, q_f, roadmaps, heuristics=None, limits=None, seed=0) -> PlanResult:
    """Forced-connection tensor-roadmap query."""
    return _query(q_i, q_f, roadmaps, heuristics, limits, seed, force=True)


def drrt_star_baseline(q_i, q_f, roadmaps, heuristics=None, limits=None,
                       seed=0) -> PlanResult:
    """Reference planner: identical expansion, no forced connections."""
    return _query(q_i, q_f, roadmaps, heuristics, limits, seed, force=False)
