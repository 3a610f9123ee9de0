"""Independent soundness audit of composite plans.

Deliberately avoids the planner's cached samplers and pruning tricks: it
re-samples every pairwise interaction of every plan step from scratch at
a multiple of the planner's density and re-measures path lengths from
the raw segment lists. Used by the benchmark harness to validate every
reported plan.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

from .geometry import footprint_at, shapes_intersect
from .planner import CompositePlan, default_edge_samples
from .steering import Arc, Clothoid, Line

AUDIT_DENSITY_FACTOR = 4


@dataclass
class AuditReport:
    violations: list = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.violations


def _step_samples(plan: CompositePlan, step: int, m: int):
    """Synchronized configurations of every robot at step's m+1 fractions."""
    out = []
    for traj in plan.robots:
        motion = traj.motions[step]
        if motion is None:
            out.append([traj.waypoints[step]] * (m + 1))
        else:
            total = motion.total_length
            out.append([motion.config_at(total * k / m) for k in range(m + 1)])
    return out


def audit_plan(plan: CompositePlan, profiles,
               density_factor: int = AUDIT_DENSITY_FACTOR) -> AuditReport:
    """Re-check inter-robot separation and plan structure from scratch."""
    report = AuditReport()
    n = len(plan.robots)
    horizon = plan.horizon
    for traj in plan.robots:
        if len(traj.motions) != horizon or len(traj.waypoints) != horizon + 1:
            report.violations.append(("structure", "unequal plan lengths"))
            return report
    for step in range(horizon):
        longest = 0.0
        for traj in plan.robots:
            m_path = traj.motions[step]
            if m_path is not None:
                longest = max(longest, m_path.total_length)
        m = default_edge_samples(longest) * density_factor
        samples = _step_samples(plan, step, m)
        for i in range(n):
            for j in range(i + 1, n):
                for k in range(m + 1):
                    if shapes_intersect(footprint_at(profiles[i], samples[i][k]),
                                        footprint_at(profiles[j], samples[j][k])):
                        report.violations.append(
                            ("collision", step, i, j, k / m))
                        break
        # hold steps must keep the configuration bitwise identical
        for i, traj in enumerate(plan.robots):
            if traj.motions[step] is None:
                if traj.waypoints[step] != traj.waypoints[step + 1]:
                    report.violations.append(("hold", step, i))
            else:
                end = traj.motions[step].end
                w = traj.waypoints[step + 1]
                if math.hypot(end.x - w.x, end.y - w.y) > 1e-6:
                    report.violations.append(("waypoint_mismatch", step, i))
    return report


def audit_curvature(plan: CompositePlan, profiles,
                    kappa_slack: float = 1e-6,
                    rate_slack: float = 1e-3,
                    ds: float = 0.05) -> AuditReport:
    """Check curvature and curvature-rate bounds along every motion."""
    report = AuditReport()
    for i, traj in enumerate(plan.robots):
        prof = profiles[i]
        for t, motion in enumerate(traj.motions):
            if motion is None:
                continue
            prev_s = 0.0
            prev_k = motion.config_at(0.0).kappa
            if abs(prev_k) > prof.kappa_max + kappa_slack:
                report.violations.append(("kappa", i, t, 0.0))
            s = ds
            while True:
                s_eval = min(s, motion.total_length)
                k = motion.config_at(s_eval).kappa
                if abs(k) > prof.kappa_max + kappa_slack:
                    report.violations.append(("kappa", i, t, s_eval))
                    break
                if s_eval > prev_s:
                    rate = abs(k - prev_k) / (s_eval - prev_s)
                    if rate > prof.sigma_max + rate_slack:
                        report.violations.append(("rate", i, t, s_eval))
                        break
                prev_s, prev_k = s_eval, k
                if s_eval >= motion.total_length:
                    break
                s += ds
    return report


def remeasure_length(plan: CompositePlan) -> float:
    """Plan length recomputed from the raw segment lists."""
    total = 0.0
    for traj in plan.robots:
        for motion in traj.motions:
            if motion is None:
                continue
            for seg in motion.segments:
                if isinstance(seg, (Line, Arc, Clothoid)):
                    total += seg.length
    return total
