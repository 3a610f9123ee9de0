"""Forward-only, curvature-continuous local steering.

Paths are built from line, circular-arc, and clothoid segments under the
unit-speed motion model

    dx/ds = cos(theta),  dy/ds = sin(theta),  dtheta/ds = kappa,
    dkappa/ds = rate,

with |kappa| bounded by the robot's kappa_max and |rate| by sigma_max.
The steering family is Dubins-like: an optional clothoid ramp off the
start curvature, two curvature-symmetric turns joined by a straight
segment, and a ramp onto the goal curvature. Turn deflections are solved
per turn-direction word by bracketed root finding, so the family is
deterministic but deliberately incomplete: a query it cannot solve simply
reports no path, which roadmap construction treats as a skipped
connection.
"""

from __future__ import annotations

import bisect
import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Optional, Union

import numpy as np
from scipy.optimize import brentq
from scipy.special import fresnel

from .geometry import Configuration, RobotProfile, wrap_angle

TWO_PI = 2.0 * math.pi

# internal acceptance tolerances for a constructed path; well inside the
# 1e-6 m / 1e-6 rad closure contract
_POS_TOL = 1e-8
_ANG_TOL = 1e-9
_LEN_EPS = 1e-12


@dataclass(frozen=True)
class Line:
    length: float


@dataclass(frozen=True)
class Arc:
    curvature: float
    length: float


@dataclass(frozen=True)
class Clothoid:
    start_curvature: float
    curvature_rate: float
    length: float


Segment = Union[Line, Arc, Clothoid]


def segment_to_list(seg: Segment) -> list:
    if isinstance(seg, Line):
        return ["line", seg.length]
    if isinstance(seg, Arc):
        return ["arc", seg.curvature, seg.length]
    return ["clothoid", seg.start_curvature, seg.curvature_rate, seg.length]


def segment_from_list(data: list) -> Segment:
    kind = data[0]
    if kind == "line":
        return Line(data[1])
    if kind == "arc":
        return Arc(data[1], data[2])
    if kind == "clothoid":
        return Clothoid(data[1], data[2], data[3])
    raise ValueError(f"unknown segment kind {kind!r}")


# ---------------------------------------------------------------------------
# Exact propagation
# ---------------------------------------------------------------------------

def _fresnel_cs(b: float, upper):
    """Integrals of cos(b*u^2) and sin(b*u^2) over [0, upper]."""
    scale = math.sqrt(math.pi / (2.0 * abs(b)))
    s, c = fresnel(upper / scale)
    if b < 0:
        return scale * c, -scale * s
    return scale * c, scale * s


def _clothoid_displacement(kappa0: float, rate: float, length):
    """Local-frame displacement and heading change of a clothoid.

    Start pose is the origin with heading 0 and curvature kappa0;
    `length` may be a scalar or an ndarray of arc lengths.
    """
    b = 0.5 * rate
    u0 = kappa0 / rate
    phi0 = -kappa0 * kappa0 / (2.0 * rate)
    c1, s1 = _fresnel_cs(b, u0 + length)
    c0, s0 = _fresnel_cs(b, u0)
    dc = c1 - c0
    ds = s1 - s0
    cos_p = math.cos(phi0)
    sin_p = math.sin(phi0)
    dx = cos_p * dc - sin_p * ds
    dy = sin_p * dc + cos_p * ds
    dtheta = kappa0 * length + b * length * length
    return dx, dy, dtheta


def _advance_segment(x, y, theta, kappa, seg: Segment, s: float):
    """State after arc length s along a segment starting at (x, y, theta, kappa)."""
    if s == 0.0:
        return x, y, theta, kappa
    if isinstance(seg, Line):
        return x + s * math.cos(theta), y + s * math.sin(theta), theta, kappa
    if isinstance(seg, Arc):
        k = seg.curvature
        t1 = theta + k * s
        return (x + (math.sin(t1) - math.sin(theta)) / k,
                y + (math.cos(theta) - math.cos(t1)) / k,
                t1, kappa)
    k0 = seg.start_curvature
    rate = seg.curvature_rate
    dx, dy, dth = _clothoid_displacement(k0, rate, s)
    ct = math.cos(theta)
    st = math.sin(theta)
    return (x + ct * dx - st * dy,
            y + st * dx + ct * dy,
            theta + dth,
            k0 + rate * s)


class LocalPath:
    """Forward-only curvature-continuous path between two configurations.

    Segment start states are cached at construction, so querying the
    state at an arbitrary arc length is exact and cheap. Instances are
    immutable.
    """

    __slots__ = ("start", "segments", "end", "total_length", "_cum", "_seg_states")

    def __init__(self, start: Configuration, segments):
        self.start = start
        self.segments = tuple(segments)
        states = [(start.x, start.y, start.theta, start.kappa)]
        cum = [0.0]
        x, y, th, ka = states[0]
        total = 0.0
        for seg in self.segments:
            x, y, th, ka = _advance_segment(x, y, th, ka, seg, seg.length)
            total += seg.length
            states.append((x, y, th, ka))
            cum.append(total)
        self._seg_states = states
        self._cum = cum
        self.total_length = total
        ex, ey, eth, eka = states[-1]
        self.end = Configuration(ex, ey, eth, eka)

    def __repr__(self):
        return (f"LocalPath(len={self.total_length:.3f}, "
                f"segments={len(self.segments)})")

    def __eq__(self, other):
        return (isinstance(other, LocalPath) and self.start == other.start
                and self.segments == other.segments)

    def __hash__(self):
        return hash((self.start, self.segments))

    def state_at(self, s: float):
        """Raw (x, y, theta, kappa) at arc length s; theta is unwrapped."""
        if s <= 0.0:
            return self._seg_states[0]
        if s >= self.total_length:
            return self._seg_states[-1]
        i = bisect.bisect_right(self._cum, s) - 1
        if i >= len(self.segments):
            return self._seg_states[-1]
        x, y, th, ka = self._seg_states[i]
        return _advance_segment(x, y, th, ka, self.segments[i], s - self._cum[i])

    def config_at(self, s: float) -> Configuration:
        x, y, th, ka = self.state_at(s)
        return Configuration(x, y, th, ka)

    def curvature_bounds_ok(self, profile: RobotProfile, tol: float = 1e-9) -> bool:
        for seg in self.segments:
            if isinstance(seg, Line):
                continue
            if isinstance(seg, Arc):
                if abs(seg.curvature) > profile.kappa_max + tol:
                    return False
                continue
            k_end = seg.start_curvature + seg.curvature_rate * seg.length
            if max(abs(seg.start_curvature), abs(k_end)) > profile.kappa_max + tol:
                return False
            if abs(seg.curvature_rate) > profile.sigma_max + tol:
                return False
        return True


def sample_path(path: LocalPath, ds: float) -> list[Configuration]:
    """Configurations at arc lengths 0, ds, 2ds, ... plus the endpoint."""
    if ds <= 0:
        raise ValueError("ds must be positive")
    total = path.total_length
    out = []
    k = 0
    while k * ds < total:
        out.append(path.config_at(k * ds))
        k += 1
    out.append(path.config_at(total))
    return out


def is_reachable(q1: Configuration, q2: Configuration, path: LocalPath, r: float) -> bool:
    """Directed connectability test.

    True iff the connecting path fits the connection radius and the
    target lies strictly in the forward half-plane of the source heading.
    """
    if path.total_length > r:
        return False
    dx = q2.x - q1.x
    dy = q2.y - q1.y
    return dx * math.cos(q1.theta) + dy * math.sin(q1.theta) > 0.0


# ---------------------------------------------------------------------------
# Canonical turn geometry
# ---------------------------------------------------------------------------

class _TurnGeometry:
    """Displacement table for a left-hand curvature-symmetric turn.

    A turn ramps curvature 0 -> kp -> 0 at the maximum rate, with a
    circular arc at kp = kappa_max inserted once the requested deflection
    exceeds what the two clothoids alone provide. All quantities are for
    a turn starting at the origin with heading 0; a turn of deflection
    delta ends at heading delta with zero curvature.
    """

    def __init__(self, kappa_max: float, sigma: float):
        self.kappa_max = kappa_max
        self.sigma = sigma
        self.lc = kappa_max / sigma
        self.delta_min = kappa_max * kappa_max / sigma  # deflection of the ramp pair
        dx, dy, dth = _clothoid_displacement(0.0, sigma, self.lc)
        self.c1 = (dx, dy)          # entry clothoid endpoint
        self.theta_c = dth          # = delta_min / 2
        # arc center for the full-peak regime
        self.omega = (dx - math.sin(dth) / kappa_max,
                      dy + math.cos(dth) / kappa_max)
        # exit clothoid displacement in its own frame
        self.d2_full = _clothoid_displacement(kappa_max, -sigma, self.lc)[:2]

    def end(self, delta):
        """Endpoint (x, y) of a left turn with deflection delta (ndarray ok)."""
        delta = np.asarray(delta, dtype=float)
        scalar = delta.ndim == 0
        delta = np.atleast_1d(delta)
        x = np.empty_like(delta)
        y = np.empty_like(delta)
        full = delta >= self.delta_min
        if np.any(full):
            beta = delta[full] - self.delta_min
            cb = np.cos(beta)
            sb = np.sin(beta)
            ox, oy = self.omega
            c1x = self.c1[0] - ox
            c1y = self.c1[1] - oy
            # rotate the entry-clothoid endpoint about the arc center, then
            # append the rigid exit clothoid at the post-arc heading
            mx = ox + cb * c1x - sb * c1y
            my = oy + sb * c1x + cb * c1y
            h = self.theta_c + beta
            ch = np.cos(h)
            sh = np.sin(h)
            ex, ey = self.d2_full
            x[full] = mx + ch * ex - sh * ey
            y[full] = my + sh * ex + ch * ey
        small = ~full
        if np.any(small):
            d = delta[small]
            # elementary turn: clothoid pair 0 -> kp -> 0 with kp = sqrt(d*sigma),
            # each piece of length kp/sigma deflecting d/2
            kp = np.sqrt(np.maximum(d, 0.0) * self.sigma)
            ln = kp / self.sigma
            scale = math.sqrt(math.pi / self.sigma)  # sqrt(pi/(2b)), b = sigma/2
            fs, fc = fresnel(ln / scale)
            fc = scale * fc     # int_0^ln cos(sigma u^2 / 2) du
            fs = scale * fs     # int_0^ln sin(sigma u^2 / 2) du
            half = 0.5 * d
            ch = np.cos(half)
            sh = np.sin(half)
            # second piece in its own frame: rate -sigma from kappa = kp; its
            # phase angle is +d/2 and its Fresnel interval mirrors the first
            x2 = ch * fc + sh * fs
            y2 = sh * fc - ch * fs
            x[small] = fc + ch * x2 - sh * y2
            y[small] = fs + sh * x2 + ch * y2
        if scalar:
            return float(x[0]), float(y[0])
        return x, y

    def end_scalar(self, delta: float) -> tuple[float, float]:
        """Scalar fast path of :meth:`end` for root refinement."""
        if delta >= self.delta_min:
            beta = delta - self.delta_min
            cb = math.cos(beta)
            sb = math.sin(beta)
            ox, oy = self.omega
            c1x = self.c1[0] - ox
            c1y = self.c1[1] - oy
            mx = ox + cb * c1x - sb * c1y
            my = oy + sb * c1x + cb * c1y
            h = self.theta_c + beta
            ch = math.cos(h)
            sh = math.sin(h)
            ex, ey = self.d2_full
            return mx + ch * ex - sh * ey, my + sh * ex + ch * ey
        kp = math.sqrt(max(delta, 0.0) * self.sigma)
        ln = kp / self.sigma
        scale = math.sqrt(math.pi / self.sigma)
        fs, fc = fresnel(ln / scale)
        fc = scale * float(fc)
        fs = scale * float(fs)
        half = 0.5 * delta
        ch = math.cos(half)
        sh = math.sin(half)
        x2 = ch * fc + sh * fs
        y2 = sh * fc - ch * fs
        return fc + ch * x2 - sh * y2, fs + sh * x2 + ch * y2

    def length(self, delta):
        delta = np.asarray(delta, dtype=float)
        full_len = 2.0 * self.lc + (delta - self.delta_min) / self.kappa_max
        small_len = 2.0 * np.sqrt(np.maximum(delta, 0.0) / self.sigma)
        return np.where(delta >= self.delta_min, full_len, small_len)

    def length_scalar(self, delta: float) -> float:
        if delta >= self.delta_min:
            return 2.0 * self.lc + (delta - self.delta_min) / self.kappa_max
        return 2.0 * math.sqrt(max(delta, 0.0) / self.sigma)

    def _build_table(self, n: int = 2048) -> None:
        grid = np.linspace(0.0, TWO_PI, n + 1)
        x, y = self.end(grid)
        self._tab_step = TWO_PI / n
        self._tab_x = x
        self._tab_y = y
        self._tab_len = np.asarray(self.length(grid), dtype=float)

    def end_interp(self, delta):
        """Approximate endpoints for bracketing; roots are re-solved exactly."""
        if not hasattr(self, "_tab_x"):
            self._build_table()
        pos = np.clip(delta, 0.0, TWO_PI) / self._tab_step
        idx = np.minimum(pos.astype(int), len(self._tab_x) - 2)
        frac = pos - idx
        x = self._tab_x[idx] * (1.0 - frac) + self._tab_x[idx + 1] * frac
        y = self._tab_y[idx] * (1.0 - frac) + self._tab_y[idx + 1] * frac
        ln = self._tab_len[idx] * (1.0 - frac) + self._tab_len[idx + 1] * frac
        return x, y, ln

    def segments(self, delta: float, direction: float) -> list[Segment]:
        """Segment list of a turn with deflection delta > 0 and sign direction."""
        sg = self.sigma * direction
        if delta >= self.delta_min:
            out: list[Segment] = [Clothoid(0.0, sg, self.lc)]
            arc_len = (delta - self.delta_min) / self.kappa_max
            if arc_len > _LEN_EPS:
                out.append(Arc(self.kappa_max * direction, arc_len))
            out.append(Clothoid(self.kappa_max * direction, -sg, self.lc))
            return out
        kp = math.sqrt(delta * self.sigma)
        ln = kp / self.sigma
        if ln <= _LEN_EPS:
            return []
        return [Clothoid(0.0, sg, ln), Clothoid(kp * direction, -sg, ln)]


@lru_cache(maxsize=64)
def _turn_geometry(kappa_max: float, sigma: float) -> _TurnGeometry:
    return _TurnGeometry(kappa_max, sigma)


# ---------------------------------------------------------------------------
# Word search
# ---------------------------------------------------------------------------

_DELTA_GRID = np.concatenate([
    np.geomspace(1e-9, 0.05, 10),
    np.linspace(0.06, TWO_PI - 0.06, 112),
    TWO_PI - np.geomspace(0.05, 1e-9, 10)[::-1],
])

_WORDS = ((1.0, 1.0), (1.0, -1.0), (-1.0, 1.0), (-1.0, -1.0))


def _word_candidates(geom: _TurnGeometry, x2: float, y2: float, th2: float,
                     max_length: Optional[float]):
    """Turn-straight-turn candidates (length, d1, e1, s, d2, e2).

    Brackets are located on an interpolated turn table, ordered by their
    estimated path length, and refined lazily with exact arithmetic; once
    a refined candidate is clearly shorter than every remaining estimate
    the rest are dropped.
    """
    brackets = []
    for e1, e2 in _WORDS:
        # the second deflection wraps at d1 = (e1*th2) mod 2pi; pin grid
        # points to both sides so roots next to the wrap stay bracketed
        wrap_at = (e1 * th2) % TWO_PI
        if 1e-8 < wrap_at < TWO_PI - 1e-8:
            d1 = np.sort(np.concatenate(
                [_DELTA_GRID, [wrap_at - 1e-9, wrap_at + 1e-9]]))
        else:
            d1 = _DELTA_GRID
        d2 = np.mod(e2 * (th2 - e1 * d1), TWO_PI)
        h1 = e1 * d1
        tx, ty, len1 = geom.end_interp(d1)
        p1x = tx
        p1y = e1 * ty
        ux = np.cos(h1)
        uy = np.sin(h1)
        t2x, t2y, len2 = geom.end_interp(d2)
        t2y = e2 * t2y
        d2x = ux * t2x - uy * t2y
        d2y = uy * t2x + ux * t2y
        wx = x2 - p1x - d2x
        wy = y2 - p1y - d2y
        g = ux * wy - uy * wx
        s = ux * wx + uy * wy
        wrap = np.abs(np.diff(d2)) > math.pi
        sign = np.sign(g)
        lengths = len1 + len2 + np.maximum(s, 0.0)
        for i in np.nonzero((sign[:-1] * sign[1:] < 0) & ~wrap)[0]:
            est = min(lengths[i], lengths[i + 1])
            if max_length is not None and est > max_length * 1.5:
                continue
            brackets.append((float(est), float(d1[i]), float(d1[i + 1]), e1, e2))
    brackets.sort(key=lambda b: b[0])

    cands = []
    best = math.inf
    for est, lo, hi, e1, e2 in brackets:
        if est > best + 0.25:
            break

        def g_of(dd, _e1=e1, _e2=e2):
            dd2 = (_e2 * (th2 - _e1 * dd)) % TWO_PI
            hh = _e1 * dd
            pax, pay = geom.end_scalar(dd)
            pay *= _e1
            cu = math.cos(hh)
            su = math.sin(hh)
            bx, by = geom.end_scalar(dd2)
            by *= _e2
            wwx = x2 - pax - (cu * bx - su * by)
            wwy = y2 - pay - (su * bx + cu * by)
            return cu * wwy - su * wwx

        try:
            root = brentq(g_of, lo, hi, xtol=5e-13)
        except ValueError:
            continue
        dd2 = (e2 * (th2 - e1 * root)) % TWO_PI
        hh = e1 * root
        pax, pay = geom.end_scalar(root)
        pay *= e1
        cu, su = math.cos(hh), math.sin(hh)
        bx, by = geom.end_scalar(dd2)
        by *= e2
        wwx = x2 - pax - (cu * bx - su * by)
        wwy = y2 - pay - (su * bx + cu * by)
        straight = cu * wwx + su * wwy
        if straight < -1e-9:
            continue
        straight = max(straight, 0.0)
        total = geom.length_scalar(root) + geom.length_scalar(dd2) + straight
        best = min(best, total)
        cands.append((total, root, e1, straight, dd2, e2))
    return cands


def _exact_word_candidates(geom: _TurnGeometry, x2: float, y2: float, th2: float):
    """Zero-root special cases: straight-only, turn-only, and turn+straight."""
    cands = []
    # pure straight
    if abs(wrap_angle(th2)) < _ANG_TOL and abs(y2) < _POS_TOL and x2 >= 0.0:
        cands.append((x2, 0.0, 1.0, x2, 0.0, 1.0))
    for e1 in (1.0, -1.0):
        d1 = (e1 * th2) % TWO_PI
        if d1 < 1e-12:
            continue
        pax, pay = geom.end_scalar(d1)
        pay *= e1
        cu, su = math.cos(th2), math.sin(th2)
        wx = x2 - pax
        wy = y2 - pay
        # turn then straight: remainder must lie along the exit heading
        if abs(cu * wy - su * wx) < _POS_TOL:
            straight = cu * wx + su * wy
            if straight >= -1e-9:
                straight = max(straight, 0.0)
                cands.append((geom.length_scalar(d1) + straight, d1, e1,
                              straight, 0.0, 1.0))
        # straight then turn: the turn displacement seen from the start axis
        if abs(y2 - pay) < _POS_TOL:
            straight = x2 - pax
            if straight >= -1e-9:
                straight = max(straight, 0.0)
                cands.append((geom.length_scalar(d1) + straight, 0.0, 1.0,
                              straight, d1, e1))
    return cands


def _assemble(geom: _TurnGeometry, start: Configuration, cand,
              pre: list[Segment], post: list[Segment]) -> LocalPath:
    _total, d1, e1, straight, d2, e2 = cand
    segs = list(pre)
    if d1 > 1e-12:
        segs.extend(geom.segments(d1, e1))
    if straight > _LEN_EPS:
        segs.append(Line(straight))
    if d2 > 1e-12:
        segs.extend(geom.segments(d2, e2))
    segs.extend(post)
    return LocalPath(start, segs)


def steer(q1: Configuration, q2: Configuration, profile: RobotProfile,
          max_length: Optional[float] = None) -> Optional[LocalPath]:
    """Connect two configurations with a curvature-continuous forward path.

    Returns None when the implemented path family has no solution (or
    none within max_length); callers treat that as a skipped connection.
    """
    if q1 == q2:
        return LocalPath(q1, ())
    sigma = profile.sigma_max

    pre: list[Segment] = []
    x1, y1, th1, k1 = q1.x, q1.y, q1.theta, q1.kappa
    if abs(k1) > 1e-15:
        ln = abs(k1) / sigma
        seg = Clothoid(k1, -math.copysign(sigma, k1), ln)
        pre.append(seg)
        x1, y1, th1, k1 = _advance_segment(x1, y1, th1, k1, seg, ln)

    post: list[Segment] = []
    x2, y2, th2, k2 = q2.x, q2.y, q2.theta, q2.kappa
    if abs(k2) > 1e-15:
        rate = math.copysign(sigma, k2)
        ln = abs(k2) / sigma
        seg = Clothoid(0.0, rate, ln)
        post.append(seg)
        dx, dy, dth = _clothoid_displacement(0.0, rate, ln)
        th2 = th2 - dth
        x2 = x2 - math.cos(th2) * dx + math.sin(th2) * dy
        y2 = y2 - math.sin(th2) * dx - math.cos(th2) * dy

    # express the ramp-free subproblem in the frame of the adjusted start
    ct = math.cos(th1)
    st = math.sin(th1)
    rx = x2 - x1
    ry = y2 - y1
    tx = ct * rx + st * ry
    ty = -st * rx + ct * ry
    tth = wrap_angle(th2 - th1)

    budget = max_length
    ramp_len = sum(s.length for s in pre) + sum(s.length for s in post)
    geom = _turn_geometry(profile.kappa_max, sigma)
    cands = _exact_word_candidates(geom, tx, ty, tth)
    cands.extend(_word_candidates(geom, tx, ty, tth, budget))
    cands.sort(key=lambda c: c[0])
    for cand in cands:
        if budget is not None and cand[0] + ramp_len > budget * 1.25:
            continue
        path = _assemble(geom, q1, cand, pre, post)
        e = path.end
        if (math.hypot(e.x - q2.x, e.y - q2.y) <= _POS_TOL
                and abs(wrap_angle(e.theta - q2.theta)) <= _ANG_TOL
                and abs(e.kappa - q2.kappa) <= 1e-9):
            return path
    return None
