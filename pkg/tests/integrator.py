"""Independent fixed-step RK4 integrator of the unit-speed motion model.

Used as the oracle for steering closure: it replays a path's segment
list as a curvature-rate control signal and integrates

    [x', y', theta', kappa'] = [cos(theta), sin(theta), kappa, rate]

without using any of the package's closed-form propagation.
"""

import math

from fdrrt.steering import Arc, Clothoid, Line


def _segment_rate(seg):
    if isinstance(seg, Clothoid):
        return seg.curvature_rate
    return 0.0


def integrate_path(path, max_step=0.0125):
    """Final (x, y, theta, kappa) after integrating the whole path."""
    x = path.start.x
    y = path.start.y
    th = path.start.theta
    ka = path.start.kappa
    for seg in path.segments:
        rate = _segment_rate(seg)
        if isinstance(seg, Line):
            ka = 0.0
        elif isinstance(seg, Arc):
            ka = seg.curvature
        n = max(8, int(math.ceil(seg.length / max_step)))
        h = seg.length / n
        for _ in range(n):
            k1x = math.cos(th)
            k1y = math.sin(th)
            k1t = ka
            th2 = th + 0.5 * h * k1t
            ka2 = ka + 0.5 * h * rate
            k2x = math.cos(th2)
            k2y = math.sin(th2)
            k2t = ka2
            th3 = th + 0.5 * h * k2t
            k3x = math.cos(th3)
            k3y = math.sin(th3)
            k3t = ka + 0.5 * h * rate
            th4 = th + h * k3t
            ka4 = ka + h * rate
            k4x = math.cos(th4)
            k4y = math.sin(th4)
            k4t = ka4
            x += h * (k1x + 2.0 * k2x + 2.0 * k3x + k4x) / 6.0
            y += h * (k1y + 2.0 * k2y + 2.0 * k3y + k4y) / 6.0
            th += h * (k1t + 2.0 * k2t + 2.0 * k3t + k4t) / 6.0
            ka += h * rate
    return x, y, th, ka


def closure_errors(path, target):
    """Position, heading, and curvature error of the integrated endpoint."""
    x, y, th, ka = integrate_path(path)
    pos_err = math.hypot(x - target.x, y - target.y)
    ang_err = abs((th - target.theta + math.pi) % (2.0 * math.pi) - math.pi)
    kappa_err = abs(ka - target.kappa)
    return pos_err, ang_err, kappa_err
