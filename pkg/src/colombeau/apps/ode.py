"""x'' = f(x) delta(t) regularized by a test function, and its solution as a representative."""

import csv
import io
import math
import threading
from collections import OrderedDict
from dataclasses import dataclass

import numpy as np
from scipy.interpolate import CubicHermiteSpline

from ..asymptotics import classify, default_battery
from ..errors import UsageError
from ..formalism import Representative
from ..numerics import Box
from ..sweep import EpsLadder
from ..testobjects import scale

T0 = -1.0
STEPS_PER_RADIUS = 256


@dataclass(frozen=True, eq=False)
class Trajectory:
    t: np.ndarray
    x: np.ndarray
    xdot: np.ndarray
    eps: float
    mollifier_id: str = ""
    window: tuple = (T0, T0)

    @property
    def velocity_jump(self):
        return float(self.xdot[-1] - self.xdot[0])

    def to_csv(self):
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["t", "x", "xdot"])
        for row in zip(self.t, self.x, self.xdot):
            w.writerow([repr(float(v)) for v in row])
        return buf.getvalue()


def _forcing_window(phi):
    """Support of t -> phi(-t) and its natural step (support radius / 256)."""
    lo, hi = float(phi.box.lo[0]), float(phi.box.hi[0])
    radius = max(abs(lo), abs(hi))
    return -hi, -lo, radius / STEPS_PER_RADIUS


def _rk4_window(f, x, v, t_nodes, phi):
    """RK4 for x' = v, v' = f(x) phi(-t) on the given nodes; forcing sampled in one vectorized call."""
    dt = t_nodes[1] - t_nodes[0]
    m = len(t_nodes) - 1
    stage = np.concatenate([t_nodes, t_nodes[:-1] + 0.5 * dt])
    g = np.real(phi(-stage[:, None]))
    g_node, g_mid = g[: m + 1], g[m + 1:]
    xs, vs = np.empty(m + 1), np.empty(m + 1)
    xs[0], vs[0] = x, v
    for k in range(m):
        g0, gh, g1 = g_node[k], g_mid[k], g_node[k + 1]
        k1x, k1v = v, f(x) * g0
        k2x, k2v = v + 0.5 * dt * k1v, f(x + 0.5 * dt * k1x) * gh
        k3x, k3v = v + 0.5 * dt * k2v, f(x + 0.5 * dt * k2x) * gh
        k4x, k4v = v + dt * k3v, f(x + dt * k3x) * g1
        x = x + dt / 6.0 * (k1x + 2 * k2x + 2 * k3x + k4x)
        v = v + dt / 6.0 * (k1v + 2 * k2v + 2 * k3v + k4v)
        xs[k + 1], vs[k + 1] = x, v
    return xs, vs


def _check_support(a, b, t_end):
    if not (T0 < a and b < t_end):
        raise UsageError(f"forcing support [{a:g}, {b:g}] must lie inside ({T0:g}, {t_end:g}); shrink eps")


def solve_delta_ode(f, x0, xdot0, phi, eps, t_end=1.0, dt=None, label=""):
    """Classical RK4 for x'' = f(x) S_eps phi(-t) on [-1, t_end] with x(-1) = x0, x'(-1) = xdot0.

    Step: at most min(eps/64, support radius/256).

    Outside the forcing support the motion is linear and is written in closed form.
    """
    sphi = scale(phi, eps)
    a, b, dt_max = _forcing_window(sphi)
    dt_max = min(dt_max, eps / 64.0)
    _check_support(a, b, t_end)
    if dt is not None and dt > dt_max * (1 + 1e-12):
        raise UsageError(f"dt={dt:g} exceeds the resolution limit {dt_max:g} (min of eps/64, support radius/256)")
    dt = dt or dt_max
    nsteps = int(math.ceil((t_end - T0) / dt))
    dt = (t_end - T0) / nsteps
    t = T0 + dt * np.arange(nsteps + 1)
    ka = max(0, int(math.floor((a - T0) / dt)))
    kb = min(nsteps, int(math.ceil((b - T0) / dt)))
    x = x0 + xdot0 * (t - T0)
    v = np.full(t.shape, float(xdot0))
    xs, vs = _rk4_window(f, x[ka], v[ka], t[ka:kb + 1], sphi)
    x[ka:kb + 1], v[ka:kb + 1] = xs, vs
    x[kb + 1:] = xs[-1] + vs[-1] * (t[kb + 1:] - t[kb])
    v[kb + 1:] = vs[-1]
    return Trajectory(t, x, v, float(eps), label or phi.label, (t[ka], t[kb]))


class _WindowSolution:
    """Solution data for one forcing: linear before/after the window, Hermite spline inside."""

    def __init__(self, f, x0, xdot0, phi, t_end):
        a, b, dt = _forcing_window(phi)
        _check_support(a, b, t_end)
        m = max(8, int(math.ceil((b - a) / dt)))
        self.t = np.linspace(a, b, m + 1)
        self.x0, self.v0 = x0, xdot0
        xa = x0 + xdot0 * (a - T0)
        self.x, self.v = _rk4_window(f, xa, xdot0, self.t, phi)
        self.spline = CubicHermiteSpline(self.t, self.x, self.v)

    def __call__(self, t):
        a, b = self.t[0], self.t[-1]
        if t <= a:
            return self.x0 + self.v0 * (t - T0)
        if t >= b:
            return self.x[-1] + self.v[-1] * (t - b)
        return float(self.spline(t))


def ode_representative(f, x0, xdot0, t_end=1.0, cache_size=256):
    """R(phi, t): value at t of the solution driven by t -> phi(-t) (C-formalism).

    Solutions are cached per forcing, so sweeps over t with a fixed phi solve once.
    """
    cache, lock = OrderedDict(), threading.Lock()

    def fn(phi, t):
        t = float(np.atleast_1d(t)[0])
        if not (T0 <= t <= t_end):
            raise UsageError(f"t={t:g} outside [{T0:g}, {t_end:g}]")
        key = (phi.box.lo, phi.box.hi, phi.n, hash(np.ascontiguousarray(phi.values).tobytes()))
        with lock:
            sol = cache.get(key)
            if sol is not None:
                cache.move_to_end(key)
        if sol is None:
            sol = _WindowSolution(f, x0, xdot0, phi, t_end)
            with lock:
                cache[key] = sol
                while len(cache) > cache_size:
                    cache.popitem(last=False)
        return sol(t)

    return Representative(fn, "C", None, "ode-solution", (), {"x0": x0, "xdot0": xdot0, "t_end": t_end})


def ode_moderateness_probe(f, x0, xdot0, battery=None, K_time=None, ladder=None, t_end=1.0, q=0,
                           x_nodes=17):
    """classify(moderate) for the solution representative over K_time."""
    K_time = K_time or Box(-0.5, 0.5)
    ladder = ladder or EpsLadder(0.5, 0.5, 7)
    battery = battery or default_battery(q)
    rep = ode_representative(f, x0, xdot0, t_end)
    return classify(rep, battery, [K_time], mode="moderate", ladder=ladder, x_nodes=x_nodes)
