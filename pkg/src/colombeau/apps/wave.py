"""Semilinear wave equation (d_t^2 - Laplace) u = F(u) + H with u = 0 for t <= -eta.

3D: Picard iteration of the retarded (Kirchhoff) integral
    u(x, t) = int_0^{t+eta} rho <G(x + rho w, t - rho)>_{S^2} d rho,   G = F(u) + H,
with a Lebedev sphere rule and the trapezoid rule in rho on a coarse space-time grid.
1D: the d'Alembert analog u = 1/2 int int_{|y-x| <= t-s} G(y, s) dy ds.
"""

import csv
import io
from dataclasses import dataclass, field

import numpy as np
from scipy.integrate import cumulative_trapezoid, lebedev_rule
from scipy.interpolate import RegularGridInterpolator

from ..errors import IterationError, UsageError
from ..numerics import Box

DEFAULT_ETA = 0.1


def sphere_rule(order=11):
    """Lebedev nodes (m, 3) and weights normalized to mean value (sum 1)."""
    x, w = lebedev_rule(order)
    return x.T, w / w.sum()


def _trapezoid_weights(k, dt):
    w = np.full(k + 1, dt)
    w[0] = w[-1] = 0.5 * dt
    return w


def contraction_bound(lip, t_end, eta=DEFAULT_ETA):
    """Lip(F) T^2 / 2 with T = t_end + eta: bound on successive residual ratios."""
    return lip * (t_end + eta) ** 2 / 2.0


def _check_F(F):
    if abs(float(np.asarray(F(np.zeros(1)))[0])) != 0.0:
        raise UsageError("the nonlinearity must satisfy F(0) = 0")


@dataclass(eq=False)
class WaveField:
    axes: list
    t: np.ndarray
    values: np.ndarray
    eps: float = None
    iteration_residuals: list = field(default_factory=list)
    F: object = None
    H: object = None
    eta: float = DEFAULT_ETA

    @property
    def dim(self):
        return len(self.axes)

    def _interpolator(self):
        return RegularGridInterpolator((*self.axes, self.t), self.values, bounds_error=False, fill_value=0.0)

    def __call__(self, pts, t):
        """Grid interpolation; exactly 0 for t <= -eta and outside the box."""
        pts = np.atleast_2d(np.asarray(pts, float))
        t = np.broadcast_to(np.asarray(t, float), pts.shape[:-1])
        out = self._interpolator()(np.concatenate([pts, t[..., None]], axis=-1))
        return np.where(t <= -self.eta, 0.0, out)

    def source(self, pts, t):
        """G = F(u) + H at arbitrary points, u from grid interpolation."""
        return self.F(self(pts, t)) + self.H(pts, t)

    def probe(self, pts, t, n_rho=129, sphere_order=41):
        """One more retarded-integral application at the given points with a fine rule."""
        if self.dim != 3:
            raise UsageError("probe is implemented for the 3D field")
        pts = np.atleast_2d(np.asarray(pts, float))
        if t <= -self.eta:
            return np.zeros(len(pts))
        nodes, w = sphere_rule(sphere_order)
        rho = np.linspace(0.0, t + self.eta, n_rho)
        wr = _trapezoid_weights(n_rho - 1, rho[1] - rho[0]) * rho
        out = np.zeros(len(pts))
        for r, wj in zip(rho[1:], wr[1:]):
            y = pts[:, None, :] + r * nodes[None, :, :]
            out += wj * (self.source(y, np.full(y.shape[:-1], t - r)) @ w)
        return out

    def to_csv(self):
        buf = io.StringIO()
        wr = csv.writer(buf, lineterminator="\n")
        names = ["x1", "x2", "x3"][: self.dim] if self.dim > 1 else ["x"]
        wr.writerow(names + ["t", "u"])
        mesh = np.meshgrid(*self.axes, self.t, indexing="ij")
        for row in zip(*(m.ravel() for m in mesh), self.values.ravel()):
            wr.writerow([repr(float(v)) for v in row])
        return buf.getvalue()


def _picard(step, shape, max_iter, tol):
    u = np.zeros(shape)
    residuals = []
    for _ in range(max_iter):
        new = step(u)
        residuals.append(float(np.max(np.abs(new - u))))
        u = new
        if residuals[-1] <= tol:
            return u, residuals
    raise IterationError(f"no convergence in {max_iter} iterations (last residual {residuals[-1]:.3e})",
                         residuals)


def solve_wave_kirchhoff(F, H, space=None, t_end=1.0, eta=DEFAULT_ETA, nx=9, nt=10, max_iter=30,
                         tol=1e-10, sphere_order=11, eps=None, source_radius=None):
    """Picard iteration of the 3D retarded integral on a coarse grid.

    H(pts, t) is the regularized source (pts (..., 3), t broadcastable); if `eps`
    is given, H is a family and H(eps) is used.  `source_radius` R0 bounds the
    spatial support of H and enforces a box half-width >= R0 + t_end + eta.
    """
    _check_F(F)
    if eps is not None:
        H = H(eps)
    space = space or Box.cube(1.0 + t_end + eta, 3)
    if space.dim != 3:
        raise UsageError("the Kirchhoff solver works in three space dimensions")
    if source_radius is not None:
        need = source_radius + t_end + eta
        if np.any(np.maximum(np.abs(space.lo_arr), np.abs(space.hi_arr)) < need - 1e-12):
            raise UsageError(f"space box must reach {need:g} to contain the domain of dependence")
    nodes, sw = sphere_rule(sphere_order)
    axes = space.axes(nx)
    t = np.linspace(-eta, t_end, nt + 1)
    dt = t[1] - t[0]
    X = np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1).reshape(-1, 3)

    def step(u):
        interp = RegularGridInterpolator((*axes, t), u, bounds_error=False, fill_value=0.0)
        new = np.zeros_like(u)
        for k in range(1, nt + 1):
            rho = dt * np.arange(k + 1)
            w = _trapezoid_weights(k, dt) * rho
            y = X[:, None, None, :] + rho[None, :, None, None] * nodes[None, None, :, :]
            s = np.broadcast_to((t[k] - rho)[None, :, None], y.shape[:-1])
            G = F(interp(np.concatenate([y, s[..., None]], axis=-1))) + H(y, s)
            new[..., k] = ((G @ sw) @ w).reshape(u.shape[:-1])
        return new

    u, res = _picard(step, (nx, nx, nx, nt + 1), max_iter, tol)
    return WaveField(axes, t, u, eps, res, F, H, eta)


def retarded_potential_reference(H, x, t, support, n=64, eta=DEFAULT_ETA):
    """Brute-force volume quadrature of H(y, t - |x - y|) / (4 pi |x - y|) over a source box (F = 0)."""
    axes = [a + (np.arange(n) + 0.5) * (b - a) / n for a, b in zip(support.lo, support.hi)]
    cell = float(np.prod(support.width)) / n**3
    Y = np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1).reshape(-1, 3)
    out = []
    for p in np.atleast_2d(np.asarray(x, float)):
        r = np.linalg.norm(Y - p, axis=-1)
        s = t - r
        live = (s > -eta) & (r > 0)
        vals = H(Y[live], s[live]) / (4 * np.pi * r[live])
        out.append(cell * vals.sum())
    return np.array(out)


def solve_wave_1d(F, H, space=None, t_end=1.0, eta=DEFAULT_ETA, nx=201, max_iter=50, tol=1e-12):
    """d'Alembert analog on a grid with dx = dt; outside the box the field is taken as 0."""
    _check_F(F)
    space = space or Box(-3.0, 3.0)
    x = np.linspace(space.lo[0], space.hi[0], nx)
    dx = x[1] - x[0]
    nt = int(np.ceil((t_end + eta) / dx))
    t = -eta + dx * np.arange(nt + 1)
    Hval = H(x[:, None], t[None, :])
    idx = np.arange(nx)

    def window(C, i, d):
        lo, hi = i - d, i + d
        c_hi = np.where(hi >= nx, C[-1], C[np.clip(hi, 0, nx - 1)])
        c_lo = np.where(lo < 0, 0.0, C[np.clip(lo, 0, nx - 1)])
        return c_hi - c_lo

    def step(u):
        G = F(u) + Hval
        C = cumulative_trapezoid(G, dx=dx, axis=0, initial=0.0)
        new = np.zeros_like(u)
        for k in range(1, nt + 1):
            w = _trapezoid_weights(k, dx)
            acc = np.zeros(nx)
            for l in range(k + 1):
                acc += w[l] * window(C[:, l], idx, k - l)
            new[:, k] = 0.5 * acc
        return new

    u, res = _picard(step, (nx, nt + 1), max_iter, tol)
    return WaveField([x], t, u, None, res, F, H, eta)
