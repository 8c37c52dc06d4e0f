"""Boxes, sampled test functions, quadrature, sup-norms and finite differences.

Point arrays follow one convention throughout the package: the trailing axis
holds the s coordinates, so a batch of m points in R^s has shape (m, s).
"""

from dataclasses import dataclass, field
from functools import lru_cache
import itertools
import math

import numpy as np
from scipy.integrate import simpson
from scipy.interpolate import RegularGridInterpolator
from scipy.special import comb

from .errors import DomainError, ResolutionError, UsageError

MIN_NODES = 16
DEFAULT_NODES = {1: 1024, 2: 128, 3: 48}


def default_nodes(dim):
    return DEFAULT_NODES[dim]


@dataclass(frozen=True)
class Box:
    """Axis-aligned box [lo, hi] in R^s.

    A box with lo == hi on some axis is allowed; it is used for point sets
    such as K = {0}.  Grids and domains require strictly positive widths.
    """

    lo: tuple
    hi: tuple

    def __post_init__(self):
        lo = tuple(float(v) for v in np.atleast_1d(self.lo))
        hi = tuple(float(v) for v in np.atleast_1d(self.hi))
        if len(lo) != len(hi) or not 1 <= len(lo) <= 3:
            raise UsageError(f"box bounds must share a length in 1..3, got {lo}, {hi}")
        if any(not (np.isfinite(a) and np.isfinite(b)) for a, b in zip(lo, hi)):
            raise UsageError("box bounds must be finite")
        if any(a > b for a, b in zip(lo, hi)):
            raise UsageError(f"box needs lo <= hi, got {lo}, {hi}")
        object.__setattr__(self, "lo", lo)
        object.__setattr__(self, "hi", hi)

    @classmethod
    def cube(cls, half_width, dim=1, center=None):
        c = np.zeros(dim) if center is None else np.broadcast_to(np.asarray(center, float), (dim,))
        return cls(c - half_width, c + half_width)

    @classmethod
    def point(cls, x):
        x = np.atleast_1d(np.asarray(x, float))
        return cls(x, x)

    @property
    def dim(self):
        return len(self.lo)

    @property
    def lo_arr(self):
        return np.array(self.lo)

    @property
    def hi_arr(self):
        return np.array(self.hi)

    @property
    def width(self):
        return self.hi_arr - self.lo_arr

    @property
    def center(self):
        return 0.5 * (self.lo_arr + self.hi_arr)

    @property
    def diam(self):
        return float(np.linalg.norm(self.width))

    @property
    def is_degenerate(self):
        return bool(np.any(self.width <= 0))

    def contains_points(self, pts, margin=0.0):
        pts = np.asarray(pts, float)
        return np.all((pts >= self.lo_arr + margin) & (pts <= self.hi_arr - margin), axis=-1)

    def contains_box(self, other, margin=0.0):
        """Closed inclusion of `other` in the box shrunk by `margin`."""
        return bool(np.all(other.lo_arr >= self.lo_arr + margin) and np.all(other.hi_arr <= self.hi_arr - margin))

    def inside_open(self, other, margin=0.0):
        """`other` lies in the open box with clearance strictly larger than `margin`."""
        return bool(np.all(other.lo_arr > self.lo_arr + margin) and np.all(other.hi_arr < self.hi_arr - margin))

    def intersect(self, other):
        lo = np.maximum(self.lo_arr, other.lo_arr)
        hi = np.minimum(self.hi_arr, other.hi_arr)
        if np.any(lo > hi):
            return None
        return Box(lo, hi)

    def union(self, other):
        return Box(np.minimum(self.lo_arr, other.lo_arr), np.maximum(self.hi_arr, other.hi_arr))

    def scaled(self, eps):
        a, b = eps * self.lo_arr, eps * self.hi_arr
        return Box(np.minimum(a, b), np.maximum(a, b))

    def shifted(self, x):
        x = np.broadcast_to(np.asarray(x, float), (self.dim,))
        return Box(self.lo_arr + x, self.hi_arr + x)

    def shrunk(self, fraction):
        """Concentric box whose widths are `fraction` of these."""
        half = 0.5 * fraction * self.width
        return Box(self.center - half, self.center + half)

    def axes(self, n):
        return [np.linspace(a, b, n) for a, b in zip(self.lo, self.hi)]

    def grid_points(self, n):
        """Tensor grid with `n` nodes per non-degenerate axis, shape (m, s)."""
        axes = [np.linspace(a, b, n) if b > a else np.array([a]) for a, b in zip(self.lo, self.hi)]
        mesh = np.meshgrid(*axes, indexing="ij")
        return np.stack([m.ravel() for m in mesh], axis=-1)

    def corners(self):
        return np.array(list(itertools.product(*zip(self.lo, self.hi))))


@lru_cache(maxsize=32)
def _unit_simpson_weights(n):
    # Simpson is linear in the samples, so its weights are its values on unit vectors.
    # For even n scipy corrects only the last interval; averaging with the mirror image restores symmetry.
    w = simpson(np.eye(n), dx=1.0, axis=1)
    w = 0.5 * (w + w[::-1])
    w.setflags(write=False)
    return w


def simpson_weights(box, n):
    """Tensor-product composite Simpson weights on the uniform grid of `box`."""
    if n < MIN_NODES:
        raise ResolutionError(f"need at least {MIN_NODES} nodes per axis, got {n}")
    w = None
    for width in box.width:
        wi = _unit_simpson_weights(n) * (width / (n - 1))
        w = wi if w is None else np.multiply.outer(w, wi)
    return w


def _as_points(pts, dim):
    pts = np.asarray(pts, float)
    if dim == 1 and (pts.ndim == 0 or pts.shape[-1] != 1):
        pts = pts[..., None]
    return pts


@dataclass(frozen=True, eq=False)
class SampledFunction:
    """Compactly supported function sampled on a uniform grid.

    `base` is the support box before translation, `shifts` the translations
    applied since; keeping them separate makes T_x followed by T_{-x} exact.
    `analytic` evaluates the function at points given in base coordinates.
    """

    base: Box
    values: np.ndarray
    analytic: object = None
    shifts: tuple = ()
    label: str = ""
    _cache: dict = field(default_factory=dict, repr=False, compare=False)

    def __post_init__(self):
        vals = np.asarray(self.values)
        if vals.ndim != self.base.dim or len(set(vals.shape)) != 1:
            raise UsageError(f"values of shape {vals.shape} do not match a {self.base.dim}-D grid")
        if vals.shape[0] < MIN_NODES:
            raise ResolutionError(f"need at least {MIN_NODES} nodes per axis, got {vals.shape[0]}")
        if self.base.is_degenerate:
            raise UsageError("support box of a sampled function needs positive widths")
        vals.setflags(write=False)
        object.__setattr__(self, "values", vals)

    @classmethod
    def from_analytic(cls, box, fn, n=None, label=""):
        n = default_nodes(box.dim) if n is None else n
        mesh = np.stack(np.meshgrid(*box.axes(n), indexing="ij"), axis=-1)
        return cls(box, np.asarray(fn(mesh)), fn, (), label)

    @property
    def dim(self):
        return self.base.dim

    @property
    def n(self):
        return self.values.shape[0]

    @property
    def offset(self):
        if not self.shifts:
            return np.zeros(self.dim)
        return np.array([math.fsum(col) for col in zip(*self.shifts)])

    @property
    def box(self):
        return self.base.shifted(self.offset) if self.shifts else self.base

    @property
    def spacing(self):
        return self.base.width / (self.n - 1)

    def axes(self):
        off = self.offset
        return [ax + o for ax, o in zip(self.base.axes(self.n), off)]

    def points(self):
        """Node coordinates, shape (n, ..., n, s)."""
        if "points" not in self._cache:
            self._cache["points"] = np.stack(np.meshgrid(*self.axes(), indexing="ij"), axis=-1)
        return self._cache["points"]

    def weights(self):
        if "weights" not in self._cache:
            self._cache["weights"] = simpson_weights(self.base, self.n)
        return self._cache["weights"]

    def __call__(self, pts):
        """Evaluate at arbitrary points (trailing axis = coordinates)."""
        pts = _as_points(pts, self.dim)
        local = pts - self.offset if self.shifts else pts
        if self.analytic is not None:
            return np.asarray(self.analytic(local))
        interp = self._cache.get("interp")
        if interp is None:
            interp = RegularGridInterpolator(self.base.axes(self.n), self.values, bounds_error=False, fill_value=0.0)
            self._cache["interp"] = interp
        return interp(local)

    def with_values(self, values, analytic=None, label=None):
        return SampledFunction(self.base, values, analytic, self.shifts, self.label if label is None else label)

    def same_grid(self, other):
        return self.n == other.n and self.base == other.base and np.array_equal(self.offset, other.offset)


def integrate(f):
    """Composite Simpson approximation of the integral of `f` over its box."""
    w = f.weights()
    return np.tensordot(w, f.values, axes=f.dim)[()]


def sup_norm(f, region=None, with_flag=False):
    """Max of |values| over the nodes inside `region` (default: everywhere).

    With `with_flag`, returns (value, intersects); an empty intersection
    gives (0.0, False).
    """
    vals = np.abs(f.values)
    if region is None:
        out, hit = float(vals.max()), True
    else:
        mask = region.contains_points(f.points())
        hit = bool(mask.any())
        out = float(vals[mask].max()) if hit else 0.0
    return (out, hit) if with_flag else out


def resample(f, box, n=None):
    """Materialize `f` on a new uniform grid over `box`."""
    n = f.n if n is None else n
    fn = f.analytic
    if fn is not None and f.shifts:
        off = f.offset
        fn = lambda p, g=f.analytic, off=off: g(p - off)
    if fn is None:
        fn = f
    g = SampledFunction.from_analytic(box, fn, n, f.label)
    if f.analytic is None:
        # interpolated values are not authoritative, keep the grid only
        g = SampledFunction(g.base, g.values, None, (), f.label)
    return g


def linear_combination(terms, label=""):
    """Sum of c_i * f_i on a common grid, with a composed analytic evaluator."""
    terms = [(c, f) for c, f in terms]
    if not terms:
        raise UsageError("empty linear combination")
    head = terms[0][1]
    dims = {f.dim for _, f in terms}
    if len(dims) != 1:
        raise UsageError("cannot combine sampled functions of different dimension")
    has_analytic = all(f.analytic is not None for _, f in terms)
    analytic = None
    if has_analytic:
        def analytic(p, terms=tuple(terms)):
            return sum(c * f(p) for c, f in terms)
    if all(f.same_grid(head) for _, f in terms):
        vals = sum(c * f.values for c, f in terms)
        if not has_analytic:
            return SampledFunction(head.base, vals, None, head.shifts, label)
        # analytic acts in absolute coordinates; rebase onto the shifted box
        return SampledFunction(head.box, vals, analytic, (), label)
    box = head.box
    for _, f in terms[1:]:
        box = box.union(f.box)
    n = max(f.n for _, f in terms)
    if has_analytic:
        return SampledFunction.from_analytic(box, analytic, n, label)
    mesh = np.stack(np.meshgrid(*box.axes(n), indexing="ij"), axis=-1)
    vals = sum(c * f(mesh) for c, f in terms)
    return SampledFunction(box, vals, None, (), label)


def multi_index(alpha, dim):
    a = tuple(int(v) for v in np.atleast_1d(alpha))
    if len(a) == 1 and dim > 1 and a == (0,):
        a = (0,) * dim
    if len(a) != dim or any(v < 0 for v in a):
        raise UsageError(f"multi-index {alpha} invalid for dimension {dim}")
    return a


def _stencil(alpha, h):
    """Offsets (k, s) and weights (k,) of the tensor central difference."""
    per_axis = []
    for a in alpha:
        if a == 0:
            per_axis.append(([0.0], [1.0]))
            continue
        offs = [(a / 2.0 - j) * h for j in range(a + 1)]
        wts = [(-1) ** j * comb(a, j, exact=True) / h**a for j in range(a + 1)]
        per_axis.append((offs, wts))
    offsets, weights = [], []
    for combo in itertools.product(*[list(zip(o, w)) for o, w in per_axis]):
        offsets.append([c[0] for c in combo])
        weights.append(math.prod(c[1] for c in combo))
    return np.array(offsets), np.array(weights)


def _richardson(values):
    # central differences have even error expansions in h
    table = list(values)
    for k in range(1, len(table)):
        fac = 4.0**k
        table = [(fac * table[i + 1] - table[i]) / (fac - 1.0) for i in range(len(table) - 1)]
    return table[0]


def fd_derivative(f, point, alpha, h, levels=2):
    """Richardson-extrapolated central difference for the partial derivative d^alpha f.

    `f` maps one point (shape (s,)) to a scalar. `levels` step sizes
    h, h/2, ... are combined; levels=1 is the plain second-order scheme.
    """
    point = np.atleast_1d(np.asarray(point, float))
    alpha = multi_index(alpha, point.size)
    if h <= 0:
        raise UsageError("finite-difference step must be positive")
    if sum(alpha) == 0:
        return f(point)
    estimates = []
    for lev in range(levels):
        offs, wts = _stencil(alpha, h / 2**lev)
        estimates.append(sum(w * f(point + o) for o, w in zip(offs, wts)))
    return _richardson(estimates)


def fd_derivative_many(f, points, alpha, h, levels=2):
    """Vectorized fd_derivative: `f` maps (m, s) point arrays to (m,) values."""
    points = np.asarray(points, float)
    alpha = multi_index(alpha, points.shape[-1])
    if sum(alpha) == 0:
        return f(points)
    estimates = []
    for lev in range(levels):
        offs, wts = _stencil(alpha, h / 2**lev)
        estimates.append(sum(w * f(points + o) for o, w in zip(offs, wts)))
    return _richardson(estimates)


def smooth_step(t):
    """C-infinity step: 0 for t <= 0, 1 for t >= 1."""
    t = np.asarray(t, float)
    a = np.where(t > 0, np.exp(-1.0 / np.where(t > 0, t, 1.0)), 0.0)
    b = np.where(t < 1, np.exp(-1.0 / np.where(t < 1, 1.0 - t, 1.0)), 0.0)
    return a / (a + b)


def smooth_plateau(x, lo, hi, ramp):
    """Equal to 1 on [lo, hi], 0 outside [lo - ramp, hi + ramp], smooth in between."""
    x = np.asarray(x, float)
    return smooth_step((x - lo + ramp) / ramp) * smooth_step((hi + ramp - x) / ramp)


def check_finite(values, what="values"):
    values = np.asarray(values)
    if not np.all(np.isfinite(values)):
        raise DomainError(f"non-finite {what} encountered")
    return values
