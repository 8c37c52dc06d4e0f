"""Diffeomorphisms acting on test objects, test-object families and representatives."""

from dataclasses import dataclass, field

import numpy as np
from scipy.special import lambertw

from .errors import DomainError, UsageError
from .formalism import DomainSpec, Representative, in_U_eps
from .numerics import Box, SampledFunction, default_nodes, fd_derivative
from .testobjects import (TestObjectFamily, avm_order_estimate, constant_family, make_mollifier)
from .algebra import Delta, DerivativeOf, Regular, call_sampler
from .sweep import EpsLadder


def _pts(p, dim):
    p = np.asarray(p, float)
    if dim == 1 and (p.ndim == 0 or p.shape[-1] != 1):
        p = p[..., None]
    return p


@dataclass(frozen=True, eq=False)
class Diffeomorphism:
    """mu: source -> target with closed-form inverse and |det D mu^{-1}|.

    All maps take point arrays with the coordinates on the trailing axis.
    """

    forward: object
    inverse: object
    jac_det_inv: object
    dim: int = 1
    source: DomainSpec = None
    target: DomainSpec = None
    label: str = "mu"
    is_identity: bool = False
    meta: dict = field(default_factory=dict)

    def __call__(self, p):
        return self.forward(_pts(p, self.dim))

    def inv(self, p):
        return self.inverse(_pts(p, self.dim))

    def jac(self, p):
        return self.jac_det_inv(_pts(p, self.dim))

    def in_source(self, pts):
        return _inside(self.source, pts, self.dim)

    def in_target(self, pts):
        return _inside(self.target, pts, self.dim)

    def check(self, points, tol=1e-10):
        """Verify forward(inverse(y)) = y, positive Jacobian and, in 1D, jac = (inverse)'."""
        y = _pts(points, self.dim)
        err = float(np.max(np.abs(self.forward(self.inverse(y)) - y)))
        jac = self.jac_det_inv(y)
        report = {"roundtrip": err, "jac_min": float(np.min(jac))}
        if self.dim == 1:
            h = 1e-4 * np.maximum(1.0, np.abs(y[..., 0]))
            fd = np.array([fd_derivative(lambda t: self.inverse(np.atleast_1d(t)[None, :])[0, 0], yi, 1, hi)
                           for yi, hi in zip(y.reshape(-1, 1), h.ravel())])
            report["jac_fd"] = float(np.max(np.abs(np.abs(fd) - jac.ravel())))
        report["ok"] = err <= tol and report["jac_min"] > 0 and report.get("jac_fd", 0.0) <= 1e-6
        return report

    def lipschitz(self, box, n=65):
        """max |D mu| sampled over `box` (operator norm via the inverse Jacobian in 1D)."""
        pts = box.grid_points(n)
        pts = pts[self.in_source(pts)]
        if self.dim == 1:
            return float(np.max(1.0 / self.jac_det_inv(self.forward(pts))))
        out = 0.0
        for p in pts:
            cols = [fd_derivative(lambda t, i=i: self.forward(t[None, :])[0, i], p, e, 1e-5)
                    for i in range(self.dim) for e in np.eye(self.dim, dtype=int)]
            out = max(out, float(np.linalg.norm(np.reshape(cols, (self.dim, self.dim)), 2)))
        return out


def _inside(dom, pts, dim):
    pts = _pts(pts, dim)
    if dom is None:
        return np.ones(pts.shape[:-1], bool)
    ok = np.ones(pts.shape[:-1], bool)
    if dom.omega is not None:
        ok &= dom.omega.contains_points(pts)
    if dom.predicate is not None:
        ok &= np.asarray(dom.predicate(pts.reshape(-1, dim))).reshape(ok.shape)
    return ok


def identity(dim=1):
    return Diffeomorphism(lambda p: p, lambda p: p, lambda p: np.ones(p.shape[:-1]), dim,
                          label="id", is_identity=True)


def affine(a, b=0.0):
    """x -> A x + b (A a scalar in 1D or an invertible matrix)."""
    A = np.atleast_2d(np.asarray(a, float))
    dim = A.shape[0]
    bvec = np.broadcast_to(np.asarray(b, float), (dim,)).copy()
    Ainv = np.linalg.inv(A)
    det = abs(np.linalg.det(Ainv))
    return Diffeomorphism(lambda p: p @ A.T + bvec, lambda p: (p - bvec) @ Ainv.T,
                          lambda p: np.full(p.shape[:-1], det), dim, label=f"affine({a},{b})",
                          meta={"A": A, "b": bvec})


def cubic(c=0.2):
    """x -> x + c x^3 on R (c > 0), inverse by Cardano's formula plus one Newton step."""
    if c <= 0:
        raise UsageError("cubic perturbation needs c > 0")

    def inverse(p):
        y = p[..., 0]
        # x^3 + px - qy = 0 with p = q = 1/c
        pp = 1.0 / c
        disc = np.sqrt((y / (2 * c)) ** 2 + (pp / 3) ** 3)
        x = np.cbrt(y / (2 * c) + disc) + np.cbrt(y / (2 * c) - disc)
        x = x - (x + c * x**3 - y) / (1 + 3 * c * x**2)
        return x[..., None]

    return Diffeomorphism(lambda p: p + c * p**3, inverse,
                          lambda p: 1.0 / (1.0 + 3 * c * inverse(p)[..., 0] ** 2), 1, label=f"x+{c:g}x^3")


def munonsmooth():
    """mu(xi) = (xi/3) exp(-3/xi) on (0, inf); inverse 3 / W(1/y) with Lambert W."""
    pos = DomainSpec(None, 0.0, lambda p: np.all(np.asarray(p) > 0, axis=-1), 1)

    def forward(p):
        xi = p[..., 0]
        return ((xi / 3.0) * np.exp(-3.0 / xi))[..., None]

    def inverse(p):
        y = p[..., 0]
        return (3.0 / np.real(lambertw(1.0 / y)))[..., None]

    def dmu(xi):
        return np.exp(-3.0 / xi) * (1.0 / 3.0 + 1.0 / xi)

    return Diffeomorphism(forward, inverse, lambda p: 1.0 / dmu(inverse(p)[..., 0]), 1, pos, pos,
                          "munonsmooth", meta={"dmu": dmu})


def compose(mu, nu):
    """mu o nu (apply nu first)."""
    if mu.dim != nu.dim:
        raise UsageError("cannot compose diffeomorphisms of different dimension")
    if mu.is_identity:
        return nu
    if nu.is_identity:
        return mu
    return Diffeomorphism(lambda p: mu.forward(nu.forward(p)), lambda p: nu.inverse(mu.inverse(p)),
                          lambda p: nu.jac_det_inv(mu.inverse(p)) * mu.jac_det_inv(p), mu.dim,
                          nu.source, mu.target, f"({mu.label})o({nu.label})")


class _Transformed:
    """xi -> phi_t((mu^{-1}(eps xi + x) - x_t)/eps) |det D mu^{-1}(eps xi + x)|, zero off the target."""

    def __init__(self, mu, phi_t, x, x_t, eps):
        self.mu, self.phi_t, self.x, self.x_t, self.eps = mu, phi_t, x, x_t, eps

    def __call__(self, p):
        p = np.asarray(p, float)
        y = self.eps * p + self.x
        ok = self.mu.in_target(y)
        y_safe = np.where(ok[..., None], y, self.x)
        z = (self.mu.inverse(y_safe) - self.x_t) / self.eps
        vals = self.phi_t(z) * self.mu.jac_det_inv(y_safe)
        return np.where(ok, vals, 0.0)


def _image_box(mu, phi_t, x, x_t, eps):
    box = phi_t.box
    if mu.dim == 1:
        ends = mu.forward(x_t + eps * np.array([[box.lo[0]], [box.hi[0]]]))
        xi = (ends[:, 0] - x[0]) / eps
        return Box(min(xi), max(xi))
    pts = x_t + eps * box.grid_points(33)
    xi = (mu.forward(pts) - x) / eps
    lo, hi = xi.min(axis=0), xi.max(axis=0)
    pad = 0.02 * (hi - lo)
    return Box(lo - pad, hi + pad)


def push_test_function(mu, phi_t, x_t, eps=1.0, x=None, n=None):
    """First component of the transformed pair: the test function at mu(x_t) built from phi_t."""
    x_t = np.atleast_1d(np.asarray(x_t, float))
    x = mu.forward(x_t[None, :])[0] if x is None else np.atleast_1d(np.asarray(x, float))
    box = _image_box(mu, phi_t, x, x_t, eps)
    fn = _Transformed(mu, phi_t, x, x_t, eps)
    return SampledFunction.from_analytic(box, fn, n or phi_t.n, phi_t.label)


def transform_family(mu, family, n=None, source_K=None):
    """Family on Omega: (eps, x) -> transformed phi_t(eps, mu^{-1} x); domain D as a predicate."""
    if mu.is_identity:
        return family
    src = mu.source

    def x_t_of(x):
        return mu.inverse(np.atleast_1d(x)[None, :])[0]

    def domain(eps, x):
        if not mu.in_target(np.atleast_1d(x)[None, :])[0]:
            return False
        xt = x_t_of(x)
        if not family.contains(eps, xt):
            return False
        return src is None or in_U_eps(family(eps, xt), xt, src, eps)

    def fn(eps, x):
        xt = x_t_of(x)
        return push_test_function(mu, family(eps, xt), xt, eps, x, n)

    lip = 1.0
    if source_K is not None:
        lip = max(lip, mu.lipschitz(source_K))
    bound = Box.cube(lip * family.radius, family.dim)
    return TestObjectFamily(fn, bound, 0, domain, f"{mu.label}[{family.label}]", family.exact,
                            {"lipschitz": lip})


def pullback_representative(mu, rep):
    """(mu^ R)(phi_t, x_t) = R(transformed pair) for C-formalism R on the target."""
    if rep.tag != "C":
        raise UsageError("pullback works on C-formalism representatives; convert with to_C first")
    if mu.is_identity:
        return rep

    def fn(phi_t, x_t):
        x = mu.forward(x_t[None, :])[0]
        return rep(push_test_function(mu, phi_t, x_t, 1.0, x), x)

    return Representative(fn, "C", mu.source, "pulled-back", (rep,), {"mu": mu})


def pullback_distribution(mu, u):
    """mu^* u with <mu^* u, phi> = <u, (phi o mu^{-1}) |det D mu^{-1}|>."""
    if isinstance(u, Regular):
        return Regular(lambda *c: call_sampler(u.f, mu.forward(np.stack(c, axis=-1))), f"{u.label}o{mu.label}")
    if isinstance(u, Delta):
        a = np.broadcast_to(np.asarray(u.location, float), (mu.dim,))[None, :]
        return Delta(mu.inverse(a)[0], u.weight * float(mu.jac_det_inv(a)[0]), u.label)
    if isinstance(u, DerivativeOf):
        raise UsageError("pullback of derivative distributions is not supported")
    raise UsageError(f"unsupported distribution {type(u).__name__}")


def image_box(mu, box):
    pts = mu.forward(box.grid_points(65))
    return Box(pts.min(axis=0), pts.max(axis=0))


def moment_degradation_check(mu, q, K_t, ladder=None, beta_max=1, slope_tol=0.3, r=1.0, n=None,
                             order=None):
    """Moments of the transformed constant A_q family over L = mu(K_t).

    Checks vanishing order floor((q+1)/2) unless `order` is given.
    """
    ladder = ladder or EpsLadder()
    phi = make_mollifier(q, r, mu.dim, n)
    fam = transform_family(mu, constant_family(phi, q), source_K=K_t)
    L = image_box(mu, K_t)
    order = (q + 1) // 2 if order is None else order
    return avm_order_estimate(fam, L, order, beta_max, ladder, slope_tol)
