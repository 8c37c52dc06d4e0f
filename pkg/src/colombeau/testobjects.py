"""Test functions in A_0 / A_q, dual bases, projections and test-object families."""

from dataclasses import dataclass, field
import csv
import io
import itertools

import numpy as np
import scipy.linalg
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.exceptions import NotFittedError

from .errors import DomainError, ResolutionError, UsageError
from .numerics import (Box, SampledFunction, _richardson, _stencil, default_nodes,
                       fd_derivative_many, integrate, linear_combination, multi_index)
from .sweep import NOISE_FLOOR, EpsLadder, make_result

MOMENT_TOL = 1e-8
GRAM_TOL = 1e-8


@dataclass(frozen=True)
class MomentSpec:
    q: int
    r: float = 1.0
    s: int = 1

    def __post_init__(self):
        if self.q < 0 or self.r <= 0 or self.s not in (1, 2, 3):
            raise UsageError(f"invalid moment spec q={self.q}, r={self.r}, s={self.s}")


def graded_lex(q, s, start=1):
    """Multi-indices with start <= |beta| <= q, by degree then descending lex order."""
    out = []
    for deg in range(start, q + 1):
        level = [b for b in itertools.product(range(deg + 1), repeat=s) if sum(b) == deg]
        out.extend(sorted(level, reverse=True))
    return out


def _monomial(pts, beta):
    out = np.ones(pts.shape[:-1])
    for i, b in enumerate(beta):
        if b:
            out = out * pts[..., i] ** b
    return out


def moment(phi, alpha):
    """Integral of xi^alpha * phi(xi) over the support box."""
    alpha = multi_index(alpha, phi.dim)
    w = phi.weights()
    return np.tensordot(w, _monomial(phi.points(), alpha) * phi.values, axes=phi.dim)[()]


def _bump_profile(pts, center, r):
    rho2 = np.sum(((pts - center) / r) ** 2, axis=-1)
    inside = rho2 < 1.0
    safe = np.where(inside, 1.0 - rho2, 1.0)
    return np.where(inside, np.exp(-1.0 / safe), 0.0)


def make_bump(r=1.0, s=1, n=None, center=None, box=None):
    """Normalized bump c*exp(-1/(1-|xi-center|^2/r^2)) on the ball of radius r.

    `box` is the sampling box (default: the tight box around the ball).
    """
    if r <= 0:
        raise UsageError("bump radius must be positive")
    center = np.zeros(s) if center is None else np.broadcast_to(np.asarray(center, float), (s,)).copy()
    box = Box.cube(r, s, center) if box is None else box
    raw = SampledFunction.from_analytic(box, lambda p: _bump_profile(p, center, r), n)
    c = 1.0 / integrate(raw)

    def fn(p, c=c, center=center, r=r):
        return c * _bump_profile(p, center, r)

    return SampledFunction.from_analytic(box, fn, raw.n, f"bump(r={r:g})")


class _PolyTimesWeight:
    """xi -> sum_k coef_k (xi/r)^beta_k * weight(xi); picklable analytic evaluator."""

    def __init__(self, coefs, betas, r, weight):
        self.coefs, self.betas, self.r, self.weight = np.asarray(coefs), list(betas), r, weight

    def __call__(self, p):
        u = np.asarray(p, float) / self.r
        poly = sum(c * _monomial(u, b) for c, b in zip(self.coefs, self.betas))
        return poly * self.weight(p)


@dataclass(frozen=True)
class DualBasis:
    betas: list
    functions: list
    gram_residual: float
    q: int = 1
    r: float = 1.0
    s: int = 1

    def __len__(self):
        return len(self.betas)


def dual_basis(q, r=1.0, s=1, n=None):
    """phi_j in A_00 with int xi^beta_i phi_j = delta_ij for 1 <= |beta_i| <= q.

    Ansatz: polynomials in xi/r times the bump weight on B_r(0); the moment
    conditions form a symmetric positive definite Gram system.
    """
    MomentSpec(q, r, s)
    if q < 1:
        raise UsageError("dual basis needs q >= 1")
    betas = graded_lex(q, s)
    allb = [(0,) * s] + betas
    omega = make_bump(r, s, n)
    u = omega.points() / r
    mons = [_monomial(u, b) for b in allb]
    w = omega.weights() * omega.values
    gram = np.array([[np.sum(w * mi * mk) for mk in mons] for mi in mons])
    # targets in scaled moments: int u^beta_i phi_j = delta_ij r^-|beta_i|
    target = np.zeros((len(allb), len(betas)))
    for j, b in enumerate(betas):
        target[j + 1, j] = r ** (-sum(b))
    coefs = scipy.linalg.solve(gram, target, assume_a="pos")
    coefs += scipy.linalg.solve(gram, target - gram @ coefs, assume_a="pos")
    weight = omega.analytic
    functions = []
    for j, b in enumerate(betas):
        fn = _PolyTimesWeight(coefs[:, j], allb, r, weight)
        vals = sum(c * m for c, m in zip(coefs[:, j], mons)) * omega.values
        functions.append(SampledFunction(omega.base, vals, fn, (), f"dual{b}"))
    resid = 0.0
    for j, fj in enumerate(functions):
        resid = max(resid, abs(integrate(fj)))
        for i, bi in enumerate(betas):
            resid = max(resid, abs(moment(fj, bi) - (i == j)))
    if resid > GRAM_TOL:
        raise ResolutionError(f"dual basis residual {resid:.3e} exceeds {GRAM_TOL:g}; raise n")
    return DualBasis(betas, functions, float(resid), q, r, s)


def project_to_Aq(phi, q, basis):
    """phi - sum_i (int xi^beta_i phi) phi_i over the |beta_i| <= q part of `basis`."""
    if basis.s != phi.dim:
        raise UsageError(f"basis dimension {basis.s} does not match function dimension {phi.dim}")
    if basis.q < q:
        raise UsageError(f"basis built for q={basis.q} cannot project onto A_{q}")
    mass = integrate(phi)
    if abs(mass - 1.0) > 1e-10:
        raise UsageError(f"projection needs a function in A_0, integral is {mass}")
    if q == 0:
        return phi
    terms = [(1.0, phi)]
    for b, f in zip(basis.betas, basis.functions):
        if sum(b) <= q:
            terms.append((-moment(phi, b), f))
    return linear_combination(terms, label=f"P{q}({phi.label})")


class MomentProjector(TransformerMixin, BaseEstimator):
    """Projection of A_0 test functions onto A_q.

    fit() builds the dual basis on B_r(0); transform() applies the projection
    to one SampledFunction or a list of them.
    """

    def __init__(self, q=1, r=1.0, s=1, n=None):
        self.q = q
        self.r = r
        self.s = s
        self.n = n

    def fit(self, X=None, y=None):
        self.basis_ = dual_basis(self.q, self.r, self.s, self.n) if self.q >= 1 else None
        return self

    def transform(self, X):
        if not hasattr(self, "basis_"):
            raise NotFittedError("MomentProjector is not fitted yet")
        if isinstance(X, SampledFunction):
            return X if self.q == 0 else project_to_Aq(X, self.q, self.basis_)
        return [self.transform(f) for f in X]


def make_mollifier(q, r=1.0, s=1, n=None, center=None):
    """Bump projected onto A_q; support inside [-r, r]^s.

    With `center` the seed bump sits off-center (radius r - |center|), which
    gives a mollifier without parity-induced extra vanishing moments.
    """
    MomentSpec(q, r, s)
    if center is None:
        bump = make_bump(r, s, n)
    else:
        c = np.broadcast_to(np.asarray(center, float), (s,))
        rb = r - np.linalg.norm(c)
        if rb <= 0:
            raise UsageError("off-center seed must stay inside the ball of radius r")
        bump = make_bump(rb, s, n or default_nodes(s), c, Box.cube(r, s))
    if q == 0:
        return bump
    out = project_to_Aq(bump, q, dual_basis(q, r, s, bump.n))
    return SampledFunction(out.base, out.values, out.analytic, out.shifts, f"mollifier(q={q},r={r:g})")


class _Scaled:
    def __init__(self, f, eps):
        self.f, self.eps, self.fac = f, eps, eps ** (-f.dim)

    def __call__(self, p):
        return self.fac * self.f(np.asarray(p, float) / self.eps)


def scale(phi, eps):
    """S_eps phi = eps^-s phi(./eps)."""
    if not eps > 0:
        raise UsageError(f"scale needs eps > 0, got {eps}")
    fn = _Scaled(phi, eps) if phi.analytic is not None else None
    return SampledFunction(phi.box.scaled(eps), phi.values * eps ** (-phi.dim), fn, (), phi.label)


def translate(phi, x):
    """T_x phi = phi(. - x).  Successive inverse translations cancel exactly."""
    x = tuple(float(v) for v in np.broadcast_to(np.asarray(x, float), (phi.dim,)))
    if not any(x):
        return phi
    neg = tuple(-v for v in x)
    if phi.shifts and phi.shifts[-1] == neg:
        shifts = phi.shifts[:-1]
    else:
        shifts = phi.shifts + (x,)
    return SampledFunction(phi.base, phi.values, phi.analytic, shifts, phi.label)


class _Derivative:
    def __init__(self, f, alpha, h):
        self.f, self.alpha, self.h = f, alpha, h

    def __call__(self, p):
        p = np.asarray(p, float)
        flat = p.reshape(-1, p.shape[-1])
        out = fd_derivative_many(self.f, flat, self.alpha, self.h, levels=3)
        return out.reshape(p.shape[:-1])


def _spectral_derivative(values, spacing, alpha):
    out = np.asarray(values, complex)
    for ax, a in enumerate(alpha):
        if a == 0:
            continue
        m = out.shape[ax] - 1  # last node repeats the first for a compactly supported function
        sl = [slice(None)] * out.ndim
        sl[ax] = slice(0, m)
        k = 2j * np.pi * np.fft.fftfreq(m, d=spacing[ax])
        shape = [1] * out.ndim
        shape[ax] = m
        d = np.fft.ifft(np.fft.fft(out[tuple(sl)], axis=ax) * k.reshape(shape) ** a, axis=ax)
        out = np.concatenate([d, np.take(d, [0], axis=ax)], axis=ax)
    return out if np.iscomplexobj(values) else out.real


def differentiate(phi, alpha):
    """d^alpha phi in xi as a sampled function on the same grid."""
    alpha = multi_index(alpha, phi.dim)
    if sum(alpha) == 0:
        return phi
    if phi.analytic is None:
        vals = _spectral_derivative(phi.values, phi.spacing, alpha)
        return SampledFunction(phi.base, vals, None, phi.shifts, phi.label)
    h = 2e-3 * float(np.min(phi.base.width))
    fn = _Derivative(phi.analytic, alpha, h)
    return SampledFunction(phi.base, fn(_base_points(phi)), fn, phi.shifts, phi.label)


def _base_points(phi):
    return np.stack(np.meshgrid(*phi.base.axes(phi.n), indexing="ij"), axis=-1)


def export_csv(phi):
    """CSV text with node coordinates and value."""
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    names = ["xi", "eta", "zeta"][: phi.dim]
    cols = names + (["value_re", "value_im"] if np.iscomplexobj(phi.values) else ["value"])
    w.writerow(cols)
    pts = phi.points().reshape(-1, phi.dim)
    vals = phi.values.ravel()
    for p, v in zip(pts, vals):
        row = [repr(float(c)) for c in p]
        row += [repr(float(v.real)), repr(float(v.imag))] if np.iscomplexobj(vals) else [repr(float(v))]
        w.writerow(row)
    return buf.getvalue()


# ---------------------------------------------------------------------------
# test-object families


@dataclass(frozen=True, eq=False)
class TestObjectFamily:
    """(eps, x) -> test function, with validity predicate and support bound."""

    fn: object
    bound_box: Box
    declared_q: int = 0
    domain: object = None
    label: str = ""
    exact: bool = True
    meta: dict = field(default_factory=dict)

    __test__ = False  # not a pytest class

    def contains(self, eps, x):
        return self.domain is None or bool(self.domain(eps, np.atleast_1d(np.asarray(x, float))))

    def __call__(self, eps, x):
        x = np.atleast_1d(np.asarray(x, float))
        if not self.contains(eps, x):
            raise DomainError(f"family {self.label or 'phi'} undefined at eps={eps:g}, x={x.tolist()}")
        return self.fn(eps, x)

    eval = __call__

    @property
    def dim(self):
        return self.bound_box.dim

    @property
    def radius(self):
        return float(np.max(np.abs(np.concatenate([self.bound_box.lo_arr, self.bound_box.hi_arr]))))


def constant_family(phi, q=None, label=None):
    return TestObjectFamily(lambda eps, x: phi, phi.box, q or 0, None, label or f"const[{phi.label}]")


class _Perturbed:
    def __init__(self, phi, psi, coef):
        self.phi, self.psi, self.coef = phi, psi, coef

    def __call__(self, eps, x):
        c = self.coef(eps, x)
        if c == 0:
            return self.phi
        return linear_combination([(1.0, self.phi), (c, self.psi)], label=self.phi.label)


def perturbed_family(phi, psi, coef, declared_q=0, label="", exact=True):
    """phi + coef(eps, x) * psi with psi in A_00."""
    if abs(integrate(psi)) > 1e-10:
        raise UsageError("perturbation direction must have zero integral")
    return TestObjectFamily(_Perturbed(phi, psi, coef), phi.box.union(psi.box), declared_q, None, label, exact)


def x_modulated_family(phi, psi, c=None, declared_q=0, label=None):
    c = c or (lambda x: 0.5 * np.sin(2.0 * x[0]))
    return perturbed_family(phi, psi, lambda eps, x: c(x), declared_q, label or "x-modulated")


def eps_modulated_family(phi, psi, power, declared_q=None, label=None):
    return perturbed_family(phi, psi, lambda eps, x: eps**power,
                            power if declared_q is None else declared_q, label or f"eps^{power}-modulated")


@dataclass(frozen=True)
class AvmReport:
    results: dict
    q: int
    certified: bool
    slope_tol: float

    def failing(self):
        return [k for k, r in self.results.items() if r.slope < self.q - self.slope_tol]


def avm_order_estimate(family, K, q, beta_max=1, ladder=None, slope_tol=0.3, x_nodes=17,
                       h=0.05, moment_tol=MOMENT_TOL):
    """Ladder of sup_{x in K} |int xi^alpha d_x^beta phi(eps,x)(xi) dxi| per (alpha, beta).

    x-derivatives use Richardson central differences with step `h`; the fit
    floor grows like h^-|beta| to stay above the amplified rounding noise.
    A ladder whose values never exceed `moment_tol` counts as exact vanishing.
    """
    ladder = ladder or EpsLadder()
    s = family.dim
    alphas = graded_lex(q, s)
    betas = graded_lex(beta_max, s, start=0)
    xs = K.grid_points(x_nodes)
    for eps in ladder:
        for x in xs:
            for corner in (x - h, x + h):
                if not family.contains(eps, corner):
                    raise DomainError(f"family {family.label} undefined at eps={eps:g}, x={np.round(corner, 12).tolist()}")
    sups = {(a, b): [] for a in alphas for b in betas}
    for eps in ladder:
        cur = {k: 0.0 for k in sups}
        for x in xs:
            def moments(pts, eps=eps):
                out = []
                for p in pts:
                    phi = family(eps, p)
                    out.append([moment(phi, a) for a in alphas])
                return np.array(out)
            for b in betas:
                vals = _fd_vector(moments, x, b, h)
                for i, a in enumerate(alphas):
                    cur[(a, b)] = max(cur[(a, b)], float(abs(vals[i])))
        for k in sups:
            sups[k].append(cur[k])
    results = {}
    for (a, b), g in sups.items():
        floor = NOISE_FLOOR * max(1.0, h ** (-sum(b)))
        if max(g) <= moment_tol:
            floor = max(g) + 1.0  # identically vanishing within tolerance
        results[(a, b)] = make_result(ladder.values, g, alpha=a, K=K, label=f"moment{a} d_x{b}",
                                      floor=floor, beta=b)
    certified = all(r.slope >= q - slope_tol for r in results.values())
    return AvmReport(results, q, certified, slope_tol)


def _fd_vector(f, x, beta, h):
    """Richardson central difference of a vector-valued f at x (f maps (m,s) -> (m,k))."""
    if sum(beta) == 0:
        return f(x[None, :])[0]
    ests = []
    for lev in range(2):
        offs, wts = _stencil(beta, h / 2**lev)
        vals = f(x[None, :] + offs)
        ests.append(np.tensordot(wts, vals, axes=1))
    return _richardson(ests)
