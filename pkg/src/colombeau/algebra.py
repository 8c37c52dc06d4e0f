"""Embeddings, ring operations, derivatives, first-slot differentials, gluing, association.

Samplers of x (regular densities, smooth functions, cutoffs) are called as
f(x_1, ..., x_s) with one array per coordinate.
"""

from dataclasses import dataclass

import numpy as np

from .errors import DomainError, UsageError
from .formalism import DomainSpec, Representative, constant, in_U_eps, insert, to_C, to_J  # noqa: F401
from .numerics import Box, SampledFunction, _richardson, fd_derivative, integrate, linear_combination, multi_index, resample, sup_norm
from .sweep import EpsLadder, make_result
from .testobjects import _Derivative, differentiate, scale, translate

MAX_DERIVATIVE_DEPTH = 4


def call_sampler(f, pts):
    pts = np.asarray(pts, float)
    return np.asarray(f(*[pts[..., i] for i in range(pts.shape[-1])]))


# ---------------------------------------------------------------------------
# distributions


@dataclass(frozen=True, eq=False)
class Regular:
    f: object
    label: str = "f"


@dataclass(frozen=True, eq=False)
class Delta:
    location: object = 0.0
    weight: float = 1.0
    label: str = "delta"


@dataclass(frozen=True, eq=False)
class DerivativeOf:
    u: object
    alpha: tuple = (1,)

    def __post_init__(self):
        depth, inner = 1, self.u
        while isinstance(inner, DerivativeOf):
            depth, inner = depth + 1, inner.u
        if depth > MAX_DERIVATIVE_DEPTH:
            raise UsageError(f"derivative nesting depth {depth} exceeds {MAX_DERIVATIVE_DEPTH}")
        object.__setattr__(self, "alpha", tuple(int(a) for a in np.atleast_1d(self.alpha)))

    @property
    def label(self):
        return f"d{self.alpha}({getattr(self.u, 'label', 'u')})"


def _flatten(u):
    alpha = None
    while isinstance(u, DerivativeOf):
        a = np.array(u.alpha)
        alpha = a if alpha is None else alpha + a
        u = u.u
    return u, (None if alpha is None else tuple(int(v) for v in alpha))


def pair(u, phi, x):
    """<u, phi(. - x)>."""
    base, alpha = _flatten(u)
    sign = 1.0
    if alpha is not None:
        alpha = multi_index(alpha, phi.dim)
        sign = (-1.0) ** sum(alpha)
    if isinstance(base, Delta):
        loc = np.broadcast_to(np.asarray(base.location, float), (phi.dim,))
        p = (loc - x)[None, :] - phi.offset
        if alpha is None or sum(alpha) == 0:
            val = phi((loc - x)[None, :])[0]
        elif phi.analytic is not None:
            h = 2e-3 * float(np.min(phi.base.width))
            val = _Derivative(phi.analytic, alpha, h)(p)[0]
        else:
            val = differentiate(phi, alpha)(p + phi.offset)[0]
        return sign * base.weight * val
    if isinstance(base, Regular):
        psi = phi if alpha is None else differentiate(phi, alpha)
        with np.errstate(all="ignore"):
            vals = call_sampler(base.f, psi.points() + x)
        if not np.all(np.isfinite(vals)):
            raise DomainError(f"sampler {base.label} is not finite on the support of the test function")
        return sign * np.tensordot(psi.weights(), vals * psi.values, axes=psi.dim)[()]
    raise UsageError(f"unsupported distribution {type(base).__name__}")


def embed(u, domain=None):
    """iota^C u (phi, x) = <u, phi(. - x)>."""
    return Representative(lambda phi, x: pair(u, phi, x), "C", domain, "embedded", (), {"distribution": u})


def embed_smooth(f, domain=None, tag="C"):
    """sigma(f)(phi, x) = f(x)."""
    return Representative(lambda phi, x: call_sampler(f, x)[()], tag, domain, "sigma", (), {"f": f})


def combine(op, r1, r2=None, c=None):
    """Pointwise add / sub / mul of two representatives, or scalar multiple of one."""
    if op == "scalar":
        if c is None:
            raise UsageError("scalar combination needs c")
        return Representative(lambda phi, x: c * r1(phi, x), r1.tag, r1.domain, "arithmetic",
                              (r1,), {"op": "scalar", "c": c})
    if r2 is None:
        raise UsageError(f"{op} needs two operands")
    if r1.tag != r2.tag:
        raise UsageError(f"formalism mismatch: {r1.tag} vs {r2.tag}")
    if r1.domain is not None and r2.domain is not None and r1.domain is not r2.domain:
        if r1.domain.omega != r2.domain.omega:
            raise UsageError("operands live on different domains")
    domain = r1.domain if r1.domain is not None else r2.domain
    ops = {
        "add": lambda phi, x: r1(phi, x) + r2(phi, x),
        "sub": lambda phi, x: r1(phi, x) - r2(phi, x),
        "mul": lambda phi, x: r1(phi, x) * r2(phi, x),
    }
    if op not in ops:
        raise UsageError(f"unknown operation {op!r}")
    return Representative(ops[op], r1.tag, domain, "arithmetic", (r1, r2), {"op": op})


def _unit(i, dim):
    e = [0] * dim
    e[i] = 1
    return tuple(e)


def x_step(phi):
    """Finite-difference step in x matched to the support size of phi."""
    return min(1e-2, float(np.min(phi.box.width)) / 64.0)


def derive_C(rep, i=0, fast=True):
    """D_i^C = d/dx_i; embedded distributions use D_i iota = iota d_i."""
    if rep.tag != "C":
        raise UsageError("derive_C expects a C-formalism representative")
    if fast and rep.provenance == "embedded":
        u = rep.meta["distribution"]
        dim = _dim_of(u)

        def fn(phi, x):
            return pair(DerivativeOf(u, _unit(i, phi.dim if dim is None else dim)), phi, x)

        return Representative(fn, "C", rep.domain, "embedded", (), {"distribution": u, "derived": i})

    def fn(phi, x):
        return fd_derivative(lambda y: rep(phi, y), x, _unit(i, x.size), x_step(phi), levels=3)

    return Representative(fn, "C", rep.domain, "derivative", (rep,), {"i": i})


def _dim_of(u):
    base, alpha = _flatten(u)
    if alpha is not None:
        return len(alpha)
    if isinstance(base, Delta):
        return np.atleast_1d(base.location).size
    return None


def d1_directional(rep, phi, x, directions, h=None, levels=2):
    """Iterated central differences of t -> R(phi + t * sum psi_j, x) along A_00 directions."""
    x = np.atleast_1d(np.asarray(x, float))
    directions = list(directions)
    for psi in directions:
        if abs(integrate(psi)) > 1e-10:
            raise DomainError("differential directions must have zero integral")
    if not directions:
        return rep(phi, x)
    if h is None:
        scale_psi = max(sup_norm(psi) for psi in directions)
        h = 1e-3 * sup_norm(phi) / scale_psi if scale_psi > 0 else 1e-3
    k = len(directions)
    signs = np.array(np.meshgrid(*[[-1.0, 1.0]] * k, indexing="ij")).reshape(k, -1).T
    ests = []
    for lev in range(levels):
        t = h / 2**lev
        acc = 0.0
        for sg in signs:
            arg = linear_combination([(1.0, phi)] + [(t * s, psi) for s, psi in zip(sg, directions)])
            acc = acc + np.prod(sg) * rep(arg, x)
        ests.append(acc / (2 * t) ** k)
    return _richardson(ests)


def derive_J(rep, i=0):
    """(D_i^J R)(phi, x) = -d_1 R(phi, x)(d_i phi) + d_i R(phi, x)."""
    if rep.tag != "J":
        raise UsageError("derive_J expects a J-formalism representative")

    def fn(phi, x):
        dphi = differentiate(phi, _unit(i, phi.dim))
        first = d1_directional(rep, phi, x, [dphi])
        second = fd_derivative(lambda y: rep(phi, y), x, _unit(i, x.size), x_step(phi), levels=3)
        return -first + second

    return Representative(fn, "J", rep.domain, "derivative", (rep,), {"i": i})


# ---------------------------------------------------------------------------
# gluing


@dataclass(frozen=True, eq=False)
class Chart:
    """One element of a gluing cover: open box, cutoff theta, psi in A_0(omega), weight chi."""

    omega: Box
    theta: object
    psi: SampledFunction
    chi: object


class _Cut:
    def __init__(self, theta, phi, x):
        self.theta, self.phi, self.x = theta, phi, x

    def __call__(self, p):
        p = np.asarray(p, float)
        return call_sampler(self.theta, p + self.x) * self.phi(p)


def localize(chart, phi, x):
    """pi_j(phi, x): cut phi off by theta(. + x) and restore unit mass with psi(. + x)."""
    theta_vals = call_sampler(chart.theta, phi.points() + x)
    support = phi.values != 0
    if np.all(theta_vals[support] == 1.0):
        return phi
    cut_vals = theta_vals * phi.values
    analytic = _Cut(chart.theta, phi, x) if phi.analytic is not None else None
    cut = SampledFunction(phi.box, cut_vals, analytic, (), phi.label)
    psi = translate(chart.psi, -x)
    # restore unit mass with integrals taken on the grid the result lives on
    box, n = cut.box.union(psi.box), max(cut.n, psi.n)
    cut_r = cut if cut.box == box and cut.n == n else resample(cut, box, n)
    psi_r = resample(psi, box, n)
    coef = (1.0 - integrate(cut_r)) / integrate(psi_r)
    return linear_combination([(1.0, cut_r), (coef, psi_r)], label=phi.label)


def glue(cover, reps, tol=1e-9):
    """R(phi, x) = sum_j chi_j(x) R_j(pi_j(phi, x), x)."""
    if len(cover) != len(reps) or not cover:
        raise UsageError("cover and representatives must be nonempty and of equal length")
    tags = {r.tag for r in reps}
    if tags != {"C"}:
        raise UsageError("gluing works on C-formalism representatives")

    def fn(phi, x):
        total, weight = 0.0, 0.0
        for chart, rep in zip(cover, reps):
            if not chart.omega.contains_points(x[None, :])[0]:
                continue
            c = float(call_sampler(chart.chi, x[None, :])[0])
            weight += c
            if c != 0.0:
                total = total + c * rep(localize(chart, phi, x), x)
        if abs(weight - 1.0) > tol:
            raise UsageError(f"cover weights sum to {weight} at x={x.tolist()}, not a partition of unity")
        return total

    return Representative(fn, "C", None, "glued", tuple(reps), {"cover": cover})


# ---------------------------------------------------------------------------
# association


def association_test(r1, r2, psi, family, ladder=None, tol=1e-10, label=""):
    """Ladder of int (R1 - R2)(S_eps phi(eps, x), x) psi(x) dx with an association verdict."""
    ladder = ladder or EpsLadder()
    diff = combine("sub", r1, r2)
    pts = psi.points().reshape(-1, psi.dim)
    w = (psi.weights() * psi.values).ravel()
    active = w != 0
    values = []
    for eps in ladder:
        acc = 0.0
        for x, wx in zip(pts[active], w[active]):
            acc += wx * insert(diff, scale(family(eps, x), eps), x)
        values.append(acc)
    res = make_result(ladder.values, np.abs(values), label=label or "association")
    associated = res.slope > 0 or abs(values[-1]) <= tol
    res.extra.update(values=tuple(complex(v) if np.iscomplexobj(v) else float(v) for v in values),
                     associated=bool(associated))
    return res
