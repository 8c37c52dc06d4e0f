"""Epsilon sweeps for the moderateness / negligibility tests and verdict classification."""

from dataclasses import dataclass, field
import math

import numpy as np
from scipy.optimize import minimize_scalar

from .errors import DomainError, UsageError
from .formalism import DomainSpec, in_U_eps, insert
from .numerics import Box, fd_derivative, integrate, multi_index
from .sweep import NOISE_FLOOR, EpsLadder, OrderEstimator, SweepResult, fit_order, make_result  # noqa: F401
from .testobjects import (MOMENT_TOL, TestObjectFamily, avm_order_estimate, constant_family, dual_basis,
                          eps_modulated_family, graded_lex, linear_combination, make_mollifier, moment,
                          scale, x_modulated_family)

MAX_X_NODES = {1: 4097, 2: 65, 3: 17}


@dataclass(frozen=True)
class Moderate:
    N: int
    worst: str = ""
    details: list = field(default_factory=list, compare=False)
    tag = "moderate"

    @property
    def exponent(self):
        return self.N


@dataclass(frozen=True)
class Negligible:
    n: int
    worst: str = ""
    details: list = field(default_factory=list, compare=False)
    tag = "negligible"

    @property
    def exponent(self):
        return self.n


@dataclass(frozen=True)
class Inconclusive:
    reason: str
    worst: str = ""
    details: list = field(default_factory=list, compare=False)
    tag = "inconclusive"

    @property
    def exponent(self):
        return None


def verdict_record(v):
    """One-line machine-readable summary: tag,exponent,worst family."""
    exp = "" if v.exponent is None else str(v.exponent)
    return f"{v.tag},{exp},{v.worst}"


def _x_grid(K, eps, radius, x_nodes):
    s = K.dim
    counts = []
    for width in K.width:
        if width <= 0:
            counts.append(1)
            continue
        n = int(math.ceil(width / (eps * radius / 8.0))) + 1
        n = min(max(n, x_nodes), MAX_X_NODES[s])
        counts.append(n + (n % 2 == 0))
    axes = [np.linspace(a, b, c) if c > 1 else np.array([a]) for a, b, c in zip(K.lo, K.hi, counts)]
    mesh = np.meshgrid(*axes, indexing="ij")
    spacing = [(b - a) / (c - 1) if c > 1 else 0.0 for a, b, c in zip(K.lo, K.hi, counts)]
    return np.stack([m.ravel() for m in mesh], axis=-1), spacing


def run_sweep(rep, family, K, alpha=0, ladder=None, x_nodes=17, refine=True, domain=None,
              floor=NOISE_FLOOR, label=""):
    """g(eps) = sup_{x in K} |d^alpha_x R(S_eps phi(eps, x), x)| over the ladder.

    x-derivatives use Richardson central differences with h = eps/16.  The
    x-grid resolves the scale eps * (support radius) up to a per-dimension
    node cap; in 1D the best node is refined by a bounded scalar search.
    """
    ladder = ladder or EpsLadder()
    alpha = multi_index(alpha, K.dim)
    domain = domain if domain is not None else rep.domain
    radius = max(family.radius, 1e-12)
    g = []
    for eps in ladder:
        h = eps / 16.0
        xs, spacing = _x_grid(K, eps, radius, x_nodes)
        reach = sum(alpha) * h

        def value(x, eps=eps):
            x = np.atleast_1d(x)
            phi = family(eps, x)
            if domain is not None and not in_U_eps(phi, x, domain, eps):
                raise DomainError(f"(eps={eps:g}, x={x.tolist()}) leaves U_eps(Omega); "
                                  "shrink eps0 so the scaled support stays inside the domain")
            return insert(rep, scale(phi, eps), x)

        def deriv(x):
            return fd_derivative(value, x, alpha, h) if sum(alpha) else value(x)

        for x in (xs[0] - reach, xs[-1] + reach):
            if not family.contains(eps, x):
                raise DomainError(f"family {family.label} undefined at eps={eps:g}, x={np.atleast_1d(x).tolist()}")
        vals = np.array([abs(deriv(x)) for x in xs])
        best = int(np.argmax(vals))
        top = float(vals[best])
        if refine and K.dim == 1 and spacing[0] > 0 and top > 0:
            x0 = float(xs[best, 0])
            lo, hi = max(K.lo[0], x0 - spacing[0]), min(K.hi[0], x0 + spacing[0])
            opt = minimize_scalar(lambda t: -abs(deriv(np.array([t]))), bounds=(lo, hi), method="bounded",
                                  options={"xatol": spacing[0] * 1e-3})
            top = max(top, float(-opt.fun))
        g.append(top)
    return make_result(ladder.values, g, alpha=alpha, K=K, floor=floor,
                       label=label or f"{rep.provenance}|{family.label}|alpha={alpha}")


# ---------------------------------------------------------------------------
# batteries


def prescaled_family(family, delta0):
    """(eps, x) -> S_delta0 phi(delta0 * eps, x)."""
    return TestObjectFamily(lambda eps, x: scale(family(delta0 * eps, x), delta0),
                            family.bound_box.scaled(delta0), family.declared_q,
                            None if family.domain is None else (lambda eps, x: family.contains(delta0 * eps, x)),
                            f"S_{delta0:g}[{family.label}]", family.exact)


def default_battery(q, r=1.0, s=1, mode="moderate", center=None, n=None):
    """(a) constant A_q family, (b) x-modulated A_q family, (c) eps-modulated family.

    (b) perturbs along a difference of two A_q mollifiers, so it stays in A_q
    exactly.  (c) perturbs along the dual function of the first moment and
    only has asymptotically vanishing moments, so it is left out of the
    negligible mode, which needs exact A_q membership.
    """
    phi = make_mollifier(q, r, s, n, center)
    fams = [constant_family(phi, q, f"const[q={q}]")]
    if q >= 1:
        other = make_mollifier(q, 0.5 * r, s, phi.n)
        psi = linear_combination([(1.0, other), (-1.0, phi)])
        fams.append(x_modulated_family(phi, psi, declared_q=q, label=f"x-mod[q={q}]"))
        if mode != "negligible":
            dual = dual_basis(q, r, s, phi.n).functions[0]
            fams.append(eps_modulated_family(phi, dual, max(q, 1), label=f"eps-mod[q={q}]"))
    else:
        fams.append(x_modulated_family(phi, linear_combination([(1.0, make_mollifier(0, 0.5 * r, s, phi.n)),
                                                               (-1.0, phi)]), label="x-mod[q=0]"))
    return fams


def check_exact_Aq(family, q, samples):
    """Moments 1..q of the family vanish (and mass is 1) at the sampled (eps, x)."""
    alphas = graded_lex(q, family.dim)
    for eps, x in samples:
        phi = family(eps, x)
        if abs(integrate(phi) - 1.0) > 1e-10:
            return False
        if any(abs(moment(phi, a)) > MOMENT_TOL for a in alphas):
            return False
    return True


def classify(rep, battery, K_list=None, alpha_list=None, mode="moderate", n=None, q=None, ladder=None,
             slope_tol=0.3, domain=None, beta_max=1, x_nodes=17):
    """Verdict from sweeps over every (family, K, alpha).

    Modes: 'moderate'; 'negligible' (exact A_q families); 'four_zero'
    (families with moments vanishing to order q on K only); 'four_infty'
    (families whose x-derivatives also have vanishing moments).  In the two
    'four' modes families failing the admissibility check are excluded and
    listed in the verdict details.
    """
    battery = list(battery)
    if not battery:
        raise UsageError("classification needs a nonempty battery")
    ladder = ladder or EpsLadder()
    domain = domain if domain is not None else rep.domain
    dim = battery[0].dim
    if K_list is None:
        K_list = [(domain or DomainSpec.whole(dim)).default_K()]
    alpha_list = alpha_list or [(0,) * dim]
    if mode != "moderate" and (n is None or q is None):
        raise UsageError(f"mode {mode} needs n and q")
    excluded = []
    if mode == "negligible":
        for fam in battery:
            samples = [(e, K.center) for e in ladder.values[::3] for K in K_list]
            if not check_exact_Aq(fam, q, samples):
                raise UsageError(f"family {fam.label} is not in A_{q}")
    elif mode in ("four_zero", "four_infty"):
        bmax = 0 if mode == "four_zero" else beta_max
        keep = []
        for fam in battery:
            ok = all(avm_order_estimate(fam, K, q, bmax, ladder, slope_tol).certified for K in K_list)
            (keep if ok else excluded).append(fam)
        battery = keep
        if not battery:
            return Inconclusive("no admissible family", "", [{"excluded": [f.label for f in excluded]}])
    elif mode != "moderate":
        raise UsageError(f"unknown mode {mode!r}")
    results = []
    for fam in battery:
        for K in K_list:
            for a in alpha_list:
                results.append((fam.label, run_sweep(rep, fam, K, a, ladder, x_nodes=x_nodes, domain=domain)))
    details = [r for _, r in results] + ([{"excluded": [f.label for f in excluded]}] if excluded else [])
    slopes = [r.slope for _, r in results]
    worst = results[int(np.argmin(slopes))][0]
    if mode == "moderate":
        if not all(np.isfinite(sl) or sl == np.inf for sl in slopes):
            return Inconclusive("non-finite slope", worst, details)
        N = max(0, math.ceil(-min(slopes) - slope_tol))
        return Moderate(N, worst, details)
    failing = [(lab, r) for lab, r in results if r.slope < n - slope_tol]
    if failing:
        lab, r = failing[0]
        return Inconclusive(f"slope {r.slope:.3f} < {n} - {slope_tol} for {lab} on K={r.K} alpha={r.alpha}",
                            lab, details)
    return Negligible(n, worst, details)
