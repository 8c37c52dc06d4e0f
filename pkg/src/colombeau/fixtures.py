"""Worked examples and counterexamples with closed-form expected values."""

import csv
import io
import math
import warnings
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np
from scipy.integrate import quad, simpson

from .algebra import Regular, embed, embed_smooth
from .asymptotics import classify, default_battery
from .diffeo import munonsmooth
from .errors import ResolutionError, UsageError
from .numerics import Box, fd_derivative, smooth_step
from .sweep import EpsLadder, fit_order
from .testobjects import dual_basis, make_mollifier, perturbed_family, scale

MAX_MUNONSMOOTH_N = 40


@dataclass
class FixtureReport:
    """Measured vs expected values; `kind` is 'abs', 'rel' or 'bound' (measured >= expected)."""

    name: str
    measured: list
    expected: list
    tol: float
    kind: str = "rel"
    extra: dict = field(default_factory=dict)

    def errors(self):
        out = []
        for (_, m), e in zip(self.measured, self.expected):
            if self.kind == "abs":
                out.append(abs(m - e))
            elif self.kind == "rel":
                out.append(abs(m - e) / abs(e))
            else:
                out.append(max(0.0, (e - m) / abs(e)))
        return out

    @property
    def max_rel_err(self):
        errs = self.errors()
        return max(errs) if errs else 0.0

    @property
    def passed(self):
        return bool(self.measured) and self.max_rel_err <= self.tol and self.extra.get("checks_ok", True)

    def to_csv(self):
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["name", "input", "measured", "expected", "rel_err"])
        for (inp, m), e, err in zip(self.measured, self.expected, self.errors()):
            w.writerow([self.name, repr(float(inp)), repr(float(m)), repr(float(e)), repr(float(err))])
        return buf.getvalue()

    def summary(self):
        return f"{'PASS' if self.passed else 'FAIL'} {self.name} max_err={self.max_rel_err:.3e} tol={self.tol:g}"


# ---------------------------------------------------------------------------
# rho: exp(-1/x) on (0, 1], support in [0, 2], zero integral


def _rho1(x):
    x = np.asarray(x, float)
    pos = x > 0
    core = np.where(pos, np.exp(-1.0 / np.where(pos, x, 1.0)), 0.0)
    return core * (1.0 - smooth_step((x - 1.0) / 0.5))


def _rho2_raw(x):
    t = (np.asarray(x, float) - 1.75) / 0.25
    inside = np.abs(t) < 1
    return np.where(inside, np.exp(-1.0 / np.where(inside, 1.0 - t * t, 1.0)), 0.0)


@lru_cache(maxsize=1)
def _rho_constants():
    c = quad(_rho1, 0.0, 1.5, epsabs=1e-14, epsrel=1e-13, limit=200)[0]
    z = quad(_rho2_raw, 1.5, 2.0, epsabs=1e-14, epsrel=1e-13)[0]
    return c, z


def rho(x):
    """rho = rho1 - c rho2: exp(-1/x) on (0, 1], supp in [0, 2], int rho = 0."""
    c, z = _rho_constants()
    return _rho1(x) - c * _rho2_raw(x) / z


# ---------------------------------------------------------------------------
# counterexamples to the moments-on-K negligibility test


def _excond4_family(q):
    q = max(2, q)
    phi = make_mollifier(q)
    psi = dual_basis(q, 1.0, 1, phi.n).functions[0]  # int xi psi = 1, int xi^k psi = 0 for 2 <= k <= q
    return perturbed_family(phi, psi, lambda eps, x: float(x[0]), q, f"phi_q+x*psi_q[q={q}]", exact=False)


def _identity_rep():
    return embed(Regular(lambda x: x, "id")) - embed_smooth(lambda x: x)


def _eps_ladder():
    return EpsLadder(1.0, 0.5, 10)


def _derivative_fixture(name, rep, order, expected_fn, expected_slope, tol, q, ladder, h):
    fam = _excond4_family(q)
    ladder = ladder or _eps_ladder()
    measured, expected = [], []
    for eps in ladder:
        val = fd_derivative(lambda x, eps=eps: rep(scale(fam(eps, x), eps), x), np.zeros(1), (order,), h)
        measured.append((eps, float(np.real(val))))
        expected.append(expected_fn(eps))
    slope = fit_order(ladder.values, [abs(m) for _, m in measured])
    ok = abs(slope - expected_slope) <= 0.05
    return FixtureReport(name, measured, expected, tol, "abs", {"slope": slope, "checks_ok": ok, "q": q})


def fixture_excond4_first(q=4, ladder=None):
    """d/dx R(S_eps phi_q(eps, x), x) at x = 0 for R = iota(id) - sigma(id); expected eps."""
    return _derivative_fixture("excond4_first", _identity_rep(), 1, lambda e: e, 1.0, 1e-6, q, ladder, 0.1)


def fixture_excond4_second(q=4, ladder=None):
    """d^2/dx^2 (iota(id)^2 - iota(id^2)) at x = 0; expected 2 eps^2."""
    iota = embed(Regular(lambda x: x, "id"))
    rep = iota * iota - embed(Regular(lambda x: x * x, "id^2"))
    return _derivative_fixture("excond4_second", rep, 2, lambda e: 2 * e * e, 2.0, 1e-5, q, ladder, 0.1)


def excond4_battery_verdicts(q=4, n=2, ladder=None):
    """Verdicts of iota(id) - sigma(id) at K = {0}, alpha = 1 under the two moment-on-K test modes.

    Battery: the default exact-A_q families plus the phi_q + x psi_q family.
    Returns (four_zero verdict, four_infty verdict).
    """
    ladder = ladder or EpsLadder(0.5, 0.5, 8)
    battery = default_battery(q, mode="negligible") + [_excond4_family(q)]
    rep = _identity_rep()
    kw = dict(K_list=[Box.point(0.0)], alpha_list=[(1,)], n=n, q=q, ladder=ladder)
    return classify(rep, battery, mode="four_zero", **kw), classify(rep, battery, mode="four_infty", **kw)


# ---------------------------------------------------------------------------
# non-continuity of the diffeomorphism action on A_0


def munonsmooth_expected(n):
    return (1.0 / n) * math.exp(n / 2.0) * 6.0 / (2.0 + 3.0 * n)


def fixture_munonsmooth(n_list=tuple(range(4, 21))):
    """(phi o mu^{-1}) |(mu^{-1})'| for phi = (1/n) rho(. - 1/n), evaluated at mu(2/n)."""
    n_list = list(n_list)
    if any(n > MAX_MUNONSMOOTH_N for n in n_list):
        warnings.warn(f"munonsmooth: n > {MAX_MUNONSMOOTH_N} overflows; truncating the list", RuntimeWarning)
        n_list = [n for n in n_list if n <= MAX_MUNONSMOOTH_N]
    if any(n < 1 for n in n_list):
        raise UsageError("n must be a positive integer")
    mu = munonsmooth()
    measured, expected = [], []
    for n in n_list:
        y = mu(2.0 / n)
        xi = mu.inv(y)
        val = float((rho(xi - 1.0 / n) / n * mu.jac(y)).ravel()[0])
        measured.append((n, val))
        expected.append(munonsmooth_expected(n))
    vals = [m for _, m in measured]
    increasing = all(b > a for a, b in zip(vals, vals[1:]))
    return FixtureReport("munonsmooth", measured, expected, 1e-4, "rel", {"increasing": increasing,
                                                                         "checks_ok": increasing})


# ---------------------------------------------------------------------------
# lower bound for the pairing of u with the shifted rho


def _f_hilfe(x):
    x = np.asarray(x, float)
    inside = (x > 0) & (x < 1)
    xs = np.where(inside, x, 0.5)
    return np.where(inside, np.exp(1.0 / xs + 2.0 / xs**2) / xs**2, 0.0)


def hilfe_integral(t, n0=257, max_n=2**18 + 1, rtol=1e-3):
    """int_0^1 f(x) rho(x - t^2) dx by Simpson doubling on (t^2, 1)."""
    a = t * t
    prev, n, change = None, n0, np.inf
    while n <= max_n:
        x = np.linspace(a, 1.0, n)
        val = float(simpson(_f_hilfe(x) * rho(x - a), x=x))
        if prev is not None:
            change = abs(val - prev) / abs(val)
            if change < 1e-10:
                break
        prev, n = val, 2 * n - 1
    if change > rtol:
        raise ResolutionError(f"hilfe quadrature at t={t} changed by {change:.2e} on refinement")
    return val


def hilfe_bound(t):
    return math.exp(1.0 / (t * t) - 1.0) - math.e


def fixture_hilfe_bound(t_list=(0.7, 0.6, 0.5)):
    measured, expected = [], []
    for t in t_list:
        if not (0 < abs(t) <= 1 / math.sqrt(2)) or t * t < 0.15:
            raise UsageError(f"t={t} outside 0 < |t| <= 1/sqrt(2), t^2 >= 0.15")
        measured.append((t, hilfe_integral(t)))
        expected.append(hilfe_bound(t))
    increasing = all(b > a for a, b in zip(expected, expected[1:]))
    return FixtureReport("hilfe_bound", measured, expected, 0.0, "bound", {"bound_increasing": increasing})


def run_all():
    return [fixture_excond4_first(), fixture_excond4_second(), fixture_munonsmooth(), fixture_hilfe_bound()]
