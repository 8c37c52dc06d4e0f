import numpy as np
from hypothesis import HealthCheck, given, settings
from hypothesis import strategies as st

from colombeau.algebra import Delta, Regular, embed
from colombeau.apps import solve_delta_ode
from colombeau.diffeo import affine, cubic, transform_family
from colombeau.formalism import DomainSpec, in_U_eps
from colombeau.numerics import Box, SampledFunction, integrate, sup_norm
from colombeau.sweep import fit_order
from colombeau.testobjects import (constant_family, dual_basis, graded_lex, make_bump, make_mollifier, moment,
                                   project_to_Aq, scale, translate)

FAST = settings(max_examples=25, deadline=None, suppress_health_check=[HealthCheck.function_scoped_fixture])
reals = st.floats(-3, 3, allow_nan=False)
small = st.floats(-0.5, 0.5, allow_nan=False)
epsilons = st.floats(1e-3, 1.0)

MOLL = {q: make_mollifier(q) for q in (1, 2, 4)}
BASIS2 = dual_basis(2)


@FAST
@given(a=reals, b=reals, k=st.integers(1, 4))
def test_integrate_is_linear(a, b, k):
    box = Box(-1, 1)
    f = SampledFunction.from_analytic(box, lambda p: np.cos(k * p[..., 0]))
    g = SampledFunction.from_analytic(box, lambda p: p[..., 0] ** 2)
    h = f.with_values(a * f.values + b * g.values)
    bound = 1e-12 * (abs(a) + abs(b)) * max(sup_norm(f), sup_norm(g))
    assert abs(integrate(h) - a * integrate(f) - b * integrate(g)) <= bound + 1e-300


@FAST
@given(c=reals, k=st.integers(1, 5))
def test_integrate_odd_function_vanishes(c, k):
    f = SampledFunction.from_analytic(Box(c - 1, c + 1), lambda p: np.sin(k * (p[..., 0] - c)) ** 3)
    assert abs(integrate(f)) <= 1e-12


@FAST
@given(q=st.sampled_from([1, 2, 4]), eps=epsilons, j=st.integers(0, 4))
def test_scale_moments(q, eps, j):
    phi = MOLL[q]
    assert abs(moment(scale(phi, eps), (j,)) - eps**j * moment(phi, (j,))) <= 1e-10


@FAST
@given(x=reals)
def test_translate_keeps_mass(x):
    assert abs(integrate(translate(MOLL[2], x)) - 1.0) <= 1e-12


@FAST
@given(shift=small, width=st.floats(0.5, 1.0))
def test_project_to_Aq_mass_and_idempotence(shift, width):
    bump = make_bump(width, center=shift, box=Box(-1, 1))
    p1 = project_to_Aq(bump, 2, BASIS2)
    p2 = project_to_Aq(p1, 2, BASIS2)
    assert abs(integrate(p1) - 1.0) <= 1e-10
    assert np.max(np.abs(p1.values - p2.values)) <= 1e-10
    assert max(abs(moment(p1, a)) for a in graded_lex(2, 1)) <= 1e-8


@FAST
@given(x=small, eps=epsilons, grow=st.floats(0.0, 2.0))
def test_in_U_eps_monotone_in_domain(x, eps, grow):
    phi = MOLL[2]
    small_dom = DomainSpec(Box(-1, 1))
    big_dom = DomainSpec(Box(-1 - grow, 1 + grow))
    if in_U_eps(phi, x, small_dom, eps):
        assert in_U_eps(phi, x, big_dom, eps)
    wide = make_mollifier(2, 2.0)
    if in_U_eps(wide, x, small_dom, eps):
        assert in_U_eps(phi, x, small_dom, eps)


@FAST
@given(a=reals, b=reals, x=small, loc=small)
def test_embedding_is_linear(a, b, x, loc):
    phi = scale(MOLL[2], 0.3)
    xs = np.array([x])
    lhs = embed(Regular(lambda t: a * np.sin(t) + b * _gauss(t)))(phi, xs)
    rhs = a * embed(Regular(np.sin))(phi, xs) + b * embed(Regular(_gauss))(phi, xs)
    assert abs(lhs - rhs) <= 1e-10 * (1 + abs(a) + abs(b))
    d = a * embed(Delta(loc))(phi, xs) + b * embed(Delta(-loc))(phi, xs)
    direct = a * phi(np.array([[loc - x]]))[0] + b * phi(np.array([[-loc - x]]))[0]
    assert abs(d - direct) <= 1e-10 * (1 + abs(a) + abs(b)) * sup_norm(phi)


def _gauss(t):
    return np.exp(-t * t)


@FAST
@given(c=st.floats(0.1, 10.0), p=st.floats(-2.0, 4.0))
def test_fit_order_recovers_exponent(c, p):
    eps = 0.5 ** np.arange(1, 11)
    assert abs(fit_order(eps, c * eps**p) - p) <= 1e-8


@FAST
@given(a=st.floats(0.2, 5.0), sign=st.sampled_from([-1.0, 1.0]), b=reals)
def test_affine_check(a, sign, b):
    assert affine(sign * a, b).check(np.linspace(-2, 2, 100))["ok"]


@FAST
@given(eps=st.floats(1e-3, 0.5), x=st.floats(-0.4, 0.4))
def test_transform_family_mass(eps, x):
    fam = transform_family(cubic(0.2), constant_family(MOLL[2]), source_K=Box(-1, 1))
    if fam.contains(eps, x):
        phi = fam(eps, x)
        assert abs(integrate(phi) - 1.0) <= 1e-8
        assert Box.cube(fam.meta["lipschitz"] * 1.0 + 1e-12).contains_box(phi.box)


@FAST
@given(c=st.floats(-2, 2), x0=reals, v0=reals, eps=st.floats(0.02, 0.4))
def test_ode_velocity_changes_only_inside_support(c, x0, v0, eps):
    tr = solve_delta_ode(lambda x: c + 0.0 * x, x0, v0, MOLL[1], eps)
    a, b = -eps * MOLL[1].box.hi[0], -eps * MOLL[1].box.lo[0]
    outside = (tr.t < a) | (tr.t > b)
    before, after = outside & (tr.t < a), outside & (tr.t > b)
    assert np.ptp(tr.xdot[before]) <= 1e-8 and np.ptp(tr.xdot[after]) <= 1e-8
    assert abs(tr.velocity_jump - c) <= 1e-10
