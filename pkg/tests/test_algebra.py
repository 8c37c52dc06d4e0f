import numpy as np
import pytest

from colombeau.algebra import (Chart, DerivativeOf, Delta, Regular, association_test, combine, d1_directional,
                               derive_C, derive_J, embed, embed_smooth, glue, localize, pair, to_J)
from colombeau.errors import DomainError, UsageError
from colombeau.numerics import Box, integrate, linear_combination, smooth_plateau
from colombeau.sweep import EpsLadder
from colombeau.testobjects import (constant_family, differentiate, dual_basis, make_bump, make_mollifier,
                                   moment, translate)

ident = lambda x: x


def test_embed_constant_and_delta(moll2, bump):
    assert embed(Regular(lambda x: np.ones_like(x)))(moll2, 0.7) == pytest.approx(1.0, abs=1e-10)
    assert embed(Delta(0.0))(bump, 0.0) == bump(np.array([[0.0]]))[0]


def test_iota_minus_sigma_identity_is_first_moment(moll2, bump):
    R = embed(Regular(ident)) - embed_smooth(ident)
    for phi in (moll2, translate(bump, 0.2)):
        assert R(phi, 0.3) == pytest.approx(moment(phi, 1), abs=1e-12)


def test_embed_smooth_examples(bump):
    assert embed_smooth(lambda x: np.ones_like(x))(bump, 0.0) == 1.0
    assert embed_smooth(np.sin)(bump, np.pi / 2) == 1.0


def test_combine_examples(bump):
    f, g = embed_smooth(np.sin), embed_smooth(np.cos)
    prod = combine("mul", f, g)
    fg = embed_smooth(lambda x: np.sin(x) * np.cos(x))
    assert prod(bump, 0.4) == fg(bump, 0.4)
    iota = embed(Regular(ident))
    defect = iota * iota - embed(Regular(lambda x: x * x))
    phi = translate(bump, 0.25)
    assert defect(phi, 0.0) == pytest.approx(moment(phi, 1) ** 2 - moment(phi, 2), abs=1e-12)
    with pytest.raises(UsageError):
        combine("add", f, to_J(g))
    with pytest.raises(UsageError):
        combine("pow", f, g)


def test_embedding_linearity(rng, moll2):
    u, v = Regular(np.sin), Regular(np.cos)
    a, b = 1.5, -0.7
    uv = embed(Regular(lambda x: a * np.sin(x) + b * np.cos(x)))
    for x in rng.uniform(-1, 1, 10):
        assert uv(moll2, x) == pytest.approx(a * embed(u)(moll2, x) + b * embed(v)(moll2, x), abs=1e-10)


def test_derivative_nesting_depth():
    u = Delta()
    for _ in range(4):
        u = DerivativeOf(u, 1)
    with pytest.raises(UsageError):
        DerivativeOf(u, 1)


def test_regular_nonfinite_sampler(bump):
    with pytest.raises(DomainError):
        pair(Regular(np.log), bump, 0.0)


def test_derive_C_sigma(bump):
    d = derive_C(embed_smooth(np.sin), 0)
    assert d(bump, 0.3) == pytest.approx(np.cos(0.3), abs=1e-7)


def test_derive_C_delta(bump):
    d = derive_C(embed(Delta(0.0)))
    dphi = differentiate(bump, 1)
    for x in (-0.4, 0.1):
        assert d(bump, x) == pytest.approx(-dphi(np.array([[-x]]))[0], abs=1e-7)
    generic = derive_C(embed(Delta(0.0)), fast=False)
    assert generic(bump, 0.1) == pytest.approx(d(bump, 0.1), abs=1e-6)


def test_derive_C_commuting_square(rng, moll2):
    u = Regular(np.sin)
    slow = derive_C(embed(u), fast=False)
    fast = embed(DerivativeOf(u, 1))
    for x in rng.uniform(-1, 1, 50):
        assert slow(moll2, x) == pytest.approx(fast(moll2, x), abs=1e-6)


def test_derive_C_mixed_partials_commute():
    phi = make_mollifier(1, 1.0, 2)
    rep = embed(Regular(lambda x, y: np.sin(x) * np.exp(y)))
    d12 = derive_C(derive_C(rep, 0, fast=False), 1, fast=False)
    d21 = derive_C(derive_C(rep, 1, fast=False), 0, fast=False)
    x = np.array([0.2, -0.1])
    assert d12(phi, x) == pytest.approx(d21(phi, x), abs=1e-6)


def test_derive_J_diagram(rng, moll2):
    rep = embed(Regular(np.sin))
    lhs, rhs = derive_J(to_J(rep)), to_J(derive_C(rep))
    for x in rng.uniform(-0.5, 0.5, 5):
        assert lhs(moll2, x) == pytest.approx(rhs(moll2, x), abs=1e-6)
    ref = to_J(embed(Regular(np.cos)))
    assert lhs(moll2, 0.1) == pytest.approx(ref(moll2, 0.1), abs=1e-6)
    sj = derive_J(to_J(embed_smooth(np.sin)))
    assert sj(moll2, 0.2) == pytest.approx(np.cos(0.2), abs=1e-7)


def test_d1_directional_examples(moll2):
    psi = dual_basis(2).functions[0]
    rep = embed(Regular(np.sin))
    assert d1_directional(rep, moll2, 0.2, [psi]) == pytest.approx(rep.fn(psi, np.array([0.2])), abs=1e-9)
    sq = combine("mul", embed(Regular(ident)) - embed_smooth(ident), embed(Regular(ident)) - embed_smooth(ident))
    phi = translate(moll2, 0.1)
    expect = 2 * moment(phi, 1) * moment(psi, 1)
    assert d1_directional(sq, phi, 0.0, [psi]) == pytest.approx(expect, abs=1e-7)
    assert d1_directional(embed_smooth(np.sin), moll2, 0.3, [psi]) == 0.0
    with pytest.raises(DomainError):
        d1_directional(rep, moll2, 0.0, [moll2])


def test_glue_single_chart_is_identity(moll2):
    chart = Chart(Box(-10, 10), lambda x: np.ones_like(x), make_mollifier(0), lambda x: np.ones_like(x))
    rep = embed(Regular(np.sin))
    g = glue([chart], [rep])
    for x in (-0.5, 0.0, 0.9):
        assert g(moll2, x) == rep(moll2, x)


def test_localize_identity_inside_W(moll2):
    chart = Chart(Box(-5, 5), lambda x: smooth_plateau(x, -3, 3, 1), make_mollifier(0), lambda x: 1.0 + 0 * x)
    assert localize(chart, moll2, np.array([0.5])) is moll2


def test_localize_restores_mass():
    chart = Chart(Box(-2, 2), lambda x: smooth_plateau(x, -1, 1, 0.5), make_bump(0.3), lambda x: 1.0 + 0 * x)
    wide = make_mollifier(0, 3.0)
    loc = localize(chart, wide, np.array([0.2]))
    assert integrate(loc) == pytest.approx(1.0, abs=1e-9)


def test_glue_two_intervals_sigma():
    f = np.sin
    left = lambda x: 1.0 - smooth_plateau(x, 0.5, 10, 1.0)
    right = lambda x: smooth_plateau(x, 0.5, 10, 1.0)
    psi = make_bump(0.1)
    cover = [Chart(Box(-10, 1.6), lambda x: np.ones_like(x), psi, left),
             Chart(Box(-0.6, 10), lambda x: np.ones_like(x), psi, right)]
    g = glue(cover, [embed_smooth(f), embed_smooth(f)])
    for x in np.linspace(-1, 1.5, 11):
        assert g(make_bump(0.2), x) == pytest.approx(np.sin(x), abs=1e-8)
    bad = glue(cover[:1], [embed_smooth(f)])
    with pytest.raises(UsageError):
        bad(make_bump(0.2), 1.0)


def test_association_examples(moll2):
    fam = constant_family(moll2, 2)
    psi = make_bump(0.5, 1, 33)
    same = association_test(embed(Regular(np.sin)), embed(Regular(np.sin)), psi, fam, EpsLadder(0.5, 0.5, 4))
    assert all(v == 0 for v in same.extra["values"]) and same.extra["associated"]
    res = association_test(embed(Regular(np.sin)), embed_smooth(np.sin), psi, fam, EpsLadder(0.5, 0.5, 6))
    assert res.slope >= 2.7 and res.extra["associated"]
    iota = embed(Regular(ident))
    res2 = association_test(iota * iota, embed(Regular(lambda x: x * x)), psi, fam, EpsLadder(0.5, 0.5, 5))
    m2 = moment(moll2, 2)
    assert res2.extra["values"][0] == pytest.approx(-(0.5**2) * m2 * integrate(psi), rel=1e-6)
    assert res2.extra["associated"]
