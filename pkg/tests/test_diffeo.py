import numpy as np
import pytest

from colombeau.algebra import Delta, Regular, embed
from colombeau.diffeo import (affine, compose, cubic, identity, image_box, moment_degradation_check,
                              munonsmooth, pullback_distribution, pullback_representative, push_test_function,
                              transform_family)
from colombeau.errors import UsageError
from colombeau.numerics import Box, integrate
from colombeau.sweep import EpsLadder
from colombeau.testobjects import constant_family, make_mollifier, moment, scale

POINTS = np.linspace(-2, 2, 100)


@pytest.mark.parametrize("mu", [identity(), affine(2.0, 0.3), affine(-0.5, 1.0), cubic(0.2)])
def test_diffeo_invariants(mu):
    rep = mu.check(POINTS)
    assert rep["ok"], rep


def test_munonsmooth_invariants():
    assert munonsmooth().check(np.linspace(0.01, 3, 100))["ok"]


def test_cubic_requires_positive_coefficient():
    with pytest.raises(UsageError):
        cubic(-0.1)


def test_identity_transform_is_input(moll2):
    fam = constant_family(moll2)
    assert transform_family(identity(), fam) is fam


def test_affine_transform_closed_form(moll2):
    a, b = 2.0, 0.3
    fam = transform_family(affine(a, b), constant_family(moll2))
    for eps in (0.5, 0.125):
        phi = fam(eps, 0.7)
        xi = np.linspace(-1.5, 1.5, 31)[:, None]
        assert np.allclose(phi(xi), moll2(xi / a) / abs(a), atol=1e-12)


def test_transform_preserves_mass_and_support_bound(moll4):
    mu = cubic(0.2)
    fam = transform_family(mu, constant_family(moll4), source_K=Box(-1.5, 1.5))
    l = fam.meta["lipschitz"]
    for eps in (0.5, 0.1, 0.01):
        for x in (-0.3, 0.0, 0.4):
            phi = fam(eps, x)
            assert integrate(phi) == pytest.approx(1.0, abs=1e-8)
            assert Box.cube(l * 1.0 + 1e-12).contains_box(phi.box)


def test_transform_domain_is_partial(moll2):
    mu = munonsmooth()
    fam = transform_family(mu, constant_family(moll2))
    assert not fam.contains(2.0, 0.01)
    assert fam.contains(0.01, mu(2.0)[0])


def test_family_functoriality(moll2):
    mu, nu = cubic(0.2), affine(1.5, 0.2)
    fam = constant_family(moll2)
    direct = transform_family(compose(mu, nu), fam)
    stepwise = transform_family(mu, transform_family(nu, fam))
    xi = np.linspace(-2, 2, 41)[:, None]
    for eps, x in [(0.5, 0.3), (0.1, -0.8)]:
        assert np.allclose(direct(eps, x)(xi), stepwise(eps, x)(xi), atol=1e-9)


def test_pullback_identity_and_contravariance(moll2, rng):
    R = embed(Regular(np.sin))
    assert pullback_representative(identity(), R) is R
    mu, nu = cubic(0.2), affine(1.5, 0.2)
    a = pullback_representative(compose(mu, nu), R)
    b = pullback_representative(nu, pullback_representative(mu, R))
    for x in rng.uniform(-1, 1, 20):
        assert a(moll2, x) == pytest.approx(b(moll2, x), abs=1e-9)


def test_pullback_commutes_with_embedding(moll2):
    mu = cubic(0.2)
    u = Regular(np.sin)
    lhs = pullback_representative(mu, embed(u))
    rhs = embed(pullback_distribution(mu, u))
    for x in (-0.5, 0.1, 0.9):
        assert lhs(moll2, x) == pytest.approx(rhs(moll2, x), abs=1e-6)


def test_pullback_delta(moll2):
    mu = affine(2.0, 0.4)
    d = pullback_distribution(mu, Delta(1.0))
    assert d.location[0] == pytest.approx(0.3) and d.weight == pytest.approx(0.5)
    lhs = pullback_representative(mu, embed(Delta(1.0)))(moll2, 0.1)
    assert lhs == pytest.approx(embed(d)(moll2, 0.1), abs=1e-12)


def test_push_test_function_is_in_A0(moll2):
    phi = push_test_function(cubic(0.2), moll2, 0.4, 0.3)
    assert integrate(phi) == pytest.approx(1.0, abs=1e-8)


def test_moment_degradation_identity_and_affine():
    K = Box(-0.5, 0.5)
    lad = EpsLadder(0.5, 0.5, 6)
    for mu in (identity(), affine(2.0, 0.3)):
        rep = moment_degradation_check(mu, 4, K, lad, order=4)
        assert rep.certified
        assert max(max(r.g) for r in rep.results.values()) <= 1e-8


def test_moment_degradation_cubic():
    rep = moment_degradation_check(cubic(0.2), 4, Box(-0.5, 0.5), EpsLadder(0.5, 0.5, 8))
    assert rep.q == 2 and rep.certified
    assert all(r.slope >= 1.7 for r in rep.results.values())


def test_image_box():
    assert image_box(affine(2.0, 1.0), Box(0, 1)) == Box(1, 3)


def test_pullback_against_quad_oracle(moll2):
    from scipy.integrate import quad
    mu, x = cubic(0.2), 0.3
    phi = scale(moll2, 0.4)
    val = pullback_representative(mu, embed(Regular(np.sin)))(phi, x)
    ref = quad(lambda t: np.sin(t + 0.2 * t**3) * phi(np.array([[t - x]]))[0], x - 0.4, x + 0.4,
               epsabs=1e-13, limit=200)[0]
    assert val == pytest.approx(ref, abs=1e-12)
