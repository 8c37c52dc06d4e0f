import numpy as np
import pytest

from colombeau.algebra import Delta, Regular, embed, embed_smooth
from colombeau.asymptotics import (Inconclusive, Moderate, Negligible, check_exact_Aq, classify,
                                   default_battery, prescaled_family, run_sweep, verdict_record)
from colombeau.errors import DomainError, UsageError
from colombeau.formalism import DomainSpec
from colombeau.numerics import Box
from colombeau.sweep import EpsLadder
from colombeau.testobjects import constant_family, make_mollifier

SHORT = EpsLadder(0.5, 0.5, 7)


def test_sigma_sweep_is_flat(moll2):
    res = run_sweep(embed_smooth(np.sin), constant_family(moll2), Box(0, 1), 0, SHORT)
    assert res.slope == pytest.approx(0.0, abs=0.05)
    assert res.g[0] == pytest.approx(np.sin(1.0), rel=1e-12)


def test_delta_sweep_slope(moll2):
    res = run_sweep(embed(Delta(0.0)), constant_family(moll2), Box(-0.25, 0.25), 0, SHORT)
    assert res.slope == pytest.approx(-1.0, abs=0.1)


def test_iota_minus_sigma_sweep():
    phi = make_mollifier(2, 8.0, center=3.2)
    R = embed(Regular(np.sin)) - embed_smooth(np.sin)
    res = run_sweep(R, constant_family(phi, 2), Box(-1, 1), 0, EpsLadder(2**-3, 0.5, 8))
    assert res.slope >= 2.7


def test_run_sweep_is_deterministic(moll2):
    R = embed(Regular(np.cos))
    a = run_sweep(R, constant_family(moll2), Box(-0.5, 0.5), 1, EpsLadder(0.5, 0.5, 4))
    b = run_sweep(R, constant_family(moll2), Box(-0.5, 0.5), 1, EpsLadder(0.5, 0.5, 4))
    assert a == b and a.to_csv() == b.to_csv()


def test_run_sweep_domain_error(moll2):
    R = embed(Regular(np.sin), DomainSpec(Box(-1, 1)))
    with pytest.raises(DomainError, match="shrink eps0"):
        run_sweep(R, constant_family(moll2), Box(-0.8, 0.8), 0, EpsLadder(0.5, 0.5, 3))


def test_scaling_coherence(moll2):
    R = embed(Delta(0.0))
    fam = constant_family(moll2)
    a = run_sweep(R, fam, Box(-0.25, 0.25), 1, SHORT)
    b = run_sweep(R, prescaled_family(fam, 0.5), Box(-0.25, 0.25), 1, SHORT)
    assert abs(a.slope - b.slope) <= 0.1


def test_classify_delta_moderate():
    bat = default_battery(2)
    v = classify(embed(Delta(0.0)), bat, [Box(-0.25, 0.25)], [(0,), (1,)], ladder=SHORT)
    assert isinstance(v, Moderate) and v.N <= 2
    assert verdict_record(v).startswith("moderate,")


def test_classify_negligible_and_monotone_in_n():
    q = 2
    bat = default_battery(q, mode="negligible")
    R = embed(Regular(np.sin)) - embed_smooth(np.sin)
    kw = dict(K_list=[Box(-0.5, 0.5)], mode="negligible", q=q, ladder=SHORT)
    v3 = classify(R, bat, n=3, **kw)
    assert isinstance(v3, Negligible) and v3.n == 3
    for n in (1, 2):
        assert isinstance(classify(R, bat, n=n, **kw), Negligible)
    v6 = classify(R, bat, n=6, **kw)
    assert isinstance(v6, Inconclusive) and "slope" in v6.reason


def test_classify_rejects_non_Aq_family_in_negligible_mode():
    with pytest.raises(UsageError):
        classify(embed_smooth(np.sin), default_battery(2), mode="negligible", n=1, q=2, ladder=SHORT)


def test_classify_errors():
    with pytest.raises(UsageError):
        classify(embed_smooth(np.sin), [])
    with pytest.raises(UsageError):
        classify(embed_smooth(np.sin), default_battery(1), mode="sideways", n=1, q=1, ladder=SHORT)


def test_default_battery_members_are_exact_where_claimed():
    bat = default_battery(3)
    samples = [(0.5, np.array([0.3])), (0.125, np.array([-0.7]))]
    assert check_exact_Aq(bat[0], 3, samples) and check_exact_Aq(bat[1], 3, samples)
    assert not check_exact_Aq(bat[2], 3, samples)
    assert len(default_battery(3, mode="negligible")) == 2
