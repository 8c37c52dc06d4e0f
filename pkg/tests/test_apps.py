import numpy as np
import pytest
from scipy.integrate import solve_ivp

from colombeau.apps import (contraction_bound, ode_moderateness_probe, ode_representative,
                            retarded_potential_reference, solve_delta_ode, solve_wave_1d, solve_wave_kirchhoff)
from colombeau.apps.wave import sphere_rule
from colombeau.asymptotics import Moderate
from colombeau.errors import IterationError, UsageError
from colombeau.numerics import Box, smooth_step
from colombeau.sweep import EpsLadder
from colombeau.testobjects import make_mollifier, scale


# ----- ODE


def test_ode_zero_forcing_is_linear(moll2):
    tr = solve_delta_ode(lambda x: 0.0 * x, 0.3, -0.2, moll2, 0.1)
    assert np.allclose(tr.x, 0.3 - 0.2 * (tr.t + 1), atol=1e-15)
    assert tr.velocity_jump == 0.0


@pytest.mark.parametrize("eps", [0.25, 2.0**-6])
def test_ode_constant_forcing_jump(moll2, eps):
    tr = solve_delta_ode(lambda x: 1.5 + 0.0 * x, 0.0, 0.0, moll2, eps)
    assert tr.velocity_jump == pytest.approx(1.5, abs=1e-12)


def test_ode_matches_solve_ivp(moll2):
    eps = 2.0**-4
    tr = solve_delta_ode(np.sin, 0.3, 0.1, moll2, eps)
    sphi = scale(moll2, eps)
    sol = solve_ivp(lambda t, y: [y[1], np.sin(y[0]) * sphi(np.array([[-t]]))[0]], (-1, 1), [0.3, 0.1],
                    rtol=1e-12, atol=1e-13, max_step=eps / 50)
    assert tr.x[-1] == pytest.approx(sol.y[0, -1], abs=1e-9)
    assert tr.xdot[-1] == pytest.approx(sol.y[1, -1], abs=1e-9)


def test_ode_time_reversal(moll2):
    eps = 0.125
    fwd = solve_delta_ode(np.sin, 0.3, 0.1, moll2, eps)
    # symmetric mollifier: t -> -t maps the problem to itself with reversed velocity
    back = solve_delta_ode(np.sin, fwd.x[-1], -fwd.xdot[-1], moll2, eps)
    assert back.x[-1] == pytest.approx(0.3, abs=1e-10)
    assert back.xdot[-1] == pytest.approx(-0.1, abs=1e-10)


def test_ode_usage_errors(moll2):
    with pytest.raises(UsageError):
        solve_delta_ode(np.sin, 0, 0, moll2, 2.0)
    with pytest.raises(UsageError):
        solve_delta_ode(np.sin, 0, 0, moll2, 0.1, dt=0.01)


def test_ode_representative_and_moderateness(moll2):
    R = ode_representative(np.sin, 0.3, 0.0)
    tr = solve_delta_ode(np.sin, 0.3, 0.0, moll2, 0.5)
    assert R(scale(moll2, 0.5), np.array([0.9])) == pytest.approx(np.interp(0.9, tr.t, tr.x), abs=1e-7)
    v = ode_moderateness_probe(np.sin, 0.3, 0.0, ladder=EpsLadder(0.5, 0.5, 5))
    assert isinstance(v, Moderate) and v.N == 0


# ----- wave


def _source(y, s):
    r2 = np.sum(np.asarray(y) ** 2, axis=-1) / 0.36
    inside = r2 < 1
    g = np.where(inside, np.exp(-1.0 / np.where(inside, 1.0 - r2, 1.0)), 0.0)
    return 5.0 * g * smooth_step((np.asarray(s) + 0.1) / 0.5)


SPACE = Box.cube(1.5, 3)


def test_sphere_rule_is_mean_value():
    x, w = sphere_rule(11)
    assert w.sum() == pytest.approx(1.0)
    assert (x[:, 2] ** 2) @ w == pytest.approx(1 / 3)


def test_wave_zero_source():
    wf = solve_wave_kirchhoff(lambda u: 0.0 * u, lambda y, s: 0.0 * s, SPACE, 0.5, nx=5, nt=4)
    assert wf.iteration_residuals == [0.0] and not wf.values.any()


def test_wave_linear_against_reference():
    wf = solve_wave_kirchhoff(lambda u: 0.0 * u, _source, SPACE, 0.8, nx=9, nt=8, source_radius=0.6)
    pts = np.array([[0.0, 0.0, 0.0], [0.3, 0.2, -0.1]])
    ref = retarded_potential_reference(_source, pts, 0.8, Box.cube(0.6, 3), n=96)
    assert np.max(np.abs(wf.probe(pts, 0.8) - ref)) / np.max(np.abs(ref)) < 1e-3
    assert np.all(wf(pts, -0.1) == 0.0)


def test_wave_contraction():
    lip = 2.0
    wf = solve_wave_kirchhoff(lambda u: lip * np.sin(u), _source, SPACE, 0.8, nx=7, nt=6, tol=1e-9,
                              source_radius=0.6)
    r = wf.iteration_residuals
    ratios = [b / a for a, b in zip(r, r[1:]) if a > 1e-12]
    assert max(ratios) <= contraction_bound(lip, 0.8)


def test_wave_errors():
    with pytest.raises(UsageError):
        solve_wave_kirchhoff(lambda u: u + 1.0, _source, SPACE)
    with pytest.raises(UsageError):
        solve_wave_kirchhoff(lambda u: 0 * u, _source, Box.cube(1.0, 3), 0.8, source_radius=0.6)
    with pytest.raises(IterationError) as exc:
        solve_wave_kirchhoff(lambda u: 20 * np.sin(u), _source, SPACE, 0.8, nx=5, nt=4, max_iter=3,
                             source_radius=0.6)
    assert len(exc.value.residuals) == 3


def test_wave_1d_constant_source():
    wf = solve_wave_1d(lambda u: 0.0 * u, lambda x, s: (s >= -0.1) * 1.0 + 0.0 * x, Box(-3, 3), 0.8, nx=121)
    mid = np.argmin(np.abs(wf.axes[0]))
    assert np.allclose(wf.values[mid], (wf.t + 0.1) ** 2 / 2, atol=1e-12)
