import math
import warnings

import numpy as np
import pytest

from nlscrit.hodograph import potentials as pot
from nlscrit.hodograph import initial_data as idata

X = np.linspace(-5, 5, 201) + 1e-3


@pytest.mark.parametrize("A0,mu", [(1.0, 0.0), (1.0, 2.0), (1.5, 3.0), (0.8, 0.5)])
def test_symmetric_families_recovered(A0, mu):
    f = pot.satsuma_yajima(A0) if mu == 0 else pot.symmetric_mu(A0, mu)
    u, v, _ = idata.reconstruct_initial_data(f)(X)
    assert np.max(np.abs(u - A0 ** 2 / np.cosh(X) ** 2)) <= 1e-8
    assert np.max(np.abs(v + mu * np.tanh(X))) <= 1e-8


def test_tvz_is_mu_two():
    u, v, _ = idata.reconstruct_initial_data(pot.tvz_mu2())(X)
    assert np.max(np.abs(u - 1 / np.cosh(X) ** 2)) <= 1e-8
    assert np.max(np.abs(v + 2 * np.tanh(X))) <= 1e-8


def test_phase_derivative_is_velocity():
    for f in (pot.symmetric_mu(1.0, 2.0), pot.nonsymmetric(0.1)):
        c = idata.reconstruct_initial_data(f)
        h = 1e-4
        x = np.linspace(-4, 4, 33) + 0.01
        dS = (c(x + h)[2] - c(x - h)[2]) / (2 * h)
        assert np.max(np.abs(dS - c(x)[1])) < 1e-7
    # mu = 2 phase is -2 log cosh x
    c = idata.reconstruct_initial_data(pot.symmetric_mu(1.0, 2.0))
    assert np.max(np.abs(c(X)[2] + 2 * np.log(np.cosh(X)))) < 1e-8


@pytest.mark.parametrize("alpha", [0.1, 0.05, -0.1, 0.2])
def test_tail_constants_are_roots_of_the_data_equation(alpha):
    vp, vm = idata.tail_velocities(alpha)
    f = pot.nonsymmetric(alpha)
    # alpha v^2 + 2v -+ 4 = 0 closed form versus a numerical root of f_v(0, v)
    assert abs(alpha * vp ** 2 + 2 * vp - 4) < 1e-12
    assert abs(alpha * vm ** 2 + 2 * vm + 4) < 1e-12
    nvp, nvm = idata.tail_velocities_numeric(f)
    assert abs(nvp - vp) < 1e-12 and abs(nvm - vm) < 1e-12


def test_tail_constants_reduce_to_plus_minus_two():
    vp, vm = idata.tail_velocities(1e-9)
    assert abs(vp - 2) < 1e-7 and abs(vm + 2) < 1e-7
    assert idata.tail_velocities(0.0) == (2.0, -2.0)


def test_far_solves_approach_tail_constants():
    alpha = 0.1
    f = pot.nonsymmetric(alpha)
    vp, vm = idata.tail_velocities(alpha)
    c = idata.reconstruct_initial_data(f)
    assert abs(c.v[0] - vp) < 1e-5 and abs(c.v[-1] - vm) < 1e-4
    # the printed constants are far from what the equations give
    pvp, pvm = idata.tail_velocities_printed(alpha)
    assert abs(pvp - vp) > 1 and abs(pvm - vm) > 1


def test_tail_splice_is_continuous():
    c = idata.reconstruct_initial_data(pot.nonsymmetric(0.1))
    assert c.splice_mismatch < 1e-6
    a, b = c.interval
    for e in (a, b):
        lo, hi = c(np.array([e - 1e-9])), c(np.array([e + 1e-9]))
        assert abs(lo[0][0] - hi[0][0]) <= 1e-6 * hi[0][0]
        assert abs(lo[2][0] - hi[2][0]) < 1e-7


def test_narrow_interval_warns_about_splice():
    with warnings.catch_warnings(record=True) as w:
        warnings.simplefilter("always")
        idata.reconstruct_initial_data(pot.nonsymmetric(0.1), interval=(-4.0, 4.0), n=129)
    assert any(issubclass(x.category, idata.GibbsRiskWarning) for x in w)


def test_symmetric_curve_has_no_tail_model():
    c = idata.reconstruct_initial_data(pot.satsuma_yajima(), interval=(-5.0, 5.0), n=129)
    with pytest.raises(ValueError):
        c(np.array([6.0]))


def test_data_equations_residual():
    f = pot.nonsymmetric(0.1)
    x = np.linspace(-6, 6, 25)
    u, v = idata.solve_data_equations(f, x)
    assert np.all(u > 0)
    assert np.max(np.abs(f.partial(1, 0, u, v) - x)) < 1e-11
    assert np.max(np.abs(f.partial(0, 1, u, v))) < 1e-11


def test_tail_model_matches_solves():
    alpha = 0.1
    f = pot.nonsymmetric(alpha)
    for side, x in ((-1, np.array([-14.0])), (1, np.array([10.0]))):
        u, v = idata.solve_data_equations(f, x)
        tu, tv = idata.nonsymmetric_tails(alpha, x, side)
        assert abs(tu[0] - u[0]) / u[0] < 1e-4
        assert abs(tv[0] - v[0]) < 1e-4 * abs(v[0]) + 1e-8


def test_csv_round_trip(tmp_path):
    c = idata.reconstruct_initial_data(pot.satsuma_yajima(), interval=(-5.0, 5.0), n=65)
    p = tmp_path / "data.csv"
    c.to_csv(p)
    data = np.loadtxt(p, delimiter=",", skiprows=1)
    assert data.shape == (66, 4)
    assert np.allclose(data[:, 1], c.u, rtol=1e-15)
    assert math.isclose(data[0, 0], -5.0)
