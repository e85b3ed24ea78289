import math

import numpy as np
import pytest

from nlscrit.hodograph import local, potentials as pot, solve
from nlscrit.hodograph.initial_data import reconstruct_initial_data

CATALOG = [pot.satsuma_yajima(1.0), pot.symmetric_mu(1.0, 1.0), pot.symmetric_mu(1.5, 3.0),
           pot.tvz_mu2(), pot.nonsymmetric(0.1), pot.nonsymmetric(-0.15)]


@pytest.mark.parametrize("f", CATALOG, ids=lambda f: f.label)
def test_linear_pde_on_grid(f):
    u, v = np.meshgrid(np.linspace(0.3, 4.0, 20), np.linspace(-1.5, 1.5, 20))
    res = f.pde_residual(u, v)
    scale = np.abs(f.partial(0, 2, u, v)) + np.abs(u * f.partial(2, 0, u, v)) + 1.0
    assert np.max(np.abs(res) / scale) < 1e-9


@pytest.mark.parametrize("f", CATALOG, ids=lambda f: f.label)
def test_partials_against_finite_differences(f):
    u0, v0, h = 1.7, 0.3, 1e-5
    for i, j in [(0, 0), (1, 0), (2, 1), (3, 1), (4, 1), (5, 0)]:
        du = (f.partial(i + 1, j, u0, v0) if i + j < 6 else None)
        fd = (f.partial(i, j, u0 + h, v0) - f.partial(i, j, u0 - h, v0)) / (2 * h)
        assert abs(fd - du) <= 1e-6 * max(1.0, abs(du))
        if i + j < 6:
            dv = f.partial(i, j + 1, u0, v0)
            fd = (f.partial(i, j, u0, v0 + h) - f.partial(i, j, u0, v0 - h)) / (2 * h)
            assert abs(fd - dv) <= 1e-6 * max(1.0, abs(dv))


def test_catalog_examples():
    assert abs(pot.tvz_mu2().partial(0, 1, 4.0, 0.0) + 1.0) < 1e-13
    u, v = np.meshgrid(np.linspace(0.5, 3, 7), np.linspace(-1, 1, 7))
    a, b = pot.nonsymmetric(0.0), pot.tvz_mu2()
    for ij in [(0, 0), (1, 0), (0, 1), (2, 1), (3, 0)]:
        assert np.allclose(a.partial(*ij, u, v), b.partial(*ij, u, v), rtol=1e-14, atol=1e-14)
    assert abs(pot.satsuma_yajima().pde_residual(1.7, 0.3)) < 1e-9


def test_catalog_parameter_errors():
    with pytest.raises(pot.DomainError):
        pot.symmetric_mu(-1.0, 0.0)
    with pytest.raises(pot.DomainError):
        pot.symmetric_mu(1.0, -1.0)
    with pytest.raises(pot.DomainError):
        pot.nonsymmetric(0.25)
    with pytest.raises(KeyError):
        pot.catalog_f("unknown")
    with pytest.raises(ValueError):
        pot.satsuma_yajima().partial(4, 3, 1.0, 0.0)


def test_hodograph_at_initial_time():
    f = pot.satsuma_yajima()
    u, v = solve.solve_hodograph(f, 1.0, 0.0, guess=(0.45, 0.0), branch=1)
    assert abs(u - 1 / math.cosh(1.0) ** 2) < 1e-12 and abs(v) < 1e-12
    u, v = solve.solve_hodograph(f, 0.3, 0.0, guess=(0.9, 0.0), branch=1)
    assert abs(u - 1 / math.cosh(0.3) ** 2) < 1e-12


def test_hodograph_origin_is_sech():
    f = pot.satsuma_yajima()
    # (1, 0) is a square-root branch point of the symmetric potential, so the
    # x = 0 value is reached as a limit: f_u -> 0 and the solve tends to sech^2
    d = 10.0 ** -np.arange(4, 12, 2)
    fu = np.abs(f.partial(1, 0, 1 - d, 0.0, 1))
    assert np.all(np.diff(fu) < 0) and fu[-1] < 1e-5
    assert abs(f.partial(0, 1, 1 - 1e-10, 0.0, 1)) < 1e-12
    u, v = solve.solve_hodograph(f, 1e-2, 0.0, guess=(0.999 / math.cosh(1e-2) ** 2, 0.0), branch=1)
    assert abs(u - 1 / math.cosh(1e-2) ** 2) < 1e-12 and abs(v) < 1e-12


@pytest.mark.parametrize("f", CATALOG, ids=lambda f: f.label)
def test_round_trip_with_initial_data(f):
    curve = reconstruct_initial_data(f, n=1025)
    x = np.linspace(-4, 4, 41) + 0.013
    u0, v0, _ = curve(x)
    for side in (1, -1):
        m = np.sign(x) == side
        g = (u0[m] * (1 + 1e-3), v0[m] + 1e-3)
        br = side if "alpha" not in f.params else 0
        u, v = solve.solve_hodograph(f, x[m], 0.0, guess=g, branch=br)
        assert np.max(np.abs(u - u0[m])) < 1e-8
        assert np.max(np.abs(v - v0[m])) < 1e-8


def test_critical_point_satsuma_yajima():
    cp = solve.find_critical_point(pot.satsuma_yajima(1.0))
    got = (cp.u0, cp.v0, cp.x0, cp.t0, cp.r, cp.psi, cp.s0)
    assert np.allclose(got, (2, 0, 0, 0.5, 4, 0, 0), atol=1e-8, rtol=0)


def test_critical_point_scaling_with_amplitude():
    # r = 4 A0^3 and u0 = 2 A0^2
    cp = solve.find_critical_point(pot.satsuma_yajima(1.5))
    assert abs(cp.r - 4 * 1.5 ** 3) < 1e-8 and abs(cp.u0 - 2 * 1.5 ** 2) < 1e-8


def test_critical_point_tvz():
    cp = solve.find_critical_point(pot.tvz_mu2())
    got = (cp.u0, cp.v0, cp.x0, cp.t0, cp.r, cp.psi)
    assert np.allclose(got, (4, 0, 0, 0.25, 32, 0), atol=1e-8, rtol=0)
    assert abs(cp.s0) < 1e-8


@pytest.mark.parametrize("alpha", [0.1, 0.05, -0.12])
def test_critical_point_nonsymmetric(alpha):
    f = pot.nonsymmetric(alpha)
    cp = solve.find_critical_point(f)
    ref = solve.nonsymmetric_closed_form(alpha)
    for k, val in ref.items():
        assert abs(getattr(cp, k) - val) < 1e-8, k
    assert abs(cp.s0) < 1e-8
    # defining relations of the catastrophe
    j = f.jet(cp.u0, cp.v0, order=3)
    assert abs(j[(2, 0)]) < 1e-10 and abs(j[(0, 2)]) < 1e-10
    assert abs(j[(1, 1)] + cp.t0) < 1e-12
    assert abs(np.exp(-1j * cp.psi) / cp.r - cp.a) < 1e-12
    assert abs(solve.hodograph_jacobian(f, cp.u0, cp.v0, cp.t0)) < 1e-12


def test_nonsymmetric_alpha_point_one_values():
    cp = solve.find_critical_point(pot.nonsymmetric(0.1))
    assert abs(cp.x0 - 0.5 * math.log(7 / 3)) < 1e-12
    assert abs(cp.r - 26.88) < 1e-9
    assert abs(cp.psi + math.atan(0.1 * math.sqrt(0.84) / 0.085)) < 1e-12


def test_local_functions_at_origin():
    for psi in (0.0, 0.4, -0.8):
        R, P0, Q0 = local.local_R_P0_Q0(0.0, 0.0, psi)
        assert abs(R - math.sqrt(2)) < 1e-15 and abs(P0) < 1e-15 and abs(Q0) < 1e-15


def test_local_symmetry_at_zero_psi():
    R1, P1, Q1 = local.local_R_P0_Q0(0.7, 0.2, 0.0)
    R2, P2, Q2 = local.local_R_P0_Q0(-0.7, 0.2, 0.0)
    assert abs(R1 - R2) < 1e-15 and abs(P1 - P2) < 1e-15 and abs(Q1 + Q2) < 1e-15
    R, _, _ = local.local_R_P0_Q0(1.0, 0.0, 0.0)
    assert abs(R - math.sqrt(1 + math.sqrt(2))) < 1e-15


def test_local_restriction():
    with pytest.raises(local.RestrictionError):
        local.local_R_P0_Q0(0.0, -1.0, 0.0)


def test_quadratic_root_against_local_functions():
    rng = np.random.default_rng(3)
    X, S = rng.uniform(-3, 3, (2, 1000))
    psi = rng.uniform(-1.2, 1.2, 1000)
    tb = -rng.uniform(0.01, 1, 1000)
    r = rng.uniform(0.5, 30, 1000)
    w = np.array([local.quadratic_root_w(X[i], S[i], psi[i], tb[i], r[i]) for i in range(1000)])
    res = np.array([local.quadratic_residual(w[i], X[i], S[i], psi[i], tb[i], r[i])
                    for i in range(1000)])
    assert np.max(np.abs(res) / (r * tb ** 2)) < 1e-12
    assert local.quadratic_root_w(0.0, 0.0, 0.3, -0.1, 4.0) == 0
    # w / (r tbar) = P0 + i Q0
    for i in range(20):
        _, P0, Q0 = local.local_R_P0_Q0(X[i], S[i], psi[i])
        assert abs(w[i] / (r[i] * tb[i]) - (P0 + 1j * Q0)) < 1e-12


def test_local_solution_matches_hodograph():
    f = pot.satsuma_yajima()
    cp = solve.find_critical_point(f)
    T, X = -0.01, 0.5
    x, s, t = local.from_local_coords(cp, X, 0.0, T)
    ul, vl = local.local_solution(cp, x, s, t)
    u, v = solve.solve_hodograph(f, np.array([x]), t, s, guess=(ul, vl))
    assert abs(u[0] - ul) / u[0] < 0.05
    # at X = S = 0 the correction vanishes
    x, s, t = local.from_local_coords(cp, 0.0, 0.0, T)
    assert np.allclose(local.local_solution(cp, x, s, t), (cp.u0, cp.v0), atol=1e-14)


def _scaled_limit_errors(f, X, S, T):
    cp = solve.find_critical_point(f)
    _, P0, Q0 = local.local_R_P0_Q0(X, S, cp.psi)
    lam = 4.0 ** -np.arange(1, 7)
    errs = []
    for la in lam:
        # t - t0 = sqrt(lambda) T, x and s shifted as in the local chart
        x, s, t = local.from_local_coords(cp, X, S, math.sqrt(la) * T)
        g = local.local_solution(cp, x, s, t)
        u, v = solve.solve_hodograph(f, np.array([x]), t, s, guess=g)
        du = (u[0] - cp.u0) / math.sqrt(la) - cp.r * T * P0
        dv = (v[0] - cp.v0) / math.sqrt(la) - cp.r / math.sqrt(cp.u0) * T * Q0
        errs.append(max(abs(du), abs(dv)))
    return lam, np.array(errs)


def test_scaled_limit_convergence_order():
    lam, errs = _scaled_limit_errors(pot.satsuma_yajima(), 0.7, 0.3, -1.0)
    assert np.all(np.diff(errs) < 0)
    order = np.polyfit(np.log(lam), np.log(errs), 1)[0]
    assert abs(order - 0.5) < 0.05


def test_local_maximum_bound():
    cp = solve.find_critical_point(pot.nonsymmetric(0.1))
    T, S = -0.02, 0.4
    X = np.linspace(-30, 30, 60001)
    x, s, t = local.from_local_coords(cp, X, S, T)
    u, _ = local.local_solution(cp, x, s, t)
    Xm, val = local.local_maximum(cp, S, T)
    assert abs(X[np.argmax(u)] - Xm) < 2e-3
    assert abs(np.max(u) - val) < 1e-6
    assert val < cp.u0


def test_local_maximum_symmetric_bound():
    # along S = 0 with psi = 0 the maximum sits at X = 0 and equals u0
    cp = solve.find_critical_point(pot.satsuma_yajima())
    T = -0.05
    X = np.linspace(-50, 50, 2001)
    x, s, t = local.from_local_coords(cp, X, 0.0, T)
    u, _ = local.local_solution(cp, x, s, t)
    bound = cp.u0 - cp.r * T - math.sqrt(cp.r) * math.sqrt(cp.r * T * T)
    assert np.all(u <= bound + 1e-12)
    assert abs(X[np.argmax(u)]) < 1e-12 and abs(np.max(u) - bound) < 1e-12
    assert local.local_maximum(cp, 0.0, T)[1] == pytest.approx(bound, abs=1e-14)


def test_far_field_matches_local_solution():
    for f in (pot.satsuma_yajima(), pot.nonsymmetric(0.1)):
        cp = solve.find_critical_point(f)
        T = -0.01
        for side in (1, -1):
            X = side * 1e3
            x, s, t = local.from_local_coords(cp, X, 0.0, T)
            u, v = local.local_solution(cp, x, s, t)
            xl = x - cp.x0 - cp.v0 * T
            uf, vf = local.far_field(cp, xl, T, side)
            assert abs(u - uf) <= 0.02 * abs(u)
            assert abs(v - vf) <= 0.02 * max(abs(v), 1.0)


def test_far_field_turns_negative():
    cp = solve.find_critical_point(pot.satsuma_yajima())
    u, _ = local.far_field(cp, 1e3, -0.01, 1)
    assert u < 0
    u, _ = local.far_field(cp, 0.0, -0.01, 1)
    assert abs(u - (cp.u0 - cp.r * -0.01)) < 1e-12


def test_cusp_profile():
    cp = solve.find_critical_point(pot.satsuma_yajima())
    assert local.cusp_profile(cp, 0.0) == cp.u0
    assert abs(local.cusp_profile(cp, 0.01) - 1.8) < 1e-14
    assert abs(local.cusp_profile(cp, -0.01) - 1.8) < 1e-14


def test_umbilic_stationary_points():
    pts = local.umbilic_stationary_points(-0.5, 0.0)
    assert sorted(pts) == [(-1.0, 0.0), (1.0, 0.0)] or np.allclose(sorted(pts), [(-1, 0), (1, 0)])
    rng = np.random.default_rng(7)
    for ap, am in rng.normal(size=(50, 2)):
        for U, V in local.umbilic_stationary_points(ap, am):
            gu, gv = local.umbilic_gradient(U, V, ap, am)
            assert math.hypot(gu, gv) <= 1e-12 * max(1, abs(ap) + abs(am))
    with pytest.raises(ValueError):
        local.umbilic_stationary_points(0.0, 0.0)
