"""Secular-equation calculus, the safeguarded Newton root finder, and the
hard-case branch, checked against closed forms and the brute-force oracle."""

import numpy as np
import pytest

from adacubic import (AdaCubicConfig, ShiftNotPositiveDefiniteError,
                      SubproblemStatus, brute_force_subproblem_min, dphi_dnu,
                      hard_case_step, kkt_residual, phi, root_finder,
                      solve_shifted)

CFG = AdaCubicConfig()


# ---------------------------------------------------------------------------
# solve_shifted / phi / dphi_dnu closed forms
# ---------------------------------------------------------------------------

def test_solve_shifted_one_dimensional():
    # (1 + 2*1/2) s = -2  ->  s = -1
    s = solve_shifted(np.array([1.0]), np.array([2.0]), 2.0, 1.0)
    assert s[0] == pytest.approx(-1.0)


def test_solve_shifted_zero_gradient():
    s = solve_shifted(np.array([1.0, 2.0]), np.zeros(2), 0.5, 1.0)
    np.testing.assert_array_equal(s, np.zeros(2))


def test_solve_shifted_newton_step():
    s = solve_shifted(np.array([2.0, 4.0]), np.array([2.0, 4.0]), 0.0, 1.0)
    np.testing.assert_allclose(s, [-1.0, -1.0])


def test_solve_shifted_residual_identity():
    rng = np.random.default_rng(17)
    for _ in range(50):
        d = int(rng.integers(1, 8))
        b = rng.uniform(-2.0, 2.0, size=d)
        g = rng.uniform(-1.0, 1.0, size=d)
        r = float(rng.uniform(0.1, 2.0))
        nu = float(2.0 * max(0.0, -b.min()) / r + rng.uniform(0.1, 2.0))
        s = solve_shifted(b, g, nu, r)
        np.testing.assert_allclose((b + 0.5 * nu * r) * s, -g, atol=1e-12)


def test_solve_shifted_requires_positive_shift():
    with pytest.raises(ShiftNotPositiveDefiniteError):
        solve_shifted(np.array([-1.0, 2.0]), np.ones(2), 0.0, 1.0)


def test_phi_values():
    b, g = np.array([1.0]), np.array([2.0])
    assert phi(b, g, 0.0, 1.0, 1.0) == pytest.approx(-0.5)
    assert phi(b, g, 2.0, 1.0, 1.0) == pytest.approx(0.0, abs=1e-15)
    # scale: ||s(2, 1)|| = 1, so against radius 2 the residual is 1 - 1/2
    assert phi(b, g, 0.0, 1.0, 8.0) == pytest.approx(0.5 - 0.5)


def test_phi_rejects_zero_step():
    with pytest.raises(ZeroDivisionError):
        phi(np.array([1.0]), np.array([0.0]), 0.0, 1.0, 1.0)


def test_dphi_closed_form_values():
    b, g = np.array([1.0]), np.array([2.0])
    assert dphi_dnu(b, g, 0.0, 1.0) == pytest.approx(0.25)
    assert dphi_dnu(b, g, 2.0, 1.0) == pytest.approx(0.25)


def test_dphi_positive_and_matches_finite_differences():
    rng = np.random.default_rng(4242)
    for _ in range(200):
        d = int(rng.integers(1, 11))
        b = rng.uniform(-2.0, 2.0, size=d)
        g = rng.uniform(-1.0, 1.0, size=d)
        while np.linalg.norm(g) < 1e-3:
            g = rng.uniform(-1.0, 1.0, size=d)
        r = float(rng.uniform(0.2, 2.0))
        nu_min = max(0.0, -2.0 * float(b.min()) / r)
        nu = nu_min + float(rng.uniform(0.1, 3.0))
        deriv = dphi_dnu(b, g, nu, r)
        assert deriv > 0.0
        h = 1e-6 * (1.0 + nu)
        fd = (phi(b, g, nu + h, r, r ** 3) - phi(b, g, nu - h, r, r ** 3)) / (2 * h)
        assert abs(deriv - fd) <= max(1e-6, 1e-4 * abs(deriv))


def test_phi_monotone_and_concave():
    rng = np.random.default_rng(31)
    for _ in range(50):
        d = int(rng.integers(1, 11))
        b = rng.uniform(-2.0, 2.0, size=d)
        g = rng.uniform(-1.0, 1.0, size=d)
        while np.linalg.norm(g) < 1e-3:
            g = rng.uniform(-1.0, 1.0, size=d)
        r = float(rng.uniform(0.2, 2.0))
        nu_min = max(0.0, -2.0 * float(b.min()) / r)
        nus = np.linspace(nu_min + 1e-3, nu_min + 5.0, 50)
        vals = np.array([phi(b, g, t, r, r ** 3) for t in nus])
        assert np.all(np.diff(vals) > 0.0)
        assert np.all(np.diff(vals, 2) <= 1e-8)


# ---------------------------------------------------------------------------
# hard case
# ---------------------------------------------------------------------------

def test_hard_case_pure_negative_curvature():
    s, alpha = hard_case_step(np.array([-1.0]), np.array([0.0]),
                              np.zeros(1), 1.0)
    assert alpha == pytest.approx(1.0)  # tie broken toward positive alpha
    np.testing.assert_allclose(s, [1.0])


def test_hard_case_lands_on_boundary():
    b = np.array([-1.0, 2.0])
    g = np.array([0.0, 1.0])
    xi = 0.5
    s_reg = np.array([0.0, -1.0 / 3.0])
    s, alpha = hard_case_step(b, g, s_reg, xi)
    assert np.linalg.norm(s) ** 3 == pytest.approx(xi, rel=1e-12)
    assert alpha > 0.0  # model symmetric in the sign of s_1, tie to +
    # alpha^2 = xi^(2/3) - s_reg_2^2
    assert alpha == pytest.approx(np.sqrt(xi ** (2.0 / 3.0) - 1.0 / 9.0), rel=1e-12)


def test_hard_case_picks_lower_model_value():
    b = np.array([-1.0, 1.0])
    g = np.array([0.5, 0.0])  # nonzero along the negative-curvature axis
    s_reg = np.zeros(2)
    s, alpha = hard_case_step(b, g, s_reg, 1.0)
    assert alpha == pytest.approx(-1.0)  # g pushes toward negative alpha


def test_hard_case_argmin_tie_uses_smallest_index():
    b = np.array([-1.0, -1.0])
    s, _ = hard_case_step(b, np.zeros(2), np.zeros(2), 1.0)
    np.testing.assert_allclose(s, [1.0, 0.0])


# ---------------------------------------------------------------------------
# root_finder
# ---------------------------------------------------------------------------

def test_root_finder_one_dimensional_boundary():
    sol = root_finder(np.array([1.0]), np.array([2.0]), 1.0, CFG)
    assert sol.status is SubproblemStatus.BOUNDARY
    assert sol.s[0] == pytest.approx(-1.0, abs=1e-9)
    assert sol.nu == pytest.approx(2.0, abs=1e-8)
    res = kkt_residual(np.array([1.0]), np.array([2.0]), sol, 1.0)
    assert res.stationarity <= 1e-9
    assert res.min_shifted_curvature == pytest.approx(2.0, abs=1e-8)
    assert abs(res.slackness) <= 3.0 * CFG.kappa_easy * 1.0


def test_root_finder_interior():
    sol = root_finder(np.array([1.0, 2.0]), np.array([-1.0, -2.0]), 1000.0, CFG)
    assert sol.status is SubproblemStatus.INTERIOR
    assert sol.nu == 0.0
    np.testing.assert_allclose(sol.s, [1.0, 1.0])
    res = kkt_residual(np.array([1.0, 2.0]), np.array([-1.0, -2.0]), sol, 1000.0)
    assert res.slackness == 0.0


def test_root_finder_hard_case():
    b = np.array([-1.0, 2.0])
    g = np.array([0.0, 1.0])
    xi = 0.5
    sol = root_finder(b, g, xi, CFG)
    assert sol.status is SubproblemStatus.HARD_CASE
    assert np.linalg.norm(sol.s) ** 3 == pytest.approx(xi, rel=1e-9)
    # analytic solution: shift pinned at -lambda_d, s_2 = -1/3, s_1 > 0
    assert sol.s[1] == pytest.approx(-1.0 / 3.0, abs=1e-6)
    assert sol.s[0] == pytest.approx(np.sqrt(xi ** (2.0 / 3.0) - 1.0 / 9.0),
                                     abs=1e-6)
    assert sol.nu == pytest.approx(2.0 / xi ** (1.0 / 3.0), rel=1e-6)
    res = kkt_residual(b, g, sol, xi)
    assert res.min_shifted_curvature >= -CFG.kkt_tol
    # independent oracle agrees within grid tolerance; g_1 = 0 makes the
    # model symmetric in the sign of s_1, so compare magnitudes
    ref = brute_force_subproblem_min(b, g, xi)
    np.testing.assert_allclose(np.abs(sol.s), np.abs(ref),
                               atol=2.0 * xi ** (1.0 / 3.0) / 200)
    assert ref[1] < 0.0


def test_root_finder_zero_gradient_psd():
    sol = root_finder(np.array([1.0, 0.0]), np.zeros(2), 1.0, CFG)
    assert sol.status is SubproblemStatus.INTERIOR
    assert sol.nu == 0.0
    np.testing.assert_array_equal(sol.s, np.zeros(2))


def test_root_finder_zero_gradient_indefinite_escapes():
    sol = root_finder(np.array([1.0, -1.0]), np.zeros(2), 1.0, CFG)
    assert sol.status is SubproblemStatus.HARD_CASE
    np.testing.assert_allclose(sol.s, [0.0, 1.0], atol=1e-12)
    assert sol.model_decrease > 0.0


def test_root_finder_input_validation():
    with pytest.raises(ValueError):
        root_finder(np.array([1.0]), np.array([1.0]), 1e-9, CFG)  # xi < eps_m
    with pytest.raises(ValueError):
        root_finder(np.array([np.nan]), np.array([1.0]), 1.0, CFG)


def test_newton_iterates_monotone_from_negative_side():
    rng = np.random.default_rng(66)
    for _ in range(50):
        d = int(rng.integers(1, 8))
        b = rng.uniform(-2.0, 2.0, size=d)
        g = rng.uniform(-1.0, 1.0, size=d)
        while np.linalg.norm(g) < 1e-3:
            g = rng.uniform(-1.0, 1.0, size=d)
        r = float(rng.uniform(0.2, 1.5))
        xi = r ** 3
        nu_min = max(0.0, -2.0 * float(b.min()) / r)
        nu = nu_min + 1e-6 * (1.0 + nu_min)
        if phi(b, g, nu, r, xi) >= 0.0:
            continue
        for _ in range(60):
            p = phi(b, g, nu, r, xi)
            if abs(p) < 1e-13:
                break
            nxt = nu - p / dphi_dnu(b, g, nu, r)
            if p < 0.0:
                assert nxt > nu
                assert phi(b, g, nxt, r, xi) < 1e-12
            nu = nxt


def test_kkt_conditions_on_random_instances():
    rng = np.random.default_rng(12345)
    for _ in range(200):
        d = int(rng.integers(1, 11))
        b = rng.uniform(-2.0, 2.0, size=d)
        g = rng.uniform(-1.0, 1.0, size=d)
        xi = float(10.0 ** rng.uniform(-4, 1))
        sol = root_finder(b, g, xi, CFG)
        res = kkt_residual(b, g, sol, xi)
        gn = float(np.linalg.norm(g))
        assert sol.nu >= 0.0
        assert res.stationarity <= 1e-6 * (1.0 + gn)
        assert res.min_shifted_curvature >= -1e-10
        assert sol.nu == 0.0 or abs(res.slackness) <= 4.0 * CFG.kappa_easy * xi * sol.nu
        if sol.status is not SubproblemStatus.INTERIOR:
            r = xi ** (1.0 / 3.0)
            assert abs(np.linalg.norm(sol.s) - r) <= CFG.kappa_easy * r
        # predicted decrease dominates the nu-cubed margin
        ns = float(np.linalg.norm(sol.s))
        assert sol.model_decrease >= sol.nu / 12.0 * ns ** 3 - 1e-10


def test_matches_brute_force_on_low_dimensions():
    rng = np.random.default_rng(777)
    for _ in range(25):
        d = int(rng.integers(1, 4))
        b = rng.uniform(-2.0, 2.0, size=d)
        g = rng.uniform(-1.0, 1.0, size=d)
        xi = float(10.0 ** rng.uniform(-2, 1))
        sol = root_finder(b, g, xi, CFG)
        ref = brute_force_subproblem_min(b, g, xi)
        tol = 2.0 * xi ** (1.0 / 3.0) / 200
        np.testing.assert_allclose(sol.s, ref, atol=tol)
