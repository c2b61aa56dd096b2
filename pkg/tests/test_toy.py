import numpy as np
import pytest
from scipy.integrate import solve_ivp

from multimode_qed.errors import ParameterError
from multimode_qed.toy import (ToyParams, char_from_factored, toy_char_fn,
                               toy_green_time, toy_pole_sweep)


def resonant_params(g=0.0):
    nu_c = 1.0
    kappa_c = 0.1 * nu_c
    omega_c = np.hypot(nu_c, kappa_c)
    omega_j = nu_c * (1.0 - 1e-6)
    return ToyParams(omega_j, omega_c, kappa_c, g)


def test_green_time_trivial_points():
    assert toy_green_time(0.0, 1.0, 0.0) == 0.0
    assert toy_green_time(np.pi / 2, 1.0, 0.0) == pytest.approx(-1.0, abs=1e-14)
    with pytest.raises(ParameterError):
        toy_green_time(1.0, 0.5, 0.6)


def test_green_time_matches_ode_impulse_response():
    # impulse response of xddot + 2 kappa xdot + omega_c^2 x = -delta(t)
    omega_c, kappa_c = 1.0, 0.1
    sol = solve_ivp(lambda t, y: [y[1], -2 * kappa_c * y[1] - omega_c**2 * y[0]],
                    (0.0, 1.0), [0.0, -1.0], rtol=1e-10, atol=1e-12,
                    dense_output=True)
    assert toy_green_time(1.0, omega_c, kappa_c) == pytest.approx(
        sol.sol(1.0)[0], abs=1e-6)


def test_char_fn_uncoupled_roots():
    p = resonant_params(0.0)
    assert toy_char_fn(1j * p.omega_j, p) == pytest.approx(0.0, abs=1e-12)
    assert toy_char_fn(0.0, p) == pytest.approx(p.omega_j**2)


def test_rw_equals_full_at_zero_coupling():
    p = resonant_params(0.0)
    s = np.array([0.3 + 1j, -0.2 - 2.2j, 1.5j, 2.0])
    np.testing.assert_allclose(toy_char_fn(s, p, rw=False),
                               toy_char_fn(s, p, rw=True), rtol=0, atol=1e-12)


def test_pole_sweep_seeds_and_saturation():
    p = resonant_params()
    g_grid = np.arange(0.0, 0.5 + 1e-12, 0.005) * p.omega_j
    pairs = toy_pole_sweep(p, g_grid)
    full = [q for q in pairs if not q.rw_flag]
    rw = [q for q in pairs if q.rw_flag]
    # g = 0 seeds
    assert full[0].p_j.s == pytest.approx(-1j * p.omega_j, abs=1e-9)
    assert full[0].p_c.s == pytest.approx(-p.kappa_c - 1j * p.nu_c, abs=1e-9)
    assert rw[0].p_j.s == pytest.approx(-1j * p.omega_j, abs=1e-9)
    # decay-rate saturation at half the bare cavity rate, both conventions
    for seq in (full, rw):
        assert seq[-1].p_j.s.real == pytest.approx(-p.kappa_c / 2, rel=0.05)
        assert seq[-1].p_c.s.real == pytest.approx(-p.kappa_c / 2, rel=0.05)


def test_factorized_matches_rational_form():
    p = resonant_params(0.12)
    pairs = toy_pole_sweep(p, [0.0, 0.12])
    full = [q for q in pairs if not q.rw_flag][-1]
    s = np.array([0.4 + 0.9j, -0.1 - 1.4j, 2.2j, 1.0 + 0.0j, -3.0 + 0.5j])
    rebuilt = char_from_factored(s, full.p_j.s, full.p_c.s, p)
    direct = toy_char_fn(s, ToyParams(p.omega_j, p.omega_c, p.kappa_c, 0.12))
    np.testing.assert_allclose(rebuilt, direct, rtol=1e-9)


def test_conjugate_symmetry_and_stability():
    from multimode_qed.toy import _char_poly_coeffs

    p = resonant_params(0.3)
    g_grid = [0.0, 0.1, 0.3]
    pairs = [q for q in toy_pole_sweep(p, g_grid) if not q.rw_flag]
    for g, q in zip(g_grid, pairs):
        coeffs = _char_poly_coeffs(ToyParams(p.omega_j, p.omega_c, p.kappa_c, g), False)
        for pole in (q.p_j.s, q.p_c.s):
            # real-coefficient quartic: conjugate of every root is a root
            assert abs(np.polyval(coeffs, np.conj(pole))) < 1e-10
            assert pole.real <= 1e-12


def test_rw_deviation_grows_with_g():
    p = resonant_params()
    g_grid = np.arange(0.0, 0.5 + 1e-12, 0.025) * p.omega_j
    pairs = toy_pole_sweep(p, g_grid)
    n = len(g_grid)
    full = [q for q in pairs if not q.rw_flag]
    rw = [q for q in pairs if q.rw_flag]
    dev = np.array([abs(a.p_j.s - b.p_j.s) + abs(a.p_c.s - b.p_c.s)
                    for a, b in zip(full, rw)])
    assert dev[0] == pytest.approx(0.0, abs=1e-9)
    assert np.all(np.diff(dev) > -1e-10)
    assert dev[-1] > dev[1]
