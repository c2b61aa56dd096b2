import math

import numpy as np
import pytest

from multimode_qed import greens as G, linear as L, mspt as S
from multimode_qed.errors import GridError, UnboundedMotionError
from multimode_qed.modes import quasibound_frequencies
from multimode_qed.params import CircuitParams, DerivedParams, derive_params


def test_classical_mspt_linear_limit():
    t = np.linspace(0, 20, 2001)
    got = S.classical_duffing_mspt(1.3, 0.05, 0.0, 1.0, 0.0, t)
    ref = np.exp(-0.025 * t) * np.cos(1.3 * t)
    np.testing.assert_allclose(got, ref, atol=1e-12)


def test_classical_mspt_frequency_shift():
    # undamped, X0=1, Y0=0: |alpha|^2 = 1/4 so the frequency is w(1-3eps/8)
    eps, w = 0.08, 1.0
    t = np.linspace(0, 400, 40001)
    got = S.classical_duffing_mspt(w, 0.0, eps, 1.0, 0.0, t)
    om, mag = S.spectrum(got, t)
    peak = S.refine_peak(got, t, S.spectral_peak(om, mag))
    assert peak == pytest.approx(w * (1 - 3 * eps / 8), abs=2e-5)


def test_classical_mspt_rejects_unbounded():
    with pytest.raises(UnboundedMotionError):
        S.classical_duffing_mspt(1.0, 0.0, 0.5, 2.0, 1.0, [0.0, 1.0])


def test_oracle_energy_conservation():
    w = 1.0
    t = np.linspace(0, 10 * 2 * np.pi / w, 40001)
    x, v = S.classical_duffing_oracle(w, 0.0, 0.0, 1.0, 0.0, t,
                                      return_velocity=True)
    energy = 0.5 * v**2 + 0.5 * w**2 * x**2
    assert np.max(np.abs(energy - energy[0])) < 1e-10


def test_oracle_log_decrement():
    w, kappa = 1.0, 0.02
    nu = math.sqrt(w**2 - kappa**2 / 4)
    period = 2 * math.pi / nu
    t = np.linspace(0, 8 * period, 8001)
    x = S.classical_duffing_oracle(w, kappa, 0.0, 1.0, 0.0, t)
    ref = np.exp(-0.5 * kappa * t) * (np.cos(nu * t)
                                      + 0.5 * kappa / nu * np.sin(nu * t))
    assert np.max(np.abs(x - ref)) < 1e-6


def test_oracle_is_fourth_order():
    # Richardson order check: halving the step shrinks the error ~16x
    w, eps = 1.0, 0.1

    def end_value(steps):
        t = np.linspace(0, 12.0, steps + 1)
        return S.classical_duffing_oracle(w, 0.0, eps, 1.0, 0.0, t)[-1]

    x1, x2, x3 = end_value(512), end_value(1024), end_value(2048)
    r = abs(x1 - x2) / abs(x2 - x3)
    assert r > 12.0  # 16 for an exactly 4th-order scheme, allow slack


def test_classical_mspt_beats_linear_against_oracle():
    w, kappa, eps = 1.0, 0.01, 0.1
    t = np.linspace(0, 10 * 2 * np.pi / w, 4001)
    num = S.classical_duffing_oracle(w, kappa, eps, 1.0, 0.0, t)
    mspt = S.classical_duffing_mspt(w, kappa, eps, 1.0, 0.0, t)
    lin = S.classical_duffing_mspt(w, kappa, 0.0, 1.0, 0.0, t)
    assert np.max(np.abs(mspt - num)) < np.max(np.abs(lin - num))


def test_free_quantum_element_limits():
    t = np.linspace(0, 5, 11)
    got = S.free_quantum_duffing_element(2, 1.2, 0.0, 0.3, t)
    ref = math.sqrt(2) * np.exp(-0.15 * t) * np.exp(-1.2j * t)
    np.testing.assert_allclose(got, ref, rtol=1e-12)


def test_quartic_splitting_matches_exact_diagonalization():
    # E1 - E0 = omega (1 - 3 eps/2) with an O(eps^2) residual
    # second-order perturbation theory makes the residual ~ -4.5 eps^2 with
    # an eps^3 tail; assert quadratic scaling through log-slopes
    w = 1.0
    resid = {}
    for eps in (0.02, 0.04, 0.08):
        e0, e1 = S.quartic_well_levels(30, w, eps)
        resid[eps] = abs((e1 - e0) - w * (1 - 1.5 * eps))
    slope1 = math.log2(resid[0.04] / resid[0.02])
    slope2 = math.log2(resid[0.08] / resid[0.04])
    assert 1.7 < slope1 < 2.5
    assert 1.7 < slope2 < 2.5
    assert all(r < 8.0 * e * e for e, r in resid.items())


def test_mspt_element_frequency_vs_diagonalization():
    # second-order perturbation theory gives E1-E0 = w(1 - 3 eps/2 - 4.5 eps^2)
    w = 1.0
    for eps in (0.02, 0.04):
        e0, e1 = S.quartic_well_levels(30, w, eps)
        exact = e1 - e0
        mspt = w * (1 - 1.5 * eps)
        assert abs(mspt - exact) < 7.0 * eps**2 * w


def test_weyl_denominator_cancellation():
    # the cosine in the Weyl-ordered solution cancels in number-basis elements
    w, eps = 1.0, 0.05
    for n in (1, 2, 3, 4):
        for tau in (0.3, 1.7):
            got = S.weyl_lowering_element(n, w, eps, tau)
            ref = math.sqrt(n) * np.exp(1.5j * w * n * tau)
            assert got == pytest.approx(ref, rel=1e-12)


@pytest.fixture(scope="module")
def coupled_setup():
    p = CircuitParams(chi_r=0.001, chi_l=0.001, chi_j=0.05, chi_g=0.01,
                      x0=0.0, ec=0.25, ej=12.5)
    dp = derive_params(p)
    modes = quasibound_frequencies(dp, p, 40)
    wj = math.pi * (1 - 1e-6)
    dpw = DerivedParams(dp.chi_s, dp.gamma, wj, dp.eps_nl,
                        dp.eps_expansion, dp.phi_zpf)
    kern = G.build_kernels(modes, dpw)
    poles = L.residues_at_poles(L.find_hybridized_poles(kern, dpw), kern, dpw)
    basis = L.hybridization_coefficients(dpw, modes, 40, poles=poles, kern=kern)
    return dpw, kern, poles, basis


def test_pole_corrections_structure(coupled_setup):
    dpw, kern, poles, basis = coupled_setup
    t = np.linspace(0, 5, 11)
    occ = np.zeros(len(basis.u))
    occ[0] = 1
    corr = S.mspt_pole_corrections(basis, poles, dpw, occ, t)
    eps = dpw.eps_expansion
    np.testing.assert_allclose(corr.self_kerr,
                               1.5 * eps * dpw.omega_j * basis.u**4, rtol=1e-12)
    np.testing.assert_allclose(corr.cross_kerr, corr.cross_kerr.T, rtol=1e-12)
    i, j = 0, 1
    assert corr.cross_kerr[i, j] == pytest.approx(
        3.0 * eps * dpw.omega_j * basis.u[i]**2 * basis.u[j]**2, rel=1e-12)
    assert np.all(np.diag(corr.cross_kerr) == 0.0)
    # the neglected vacuum term is reported, not silently zeroed
    assert np.all(corr.neglected_vacuum_shift[basis.u**2 > 0] > 1e-10)


def test_uncoupled_trace_is_shifted_cosine():
    p = CircuitParams(chi_r=0.001, chi_l=0.001, chi_j=0.05, chi_g=0.0,
                      x0=0.0, ec=0.25, ej=12.5)
    dp = derive_params(p)
    modes = quasibound_frequencies(dp, p, 5)
    kern = G.build_kernels(modes, dp)
    poles = L.residues_at_poles(L.find_hybridized_poles(kern, dp), kern, dp)
    basis = L.hybridization_coefficients(dp, modes, 5, poles=poles, kern=kern)
    t = np.linspace(0, 30, 3001)
    tr = S.mspt_expectation_trace(poles, basis, dp, S.HALF_EXCITED, t)
    eps = dp.eps_expansion
    ref = np.cos((1 - 1.5 * eps) * dp.omega_j * t)
    np.testing.assert_allclose(tr, ref, atol=1e-8)


def test_trace_reduces_to_linear_at_zero_eps(coupled_setup):
    dpw, kern, poles, basis = coupled_setup
    dp0 = DerivedParams(dpw.chi_s, dpw.gamma, dpw.omega_j, 0.0, 0.0, dpw.phi_zpf)
    t = np.linspace(0, 12, 601)
    tr = S.mspt_expectation_trace(poles, basis, dp0, S.HALF_EXCITED, t)
    ref = L.linear_time_solution(poles, t)
    np.testing.assert_allclose(tr, ref, atol=1e-10)


def test_self_linearization_trend():
    # the qubit-like line's nonlinear shift decreases with coupling
    shifts = []
    for chi_g in (0.0, 0.01, 0.02):
        p = CircuitParams(chi_r=0.001, chi_l=0.001, chi_j=0.05, chi_g=chi_g,
                          x0=0.0, ec=0.25, ej=12.5)
        dp = derive_params(p)
        modes = quasibound_frequencies(dp, p, 30)
        wj = math.pi * (1 - 1e-6)
        dpw = DerivedParams(dp.chi_s, dp.gamma, wj, dp.eps_nl,
                            dp.eps_expansion, dp.phi_zpf)
        kern = G.build_kernels(modes, dpw)
        poles = L.residues_at_poles(L.find_hybridized_poles(kern, dpw), kern, dpw)
        basis = L.hybridization_coefficients(dpw, modes, 30, poles=poles,
                                             kern=kern)
        t = np.arange(0.0, 1500.0, 0.05)
        lin = L.linear_time_solution(poles, t)
        tr = S.mspt_expectation_trace(poles, basis, dpw, S.HALF_EXCITED, t)
        om, mag_l = S.spectrum(lin, t)
        _, mag_m = S.spectrum(tr, t)
        pj = next(q for q in poles if q.label == "j")
        peak_l = S.refine_peak(lin, t, S.spectral_peak(om, mag_l, near=pj.beta,
                                                       window=0.3))
        peak_m = S.refine_peak(tr, t, S.spectral_peak(om, mag_m,
                                                      near=pj.beta - 0.2,
                                                      window=0.5))
        shifts.append(peak_l - peak_m)
    assert shifts[0] > shifts[1] > shifts[2] > 0


def test_spectrum_pure_tone_and_grid_guard():
    t = np.linspace(0, 200, 4001)
    om, mag = S.spectrum(np.cos(2.0 * t), t)
    k = np.argmax(mag)
    assert abs(om[k] - 2.0) < om[1] - om[0]
    with pytest.raises(GridError):
        S.spectrum(np.ones(20), np.logspace(0, 1, 20))
