import numpy as np
import pytest

from multimode_qed import greens as G
from multimode_qed.errors import NumericsError, PoleProximityError
from multimode_qed.modes import quasibound_frequencies
from multimode_qed.params import CircuitParams, derive_params, params_from_chi_s


@pytest.fixture(scope="module")
def closed_setup():
    p = params_from_chi_s(0.0)
    dp = derive_params(p)
    modes = quasibound_frequencies(dp, p, 200)
    return p, dp, modes


def test_direct_matches_wronskian_closed_form(closed_setup):
    p, dp, _ = closed_setup
    for w in (0.7, 2.5, 7.1):
        got = G.green_direct(0.3, 0.7, w, p, dp)
        ref = np.cos(w * 0.3) * np.cos(w * (1 - 0.7)) / (w * np.sin(w))
        assert got == pytest.approx(ref, rel=1e-12)


def test_direct_reciprocity(fig5_params, fig5_derived, rng):
    for _ in range(20):
        x, xp = rng.uniform(0.02, 0.98, 2)
        w = rng.uniform(0.5, 12.0)
        a = G.green_direct(x, xp, w, fig5_params, fig5_derived)
        b = G.green_direct(xp, x, w, fig5_params, fig5_derived)
        assert abs(a - b) < 1e-10 * max(1.0, abs(a))


def test_direct_pole_approach(fig5_params, fig5_derived, fig5_modes):
    w1 = fig5_modes[0].omega.omega
    vals = [abs(G.green_direct(0.0, 0.0, w1 + d, fig5_params, fig5_derived))
            for d in (1e-2, 1e-4, 1e-7)]
    assert vals[0] < vals[1] < vals[2]
    assert vals[2] > 1e6


def test_spectral_closed_limit(closed_setup):
    p, dp, modes = closed_setup
    gd = G.green_direct(0.3, 0.7, 2.5, p, dp)
    gs = G.green_spectral(0.3, 0.7, 2.5, modes)
    assert abs(gs - gd) < 1e-4


def test_spectral_symmetry(fig5_modes):
    a = G.green_spectral(0.31, 0.72, 2.5, fig5_modes)
    b = G.green_spectral(0.72, 0.31, 2.5, fig5_modes)
    assert a == pytest.approx(b, rel=1e-14)


def test_spectral_requires_modes():
    with pytest.raises(NumericsError):
        G.green_spectral(0.3, 0.7, 2.5, [])


def test_spectral_rejects_zero_frequency(fig5_modes):
    with pytest.raises(PoleProximityError):
        G.green_spectral(0.3, 0.7, 0.0, fig5_modes)


def test_spectral_convergence_monotone(fig5_params, fig5_derived):
    p, dp = fig5_params, fig5_derived
    modes = quasibound_frequencies(dp, p, 400)
    gd = G.green_direct(0.3, 0.7, 2.5, p, dp)
    errs = [abs(G.green_spectral(0.3, 0.7, 2.5, modes[:n]) - gd)
            for n in (25, 50, 100, 200, 400)]
    assert all(b < a for a, b in zip(errs, errs[1:]))


def test_dc_pole_strength(fig5_params, fig5_derived):
    c2 = G.dc_pole_strength(fig5_params, fig5_derived)
    w0 = 1e-4
    gd = G.green_direct(0.4, 0.4, w0, fig5_params, fig5_derived)
    assert (w0**2 * gd).real == pytest.approx(c2, rel=1e-6)


def test_kernel_zero_coupling():
    p = CircuitParams(chi_r=0.01, chi_l=0.01, chi_j=0.05, chi_g=0.0,
                      x0=0.0, ec=0.25, ej=12.5)
    dp = derive_params(p)
    modes = quasibound_frequencies(dp, p, 10)
    k = G.build_kernels(modes, dp)
    assert np.all(k.a == 0.0)
    assert k.ik1_0 == 0.0
    assert k.m_dc == 0.0 and k.r_damp == 0.0


def test_kernel_k2_time_properties(fig5_modes, fig5_derived):
    k = G.build_kernels(fig5_modes, fig5_derived, flavor="plain")
    # tau = 0 identity and causality
    assert G.kernel_K2_time(k, 0.0) == pytest.approx(k.k2_at_zero(), rel=1e-12)
    assert G.kernel_K2_time(k, -1.0) == 0.0
    # single-term expansion is a damped sinusoid
    k1 = k.truncated(1)
    taus = np.linspace(0.0, 3.0, 11)
    ref = -k1.a[0] * np.sin(k1.nu[0] * taus + k1.psi[0]) * np.exp(-k1.kappa[0] * taus)
    np.testing.assert_allclose(G.kernel_K2_time(k1, taus), ref, rtol=1e-12)
    # decay envelope
    assert abs(G.kernel_K2_time(k, 200.0)) <= np.sum(k.a * np.exp(-k.kappa * 200.0)) + 1e-15


def test_kernel_laplace_matches_numeric_transform(fig5_modes, fig5_derived):
    k = G.build_kernels(fig5_modes[:5], fig5_derived, flavor="plain")
    s = 0.3 + 1.1j
    taus = np.linspace(0, 400, 400001)
    num = np.trapezoid(G.kernel_K2_time(k, taus) * np.exp(-s * taus), taus)
    assert G.kernel_K2_laplace(k, s) == pytest.approx(num, rel=1e-4)


def test_kernel_contour_identities(fig5_modes, fig5_derived):
    # pure representation-level identity: plain-flavor terms, no slots
    k = G.build_kernels(fig5_modes, fig5_derived, flavor="plain")
    assert abs(G.kernel_k0_quadrature(fig5_modes, fig5_derived)) < 1e-6
    ik1 = G.kernel_ik1_quadrature(fig5_modes, fig5_derived)
    assert ik1 == pytest.approx(k.ik1_0, abs=1e-4)
    k2q = G.kernel_k2_quadrature(fig5_modes, fig5_derived, 0.5)
    assert k2q == pytest.approx(G.kernel_K2_time(k, 0.5), abs=1e-4)
    # causality of the inverse transform
    assert abs(G.kernel_k2_quadrature(fig5_modes, fig5_derived, -0.5)) < 1e-4


def test_kernel_dc_slot():
    # closed resonator: the static slot is the constant-eigenmode weight
    p = params_from_chi_s(0.02, chi_j=0.05)
    dp = derive_params(p)
    modes = quasibound_frequencies(dp, p, 10)
    k0 = G.build_kernels(modes, dp, flavor="plain")
    k1 = G.build_kernels(modes, dp, flavor="plain", include_dc=True)
    expected = dp.gamma * dp.chi_s / (1.0 + dp.chi_s)
    assert k1.m_dc == pytest.approx(expected, rel=1e-12)
    assert k1.ik1_0 == pytest.approx(k0.ik1_0 + expected, rel=1e-12)


def test_kernel_flavors_agree_for_closed_systems():
    p = params_from_chi_s(0.02, chi_j=0.05)
    dp = derive_params(p)
    modes = quasibound_frequencies(dp, p, 10)
    kp = G.build_kernels(modes, dp, flavor="physical")
    kl = G.build_kernels(modes, dp, flavor="plain", include_dc=True)
    np.testing.assert_allclose(kp.a, kl.a, rtol=1e-12)
    np.testing.assert_allclose(np.cos(2 * kp.delta), np.cos(2 * kl.delta),
                               rtol=1e-12)
    assert kp.m_dc == pytest.approx(kl.m_dc, rel=1e-12)


def test_physical_kernel_memory_matches_direct_integral(fig5_params,
                                                        fig5_derived,
                                                        fig5_modes):
    # the memory function i*K1(0) + K2~(s) has an absolutely convergent
    # integral representation through the boundary-value Green's function;
    # the physical kernel must reproduce it far better than the plain one
    from scipy.integrate import quad

    p, dp = fig5_params, fig5_derived
    gcs = dp.gamma * dp.chi_s
    s = 1.5
    nu = np.array([m.nu for m in fig5_modes])

    def integrand(w):
        return (w * G.green_direct(0.0, 0.0, w, p, dp) / (s + 1j * w)).imag

    acc, lo = 0.0, 0.0
    upper = 2000.0
    for hi in list(0.5 * (nu[:-1] + nu[1:])) + [upper]:
        inside = nu[(nu > lo) & (nu < hi)]
        acc += quad(integrand, lo, hi, points=list(inside), limit=300)[0]
        lo = hi
    tail = -0.5 * (np.pi / 2 - np.arctan(upper / s))
    # retarded prescription: add the half residue of the static pole
    true_val = -gcs * s / np.pi * (acc + tail) + 0.5 * gcs * G.dc_pole_strength(p, dp)

    def memory(kern):
        return kern.ik1_0 + kern.r_damp * s + complex(
            G.kernel_K2_laplace(kern, s)).real

    k_phys = G.build_kernels(fig5_modes, dp, flavor="physical")
    k_plain = G.build_kernels(fig5_modes, dp, flavor="plain")
    assert abs(memory(k_phys) - true_val) < 1e-3
    assert abs(memory(k_phys) - true_val) < 0.05 * abs(memory(k_plain) - true_val)
