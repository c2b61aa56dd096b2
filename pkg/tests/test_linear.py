import numpy as np
import pytest

from multimode_qed import greens as G, linear as L
from multimode_qed.errors import NumericsError, PoleProximityError
from multimode_qed.modes import quasibound_frequencies
from multimode_qed.params import CircuitParams, DerivedParams, derive_params


def detuned_derived(dp, omega_j):
    return DerivedParams(dp.chi_s, dp.gamma, omega_j, dp.eps_nl,
                         dp.eps_expansion, dp.phi_zpf)


@pytest.fixture(scope="module")
def fig5_setup(fig5_params, fig5_derived, fig5_modes):
    dpw = detuned_derived(fig5_derived, fig5_modes[0].nu * (1.0 - 1e-6))
    kern = G.build_kernels(fig5_modes, dpw)
    return fig5_params, dpw, kern


@pytest.fixture(scope="module")
def uncoupled_setup():
    p = CircuitParams(chi_r=0.01, chi_l=0.01, chi_j=0.05, chi_g=0.0,
                      x0=0.0, ec=0.25, ej=12.5)
    dp = derive_params(p)
    modes = quasibound_frequencies(dp, p, 5)
    return p, dp, G.build_kernels(modes, dp)


def test_dj_uncoupled_is_bare(uncoupled_setup):
    _, dp, kern = uncoupled_setup
    for s in (0.3 + 1.2j, -0.1 - 2.0j, 2.0):
        assert L.build_Dj(s, kern, dp) == pytest.approx(s * s + dp.omega_j**2)


def test_dj_conjugation_symmetry(fig5_setup, rng):
    _, dp, kern = fig5_setup
    for _ in range(6):
        s = complex(rng.normal(), rng.normal() * 3)
        a = L.build_Dj(s, kern, dp)
        b = L.build_Dj(np.conj(s), kern, dp)
        assert np.conj(a) == pytest.approx(b, rel=1e-13)


def test_dj_two_routes_agree(fig5_setup, rng):
    _, dp, kern = fig5_setup
    for _ in range(8):
        s = complex(rng.normal(), rng.normal() * 4)
        d1 = L.build_Dj(s, kern, dp)
        d2 = L.build_Dj_laplace_route(s, kern, dp)
        assert abs(d1 - d2) < 1e-9 * max(1.0, abs(d1))


def test_dj_bare_pole_guard(fig5_setup):
    _, dp, kern = fig5_setup
    z1 = complex(-kern.kappa[0], -kern.nu[0])
    with pytest.raises(PoleProximityError):
        L.build_Dj(z1, kern, dp)


def test_uncoupled_poles_and_residues(uncoupled_setup):
    _, dp, kern = uncoupled_setup
    poles = L.residues_at_poles(L.find_hybridized_poles(kern, dp), kern, dp)
    pj = poles[0]
    assert pj.label == "j"
    assert pj.p.s == pytest.approx(-1j * dp.omega_j, abs=1e-10)
    assert pj.a_x == pytest.approx(0.5, abs=1e-12)
    assert pj.a_y == pytest.approx(0.5j, abs=1e-12)
    for hp, kap, nu in zip(poles[1:], kern.kappa, kern.nu):
        assert hp.p.s == pytest.approx(complex(-kap, -nu), abs=1e-10)
    # uncoupled cosine evolution
    t = np.linspace(0, 10, 101)
    trace = L.linear_time_solution(poles, t)
    np.testing.assert_allclose(trace, np.cos(dp.omega_j * t), atol=1e-9)


def test_pole_tracking_matches_direct_characteristic(fig5_setup):
    p, dp, kern = fig5_setup
    poles = L.find_hybridized_poles(kern, dp, n_track=40)
    pj = next(q for q in poles if q.label == "j")

    def d_true(w):
        g = G.green_direct(p.x0, p.x0, w, p, dp)
        return -w * w + dp.omega_j**2 * (
            1 - dp.gamma + dp.gamma * dp.chi_s * w * w * g)

    w = pj.p.omega
    h = 1e-7
    # one Newton polish of the tracked pole on the exact characteristic
    f = d_true(w)
    d = (d_true(w + h) - d_true(w - h)) / (2 * h)
    assert abs(f / d) < 2e-4 * abs(w)


def test_pole_convergence_in_truncation(fig5_setup):
    _, dp, kern = fig5_setup
    pj = {n: L.find_hybridized_poles(kern, dp, n_track=n)[0].p.s
          for n in (5, 10, 20)}
    assert abs(pj[20] - pj[10]) < abs(pj[10] - pj[5])


def test_stability_all_poles(fig5_setup):
    _, dp, kern = fig5_setup
    poles = L.find_hybridized_poles(kern, dp, n_track=20)
    assert all(hp.p.s.real <= 1e-12 for hp in poles)


def test_residue_sum_rule_and_initial_value(fig5_setup):
    _, dp, kern = fig5_setup
    poles = L.residues_at_poles(L.find_hybridized_poles(kern, dp), kern, dp)
    assert L.residue_sum_rule(poles) == pytest.approx(1.0, abs=1e-8)
    t0 = L.linear_time_solution(poles, np.array([0.0]))[0]
    assert t0 == pytest.approx(1.0, abs=1e-8)


def test_weak_coupling_resonant_hybridization(fig5_params, fig5_derived,
                                              fig5_modes):
    # only the resonant pole pair shifts appreciably at weak coupling
    p0 = fig5_params
    p = CircuitParams(chi_r=p0.chi_r, chi_l=p0.chi_l, chi_j=p0.chi_j,
                      chi_g=5e-4, x0=p0.x0, ec=p0.ec, ej=p0.ej)
    dp = derive_params(p)
    modes = quasibound_frequencies(dp, p, 20)
    dpw = detuned_derived(dp, modes[0].nu * (1.0 - 1e-6))
    kern = G.build_kernels(modes, dpw)
    poles = L.find_hybridized_poles(kern, dpw, n_track=10)
    bare = {f"n{m.index}": m.omega.s for m in modes}
    shifts = {hp.label: abs(hp.p.s - bare[hp.label])
              for hp in poles if hp.label != "j"}
    assert all(shifts["n1"] > 8 * v for lbl, v in shifts.items() if lbl != "n1")


def test_transmon_amplitude_dominant_and_saturating(fig5_params, fig5_derived):
    # residue magnitudes: the oscillator-like one dominates, resonator-like
    # ones grow with chi_g and saturate past chi_j
    mags = {}
    for chi_g in (0.01, 0.05, 0.25, 1.0):
        p0 = fig5_params
        p = CircuitParams(chi_r=p0.chi_r, chi_l=p0.chi_l, chi_j=p0.chi_j,
                          chi_g=chi_g, x0=p0.x0, ec=p0.ec, ej=p0.ej)
        dp = derive_params(p)
        modes = quasibound_frequencies(dp, p, 20)
        dpw = detuned_derived(dp, modes[0].nu * (1.0 - 1e-6))
        kern = G.build_kernels(modes, dpw)
        poles = L.residues_at_poles(L.find_hybridized_poles(kern, dpw), kern, dpw)
        mags[chi_g] = {hp.label: abs(hp.a_x) for hp in poles}
    for chi_g, vals in mags.items():
        assert vals["j"] == max(vals.values())
    # off-resonant amplitude saturates: change across chi_j << change to chi_j
    d_early = abs(mags[0.05]["n2"] - mags[0.01]["n2"])
    d_late = abs(mags[1.0]["n2"] - mags[0.25]["n2"])
    assert d_late < d_early


def test_decay_sweep_has_peaks_and_asymmetry(fig5_params):
    p0 = fig5_params
    p = CircuitParams(chi_r=0.01, chi_l=0.01, chi_j=0.05, chi_g=1e-3,
                      x0=0.0, ec=p0.ec, ej=p0.ej)
    dp = derive_params(p)
    modes = quasibound_frequencies(dp, p, 40)
    kern = G.build_kernels(modes, dp)
    nu1 = modes[0].nu
    dd = 0.1 * nu1
    rows = L.decay_rate_sweep([nu1 - dd, nu1 + dd], kern, dp)
    assert rows[1][1] > rows[0][1]  # larger decay above the resonance


def test_linear_trace_matches_volterra_style_quadrature(fig5_setup):
    # brute-force integro-differential integration of the scalar expectation
    _, dp, kern = fig5_setup
    kern5 = kern.truncated(5)
    poles = L.residues_at_poles(L.find_hybridized_poles(kern5, dp), kern5, dp)
    h = 2.5e-4
    t = np.arange(0.0, 6.0 + h / 2, h)
    x = np.empty_like(t)
    v0 = 0.0
    const = dp.omega_j**2 * (1 - dp.gamma + kern5.ik1_0)
    fric = dp.omega_j**2 * kern5.r_damp
    ker_vals = G.kernel_K2_time(kern5, t)
    x[0] = 1.0
    vel = v0
    acc_prev = -const * x[0] - fric * vel
    for i in range(1, len(t)):
        # velocity Verlet with trapezoid memory
        mem = np.trapezoid(ker_vals[:i + 1][::-1] * x[:i + 1], dx=h) if i > 1 else 0.0
        x[i] = x[i - 1] + h * vel + 0.5 * h * h * acc_prev
        mem_i = np.trapezoid(ker_vals[:i + 1][::-1] * x[:i + 1], dx=h)
        acc_new = -const * x[i] - dp.omega_j**2 * mem_i - fric * vel
        vel = vel + 0.5 * h * (acc_prev + acc_new)
        acc_new = -const * x[i] - dp.omega_j**2 * mem_i - fric * vel
        acc_prev = acc_new
    ref = L.linear_time_solution(poles, t)
    assert np.max(np.abs(x - ref)) < 5e-3


def test_hybridization_closed_limits():
    p = CircuitParams(chi_r=0.0, chi_l=0.0, chi_j=0.05, chi_g=1e-9,
                      x0=0.0, ec=0.25, ej=12.5)
    dp = derive_params(p)
    modes = quasibound_frequencies(dp, p, 10)
    dpw = detuned_derived(dp, 0.8 * np.pi)
    basis = L.hybridization_coefficients(dpw, modes, 5)
    assert basis.u[0] == pytest.approx(1.0, abs=1e-4)
    assert np.all(np.abs(basis.u[1:]) < 1e-3)
    assert basis.beta[0] == pytest.approx(dpw.omega_j, rel=1e-6)
    assert basis.labels[0] == "j"


def test_hybridization_u1_grows_to_uj(fig5_params):
    # around chi_g ~ chi_j the resonant-mode weight becomes comparable
    p0 = fig5_params
    us = {}
    for chi_g in (1e-3, 0.05, 0.5):
        p = CircuitParams(chi_r=0.0, chi_l=0.0, chi_j=0.05, chi_g=chi_g,
                          x0=0.0, ec=p0.ec, ej=p0.ej)
        dp = derive_params(p)
        modes = quasibound_frequencies(dp, p, 20)
        dpw = detuned_derived(dp, np.pi * (1 - 1e-6))
        basis = L.hybridization_coefficients(dpw, modes, 20)
        us[chi_g] = basis
    # the resonant-mode weight becomes progressively comparable to the
    # oscillator weight as chi_g approaches and passes chi_j
    r = {g: abs(b.u[1]) / abs(b.u[0]) for g, b in us.items()}
    assert r[1e-3] < r[0.05] < r[0.5]
    assert r[0.5] > 0.5
    # off-resonant weights grow at stronger coupling
    assert np.max(np.abs(us[0.5].u[2:])) > np.max(np.abs(us[0.05].u[2:]))


def test_hybridization_beta_matches_pole_frequency(fig5_params, fig5_derived,
                                                   fig5_modes):
    dpw = detuned_derived(fig5_derived, fig5_modes[0].nu * (1 - 1e-6))
    kern = G.build_kernels(fig5_modes, dpw)
    poles = L.find_hybridized_poles(kern, dpw, n_track=60)
    basis = L.hybridization_coefficients(dpw, fig5_modes, 60, poles=poles)
    beta_pole = next(q.beta for q in poles if q.label == "j")
    # two routes to the same linear spectrum; the normal-mode route ignores
    # dissipation and the static slots, so only per-mille agreement is due
    assert basis.beta[0] == pytest.approx(beta_pole, rel=5e-3)
    assert basis.alpha[0] == pytest.approx(
        next(q.alpha for q in poles if q.label == "j"), rel=1e-12)


def test_hybridization_orthonormality(fig5_params, fig5_derived, fig5_modes):
    import numpy.linalg as la
    from multimode_qed.linear import coupling_matrix

    dpw = detuned_derived(fig5_derived, fig5_modes[0].nu * (1 - 1e-6))
    w, _ = coupling_matrix(dpw, fig5_modes, 20)
    evals, vecs = la.eigh(w)
    assert np.max(np.abs(vecs.T @ vecs - np.eye(21))) < 1e-10


def test_n_track_bounds(fig5_setup):
    _, dp, kern = fig5_setup
    with pytest.raises(NumericsError):
        L.find_hybridized_poles(kern, dp, n_track=kern.n_modes + 1)


def test_decay_sweep_zero_coupling(uncoupled_setup):
    _, dp, kern = uncoupled_setup
    rows = L.decay_rate_sweep([2.0, 3.3, 7.1], kern, dp)
    assert all(abs(alpha) < 1e-14 for _, alpha, _ in rows)
