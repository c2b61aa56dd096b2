import numpy as np
import pytest

from multimode_qed import greens as G, linear as L, output as O
from multimode_qed.errors import GridError
from multimode_qed.modes import quasibound_frequencies
from multimode_qed.params import CircuitParams, DerivedParams, derive_params


@pytest.fixture(scope="module")
def field_setup():
    p = CircuitParams(chi_r=0.001, chi_l=0.001, chi_j=0.05, chi_g=0.01,
                      x0=0.0, ec=0.25, ej=12.5)
    dp = derive_params(p)
    modes = quasibound_frequencies(dp, p, 30)
    wj = modes[0].nu * (1 - 1e-6)
    dpw = DerivedParams(dp.chi_s, dp.gamma, wj, dp.eps_nl,
                        dp.eps_expansion, dp.phi_zpf)
    kern = G.build_kernels(modes, dpw)
    poles = L.residues_at_poles(L.find_hybridized_poles(kern, dpw), kern, dpw)
    t = np.arange(0.0, 60.0, 0.01)
    trace = L.linear_time_solution(poles, t)
    return p, dpw, modes, poles, t, trace


def test_zero_coupling_gives_zero_field():
    p = CircuitParams(chi_r=0.001, chi_l=0.001, chi_j=0.05, chi_g=0.0,
                      x0=0.0, ec=0.25, ej=12.5)
    dp = derive_params(p)
    modes = quasibound_frequencies(dp, p, 10)
    t = np.linspace(0, 10, 501)
    ft = O.field_response(0.5, np.cos(3.0 * t), dp, modes, t)
    assert np.max(np.abs(ft.values)) == 0.0  # chi_s = 0 kills the prefactor


def test_greens_synthesis_starts_at_zero(field_setup):
    _, dpw, modes, _, _, _ = field_setup
    wn, b, c_const, c_drift = O.greens_time_coefficients(0.5, modes)
    # tau -> 0+: the mode sum cancels the static constant (wave front has
    # not arrived), up to the expansion's truncation residual
    g0 = 2.0 * np.sum(np.imag(b)) + c_const
    assert abs(g0) < 5e-3
    assert c_drift == pytest.approx(1.0 / (1.0 + modes[0].chi_s + 0.002))


def test_greens_laplace_matches_direct(field_setup):
    # the synthesized transform evaluated on the imaginary axis approximates
    # the frequency-domain Green's function from the boundary-value solve
    p, dpw, modes, _, _, _ = field_setup
    for w in (1.7, 2.9):
        got = O.greens_laplace(0.35, modes, -1j * w)
        ref = G.green_direct(0.35, 0.0, w, p, dpw)
        assert got == pytest.approx(ref, rel=2e-3)


def test_causality(field_setup):
    _, dpw, modes, _, t, _ = field_setup
    # an input that switches on late cannot produce an earlier response
    u = np.where(t > 30.0, np.sin(3.0 * (t - 30.0)), 0.0)
    ft = O.field_response(O.RIGHT_OUT if False else 0.7, u, dpw, modes, t)
    assert np.max(np.abs(ft.values[t <= 30.0])) < 1e-12


def test_linearity(field_setup):
    _, dpw, modes, _, t, trace = field_setup
    u2 = np.sin(2.2 * t) * np.exp(-0.05 * t)
    f1 = O.field_response(0.6, trace, dpw, modes, t).values
    f2 = O.field_response(0.6, u2, dpw, modes, t).values
    f12 = O.field_response(0.6, trace + u2, dpw, modes, t).values
    np.testing.assert_allclose(f12, f1 + f2, atol=1e-12)


def test_laplace_factorization(field_setup):
    # transform of the output equals the Green's transform times the
    # transform of the input at sampled decaying Laplace points
    _, dpw, modes, _, t, trace = field_setup
    ft = O.field_response(0.8, trace, dpw, modes, t)
    h = t[1] - t[0]
    for s in (0.35 + 2.0j, 0.5 + 3.1j):
        win = np.exp(-s * t)
        num = np.trapezoid(ft.values * win, dx=h)
        den = np.trapezoid(trace * win, dx=h)
        gl = O.greens_laplace(0.8, modes, s)
        assert num / den == pytest.approx(dpw.chi_s * dpw.omega_j**2 * gl,
                                          rel=1e-4)


def test_output_spectrum_peaks_match_input_peaks(field_setup):
    _, dpw, modes, poles, t, trace = field_setup
    ft = O.field_response(O.RIGHT_OUT, trace, dpw, modes, t)
    om, mag_in = O.output_spectrum(O.FieldTrace(0.0, t, trace))
    _, mag_out = O.output_spectrum(ft)
    pj = next(q for q in poles if q.label == "j")
    k = int(np.argmin(np.abs(om - pj.beta)))
    sl = slice(max(k - 15, 0), k + 15)
    assert abs(int(np.argmax(mag_in[sl])) - int(np.argmax(mag_out[sl]))) <= 1


def test_zero_input_zero_spectrum(field_setup):
    _, dpw, modes, _, t, _ = field_setup
    ft = O.field_response(0.5, np.zeros_like(t), dpw, modes, t)
    om, mag = O.output_spectrum(ft)
    assert np.all(mag == 0.0)


def test_grid_guards(field_setup):
    _, dpw, modes, _, t, trace = field_setup
    with pytest.raises(GridError):
        O.field_response(0.5, trace[:-1], dpw, modes, t)
    with pytest.raises(GridError):
        O.field_response(0.5, trace[:10], dpw, modes, np.logspace(0, 1, 10))
