"""Resonator and waveguide field response to the oscillator's motion.

The field trace at any position is the convolution of the oscillator's
quadrature expectation with the time-domain Green's function, synthesized
mode by mode from the quasi-bound expansion: each mode contributes a
damped sinusoid plus the static offset that makes the response vanish at
zero delay.  The convolution per mode is carried by an exactly-integrated
complex auxiliary (piecewise-linear input), so the cost is linear in the
trace length.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import GridError, NumericsError
from .greens import LEFT_OUT, RIGHT_OUT
from .modes import QuasiBoundMode
from .params import DerivedParams


@dataclass(frozen=True)
class FieldTrace:
    position: object
    t: np.ndarray
    values: np.ndarray
    provenance: str = "linear"


def _mode_value(mode: QuasiBoundMode, x):
    if x == LEFT_OUT:
        return mode.phi(np.nextafter(0.0, -1.0))
    if x == RIGHT_OUT:
        return mode.phi(np.nextafter(1.0, 2.0))
    return mode.phi(float(x))


def greens_time_coefficients(x, modes: list[QuasiBoundMode]):
    """Coefficients of the synthesized G(x, t | x0, t') for t > t'.

    G(x, x0, tau) = sum_n 2 Im[B_n e^{-i omega_n tau}] + c_const - c_drift*tau
    with B_n = phi_n(x) phi_n(x0) residue_scale / (2 omega_n); the constant
    and the linear drift come from the static (zero-frequency) double pole
    of the response -- a delta kick leaves the flux zero mode moving.
    Returns (omega_n, B_n, c_const, c_drift).
    """
    if not modes:
        raise NumericsError("empty mode list")
    m0 = modes[0]
    wn = np.array([m.omega.omega for m in modes])
    b = np.array([_mode_value(m, x) * m.phi_x0() * m.residue_scale
                  for m in modes]) / (2.0 * wn)
    chi_tot = 1.0 + m0.chi_s + m0.chi_r + m0.chi_l
    c_drift = 1.0 / chi_tot
    c_const = -(m0.chi_r**2 + m0.chi_l**2) / chi_tot**2
    return wn, b, c_const, c_drift


def field_response(x, input_trace, dp: DerivedParams,
                   modes: list[QuasiBoundMode], t_grid,
                   provenance: str = "linear") -> FieldTrace:
    """chi_s omega_j^2 times the convolution of the input with G(x, t|x0, t').

    The input trace must live on a uniform grid; it is treated as
    piecewise linear, for which the per-mode exponential convolution has a
    closed-form update.
    """
    t = np.asarray(t_grid, dtype=float)
    u = np.asarray(input_trace, dtype=float)
    if t.shape != u.shape:
        raise GridError("input trace and time grid differ in length")
    dt = np.diff(t)
    if len(t) < 2 or not np.allclose(dt, dt[0], rtol=1e-9, atol=0.0):
        raise GridError("field response requires a uniform grid")
    h = dt[0]
    wn, b, c_const, c_drift = greens_time_coefficients(x, modes)
    lam = -1j * wn  # decay rates of e^{-i omega tau}
    elam = np.exp(lam * h)
    # exact integrals of e^{lam (h - s)} {1, s/h} ds over one step
    i0 = (elam - 1.0) / lam
    i1 = (elam - 1.0 - lam * h) / (lam * lam * h)
    conv = np.zeros(len(modes), dtype=complex)
    int_u = 0.0   # integral of u
    int_tu = 0.0  # integral of t' u(t')
    out = np.empty_like(u)
    out[0] = 0.0
    prefac = dp.chi_s * dp.omega_j**2
    for i in range(1, len(t)):
        u0, u1 = u[i - 1], u[i]
        conv = conv * elam + u0 * i0 + (u1 - u0) * i1
        int_u += 0.5 * h * (u0 + u1)
        int_tu += 0.5 * h * (t[i - 1] * u0 + t[i] * u1)
        val = (2.0 * np.sum(np.imag(b * conv)) + c_const * int_u
               - c_drift * (t[i] * int_u - int_tu))
        out[i] = prefac * val
    return FieldTrace(x, t, out, provenance)


def greens_laplace(x, modes: list[QuasiBoundMode], s):
    """Laplace transform of the synthesized time-domain Green's function."""
    wn, b, c_const, c_drift = greens_time_coefficients(x, modes)
    s = complex(s)
    val = np.sum(-1j * (b / (s + 1j * wn) - np.conj(b) / (s - 1j * np.conj(wn))))
    return complex(val + c_const / s - c_drift / (s * s))


def output_spectrum(ft: FieldTrace):
    """Peak-normalized magnitude spectrum of a field trace."""
    from .mspt import spectrum

    return spectrum(ft.values, ft.t)
