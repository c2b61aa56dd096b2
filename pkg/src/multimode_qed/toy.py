"""Single-mode cavity toy model: Green's function and hybridized poles.

The qubit oscillator couples to one damped cavity mode.  The linear
dynamics is fixed by a characteristic function whose four roots are the
qubit-like and cavity-like pole pairs; a rotating-wave variant of the
coupling gives a second characteristic function for comparison.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import ParameterError, PoleProximityError, TrackCrossingError
from .params import ComplexFrequency


@dataclass(frozen=True)
class ToyParams:
    omega_j: float
    omega_c: float
    kappa_c: float
    g: float

    def __post_init__(self):
        if self.kappa_c < 0:
            raise ParameterError("kappa_c", self.kappa_c, "must be >= 0")
        if self.omega_c <= self.kappa_c:
            raise ParameterError("omega_c", self.omega_c,
                                 "must exceed kappa_c (underdamped cavity)")
        if self.g < 0:
            raise ParameterError("g", self.g, "must be >= 0")

    @property
    def nu_c(self) -> float:
        return math.sqrt(self.omega_c**2 - self.kappa_c**2)


@dataclass(frozen=True)
class ToyPolePair:
    p_j: ComplexFrequency
    p_c: ComplexFrequency
    rw_flag: bool


def toy_green_time(tau, omega_c: float, kappa_c: float):
    """Impulse response of the damped cavity oscillator.

    Returns -sin(nu_c*tau)*exp(-kappa_c*tau)/nu_c for tau > 0 and 0 for
    tau <= 0, with nu_c = sqrt(omega_c^2 - kappa_c^2).
    """
    if omega_c <= kappa_c:
        raise ParameterError("omega_c", omega_c, "must exceed kappa_c")
    nu_c = math.sqrt(omega_c**2 - kappa_c**2)
    tau = np.asarray(tau, dtype=float)
    out = np.where(tau > 0,
                   -np.sin(nu_c * tau) * np.exp(-kappa_c * tau) / nu_c,
                   0.0)
    return out if out.ndim else float(out)


def toy_char_fn(s, p: ToyParams, rw: bool = False):
    """Characteristic function D_j(s) of the toy model.

    Without the rotating-wave approximation:
        D_j(s) = s^2 + omega_j^2 - 4 g^2 omega_j omega_c / (s^2 + 2 kappa_c s + omega_c^2).
    With it, the bare frequencies pick up +g^2 and the coupling numerator
    becomes g^2 (omega_j + omega_c)^2 over the shifted cavity factor.
    """
    s = np.asarray(s, dtype=complex)
    if rw:
        cav = s * s + 2.0 * p.kappa_c * s + (p.omega_c**2 + p.g**2)
    else:
        cav = s * s + 2.0 * p.kappa_c * s + p.omega_c**2
    scale = abs(p.omega_c) ** 2
    if np.any(np.abs(cav) < 1e-12 * scale):
        raise PoleProximityError(
            "s lies on (or too near) a bare cavity pole of the characteristic function")
    if rw:
        val = s * s + (p.omega_j**2 + p.g**2) - (p.g**2 * (p.omega_j + p.omega_c)**2) / cav
    else:
        val = s * s + p.omega_j**2 - (4.0 * p.g**2 * p.omega_j * p.omega_c) / cav
    return val if val.ndim else complex(val)


def _char_poly_coeffs(p: ToyParams, rw: bool):
    """Quartic polynomial D_j(s) * (cavity factor) in descending powers."""
    if rw:
        wj2 = p.omega_j**2 + p.g**2
        wc2 = p.omega_c**2 + p.g**2
        num = p.g**2 * (p.omega_j + p.omega_c) ** 2
    else:
        wj2 = p.omega_j**2
        wc2 = p.omega_c**2
        num = 4.0 * p.g**2 * p.omega_j * p.omega_c
    k = p.kappa_c
    # (s^2 + wj2)(s^2 + 2k s + wc2) - num
    return np.array([1.0, 2.0 * k, wc2 + wj2, 2.0 * k * wj2, wj2 * wc2 - num])


def _representatives(roots):
    """Pick the two lower-half-plane (Im s < 0) roots of a conjugate quartet."""
    low = sorted((r for r in roots if r.imag < 0), key=lambda r: -r.imag)
    if len(low) != 2:
        # fall back: pair up conjugates by sorting on imaginary part
        srt = sorted(roots, key=lambda r: r.imag)
        low = srt[:2]
    return low


def toy_pole_sweep(p: ToyParams, g_grid) -> list[ToyPolePair]:
    """Track the qubit-like and cavity-like poles along an ascending g grid.

    Roots are obtained per g from the companion-matrix eigenvalues of the
    cleared quartic and matched to the previous grid point by proximity,
    which keeps labels continuous through the avoided crossing.  Both the
    full and rotating-wave characteristic functions are swept.
    """
    g_grid = list(g_grid)
    if not g_grid or g_grid[0] != 0.0 or any(
            b < a for a, b in zip(g_grid, g_grid[1:])):
        raise ParameterError("g_grid", g_grid[:3],
                             "must be sorted ascending and start at 0")
    out = []
    for rw in (False, True):
        prev = {"j": -1j * p.omega_j, "c": -p.kappa_c - 1j * p.nu_c}
        for g in g_grid:
            pg = ToyParams(p.omega_j, p.omega_c, p.kappa_c, g)
            roots = np.roots(_char_poly_coeffs(pg, rw))
            cand = _representatives(roots)
            # assign the two candidates to the previous labels by total distance
            d_direct = abs(cand[0] - prev["j"]) + abs(cand[1] - prev["c"])
            d_swap = abs(cand[1] - prev["j"]) + abs(cand[0] - prev["c"])
            pj, pc = (cand[0], cand[1]) if d_direct <= d_swap else (cand[1], cand[0])
            if not np.isfinite(pj) or not np.isfinite(pc):
                raise TrackCrossingError(f"root tracking failed at g = {g}")
            prev = {"j": pj, "c": pc}
            out.append(ToyPolePair(ComplexFrequency.from_s(pj),
                                   ComplexFrequency.from_s(pc), rw))
    return out


def char_from_factored(s, pj: complex, pc: complex, p: ToyParams):
    """Rebuild D_j(s) from its root/pole factorization (full model).

    D_j(s) = (s-p_j)(s-p_j*)(s-p_c)(s-p_c*) / ((s-z_c)(s-z_c*)) with
    z_c = -kappa_c - i*nu_c the bare cavity pole.
    """
    zc = -p.kappa_c - 1j * p.nu_c
    s = np.asarray(s, dtype=complex)
    num = (s - pj) * (s - np.conj(pj)) * (s - pc) * (s - np.conj(pc))
    den = (s - zc) * (s - np.conj(zc))
    return num / den
