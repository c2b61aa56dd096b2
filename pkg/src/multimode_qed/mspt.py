"""Multi-scale perturbation theory for the weak quartic nonlinearity.

Three levels, mirroring how the theory is built up: the classical damped
quartic oscillator (frequency renormalized by the amplitude with a
decaying envelope), the free quantum oscillator (operator-valued
frequency, closed-form number-basis matrix elements through the
Weyl-ordering identity), and the hybridized multimode system (each normal
mode picks up a self term scaling with u_l^4 and cross terms scaling with
u_l^2 u_l'^2).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import GridError, UnboundedMotionError
from .linear import HybridizationBasis, HybridizedPole
from .params import DerivedParams


# ---------------------------------------------------------------------------
# classical Duffing oscillator
# ---------------------------------------------------------------------------

def classical_duffing_mspt(omega, kappa, eps, x0, y0, t_grid):
    """Leading-order multi-scale solution of the damped quartic oscillator.

    X(t) = e^{-kappa t/2} [alpha(0) e^{-i omega_bar(t) t} + c.c.] with
    omega_bar(t) = omega [1 - (3 eps/2) |alpha(0)|^2 e^{-kappa t}] and
    alpha(0) = (x0 + i y0)/2.
    """
    if eps > 0:
        # stay inside the inflection points and below the conservative
        # energy bound of the quartic well
        energy = 0.5 * y0**2 + 0.5 * x0**2 - 0.25 * eps * x0**4
        if eps * x0**2 >= 1.0 / 3.0 or energy >= 5.0 / (36.0 * eps):
            raise UnboundedMotionError(
                "initial condition escapes the quartic well")
    t = np.asarray(t_grid, dtype=float)
    a0 = 0.5 * (x0 + 1j * y0)
    omega_bar = omega * (1.0 - 1.5 * eps * abs(a0) ** 2 * np.exp(-kappa * t))
    return np.exp(-0.5 * kappa * t) * 2.0 * np.real(a0 * np.exp(-1j * omega_bar * t))


def classical_duffing_oracle(omega, kappa, eps, x0, y0, t_grid,
                             return_velocity=False):
    """Fixed-step RK4 integration of xddot + kappa xdot + omega^2(x - eps x^3) = 0.

    The step is refined below period/200; initial velocity is omega*y0.
    """
    t = np.asarray(t_grid, dtype=float)
    if len(t) < 2:
        raise GridError("need at least two time points")
    period = 2.0 * math.pi / omega
    h_out = t[1] - t[0]
    sub = max(1, int(math.ceil(h_out / (period / 200.0))))
    h = h_out / sub

    def acc(x, v):
        return -kappa * v - omega**2 * (x - eps * x**3)

    xs = np.empty_like(t)
    vs = np.empty_like(t)
    x, v = float(x0), omega * float(y0)
    xs[0], vs[0] = x, v
    for i in range(1, len(t)):
        for _ in range(sub):
            k1x, k1v = v, acc(x, v)
            k2x, k2v = v + 0.5 * h * k1v, acc(x + 0.5 * h * k1x, v + 0.5 * h * k1v)
            k3x, k3v = v + 0.5 * h * k2v, acc(x + 0.5 * h * k2x, v + 0.5 * h * k2v)
            k4x, k4v = v + h * k3v, acc(x + h * k3x, v + h * k3v)
            x += h / 6.0 * (k1x + 2 * k2x + 2 * k3x + k4x)
            v += h / 6.0 * (k1v + 2 * k2v + 2 * k3v + k4v)
        xs[i], vs[i] = x, v
    return (xs, vs) if return_velocity else xs


# ---------------------------------------------------------------------------
# free quantum Duffing oscillator
# ---------------------------------------------------------------------------

def free_quantum_duffing_element(n, omega, eps, kappa, t):
    """Matrix element factor <n-1|X(t)|n> / sqrt(n)-normalized closed form.

    Returns sqrt(n) e^{-kappa t/2} e^{-i (1 - 3 n eps/2 e^{-kappa t}) omega t}.
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    t = np.asarray(t, dtype=float)
    phase = (1.0 - 1.5 * n * eps * np.exp(-kappa * t)) * omega * t
    out = math.sqrt(n) * np.exp(-0.5 * kappa * t) * np.exp(-1j * phase)
    return out if out.ndim else complex(out)


def quartic_hamiltonian(levels: int, omega: float, eps: float) -> np.ndarray:
    """H = (omega/4)(X^2 + Y^2) - (eps*omega/8) X^4 in a truncated basis."""
    n = np.arange(levels)
    a = np.diag(np.sqrt(n[1:]), 1)
    x = a + a.T
    h = 0.5 * omega * np.diag(2 * n + 1.0) - 0.125 * eps * omega * (x @ x @ x @ x)
    return h


def quartic_well_levels(levels: int, omega: float, eps: float, n_levels=2):
    """Metastable well levels of the inverted quartic Hamiltonian.

    The -X^4 potential is unbounded below, so a large truncated basis also
    produces runaway states outside the well.  Restricting the
    diagonalization to the leading harmonic block whose position support
    stays inside the inflection points (block size ~ 0.4/eps) keeps the
    variational levels pinned to the well.
    """
    h = quartic_hamiltonian(levels, omega, eps)
    if eps > 0:
        m = max(n_levels + 2, min(levels, int(0.4 / eps)))
        h = h[:m, :m]
    evals = np.linalg.eigvalsh(h)
    return [float(evals[k]) for k in range(n_levels)]


def weyl_lowering_element(n, omega, eps, tau, levels=30):
    """<n-1| a(tau) |n> evaluated from the Weyl-ordered operator form.

    Builds a(tau) = [a e^{i(3 omega/2) H0 tau} + e^{i(3 omega/2) H0 tau} a]
    / (2 cos(3 omega tau / 4)) with H0 = n + 1/2 diagonal, and reads off
    the matrix element; the cosine denominator cancels exactly against the
    two half-integer diagonal shifts.
    """
    ns = np.arange(levels)
    a = np.diag(np.sqrt(ns[1:]), 1)
    h0 = np.diag(ns + 0.5)
    exp_h = np.diag(np.exp(1.5j * omega * (ns + 0.5) * tau))
    denom = 2.0 * math.cos(0.75 * omega * tau)
    op = (a @ exp_h + exp_h @ a) / denom
    return op[n - 1, n]


# ---------------------------------------------------------------------------
# multimode corrections and traces
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class MsptBasisState:
    """Initial state: oscillator superposition times resonator occupancies.

    qubit_amplitudes[k] is the amplitude of the k-quantum state of the
    oscillator-like mode; resonator-like modes carry integer occupancies
    (all zero for spontaneous emission).
    """

    qubit_amplitudes: tuple
    resonator_occupancies: tuple = ()

    def __post_init__(self):
        c = np.asarray(self.qubit_amplitudes, dtype=complex)
        norm = float(np.sum(np.abs(c) ** 2))
        if not math.isclose(norm, 1.0, rel_tol=1e-9):
            raise ValueError(f"qubit amplitudes not normalized (norm^2 = {norm})")
        if any(n < 0 for n in self.resonator_occupancies):
            raise ValueError("occupancies must be nonnegative")

    @property
    def coherences(self):
        """z_k = conj(c_{k-1}) c_k sqrt(k) for every k >= 1."""
        c = np.asarray(self.qubit_amplitudes, dtype=complex)
        ks = np.arange(1, len(c))
        return ks, np.conj(c[:-1]) * c[1:] * np.sqrt(ks)

    @property
    def qubit_mean_occupancy(self) -> float:
        c = np.asarray(self.qubit_amplitudes, dtype=complex)
        return float(np.sum(np.abs(c) ** 2 * np.arange(len(c))))


HALF_EXCITED = MsptBasisState((1.0 / math.sqrt(2.0), 1.0 / math.sqrt(2.0)))


@dataclass(frozen=True)
class MsptCorrection:
    """Kerr coefficients and corrected pole trajectories per hybridized mode.

    self_kerr[l] = (3 eps/2) omega_j u_l^4 multiplies the mode's own
    conserved sub-Hamiltonian; cross_kerr[l, l'] = 3 eps omega_j
    u_l^2 u_l'^2 (symmetric, zero diagonal) multiplies the partner's.
    p_bar[l] is the diagonal-matrix-element trajectory on t_grid for the
    supplied occupancies (each sub-Hamiltonian contributing n + 1/2).
    neglected_vacuum_shift[l] is the frequency shift the mode would
    additionally acquire from the half-quantum vacuum energy of the other
    modes; the expectation-value reduction drops it, consistent with
    neglecting resonator vacuum-fluctuation feedback in the reduced
    numerical model, and reports it here instead of silently assuming it
    vanishes.
    """

    labels: tuple
    u: np.ndarray
    poles: np.ndarray
    self_kerr: np.ndarray
    cross_kerr: np.ndarray
    p_bar: np.ndarray
    t_grid: np.ndarray = field(repr=False, default=None)
    neglected_vacuum_shift: np.ndarray = field(repr=False, default=None)


def mspt_pole_corrections(basis: HybridizationBasis,
                          poles: list[HybridizedPole],
                          dp: DerivedParams,
                          occupancies,
                          t_grid) -> MsptCorrection:
    """Operator-valued pole corrections reduced to number-basis elements.

    p_bar_l(t) = p_l + i (3 eps/2) omega_j [u_l^4 (n_l + 1/2) e^{-2 alpha_l t}
                 + sum_{l' != l} 2 u_l^2 u_l'^2 (n_l' + 1/2) e^{-2 alpha_l' t}].
    """
    eps = dp.eps_expansion
    u = np.asarray(basis.u, dtype=float)
    n_modes = len(u)
    occ = np.asarray(occupancies, dtype=float)
    if len(occ) != n_modes:
        raise ValueError("one occupancy per hybridized mode required")
    labels = tuple(hp.label for hp in poles[:n_modes])
    ps = np.array([hp.p.s for hp in poles[:n_modes]])
    alphas = -ps.real
    t = np.asarray(t_grid, dtype=float)
    self_kerr = 1.5 * eps * dp.omega_j * u**4
    cross = 3.0 * eps * dp.omega_j * np.outer(u**2, u**2)
    np.fill_diagonal(cross, 0.0)
    env = np.exp(-2.0 * alphas[None, :] * t[:, None])  # (nt, nmodes)
    h_diag = occ + 0.5
    shift = (self_kerr * h_diag) * env + (env * h_diag) @ cross.T
    p_bar = ps[None, :] + 1j * shift
    sum_u2 = float(np.sum(u**2))
    neglected = 1.5 * eps * dp.omega_j * u**2 * (sum_u2 - u**2) * 0.5
    return MsptCorrection(labels, u, ps, self_kerr, cross, p_bar, t, neglected)


def mspt_expectation_trace(poles_with_residues: list[HybridizedPole],
                           basis: HybridizationBasis,
                           dp: DerivedParams,
                           initial: MsptBasisState,
                           t_grid,
                           include_vacuum_cross: bool = False):
    """Expectation trace of the oscillator quadrature with MSPT shifts.

    Every pole's damped sinusoid keeps its linear-theory residue; the
    lowering-coherence part of each line is frequency shifted by the
    self-Kerr term at the coherence index and by cross-Kerr terms weighted
    with the partners' mean excitation numbers.  Vacuum half-quanta of the
    partner modes are dropped from the cross terms (see MsptCorrection);
    include_vacuum_cross restores them for diagnostics.
    """
    eps = dp.eps_expansion
    t = np.asarray(t_grid, dtype=float)
    u = np.asarray(basis.u, dtype=float)
    labels = [hp.label for hp in poles_with_residues]
    ps = np.array([hp.p.s for hp in poles_with_residues])
    alphas = -ps.real
    # map each pole to its hybridization weight by position in the basis
    u_of = {lbl: (u[i] if i < len(u) else 0.0)
            for i, lbl in enumerate(basis.labels)}
    occ_res = dict(zip([l for l in basis.labels if l != "j"],
                       list(initial.resonator_occupancies)
                       + [0] * len(basis.labels)))
    n_j = initial.qubit_mean_occupancy
    ks, zs = initial.coherences
    trace = np.zeros_like(t)
    for hp in poles_with_residues:
        ul = u_of.get(hp.label, 0.0)
        self_k = 1.5 * eps * dp.omega_j * ul**4
        # cross shift from every other mode's mean excitation
        cross = np.zeros_like(t)
        for lbl2, a2 in zip(labels, alphas):
            if lbl2 == hp.label:
                continue
            u2 = u_of.get(lbl2, 0.0)
            nbar = n_j if lbl2 == "j" else float(occ_res.get(lbl2, 0))
            if include_vacuum_cross:
                nbar = nbar + 0.5
            if nbar == 0.0 or u2 == 0.0:
                continue
            cross = cross + 3.0 * eps * dp.omega_j * ul**2 * u2**2 * nbar \
                * np.exp(-2.0 * a2 * t)
        amp_lower = hp.a_x - 1j * hp.a_y
        amp_raise = hp.a_x + 1j * hp.a_y
        env_self = np.exp(-2.0 * (-hp.p.s.real) * t)
        for k, z in zip(ks, zs):
            if z == 0:
                continue
            shift = (self_k * float(k)) * env_self + cross
            phase = np.exp(hp.p.s * t + 1j * shift * t)
            trace = trace + 2.0 * np.real(amp_lower * z * phase)
            if amp_raise != 0:
                trace = trace + 2.0 * np.real(amp_raise * np.conj(z) * phase)
    return trace


# ---------------------------------------------------------------------------
# spectra
# ---------------------------------------------------------------------------

def spectrum(trace, t_grid):
    """Peak-normalized magnitude of the discrete Fourier transform.

    Requires a uniform time grid; returns (omega, magnitude) with the
    maximum scaled to one.
    """
    t = np.asarray(t_grid, dtype=float)
    dt = np.diff(t)
    if len(t) < 8 or not np.allclose(dt, dt[0], rtol=1e-9, atol=0.0):
        raise GridError("spectrum requires a uniform time grid")
    mag = np.abs(np.fft.rfft(np.asarray(trace, dtype=float)))
    omega = 2.0 * math.pi * np.fft.rfftfreq(len(t), d=dt[0])
    peak = np.max(mag)
    if peak > 0:
        mag = mag / peak
    return omega, mag


def spectral_peak(omega, mag, near=None, window=None):
    """Sub-bin peak location by parabolic interpolation of log-magnitude."""
    omega = np.asarray(omega)
    mag = np.asarray(mag)
    if near is not None:
        width = window if window is not None else 0.2 * near
        sel = (omega > near - width) & (omega < near + width)
        if not np.any(sel):
            raise ValueError("no spectral bins near the requested frequency")
        base = np.nonzero(sel)[0][0]
        i = base + int(np.argmax(mag[sel]))
    else:
        i = int(np.argmax(mag))
    if i == 0 or i == len(mag) - 1:
        return float(omega[i])
    lm, l0, lp = np.log(mag[i - 1] + 1e-300), np.log(mag[i] + 1e-300), \
        np.log(mag[i + 1] + 1e-300)
    denom = lm - 2 * l0 + lp
    shift = 0.0 if denom == 0 else 0.5 * (lm - lp) / denom
    return float(omega[i] + shift * (omega[1] - omega[0]))


def refine_peak(trace, t_grid, omega0, span=None, iters=60):
    """Sub-bin peak frequency by maximizing the Hann-windowed local DTFT.

    Starts from the bin-level estimate omega0 and golden-sections over a
    span of two raw bins; far more accurate than parabolic interpolation
    for closely spaced damped sinusoids.
    """
    t = np.asarray(t_grid, dtype=float)
    y = np.asarray(trace, dtype=float) * np.hanning(len(t))
    if span is None:
        span = 2.0 * 2.0 * math.pi / (t[-1] - t[0])

    def power(w):
        return abs(np.sum(y * np.exp(-1j * w * t)))

    lo, hi = omega0 - span, omega0 + span
    invphi = (math.sqrt(5.0) - 1.0) / 2.0
    c = hi - invphi * (hi - lo)
    d = lo + invphi * (hi - lo)
    fc, fd = power(c), power(d)
    for _ in range(iters):
        if fc > fd:
            hi, d, fd = d, c, fc
            c = hi - invphi * (hi - lo)
            fc = power(c)
        else:
            lo, c, fc = c, d, fd
            d = lo + invphi * (hi - lo)
            fd = power(d)
    return 0.5 * (lo + hi)
