"""Closed (Hermitian) and open (quasi-bound) resonator eigenproblems.

The closed problem has Neumann ends and a delta-function capacitance bump
of strength chi_s at the oscillator position x0; its eigenfrequencies are
real roots of a transcendental equation and the eigenfunctions are
piecewise cosines.  Opening the ends through the coupling capacitances
chi_r, chi_l turns the eigenfrequencies complex (nu_n - i*kappa_n) and the
eigenfunctions into piecewise plane waves normalized by a biorthogonality
rule that weighs the square of the eigenfunction, not its modulus squared.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import brentq

from .errors import (BracketError, CensusMismatchError, NumericsError,
                     RootConvergenceError, SeedCollisionError)
from .params import CircuitParams, ComplexFrequency, DerivedParams

_NEWTON_MAX_ITER = 80
_DUPLICATE_TOL = 1e-9


# ---------------------------------------------------------------------------
# closed resonator
# ---------------------------------------------------------------------------

def _closed_char(omega, chi_s, x0):
    return np.sin(omega) + chi_s * omega * np.cos(omega * x0) * np.cos(omega * (1.0 - x0))


@dataclass(frozen=True)
class ClosedMode:
    """One Hermitian mode: real frequency plus normalized eigenfunction."""

    index: int
    omega: float
    chi_s: float
    x0: float
    norm: float  # overall factor applied to the raw piecewise-cosine form

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        if np.any((x < 0) | (x > 1)):
            raise ValueError("closed eigenfunctions are defined on [0, 1]")
        if self.omega == 0.0:
            out = np.full_like(x, self.norm)
            return out if out.ndim else float(out)
        w, x0 = self.omega, self.x0
        left = np.cos(w * (1.0 - x0)) * np.cos(w * x)
        right = np.cos(w * x0) * np.cos(w * (1.0 - x))
        out = self.norm * np.where(x < x0, left, right)
        return out if out.ndim else float(out)


def _closed_norm(omega, chi_s, x0):
    """Normalization for the raw piecewise form against the weighted measure."""
    if omega == 0.0:
        return 1.0 / math.sqrt(1.0 + chi_s)
    cA = math.cos(omega * x0)
    cB = math.cos(omega * (1.0 - x0))

    def cos2_int(a):  # integral of cos^2(omega u) du from 0 to a
        return a / 2.0 + math.sin(2.0 * omega * a) / (4.0 * omega)

    total = cB**2 * cos2_int(x0) + cA**2 * cos2_int(1.0 - x0) + chi_s * (cA * cB) ** 2
    norm = 1.0 / math.sqrt(total)
    if cB < 0:  # fix the sign so the eigenfunction is positive at x = 0
        norm = -norm
    return norm


def closed_eigenfrequencies(dp: DerivedParams, x0: float, n_max: int) -> list[float]:
    """First n_max+1 nonnegative roots of the closed characteristic equation.

    omega = 0 (the constant mode) is always a root.  Positive roots are
    bracketed by a sign-change census on a fine grid and bisected to 1e-12
    relative tolerance; a count shortfall raises BracketError.
    """
    if n_max < 1:
        raise ValueError("n_max must be >= 1")
    chi_s = dp.chi_s
    if chi_s == 0.0:
        return [n * math.pi for n in range(n_max + 1)]
    upper = (n_max + 2) * math.pi
    grid = np.linspace(1e-9, upper, int(upper / (math.pi / 256)) + 2)
    vals = _closed_char(grid, chi_s, x0)
    roots = [0.0]
    sign = np.sign(vals)
    idx = np.nonzero(sign[:-1] * sign[1:] < 0)[0]
    for i in idx:
        r = brentq(_closed_char, grid[i], grid[i + 1], args=(chi_s, x0),
                   xtol=1e-15, rtol=1e-13)
        roots.append(r)
        if len(roots) > n_max + 1:
            break
    if len(roots) < n_max + 1:
        raise BracketError(
            f"found {len(roots)} closed roots below {upper:.3g}, expected {n_max + 1}")
    roots = roots[: n_max + 1]
    if any(b <= a for a, b in zip(roots, roots[1:])):
        raise BracketError("closed eigenfrequencies are not strictly increasing")
    return roots


def closed_modes(dp: DerivedParams, x0: float, n_max: int) -> list[ClosedMode]:
    freqs = closed_eigenfrequencies(dp, x0, n_max)
    return [ClosedMode(n, w, dp.chi_s, x0, _closed_norm(w, dp.chi_s, x0))
            for n, w in enumerate(freqs)]


def closed_eigenfunction(mode: ClosedMode, x):
    return mode(x)


# ---------------------------------------------------------------------------
# open resonator: quasi-bound modes
# ---------------------------------------------------------------------------

def _open_char_parts(omega, chi_r, chi_l, chi_s, x0):
    """The two summands of the open characteristic function plus factors."""
    L = 1.0 - 2j * chi_l * omega
    R = 1.0 - 2j * chi_r * omega
    pl = np.exp(2j * omega * x0) + L
    pr = np.exp(2j * omega * (1.0 - x0)) + R
    base = np.exp(2j * omega) - L * R
    scat = 0.5j * chi_s * omega * pl * pr
    return base, scat, L, R, pl, pr


def open_char(omega, chi_r, chi_l, chi_s, x0):
    """Characteristic function whose lower-half-plane roots are the modes."""
    base, scat, *_ = _open_char_parts(omega, chi_r, chi_l, chi_s, x0)
    return base + scat


def open_char_deriv(omega, chi_r, chi_l, chi_s, x0):
    L = 1.0 - 2j * chi_l * omega
    R = 1.0 - 2j * chi_r * omega
    el = np.exp(2j * omega * x0)
    er = np.exp(2j * omega * (1.0 - x0))
    pl = el + L
    pr = er + R
    dL = -2j * chi_l
    dR = -2j * chi_r
    dpl = 2j * x0 * el + dL
    dpr = 2j * (1.0 - x0) * er + dR
    dbase = 2j * np.exp(2j * omega) - (dL * R + L * dR)
    dscat = 0.5j * chi_s * (pl * pr + omega * (dpl * pr + pl * dpr))
    return dbase + dscat


def _char_scale(omega, chi_r, chi_l, chi_s, x0):
    base, scat, *_ = _open_char_parts(omega, chi_r, chi_l, chi_s, x0)
    L = 1.0 - 2j * chi_l * omega
    R = 1.0 - 2j * chi_r * omega
    return max(1.0, abs(np.exp(2j * omega)) + abs(L * R) + abs(scat))


def _newton_mode(seed, chi_r, chi_l, chi_s, x0, tol=1e-12):
    """Damped Newton iteration on the open characteristic function."""
    w = complex(seed)
    f = open_char(w, chi_r, chi_l, chi_s, x0)
    for _ in range(_NEWTON_MAX_ITER):
        scale = _char_scale(w, chi_r, chi_l, chi_s, x0)
        if abs(f) < tol * scale:
            return w
        d = open_char_deriv(w, chi_r, chi_l, chi_s, x0)
        if d == 0:
            raise RootConvergenceError(f"zero derivative at omega = {w}")
        step = f / d
        # backtrack if the residual does not decrease
        for _ in range(40):
            w_new = w - step
            f_new = open_char(w_new, chi_r, chi_l, chi_s, x0)
            if abs(f_new) < abs(f):
                break
            step *= 0.5
        else:
            raise RootConvergenceError(f"Newton stalled near omega = {w}")
        w, f = w_new, f_new
    scale = _char_scale(w, chi_r, chi_l, chi_s, x0)
    if abs(f) < 1e-9 * scale:
        return w
    raise RootConvergenceError(f"no convergence from seed {seed}")


def _newton_mode_batch(seeds, chi_r, chi_l, chi_s, x0, tol=1e-12):
    """Vectorized damped Newton on all seeds at once.

    Returns the converged roots and a boolean mask of stragglers (which the
    caller retries one by one).
    """
    w = np.asarray(seeds, dtype=complex).copy()
    f = open_char(w, chi_r, chi_l, chi_s, x0)
    active = np.ones(w.shape, dtype=bool)
    for _ in range(_NEWTON_MAX_ITER):
        L = 1.0 - 2j * chi_l * w
        R = 1.0 - 2j * chi_r * w
        scat = 0.5j * chi_s * w * (np.exp(2j * w * x0) + L) * (np.exp(2j * w * (1 - x0)) + R)
        scale = np.maximum(1.0, np.abs(np.exp(2j * w)) + np.abs(L * R) + np.abs(scat))
        active &= np.abs(f) >= tol * scale
        if not np.any(active):
            break
        d = open_char_deriv(w, chi_r, chi_l, chi_s, x0)
        bad = active & (d == 0)
        active &= ~bad
        step = np.where(active & (d != 0), f / np.where(d == 0, 1.0, d), 0.0)
        # vectorized backtracking
        improved = ~active
        for _ in range(40):
            w_try = w - step
            f_try = open_char(w_try, chi_r, chi_l, chi_s, x0)
            better = active & ~improved & (np.abs(f_try) < np.abs(f))
            w = np.where(better, w_try, w)
            f = np.where(better, f_try, f)
            improved |= better
            step = np.where(~improved, 0.5 * step, step)
            if np.all(improved):
                break
        active &= improved
    L = 1.0 - 2j * chi_l * w
    R = 1.0 - 2j * chi_r * w
    scat = 0.5j * chi_s * w * (np.exp(2j * w * x0) + L) * (np.exp(2j * w * (1 - x0)) + R)
    scale = np.maximum(1.0, np.abs(np.exp(2j * w)) + np.abs(L * R) + np.abs(scat))
    stragglers = np.abs(open_char(w, chi_r, chi_l, chi_s, x0)) >= tol * scale
    return w, stragglers


@dataclass(frozen=True)
class QuasiBoundMode:
    """One open-resonator resonance with its eigenfunction data at x0.

    a_n = gamma*chi_s*sqrt(nu^2+kappa^2)*|phi(x0)|^2 is the kernel
    amplitude and m_n = gamma*chi_s*|phi(x0)|^2 the hybridization measure.
    The stored `norm` multiplies the raw piecewise plane-wave form; the
    global phase is fixed by Re(phi(0)) >= 0 and recorded through delta_x0.
    """

    index: int
    omega: ComplexFrequency
    phi_abs_x0: float
    delta_x0: float
    theta_n: float
    a_n: float
    m_n: float
    chi_r: float = field(repr=False, default=0.0)
    chi_l: float = field(repr=False, default=0.0)
    chi_s: float = field(repr=False, default=0.0)
    x0: float = field(repr=False, default=0.0)
    norm: complex = field(repr=False, default=1.0 + 0j)
    #: converts the volume-normalized residue guess phi phi/(2 omega_n) into
    #: the true Green's-function residue; differs from one because the end
    #: capacitors make the boundary conditions frequency dependent
    residue_scale: complex = field(repr=False, default=1.0 + 0j)

    @property
    def nu(self) -> float:
        return self.omega.nu

    @property
    def kappa(self) -> float:
        return self.omega.kappa

    def phi(self, x):
        """Normalized eigenfunction, valid inside and outside the resonator."""
        w = self.omega.omega
        L = 1.0 - 2j * self.chi_l * w
        R = 1.0 - 2j * self.chi_r * w
        x0 = self.x0
        x = np.asarray(x, dtype=float)
        pl = np.exp(2j * w * x0) + L
        pr = np.exp(2j * w * (1.0 - x0)) + R
        inner_left = np.exp(-1j * w * (x - x0 + 1.0)) * (np.exp(2j * w * x) + L) * pr
        inner_right = np.exp(-1j * w * (x0 - x + 1.0)) * pl * (np.exp(2j * w * (1.0 - x)) + R)
        right_out = -2j * self.chi_r * w * np.exp(-1j * w * (1.0 + x0)) * pl * np.exp(1j * w * x)
        left_out = -2j * self.chi_l * w * np.exp(-1j * w * (1.0 - x0)) * pr * np.exp(-1j * w * x)
        out = np.where(x < 0, left_out,
                       np.where(x < x0, inner_left,
                                np.where(x <= 1.0, inner_right, right_out)))
        out = self.norm * out
        return out if out.ndim else complex(out)

    def phi_x0(self) -> complex:
        w = self.omega.omega
        L = 1.0 - 2j * self.chi_l * w
        R = 1.0 - 2j * self.chi_r * w
        pl = np.exp(2j * w * self.x0) + L
        pr = np.exp(2j * w * (1.0 - self.x0)) + R
        return self.norm * pl * pr * np.exp(-1j * w)


def _biorthonormal_raw_integral(w, chi_r, chi_l, chi_s, x0):
    """Integral of chi(x,x0) * phi_raw(x)^2 over [0,1], in closed form.

    phi_raw is the unnormalized piecewise plane-wave form; the weight uses
    the square (not modulus squared) of the eigenfunction.
    """
    L = 1.0 - 2j * chi_l * w
    R = 1.0 - 2j * chi_r * w
    pl = cmath.exp(2j * w * x0) + L
    pr = cmath.exp(2j * w * (1.0 - x0)) + R

    def int_pair(a, b, c1, c2, lo, hi):
        # integral of (c1*e^{iwx} + c2*e^{-iwx})^2 dx over [lo, hi]
        e2 = (cmath.exp(2j * w * hi) - cmath.exp(2j * w * lo)) / (2j * w)
        em2 = (cmath.exp(-2j * w * hi) - cmath.exp(-2j * w * lo)) / (-2j * w)
        return c1 * c1 * e2 + 2.0 * c1 * c2 * (hi - lo) + c2 * c2 * em2

    # region x < x0:  pr*e^{-iw(1-x0)} * (e^{iwx} + L e^{-iwx})
    cl = pr * cmath.exp(-1j * w * (1.0 - x0))
    i1 = int_pair(0.0, x0, cl * 1.0, cl * L, 0.0, x0) if x0 > 0 else 0.0
    # region x > x0:  pl*e^{-iw(x0+1)} * (R e^{iwx} + e^{2iw} e^{-iwx})
    cr = pl * cmath.exp(-1j * w * (x0 + 1.0))
    i2 = int_pair(x0, 1.0, cr * R, cr * cmath.exp(2j * w), x0, 1.0) if x0 < 1 else 0.0
    phi0 = pl * pr * cmath.exp(-1j * w)
    return i1 + i2 + chi_s * phi0 * phi0


def _make_mode(index, w, p: CircuitParams, dp: DerivedParams) -> QuasiBoundMode:
    chi_r, chi_l, chi_s, x0 = p.chi_r, p.chi_l, dp.chi_s, p.x0
    total = _biorthonormal_raw_integral(w, chi_r, chi_l, chi_s, x0)
    if abs(total) < 1e-300:
        raise NumericsError(f"degenerate normalization integral for mode at {w}")
    norm = 1.0 / cmath.sqrt(total)
    # fix the global phase: nonnegative real part at x = 0
    L = 1.0 - 2j * chi_l * w
    R = 1.0 - 2j * chi_r * w
    pl = cmath.exp(2j * w * x0) + L
    pr = cmath.exp(2j * w * (1.0 - x0)) + R
    val0 = norm * cmath.exp(-1j * w * (0.0 - x0 + 1.0)) * (1.0 + L) * pr
    if val0.real < 0 or (val0.real == 0 and val0.imag < 0):
        norm = -norm
    phi0 = norm * pl * pr * cmath.exp(-1j * w)
    # surface correction from the frequency dependence of the end conditions
    # u'(0) = sigma_L(w) u(0), u'(1) = sigma_R(w) u(1)
    phi_end0 = norm * cmath.exp(-1j * w * (1.0 - x0)) * (1.0 + L) * pr
    phi_end1 = norm * cmath.exp(-1j * w * x0) * pl * (1.0 + R)
    sdot_r = chi_r * w * (2.0 - 1j * chi_r * w) / (1.0 - 1j * chi_r * w) ** 2
    sdot_l = -chi_l * w * (2.0 - 1j * chi_l * w) / (1.0 - 1j * chi_l * w) ** 2
    surface = (sdot_r * phi_end1**2 - sdot_l * phi_end0**2) / (2.0 * w)
    residue_scale = 1.0 / (1.0 + surface)
    nu, kappa = w.real, -w.imag
    mag = abs(w)
    gcs = dp.gamma * dp.chi_s
    return QuasiBoundMode(
        index=index,
        omega=ComplexFrequency.from_omega(w),
        phi_abs_x0=abs(phi0),
        delta_x0=math.atan2(phi0.imag, phi0.real),
        theta_n=math.atan2(kappa, nu),
        a_n=gcs * mag * abs(phi0) ** 2,
        m_n=gcs * abs(phi0) ** 2,
        chi_r=chi_r, chi_l=chi_l, chi_s=chi_s, x0=x0, norm=norm,
        residue_scale=residue_scale,
    )


def _winding_count(chi_r, chi_l, chi_s, x0, re_lo, re_hi, im_lo, im_hi,
                   samples_per_unit=64):
    """Number of characteristic-function zeros inside a rectangle.

    Computed as the winding of arg F along the boundary, sampled densely
    enough that consecutive phase steps stay below pi/2 (refined locally
    when they do not).
    """
    corners = [complex(re_lo, im_lo), complex(re_hi, im_lo),
               complex(re_hi, im_hi), complex(re_lo, im_hi),
               complex(re_lo, im_lo)]
    pts = []
    for a, b in zip(corners, corners[1:]):
        n = max(8, int(abs(b - a) * samples_per_unit))
        seg = a + (b - a) * np.linspace(0.0, 1.0, n, endpoint=False)
        pts.append(seg)
    z = np.concatenate(pts)
    z = np.append(z, z[0])
    f = open_char(z, chi_r, chi_l, chi_s, x0)
    if np.any(np.abs(f) == 0):
        raise CensusMismatchError("census contour hits a zero exactly")
    dphi = np.angle(f[1:] / f[:-1])
    # refine any segment with an unreliable phase jump
    bad = np.nonzero(np.abs(dphi) > 0.5 * math.pi)[0]
    total = float(np.sum(dphi[np.abs(dphi) <= 0.5 * math.pi]))
    for i in bad:
        sub = np.linspace(0, 1, 64)
        zi = z[i] + (z[i + 1] - z[i]) * sub
        fi = open_char(zi, chi_r, chi_l, chi_s, x0)
        sphi = np.angle(fi[1:] / fi[:-1])
        if np.any(np.abs(sphi) > 0.5 * math.pi):
            raise CensusMismatchError("phase winding unresolved on census contour")
        total += float(np.sum(sphi))
    return int(round(total / (2.0 * math.pi)))


def quasibound_frequencies(dp: DerivedParams, p: CircuitParams,
                           n_max: int) -> list[QuasiBoundMode]:
    """Quasi-bound modes n = 1..n_max with nu_n > 0.

    Newton iterations are seeded from the closed eigenfrequencies with a
    phase/log estimate of the opening-induced shift; every root is polished
    until the characteristic residual (normalized by the size of its
    summands) drops below 1e-12.  Duplicate converged roots raise
    SeedCollisionError; a rectangle argument-principle census verifies
    that no root in the search window was missed.
    """
    chi_r, chi_l, chi_s, x0 = p.chi_r, p.chi_l, dp.chi_s, p.x0
    closed = np.array(closed_eigenfrequencies(dp, x0, n_max)[1:])
    if chi_r == 0.0 and chi_l == 0.0:
        return [_make_mode(n + 1, complex(w, 0.0), p, dp)
                for n, w in enumerate(closed)]
    L = 1.0 - 2j * chi_l * closed
    R = 1.0 - 2j * chi_r * closed
    lr = L * R
    seeds = closed + np.angle(lr) / 2.0 - 0.5j * np.log(np.abs(lr))
    batch, stragglers = _newton_mode_batch(seeds, chi_r, chi_l, chi_s, x0)
    roots = []
    for i, w in enumerate(batch):
        if stragglers[i]:
            w = None
            for bump in (0.0, 0.1 - 0.05j, -0.1 - 0.1j, 0.2j):
                try:
                    w = _newton_mode(seeds[i] + bump, chi_r, chi_l, chi_s, x0)
                    break
                except RootConvergenceError:
                    continue
            if w is None:
                raise RootConvergenceError(
                    f"mode search failed near closed root {closed[i]:.6g}")
        w = complex(w)
        if w.real < 0:
            w = -w.conjugate()
        if w.imag > 0:
            raise NumericsError(f"root {w} in the upper half plane (unstable?)")
        roots.append(w)
    for i, a in enumerate(roots):
        for b in roots[i + 1:]:
            if abs(a - b) < _DUPLICATE_TOL * max(1.0, abs(a)):
                raise SeedCollisionError(
                    f"two Newton runs converged to the same root {a}")
    roots.sort(key=lambda w: w.real)
    # census over a rectangle that encloses all found roots
    re_lo = 0.25 * roots[0].real
    re_hi = roots[-1].real + 0.5 * (roots[-1].real - roots[-2].real if len(roots) > 1
                                    else roots[-1].real)
    im_lo = min(w.imag for w in roots) * 1.8 - 0.5
    count = _winding_count(chi_r, chi_l, chi_s, x0, re_lo, re_hi, im_lo, 0.5)
    if count != len(roots):
        raise CensusMismatchError(
            f"argument principle counts {count} roots in the window, "
            f"{len(roots)} were found")
    return [_make_mode(n + 1, w, p, dp) for n, w in enumerate(roots)]


def mode_table_rows(modes: list[QuasiBoundMode]):
    """Rows (n, nu, kappa, phi_abs_x0, delta_x0, theta, a, m) for CSV export."""
    return [(m.index, m.nu, m.kappa, m.phi_abs_x0, m.delta_x0,
             m.theta_n, m.a_n, m.m_n) for m in modes]
