"""Linear spontaneous-emission theory: characteristic function, hybridized
poles and residues, time-domain solution, decay-rate sweeps, and the
normal-mode hybridization coefficients used by the perturbative corrections.

The characteristic function D_j(s) built from the kernel expansion is a
rational function of s whose zeros are the hybridized poles of the coupled
system and whose poles are the bare resonator resonances z_n = -kappa_n -
i nu_n.  Roots are found by Newton tracking along an artificial coupling
homotopy that switches the memory modification on continuously, which
keeps labels well defined through avoided crossings.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass

import numpy as np

from .errors import (NumericsError, PoleProximityError, RootConvergenceError,
                     TrackCrossingError)
from .greens import KernelExpansion
from .modes import QuasiBoundMode
from .params import ComplexFrequency, DerivedParams

_MAX_HALVINGS = 12


@dataclass(frozen=True)
class HybridizedPole:
    """One root of D_j(s) with (optionally) its residue data.

    label is 'j' for the oscillator-like pole or 'n<k>' for the k-th
    resonator-like pole; a_x and a_y are the residues multiplying the
    initial X and Y operators in the time-domain solution.
    """

    label: str
    p: ComplexFrequency
    a_x: complex | None = None
    a_y: complex | None = None

    @property
    def alpha(self) -> float:
        return self.p.alpha

    @property
    def beta(self) -> float:
        return self.p.beta


@dataclass(frozen=True)
class HybridizationBasis:
    """Normal-mode data of the coupled quadratic system.

    u[0] belongs to the oscillator-like mode, u[1:] to the resonator-like
    modes; beta are the normal-mode frequencies from the symmetric
    eigenproblem and alpha the decay rates inherited from the tracked
    poles (zero when no pole list is supplied).
    """

    u: np.ndarray
    beta: np.ndarray
    alpha: np.ndarray
    g: np.ndarray
    labels: tuple


def _bare_pole_guard(s, k: KernelExpansion):
    z = -k.kappa - 1j * k.nu
    d = np.abs(s - z)
    if np.min(d) < 1e-10 * max(1.0, abs(s)):
        raise PoleProximityError(f"s = {s} is too close to a bare resonator pole")


def build_Dj(s, k: KernelExpansion, dp: DerivedParams, lam: float = 1.0):
    """Characteristic function D_j(s); lam scales the memory modification.

    D_j(s) = s^2 + omega_j^2 + lam * omega_j^2 * (-gamma + m_dc
             + sum_n M_n s [cos(2 delta_n)(s + kappa_n) + sin(2 delta_n) nu_n]
                      / ((s+kappa_n)^2 + nu_n^2)).

    The numerator follows from transforming the kernel expansion exactly;
    it keeps the kappa_n cos(2 delta_n) cross term, which is what makes
    this assembly agree pointwise with the Laplace-domain route.
    """
    s = complex(s)
    _bare_pole_guard(s, k)
    q = (s + k.kappa) ** 2 + k.nu**2
    num = s * (np.cos(2.0 * k.delta) * (s + k.kappa) + np.sin(2.0 * k.delta) * k.nu)
    mod = -dp.gamma + k.m_dc + k.r_damp * s + np.sum(k.m * num / q)
    return s * s + dp.omega_j**2 + lam * dp.omega_j**2 * mod


def _dj_mod_terms(s, k: KernelExpansion):
    """Per-mode memory terms and their s-derivatives (no pole guard)."""
    q = (s + k.kappa) ** 2 + k.nu**2
    c2, s2 = np.cos(2.0 * k.delta), np.sin(2.0 * k.delta)
    num = s * (c2 * (s + k.kappa) + s2 * k.nu)
    dnum = c2 * (2.0 * s + k.kappa) + s2 * k.nu
    dq = 2.0 * (s + k.kappa)
    return q, num, dnum, dq


def build_Dj_deriv(s, k: KernelExpansion, dp: DerivedParams, lam: float = 1.0):
    s = complex(s)
    q, num, dnum, dq = _dj_mod_terms(s, k)
    dmod = k.r_damp + np.sum(k.m * (dnum * q - num * dq) / (q * q))
    return 2.0 * s + lam * dp.omega_j**2 * dmod


def build_Dj_laplace_route(s, k: KernelExpansion, dp: DerivedParams):
    """Independent assembly: s^2 + omega_j^2 [1 - gamma + iK1(0) + K2~(s)]."""
    from .greens import kernel_K2_laplace

    s = complex(s)
    return s * s + dp.omega_j**2 * (1.0 - dp.gamma + k.ik1_0 + k.r_damp * s
                                    + kernel_K2_laplace(k, s))


def _cleared_fn(s, k, dp, lam, idx):
    """(h, h') with h = D_j * q_idx, analytic through the idx-th bare pole."""
    s = complex(s)
    q, num, dnum, dq = _dj_mod_terms(s, k)
    base = s * s + dp.omega_j**2 + lam * dp.omega_j**2 * (
        -dp.gamma + k.m_dc + k.r_damp * s)
    dbase = 2.0 * s + lam * dp.omega_j**2 * k.r_damp
    if idx is None:
        other = lam * dp.omega_j**2 * np.sum(k.m * num / q)
        dother = lam * dp.omega_j**2 * np.sum(k.m * (dnum * q - num * dq) / (q * q))
        return base + other, dbase + dother
    keep = np.arange(k.n_modes) != idx
    ratio = np.sum(k.m[keep] * num[keep] / q[keep]) if np.any(keep) else 0.0
    dratio = (np.sum(k.m[keep] * (dnum[keep] * q[keep] - num[keep] * dq[keep])
                     / q[keep] ** 2) if np.any(keep) else 0.0)
    w2 = lam * dp.omega_j**2
    h = (base + w2 * ratio) * q[idx] + w2 * k.m[idx] * num[idx]
    dh = ((dbase + w2 * dratio) * q[idx] + (base + w2 * ratio) * dq[idx]
          + w2 * k.m[idx] * dnum[idx])
    return h, dh


def _root_scale(s, k, dp, idx):
    scale = max(1.0, abs(s) ** 2, dp.omega_j**2)
    if idx is not None:
        # uncanceled magnitude: the cleared factor q suffers cancellation
        # near its own zero, which sets the achievable residual floor
        scale *= max(1.0, abs((s + k.kappa[idx]) ** 2) + k.nu[idx] ** 2)
    return scale


def _newton_root(s0, k, dp, lam, idx=None, tol=1e-12):
    """Newton iteration on D_j, or on the idx-cleared form for resonator roots."""
    s = complex(s0)
    f, d = _cleared_fn(s, k, dp, lam, idx)
    for _ in range(60):
        if abs(f) < tol * _root_scale(s, k, dp, idx):
            return s
        if d == 0:
            raise RootConvergenceError(f"zero derivative at s = {s}")
        step = f / d
        for _ in range(30):
            s_new = s - step
            f_new, d_new = _cleared_fn(s_new, k, dp, lam, idx)
            if abs(f_new) < abs(f):
                break
            step *= 0.5
        else:
            raise RootConvergenceError(f"Newton stalled at s = {s}")
        s, f, d = s_new, f_new, d_new
    if abs(f) < 1e-8 * _root_scale(s, k, dp, idx):
        return s
    raise RootConvergenceError(f"no convergence from seed {s0}")


def _dj_second_deriv(s, k, dp, lam):
    s = complex(s)
    q = (s + k.kappa) ** 2 + k.nu**2
    c2, s2 = np.cos(2.0 * k.delta), np.sin(2.0 * k.delta)
    num = s * (c2 * (s + k.kappa) + s2 * k.nu)
    dnum = c2 * (2.0 * s + k.kappa) + s2 * k.nu
    dq = 2.0 * (s + k.kappa)
    first = (dnum * q - num * dq) / (q * q)
    second = (2.0 * c2 * q - num * 2.0 - 2.0 * dq * first * q) / (q * q)
    return 2.0 + lam * dp.omega_j**2 * np.sum(k.m * second)


def _newton_deflated(s0_known, seed, k, dp, lam, idx, tol=1e-12):
    """Newton on the (cleared) function deflated by a known root."""
    s = complex(seed)
    for _ in range(80):
        h, dh = _cleared_fn(s, k, dp, lam, idx)
        denom = s - s0_known
        if denom == 0:
            s = s + 1e-8 * (1.0 + abs(s))
            continue
        f = h / denom
        d = dh / denom - h / (denom * denom)
        if abs(f) < tol * _root_scale(s, k, dp, idx) / max(abs(denom), 1e-12):
            return s
        if d == 0:
            raise RootConvergenceError(f"zero deflated derivative at s = {s}")
        step = f / d
        for _ in range(30):
            s_new = s - step
            if s_new == s0_known:
                step *= 0.5
                continue
            h_new, _ = _cleared_fn(s_new, k, dp, lam, idx)
            if abs(h_new / (s_new - s0_known)) < abs(f):
                break
            step *= 0.5
        else:
            raise RootConvergenceError(f"deflated Newton stalled at s = {s}")
        s = s_new
    raise RootConvergenceError(f"deflated Newton did not converge from {seed}")


def _track_step(roots, k, dp, lam):
    new = [_newton_root(s, k, dp, lam, idx=(i - 1 if i > 0 else None))
           for i, s in enumerate(roots)]
    arr = np.array(new)
    d = np.abs(arr[:, None] - arr[None, :])
    np.fill_diagonal(d, np.inf)
    tol = 1e-9 * max(1.0, np.max(np.abs(arr)))
    pairs = np.argwhere(d < tol)
    if len(pairs) == 2:
        # exactly one collapsed pair: recover the partner through a
        # deflated search seeded by the local quadratic of D_j
        i, j = sorted(pairs[0])
        s0 = arr[i]
        d1 = build_Dj_deriv(s0, k, dp, lam)
        d2 = _dj_second_deriv(s0, k, dp, lam)
        if d2 == 0:
            raise TrackCrossingError("degenerate pair with vanishing curvature")
        s_alt = _newton_deflated(s0, s0 - 2.0 * d1 / d2, k, dp, lam,
                                 idx=(j - 1 if j > 0 else None))
        if abs(s_alt - s0) < tol:
            raise TrackCrossingError("pair rescue collapsed back onto the root")
        if i == 0:
            # oscillator label at an exact avoided crossing: convention is
            # that 'j' takes the lower-frequency branch (larger Im s)
            lo, hi = (s0, s_alt) if s0.imag >= s_alt.imag else (s_alt, s0)
            new[i], new[j] = lo, hi
        elif abs(roots[i] - s0) <= abs(roots[j] - s0):
            new[j] = s_alt
        else:
            new[i] = s_alt
        arr = np.array(new)
        d = np.abs(arr[:, None] - arr[None, :])
        np.fill_diagonal(d, np.inf)
    if np.min(d) < tol:
        raise TrackCrossingError("two pole tracks collapsed onto one root")
    return new


def find_hybridized_poles(k: KernelExpansion, dp: DerivedParams,
                          n_track: int | None = None,
                          seeds: list[complex] | None = None) -> list[HybridizedPole]:
    """Roots of D_j(s) tracked from the uncoupled limit.

    The memory modification is scaled by lam running from 0 to 1; at
    lam = 0 the roots are the bare oscillator pole -i omega_j and the bare
    resonator poles z_n, which fixes the labels once and for all.  Steps
    halve automatically (a bounded number of times) when a track becomes
    ambiguous.  Returns the representatives with Im(s) <= 0; conjugate
    partners are implied.  `seeds` (label-ordered) restarts the tracking
    from a nearby solution, e.g. the previous point of a parameter sweep.
    """
    if n_track is None:
        n_track = k.n_modes
    if not 1 <= n_track <= k.n_modes:
        raise NumericsError(f"n_track = {n_track} outside [1, {k.n_modes}]")
    kt = k.truncated(n_track) if n_track != k.n_modes else k
    labels = ["j"] + [f"n{i + 1}" for i in range(n_track)]
    if seeds is not None:
        if len(seeds) != n_track + 1:
            raise NumericsError("seed list must match n_track + 1 labels")
        roots = [_newton_root(s, kt, dp, 1.0, idx=(i - 1 if i > 0 else None))
                 for i, s in enumerate(seeds)]
        return [HybridizedPole(lbl, ComplexFrequency.from_s(s))
                for lbl, s in zip(labels, roots)]
    roots = [-1j * dp.omega_j] + [complex(-kap, -nu)
                                  for kap, nu in zip(kt.kappa, kt.nu)]
    lam, step = 0.0, 0.25
    halvings = 0
    while lam < 1.0:
        target = min(1.0, lam + step)
        try:
            roots_new = _track_step(roots, kt, dp, target)
        except (TrackCrossingError, RootConvergenceError):
            halvings += 1
            if halvings > _MAX_HALVINGS:
                raise TrackCrossingError(
                    f"pole tracking ambiguous near lam = {lam} after "
                    f"{_MAX_HALVINGS} refinements")
            step *= 0.5
            continue
        roots, lam = roots_new, target
        step = min(2.0 * step, 0.25)
    return [HybridizedPole(lbl, ComplexFrequency.from_s(s))
            for lbl, s in zip(labels, roots)]


def residues_at_poles(poles: list[HybridizedPole], k: KernelExpansion,
                      dp: DerivedParams) -> list[HybridizedPole]:
    """Attach the residues A^X = p/D', A^Y = omega_j/D' to each pole.

    In the fully decoupled limit the resonator-like labels sit on the
    bare resonances, which are then not roots of D_j at all; their
    residues vanish identically.
    """
    decoupled = bool(np.all(k.m == 0.0))
    out = []
    for hp in poles:
        if decoupled and hp.label != "j":
            out.append(HybridizedPole(hp.label, hp.p, 0.0 + 0.0j, 0.0 + 0.0j))
            continue
        d = build_Dj_deriv(hp.p.s, k, dp)
        if abs(d) < 1e-8:
            raise NumericsError(f"near-degenerate pole {hp.label}: |D'| = {abs(d):.2e}")
        out.append(HybridizedPole(hp.label, hp.p, hp.p.s / d, dp.omega_j / d))
    return out


def linear_time_solution(poles: list[HybridizedPole], t_grid,
                         x0_expect: float = 1.0, y0_expect: float = 0.0):
    """Expectation trace of the X quadrature from the pole decomposition.

    <X(t)> = sum over representatives of 2 Re[(A^X <X(0)> + A^Y <Y(0)>) e^{p t}].
    For the half-excited superposition initial state <X(0)> = 1, <Y(0)> = 0.
    """
    t = np.asarray(t_grid, dtype=float)
    total = np.zeros_like(t)
    for hp in poles:
        if hp.a_x is None:
            raise NumericsError(f"pole {hp.label} carries no residues")
        amp = hp.a_x * x0_expect + hp.a_y * y0_expect
        total += 2.0 * np.real(amp * np.exp(hp.p.s * t))
    return total


def residue_sum_rule(poles: list[HybridizedPole]) -> float:
    """sum over all poles of (A^X + conj(A^X)); equals 1 when complete."""
    return float(sum(2.0 * hp.a_x.real for hp in poles))


def decay_rate_sweep(omega_j_grid, k: KernelExpansion, dp: DerivedParams):
    """Oscillator-like decay rate alpha_j = -Re p_j versus bare frequency.

    The kernel (fixed geometry) is reused for every omega_j; only the bare
    frequency in D_j changes.  Each grid point runs its own homotopy so
    that the label is anchored at the uncoupled limit.
    """
    rows = []
    for wj in np.asarray(omega_j_grid, dtype=float):
        dpl = DerivedParams(dp.chi_s, dp.gamma, float(wj), dp.eps_nl,
                            dp.eps_expansion, dp.phi_zpf)
        poles = find_hybridized_poles(k, dpl)
        pj = next(p for p in poles if p.label == "j")
        rows.append((float(wj), pj.alpha, pj.beta))
    return rows


def coupling_matrix(dp: DerivedParams, modes: list[QuasiBoundMode],
                    n_keep: int, kern: KernelExpansion | None = None
                    ) -> tuple[np.ndarray, np.ndarray]:
    """Symmetric frequency-squared matrix of the coupled quadratic system.

    Couplings g_n = (gamma/2) sqrt(chi_j) sqrt(omega_j nu_n) phi_n(x0)
    satisfy g_n^2 = M_n omega_j nu_n / 4, so the symmetric off-diagonal is
    W_0n = 2 g_n sqrt(omega_j nu_n) with W_0n^2 = omega_j^2 M_n nu_n^2.
    The oscillator diagonal carries the same truncation-consistent static
    renormalization as the characteristic function, omega_j^2 (1 - gamma +
    m_dc + sum over kept modes of M_n cos 2 delta_n), so the two routes to
    the linear spectrum agree at every truncation.
    """
    if not 1 <= n_keep <= len(modes):
        raise NumericsError(f"n_keep = {n_keep} outside [1, {len(modes)}]")
    if kern is None:
        from .greens import build_kernels
        kern = build_kernels(list(modes), dp)
    kt = kern.truncated(n_keep) if n_keep != kern.n_modes else kern
    nus = kt.nu
    m_eff = kt.m * np.cos(2.0 * kt.delta)
    const = 1.0 - dp.gamma + kt.m_dc + float(np.sum(m_eff))
    w = np.zeros((n_keep + 1, n_keep + 1))
    w[0, 0] = dp.omega_j**2 * const
    signs = np.sign(np.array([(m.phi_x0()).real for m in modes[:n_keep]]))
    signs[signs == 0] = 1.0
    g = 0.5 * signs * np.sqrt(np.abs(m_eff)) * np.sqrt(dp.omega_j * nus)
    for i in range(n_keep):
        w[i + 1, i + 1] = nus[i] ** 2
        w[0, i + 1] = w[i + 1, 0] = 2.0 * g[i] * math.sqrt(dp.omega_j * nus[i])
    return w, g


def hybridization_coefficients(dp: DerivedParams, modes: list[QuasiBoundMode],
                               n_keep: int,
                               poles: list[HybridizedPole] | None = None,
                               kern: KernelExpansion | None = None
                               ) -> HybridizationBasis:
    """Diagonalize the quadratic system and read off the mode weights.

    The weight of the bare oscillator quadrature in normal mode l is
    u_l = O[0, l] sqrt(beta_l / omega_j) with O the orthonormal
    eigenvector matrix.  Decay rates alpha_l are matched from the tracked
    pole list by frequency proximity when one is given.
    """
    w, g = coupling_matrix(dp, modes, n_keep, kern)
    if not np.allclose(w, w.T, rtol=0, atol=1e-12 * max(1.0, np.max(np.abs(w)))):
        raise NumericsError("coupling matrix lost its symmetry")
    evals, vecs = np.linalg.eigh(w)
    if evals[0] <= 0:
        raise NumericsError(
            f"coupled quadratic form is not positive definite (min {evals[0]:.3g})")
    beta_all = np.sqrt(evals)
    # the oscillator-like column carries the largest bare-oscillator weight;
    # the rest stay ordered by frequency
    j_col = int(np.argmax(np.abs(vecs[0])))
    cols = [j_col] + [c for c in range(len(beta_all)) if c != j_col]
    beta = beta_all[cols]
    vecs = vecs[:, cols]
    signs = np.where(vecs[0] >= 0, 1.0, -1.0)
    vecs = vecs * signs
    u = vecs[0] * np.sqrt(beta / dp.omega_j)
    labels = ["j"] + [f"n{i + 1}" for i in range(len(beta) - 1)]
    alpha = np.zeros_like(beta)
    if poles is not None:
        pole_betas = np.array([p.beta for p in poles])
        pole_alphas = np.array([p.alpha for p in poles])
        for i, b in enumerate(beta):
            alpha[i] = pole_alphas[np.argmin(np.abs(pole_betas - b))]
    return HybridizationBasis(u, beta, alpha, g, tuple(labels))
