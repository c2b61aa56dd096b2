"""Resonator Green's function by two routes, and the memory kernels.

The direct route solves the piecewise-plane-wave boundary-value problem
exactly (up to linear-solve roundoff) for each frequency.  The spectral
route sums the quasi-bound partial-fraction representation and is the
production path for kernels; the direct route is its ground truth.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.integrate import quad

from .errors import NumericsError, PoleProximityError, SingularMatchingError
from .params import CircuitParams, DerivedParams
from .modes import QuasiBoundMode

#: region tags for evaluation points on the waveguide side of an interface
LEFT_OUT = "0-"
RIGHT_OUT = "1+"


# ---------------------------------------------------------------------------
# direct boundary-value solution
# ---------------------------------------------------------------------------

def _direct_coefficients(xp: float, omega: complex, p: CircuitParams,
                         dp: DerivedParams):
    """Solve the matching problem for a source at xp; returns (D, regions, C).

    regions is a list of ((x_lo, x_hi), a, b) with the field a*e^{i w x} +
    b*e^{-i w x} on each interior piece.  D and C are the outgoing
    amplitudes in the left and right waveguides.
    """
    w = complex(omega)
    if abs(w) < 1e-12:
        raise PoleProximityError("omega = 0 is a pole of the Green's function")
    if not 0.0 <= xp <= 1.0:
        raise ValueError("source position must lie in [0, 1]")
    chi_s, x0 = dp.chi_s, p.x0

    # interior nodes carry a scatterer strength and a source indicator
    nodes = {}
    if chi_s > 0.0:
        nodes[x0] = [chi_s, 0.0]
    nodes.setdefault(xp, [0.0, 0.0])[1] = 1.0
    inner = sorted(pos for pos in nodes if 0.0 < pos < 1.0)
    edge0 = nodes.get(0.0, [0.0, 0.0])
    edge1 = nodes.get(1.0, [0.0, 0.0])

    bounds = [0.0] + inner + [1.0]
    n_reg = len(bounds) - 1
    n_unk = 2 + 2 * n_reg  # D, (a_i, b_i), C
    A = np.zeros((n_unk, n_unk), dtype=complex)
    rhs = np.zeros(n_unk, dtype=complex)

    def col_a(i):
        return 1 + 2 * i

    def col_b(i):
        return 2 + 2 * i

    e = np.exp
    iw = 1j * w
    w2 = w * w
    row = 0
    # left edge: J = dG_L(0) = -i w D;  J = chi_L w^2 (D - G_1(0));
    # dG_1(0) - J + chi_node w^2 G_1(0) = S_node
    A[row, 0] = -iw - p.chi_l * w2
    A[row, col_a(0)] = p.chi_l * w2
    A[row, col_b(0)] = p.chi_l * w2
    rhs[row] = 0.0
    row += 1
    A[row, col_a(0)] = iw + edge0[0] * w2
    A[row, col_b(0)] = -iw + edge0[0] * w2
    A[row, 0] = iw  # -J with J = -i w D
    rhs[row] = edge0[1]
    row += 1
    # interior nodes
    for k, xq in enumerate(inner):
        chi_n, src = nodes[xq]
        ep, em = e(iw * xq), e(-iw * xq)
        i, j = k, k + 1
        A[row, col_a(i)] = ep
        A[row, col_b(i)] = em
        A[row, col_a(j)] = -ep
        A[row, col_b(j)] = -em
        rhs[row] = 0.0
        row += 1
        A[row, col_a(j)] = iw * ep + chi_n * w2 * ep
        A[row, col_b(j)] = -iw * em + chi_n * w2 * em
        A[row, col_a(i)] = -iw * ep
        A[row, col_b(i)] = iw * em
        rhs[row] = src
        row += 1
    # right edge: J = dG_R(1) = i w C e^{iw};  J = chi_R w^2 (G_n(1) - C e^{iw});
    # J - dG_n(1) + chi_node w^2 G_n(1) = S_node
    last = n_reg - 1
    ep1, em1 = e(iw), e(-iw)
    A[row, n_unk - 1] = iw * ep1 + p.chi_r * w2 * ep1
    A[row, col_a(last)] = -p.chi_r * w2 * ep1
    A[row, col_b(last)] = -p.chi_r * w2 * em1
    rhs[row] = 0.0
    row += 1
    A[row, n_unk - 1] = iw * ep1
    A[row, col_a(last)] = -iw * ep1 + edge1[0] * w2 * ep1
    A[row, col_b(last)] = iw * em1 + edge1[0] * w2 * em1
    rhs[row] = edge1[1]

    try:
        sol = np.linalg.solve(A, rhs)
    except np.linalg.LinAlgError as exc:
        raise SingularMatchingError(
            f"matching system singular at omega = {w}") from exc
    if not np.all(np.isfinite(sol)):
        raise SingularMatchingError(f"matching solve overflowed at omega = {w}")
    regions = [((bounds[i], bounds[i + 1]), sol[col_a(i)], sol[col_b(i)])
               for i in range(n_reg)]
    return sol[0], regions, sol[-1]


def green_direct(x, xp: float, omega: complex, p: CircuitParams,
                 dp: DerivedParams):
    """Frequency-domain Green's function from the boundary-value problem.

    x may be a float anywhere on the line or one of the region tags "0-"
    and "1+" selecting the waveguide side of an interface.  The source xp
    must lie inside [0, 1].
    """
    D, regions, C = _direct_coefficients(xp, omega, p, dp)
    w = complex(omega)

    def evaluate(pos):
        if pos == LEFT_OUT:
            return D
        if pos == RIGHT_OUT:
            return C * np.exp(1j * w)
        xv = float(pos)
        if xv < 0.0:
            return D * np.exp(-1j * w * xv)
        if xv > 1.0:
            return C * np.exp(1j * w * xv)
        for (lo, hi), a, b in regions:
            if lo <= xv <= hi:
                return a * np.exp(1j * w * xv) + b * np.exp(-1j * w * xv)
        return regions[-1][1] * np.exp(1j * w * xv) + regions[-1][2] * np.exp(-1j * w * xv)

    if isinstance(x, (list, tuple, np.ndarray)):
        return np.array([evaluate(v) for v in x])
    return evaluate(x)


# ---------------------------------------------------------------------------
# spectral (quasi-bound) representation
# ---------------------------------------------------------------------------

def _mode_phi(mode: QuasiBoundMode, x):
    if x == LEFT_OUT:
        return mode.phi(-0.0) if False else mode.phi(np.nextafter(0.0, -1.0))
    if x == RIGHT_OUT:
        return mode.phi(np.nextafter(1.0, 2.0))
    return mode.phi(float(x))


def green_spectral(x, xp, omega: complex, modes: list[QuasiBoundMode],
                   include_zero_mode: bool | None = None,
                   residue_correction: bool = True):
    """Partial-fraction sum over quasi-bound modes and their mirror partners.

    Each stored mode (nu_n > 0) contributes together with its partner at
    -conj(omega_n) through the conjugated eigenfunction.  Two ingredients
    beyond the bare mode sum make this converge to the boundary-value
    solution: the static response (a second-order pole at zero frequency
    of strength 1/(1 + chi_s + chi_r + chi_l), reducing to the constant
    eigenmode of a closed resonator), and the per-mode residue correction
    for the frequency dependence of the capacitive end conditions.  Both
    can be disabled to recover the plain volume-normalized mode sum.
    Intended for evaluation points inside [0, 1]; outside, the static term
    is only the interior limit.
    """
    if not modes:
        raise NumericsError("empty quasi-bound mode list")
    w = complex(omega)
    if abs(w) < 1e-12:
        raise PoleProximityError("the spectral representation is singular at omega = 0")
    if include_zero_mode is None:
        include_zero_mode = True
    wn = np.array([m.omega.omega for m in modes])
    fx = np.array([_mode_phi(m, x) for m in modes])
    fxp = np.array([_mode_phi(m, xp) for m in modes])
    prod = fx * fxp
    if residue_correction:
        prod = prod * np.array([m.residue_scale for m in modes])
    total = np.sum(prod / (w - wn) + np.conj(prod) / (w + np.conj(wn))) / (2.0 * w)
    if include_zero_mode:
        m0 = modes[0]
        chi_tot = 1.0 + m0.chi_s + m0.chi_r + m0.chi_l
        c2 = 1.0 / chi_tot
        # simple-pole strength of the static response, minus the part the
        # truncated mode sum already carries (its own omega -> 0 residue)
        c1 = -1j * (m0.chi_r**2 + m0.chi_l**2) / chi_tot**2
        c1_partial = complex(np.sum(-1j * np.imag(prod / wn)))
        total += c2 / (w * w) + (c1 - c1_partial) / w
    return complex(total)


# ---------------------------------------------------------------------------
# memory kernels
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class KernelExpansion:
    """Decaying-sinusoid expansion of the retarded self-interaction kernel.

    Term n carries (a_n, nu_n, kappa_n, theta_n, delta_n(x0)); the kernel
    reads  K2(tau) = -sum_n a_n sin(nu_n tau + theta_n - 2 delta_n) e^{-kappa_n tau}
    and the constant  i*K1(0) = sum_n m_n cos(2 delta_n)  with
    m_n = a_n / sqrt(nu_n^2 + kappa_n^2).

    m_dc is an optional static correction (off by default): the
    frequency-domain Green's function has a second-order pole at zero
    frequency with strength 1/(1 + chi_s + chi_r + chi_l) that the
    quasi-bound sum does not carry; including it shifts only i*K1(0).
    """

    a: np.ndarray
    nu: np.ndarray
    kappa: np.ndarray
    theta: np.ndarray
    delta: np.ndarray
    m: np.ndarray
    ik1_0: float
    n_modes: int
    m_dc: float = 0.0
    #: instantaneous friction slot: the truncated mode sum misrepresents the
    #: simple-pole strength of the static response by a purely imaginary
    #: amount, which enters the characteristic function as r_damp * s; the
    #: per-mode shares are kept so truncation stays consistent
    r_damp: float = 0.0
    gcs: float = field(repr=False, default=0.0)
    c1_im: np.ndarray = field(repr=False, default=None)
    c1_im_true: float = field(repr=False, default=0.0)
    modes: tuple = field(repr=False, default=())

    @property
    def psi(self) -> np.ndarray:
        """Phase offsets theta_n - 2*delta_n entering every sinusoid."""
        return self.theta - 2.0 * self.delta

    def k2_at_zero(self) -> float:
        return float(-np.sum(self.a * np.sin(self.psi)))

    def truncated(self, n_keep: int) -> "KernelExpansion":
        """Keep the first n_keep dynamical terms (with their i*K1(0) shares
        and friction-slot shares, so every truncation is self-consistent)."""
        if not 1 <= n_keep <= self.n_modes:
            raise ValueError(f"n_keep must be in [1, {self.n_modes}]")
        sl = slice(0, n_keep)
        ik1 = float(np.sum(self.m[sl] * np.cos(2.0 * self.delta[sl]))) + self.m_dc
        c1_im = self.c1_im[sl] if self.c1_im is not None else None
        r = 0.0
        if self.r_damp != 0.0 and c1_im is not None:
            r = -self.gcs * (self.c1_im_true + float(np.sum(c1_im)))
        return KernelExpansion(self.a[sl], self.nu[sl], self.kappa[sl],
                               self.theta[sl], self.delta[sl], self.m[sl],
                               ik1, n_keep, self.m_dc, r, self.gcs, c1_im,
                               self.c1_im_true, self.modes[sl])


def dc_pole_strength(p: CircuitParams, dp: DerivedParams) -> float:
    """Strength of the zero-frequency double pole of the direct Green's function."""
    return 1.0 / (1.0 + dp.chi_s + p.chi_r + p.chi_l)


def _term_products(modes: list[QuasiBoundMode], flavor: str) -> np.ndarray:
    """Squared eigenfunction value at x0 per mode, in the chosen convention.

    'plain' uses the volume-normalized value; 'physical' multiplies in the
    residue correction for the frequency-dependent end conditions, which
    is what the true Green's-function residues carry.
    """
    prod = np.array([m.phi_x0() ** 2 for m in modes])
    if flavor == "physical":
        prod = prod * np.array([m.residue_scale for m in modes])
    elif flavor != "plain":
        raise ValueError("flavor must be 'physical' or 'plain'")
    return prod


def build_kernels(modes: list[QuasiBoundMode], dp: DerivedParams,
                  flavor: str = "physical",
                  include_dc: bool | None = None) -> KernelExpansion:
    """Assemble the kernel expansion from quasi-bound mode data.

    flavor = "physical" (default) builds the terms from the true
    Green's-function residues: the volume-normalized eigenfunction values
    are corrected for the frequency dependence of the end conditions, the
    static (zero-frequency) pole contributes the m_dc slot, and the
    friction slot r_damp compensates the truncated sum's misfit of the
    static simple-pole strength (it vanishes as modes are added).  flavor
    = "plain" keeps the plain volume-normalized values with no static
    slots, which is the convention the simplified characteristic-function
    formula is written in.
    """
    if not modes:
        raise NumericsError("cannot build kernels from an empty mode list")
    if include_dc is None:
        include_dc = flavor == "physical"
    prod = _term_products(modes, flavor)
    gcs = dp.gamma * modes[0].chi_s
    nu = np.array([m.nu for m in modes])
    kappa = np.array([m.kappa for m in modes])
    theta = np.array([m.theta_n for m in modes])
    delta = 0.5 * np.angle(prod)
    mm = gcs * np.abs(prod)
    a = mm * np.hypot(nu, kappa)
    wn = nu - 1j * kappa
    c1_im = np.imag(prod / wn)
    m0 = modes[0]
    chi_tot = 1.0 + m0.chi_s + m0.chi_r + m0.chi_l
    c1_im_true = -(m0.chi_r**2 + m0.chi_l**2) / chi_tot**2
    m_dc = 0.0
    r_damp = 0.0
    if include_dc:
        m_dc = gcs / chi_tot
    if flavor == "physical":
        # Im C1_rep = -sum(c1_im); the slot carries Im(C1 - C1_rep)
        r_damp = -gcs * (c1_im_true + float(np.sum(c1_im)))
    ik1_0 = float(np.sum(mm * np.cos(2.0 * delta))) + m_dc
    return KernelExpansion(a, nu, kappa, theta, delta, mm, ik1_0, len(modes),
                           m_dc, r_damp, gcs, c1_im, c1_im_true, tuple(modes))


def kernel_K2_time(k: KernelExpansion, tau):
    """Time-domain kernel; zero for tau < 0 by causality."""
    tau = np.asarray(tau, dtype=float)
    t = tau[..., None]
    vals = -np.sum(k.a * np.sin(k.nu * t + k.psi) * np.exp(-k.kappa * np.maximum(t, 0.0)),
                   axis=-1)
    out = np.where(tau >= 0, vals, 0.0)
    return out if out.ndim else float(out)


def kernel_K2_laplace(k: KernelExpansion, s):
    """Term-wise Laplace transform of the damped-sinusoid expansion."""
    s = np.asarray(s, dtype=complex)[..., None]
    num = np.sin(k.psi) * (s + k.kappa) + k.nu * np.cos(k.psi)
    den = (s + k.kappa) ** 2 + k.nu**2
    out = -np.sum(k.a * num / den, axis=-1)
    return out if out.ndim else complex(out)


# ---------------------------------------------------------------------------
# quadrature oracles for the kernel contour identities
# ---------------------------------------------------------------------------

def _rep_at_x0(modes):
    """Precompute (omega_n, phi_n(x0)^2) so the representation is cheap per omega."""
    wn = np.array([m.omega.omega for m in modes])
    prod = np.array([m.phi_x0() ** 2 for m in modes])
    return wn, prod


def _rep_eval(w, wn, prod):
    """Plain volume-normalized partial-fraction sum at x = x' = x0."""
    w = complex(w)
    return complex(np.sum(prod / (w - wn) + np.conj(prod) / (w + np.conj(wn))) / (2.0 * w))


def _banded_quad(fn, modes, upper):
    """Integrate fn over [0, upper], splitting panels at the resonances."""
    nu = np.array([m.nu for m in modes])
    mids = list(0.5 * (nu[:-1] + nu[1:]))
    edges = [0.0] + [m for m in mids if m < upper] + [upper]
    acc = 0.0
    for lo, hi in zip(edges[:-1], edges[1:]):
        inside = nu[(nu > lo) & (nu < hi)]
        val, _ = quad(fn, lo, hi, points=list(inside), limit=300)
        acc += val
    return acc


def _rep_tail_coeffs(wn, prod):
    """Large-omega expansion  omega^2 G_rep = c0 + i*b/omega + O(1/omega^2)."""
    c0 = float(np.sum(prod.real))
    b = float(np.sum((prod * wn).imag))
    return c0, b


def kernel_k0_quadrature(modes, dp: DerivedParams, w_max_factor=4.0):
    """Numerical K0(0) from the quasi-bound representation on the real axis.

    The folded integrand 2*Re(G) is regular at omega = 0 but the pole the
    representation has there is only half-counted by a principal value;
    the retarded prescription (contour passing above it) restores the
    other half, and the integrable tail beyond the cutoff is added in its
    asymptotic form.  The contour identity says the total vanishes.
    """
    wn, prod = _rep_at_x0(modes)
    c0, _ = _rep_tail_coeffs(wn, prod)
    upper = w_max_factor * float(np.max(wn.real))

    def fn(w):
        return _rep_eval(w, wn, prod).real

    integral = _banded_quad(fn, modes, upper) + c0 / upper
    res0 = float(np.sum((prod / wn).imag))  # -i * residue of G_rep at 0
    return dp.gamma * dp.chi_s / math.pi * (integral - math.pi * res0 / 2.0)


def kernel_ik1_quadrature(modes, dp: DerivedParams, w_max_factor=4.0):
    """Numerical i*K1(0) from the quasi-bound representation.

    omega*G decays only like 1/omega, so half of the contour value sits on
    the arc at infinity; the real-axis integral therefore carries exactly
    half the mode sum and is doubled here.  The tail beyond the cutoff is
    added in its asymptotic 1/omega^2 form.
    """
    wn, prod = _rep_at_x0(modes)
    _, b = _rep_tail_coeffs(wn, prod)
    upper = w_max_factor * float(np.max(wn.real))

    def fn(w):
        return (w * _rep_eval(w, wn, prod)).imag

    integral = _banded_quad(fn, modes, upper) + b / upper
    return -2.0 * dp.gamma * dp.chi_s / math.pi * integral


def kernel_k2_quadrature(modes, dp: DerivedParams, tau, w_max_factor=8.0):
    """Numerical K2(tau) from the quasi-bound representation.

    For tau != 0 the oscillatory factor makes the arc vanish, so the
    real-axis integral equals the mode sum; the non-decaying part of the
    integrand beyond the cutoff (a pure oscillation plus a sine integral)
    is added in closed form, Abel-regularized.
    """
    from scipy.special import sici

    if tau == 0.0:
        raise ValueError("use the K2(0) identity for tau = 0; quadrature needs tau != 0")
    wn, prod = _rep_at_x0(modes)
    c0, b = _rep_tail_coeffs(wn, prod)
    band = float(np.max(wn.real)) + 2.0
    upper = max(w_max_factor * band, band + 40.0 / abs(tau))

    def fn_band(w):
        return (w * w * _rep_eval(w, wn, prod) * np.exp(-1j * w * tau)).real

    def fn_out(w):
        # asymptotic model subtracted: remainder decays absolutely
        g2 = w * w * _rep_eval(w, wn, prod) - c0 - 1j * b / w
        return (g2 * np.exp(-1j * w * tau)).real

    part_band = _banded_quad(fn_band, modes, band)
    part_out, _ = quad(fn_out, band, upper, limit=2000)
    # closed-form tails of the subtracted model from `band` to infinity
    si_band = sici(band * tau)[0]
    model = -c0 * math.sin(band * tau) / tau + b * (math.copysign(math.pi / 2.0, tau) - si_band)
    return dp.gamma * dp.chi_s / math.pi * (part_band + part_out + model)
