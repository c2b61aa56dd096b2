"""Unitless circuit parameters and derived quantities.

Everything in this package works in the resonator's natural units: lengths
are fractions of the resonator length, times are in units of the one-way
light travel time, and frequencies are angular frequencies in the inverse
of that time. No SI conversion is supported anywhere.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

from .errors import ConfigError, ParameterError

CONFIG_KEYS = ("chi_r", "chi_l", "chi_j", "chi_g", "x0", "ec", "ej")

TRANSMON_REGIME_RATIO = 10.0


def _require_finite(name, value):
    try:
        v = float(value)
    except (TypeError, ValueError):
        raise ParameterError(name, value, "not a number") from None
    if not math.isfinite(v):
        raise ParameterError(name, value, "must be finite")
    return v


@dataclass(frozen=True)
class CircuitParams:
    """Primary unitless circuit constants.

    chi_r, chi_l : end-coupling capacitance ratios C_R/(cL), C_L/(cL)
    chi_j, chi_g : junction and coupling capacitance ratios
    x0           : position of the nonlinear oscillator in [0, 1]
    ec, ej       : unitless charging and Josephson energies
    """

    chi_r: float
    chi_l: float
    chi_j: float
    chi_g: float
    x0: float
    ec: float
    ej: float

    def __post_init__(self):
        for name in ("chi_r", "chi_l", "chi_g"):
            v = _require_finite(name, getattr(self, name))
            if v < 0:
                raise ParameterError(name, v, "must be >= 0")
            object.__setattr__(self, name, v)
        v = _require_finite("chi_j", self.chi_j)
        if v <= 0:
            raise ParameterError("chi_j", v, "must be > 0")
        object.__setattr__(self, "chi_j", v)
        v = _require_finite("x0", self.x0)
        if not 0.0 <= v <= 1.0:
            raise ParameterError("x0", v, "must lie in [0, 1]")
        object.__setattr__(self, "x0", v)
        for name in ("ec", "ej"):
            v = _require_finite(name, getattr(self, name))
            if v <= 0:
                raise ParameterError(name, v, "must be > 0")
            object.__setattr__(self, name, v)
        if self.ej / self.ec < TRANSMON_REGIME_RATIO:
            warnings.warn(
                f"ej/ec = {self.ej / self.ec:.3g} < {TRANSMON_REGIME_RATIO:g}: "
                "outside the weakly-nonlinear regime this model assumes",
                stacklevel=2,
            )


@dataclass(frozen=True)
class DerivedParams:
    """Quantities derived from :class:`CircuitParams`."""

    chi_s: float
    gamma: float
    omega_j: float
    eps_nl: float
    eps_expansion: float
    phi_zpf: float


def derive_params(p: CircuitParams) -> DerivedParams:
    """Compute the derived parameter set.

    chi_s = chi_g*chi_j/(chi_g+chi_j) and gamma = chi_g/(chi_g+chi_j) vanish
    together at zero coupling; omega_j = sqrt(8*ec*ej); the nonlinearity
    measure is (ec/ej)^(1/2), the expansion parameter (sqrt(2)/6) times that,
    and phi_zpf = (2*ec/ej)^(1/4).
    """
    denom = p.chi_g + p.chi_j
    chi_s = p.chi_g * p.chi_j / denom
    gamma = p.chi_g / denom
    omega_j = math.sqrt(8.0 * p.ec * p.ej)
    eps_nl = math.sqrt(p.ec / p.ej)
    eps_expansion = (math.sqrt(2.0) / 6.0) * eps_nl
    phi_zpf = (2.0 * p.ec / p.ej) ** 0.25
    return DerivedParams(chi_s, gamma, omega_j, eps_nl, eps_expansion, phi_zpf)


@dataclass(frozen=True)
class ComplexFrequency:
    """One complex resonance, stored in the frequency-plane convention.

    The frequency plane writes a resonance as omega = nu - i*kappa with
    nu >= 0 the oscillation frequency and kappa >= 0 the decay rate.  The
    Laplace plane writes the same resonance as s = -i*omega = -kappa - i*nu.
    Both views are exposed; the stored fields are the frequency-plane parts.
    """

    re: float  # nu, oscillation part
    im: float  # -kappa, so omega = re + 1j*im

    @classmethod
    def from_omega(cls, omega: complex) -> "ComplexFrequency":
        return cls(float(omega.real), float(omega.imag))

    @classmethod
    def from_s(cls, s: complex) -> "ComplexFrequency":
        # s = -i*omega  <=>  omega = i*s
        omega = 1j * complex(s)
        return cls(float(omega.real), float(omega.imag))

    @property
    def omega(self) -> complex:
        return complex(self.re, self.im)

    @property
    def s(self) -> complex:
        return -1j * self.omega

    @property
    def nu(self) -> float:
        return self.re

    @property
    def kappa(self) -> float:
        return -self.im

    @property
    def alpha(self) -> float:
        """Decay rate in the Laplace convention s = -alpha - i*beta."""
        return -self.s.real

    @property
    def beta(self) -> float:
        return -self.s.imag


def parse_config_text(text: str) -> dict:
    """Parse a plain key=value config body into a float dict.

    Blank lines and '#' comments are ignored.  Keys must be exactly the
    seven circuit-parameter names; anything else is a ConfigError.
    """
    values = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected key=value, got {raw!r}")
        key, _, val = line.partition("=")
        key = key.strip()
        if key not in CONFIG_KEYS:
            raise ConfigError(f"line {lineno}: unknown key '{key}'")
        if key in values:
            raise ConfigError(f"line {lineno}: duplicate key '{key}'")
        values[key] = _require_finite(key, val.strip())
    return values


def load_config(path) -> CircuitParams:
    """Read a config file and build validated CircuitParams."""
    with open(path, "r", encoding="utf-8") as fh:
        values = parse_config_text(fh.read())
    missing = [k for k in CONFIG_KEYS if k not in values]
    if missing:
        raise ConfigError("missing config key(s): " + ", ".join(missing))
    return CircuitParams(**values)


def params_from_chi_s(chi_s: float, chi_j: float = 0.05, *, chi_r: float = 0.0,
                      chi_l: float = 0.0, x0: float = 0.0, ec: float = 0.25,
                      ej: float = 12.5) -> CircuitParams:
    """Build CircuitParams realizing a target series capacitance chi_s.

    chi_s = gamma*chi_j is bounded above by chi_j, so chi_s < chi_j is
    required; chi_g is solved from the series formula.
    """
    if chi_s < 0:
        raise ParameterError("chi_s", chi_s, "must be >= 0")
    if chi_s >= chi_j:
        raise ParameterError("chi_s", chi_s, f"must be < chi_j = {chi_j}")
    chi_g = chi_s * chi_j / (chi_j - chi_s) if chi_s > 0 else 0.0
    return CircuitParams(chi_r=chi_r, chi_l=chi_l, chi_j=chi_j, chi_g=chi_g,
                         x0=x0, ec=ec, ej=ej)
