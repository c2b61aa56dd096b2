"""Dynamics of a weakly nonlinear oscillator in an open multimode resonator.

The package solves the open resonator's quasi-bound modes, builds the
memory kernels of the oscillator's retarded self-interaction, finds the
hybridized poles and residues of the linear theory, applies multi-scale
perturbation theory to the weak quartic nonlinearity, and integrates the
reduced operator-valued memory equation numerically.
"""

__version__ = "0.1.0"

from .params import (CircuitParams, ComplexFrequency, DerivedParams,
                     derive_params, load_config, params_from_chi_s)

__all__ = [
    "CircuitParams", "ComplexFrequency", "DerivedParams",
    "derive_params", "load_config", "params_from_chi_s", "__version__",
]
