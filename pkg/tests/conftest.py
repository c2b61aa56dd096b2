import numpy as np
import pytest

from multimode_qed.params import CircuitParams, derive_params


@pytest.fixture(scope="session")
def fig5_params():
    """Coupled system of the truncation-study figure: chi_r = chi_l = 0.01."""
    return CircuitParams(chi_r=0.01, chi_l=0.01, chi_j=0.05, chi_g=0.01,
                         x0=0.0, ec=0.25, ej=12.5)


@pytest.fixture(scope="session")
def fig5_derived(fig5_params):
    return derive_params(fig5_params)


@pytest.fixture(scope="session")
def fig5_modes(fig5_params, fig5_derived):
    from multimode_qed.modes import quasibound_frequencies
    return quasibound_frequencies(fig5_derived, fig5_params, 100)


@pytest.fixture(scope="session")
def rng():
    return np.random.default_rng(20240811)
