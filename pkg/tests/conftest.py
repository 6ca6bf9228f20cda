"""Shared parameter sets used across the test modules.

CANON is the natural-unit canonical set (m = 1, omega0 = 1, so
gamma = zeta = 2 and F0 = 4), for which every derived constant is an
exact small number: r = 1, tau = 2 pi, hbar = 1, E_zp = 0.5, E_tot = 1,
lam = 4, D = 0.5.
"""

import pytest

from subq.constants import PhysicalParams, derive_constants, validate_params


@pytest.fixture
def canon():
    return validate_params(
        PhysicalParams(m=1.0, omega0=1.0, F0=4.0, canonical_coupling=True)
    )


@pytest.fixture
def canon_derived(canon):
    return derive_constants(canon)


@pytest.fixture
def underdamped():
    """Small-damping set with a visible resonance peak: r = 5, hbar = 25."""
    return validate_params(
        PhysicalParams(m=1.0, omega0=1.0, F0=1.0, gamma=0.1, zeta=0.1)
    )
