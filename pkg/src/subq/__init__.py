"""Bouncer-walker simulation of a driven oscillator coupled to a zero-point-field bath.

The package has three physics layers and a verification layer on top:

- ``constants``: free parameters and every closed-form derived quantity
  (resonant amplitude, action invariant, bath energy, diffusion constant).
- ``bouncer``: deterministic driven damped oscillator dynamics, energy
  accounting and the per-period heat-cycle ledger.
- ``walker``: stochastic Langevin dynamics (exact Ornstein-Uhlenbeck
  transition and Euler-Maruyama), with ensemble estimators.
- ``ensemble``: Gaussian beam preparation, osmotic velocity field and
  ballistic spreading.
- ``verify``: runs every derived relation against its closed-form oracle
  and emits a machine-readable report.
"""

from subq.constants import (
    PhysicalParams,
    DerivedConstants,
    validate_params,
    derive_constants,
    canonical_params,
)

__all__ = [
    "PhysicalParams",
    "DerivedConstants",
    "validate_params",
    "derive_constants",
    "canonical_params",
]

__version__ = "0.1.0"
