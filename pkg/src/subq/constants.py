"""Model parameters and every closed-form derived constant.

All quantities are pure numbers (the library is unit agnostic); the CLI
defaults to natural units m = 1, omega0 = 1.  Derived values:

    r     = F0 / (2 gamma m omega0)      resonant amplitude
    tau   = 2 pi / omega0                period
    hbar  = m r^2 omega0                 angular-momentum invariant
    E_zp  = hbar omega0 / (2 N)          bath kinetic energy per DOF
                                         (canonical coupling; user input
                                         in free mode)
    E_tot = 2 N E_zp                     total particle energy
    lam   = 4 zeta m E_zp                noise strength (fluctuation-
                                         dissipation relation)
    D     = lam / (2 zeta^2 m^2)         diffusion constant

Under canonical coupling (gamma = zeta = 2 omega0) these chain into
E_tot = hbar omega0 and D = hbar / (2 m).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import Optional

from subq.errors import CouplingMismatch, NonPositiveParameter

__all__ = [
    "PhysicalParams",
    "DerivedConstants",
    "validate_params",
    "derive_constants",
    "canonical_params",
]


@dataclass(frozen=True)
class PhysicalParams:
    """Free parameters of the bouncer-walker model.

    gamma and zeta may be left as None when canonical_coupling is set;
    validation fills them with 2*omega0.
    """

    m: float
    omega0: float
    F0: float
    gamma: Optional[float] = None
    zeta: Optional[float] = None
    n_dof: int = 1
    canonical_coupling: bool = False

    @property
    def tau(self) -> float:
        return 2.0 * math.pi / self.omega0


@dataclass(frozen=True)
class DerivedConstants:
    """All derived quantities of one parameter set, computed once."""

    r: float
    tau: float
    hbar: float
    e_zp: float
    e_tot: float
    lam: float
    D: float

    def u0_of(self, sigma0: float) -> float:
        """Initial diffusive speed u0 = D / sigma0 of a Gaussian of width sigma0."""
        if sigma0 <= 0:
            raise NonPositiveParameter("sigma0", sigma0)
        return self.D / sigma0


def validate_params(p: PhysicalParams) -> PhysicalParams:
    """Validate a parameter set, filling gamma/zeta under canonical coupling.

    Raises NonPositiveParameter for any non-positive field and
    CouplingMismatch when the canonical flag is set but gamma or zeta is
    given a contradicting explicit value.
    """
    if p.canonical_coupling:
        target = 2.0 * p.omega0
        for name, val in (("gamma", p.gamma), ("zeta", p.zeta)):
            if val is not None and val != target:
                raise CouplingMismatch(
                    f"canonical coupling requires {name} = 2*omega0 = {target}, "
                    f"got {val}"
                )
        p = replace(p, gamma=target, zeta=target)

    for name in ("m", "omega0", "zeta"):
        val = getattr(p, name)
        if val is None or not (val > 0) or not math.isfinite(val):
            raise NonPositiveParameter(name, val)
    # gamma = 0 (undamped) and F0 = 0 (undriven) are admitted for
    # diagnostic oscillator runs; derived constants require gamma > 0.
    for name in ("gamma", "F0"):
        val = getattr(p, name)
        if val is None or not (val >= 0) or not math.isfinite(val):
            raise NonPositiveParameter(name, val)
    if p.n_dof < 1 or int(p.n_dof) != p.n_dof:
        raise NonPositiveParameter("n_dof", p.n_dof)
    return p


def derive_constants(p: PhysicalParams, e_zp: Optional[float] = None) -> DerivedConstants:
    """Compute every derived constant of a validated parameter set.

    Under canonical coupling e_zp is derived (hbar*omega0/(2N)) and must
    not be supplied.  In free mode the bath energy is a user input.
    """
    p = validate_params(p)
    if p.gamma == 0:
        raise NonPositiveParameter("gamma", p.gamma)
    r = p.F0 / (2.0 * p.gamma * p.m * p.omega0)
    tau = 2.0 * math.pi / p.omega0
    hbar = p.m * r * r * p.omega0

    if p.canonical_coupling:
        if e_zp is not None:
            raise ValueError("e_zp is derived under canonical coupling, do not supply it")
        e_zp = hbar * p.omega0 / (2.0 * p.n_dof)
    elif e_zp is None:
        raise ValueError("free (non-canonical) mode requires an explicit e_zp")
    elif e_zp <= 0:
        raise NonPositiveParameter("e_zp", e_zp)

    e_tot = 2.0 * p.n_dof * e_zp
    lam = 4.0 * p.zeta * p.m * e_zp
    D = lam / (2.0 * p.zeta**2 * p.m**2)
    return DerivedConstants(r=r, tau=tau, hbar=hbar, e_zp=e_zp, e_tot=e_tot, lam=lam, D=D)


def canonical_params(
    m: float,
    omega0: float,
    hbar_target: float = 1.0,
    n_dof: int = 1,
) -> PhysicalParams:
    """Canonically coupled parameters whose action invariant equals hbar_target.

    gamma = zeta = 2*omega0, and F0 is chosen so that m*r^2*omega0 equals
    the requested action target.
    """
    if m <= 0:
        raise NonPositiveParameter("m", m)
    if omega0 <= 0:
        raise NonPositiveParameter("omega0", omega0)
    if hbar_target <= 0:
        raise NonPositiveParameter("hbar_target", hbar_target)
    gamma = 2.0 * omega0
    r = math.sqrt(hbar_target / (m * omega0))
    F0 = 2.0 * gamma * m * omega0 * r
    return validate_params(
        PhysicalParams(
            m=m,
            omega0=omega0,
            F0=F0,
            gamma=gamma,
            zeta=gamma,
            n_dof=n_dof,
            canonical_coupling=True,
        )
    )
