"""Gaussian beam preparation and ballistic free-flight spreading.

A source emits particles with Gaussian position density of width sigma0
around a center moving at the convective velocity v.  Each particle also
carries a diffusive velocity u drawn with spread u0 = D / sigma0,
independent of position (the unique zero-cross-correlation preparation
that reproduces the spreading law sigma^2(t) = sigma0^2 + u0^2 t^2).

The osmotic velocity field of the density P is u(x) = -D grad(P)/P,
which for the Gaussian is D (x - x0) / sigma^2; under canonical coupling
D = hbar/(2m) and the diffusive kinetic energy is hbar^2 / (8 m sigma^2).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import List, Optional, Sequence, Tuple

import numpy as np

from subq.constants import DerivedConstants, PhysicalParams, validate_params
from subq.errors import ConservationViolated, NonPositiveParameter, TooFewSamples
from subq.report import CheckResult, make_check
from subq.streams import stream

__all__ = [
    "GaussianPrep",
    "EnsembleState",
    "KineticSplit",
    "initial_u0",
    "prepare_gaussian",
    "osmotic_velocity",
    "heat_gradient",
    "ballistic_evolve",
    "variance_series",
    "kinetic_decomposition",
    "empirical_kinetic_split",
    "check_energy_conservation",
]


@dataclass(frozen=True)
class GaussianPrep:
    """Source preparation: width, center, convective velocity, ensemble size."""

    sigma0: float
    x0: float = 0.0
    v_conv: float = 0.0
    M: int = 100_000

    def __post_init__(self):
        if self.sigma0 <= 0:
            raise NonPositiveParameter("sigma0", self.sigma0)
        if self.M < 2:
            raise TooFewSamples("ensemble size M must be >= 2")


@dataclass(frozen=True)
class EnsembleState:
    """Positions and diffusive velocities of M particles at a common time."""

    t: float
    positions: np.ndarray
    diff_velocities: np.ndarray
    v_conv: float

    def __post_init__(self):
        if self.positions.shape != self.diff_velocities.shape:
            raise ValueError("positions and diff_velocities must be aligned")


@dataclass(frozen=True)
class KineticSplit:
    """Convective/diffusive decomposition of the fluctuating kinetic energy."""

    t: float
    convective: float
    diffusive: float
    total: float
    sigma_sq: float


def initial_u0(d: DerivedConstants, sigma0: float) -> float:
    """Initial diffusive speed u0 = D / sigma0."""
    return d.u0_of(sigma0)


def prepare_gaussian(prep: GaussianPrep, d: DerivedConstants, seed: int) -> EnsembleState:
    """Draw positions ~ N(x0, sigma0^2) and velocities ~ N(0, u0^2) independently."""
    rng = stream(seed, 0)
    u0 = initial_u0(d, prep.sigma0)
    positions = prep.x0 + prep.sigma0 * rng.standard_normal(prep.M)
    velocities = u0 * rng.standard_normal(prep.M)
    return EnsembleState(
        t=0.0, positions=positions, diff_velocities=velocities, v_conv=prep.v_conv
    )


def osmotic_velocity(x, x0: float, sigma_sq: float, d: DerivedConstants):
    """Osmotic velocity of the Gaussian density: D (x - x0) / sigma^2.

    Equals (hbar / 2m)(x - x0)/sigma^2 under canonical coupling.
    """
    if sigma_sq <= 0:
        raise NonPositiveParameter("sigma_sq", sigma_sq)
    out = d.D * (np.asarray(x, dtype=float) - x0) / sigma_sq
    return float(out) if out.ndim == 0 else out


def heat_gradient(
    x, x0: float, sigma_sq: float, p: PhysicalParams, d: DerivedConstants
) -> Tuple[np.ndarray, np.ndarray]:
    """Heat-flux gradient from friction (m zeta u) and from the Boltzmann
    action relation (2 omega0 m u); their ratio is zeta / (2 omega0),
    exactly 1 under canonical coupling."""
    p = validate_params(p)
    u = osmotic_velocity(x, x0, sigma_sq, d)
    return p.m * p.zeta * u, 2.0 * p.omega0 * p.m * u


def ballistic_evolve(e: EnsembleState, t_target: float) -> EnsembleState:
    """Free flight: x += (v_conv + u) * dt; velocities unchanged."""
    if t_target < e.t:
        raise ValueError("t_target must be >= current time")
    dt = t_target - e.t
    return EnsembleState(
        t=t_target,
        positions=e.positions + (e.v_conv + e.diff_velocities) * dt,
        diff_velocities=e.diff_velocities,
        v_conv=e.v_conv,
    )


def variance_series(
    prep: GaussianPrep,
    d: DerivedConstants,
    grid: Sequence[float],
    seed: int,
) -> List[Tuple[float, float, float, float, float]]:
    """Empirical spread about the moving center against both analytic curves.

    Returns rows (t, var_emp, var_stderr, var_ballistic, var_restframe)
    with var_ballistic = sigma0^2 + u0^2 t^2 and var_restframe =
    sigma0^2 + 2 D t.  The variance is taken about the known convective
    center x0 + v t, so each row is a plain mean of iid squares and the
    stderr is exact.
    """
    grid = list(grid)
    if any(b < a for a, b in zip(grid, grid[1:])) or (grid and grid[0] < 0):
        raise ValueError("grid must be non-decreasing from 0")
    state = prepare_gaussian(prep, d, seed)
    u0 = initial_u0(d, prep.sigma0)
    rows = []
    for t in grid:
        state = ballistic_evolve(state, t)
        center = prep.x0 + prep.v_conv * t
        sq = (state.positions - center) ** 2
        var_emp = float(sq.mean())
        var_stderr = float(sq.std(ddof=1) / math.sqrt(prep.M))
        rows.append((
            t,
            var_emp,
            var_stderr,
            prep.sigma0**2 + u0**2 * t**2,
            prep.sigma0**2 + 2.0 * d.D * t,
        ))
    return rows


def kinetic_decomposition(
    d: DerivedConstants, p: PhysicalParams, sigma0: float, t: float
) -> KineticSplit:
    """Closed-form split of the fluctuating kinetic energy at time t.

    sigma^2 = sigma0^2 + u0^2 t^2; the diffusive share (m/2) D^2/sigma^2
    decays while the convective share (m/2) u0^2 (u0^2 t^2 / sigma^2)
    grows, their sum staying (m/2) u0^2 exactly.
    """
    p = validate_params(p)
    if sigma0 <= 0:
        raise NonPositiveParameter("sigma0", sigma0)
    if t < 0:
        raise ValueError("t must be >= 0")
    u0 = initial_u0(d, sigma0)
    sigma_sq = sigma0**2 + u0**2 * t**2
    diffusive = 0.5 * p.m * d.D**2 / sigma_sq
    convective = 0.5 * p.m * u0**2 * (u0**2 * t**2 / sigma_sq)
    return KineticSplit(
        t=t,
        convective=convective,
        diffusive=diffusive,
        total=convective + diffusive,
        sigma_sq=sigma_sq,
    )


def empirical_kinetic_split(
    state: EnsembleState,
    prep: GaussianPrep,
    p: PhysicalParams,
    d: DerivedConstants,
) -> Tuple[KineticSplit, float]:
    """Monte-Carlo kinetic split of an evolved ensemble, with stderr of the total.

    The diffusive share samples the osmotic field at each particle; the
    convective share samples the local drift field u0^2 t (x-c)/sigma^2
    induced by the position-velocity correlation built up in flight.
    """
    p = validate_params(p)
    u0 = initial_u0(d, prep.sigma0)
    t = state.t
    sigma_sq = prep.sigma0**2 + u0**2 * t**2
    center = prep.x0 + prep.v_conv * t
    xi = state.positions - center
    u_osm = osmotic_velocity(state.positions, center, sigma_sq, d)
    v_drift = u0**2 * t * xi / sigma_sq
    diff_samples = 0.5 * p.m * u_osm**2
    conv_samples = 0.5 * p.m * v_drift**2
    total_samples = diff_samples + conv_samples
    n = len(xi)
    split = KineticSplit(
        t=t,
        convective=float(conv_samples.mean()),
        diffusive=float(diff_samples.mean()),
        total=float(total_samples.mean()),
        sigma_sq=sigma_sq,
    )
    return split, float(total_samples.std(ddof=1) / math.sqrt(n))


def check_energy_conservation(
    splits: Sequence[KineticSplit],
    stderrs: Optional[Sequence[float]] = None,
    rtol: float = 1e-12,
) -> CheckResult:
    """Assert the recomputed total (convective + diffusive) is constant.

    Analytic series must agree to rtol relative; when per-point stderrs
    are given the criterion is 3 stderr instead.  Raises
    ConservationViolated with the worst offending time.
    """
    if len(splits) < 2:
        raise TooFewSamples("need >= 2 time points")
    totals = np.array([s.convective + s.diffusive for s in splits])
    ref = totals[0]
    defects = np.abs(totals - ref)
    worst = int(np.argmax(defects))
    if stderrs is not None:
        tol = 3.0 * (np.asarray(stderrs) + (stderrs[0] if len(stderrs) else 0.0))
        bad = defects > np.maximum(tol, 1e-12)
        kind = "statistical"
        stderr = float(stderrs[worst])
        tolerance = float(tol[worst])
    else:
        bad = defects > rtol * max(abs(ref), 1e-300)
        kind = "algebraic"
        stderr = None
        tolerance = rtol
    if bad.any():
        i = int(np.argmax(np.where(bad, defects, -np.inf)))
        raise ConservationViolated(splits[i].t, float(defects[i]))
    return make_check(
        name="kinetic_energy_conservation",
        kind=kind,
        lhs=float(totals[worst]),
        rhs=float(ref),
        anchor="conservation of the average fluctuating kinetic energy",
        stderr=stderr,
        tolerance=tolerance,
    )
