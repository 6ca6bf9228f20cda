"""Deterministic dynamics of the driven damped oscillator.

Equation of motion:

    m x'' = -m omega0^2 x - 2 gamma m x' + F0 cos(omega t)

Covers the closed-form stationary solution, fixed-step 4th-order (RK4)
integration, work and power accounting per period, the polar-coordinate
invariants (angular momentum m r^2 theta'), and the per-period heat-cycle
ledger of absorbed/emitted kinetic energy.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from subq.constants import PhysicalParams, validate_params
from subq.errors import NonFinite, NotSteadyState, StepTooLarge

__all__ = [
    "OscState",
    "OscTrajectory",
    "StationarySolution",
    "HeatCycleLedger",
    "stationary_solution",
    "integrate_bouncer",
    "hamiltonian",
    "settle_time",
    "steady_state_segment",
    "work_per_period_analytic",
    "work_per_period_quadrature",
    "power_balance",
    "polar_residuals",
    "angular_momentum_series",
    "heat_cycle_ledger",
]

# Relative Hamiltonian drift over one period below which a segment counts
# as stationary.
STEADY_STATE_RTOL = 1e-6


@dataclass(frozen=True)
class OscState:
    x: float
    v: float
    t: float = 0.0


@dataclass(frozen=True)
class OscTrajectory:
    """Uniformly sampled oscillator path.

    t, x, v are aligned numpy arrays; dt is the (exact) grid spacing.
    """

    dt: float
    t: np.ndarray
    x: np.ndarray
    v: np.ndarray
    drive_omega: float
    params: PhysicalParams

    def __post_init__(self):
        if len(self.t) == 0:
            raise ValueError("trajectory must be non-empty")

    def kinetic(self) -> np.ndarray:
        return 0.5 * self.params.m * self.v**2

    def potential(self) -> np.ndarray:
        return 0.5 * self.params.m * self.params.omega0**2 * self.x**2

    def hamiltonian(self) -> np.ndarray:
        return self.kinetic() + self.potential()

    def segment(self, i0: int, i1: int) -> "OscTrajectory":
        return OscTrajectory(
            dt=self.dt,
            t=self.t[i0 : i1 + 1],
            x=self.x[i0 : i1 + 1],
            v=self.v[i0 : i1 + 1],
            drive_omega=self.drive_omega,
            params=self.params,
        )


@dataclass(frozen=True)
class StationarySolution:
    """Long-time attractor x(t) = A cos(omega t + phi)."""

    amplitude: float
    phase: float

    def x(self, t, omega: float):
        return self.amplitude * np.cos(omega * np.asarray(t) + self.phase)

    def v(self, t, omega: float):
        return -self.amplitude * omega * np.sin(omega * np.asarray(t) + self.phase)


@dataclass(frozen=True)
class HeatCycleLedger:
    """Per-period bookkeeping of kinetic energy exchanged with the bath."""

    absorbed: float
    emitted: float
    throughput: float
    ekin_min: float
    ekin_max: float


def stationary_solution(p: PhysicalParams, omega: float) -> StationarySolution:
    """Amplitude and phase of the forced stationary oscillation.

    A(omega) = (F0/m) / sqrt((omega0^2 - omega^2)^2 + (2 gamma omega)^2),
    phi from atan2(-2 gamma omega, omega0^2 - omega^2), which lies in
    (-pi, 0] and passes continuously through -pi/2 at resonance.
    """
    p = validate_params(p)
    if omega < 0:
        raise ValueError("omega must be >= 0")
    d1 = p.omega0**2 - omega**2
    d2 = 2.0 * p.gamma * omega
    if d1 == 0.0 and d2 == 0.0:
        raise ValueError("undamped resonance has no bounded stationary solution")
    amplitude = (p.F0 / p.m) / math.hypot(d1, d2)
    phase = math.atan2(-d2, d1) + 0.0  # normalize -0.0 at omega = 0
    return StationarySolution(amplitude=amplitude, phase=phase)


def integrate_bouncer(
    p: PhysicalParams,
    omega: float,
    init: OscState,
    t_end: float,
    dt: float,
) -> OscTrajectory:
    """Fixed-step RK4 integration of the driven damped oscillator.

    Samples at t = init.t + k*dt up to t_end.  dt must not exceed a
    hundredth of the resonance period.
    """
    p = validate_params(p)
    if dt <= 0:
        raise StepTooLarge(f"dt must be > 0, got {dt}")
    if dt > p.tau / 100.0:
        raise StepTooLarge(f"dt={dt} exceeds guard tau/100={p.tau / 100.0}")
    if t_end <= init.t:
        raise ValueError("t_end must exceed init.t")

    n = int(round((t_end - init.t) / dt))
    w2 = p.omega0**2
    g2 = 2.0 * p.gamma
    fm = p.F0 / p.m
    cos = math.cos

    ts = np.empty(n + 1)
    xs = np.empty(n + 1)
    vs = np.empty(n + 1)
    x, v, t0 = init.x, init.v, init.t
    ts[0], xs[0], vs[0] = t0, x, v
    half = 0.5 * dt
    for k in range(n):
        t = t0 + k * dt
        a1 = -w2 * x - g2 * v + fm * cos(omega * t)
        x2 = x + half * v
        v2 = v + half * a1
        a2 = -w2 * x2 - g2 * v2 + fm * cos(omega * (t + half))
        x3 = x + half * v2
        v3 = v + half * a2
        a3 = -w2 * x3 - g2 * v3 + fm * cos(omega * (t + half))
        x4 = x + dt * v3
        v4 = v + dt * a3
        a4 = -w2 * x4 - g2 * v4 + fm * cos(omega * (t + dt))
        x += dt / 6.0 * (v + 2.0 * v2 + 2.0 * v3 + v4)
        v += dt / 6.0 * (a1 + 2.0 * a2 + 2.0 * a3 + a4)
        ts[k + 1] = t0 + (k + 1) * dt
        xs[k + 1] = x
        vs[k + 1] = v

    if not (np.isfinite(xs).all() and np.isfinite(vs).all()):
        raise NonFinite("oscillator state diverged during integration")
    return OscTrajectory(dt=dt, t=ts, x=xs, v=vs, drive_omega=omega, params=p)


def hamiltonian(s: OscState, p: PhysicalParams) -> float:
    """(m/2) v^2 + (m/2) omega0^2 x^2."""
    return 0.5 * p.m * s.v**2 + 0.5 * p.m * p.omega0**2 * s.x**2


def settle_time(p: PhysicalParams) -> float:
    """Time after which the transient is negligible at double precision.

    The slowest decay rate is gamma for the underdamped case and
    gamma - sqrt(gamma^2 - omega0^2) when overdamped; 35 e-foldings of it
    push the transient below 1e-15 of the stationary amplitude.
    """
    p = validate_params(p)
    if p.gamma == 0:
        raise ValueError("undamped oscillator never settles")
    if p.gamma > p.omega0:
        alpha = p.gamma - math.sqrt(p.gamma**2 - p.omega0**2)
    else:
        alpha = p.gamma
    return 35.0 / alpha


def steady_state_segment(p: PhysicalParams, steps_per_period: int = 1000) -> OscTrajectory:
    """Integrate from rest at resonance and return one steady-state period.

    The grid starts at t = 0 and the returned segment starts on a whole
    period, so the four kinetic-energy extrema per period fall exactly on
    grid points (the resonance phase is -pi/2).  steps_per_period must be
    divisible by 4 for that alignment.
    """
    p = validate_params(p)
    if steps_per_period % 4 != 0:
        raise ValueError("steps_per_period must be divisible by 4")
    dt = p.tau / steps_per_period
    n_settle = math.ceil(settle_time(p) / p.tau)
    traj = integrate_bouncer(
        p, p.omega0, OscState(0.0, 0.0, 0.0), (n_settle + 1) * p.tau, dt
    )
    i0 = n_settle * steps_per_period
    return traj.segment(i0, i0 + steps_per_period)


def _require_period_segment(
    traj: OscTrajectory,
    p: PhysicalParams,
    resonance: bool = True,
    steady: bool = True,
) -> None:
    tau = p.tau
    span = traj.t[-1] - traj.t[0]
    if abs(span - tau) > 1e-9 * tau:
        raise ValueError(f"segment must span exactly one period {tau}, spans {span}")
    if resonance and abs(traj.drive_omega - p.omega0) > 1e-12 * p.omega0:
        raise ValueError("segment must be driven at resonance")
    if steady:
        h = traj.hamiltonian()
        if abs(h[-1] - h[0]) > STEADY_STATE_RTOL * max(abs(h[0]), abs(h[-1])):
            raise NotSteadyState(
                f"Hamiltonian drift {abs(h[-1] - h[0]):.3e} over the period "
                f"exceeds {STEADY_STATE_RTOL} relative"
            )


def work_per_period_analytic(p: PhysicalParams) -> float:
    """Net work taken up per period in steady state: gamma m omega0^2 r^2 tau."""
    p = validate_params(p)
    if p.F0 == 0:
        return 0.0
    if p.gamma == 0:
        raise ValueError("steady-state work needs gamma > 0")
    r = p.F0 / (2.0 * p.gamma * p.m * p.omega0)
    return p.gamma * p.m * p.omega0**2 * r * r * p.tau


def work_per_period_quadrature(traj: OscTrajectory, p: PhysicalParams) -> float:
    """Trapezoid quadrature of the drive power over one steady-state period."""
    _require_period_segment(traj, p)
    drive_power = p.F0 * np.cos(p.omega0 * traj.t) * traj.v
    return float(np.trapezoid(drive_power, dx=traj.dt))


def power_balance(traj: OscTrajectory, p: PhysicalParams) -> float:
    """Integral of (drive power - friction power) over one steady period.

    Vanishes in steady state; returned unnormalized.
    """
    _require_period_segment(traj, p)
    drive_power = p.F0 * np.cos(p.omega0 * traj.t) * traj.v
    friction_power = 2.0 * p.gamma * p.m * traj.v**2
    return float(np.trapezoid(drive_power - friction_power, dx=traj.dt))


def polar_residuals(r, theta, dt: float, omega0: float):
    """Max residuals of the polar equations of motion by finite differences.

    Evaluates |r'' - r theta'^2 + omega0^2 r| and |r theta'' + 2 r' theta'|
    on the interior points of the supplied circular embedding.
    """
    r = np.asarray(r, dtype=float)
    theta = np.asarray(theta, dtype=float)
    if r.shape != theta.shape or len(r) < 3:
        raise ValueError("r and theta must be equal-length series of >= 3 points")
    rd = np.gradient(r, dt, edge_order=2)
    rdd = (r[2:] - 2.0 * r[1:-1] + r[:-2]) / dt**2
    td = np.gradient(theta, dt, edge_order=2)
    tdd = (theta[2:] - 2.0 * theta[1:-1] + theta[:-2]) / dt**2
    radial = rdd - r[1:-1] * td[1:-1] ** 2 + omega0**2 * r[1:-1]
    angular = r[1:-1] * tdd + 2.0 * rd[1:-1] * td[1:-1]
    return float(np.abs(radial).max()), float(np.abs(angular).max())


def angular_momentum_series(r, theta_dot, m: float) -> np.ndarray:
    """L(t) = m r^2 theta' for aligned series."""
    r = np.asarray(r, dtype=float)
    theta_dot = np.asarray(theta_dot, dtype=float)
    if r.shape != theta_dot.shape:
        raise ValueError("series must be aligned")
    return m * r**2 * theta_dot


def heat_cycle_ledger(
    traj: OscTrajectory, p: PhysicalParams, require_steady: bool = True
) -> HeatCycleLedger:
    """Absorbed/emitted kinetic energy over one steady-state period.

    Kinetic energy completes two rise-fall cycles per period, so the
    absorbed throughput equals twice its swing: 2 * (hbar omega0 / 2) in
    canonical steady state.  Positive/negative increments between grid
    samples split the exchange; with the grid of steady_state_segment the
    extrema fall on samples, so no sliver is lost at the turning points.

    require_steady=False admits non-stationary segments (e.g. a pure decay),
    for which absorbed and emitted no longer balance.
    """
    _require_period_segment(traj, p, resonance=require_steady, steady=require_steady)
    ekin = traj.kinetic()
    de = np.diff(ekin)
    absorbed = float(de[de > 0].sum())
    emitted = float(-de[de < 0].sum())
    return HeatCycleLedger(
        absorbed=absorbed,
        emitted=emitted,
        throughput=absorbed,
        ekin_min=float(ekin.min()),
        ekin_max=float(ekin.max()),
    )
