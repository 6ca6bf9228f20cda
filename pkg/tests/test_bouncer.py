"""Driven damped oscillator: stationary solution, integration, energy ledgers."""

import math

import numpy as np
import pytest

from subq import bouncer
from subq.bouncer import OscState
from subq.constants import PhysicalParams, canonical_params, derive_constants, validate_params
from subq.errors import NotSteadyState, StepTooLarge


def test_stationary_at_resonance(underdamped):
    sol = bouncer.stationary_solution(underdamped, 1.0)
    assert sol.amplitude == pytest.approx(5.0, rel=1e-14)
    assert sol.phase == pytest.approx(-math.pi / 2, rel=1e-14)


def test_stationary_static_load(underdamped):
    sol = bouncer.stationary_solution(underdamped, 0.0)
    assert sol.amplitude == pytest.approx(1.0, rel=1e-14)
    assert sol.phase == 0.0
    assert math.copysign(1.0, sol.phase) == 1.0  # no -0.0 leaking into output


def test_stationary_off_resonance(underdamped):
    # closed forms evaluated directly: d1 = 1 - 0.25, d2 = 2*0.1*0.5
    sol = bouncer.stationary_solution(underdamped, 0.5)
    assert sol.amplitude == pytest.approx(1.0 / math.hypot(0.75, 0.1), rel=1e-14)
    assert sol.phase == pytest.approx(math.atan2(-0.1, 0.75), rel=1e-14)


def test_phase_branch_continuous(underdamped):
    omegas = np.linspace(0.0, 2.0, 201)
    phases = [bouncer.stationary_solution(underdamped, float(w)).phase
              for w in omegas]
    assert all(-math.pi < phi <= 0.0 for phi in phases)
    # monotone decreasing through -pi/2 at resonance, no branch jump
    assert all(b <= a for a, b in zip(phases, phases[1:]))
    assert phases[100] == pytest.approx(-math.pi / 2, rel=1e-12)


def test_undamped_resonance_rejected():
    p = validate_params(PhysicalParams(m=1.0, omega0=1.0, F0=1.0, gamma=0.0,
                                       zeta=1.0))
    with pytest.raises(ValueError):
        bouncer.stationary_solution(p, 1.0)


def test_integrate_free_oscillation():
    p = validate_params(PhysicalParams(m=1.0, omega0=1.0, F0=0.0, gamma=0.0,
                                       zeta=1.0))
    dt = p.tau / 1000.0
    traj = bouncer.integrate_bouncer(p, 1.0, OscState(1.0, 0.0), 10 * p.tau, dt)
    assert np.abs(traj.x - np.cos(traj.t)).max() < 1e-8


def test_integrate_reaches_stationary_attractor(underdamped):
    p = underdamped
    dt = p.tau / 1000.0
    t_end = 32 * p.tau  # past 20/gamma = 200
    traj = bouncer.integrate_bouncer(p, p.omega0, OscState(0.0, 0.0), t_end, dt)
    sol = bouncer.stationary_solution(p, p.omega0)
    tail = traj.segment(31 * 1000, 32 * 1000)
    dev = np.abs(tail.x - sol.x(tail.t, p.omega0)).max() / sol.amplitude
    assert dev < 1e-6


def test_pure_damping_energy_decreases():
    p = validate_params(PhysicalParams(m=1.0, omega0=1.0, F0=0.0, gamma=0.5,
                                       zeta=1.0))
    traj = bouncer.integrate_bouncer(p, p.omega0, OscState(1.0, 0.0),
                                     5 * p.tau, p.tau / 1000.0)
    h = traj.hamiltonian()
    assert np.all(np.diff(h) <= 1e-12)


def test_step_guards(canon):
    with pytest.raises(StepTooLarge):
        bouncer.integrate_bouncer(canon, 1.0, OscState(0.0, 0.0), 1.0,
                                  canon.tau / 50.0)
    with pytest.raises(StepTooLarge):
        bouncer.integrate_bouncer(canon, 1.0, OscState(0.0, 0.0), 1.0, -0.1)


def test_hamiltonian_values(canon):
    assert bouncer.hamiltonian(OscState(0.0, 0.0), canon) == 0.0
    assert bouncer.hamiltonian(OscState(1.0, 1.0), canon) == 1.0


def test_hamiltonian_constant_on_stationary_circle(canon, canon_derived):
    # stationary motion at resonance keeps H = m omega0^2 r^2 / 2 = hbar omega0 / 2
    sol = bouncer.stationary_solution(canon, canon.omega0)
    t = np.linspace(0.0, canon.tau, 101)
    h = np.array([
        bouncer.hamiltonian(OscState(float(x), float(v)), canon)
        for x, v in zip(sol.x(t, canon.omega0), sol.v(t, canon.omega0))
    ])
    assert np.abs(h - 0.5).max() < 1e-8


def test_work_analytic(canon, underdamped):
    assert bouncer.work_per_period_analytic(canon) == pytest.approx(
        4.0 * math.pi, rel=1e-14)
    assert bouncer.work_per_period_analytic(underdamped) == pytest.approx(
        5.0 * math.pi, rel=1e-14)
    undriven = validate_params(PhysicalParams(m=1.0, omega0=1.0, F0=0.0,
                                              gamma=0.5, zeta=1.0))
    assert bouncer.work_per_period_analytic(undriven) == 0.0


def test_work_quadrature_matches_analytic(canon, underdamped):
    for p in (canon, underdamped):
        seg = bouncer.steady_state_segment(p)
        w = bouncer.work_per_period_quadrature(seg, p)
        assert w == pytest.approx(bouncer.work_per_period_analytic(p), rel=1e-6)


def test_quadrature_rejects_transient(canon):
    dt = canon.tau / 1000.0
    traj = bouncer.integrate_bouncer(canon, canon.omega0, OscState(0.0, 0.0),
                                     canon.tau, dt)
    with pytest.raises(NotSteadyState):
        bouncer.work_per_period_quadrature(traj, canon)


def test_power_balance_small(canon, canon_derived):
    seg = bouncer.steady_state_segment(canon)
    bal = bouncer.power_balance(seg, canon)
    assert abs(bal) < 1e-8 * canon_derived.e_tot


def test_polar_residuals_stationary_circle():
    dt = 2.0 * math.pi / 1000.0
    t = dt * np.arange(1001)
    radial, angular = bouncer.polar_residuals(np.ones_like(t), t, dt, 1.0)
    assert radial < 1e-8
    assert angular < 1e-8


def test_polar_residuals_detuned_rotation():
    # constant r with theta' = 1.1 omega0 leaves r|omega0^2 - 1.21 omega0^2| = 0.21
    dt = 2.0 * math.pi / 1000.0
    t = dt * np.arange(1001)
    radial, angular = bouncer.polar_residuals(np.ones_like(t), 1.1 * t, dt, 1.0)
    assert radial == pytest.approx(0.21, rel=1e-6)
    assert angular < 1e-8


def test_angular_momentum_series(canon_derived):
    t = np.linspace(0.0, 2.0 * math.pi, 500)
    L = bouncer.angular_momentum_series(np.ones_like(t), np.ones_like(t), 1.0)
    assert np.abs(L - canon_derived.hbar).max() < 1e-14

    L = bouncer.angular_momentum_series(0.5 * np.ones_like(t),
                                        np.ones_like(t), 2.0)
    assert np.abs(L - 0.5).max() < 1e-14


def test_angular_momentum_invariant_for_modulated_rotation():
    # theta'(t) = omega0 (1 + 0.1 sin omega0 t) with r chosen as sqrt(1/theta')
    t = np.linspace(0.0, 2.0 * math.pi, 500)
    theta_dot = 1.0 + 0.1 * np.sin(t)
    r = np.sqrt(1.0 / theta_dot)
    L = bouncer.angular_momentum_series(r, theta_dot, 1.0)
    assert np.abs(L - 1.0).max() < 1e-12


def test_heat_cycle_ledger_canon(canon, canon_derived):
    seg = bouncer.steady_state_segment(canon)
    ledger = bouncer.heat_cycle_ledger(seg, canon)
    e_cycle = canon_derived.hbar * canon.omega0
    assert ledger.absorbed == pytest.approx(e_cycle, rel=1e-6)
    assert ledger.emitted == pytest.approx(e_cycle, rel=1e-6)
    assert ledger.throughput == ledger.absorbed
    assert ledger.ekin_max == pytest.approx(0.5 * e_cycle, rel=1e-6)
    assert ledger.ekin_min < 1e-6 * e_cycle


def test_heat_cycle_ledger_scales_with_hbar():
    p = canonical_params(1.0, 1.0, hbar_target=4.0)
    d = derive_constants(p)
    seg = bouncer.steady_state_segment(p)
    ledger = bouncer.heat_cycle_ledger(seg, p)
    assert ledger.absorbed == pytest.approx(d.hbar * p.omega0, rel=1e-6)


def test_heat_cycle_ledger_decay_segment(canon):
    p = validate_params(PhysicalParams(m=1.0, omega0=1.0, F0=0.0, gamma=0.2,
                                       zeta=1.0))
    # start at a kinetic-energy peak so the damped falls outweigh the rises
    traj = bouncer.integrate_bouncer(p, p.omega0, OscState(0.0, 1.0), p.tau,
                                     p.tau / 1000.0)
    with pytest.raises(NotSteadyState):
        bouncer.heat_cycle_ledger(traj, p)
    ledger = bouncer.heat_cycle_ledger(traj, p, require_steady=False)
    assert ledger.emitted > ledger.absorbed


def test_steady_state_segment_grid_requirement(canon):
    with pytest.raises(ValueError):
        bouncer.steady_state_segment(canon, steps_per_period=1002)


def test_settle_time_undamped_rejected():
    p = validate_params(PhysicalParams(m=1.0, omega0=1.0, F0=0.0, gamma=0.0,
                                       zeta=1.0))
    with pytest.raises(ValueError):
        bouncer.settle_time(p)
