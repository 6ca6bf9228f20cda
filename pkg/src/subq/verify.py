"""Relation-checking engine: every derived identity against its oracle.

Algebraic identities are evaluated in closed form, deterministic-numeric
ones compare quadrature/integration against closed forms, and statistical
ones compare Monte-Carlo estimates at the 3-stderr level.  run_all wires
the whole pipeline (bouncer steady state, walker ensembles, Gaussian
ballistic run) into a single machine-readable report.
"""

from __future__ import annotations

import math
import time
from typing import List, Optional, Tuple

import numpy as np

from subq import bouncer, ensemble, walker
from subq.config import RunConfig
from subq.constants import DerivedConstants, PhysicalParams, validate_params
from subq.report import CheckResult, Report, STAT_SIGMAS, make_check
from subq.walker import EstimateWithError, NoiseModel

__all__ = [
    "check_equipartition",
    "check_einstein",
    "check_diffusion",
    "check_work_matching",
    "check_total_energy",
    "check_coupling",
    "check_entropic_cycle",
    "run_all",
]


def check_equipartition(est: EstimateWithError, p: PhysicalParams,
                        d: DerivedConstants) -> CheckResult:
    """(m/2)<u^2> of an equilibrated walker ensemble vs the bath energy E_zp."""
    return make_check(
        name="equipartition",
        kind="statistical",
        lhs=0.5 * p.m * est.value,
        rhs=d.e_zp,
        stderr=0.5 * p.m * est.stderr,
        anchor="sub-quantum equipartition: mean walker kinetic energy equals E_zp",
    )


def check_einstein(p: PhysicalParams, d: DerivedConstants) -> CheckResult:
    """Fluctuation-dissipation identity lam = 4 zeta m E_zp."""
    p = validate_params(p)
    return make_check(
        name="einstein_relation",
        kind="algebraic",
        lhs=d.lam,
        rhs=4.0 * p.zeta * p.m * d.e_zp,
        anchor="Einstein-type relation between noise strength and friction",
    )


def check_diffusion(
    d_fit: EstimateWithError, p: PhysicalParams, d: DerivedConstants
) -> Tuple[CheckResult, CheckResult]:
    """Fitted diffusion constant vs lam/(2 zeta^2 m^2), plus the canonical
    identity D = hbar/(2m) (reported not-applicable in free mode)."""
    p = validate_params(p)
    fit = make_check(
        name="diffusion_fit",
        kind="statistical",
        lhs=d_fit.value,
        rhs=d.D,
        stderr=d_fit.stderr,
        anchor="long-time mean-square displacement slope 2 D t",
    )
    identity = make_check(
        name="diffusion_identity",
        kind="algebraic",
        lhs=d.D,
        rhs=d.hbar / (2.0 * p.m),
        anchor="canonical coupling gives D = hbar / (2 m)",
        applicable=p.canonical_coupling,
    )
    return fit, identity


def check_work_matching(p: PhysicalParams, d: DerivedConstants,
                        n: int = 100) -> CheckResult:
    """n periods of bouncer work vs the walker's work over the same span."""
    p = validate_params(p)
    lhs = n * bouncer.work_per_period_analytic(p)
    rhs = walker.walker_work(p, d, n)
    return make_check(
        name="work_matching",
        kind="algebraic",
        lhs=lhs,
        rhs=rhs,
        anchor="equal per-period energy throughput of bouncer and walker",
    )


def check_total_energy(p: PhysicalParams, d: DerivedConstants) -> CheckResult:
    """E_tot == 2 N E_zp == hbar omega0 == 2 E_bouncer."""
    p = validate_params(p)
    e_bouncer = 0.5 * p.m * p.omega0**2 * d.r**2
    values = [d.e_tot, 2.0 * p.n_dof * d.e_zp, d.hbar * p.omega0, 2.0 * e_bouncer]
    scale = max(abs(v) for v in values)
    worst = max(abs(a - b) for a in values for b in values) / scale
    return make_check(
        name="total_energy",
        kind="algebraic",
        lhs=d.e_tot,
        rhs=d.hbar * p.omega0,
        rel_error=worst,
        anchor="total particle energy hbar*omega0, twice the mean kinetic energy",
    )


def check_coupling(p: PhysicalParams) -> CheckResult:
    """Bath coupling identity gamma == zeta == 2 omega0."""
    p = validate_params(p)
    target = 2.0 * p.omega0
    worst = max(
        abs(p.gamma - target), abs(p.zeta - target), abs(p.gamma - p.zeta)
    ) / target
    return make_check(
        name="coupling_identity",
        kind="algebraic",
        lhs=p.gamma,
        rhs=target,
        rel_error=worst,
        anchor="identical bouncer/walker coupling strength 2*omega0",
    )


def check_entropic_cycle(
    ledger: bouncer.HeatCycleLedger, p: PhysicalParams, d: DerivedConstants
) -> CheckResult:
    """Heat absorbed per period equals hbar omega0 and the kinetic-energy
    maximum equals hbar omega0 / 2."""
    p = validate_params(p)
    e_cycle = d.hbar * p.omega0
    rel = max(
        abs(ledger.absorbed - e_cycle) / e_cycle,
        abs(ledger.ekin_max - 0.5 * e_cycle) / (0.5 * e_cycle),
    )
    return make_check(
        name="entropic_cycle",
        kind="deterministic-numeric",
        lhs=ledger.absorbed,
        rhs=e_cycle,
        rel_error=rel,
        anchor="entropic heat cycle: per-period throughput hbar*omega0",
    )


def _worst_statistical(
    name: str,
    pairs: List[Tuple[float, float, float]],
    anchor: str,
) -> CheckResult:
    """One CheckResult from (lhs, rhs, stderr) points; verdict set by the
    point with the largest deviation in stderr units."""
    def sigmas(p):
        lhs, rhs, se = p
        return abs(lhs - rhs) / max(se, 1e-300)

    lhs, rhs, se = max(pairs, key=sigmas)
    return make_check(name=name, kind="statistical", lhs=lhs, rhs=rhs,
                      stderr=se, anchor=anchor)


def _divergence_check(
    name: str,
    rows,
    t_star: float,
    anchor: str,
) -> CheckResult:
    """Require the empirical variance to exceed the rest-frame curve by more
    than 3 stderr at every grid point beyond the crossover time t*."""
    beyond = [r for r in rows if r[0] > t_star * (1.0 + 1e-12)]
    if not beyond:
        return make_check(name=name, kind="statistical", lhs=0.0, rhs=0.0,
                          stderr=0.0, anchor=anchor, applicable=False)
    t, var_emp, se, _bal, rest = min(beyond, key=lambda r: (r[1] - r[4]) / r[2])
    passed = all(r[1] - r[4] > STAT_SIGMAS * r[2] for r in beyond)
    return CheckResult(
        name=name,
        kind="statistical",
        lhs=var_emp,
        rhs=rest,
        abs_error=abs(var_emp - rest),
        rel_error=abs(var_emp - rest) / max(abs(var_emp), abs(rest)),
        stderr=se,
        tolerance=STAT_SIGMAS * se,
        passed=passed,
        paper_anchor=anchor,
    )


def run_all(cfg: RunConfig, seed: Optional[int] = None, n_threads: int = 1) -> Report:
    """Execute the full verification pipeline and assemble the report.

    Deterministic given the resolved seed; thread count never changes the
    numbers, only the wall clock.
    """
    seed = cfg.resolve_seed(seed)
    p = cfg.physical_params()
    d = cfg.derived()

    config_echo = cfg.to_dict()
    config_echo["run"]["seed"] = seed
    derived_echo = {
        "r": d.r, "tau": d.tau, "hbar": d.hbar, "e_zp": d.e_zp,
        "e_tot": d.e_tot, "lambda": d.lam, "D": d.D,
    }
    report = Report(config=config_echo, derived=derived_echo)
    clock = time.perf_counter()

    def add(check: CheckResult) -> None:
        nonlocal clock
        now = time.perf_counter()
        report.add(check, elapsed_ms=(now - clock) * 1e3)
        clock = now

    # --- closed-form identities ---
    add(check_coupling(p))
    add(check_einstein(p, d))
    add(check_total_energy(p, d))
    add(check_work_matching(p, d, n=cfg.run.work_periods))

    # --- bouncer: steady state, work, balance, heat cycle ---
    seg = bouncer.steady_state_segment(p)
    sol = bouncer.stationary_solution(p, p.omega0)
    dev = np.abs(seg.x - sol.x(seg.t, p.omega0)).max() / sol.amplitude
    add(make_check(
        name="stationary_attractor",
        kind="deterministic-numeric",
        lhs=float(seg.x[np.argmax(np.abs(seg.x))]),
        rhs=sol.amplitude,
        rel_error=float(dev),
        anchor="long-time attractor A cos(omega0 t + phi) of the driven oscillator",
    ))

    w_quad = bouncer.work_per_period_quadrature(seg, p)
    w_closed = 2.0 * math.pi * p.gamma * d.hbar
    add(make_check(
        name="work_identity",
        kind="deterministic-numeric",
        lhs=w_quad,
        rhs=w_closed,
        anchor="per-period drive work 2 pi gamma hbar",
    ))

    # Normalized by the oscillator's own energy hbar*omega0, which equals
    # E_tot under canonical coupling where the 1e-8 bound applies.
    bal = bouncer.power_balance(seg, p)
    e_osc = d.hbar * p.omega0
    add(make_check(
        name="power_balance",
        kind="deterministic-numeric",
        lhs=bal,
        rhs=0.0,
        rel_error=abs(bal) / e_osc,
        tolerance=1e-8,
        anchor="zero net power exchange with the bath in steady state",
    ))

    ledger = bouncer.heat_cycle_ledger(seg, p)
    add(check_entropic_cycle(ledger, p, d))
    add(make_check(
        name="heat_ledger_balance",
        kind="deterministic-numeric",
        lhs=ledger.absorbed,
        rhs=ledger.emitted,
        rel_error=abs(ledger.absorbed - ledger.emitted) / e_osc,
        anchor="absorbed equals emitted heat per steady-state period",
    ))

    # --- walker: equilibrium ensemble, equipartition, diffusion fit ---
    model = NoiseModel.from_constants(p, d)
    dt = cfg.resolved_dt()
    burn_t = cfg.run.burn_in / p.zeta
    t_lo, t_hi = cfg.run.fit_window
    # the asymptotic-MSD guard; only binds when zeta is small
    t_lo = max(t_lo, 5.0 / p.zeta)
    if t_hi <= t_lo:
        t_hi = t_lo + 5.0 / p.zeta
    stride = max(1, int(round((d.tau / 20.0) / dt)))
    n_rec = math.ceil((burn_t + t_hi) / (stride * dt))
    ens = walker.simulate_ensemble(
        model, cfg.run.ensemble_size, n_rec * stride * dt, dt, seed,
        integrator="ou_exact", init_u="stationary", record_stride=stride,
        n_threads=n_threads,
    )
    origin = float(ens.t[ens.time_index(burn_t)])
    add(check_equipartition(walker.ensemble_msv(ens, float(ens.t[-1])), p, d))
    d_fit = walker.fit_diffusion(ens, model, t_lo, t_hi, origin_time=origin)
    fit_check, identity_check = check_diffusion(d_fit, p, d)
    add(fit_check)
    add(identity_check)

    # --- walker: velocity relaxation from a non-equilibrium start ---
    relax_T = 5.0 / p.zeta
    relax_steps = 2000
    relax_dt = relax_T / relax_steps
    relax = walker.simulate_ensemble(
        model, cfg.run.ensemble_size, relax_T, relax_dt, seed + 1,
        integrator="ou_exact", init_u=cfg.run.relax_u0, record_stride=100,
        n_threads=n_threads,
    )
    pairs = []
    for t in relax.t[1:]:
        est = walker.ensemble_msv(relax, float(t))
        pairs.append((est.value, walker.msv_analytic(model, float(t), cfg.run.relax_u0),
                      est.stderr))
    add(_worst_statistical(
        "velocity_relaxation", pairs,
        anchor="mean-square velocity relaxation to the stationary value",
    ))

    # --- Gaussian ensemble: ballistic spread, decomposition, osmotic link ---
    grid = list(cfg.ensemble.time_grid)
    for i, sigma0 in enumerate(cfg.ensemble.sigma0_scan):
        prep = ensemble.GaussianPrep(
            sigma0=sigma0, x0=cfg.ensemble.x0, v_conv=cfg.ensemble.v_conv,
            M=cfg.ensemble.M,
        )
        rows = ensemble.variance_series(prep, d, grid, seed + 10 + i)
        add(_worst_statistical(
            f"ballistic_variance_sigma0_{sigma0:g}",
            [(r[1], r[3], r[2]) for r in rows],
            anchor="ballistic spreading sigma0^2 + u0^2 t^2",
        ))
        t_star = 2.0 * sigma0**2 / d.D
        add(_divergence_check(
            f"ballistic_vs_restframe_sigma0_{sigma0:g}", rows, t_star,
            anchor="rest-frame linear spreading law fails beyond the crossover time",
        ))

    prep = ensemble.GaussianPrep(
        sigma0=cfg.ensemble.sigma0, x0=cfg.ensemble.x0,
        v_conv=cfg.ensemble.v_conv, M=cfg.ensemble.M,
    )
    splits = [ensemble.kinetic_decomposition(d, p, prep.sigma0, t) for t in grid]
    add(ensemble.check_energy_conservation(splits))

    u0 = ensemble.initial_u0(d, prep.sigma0)
    target_total = 0.5 * p.m * u0**2
    state = ensemble.prepare_gaussian(prep, d, seed + 20)
    emp_pairs = []
    for t in grid:
        state = ensemble.ballistic_evolve(state, t)
        split, se = ensemble.empirical_kinetic_split(state, prep, p, d)
        emp_pairs.append((split.total, target_total, se))
    add(_worst_statistical(
        "kinetic_split_empirical", emp_pairs,
        anchor="constant sum of convective and diffusive kinetic energy",
    ))

    fresh = ensemble.prepare_gaussian(prep, d, seed + 21)
    u_osm = ensemble.osmotic_velocity(fresh.positions, prep.x0, prep.sigma0**2, d)
    samples = 0.5 * p.m * u_osm**2
    rhs = (d.hbar**2 / (8.0 * p.m * prep.sigma0**2) if p.canonical_coupling
           else 0.5 * p.m * d.D**2 / prep.sigma0**2)
    add(make_check(
        name="osmotic_link",
        kind="statistical",
        lhs=float(samples.mean()),
        rhs=rhs,
        stderr=float(samples.std(ddof=1) / math.sqrt(prep.M)),
        anchor="mean osmotic kinetic energy of the prepared Gaussian",
    ))

    return report
