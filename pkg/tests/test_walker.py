"""Langevin walker: integrators, analytic statistics, ensemble estimators."""

import math

import numpy as np
import pytest

from subq import walker
from subq.constants import PhysicalParams, derive_constants, validate_params
from subq.errors import StepTooLarge, TooFewSamples, WindowOutOfRange
from subq.walker import NoiseModel, WalkerState


@pytest.fixture
def canon_model(canon, canon_derived):
    # lam = 4, zeta = 2, m = 1: stationary <u^2> = 1, D = 0.5
    return NoiseModel.from_constants(canon, canon_derived)


def test_model_derived_properties(canon_model):
    assert canon_model.stationary_msv == 1.0
    assert canon_model.diffusion == 0.5


def test_ou_step_noiseless_decay():
    model = NoiseModel(lam=0.0, zeta=2.0, m=1.0)
    s = walker.ou_exact_step(WalkerState(0.0, 2.0), 0.25, model, 0.0, 0.0)
    assert s.u == pytest.approx(2.0 * math.exp(-0.5), rel=1e-14)


def test_ou_step_decay_factor(canon_model):
    # the deterministic part of the velocity update is u e^(-zeta dt)
    for dt in (0.25, 0.5):
        s = walker.ou_exact_step(WalkerState(0.0, 2.0), dt, canon_model, 0.0, 0.0)
        assert s.u == pytest.approx(2.0 * math.exp(-canon_model.zeta * dt),
                                    rel=1e-14)


def test_ou_step_preserves_stationary_distribution(canon_model):
    # one exact transition applied to an equilibrium ensemble leaves the
    # velocity moments unchanged (moment test over 10^5 draws)
    ens = walker.simulate_ensemble(canon_model, 100_000, 0.3, 0.3, seed=7)
    u1 = ens.u[-1]
    msv = (u1**2).mean()
    se = (u1**2).std(ddof=1) / math.sqrt(len(u1))
    assert abs(msv - canon_model.stationary_msv) < 3.0 * se
    assert abs(u1.mean()) < 3.0 * u1.std(ddof=1) / math.sqrt(len(u1))


def test_euler_maruyama_decay_and_guard():
    model = NoiseModel(lam=0.0, zeta=2.0, m=1.0)
    s = walker.euler_maruyama_step(WalkerState(0.0, 1.0), 0.01, model, 0.0)
    assert s.u == pytest.approx(0.98, rel=1e-14)
    with pytest.raises(StepTooLarge):
        walker.euler_maruyama_step(WalkerState(0.0, 1.0), 0.5, model, 0.0)


def test_euler_maruyama_one_step_variance(canon_model):
    dt = 0.01
    ens = walker.simulate_ensemble(canon_model, 100_000, dt, dt, seed=11,
                                   integrator="euler_maruyama", init_u=0.0)
    u1 = ens.u[-1]
    var = (u1**2).mean()
    se = (u1**2).std(ddof=1) / math.sqrt(len(u1))
    assert abs(var - canon_model.lam * dt / canon_model.m**2) < 3.0 * se


def test_simulate_walker_deterministic_limit():
    model = NoiseModel(lam=0.0, zeta=2.0, m=1.0)
    traj = walker.simulate_walker(model, WalkerState(0.0, 1.0), 2.0, 0.01,
                                  seed=1)
    assert np.abs(traj.u - np.exp(-2.0 * traj.t)).max() < 1e-12

    em = walker.simulate_walker(model, WalkerState(0.0, 1.0), 2.0, 0.01,
                                seed=1, integrator="euler_maruyama")
    assert np.abs(em.u - np.exp(-2.0 * em.t)).max() < 0.05  # O(dt) scheme error


def test_simulate_walker_reproducible(canon_model):
    a = walker.simulate_walker(canon_model, None, 1.0, 0.01, seed=3)
    b = walker.simulate_walker(canon_model, None, 1.0, 0.01, seed=3)
    assert np.array_equal(a.x, b.x)
    assert np.array_equal(a.u, b.u)
    c = walker.simulate_walker(canon_model, None, 1.0, 0.01, seed=4)
    assert not np.array_equal(a.u, c.u)


def test_unknown_integrator_rejected(canon_model):
    with pytest.raises(ValueError):
        walker.simulate_walker(canon_model, None, 1.0, 0.01, seed=1,
                               integrator="heun")


def test_msv_analytic(canon_model):
    assert walker.msv_analytic(canon_model, 0.0, u0=2.0) == 4.0
    assert walker.msv_analytic(canon_model, 50.0) == pytest.approx(1.0, rel=1e-14)
    assert walker.msv_analytic(canon_model, 0.25, u0=2.0) == pytest.approx(
        1.0 + 3.0 * math.exp(-1.0), rel=1e-14)


def test_msd_analytic(canon_model):
    assert walker.msd_analytic(canon_model, 10.0) == pytest.approx(10.0, rel=1e-14)
    assert walker.msd_analytic(canon_model, 0.0) == 0.0
    assert walker.msd_analytic(canon_model, 0.0, form="exact") == 0.0
    exact = walker.msd_analytic(canon_model, 0.5, form="exact")
    assert exact == pytest.approx(0.5 - (1.0 - math.exp(-1.0)) / 2.0, rel=1e-14)
    assert exact < walker.msd_analytic(canon_model, 0.5)  # asymptotic overshoots


def test_walker_work(canon, canon_derived):
    assert walker.walker_work(canon, canon_derived, 1) == pytest.approx(
        4.0 * math.pi, rel=1e-14)
    assert walker.walker_work(canon, canon_derived, 3) == pytest.approx(
        12.0 * math.pi, rel=1e-14)
    # three DOF at the same per-DOF bath energy triple the throughput
    p3 = validate_params(PhysicalParams(m=1.0, omega0=1.0, F0=4.0, gamma=2.0,
                                        zeta=2.0, n_dof=3))
    d3 = derive_constants(p3, e_zp=0.5)
    assert walker.walker_work(p3, d3, 1) == pytest.approx(12.0 * math.pi,
                                                          rel=1e-14)


def test_ensemble_equipartition(canon_model):
    t_end = 5.0 / canon_model.zeta
    ens = walker.simulate_ensemble(canon_model, 10_000, t_end, t_end / 500,
                                   seed=21, record_stride=500)
    est = walker.ensemble_msv(ens, t_end)
    assert abs(est.value - 1.0) < 3.0 * est.stderr


def test_velocity_autocorrelation(canon_model):
    dt = 0.005
    ens = walker.simulate_ensemble(canon_model, 10_000, 2.0, dt, seed=23,
                                   record_stride=100)
    lag = 1.0 / canon_model.zeta
    (c,) = walker.velocity_autocorrelation(ens, [lag], t_ref=1.0)
    assert abs(c.value - math.exp(-1.0)) < 3.0 * c.stderr
    (c0,) = walker.velocity_autocorrelation(ens, [0.0], t_ref=1.0)
    assert c0.value == pytest.approx(1.0, rel=1e-14)


def test_fit_diffusion_noiseless():
    model = NoiseModel(lam=0.0, zeta=2.0, m=1.0)
    ens = walker.simulate_ensemble(model, 16, 10.0, 0.01, seed=5, init_u=0.0,
                                   record_stride=100)
    fit = walker.fit_diffusion(ens, model, 2.0, 10.0)
    assert fit.value == 0.0
    assert fit.stderr == 0.0


def test_fit_diffusion_statistical(canon_model):
    dt = 0.005
    burn = 10.0 / canon_model.zeta
    ens = walker.simulate_ensemble(canon_model, 3_000, burn + 10.0, dt,
                                   seed=29, record_stride=100)
    fit = walker.fit_diffusion(ens, canon_model, 2.5, 10.0, origin_time=burn)
    assert abs(fit.value - 0.5) < 3.0 * fit.stderr
    assert fit.n_samples == 3_000


def test_fit_window_guards(canon_model):
    ens = walker.simulate_ensemble(canon_model, 16, 5.0, 0.01, seed=31,
                                   record_stride=50)
    with pytest.raises(WindowOutOfRange):
        walker.fit_diffusion(ens, canon_model, 1.0, 4.0)  # t_lo < 5/zeta
    with pytest.raises(WindowOutOfRange):
        walker.fit_diffusion(ens, canon_model, 2.5, 40.0)  # beyond the grid
    with pytest.raises(WindowOutOfRange):
        ens.time_index(17.3)


def test_estimators_need_samples(canon_model):
    ens = walker.simulate_ensemble(canon_model, 1, 1.0, 0.01, seed=33)
    with pytest.raises(TooFewSamples):
        walker.ensemble_msv(ens, 1.0)
    with pytest.raises(TooFewSamples):
        walker.ensemble_msd(ens)


def test_ensemble_thread_invariance(canon_model):
    kwargs = dict(n_traj=2_500, t_end=1.0, dt=0.01, seed=37, record_stride=10)
    a = walker.simulate_ensemble(canon_model, **kwargs, n_threads=1)
    b = walker.simulate_ensemble(canon_model, **kwargs, n_threads=4)
    assert np.array_equal(a.x, b.x)
    assert np.array_equal(a.u, b.u)


def test_euler_maruyama_weak_convergence(canon_model):
    # the scheme's stationary <u^2> bias shrinks with the step
    t_end = 10.0 / canon_model.zeta
    errs = []
    for dt in (0.04, 0.02):
        ens = walker.simulate_ensemble(canon_model, 40_000, t_end, dt, seed=41,
                                       integrator="euler_maruyama", init_u=0.0,
                                       record_stride=int(round(t_end / dt)))
        errs.append(abs((ens.u[-1] ** 2).mean() - canon_model.stationary_msv))
    assert errs[1] < errs[0]
