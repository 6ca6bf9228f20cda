"""Stochastic Langevin dynamics of the walker and its ensemble estimators.

The walker obeys

    m u' = -m zeta u + f(t),    x' = u

with white noise <f(t) f(t')> = lam * delta(t - t').  Two integrators are
provided: the exact Ornstein-Uhlenbeck joint transition of (x, u), which
has no discretization bias, and Euler-Maruyama, kept to demonstrate
first-order weak scheme error.

Every trajectory owns a private counter-based RNG stream keyed by
(master seed, trajectory index), so ensemble statistics are independent
of chunking and worker count.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import List, Optional, Sequence, Tuple, Union

import numpy as np

from subq.constants import DerivedConstants, PhysicalParams, validate_params
from subq.errors import StepTooLarge, TooFewSamples, WindowOutOfRange
from subq.streams import stream

__all__ = [
    "NoiseModel",
    "WalkerState",
    "WalkerTrajectory",
    "EnsembleTrajectories",
    "EstimateWithError",
    "ou_exact_step",
    "euler_maruyama_step",
    "simulate_walker",
    "simulate_ensemble",
    "msv_analytic",
    "msd_analytic",
    "walker_work",
    "ensemble_msv",
    "ensemble_msd",
    "fit_diffusion",
    "velocity_autocorrelation",
]

# Trajectories per work unit; fixed so that results never depend on the
# number of threads used.
_CHUNK = 1024


@dataclass(frozen=True)
class NoiseModel:
    """White-noise bath: strength lam, friction zeta, particle mass m."""

    lam: float
    zeta: float
    m: float

    def __post_init__(self):
        for name in ("lam", "zeta", "m"):
            if getattr(self, name) < 0 or (name != "lam" and getattr(self, name) <= 0):
                raise ValueError(f"{name} must be positive (lam may be 0)")

    @classmethod
    def from_constants(cls, p: PhysicalParams, d: DerivedConstants) -> "NoiseModel":
        p = validate_params(p)
        return cls(lam=d.lam, zeta=p.zeta, m=p.m)

    @property
    def stationary_msv(self) -> float:
        """Stationary mean-square velocity lam / (2 zeta m^2)."""
        return self.lam / (2.0 * self.zeta * self.m**2)

    @property
    def diffusion(self) -> float:
        """Long-time diffusion constant lam / (2 zeta^2 m^2)."""
        return self.lam / (2.0 * self.zeta**2 * self.m**2)


@dataclass(frozen=True)
class WalkerState:
    x: float
    u: float
    t: float = 0.0


@dataclass(frozen=True)
class WalkerTrajectory:
    """Single uniformly sampled stochastic path with its provenance."""

    dt: float
    t: np.ndarray
    x: np.ndarray
    u: np.ndarray
    seed: int
    integrator: str


@dataclass(frozen=True)
class EnsembleTrajectories:
    """Recorded states of many walkers on a common time grid.

    x and u have shape (n_times, n_traj); column i was generated from
    stream(seed, i).
    """

    dt: float
    record_stride: int
    t: np.ndarray
    x: np.ndarray
    u: np.ndarray
    seed: int
    integrator: str

    @property
    def n_traj(self) -> int:
        return self.x.shape[1]

    def time_index(self, t: float) -> int:
        k = int(np.argmin(np.abs(self.t - t)))
        if abs(self.t[k] - t) > 0.5 * self.dt * self.record_stride + 1e-12:
            raise WindowOutOfRange(f"t={t} not on recorded grid")
        return k


@dataclass(frozen=True)
class EstimateWithError:
    value: float
    stderr: float
    n_samples: int


def _ou_coeffs(model: NoiseModel, dt: float):
    """Exact joint transition coefficients of the integrated OU process.

    Returns (e1, mean_x_coef, std_u, cov_coef, std_x_resid) such that

        u' = u e1 + std_u xi1
        x' = x + u mean_x_coef + cov_coef xi1 + std_x_resid xi2

    with xi1, xi2 independent standard normals.
    """
    z, m = model.zeta, model.m
    sig2 = model.lam / m**2
    e1 = math.exp(-z * dt)
    e2 = e1 * e1
    var_u = sig2 * (1.0 - e2) / (2.0 * z)
    var_x = sig2 / z**2 * (dt - 2.0 * (1.0 - e1) / z + (1.0 - e2) / (2.0 * z))
    cov = sig2 / (2.0 * z**2) * (1.0 - e1) ** 2
    std_u = math.sqrt(var_u)
    if std_u > 0.0:
        cov_coef = cov / std_u
        std_x_resid = math.sqrt(max(var_x - cov_coef**2, 0.0))
    else:
        cov_coef = 0.0
        std_x_resid = 0.0
    mean_x_coef = (1.0 - e1) / z
    return e1, mean_x_coef, std_u, cov_coef, std_x_resid


def ou_exact_step(
    s: WalkerState, dt: float, model: NoiseModel, xi1: float, xi2: float
) -> WalkerState:
    """One exact transition of (x, u); xi1 drives the velocity update."""
    if dt <= 0:
        raise StepTooLarge("dt must be > 0")
    e1, mxc, su, cxu, sx = _ou_coeffs(model, dt)
    x = s.x + s.u * mxc + cxu * xi1 + sx * xi2
    u = s.u * e1 + su * xi1
    return WalkerState(x=x, u=u, t=s.t + dt)


def euler_maruyama_step(
    s: WalkerState, dt: float, model: NoiseModel, xi: float
) -> WalkerState:
    """Explicit Euler-Maruyama step; requires dt <= 0.1/zeta."""
    if dt <= 0 or dt > 0.1 / model.zeta:
        raise StepTooLarge(f"dt={dt} violates guard dt <= 0.1/zeta = {0.1 / model.zeta}")
    u = s.u - model.zeta * s.u * dt + math.sqrt(model.lam * dt) / model.m * xi
    x = s.x + s.u * dt
    return WalkerState(x=x, u=u, t=s.t + dt)


def _n_steps(t_span: float, dt: float) -> int:
    n = int(round(t_span / dt))
    if n < 1 or abs(n * dt - t_span) > 1e-9 * max(t_span, dt):
        raise ValueError(f"t span {t_span} is not a multiple of dt={dt}")
    return n


def simulate_walker(
    model: NoiseModel,
    init: Optional[WalkerState],
    t_end: float,
    dt: float,
    seed: int,
    integrator: str = "ou_exact",
    stream_index: int = 0,
) -> WalkerTrajectory:
    """Simulate one walker path on a uniform grid.

    init=None starts at x=0 with u drawn from the stationary velocity
    distribution (one extra draw from the stream, before the path noise).
    Identical (seed, stream_index, integrator, dt) give bit-identical
    output.
    """
    rng = stream(seed, stream_index)
    if init is None:
        u0 = math.sqrt(model.stationary_msv) * rng.standard_normal()
        init = WalkerState(x=0.0, u=u0, t=0.0)
    n = _n_steps(t_end - init.t, dt)

    ts = init.t + dt * np.arange(n + 1)
    xs = np.empty(n + 1)
    us = np.empty(n + 1)
    xs[0], us[0] = init.x, init.u
    s = init
    if integrator == "ou_exact":
        noise = rng.standard_normal((n, 2))
        for k in range(n):
            s = ou_exact_step(s, dt, model, noise[k, 0], noise[k, 1])
            xs[k + 1], us[k + 1] = s.x, s.u
    elif integrator == "euler_maruyama":
        noise = rng.standard_normal(n)
        for k in range(n):
            s = euler_maruyama_step(s, dt, model, noise[k])
            xs[k + 1], us[k + 1] = s.x, s.u
    else:
        raise ValueError(f"unknown integrator {integrator!r}")
    return WalkerTrajectory(dt=dt, t=ts, x=xs, u=us, seed=seed, integrator=integrator)


def _run_chunk(
    model: NoiseModel,
    integrator: str,
    seed: int,
    first_index: int,
    n_traj: int,
    n_steps: int,
    dt: float,
    record_stride: int,
    init_u: Union[float, str],
) -> Tuple[np.ndarray, np.ndarray]:
    stationary = init_u == "stationary"
    if integrator == "ou_exact":
        noise = np.empty((n_traj, n_steps, 2))
    else:
        noise = np.empty((n_traj, n_steps))
    u = np.empty(n_traj)
    for i in range(n_traj):
        rng = stream(seed, first_index + i)
        if stationary:
            u[i] = math.sqrt(model.stationary_msv) * rng.standard_normal()
        noise[i] = rng.standard_normal(noise.shape[1:])
    if not stationary:
        u[:] = float(init_u)
    x = np.zeros(n_traj)

    n_rec = n_steps // record_stride
    xr = np.empty((n_rec + 1, n_traj))
    ur = np.empty((n_rec + 1, n_traj))
    xr[0], ur[0] = x, u

    if integrator == "ou_exact":
        e1, mxc, su, cxu, sx = _ou_coeffs(model, dt)
        for k in range(n_steps):
            xi1 = noise[:, k, 0]
            xi2 = noise[:, k, 1]
            x = x + u * mxc + cxu * xi1 + sx * xi2
            u = u * e1 + su * xi1
            if (k + 1) % record_stride == 0:
                j = (k + 1) // record_stride
                xr[j], ur[j] = x, u
    else:
        if dt > 0.1 / model.zeta:
            raise StepTooLarge(
                f"dt={dt} violates guard dt <= 0.1/zeta = {0.1 / model.zeta}"
            )
        amp = math.sqrt(model.lam * dt) / model.m
        decay = 1.0 - model.zeta * dt
        for k in range(n_steps):
            x = x + u * dt
            u = u * decay + amp * noise[:, k]
            if (k + 1) % record_stride == 0:
                j = (k + 1) // record_stride
                xr[j], ur[j] = x, u
    return xr, ur


def simulate_ensemble(
    model: NoiseModel,
    n_traj: int,
    t_end: float,
    dt: float,
    seed: int,
    integrator: str = "ou_exact",
    init_u: Union[float, str] = "stationary",
    record_stride: int = 1,
    n_threads: int = 1,
) -> EnsembleTrajectories:
    """Simulate n_traj independent walkers, all starting at x = 0.

    init_u is either a common initial velocity or "stationary" for an
    equilibrium draw per trajectory.  States are recorded every
    record_stride steps (the initial state included).  Results are
    bit-identical for any n_threads >= 1.
    """
    if n_traj < 1:
        raise TooFewSamples("need at least one trajectory")
    n = _n_steps(t_end, dt)
    if n % record_stride != 0:
        raise ValueError("number of steps must be a multiple of record_stride")
    if integrator not in ("ou_exact", "euler_maruyama"):
        raise ValueError(f"unknown integrator {integrator!r}")

    starts = list(range(0, n_traj, _CHUNK))

    def work(c0: int):
        return _run_chunk(
            model, integrator, seed, c0, min(_CHUNK, n_traj - c0), n, dt,
            record_stride, init_u,
        )

    if n_threads > 1 and len(starts) > 1:
        with ThreadPoolExecutor(max_workers=n_threads) as pool:
            parts = list(pool.map(work, starts))
    else:
        parts = [work(c0) for c0 in starts]

    xr = np.concatenate([p[0] for p in parts], axis=1)
    ur = np.concatenate([p[1] for p in parts], axis=1)
    ts = dt * record_stride * np.arange(xr.shape[0])
    return EnsembleTrajectories(
        dt=dt,
        record_stride=record_stride,
        t=ts,
        x=xr,
        u=ur,
        seed=seed,
        integrator=integrator,
    )


def msv_analytic(model: NoiseModel, t, u0: float = 0.0):
    """Mean-square velocity (lam/(2 zeta m^2))(1-e^(-2 zeta t)) + u0^2 e^(-2 zeta t)."""
    t = np.asarray(t, dtype=float)
    decay = np.exp(-2.0 * model.zeta * t)
    out = model.stationary_msv * (1.0 - decay) + u0**2 * decay
    return float(out) if out.ndim == 0 else out


def msd_analytic(model: NoiseModel, t, form: str = "asymptotic"):
    """Mean-square displacement for an equilibrium-velocity start.

    form="asymptotic" is the long-time law 2 D t (valid for t >> 1/zeta);
    form="exact" is the integrated-OU expression
    2 D (t - (1 - e^(-zeta t))/zeta), exact at all t.
    """
    t = np.asarray(t, dtype=float)
    D = model.diffusion
    if form == "asymptotic":
        out = 2.0 * D * t
    elif form == "exact":
        out = 2.0 * D * (t - (1.0 - np.exp(-model.zeta * t)) / model.zeta)
    else:
        raise ValueError(f"unknown form {form!r}")
    return float(out) if out.ndim == 0 else out


def walker_work(p: PhysicalParams, d: DerivedConstants, n: int = 1) -> float:
    """Net work over n periods: n * N * (4 pi / omega0) * zeta * E_zp."""
    p = validate_params(p)
    if n < 1:
        raise ValueError("n must be a positive integer")
    return n * p.n_dof * (4.0 * math.pi / p.omega0) * p.zeta * d.e_zp


def _mean_with_stderr(samples: np.ndarray) -> EstimateWithError:
    n = len(samples)
    if n < 2:
        raise TooFewSamples("need >= 2 trajectories")
    return EstimateWithError(
        value=float(samples.mean()),
        stderr=float(samples.std(ddof=1) / math.sqrt(n)),
        n_samples=n,
    )


def ensemble_msv(ens: EnsembleTrajectories, t: float) -> EstimateWithError:
    """Unbiased ensemble mean of u^2 at recorded time t."""
    return _mean_with_stderr(ens.u[ens.time_index(t)] ** 2)


def ensemble_msd(
    ens: EnsembleTrajectories, origin_time: float = 0.0
) -> List[EstimateWithError]:
    """Per-time mean-square displacement from each walker's state at origin_time."""
    k0 = ens.time_index(origin_time)
    disp2 = (ens.x - ens.x[k0]) ** 2
    n = ens.n_traj
    if n < 2:
        raise TooFewSamples("need >= 2 trajectories")
    return [
        EstimateWithError(
            value=float(row.mean()),
            stderr=float(row.std(ddof=1) / math.sqrt(n)),
            n_samples=n,
        )
        for row in disp2
    ]


def fit_diffusion(
    ens: EnsembleTrajectories,
    model: NoiseModel,
    t_lo: float,
    t_hi: float,
    origin_time: float = 0.0,
) -> EstimateWithError:
    """Least-squares diffusion constant from the MSD slope over [t_lo, t_hi].

    Times are measured from origin_time.  Each trajectory gets its own
    intercept-and-slope fit; the returned stderr is the spread of the
    per-trajectory slopes (valid because trajectories are independent).
    The window must start at t_lo >= 5/zeta so the asymptotic MSD law
    applies.
    """
    if model.lam > 0 and t_lo < 5.0 / model.zeta:
        raise WindowOutOfRange(f"t_lo={t_lo} must be >= 5/zeta = {5.0 / model.zeta}")
    if t_hi <= t_lo:
        raise WindowOutOfRange("empty fit window")
    k0 = ens.time_index(origin_time)
    trel = ens.t - ens.t[k0]
    sel = (trel >= t_lo - 1e-12) & (trel <= t_hi + 1e-12)
    if trel[-1] < t_hi - 1e-12:
        raise WindowOutOfRange("fit window extends beyond the sampled range")
    if sel.sum() < 2:
        raise TooFewSamples("fit window contains fewer than 2 grid points")
    if ens.n_traj < 2:
        raise TooFewSamples("need >= 2 trajectories")

    tw = trel[sel]
    disp2 = (ens.x[sel] - ens.x[k0]) ** 2  # (n_pts, n_traj)
    design = np.column_stack([tw, np.ones_like(tw)])
    coef, *_ = np.linalg.lstsq(design, disp2, rcond=None)
    d_hats = coef[0] / 2.0
    return _mean_with_stderr(d_hats)


def velocity_autocorrelation(
    ens: EnsembleTrajectories,
    lags: Sequence[float],
    t_ref: float,
) -> List[EstimateWithError]:
    """Normalized velocity autocorrelation C(lag) = <u(t_ref) u(t_ref+lag)> / <u(t_ref)^2>.

    Averaged over trajectories; the stderr neglects the (second-order)
    noise of the lag-0 normalizer.
    """
    k_ref = ens.time_index(t_ref)
    u_ref = ens.u[k_ref]
    c0 = float((u_ref**2).mean())
    n = ens.n_traj
    if n < 2:
        raise TooFewSamples("need >= 2 trajectories")
    out = []
    for lag in lags:
        if lag < 0:
            raise WindowOutOfRange("lags must be >= 0")
        prod = u_ref * ens.u[ens.time_index(t_ref + lag)]
        out.append(
            EstimateWithError(
                value=float(prod.mean() / c0),
                stderr=float(prod.std(ddof=1) / math.sqrt(n) / c0),
                n_samples=n,
            )
        )
    return out
