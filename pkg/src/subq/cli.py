"""Command-line surface: subcommands for each experiment, CSV/JSON emission.

Subcommands: bouncer, walker, ensemble, sweep, verify.  Common flags:
--config PATH, --set KEY=VALUE, --seed U64, --out DIR, --threads N.
Each run writes its files plus a manifest.json into one directory.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
from typing import Iterable, List, Optional, Sequence

import numpy as np

import subq
from subq import bouncer, ensemble, walker
from subq.config import RunConfig, parse_config
from subq.errors import ParseError, SubqError
from subq.verify import run_all
from subq.walker import NoiseModel

__all__ = ["main"]


def _fmt(value, precision: int) -> str:
    return f"{value:.{precision}g}"


def _write_csv(path: str, header: Sequence[str], rows: Iterable[Sequence[float]],
               precision: int) -> None:
    with open(path, "w", newline="\n") as fh:
        fh.write(",".join(header) + "\n")
        for row in rows:
            fh.write(",".join(_fmt(v, precision) for v in row) + "\n")


def _write_json(path: str, payload: dict) -> None:
    with open(path, "w") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True)
        fh.write("\n")


def _prepare_run_dir(cfg: RunConfig, command: str, out: Optional[str],
                     seed: int) -> str:
    run_dir = out if out is not None else os.path.join(cfg.output.directory, command)
    os.makedirs(run_dir, exist_ok=True)
    config_echo = cfg.to_dict()
    config_echo["run"]["seed"] = seed
    _write_json(os.path.join(run_dir, "manifest.json"), {
        "command": command,
        "config": config_echo,
        "seed": seed,
        "versions": {"subq": subq.__version__, "numpy": np.__version__},
    })
    return run_dir


def cmd_bouncer(cfg: RunConfig, run_dir: str, x0: float = 0.0, v0: float = 0.0) -> None:
    p = cfg.physical_params()
    prec = cfg.output.precision
    steps_per_period = max(4, int(round(p.tau / cfg.resolved_dt() / 4.0)) * 4)
    dt = p.tau / steps_per_period
    init = bouncer.OscState(x0, v0, 0.0)

    if p.F0 == 0:
        # Undriven run: a pure decay (or free oscillation), no steady state.
        n_periods = max(1, math.ceil(cfg.run.t_end / p.tau))
        traj = bouncer.integrate_bouncer(p, p.omega0, init, n_periods * p.tau, dt)
        ekin = traj.kinetic()
        epot = traj.potential()
        _write_csv(
            os.path.join(run_dir, "trajectory.csv"),
            ["t", "x", "v", "ekin", "epot", "h"],
            zip(traj.t, traj.x, traj.v, ekin, epot, ekin + epot),
            prec,
        )
        seg = traj.segment((n_periods - 1) * steps_per_period, n_periods * steps_per_period)
        ledger = bouncer.heat_cycle_ledger(seg, p, require_steady=False)
        _write_json(os.path.join(run_dir, "summary.json"), {
            "work_analytic": 0.0,
            "work_quadrature": 0.0,
            "initial_energy": float(ekin[0] + epot[0]),
            "final_energy": float(ekin[-1] + epot[-1]),
            "heat_ledger": {
                "absorbed": ledger.absorbed,
                "emitted": ledger.emitted,
                "throughput": ledger.throughput,
                "ekin_min": ledger.ekin_min,
                "ekin_max": ledger.ekin_max,
            },
        })
        return

    d = cfg.derived()
    n_settle = math.ceil(bouncer.settle_time(p) / p.tau)
    traj = bouncer.integrate_bouncer(p, p.omega0, init, (n_settle + 1) * p.tau, dt)
    ekin = traj.kinetic()
    epot = traj.potential()
    _write_csv(
        os.path.join(run_dir, "trajectory.csv"),
        ["t", "x", "v", "ekin", "epot", "h"],
        zip(traj.t, traj.x, traj.v, ekin, epot, ekin + epot),
        prec,
    )
    seg = traj.segment(n_settle * steps_per_period, (n_settle + 1) * steps_per_period)
    sol = bouncer.stationary_solution(p, p.omega0)
    ledger = bouncer.heat_cycle_ledger(seg, p)
    _write_json(os.path.join(run_dir, "summary.json"), {
        "amplitude": sol.amplitude,
        "phase": sol.phase,
        "stationary_max_rel_dev": float(
            np.abs(seg.x - sol.x(seg.t, p.omega0)).max() / sol.amplitude
        ),
        "work_analytic": bouncer.work_per_period_analytic(p),
        "work_quadrature": bouncer.work_per_period_quadrature(seg, p),
        "power_balance": bouncer.power_balance(seg, p),
        "heat_ledger": {
            "absorbed": ledger.absorbed,
            "emitted": ledger.emitted,
            "throughput": ledger.throughput,
            "ekin_min": ledger.ekin_min,
            "ekin_max": ledger.ekin_max,
        },
        "hbar": d.hbar,
    })


def cmd_walker(cfg: RunConfig, run_dir: str, seed: int, n_threads: int) -> None:
    p = cfg.physical_params()
    d = cfg.derived()
    prec = cfg.output.precision
    model = NoiseModel.from_constants(p, d)
    dt = cfg.resolved_dt()
    burn_t = cfg.run.burn_in / p.zeta
    t_lo, t_hi = cfg.run.fit_window
    stride = max(1, int(round((d.tau / 20.0) / dt)))
    n_rec = math.ceil((burn_t + t_hi) / (stride * dt))
    ens = walker.simulate_ensemble(
        model, cfg.run.ensemble_size, n_rec * stride * dt, dt, seed,
        record_stride=stride, n_threads=n_threads,
    )
    msd = walker.ensemble_msd(ens)
    rows = []
    for k, t in enumerate(ens.t):
        est = walker.ensemble_msv(ens, float(t))
        rows.append((t, est.value, est.stderr, msd[k].value, msd[k].stderr))
    _write_csv(
        os.path.join(run_dir, "ensemble_summary.csv"),
        ["t", "msv", "msv_stderr", "msd", "msd_stderr"],
        rows,
        prec,
    )
    single = walker.simulate_walker(model, None, n_rec * stride * dt, dt, seed,
                                    stream_index=0)
    _write_csv(os.path.join(run_dir, "walker_trajectory.csv"), ["t", "x", "u"],
               zip(single.t, single.x, single.u), prec)
    origin = float(ens.t[ens.time_index(burn_t)])
    d_fit = walker.fit_diffusion(ens, model, t_lo, t_hi, origin_time=origin)
    _write_json(os.path.join(run_dir, "summary.json"), {
        "diffusion_fit": {"value": d_fit.value, "stderr": d_fit.stderr,
                          "n_samples": d_fit.n_samples},
        "diffusion_analytic": d.D,
        "stationary_msv": model.stationary_msv,
    })


def cmd_ensemble(cfg: RunConfig, run_dir: str, seed: int) -> None:
    d = cfg.derived()
    prec = cfg.output.precision
    prep = ensemble.GaussianPrep(
        sigma0=cfg.ensemble.sigma0, x0=cfg.ensemble.x0,
        v_conv=cfg.ensemble.v_conv, M=cfg.ensemble.M,
    )
    rows = ensemble.variance_series(prep, d, cfg.ensemble.time_grid, seed)
    _write_csv(
        os.path.join(run_dir, "spread.csv"),
        ["t", "var_emp", "var_stderr", "var_ballistic", "var_restframe"],
        rows,
        prec,
    )
    state = ensemble.prepare_gaussian(prep, d, seed)
    _write_csv(os.path.join(run_dir, "snapshot.csv"), ["x", "u"],
               zip(state.positions, state.diff_velocities), prec)


def cmd_sweep(cfg: RunConfig, run_dir: str, omega_spec: str) -> None:
    p = cfg.physical_params()
    prec = cfg.output.precision
    try:
        start, stop, points = omega_spec.split(":")
        omegas = np.linspace(float(start), float(stop), int(points))
    except ValueError as exc:
        raise ParseError(f"--omega must be start:stop:points, got {omega_spec!r}") from exc
    rows = []
    for omega in omegas:
        sol = bouncer.stationary_solution(p, float(omega))
        rows.append((omega, sol.amplitude, sol.phase))
    _write_csv(os.path.join(run_dir, "sweep.csv"), ["omega", "A", "phi"], rows, prec)


def cmd_verify(cfg: RunConfig, run_dir: str, seed: int, n_threads: int) -> int:
    report = run_all(cfg, seed=seed, n_threads=n_threads)
    with open(os.path.join(run_dir, "report.json"), "w") as fh:
        fh.write(report.to_json())
        fh.write("\n")
    for check in report.checks:
        status = "PASS" if check.passed else "FAIL"
        if not check.applicable:
            status = "N/A "
        print(f"[{status}] {check.name}: lhs={check.lhs:.6g} rhs={check.rhs:.6g} "
              f"rel={check.rel_error:.2e}")
    print(f"overall: {'PASS' if report.overall_pass else 'FAIL'}")
    return 0 if report.overall_pass else 1


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="subq",
        description="Bouncer-walker oscillator/Langevin simulations and "
                    "verification of their derived relations.",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for name, help_text in (
        ("bouncer", "integrate the driven oscillator; trajectory + energy ledger"),
        ("walker", "Langevin ensemble; velocity/displacement statistics"),
        ("ensemble", "Gaussian beam ballistic spreading"),
        ("sweep", "amplitude/phase response over a frequency range"),
        ("verify", "run every relation check and emit a report"),
    ):
        cmd = sub.add_parser(name, help=help_text)
        cmd.add_argument("--config", metavar="PATH", default=None,
                         help="TOML config file")
        cmd.add_argument("--set", metavar="KEY=VALUE", action="append",
                         dest="overrides", default=[],
                         help="dotted-path config override, e.g. params.omega0=2")
        cmd.add_argument("--seed", type=int, default=None, help="master RNG seed")
        cmd.add_argument("--out", metavar="DIR", default=None, help="run directory")
        cmd.add_argument("--threads", type=int, default=1,
                         help="worker threads (never affects results)")
        if name == "sweep":
            cmd.add_argument("--omega", metavar="START:STOP:POINTS",
                             default="0:2:201", help="frequency grid")
        if name == "bouncer":
            cmd.add_argument("--F0", type=float, default=None,
                             help="drive amplitude (shorthand for --set params.F0=...)")
            cmd.add_argument("--x0", type=float, default=0.0,
                             help="initial position")
            cmd.add_argument("--v0", type=float, default=0.0,
                             help="initial velocity")
    return parser


def main(argv: Optional[List[str]] = None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        overrides = list(args.overrides)
        if args.command == "bouncer" and args.F0 is not None:
            overrides.append(f"params.F0={args.F0!r}")
        cfg = parse_config(args.config, overrides)
        seed = cfg.resolve_seed(args.seed)
        run_dir = _prepare_run_dir(cfg, args.command, args.out, seed)
        if args.command == "bouncer":
            cmd_bouncer(cfg, run_dir, x0=args.x0, v0=args.v0)
        elif args.command == "walker":
            cmd_walker(cfg, run_dir, seed, args.threads)
        elif args.command == "ensemble":
            cmd_ensemble(cfg, run_dir, seed)
        elif args.command == "sweep":
            cmd_sweep(cfg, run_dir, args.omega)
        elif args.command == "verify":
            return cmd_verify(cfg, run_dir, seed, args.threads)
        return 0
    except SubqError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
