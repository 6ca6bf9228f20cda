"""Run configuration: TOML file ingestion, defaults, dotted-path overrides.

Four blocks mirror the pipeline: [params] (physical parameters),
[run] (seed, ensemble size, step, fit window), [ensemble] (Gaussian beam
preparation) and [output] (directory, precision).  Every field has a
default; the built-in default configuration is the canonical natural-unit
set m = 1, omega0 = 1, hbar target 1 (so gamma = zeta = 2, F0 = 4).
"""

from __future__ import annotations

import ast
import dataclasses
import math
import os
from dataclasses import dataclass, field, fields
from typing import List, Optional, Sequence, Tuple

try:
    import tomllib  # py >= 3.11
except ModuleNotFoundError:  # pragma: no cover
    import tomli as tomllib

from subq.constants import (
    DerivedConstants,
    PhysicalParams,
    canonical_params,
    derive_constants,
    validate_params,
)
from subq.errors import ParseError

__all__ = ["RunConfig", "parse_config", "DEFAULT_SEED"]

DEFAULT_SEED = 42
SEED_ENV_VAR = "SUBQ_SEED"


@dataclass
class ParamsBlock:
    m: float = 1.0
    omega0: float = 1.0
    gamma: Optional[float] = None
    zeta: Optional[float] = None
    F0: Optional[float] = None
    n_dof: int = 1
    canonical_coupling: bool = True
    hbar_target: float = 1.0
    # Bath kinetic energy per DOF; only used in free (non-canonical) mode.
    e_zp: float = 0.5


@dataclass
class RunBlock:
    seed: Optional[int] = None
    ensemble_size: int = 10_000
    # Integration step; None means tau/1000.
    dt: Optional[float] = None
    t_end: float = 10.0
    # Burn-in duration in units of the relaxation time 1/zeta.
    burn_in: float = 10.0
    fit_window: Tuple[float, float] = (2.5, 10.0)
    # Period count n labelling the work-matching comparison (n >> 1).
    work_periods: int = 100
    # Initial velocity of the relaxation ensemble.
    relax_u0: float = 2.0


@dataclass
class EnsembleBlock:
    sigma0: float = 1.0
    x0: float = 0.0
    v_conv: float = 0.0
    M: int = 100_000
    time_grid: List[float] = field(default_factory=lambda: [0.0, 1.0, 2.0, 5.0])
    sigma0_scan: List[float] = field(default_factory=lambda: [0.5, 1.0, 2.0])


@dataclass
class OutputBlock:
    directory: str = "runs"
    precision: int = 17


_BLOCKS = {
    "params": ParamsBlock,
    "run": RunBlock,
    "ensemble": EnsembleBlock,
    "output": OutputBlock,
}


@dataclass
class RunConfig:
    params: ParamsBlock = field(default_factory=ParamsBlock)
    run: RunBlock = field(default_factory=RunBlock)
    ensemble: EnsembleBlock = field(default_factory=EnsembleBlock)
    output: OutputBlock = field(default_factory=OutputBlock)

    def physical_params(self) -> PhysicalParams:
        b = self.params
        if b.canonical_coupling and b.F0 is None:
            p = canonical_params(b.m, b.omega0, hbar_target=b.hbar_target, n_dof=b.n_dof)
            # explicit gamma/zeta must not contradict the canonical values
            for name in ("gamma", "zeta"):
                given = getattr(b, name)
                if given is not None and given != p.gamma:
                    return validate_params(
                        PhysicalParams(m=b.m, omega0=b.omega0, F0=p.F0,
                                       gamma=b.gamma, zeta=b.zeta, n_dof=b.n_dof,
                                       canonical_coupling=True)
                    )
            return p
        if b.F0 is None:
            raise ParseError("free (non-canonical) mode requires params.F0")
        return validate_params(
            PhysicalParams(
                m=b.m, omega0=b.omega0, F0=b.F0, gamma=b.gamma, zeta=b.zeta,
                n_dof=b.n_dof, canonical_coupling=b.canonical_coupling,
            )
        )

    def derived(self) -> DerivedConstants:
        p = self.physical_params()
        if p.canonical_coupling:
            return derive_constants(p)
        return derive_constants(p, e_zp=self.params.e_zp)

    def resolved_dt(self) -> float:
        if self.run.dt is not None:
            return self.run.dt
        return (2.0 * math.pi / self.params.omega0) / 1000.0

    def resolve_seed(self, cli_seed: Optional[int] = None) -> int:
        """Seed precedence: CLI flag > config value > SUBQ_SEED env > 42."""
        if cli_seed is not None:
            return cli_seed
        if self.run.seed is not None:
            return self.run.seed
        env = os.environ.get(SEED_ENV_VAR)
        if env is not None:
            try:
                return int(env)
            except ValueError as exc:
                raise ParseError(f"{SEED_ENV_VAR}={env!r} is not an integer") from exc
        return DEFAULT_SEED

    def to_dict(self) -> dict:
        out = {}
        for name, block in (("params", self.params), ("run", self.run),
                            ("ensemble", self.ensemble), ("output", self.output)):
            d = dataclasses.asdict(block)
            if isinstance(d.get("fit_window"), tuple):
                d["fit_window"] = list(d["fit_window"])
            out[name] = d
        return out

    @classmethod
    def from_dict(cls, data: dict) -> "RunConfig":
        cfg = cls()
        for block_name, values in data.items():
            if block_name not in _BLOCKS:
                raise ParseError(f"unknown config block {block_name!r}")
            if not isinstance(values, dict):
                raise ParseError(f"config block {block_name!r} must be a table")
            block = getattr(cfg, block_name)
            known = {f.name for f in fields(block)}
            for key, val in values.items():
                if key not in known:
                    raise ParseError(f"unknown config key {block_name}.{key}")
                if key == "fit_window":
                    val = tuple(val)
                setattr(block, key, val)
        return cfg


def _coerce(text: str):
    lowered = text.lower()
    if lowered in ("true", "false"):
        return lowered == "true"
    try:
        return ast.literal_eval(text)
    except (ValueError, SyntaxError):
        return text


def parse_config(
    path: Optional[str] = None,
    overrides: Sequence[str] = (),
) -> RunConfig:
    """Load a TOML config (or defaults) and apply `key=value` overrides.

    Overrides use dotted paths, e.g. ``params.omega0=2``; values are
    parsed as Python literals.  Unknown blocks or keys raise ParseError.
    """
    data: dict = {}
    if path is not None:
        try:
            with open(path, "rb") as fh:
                data = tomllib.load(fh)
        except FileNotFoundError:
            raise ParseError(f"config file not found: {path}")
        except tomllib.TOMLDecodeError as exc:
            raise ParseError(f"invalid TOML in {path}: {exc}") from exc
    cfg = RunConfig.from_dict(data)

    for item in overrides:
        if "=" not in item:
            raise ParseError(f"override {item!r} must look like block.key=value")
        dotted, _, raw = item.partition("=")
        parts = dotted.strip().split(".")
        if len(parts) != 2:
            raise ParseError(f"override key {dotted!r} must be block.key")
        block_name, key = parts
        if block_name not in _BLOCKS:
            raise ParseError(f"unknown config block {block_name!r}")
        block = getattr(cfg, block_name)
        if key not in {f.name for f in fields(block)}:
            raise ParseError(f"unknown config key {block_name}.{key}")
        val = _coerce(raw.strip())
        if key == "fit_window":
            val = tuple(val)
        setattr(block, key, val)
    return cfg
