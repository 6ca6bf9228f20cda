"""Check results and the machine-readable verification report.

Tolerance policy (uniform across the suite):

- algebraic: relative error <= 1e-10
- deterministic-numeric: relative error <= 1e-6 (unless a check pins a
  tighter bound, e.g. the per-period power balance at 1e-8)
- statistical: |lhs - rhs| <= max(3 * stderr, 1e-12)
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Dict, List, Optional

ALGEBRAIC_RTOL = 1e-10
NUMERIC_RTOL = 1e-6
STAT_SIGMAS = 3.0
STAT_FLOOR = 1e-12

KINDS = ("algebraic", "deterministic-numeric", "statistical")

__all__ = [
    "CheckResult",
    "Report",
    "make_check",
    "ALGEBRAIC_RTOL",
    "NUMERIC_RTOL",
    "STAT_SIGMAS",
    "STAT_FLOOR",
]


def _rel_error(lhs: float, rhs: float) -> float:
    scale = max(abs(lhs), abs(rhs))
    if scale == 0.0:
        return 0.0
    return abs(lhs - rhs) / scale


@dataclass(frozen=True)
class CheckResult:
    """Outcome of one verified relation."""

    name: str
    kind: str
    lhs: float
    rhs: float
    abs_error: float
    rel_error: float
    stderr: Optional[float]
    tolerance: float
    passed: bool
    paper_anchor: str
    applicable: bool = True

    def to_dict(self) -> dict:
        return {
            "name": self.name,
            "kind": self.kind,
            "lhs": self.lhs,
            "rhs": self.rhs,
            "abs_error": self.abs_error,
            "rel_error": self.rel_error,
            "stderr": self.stderr,
            "tolerance": self.tolerance,
            "pass": self.passed,
            "paper_anchor": self.paper_anchor,
            "applicable": self.applicable,
        }


def make_check(
    name: str,
    kind: str,
    lhs: float,
    rhs: float,
    anchor: str,
    stderr: Optional[float] = None,
    rel_error: Optional[float] = None,
    tolerance: Optional[float] = None,
    applicable: bool = True,
) -> CheckResult:
    """Build a CheckResult applying the kind-appropriate criterion.

    rel_error may be overridden for composite checks whose verdict hinges
    on the worst of several sub-comparisons; lhs/rhs then echo the primary
    pair only.
    """
    if kind not in KINDS:
        raise ValueError(f"unknown check kind {kind!r}")
    abs_error = abs(lhs - rhs)
    rel = _rel_error(lhs, rhs) if rel_error is None else rel_error
    if not applicable:
        return CheckResult(name, kind, lhs, rhs, abs_error, rel, stderr,
                           tolerance if tolerance is not None else 0.0,
                           True, anchor, applicable=False)
    if kind == "statistical":
        if stderr is None:
            raise ValueError("statistical checks need a stderr")
        tol = STAT_SIGMAS * stderr if tolerance is None else tolerance
        passed = abs_error <= max(tol, STAT_FLOOR)
    else:
        tol = (ALGEBRAIC_RTOL if kind == "algebraic" else NUMERIC_RTOL)
        if tolerance is not None:
            tol = tolerance
        passed = rel <= tol
    return CheckResult(name, kind, lhs, rhs, abs_error, rel, stderr, tol,
                       passed, anchor)


@dataclass
class Report:
    """Full verification report: config echo, derived constants, checks."""

    config: dict
    derived: dict
    checks: List[CheckResult] = field(default_factory=list)
    timings_ms: Dict[str, float] = field(default_factory=dict)

    @property
    def overall_pass(self) -> bool:
        return all(c.passed for c in self.checks)

    def add(self, check: CheckResult, elapsed_ms: float = 0.0) -> None:
        self.checks.append(check)
        self.timings_ms[check.name] = elapsed_ms

    def to_dict(self) -> dict:
        return {
            "config": self.config,
            "derived": self.derived,
            "checks": [c.to_dict() for c in self.checks],
            "overall_pass": self.overall_pass,
            "timings_ms": self.timings_ms,
        }

    def to_json(self, indent: int = 2) -> str:
        return json.dumps(self.to_dict(), indent=indent, sort_keys=True)
