"""Exception types shared across the package."""


class SubqError(Exception):
    """Base class for all package-specific errors."""


class NonPositiveParameter(SubqError):
    """A physical parameter that must be strictly positive is not."""

    def __init__(self, field: str, value):
        self.field = field
        self.value = value
        super().__init__(f"parameter {field!r} must be > 0, got {value!r}")


class CouplingMismatch(SubqError):
    """Canonical coupling requested but gamma or zeta contradicts 2*omega0."""


class StepTooLarge(SubqError):
    """Integration step exceeds the stability/accuracy guard."""


class NonFinite(SubqError):
    """Integrated state diverged to inf/nan."""


class NotSteadyState(SubqError):
    """A trajectory segment required to be in steady state is not."""


class WindowOutOfRange(SubqError):
    """A fit window lies outside the sampled range or starts too early."""


class TooFewSamples(SubqError):
    """An estimator needs more trajectories or grid points than supplied."""


class ConservationViolated(SubqError):
    """Total kinetic energy failed to stay constant across a series."""

    def __init__(self, t_worst: float, defect: float):
        self.t_worst = t_worst
        self.defect = defect
        super().__init__(
            f"energy conservation violated, worst defect {defect:.3e} at t={t_worst}"
        )


class ParseError(SubqError):
    """Config file or override could not be parsed."""
