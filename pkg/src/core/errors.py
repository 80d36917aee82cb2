"""
Exception hierarchy for ArmHold.

Every error raised on purpose by the library derives from ArmHoldError so the CLI
can map it to an exit code in one place.
"""

from typing import Optional, Sequence


class ArmHoldError(Exception):
    """Base class for all library errors."""


class ModelError(ArmHoldError, ValueError):
    """Malformed robot description: bad counts, negative parameters, non-unit axes."""


class DimensionError(ArmHoldError, ValueError):
    """A vector or matrix has the wrong size or contains non-finite values."""


class SingularTaskError(ArmHoldError):
    """Task-space operation requested on a chain that cannot span the 3D task."""


class ScenarioError(ArmHoldError, ValueError):
    """Scenario document cannot be parsed or violates its invariants."""


class ObserverStateError(ArmHoldError, RuntimeError):
    """An observer state was reused across runs without a reset."""


class SimulationDiverged(ArmHoldError, RuntimeError):
    """Divergence guard tripped during integration."""

    def __init__(self, t: float, qd: Optional[Sequence[float]] = None, limit: float = 0.0):
        self.t = t
        self.qd = list(qd) if qd is not None else []
        self.limit = limit
        peak = max((abs(v) for v in self.qd), default=float("nan"))
        super().__init__(
            f"simulation diverged at t={t:.4f} s: max |qd| = {peak:.3g} rad/s exceeds {limit:g} rad/s"
        )

    def __reduce__(self):
        # rebuilt from the fields when raised inside a worker process
        return (self.__class__, (self.t, self.qd, self.limit))


class DegenerateChordError(ArmHoldError, ValueError):
    """Straightness requested for a start point that coincides with the target."""


class ComparisonError(ArmHoldError):
    """Paired runs cannot be compared (schedules differ or a precondition fails)."""


class PlotSelectionError(ArmHoldError, ValueError):
    """Unknown plot-data selection key."""


class DegenerateReachError(ArmHoldError, ValueError):
    """A reach starts at its target, so the phase argument is undefined."""
