"""Exception hierarchy shared across the toolkit.

Every error raised by library code derives from GridsweepError so the CLI
can map domain failures to a single exit code. Messages always name the
offending entity (tower id, span id, action index, field path) so they can
be surfaced verbatim.
"""


class GridsweepError(Exception):
    """Base class for all domain errors."""


class SchemaError(GridsweepError):
    """A file failed structural validation (bad JSON, wrong keys, bad types)."""


class GridError(GridsweepError):
    """A grid violates its invariants (dangling reference, raster too small, ...)."""


class RasterBoundsError(GridError):
    """A queried point or segment leaves the terrain raster extent."""


class AltitudeError(GridsweepError):
    """No legal transit altitude exists for a segment (AGL ceiling breached)."""


class NotWingedError(GridsweepError):
    """A winged-only operation was requested for a multirotor."""


class StallError(GridsweepError):
    """A winged platform was asked to fly slower than its stall speed."""


class WindError(GridsweepError):
    """Wind makes a leg unflyable (cross component at or above airspeed)."""


class ZeroHarvestError(GridsweepError):
    """A charge was requested at a station that harvests no power."""


class PlanningError(GridsweepError):
    """Base class for planner failures."""


class InfeasibleTaskError(PlanningError):
    """No platform in the fleet is compatible with a task."""


class UnreachableTaskError(PlanningError):
    """A task admits no energy-feasible route even with recharging."""


class NoReachableStationError(PlanningError):
    """A route runs out of energy and no charging station is reachable."""


class OracleLimitError(GridsweepError):
    """The exact solver was given an instance above its enumeration guard."""


class SimulationError(GridsweepError):
    """A plan cannot be executed against the given grid/scenario."""


class DigestMismatchError(GridsweepError):
    """Artifacts passed to the report writer were produced from different inputs."""
