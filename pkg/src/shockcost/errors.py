"""Exception hierarchy for shockcost.

All numerical / modelling failures derive from ShockCostError so the CLI can
map them to a single exit code.  Scenario validation problems use
ScenarioError instead (bad input, not bad mathematics).
"""


class ShockCostError(Exception):
    """Base class for numerical and modelling failures."""


class QuadratureFailure(ShockCostError):
    """Adaptive quadrature did not reach the requested tolerance."""


class DomainError(ShockCostError):
    """Evaluation outside the admissible state range, e.g. sigma <= 0."""


class DegenerateFlux(ShockCostError):
    """The flux has a vanishing second derivative on a whole subinterval."""


class WindowViolation(ShockCostError):
    """A trace left the convexity window the operation assumed."""


class NonMonotoneSpeeds(ShockCostError):
    """A Riemann fan came out with non-increasing speeds."""


class EventBudgetExceeded(ShockCostError):
    """Front tracking exceeded the collision-event budget."""


class MismatchedInterface(ShockCostError):
    """Two stages were glued along profiles that do not agree."""


class InfeasibleParams(ShockCostError):
    """Connector parameters fail one of the feasibility conditions."""


class StallError(ShockCostError):
    """A boundary curve stopped making progress (degenerate riding)."""


class NotReached(ShockCostError):
    """A decay run did not hit its target distance within the time horizon."""


class ScenarioError(Exception):
    """Malformed or inconsistent scenario input (CLI exit code 2)."""
