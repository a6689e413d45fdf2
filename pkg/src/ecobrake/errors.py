"""Exception hierarchy shared by the planning modules."""


class PlanningError(Exception):
    """Base class for all errors raised by ecobrake."""


class NonPositiveResistance(PlanningError):
    """Constant resistance deceleration is not strictly positive (downhill)."""


class MissingCommand(PlanningError):
    """A braking mode was queried without a braking command."""


class VelocityUnderflow(PlanningError):
    """A coasting phase would bring the vehicle to rest before the query time."""


class DegenerateDenominator(PlanningError):
    """A closed-form braking expression hit a vanishing denominator."""


class DomainError(PlanningError):
    """A closed-form expression was evaluated outside its real domain."""


class NonFiniteState(PlanningError):
    """An integrator step produced a non-finite value."""


class NoConvergence(PlanningError):
    """An iterative solver ran out of iterations.

    ``best`` holds the best iterate found so far (may be None).
    """

    def __init__(self, message, best=None):
        super().__init__(message)
        self.best = best


class SingularJacobian(PlanningError):
    """The Newton system could not be solved."""


class Infeasible(PlanningError):
    """Constraint violation stagnated in the NLP solver."""


class NegativeDiscriminant(PlanningError):
    """The terminal costate condition has no real root."""


class DegenerateTimes(PlanningError):
    """Engaged coasting has zero length so the distance costate is undefined."""


class InfeasibleOrdering(PlanningError):
    """Converged switching times violate 0 <= t_s1 <= t_s2 <= t_f."""

    def __init__(self, message, times=None):
        super().__init__(message)
        self.times = times


class ScenarioError(PlanningError):
    """Invalid scenario data (bad field, missing block, violated invariant)."""
