"""Exception hierarchy shared by every module of the package."""


class BlochThermoError(ValueError):
    """Base class for all domain errors raised by this package."""


class NonPhysicalState(BlochThermoError):
    """Bloch vector outside the unit ball beyond round-off tolerance."""


class NonPhysicalMatrix(BlochThermoError):
    """Matrix is not a valid qubit density operator."""


class ZeroBlochVector(BlochThermoError):
    """Direction-dependent quantity requested at the centre of the ball."""


class InvalidField(BlochThermoError):
    """Local field with vanishing magnitude."""


class OutOfPlane(BlochThermoError):
    """State is not in the b_x = 0 plane required by a stroke."""


class InvalidTarget(BlochThermoError):
    """Target modulus unreachable by the requested radial stroke."""


class NegativeBranch(BlochThermoError):
    """Path enters the cos(theta) <= 0 (negative temperature) region."""


class StepTooLarge(BlochThermoError):
    """Integrator step exceeds the requested duration."""


class DegenerateTrajectory(BlochThermoError):
    """Trajectory with too few samples to integrate."""


class ZeroTemperature(BlochThermoError):
    """Effective temperature vanishes (or diverges) somewhere on a path."""


class InvalidSpec(BlochThermoError):
    """Cycle parameters violate their invariants.

    ``field`` names the offending parameter so front ends can point at it.
    """

    def __init__(self, message, field=None):
        super().__init__(message)
        self.field = field


class InfeasibleGeometry(InvalidSpec):
    """Carnot parameters imply a cosine outside (0, 1]."""


class MissingReservoir(BlochThermoError):
    """Heat-exchanging stroke has no reservoir temperature attached."""
