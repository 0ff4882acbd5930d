"""Exception types raised by the solver and diagnostics."""


class VacEulerError(Exception):
    """Base class for all package errors."""


class FieldError(VacEulerError, ValueError):
    """Field has the wrong shape or contains NaN/Inf."""


class DimensionError(VacEulerError, ValueError):
    """Operation is not defined for the slab dimension."""


class SingularJacobian(VacEulerError):
    """det(D eta) fell to (or below) the singular threshold somewhere."""

    def __init__(self, node, value):
        self.node = tuple(int(i) for i in node)
        self.value = float(value)
        super().__init__(f"J = {self.value:.6g} at node {self.node}")


class NotPhysicalVacuum(VacEulerError):
    """rho0 does not vanish on the top boundary with negative normal slope."""


class InteriorVacuum(VacEulerError):
    """rho0 <= 0 at an interior node."""


class BottomBCViolation(VacEulerError):
    """Vertical velocity is nonzero on the fixed bottom boundary."""


class CFLViolation(VacEulerError):
    """Requested time step exceeds the CFL limit."""

    def __init__(self, dt, dt_max):
        self.dt = float(dt)
        self.dt_max = float(dt_max)
        super().__init__(f"dt = {self.dt:.6g} exceeds CFL limit {self.dt_max:.6g}")


class StackOverflowOrder(VacEulerError, ValueError):
    """Requested time-derivative stack depth is above the supported maximum."""


class ConfigError(VacEulerError, ValueError):
    """Run configuration could not be parsed or validated."""
