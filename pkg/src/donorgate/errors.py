"""Exception hierarchy.

Every error raised by the library derives from DonorgateError so callers can
catch at the package boundary. The harness maps these onto per-stage exit
codes.
"""


class DonorgateError(Exception):
    """Base class for all library errors."""


class InvalidSpecError(DonorgateError):
    """A lattice or scenario specification violates its invariants."""


class InvalidModelError(DonorgateError):
    """Donor-model parameters are unphysical (e.g. Coulombic binding <= 0)."""


class InsufficientRegionError(DonorgateError):
    """The enumerated region is too small for the requested shell count."""


class FitFailureError(DonorgateError):
    """Gaussian expansion fit did not reach the required residual."""

    def __init__(self, message: str, residual: float):
        super().__init__(message)
        self.residual = residual


class IllConditionedGeometryError(DonorgateError):
    """Two-center geometry with near-unit overlap; integrals unreliable."""


class DependencyError(DonorgateError):
    """A required upstream result (integrals, transitions) is missing."""


class DimensionError(DonorgateError):
    """Spin-system size exceeds the dense-matrix budget."""


class PreconditionError(DonorgateError):
    """An operation was called outside its documented preconditions."""


class NoCleanGateError(DonorgateError):
    """No gate time in the searched range disentangles the control.

    Carries the best candidate found so callers can inspect how close the
    search came.
    """

    def __init__(self, message: str, best_candidate=None):
        super().__init__(message)
        self.best_candidate = best_candidate


class ScenarioValidationError(DonorgateError):
    """Scenario file failed schema validation; `path` locates the offence."""

    def __init__(self, message: str, path: str = ""):
        super().__init__(f"{path}: {message}" if path else message)
        self.path = path


class StageError(DonorgateError):
    """Pipeline failure with stage attribution."""

    def __init__(self, stage: str, cause: Exception):
        super().__init__(f"stage '{stage}' failed: {cause}")
        self.stage = stage
        self.cause = cause
