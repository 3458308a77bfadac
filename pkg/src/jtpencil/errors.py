"""Exception types shared by every module.

Each error carries a machine-readable ``code`` and the process exit status the
command-line front end uses for it (2 for invalid input, 3 for numerical
failure).
"""


class PencilError(Exception):
    code = "pencil_error"
    exit_status = 2

    def __init__(self, message="", **details):
        super().__init__(message)
        self.details = details

    def to_dict(self):
        out = {"error": self.code, "message": str(self)}
        out.update({k: v for k, v in self.details.items() if v is not None})
        return out


class ValidationError(PencilError):
    code = "validation_error"


class NumericalError(PencilError):
    code = "numerical_error"
    exit_status = 3


class SchemaError(ValidationError):
    code = "schema_error"


class InvalidPencil(ValidationError):
    code = "invalid_pencil"


class GammaNotPositive(InvalidPencil):
    code = "gamma_not_positive"


class InvalidParameter(ValidationError):
    code = "invalid_parameter"


class TruncationExceeded(ValidationError):
    code = "truncation_exceeded"


class DegreeBudgetExceeded(ValidationError):
    code = "degree_budget_exceeded"


class MeasureMismatch(ValidationError):
    code = "measure_mismatch"


class SupportBoundViolated(ValidationError):
    code = "support_bound_violated"


class NotFiveDiagonal(ValidationError):
    code = "not_five_diagonal"


class MeasureDegenerate(NumericalError):
    code = "measure_degenerate"


class NumericalFailure(NumericalError):
    code = "numerical_failure"


class SeriesDivergent(NumericalError):
    code = "series_divergent"


class ResolventPole(NumericalError):
    code = "resolvent_pole"


class ContourNotConverged(NumericalError):
    code = "contour_not_converged"
