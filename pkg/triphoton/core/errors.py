"""
Exception hierarchy for the triphoton toolkit.

Every error carries a short machine-readable ``code`` and the process exit
code the CLI reports for it: 2 for malformed input, 3 for numerical failure.
"""

from typing import Iterable, Optional, Tuple


class TriphotonError(Exception):
    """Base class for all toolkit errors"""

    code = "triphoton_error"
    exit_code = 1

    def __init__(self, message: str, detail: Optional[str] = None):
        super().__init__(message)
        self.message = message
        self.detail = detail


# Input / format errors (exit code 2)

class FormatError(TriphotonError):
    code = "format_error"
    exit_code = 2


class DimensionError(FormatError):
    code = "dimension_error"


class ConfigurationError(FormatError):
    """Photon configuration does not fit the matrix or its partner configuration"""
    code = "configuration_error"


class UnsupportedConfigurationError(FormatError):
    code = "unsupported_configuration"


class GramValidationError(FormatError):
    code = "gram_validation_error"


class ParameterError(FormatError):
    code = "parameter_error"


class PairingError(FormatError):
    code = "pairing_error"


class DataFormatError(FormatError):
    code = "data_format_error"


class MissingRecordsError(FormatError):
    """Visibility records required for reconstruction are absent"""

    code = "missing_records"

    def __init__(self, missing: Iterable[Tuple[int, int, int, int]]):
        self.missing = sorted(set(missing))
        keys = ", ".join(f"({i},{j},{l},{m})" for i, j, l, m in self.missing)
        super().__init__(
            f"Missing visibility records for (i,j,l,m): {keys}",
            detail=keys,
        )


# Numerical errors (exit code 3)

class NumericalError(TriphotonError):
    code = "numerical_error"
    exit_code = 3


class SizeLimitError(NumericalError):
    code = "size_limit"


class UndefinedVisibilityError(NumericalError):
    code = "undefined_visibility"


class DegenerateInputError(NumericalError):
    code = "degenerate_input"


class IndeterminatePhaseError(NumericalError):
    code = "indeterminate_phase"


class InconsistentDataError(NumericalError):
    code = "inconsistent_data"


class InsufficientDataError(NumericalError):
    code = "insufficient_data"


class DegenerateFitError(NumericalError):
    code = "degenerate_fit"


class InstabilityError(NumericalError):
    """Too many resamples failed to reconstruct or refit"""
    code = "instability"
