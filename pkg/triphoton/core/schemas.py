"""
Pydantic schemas for the domain types and file formats of the toolkit.
Mode and photon labels are 1-based everywhere outside the engines.
"""

from collections import Counter
from pathlib import Path
from typing import Any, Dict, Iterable, List, Literal, Optional, Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

from triphoton.core.errors import (
    ConfigurationError,
    DataFormatError,
    DegenerateInputError,
    DimensionError,
    GramValidationError,
    ParameterError,
)


# Base configuration for all schemas
class BaseSchema(BaseModel):
    """Base schema with common configuration"""
    model_config = ConfigDict(
        arbitrary_types_allowed=True,
        frozen=True,
        str_strip_whitespace=True,
    )


def _readonly(array: np.ndarray) -> np.ndarray:
    array = np.array(array, copy=True)
    array.setflags(write=False)
    return array


# Amplitudes and matrices
class ComplexAmplitude(BaseSchema):
    """Complex amplitude stored as rectangular parts"""
    re: float
    im: float

    @classmethod
    def from_complex(cls, value: complex) -> "ComplexAmplitude":
        return cls(re=float(np.real(value)), im=float(np.imag(value)))

    @classmethod
    def from_polar(cls, magnitude: float, phase: float) -> "ComplexAmplitude":
        """Build from magnitude and phase in radians"""
        if magnitude < 0:
            raise ParameterError(f"Magnitude must be nonnegative, got {magnitude}")
        return cls.from_complex(magnitude * np.exp(1j * phase))

    @property
    def value(self) -> complex:
        return complex(self.re, self.im)

    @property
    def magnitude(self) -> float:
        return float(np.hypot(self.re, self.im))

    @property
    def phase(self) -> float:
        return float(np.arctan2(self.im, self.re))

    @property
    def polar(self) -> Tuple[float, float]:
        return self.magnitude, self.phase


class TransferMatrix(BaseSchema):
    """Complex m x n mode-to-mode amplitude matrix (output rows, input columns), not necessarily unitary"""
    entries: np.ndarray

    @field_validator('entries', mode='before')
    @classmethod
    def validate_entries(cls, v):
        """Coerce to a finite, read-only complex 2-D array"""
        array = np.asarray(v, dtype=complex)
        if array.ndim != 2:
            raise DimensionError(f"Transfer matrix must be 2-D, got {array.ndim}-D")
        if array.shape[0] < 1 or array.shape[1] < 1:
            raise DimensionError(f"Transfer matrix must be at least 1x1, got {array.shape}")
        if not np.all(np.isfinite(array)):
            raise DimensionError("Transfer matrix entries must be finite")
        return _readonly(array)

    @classmethod
    def from_polar(
        cls,
        magnitudes: Any,
        phases_pi: Any,
        scale: float = 1.0,
    ) -> "TransferMatrix":
        """Build from magnitude and phase (in units of pi) grids and a global prefactor"""
        magnitudes = np.asarray(magnitudes, dtype=float)
        phases_pi = np.asarray(phases_pi, dtype=float)
        if magnitudes.shape != phases_pi.shape:
            raise DimensionError("Magnitude and phase grids differ in shape")
        if np.any(magnitudes < 0):
            raise ParameterError("Magnitudes must be nonnegative")
        return cls(entries=scale * magnitudes * np.exp(1j * np.pi * phases_pi))

    @property
    def rows(self) -> int:
        return int(self.entries.shape[0])

    @property
    def cols(self) -> int:
        return int(self.entries.shape[1])

    @property
    def shape(self) -> Tuple[int, int]:
        return self.rows, self.cols

    @property
    def magnitudes(self) -> np.ndarray:
        return np.abs(self.entries)

    @property
    def phases(self) -> np.ndarray:
        """Element phases in radians"""
        return np.angle(self.entries)

    def amplitude(self, output_mode: int, input_mode: int) -> ComplexAmplitude:
        """Element M_li with 1-based labels"""
        if not (1 <= output_mode <= self.rows and 1 <= input_mode <= self.cols):
            raise ConfigurationError(
                f"Element ({output_mode},{input_mode}) outside a {self.rows}x{self.cols} matrix"
            )
        return ComplexAmplitude.from_complex(self.entries[output_mode - 1, input_mode - 1])

    def column_power(self) -> np.ndarray:
        """Total output power per input mode"""
        return np.sum(np.abs(self.entries) ** 2, axis=0)


class PhotonConfiguration(BaseSchema):
    """Multiset of mode labels with occupation counts"""
    mode_occupations: Tuple[Tuple[int, int], ...]

    @field_validator('mode_occupations')
    @classmethod
    def validate_occupations(cls, v):
        """Sort by mode, reject duplicates and non-positive entries"""
        if not v:
            raise ConfigurationError("A photon configuration needs at least one photon")
        seen = set()
        for mode, occupation in v:
            if mode < 1:
                raise ConfigurationError(f"Mode labels are 1-based, got {mode}")
            if occupation < 1:
                raise ConfigurationError(f"Occupation of mode {mode} must be positive, got {occupation}")
            if mode in seen:
                raise ConfigurationError(f"Mode {mode} listed twice")
            seen.add(mode)
        return tuple(sorted((int(m), int(o)) for m, o in v))

    @classmethod
    def from_modes(cls, modes: Iterable[int]) -> "PhotonConfiguration":
        """Build from a list of mode labels, one per photon, e.g. [1, 1, 3]"""
        counts = Counter(int(m) for m in modes)
        return cls(mode_occupations=tuple(counts.items()))

    @property
    def total_photons(self) -> int:
        return sum(o for _, o in self.mode_occupations)

    @property
    def modes(self) -> Tuple[int, ...]:
        """Mode label of every photon, ascending, repeated per occupation"""
        return tuple(m for m, o in self.mode_occupations for _ in range(o))

    @property
    def occupations(self) -> Tuple[int, ...]:
        return tuple(o for _, o in self.mode_occupations)

    @property
    def is_collision_free(self) -> bool:
        return all(o == 1 for _, o in self.mode_occupations)

    def check_range(self, dimension: int, side: str = "mode") -> None:
        """Raise if any label exceeds the matrix dimension"""
        largest = self.mode_occupations[-1][0]
        if largest > dimension:
            raise ConfigurationError(f"{side} {largest} out of range 1..{dimension}")

    def __str__(self) -> str:
        return "{" + ",".join(str(m) for m in self.modes) + "}"


# Distinguishability
class WavepacketModel(BaseSchema):
    """Gaussian wavepackets of common coherence width with per-photon delays"""
    sigma_ps: float
    center_delays: Tuple[float, ...]

    @field_validator('sigma_ps')
    @classmethod
    def validate_sigma(cls, v):
        if not np.isfinite(v) or v <= 0:
            raise ParameterError(f"Coherence width must be finite and positive, got {v}")
        return float(v)

    @field_validator('center_delays')
    @classmethod
    def validate_delays(cls, v):
        if not all(np.isfinite(d) for d in v):
            raise ParameterError("Photon delays must be finite")
        return tuple(float(d) for d in v)


class GramMatrix(BaseSchema):
    """Hermitian overlap matrix of the photons' internal states"""
    entries: np.ndarray

    @field_validator('entries', mode='before')
    @classmethod
    def validate_entries(cls, v):
        """Enforce Hermitian, unit diagonal, bounded, positive semidefinite"""
        array = np.asarray(v, dtype=complex)
        if array.ndim != 2 or array.shape[0] != array.shape[1] or array.shape[0] < 1:
            raise GramValidationError(f"Gram matrix must be square, got shape {array.shape}")
        if not np.all(np.isfinite(array)):
            raise GramValidationError("Gram matrix entries must be finite")
        if not np.allclose(array, array.conj().T, rtol=0.0, atol=1e-12):
            raise GramValidationError("Gram matrix is not Hermitian")
        if not np.allclose(np.diag(array), 1.0, rtol=0.0, atol=1e-12):
            raise GramValidationError("Gram matrix diagonal must be 1")
        if np.any(np.abs(array) > 1.0 + 1e-12):
            raise GramValidationError("Gram overlaps must not exceed 1 in magnitude")
        if np.min(np.linalg.eigvalsh(array)) < -1e-10:
            raise GramValidationError("Gram matrix is not positive semidefinite")
        return _readonly(array)

    @classmethod
    def identity(cls, order: int) -> "GramMatrix":
        """Fully distinguishable photons"""
        return cls(entries=np.eye(order))

    @classmethod
    def ones(cls, order: int) -> "GramMatrix":
        """Identical photons"""
        return cls(entries=np.ones((order, order)))

    @property
    def order(self) -> int:
        return int(self.entries.shape[0])


class DelayScan(BaseSchema):
    """Coincidence rate or counts against relative delay for one input/output combination"""
    inputs: Tuple[int, ...] = ()
    outputs: Tuple[int, ...] = ()
    delays: np.ndarray
    values: np.ndarray
    integration_time_s: float = Field(60.0, gt=0)
    sigma_ps: Optional[float] = Field(None, gt=0)
    delayed_input: Optional[int] = None
    kind: Literal["hom", "threefold", "measured"] = "measured"

    @field_validator('delays', 'values', mode='before')
    @classmethod
    def validate_arrays(cls, v):
        array = np.asarray(v, dtype=float)
        if array.ndim != 1:
            raise DataFormatError("Delay scan columns must be 1-D")
        if not np.all(np.isfinite(array)):
            raise DataFormatError("Delay scan columns must be finite")
        return _readonly(array)

    @model_validator(mode='after')
    def validate_samples(self):
        """Delays strictly increasing, values nonnegative, equal lengths"""
        if self.delays.shape != self.values.shape:
            raise DataFormatError("Delay and value columns differ in length")
        if self.delays.size > 1 and np.any(np.diff(self.delays) <= 0):
            raise DataFormatError("Delays must be strictly increasing")
        if np.any(self.values < 0):
            raise DataFormatError("Scan values must be nonnegative")
        return self

    def with_values(self, values: Any) -> "DelayScan":
        """Copy with a new value column"""
        return self.model_copy(update={"values": _readonly(np.asarray(values, dtype=float))})


class ScanMetadata(BaseSchema):
    """Sidecar JSON written next to a delay scan CSV"""
    inputs: Tuple[int, ...] = ()
    outputs: Tuple[int, ...] = ()
    integration_time_s: float = Field(60.0, gt=0)
    sigma_ps: Optional[float] = Field(None, gt=0)
    delayed_input: Optional[int] = None
    kind: Literal["hom", "threefold", "measured"] = "measured"


# Tomography
class VisibilityRecord(BaseSchema):
    """Two-photon visibility for one input pair and one output pair"""
    inputs: Tuple[int, int]
    outputs: Tuple[int, int]
    value: float = Field(..., ge=-1.0, le=1.0)
    uncertainty: Optional[float] = Field(None, ge=0)
    c0: Optional[float] = Field(None, ge=0, description="Raw coincidence counts at zero delay")
    cinf: Optional[float] = Field(None, ge=0, description="Raw coincidence counts at large delay")

    @field_validator('inputs', 'outputs')
    @classmethod
    def validate_pair(cls, v):
        """Canonical ordering with distinct 1-based labels"""
        a, b = v
        if a < 1 or b < 1:
            raise ValueError("Mode labels are 1-based")
        if not a < b:
            raise ValueError(f"Pair {v} must be strictly increasing")
        return (int(a), int(b))

    @property
    def key(self) -> Tuple[int, int, int, int]:
        return self.inputs + self.outputs

    @property
    def has_raw_counts(self) -> bool:
        return self.c0 is not None and self.cinf is not None


class SinglesCounts(BaseSchema):
    """Single-photon counts, rows are output modes and columns input modes"""
    counts: np.ndarray

    @field_validator('counts', mode='before')
    @classmethod
    def validate_counts(cls, v):
        array = np.asarray(v, dtype=float)
        if array.ndim != 2 or array.size == 0:
            raise DimensionError(f"Singles counts must be a nonempty 2-D grid, got shape {array.shape}")
        if not np.all(np.isfinite(array)) or np.any(array < 0):
            raise DataFormatError("Singles counts must be finite and nonnegative")
        empty = [i + 1 for i in range(array.shape[1]) if not np.any(array[:, i] > 0)]
        if empty:
            raise DegenerateInputError(f"No counts recorded for input(s) {empty}")
        return _readonly(array)

    @property
    def shape(self) -> Tuple[int, int]:
        return tuple(self.counts.shape)


class PhaseSolution(BaseSchema):
    """Phase grid chosen by the sign search with its visibility residual"""
    phases: np.ndarray
    residual: float
    signs: Tuple[int, ...]


class TomographyResult(BaseSchema):
    """Reconstructed matrix with per-element spreads"""
    matrix: TransferMatrix
    amplitude_sigma: np.ndarray
    phase_sigma: np.ndarray = Field(..., description="Radians")
    resample_count: int = Field(0, ge=0)
    failed_resamples: int = Field(0, ge=0)
    residual: float = Field(0.0, ge=0)

    @field_validator('amplitude_sigma', 'phase_sigma', mode='before')
    @classmethod
    def validate_sigma(cls, v):
        array = np.asarray(v, dtype=float)
        if np.any(array < 0) or not np.all(np.isfinite(array)):
            raise DataFormatError("Sigma grids must be finite and nonnegative")
        return _readonly(array)

    @model_validator(mode='after')
    def validate_shapes(self):
        if self.amplitude_sigma.shape != self.matrix.shape or self.phase_sigma.shape != self.matrix.shape:
            raise DimensionError("Sigma grids must match the matrix shape")
        return self


# Fitting
class FitResult(BaseSchema):
    """Gaussian dip/peak fit C(d) = A (1 - V exp(-(d - d0)^2 / (2 w^2)))"""
    baseline: float = Field(..., gt=0, description="A, counts at large delay")
    visibility: float = Field(..., description="Model V; negative for peaks")
    center: float = Field(..., description="d0 in ps")
    width: float = Field(..., gt=0, description="w in ps")
    residual_rms: float = Field(..., ge=0)
    covariance_diag: Tuple[float, float, float, float]
    converged: bool
    mode: Literal["dip", "peak"]
    interference_visibility: float = Field(
        ..., description="Two-photon visibility for dips, three-photon visibility for peaks"
    )
    iterations: int = Field(0, ge=0)


# Design evaluation
class TargetSpec(BaseSchema):
    """Ideal target matrix for design scoring"""
    target: TransferMatrix
    label: str = "target"

    @field_validator('target')
    @classmethod
    def validate_unit_columns(cls, v):
        norms = np.linalg.norm(v.entries, axis=0)
        if not np.allclose(norms, 1.0, rtol=0.0, atol=1e-12):
            raise ParameterError(f"Target columns must have unit norm, got {norms.tolist()}")
        return v


# File formats
class MatrixFile(BaseSchema):
    """JSON matrix file: entries are [re, im] or [magnitude, phase in units of pi]"""
    rows: int = Field(..., ge=1)
    cols: int = Field(..., ge=1)
    polar: bool = False
    scale: float = Field(1.0, gt=0)
    entries: List[List[Tuple[float, float]]]

    @model_validator(mode='after')
    def validate_grid(self):
        if len(self.entries) != self.rows or any(len(row) != self.cols for row in self.entries):
            raise DimensionError(
                f"Entry grid does not match declared {self.rows}x{self.cols} shape"
            )
        return self


class TomographyResultFile(MatrixFile):
    """Matrix file extended with Monte Carlo spreads"""
    amplitude_sigma: List[List[float]]
    phase_sigma_pi_units: List[List[float]]
    resamples: int = Field(0, ge=0)
    failed_resamples: int = 0
    residual: float = 0.0


class RunManifest(BaseSchema):
    """Record of one CLI invocation written next to its outputs"""
    command: str
    inputs: Dict[str, str] = Field(default_factory=dict)
    parameters: Dict[str, Any] = Field(default_factory=dict)
    tool_version: str
    outputs: List[str] = Field(default_factory=list)

    @field_validator('inputs')
    @classmethod
    def validate_inputs_exist(cls, v):
        missing = [path for path in v.values() if not Path(path).exists()]
        if missing:
            raise DataFormatError(f"Input file(s) not found: {', '.join(missing)}")
        return v


# Generic Response Schemas
class ErrorResponse(BaseSchema):
    """Error response schema"""
    error: str
    detail: Optional[str] = None
    code: Optional[str] = None
