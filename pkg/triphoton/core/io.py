"""
Readers and writers for matrix JSON, delay-scan CSV, singles and visibility
CSV, tomography results, fit results and run manifests.

Phases in files are in units of pi; everything in memory is in radians.
"""

import json
import logging
from importlib import resources
from pathlib import Path
from typing import Iterable, List, Optional, Sequence, Type, TypeVar, Union

import numpy as np
import pandas as pd
from pydantic import BaseModel, ValidationError

from triphoton.core.errors import DataFormatError, DimensionError
from triphoton.core.schemas import (
    DelayScan,
    FitResult,
    MatrixFile,
    RunManifest,
    ScanMetadata,
    SinglesCounts,
    TomographyResult,
    TomographyResultFile,
    TransferMatrix,
    VisibilityRecord,
)

logger = logging.getLogger(__name__)

PathLike = Union[str, Path]
ModelT = TypeVar("ModelT", bound=BaseModel)

BUNDLED_DEVICE = "topology_optimized_tritter"

SCAN_COLUMNS = ("delay_ps", "value")
SINGLES_COLUMNS = ("output", "input", "counts")
VISIBILITY_COLUMNS = ("i", "j", "l", "m", "V", "sigma", "c0", "cinf")
_VISIBILITY_REQUIRED = VISIBILITY_COLUMNS[:5]


# JSON helpers

def _read_model(path: PathLike, model: Type[ModelT]) -> ModelT:
    path = Path(path)
    if not path.is_file():
        raise DataFormatError(f"File not found: {path}")
    text = path.read_text(encoding="utf-8")
    if not text.strip():
        raise DataFormatError(f"{path} is empty")
    try:
        return model.model_validate_json(text)
    except ValidationError as exc:
        raise DataFormatError(f"{path} is not a valid {model.__name__}", detail=str(exc)) from exc


def _write_text(path: PathLike, text: str) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(text, encoding="utf-8")
    return path


def write_json(payload: dict, path: PathLike) -> Path:
    return _write_text(path, json.dumps(payload, indent=2) + "\n")


# Matrices

def matrix_to_file(M: TransferMatrix, polar: bool = False, scale: float = 1.0) -> MatrixFile:
    """Entries divided by `scale`; polar phases in units of pi"""
    scaled = M.entries / scale
    if polar:
        cells = np.stack([np.abs(scaled), np.angle(scaled) / np.pi], axis=-1)
    else:
        cells = np.stack([scaled.real, scaled.imag], axis=-1)
    return MatrixFile(
        rows=M.rows,
        cols=M.cols,
        polar=polar,
        scale=scale,
        entries=[[tuple(float(x) for x in cell) for cell in row] for row in cells.tolist()],
    )


def matrix_from_file(document: MatrixFile) -> TransferMatrix:
    cells = np.asarray(document.entries, dtype=float)
    if document.polar:
        return TransferMatrix.from_polar(cells[..., 0], cells[..., 1], scale=document.scale)
    return TransferMatrix(entries=document.scale * (cells[..., 0] + 1j * cells[..., 1]))


def read_matrix(path: PathLike) -> TransferMatrix:
    return matrix_from_file(_read_model(path, MatrixFile))


def write_matrix(M: TransferMatrix, path: PathLike, polar: bool = False, scale: float = 1.0) -> Path:
    return _write_text(path, matrix_to_file(M, polar=polar, scale=scale).model_dump_json(indent=2))


def bundled_path(name: str = BUNDLED_DEVICE) -> Path:
    """Path of a matrix file shipped in triphoton/data"""
    resource = resources.files("triphoton.data").joinpath(f"{name}.json")
    if not resource.is_file():
        raise DataFormatError(f"No bundled matrix named {name!r}")
    return Path(str(resource))


def load_bundled_matrix(name: str = BUNDLED_DEVICE) -> TransferMatrix:
    return read_matrix(bundled_path(name))


def load_bundled_result(name: str = BUNDLED_DEVICE) -> TomographyResult:
    """Bundled matrix with its published per-element uncertainties"""
    return read_tomography_result(bundled_path(name))


# Tomography results

def write_tomography_result(result: TomographyResult, path: PathLike) -> Path:
    """Polar entries with a 1/sqrt(n) prefactor; amplitude sigmas in the same units"""
    scale = 1.0 / np.sqrt(result.matrix.cols)
    base = matrix_to_file(result.matrix, polar=True, scale=scale)
    document = TomographyResultFile(
        **base.model_dump(),
        amplitude_sigma=(result.amplitude_sigma / scale).tolist(),
        phase_sigma_pi_units=(result.phase_sigma / np.pi).tolist(),
        resamples=result.resample_count,
        failed_resamples=result.failed_resamples,
        residual=result.residual,
    )
    return _write_text(path, document.model_dump_json(indent=2))


def read_tomography_result(path: PathLike) -> TomographyResult:
    document = _read_model(path, TomographyResultFile)
    amplitude_sigma = np.asarray(document.amplitude_sigma, dtype=float) * document.scale
    phase_sigma = np.asarray(document.phase_sigma_pi_units, dtype=float) * np.pi
    return TomographyResult(
        matrix=matrix_from_file(document),
        amplitude_sigma=amplitude_sigma,
        phase_sigma=phase_sigma,
        resample_count=document.resamples,
        failed_resamples=document.failed_resamples,
        residual=document.residual,
    )


# CSV helpers

def _read_csv(path: PathLike, required: Sequence[str]) -> pd.DataFrame:
    path = Path(path)
    if not path.is_file():
        raise DataFormatError(f"File not found: {path}")
    try:
        frame = pd.read_csv(path, skipinitialspace=True)
    except pd.errors.EmptyDataError as exc:
        raise DataFormatError(f"{path} is empty") from exc
    except pd.errors.ParserError as exc:
        raise DataFormatError(f"{path} is not valid CSV", detail=str(exc)) from exc
    frame.columns = [str(column).strip() for column in frame.columns]
    missing = [column for column in required if column not in frame.columns]
    if missing:
        raise DataFormatError(
            f"{path} lacks column(s) {', '.join(missing)}; expected header {','.join(required)}"
        )
    if frame.empty:
        raise DataFormatError(f"{path} has a header but no rows")
    numeric = frame.apply(pd.to_numeric, errors="coerce")
    bad = [column for column in required if numeric[column].isna().any()]
    if bad:
        raise DataFormatError(f"{path}: non-numeric or empty values in column(s) {', '.join(bad)}")
    return numeric


def _write_csv(frame: pd.DataFrame, path: PathLike) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    frame.to_csv(path, index=False, lineterminator="\n", encoding="utf-8")
    return path


def _labels(frame: pd.DataFrame, columns: Sequence[str], path: PathLike) -> np.ndarray:
    values = frame[list(columns)].to_numpy(dtype=float)
    if not np.all(values == np.round(values)) or np.any(values < 1):
        raise DataFormatError(f"{path}: mode labels in {', '.join(columns)} must be positive integers")
    return values.astype(int)


# Delay scans

def scan_metadata_path(path: PathLike) -> Path:
    path = Path(path)
    return path.with_name(path.stem + ".meta.json")


def write_scan(scan: DelayScan, path: PathLike) -> Path:
    """CSV `delay_ps,value` plus the `.meta.json` sidecar"""
    frame = pd.DataFrame({"delay_ps": scan.delays, "value": scan.values})
    written = _write_csv(frame, path)
    metadata = ScanMetadata(
        inputs=scan.inputs,
        outputs=scan.outputs,
        integration_time_s=scan.integration_time_s,
        sigma_ps=scan.sigma_ps,
        delayed_input=scan.delayed_input,
        kind=scan.kind,
    )
    _write_text(scan_metadata_path(path), metadata.model_dump_json(indent=2))
    return written


def read_scan(path: PathLike) -> DelayScan:
    """Scan CSV; the sidecar is optional and defaults to an unlabeled measured scan"""
    frame = _read_csv(path, SCAN_COLUMNS)
    sidecar = scan_metadata_path(path)
    metadata = _read_model(sidecar, ScanMetadata) if sidecar.is_file() else ScanMetadata()
    return DelayScan(
        delays=frame["delay_ps"].to_numpy(dtype=float),
        values=frame["value"].to_numpy(dtype=float),
        **metadata.model_dump(),
    )


# Singles

def read_singles(path: PathLike) -> SinglesCounts:
    """Long-format `output,input,counts` into a full output x input grid"""
    frame = _read_csv(path, SINGLES_COLUMNS)
    labels = _labels(frame, ("output", "input"), path)
    rows, cols = labels[:, 0].max(), labels[:, 1].max()
    grid = np.full((rows, cols), np.nan)
    for (output, input_mode), counts in zip(labels, frame["counts"].to_numpy(dtype=float)):
        if not np.isnan(grid[output - 1, input_mode - 1]):
            raise DataFormatError(f"{path}: duplicate singles entry for output {output}, input {input_mode}")
        grid[output - 1, input_mode - 1] = counts
    if np.isnan(grid).any():
        absent = [(l + 1, i + 1) for l, i in zip(*np.nonzero(np.isnan(grid)))]
        raise DimensionError(f"{path}: singles grid incomplete, missing (output, input) {absent}")
    return SinglesCounts(counts=grid)


def write_singles(counts: SinglesCounts, path: PathLike) -> Path:
    rows, cols = counts.shape
    outputs, inputs = np.meshgrid(np.arange(1, rows + 1), np.arange(1, cols + 1), indexing="ij")
    frame = pd.DataFrame({
        "output": outputs.ravel(),
        "input": inputs.ravel(),
        "counts": counts.counts.ravel(),
    })
    return _write_csv(frame, path)


# Visibilities

def _optional(value: float) -> Optional[float]:
    return None if pd.isna(value) else float(value)


def read_visibilities(path: PathLike) -> List[VisibilityRecord]:
    """`i,j,l,m,V[,sigma,c0,cinf]`; empty optional cells read as absent"""
    frame = _read_csv(path, _VISIBILITY_REQUIRED)
    for column in VISIBILITY_COLUMNS[5:]:
        if column not in frame.columns:
            frame[column] = np.nan
    labels = _labels(frame, ("i", "j", "l", "m"), path)
    records = []
    try:
        for (i, j, l, m), row in zip(labels, frame.itertuples(index=False)):
            records.append(
                VisibilityRecord(
                    inputs=(i, j),
                    outputs=(l, m),
                    value=float(row.V),
                    uncertainty=_optional(row.sigma),
                    c0=_optional(row.c0),
                    cinf=_optional(row.cinf),
                )
            )
    except ValidationError as exc:
        raise DataFormatError(f"{path}: invalid visibility record", detail=str(exc)) from exc
    return records


def write_visibilities(records: Iterable[VisibilityRecord], path: PathLike) -> Path:
    rows = [
        {
            "i": r.inputs[0], "j": r.inputs[1], "l": r.outputs[0], "m": r.outputs[1],
            "V": r.value, "sigma": r.uncertainty, "c0": r.c0, "cinf": r.cinf,
        }
        for r in sorted(records, key=lambda r: r.key)
    ]
    return _write_csv(pd.DataFrame(rows, columns=list(VISIBILITY_COLUMNS)), path)


# Fits and manifests

def write_fit_result(result: FitResult, path: PathLike) -> Path:
    return _write_text(path, result.model_dump_json(indent=2))


def read_fit_result(path: PathLike) -> FitResult:
    return _read_model(path, FitResult)


def manifest_path(out: PathLike) -> Path:
    return Path(str(out) + ".manifest.json")


def write_manifest(manifest: RunManifest, out: PathLike) -> Path:
    """`<out>.manifest.json` next to the primary output"""
    path = _write_text(manifest_path(out), manifest.model_dump_json(indent=2))
    logger.debug("Manifest written to %s", path)
    return path


def read_manifest(path: PathLike) -> RunManifest:
    return _read_model(path, RunManifest)
