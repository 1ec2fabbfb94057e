"""
Gaussian dip and peak fits of delay scans.

Model: C(d) = A (1 - V exp(-(d - d0)^2 / (2 w^2))). Dips have V > 0 and
give the two-photon visibility directly; peaks have V < 0 and give the
three-photon visibility V / (1 - V).
"""

import logging
from typing import Literal, Optional, Tuple

import numpy as np
import scipy.linalg as la
from pydantic import ValidationError

from triphoton.core.config import settings
from triphoton.core.errors import (
    DataFormatError,
    DegenerateFitError,
    InstabilityError,
    InsufficientDataError,
    NumericalError,
    ParameterError,
    UndefinedVisibilityError,
)
from triphoton.core.parallel import map_ordered
from triphoton.core.schemas import DelayScan, FitResult
from triphoton.core.seeding import spawn_generators

logger = logging.getLogger(__name__)

MIN_SAMPLES = 5
INITIAL_DAMPING = 1e-3
MAX_DAMPING = 1e12

FitMode = Literal["dip", "peak", "auto"]


def gaussian_model(delays: np.ndarray, params: np.ndarray) -> np.ndarray:
    baseline, visibility, center, width = params
    return baseline * (1.0 - visibility * np.exp(-((delays - center) ** 2) / (2.0 * width ** 2)))


def _jacobian(delays: np.ndarray, params: np.ndarray) -> np.ndarray:
    """Partial derivatives of the model in (A, V, d0, w) order"""
    baseline, visibility, center, width = params
    offset = delays - center
    g = np.exp(-(offset ** 2) / (2.0 * width ** 2))
    jac = np.empty((delays.size, 4))
    jac[:, 0] = 1.0 - visibility * g
    jac[:, 1] = -baseline * g
    jac[:, 2] = -baseline * visibility * g * offset / width ** 2
    jac[:, 3] = -baseline * visibility * g * offset ** 2 / width ** 3
    return jac


def initial_guess(scan: DelayScan, mode: FitMode = "auto") -> Tuple[np.ndarray, str]:
    """
    A from the two largest-|d| samples, d0 at the extremum, V from the
    extremum/baseline ratio and w a quarter of the delay span.
    """
    if mode not in ("dip", "peak", "auto"):
        raise ParameterError(f"Fit mode must be dip, peak or auto, got {mode!r}")
    delays, values = scan.delays, scan.values
    if delays.size < MIN_SAMPLES:
        raise InsufficientDataError(f"Need at least {MIN_SAMPLES} samples to fit, got {delays.size}")

    edges = np.argsort(np.abs(delays))[-2:]
    baseline = float(values[edges].mean())
    if baseline <= 0:
        raise DegenerateFitError("Large-delay samples are zero; no baseline to fit against")
    if mode == "auto":
        mode = "dip" if baseline - values.min() >= values.max() - baseline else "peak"
    extremum = int(np.argmin(values) if mode == "dip" else np.argmax(values))
    center = float(delays[extremum])
    width = float(delays[-1] - delays[0]) / 4.0
    visibility = 1.0 - float(values[extremum]) / baseline

    if np.max(np.abs(delays - center)) < 2.0 * width:
        raise InsufficientDataError("Scan does not reach twice the initial width from the extremum")
    return np.array([baseline, visibility, center, width]), mode


class GaussianFitter:
    """Levenberg-Marquardt fit of one delay scan, projected onto a parameter box."""

    def __init__(self, scan: DelayScan, poisson_weights: bool = False):
        self.scan = scan
        self.delays, self.values = scan.delays, scan.values
        self.weights = (
            1.0 / np.sqrt(np.maximum(self.values, 1.0)) if poisson_weights else np.ones_like(self.values)
        )
        self.max_iter = settings.FIT_MAX_ITER
        self.tol = settings.FIT_TOL
        self.lower: Optional[np.ndarray] = None
        self.upper: Optional[np.ndarray] = None

    def _parameter_bounds(self) -> Tuple[np.ndarray, np.ndarray]:
        """(A, V, d0, w): d0 inside the scanned range, w between half the finest step and the span"""
        span = float(self.delays[-1] - self.delays[0])
        step = float(np.min(np.diff(self.delays)))
        lower = np.array([np.finfo(float).tiny, -np.inf, float(self.delays[0]), 0.5 * step])
        upper = np.array([np.inf, np.inf, float(self.delays[-1]), span])
        return lower, upper

    def _weighted_residual(self, params: np.ndarray) -> np.ndarray:
        return self.weights * (self.values - gaussian_model(self.delays, params))

    def _weighted_jacobian(self, params: np.ndarray, free: np.ndarray) -> np.ndarray:
        return self.weights[:, None] * _jacobian(self.delays, params)[:, free]

    def _minimize(self, params: np.ndarray, free: np.ndarray) -> Tuple[np.ndarray, bool, int]:
        """Damped Gauss-Newton with Marquardt diagonal scaling over the `free` parameters"""
        params = np.clip(params, self.lower, self.upper)
        damping = INITIAL_DAMPING
        residual = self._weighted_residual(params)
        cost = float(residual @ residual)
        converged = False
        iteration = 0

        for iteration in range(1, self.max_iter + 1):
            jac = self._weighted_jacobian(params, free)
            normal = jac.T @ jac
            gradient = jac.T @ residual
            scaling = np.maximum(np.diag(normal), 1e-12 * np.max(np.diag(normal)))

            step = None
            while damping <= MAX_DAMPING:
                try:
                    factor = la.cho_factor(normal + damping * np.diag(scaling), check_finite=False)
                except la.LinAlgError:
                    damping *= 10.0
                    continue
                trial = params.copy()
                trial[free] += la.cho_solve(factor, gradient, check_finite=False)
                trial = np.clip(trial, self.lower, self.upper)
                trial_residual = self._weighted_residual(trial)
                trial_cost = float(trial_residual @ trial_residual)
                if trial_cost <= cost:
                    step = trial - params
                    params, residual, cost = trial, trial_residual, trial_cost
                    damping = max(damping / 10.0, 1e-15)
                    break
                damping *= 10.0

            if step is None:
                # no downhill step left at any damping
                converged = True
                break
            if np.linalg.norm(step) <= self.tol * (np.linalg.norm(params) + self.tol):
                converged = True
                break

        return params, converged, iteration

    def _normal_inverse(self, params: np.ndarray, free: np.ndarray) -> Optional[np.ndarray]:
        jac = self._weighted_jacobian(params, free)
        normal = jac.T @ jac
        if not np.all(np.isfinite(normal)) or np.linalg.cond(normal) > 1.0 / np.finfo(float).eps:
            return None
        try:
            return la.inv(normal)
        except la.LinAlgError:
            return None

    def fit(self, mode: FitMode = "auto") -> FitResult:
        """
        When the data do not pin down d0 and w (a flat scan), A and V are
        refitted with d0 and w held at their initial guesses and those two get
        zero variance.
        """
        guess, resolved_mode = initial_guess(self.scan, mode)
        self.lower, self.upper = self._parameter_bounds()

        free = np.ones(4, dtype=bool)
        params, converged, iterations = self._minimize(guess, free)
        inverse = self._normal_inverse(params, free)
        if inverse is None:
            logger.warning("Center and width are unconstrained; refitting A and V with them held at the initial guess")
            free = np.array([True, True, False, False])
            params, converged, iterations = self._minimize(guess, free)
            inverse = self._normal_inverse(params, free)
            if inverse is None:
                raise DegenerateFitError("Normal equations are singular at the fitted parameters")
        if not converged:
            logger.warning("Gaussian fit stopped at the iteration cap (%d) without converging", iterations)

        residual = self.values - gaussian_model(self.delays, params)
        weighted = self.weights * residual
        variance = float(weighted @ weighted) / (self.delays.size - 4) if self.delays.size > 4 else 0.0
        covariance = np.zeros(4)
        covariance[free] = np.abs(np.diag(inverse)) * variance

        baseline, visibility, center, width = (float(p) for p in params)
        if resolved_mode == "dip":
            interference = visibility
        else:
            if visibility >= 1.0:
                raise UndefinedVisibilityError("Fitted peak has zero rate at its center")
            interference = visibility / (1.0 - visibility)

        logger.debug(
            "Fit %s: A=%.6g V=%.6g d0=%.6g w=%.6g after %d iterations",
            resolved_mode, baseline, visibility, center, width, iterations,
        )
        return FitResult(
            baseline=baseline,
            visibility=visibility,
            center=center,
            width=abs(width),
            residual_rms=float(np.sqrt(np.mean(residual ** 2))),
            covariance_diag=tuple(float(v) for v in covariance),
            converged=converged,
            mode=resolved_mode,
            interference_visibility=interference,
            iterations=iterations,
        )


def fit_gaussian(
    scan: DelayScan,
    mode: FitMode = "auto",
    poisson_weights: bool = False,
) -> FitResult:
    """Least-squares Gaussian fit; optional 1/sqrt(counts) weights"""
    return GaussianFitter(scan, poisson_weights=poisson_weights).fit(mode)


def visibility_uncertainty(
    scan: DelayScan,
    resamples: Optional[int] = None,
    seed: Optional[int] = None,
    mode: FitMode = "auto",
) -> Tuple[float, float]:
    """Mean and standard deviation of the fitted visibility over Poisson resamples of the counts"""
    resamples = settings.RESAMPLES if resamples is None else int(resamples)
    if resamples < 2:
        raise ParameterError(f"Bootstrap needs at least 2 resamples, got {resamples}")
    if not np.allclose(scan.values, np.round(scan.values)):
        raise DataFormatError("Bootstrap needs integer counts; sample the scan first")

    def refit(rng: np.random.Generator) -> Optional[float]:
        try:
            resampled = scan.with_values(rng.poisson(scan.values).astype(float))
            return fit_gaussian(resampled, mode=mode).interference_visibility
        except (NumericalError, ValidationError) as exc:
            logger.debug("Bootstrap fit dropped: %s", exc)
            return None

    outcomes = map_ordered(refit, spawn_generators(seed, resamples))
    kept = np.array([v for v in outcomes if v is not None])
    failed = resamples - kept.size
    if failed > settings.MAX_FAILURE_FRACTION * resamples or kept.size < 2:
        raise InstabilityError(f"{failed} of {resamples} bootstrap fits failed")
    if failed:
        logger.info("Dropped %d of %d bootstrap fits", failed, resamples)
    return float(kept.mean()), float(kept.std(ddof=1))
