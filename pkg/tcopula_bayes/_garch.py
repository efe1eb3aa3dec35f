import logging
import math

from dataclasses import dataclass, field, replace
from typing import Sequence, Tuple

import numpy as np

from scipy import optimize, signal

from tcopula_bayes._constants import GARCH_MIN_LENGTH, RESIDUAL_VARIANCE_BAND
from tcopula_bayes._data import PriceSeries, log_returns
from tcopula_bayes._errors import (
    DataError,
    DomainError,
    ShapeError,
    TCopulaError,
)

__all__ = (
    "GarchParams",
    "ResidualMatrix",
    "filter_series",
    "garch_fit",
    "garch_filter",
    "garch_variance",
)

logger = logging.getLogger(__name__)

_LOG_2PI = math.log(2.0 * math.pi)
_PERSISTENCE_CAP = 1.0 - 1e-6
_OMEGA_FLOOR = 1e-12
# (omega, alpha, beta) starting points in units of the sample variance
_STARTS = ((0.05, 0.05, 0.90), (0.2, 0.1, 0.7), (0.9, 0.05, 0.05))


@dataclass(frozen=True)
class GarchParams:
    mu: float
    omega: float
    alpha: float
    beta: float
    sigma0_sq: float
    log_likelihood: float = float("nan")
    converged: bool = True
    message: str = ""

    def __post_init__(self) -> None:
        if self.omega < 0 or self.alpha < 0 or self.beta < 0:
            raise DomainError(
                f"GARCH parameters < omega={self.omega}, alpha={self.alpha}, "
                f"beta={self.beta} > must be non-negative."
            )
        if not self.alpha + self.beta < 1.0:
            raise DomainError(
                f"GARCH persistence < {self.alpha + self.beta} > must be < 1."
            )
        if not self.sigma0_sq > 0:
            raise DomainError(
                f"Initial variance < {self.sigma0_sq} > must be positive."
            )


def garch_variance(returns: np.ndarray, params: GarchParams) -> np.ndarray:
    """
    Conditional variances sigma_t^2 = omega + alpha e_{t-1} + beta
    sigma_{t-1}^2 with e = (x - mu)^2. The pre-sample variance and squared
    residual are both `sigma0_sq`.
    """
    x = np.asarray(returns, dtype=float)
    squared = (x - params.mu) ** 2
    lagged = np.concatenate([[params.sigma0_sq], squared[:-1]])
    drive = params.omega + params.alpha * lagged
    variance, _ = signal.lfilter(
        [1.0], [1.0, -params.beta], drive, zi=[params.beta * params.sigma0_sq]
    )
    bad = ~(np.isfinite(variance) & (variance > 0))
    if np.any(bad):
        raise DataError(
            f"Conditional variance underflows at index < {int(np.argmax(bad))} >."
        )
    return variance


def garch_filter(returns: np.ndarray, params: GarchParams) -> np.ndarray:
    x = np.asarray(returns, dtype=float)
    return (x - params.mu) / np.sqrt(garch_variance(x, params))


def _quasi_log_likelihood(x: np.ndarray, params: GarchParams) -> float:
    variance = garch_variance(x, params)
    return float(
        -0.5
        * np.sum(_LOG_2PI + np.log(variance) + (x - params.mu) ** 2 / variance)
    )


def garch_fit(returns: np.ndarray) -> GarchParams:
    """
    Gaussian quasi-maximum-likelihood GARCH(1,1) fit with the drift
    estimated jointly. The optimization runs on returns divided by their
    standard deviation from a few starting points; the best SLSQP solution
    is mapped back to the original scale.
    """
    x = np.asarray(returns, dtype=float).reshape(-1)
    if x.size < GARCH_MIN_LENGTH:
        raise DomainError(
            f"GARCH needs at least < {GARCH_MIN_LENGTH} > returns, got < "
            f"{x.size} >."
        )
    if not np.all(np.isfinite(x)):
        raise DataError("Returns contain non-finite values.")
    variance = float(np.var(x))
    if not variance > 0:
        raise DataError("Returns have zero variance.")

    scale = math.sqrt(variance)
    y = x / scale

    def negative(p: np.ndarray) -> float:
        mu, omega, alpha, beta = p
        if alpha + beta >= 1.0 or omega <= 0 or alpha < 0 or beta < 0:
            return 1e300
        try:
            return -_quasi_log_likelihood(
                y, GarchParams(mu, omega, alpha, beta, 1.0)
            )
        except TCopulaError:
            return 1e300

    constraints = [
        {"type": "ineq", "fun": lambda p: _PERSISTENCE_CAP - p[2] - p[3]}
    ]
    bounds = [(None, None), (_OMEGA_FLOOR, 10.0), (0.0, 1.0), (0.0, 1.0)]

    best = None
    for omega0, alpha0, beta0 in _STARTS:
        result = optimize.minimize(
            negative,
            np.array([float(np.mean(y)), omega0, alpha0, beta0]),
            method="SLSQP",
            bounds=bounds,
            constraints=constraints,
            options={"maxiter": 500, "ftol": 1e-10},
        )
        if best is None or (not result.success, result.fun) < (
            not best.success,
            best.fun,
        ):
            best = result

    mu, omega, alpha, beta = (float(v) for v in best.x)
    alpha = max(alpha, 0.0)
    beta = max(beta, 0.0)
    if alpha + beta > _PERSISTENCE_CAP:
        beta = _PERSISTENCE_CAP - alpha
    params = GarchParams(
        mu=mu * scale,
        omega=max(omega, _OMEGA_FLOOR) * variance,
        alpha=alpha,
        beta=beta,
        sigma0_sq=variance,
    )
    log_lik = _quasi_log_likelihood(x, params)
    if not best.success:
        logger.warning("GARCH fit did not converge: %s", best.message)
    return replace(
        params,
        log_likelihood=log_lik,
        converged=bool(best.success),
        message=str(best.message),
    )


@dataclass(frozen=True, eq=False)
class ResidualMatrix:
    eps: np.ndarray
    labels: Tuple[str, ...] = field(default=())

    def __post_init__(self) -> None:
        eps = np.array(self.eps, dtype=float)
        if eps.ndim != 2 or eps.shape[0] < 2:
            raise ShapeError(
                f"Residual matrix of shape < {eps.shape} > needs K >= 2 rows."
            )
        if not np.all(np.isfinite(eps)):
            raise DataError("Residual matrix has non-finite entries.")
        labels = tuple(self.labels) or tuple(
            f"x{i}" for i in range(eps.shape[1])
        )
        if len(labels) != eps.shape[1]:
            raise ShapeError(
                f"< {len(labels)} > labels for < {eps.shape[1]} > columns."
            )
        low, high = RESIDUAL_VARIANCE_BAND
        for label, var in zip(labels, np.var(eps, axis=0, ddof=1)):
            if not low <= var <= high:
                logger.warning(
                    "Residual variance < %.4g > of < %s > is outside < [%s, %s] >.",
                    var,
                    label,
                    low,
                    high,
                )
        eps.setflags(write=False)
        object.__setattr__(self, "eps", eps)
        object.__setattr__(self, "labels", labels)

    @property
    def n_obs(self) -> int:
        return self.eps.shape[0]

    @property
    def dim(self) -> int:
        return self.eps.shape[1]


def filter_series(
    series: Sequence[PriceSeries],
) -> Tuple[Tuple[GarchParams, ...], ResidualMatrix]:
    """Fits a GARCH(1,1) per asset and stacks the standardized residuals."""
    if not series:
        raise ShapeError("No price series to filter.")
    reference = series[0].dates
    for item in series[1:]:
        if item.dates.shape != reference.shape or not np.array_equal(
            item.dates, reference
        ):
            raise DataError(
                f"Series < {item.label} > is not aligned with < "
                f"{series[0].label} >.",
                column=item.label,
            )

    fits = []
    columns = []
    for item in series:
        try:
            returns = log_returns(item)
            params = garch_fit(returns)
            columns.append(garch_filter(returns, params))
        except TCopulaError as e:
            raise DataError(
                f"Filtering < {item.label} > failed: {e}", column=item.label
            ) from e
        logger.info(
            "GARCH < %s >: mu=%.4g omega=%.4g alpha=%.4f beta=%.4f",
            item.label,
            params.mu,
            params.omega,
            params.alpha,
            params.beta,
        )
        fits.append(params)
    residuals = ResidualMatrix(
        np.column_stack(columns), tuple(item.label for item in series)
    )
    return tuple(fits), residuals
