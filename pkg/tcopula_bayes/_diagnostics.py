import logging

from dataclasses import dataclass
from typing import TYPE_CHECKING, NamedTuple, Optional, Tuple

import numpy as np

from tcopula_bayes._constants import (
    AUTOCORR_CUTOFF,
    AUTOCORR_MAX_LAG,
    BATCH_COUNT,
)
from tcopula_bayes._errors import SelectionError, ShapeError
from tcopula_bayes._types import DofVector

if TYPE_CHECKING:  # pragma: no cover
    from tcopula_bayes._mcmc import PosteriorSample

__all__ = (
    "ChainDiagnostics",
    "PointEstimates",
    "autocorrelation",
    "autocorrelation_time",
    "batch_standard_error",
    "diagnostics",
    "point_estimates",
)

logger = logging.getLogger(__name__)


@dataclass(frozen=True, eq=False)
class ChainDiagnostics:
    tau_hat: np.ndarray
    g_max: np.ndarray
    ess: np.ndarray
    batch_se: np.ndarray
    batch_count: int
    batch_length: int

    def to_dict(self) -> dict:
        return {
            "tau_hat": self.tau_hat.tolist(),
            "g_max": self.g_max.tolist(),
            "ess": self.ess.tolist(),
            "batch_se": self.batch_se.tolist(),
            "batch_count": self.batch_count,
            "batch_length": self.batch_length,
        }


class PointEstimates(NamedTuple):
    map: DofVector
    mmse: DofVector


def _default_max_lag(n: int) -> int:
    return max(1, min(n // 10, AUTOCORR_MAX_LAG))


def autocorrelation(series: np.ndarray, max_lag: int) -> np.ndarray:
    """Sample autocorrelations rho(0..max_lag) by direct summation."""
    y = np.asarray(series, dtype=float)
    y = y - np.mean(y)
    denominator = float(np.dot(y, y))
    rho = np.ones(max_lag + 1)
    if denominator == 0.0:
        rho[1:] = 0.0
        return rho
    for lag in range(1, max_lag + 1):
        rho[lag] = np.dot(y[:-lag], y[lag:]) / denominator
    return rho


def autocorrelation_time(
    series: np.ndarray,
    cutoff: float = AUTOCORR_CUTOFF,
    max_lag: Optional[int] = None,
) -> Tuple[float, int]:
    """
    tau = 1 + 2 sum_{g <= g_max} rho(g), with g_max the first lag whose
    autocorrelation drops below `cutoff` (that lag included). A constant
    series has tau = 1.
    """
    y = np.asarray(series, dtype=float)
    n = y.size
    if n < 2:
        raise ShapeError("Autocorrelation needs at least 2 draws.")
    if np.all(y == y[0]):
        return 1.0, 1
    y = y - np.mean(y)
    if max_lag is None:
        max_lag = _default_max_lag(n)
    max_lag = min(max_lag, n - 1)
    denominator = float(np.dot(y, y))
    if denominator == 0.0:
        return 1.0, 1

    total = 0.0
    for lag in range(1, max_lag + 1):
        rho = float(np.dot(y[:-lag], y[lag:]) / denominator)
        total += rho
        if rho < cutoff:
            return max(1.0, 1.0 + 2.0 * total), lag
    logger.warning(
        "Autocorrelation stays above < %s > up to lag < %d >.", cutoff, max_lag
    )
    return max(1.0, 1.0 + 2.0 * total), max_lag


def batch_standard_error(
    series: np.ndarray, batch_count: int = BATCH_COUNT
) -> Tuple[float, int]:
    """
    Standard error of the mean from `batch_count` consecutive batch means;
    draws that do not fill a whole batch at the end are dropped.
    Returns (standard error, batch length).
    """
    y = np.asarray(series, dtype=float)
    if batch_count < 2:
        raise SelectionError(f"Batch count < {batch_count} > must be >= 2.")
    if y.size < 2 * batch_count:
        raise SelectionError(
            f"< {y.size} > draws cannot fill < {batch_count} > batches of at "
            "least 2."
        )
    length = y.size // batch_count
    means = y[: batch_count * length].reshape(batch_count, length).mean(axis=1)
    return float(np.sqrt(np.var(means, ddof=1) / batch_count)), length


def diagnostics(
    chain: "PosteriorSample",
    batch_count: int = BATCH_COUNT,
    cutoff: float = AUTOCORR_CUTOFF,
    max_lag: Optional[int] = None,
) -> ChainDiagnostics:
    draws = chain.draws
    n = draws.shape[0]
    if n < 2 * batch_count:
        raise SelectionError(
            f"Chain < {chain.model_id} > has < {n} > draws, fewer than twice "
            f"the batch count < {batch_count} >."
        )
    taus, lags, errors = [], [], []
    length = n // batch_count
    for column in draws.T:
        tau, lag = autocorrelation_time(column, cutoff, max_lag)
        se, length = batch_standard_error(column, batch_count)
        taus.append(tau)
        lags.append(lag)
        errors.append(se)
    tau_hat = np.asarray(taus)
    return ChainDiagnostics(
        tau_hat=tau_hat,
        g_max=np.asarray(lags, dtype=int),
        ess=n / tau_hat,
        batch_se=np.asarray(errors),
        batch_count=batch_count,
        batch_length=length,
    )


def point_estimates(chain: "PosteriorSample") -> PointEstimates:
    """
    MMSE is the mean draw; MAP is the draw with the largest stored
    log-likelihood (flat prior), the earliest one on ties.
    """
    best = int(np.argmax(chain.log_lik))
    return PointEstimates(
        map=DofVector.from_groups(chain.config, chain.draws[best], chain.bounds),
        mmse=DofVector.from_groups(
            chain.config, chain.draws.mean(axis=0), chain.bounds
        ),
    )
