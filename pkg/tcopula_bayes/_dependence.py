import logging

import numpy as np

from scipy import stats

from tcopula_bayes._constants import CORR_CLAMP, PD_EIGEN_FLOOR
from tcopula_bayes._errors import DataError, DomainError, ShapeError
from tcopula_bayes._garch import ResidualMatrix
from tcopula_bayes._types import CorrelationMatrix, PseudoSample

__all__ = (
    "kendall_corr",
    "nearest_correlation",
    "tau_to_correlation",
    "to_pseudo_obs",
)

logger = logging.getLogger(__name__)


def to_pseudo_obs(residuals: ResidualMatrix) -> PseudoSample:
    """Average ranks scaled by 1 / (K + 1), column by column."""
    eps = residuals.eps
    ranks = stats.rankdata(eps, method="average", axis=0)
    return PseudoSample(ranks / (eps.shape[0] + 1.0), residuals.labels)


def tau_to_correlation(tau: np.ndarray) -> np.ndarray:
    value = np.sin(0.5 * np.pi * np.asarray(tau, dtype=float))
    return np.clip(value, -CORR_CLAMP, CORR_CLAMP)


def nearest_correlation(entries: np.ndarray) -> np.ndarray:
    """
    Clips the eigenvalues of a symmetric matrix at a small floor and rescales
    the result back to unit diagonal.
    """
    entries = 0.5 * (entries + entries.T)
    eigenvalues, vectors = np.linalg.eigh(entries)
    clipped = (vectors * np.maximum(eigenvalues, PD_EIGEN_FLOOR)) @ vectors.T
    scale = np.sqrt(np.diag(clipped))
    projected = clipped / np.outer(scale, scale)
    projected = 0.5 * (projected + projected.T)
    np.fill_diagonal(projected, 1.0)
    return projected


def kendall_corr(sample: PseudoSample) -> CorrelationMatrix:
    """
    Pairwise tau-b mapped through sin(pi tau / 2); projected onto a positive
    definite correlation matrix when the pairwise result is not one.
    """
    u = sample.u
    if sample.n_obs < 2:
        raise ShapeError("Kendall's tau needs at least 2 observations.")
    labels = sample.labels or tuple(str(i) for i in range(sample.dim))
    for column in range(sample.dim):
        if np.all(u[:, column] == u[0, column]):
            raise DataError(
                f"Column < {labels[column]} > is constant, Kendall's tau is "
                "undefined.",
                column=labels[column],
            )

    tau = np.eye(sample.dim)
    for i in range(sample.dim):
        for j in range(i + 1, sample.dim):
            value = stats.kendalltau(u[:, i], u[:, j])[0]
            if not np.isfinite(value):
                raise DataError(
                    f"Kendall's tau of < {labels[i]} > and < {labels[j]} > is "
                    "undefined."
                )
            tau[i, j] = tau[j, i] = value

    entries = tau_to_correlation(tau)
    np.fill_diagonal(entries, 1.0)
    try:
        return CorrelationMatrix(entries)
    except DomainError:
        logger.warning(
            "Pairwise correlation matrix is not positive definite, projecting."
        )
        return CorrelationMatrix(nearest_correlation(entries))
