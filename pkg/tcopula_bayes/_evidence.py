"""
Bayesian model-choice criteria computed from stored chains: reciprocal
importance sampling and harmonic-mean evidence, DIC, posterior model
probabilities, and the classical likelihood-ratio test.

Everything works on log scale; log-likelihoods of several thousand are
routine.
"""
import logging
import math

from dataclasses import dataclass
from typing import Callable, NamedTuple, Optional, Sequence, Tuple

import numpy as np

from scipy import stats
from scipy.special import logsumexp

from tcopula_bayes._constants import IMPORTANCE_MASS_DRAWS, IMPORTANCE_T_DOF
from tcopula_bayes._errors import DomainError, SelectionError, ShapeError
from tcopula_bayes._mcmc import PosteriorSample, PriorSpec
from tcopula_bayes._random import make_rng
from tcopula_bayes._special import chi2_sf

__all__ = (
    "DicResult",
    "IMPORTANCE_FAMILIES",
    "ImportanceDensity",
    "LrResult",
    "dic",
    "harmonic_mean_log_evidence",
    "lr_test",
    "posterior_model_probs",
    "rise_log_evidence",
)

logger = logging.getLogger(__name__)

IMPORTANCE_FAMILIES = ("normal", "t")

LogLikelihood = Callable[[np.ndarray], float]


@dataclass(frozen=True, eq=False)
class ImportanceDensity:
    """
    Multivariate normal or t density matched to the mean and covariance of
    posterior draws, optionally renormalized to a box.
    """

    mean: np.ndarray
    covariance: np.ndarray
    family: str = "normal"
    dof: float = IMPORTANCE_T_DOF
    log_mass: float = 0.0

    def __post_init__(self) -> None:
        mean = np.array(self.mean, dtype=float, ndmin=1)
        covariance = np.atleast_2d(np.array(self.covariance, dtype=float))
        if covariance.shape != (mean.size, mean.size):
            raise ShapeError(
                f"Covariance of shape < {covariance.shape} > for a mean of "
                f"size < {mean.size} >."
            )
        if self.family not in IMPORTANCE_FAMILIES:
            raise DomainError(
                f"Unknown importance family < {self.family} >, expected one "
                f"of < {', '.join(IMPORTANCE_FAMILIES)} >."
            )
        if self.family == "t" and not self.dof > 2:
            raise DomainError(
                f"Importance t degrees of freedom < {self.dof} > must exceed 2."
            )
        try:
            np.linalg.cholesky(covariance)
        except np.linalg.LinAlgError as e:
            raise SelectionError(
                "Importance covariance is degenerate; use the t family or a "
                "ridge regularization."
            ) from e
        object.__setattr__(self, "mean", mean)
        object.__setattr__(self, "covariance", covariance)
        object.__setattr__(self, "_distribution", self._freeze())

    def _freeze(self):  # pylint: disable=missing-function-docstring
        if self.family == "normal":
            return stats.multivariate_normal(self.mean, self.covariance)
        shape = self.covariance * (self.dof - 2.0) / self.dof
        return stats.multivariate_t(self.mean, shape, df=self.dof)

    @classmethod
    def fit(
        cls,
        draws: np.ndarray,
        family: str = "normal",
        dof: float = IMPORTANCE_T_DOF,
        ridge: float = 0.0,
        bounds: Optional[Tuple[float, float]] = None,
        seed: int = 0,
        mass_draws: int = IMPORTANCE_MASS_DRAWS,
    ) -> "ImportanceDensity":
        """
        Fits mean and covariance of `draws` (N x m). With `bounds`, the
        density is divided by its mass inside the box (Monte Carlo with a
        fixed seed) so that it integrates to one over the prior support.
        """
        draws = np.asarray(draws, dtype=float)
        if draws.ndim == 1:
            draws = draws[:, None]
        if draws.shape[0] < 2:
            raise SelectionError("Importance density needs at least 2 draws.")
        covariance = np.atleast_2d(np.cov(draws, rowvar=False))
        if ridge:
            covariance = covariance + ridge * np.eye(draws.shape[1])
        density = cls(draws.mean(axis=0), covariance, family, dof)
        if bounds is None:
            return density

        lower, upper = bounds
        sample = density._distribution.rvs(
            size=mass_draws, random_state=make_rng(seed)
        )
        sample = np.asarray(sample, dtype=float).reshape(mass_draws, -1)
        inside = np.all((sample > lower) & (sample < upper), axis=1)
        mass = float(np.mean(inside))
        if mass == 0.0:
            raise SelectionError(
                "Importance density puts no mass inside the prior box."
            )
        return cls(density.mean, density.covariance, family, dof, math.log(mass))

    def log_pdf(self, theta: np.ndarray) -> np.ndarray:
        theta = np.asarray(theta, dtype=float).reshape(-1, self.mean.size)
        values = np.atleast_1d(self._distribution.logpdf(theta))
        return values.reshape(-1) - self.log_mass


def rise_log_evidence(
    chain: PosteriorSample,
    loglik: Optional[LogLikelihood],
    prior: PriorSpec,
    density: ImportanceDensity,
) -> float:
    """
    Reciprocal importance sampling estimate of log p(y | M):
    -log mean_t[h(theta_t) / (L(theta_t) pi(theta_t))]. Stored chain
    log-likelihoods are used unless `loglik` is given.
    """
    if loglik is None:
        log_lik = chain.log_lik
    else:
        log_lik = np.array([loglik(theta) for theta in chain.draws])
    terms = density.log_pdf(chain.draws) - log_lik - prior.log_density(chain.dim)
    return float(-(logsumexp(terms) - math.log(chain.n_draws)))


def harmonic_mean_log_evidence(chain: PosteriorSample) -> float:
    """Reciprocal importance sampling with the prior as importance density."""
    return float(-(logsumexp(-chain.log_lik) - math.log(chain.n_draws)))


class DicResult(NamedTuple):
    dic: float
    p_eff: float
    mean_deviance: float
    deviance_at_mean: float


def dic(chain: PosteriorSample, loglik: LogLikelihood) -> DicResult:
    """
    Deviance D = -2 log L; p_eff = mean D - D(posterior mean) and
    DIC = mean D + p_eff.
    """
    theta_bar = chain.draws.mean(axis=0)
    lower, upper = chain.bounds
    assert np.all((theta_bar > lower) & (theta_bar < upper))
    mean_deviance = float(-2.0 * np.mean(chain.log_lik))
    deviance_at_mean = float(-2.0 * loglik(theta_bar))
    p_eff = mean_deviance - deviance_at_mean
    return DicResult(
        dic=mean_deviance + p_eff,
        p_eff=p_eff,
        mean_deviance=mean_deviance,
        deviance_at_mean=deviance_at_mean,
    )


def posterior_model_probs(
    log_liks: Sequence[np.ndarray], exclude: Optional[int] = None
) -> np.ndarray:
    """
    Equal-prior model probabilities from per-sweep log-likelihoods of each
    model's chain: at every sweep the likelihoods are normalized across
    models, then the shares are averaged over sweeps. Chains are truncated
    to the shortest. The model at `exclude` (if any) gets probability 0 and
    the rest is renormalized without it.
    """
    if not log_liks:
        raise SelectionError("No chains to compare.")
    length = min(len(values) for values in log_liks)
    if length == 0:
        raise SelectionError("Cannot compare models with an empty chain.")
    matrix = np.stack(
        [np.asarray(values, dtype=float)[:length] for values in log_liks]
    )
    active = np.ones(matrix.shape[0], dtype=bool)
    if exclude is not None:
        active[exclude] = False
        if not active.any():
            raise SelectionError("Excluding the only model leaves nothing.")
    shares = np.zeros_like(matrix)
    kept = matrix[active]
    shares[active] = np.exp(kept - logsumexp(kept, axis=0, keepdims=True))
    probs = shares.mean(axis=1)
    return probs / probs.sum()


class LrResult(NamedTuple):
    stat: float
    pvalue: float
    df: int


def lr_test(loglik_null: float, loglik_alt: float, df: int) -> LrResult:
    """Likelihood-ratio test of a nested null; chi-square with `df` dof."""
    if df < 1:
        raise DomainError(
            f"Likelihood-ratio test needs df >= 1, got < {df} > (models are "
            "not nested)."
        )
    if loglik_alt < loglik_null - 1e-9:
        logger.warning(
            "Alternative log-likelihood < %s > is below the null < %s >.",
            loglik_alt,
            loglik_null,
        )
    stat = max(0.0, -2.0 * (loglik_null - loglik_alt))
    return LrResult(stat=stat, pvalue=float(chi2_sf(stat, df)), df=int(df))
