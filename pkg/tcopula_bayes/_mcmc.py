import logging
import math

from dataclasses import dataclass
from typing import Callable, NamedTuple, Optional, Sequence, Tuple

import numpy as np

from tcopula_bayes._constants import (
    ACCEPTANCE_BAND,
    BATCH_COUNT,
    BURN_SWEEPS,
    NU_MAX,
    NU_MIN,
    QUAD_ABS_TOL,
    QUAD_REL_TOL,
    SAMPLE_SWEEPS,
    TARGET_ACCEPTANCE,
    TUNE_CHECK_SWEEPS,
    TUNE_SWEEPS,
    TUNE_WINDOW,
)
from tcopula_bayes._copula import DensityWorkspace, log_likelihood
from tcopula_bayes._diagnostics import batch_standard_error
from tcopula_bayes._errors import DomainError, ShapeError, TCopulaError
from tcopula_bayes._random import make_rng
from tcopula_bayes._special import (
    norm_cdf,
    norm_log_interval_mass,
    norm_quantile,
)
from tcopula_bayes._types import (
    CorrelationMatrix,
    DofVector,
    GroupConfig,
    PseudoSample,
)

__all__ = (
    "ChainConfig",
    "CopulaLogPosterior",
    "MhStep",
    "PosteriorSample",
    "PriorSpec",
    "ProposalSpec",
    "SamplerError",
    "SamplerRun",
    "acceptance_log_ratio",
    "mh_step",
    "run_chain",
    "run_sampler",
    "truncated_normal_log_mass",
    "tune_proposals",
)

logger = logging.getLogger(__name__)

LogPosterior = Callable[[np.ndarray], float]


class SamplerError(TCopulaError):
    """Raised when a chain cannot continue, with the sweep it stopped at."""

    def __init__(self, message: str, sweep: Optional[int] = None) -> None:
        super().__init__(message)
        self.sweep = sweep


@dataclass(frozen=True)
class PriorSpec:
    lower: float = NU_MIN
    upper: float = NU_MAX
    shape: str = "uniform"

    def __post_init__(self) -> None:
        if not self.lower < self.upper:
            raise DomainError(
                f"Prior bounds < ({self.lower}, {self.upper}) > must be "
                "increasing."
            )
        if self.shape != "uniform":
            raise DomainError(f"Unsupported prior shape < {self.shape} >.")

    @property
    def bounds(self) -> Tuple[float, float]:
        return (float(self.lower), float(self.upper))

    @property
    def width(self) -> float:
        return float(self.upper - self.lower)

    def contains(self, theta: np.ndarray) -> bool:
        theta = np.asarray(theta, dtype=float)
        return bool(np.all((theta > self.lower) & (theta < self.upper)))

    def log_density(self, dim: int) -> float:
        """Log of the flat prior density on the m-dimensional box."""
        return -dim * math.log(self.width)

    def draw(self, dim: int, rng: np.random.Generator) -> np.ndarray:
        margin = 1e-9 * self.width
        return rng.uniform(self.lower + margin, self.upper - margin, size=dim)


@dataclass(frozen=True, eq=False)
class ProposalSpec:
    sigma: np.ndarray
    target_acceptance: float = TARGET_ACCEPTANCE
    measured_acceptance: Optional[np.ndarray] = None

    def __post_init__(self) -> None:
        sigma = np.array(self.sigma, dtype=float, ndmin=1)
        if not np.all(np.isfinite(sigma) & (sigma > 0)):
            raise DomainError(f"Proposal scales < {sigma} > must be positive.")
        if not 0.0 < self.target_acceptance < 1.0:
            raise DomainError(
                f"Target acceptance < {self.target_acceptance} > must lie in "
                "(0, 1)."
            )
        object.__setattr__(self, "sigma", sigma)
        if self.measured_acceptance is not None:
            object.__setattr__(
                self,
                "measured_acceptance",
                np.array(self.measured_acceptance, dtype=float, ndmin=1),
            )

    @classmethod
    def default(cls, prior: PriorSpec, dim: int) -> "ProposalSpec":
        return cls(np.full(dim, 0.1 * prior.width))


@dataclass(frozen=True)
class ChainConfig:
    seed: int
    n_tune: int = TUNE_SWEEPS
    n_burn: int = BURN_SWEEPS
    n_sample: int = SAMPLE_SWEEPS
    stream: Tuple[int, ...] = ()
    tune_window: int = TUNE_WINDOW
    tune_check: int = TUNE_CHECK_SWEEPS

    def __post_init__(self) -> None:
        if isinstance(self.seed, bool) or not isinstance(self.seed, int):
            raise DomainError(f"Chain seed < {self.seed!r} > must be an integer.")
        if min(self.n_tune, self.n_burn, self.tune_check) < 0:
            raise DomainError("Chain sweep counts must be >= 0.")
        if self.n_sample < 1:
            raise DomainError(
                f"Sample sweeps < {self.n_sample} > must be at least 1."
            )
        if self.tune_window < 1:
            raise DomainError(
                f"Tuning window < {self.tune_window} > must be at least 1."
            )
        object.__setattr__(self, "stream", tuple(int(k) for k in self.stream))


@dataclass(frozen=True, eq=False)
class PosteriorSample:
    """Post burn-in draws of the group degrees of freedom."""

    draws: np.ndarray
    log_lik: np.ndarray
    acceptance_rate: np.ndarray
    config: GroupConfig
    model_id: str = ""
    seed: Optional[int] = None
    bounds: Tuple[float, float] = (NU_MIN, NU_MAX)
    failures: int = 0
    sigma: Optional[np.ndarray] = None

    def __post_init__(self) -> None:
        draws = np.array(self.draws, dtype=float)
        if draws.ndim == 1:
            draws = draws[:, None]
        log_lik = np.array(self.log_lik, dtype=float).reshape(-1)
        if draws.shape[0] == 0 or draws.shape[0] != log_lik.size:
            raise ShapeError(
                f"< {draws.shape[0]} > draws for < {log_lik.size} > "
                "log-likelihood values."
            )
        if draws.shape[1] != self.config.n_groups:
            raise ShapeError(
                f"Draws have < {draws.shape[1]} > components for < "
                f"{self.config.n_groups} > groups."
            )
        lower, upper = self.bounds
        if not np.all((draws > lower) & (draws < upper)):
            raise DomainError(
                f"Chain < {self.model_id} > leaves the prior box < "
                f"({lower}, {upper}) >."
            )
        if not np.all(np.isfinite(log_lik)):
            raise DomainError(
                f"Chain < {self.model_id} > stores non-finite log-likelihoods."
            )
        for name, value in (("draws", draws), ("log_lik", log_lik)):
            value.setflags(write=False)
            object.__setattr__(self, name, value)
        object.__setattr__(
            self,
            "acceptance_rate",
            np.array(self.acceptance_rate, dtype=float, ndmin=1),
        )

    @property
    def n_draws(self) -> int:
        return self.draws.shape[0]

    @property
    def dim(self) -> int:
        return self.draws.shape[1]

    def summary(
        self, batch_count: int = BATCH_COUNT
    ) -> Tuple[np.ndarray, np.ndarray]:
        """Posterior mean and its batch-means standard error per component."""
        errors = [
            batch_standard_error(column, batch_count)[0]
            for column in self.draws.T
        ]
        return self.draws.mean(axis=0), np.asarray(errors)

    def truncated(self, n_draws: int) -> "PosteriorSample":
        return PosteriorSample(
            draws=self.draws[:n_draws],
            log_lik=self.log_lik[:n_draws],
            acceptance_rate=self.acceptance_rate,
            config=self.config,
            model_id=self.model_id,
            seed=self.seed,
            bounds=self.bounds,
            failures=self.failures,
            sigma=self.sigma,
        )


class MhStep(NamedTuple):
    state: np.ndarray
    accepted: bool
    log_post: float
    failed: bool


def truncated_normal_log_mass(
    mean: float, sigma: float, lower: float, upper: float
) -> float:
    """log of the N(mean, sigma^2) mass inside (lower, upper)."""
    return norm_log_interval_mass((lower - mean) / sigma, (upper - mean) / sigma)


def _draw_truncated_normal(
    mean: float,
    sigma: float,
    lower: float,
    upper: float,
    rng: np.random.Generator,
) -> float:
    low = norm_cdf((lower - mean) / sigma)
    high = norm_cdf((upper - mean) / sigma)
    p = low + rng.random() * (high - low)
    p = min(max(p, np.nextafter(0.0, 1.0)), np.nextafter(1.0, 0.0))
    candidate = mean + sigma * norm_quantile(p)
    if candidate <= lower:
        candidate = np.nextafter(lower, upper)
    elif candidate >= upper:
        candidate = np.nextafter(upper, lower)
    return float(candidate)


def acceptance_log_ratio(
    log_post_new: float,
    log_post_old: float,
    log_mass_new: float,
    log_mass_old: float,
) -> float:
    """
    Metropolis-Hastings log acceptance ratio for a truncated Gaussian random
    walk. `log_mass_*` is the log proposal mass inside the prior box around
    the new and the old state; q(old | new) / q(new | old) reduces to their
    ratio mass_old / mass_new.
    """
    return (log_post_new - log_post_old) + (log_mass_old - log_mass_new)


def mh_step(
    state: np.ndarray,
    component: int,
    logpost: LogPosterior,
    proposal: ProposalSpec,
    prior: PriorSpec,
    rng: np.random.Generator,
    current_log_post: Optional[float] = None,
) -> MhStep:
    """
    Updates one component of `state`. An evaluator failure counts as a
    rejected, failed step and leaves the state as it was.
    """
    theta = np.array(state, dtype=float)
    if not prior.contains(theta):
        raise DomainError(f"State < {theta} > lies outside the prior box.")
    if current_log_post is None:
        current_log_post = float(logpost(theta))

    sigma = float(proposal.sigma[component])
    mean = float(theta[component])
    candidate = _draw_truncated_normal(mean, sigma, prior.lower, prior.upper, rng)
    proposed = theta.copy()
    proposed[component] = candidate

    try:
        new_log_post = float(logpost(proposed))
    except TCopulaError as e:
        logger.debug("Evaluator failed at < %s >: %s", proposed, e)
        # keeps the stream aligned with a completed step
        rng.random()
        return MhStep(theta, False, current_log_post, True)

    log_ratio = acceptance_log_ratio(
        new_log_post,
        current_log_post,
        truncated_normal_log_mass(candidate, sigma, prior.lower, prior.upper),
        truncated_normal_log_mass(mean, sigma, prior.lower, prior.upper),
    )
    if rng.random() < math.exp(min(0.0, log_ratio)):
        return MhStep(proposed, True, new_log_post, False)
    return MhStep(theta, False, current_log_post, False)


class SamplerRun(NamedTuple):
    draws: np.ndarray
    log_post: np.ndarray
    acceptance_rate: np.ndarray
    failures: int
    state: np.ndarray
    last_log_post: float


def run_sampler(
    logpost: LogPosterior,
    prior: PriorSpec,
    init: np.ndarray,
    proposal: ProposalSpec,
    n_sweeps: int,
    rng: np.random.Generator,
    log_post: Optional[float] = None,
    store: bool = True,
    first_sweep: int = 0,
) -> SamplerRun:
    """
    Runs `n_sweeps` sweeps of single-component Metropolis-Hastings, each
    sweep updating every component once in index order.
    """
    state = np.array(init, dtype=float)
    dim = state.size
    if proposal.sigma.size != dim:
        raise ShapeError(
            f"< {proposal.sigma.size} > proposal scales for < {dim} > "
            "components."
        )
    if log_post is None:
        log_post = float(logpost(state))
    if not np.isfinite(log_post):
        raise SamplerError(
            f"Log posterior at the starting point < {state} > is not finite.",
            sweep=first_sweep,
        )

    draws = np.empty((n_sweeps if store else 0, dim))
    values = np.empty(n_sweeps if store else 0)
    accepted = np.zeros(dim)
    failures = 0
    for sweep in range(n_sweeps):
        for component in range(dim):
            try:
                step = mh_step(
                    state, component, logpost, proposal, prior, rng, log_post
                )
            except TCopulaError as e:
                raise SamplerError(
                    f"Sampler failed at sweep < {first_sweep + sweep} >: {e}",
                    sweep=first_sweep + sweep,
                ) from e
            state, log_post = step.state, step.log_post
            accepted[component] += step.accepted
            failures += step.failed
        if store:
            draws[sweep] = state
            values[sweep] = log_post

    rate = accepted / n_sweeps if n_sweeps else np.full(dim, np.nan)
    return SamplerRun(draws, values, rate, failures, state, log_post)


def _tune(
    logpost: LogPosterior,
    prior: PriorSpec,
    init: np.ndarray,
    rng: np.random.Generator,
    n_tune: int,
    window: int,
    check_sweeps: int,
    target: float,
    initial_sigma: Optional[np.ndarray],
) -> Tuple[ProposalSpec, np.ndarray, float, int]:
    state = np.array(init, dtype=float)
    dim = state.size
    if initial_sigma is None:
        sigma = np.full(dim, 0.1 * prior.width)
    else:
        sigma = np.array(initial_sigma, dtype=float)
    log_post = float(logpost(state))
    failures = 0
    low, high = ACCEPTANCE_BAND

    for index, start in enumerate(range(0, n_tune, window), start=1):
        sweeps = min(window, n_tune - start)
        run = run_sampler(
            logpost,
            prior,
            state,
            ProposalSpec(sigma, target),
            sweeps,
            rng,
            log_post,
            store=False,
            first_sweep=start,
        )
        state, log_post = run.state, run.last_log_post
        failures += run.failures
        step = 1.0 / index
        sigma = sigma * np.exp(np.where(run.acceptance_rate > target, step, -step))
        sigma = np.clip(sigma, 1e-8 * prior.width, 10.0 * prior.width)

    measured = None
    if check_sweeps:
        run = run_sampler(
            logpost,
            prior,
            state,
            ProposalSpec(sigma, target),
            check_sweeps,
            rng,
            log_post,
            store=False,
            first_sweep=n_tune,
        )
        state, log_post = run.state, run.last_log_post
        failures += run.failures
        measured = run.acceptance_rate
        if np.any((measured < low) | (measured > high)):
            logger.warning(
                "Tuned acceptance < %s > outside < [%s, %s] > with sigma < %s >.",
                np.round(measured, 3).tolist(),
                low,
                high,
                sigma.tolist(),
            )
    proposal = ProposalSpec(sigma, target, measured_acceptance=measured)
    return proposal, state, log_post, failures


def tune_proposals(
    logpost: LogPosterior,
    prior: PriorSpec,
    init: np.ndarray,
    rng: np.random.Generator,
    n_tune: int = TUNE_SWEEPS,
    window: int = TUNE_WINDOW,
    check_sweeps: int = TUNE_CHECK_SWEEPS,
    target: float = TARGET_ACCEPTANCE,
    initial_sigma: Optional[np.ndarray] = None,
) -> ProposalSpec:
    """
    Adapts each proposal scale by exp(+-1/k) after the k-th window of
    `window` sweeps (up when the window acceptance exceeds `target`), then
    measures acceptance over `check_sweeps` sweeps with the scales frozen.
    """
    proposal, _, _, _ = _tune(
        logpost,
        prior,
        np.asarray(init, dtype=float),
        rng,
        n_tune,
        window,
        check_sweeps,
        target,
        initial_sigma,
    )
    return proposal


class CopulaLogPosterior:
    """
    Flat-prior log posterior of the group degrees of freedom: the copula
    log-likelihood inside the prior box, -inf outside. Holds its own
    density workspace so repeated single-component updates only recompute
    the quantiles of the changed group.
    """

    def __init__(
        self,
        sample: PseudoSample,
        config: GroupConfig,
        corr: CorrelationMatrix,
        prior: PriorSpec,
        workspace: Optional[DensityWorkspace] = None,
        rel_tol: float = QUAD_REL_TOL,
        abs_tol: float = QUAD_ABS_TOL,
    ) -> None:
        self.sample = sample
        self.config = config
        self.corr = corr
        self.prior = prior
        self.workspace = workspace or DensityWorkspace()
        self.rel_tol = rel_tol
        self.abs_tol = abs_tol
        self.evaluations = 0

    def dof(self, theta: Sequence[float]) -> DofVector:
        return DofVector.from_groups(self.config, theta, self.prior.bounds)

    def log_likelihood(self, theta: Sequence[float]) -> float:
        self.evaluations += 1
        return log_likelihood(
            self.sample,
            self.config,
            self.dof(theta),
            self.corr,
            self.workspace,
            rel_tol=self.rel_tol,
            abs_tol=self.abs_tol,
        )

    def __call__(self, theta: Sequence[float]) -> float:
        if not self.prior.contains(theta):
            return -np.inf
        return self.log_likelihood(theta)


def run_chain(
    sample: PseudoSample,
    config: GroupConfig,
    corr: CorrelationMatrix,
    prior: PriorSpec,
    chain_cfg: ChainConfig,
    model_id: str = "",
    rel_tol: float = QUAD_REL_TOL,
    abs_tol: float = QUAD_ABS_TOL,
) -> PosteriorSample:
    """
    Tuning, burn-in and sampling from a uniform random start. Scales are
    frozen once tuning ends; every sampling sweep is stored with its
    log-likelihood.
    """
    rng = make_rng(chain_cfg.seed, chain_cfg.stream)
    posterior = CopulaLogPosterior(
        sample, config, corr, prior, rel_tol=rel_tol, abs_tol=abs_tol
    )
    model_id = model_id or config.key
    init = prior.draw(config.n_groups, rng)
    failures = 0

    logger.info(
        "Chain < %s >: tuning for < %d > sweeps.", model_id, chain_cfg.n_tune
    )
    if chain_cfg.n_tune:
        proposal, state, log_post, failures = _tune(
            posterior,
            prior,
            init,
            rng,
            chain_cfg.n_tune,
            chain_cfg.tune_window,
            chain_cfg.tune_check,
            TARGET_ACCEPTANCE,
            None,
        )
    else:
        proposal = ProposalSpec.default(prior, config.n_groups)
        state, log_post = init, posterior(init)

    logger.info(
        "Chain < %s >: burn-in for < %d > sweeps.", model_id, chain_cfg.n_burn
    )
    burn = run_sampler(
        posterior,
        prior,
        state,
        proposal,
        chain_cfg.n_burn,
        rng,
        log_post,
        store=False,
        first_sweep=chain_cfg.n_tune + chain_cfg.tune_check,
    )
    logger.info(
        "Chain < %s >: sampling for < %d > sweeps.", model_id, chain_cfg.n_sample
    )
    run = run_sampler(
        posterior,
        prior,
        burn.state,
        proposal,
        chain_cfg.n_sample,
        rng,
        burn.last_log_post,
        first_sweep=chain_cfg.n_tune + chain_cfg.tune_check + chain_cfg.n_burn,
    )
    failures += burn.failures + run.failures
    if failures:
        logger.warning(
            "Chain < %s >: < %d > likelihood evaluations failed.",
            model_id,
            failures,
        )
    logger.info(
        "Chain < %s >: done, acceptance < %s >.",
        model_id,
        np.round(run.acceptance_rate, 3).tolist(),
    )
    return PosteriorSample(
        draws=run.draws,
        log_lik=run.log_post,
        acceptance_rate=run.acceptance_rate,
        config=config,
        model_id=model_id,
        seed=chain_cfg.seed,
        bounds=prior.bounds,
        failures=failures,
        sigma=proposal.sigma,
    )
