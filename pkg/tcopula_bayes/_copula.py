import logging
import math

from collections import OrderedDict
from typing import List, NamedTuple, Optional, Sequence, Tuple

import numpy as np

from scipy import optimize
from scipy import special as sc

from tcopula_bayes._constants import (
    DENSITY_CHUNK_SIZE,
    NELDER_MEAD_FATOL,
    NELDER_MEAD_MAXITER,
    NELDER_MEAD_XATOL,
    QUAD_ABS_TOL,
    QUAD_INITIAL_PANELS,
    QUAD_MAX_PANELS,
    QUAD_GRID_POINTS,
    QUAD_REL_TOL,
)
from tcopula_bayes._errors import ConvergenceError, DomainError, ShapeError
from tcopula_bayes._quadrature import integrate_adaptive
from tcopula_bayes._random import make_rng
from tcopula_bayes._special import chi_w_quantile, t_cdf, t_quantile
from tcopula_bayes._types import (
    CorrelationMatrix,
    DofVector,
    GroupConfig,
    PseudoSample,
)

__all__ = (
    "DensityWorkspace",
    "MleResult",
    "log_density",
    "log_density_batch",
    "log_likelihood",
    "mle_fit",
    "simulate",
    "simulate_uniforms",
    "standard_t_log_density",
)

logger = logging.getLogger(__name__)

_LOG_2PI = math.log(2.0 * math.pi)
# shift abscissae on (0, 1/2]: uniform in the body, geometric into the tail
_GRID = np.unique(
    np.concatenate(
        [
            (np.arange(QUAD_GRID_POINTS) + 0.5) / (2.0 * QUAD_GRID_POINTS),
            np.logspace(-300.0, -1.0, 100),
        ]
    )
)
# mixing quantiles change fastest within a few decades of either end
_BREAKPOINTS = tuple(
    10.0 ** -k for k in (2, 4, 6, 8, 10, 12, 16, 20, 30, 40, 60, 80, 120, 160)
)


class DensityWorkspace:
    """
    Per-dimension cache of t-quantiles x = t_nu^-1(u) and of the matching
    univariate t kernel (nu + 1) / 2 * log(1 + x^2 / nu).

    Each dimension keeps the last `slots` degrees of freedom it was asked
    for, which is what a single-component sampler alternates between
    (current and proposed value). Binding another pseudo-sample array drops
    everything. One workspace per thread.
    """

    def __init__(self, slots: int = 2) -> None:
        self._slots = max(1, int(slots))
        self._u: Optional[np.ndarray] = None
        self._columns: List[OrderedDict] = []
        self.recomputed = 0

    def _bind(self, u: np.ndarray) -> None:
        if self._u is u:
            return
        self._u = u
        self._columns = [OrderedDict() for _ in range(u.shape[1])]

    def column(
        self, u: np.ndarray, dim: int, nu: float
    ) -> Tuple[np.ndarray, np.ndarray]:
        self._bind(u)
        cache = self._columns[dim]
        key = float(nu)
        cached = cache.get(key)
        if cached is not None:
            cache.move_to_end(key)
            return cached

        x = t_quantile(u[:, dim], key)
        kernel = 0.5 * (key + 1.0) * np.log1p(x * x / key)
        cache[key] = (x, kernel)
        if len(cache) > self._slots:
            cache.popitem(last=False)
        self.recomputed += 1
        return x, kernel

    def quantiles(
        self, u: np.ndarray, nu: np.ndarray
    ) -> Tuple[np.ndarray, np.ndarray]:
        columns = [self.column(u, i, nu_i) for i, nu_i in enumerate(nu)]
        x = np.stack([col[0] for col in columns], axis=1)
        kernel = np.stack([col[1] for col in columns], axis=1)
        return x, kernel


def _check_shapes(
    config: GroupConfig, dof: DofVector, corr: CorrelationMatrix, dim: int
) -> None:
    if not config.dim == dof.dim == corr.dim == dim:
        raise ShapeError(
            "Dimension mismatch between configuration < "
            f"{config.dim} >, degrees of freedom < {dof.dim} >, "
            f"correlation < {corr.dim} > and data < {dim} >."
        )
    dof.check_grouping(config)


def _gamma_constant(nu: np.ndarray) -> float:
    # -sum log f_nu(x) without its x-dependent kernel
    return float(
        np.sum(
            0.5 * np.log(nu * math.pi)
            + sc.gammaln(0.5 * nu)
            - sc.gammaln(0.5 * (nu + 1.0))
        )
    )


def _peak_breakpoints(log_values: np.ndarray) -> np.ndarray:
    """
    Grid neighbourhood of every column's maximum, with the midpoints, so
    each peak starts inside two panels that are already split once.
    """
    peaks = np.unique(np.argmax(log_values, axis=0))
    lower = _GRID[np.maximum(peaks - 1, 0)]
    upper = _GRID[np.minimum(peaks + 1, _GRID.size - 1)]
    middle = _GRID[peaks]
    return np.unique(
        np.concatenate(
            [
                lower,
                0.5 * (lower + middle),
                middle,
                0.5 * (middle + upper),
                upper,
            ]
        )
    )


def _log_mixture_integrals(
    x: np.ndarray,
    nu: np.ndarray,
    corr: CorrelationMatrix,
    rel_tol: float,
    abs_tol: float,
    max_panels: int,
    offset: int,
) -> np.ndarray:
    """
    log of int_0^1 phi_Sigma(x / w(s)) prod_i w_i(s)^-1 ds for every row of
    `x`, integrated jointly with the integrand shifted by its maximum over
    a fixed grid.

    The interval is folded onto (0, 1/2]: r contributes the integrand at
    s = r and at s = 1 - r, the latter through upper-tail mixing quantiles
    so that mass within rounding distance of s = 1 is still resolved.
    """
    const = -0.5 * nu.size * _LOG_2PI - 0.5 * corr.log_det

    def log_half(w: np.ndarray) -> np.ndarray:
        z = x[None, :, :] / w[:, None, :]
        return (
            const
            - 0.5 * corr.quad_form(z)
            - np.sum(np.log(w), axis=1)[:, None]
        )

    def log_halves(r: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
        r = np.maximum(r, np.finfo(float).tiny)[:, None]
        return (
            log_half(chi_w_quantile(r, nu[None, :])),
            log_half(chi_w_quantile(r, nu[None, :], upper=True)),
        )

    lower, upper = log_halves(_GRID)
    shift = np.maximum(np.max(lower, axis=0), np.max(upper, axis=0))

    def folded(r: np.ndarray) -> np.ndarray:
        lower, upper = log_halves(r)
        return np.exp(lower - shift) + np.exp(upper - shift)

    try:
        result = integrate_adaptive(
            folded,
            rel_tol=rel_tol,
            abs_tol=abs_tol,
            a=0.0,
            b=0.5,
            max_panels=max_panels,
            initial_panels=QUAD_INITIAL_PANELS,
            breakpoints=_BREAKPOINTS
            + tuple(_peak_breakpoints(np.concatenate([lower, upper], axis=1))),
        )
    except ConvergenceError as e:
        errors = np.atleast_1d(e.abs_error)
        best = np.atleast_1d(e.best)
        worst = int(np.argmax(errors / np.maximum(np.abs(best), 1e-300)))
        raise ConvergenceError(
            "Density quadrature did not converge for observation "
            f"< {offset + worst} >.",
            best=e.best,
            abs_error=e.abs_error,
        ) from e
    return shift + np.log(np.maximum(result.value, np.finfo(float).tiny))


def _density_terms(
    sample: PseudoSample,
    config: GroupConfig,
    dof: DofVector,
    corr: CorrelationMatrix,
    ws: Optional[DensityWorkspace],
    rel_tol: float,
    abs_tol: float,
    max_panels: int,
    chunk_size: int,
) -> Tuple[np.ndarray, np.ndarray]:
    _check_shapes(config, dof, corr, sample.dim)
    if chunk_size < 1:
        raise ShapeError(f"Chunk size < {chunk_size} > must be positive.")
    if ws is None:
        ws = DensityWorkspace()
    x, kernel = ws.quantiles(sample.u, dof.values)
    integrals = np.concatenate(
        [
            _log_mixture_integrals(
                x[start : start + chunk_size],
                dof.values,
                corr,
                rel_tol,
                abs_tol,
                max_panels,
                start,
            )
            for start in range(0, sample.n_obs, chunk_size)
        ]
    )
    return integrals, kernel


def log_density_batch(
    sample: PseudoSample,
    config: GroupConfig,
    dof: DofVector,
    corr: CorrelationMatrix,
    ws: Optional[DensityWorkspace] = None,
    rel_tol: float = QUAD_REL_TOL,
    abs_tol: float = QUAD_ABS_TOL,
    max_panels: int = QUAD_MAX_PANELS,
    chunk_size: int = DENSITY_CHUNK_SIZE,
) -> np.ndarray:
    """
    Log copula density of every observation of `sample`.

    Observations are integrated in chunks of `chunk_size` that share one
    adaptive subdivision; the values only depend on how rows fall into
    chunks, never on the workspace state.
    """
    integrals, kernel = _density_terms(
        sample, config, dof, corr, ws, rel_tol, abs_tol, max_panels, chunk_size
    )
    return integrals + np.sum(kernel, axis=1) + _gamma_constant(dof.values)


def log_density(
    u: Sequence[float],
    config: GroupConfig,
    dof: DofVector,
    corr: CorrelationMatrix,
    ws: Optional[DensityWorkspace] = None,
    rel_tol: float = QUAD_REL_TOL,
    abs_tol: float = QUAD_ABS_TOL,
    max_panels: int = QUAD_MAX_PANELS,
) -> float:
    sample = PseudoSample(np.asarray(u, dtype=float).reshape(1, -1))
    return float(
        log_density_batch(
            sample, config, dof, corr, ws, rel_tol, abs_tol, max_panels
        )[0]
    )


def log_likelihood(
    sample: PseudoSample,
    config: GroupConfig,
    dof: DofVector,
    corr: CorrelationMatrix,
    ws: Optional[DensityWorkspace] = None,
    rel_tol: float = QUAD_REL_TOL,
    abs_tol: float = QUAD_ABS_TOL,
    max_panels: int = QUAD_MAX_PANELS,
    chunk_size: int = DENSITY_CHUNK_SIZE,
) -> float:
    """
    Copula log-likelihood, summed as quadrature terms + univariate t kernels
    + K times the gamma constants (computed once per call).
    """
    integrals, kernel = _density_terms(
        sample, config, dof, corr, ws, rel_tol, abs_tol, max_panels, chunk_size
    )
    return float(
        np.sum(integrals)
        + np.sum(kernel)
        + sample.n_obs * _gamma_constant(dof.values)
    )


def standard_t_log_density(
    u: np.ndarray, nu: float, corr: CorrelationMatrix
) -> np.ndarray:
    """
    Closed-form log density of the standard t-copula; `u` is one point
    (n,) or a (K, n) batch.
    """
    u = np.asarray(u, dtype=float)
    if u.shape[-1] != corr.dim:
        raise ShapeError(
            f"Point of dimension < {u.shape[-1]} > for a < {corr.dim} >-"
            "dimensional correlation."
        )
    if not np.all((u > 0.0) & (u < 1.0)):
        raise DomainError("Points must lie inside the open unit cube.")
    n = corr.dim
    nu = float(nu)
    x = t_quantile(u, nu)
    value = (
        sc.gammaln(0.5 * (nu + n))
        + (n - 1) * sc.gammaln(0.5 * nu)
        - n * sc.gammaln(0.5 * (nu + 1.0))
        - 0.5 * corr.log_det
        - 0.5 * (nu + n) * np.log1p(corr.quad_form(x) / nu)
        + 0.5 * (nu + 1.0) * np.sum(np.log1p(x * x / nu), axis=-1)
    )
    if np.ndim(value) == 0:
        return float(value)
    return value


def simulate_uniforms(
    config: GroupConfig,
    dof: DofVector,
    corr: CorrelationMatrix,
    n_draws: int,
    rng: np.random.Generator,
) -> np.ndarray:
    """
    Raw (n_draws, n) copula draws: Z ~ N(0, Sigma), one V ~ U(0, 1) per
    draw shared by all groups, W_k = G_nu_k^-1(V), U_i = t_nu_i(W_k(i) Z_i).
    """
    _check_shapes(config, dof, corr, corr.dim)
    if n_draws < 1:
        raise ShapeError(f"Number of draws < {n_draws} > must be positive.")
    z = rng.standard_normal((n_draws, corr.dim)) @ corr.chol.T
    v = rng.uniform(np.nextafter(0.0, 1.0), 1.0, size=n_draws)
    w = chi_w_quantile(v[:, None], dof.group_values(config)[None, :])
    u = t_cdf(w[:, config.group_index] * z, dof.values[None, :])
    return np.clip(u, 1e-300, np.nextafter(1.0, 0.0))


def simulate(
    config: GroupConfig,
    dof: DofVector,
    corr: CorrelationMatrix,
    n_draws: int,
    seed: int,
    stream: Sequence[int] = (),
) -> PseudoSample:
    return PseudoSample(
        simulate_uniforms(config, dof, corr, n_draws, make_rng(seed, stream))
    )


class MleResult(NamedTuple):
    dof: DofVector
    log_lik: float
    converged: bool
    evaluations: int
    message: str


def _reflect(y: np.ndarray, lower: float, upper: float) -> np.ndarray:
    width = upper - lower
    folded = np.mod(y - lower, 2.0 * width)
    folded = np.where(folded > width, 2.0 * width - folded, folded)
    margin = 1e-9 * width
    return np.clip(lower + folded, lower + margin, upper - margin)


def mle_fit(
    sample: PseudoSample,
    config: GroupConfig,
    corr: CorrelationMatrix,
    init: DofVector,
    ws: Optional[DensityWorkspace] = None,
    rel_tol: float = QUAD_REL_TOL,
    abs_tol: float = QUAD_ABS_TOL,
    max_iter: int = NELDER_MEAD_MAXITER,
    xatol: float = NELDER_MEAD_XATOL,
    fatol: float = NELDER_MEAD_FATOL,
) -> MleResult:
    """
    Maximum-likelihood group degrees of freedom by Nelder-Mead over the m
    free group values. Bounds are enforced by reflecting every trial point
    back into (lower, upper); the best evaluated point is returned even when
    the iteration budget runs out.
    """
    _check_shapes(config, init, corr, sample.dim)
    lower, upper = init.bounds
    if ws is None:
        ws = DensityWorkspace(slots=config.n_groups + 2)

    best = {"log_lik": -np.inf, "theta": init.group_values(config)}

    def objective(y: np.ndarray) -> float:
        theta = _reflect(np.asarray(y, dtype=float), lower, upper)
        dof = DofVector.from_groups(config, theta, init.bounds)
        try:
            value = log_likelihood(
                sample, config, dof, corr, ws, rel_tol=rel_tol, abs_tol=abs_tol
            )
        except ConvergenceError as e:
            logger.debug("Skipping < %s >: %s", theta, e)
            return np.inf
        if value > best["log_lik"]:
            best["log_lik"] = value
            best["theta"] = theta
        return -value

    start = init.group_values(config)
    result = optimize.minimize(
        objective,
        start,
        method="Nelder-Mead",
        options={
            "xatol": xatol,
            "fatol": fatol,
            "maxiter": max_iter,
            "maxfev": 2 * max_iter,
        },
    )
    if not np.isfinite(best["log_lik"]):
        raise ConvergenceError(
            "No likelihood evaluation succeeded during the fit of < "
            f"{config.key} >."
        )
    if not result.success:
        logger.warning(
            "Nelder-Mead did not converge for < %s >: %s",
            config.key,
            result.message,
        )
    return MleResult(
        dof=DofVector.from_groups(config, best["theta"], init.bounds),
        log_lik=float(best["log_lik"]),
        converged=bool(result.success),
        evaluations=int(result.nfev),
        message=str(result.message),
    )
