"""
Monte Carlo value-at-risk and expected shortfall of currency portfolios
under a calibrated copula with standard normal margins.

Losses follow the one-period convention Z = sum_i w_i (1 - exp(x_i)) where
x_i are log-returns and w_i dollar weights; positive Z is a loss.
"""
import logging
import math

from dataclasses import dataclass
from pathlib import Path
from typing import NamedTuple, Optional, Sequence, Tuple, Union

import numpy as np
import pandas as pd

from tcopula_bayes._constants import (
    CVAR_BATCH_SIZE,
    CVAR_MIN_EXCEEDANCES,
    CVAR_MIN_SIMS,
)
from tcopula_bayes._copula import simulate_uniforms
from tcopula_bayes._errors import DataError, DomainError, SelectionError, ShapeError
from tcopula_bayes._random import make_rng
from tcopula_bayes._special import norm_quantile
from tcopula_bayes._types import CorrelationMatrix, DofVector, GroupConfig

__all__ = (
    "CvarComparison",
    "CvarEstimate",
    "POINT_ESTIMATES",
    "Portfolio",
    "compare_models",
    "cvar_from_losses",
    "cvar_mc",
    "load_portfolio",
    "portfolio_loss",
)

logger = logging.getLogger(__name__)

PathLike = Union[str, Path]

POINT_ESTIMATES = ("map", "mmse", "mle")

_WEIGHT_SUM_TOL = 1e-12


@dataclass(frozen=True, eq=False)
class Portfolio:
    weights: np.ndarray
    labels: Tuple[str, ...] = ()
    name: str = ""

    def __post_init__(self) -> None:
        weights = np.array(self.weights, dtype=float, ndmin=1)
        if weights.ndim != 1 or not np.all(np.isfinite(weights)):
            raise DomainError(f"Portfolio weights < {weights} > must be finite.")
        labels = tuple(str(label) for label in self.labels)
        if labels and len(labels) != weights.size:
            raise ShapeError(
                f"< {len(labels)} > labels for < {weights.size} > weights."
            )
        total = float(np.sum(weights))
        if abs(total - 1.0) > _WEIGHT_SUM_TOL:
            logger.warning(
                "Portfolio < %s > weights sum to < %s >, not 1.",
                self.name or labels,
                total,
            )
        weights.setflags(write=False)
        object.__setattr__(self, "weights", weights)
        object.__setattr__(self, "labels", labels)

    @property
    def dim(self) -> int:
        return self.weights.size

    def scaled(self, factor: float) -> "Portfolio":
        return Portfolio(self.weights * factor, self.labels, self.name)

    def aligned(self, labels: Sequence[str]) -> "Portfolio":
        """Weights reordered to `labels`; every label must be present."""
        if not self.labels:
            return self
        missing = [label for label in labels if label not in self.labels]
        extra = [label for label in self.labels if label not in labels]
        if missing or extra:
            raise DataError(
                f"Portfolio < {self.name} > assets < {list(self.labels)} > do "
                f"not match the data columns < {list(labels)} >."
            )
        order = [self.labels.index(label) for label in labels]
        return Portfolio(self.weights[order], tuple(labels), self.name)


def portfolio_loss(
    returns: np.ndarray, portfolio: Portfolio, linearized: bool = False
) -> Union[float, np.ndarray]:
    """
    Loss for log-returns `returns` (..., n). The exact form is
    -sum_i w_i expm1(x_i); `linearized` gives -sum_i w_i x_i.
    """
    x = np.asarray(returns, dtype=float)
    if x.shape[-1:] != (portfolio.dim,):
        raise ShapeError(
            f"Returns of shape < {x.shape} > for < {portfolio.dim} > assets."
        )
    if linearized:
        loss = -(x @ portfolio.weights)
    else:
        loss = -(np.expm1(x) @ portfolio.weights)
    if np.ndim(loss) == 0:
        return float(loss)
    return loss


@dataclass(frozen=True)
class CvarEstimate:
    alpha: float
    var: float
    cvar: float
    std_error: float
    n_sims: int
    n_exceed: int
    low_exceedance: bool = False


def _var_index(alpha: float, n: int) -> int:
    # 0.99 * 10000 is 9900.000000000002 in binary
    return min(max(int(math.ceil(round(alpha * n, 9))), 1), n)


def cvar_from_losses(losses: np.ndarray, alpha: float) -> CvarEstimate:
    """
    VaR is the order statistic at ceil(alpha * n); CVaR averages every loss
    at or above it, with standard error sd / sqrt(count) of those losses.
    """
    losses = np.asarray(losses, dtype=float).reshape(-1)
    if not 0.0 < alpha < 1.0:
        raise DomainError(f"Quantile level < {alpha} > must lie in (0, 1).")
    if losses.size < 2 or not np.all(np.isfinite(losses)):
        raise DomainError("CVaR needs at least 2 finite losses.")
    ordered = np.sort(losses)
    var = float(ordered[_var_index(alpha, losses.size) - 1])
    tail = losses[losses >= var]
    count = int(tail.size)
    std_error = (
        float(np.std(tail, ddof=1) / math.sqrt(count)) if count > 1 else math.nan
    )
    low = count < CVAR_MIN_EXCEEDANCES
    if low:
        logger.warning(
            "Only < %d > losses exceed the < %s > VaR; CVaR is unreliable.",
            count,
            alpha,
        )
    return CvarEstimate(
        alpha=float(alpha),
        var=var,
        cvar=float(np.mean(tail)),
        std_error=std_error,
        n_sims=int(losses.size),
        n_exceed=count,
        low_exceedance=low,
    )


def _simulated_losses(
    config: GroupConfig,
    dof: DofVector,
    corr: CorrelationMatrix,
    portfolio: Portfolio,
    n_sims: int,
    seed: int,
    linearized: bool,
    batch_size: int,
) -> np.ndarray:
    losses = np.empty(n_sims)
    for batch, start in enumerate(range(0, n_sims, batch_size)):
        size = min(batch_size, n_sims - start)
        u = simulate_uniforms(config, dof, corr, size, make_rng(seed, (batch,)))
        losses[start : start + size] = portfolio_loss(
            norm_quantile(u), portfolio, linearized
        )
    return losses


def _check_simulation(
    alpha: float,
    n_sims: int,
    batch_size: int,
    portfolio: Portfolio,
    corr: CorrelationMatrix,
) -> None:
    if not 0.5 < alpha < 1.0:
        raise DomainError(f"Quantile level < {alpha} > must lie in (0.5, 1).")
    if n_sims < CVAR_MIN_SIMS:
        raise DomainError(
            f"< {n_sims} > simulations is below the minimum < {CVAR_MIN_SIMS} >."
        )
    if batch_size < 1:
        raise DomainError(f"Batch size < {batch_size} > must be positive.")
    if portfolio.dim != corr.dim:
        raise ShapeError(
            f"Portfolio of < {portfolio.dim} > assets for a < {corr.dim} >"
            "-dimensional copula."
        )


def cvar_mc(
    config: GroupConfig,
    dof: DofVector,
    corr: CorrelationMatrix,
    portfolio: Portfolio,
    alpha: float,
    n_sims: int,
    seed: int,
    linearized: bool = False,
    batch_size: int = CVAR_BATCH_SIZE,
) -> CvarEstimate:
    """
    Simulates `n_sims` copula draws with standard normal margins in batches,
    batch b on random stream (seed, b), and reduces the portfolio losses to
    VaR and CVaR at level `alpha`.
    """
    _check_simulation(alpha, n_sims, batch_size, portfolio, corr)
    losses = _simulated_losses(
        config, dof, corr, portfolio, n_sims, seed, linearized, batch_size
    )
    return cvar_from_losses(losses, alpha)


class CvarComparison(NamedTuple):
    model_a: str
    model_b: str
    portfolio: str
    estimate_a: CvarEstimate
    estimate_b: CvarEstimate
    delta: float
    delta_se: float


def _point(score, point: str) -> DofVector:
    dof: Optional[DofVector] = getattr(score, point)
    if dof is None:
        raise SelectionError(
            f"Model < {score.model_id} > has no < {point} > estimate; run the "
            "`calibrate` command for it first."
        )
    return dof


def _tail_influence(losses: np.ndarray, estimate: CvarEstimate) -> np.ndarray:
    """Per-draw influence values of the CVaR estimate; they average to 0."""
    excess = np.where(losses >= estimate.var, losses - estimate.var, 0.0)
    return (
        estimate.var
        + excess * (losses.size / estimate.n_exceed)
        - estimate.cvar
    )


def compare_models(
    score_a,
    score_b,
    corr: CorrelationMatrix,
    portfolio: Portfolio,
    alpha: float,
    n_sims: int,
    seed: int,
    point: str = "map",
    linearized: bool = False,
    batch_size: int = CVAR_BATCH_SIZE,
) -> CvarComparison:
    """
    CVaR of one portfolio under two fitted models, both simulated from the
    same seed; delta = (CVaR_b - CVaR_a) / CVaR_a.

    The two loss samples share their random numbers draw by draw, so the
    standard error of delta comes from the paired influence values
    psi_b - (CVaR_b / CVaR_a) psi_a.
    """
    if point not in POINT_ESTIMATES:
        raise DomainError(
            f"Unknown point estimate < {point} >, expected one of "
            f"< {', '.join(POINT_ESTIMATES)} >."
        )
    _check_simulation(alpha, n_sims, batch_size, portfolio, corr)
    losses = [
        _simulated_losses(
            score.config,
            _point(score, point),
            corr,
            portfolio,
            n_sims,
            seed,
            linearized,
            batch_size,
        )
        for score in (score_a, score_b)
    ]
    first, second = (cvar_from_losses(loss, alpha) for loss in losses)
    ratio = second.cvar / first.cvar
    paired = _tail_influence(losses[1], second) - ratio * _tail_influence(
        losses[0], first
    )
    delta_se = float(
        np.std(paired, ddof=1) / (abs(first.cvar) * math.sqrt(n_sims))
    )
    return CvarComparison(
        model_a=score_a.model_id,
        model_b=score_b.model_id,
        portfolio=portfolio.name,
        estimate_a=first,
        estimate_b=second,
        delta=ratio - 1.0,
        delta_se=delta_se,
    )


def load_portfolio(path: PathLike, name: Optional[str] = None) -> Portfolio:
    """Reads a `label,weight` file into a portfolio named after the file."""
    path = Path(path)
    try:
        frame = pd.read_csv(path, dtype={"label": str}, skipinitialspace=True)
    except (OSError, pd.errors.ParserError, pd.errors.EmptyDataError) as e:
        raise DataError(f"Cannot read portfolio < {path} >: {e}") from e
    missing = [c for c in ("label", "weight") if c not in frame.columns]
    if missing:
        raise DataError(
            f"Portfolio < {path} > lacks column(s) < {', '.join(missing)} >.",
            column=missing[0],
        )
    weights = pd.to_numeric(frame["weight"], errors="coerce")
    if weights.isna().any():
        line = int(np.argmax(weights.isna().to_numpy())) + 2
        raise DataError(
            f"Portfolio < {path} > has a non-numeric weight.",
            line=line,
            column="weight",
        )
    return Portfolio(
        weights.to_numpy(dtype=float),
        tuple(frame["label"].str.strip()),
        name if name is not None else path.stem,
    )
