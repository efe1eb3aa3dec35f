import asyncio
import logging

from concurrent.futures import Executor, ProcessPoolExecutor, ThreadPoolExecutor
from dataclasses import asdict, dataclass, field, replace
from typing import Any, Dict, List, Optional, Tuple

import numpy as np

from tcopula_bayes._constants import (
    BATCH_COUNT,
    IMPORTANCE_T_DOF,
    QUAD_ABS_TOL,
    QUAD_REL_TOL,
)
from tcopula_bayes._copula import mle_fit
from tcopula_bayes._diagnostics import diagnostics, point_estimates
from tcopula_bayes._errors import SelectionError
from tcopula_bayes._evidence import (
    ImportanceDensity,
    dic,
    lr_test,
    posterior_model_probs,
    rise_log_evidence,
)
from tcopula_bayes._family import ModelFamily
from tcopula_bayes._mcmc import (
    ChainConfig,
    CopulaLogPosterior,
    PosteriorSample,
    PriorSpec,
    run_chain,
)
from tcopula_bayes._store import ChainStore, chain_digest
from tcopula_bayes._types import CorrelationMatrix, DofVector, GroupConfig, PseudoSample

__all__ = (
    "ModelScore",
    "SelectionOptions",
    "SelectionReport",
    "run_selection",
    "run_selection_async",
    "score_model",
)

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class SelectionOptions:
    batch_count: int = BATCH_COUNT
    importance: str = "normal"
    importance_dof: float = IMPORTANCE_T_DOF
    ridge: float = 0.0
    rel_tol: float = QUAD_REL_TOL
    abs_tol: float = QUAD_ABS_TOL
    mle_init: float = 10.0
    workers: int = 1


def _values(dof: Optional[DofVector], config: GroupConfig) -> Optional[List[float]]:
    if dof is None:
        return None
    return dof.group_values(config).tolist()


@dataclass(frozen=True)
class ModelScore:
    model_id: str
    config: GroupConfig
    status: str = "ok"
    error: str = ""
    log_rise: Optional[float] = None
    log_bayes_factor: Optional[float] = None
    dic: Optional[float] = None
    p_eff: Optional[float] = None
    post_prob: Optional[float] = None
    post_prob_excl_best: Optional[float] = None
    mle: Optional[DofVector] = None
    mle_loglik: Optional[float] = None
    mle_converged: Optional[bool] = None
    map: Optional[DofVector] = None
    map_loglik: Optional[float] = None
    mmse: Optional[DofVector] = None
    mmse_se: Optional[Tuple[float, ...]] = None
    loglik_at_mean: Optional[float] = None
    lr_stat: Optional[float] = None
    lr_df: Optional[int] = None
    lr_pvalue: Optional[float] = None
    diagnostics: Dict[str, Any] = field(default_factory=dict)
    acceptance_rate: Optional[Tuple[float, ...]] = None

    @property
    def ok(self) -> bool:
        return self.status == "ok"

    def to_dict(self) -> Dict[str, Any]:
        data = asdict(self)
        data["config"] = self.config.key
        data["groups"] = [list(group) for group in self.config.groups]
        for name in ("mle", "map", "mmse"):
            data[name] = _values(getattr(self, name), self.config)
        data["bounds"] = list(self.mmse.bounds) if self.mmse else None
        for name in ("mmse_se", "acceptance_rate"):
            if data[name] is not None:
                data[name] = list(data[name])
        return data

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "ModelScore":
        config = GroupConfig.from_key(data["config"])
        bounds = tuple(data.get("bounds") or (1.0, 100.0))
        values = {}
        for name in ("mle", "map", "mmse"):
            raw = data.get(name)
            values[name] = (
                None if raw is None else DofVector.from_groups(config, raw, bounds)
            )
        tuples = {
            name: None if data.get(name) is None else tuple(data[name])
            for name in ("mmse_se", "acceptance_rate")
        }
        plain = {
            key: data[key]
            for key in cls.__dataclass_fields__
            if key in data and key not in ("config", *values, *tuples)
        }
        return cls(config=config, **values, **tuples, **plain)


def score_model(
    sample: PseudoSample,
    config: GroupConfig,
    corr: CorrelationMatrix,
    prior: PriorSpec,
    chain_cfg: ChainConfig,
    model_id: str,
    options: SelectionOptions = SelectionOptions(),
    store: Optional[ChainStore] = None,
) -> Tuple[ModelScore, PosteriorSample]:
    """
    Full single-model pipeline: MLE, chain (reused from `store` when the
    inputs match), diagnostics, point estimates, RISE evidence and DIC.
    """
    posterior = CopulaLogPosterior(
        sample, config, corr, prior, rel_tol=options.rel_tol, abs_tol=options.abs_tol
    )
    init_value = options.mle_init
    if not prior.lower < init_value < prior.upper:
        init_value = 0.5 * (prior.lower + prior.upper)
    mle = mle_fit(
        sample,
        config,
        corr,
        DofVector.from_groups(
            config, [init_value] * config.n_groups, prior.bounds
        ),
        rel_tol=options.rel_tol,
        abs_tol=options.abs_tol,
    )

    chain = None
    digest = chain_digest(
        sample, config, prior, chain_cfg, options.rel_tol, options.abs_tol
    )
    if store is not None:
        chain = store.load(model_id, digest)
    if chain is None:
        chain = run_chain(
            sample,
            config,
            corr,
            prior,
            chain_cfg,
            model_id=model_id,
            rel_tol=options.rel_tol,
            abs_tol=options.abs_tol,
        )
        if store is not None:
            store.save(chain, digest)

    diag = diagnostics(chain, options.batch_count)
    estimates = point_estimates(chain)
    density = ImportanceDensity.fit(
        chain.draws,
        family=options.importance,
        dof=options.importance_dof,
        ridge=options.ridge,
        bounds=prior.bounds,
        seed=chain_cfg.seed,
    )
    log_rise = rise_log_evidence(chain, None, prior, density)
    criterion = dic(chain, posterior.log_likelihood)

    score = ModelScore(
        model_id=model_id,
        config=config,
        log_rise=log_rise,
        dic=criterion.dic,
        p_eff=criterion.p_eff,
        mle=mle.dof,
        mle_loglik=mle.log_lik,
        mle_converged=mle.converged,
        map=estimates.map,
        map_loglik=float(np.max(chain.log_lik)),
        mmse=estimates.mmse,
        mmse_se=tuple(diag.batch_se.tolist()),
        loglik_at_mean=-0.5 * criterion.deviance_at_mean,
        diagnostics=diag.to_dict(),
        acceptance_rate=tuple(chain.acceptance_rate.tolist()),
    )
    logger.info(
        "Model < %s >: log evidence %.4f, DIC %.4f, MLE log-likelihood %.4f.",
        model_id,
        log_rise,
        criterion.dic,
        mle.log_lik,
    )
    return score, chain


@dataclass(frozen=True)
class SelectionReport:
    scores: Tuple[ModelScore, ...]
    labels: Tuple[str, ...] = ()

    @property
    def fitted(self) -> Tuple[ModelScore, ...]:
        return tuple(score for score in self.scores if score.ok)

    @property
    def failed(self) -> Tuple[str, ...]:
        return tuple(score.model_id for score in self.scores if not score.ok)

    @property
    def rankings(self) -> Dict[str, Tuple[str, ...]]:
        fitted = self.fitted
        return {
            "rise": tuple(
                s.model_id for s in sorted(fitted, key=lambda s: -s.log_rise)
            ),
            "dic": tuple(s.model_id for s in sorted(fitted, key=lambda s: s.dic)),
            "post_prob": tuple(
                s.model_id for s in sorted(fitted, key=lambda s: -s.post_prob)
            ),
        }

    def get(self, model_id: str) -> ModelScore:
        for score in self.scores:
            if score.model_id == model_id:
                return score
        raise SelectionError(f"Model < {model_id} > is not in the report.")

    def to_dict(self) -> Dict[str, Any]:
        return {
            "labels": list(self.labels),
            "models": [score.to_dict() for score in self.scores],
            "rankings": {k: list(v) for k, v in self.rankings.items()},
            "failed": list(self.failed),
        }

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "SelectionReport":
        return cls(
            scores=tuple(ModelScore.from_dict(item) for item in data["models"]),
            labels=tuple(data.get("labels", ())),
        )

    def posterior_rows(self) -> List[Dict[str, Any]]:
        """Posterior mean, its standard error and the log-likelihood there."""
        rows = []
        for score in self.fitted:
            row: Dict[str, Any] = {"model": score.model_id}
            for k, (value, se) in enumerate(
                zip(score.mmse.group_values(score.config), score.mmse_se)
            ):
                row[f"nu_{k}"] = value
                row[f"se_{k}"] = se
            row["loglik_at_mean"] = score.loglik_at_mean
            rows.append(row)
        return rows

    def mode_rows(self) -> List[Dict[str, Any]]:
        """Posterior mode, its log-likelihood and the LR test against M0."""
        rows = []
        for score in self.fitted:
            row: Dict[str, Any] = {"model": score.model_id}
            for k, value in enumerate(score.map.group_values(score.config)):
                row[f"nu_{k}"] = value
            row.update(
                map_loglik=score.map_loglik,
                mle_loglik=score.mle_loglik,
                lr_stat=score.lr_stat,
                lr_df=score.lr_df,
                lr_pvalue=score.lr_pvalue,
            )
            rows.append(row)
        return rows

    def criteria_rows(self) -> List[Dict[str, Any]]:
        labels = self.labels or None
        return [
            {
                "model": score.model_id,
                "groups": score.config.describe(labels),
                "log_bayes_factor": score.log_bayes_factor,
                "dic": score.dic,
                "p_eff": score.p_eff,
                "post_prob": score.post_prob,
                "post_prob_excl_best": score.post_prob_excl_best,
            }
            for score in self.fitted
        ]


def _finalize(
    scores: List[ModelScore], chains: Dict[str, PosteriorSample]
) -> List[ModelScore]:
    fitted = [score for score in scores if score.ok]
    if not fitted:
        return scores

    best_rise = max(score.log_rise for score in fitted)
    best_dic = min(score.dic for score in fitted)
    probs = posterior_model_probs([chains[s.model_id].log_lik for s in fitted])
    best = int(np.argmax(probs))
    excl = (
        posterior_model_probs(
            [chains[s.model_id].log_lik for s in fitted], exclude=best
        )
        if len(fitted) > 1
        else np.full(1, np.nan)
    )

    generalized = next((s for s in fitted if s.config.is_generalized), None)
    updated = {}
    for index, score in enumerate(fitted):
        lr: Dict[str, Any] = {}
        if generalized is not None and score is not generalized:
            df = score.config.dim - score.config.n_groups
            result = lr_test(score.mle_loglik, generalized.mle_loglik, df)
            lr = {
                "lr_stat": result.stat,
                "lr_df": result.df,
                "lr_pvalue": result.pvalue,
            }
        updated[score.model_id] = replace(
            score,
            log_bayes_factor=best_rise - score.log_rise,
            dic=score.dic - best_dic,
            post_prob=float(probs[index]),
            post_prob_excl_best=(
                None if index == best else float(excl[index])
            ),
            **lr,
        )
    return [updated.get(score.model_id, score) for score in scores]


def _make_executor(workers: int) -> Executor:
    if workers > 1:
        return ProcessPoolExecutor(max_workers=workers)
    return ThreadPoolExecutor(max_workers=1)


async def run_selection_async(
    sample: PseudoSample,
    family: ModelFamily,
    corr: CorrelationMatrix,
    prior: PriorSpec,
    chain_cfg: ChainConfig,
    options: SelectionOptions = SelectionOptions(),
    store: Optional[ChainStore] = None,
    executor: Optional[Executor] = None,
) -> SelectionReport:
    """
    Scores every model of `family` concurrently, each chain on its own
    random stream keyed by the model's group labels. A model that fails is
    reported with its error and left out of the joint criteria.
    """
    loop = asyncio.get_running_loop()
    owned = executor is None
    if owned:
        executor = _make_executor(options.workers)
    try:
        results = await asyncio.gather(
            *[
                loop.run_in_executor(
                    executor,
                    score_model,
                    sample,
                    config,
                    corr,
                    prior,
                    replace(chain_cfg, stream=config.group_of),
                    model_id,
                    options,
                    store,
                )
                for model_id, config in family
            ],
            return_exceptions=True,
        )
    finally:
        if owned:
            executor.shutdown(wait=True)

    scores: List[ModelScore] = []
    chains: Dict[str, PosteriorSample] = {}
    for (model_id, config), result in zip(family, results):
        if isinstance(result, BaseException):
            logger.error(
                "Model < %s > failed: %s", model_id, result, exc_info=result
            )
            scores.append(
                ModelScore(
                    model_id=model_id,
                    config=config,
                    status="failed",
                    error=f"{type(result).__name__}: {result}",
                )
            )
            continue
        score, chain = result
        scores.append(score)
        chains[model_id] = chain

    return SelectionReport(tuple(_finalize(scores, chains)), sample.labels)


def run_selection(
    sample: PseudoSample,
    family: ModelFamily,
    corr: CorrelationMatrix,
    prior: PriorSpec,
    chain_cfg: ChainConfig,
    options: SelectionOptions = SelectionOptions(),
    store: Optional[ChainStore] = None,
) -> SelectionReport:
    return asyncio.run(
        run_selection_async(sample, family, corr, prior, chain_cfg, options, store)
    )
