import logging
import math

from concurrent.futures import ThreadPoolExecutor

import numpy as np
import pytest

_FAKE = {
    # model_id: (log_rise, dic, mle_loglik, per-sweep log-likelihood)
    "M0": (-100.0, 210.0, -95.0, [0.0, 0.0, 0.0, 0.0]),
    "M1": (-98.0, 205.0, -96.0, [math.log(3.0)] * 4),
    "M2": (-101.0, 212.0, -99.0, [-50.0] * 4),
}


@pytest.fixture
def fake_score_model(monkeypatch):
    from tcopula_bayes import _selection
    from tcopula_bayes._errors import ConvergenceError
    from tcopula_bayes._mcmc import PosteriorSample
    from tcopula_bayes._types import DofVector

    calls = []

    def score_model(sample, config, corr, prior, chain_cfg, model_id, options, store):
        calls.append((model_id, chain_cfg.stream))
        if model_id not in _FAKE:
            raise ConvergenceError("quadrature budget exhausted")
        log_rise, dic, mle_loglik, log_lik = _FAKE[model_id]
        dof = DofVector.from_groups(config, [5.0] * config.n_groups)
        chain = PosteriorSample(
            draws=np.full((4, config.n_groups), 5.0),
            log_lik=log_lik,
            acceptance_rate=[0.25] * config.n_groups,
            config=config,
            model_id=model_id,
        )
        score = _selection.ModelScore(
            model_id=model_id,
            config=config,
            log_rise=log_rise,
            dic=dic,
            p_eff=1.5,
            mle=dof,
            mle_loglik=mle_loglik,
            mle_converged=True,
            map=dof,
            map_loglik=max(log_lik),
            mmse=dof,
            mmse_se=(0.1,) * config.n_groups,
            loglik_at_mean=-96.0,
            acceptance_rate=(0.25,) * config.n_groups,
        )
        return score, chain

    monkeypatch.setattr(_selection, "score_model", score_model)
    return calls


def _family(ids=("M0", "M1", "M2", "M3")):
    from tcopula_bayes._family import enumerate_models

    return enumerate_models(3).subset(list(ids))


def _arguments():
    from tcopula_bayes._mcmc import ChainConfig, PriorSpec
    from tcopula_bayes._types import CorrelationMatrix, PseudoSample

    sample = PseudoSample([[0.2, 0.4, 0.6], [0.7, 0.1, 0.5]], ("A", "B", "C"))
    return sample, CorrelationMatrix.identity(3), PriorSpec(), ChainConfig(seed=5)


@pytest.mark.asyncio
async def test_selection__run_selection_async_joint_criteria(fake_score_model, caplog):
    from tcopula_bayes._selection import run_selection_async

    sample, corr, prior, chain_cfg = _arguments()
    family = _family()

    with ThreadPoolExecutor(max_workers=2) as executor:
        with caplog.at_level(logging.ERROR, logger="tcopula_bayes._selection"):
            report = await run_selection_async(
                sample, family, corr, prior, chain_cfg, executor=executor
            )

    assert sorted(fake_score_model) == [
        ("M0", (0, 1, 2)),
        ("M1", (0, 1, 1)),
        ("M2", (0, 1, 0)),
        ("M3", (0, 0, 1)),
    ]
    assert report.labels == ("A", "B", "C")
    assert report.failed == ("M3",)
    assert "M3" in caplog.text

    m0, m1, m2 = (report.get(model_id) for model_id in ("M0", "M1", "M2"))
    assert (m0.log_bayes_factor, m1.log_bayes_factor, m2.log_bayes_factor) == (
        2.0,
        0.0,
        3.0,
    )
    assert (m0.dic, m1.dic, m2.dic) == (5.0, 0.0, 7.0)
    assert m0.post_prob + m1.post_prob + m2.post_prob == pytest.approx(1.0)
    assert m1.post_prob == pytest.approx(0.75)
    assert m1.post_prob_excl_best is None
    assert m0.post_prob_excl_best == pytest.approx(1.0)
    assert m0.lr_stat is None
    assert (m1.lr_stat, m1.lr_df) == (pytest.approx(2.0), 1)
    assert m1.lr_pvalue == pytest.approx(0.1572992, rel=1e-5)
    assert report.rankings == {
        "rise": ("M1", "M0", "M2"),
        "dic": ("M1", "M0", "M2"),
        "post_prob": ("M1", "M0", "M2"),
    }

    failed = report.get("M3")
    assert not failed.ok
    assert failed.error == "ConvergenceError: quadrature budget exhausted"


def test_selection__run_selection_without_generalized(fake_score_model):
    from tcopula_bayes._selection import run_selection

    sample, corr, prior, chain_cfg = _arguments()

    report = run_selection(sample, _family(["M2", "M1"]), corr, prior, chain_cfg)

    assert [score.model_id for score in report.scores] == ["M2", "M1"]
    assert all(score.lr_stat is None for score in report.scores)
    assert report.get("M2").post_prob_excl_best == pytest.approx(1.0)


def test_selection__report_round_trip(fake_score_model):
    from tcopula_bayes._selection import SelectionReport, run_selection

    sample, corr, prior, chain_cfg = _arguments()
    report = run_selection(sample, _family(), corr, prior, chain_cfg)

    restored = SelectionReport.from_dict(report.to_dict())

    assert restored.to_dict() == report.to_dict()
    assert restored.get("M1").mmse == report.get("M1").mmse
    assert restored.get("M3").status == "failed"


def test_selection__report_rows(fake_score_model):
    from tcopula_bayes._selection import run_selection

    sample, corr, prior, chain_cfg = _arguments()
    report = run_selection(sample, _family(), corr, prior, chain_cfg)

    posterior = report.posterior_rows()
    modes = report.mode_rows()
    criteria = report.criteria_rows()

    assert [row["model"] for row in posterior] == ["M0", "M1", "M2"]
    assert posterior[0] == {
        "model": "M0",
        "nu_0": 5.0,
        "se_0": 0.1,
        "nu_1": 5.0,
        "se_1": 0.1,
        "nu_2": 5.0,
        "se_2": 0.1,
        "loglik_at_mean": -96.0,
    }
    assert modes[1]["lr_df"] == 1
    assert criteria[1]["groups"] == "(A), (B, C)"


def test_selection__report_unknown_model():
    from tcopula_bayes._errors import SelectionError
    from tcopula_bayes._selection import SelectionReport

    with pytest.raises(SelectionError):
        SelectionReport(()).get("M1")


def test_selection__model_score_dict_of_failed_model():
    from tcopula_bayes._selection import ModelScore
    from tcopula_bayes._types import GroupConfig

    score = ModelScore("M4", GroupConfig((0, 0)), status="failed", error="x")

    data = score.to_dict()

    assert data["config"] == "0-0"
    assert data["groups"] == [[0, 1]]
    assert data["mmse"] is None
    assert ModelScore.from_dict(data) == score


def test_selection__score_model_reuses_stored_chain(tmp_path, caplog):
    from tcopula_bayes._copula import simulate
    from tcopula_bayes._mcmc import ChainConfig, PriorSpec
    from tcopula_bayes._selection import SelectionOptions, score_model
    from tcopula_bayes._store import ChainStore
    from tcopula_bayes._types import CorrelationMatrix, DofVector, GroupConfig

    config = GroupConfig((0, 1))
    corr = CorrelationMatrix.equicorrelated(2, 0.5)
    sample = simulate(config, DofVector([3.0, 3.0]), corr, 40, seed=1)
    chain_cfg = ChainConfig(
        seed=3, n_tune=20, tune_window=10, tune_check=10, n_burn=10, n_sample=40
    )
    options = SelectionOptions(batch_count=10, rel_tol=1e-7)
    store = ChainStore(tmp_path)

    first, chain = score_model(
        sample, config, corr, PriorSpec(), chain_cfg, "M0", options, store
    )
    with caplog.at_level(logging.INFO, logger="tcopula_bayes._store"):
        second, _ = score_model(
            sample, config, corr, PriorSpec(), chain_cfg, "M0", options, store
        )

    assert "Cache hit" in caplog.text
    assert second == first
    assert chain.n_draws == 40
    assert first.map_loglik == float(np.max(chain.log_lik))
    assert first.mle_loglik >= first.map_loglik - 1e-3
    assert math.isfinite(first.log_rise)
    assert first.diagnostics["batch_count"] == 10
    assert len(first.mmse_se) == 2
