import argparse
import logging
import sys

from dataclasses import replace
from pathlib import Path
from typing import Callable, Dict, List, Optional, Sequence, Tuple

from tcopula_bayes._config import RunConfig, config_overrides, load_config
from tcopula_bayes._constants import (
    EXIT_CONVERGENCE,
    EXIT_DATA,
    EXIT_FAILURE,
    EXIT_OK,
    EXIT_PARTIAL,
    EXIT_VALIDATION,
)
from tcopula_bayes._copula import simulate
from tcopula_bayes._data import ingest_csv, read_matrix, write_matrix
from tcopula_bayes._dependence import kendall_corr, to_pseudo_obs
from tcopula_bayes._errors import (
    ConvergenceError,
    DataError,
    SelectionError,
    TCopulaError,
    ValidationError,
)
from tcopula_bayes._family import ModelFamily, enumerate_models
from tcopula_bayes._garch import filter_series
from tcopula_bayes._random import make_rng
from tcopula_bayes._report import (
    comparison_rows,
    copy_config,
    garch_rows,
    read_json,
    render_table,
    write_json,
    write_manifest,
    write_rows,
    write_selection,
)
from tcopula_bayes._risk import compare_models, cvar_from_losses, load_portfolio
from tcopula_bayes._selection import (
    ModelScore,
    SelectionReport,
    run_selection,
    score_model,
)
from tcopula_bayes._store import ChainStore
from tcopula_bayes._types import CorrelationMatrix, PseudoSample

__all__ = ("main",)

logger = logging.getLogger(__name__)

PSEUDO_OBS_NAME = "pseudo_obs.csv"
CHAIN_DIR = "chains"
CALIBRATE_DIR = "calibrate"

_LOG_LEVELS = (logging.WARNING, logging.INFO, logging.DEBUG)


def _load_sample(config: RunConfig) -> Tuple[PseudoSample, CorrelationMatrix]:
    path = config.pseudo_obs or config.output_dir / PSEUDO_OBS_NAME
    if not path.exists():
        raise DataError(
            f"Pseudo-observations < {path} > not found; run the `filter` "
            "command first or set [data] pseudo_obs."
        )
    values, labels = read_matrix(path)
    sample = PseudoSample(values, labels)
    return sample, kendall_corr(sample)


def _family(config: RunConfig, dim: int) -> ModelFamily:
    family = enumerate_models(dim, config.policy)
    if config.model_ids:
        family = family.subset(config.model_ids)
    return family


def _checked_model(family: ModelFamily, model_id: Optional[str]) -> str:
    if model_id is None:
        raise ValidationError(["--model is required for this command."])
    try:
        family.get(model_id)
    except SelectionError as e:
        raise ValidationError([str(e)]) from e
    return model_id


def _load_score(config: RunConfig, model_id: str) -> ModelScore:
    single = config.output_dir / CALIBRATE_DIR / f"{model_id}.json"
    if single.exists():
        return ModelScore.from_dict(read_json(single))
    selection = config.output_dir / "selection.json"
    if selection.exists():
        report = SelectionReport.from_dict(read_json(selection))
        try:
            score = report.get(model_id)
        except SelectionError:
            score = None
        if score is not None and score.ok:
            return score
    raise SelectionError(
        f"No fitted estimates for < {model_id} >; run "
        f"`tcopula-bayes calibrate --model {model_id}` first."
    )


def cmd_filter(config: RunConfig, args: argparse.Namespace) -> int:
    if config.data_path is None:
        raise ValidationError(["[data] path is required by `filter`."])
    ingested = ingest_csv(config.data_path, config.schema)
    fits, residuals = filter_series(ingested.series)
    sample = to_pseudo_obs(residuals)
    corr = kendall_corr(sample)

    out = config.output_dir
    write_rows(out / "garch.csv", garch_rows(fits, residuals.labels))
    write_matrix(out / "residuals.csv", residuals.eps, residuals.labels)
    write_matrix(out / PSEUDO_OBS_NAME, sample.u, sample.labels)
    write_matrix(out / "correlation.csv", corr.entries, sample.labels)
    logger.info(
        "Filtered < %d > observations of < %d > assets.",
        sample.n_obs,
        sample.dim,
    )
    return EXIT_OK


def cmd_calibrate(config: RunConfig, args: argparse.Namespace) -> int:
    sample, corr = _load_sample(config)
    family = enumerate_models(sample.dim, config.policy)
    model_id = _checked_model(family, args.model)
    model = family.get(model_id)
    # keyed as in run_selection_async
    score, _ = score_model(
        sample,
        model,
        corr,
        config.prior,
        replace(config.chain, stream=model.group_of),
        model_id,
        config.selection,
        ChainStore(config.output_dir / CHAIN_DIR),
    )
    write_json(
        config.output_dir / CALIBRATE_DIR / f"{model_id}.json", score.to_dict()
    )
    print(render_table(SelectionReport((score,), sample.labels).posterior_rows()))
    return EXIT_OK


def cmd_select(config: RunConfig, args: argparse.Namespace) -> int:
    sample, corr = _load_sample(config)
    family = _family(config, sample.dim)
    report = run_selection(
        sample,
        family,
        corr,
        config.prior,
        config.chain,
        config.selection,
        ChainStore(config.output_dir / CHAIN_DIR),
    )
    write_selection(report, config.output_dir)
    print(render_table(report.criteria_rows()))
    if report.failed:
        logger.error("Models < %s > failed.", ", ".join(report.failed))
        return EXIT_PARTIAL
    return EXIT_OK


def cmd_simulate(config: RunConfig, args: argparse.Namespace) -> int:
    sample, corr = _load_sample(config)
    family = enumerate_models(sample.dim, config.policy)
    model_id = _checked_model(family, args.model)
    score = _load_score(config, model_id)
    dof = getattr(score, config.risk.point)
    if dof is None:
        raise SelectionError(
            f"Model < {model_id} > has no < {config.risk.point} > estimate."
        )
    draws = simulate(score.config, dof, corr, args.draws, config.risk_seed)
    write_matrix(
        config.output_dir / f"simulated_{model_id}.csv", draws.u, sample.labels
    )
    return EXIT_OK


def _self_test(config: RunConfig) -> int:
    losses = make_rng(config.risk_seed).random(config.risk.n_sims)
    rows = []
    for alpha in config.risk.alphas:
        estimate = cvar_from_losses(losses, alpha)
        rows.append(
            {
                "alpha": alpha,
                "var": estimate.var,
                "cvar": estimate.cvar,
                "expected": 0.5 * (1.0 + alpha),
                "std_error": estimate.std_error,
            }
        )
    write_rows(config.output_dir / "cvar_self_test.csv", rows)
    print(render_table(rows))
    return EXIT_OK


def cmd_cvar(config: RunConfig, args: argparse.Namespace) -> int:
    if args.self_test:
        return _self_test(config)
    if not config.risk.portfolios:
        raise ValidationError(["[risk] portfolios is required by `cvar`."])
    sample, corr = _load_sample(config)
    family = enumerate_models(sample.dim, config.policy)
    model_a = _checked_model(family, args.model)
    model_b = _checked_model(family, args.against or args.model)
    score_a = _load_score(config, model_a)
    score_b = _load_score(config, model_b)

    comparisons = []
    for path in config.risk.portfolios:
        portfolio = load_portfolio(path)
        if sample.labels:
            portfolio = portfolio.aligned(sample.labels)
        for alpha in config.risk.alphas:
            comparisons.append(
                compare_models(
                    score_a,
                    score_b,
                    corr,
                    portfolio,
                    alpha,
                    config.risk.n_sims,
                    config.risk_seed,
                    point=config.risk.point,
                    linearized=config.risk.linearized,
                )
            )
    rows = comparison_rows(comparisons)
    write_rows(config.output_dir / f"cvar_{model_a}_{model_b}.csv", rows)
    print(render_table(rows))
    return EXIT_OK


def cmd_report(config: RunConfig, args: argparse.Namespace) -> int:
    path = config.output_dir / "selection.json"
    if not path.exists():
        raise DataError(f"< {path} > not found; run the `select` command first.")
    report = SelectionReport.from_dict(read_json(path))
    sections = [
        ("Posterior mean", report.posterior_rows()),
        ("Posterior mode", report.mode_rows()),
        ("Model choice", report.criteria_rows()),
    ]
    text = "\n\n".join(
        f"{title}\n{render_table(rows, args.digits)}" for title, rows in sections
    )
    (config.output_dir / "report.txt").write_text(text + "\n")
    print(text)
    return EXIT_OK


_COMMANDS: Dict[str, Callable[[RunConfig, argparse.Namespace], int]] = {
    "filter": cmd_filter,
    "calibrate": cmd_calibrate,
    "select": cmd_select,
    "simulate": cmd_simulate,
    "cvar": cmd_cvar,
    "report": cmd_report,
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="tcopula-bayes",
        description="Bayesian calibration and selection of grouped t-copulas.",
    )
    parser.add_argument("-c", "--config", type=Path, required=True)
    parser.add_argument("--seed", type=int, help="Overrides [chain] seed.")
    parser.add_argument(
        "-o", "--output-dir", type=Path, help="Overrides [output] directory."
    )
    parser.add_argument("-v", "--verbose", action="count", default=0)
    commands = parser.add_subparsers(dest="command", required=True)

    commands.add_parser("filter", help="GARCH filtering and pseudo-observations.")
    calibrate = commands.add_parser("calibrate", help="Fit one model.")
    calibrate.add_argument("-m", "--model", required=True)
    commands.add_parser("select", help="Fit and rank the model family.")
    simulate_cmd = commands.add_parser("simulate", help="Draw from a fitted model.")
    simulate_cmd.add_argument("-m", "--model", required=True)
    simulate_cmd.add_argument("-n", "--draws", type=int, default=10000)
    cvar = commands.add_parser("cvar", help="Compare CVaR under two models.")
    cvar.add_argument("-m", "--model")
    cvar.add_argument("--against")
    cvar.add_argument(
        "--self-test",
        action="store_true",
        help="Reduce uniform(0, 1) losses instead of simulating a copula.",
    )
    report = commands.add_parser("report", help="Render saved selection tables.")
    report.add_argument("--digits", type=int, default=4)
    return parser


def _exit_code(error: Exception) -> int:
    if isinstance(error, ValidationError):
        return EXIT_VALIDATION
    if isinstance(error, DataError):
        return EXIT_DATA
    if isinstance(error, ConvergenceError):
        return EXIT_CONVERGENCE
    return EXIT_FAILURE


def run(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(
        level=_LOG_LEVELS[min(args.verbose, len(_LOG_LEVELS) - 1)],
        format="%(levelname)s %(name)s: %(message)s",
    )
    if args.command == "cvar" and not args.self_test and args.model is None:
        logger.error("`cvar` needs --model unless --self-test is given.")
        return EXIT_VALIDATION

    output_dir = args.output_dir.resolve() if args.output_dir else None
    try:
        overrides = config_overrides(seed=args.seed, output_dir=output_dir)
        config = load_config(args.config, overrides)
        config.output_dir.mkdir(parents=True, exist_ok=True)
        copy_config(config.source, config.output_dir, overrides)
        code = _COMMANDS[args.command](config, args)
    except TCopulaError as e:
        logger.error("%s", e)
        return _exit_code(e)
    write_manifest(config.output_dir)
    return code


def main(argv: Optional[List[str]] = None) -> None:
    sys.exit(run(argv))
