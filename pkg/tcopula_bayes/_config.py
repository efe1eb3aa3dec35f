import configparser
import logging

from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Callable, Dict, List, Mapping, Optional, Tuple, Union

from tcopula_bayes._constants import (
    BATCH_COUNT,
    BURN_SWEEPS,
    CLI_SECTION,
    CVAR_MIN_SIMS,
    IMPORTANCE_T_DOF,
    MISSING_TOKENS,
    NU_MAX,
    NU_MIN,
    QUAD_ABS_TOL,
    QUAD_REL_TOL,
    SAMPLE_SWEEPS,
    TUNE_CHECK_SWEEPS,
    TUNE_SWEEPS,
    TUNE_WINDOW,
)
from tcopula_bayes._data import CsvSchema
from tcopula_bayes._errors import TCopulaError, ValidationError
from tcopula_bayes._evidence import IMPORTANCE_FAMILIES
from tcopula_bayes._family import POLICIES
from tcopula_bayes._mcmc import ChainConfig, PriorSpec
from tcopula_bayes._risk import POINT_ESTIMATES
from tcopula_bayes._selection import SelectionOptions

__all__ = ("RiskSettings", "RunConfig", "config_overrides", "load_config")

logger = logging.getLogger(__name__)

PathLike = Union[str, Path]

_SECTIONS = (
    "data",
    "prior",
    "chain",
    "models",
    "quadrature",
    "selection",
    "risk",
    "output",
)


@dataclass(frozen=True)
class RiskSettings:
    portfolios: Tuple[Path, ...] = ()
    alphas: Tuple[float, ...] = (0.99,)
    n_sims: int = CVAR_MIN_SIMS
    point: str = "map"
    linearized: bool = False
    seed: Optional[int] = None


@dataclass(frozen=True)
class RunConfig:
    """
    Validated batch run settings. Relative paths in the file are resolved
    against the directory holding it.
    """

    source: Path
    output_dir: Path
    chain: ChainConfig
    prior: PriorSpec = field(default_factory=PriorSpec)
    data_path: Optional[Path] = None
    schema: Optional[CsvSchema] = None
    pseudo_obs: Optional[Path] = None
    policy: str = "two-group"
    model_ids: Tuple[str, ...] = ()
    selection: SelectionOptions = field(default_factory=SelectionOptions)
    risk: RiskSettings = field(default_factory=RiskSettings)

    @property
    def risk_seed(self) -> int:
        return self.chain.seed if self.risk.seed is None else self.risk.seed


def _split(text: str) -> Tuple[str, ...]:
    return tuple(part.strip() for part in text.split(",") if part.strip())


def _boolean(text: str) -> bool:
    value = text.strip().lower()
    if value in ("1", "yes", "true", "on"):
        return True
    if value in ("0", "no", "false", "off"):
        return False
    raise ValueError(f"not a boolean: {text!r}")


class _Reader:
    """Typed access to the parser that records problems instead of raising."""

    def __init__(self, parser: configparser.ConfigParser) -> None:
        self.parser = parser
        self.problems: List[str] = []

    def get(
        self,
        section: str,
        key: str,
        convert: Callable[[str], Any] = str,
        default: Any = None,
        required: bool = False,
    ) -> Any:
        raw = self.parser.get(section, key, fallback=None)
        if raw is None or not raw.strip():
            if required:
                self.problems.append(f"[{section}] {key} is required.")
            return default
        try:
            return convert(raw.strip())
        except ValueError as e:
            self.problems.append(f"[{section}] {key} = < {raw} > is invalid: {e}")
            return default

    def path(
        self, section: str, key: str, base: Path, must_exist: bool = True
    ) -> Optional[Path]:
        raw = self.get(section, key)
        if raw is None:
            return None
        resolved = (base / raw).resolve()
        if must_exist and not resolved.exists():
            self.problems.append(
                f"[{section}] {key} = < {raw} > does not exist ({resolved})."
            )
        return resolved

    def build(
        self,
        label: str,
        factory: Callable[..., Any],
        required: Tuple[str, ...] = (),
        **kwargs: Any,
    ) -> Any:
        if any(kwargs[name] is None for name in required):
            return None
        try:
            return factory(**kwargs)
        except (TCopulaError, TypeError) as e:
            self.problems.append(f"[{label}] {e}")
            return None


def _read_header(path: Path, delimiter: Optional[str]) -> Tuple[str, ...]:
    with path.open() as handle:
        for line in handle:
            if line.strip():
                sep = delimiter or ("\t" if "\t" in line else ",")
                return tuple(name.strip() for name in line.split(sep))
    return ()


def _apply_overrides(
    parser: configparser.ConfigParser, overrides: Mapping[str, Any]
) -> None:
    for dotted, value in overrides.items():
        if value is None:
            continue
        section, _, key = dotted.partition(".")
        if not parser.has_section(section):
            parser.add_section(section)
        parser.set(section, key, str(value))


def load_config(
    path: PathLike, overrides: Optional[Mapping[str, Any]] = None
) -> RunConfig:
    """
    Reads an INI run configuration. `overrides` maps "section.key" to a
    value replacing the file's (None leaves it alone); entries of a [cli]
    section are applied the same way first. Every problem found is reported
    at once in a ValidationError.
    """
    path = Path(path)
    parser = configparser.ConfigParser()
    try:
        if not parser.read(path):
            raise ValidationError([f"Config file < {path} > cannot be read."])
    except configparser.Error as e:
        raise ValidationError([f"Config file < {path} > is malformed: {e}"]) from e
    recorded = (
        dict(parser.items(CLI_SECTION, raw=True))
        if parser.has_section(CLI_SECTION)
        else {}
    )
    parser.remove_section(CLI_SECTION)
    _apply_overrides(parser, recorded)
    _apply_overrides(parser, overrides or {})
    base = path.resolve().parent
    reader = _Reader(parser)

    unknown = [s for s in parser.sections() if s not in _SECTIONS]
    if unknown:
        reader.problems.append(f"Unknown section(s) < {', '.join(unknown)} >.")

    data_path = reader.path("data", "path", base)
    pseudo_obs = reader.path("data", "pseudo_obs", base)
    schema = None
    if data_path is None and pseudo_obs is None:
        reader.problems.append("[data] needs either path or pseudo_obs.")
    if data_path is not None:
        delimiter = reader.get("data", "delimiter")
        schema = reader.build(
            "data",
            CsvSchema,
            required=("date_column", "asset_columns"),
            date_column=reader.get("data", "date_column", required=True),
            asset_columns=reader.get("data", "assets", _split, required=True),
            invert=reader.get("data", "invert", _split, ()),
            delimiter=delimiter,
            missing_tokens=reader.get("data", "missing", _split, MISSING_TOKENS),
        )
        if schema is not None and data_path.exists():
            header = _read_header(data_path, delimiter)
            absent = [name for name in schema.columns if name not in header]
            if absent:
                reader.problems.append(
                    f"[data] columns < {', '.join(absent)} > are not in the "
                    f"header of < {data_path} >."
                )

    prior = reader.build(
        "prior",
        PriorSpec,
        lower=reader.get("prior", "lower", float, NU_MIN),
        upper=reader.get("prior", "upper", float, NU_MAX),
    )
    chain = reader.build(
        "chain",
        ChainConfig,
        required=("seed",),
        seed=reader.get("chain", "seed", int, required=True),
        n_tune=reader.get("chain", "tune", int, TUNE_SWEEPS),
        n_burn=reader.get("chain", "burn", int, BURN_SWEEPS),
        n_sample=reader.get("chain", "sample", int, SAMPLE_SWEEPS),
        tune_window=reader.get("chain", "tune_window", int, TUNE_WINDOW),
        tune_check=reader.get("chain", "tune_check", int, TUNE_CHECK_SWEEPS),
    )

    policy = reader.get("models", "policy", str, "two-group")
    if policy not in POLICIES:
        reader.problems.append(
            f"[models] policy < {policy} > must be one of < {', '.join(POLICIES)} >."
        )
    model_ids = reader.get("models", "ids", _split, ())

    rel_tol = reader.get("quadrature", "rel_tol", float, QUAD_REL_TOL)
    abs_tol = reader.get("quadrature", "abs_tol", float, QUAD_ABS_TOL)
    if rel_tol < 0 or abs_tol < 0 or rel_tol == abs_tol == 0:
        reader.problems.append(
            "[quadrature] tolerances must be >= 0 and not both zero."
        )

    importance = reader.get("selection", "importance", str, "normal")
    if importance not in IMPORTANCE_FAMILIES:
        reader.problems.append(
            f"[selection] importance < {importance} > must be one of "
            f"< {', '.join(IMPORTANCE_FAMILIES)} >."
        )
    options = SelectionOptions(
        batch_count=reader.get("selection", "batch_count", int, BATCH_COUNT),
        importance=importance,
        importance_dof=reader.get(
            "selection", "importance_dof", float, IMPORTANCE_T_DOF
        ),
        ridge=reader.get("selection", "ridge", float, 0.0),
        rel_tol=rel_tol,
        abs_tol=abs_tol,
        mle_init=reader.get("selection", "mle_init", float, 10.0),
        workers=reader.get("selection", "workers", int, 1),
    )
    if options.batch_count < 2:
        reader.problems.append("[selection] batch_count must be >= 2.")
    if importance == "t" and not options.importance_dof > 2:
        reader.problems.append("[selection] importance_dof must exceed 2.")
    if options.workers < 1:
        reader.problems.append("[selection] workers must be >= 1.")
    if chain is not None and chain.n_sample < 2 * options.batch_count:
        reader.problems.append(
            f"[chain] sample < {chain.n_sample} > must be at least twice the "
            f"batch count < {options.batch_count} >."
        )

    portfolios = tuple(
        (base / name).resolve()
        for name in reader.get("risk", "portfolios", _split, ())
    )
    for portfolio in portfolios:
        if not portfolio.exists():
            reader.problems.append(f"[risk] portfolio < {portfolio} > does not exist.")
    alphas = reader.get(
        "risk", "alpha", lambda text: tuple(float(a) for a in _split(text)), (0.99,)
    )
    for alpha in alphas:
        if not 0.5 < alpha < 1.0:
            reader.problems.append(f"[risk] alpha < {alpha} > must lie in (0.5, 1).")
    n_sims = reader.get("risk", "n_sims", int, CVAR_MIN_SIMS)
    if n_sims < CVAR_MIN_SIMS:
        reader.problems.append(
            f"[risk] n_sims < {n_sims} > is below < {CVAR_MIN_SIMS} >."
        )
    point = reader.get("risk", "point", str, "map")
    if point not in POINT_ESTIMATES:
        reader.problems.append(
            f"[risk] point < {point} > must be one of "
            f"< {', '.join(POINT_ESTIMATES)} >."
        )
    risk = RiskSettings(
        portfolios=portfolios,
        alphas=alphas,
        n_sims=n_sims,
        point=point,
        linearized=reader.get("risk", "linearized", _boolean, False),
        seed=reader.get("risk", "seed", int),
    )

    output = reader.get("output", "directory", str, "output")

    if reader.problems:
        raise ValidationError(reader.problems)
    config = RunConfig(
        source=path.resolve(),
        output_dir=(base / output).resolve(),
        chain=chain,
        prior=prior,
        data_path=data_path,
        schema=schema,
        pseudo_obs=pseudo_obs,
        policy=policy,
        model_ids=model_ids,
        selection=options,
        risk=risk,
    )
    logger.debug("Loaded run configuration < %s >.", config)
    return config


def config_overrides(**values: Any) -> Dict[str, Any]:
    """Maps CLI flag values onto "section.key" overrides."""
    keys = {"seed": "chain.seed", "output_dir": "output.directory"}
    return {keys[name]: value for name, value in values.items() if name in keys}
