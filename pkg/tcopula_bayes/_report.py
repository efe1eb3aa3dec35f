import configparser
import hashlib
import json
import logging
import math
import shutil

from pathlib import Path
from typing import Any, Dict, Iterable, List, Mapping, Optional, Sequence, Union

import numpy as np
import pandas as pd

from tcopula_bayes._constants import CLI_SECTION, FLOAT_FORMAT
from tcopula_bayes._errors import DataError
from tcopula_bayes._garch import GarchParams
from tcopula_bayes._risk import CvarComparison, CvarEstimate
from tcopula_bayes._selection import SelectionReport

__all__ = (
    "MANIFEST_NAME",
    "comparison_rows",
    "copy_config",
    "garch_rows",
    "read_json",
    "render_table",
    "write_json",
    "write_manifest",
    "write_rows",
    "write_selection",
)

logger = logging.getLogger(__name__)

PathLike = Union[str, Path]

MANIFEST_NAME = "MANIFEST"
CONFIG_COPY_NAME = "run.ini"

_SELECTION_TABLES = {
    "posterior.csv": "posterior_rows",
    "modes.csv": "mode_rows",
    "criteria.csv": "criteria_rows",
}


def _plain(value: Any) -> Any:
    if isinstance(value, dict):
        return {str(k): _plain(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_plain(v) for v in value]
    if isinstance(value, np.ndarray):
        return _plain(value.tolist())
    if isinstance(value, np.generic):
        return _plain(value.item())
    if isinstance(value, Path):
        return str(value)
    if isinstance(value, float) and not math.isfinite(value):
        return None
    return value


def write_json(path: PathLike, data: Mapping[str, Any]) -> Path:
    """Sorted keys, non-finite floats as null, so reruns are byte-identical."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(
        json.dumps(_plain(data), sort_keys=True, indent=2, allow_nan=False) + "\n"
    )
    return path


def read_json(path: PathLike) -> Dict[str, Any]:
    path = Path(path)
    try:
        return json.loads(path.read_text())
    except (OSError, ValueError) as e:
        raise DataError(f"Cannot read < {path} >: {e}") from e


def write_rows(path: PathLike, rows: Sequence[Mapping[str, Any]]) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    pd.DataFrame(list(rows)).to_csv(path, index=False, float_format=FLOAT_FORMAT)
    return path


def render_table(rows: Sequence[Mapping[str, Any]], digits: int = 4) -> str:
    """Plain-text table at `digits` significant digits."""
    if not rows:
        return "(empty)"
    return pd.DataFrame(list(rows)).to_string(
        index=False, float_format=lambda value: f"{value:.{digits}g}"
    )


def garch_rows(fits: Iterable[GarchParams], labels: Sequence[str]) -> List[dict]:
    return [
        {
            "label": label,
            "mu": fit.mu,
            "omega": fit.omega,
            "alpha": fit.alpha,
            "beta": fit.beta,
            "sigma0_sq": fit.sigma0_sq,
            "log_likelihood": fit.log_likelihood,
            "converged": fit.converged,
        }
        for fit, label in zip(fits, labels)
    ]


def _estimate_row(prefix: str, estimate: CvarEstimate) -> Dict[str, Any]:
    return {
        f"{prefix}var": estimate.var,
        f"{prefix}cvar": estimate.cvar,
        f"{prefix}std_error": estimate.std_error,
        f"{prefix}n_exceed": estimate.n_exceed,
    }


def comparison_rows(comparisons: Iterable[CvarComparison]) -> List[dict]:
    rows = []
    for item in comparisons:
        row: Dict[str, Any] = {
            "portfolio": item.portfolio,
            "alpha": item.estimate_a.alpha,
            "model_a": item.model_a,
            "model_b": item.model_b,
        }
        row.update(_estimate_row("a_", item.estimate_a))
        row.update(_estimate_row("b_", item.estimate_b))
        row.update(delta=item.delta, delta_se=item.delta_se)
        rows.append(row)
    return rows


def write_selection(report: SelectionReport, directory: PathLike) -> List[Path]:
    """`selection.json` plus one delimited file per results table."""
    directory = Path(directory)
    written = [write_json(directory / "selection.json", report.to_dict())]
    for name, builder in _SELECTION_TABLES.items():
        written.append(write_rows(directory / name, getattr(report, builder)()))
    return written


def copy_config(
    source: PathLike,
    directory: PathLike,
    overrides: Optional[Mapping[str, Any]] = None,
) -> Path:
    """
    Copies the run file to `directory`/run.ini. Overrides that were given
    (not None) are recorded as "section.key" entries of its [cli] section,
    which `load_config` applies again.
    """
    source, directory = Path(source), Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    target = directory / CONFIG_COPY_NAME
    given = {
        key: value
        for key, value in (overrides or {}).items()
        if value is not None
    }
    if given:
        parser = configparser.ConfigParser(interpolation=None)
        parser.read(source)
        if not parser.has_section(CLI_SECTION):
            parser.add_section(CLI_SECTION)
        for key, value in sorted(given.items()):
            parser.set(CLI_SECTION, key, str(value))
        with target.open("w") as handle:
            parser.write(handle)
    elif source.resolve() != target.resolve():
        shutil.copyfile(source, target)
    return target


def _sha256(path: Path) -> str:
    digest = hashlib.sha256()
    with path.open("rb") as handle:
        for block in iter(lambda: handle.read(1 << 20), b""):
            digest.update(block)
    return digest.hexdigest()


def write_manifest(directory: PathLike) -> Path:
    """Lists every artifact under `directory` with its SHA-256, sorted."""
    directory = Path(directory)
    manifest = directory / MANIFEST_NAME
    lines = [
        f"{_sha256(path)}  {path.relative_to(directory).as_posix()}"
        for path in sorted(directory.rglob("*"))
        if path.is_file() and path != manifest
    ]
    manifest.write_text("\n".join(lines) + "\n")
    logger.info("Wrote < %d > entries to < %s >.", len(lines), manifest)
    return manifest
