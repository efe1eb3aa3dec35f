import io
import logging

from dataclasses import dataclass, field
from pathlib import Path
from typing import List, NamedTuple, Optional, Sequence, Tuple, Union

import numpy as np
import pandas as pd

from tcopula_bayes._constants import FLOAT_FORMAT, MISSING_TOKENS
from tcopula_bayes._errors import DataError, DomainError, ShapeError

__all__ = (
    "CsvSchema",
    "IngestResult",
    "PriceSeries",
    "ingest_csv",
    "log_returns",
    "read_matrix",
    "write_matrix",
)

logger = logging.getLogger(__name__)

PathLike = Union[str, Path]

_DATE_FORMATS = ("%Y-%m-%d", "%m/%d/%Y")


@dataclass(frozen=True, eq=False)
class PriceSeries:
    dates: np.ndarray
    prices: np.ndarray
    label: str

    def __post_init__(self) -> None:
        dates = np.asarray(self.dates)
        prices = np.asarray(self.prices, dtype=float)
        if dates.ndim != 1 or dates.shape != prices.shape:
            raise ShapeError(
                f"Series < {self.label} > has < {dates.size} > dates for < "
                f"{prices.size} > prices."
            )
        if dates.size > 1 and not np.all(dates[1:] > dates[:-1]):
            position = int(np.argmin(dates[1:] > dates[:-1])) + 1
            raise DataError(
                f"Dates of < {self.label} > are not strictly increasing at "
                f"< {dates[position]} >.",
                column=self.label,
            )
        dates.setflags(write=False)
        prices.setflags(write=False)
        object.__setattr__(self, "dates", dates)
        object.__setattr__(self, "prices", prices)

    def __len__(self) -> int:
        return self.prices.size


@dataclass(frozen=True)
class CsvSchema:
    """
    Layout of a price file: one date column and one column per asset.
    Assets listed in `invert` are quoted as units per USD and get turned
    into USD per unit.
    """

    date_column: str
    asset_columns: Tuple[str, ...]
    invert: Tuple[str, ...] = ()
    delimiter: Optional[str] = None
    missing_tokens: Tuple[str, ...] = field(default=MISSING_TOKENS)

    def __post_init__(self) -> None:
        object.__setattr__(self, "asset_columns", tuple(self.asset_columns))
        object.__setattr__(self, "invert", tuple(self.invert))
        object.__setattr__(self, "missing_tokens", tuple(self.missing_tokens))
        unknown = [name for name in self.invert if name not in self.asset_columns]
        if unknown:
            raise DataError(
                f"Inverted columns < {unknown} > are not asset columns."
            )
        if not self.asset_columns:
            raise DataError("A schema needs at least one asset column.")

    @property
    def columns(self) -> Tuple[str, ...]:
        return (self.date_column,) + self.asset_columns


class IngestResult(NamedTuple):
    series: Tuple[PriceSeries, ...]
    dropped_rows: int


def _sniff_delimiter(text: str) -> str:
    header = text.lstrip().splitlines()[0]
    return "\t" if "\t" in header else ","


def _parse_dates(column: pd.Series) -> pd.Series:
    parsed = pd.Series(pd.NaT, index=column.index, dtype="datetime64[ns]")
    for fmt in _DATE_FORMATS:
        missing = parsed.isna()
        if not missing.any():
            break
        parsed[missing] = pd.to_datetime(
            column[missing], format=fmt, errors="coerce"
        )
    bad = parsed.isna()
    if bad.any():
        index = bad.idxmax()
        raise DataError(
            f"Unparseable date < {column[index]} > on line < {index + 2} >.",
            line=int(index) + 2,
        )
    return parsed


def ingest_csv(path: PathLike, schema: CsvSchema) -> IngestResult:
    """
    Reads a delimited price file. Rows holding a missing token in any
    selected column are dropped (and counted); every other cell must parse.
    Line numbers in errors count the header as line 1.
    """
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as e:
        raise DataError(f"Cannot read price file < {path} >: {e}") from e
    if not text.strip():
        raise DataError(f"Price file < {path} > is empty.")

    delimiter = schema.delimiter or _sniff_delimiter(text)
    frame = pd.read_csv(
        io.StringIO(text),
        sep=delimiter,
        dtype=str,
        keep_default_na=False,
        skip_blank_lines=False,
    )
    frame.columns = [str(name).strip() for name in frame.columns]
    missing_columns = [name for name in schema.columns if name not in frame]
    if missing_columns:
        raise DataError(
            f"Columns < {missing_columns} > are missing from < {path} >.",
            column=missing_columns[0],
        )
    if frame.empty:
        raise DataError(f"Price file < {path} > has no data rows.")

    frame = frame[list(schema.columns)].apply(lambda col: col.str.strip())
    missing = frame.isin(schema.missing_tokens).any(axis=1)
    dropped = int(missing.sum())
    if dropped:
        logger.warning(
            "Dropped < %d > rows with missing values from < %s >.",
            dropped,
            path,
        )
    frame = frame.loc[~missing]
    if frame.empty:
        raise DataError(f"Price file < {path} > has no complete rows.")

    dates = _parse_dates(frame[schema.date_column]).values.astype(
        "datetime64[D]"
    )
    series: List[PriceSeries] = []
    for name in schema.asset_columns:
        values = pd.to_numeric(frame[name], errors="coerce")
        if values.isna().any():
            index = values.isna().idxmax()
            raise DataError(
                f"Unparseable price < {frame[name][index]} > in column < "
                f"{name} > on line < {index + 2} >.",
                line=int(index) + 2,
                column=name,
            )
        prices = values.to_numpy(dtype=float)
        if name in schema.invert:
            with np.errstate(divide="ignore"):
                prices = 1.0 / prices
        series.append(PriceSeries(dates, prices, name))

    logger.info(
        "Read < %d > rows of < %d > assets from < %s >.",
        len(dates),
        len(series),
        path,
    )
    return IngestResult(tuple(series), dropped)


def log_returns(series: PriceSeries) -> np.ndarray:
    prices = series.prices
    if prices.size < 2:
        raise DomainError(
            f"Series < {series.label} > needs at least 2 prices for returns."
        )
    bad = ~(np.isfinite(prices) & (prices > 0))
    if np.any(bad):
        position = int(np.argmax(bad))
        raise DomainError(
            f"Non-positive price < {prices[position]} > in < {series.label} "
            f"> on < {series.dates[position]} >."
        )
    return np.diff(np.log(prices))


def write_matrix(
    path: PathLike, matrix: np.ndarray, labels: Sequence[str]
) -> Path:
    """Writes a labelled matrix as CSV at full double precision."""
    path = Path(path)
    matrix = np.asarray(matrix, dtype=float)
    if matrix.ndim != 2 or matrix.shape[1] != len(labels):
        raise ShapeError(
            f"Matrix of shape < {matrix.shape} > for < {len(labels)} > labels."
        )
    pd.DataFrame(matrix, columns=list(labels)).to_csv(
        path, index=False, float_format=FLOAT_FORMAT
    )
    return path


def read_matrix(path: PathLike) -> Tuple[np.ndarray, Tuple[str, ...]]:
    path = Path(path)
    try:
        frame = pd.read_csv(path, float_precision="round_trip")
    except (OSError, pd.errors.ParserError, pd.errors.EmptyDataError) as e:
        raise DataError(f"Cannot read matrix file < {path} >: {e}") from e
    try:
        values = frame.to_numpy(dtype=float)
    except ValueError as e:
        raise DataError(f"Matrix file < {path} > is not numeric.") from e
    return values, tuple(str(name) for name in frame.columns)
