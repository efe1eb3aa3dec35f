import configparser
import hashlib
import logging

from pathlib import Path
from typing import Optional, Union

import numpy as np
import pandas as pd

from tcopula_bayes._constants import FLOAT_FORMAT
from tcopula_bayes._errors import DataError
from tcopula_bayes._mcmc import ChainConfig, PosteriorSample, PriorSpec
from tcopula_bayes._types import GroupConfig, PseudoSample

__all__ = ("ChainStore", "chain_digest", "load_chain", "save_chain")

logger = logging.getLogger(__name__)

PathLike = Union[str, Path]

_CHAIN_SUFFIX = ".chain.csv"
_META_SUFFIX = ".meta.ini"


def chain_digest(
    sample: PseudoSample,
    config: GroupConfig,
    prior: PriorSpec,
    chain_cfg: ChainConfig,
    rel_tol: float,
    abs_tol: float,
) -> str:
    """SHA-256 over everything a stored chain depends on."""
    digest = hashlib.sha256()
    digest.update(np.ascontiguousarray(sample.u).tobytes())
    digest.update(repr(sample.u.shape).encode())
    for part in (
        config.key,
        repr(prior.bounds),
        repr(chain_cfg),
        repr((float(rel_tol), float(abs_tol))),
    ):
        digest.update(part.encode())
    return digest.hexdigest()


def _floats(values: Optional[np.ndarray]) -> str:
    if values is None:
        return ""
    return ",".join(repr(float(v)) for v in np.asarray(values).reshape(-1))


def _parse_floats(text: str) -> Optional[np.ndarray]:
    text = text.strip()
    if not text:
        return None
    return np.array([float(v) for v in text.split(",")])


def save_chain(
    chain: PosteriorSample, prefix: PathLike, digest: str = ""
) -> Path:
    """
    Writes `<prefix>.chain.csv` (sweep, one column per group, log_lik) and
    `<prefix>.meta.ini`; returns the chain file path.
    """
    prefix = Path(prefix)
    prefix.parent.mkdir(parents=True, exist_ok=True)
    columns = {"sweep": np.arange(chain.n_draws)}
    for index in range(chain.dim):
        columns[f"nu_{index}"] = chain.draws[:, index]
    columns["log_lik"] = chain.log_lik
    chain_path = prefix.with_name(prefix.name + _CHAIN_SUFFIX)
    pd.DataFrame(columns).to_csv(
        chain_path, index=False, float_format=FLOAT_FORMAT
    )

    meta = configparser.ConfigParser()
    meta["chain"] = {
        "model_id": chain.model_id,
        "group_of": chain.config.key,
        "seed": "" if chain.seed is None else str(chain.seed),
        "lower": repr(float(chain.bounds[0])),
        "upper": repr(float(chain.bounds[1])),
        "acceptance_rate": _floats(chain.acceptance_rate),
        "sigma": _floats(chain.sigma),
        "failures": str(chain.failures),
        "digest": digest,
    }
    with prefix.with_name(prefix.name + _META_SUFFIX).open("w") as handle:
        meta.write(handle)
    return chain_path


def load_chain(prefix: PathLike) -> PosteriorSample:
    prefix = Path(prefix)
    chain_path = prefix.with_name(prefix.name + _CHAIN_SUFFIX)
    meta_path = prefix.with_name(prefix.name + _META_SUFFIX)
    meta = configparser.ConfigParser()
    if not meta.read(meta_path):
        raise DataError(f"Chain metadata < {meta_path} > is missing.")
    try:
        section = meta["chain"]
        frame = pd.read_csv(chain_path, float_precision="round_trip")
        draws = frame[[c for c in frame.columns if c.startswith("nu_")]]
        seed = section.get("seed", "")
        return PosteriorSample(
            draws=draws.to_numpy(dtype=float),
            log_lik=frame["log_lik"].to_numpy(dtype=float),
            acceptance_rate=_parse_floats(section["acceptance_rate"]),
            config=GroupConfig.from_key(section["group_of"]),
            model_id=section["model_id"],
            seed=int(seed) if seed else None,
            bounds=(float(section["lower"]), float(section["upper"])),
            failures=int(section.get("failures", "0")),
            sigma=_parse_floats(section.get("sigma", "")),
        )
    except (KeyError, ValueError, OSError) as e:
        raise DataError(f"Cannot load chain < {chain_path} >: {e}") from e


class ChainStore:
    """Directory of saved chains, reused only when their digest matches."""

    def __init__(self, directory: PathLike) -> None:
        self.directory = Path(directory)

    def _prefix(self, model_id: str) -> Path:
        return self.directory / model_id

    def load(self, model_id: str, digest: str) -> Optional[PosteriorSample]:
        meta = configparser.ConfigParser()
        meta_path = self.directory / f"{model_id}{_META_SUFFIX}"
        if not meta.read(meta_path):
            logger.info("No cached chain for < %s >.", model_id)
            return None
        if meta.get("chain", "digest", fallback="") != digest:
            logger.info(
                "Cached chain for < %s > does not match its inputs, "
                "recomputing.",
                model_id,
            )
            return None
        logger.info(
            "Cache hit: reusing chain < %s > from < %s >.",
            model_id,
            self.directory,
        )
        return load_chain(self._prefix(model_id))

    def save(self, chain: PosteriorSample, digest: str) -> Path:
        return save_chain(chain, self._prefix(chain.model_id), digest)
