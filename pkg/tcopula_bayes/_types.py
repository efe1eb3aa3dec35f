"""
Value types shared by the copula, sampler and selection code.

All array-holding types copy their input and mark it read-only.
"""
from dataclasses import dataclass, field
from typing import Dict, Iterable, List, Optional, Sequence, Tuple

import numpy as np

from scipy import linalg

from tcopula_bayes._constants import NU_MAX, NU_MIN
from tcopula_bayes._errors import DomainError, ShapeError

__all__ = (
    "CorrelationMatrix",
    "DofVector",
    "GroupConfig",
    "PseudoSample",
)

_SYMMETRY_TOL = 1e-12


def _frozen(values: np.ndarray) -> np.ndarray:
    values.setflags(write=False)
    return values


@dataclass(frozen=True)
class GroupConfig:
    """
    Partition of the n copula dimensions into m groups sharing one degrees
    of freedom each. Labels are canonicalized on construction (groups are
    numbered by their smallest member) so exchanging two groups yields the
    same configuration.
    """

    group_of: Tuple[int, ...]

    def __post_init__(self) -> None:
        labels = tuple(int(label) for label in self.group_of)
        if not labels:
            raise ShapeError("A group configuration needs at least one member.")
        if any(label < 0 for label in labels):
            raise DomainError(f"Group labels < {labels} > must be >= 0.")
        mapping: Dict[int, int] = {}
        canonical = []
        for label in labels:
            if label not in mapping:
                mapping[label] = len(mapping)
            canonical.append(mapping[label])
        object.__setattr__(self, "group_of", tuple(canonical))

    @classmethod
    def from_groups(
        cls, groups: Iterable[Sequence[int]], dim: Optional[int] = None
    ) -> "GroupConfig":
        groups = [tuple(int(i) for i in group) for group in groups]
        members = sorted(i for group in groups for i in group)
        if dim is None:
            dim = len(members)
        if members != list(range(dim)) or any(not group for group in groups):
            raise ShapeError(
                f"Groups < {groups} > do not partition < 0..{dim - 1} >."
            )
        group_of = [0] * dim
        for label, group in enumerate(groups):
            for index in group:
                group_of[index] = label
        return cls(tuple(group_of))

    @classmethod
    def generalized(cls, dim: int) -> "GroupConfig":
        return cls(tuple(range(dim)))

    @classmethod
    def standard(cls, dim: int) -> "GroupConfig":
        return cls((0,) * dim)

    @classmethod
    def from_key(cls, key: str) -> "GroupConfig":
        try:
            return cls(tuple(int(part) for part in key.split("-")))
        except ValueError as e:
            raise DomainError(f"Invalid group key < {key} >.") from e

    @property
    def dim(self) -> int:
        return len(self.group_of)

    @property
    def n_groups(self) -> int:
        return max(self.group_of) + 1

    @property
    def group_index(self) -> np.ndarray:
        return np.asarray(self.group_of, dtype=int)

    @property
    def groups(self) -> Tuple[Tuple[int, ...], ...]:
        members: List[List[int]] = [[] for _ in range(self.n_groups)]
        for index, label in enumerate(self.group_of):
            members[label].append(index)
        return tuple(tuple(group) for group in members)

    @property
    def shape(self) -> Tuple[int, ...]:
        return tuple(sorted(len(group) for group in self.groups))

    @property
    def is_generalized(self) -> bool:
        return self.n_groups == self.dim

    @property
    def is_standard(self) -> bool:
        return self.n_groups == 1

    @property
    def key(self) -> str:
        return "-".join(str(label) for label in self.group_of)

    def members(self, group: int) -> Tuple[int, ...]:
        return self.groups[group]

    def describe(self, labels: Optional[Sequence[str]] = None) -> str:
        """Groups rendered smallest first, e.g. "(CAD), (AUD, CHF, EUR)"."""
        if labels is None:
            labels = [str(i) for i in range(self.dim)]
        if len(labels) != self.dim:
            raise ShapeError(
                f"< {len(labels)} > labels for a < {self.dim} >-dimensional "
                "configuration."
            )
        ordered = sorted(self.groups, key=lambda group: (len(group), group))
        return ", ".join(
            "(" + ", ".join(labels[i] for i in group) + ")"
            for group in ordered
        )


@dataclass(frozen=True, eq=False)
class DofVector:
    """Per-dimension degrees of freedom, strictly inside `bounds`."""

    values: np.ndarray
    bounds: Tuple[float, float] = (NU_MIN, NU_MAX)

    def __post_init__(self) -> None:
        values = np.array(self.values, dtype=float, ndmin=1)
        lower, upper = (float(b) for b in self.bounds)
        if values.ndim != 1:
            raise ShapeError(f"Degrees of freedom < {values} > must be 1-D.")
        if not lower < upper:
            raise DomainError(f"Bounds < {self.bounds} > must be increasing.")
        if not np.all((values > lower) & (values < upper)):
            raise DomainError(
                f"Degrees of freedom < {values} > must lie in "
                f"< ({lower}, {upper}) >."
            )
        object.__setattr__(self, "values", _frozen(values))
        object.__setattr__(self, "bounds", (lower, upper))

    @classmethod
    def from_groups(
        cls,
        config: GroupConfig,
        group_values: Sequence[float],
        bounds: Tuple[float, float] = (NU_MIN, NU_MAX),
    ) -> "DofVector":
        group_values = np.asarray(group_values, dtype=float).reshape(-1)
        if group_values.size != config.n_groups:
            raise ShapeError(
                f"< {group_values.size} > group values for < "
                f"{config.n_groups} > groups."
            )
        return cls(group_values[config.group_index], bounds)

    @property
    def dim(self) -> int:
        return self.values.size

    def group_values(self, config: GroupConfig) -> np.ndarray:
        self.check_grouping(config)
        first = [group[0] for group in config.groups]
        return self.values[first].copy()

    def check_grouping(self, config: GroupConfig) -> None:
        if config.dim != self.dim:
            raise ShapeError(
                f"Degrees of freedom of length < {self.dim} > for a < "
                f"{config.dim} >-dimensional configuration."
            )
        for group in config.groups:
            shared = self.values[list(group)]
            if np.any(shared != shared[0]):
                raise DomainError(
                    f"Members < {group} > of one group have different "
                    f"degrees of freedom < {shared} >."
                )

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, DofVector):
            return NotImplemented
        return self.bounds == other.bounds and np.array_equal(
            self.values, other.values
        )

    def __hash__(self) -> int:
        return hash((self.bounds, self.values.tobytes()))

    def __repr__(self) -> str:
        return f"DofVector({self.values.tolist()!r}, bounds={self.bounds!r})"


class CorrelationMatrix:
    """
    Symmetric positive definite matrix with unit diagonal, with its
    Cholesky factor, the factor's inverse and log-determinant cached.
    """

    def __init__(self, entries: Sequence[Sequence[float]]) -> None:
        entries = np.array(entries, dtype=float)
        if entries.ndim != 2 or entries.shape[0] != entries.shape[1]:
            raise ShapeError(
                f"Correlation matrix of shape < {entries.shape} > is not "
                "square."
            )
        if not np.all(np.isfinite(entries)):
            raise DomainError("Correlation matrix has non-finite entries.")
        if np.max(np.abs(entries - entries.T), initial=0.0) > _SYMMETRY_TOL:
            raise DomainError("Correlation matrix is not symmetric.")
        if np.max(np.abs(np.diag(entries) - 1.0)) > _SYMMETRY_TOL:
            raise DomainError(
                f"Correlation diagonal < {np.diag(entries)} > must be 1."
            )
        entries = 0.5 * (entries + entries.T)
        np.fill_diagonal(entries, 1.0)
        off_diagonal = entries[~np.eye(entries.shape[0], dtype=bool)]
        if np.any(np.abs(off_diagonal) >= 1.0):
            raise DomainError(
                "Correlations must lie strictly inside (-1, 1)."
            )
        try:
            chol = np.linalg.cholesky(entries)
        except np.linalg.LinAlgError as e:
            raise DomainError(
                "Correlation matrix is not positive definite."
            ) from e

        self._entries = _frozen(entries)
        self._chol = _frozen(chol)
        self._chol_inv = _frozen(
            linalg.solve_triangular(chol, np.eye(chol.shape[0]), lower=True)
        )
        self._log_det = float(2.0 * np.sum(np.log(np.diag(chol))))

    @classmethod
    def identity(cls, dim: int) -> "CorrelationMatrix":
        return cls(np.eye(dim))

    @classmethod
    def equicorrelated(cls, dim: int, rho: float) -> "CorrelationMatrix":
        entries = np.full((dim, dim), float(rho))
        np.fill_diagonal(entries, 1.0)
        return cls(entries)

    @property
    def dim(self) -> int:
        return self._entries.shape[0]

    @property
    def entries(self) -> np.ndarray:
        return self._entries

    @property
    def chol(self) -> np.ndarray:
        return self._chol

    @property
    def chol_inv(self) -> np.ndarray:
        return self._chol_inv

    @property
    def log_det(self) -> float:
        return self._log_det

    def quad_form(self, z: np.ndarray) -> np.ndarray:
        """z' Sigma^-1 z over the last axis of `z`."""
        y = np.asarray(z, dtype=float) @ self._chol_inv.T
        return np.sum(y * y, axis=-1)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, CorrelationMatrix):
            return NotImplemented
        return np.array_equal(self._entries, other._entries)

    def __hash__(self) -> int:
        return hash(self._entries.tobytes())

    def __repr__(self) -> str:
        return f"CorrelationMatrix({self._entries.tolist()!r})"


@dataclass(frozen=True, eq=False)
class PseudoSample:
    """K observations of an n-dimensional copula, strictly inside (0, 1)."""

    u: np.ndarray
    labels: Tuple[str, ...] = field(default=())

    def __post_init__(self) -> None:
        u = np.array(self.u, dtype=float)
        if u.ndim != 2 or u.shape[0] == 0 or u.shape[1] == 0:
            raise ShapeError(
                f"Pseudo-sample of shape < {u.shape} > must be a non-empty "
                "K x n matrix."
            )
        if not np.all((u > 0.0) & (u < 1.0)):
            row = int(np.argmax(~np.all((u > 0.0) & (u < 1.0), axis=1)))
            raise DomainError(
                f"Pseudo-observation < {row} > lies outside the open unit "
                "cube."
            )
        labels = tuple(str(label) for label in self.labels)
        if labels and len(labels) != u.shape[1]:
            raise ShapeError(
                f"< {len(labels)} > labels for < {u.shape[1]} > columns."
            )
        object.__setattr__(self, "u", _frozen(u))
        object.__setattr__(self, "labels", labels)

    @property
    def n_obs(self) -> int:
        return self.u.shape[0]

    @property
    def dim(self) -> int:
        return self.u.shape[1]

    def rows(self, index: Sequence[int]) -> "PseudoSample":
        return PseudoSample(self.u[np.asarray(index)], self.labels)
