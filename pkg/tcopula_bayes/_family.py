from dataclasses import dataclass
from itertools import combinations
from typing import Iterator, List, Sequence, Tuple

from tcopula_bayes._errors import DomainError, SelectionError
from tcopula_bayes._types import GroupConfig

__all__ = ("ModelFamily", "POLICIES", "enumerate_models")

POLICIES = ("two-group", "all")

# (dimension, smaller group size) blocks whose final member set is listed
# first, as in the conventional numbering of the six-currency family
_LAST_FIRST_BLOCKS = frozenset({(6, 2)})


@dataclass(frozen=True)
class ModelFamily:
    """
    Ordered candidate models. Identifiers are assigned at enumeration time
    ("M0" is the generalized copula) and survive `subset`.
    """

    dim: int
    ids: Tuple[str, ...]
    models: Tuple[GroupConfig, ...]
    policy: str = "two-group"

    def __post_init__(self) -> None:
        if len(self.ids) != len(self.models):
            raise SelectionError(
                f"< {len(self.ids)} > identifiers for < {len(self.models)} > "
                "models."
            )
        keys = [model.key for model in self.models]
        if len(set(keys)) != len(keys):
            raise SelectionError("A model family cannot repeat a model.")

    def __len__(self) -> int:
        return len(self.models)

    def __iter__(self) -> Iterator[Tuple[str, GroupConfig]]:
        return iter(zip(self.ids, self.models))

    @property
    def grouped(self) -> Tuple[GroupConfig, ...]:
        return tuple(
            model
            for model in self.models
            if not (model.is_generalized or model.is_standard)
        )

    def get(self, model_id: str) -> GroupConfig:
        try:
            return self.models[self.ids.index(model_id)]
        except ValueError:
            raise SelectionError(
                f"Unknown model < {model_id} >, valid identifiers are "
                f"< {', '.join(self.ids)} >."
            ) from None

    def id_of(self, config: GroupConfig) -> str:
        for model_id, model in self:
            if model.key == config.key:
                return model_id
        raise SelectionError(f"Model < {config.key} > is not in the family.")

    def subset(self, ids: Sequence[str]) -> "ModelFamily":
        models = tuple(self.get(model_id) for model_id in ids)
        return ModelFamily(self.dim, tuple(ids), models, self.policy)


def _two_group_partitions(dim: int) -> List[GroupConfig]:
    configs = []
    for size in range(dim // 2, 0, -1):
        block = list(combinations(range(dim), size))
        if (dim, size) in _LAST_FIRST_BLOCKS:
            block.insert(0, block.pop())
        for members in block:
            if 2 * size == dim and 0 not in members:
                continue
            rest = tuple(i for i in range(dim) if i not in members)
            configs.append(GroupConfig.from_groups((members, rest), dim))
    return configs


def _restricted_growth_strings(dim: int) -> Iterator[Tuple[int, ...]]:
    def extend(prefix: List[int], largest: int) -> Iterator[Tuple[int, ...]]:
        if len(prefix) == dim:
            yield tuple(prefix)
            return
        for label in range(largest + 2):
            prefix.append(label)
            yield from extend(prefix, max(largest, label))
            prefix.pop()

    yield from extend([0], 0)


def enumerate_models(dim: int, policy: str = "two-group") -> ModelFamily:
    """
    Candidate family: the generalized copula first, then the grouped
    configurations, the standard t-copula last.

    "two-group" lists every split into two groups by decreasing size of the
    smaller group, member sets in lexicographic order (for six dimensions
    the pair (4, 5) leads its block). "all" follows them
    with every partition into 3..n-1 groups, by group count.
    """
    if dim < 2:
        raise DomainError(f"Model families need dimension >= 2, got < {dim} >.")
    if policy not in POLICIES:
        raise DomainError(
            f"Unknown enumeration policy < {policy} >, expected one of "
            f"< {', '.join(POLICIES)} >."
        )

    candidates = [GroupConfig.generalized(dim)]
    candidates.extend(_two_group_partitions(dim))
    if policy == "all":
        by_count = sorted(
            (GroupConfig(labels) for labels in _restricted_growth_strings(dim)),
            key=lambda config: config.n_groups,
        )
        candidates.extend(
            config for config in by_count if 2 < config.n_groups < dim
        )
    candidates.append(GroupConfig.standard(dim))

    models: List[GroupConfig] = []
    seen = set()
    for config in candidates:
        if config.key not in seen:
            seen.add(config.key)
            models.append(config)
    ids = tuple(f"M{index}" for index in range(len(models)))
    return ModelFamily(dim, ids, tuple(models), policy)
