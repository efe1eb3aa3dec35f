import heapq
import itertools
import logging

from typing import Callable, Dict, List, NamedTuple, Sequence, Tuple, Union

import numpy as np

from tcopula_bayes._constants import (
    QUAD_ABS_TOL,
    QUAD_MAX_PANELS,
    QUAD_REL_TOL,
)
from tcopula_bayes._errors import ConvergenceError, DomainError, ShapeError

__all__ = ("QuadratureResult", "integrate_adaptive")

logger = logging.getLogger(__name__)

# 21-point Kronrod rule with its embedded 10-point Gauss rule (QUADPACK qk21)
_XGK = np.array(
    [
        0.995657163025808080735527280689003,
        0.973906528517171720077964012084452,
        0.930157491355708226001207180059508,
        0.865063366688984510732096688423493,
        0.780817726586416897063717578345042,
        0.679409568299024406234327365114874,
        0.562757134668604683339000099272694,
        0.433395394129247190799265943165784,
        0.294392862701460198131126603103866,
        0.148874338981631210884826001129720,
        0.000000000000000000000000000000000,
    ]
)
_WGK = np.array(
    [
        0.011694638867371874278064396062192,
        0.032558162307964727478818972459390,
        0.054755896574351996031381300244580,
        0.075039674810919952767043140916190,
        0.093125454583697605535065465083366,
        0.109387158802297641899210590325805,
        0.123491976262065851077208937223975,
        0.134709217311473325928054001771707,
        0.142775938577060080797094273138717,
        0.147739104901338491374841515972068,
        0.149445554002916905664936468389821,
    ]
)
_WG = np.array(
    [
        0.066671344308688137593568809893332,
        0.149451349150580593145776339657697,
        0.219086362515982043995534934228163,
        0.269266719309996355091226921569469,
        0.295524224714752870173892994651338,
    ]
)


def _full_rule() -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    gauss_half = np.zeros(11)
    gauss_half[1::2] = _WG
    nodes = np.concatenate([-_XGK[:10], _XGK[::-1]])
    kronrod = np.concatenate([_WGK[:10], _WGK[::-1]])
    gauss = np.concatenate([gauss_half[:10], gauss_half[::-1]])
    return nodes, kronrod, gauss


_NODES, _KRONROD_WEIGHTS, _GAUSS_WEIGHTS = _full_rule()
_RULE_SIZE = _NODES.size

Integrand = Callable[[np.ndarray], Union[np.ndarray, float]]


class QuadratureResult(NamedTuple):
    value: Union[float, np.ndarray]
    abs_error: Union[float, np.ndarray]
    evaluations: int


class _Panel(NamedTuple):
    lower: float
    upper: float
    value: np.ndarray
    error: np.ndarray


def _as_output(value: np.ndarray) -> Union[float, np.ndarray]:
    if np.ndim(value) == 0:
        return float(value)
    return value


def _evaluate_panel(f: Integrand, lower: float, upper: float) -> _Panel:
    center = 0.5 * (lower + upper)
    half = 0.5 * (upper - lower)
    values = np.asarray(f(center + half * _NODES), dtype=float)
    if values.ndim == 0:
        values = np.full(_RULE_SIZE, float(values))
    if values.shape[0] != _RULE_SIZE:
        raise ShapeError(
            f"Integrand returned < {values.shape[0]} > values for "
            f"< {_RULE_SIZE} > nodes."
        )
    if not np.all(np.isfinite(values)):
        raise DomainError(
            f"Integrand is not finite on < [{lower!r}, {upper!r}] >."
        )
    kronrod = half * np.tensordot(_KRONROD_WEIGHTS, values, axes=(0, 0))
    gauss = half * np.tensordot(_GAUSS_WEIGHTS, values, axes=(0, 0))
    return _Panel(lower, upper, kronrod, np.abs(kronrod - gauss))


def _priority(error: np.ndarray, tolerance: np.ndarray) -> float:
    scaled = error / np.maximum(tolerance, np.finfo(float).tiny)
    return float(np.max(scaled))


def _totals(panels: Dict[int, _Panel]) -> Tuple[np.ndarray, np.ndarray]:
    values = np.stack([panel.value for panel in panels.values()])
    errors = np.stack([panel.error for panel in panels.values()])
    return np.sum(values, axis=0), np.sum(errors, axis=0)


def integrate_adaptive(
    f: Integrand,
    rel_tol: float = QUAD_REL_TOL,
    abs_tol: float = QUAD_ABS_TOL,
    a: float = 0.0,
    b: float = 1.0,
    max_panels: int = QUAD_MAX_PANELS,
    initial_panels: int = 1,
    breakpoints: Sequence[float] = (),
) -> QuadratureResult:
    """
    Globally adaptive Gauss-Kronrod (21 points) integration of `f` on [a, b].

    `f` receives the 21 nodes of a panel as a 1-D array and returns either
    one value per node or a (21, M) array, in which case M integrals sharing
    the same subdivision are computed at once. The panel with the largest
    tolerance-normalized error is bisected until every component satisfies
    abs_error <= max(abs_tol, rel_tol * |value|).

    The starting panels split [a, b] evenly into `initial_panels` pieces,
    further cut at `breakpoints` (interior points where the integrand is
    known to change quickly). Nodes never touch the interval ends, so
    integrable endpoint singularities are handled by subdivision alone.
    """
    if rel_tol < 0 or abs_tol < 0 or (rel_tol == 0 and abs_tol == 0):
        raise DomainError(
            f"Tolerances < rel_tol={rel_tol}, abs_tol={abs_tol} > must be "
            "non-negative and not both zero."
        )
    if not (np.isfinite(a) and np.isfinite(b) and a < b):
        raise DomainError(f"Interval < [{a}, {b}] > must be finite with a < b.")
    if initial_panels < 1:
        raise DomainError(
            f"Initial panel count < {initial_panels} > must be >= 1."
        )
    interior = [float(p) for p in breakpoints if a < p < b]
    edges = np.unique(
        np.concatenate([np.linspace(a, b, initial_panels + 1), interior])
    )
    if max_panels < edges.size - 1:
        raise DomainError(
            f"Panel counts < initial={edges.size - 1}, max={max_panels} > "
            "are inconsistent."
        )

    counter = itertools.count()
    panels: Dict[int, _Panel] = {}
    for lower, upper in zip(edges[:-1], edges[1:]):
        panels[next(counter)] = _evaluate_panel(f, float(lower), float(upper))
    evaluations = _RULE_SIZE * len(panels)

    total, total_error = _totals(panels)
    heap: List[Tuple[float, int]] = []
    tolerance = np.maximum(abs_tol, rel_tol * np.abs(total))
    for key, panel in panels.items():
        heapq.heappush(heap, (-_priority(panel.error, tolerance), key))

    while True:
        tolerance = np.maximum(abs_tol, rel_tol * np.abs(total))
        if np.all(total_error <= tolerance):
            # incremental sums drift; confirm on the live panels
            total, total_error = _totals(panels)
            tolerance = np.maximum(abs_tol, rel_tol * np.abs(total))
            if np.all(total_error <= tolerance):
                break

        if len(panels) >= max_panels:
            raise ConvergenceError(
                f"Adaptive quadrature exhausted < {max_panels} > panels.",
                best=_as_output(total),
                abs_error=_as_output(total_error),
            )

        _, key = heapq.heappop(heap)
        worst = panels.pop(key)
        middle = 0.5 * (worst.lower + worst.upper)
        if not worst.lower < middle < worst.upper:
            raise ConvergenceError(
                "Adaptive quadrature cannot split panel "
                f"< [{worst.lower!r}, {worst.upper!r}] > any further.",
                best=_as_output(total),
                abs_error=_as_output(total_error),
            )

        left = _evaluate_panel(f, worst.lower, middle)
        right = _evaluate_panel(f, middle, worst.upper)
        evaluations += 2 * _RULE_SIZE
        total = total - worst.value + left.value + right.value
        total_error = total_error - worst.error + left.error + right.error

        for panel in (left, right):
            new_key = next(counter)
            panels[new_key] = panel
            heapq.heappush(
                heap, (-_priority(panel.error, tolerance), new_key)
            )

    logger.debug(
        "Quadrature converged with %d panels (%d evaluations).",
        len(panels),
        evaluations,
    )
    return QuadratureResult(
        _as_output(total), _as_output(total_error), evaluations
    )
