"""
Special functions shared by the density, sampler and risk code.

Every function accepts scalars or numpy arrays (broadcast together) and
returns a float for scalar input, an array otherwise. Nothing here keeps
state, so all of it is safe to call from several threads at once.
"""
import math

from typing import Any, Union

import numpy as np

from scipy import special as sc

from tcopula_bayes._errors import DomainError

__all__ = (
    "t_cdf",
    "t_quantile",
    "t_log_pdf",
    "chi2_quantile",
    "chi2_sf",
    "chi_w_quantile",
    "chi_w_cdf",
    "norm_cdf",
    "norm_quantile",
    "norm_log_interval_mass",
    "log_gamma",
)

ArrayLike = Union[float, np.ndarray]

_NEWTON_STEPS = 3
_CENTRAL_BAND = 0.1


def _as_output(value: np.ndarray) -> ArrayLike:
    if np.ndim(value) == 0:
        return float(value)
    return value


def _check_dof(nu: np.ndarray) -> None:
    if not np.all(np.isfinite(nu)) or np.any(nu <= 0):
        raise DomainError(
            f"Degrees of freedom < {nu} > must be finite and positive."
        )


def _check_probability(p: np.ndarray, name: str) -> None:
    if np.any(~((p > 0.0) & (p < 1.0))):
        raise DomainError(
            f"Probability < {name} = {p} > must lie strictly inside (0, 1)."
        )


def _check_finite(x: np.ndarray, name: str) -> None:
    if not np.all(np.isfinite(x)):
        raise DomainError(f"Argument < {name} = {x} > must be finite.")


def _broadcast(*values: Any) -> Any:
    return np.broadcast_arrays(*(np.asarray(v, dtype=float) for v in values))


def log_gamma(x: ArrayLike) -> ArrayLike:
    x = np.asarray(x, dtype=float)
    if not np.all(np.isfinite(x)) or np.any(x <= 0):
        raise DomainError(f"log_gamma argument < {x} > must be positive.")
    return _as_output(sc.gammaln(x))


def t_log_pdf(x: ArrayLike, nu: ArrayLike) -> ArrayLike:
    x, nu = _broadcast(x, nu)
    _check_dof(nu)
    value = (
        sc.gammaln(0.5 * (nu + 1.0))
        - sc.gammaln(0.5 * nu)
        - 0.5 * np.log(nu * math.pi)
        - 0.5 * (nu + 1.0) * np.log1p(x * x / nu)
    )
    return _as_output(value)


def _t_cdf(x: np.ndarray, nu: np.ndarray) -> np.ndarray:
    x2 = x * x
    with np.errstate(divide="ignore", invalid="ignore"):
        central = 0.5 + 0.5 * np.sign(x) * sc.betainc(
            0.5, 0.5 * nu, x2 / (nu + x2)
        )
        tail = 0.5 * sc.betainc(0.5 * nu, 0.5, nu / (nu + x2))
    # beyond the central band 0.5 - I(...) would cancel in the lower tail
    return np.where(
        x2 < _CENTRAL_BAND * nu, central, np.where(x > 0, 1.0 - tail, tail)
    )


def t_cdf(x: ArrayLike, nu: ArrayLike) -> ArrayLike:
    """
    Distribution function of the standard Student t with `nu` degrees of
    freedom, through the regularized incomplete beta function. The central
    form (x^2 < nu / 10) keeps full precision around the median and returns
    exactly 0.5 at x = 0; the tail form gives small lower-tail
    probabilities to full relative precision.
    """
    x, nu = _broadcast(x, nu)
    _check_dof(nu)
    _check_finite(x, "x")
    return _as_output(_t_cdf(x, nu))


def t_quantile(p: ArrayLike, nu: ArrayLike) -> ArrayLike:
    """
    Inverse of `t_cdf`.

    The starting point comes from inverting the regularized incomplete beta
    function (central or tail form, whichever is better conditioned), then a
    few Newton steps on the lower tail are kept only where they reduce the
    residual.
    """
    p, nu = _broadcast(p, nu)
    _check_dof(nu)
    _check_probability(p, "p")

    tail_prob = np.minimum(p, 1.0 - p)
    central = np.abs(2.0 * p - 1.0) < 0.5

    with np.errstate(divide="ignore", invalid="ignore"):
        y = sc.betaincinv(0.5, 0.5 * nu, np.abs(2.0 * p - 1.0))
        central_abs = np.sqrt(nu * y / (1.0 - y))
        t = sc.betaincinv(0.5 * nu, 0.5, 2.0 * tail_prob)
        tail_abs = np.sqrt(nu * (1.0 - t) / t)
    magnitude = np.where(central, central_abs, tail_abs)
    magnitude = np.where(np.isfinite(magnitude), magnitude, 0.0)

    residual = _t_cdf(-magnitude, nu) - tail_prob
    for _ in range(_NEWTON_STEPS):
        with np.errstate(over="ignore", invalid="ignore"):
            density = np.exp(t_log_pdf(magnitude, nu))
            candidate = np.maximum(magnitude + residual / density, 0.0)
        candidate = np.where(np.isfinite(candidate), candidate, magnitude)
        candidate_residual = _t_cdf(-candidate, nu) - tail_prob
        better = np.abs(candidate_residual) < np.abs(residual)
        magnitude = np.where(better, candidate, magnitude)
        residual = np.where(better, candidate_residual, residual)

    value = np.where(p < 0.5, -magnitude, magnitude)
    value = np.where(p == 0.5, 0.0, value)
    return _as_output(value)


def chi2_quantile(p: ArrayLike, nu: ArrayLike) -> ArrayLike:
    p, nu = _broadcast(p, nu)
    _check_dof(nu)
    _check_probability(p, "p")
    return _as_output(2.0 * sc.gammaincinv(0.5 * nu, p))


def chi2_sf(x: ArrayLike, nu: ArrayLike) -> ArrayLike:
    x, nu = _broadcast(x, nu)
    _check_dof(nu)
    if np.any(x < 0) or not np.all(np.isfinite(x)):
        raise DomainError(f"Chi-square argument < {x} > must be >= 0.")
    return _as_output(sc.gammaincc(0.5 * nu, 0.5 * x))


def chi_w_quantile(
    v: ArrayLike, nu: ArrayLike, upper: bool = False
) -> ArrayLike:
    """
    Inverse distribution function of W = sqrt(nu / S), S ~ chi2(nu).

    W <= w  <=>  S >= nu / w^2, so the v-quantile of W uses the upper
    (1 - v) chi-square quantile, obtained directly from the inverse of the
    upper regularized incomplete gamma function. With `upper`, `v` is the
    upper-tail probability P(W > w) and the lower chi-square quantile is
    used instead, which keeps full precision for tiny `v`.
    """
    v, nu = _broadcast(v, nu)
    _check_dof(nu)
    _check_probability(v, "v")
    if upper:
        s = 2.0 * sc.gammaincinv(0.5 * nu, v)
    else:
        s = 2.0 * sc.gammainccinv(0.5 * nu, v)
    s = np.maximum(s, np.finfo(float).tiny)
    return _as_output(np.sqrt(nu / s))


def chi_w_cdf(w: ArrayLike, nu: ArrayLike) -> ArrayLike:
    w, nu = _broadcast(w, nu)
    _check_dof(nu)
    if np.any(w <= 0) or not np.all(np.isfinite(w)):
        raise DomainError(f"Argument < w = {w} > must be finite and positive.")
    return _as_output(sc.gammaincc(0.5 * nu, 0.5 * nu / (w * w)))


def norm_cdf(x: ArrayLike) -> ArrayLike:
    return _as_output(sc.ndtr(np.asarray(x, dtype=float)))


def norm_quantile(p: ArrayLike) -> ArrayLike:
    p = np.asarray(p, dtype=float)
    _check_probability(p, "p")
    return _as_output(sc.ndtri(p))


def norm_log_interval_mass(lower: float, upper: float) -> float:
    """log(Phi(upper) - Phi(lower)) for scalar bounds, stable in both tails."""
    if not lower < upper:
        raise DomainError(
            f"Interval < ({lower}, {upper}) > must have lower < upper."
        )
    if lower > 0.0:
        lower, upper = -upper, -lower
    log_upper = float(sc.log_ndtr(upper))
    log_lower = float(sc.log_ndtr(lower))
    return log_upper + math.log1p(-math.exp(log_lower - log_upper))
