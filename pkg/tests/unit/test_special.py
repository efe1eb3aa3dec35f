import math

import numpy as np
import pytest

from scipy import special as sc
from scipy import stats


@pytest.mark.parametrize("nu", [1.0, 2.5, 4.0, 30.0, 100.0])
def test_special__t_cdf_is_half_at_zero(nu):
    from tcopula_bayes._special import t_cdf

    assert t_cdf(0.0, nu) == 0.5


@pytest.mark.parametrize(
    "x,nu,expected",
    [
        (2.0, 1.0, 0.5 + math.atan(2.0) / math.pi),
        (-2.0, 1.0, 0.5 - math.atan(2.0) / math.pi),
        (1.0, 2.0, 0.5 + 0.5 / math.sqrt(3.0)),
    ],
)
def test_special__t_cdf_closed_forms(x, nu, expected):
    from tcopula_bayes._special import t_cdf

    assert t_cdf(x, nu) == pytest.approx(expected, rel=1e-12)


@pytest.mark.parametrize("nu", [1.0, 2.5, 4.0, 30.0, 100.0])
def test_special__t_cdf_matches_scipy(nu):
    from tcopula_bayes._special import t_cdf

    x = np.array([-300.0, -12.0, -3.0, -0.5, 0.1, 1.0, 2.0, 7.5, 40.0])
    assert t_cdf(x, nu) == pytest.approx(stats.t.cdf(x, nu), rel=1e-10)


@pytest.mark.parametrize("nu", [1.0, 2.5, 4.0, 30.0, 100.0])
@pytest.mark.parametrize("p", [1e-10, 1e-4, 0.025, 0.3, 0.5, 0.75, 0.975])
def test_special__t_quantile_matches_scipy(p, nu):
    from tcopula_bayes._special import t_quantile

    assert t_quantile(p, nu) == pytest.approx(
        stats.t.ppf(p, nu), rel=1e-8, abs=1e-14
    )


def test_special__t_quantile_table_value():
    from tcopula_bayes._special import t_quantile

    assert t_quantile(0.975, 4.0) == pytest.approx(2.7764451051977987, rel=1e-10)
    assert t_quantile(0.5, 7.0) == 0.0


def test_special__array_in_array_out():
    from tcopula_bayes._special import t_cdf, t_quantile

    values = t_quantile(np.array([[0.1, 0.2], [0.3, 0.4]]), 5.0)
    assert values.shape == (2, 2)
    assert isinstance(t_cdf(1.0, 5.0), float)


@pytest.mark.parametrize(
    "call",
    [
        lambda f: f.t_cdf(1.0, 0.0),
        lambda f: f.t_cdf(1.0, -2.0),
        lambda f: f.t_cdf(np.inf, 3.0),
        lambda f: f.t_quantile(0.0, 3.0),
        lambda f: f.t_quantile(1.0, 3.0),
        lambda f: f.t_quantile(0.5, np.nan),
        lambda f: f.chi_w_quantile(1.5, 3.0),
        lambda f: f.chi_w_cdf(0.0, 3.0),
        lambda f: f.chi2_sf(-1.0, 3.0),
        lambda f: f.norm_quantile(0.0),
        lambda f: f.log_gamma(0.0),
    ],
)
def test_special__domain_errors(call):
    from tcopula_bayes import _special
    from tcopula_bayes._errors import DomainError

    with pytest.raises(DomainError):
        call(_special)


@pytest.mark.parametrize("nu", [1.0, 3.0, 25.0, 90.0])
def test_special__chi_w_quantile_inverts_cdf(nu):
    from tcopula_bayes._special import chi_w_cdf, chi_w_quantile

    v = np.array([1e-9, 0.01, 0.2, 0.5, 0.8, 0.99, 1.0 - 1e-9])
    w = chi_w_quantile(v, nu)
    assert np.all(np.diff(w) > 0)
    assert chi_w_cdf(w, nu) == pytest.approx(v, rel=1e-7)


def test_special__chi_w_quantile_matches_definition():
    from tcopula_bayes._special import chi_w_quantile

    # W <= w  <=>  S >= nu / w^2 with S ~ chi2(nu)
    nu, v = 6.0, 0.3
    s = stats.chi2.isf(v, nu)
    assert chi_w_quantile(v, nu) == pytest.approx(math.sqrt(nu / s), rel=1e-10)


@pytest.mark.parametrize("nu", [1.0, 4.0, 40.9])
def test_special__chi_w_quantile_upper_tail(nu):
    from tcopula_bayes._special import chi_w_cdf, chi_w_quantile

    v = np.array([0.01, 0.2, 0.5])
    tiny = np.array([1e-12, 1e-40, 1e-200])

    assert chi_w_quantile(v, nu, upper=True) == pytest.approx(
        chi_w_quantile(1.0 - v, nu), rel=1e-9
    )
    w = chi_w_quantile(tiny, nu, upper=True)
    assert np.all(np.isfinite(w))
    assert np.all(np.diff(w) > 0)
    assert 1.0 - chi_w_cdf(w[:1], nu) == pytest.approx(tiny[:1], rel=1e-3)


@pytest.mark.parametrize("x", [0.0, 1.3, 15.0, 15.1, 34.9])
def test_special__chi2_sf_four_dof_closed_form(x):
    from tcopula_bayes._special import chi2_sf

    assert chi2_sf(x, 4.0) == pytest.approx(
        math.exp(-0.5 * x) * (1.0 + 0.5 * x), rel=1e-12
    )


def test_special__chi2_quantile_matches_scipy():
    from tcopula_bayes._special import chi2_quantile

    assert chi2_quantile(0.99, 4.0) == pytest.approx(
        stats.chi2.ppf(0.99, 4.0), rel=1e-10
    )


def test_special__t_log_pdf_matches_scipy():
    from tcopula_bayes._special import t_log_pdf

    x = np.linspace(-50.0, 50.0, 11)
    assert t_log_pdf(x, 3.5) == pytest.approx(stats.t.logpdf(x, 3.5), rel=1e-12)


@pytest.mark.parametrize(
    "lower,upper,expected",
    [
        (-1.0, 1.0, math.log(sc.ndtr(1.0) - sc.ndtr(-1.0))),
        (-np.inf, 0.0, math.log(0.5)),
        (30.0, 31.0, float(sc.log_ndtr(-30.0))),
        (-31.0, -30.0, float(sc.log_ndtr(-30.0))),
    ],
)
def test_special__norm_log_interval_mass(lower, upper, expected):
    from tcopula_bayes._special import norm_log_interval_mass

    assert norm_log_interval_mass(lower, upper) == pytest.approx(
        expected, rel=1e-9
    )


def test_special__norm_log_interval_mass_empty_interval():
    from tcopula_bayes._errors import DomainError
    from tcopula_bayes._special import norm_log_interval_mass

    with pytest.raises(DomainError):
        norm_log_interval_mass(1.0, 1.0)
