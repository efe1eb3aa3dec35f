import logging

import numpy as np
import pytest


def _simulate(n, mu, omega, alpha, beta, seed):
    rng = np.random.default_rng(seed)
    x = np.empty(n)
    variance = omega / (1.0 - alpha - beta)
    previous = variance
    for t in range(n):
        variance = omega + alpha * previous + beta * variance
        x[t] = mu + np.sqrt(variance) * rng.standard_normal()
        previous = (x[t] - mu) ** 2
    return x


def test_garch__variance_recursion():
    from tcopula_bayes._garch import GarchParams, garch_variance

    params = GarchParams(mu=0.1, omega=0.2, alpha=0.3, beta=0.5, sigma0_sq=2.0)
    x = np.array([0.5, -1.0, 2.0, 0.0])

    expected = []
    variance, squared = 2.0, 2.0
    for value in x:
        variance = 0.2 + 0.3 * squared + 0.5 * variance
        expected.append(variance)
        squared = (value - 0.1) ** 2

    assert garch_variance(x, params) == pytest.approx(expected, rel=1e-14)


def test_garch__filter_standardizes():
    from tcopula_bayes._garch import GarchParams, garch_filter, garch_variance

    params = GarchParams(mu=0.0, omega=1.0, alpha=0.0, beta=0.0, sigma0_sq=1.0)
    x = np.array([1.0, -2.0, 3.0])

    assert garch_variance(x, params).tolist() == [1.0, 1.0, 1.0]
    assert garch_filter(x, params).tolist() == [1.0, -2.0, 3.0]


def test_garch__fit_recovers_parameters():
    from tcopula_bayes._garch import garch_filter, garch_fit

    x = _simulate(3000, 2e-4, 1e-6, 0.1, 0.85, seed=5)

    params = garch_fit(x)

    assert params.alpha == pytest.approx(0.1, abs=0.06)
    assert params.beta == pytest.approx(0.85, abs=0.1)
    assert params.alpha + params.beta < 1.0
    assert params.sigma0_sq == pytest.approx(np.var(x), rel=1e-12)
    assert np.var(garch_filter(x, params)) == pytest.approx(1.0, abs=0.1)


@pytest.mark.parametrize(
    "returns,error",
    [
        (np.zeros(50), "DomainError"),
        (np.zeros(200), "DataError"),
        (np.r_[np.ones(150), np.nan], "DataError"),
    ],
)
def test_garch__fit_rejects_bad_input(returns, error):
    from tcopula_bayes import _errors
    from tcopula_bayes._garch import garch_fit

    with pytest.raises(getattr(_errors, error)):
        garch_fit(returns)


@pytest.mark.parametrize(
    "kwargs",
    [
        {"omega": -1.0},
        {"alpha": 0.5, "beta": 0.5},
        {"sigma0_sq": 0.0},
    ],
)
def test_garch__params_validation(kwargs):
    from tcopula_bayes._errors import DomainError
    from tcopula_bayes._garch import GarchParams

    values = {"mu": 0.0, "omega": 1.0, "alpha": 0.1, "beta": 0.8, "sigma0_sq": 1.0}
    values.update(kwargs)

    with pytest.raises(DomainError):
        GarchParams(**values)


def test_garch__residual_matrix_warns_on_variance(caplog):
    from tcopula_bayes._garch import ResidualMatrix

    eps = np.column_stack([[1.0, -1.0, 1.0, -1.0], [10.0, -10.0, 10.0, -10.0]])

    with caplog.at_level(logging.WARNING, logger="tcopula_bayes._garch"):
        residuals = ResidualMatrix(eps)

    assert residuals.labels == ("x0", "x1")
    assert (residuals.n_obs, residuals.dim) == (4, 2)
    assert len(caplog.records) == 1
    assert "x1" in caplog.records[0].getMessage()


def test_garch__residual_matrix_shape():
    from tcopula_bayes._errors import DataError, ShapeError
    from tcopula_bayes._garch import ResidualMatrix

    with pytest.raises(ShapeError):
        ResidualMatrix(np.ones((1, 2)))
    with pytest.raises(ShapeError):
        ResidualMatrix(np.ones((3, 2)), labels=("a",))
    with pytest.raises(DataError):
        ResidualMatrix(np.array([[1.0, np.inf], [0.0, 1.0]]))


def test_garch__filter_series():
    from tcopula_bayes._data import PriceSeries
    from tcopula_bayes._garch import filter_series

    dates = np.arange(401).astype("datetime64[D]")
    series = [
        PriceSeries(
            dates,
            np.exp(np.r_[0.0, np.cumsum(_simulate(400, 0.0, 1e-5, 0.05, 0.9, s))]),
            label,
        )
        for s, label in ((1, "EUR"), (2, "GBP"))
    ]

    fits, residuals = filter_series(series)

    assert len(fits) == 2
    assert residuals.labels == ("EUR", "GBP")
    assert residuals.eps.shape == (400, 2)


def test_garch__filter_series_requires_aligned_dates():
    from tcopula_bayes._data import PriceSeries
    from tcopula_bayes._errors import DataError
    from tcopula_bayes._garch import filter_series

    prices = np.ones(3)
    first = PriceSeries(np.arange(3).astype("datetime64[D]"), prices, "A")
    second = PriceSeries(np.arange(1, 4).astype("datetime64[D]"), prices, "B")

    with pytest.raises(DataError) as excinfo:
        filter_series([first, second])

    assert excinfo.value.column == "B"


def test_garch__filter_series_wraps_failures():
    from tcopula_bayes._data import PriceSeries
    from tcopula_bayes._errors import DataError
    from tcopula_bayes._garch import filter_series

    short = PriceSeries(np.arange(10).astype("datetime64[D]"), np.ones(10), "A")

    with pytest.raises(DataError, match="< A >"):
        filter_series([short])
