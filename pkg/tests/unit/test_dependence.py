import math

import numpy as np
import pytest


def test_dependence__pseudo_obs_average_ranks():
    from tcopula_bayes._dependence import to_pseudo_obs
    from tcopula_bayes._garch import ResidualMatrix

    residuals = ResidualMatrix(
        np.array([[0.3, 5.0], [-1.0, 5.0], [2.0, 1.0], [0.0, 7.0]]), ("a", "b")
    )

    sample = to_pseudo_obs(residuals)

    assert sample.labels == ("a", "b")
    assert sample.u[:, 0].tolist() == pytest.approx([0.6, 0.2, 0.8, 0.4])
    assert sample.u[:, 1].tolist() == pytest.approx([0.5, 0.5, 0.2, 0.8])


@pytest.mark.parametrize(
    "tau,expected",
    [(0.0, 0.0), (1.0 / 3.0, 0.5), (-0.5, -math.sqrt(0.5)), (1.0, 1.0 - 1e-10)],
)
def test_dependence__tau_to_correlation(tau, expected):
    from tcopula_bayes._dependence import tau_to_correlation

    assert tau_to_correlation(tau) == pytest.approx(expected, abs=1e-15)


def test_dependence__kendall_corr_recovers_gaussian_dependence():
    from tcopula_bayes._dependence import kendall_corr
    from tcopula_bayes._types import PseudoSample

    rho = np.array([[1.0, 0.6, -0.3], [0.6, 1.0, 0.1], [-0.3, 0.1, 1.0]])
    rng = np.random.default_rng(4)
    z = rng.standard_normal((4000, 3)) @ np.linalg.cholesky(rho).T
    ranks = np.argsort(np.argsort(z, axis=0), axis=0) + 1.0

    corr = kendall_corr(PseudoSample(ranks / 4001.0))

    assert corr.entries == pytest.approx(rho, abs=0.04)


def test_dependence__kendall_corr_is_rank_based():
    from tcopula_bayes._dependence import kendall_corr
    from tcopula_bayes._types import PseudoSample

    u = np.array([[0.1, 0.2], [0.4, 0.3], [0.3, 0.9], [0.8, 0.7]])
    # tau = (4 concordant - 2 discordant) / 6
    expected = math.sin(math.pi / 6.0)

    assert kendall_corr(PseudoSample(u)).entries[0, 1] == pytest.approx(
        expected, rel=1e-14
    )
    assert kendall_corr(PseudoSample(u ** 3)).entries[0, 1] == pytest.approx(
        expected, rel=1e-14
    )


def test_dependence__kendall_corr_constant_column():
    from tcopula_bayes._dependence import kendall_corr
    from tcopula_bayes._errors import DataError
    from tcopula_bayes._types import PseudoSample

    u = np.array([[0.1, 0.5], [0.4, 0.5], [0.3, 0.5]])

    with pytest.raises(DataError) as excinfo:
        kendall_corr(PseudoSample(u, ("a", "b")))

    assert excinfo.value.column == "b"


def test_dependence__kendall_corr_needs_two_rows():
    from tcopula_bayes._dependence import kendall_corr
    from tcopula_bayes._errors import ShapeError
    from tcopula_bayes._types import PseudoSample

    with pytest.raises(ShapeError):
        kendall_corr(PseudoSample([[0.2, 0.3]]))


def test_dependence__nearest_correlation():
    from tcopula_bayes._dependence import nearest_correlation
    from tcopula_bayes._types import CorrelationMatrix

    entries = np.array([[1.0, 0.9, -0.9], [0.9, 1.0, 0.9], [-0.9, 0.9, 1.0]])

    projected = nearest_correlation(entries)

    assert np.diag(projected).tolist() == [1.0, 1.0, 1.0]
    assert np.linalg.eigvalsh(projected).min() > 0
    assert CorrelationMatrix(projected).dim == 3


def test_dependence__nearest_correlation_keeps_valid_matrix():
    from tcopula_bayes._dependence import nearest_correlation

    entries = np.array([[1.0, 0.4], [0.4, 1.0]])

    assert nearest_correlation(entries) == pytest.approx(entries, abs=1e-14)


def _naive_tau_b(x, y):
    dx = np.sign(x[:, None] - x[None, :])
    dy = np.sign(y[:, None] - y[None, :])
    upper = np.triu(np.ones_like(dx, dtype=bool), k=1)
    score = np.sum((dx * dy)[upper])
    untied_x = np.count_nonzero(dx[upper])
    untied_y = np.count_nonzero(dy[upper])
    return score / math.sqrt(untied_x * untied_y)


def test_dependence__kendall_corr_matches_pairwise_count():
    from tcopula_bayes._dependence import kendall_corr
    from tcopula_bayes._types import PseudoSample

    rng = np.random.default_rng(12)
    z = rng.standard_normal((300, 3)) @ np.linalg.cholesky(
        np.array([[1.0, 0.5, 0.2], [0.5, 1.0, -0.3], [0.2, -0.3, 1.0]])
    ).T
    # coarse levels force ties
    u = (np.clip(np.round(z * 4.0), -9, 9) + 10.0) / 20.0

    corr = kendall_corr(PseudoSample(u))

    for i, j in ((0, 1), (0, 2), (1, 2)):
        expected = math.sin(0.5 * math.pi * _naive_tau_b(u[:, i], u[:, j]))
        assert corr.entries[i, j] == pytest.approx(expected, rel=1e-12)
