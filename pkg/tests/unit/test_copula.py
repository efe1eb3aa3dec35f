import math

import numpy as np
import pytest

from scipy import special as sc

_POINTS = np.array(
    [
        [0.5, 0.5, 0.5],
        [0.3, 0.8, 0.6],
        [0.01, 0.02, 0.05],
        [0.99, 0.5, 0.1],
        [0.999, 0.998, 0.9995],
    ]
)


def _corr3():
    from tcopula_bayes._types import CorrelationMatrix

    return CorrelationMatrix(
        [[1.0, 0.5, 0.2], [0.5, 1.0, 0.3], [0.2, 0.3, 1.0]]
    )


@pytest.mark.parametrize("nu", [1.5, 4.0, 25.0])
@pytest.mark.parametrize("labels", [(0, 0, 0), (0, 1, 2), (0, 1, 0)])
def test_copula__equal_dof_reduces_to_standard(nu, labels):
    from tcopula_bayes._copula import log_density_batch, standard_t_log_density
    from tcopula_bayes._types import DofVector, GroupConfig, PseudoSample

    config = GroupConfig(labels)
    dof = DofVector([nu] * 3)
    corr = _corr3()

    values = log_density_batch(PseudoSample(_POINTS), config, dof, corr)

    assert values == pytest.approx(
        standard_t_log_density(_POINTS, nu, corr), abs=1e-7
    )


def _random_correlation(rng, dim):
    from tcopula_bayes._types import CorrelationMatrix

    factor = rng.standard_normal((dim, 2 * dim))
    cov = factor @ factor.T
    scale = 1.0 / np.sqrt(np.diag(cov))
    return CorrelationMatrix(cov * np.outer(scale, scale))


def test_copula__equal_dof_reduction_on_random_cases():
    from tcopula_bayes._copula import log_density_batch, standard_t_log_density
    from tcopula_bayes._types import DofVector, GroupConfig, PseudoSample

    rng = np.random.default_rng(0)
    worst = 0.0
    for case in range(200):
        dim = (2, 3, 6)[case % 3]
        nu = float(rng.uniform(1.1, 99.0))
        corr = _random_correlation(rng, dim)
        u = rng.uniform(1e-4, 1.0 - 1e-4, size=(1, dim))
        labels = tuple(rng.integers(0, dim, size=dim))

        value = log_density_batch(
            PseudoSample(u), GroupConfig(labels), DofVector([nu] * dim), corr
        )[0]

        worst = max(worst, abs(value - standard_t_log_density(u[0], nu, corr)))

    assert worst <= 1e-7


def test_copula__equal_dof_reduction_with_mass_near_mixing_tail():
    from tcopula_bayes._copula import log_density, standard_t_log_density
    from tcopula_bayes._types import CorrelationMatrix, DofVector, GroupConfig

    corr = CorrelationMatrix([[1.0, 0.88], [0.88, 1.0]])
    u = np.array([4.0e-4, 0.744])

    value = log_density(u, GroupConfig((0, 1)), DofVector([40.9, 40.9]), corr)

    assert value == pytest.approx(
        standard_t_log_density(u, 40.9, corr), abs=1e-7
    )


@pytest.mark.slow
def test_copula__bivariate_density_integrates_to_one():
    from tcopula_bayes._copula import log_density_batch
    from tcopula_bayes._types import (
        CorrelationMatrix,
        DofVector,
        GroupConfig,
        PseudoSample,
    )

    grid = (np.arange(400) + 0.5) / 400.0
    u = np.stack(np.meshgrid(grid, grid, indexing="ij"), axis=-1).reshape(-1, 2)

    values = log_density_batch(
        PseudoSample(u),
        GroupConfig((0, 1)),
        DofVector([3.0, 30.0]),
        CorrelationMatrix.equicorrelated(2, 0.5),
    )

    assert np.mean(np.exp(values)) == pytest.approx(1.0, abs=1e-4)


@pytest.mark.parametrize("nu", [1.2, 3.0, 60.0])
@pytest.mark.parametrize("u", [0.5, 1e-4, 0.2, 0.97])
def test_copula__one_dimensional_density_is_one(nu, u):
    from tcopula_bayes._copula import log_density
    from tcopula_bayes._types import CorrelationMatrix, DofVector, GroupConfig

    value = log_density(
        [u], GroupConfig((0,)), DofVector([nu]), CorrelationMatrix.identity(1)
    )

    assert value == pytest.approx(0.0, abs=1e-7)


def test_copula__median_density_with_two_dof():
    from tcopula_bayes._copula import log_density
    from tcopula_bayes._types import CorrelationMatrix, DofVector, GroupConfig

    value = log_density(
        [0.5, 0.5],
        GroupConfig((0, 1)),
        DofVector([2.0, 2.0]),
        CorrelationMatrix.identity(2),
    )

    assert math.exp(value) == pytest.approx(4.0 / math.pi, rel=1e-8)


def test_copula__standard_density_closed_form_at_median():
    from tcopula_bayes._copula import standard_t_log_density
    from tcopula_bayes._types import CorrelationMatrix

    nu = 7.0
    expected = (
        sc.gammaln(0.5 * (nu + 2.0))
        + sc.gammaln(0.5 * nu)
        - 2.0 * sc.gammaln(0.5 * (nu + 1.0))
    )

    assert standard_t_log_density(
        np.array([0.5, 0.5]), nu, CorrelationMatrix.identity(2)
    ) == pytest.approx(expected, rel=1e-13)


def test_copula__likelihood_is_sum_of_densities():
    from tcopula_bayes._copula import log_density_batch, log_likelihood
    from tcopula_bayes._types import DofVector, GroupConfig, PseudoSample

    sample = PseudoSample(_POINTS)
    config = GroupConfig((0, 1, 0))
    dof = DofVector([3.0, 12.0, 3.0])
    corr = _corr3()

    batch = log_density_batch(sample, config, dof, corr, chunk_size=2)
    total = log_likelihood(sample, config, dof, corr, chunk_size=2)

    assert total == pytest.approx(float(np.sum(batch)), rel=1e-13)


def test_copula__values_do_not_depend_on_workspace_state():
    from tcopula_bayes._copula import DensityWorkspace, log_density_batch
    from tcopula_bayes._types import DofVector, GroupConfig, PseudoSample

    sample = PseudoSample(_POINTS)
    config = GroupConfig((0, 1, 2))
    corr = _corr3()
    ws = DensityWorkspace()

    log_density_batch(sample, config, DofVector([2.0, 9.0, 40.0]), corr, ws)
    reused = log_density_batch(
        sample, config, DofVector([5.0, 9.0, 40.0]), corr, ws
    )
    fresh = log_density_batch(sample, config, DofVector([5.0, 9.0, 40.0]), corr)

    assert reused.tolist() == fresh.tolist()


def test_copula__workspace_keeps_last_two_values_per_dimension():
    from tcopula_bayes._copula import DensityWorkspace

    u = np.array([[0.2, 0.7], [0.4, 0.9]])
    ws = DensityWorkspace(slots=2)

    ws.quantiles(u, np.array([3.0, 8.0]))
    assert ws.recomputed == 2
    ws.quantiles(u, np.array([4.0, 8.0]))
    assert ws.recomputed == 3
    ws.quantiles(u, np.array([3.0, 8.0]))
    ws.quantiles(u, np.array([4.0, 8.0]))
    assert ws.recomputed == 3
    ws.quantiles(u, np.array([5.0, 8.0]))
    ws.quantiles(u, np.array([3.0, 8.0]))
    assert ws.recomputed == 5

    ws.quantiles(u.copy(), np.array([5.0, 8.0]))
    assert ws.recomputed == 7


def test_copula__dimension_mismatch():
    from tcopula_bayes._copula import log_likelihood
    from tcopula_bayes._errors import ShapeError
    from tcopula_bayes._types import DofVector, GroupConfig, PseudoSample

    with pytest.raises(ShapeError):
        log_likelihood(
            PseudoSample(_POINTS[:, :2]),
            GroupConfig((0, 1, 2)),
            DofVector([3.0, 4.0, 5.0]),
            _corr3(),
        )


def test_copula__dof_not_shared_within_group():
    from tcopula_bayes._copula import log_likelihood
    from tcopula_bayes._errors import DomainError
    from tcopula_bayes._types import DofVector, GroupConfig, PseudoSample

    with pytest.raises(DomainError):
        log_likelihood(
            PseudoSample(_POINTS),
            GroupConfig((0, 0, 1)),
            DofVector([3.0, 4.0, 5.0]),
            _corr3(),
        )


def test_copula__simulate_is_reproducible():
    from tcopula_bayes._copula import simulate
    from tcopula_bayes._types import DofVector, GroupConfig

    config = GroupConfig((0, 1, 0))
    dof = DofVector([2.0, 30.0, 2.0])

    first = simulate(config, dof, _corr3(), 500, seed=11)
    second = simulate(config, dof, _corr3(), 500, seed=11)
    other = simulate(config, dof, _corr3(), 500, seed=11, stream=(1,))

    assert first.u.shape == (500, 3)
    assert first.u.tolist() == second.u.tolist()
    assert not np.array_equal(first.u, other.u)
    assert np.all((first.u > 0.0) & (first.u < 1.0))


def test_copula__simulate_rejects_empty_draws():
    from tcopula_bayes._copula import simulate
    from tcopula_bayes._errors import ShapeError
    from tcopula_bayes._types import DofVector, GroupConfig

    with pytest.raises(ShapeError):
        simulate(GroupConfig((0, 0, 0)), DofVector([4.0] * 3), _corr3(), 0, 1)


def test_copula__mle_fit_maximizes_likelihood():
    from tcopula_bayes._copula import log_likelihood, mle_fit, simulate
    from tcopula_bayes._types import CorrelationMatrix, DofVector, GroupConfig

    config = GroupConfig((0, 0))
    corr = CorrelationMatrix.equicorrelated(2, 0.4)
    truth = DofVector([4.0, 4.0])
    sample = simulate(config, truth, corr, 300, seed=3)

    result = mle_fit(sample, config, corr, DofVector([10.0, 10.0]))

    assert result.converged
    assert result.dof.group_values(config).size == 1
    assert result.log_lik == pytest.approx(
        log_likelihood(sample, config, result.dof, corr), rel=1e-12
    )
    assert result.log_lik >= log_likelihood(sample, config, truth, corr) - 1e-6
    assert result.log_lik >= log_likelihood(
        sample, config, DofVector([10.0, 10.0]), corr
    )
