import math

import numpy as np
import pytest


@pytest.mark.parametrize(
    "f,a,b,expected",
    [
        (lambda s: s * s, 0.0, 1.0, 1.0 / 3.0),
        (np.exp, 0.0, 1.0, math.e - 1.0),
        (np.cos, -1.0, 2.0, math.sin(2.0) + math.sin(1.0)),
        (lambda s: 1.0 / (1.0 + 25.0 * s * s), -1.0, 1.0, 0.4 * math.atan(5.0)),
    ],
)
def test_quadrature__smooth_integrands(f, a, b, expected):
    from tcopula_bayes._quadrature import integrate_adaptive

    result = integrate_adaptive(f, rel_tol=1e-12, a=a, b=b)

    assert result.value == pytest.approx(expected, rel=1e-11)
    assert result.abs_error <= 1e-11 * abs(expected)
    assert result.evaluations % 21 == 0


def test_quadrature__vector_integrand_shares_panels():
    from tcopula_bayes._quadrature import integrate_adaptive

    result = integrate_adaptive(
        lambda s: np.column_stack([np.ones_like(s), s, s ** 5]), rel_tol=1e-12
    )

    assert result.value == pytest.approx([1.0, 0.5, 1.0 / 6.0], rel=1e-12)
    assert result.abs_error.shape == (3,)


def test_quadrature__endpoint_singularity():
    from tcopula_bayes._quadrature import integrate_adaptive

    result = integrate_adaptive(lambda s: 1.0 / np.sqrt(s), rel_tol=1e-9)

    assert result.value == pytest.approx(2.0, rel=1e-6)


def test_quadrature__breakpoints_cut_initial_panels():
    from tcopula_bayes._quadrature import integrate_adaptive

    plain = integrate_adaptive(np.exp, rel_tol=1e-12)
    cut = integrate_adaptive(np.exp, rel_tol=1e-12, breakpoints=(0.1, 0.5, 2.0))

    assert cut.value == pytest.approx(plain.value, rel=1e-12)
    assert cut.evaluations >= 3 * 21


def test_quadrature__budget_exhausted():
    from tcopula_bayes._errors import ConvergenceError
    from tcopula_bayes._quadrature import integrate_adaptive

    with pytest.raises(ConvergenceError) as excinfo:
        integrate_adaptive(lambda s: 1.0 / np.sqrt(s), rel_tol=1e-14, max_panels=3)

    assert excinfo.value.best == pytest.approx(2.0, rel=0.1)
    assert excinfo.value.abs_error > 0


@pytest.mark.parametrize(
    "kwargs",
    [
        {"rel_tol": 0.0, "abs_tol": 0.0},
        {"rel_tol": -1e-9},
        {"a": 1.0, "b": 0.0},
        {"b": np.inf},
        {"initial_panels": 0},
        {"initial_panels": 10, "max_panels": 5},
    ],
)
def test_quadrature__invalid_arguments(kwargs):
    from tcopula_bayes._errors import DomainError
    from tcopula_bayes._quadrature import integrate_adaptive

    with pytest.raises(DomainError):
        integrate_adaptive(np.exp, **kwargs)


def test_quadrature__non_finite_integrand():
    from tcopula_bayes._errors import DomainError
    from tcopula_bayes._quadrature import integrate_adaptive

    with pytest.raises(DomainError):
        integrate_adaptive(lambda s: np.full(s.shape, np.nan))


def test_quadrature__wrong_node_count():
    from tcopula_bayes._errors import ShapeError
    from tcopula_bayes._quadrature import integrate_adaptive

    with pytest.raises(ShapeError):
        integrate_adaptive(lambda s: np.ones(5))
