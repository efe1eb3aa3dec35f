import numpy as np
import pytest


def test_random__same_seed_same_stream():
    from tcopula_bayes._random import make_rng

    first = make_rng(7, (1, 2)).random(5)
    second = make_rng(7, (1, 2)).random(5)

    assert first.tolist() == second.tolist()


@pytest.mark.parametrize(
    "other", [(8, (1, 2)), (7, (1, 3)), (7, (1,)), (7, ())]
)
def test_random__distinct_keys_give_distinct_streams(other):
    from tcopula_bayes._random import make_rng

    seed, stream = other
    assert not np.array_equal(
        make_rng(7, (1, 2)).random(5), make_rng(seed, stream).random(5)
    )


@pytest.mark.parametrize("seed", [-1, 1.5, "3", True, None])
def test_random__invalid_seed(seed):
    from tcopula_bayes._errors import DomainError
    from tcopula_bayes._random import make_rng

    with pytest.raises(DomainError):
        make_rng(seed)


def test_random__negative_stream_key():
    from tcopula_bayes._errors import DomainError
    from tcopula_bayes._random import make_rng

    with pytest.raises(DomainError):
        make_rng(1, (0, -1))


def test_random__numpy_integer_seed():
    from tcopula_bayes._random import make_rng

    assert make_rng(np.int64(3)).random() == make_rng(3).random()
