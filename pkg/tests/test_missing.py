import numpy as np
import pytest

from mlbels.errors import ConfigurationError
from mlbels.missing import drop_labels, impute_for_weights, mask_for_br, validate_observation


def test_mask_example():
    rows, y = mask_for_br(np.array([[1], [0], [-1]]), 0)
    np.testing.assert_array_equal(rows, [0, 2])
    np.testing.assert_array_equal(y, [1, 0])


def test_mask_full_and_empty():
    obs = np.array([[1, 0], [-1, 0], [1, 0]])
    rows, y = mask_for_br(obs, 0)
    np.testing.assert_array_equal(rows, [0, 1, 2])
    np.testing.assert_array_equal(y, [1, 0, 1])
    rows, y = mask_for_br(obs, 1)
    assert rows.size == 0 and y.size == 0


def test_impute_examples():
    np.testing.assert_array_equal(impute_for_weights([[1, 0, -1]]), [[1, 0, 0]])
    np.testing.assert_array_equal(impute_for_weights([[0, 0, 0]]), [[0, 0, 0]])
    full = np.array([[1, -1], [-1, 1]])
    np.testing.assert_array_equal(impute_for_weights(full), (full + 1) // 2)


def test_drop_keep_all_is_identity(rng):
    obs = rng.choice([-1, 1], size=(20, 5)).astype(np.int8)
    out = drop_labels(obs, 1.0, seed=3)
    np.testing.assert_array_equal(out, obs)
    assert out is not obs


def test_drop_rate_within_three_sigma():
    obs = np.ones((100, 100), dtype=np.int8)
    kept = np.count_nonzero(drop_labels(obs, 0.1, seed=11))
    assert 910 <= kept <= 1090  # mean 1000, sigma 30


def test_drop_deterministic(rng):
    obs = rng.choice([-1, 1], size=(50, 8))
    np.testing.assert_array_equal(drop_labels(obs, 0.3, (1, 2)), drop_labels(obs, 0.3, (1, 2)))
    assert not np.array_equal(drop_labels(obs, 0.3, (1, 2)), drop_labels(obs, 0.3, (1, 3)))


def test_drop_only_hides(rng):
    obs = rng.choice([-1, 1], size=(50, 8))
    out = drop_labels(obs, 0.5, 0)
    assert np.all((out == obs) | (out == 0))


def test_training_rows_shrink_with_missingness(rng):
    obs = rng.choice([-1, 1], size=(500, 3))
    sizes = [mask_for_br(drop_labels(obs, keep, 5), 0)[0].size for keep in (1.0, 0.7, 0.3, 0.1)]
    assert sizes == sorted(sizes, reverse=True)


@pytest.mark.parametrize("bad", [0.0, -0.1, 1.5])
def test_drop_rejects_bad_fraction(bad):
    with pytest.raises(ConfigurationError):
        drop_labels(np.ones((2, 2)), bad)


def test_validate_rejects_other_values():
    with pytest.raises(ConfigurationError):
        validate_observation([[2, 0]])
    with pytest.raises(ConfigurationError):
        validate_observation([1, 0])
