import numpy as np
import pytest

from gibbspost import InputError, SubshiftSpec, admissible_words, separation_metric
from gibbspost.shift import as_word, count_admissible, is_admissible, window_codes


def test_full_shift_pairs(full2):
    words = admissible_words(full2, 2)
    assert words.tolist() == [[0, 0], [0, 1], [1, 0], [1, 1]]
    assert count_admissible(full2, 2) == 4


def test_golden_mean_counts_follow_fibonacci(golden):
    assert count_admissible(golden, 3) == 5
    counts = [count_admissible(golden, n) for n in range(1, 10)]
    assert all(c == a + b for a, b, c in zip(counts, counts[1:], counts[2:]))
    brute = sum(
        is_admissible(golden, w) for w in np.array(np.meshgrid(*[[0, 1]] * 6)).reshape(6, -1).T
    )
    assert brute == count_admissible(golden, 6)


def test_empty_word(full2, golden):
    for spec in (full2, golden):
        assert admissible_words(spec, 0).shape == (1, 0)


def test_admissibility(full2, golden):
    assert not is_admissible(golden, [1, 1])
    assert is_admissible(golden, [0, 1, 0])
    rng = np.random.default_rng(0)
    assert all(is_admissible(full2, rng.integers(0, 2, 12)) for _ in range(20))


def test_out_of_range_symbol(golden):
    with pytest.raises(InputError):
        is_admissible(golden, [0, 2])
    with pytest.raises(InputError):
        as_word([-1, 0], golden)


def test_separation_metric():
    assert separation_metric([0, 0, 0], [0, 0, 0]) == (0.0, True)
    assert separation_metric([0, 1, 0], [0, 0, 0]).distance == 0.25
    assert separation_metric([1, 0, 0], [0, 0, 0]) == (0.5, False)


def test_window_codes_first_symbol_most_significant():
    assert window_codes(np.array([1, 0, 1, 1]), 2, 2).tolist() == [2, 1, 3]


def test_non_primitive_rejected():
    spec = SubshiftSpec.from_matrix([[0, 1], [1, 0]])
    assert not spec.primitive
    with pytest.raises(InputError):
        spec.require_primitive()
