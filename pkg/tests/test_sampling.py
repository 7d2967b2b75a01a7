import numpy as np
import pytest

from gibbspost import InputError, Potential, bernoulli_measure, gibbs_measure, markov_measure
from gibbspost.families import markov_matrix
from gibbspost.sampling import (
    SeededStream,
    draws_per_orbit,
    empirical_pair_frequencies,
    empirical_symbol_frequencies,
    sample_orbit,
    sample_orbits,
)
from gibbspost.shift import admissible_words, is_admissible
from gibbspost.thermo import word_log_measures

from conftest import SEED_BASE, stationary

# SplitMix64 outputs for seed 1234567 from the reference C implementation
SPLITMIX_REF = [
    6457827717110365317,
    3203168211198807973,
    9817491932198370423,
    4593380528125082431,
    16408922859458223821,
]


def test_splitmix_reference_values():
    raw, nxt = SeededStream(1234567).raw(5)
    assert raw.tolist() == SPLITMIX_REF
    assert nxt.counter == 5
    tail, _ = SeededStream(1234567, counter=2).raw(3)
    assert tail.tolist() == SPLITMIX_REF[2:]


def test_uniforms_in_unit_interval():
    u, _ = SeededStream(SEED_BASE).uniforms(10_000)
    assert u.min() >= 0.0 and u.max() < 1.0
    assert abs(u.mean() - 0.5) < 0.01


def test_replica_and_child_streams_differ():
    s = SeededStream(SEED_BASE)
    a, _ = s.replica(1).raw(4)
    b, _ = s.replica(2).raw(4)
    c, _ = s.child(1).raw(4)
    assert s.replica(3).seed == SEED_BASE + 3
    assert len({tuple(a), tuple(b), tuple(c)}) == 3


def test_degenerate_bernoulli():
    m = bernoulli_measure(2, [1.0, 0.0])
    assert (sample_orbit(m, 500, SeededStream(SEED_BASE)) == 0).all()


def test_symbol_frequency(b13):
    y = sample_orbit(b13, 100_000, SeededStream(SEED_BASE))
    assert abs(empirical_symbol_frequencies(y, 2)[0] - 1 / 3) < 0.01


def test_determinism(b13):
    s = SeededStream(SEED_BASE)
    assert np.array_equal(sample_orbit(b13, 1000, s), sample_orbit(b13, 1000, s))


def test_batch_rows_match_sequential_draws(chain74):
    s = SeededStream(SEED_BASE)
    batch, end = sample_orbits(chain74, 50, 3, s)
    cur = s
    for row in batch:
        one, cur = sample_orbits(chain74, 50, 1, cur)
        assert np.array_equal(one[0], row)
    assert cur == end
    assert end.counter == 3 * draws_per_orbit(chain74, 50)


def test_pair_frequencies(full2):
    w = np.tile([0, 1], 50)
    f = empirical_pair_frequencies(w, full2)
    np.testing.assert_allclose(f, [[0, 50 / 99], [49 / 99, 0]])
    assert empirical_pair_frequencies([1, 0], full2).tolist() == [[0, 0], [1, 0]]
    with pytest.raises(InputError):
        empirical_pair_frequencies([1], full2)


def test_markov_pair_frequencies(chain74, full2):
    P = markov_matrix(0.7, 0.4)
    pi = stationary(P)
    y = sample_orbit(chain74, 100_000, SeededStream(SEED_BASE))
    f = empirical_pair_frequencies(y, full2)
    expect = np.array([[pi[s] * P[t, s] for t in range(2)] for s in range(2)])
    assert np.abs(f - expect).max() < 0.01


def test_block_law_matches_cylinder_masses(golden):
    # depth-3 potential on a non-full shift: sampled 4-blocks vs exact masses
    m = gibbs_measure(Potential(golden, 3, [0.4, -0.3, 0.9, 0.1, -0.6]))
    N = 40_000
    words, _ = sample_orbits(m, 4, N, SeededStream(SEED_BASE))
    assert all(is_admissible(golden, w) for w in words[:200])
    ref = admissible_words(golden, 4)
    p = np.exp(word_log_measures(m, ref))
    codes = words @ (2 ** np.arange(3, -1, -1))
    freq = np.array([(codes == c).mean() for c in ref @ (2 ** np.arange(3, -1, -1))])
    assert np.all(np.abs(freq - p) < 4.5 * np.sqrt(p * (1 - p) / N))
    assert abs(freq.sum() - 1.0) < 1e-12


def test_bad_lengths(b13):
    with pytest.raises(InputError):
        sample_orbit(b13, 0, SeededStream(1))
