import numpy as np
import pytest

from gibbspost import InputError, Potential, bernoulli_measure, markov_measure
from gibbspost.cocycle import GOLDEN_LOG, CocycleSpec, annealed_moments
from gibbspost.families import bernoulli_atoms_family, markov_matrix
from gibbspost.losses import BirkhoffPsi, ScaledPsi
from gibbspost.nonadditive import (
    birkhoff_family,
    check_almost_additive,
    fekete_limit,
    free_energy,
    log_cylinder_family,
    power_family,
    psi_star,
)
from gibbspost.sampling import SeededStream
from gibbspost.thermo import entropy, expectation, relative_entropy

from conftest import SEED_BASE


def test_fekete_linear():
    est = fekete_limit([(n, float(n)) for n in range(1, 50)])
    assert est.bound == 1.0 and abs(est.extrapolated - 1.0) < 1e-12


def test_fekete_log_correction():
    vals = [(n, n + np.log(n + 1)) for n in range(1, 1001)]
    est = fekete_limit(vals, subadditive=True)
    assert est.bound == pytest.approx(vals[-1][1] / 1000)
    assert abs(est.extrapolated - 1.0) < 0.01


def test_fekete_annealed_norm_at_unperturbed_angles():
    ser = annealed_moments(CocycleSpec((0.0, 0.0)), bernoulli_measure(2, [0.5, 0.5]), [4, 8, 12, 16, 20])
    est = fekete_limit(list(zip(ser.n.tolist(), ser.log_mean_norm.tolist())), subadditive=True)
    assert abs(est.extrapolated - GOLDEN_LOG) < 1e-3


def test_fekete_rejects_bad_input():
    with pytest.raises(InputError):
        fekete_limit([])
    with pytest.raises(InputError):
        fekete_limit([(2, 1.0), (1, 1.0)])


def test_birkhoff_family_is_additive(full2):
    u = Potential(full2, 3, np.linspace(-1, 2, 8))
    rep = check_almost_additive(birkhoff_family(u), 30, 200, SeededStream(SEED_BASE))
    assert rep.holds and rep.max_defect < 1e-12


def test_log_cylinder_family_within_three_log_k():
    m = markov_measure(markov_matrix(0.8, 0.3))
    f = log_cylinder_family(m)
    assert f.constant == pytest.approx(3 * np.log(m.gibbs_constant))
    rep = check_almost_additive(f, 40, 300, SeededStream(SEED_BASE))
    assert rep.holds and rep.max_defect <= f.constant


def test_power_family_violates(full2):
    rep = check_almost_additive(power_family(full2, 2.0, constant=1.0), 10, 50, SeededStream(SEED_BASE))
    assert not rep.holds and rep.max_violation > 0


def test_free_energy_additive_exact(full2):
    u = Potential(full2, 2, [0.3, -0.2, 1.0, 0.1])
    eta = markov_measure(markov_matrix(0.6, 0.3))
    fe = free_energy(eta, birkhoff_family(u), [2, 4, 6])
    np.testing.assert_allclose(fe.per_n, expectation(eta, u), atol=1e-13)


def test_free_energy_of_constant_vanishes(full2):
    f = power_family(full2, 0.0)  # phi_n = 1
    fe = free_energy(bernoulli_measure(2, [0.5, 0.5]), f, [10, 100, 1000, 10_000], SeededStream(1), samples=8)
    assert fe.per_n[-1] == 1e-4 and abs(fe.value) < 1e-3


def test_free_energy_of_log_cylinders_matches_relative_entropy():
    m0 = markov_measure(markov_matrix(0.7, 0.4))
    mt = markov_measure(markov_matrix(0.5, 0.6))
    fe = free_energy(m0, log_cylinder_family(mt), [4, 8, 12, 16])
    expect = -entropy(m0) - relative_entropy(m0, mt)
    assert abs(fe.value - expect) < 1e-10


def test_psi_star_scaled(full2):
    fam = bernoulli_atoms_family([0, 1], [[0.5, 0.5], [0.2, 0.8]])
    g = np.array([1.5, 0.25])
    st = psi_star(fam, ScaledPsi(g), bernoulli_measure(2, [0.5, 0.5]), [10, 20, 40], 4, SeededStream(SEED_BASE))
    np.testing.assert_allclose(st.extrapolated, g, atol=1e-12)
    np.testing.assert_allclose(st.bound, g, atol=1e-12)


def test_psi_star_birkhoff_under_bernoulli(full2):
    fam = bernoulli_atoms_family([0, 1], [[0.5, 0.5], [0.2, 0.8]])
    pots = [Potential(full2, 1, [1.0, 3.0]), Potential(full2, 1, [0.5, -0.5])]
    nu = bernoulli_measure(2, [0.3, 0.7])
    st = psi_star(fam, BirkhoffPsi(pots), nu, [2000, 4000, 8000], 32, SeededStream(SEED_BASE))
    expect = np.array([0.3 * 1 + 0.7 * 3, 0.3 * 0.5 - 0.7 * 0.5])
    assert np.all(np.abs(st.extrapolated - expect) < 4 * st.std_err[:, -1] + 1e-3)
