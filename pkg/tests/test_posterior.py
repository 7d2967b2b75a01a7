import numpy as np
import pytest

from gibbspost import (
    DegeneratePosteriorError,
    InputError,
    ParamFamily,
    bernoulli_measure,
    markov_measure,
    midpoint_grid,
    posterior_direct,
    posterior_exploss,
    posterior_psi,
    sample_orbit,
    uniform_prior,
)
from gibbspost.families import bernoulli_atoms_family, markov_2x2_family, markov_matrix
from gibbspost.losses import BirkhoffLoss, ConstantPsi, ScaledPsi, ZeroLoss, constant_loss
from gibbspost.posterior import (
    PriorMeasure,
    direct_loglik,
    gamma_estimate,
    mass_of_ball,
    posterior_series,
)
from gibbspost.sampling import SeededStream
from gibbspost.thermo import Potential, prefix_log_measures

from conftest import SEED_BASE


@pytest.fixture
def atoms():
    return bernoulli_atoms_family([-1, 1], [[1 / 3, 2 / 3], [2 / 3, 1 / 3]])


@pytest.fixture
def small_markov():
    return markov_2x2_family(midpoint_grid([(0.2, 0.8), (0.2, 0.8)], 5))


def test_grid_midpoints():
    g = midpoint_grid([(0.2, 0.8), (0.0, 1.0)], [21, 4])
    assert g.nodes.shape == (84, 2)
    assert abs(g.axes()[0][10] - 0.5) < 1e-15
    np.testing.assert_allclose(g.axes()[1], [0.125, 0.375, 0.625, 0.875])
    assert abs(g.cell_volume - (0.6 / 21) * 0.25) < 1e-15


def test_atoms_sorted_by_label():
    fam = bernoulli_atoms_family([1, -1], [[2 / 3, 1 / 3], [1 / 3, 2 / 3]])
    assert fam.nodes[:, 0].tolist() == [-1.0, 1.0]
    np.testing.assert_allclose(fam.measures[0].marginal, [1 / 3, 2 / 3])


def test_identical_members_at_minimal_window():
    m = markov_measure(markov_matrix(0.7, 0.4))
    fam = ParamFamily(np.array([[0.0], [1.0], [2.0]]), [m, m, m], check_injective=False)
    prior = PriorMeasure(fam.nodes, np.array([0.2, 0.3, 0.5]))
    st = posterior_direct(prior, fam, [1])
    np.testing.assert_allclose(st.weights, prior.weights, atol=1e-15)


def test_injectivity_enforced():
    m = bernoulli_measure(2, [0.5, 0.5])
    with pytest.raises(InputError):
        ParamFamily(np.array([[0.0], [1.0]]), [m, m])


def test_direct_posterior_by_hand(atoms):
    y = [0, 1, 1, 1, 0]
    st = posterior_direct(uniform_prior(atoms), atoms, y)
    lm = (1 / 3) ** 2 * (2 / 3) ** 3
    lp = (2 / 3) ** 2 * (1 / 3) ** 3
    np.testing.assert_allclose(st.weights, [lm / (lm + lp), lp / (lm + lp)], rtol=1e-13)
    assert st.n == 5


def test_direct_loglik_matches_prefix_measures(small_markov):
    y = sample_orbit(small_markov.measures[3], 300, SeededStream(SEED_BASE))
    ll = direct_loglik(small_markov, y, [1, 10, 300])
    for i in (0, 7, 24):
        traj = prefix_log_measures(small_markov.measures[i], y)
        np.testing.assert_allclose(ll[i], traj[[0, 9, 299]], rtol=1e-13)


def test_all_nodes_excluded_is_degenerate():
    fam = bernoulli_atoms_family([0, 1], [[1.0, 0.0, 0.0], [0.0, 1.0, 0.0]])
    with pytest.raises(DegeneratePosteriorError):
        posterior_direct(uniform_prior(fam), fam, [0, 1, 2])


def test_posterior_survives_huge_loglik(atoms):
    y = sample_orbit(bernoulli_measure(2, [0.5, 0.5]), 200_000, SeededStream(SEED_BASE))
    st = posterior_direct(uniform_prior(atoms), atoms, y)
    assert np.isfinite(st.log_evidence) and abs(st.weights.sum() - 1) < 1e-12


def test_zero_loss_gives_prior(small_markov):
    prior = uniform_prior(small_markov)
    y = sample_orbit(small_markov.measures[0], 50, SeededStream(SEED_BASE))
    st = posterior_exploss(prior, small_markov, ZeroLoss(), y)
    np.testing.assert_allclose(st.weights, prior.weights, atol=1e-15)


def test_constant_birkhoff_loss_gives_prior(small_markov):
    prior = uniform_prior(small_markov)
    y = sample_orbit(small_markov.measures[0], 80, SeededStream(SEED_BASE))
    st = posterior_exploss(prior, small_markov, constant_loss(small_markov, 0.7), y)
    np.testing.assert_allclose(st.weights, prior.weights, atol=1e-14)


def test_scaled_psi_limit(atoms):
    prior = PriorMeasure(atoms.nodes, np.array([0.25, 0.75]))
    g = np.array([2.0, 0.5])
    y = np.zeros(1000, dtype=np.int64)
    st = posterior_psi(prior, atoms, ScaledPsi(g), y)
    expect = g * prior.weights / (g * prior.weights).sum()
    np.testing.assert_allclose(st.weights, expect, atol=1e-14)


def test_constant_psi_gives_prior(atoms):
    prior = PriorMeasure(atoms.nodes, np.array([0.4, 0.6]))
    st = posterior_psi(prior, atoms, ConstantPsi(3.0), np.zeros(10, dtype=np.int64))
    np.testing.assert_allclose(st.weights, prior.weights, atol=1e-15)


def test_nonpositive_psi_rejected(atoms):
    with pytest.raises(InputError):
        posterior_psi(uniform_prior(atoms), atoms, ScaledPsi([1.0, -1.0]), np.zeros(5, dtype=np.int64))


def test_ball_mass(small_markov):
    y = sample_orbit(small_markov.measures[12], 400, SeededStream(SEED_BASE))
    st = posterior_direct(uniform_prior(small_markov), small_markov, y)
    assert abs(mass_of_ball(st, [0.5, 0.5], 10.0) - 1.0) < 1e-12
    assert mass_of_ball(st, [0.5, 0.5], 0.05) == pytest.approx(st.mass_at([0.5, 0.5]), abs=1e-15)
    inside = st.mass_of_ball([0.5, 0.5], 0.15)
    assert abs(np.exp(st.log_mass_outside_ball([0.5, 0.5], 0.15)) - (1 - inside)) < 1e-12


def test_argmax_tie_break(atoms):
    st = posterior_psi(uniform_prior(atoms), atoms, ConstantPsi(1.0), np.zeros(3, dtype=np.int64))
    assert st.argmax().tolist() == [-1.0]


def test_series_matches_single_states(atoms):
    y = sample_orbit(bernoulli_measure(2, [0.3, 0.7]), 500, SeededStream(SEED_BASE))
    prior = uniform_prior(atoms)
    n_list = [100, 250, 500]
    ser = posterior_series(prior, direct_loglik(atoms, y, n_list), n_list)
    for st, n in zip(ser, n_list):
        np.testing.assert_allclose(st.log_weights, posterior_direct(prior, atoms, y[:n]).log_weights, atol=1e-12)


def test_biased_sampling_picks_closer_atom(atoms):
    y = sample_orbit(bernoulli_measure(2, [0.3, 0.7]), 2000, SeededStream(SEED_BASE))
    st = posterior_direct(uniform_prior(atoms), atoms, y)
    assert st.mass_at([-1]) > 0.999


def test_gamma_estimates(small_markov):
    y = sample_orbit(small_markov.measures[0], 400, SeededStream(SEED_BASE))
    g0 = gamma_estimate(small_markov, ZeroLoss(), small_markov.nodes[4], y, [100, 200, 400])
    assert g0.slope == 0.0 and g0.last == 0.0
    gc = gamma_estimate(small_markov, constant_loss(small_markov, -0.8), small_markov.nodes[4], y, [100, 200, 400])
    assert abs(gc.slope + 0.8) < 1e-12 and abs(gc.last + 0.8) < 1e-12


def test_birkhoff_loss_of_own_jacobian_is_log_of_tilted_pressure(small_markov):
    # log int exp(S_n log J) dmu grows like P(2 log J)
    from gibbspost.thermo import pressure

    i = 6
    u = small_markov.measures[i].jacobian
    loss = BirkhoffLoss([m.jacobian for m in small_markov.measures])
    y = np.zeros(2000, dtype=np.int64)
    g = gamma_estimate(small_markov, loss, small_markov.nodes[i], y, [1000, 1500, 2000])
    assert abs(g.slope - pressure(u * 2.0)) < 1e-9
