import numpy as np
import pytest

from gibbspost import FitError, InputError, ParamFamily, bernoulli_measure, markov_measure, midpoint_grid
from gibbspost.deviations import (
    empirical_decay,
    ldp_rate_bound,
    posterior_decay_rates,
    rate_bound_direct,
)
from gibbspost.families import bernoulli_atoms_family, markov_2x2_family, markov_matrix
from gibbspost.nonadditive import birkhoff_family, relative_entropy_family
from gibbspost.posterior import uniform_prior
from gibbspost.sampling import SeededStream
from gibbspost.thermo import Potential, relative_entropy

from conftest import SEED_BASE, stationary


def _markov_kl(P, Q):
    pi = stationary(P)
    return sum(pi[s] * P[t, s] * np.log(P[t, s] / Q[t, s]) for s in range(2) for t in range(2))


@pytest.fixture(scope="module")
def markov21():
    return markov_2x2_family(midpoint_grid([(0.2, 0.8), (0.2, 0.8)], 21))


def test_rho_delta_against_closed_form_grid_search(markov21):
    rep = rate_bound_direct(markov21, [0.5, 0.5], uniform_prior(markov21), 0.15)
    P0 = markov_matrix(0.5, 0.5)
    dist = np.abs(markov21.nodes - 0.5).max(axis=1)
    kl = [_markov_kl(P0, markov_matrix(a, b)) for a, b in markov21.nodes]
    outside = dist >= 0.15 - 1e-12
    assert rep.rho_delta < 0
    assert abs(rep.rho_delta + min(np.array(kl)[outside])) < 1e-12
    assert abs(rep.ball_mass - (~outside).mean()) < 1e-15
    assert rep.entropy0 == pytest.approx(np.log(2))


def test_rho_delta_monotone_on_ladder(markov21):
    prior = uniform_prior(markov21)
    ladder = [0.05, 0.1, 0.15, 0.2, 0.25]
    rho = [rate_bound_direct(markov21, [0.5, 0.5], prior, d).rho_delta for d in ladder]
    # shrinking the ball enlarges the set the minimum runs over
    assert all(b <= a for a, b in zip(rho, rho[1:]))


def test_rho_delta_when_ball_is_the_center_only(markov21):
    # strict inequality: at delta = spacing the neighbours sit on the boundary and are excluded
    spacing = 0.6 / 21
    rep = rate_bound_direct(markov21, [0.5, 0.5], uniform_prior(markov21), spacing)
    assert rep.ball_mass == pytest.approx(1 / 441)
    kl = sorted(relative_entropy(markov21.measures[markov21.index_of([0.5, 0.5])], m) for m in markov21.measures)
    assert kl[0] == 0.0
    assert abs(rep.rho_delta + kl[1]) < 1e-15


def test_degenerate_family_flagged():
    m = bernoulli_measure(2, [0.5, 0.5])
    fam = ParamFamily(np.array([[0.0], [1.0], [2.0]]), [m, m, m], check_injective=False)
    rep = rate_bound_direct(fam, [0.0], uniform_prior(fam), 0.5)
    assert rep.rho_delta == 0.0 and rep.degenerate


def test_ball_must_split_nodes(markov21):
    prior = uniform_prior(markov21)
    with pytest.raises(InputError):
        rate_bound_direct(markov21, [0.5, 0.5], prior, 5.0)
    with pytest.raises(InputError):
        rate_bound_direct(markov21, [0.5, 0.5], prior, 0.0)


def test_empirical_decay_exact_lines():
    n = np.arange(10, 200, 10)
    fit = empirical_decay(list(zip(n, np.exp(-0.5 * n))), "log_of_value")
    assert abs(fit.slope + 0.5) < 1e-9 and fit.r2 > 1 - 1e-12
    fit = empirical_decay(list(zip(n, 1 - np.exp(-0.3 * n / 10))), "log_of_one_minus_value")
    assert abs(fit.slope + 0.03) < 1e-9
    fit = empirical_decay(list(zip(n, -0.2 * n + 1.0)), "log_given")
    assert abs(fit.slope + 0.2) < 1e-12 and fit.n_min == 40


def test_empirical_decay_needs_points():
    with pytest.raises(FitError):
        empirical_decay([(1, 0.5), (2, 0.25), (3, 0.125)])
    with pytest.raises(InputError):
        empirical_decay([(1, 0.5)], transform="square")


def test_unconstrained_variational_bound_is_zero():
    mu = markov_measure(markov_matrix(0.7, 0.4))
    b = ldp_rate_bound(birkhoff_family(mu.jacobian), mu.jacobian, -np.inf, 2, SeededStream(SEED_BASE))
    assert abs(b.value) < 1e-7
    assert relative_entropy(b.eta, mu) < 1e-7


def test_constraint_away_from_equilibrium_is_negative(full2):
    mu = bernoulli_measure(2, [0.5, 0.5])
    u = Potential(full2, 1, [0.0, 1.0])  # integral = frequency of symbol 1
    b = ldp_rate_bound(birkhoff_family(u), mu.jacobian, 0.7, 1, SeededStream(SEED_BASE))
    # Bernoulli rate at 0.7: -(0.7 log 1.4 + 0.3 log 0.6)
    assert b.feasible and b.value < 0
    assert abs(b.value + (0.7 * np.log(1.4) + 0.3 * np.log(0.6))) < 1e-6


def test_infeasible_constraint_returns_sentinel(full2):
    mu = bernoulli_measure(2, [0.5, 0.5])
    u = Potential(full2, 1, [0.0, 1.0])
    b = ldp_rate_bound(birkhoff_family(u), mu.jacobian, 1.5, 1, SeededStream(SEED_BASE), restarts=4)
    assert b.value == -np.inf and not b.feasible and b.eta is None


def test_ldp_bound_matches_direct_rate_on_bernoulli_atoms():
    p = [0.3, 0.4, 0.5, 0.6, 0.7]
    fam = bernoulli_atoms_family(p, [[x, 1 - x] for x in p])
    rep = rate_bound_direct(fam, [0.5], uniform_prior(fam), 0.15)
    j = fam.index_of(rep.argmin_outside)
    mu0 = fam.measures[fam.index_of([0.5])]
    f = relative_entropy_family([fam.measures[j]], [1.0], mu0)
    c = relative_entropy(mu0, fam.measures[j])
    b = ldp_rate_bound(f, fam.measures[j].jacobian, c, 1, SeededStream(SEED_BASE))
    assert abs(b.value - rep.rho_delta) <= 0.05 * abs(rep.rho_delta)


def test_decay_rate_of_far_atom_closed_form():
    fam = bernoulli_atoms_family([-1, 1], [[1 / 3, 2 / 3], [2 / 3, 1 / 3]])
    rates = posterior_decay_rates(fam, bernoulli_measure(2, [0.3, 0.7]))
    assert rates[0] == 0.0
    assert abs(rates[1] + 0.4 * np.log(2)) < 1e-13
