"""Ready-made parameter families used by the bundled experiments.

* two-state Markov chains ``M(a, b) = [[a, 1 - b], [1 - a, b]]``
  (column-stochastic: column ``s`` is the law of the successor of ``s``);
* finite sets of Bernoulli measures;
* mixtures of two normalized Jacobians ``log(t J_1 + (1 - t) J_0)``;
* the rotated-hyperbolic cocycle with a Bernoulli measure per node.
"""
from __future__ import annotations

from typing import Sequence

import numpy as np

from .cocycle import CocycleSpec
from .errors import InputError
from .posterior import Grid, ParamFamily
from .shift import SubshiftSpec
from .thermo import GibbsMeasure, Potential, bernoulli_measure, gibbs_measure, markov_measure

__all__ = [
    "markov_matrix",
    "markov_2x2_family",
    "bernoulli_atoms_family",
    "jacobian_mixture_family",
    "cocycle_family",
]


def markov_matrix(a: float, b: float) -> np.ndarray:
    return np.array([[a, 1.0 - b], [1.0 - a, b]])


def markov_2x2_family(grid: Grid) -> ParamFamily:
    """Stationary two-state chains over a grid in ``(0, 1)**2``."""
    if len(grid.lows) != 2 or min(grid.lows) <= 0 or max(grid.highs) >= 1:
        raise InputError("Markov grid must be a box strictly inside (0, 1)^2")
    return ParamFamily.from_measures(
        grid.nodes, lambda t: markov_measure(markov_matrix(t[0], t[1])), grid=grid, name="markov_2x2"
    )


def bernoulli_atoms_family(labels: Sequence[float], probs: Sequence[Sequence[float]]) -> ParamFamily:
    """One Bernoulli measure per atom; ``labels`` are the parameter values."""
    if len(labels) != len(probs):
        raise InputError("one probability vector per atom is required")
    order = np.argsort(np.asarray(labels, dtype=float), kind="stable")
    nodes = np.asarray(labels, dtype=float)[order].reshape(-1, 1)
    q = len(probs[0])
    measures = [bernoulli_measure(q, probs[i]) for i in order]
    return ParamFamily(nodes, measures, name="bernoulli_atoms")


def jacobian_mixture_family(grid: Grid, j0: GibbsMeasure, j1: GibbsMeasure) -> ParamFamily:
    """``f_t = log(t J_1 + (1 - t) J_0)`` for ``t`` on a grid inside ``[0, 1]``.

    A convex combination of normalized Jacobians is normalized, so each
    ``f_t`` is its own Jacobian.
    """
    if len(grid.lows) != 1 or grid.lows[0] < 0 or grid.highs[0] > 1:
        raise InputError("mixture grid must be one axis inside [0, 1]")
    if j0.spec != j1.spec:
        raise InputError("mixture endpoints must share a subshift")
    d = max(j0.jacobian.depth, j1.jacobian.depth)
    e0 = np.exp(j0.jacobian.extend(d).values)
    e1 = np.exp(j1.jacobian.extend(d).values)

    def measure(t):
        return gibbs_measure(Potential(j0.spec, d, np.log(t[0] * e1 + (1.0 - t[0]) * e0)))

    return ParamFamily.from_measures(grid.nodes, measure, grid=grid, name="jacobian_mixture")


def cocycle_family(grid: Grid, bias: float = 0.0) -> tuple[ParamFamily, list[CocycleSpec]]:
    """Angles ``theta = (theta_1, theta_2)`` with ``mu_theta`` Bernoulli.

    ``mu_theta[0] = 1/2 + bias (theta_1 - theta_2)``; with ``bias = 0`` every
    node carries the uniform Bernoulli measure, so measures are not
    distinct and the injectivity check is skipped.
    """
    if len(grid.lows) != 2:
        raise InputError("cocycle grid must have two axes")
    spec = SubshiftSpec.full_shift(2)
    nodes = grid.nodes

    def measure(t):
        p = 0.5 + bias * (t[0] - t[1])
        if not 0 < p < 1:
            raise InputError("bias pushes a Bernoulli weight outside (0, 1)")
        return bernoulli_measure(spec, [p, 1.0 - p])

    fam = ParamFamily.from_measures(nodes, measure, grid=grid, check_injective=False, name="cocycle")
    return fam, [CocycleSpec(tuple(t)) for t in nodes]
