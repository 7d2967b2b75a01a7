"""Parameter grids, priors and Gibbs-posterior updates.

Posterior weights are kept in log space throughout: at ``n = 10**4`` the
cylinder likelihoods are far below the smallest positive double.

Three update schemes are provided:

* :func:`posterior_direct` - likelihood ``mu_theta([y_1 .. y_n])``;
* :func:`posterior_exploss` - likelihood ``int exp(phi_n(theta, x, y)) dmu_theta(x)``;
* :func:`posterior_psi` - likelihood ``psi_n(theta, y) > 0``.
"""
from __future__ import annotations

import itertools
import warnings
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np
from scipy.special import logsumexp

from .errors import DegeneratePosteriorError, InputError
from .sampling import SeededStream
from .shift import SubshiftSpec, as_word
from .thermo import GibbsMeasure, Potential, gibbs_measure, prefix_log_measures

__all__ = [
    "Grid",
    "midpoint_grid",
    "ParamFamily",
    "PriorMeasure",
    "uniform_prior",
    "density_prior",
    "PosteriorState",
    "posterior_from_loglik",
    "posterior_series",
    "posterior_direct",
    "direct_loglik",
    "posterior_exploss",
    "posterior_psi",
    "mass_of_ball",
    "GammaEstimate",
    "gamma_estimate",
    "MC_REL_SE_LIMIT",
]

BALL_TOL = 1e-12
MC_REL_SE_LIMIT = 0.1


# grids and families ----------------------------------------------------


@dataclass(frozen=True)
class Grid:
    """Tensor midpoint grid on a box; nodes are cell centres in lexicographic order."""

    lows: tuple[float, ...]
    highs: tuple[float, ...]
    resolution: tuple[int, ...]

    def __post_init__(self):
        if not (len(self.lows) == len(self.highs) == len(self.resolution)):
            raise InputError("grid bounds and resolution must have equal length")
        for lo, hi, r in zip(self.lows, self.highs, self.resolution):
            if not hi > lo:
                raise InputError(f"empty grid axis [{lo}, {hi}]")
            if r < 1:
                raise InputError("grid resolution must be >= 1")

    @property
    def spacing(self) -> np.ndarray:
        return (np.array(self.highs) - np.array(self.lows)) / np.array(self.resolution)

    @property
    def cell_volume(self) -> float:
        return float(np.prod(self.spacing))

    def axes(self) -> list[np.ndarray]:
        return [
            lo + (np.arange(r) + 0.5) * h
            for lo, r, h in zip(self.lows, self.resolution, self.spacing)
        ]

    @property
    def nodes(self) -> np.ndarray:
        return np.array(list(itertools.product(*self.axes())), dtype=float)


def midpoint_grid(bounds: Sequence[tuple[float, float]], resolution: Sequence[int] | int) -> Grid:
    if isinstance(resolution, int):
        resolution = (resolution,) * len(bounds)
    return Grid(
        tuple(float(b[0]) for b in bounds),
        tuple(float(b[1]) for b in bounds),
        tuple(int(r) for r in resolution),
    )


class ParamFamily:
    """Finite set of parameter nodes, each carrying a Gibbs measure.

    Parameters
    ----------
    nodes : array (N, dim)
        Parameter points in lexicographic order.
    measures : sequence of GibbsMeasure
        ``measures[i]`` is ``mu_theta`` for ``nodes[i]``.
    check_injective : bool
        Require distinct normalized Jacobians at distinct nodes.
    """

    def __init__(
        self,
        nodes,
        measures: Sequence[GibbsMeasure],
        *,
        grid: Grid | None = None,
        check_injective: bool = True,
        name: str = "",
    ):
        nodes = np.asarray(nodes, dtype=float)
        if nodes.ndim == 1:
            nodes = nodes.reshape(-1, 1)
        if nodes.shape[0] != len(measures) or nodes.shape[0] == 0:
            raise InputError("need one measure per node and at least one node")
        specs = {m.spec for m in measures}
        if len(specs) != 1:
            raise InputError("all family members must live on one subshift")
        self.nodes = nodes
        self.nodes.setflags(write=False)
        self.measures = tuple(measures)
        self.grid = grid
        self.name = name
        self.spec: SubshiftSpec = measures[0].spec
        self.injective_gap = self._min_jacobian_gap()
        if check_injective and len(measures) > 1 and not self.injective_gap > 0:
            raise InputError("two nodes share the same normalized Jacobian")

    @classmethod
    def from_potentials(cls, nodes, potential_map: Callable[[np.ndarray], Potential], **kw):
        nodes = np.asarray(nodes, dtype=float).reshape(len(nodes), -1)
        return cls(nodes, [gibbs_measure(potential_map(t)) for t in nodes], **kw)

    @classmethod
    def from_measures(cls, nodes, measure_map: Callable[[np.ndarray], GibbsMeasure], **kw):
        nodes = np.asarray(nodes, dtype=float).reshape(len(nodes), -1)
        return cls(nodes, [measure_map(t) for t in nodes], **kw)

    def __len__(self) -> int:
        return self.nodes.shape[0]

    @property
    def depth(self) -> int:
        return max(m.order for m in self.measures)

    def jacobian_table(self) -> np.ndarray:
        """``log J_theta`` on the admissible words of the common order, one row per node."""
        from .shift import admissible_words, window_codes

        d = self.depth
        words = admissible_words(self.spec, d)
        codes = window_codes(words, d, self.spec.alphabet_size)[:, 0]
        rows = []
        for m in self.measures:
            if m.order == d:
                rows.append(m.log_jacobian_table[codes])
            else:
                rows.append(m.jacobian.extend(d).dense(fill=-np.inf)[codes])
        return np.array(rows)

    def _min_jacobian_gap(self) -> float:
        if len(self) < 2:
            return np.inf
        t = self.jacobian_table()
        gap = np.inf
        for i in range(len(self) - 1):
            with np.errstate(invalid="ignore"):
                d = np.abs(t[i + 1 :] - t[i])
            d[t[i + 1 :] == t[i]] = 0.0
            gap = min(gap, float(np.nanmax(d, axis=1).min()))
        return gap

    def index_of(self, theta, atol: float = 1e-9) -> int:
        theta = np.asarray(theta, dtype=float).reshape(-1)
        dist = np.abs(self.nodes - theta).max(axis=1)
        i = int(np.argmin(dist))
        if dist[i] > atol:
            raise InputError(f"{list(theta)} is not a node of the family")
        return i


@dataclass(frozen=True, eq=False)
class PriorMeasure:
    """Positive atom weights on the family nodes."""

    nodes: np.ndarray
    weights: np.ndarray

    def __post_init__(self):
        nodes = np.asarray(self.nodes, dtype=float)
        if nodes.ndim == 1:
            nodes = nodes.reshape(-1, 1)
        w = np.asarray(self.weights, dtype=float).reshape(-1)
        if w.size != nodes.shape[0]:
            raise InputError("one prior weight per node is required")
        if not (w > 0).all():
            raise InputError("prior weights must be strictly positive")
        if abs(w.sum() - 1.0) > 1e-12:
            raise InputError(f"prior weights sum to {w.sum()!r}, not 1")
        object.__setattr__(self, "nodes", nodes)
        object.__setattr__(self, "weights", w)

    @property
    def log_weights(self) -> np.ndarray:
        return np.log(self.weights)


def uniform_prior(fam: ParamFamily) -> PriorMeasure:
    n = len(fam)
    return PriorMeasure(fam.nodes, np.full(n, 1.0 / n))


def density_prior(fam: ParamFamily, density: Callable[[np.ndarray], float]) -> PriorMeasure:
    """Midpoint quadrature of a positive density: ``w_i ~ density(node_i) * cell volume``."""
    vol = fam.grid.cell_volume if fam.grid is not None else 1.0
    w = np.array([float(density(t)) for t in fam.nodes]) * vol
    if not (w > 0).all():
        raise InputError("prior density must be strictly positive at every node")
    return PriorMeasure(fam.nodes, w / w.sum())


# posterior states ----------------------------------------------------------


@dataclass(frozen=True, eq=False)
class PosteriorState:
    """Normalized log posterior weights at one sample size ``n``.

    ``log_evidence`` is ``log Z_n(y)``, the log normalizer before
    normalization. ``flags`` carries warnings such as high Monte Carlo
    variance; ``std_err`` holds per-node standard errors of the log
    likelihood when it was estimated.
    """

    nodes: np.ndarray
    log_weights: np.ndarray
    n: int
    sample_id: int
    log_evidence: float
    flags: tuple[str, ...] = ()
    std_err: np.ndarray | None = field(default=None, repr=False)

    @property
    def weights(self) -> np.ndarray:
        return np.exp(self.log_weights)

    def total_log_mass(self) -> float:
        return float(logsumexp(self.log_weights))

    def mass_of_ball(self, center, delta: float) -> float:
        return mass_of_ball(self, center, delta)

    def log_mass_outside_ball(self, center, delta: float) -> float:
        """``log(1 - mass_of_ball)`` computed without cancellation."""
        if not delta > 0:
            raise InputError("delta must be positive")
        center = np.asarray(center, dtype=float).reshape(-1)
        outside = np.abs(self.nodes - center).max(axis=1) >= delta - BALL_TOL
        if not outside.any():
            return -np.inf
        return float(logsumexp(self.log_weights[outside]))

    def mass_at(self, theta) -> float:
        theta = np.asarray(theta, dtype=float).reshape(-1)
        hit = np.abs(self.nodes - theta).max(axis=1) <= 1e-9
        return float(self.weights[hit].sum())

    def argmax(self) -> np.ndarray:
        """Node of largest weight; ties go to the lexicographically smallest node."""
        lw = self.log_weights
        best = np.flatnonzero(lw == lw.max())
        order = np.lexsort(self.nodes[best].T[::-1])
        return self.nodes[best[order[0]]].copy()


def posterior_from_loglik(
    prior: PriorMeasure,
    loglik: np.ndarray,
    n: int,
    sample_id: int = 0,
    flags: Sequence[str] = (),
    std_err: np.ndarray | None = None,
) -> PosteriorState:
    """Combine prior and per-node log likelihoods into a normalized state."""
    loglik = np.asarray(loglik, dtype=float)
    if loglik.shape != prior.weights.shape:
        raise InputError("one log likelihood per node is required")
    if np.isnan(loglik).any() or (loglik == np.inf).any():
        raise InputError("log likelihoods must be finite or -inf")
    unnorm = prior.log_weights + loglik
    if np.isneginf(unnorm).all():
        raise DegeneratePosteriorError(f"every node has zero likelihood at n={n}")
    z = float(logsumexp(unnorm))
    return PosteriorState(prior.nodes, unnorm - z, int(n), int(sample_id), z, tuple(flags), std_err)


def posterior_series(
    prior: PriorMeasure,
    loglik: np.ndarray,
    n_list: Sequence[int],
    sample_id: int = 0,
    flags: Sequence[str] = (),
    std_err: np.ndarray | None = None,
) -> list[PosteriorState]:
    """One state per column of the ``(nodes, len(n_list))`` log-likelihood matrix."""
    loglik = np.asarray(loglik, dtype=float)
    out = []
    for j, n in enumerate(n_list):
        se = None if std_err is None else std_err[:, j]
        out.append(posterior_from_loglik(prior, loglik[:, j], n, sample_id, flags, se))
    return out


def _check_nodes(prior: PriorMeasure, fam: ParamFamily) -> None:
    if prior.nodes.shape != fam.nodes.shape or not np.allclose(prior.nodes, fam.nodes):
        raise InputError("prior and family must share the same nodes")


def direct_loglik(fam: ParamFamily, y, n_list: Sequence[int] | None = None) -> np.ndarray:
    """``log mu_theta([y_1 .. y_n])`` for every node and every ``n`` in ``n_list``."""
    y = as_word(y, fam.spec)
    if n_list is None:
        n_list = [y.size]
    n_arr = np.asarray(n_list, dtype=np.int64)
    if n_arr.size and (n_arr.max() > y.size or n_arr.min() < 0):
        raise InputError("n schedule exceeds the observed word")
    out = np.empty((len(fam), n_arr.size))
    for i, m in enumerate(fam.measures):
        k = m.jacobian.depth
        if n_arr.size and n_arr.min() < k - 1:
            raise InputError(f"n must be >= depth-1 = {k - 1}")
        if y.size == 0:
            out[i] = 0.0
            continue
        traj = np.concatenate([[0.0], prefix_log_measures(m, y)])
        out[i] = traj[n_arr]
    return out


def posterior_direct(
    prior: PriorMeasure, fam: ParamFamily, y, sample_id: int = 0
) -> PosteriorState:
    """Posterior with likelihood ``mu_theta(C_n(y))``, ``n = len(y)``."""
    _check_nodes(prior, fam)
    y = as_word(y, fam.spec)
    ll = direct_loglik(fam, y)[:, 0]
    return posterior_from_loglik(prior, ll, y.size, sample_id)


def posterior_exploss(
    prior: PriorMeasure,
    fam: ParamFamily,
    loss,
    y,
    stream: SeededStream | None = None,
    sample_id: int = 0,
) -> PosteriorState:
    """Posterior with likelihood ``int exp(phi_n(theta, x, y)) dmu_theta(x)``.

    ``loss`` is a loss specification from :mod:`gibbspost.losses`; the inner
    integral is exact when the loss allows it and Monte Carlo otherwise.
    """
    _check_nodes(prior, fam)
    y = as_word(y, fam.spec)
    est = loss.log_integrals(fam, y, [y.size], stream or SeededStream(0))
    flags = _variance_flags(est.std_err)
    return posterior_from_loglik(prior, est.values[:, 0], y.size, sample_id, flags, est.std_err[:, 0])


def posterior_psi(
    prior: PriorMeasure,
    fam: ParamFamily,
    psi,
    y,
    stream: SeededStream | None = None,
    sample_id: int = 0,
) -> PosteriorState:
    """Posterior with likelihood ``psi_n(theta, y)``; ``psi`` must be positive."""
    _check_nodes(prior, fam)
    y = as_word(y, fam.spec)
    est = psi.values(fam, y, [y.size], stream or SeededStream(0))
    vals = est.values[:, 0]
    if not (vals > 0).all():
        bad = np.flatnonzero(~(vals > 0))
        raise InputError(f"psi_n must be positive; nonpositive at nodes {bad.tolist()}")
    se = est.std_err[:, 0] / vals
    flags = _variance_flags(se.reshape(-1, 1))
    return posterior_from_loglik(prior, np.log(vals), y.size, sample_id, flags, se)


def _variance_flags(std_err: np.ndarray) -> tuple[str, ...]:
    if std_err is not None and np.nanmax(std_err, initial=0.0) > MC_REL_SE_LIMIT:
        warnings.warn("Monte Carlo standard error above limit", RuntimeWarning, stacklevel=3)
        return ("mc_variance",)
    return ()


def mass_of_ball(st: PosteriorState, center, delta: float) -> float:
    """Posterior mass of ``{theta : |theta - center|_inf < delta}``."""
    if not delta > 0:
        raise InputError("delta must be positive")
    center = np.asarray(center, dtype=float).reshape(-1)
    dist = np.abs(st.nodes - center).max(axis=1)
    inside = dist < delta - BALL_TOL
    if not inside.any():
        return 0.0
    return float(np.exp(logsumexp(st.log_weights[inside])))


@dataclass(frozen=True)
class GammaEstimate:
    """Growth rate of ``log int exp(phi_n) dmu_theta``.

    ``slope`` is the least-squares slope against ``n``; ``last`` is the
    value at the largest ``n`` divided by that ``n``.
    """

    slope: float
    intercept: float
    last: float
    flags: tuple[str, ...] = ()


def gamma_estimate(
    fam: ParamFamily, loss, theta, y, n_list: Sequence[int], stream: SeededStream | None = None
) -> GammaEstimate:
    n_arr = np.asarray(n_list, dtype=np.int64)
    if n_arr.size == 0 or (np.diff(n_arr) <= 0).any():
        raise InputError("n_list must be nonempty and strictly increasing")
    y = as_word(y, fam.spec)
    if n_arr.max() > y.size:
        raise InputError("n_list exceeds the observed word")
    i = fam.index_of(theta)
    est = loss.log_integrals(fam, y, n_arr.tolist(), stream or SeededStream(0), nodes=[i])
    vals = est.values[0]
    flags = _variance_flags(est.std_err)
    last = float(vals[-1] / n_arr[-1])
    if n_arr.size == 1:
        return GammaEstimate(last, 0.0, last, flags)
    slope, intercept = np.polyfit(n_arr.astype(float), vals, 1)
    return GammaEstimate(float(slope), float(intercept), last, flags)
