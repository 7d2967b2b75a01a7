"""Loss and psi specifications for the exponential-loss posteriors.

A *loss* supplies ``log int exp(phi_n(theta, x, y)) dmu_theta(x)`` per node.
A *psi* supplies a positive ``psi_n(theta, y)`` per node. Both return an
:class:`Estimate` over a schedule of ``n`` values so a whole posterior
trajectory costs one pass over the data.
"""
from __future__ import annotations

from typing import Callable, NamedTuple, Sequence

import numpy as np

from .cocycle import CocycleSpec, annealed_moments, log_norms
from .errors import InputError
from .sampling import SeededStream
from .shift import admissible_words, as_word, window_codes
from .thermo import GibbsMeasure, Potential, word_log_measures

__all__ = [
    "Estimate",
    "tilted_log_integrals",
    "ZeroLoss",
    "BirkhoffLoss",
    "constant_loss",
    "cross_entropy_loss",
    "CocycleNormLoss",
    "ScaledPsi",
    "BirkhoffPsi",
    "ConstantPsi",
    "CocycleLogNormPsi",
]


class Estimate(NamedTuple):
    """``values[i, j]`` for node ``i`` and ``n_list[j]``, with standard errors."""

    values: np.ndarray
    std_err: np.ndarray


def _node_list(fam, nodes) -> list[int]:
    return list(range(len(fam))) if nodes is None else [int(i) for i in nodes]


def _check_schedule(n_list, y) -> np.ndarray:
    n_arr = np.asarray(n_list, dtype=np.int64)
    if n_arr.size == 0 or (np.diff(n_arr) <= 0).any() or n_arr[0] < 0:
        raise InputError("n schedule must be nonempty, nonnegative and strictly increasing")
    if y is not None and n_arr[-1] > len(y):
        raise InputError("n schedule exceeds the observed word")
    return n_arr


def _codes(words: np.ndarray, q: int) -> np.ndarray:
    if words.shape[1] == 0:
        return np.zeros(words.shape[0], dtype=np.int64)
    return window_codes(words, words.shape[1], q)[:, 0]


def tilted_log_integrals(m: GibbsMeasure, u: Potential, n_list: Sequence[int]) -> np.ndarray:
    """``log int exp(S_n u) dm`` for each ``n``, exactly.

    A forward recursion over blocks of the last ``max(d, k) - 1`` symbols
    multiplies the measure's one-step law by ``exp(u)`` on each completed
    window; the vector is rescaled every step and the scale kept in logs.
    """
    if u.spec != m.spec:
        raise InputError("potential and measure live on different subshifts")
    n_arr = _check_schedule(n_list, None)
    spec = m.spec
    q = spec.alphabet_size
    D = u.depth
    E = max(m.order, D)
    r = E - 1
    out = np.empty(n_arr.size)
    u_dense = u.dense()
    # lengths too short for the recursion: enumerate words of length n + D - 1
    short = n_arr + D - 1 < r
    for j in np.flatnonzero(short):
        n = int(n_arr[j])
        if n == 0:
            out[j] = 0.0
            continue
        w = admissible_words(spec, n + D - 1)
        s = u_dense[window_codes(w, D, q)].sum(axis=1)
        out[j] = float(np.logaddexp.reduce(word_log_measures(m, w) + s))
    for j in np.flatnonzero(n_arr == 0):
        out[j] = 0.0
    if (~short & (n_arr > 0)).any():
        states = admissible_words(spec, r)
        R = states.shape[0]
        scode = _codes(states, q)
        idx = np.full(q**r, -1, dtype=np.int64)
        idx[scode] = np.arange(R)
        log_v = word_log_measures(m, states)
        if r >= D:
            log_v = log_v + u_dense[window_codes(states, D, q)].sum(axis=1)
        done = max(0, r - D + 1)
        probs, _ = m.forward_kernel()
        d = m.order
        midx = np.full(q ** (d - 1), -1, dtype=np.int64)
        midx[_codes(m.states, q)] = np.arange(m.states.shape[0])
        T = np.zeros((R, R))
        for a in range(q):
            full = scode * q + a
            ok = spec.matrix[states[:, -1], a] > 0
            ms = midx[(full // q) % (q ** (d - 1))]
            p = probs[ms, a]
            uw = u_dense[full % (q**D)]
            nxt = idx[full % (q**r)]
            rows = np.flatnonzero(ok & (p > 0))
            T[rows, nxt[rows]] += p[rows] * np.exp(uw[rows])
        shift = float(np.max(log_v[np.isfinite(log_v)]))
        v = np.exp(log_v - shift)
        acc = shift
        targets = {int(n): j for j, n in enumerate(n_arr) if not short[j] and n > 0}
        k = done
        top = int(n_arr.max())
        while True:
            if k in targets:
                out[targets[k]] = acc + np.log(v.sum())
            if k >= top:
                break
            v = v @ T
            s = v.sum()
            if not s > 0:
                raise InputError("tilted integral vanished; potential/measure supports disagree")
            v /= s
            acc += np.log(s)
            k += 1
    return out


class ZeroLoss:
    """``phi_n = 0``: every likelihood is exactly 1."""

    def log_integrals(self, fam, y, n_list, stream=None, nodes=None) -> Estimate:
        n_arr = _check_schedule(n_list, y)
        shape = (len(_node_list(fam, nodes)), n_arr.size)
        return Estimate(np.zeros(shape), np.zeros(shape))


class BirkhoffLoss:
    """``phi_n = S_n u_theta(x) + c(theta) + g_n(y)``.

    Parameters
    ----------
    potentials : sequence of Potential
        ``u_theta`` per family node.
    theta_term : sequence of float, optional
        ``c(theta)`` per node.
    y_term : callable, optional
        ``g(n, y)``, the same for every node.
    """

    def __init__(self, potentials: Sequence[Potential], theta_term=None, y_term=None):
        self.potentials = list(potentials)
        self.theta_term = None if theta_term is None else np.asarray(theta_term, dtype=float)
        self.y_term = y_term

    def log_integrals(self, fam, y, n_list, stream=None, nodes=None) -> Estimate:
        if len(self.potentials) != len(fam):
            raise InputError("need one potential per family node")
        n_arr = _check_schedule(n_list, y)
        rows = []
        for i in _node_list(fam, nodes):
            u = self.potentials[i]
            if np.all(u.values == u.values[0]):
                # integral of a constant Birkhoff sum against a probability
                row = n_arr * float(u.values[0])
            else:
                row = tilted_log_integrals(fam.measures[i], u, n_arr)
            if self.theta_term is not None:
                row = row + self.theta_term[i]
            if self.y_term is not None:
                row = row + np.array([self.y_term(int(n), y) for n in n_arr])
            rows.append(np.asarray(row, dtype=float))
        vals = np.array(rows)
        return Estimate(vals, np.zeros_like(vals))


def constant_loss(fam, c: float) -> BirkhoffLoss:
    """``phi_n = n c`` for every node."""
    return BirkhoffLoss([Potential.constant(fam.spec, c) for _ in range(len(fam))])


def cross_entropy_loss(fam, theta0) -> BirkhoffLoss:
    """Cross-entropy loss on a one-parameter family with nodes in ``(0, 1)``.

    ``phi_n = S_n log J_theta(x) - S_n log J_theta0(y) - theta log theta + theta log theta0``.
    """
    if fam.nodes.shape[1] != 1:
        raise InputError("cross-entropy loss needs a one-parameter family")
    t = fam.nodes[:, 0]
    t0 = float(np.asarray(theta0, dtype=float).reshape(-1)[0])
    if not (0 < t0 < 1) or (t <= 0).any() or (t >= 1).any():
        raise InputError("cross-entropy loss needs parameters strictly inside (0, 1)")
    i0 = fam.index_of([t0])
    j0 = fam.measures[i0].jacobian

    def y_term(n, y):
        # theta-independent; windows running past the observed word are dropped
        vals = j0.windows(y[: n + j0.depth - 1])
        return -float(vals[:n].sum())

    return BirkhoffLoss(
        [m.jacobian for m in fam.measures],
        theta_term=-t * np.log(t) + t * np.log(t0),
        y_term=y_term,
    )


class CocycleNormLoss:
    """``phi_n = log ||A_theta^(n)||`` along ``x`` (annealed) or along ``y``.

    ``form="x"`` integrates ``||A_theta^(n)(x)||`` against ``mu_theta``:
    exactly while ``q**n`` is within the enumeration cap, by Monte Carlo with
    ``samples`` orbits otherwise. All nodes draw from the same stream, so
    nodes with equal measures share samples. ``form="y"`` is exact.
    """

    def __init__(self, cocycles: Sequence[CocycleSpec], form: str = "x", samples: int = 1024):
        if form not in ("x", "y"):
            raise InputError("form must be 'x' or 'y'")
        self.cocycles = list(cocycles)
        self.form = form
        self.samples = int(samples)

    def log_integrals(self, fam, y, n_list, stream=None, nodes=None) -> Estimate:
        n_arr = _check_schedule(n_list, y if self.form == "y" else None)
        ids = _node_list(fam, nodes)
        vals = np.empty((len(ids), n_arr.size))
        se = np.zeros_like(vals)
        pos = n_arr > 0
        for r, i in enumerate(ids):
            vals[r, ~pos] = 0.0
            if not pos.any():
                continue
            if self.form == "y":
                yy = as_word(y)[: int(n_arr.max())]
                vals[r, pos] = log_norms(self.cocycles[i], yy.reshape(1, -1), n_arr[pos])[0]
            else:
                ser = annealed_moments(
                    self.cocycles[i], fam.measures[i], n_arr[pos], stream or SeededStream(0), self.samples
                )
                vals[r, pos] = ser.log_mean_norm
                se[r, pos] = ser.log_mean_norm_se
        return Estimate(vals, se)


# psi specifications ----------------------------------------------------------


def bounded_noise(bound: float) -> Callable[[int, np.ndarray, np.ndarray], float]:
    """Deterministic perturbation with ``|noise| <= bound``."""

    def noise(n, theta, y):
        s = float(np.sum(y[:n])) if n else 0.0
        return bound * np.sin(1.3 * n + 2.1 * float(np.sum(theta)) + 0.01 * s)

    return noise


class ScaledPsi:
    """``psi_n(theta, y) = n g(theta) + noise(n, theta, y)`` with bounded noise."""

    def __init__(self, g: Sequence[float], noise_bound: float = 0.0, noise=None):
        self.g = np.asarray(g, dtype=float)
        self.noise_bound = float(noise_bound)
        self.noise = noise if noise is not None else (bounded_noise(noise_bound) if noise_bound else None)

    def values(self, fam, y, n_list, stream=None, nodes=None) -> Estimate:
        if self.g.size != len(fam):
            raise InputError("need one g value per family node")
        n_arr = _check_schedule(n_list, y)
        ids = _node_list(fam, nodes)
        vals = n_arr[None, :] * self.g[ids][:, None]
        if self.noise is not None:
            y = as_word(y)
            vals = vals + np.array(
                [[self.noise(int(n), fam.nodes[i], y) for n in n_arr] for i in ids]
            )
        return Estimate(vals.astype(float), np.zeros(vals.shape))


class BirkhoffPsi:
    """``psi_n(theta, y) = S_n u_theta(y)``."""

    def __init__(self, potentials: Sequence[Potential]):
        self.potentials = list(potentials)

    def values(self, fam, y, n_list, stream=None, nodes=None) -> Estimate:
        n_arr = _check_schedule(n_list, None)
        y = as_word(y, fam.spec)
        rows = []
        for i in _node_list(fam, nodes):
            u = self.potentials[i]
            w = u.windows(y)
            if n_arr[-1] > w.size:
                raise InputError("observed word too short for the n schedule")
            cum = np.concatenate([[0.0], np.cumsum(w)])
            rows.append(cum[n_arr])
        vals = np.array(rows)
        return Estimate(vals, np.zeros_like(vals))


class ConstantPsi:
    """``psi_n = c`` for every node and ``n``."""

    def __init__(self, c: float):
        if not c > 0:
            raise InputError("constant psi must be positive")
        self.c = float(c)

    def values(self, fam, y, n_list, stream=None, nodes=None) -> Estimate:
        n_arr = _check_schedule(n_list, y)
        shape = (len(_node_list(fam, nodes)), n_arr.size)
        return Estimate(np.full(shape, self.c), np.zeros(shape))


class CocycleLogNormPsi:
    """``psi_n = int log ||A_theta^(n)(x)|| dmu_theta(x)`` (``form="x"``) or
    ``log ||A_theta^(n)(y)||`` (``form="y"``)."""

    def __init__(self, cocycles: Sequence[CocycleSpec], form: str = "x", samples: int = 1024):
        if form not in ("x", "y"):
            raise InputError("form must be 'x' or 'y'")
        self.cocycles = list(cocycles)
        self.form = form
        self.samples = int(samples)

    def values(self, fam, y, n_list, stream=None, nodes=None) -> Estimate:
        n_arr = _check_schedule(n_list, y if self.form == "y" else None)
        ids = _node_list(fam, nodes)
        vals = np.zeros((len(ids), n_arr.size))
        se = np.zeros_like(vals)
        pos = n_arr > 0
        if not pos.any():
            return Estimate(vals, se)
        for r, i in enumerate(ids):
            if self.form == "y":
                yy = as_word(y)[: int(n_arr.max())]
                vals[r, pos] = log_norms(self.cocycles[i], yy.reshape(1, -1), n_arr[pos])[0]
            else:
                ser = annealed_moments(
                    self.cocycles[i], fam.measures[i], n_arr[pos], stream or SeededStream(0), self.samples
                )
                vals[r, pos] = ser.mean_log
                se[r, pos] = ser.mean_log_se
        return Estimate(vals, se)
