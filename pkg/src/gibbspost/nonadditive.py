"""Almost-additive and sub-additive sequences, Fekete limits, free energies.

Limits are never reported as a single number: every estimate carries the
certified bound ``min a_n / n``, a least-squares extrapolation and the
last observed ``a_n / n``.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, NamedTuple, Sequence

import numpy as np

from .errors import InputError, NumericError
from .sampling import SeededStream, sample_orbit, sample_orbits
from .shift import SubshiftSpec, admissible_words, window_codes
from .thermo import GibbsMeasure, Potential, gibbs_measure, word_log_measures

__all__ = [
    "FeketeEstimate",
    "fekete_limit",
    "SequenceFamily",
    "birkhoff_family",
    "log_cylinder_family",
    "relative_entropy_family",
    "power_family",
    "AdditivityReport",
    "check_almost_additive",
    "FreeEnergy",
    "free_energy",
    "PsiStar",
    "psi_star",
    "EXACT_TERM_CAP",
]

EXACT_TERM_CAP = 2_000_000


class FeketeEstimate(NamedTuple):
    """``bound = min a_n/n``, ``extrapolated`` slope of ``a_n`` on the top half, ``last = a_N/N``."""

    bound: float
    extrapolated: float
    last: float


def fekete_limit(values: Sequence[tuple[int, float]], subadditive: bool = False) -> FeketeEstimate:
    """Estimate ``lim a_n / n`` from finitely many terms.

    The extrapolation fits ``a_n = L n + b`` by least squares on the points
    with ``n`` in the upper half of the observed range. For sub-additive
    input the limit is ``inf a_n / n``, so the extrapolation is clipped to
    the certified bound.
    """
    if len(values) == 0:
        raise InputError("fekete_limit needs at least one term")
    n = np.array([float(v[0]) for v in values])
    a = np.array([float(v[1]) for v in values])
    if (n <= 0).any() or (np.diff(n) <= 0).any():
        raise InputError("n must be positive and strictly increasing")
    ratios = a / n
    bound = float(ratios.min())
    last = float(ratios[-1])
    top = n >= 0.5 * (n[0] + n[-1])
    if top.sum() < 2:
        top = np.zeros(n.size, dtype=bool)
        top[-2:] = True
    if n.size == 1:
        ext = last
    else:
        ext = float(np.polyfit(n[top], a[top], 1)[0])
    if subadditive:
        ext = min(ext, bound)
    return FeketeEstimate(bound, ext, last)


@dataclass(frozen=True, eq=False)
class SequenceFamily:
    """A sequence ``(phi_n)`` of functions of a word.

    ``evaluator(n, words)`` maps a 2-D array of words (rows of length at
    least ``n + lookahead``) to the values ``phi_n`` at each row.
    ``constant`` is the declared almost-additivity constant ``C``.
    ``representative`` is a potential ``u`` with ``phi_n - S_n u`` bounded,
    when one is known; it makes free energies exact.
    """

    spec: SubshiftSpec
    evaluator: Callable[[int, np.ndarray], np.ndarray]
    constant: float
    kind: str
    lookahead: int = 0
    representative: Potential | None = None
    name: str = ""

    def __post_init__(self):
        if self.kind not in ("almost_additive", "sub_additive", "additive"):
            raise InputError(f"unknown sequence kind {self.kind!r}")
        if self.constant < 0:
            raise InputError("declared constant must be >= 0")

    def evaluate(self, n: int, words) -> np.ndarray:
        words = np.atleast_2d(np.asarray(words, dtype=np.int64))
        if words.shape[1] < n + self.lookahead:
            raise InputError(f"phi_{n} needs words of length {n + self.lookahead}")
        return np.asarray(self.evaluator(int(n), words), dtype=float)


def birkhoff_family(u: Potential) -> SequenceFamily:
    """``phi_n = S_n u``: additive with ``C = 0``."""
    dense = u.dense()
    q = u.spec.alphabet_size
    k = u.depth

    def ev(n, words):
        if n == 0:
            return np.zeros(words.shape[0])
        return dense[window_codes(words[:, : n + k - 1], k, q)].sum(axis=1)

    return SequenceFamily(u.spec, ev, 0.0, "additive", k - 1, u, "birkhoff")


def log_cylinder_family(m: GibbsMeasure) -> SequenceFamily:
    """``phi_n(y) = log m(C_n(y))``, almost additive with ``C = 3 log K``."""

    def ev(n, words):
        if n == 0:
            return np.zeros(words.shape[0])
        return word_log_measures(m, words[:, :n])

    return SequenceFamily(m.spec, ev, 3.0 * np.log(m.gibbs_constant), "almost_additive", 0, m.jacobian, "log_cylinder")


def relative_entropy_family(
    measures: Sequence[GibbsMeasure], weights: Sequence[float], reference: GibbsMeasure
) -> SequenceFamily:
    """``psi_n(y) = -sum_theta w_theta log(mu_theta(C_n y) / mu_ref(C_n y))``.

    ``measures``/``weights`` describe the restriction of the prior to a set
    of nodes. The additive representative is
    ``u = -sum w_theta (log J_theta - log J_ref)``.
    """
    measures = list(measures)
    w = np.asarray(weights, dtype=float)
    if len(measures) != w.size or len(measures) == 0:
        raise InputError("need one weight per measure")
    u = Potential.constant(reference.spec, 0.0)
    for wt, m in zip(w, measures):
        u = u - wt * (m.jacobian - reference.jacobian)
    c = float(sum(wt * 3.0 * (np.log(m.gibbs_constant) + np.log(reference.gibbs_constant)) for wt, m in zip(w, measures)))

    def ev(n, words):
        if n == 0:
            return np.zeros(words.shape[0])
        ref = word_log_measures(reference, words[:, :n])
        tot = np.zeros(words.shape[0])
        for wt, m in zip(w, measures):
            tot -= wt * (word_log_measures(m, words[:, :n]) - ref)
        return tot

    return SequenceFamily(reference.spec, ev, c, "almost_additive", 0, u, "relative_entropy")


def power_family(spec: SubshiftSpec, power: float = 2.0, constant: float = 0.0) -> SequenceFamily:
    """``phi_n = n**power`` independent of the word (a non-additive example)."""

    def ev(n, words):
        return np.full(words.shape[0], float(n) ** power)

    return SequenceFamily(spec, ev, constant, "almost_additive", 0, None, f"n^{power}")


@dataclass(frozen=True)
class AdditivityReport:
    """Largest excess ``|phi_{n+m} - phi_n - phi_m o sigma^n| - C`` over the trials.

    ``witnesses`` lists ``(n, m, word)`` for the worst violations (excess > 0).
    An empty list certifies the property on the tested instances only.
    """

    max_violation: float
    max_defect: float
    witnesses: list = field(default_factory=list)
    trials: int = 0

    @property
    def holds(self) -> bool:
        return not self.witnesses


def check_almost_additive(
    f: SequenceFamily,
    n_max: int,
    trials: int,
    s: SeededStream,
    sampler: GibbsMeasure | None = None,
    slack: float = 1e-9,
) -> AdditivityReport:
    """Spot-check almost additivity on random splits and random admissible words.

    Words are drawn from ``sampler`` (default: the measure of maximal
    entropy of the subshift).
    """
    if n_max < 2:
        raise InputError("n_max must be >= 2")
    if sampler is None:
        sampler = gibbs_measure(Potential.constant(f.spec, 0.0))
    u, s = s.uniforms(2 * trials)
    ns = 1 + np.floor(u[:trials] * (n_max - 1)).astype(int)
    ms = 1 + np.floor(u[trials:] * (n_max - ns)).astype(int)
    ms = np.maximum(ms, 1)
    worst = -np.inf
    worst_defect = 0.0
    wit = []
    for t in range(trials):
        n, m = int(ns[t]), int(ms[t])
        L = n + m + f.lookahead
        w = sample_orbit(sampler, L, s)
        s = s.advance(L + 1)
        whole = f.evaluate(n + m, w.reshape(1, -1))[0]
        left = f.evaluate(n, w.reshape(1, -1))[0]
        right = f.evaluate(m, w[n:].reshape(1, -1))[0]
        defect = abs(whole - left - right)
        excess = defect - f.constant
        worst_defect = max(worst_defect, defect)
        worst = max(worst, excess)
        if excess > slack:
            wit.append((n, m, w.copy(), float(excess)))
    wit.sort(key=lambda x: -x[3])
    return AdditivityReport(float(worst), float(worst_defect), [(a, b, c) for a, b, c, _ in wit[:5]], trials)


class FreeEnergy(NamedTuple):
    """``(1/n) int psi_n d eta`` per ``n`` with errors, and the Fekete summary."""

    n: np.ndarray
    per_n: np.ndarray
    std_err: np.ndarray
    limit: FeketeEstimate

    @property
    def value(self) -> float:
        return self.limit.extrapolated


def free_energy(
    eta: GibbsMeasure,
    f: SequenceFamily,
    n_list: Sequence[int],
    stream: SeededStream | None = None,
    samples: int = 4096,
) -> FreeEnergy:
    """``F(eta, Psi) = lim (1/n) int psi_n d eta``.

    Exact sums over admissible words while their count is within the cap;
    beyond it Monte Carlo with ``samples`` orbits (needs ``stream``).
    """
    if eta.spec != f.spec:
        raise InputError("measure and family live on different subshifts")
    n_arr = np.asarray(n_list, dtype=np.int64)
    if n_arr.size == 0 or n_arr[0] < 1 or (np.diff(n_arr) <= 0).any():
        raise InputError("n_list must be strictly increasing positive integers")
    q = f.spec.alphabet_size
    integrals = np.empty(n_arr.size)
    se = np.zeros(n_arr.size)
    for j, n in enumerate(n_arr):
        L = int(n) + f.lookahead
        if q**L <= EXACT_TERM_CAP:
            words = admissible_words(f.spec, L)
            lm = word_log_measures(eta, words)
            live = np.isfinite(lm)
            integrals[j] = float((np.exp(lm[live]) * f.evaluate(int(n), words[live])).sum())
        else:
            if stream is None:
                raise InputError(f"q**{L} exceeds the exact-sum cap and no Monte Carlo stream was given")
            words, stream = sample_orbits(eta, L, samples, stream)
            v = f.evaluate(int(n), words)
            integrals[j] = float(v.mean())
            se[j] = float(v.std(ddof=1) / np.sqrt(samples))
    lim = fekete_limit(list(zip(n_arr.tolist(), integrals.tolist())), subadditive=f.kind == "sub_additive")
    return FreeEnergy(n_arr, integrals / n_arr, se / n_arr, lim)


class PsiStar(NamedTuple):
    """Per-node ``psi_* = inf_n (1/n) int psi_n d nu`` estimates."""

    nodes: np.ndarray
    bound: np.ndarray
    extrapolated: np.ndarray
    last: np.ndarray
    std_err: np.ndarray
    per_n: np.ndarray
    clipped: np.ndarray


def psi_star(
    fam,
    psi,
    nu: GibbsMeasure,
    n_list: Sequence[int],
    replicas: int,
    s: SeededStream,
    mc_stream: SeededStream | None = None,
) -> PsiStar:
    """Monte Carlo average of ``psi_n(theta, y)`` over ``replicas`` samples ``y ~ nu``.

    Replica ``r`` observes ``y`` drawn from ``s.replica(r)``. Each node's
    averaged sequence goes through :func:`fekete_limit`. When every
    ``psi_n`` is nonnegative the limit is too, and negative extrapolations
    (regression noise) are clipped to 0 and marked in ``clipped``.
    """
    if replicas < 1:
        raise InputError("replicas must be >= 1")
    n_arr = np.asarray(n_list, dtype=np.int64)
    top = int(n_arr.max())
    pots = getattr(psi, "potentials", None)
    look = max(p.depth for p in pots) - 1 if pots else 0
    acc = []
    for r in range(replicas):
        y = sample_orbit(nu, top + look, s.replica(r))
        est = psi.values(fam, y, n_arr, mc_stream or s.replica(r).child(1))
        acc.append(est.values)
    vals = np.array(acc)  # replicas x nodes x len(n)
    nonneg = bool((vals >= 0).all())
    mean = vals.mean(axis=0)
    se = vals.std(axis=0, ddof=1) / np.sqrt(replicas) if replicas > 1 else np.zeros_like(mean)
    bound = np.empty(len(fam))
    ext = np.empty(len(fam))
    last = np.empty(len(fam))
    clipped = np.zeros(len(fam), dtype=bool)
    for i in range(len(fam)):
        fe = fekete_limit(list(zip(n_arr.tolist(), mean[i].tolist())))
        bound[i], ext[i], last[i] = fe
        if nonneg and ext[i] < 0:
            ext[i] = 0.0
            clipped[i] = True
    if nonneg and (bound < 0).any():
        raise NumericError("nonnegative psi produced a negative Fekete bound")
    return PsiStar(fam.nodes, bound, ext, last, se / n_arr, mean / n_arr, clipped)
