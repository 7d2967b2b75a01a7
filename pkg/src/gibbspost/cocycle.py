"""Locally constant SL(2, R) cocycle ``A_i = H R(theta_i)`` over the shift.

``H = [[2, 1], [1, 1]]`` is hyperbolic with leading eigenvalue
``(3 + sqrt 5) / 2``; ``R(t)`` is the rotation by ``t``. Products follow
``A^(n)(x) = A_{x_n} ... A_{x_1}``.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple, Sequence

import numpy as np

from . import kernels
from .errors import InputError
from .sampling import SeededStream, sample_orbit, sample_orbits
from .shift import as_word
from .thermo import GibbsMeasure, log_mean_exp

__all__ = [
    "HYPERBOLIC",
    "GOLDEN_LOG",
    "CocycleSpec",
    "spectral_norm",
    "cocycle_product",
    "log_norms",
    "top_lyapunov_quenched",
    "AnnealedSeries",
    "annealed_moments",
    "annealed_lyapunov",
    "EXACT_WORD_CAP",
]

HYPERBOLIC = np.array([[2.0, 1.0], [1.0, 1.0]])
GOLDEN_LOG = float(np.log((3.0 + np.sqrt(5.0)) / 2.0))
EXACT_WORD_CAP = 2_000_000


def rotation(t: float) -> np.ndarray:
    c, s = np.cos(t), np.sin(t)
    return np.array([[c, -s], [s, c]])


@dataclass(frozen=True)
class CocycleSpec:
    """One rotation angle per symbol; symbol ``i`` acts by ``H R(angles[i])``."""

    angles: tuple[float, ...]

    def __post_init__(self):
        angles = tuple(float(a) for a in np.asarray(self.angles, dtype=float).reshape(-1))
        if len(angles) < 1:
            raise InputError("need at least one angle")
        object.__setattr__(self, "angles", angles)
        dets = np.linalg.det(self.matrices)
        if np.abs(dets - 1.0).max() > 1e-12:
            raise InputError("cocycle matrices must have determinant 1")

    @property
    def matrices(self) -> np.ndarray:
        return np.ascontiguousarray(np.stack([HYPERBOLIC @ rotation(t) for t in self.angles]))


def _log_spectral(p0, p1, p2, p3):
    t = p0 * p0 + p1 * p1 + p2 * p2 + p3 * p3
    det = np.abs(p0 * p3 - p1 * p2)
    disc = np.maximum((t - 2.0 * det) * (t + 2.0 * det), 0.0)
    return 0.5 * np.log(0.5 * (t + np.sqrt(disc)))


def spectral_norm(a: np.ndarray) -> np.ndarray:
    """Largest singular value of one or many 2x2 matrices, in closed form."""
    a = np.asarray(a, dtype=float)
    return np.exp(_log_spectral(a[..., 0, 0], a[..., 0, 1], a[..., 1, 0], a[..., 1, 1]))


def cocycle_product(c: CocycleSpec, w) -> np.ndarray:
    """``A_{w_n} ... A_{w_1}``; the empty word gives the identity."""
    w = as_word(w)
    mats = c.matrices
    if w.size and (w.min() < 0 or w.max() >= mats.shape[0]):
        raise InputError("word uses a symbol with no cocycle matrix")
    out = np.eye(2)
    for x in w:
        out = mats[x] @ out
    return out


def log_norms(c: CocycleSpec, words, checkpoints: Sequence[int]) -> np.ndarray:
    """``log ||A^(n)(row)||`` for each word row and each checkpoint ``n``.

    The product is carried with rescaling every 32 steps and the scale
    accumulated in log space, so any length is safe.
    """
    words = np.ascontiguousarray(np.atleast_2d(np.asarray(words, dtype=np.int64)))
    cps = np.ascontiguousarray(np.asarray(checkpoints, dtype=np.int64))
    if cps.size and ((np.diff(cps) < 0).any() or cps[0] < 0 or cps[-1] > words.shape[1]):
        raise InputError("checkpoints must be nondecreasing and within the word length")
    if words.size and (words.min() < 0 or words.max() >= len(c.angles)):
        raise InputError("word uses a symbol with no cocycle matrix")
    return kernels.cocycle_lognorms(c.matrices, words, cps)


def top_lyapunov_quenched(c: CocycleSpec, m: GibbsMeasure, n: int, s: SeededStream) -> float:
    """``(1/n) log ||A^(n)(y)||`` along one sampled orbit ``y``."""
    if n < 1:
        raise InputError("n must be >= 1")
    y = sample_orbit(m, n, s)
    return float(log_norms(c, y.reshape(1, -1), [n])[0, 0]) / n


class AnnealedSeries(NamedTuple):
    """Per-``n`` moments of ``L_n = log ||A^(n)||`` under a measure.

    ``mean_log`` is ``E[L_n]``, ``log_mean_norm`` is ``log E[exp(L_n)]``;
    ``*_se`` are Monte Carlo standard errors (0 where the sum was exact).
    """

    n: np.ndarray
    mean_log: np.ndarray
    mean_log_se: np.ndarray
    log_mean_norm: np.ndarray
    log_mean_norm_se: np.ndarray
    exact: np.ndarray


def exact_word_moments(c: CocycleSpec, m: GibbsMeasure, n_list: Sequence[int]):
    """Exact ``E[L_n]`` and ``log E[exp L_n]`` by enumerating every ``n``-word.

    Words are grown one symbol at a time, carrying the product matrices and
    log cylinder masses, so memory stays at ``q**n_max`` matrices.
    """
    n_arr = np.asarray(n_list, dtype=np.int64)
    q = m.spec.alphabet_size
    if n_arr.size == 0:
        return np.zeros(0), np.zeros(0)
    if q ** int(n_arr.max()) > EXACT_WORD_CAP:
        raise InputError(f"q**n exceeds the exact-sum cap {EXACT_WORD_CAP}")
    mats = c.matrices
    if mats.shape[0] != q:
        raise InputError("cocycle needs one matrix per symbol")
    probs, nxt = m.forward_kernel()
    d = m.order
    with np.errstate(divide="ignore"):
        log_probs = np.log(probs)
        log_marg = np.log(m.marginal)
    states = m.states
    mean = np.empty(n_arr.size)
    lmn = np.empty(n_arr.size)
    want = {int(n): i for i, n in enumerate(n_arr)}
    for n0 in [n for n in want if n == 0]:
        mean[want[n0]] = 0.0
        lmn[want[n0]] = 0.0
    # initial block of length d-1 (one symbol when d == 2)
    b = d - 1
    prod = np.broadcast_to(np.eye(2), (states.shape[0], 2, 2)).copy()
    for t in range(b):
        prod = mats[states[:, t]] @ prod
    # product entries are carried as four flat arrays
    p = [prod[:, 0, 0], prod[:, 0, 1], prod[:, 1, 0], prod[:, 1, 1]]
    logp = log_marg.copy()
    state = np.arange(states.shape[0])
    if any(0 < k < b for k in want):
        raise InputError(f"exact moments need n >= {b} for this measure")
    length = b
    top = int(n_arr.max())
    while True:
        if length in want:
            ln = _log_spectral(*p)
            w = np.exp(logp)
            mean[want[length]] = float(w @ ln)
            lmn[want[length]] = float(np.logaddexp.reduce(logp + ln))
        if length >= top:
            break
        # extend every word by every symbol; index = old * q + a keeps lexicographic order
        new = []
        for a in range(q):
            (m00, m01), (m10, m11) = mats[a]
            new.append((m00 * p[0] + m01 * p[2], m00 * p[1] + m01 * p[3],
                        m10 * p[0] + m11 * p[2], m10 * p[1] + m11 * p[3]))
        p = [np.stack([new[a][c] for a in range(q)], axis=1).reshape(-1) for c in range(4)]
        logp = (logp[:, None] + log_probs[state]).reshape(-1)
        state = nxt[state].reshape(-1)
        keep = np.isfinite(logp)
        if not keep.all():
            p = [c[keep] for c in p]
            logp, state = logp[keep], state[keep]
        length += 1
    return mean, lmn


def annealed_moments(
    c: CocycleSpec,
    m: GibbsMeasure,
    n_list: Sequence[int],
    stream: SeededStream | None = None,
    samples: int = 1024,
    exact_cap: int = EXACT_WORD_CAP,
) -> AnnealedSeries:
    """Moments of ``log ||A^(n)||`` under ``m``: exact sums while ``q**n <= exact_cap``.

    Longer ``n`` use ``samples`` orbits from ``stream``; without a stream
    they raise :class:`InputError`.
    """
    n_arr = np.asarray(n_list, dtype=np.int64)
    if n_arr.size == 0 or (np.diff(n_arr) <= 0).any() or n_arr[0] < 1:
        raise InputError("n_list must be strictly increasing positive integers")
    q = m.spec.alphabet_size
    exact = np.array([q ** int(n) <= min(exact_cap, EXACT_WORD_CAP) for n in n_arr])
    exact &= n_arr >= m.order - 1
    mean = np.empty(n_arr.size)
    lmn = np.empty(n_arr.size)
    mean_se = np.zeros(n_arr.size)
    lmn_se = np.zeros(n_arr.size)
    if exact.any():
        mean[exact], lmn[exact] = exact_word_moments(c, m, n_arr[exact])
    if (~exact).any():
        if stream is None:
            raise InputError("n beyond the exact-sum cap needs a Monte Carlo stream")
        mc_n = n_arr[~exact]
        words, _ = sample_orbits(m, int(mc_n.max()), samples, stream)
        ln = log_norms(c, words, mc_n)
        mean[~exact] = ln.mean(axis=0)
        mean_se[~exact] = ln.std(axis=0, ddof=1) / np.sqrt(samples)
        lmn[~exact] = log_mean_exp(ln, axis=0)
        # delta method for the log of a sample mean
        shifted = np.exp(ln - ln.max(axis=0))
        lmn_se[~exact] = shifted.std(axis=0, ddof=1) / np.sqrt(samples) / shifted.mean(axis=0)
    return AnnealedSeries(n_arr, mean, mean_se, lmn, lmn_se, exact)


def annealed_lyapunov(
    c: CocycleSpec,
    m: GibbsMeasure,
    n_list: Sequence[int],
    stream: SeededStream | None = None,
    samples: int = 1024,
):
    """Fekete estimate of ``inf_n (1/n) E[log ||A^(n)||]``."""
    from .nonadditive import fekete_limit

    ser = annealed_moments(c, m, n_list, stream, samples)
    return fekete_limit(list(zip(ser.n.tolist(), ser.mean_log.tolist())), subadditive=True)
