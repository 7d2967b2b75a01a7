"""Seeded, reproducible sampling of orbit prefixes from Gibbs measures.

Random numbers come from a counter-based SplitMix64 stream: draw ``i`` of
stream ``seed`` is ``mix(seed + (i + 1) * 0x9E3779B97F4A7C15)`` and the
uniform is its top 53 bits. Streams are immutable values; consuming draws
returns an advanced copy.
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from typing import NamedTuple

import numpy as np

from . import kernels
from .errors import InputError
from .shift import SubshiftSpec, as_word
from .thermo import GibbsMeasure

__all__ = [
    "SeededStream",
    "SamplingTables",
    "sampling_tables",
    "sample_orbit",
    "sample_orbits",
    "draws_per_orbit",
    "empirical_symbol_frequencies",
    "empirical_pair_frequencies",
]

_U64 = 1 << 64


@dataclass(frozen=True)
class SeededStream:
    """Position ``counter`` in the SplitMix64 stream of ``seed``."""

    seed: int
    counter: int = 0

    def __post_init__(self):
        object.__setattr__(self, "seed", int(self.seed) % _U64)
        if self.counter < 0:
            raise InputError("stream counter must be >= 0")

    def advance(self, n: int) -> "SeededStream":
        return SeededStream(self.seed, self.counter + int(n))

    def uniforms(self, n: int) -> tuple[np.ndarray, "SeededStream"]:
        return kernels.splitmix_uniform(self.seed, self.counter, int(n)), self.advance(n)

    def raw(self, n: int) -> tuple[np.ndarray, "SeededStream"]:
        return kernels.splitmix_raw(self.seed, self.counter, int(n)), self.advance(n)

    def replica(self, index: int) -> "SeededStream":
        """Fresh stream for replica ``index``: seed ``base + index``."""
        return SeededStream(self.seed + int(index), 0)

    def child(self, tag: int) -> "SeededStream":
        """Independent stream keyed by ``tag`` (used for per-node Monte Carlo)."""
        z = kernels.splitmix_raw(self.seed ^ (int(tag) * 0xD1B54A32D192ED03 % _U64), self.counter, 1)
        return SeededStream(int(z[0]), 0)


class SamplingTables(NamedTuple):
    """Inverse-CDF tables shared by the compiled and fallback samplers."""

    cdf: np.ndarray
    next_state: np.ndarray
    last_pos: np.ndarray
    init_cdf: np.ndarray
    states: np.ndarray


def _closed_cdf(probs: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    # cumulative sums with everything from the last positive entry on forced
    # above 1, so rounding never selects a zero-probability outcome
    probs = np.atleast_2d(probs)
    cdf = np.cumsum(probs, axis=1)
    pos = probs > 0
    last = np.where(pos.any(axis=1), probs.shape[1] - 1 - np.argmax(pos[:, ::-1], axis=1), 0)
    cols = np.arange(probs.shape[1])
    cdf[cols[None, :] >= last[:, None]] = 2.0
    return np.ascontiguousarray(cdf), last.astype(np.int64)


@lru_cache(maxsize=1024)
def sampling_tables(m: GibbsMeasure) -> SamplingTables:
    probs, nxt = m.forward_kernel()
    cdf, last = _closed_cdf(probs)
    init, _ = _closed_cdf(m.marginal.reshape(1, -1))
    return SamplingTables(
        cdf,
        np.ascontiguousarray(nxt, dtype=np.int64),
        last,
        np.ascontiguousarray(init[0]),
        np.ascontiguousarray(m.states, dtype=np.int64),
    )


def draws_per_orbit(m: GibbsMeasure, n: int) -> int:
    """Uniforms consumed by one orbit of length ``n``."""
    head = min(m.order - 1, n)
    return 1 + n - head


def sample_orbits(
    m: GibbsMeasure, n: int, count: int, s: SeededStream
) -> tuple[np.ndarray, SeededStream]:
    """``count`` consecutive orbits of length ``n`` as rows, plus the advanced stream.

    The first ``d - 1`` block is drawn from the marginal with one uniform;
    every later symbol from the one-step conditional law by inverse CDF,
    ties going to the smaller symbol.
    """
    if n < 1:
        raise InputError(f"orbit length must be >= 1, got {n}")
    if count < 0:
        raise InputError("count must be >= 0")
    t = sampling_tables(m)
    words = kernels.chain_batch(
        t.cdf, t.next_state, t.last_pos, t.init_cdf, t.states, s.seed, s.counter, int(count), int(n)
    )
    return words, s.advance(count * draws_per_orbit(m, n))


def sample_orbit(m: GibbsMeasure, n: int, s: SeededStream) -> np.ndarray:
    """One orbit prefix ``(y_1 .. y_n)`` distributed according to ``m``."""
    return sample_orbits(m, n, 1, s)[0][0]


def empirical_symbol_frequencies(w, q: int) -> np.ndarray:
    w = as_word(w)
    if w.size == 0:
        raise InputError("need a nonempty word")
    return np.bincount(w, minlength=q)[:q] / w.size


def empirical_pair_frequencies(w, spec: SubshiftSpec) -> np.ndarray:
    """Normalized counts of adjacent pairs: ``out[i, j]`` for ``i`` followed by ``j``."""
    w = as_word(w, spec)
    if w.size < 2:
        raise InputError("pair frequencies need a word of length >= 2")
    q = spec.alphabet_size
    counts = np.bincount(w[:-1] * q + w[1:], minlength=q * q).reshape(q, q)
    return counts / (w.size - 1)
