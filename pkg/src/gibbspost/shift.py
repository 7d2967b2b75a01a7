"""One-sided subshifts of finite type: admissible words, cylinders, metric.

Symbols are the integers ``0 .. q-1``. A word is a 1-D integer numpy array;
``word[0]`` is the first coordinate ``x_1`` of a sequence.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache
from typing import NamedTuple, Sequence

import numpy as np

from .errors import InputError

__all__ = [
    "SubshiftSpec",
    "Separation",
    "admissible_words",
    "count_admissible",
    "is_admissible",
    "as_word",
    "window_codes",
    "separation_metric",
]


@dataclass(frozen=True)
class SubshiftSpec:
    """Alphabet size plus a 0/1 transition matrix.

    ``transitions[i][j] == 1`` means symbol ``j`` may follow symbol ``i``.
    """

    alphabet_size: int
    transitions: tuple[tuple[int, ...], ...]
    primitive: bool = field(init=False, compare=False)

    def __post_init__(self):
        q = int(self.alphabet_size)
        if q < 2:
            raise InputError(f"alphabet_size must be >= 2, got {q}")
        rows = tuple(tuple(int(v) for v in row) for row in self.transitions)
        if len(rows) != q or any(len(r) != q for r in rows):
            raise InputError(f"transitions must be {q}x{q}")
        if any(v not in (0, 1) for r in rows for v in r):
            raise InputError("transitions entries must be 0 or 1")
        m = np.array(rows, dtype=np.int64)
        for i in range(q):
            if not m[i].any():
                raise InputError(f"transitions row {i} has no admissible successor")
            if not m[:, i].any():
                raise InputError(f"transitions column {i} has no admissible predecessor")
        object.__setattr__(self, "alphabet_size", q)
        object.__setattr__(self, "transitions", rows)
        object.__setattr__(self, "primitive", _is_primitive(m))

    @classmethod
    def full_shift(cls, q: int) -> "SubshiftSpec":
        return cls(q, tuple((1,) * q for _ in range(q)))

    @classmethod
    def from_matrix(cls, matrix) -> "SubshiftSpec":
        m = np.asarray(matrix)
        if m.ndim != 2:
            raise InputError("transition matrix must be 2-D")
        return cls(m.shape[0], tuple(tuple(int(v) for v in row) for row in m))

    @property
    def matrix(self) -> np.ndarray:
        m = np.array(self.transitions, dtype=np.int64)
        m.setflags(write=False)
        return m

    @property
    def is_full(self) -> bool:
        return all(all(r) for r in self.transitions)

    def require_primitive(self) -> None:
        if not self.primitive:
            raise InputError("subshift is not primitive (transitive and aperiodic required)")


def _is_primitive(m: np.ndarray) -> bool:
    q = m.shape[0]
    b = (m > 0).astype(np.int64)
    p = b.copy()
    # Wielandt: a primitive q x q matrix has M^((q-1)^2+1) > 0, so q^2 powers suffice
    for _ in range(q * q):
        if p.all():
            return True
        p = ((p @ b) > 0).astype(np.int64)
    return bool(p.all())


@lru_cache(maxsize=256)
def _admissible_cached(spec: SubshiftSpec, n: int) -> np.ndarray:
    q = spec.alphabet_size
    if n == 0:
        return np.zeros((1, 0), dtype=np.int64)
    words = np.arange(q, dtype=np.int64).reshape(q, 1)
    m = spec.matrix
    for _ in range(n - 1):
        last = words[:, -1]
        # rows are lexicographic; appending successors in symbol order keeps them so
        ok = m[last].astype(bool)
        parent, sym = np.nonzero(ok)
        words = np.concatenate([words[parent], sym.reshape(-1, 1)], axis=1)
    words.setflags(write=False)
    return words


def admissible_words(spec: SubshiftSpec, n: int) -> np.ndarray:
    """All admissible words of length ``n`` as rows of a 2-D array.

    Rows are in lexicographic order without duplicates; ``n == 0`` yields a
    single empty row.
    """
    if n < 0:
        raise InputError(f"word length must be >= 0, got {n}")
    return _admissible_cached(spec, int(n))


def count_admissible(spec: SubshiftSpec, n: int) -> int:
    """Number of admissible words of length ``n`` (exact integer)."""
    if n < 0:
        raise InputError(f"word length must be >= 0, got {n}")
    if n == 0:
        return 1
    m = [list(r) for r in spec.transitions]
    q = spec.alphabet_size
    v = [1] * q
    for _ in range(n - 1):
        v = [sum(v[j] * m[i][j] for j in range(q)) for i in range(q)]
    return sum(v)


def as_word(symbols: Sequence[int] | np.ndarray, spec: SubshiftSpec | None = None) -> np.ndarray:
    """Convert to an int64 word, checking symbol range when ``spec`` is given."""
    w = np.asarray(symbols, dtype=np.int64).reshape(-1)
    if spec is not None and w.size and (w.min() < 0 or w.max() >= spec.alphabet_size):
        raise InputError(
            f"symbols must lie in 0..{spec.alphabet_size - 1}, got range "
            f"{int(w.min())}..{int(w.max())}"
        )
    return w


def is_admissible(spec: SubshiftSpec, w) -> bool:
    """True iff every adjacent pair of ``w`` is allowed by the transition matrix."""
    w = as_word(w, spec)
    if w.size < 2:
        return True
    return bool(spec.matrix[w[:-1], w[1:]].all())


def window_codes(w: np.ndarray, k: int, q: int) -> np.ndarray:
    """Base-``q`` integer code of every length-``k`` window of ``w``.

    Window ``i`` covers ``w[i:i+k]``; the first symbol is most significant,
    so code order equals lexicographic order.
    """
    n = w.shape[-1] - k + 1
    if n <= 0:
        return np.zeros(w.shape[:-1] + (0,), dtype=np.int64)
    codes = np.zeros(w.shape[:-1] + (n,), dtype=np.int64)
    for j in range(k):
        codes = codes * q + w[..., j : j + n]
    return codes


class Separation(NamedTuple):
    distance: float
    undetermined: bool


def separation_metric(x, y) -> Separation:
    """``2**-n(x, y)`` for prefixes ``x`` and ``y``.

    ``n(x, y)`` is the first (1-based) index where they differ. When the
    prefixes agree on their whole common length the distance is unknown
    beyond the prefix; the result is ``(0.0, True)``.
    """
    x = as_word(x)
    y = as_word(y)
    if x.size == 0 or y.size == 0:
        raise InputError("separation_metric needs nonempty words")
    m = min(x.size, y.size)
    diff = np.nonzero(x[:m] != y[:m])[0]
    if diff.size == 0:
        return Separation(0.0, True)
    return Separation(2.0 ** -(int(diff[0]) + 1), False)
