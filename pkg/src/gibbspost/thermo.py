"""Transfer operators and Gibbs measures for locally constant potentials.

A depth-``k`` potential is a table of reals indexed by the admissible
``k``-words.  Its transfer operator restricted to functions of the first
``d - 1`` coordinates (``d = max(k, 2)``) is a small nonnegative matrix,
so pressure, normalization and the invariant Gibbs measure all reduce to
Perron eigenproblems.

Gibbs measures are Markov measures of order ``d - 1`` and cylinder masses
are exact::

    log mu([w_1 .. w_n]) = log marginal(w_{n-d+2} .. w_n)
                           + sum_{i <= n-d+1} logJ(w_i .. w_{i+d-1})

where ``J = exp(jacobian)`` is the normalized Jacobian, i.e. the
conditional probability of the first symbol given the next ``d - 1``.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Mapping, NamedTuple, Sequence

import numpy as np
from scipy.special import logsumexp

from .errors import InputError, NumericError
from .shift import (
    SubshiftSpec,
    admissible_words,
    as_word,
    count_admissible,
    is_admissible,
    window_codes,
)

__all__ = [
    "Potential",
    "TransferMatrix",
    "GibbsMeasure",
    "perron",
    "transfer_matrix",
    "pressure",
    "normalize",
    "gibbs_measure",
    "bernoulli_measure",
    "markov_measure",
    "cylinder_log_measure",
    "prefix_log_measures",
    "word_log_measures",
    "entropy",
    "expectation",
    "relative_entropy",
    "relative_entropy_empirical",
]

DEFAULT_TOL = 1e-13
DEFAULT_MAX_ITER = 100_000
GIBBS_WORD_LENGTH = 12


def _codes_of(words: np.ndarray, q: int) -> np.ndarray:
    k = words.shape[1]
    if k == 0:
        return np.zeros(words.shape[0], dtype=np.int64)
    return window_codes(words, k, q)[:, 0]


@dataclass(frozen=True, eq=False)
class Potential:
    """Locally constant function ``A(x) = values[x_1 .. x_k]``.

    ``values`` is aligned with ``admissible_words(spec, depth)``.
    """

    spec: SubshiftSpec
    depth: int
    values: np.ndarray
    allow_neg_inf: bool = field(default=False, repr=False)

    def __post_init__(self):
        if self.depth < 1:
            raise InputError(f"potential depth must be >= 1, got {self.depth}")
        vals = np.array(self.values, dtype=float).reshape(-1)
        expected = count_admissible(self.spec, self.depth)
        if vals.size != expected:
            raise InputError(
                f"depth-{self.depth} potential needs {expected} values, got {vals.size}"
            )
        bad = np.isnan(vals) | (vals == np.inf)
        if not self.allow_neg_inf:
            bad |= ~np.isfinite(vals)
        if bad.any():
            raise InputError("potential values must be finite")
        vals.setflags(write=False)
        object.__setattr__(self, "values", vals)

    # construction -----------------------------------------------------

    @classmethod
    def from_mapping(
        cls, spec: SubshiftSpec, depth: int, mapping: Mapping[Sequence[int], float]
    ) -> "Potential":
        """Build from ``{word: value}``; every admissible word must be present."""
        table = {tuple(int(s) for s in k): float(v) for k, v in mapping.items()}
        words = admissible_words(spec, depth)
        missing = [tuple(int(s) for s in w) for w in words if tuple(int(s) for s in w) not in table]
        if missing:
            raise InputError(f"potential is missing admissible words: {missing}")
        return cls(spec, depth, np.array([table[tuple(int(s) for s in w)] for w in words]))

    @classmethod
    def from_function(
        cls, spec: SubshiftSpec, depth: int, fn: Callable[[tuple[int, ...]], float]
    ) -> "Potential":
        words = admissible_words(spec, depth)
        return cls(spec, depth, np.array([fn(tuple(int(s) for s in w)) for w in words]))

    @classmethod
    def constant(cls, spec: SubshiftSpec, c: float, depth: int = 1) -> "Potential":
        return cls(spec, depth, np.full(count_admissible(spec, depth), float(c)))

    # evaluation -------------------------------------------------------

    @property
    def words(self) -> np.ndarray:
        return admissible_words(self.spec, self.depth)

    def dense(self, fill: float = np.nan) -> np.ndarray:
        """Values on all ``q**depth`` codes; inadmissible codes get ``fill``."""
        q = self.spec.alphabet_size
        out = np.full(q**self.depth, fill)
        out[_codes_of(self.words, q)] = self.values
        return out

    def extend(self, depth: int) -> "Potential":
        """Same function viewed as a depth-``depth`` table (``depth >= self.depth``)."""
        if depth == self.depth:
            return self
        if depth < self.depth:
            raise InputError("cannot lower the depth of a potential")
        q = self.spec.alphabet_size
        words = admissible_words(self.spec, depth)
        codes = _codes_of(words[:, : self.depth], q)
        return Potential(self.spec, depth, self.dense()[codes], allow_neg_inf=self.allow_neg_inf)

    def windows(self, word) -> np.ndarray:
        """``A(sigma^i w)`` for every full window ``i = 0 .. len(w) - depth``."""
        w = as_word(word)
        codes = window_codes(w, self.depth, self.spec.alphabet_size)
        return self.dense()[codes]

    def birkhoff(self, word, n: int | None = None) -> float:
        """``S_n A`` along ``word``; needs ``len(word) >= n + depth - 1``."""
        vals = self.windows(word)
        if n is None:
            n = vals.size
        if n > vals.size:
            raise InputError(
                f"Birkhoff sum of length {n} needs a word of length {n + self.depth - 1}"
            )
        return float(vals[:n].sum())

    def __call__(self, word) -> float:
        w = as_word(word)
        return float(self.windows(w[: self.depth])[0])

    # arithmetic -------------------------------------------------------

    def _aligned(self, other: "Potential") -> tuple["Potential", "Potential"]:
        if other.spec != self.spec:
            raise InputError("potentials live on different subshifts")
        d = max(self.depth, other.depth)
        return self.extend(d), other.extend(d)

    def __add__(self, other):
        if isinstance(other, Potential):
            a, b = self._aligned(other)
            return Potential(self.spec, a.depth, a.values + b.values)
        return Potential(self.spec, self.depth, self.values + float(other))

    __radd__ = __add__

    def __neg__(self):
        return Potential(self.spec, self.depth, -self.values)

    def __sub__(self, other):
        return self + (-other)

    def __mul__(self, c):
        return Potential(self.spec, self.depth, self.values * float(c))

    __rmul__ = __mul__

    def sup_distance(self, other: "Potential") -> float:
        a, b = self._aligned(other)
        with np.errstate(invalid="ignore"):
            d = np.abs(a.values - b.values)
        d[(a.values == b.values)] = 0.0
        return float(d.max())


class TransferMatrix(NamedTuple):
    """Ruelle operator on functions of the first ``d - 1`` coordinates.

    ``entries[w, v] = exp(A(a.w))`` where ``v`` is the first ``d - 1``
    symbols of the ``d``-word ``a.w``; ``entries @ g`` is ``L_A g``.
    """

    states: np.ndarray
    entries: np.ndarray


def _order(depth: int) -> int:
    return max(depth, 2)


def _state_index(spec: SubshiftSpec, d: int) -> np.ndarray:
    """Dense map from ``(d-1)``-word code to state row, ``-1`` if inadmissible."""
    q = spec.alphabet_size
    states = admissible_words(spec, d - 1)
    idx = np.full(q ** (d - 1), -1, dtype=np.int64)
    idx[_codes_of(states, q)] = np.arange(states.shape[0])
    return idx


def transfer_matrix(p: Potential) -> TransferMatrix:
    d = _order(p.depth)
    spec = p.spec
    q = spec.alphabet_size
    words = admissible_words(spec, d)
    vals = p.extend(d).values
    states = admissible_words(spec, d - 1)
    idx = _state_index(spec, d)
    rows = idx[_codes_of(words[:, 1:], q)]
    cols = idx[_codes_of(words[:, :-1], q)]
    mat = np.zeros((states.shape[0], states.shape[0]))
    with np.errstate(over="raise"):
        try:
            np.add.at(mat, (rows, cols), np.exp(vals))
        except FloatingPointError as exc:
            raise NumericError("potential too large to exponentiate") from exc
    return TransferMatrix(states, mat)


def perron(
    mat: np.ndarray,
    side: str = "right",
    tol: float = DEFAULT_TOL,
    max_iter: int = DEFAULT_MAX_ITER,
) -> tuple[float, np.ndarray]:
    """Leading eigenvalue and positive eigenvector of a primitive matrix.

    Shifted power iteration from the all-ones vector, stopped when both the
    Rayleigh quotient and the sum-normalized iterate move by less than
    ``tol``, then two inverse-iteration steps at the converged root.
    The eigenvector is returned normalized to sum 1.
    """
    a = np.asarray(mat, dtype=float)
    if side == "left":
        a = a.T
    elif side != "right":
        raise InputError(f"side must be 'left' or 'right', got {side!r}")
    # a + shift*I has the same Perron vector; the shift damps eigenvalues near
    # -lam or on the circle |z| = lam, which otherwise stall the iteration
    shift = float(a.sum(axis=0).max())
    b = a + shift * np.eye(a.shape[0])
    x = np.full(a.shape[0], 1.0 / a.shape[0])
    rq_prev = np.inf
    # the quotient jitters at a few ulps once converged; the polish fixes the last digits
    rq_tol = max(tol, 1e4 * np.finfo(float).eps)
    for _ in range(max_iter):
        y = b @ x
        s = y.sum()
        if not np.isfinite(s) or s <= 0:
            raise NumericError("power iteration lost positivity")
        rq = float(x @ y) / float(x @ x) - shift
        x_new = y / s
        if abs(rq - rq_prev) < rq_tol * max(1.0, abs(rq)) and np.max(np.abs(x_new - x)) < tol:
            return _polish(a, rq, x_new)
        x, rq_prev = x_new, rq
    raise NumericError(f"power iteration did not converge in {max_iter} sweeps")


def _polish(a: np.ndarray, lam: float, x: np.ndarray, steps: int = 2) -> tuple[float, np.ndarray]:
    # a small step is not a small error when the spectral gap is narrow;
    # inverse iteration at the converged root removes the gap dependence
    eye = np.eye(a.shape[0])
    for _ in range(steps):
        try:
            z = np.linalg.solve(a - lam * (1.0 + 1e-12) * eye, x)
        except np.linalg.LinAlgError:
            break
        z = z / z.sum()
        if not np.all(np.isfinite(z)) or np.any(z <= 0):
            break
        x = z
        lam = float(x @ (a @ x)) / float(x @ x)
    return lam, x


def pressure(p: Potential, tol: float = DEFAULT_TOL) -> float:
    """Topological pressure: log of the Perron root of the transfer matrix."""
    p.spec.require_primitive()
    lam, _ = perron(transfer_matrix(p).entries, "right", tol)
    return float(np.log(lam))


def normalize(p: Potential, tol: float = DEFAULT_TOL) -> tuple[Potential, float]:
    """Cohomologous normalized potential and the pressure that was removed.

    Returns ``(A + log h(prefix) - log h(suffix) - log lam, log lam)`` where
    ``h`` is the right Perron vector, so that ``L_{new}(1) == 1``.
    """
    spec = p.spec
    spec.require_primitive()
    tm = transfer_matrix(p)
    lam, h = perron(tm.entries, "right", tol)
    d = _order(p.depth)
    q = spec.alphabet_size
    words = admissible_words(spec, d)
    idx = _state_index(spec, d)
    log_h = np.log(h)
    prefix = idx[_codes_of(words[:, :-1], q)]
    suffix = idx[_codes_of(words[:, 1:], q)]
    vals = p.extend(d).values + log_h[prefix] - log_h[suffix] - np.log(lam)
    out = Potential(spec, d, vals)
    if p.depth == 1 and np.all(log_h == log_h[0]):
        # h constant: the result still depends on the first symbol only
        out = Potential(spec, 1, vals[_first_occurrence(words[:, 0], q)])
    return out, float(np.log(lam))


def _first_occurrence(first: np.ndarray, q: int) -> np.ndarray:
    pos = np.full(q, -1, dtype=np.int64)
    for i in range(first.size - 1, -1, -1):
        pos[first[i]] = i
    return pos


@dataclass(frozen=True, eq=False)
class GibbsMeasure:
    """Invariant Gibbs measure of a normalized potential.

    ``marginal`` is indexed by the admissible ``(d-1)``-words in
    lexicographic order, ``d = max(jacobian.depth, 2)``. For depth-1
    (Bernoulli) Jacobians the states are single symbols.
    """

    jacobian: Potential
    marginal: np.ndarray
    gibbs_constant: float

    def __post_init__(self):
        marg = np.array(self.marginal, dtype=float)
        marg.setflags(write=False)
        object.__setattr__(self, "marginal", marg)
        d = self.order
        q = self.spec.alphabet_size
        log_j = self.jacobian.extend(d).dense(fill=-np.inf)
        log_j[np.isnan(log_j)] = -np.inf
        with np.errstate(divide="ignore"):
            log_m = np.full(q ** (d - 1), -np.inf)
            log_m[_codes_of(self.states, q)] = np.log(marg)
        log_j.setflags(write=False)
        log_m.setflags(write=False)
        object.__setattr__(self, "_log_jacobian", log_j)
        object.__setattr__(self, "_log_marginal", log_m)

    @property
    def spec(self) -> SubshiftSpec:
        return self.jacobian.spec

    @property
    def order(self) -> int:
        return _order(self.jacobian.depth)

    @property
    def states(self) -> np.ndarray:
        return admissible_words(self.spec, self.order - 1)

    @property
    def log_jacobian_table(self) -> np.ndarray:
        """Dense ``log J`` over all ``q**d`` codes, ``-inf`` off the support."""
        return self._log_jacobian

    @property
    def log_marginal_table(self) -> np.ndarray:
        return self._log_marginal

    def normalized_transfer(self) -> np.ndarray:
        return transfer_matrix(self.jacobian).entries

    def forward_kernel(self) -> tuple[np.ndarray, np.ndarray]:
        """Left-to-right transition law on ``(d-1)``-word states.

        Returns ``(probs, next_state)``, both ``S x q``: ``probs[s, a]`` is the
        probability that symbol ``a`` follows the block ``states[s]`` and
        ``next_state[s, a]`` the index of the shifted block (``-1`` if
        inadmissible).
        """
        d = self.order
        q = self.spec.alphabet_size
        states = self.states
        idx = _state_index(self.spec, d)
        scode = _codes_of(states, q)
        tail = scode % (q ** (d - 2)) if d > 2 else np.zeros_like(scode)
        S = states.shape[0]
        probs = np.zeros((S, q))
        nxt = np.full((S, q), -1, dtype=np.int64)
        with np.errstate(invalid="ignore"):
            for a in range(q):
                full = scode * q + a
                new = tail * q + a
                lp = self._log_jacobian[full] + self._log_marginal[new] - self._log_marginal[scode]
                ok = np.isfinite(lp)
                probs[ok, a] = np.exp(lp[ok])
                nxt[:, a] = np.where(self.spec.matrix[states[:, -1], a] > 0, idx[new], -1)
        row = probs.sum(axis=1, keepdims=True)
        live = row[:, 0] > 0
        probs[live] /= row[live]
        return probs, nxt


def _gibbs_constant(jac: Potential, marginal: np.ndarray, max_len: int) -> float:
    spec = jac.spec
    q = spec.alphabet_size
    d = _order(jac.depth)
    log_j = jac.extend(d).dense(fill=-np.inf)
    log_j[np.isnan(log_j)] = -np.inf
    states = admissible_words(spec, d - 1)
    with np.errstate(divide="ignore"):
        log_m = np.full(q ** (d - 1), -np.inf)
        log_m[_codes_of(states, q)] = np.log(marginal)
    worst = 0.0
    # n >= d-1: log mu(C_n) - S_n f only sees a (2d-2)-window at the end of the word
    z = admissible_words(spec, 2 * d - 2)
    with np.errstate(invalid="ignore"):
        r = log_m[_codes_of(z[:, : d - 1], q)] - log_j[window_codes(z, d, q)].sum(axis=1)
    r = r[np.isfinite(r)]
    if r.size:
        worst = max(worst, float(np.abs(r).max()))
    # 1 <= n < d-1 (only for d >= 3): brute force over words of length n + d - 1
    for n in range(1, min(d - 1, max_len + 1)):
        x = admissible_words(spec, n + d - 1)
        head = _codes_of(x[:, :n], q)
        # mu([x_1..x_n]) by summing the marginal over (d-1)-blocks with that prefix
        scode = _codes_of(states, q)
        shead = scode // (q ** (d - 1 - n))
        mass = np.zeros(q**n)
        np.add.at(mass, shead, marginal)
        with np.errstate(divide="ignore", invalid="ignore"):
            r = np.log(mass[head]) - log_j[window_codes(x, d, q)][:, :n].sum(axis=1)
        r = r[np.isfinite(r)]
        if r.size:
            worst = max(worst, float(np.abs(r).max()))
    return float(np.exp(worst))


def gibbs_measure(
    p: Potential, tol: float = DEFAULT_TOL, gibbs_length: int = GIBBS_WORD_LENGTH
) -> GibbsMeasure:
    """Normalize ``p`` and build its invariant Gibbs measure.

    The marginal is the left Perron vector of the normalized transfer matrix.
    The Gibbs constant is the exact supremum over all cylinder lengths of the
    two-sided ratio ``mu(C_n(x)) / exp(S_n f(x))``.
    """
    jac, _ = normalize(p, tol)
    _, marg = perron(transfer_matrix(jac).entries, "left", tol)
    return GibbsMeasure(jac, marg, _gibbs_constant(jac, marg, gibbs_length))


def bernoulli_measure(spec_or_q, probs: Sequence[float]) -> GibbsMeasure:
    """Product measure on the full shift; zero probabilities are allowed."""
    spec = spec_or_q if isinstance(spec_or_q, SubshiftSpec) else SubshiftSpec.full_shift(int(spec_or_q))
    if not spec.is_full:
        raise InputError("Bernoulli measures need the full shift")
    p = np.asarray([float(v) for v in probs])
    if p.size != spec.alphabet_size or (p < 0).any() or abs(p.sum() - 1) > 1e-12:
        raise InputError(f"invalid Bernoulli probabilities {list(p)}")
    p = p / p.sum()
    with np.errstate(divide="ignore"):
        jac = Potential(spec, 1, np.log(p), allow_neg_inf=True)
    return GibbsMeasure(jac, p, _gibbs_constant(jac, p, GIBBS_WORD_LENGTH))


def markov_measure(matrix, spec: SubshiftSpec | None = None, tol: float = DEFAULT_TOL) -> GibbsMeasure:
    """Stationary Markov measure of a column-stochastic matrix.

    ``matrix[t, s]`` is the probability of moving from symbol ``s`` to ``t``;
    the stationary vector solves ``P pi = pi`` and
    ``mu([w_1..w_n]) = pi[w_1] * prod P[w_{i+1}, w_i]``.
    The normalized Jacobian is ``J(i, j) = pi[i] P[j, i] / pi[j]``.
    """
    P = np.asarray(matrix, dtype=float)
    q = P.shape[0]
    if P.shape != (q, q) or (P < 0).any():
        raise InputError("Markov matrix must be square and nonnegative")
    cols = P.sum(axis=0)
    bad = [j for j in range(q) if abs(cols[j] - 1) > 1e-12]
    if bad:
        raise InputError(f"Markov matrix columns {bad} do not sum to 1")
    if spec is None:
        spec = SubshiftSpec.from_matrix((P.T > 0).astype(int))
    _, pi = perron(P, "right", tol)
    words = admissible_words(spec, 2)
    i, j = words[:, 0], words[:, 1]
    with np.errstate(divide="ignore"):
        vals = np.log(pi[i]) + np.log(P[j, i]) - np.log(pi[j])
    jac = Potential(spec, 2, vals, allow_neg_inf=True)
    return GibbsMeasure(jac, pi, _gibbs_constant(jac, pi, GIBBS_WORD_LENGTH))


# cylinder masses ------------------------------------------------------


def prefix_log_measures(m: GibbsMeasure, y) -> np.ndarray:
    """``out[n-1] = log mu([y_1 .. y_n])`` for every ``n = 1 .. len(y)``.

    Inadmissible prefixes give ``-inf``.
    """
    y = as_word(y, m.spec)
    n = y.size
    q = m.spec.alphabet_size
    d = m.order
    out = np.full(n, -np.inf)
    if n == 0:
        return out
    if n >= d - 1:
        jv = m.log_jacobian_table[window_codes(y, d, q)] if n >= d else np.zeros(0)
        cum = np.concatenate([[0.0], np.cumsum(jv)])
        tails = m.log_marginal_table[window_codes(y, d - 1, q)]
        # prefix length L >= d-1 uses J-windows 0..L-d and the block ending at L
        out[d - 2 :] = cum[: n - d + 2] + tails
    for L in range(1, min(d - 1, n + 1)):
        out[L - 1] = _short_prefix_log_measure(m, y[:L])
    if n >= 2:
        ok = m.spec.matrix[y[:-1], y[1:]] > 0
        if not ok.all():
            out[int(np.argmin(ok)) + 1 :] = -np.inf
    return out


def _short_prefix_log_measure(m: GibbsMeasure, w: np.ndarray) -> float:
    q = m.spec.alphabet_size
    d = m.order
    states = m.states
    codes = _codes_of(states, q)
    shift = q ** (d - 1 - w.size)
    target = int(_codes_of(w.reshape(1, -1), q)[0])
    mass = m.marginal[(codes // shift) == target].sum()
    with np.errstate(divide="ignore"):
        return float(np.log(mass))


def cylinder_log_measure(m: GibbsMeasure, w) -> float:
    """``log mu([w])`` exactly, ``-inf`` for inadmissible words."""
    w = as_word(w, m.spec)
    k = m.jacobian.depth
    if w.size < k - 1:
        raise InputError(f"word of length {w.size} is shorter than depth-1 = {k - 1}")
    if w.size == 0:
        return 0.0
    if not is_admissible(m.spec, w):
        return -np.inf
    return float(prefix_log_measures(m, w)[-1])


def word_log_measures(m: GibbsMeasure, words: np.ndarray) -> np.ndarray:
    """Vectorized ``cylinder_log_measure`` over the rows of ``words``."""
    words = np.asarray(words, dtype=np.int64)
    if words.ndim != 2:
        raise InputError("words must be a 2-D array")
    n = words.shape[1]
    q = m.spec.alphabet_size
    d = m.order
    if n == 0:
        return np.zeros(words.shape[0])
    if n < d - 1:
        return np.array([_short_prefix_log_measure(m, w) for w in words])
    with np.errstate(invalid="ignore"):
        tail = m.log_marginal_table[_codes_of(words[:, n - d + 1 :], q)]
        if n >= d:
            tail = tail + m.log_jacobian_table[window_codes(words, d, q)][:, : n - d + 1].sum(axis=1)
    if n >= 2:
        ok = (m.spec.matrix[words[:, :-1], words[:, 1:]] > 0).all(axis=1)
        tail = np.where(ok, tail, -np.inf)
    return tail


# entropy and relative entropy -------------------------------------------


def _check_same_spec(a: SubshiftSpec, b: SubshiftSpec) -> None:
    if a != b:
        raise InputError("measures/potentials live on different subshifts")


def entropy(m: GibbsMeasure) -> float:
    """Kolmogorov-Sinai entropy ``-sum mu([w]) log J(w)`` over ``d``-words."""
    words = admissible_words(m.spec, m.order)
    lm = word_log_measures(m, words)
    lj = m.log_jacobian_table[_codes_of(words, m.spec.alphabet_size)]
    live = np.isfinite(lm)
    return float(-(np.exp(lm[live]) * lj[live]).sum())


def expectation(m: GibbsMeasure, p: Potential) -> float:
    """``integral p dmu`` as an exact sum over words of the common depth."""
    _check_same_spec(m.spec, p.spec)
    D = max(m.order, p.depth)
    words = admissible_words(m.spec, D)
    lm = word_log_measures(m, words)
    vals = p.extend(D).values if p.depth < D else p.values
    live = np.isfinite(lm)
    w = np.exp(lm[live])
    v = vals[live]
    if np.isneginf(v[w > 0]).any():
        return -np.inf
    return float((w * v).sum())


def relative_entropy(mu: GibbsMeasure, mu_phi: GibbsMeasure) -> float:
    """Kullback-Leibler divergence rate ``h(mu | mu_phi)``."""
    _check_same_spec(mu.spec, mu_phi.spec)
    e = expectation(mu, mu_phi.jacobian)
    if e == -np.inf:
        return np.inf
    return -entropy(mu) - e


def relative_entropy_empirical(w, mu: GibbsMeasure, mu_phi: GibbsMeasure) -> float:
    """``(1/n) log(mu([w]) / mu_phi([w]))`` along a sampled word."""
    w = as_word(w, mu.spec)
    a = cylinder_log_measure(mu, w)
    b = cylinder_log_measure(mu_phi, w)
    if not (np.isfinite(a) and np.isfinite(b)):
        return -np.inf
    return (a - b) / w.size


def log_mean_exp(x: np.ndarray, axis=None):
    """``log(mean(exp(x)))`` without overflow."""
    x = np.asarray(x, dtype=float)
    n = x.size if axis is None else x.shape[axis]
    return logsumexp(x, axis=axis) - np.log(n)
