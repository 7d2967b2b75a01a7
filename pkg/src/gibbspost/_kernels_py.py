"""Pure-numpy twins of the compiled kernels in ``_kernels.pyx``.

Integer outputs (RNG words, sampled symbols) are bit-identical to the
compiled versions. Cocycle log-norms agree up to the last-ulp differences
between libm and numpy's ``log``/``sqrt``.
"""
from __future__ import annotations

import numpy as np

GOLDEN = np.uint64(0x9E3779B97F4A7C15)
_M1 = np.uint64(0xBF58476D1CE4E5B9)
_M2 = np.uint64(0x94D049BB133111EB)
TWO_M53 = 1.0 / 9007199254740992.0
RENORM_EVERY = 32


def _mix(z: np.ndarray) -> np.ndarray:
    z = (z ^ (z >> np.uint64(30))) * _M1
    z = (z ^ (z >> np.uint64(27))) * _M2
    return z ^ (z >> np.uint64(31))


def splitmix_raw(seed: int, counter: int, n: int) -> np.ndarray:
    idx = np.arange(1, n + 1, dtype=np.uint64) + np.uint64(counter)
    with np.errstate(over="ignore"):
        return _mix(np.uint64(seed) + idx * GOLDEN)


def splitmix_uniform(seed: int, counter: int, n: int) -> np.ndarray:
    return (splitmix_raw(seed, counter, n) >> np.uint64(11)).astype(np.float64) * TWO_M53


def chain_batch(cdf, nxt, last_pos, init_cdf, states, seed, counter, m, n):
    cdf = np.asarray(cdf)
    S, b = states.shape
    head = min(b, n)
    per = 1 + n - head
    u = splitmix_uniform(seed, counter, m * per).reshape(m, per)
    out = np.empty((m, n), dtype=np.int64)
    hit = u[:, 0][:, None] < init_cdf[None, :]
    s = np.where(hit.any(axis=1), hit.argmax(axis=1), S - 1)
    out[:, :head] = states[s, :head]
    for t in range(head, n):
        below = u[:, t - head + 1][:, None] < cdf[s]
        a = np.where(below.any(axis=1), below.argmax(axis=1), last_pos[s])
        out[:, t] = a
        s = nxt[s, a]
    return out


def _log_spectral(p0, p1, p2, p3):
    t = p0 * p0 + p1 * p1 + p2 * p2 + p3 * p3
    det = np.abs(p0 * p3 - p1 * p2)
    disc = np.maximum((t - 2.0 * det) * (t + 2.0 * det), 0.0)
    return 0.5 * np.log(0.5 * (t + np.sqrt(disc)))


def cocycle_lognorms(mats, words, checkpoints):
    mats = np.asarray(mats, dtype=float)
    words = np.asarray(words, dtype=np.int64)
    checkpoints = np.asarray(checkpoints, dtype=np.int64)
    m = words.shape[0]
    out = np.empty((m, checkpoints.size))
    p0 = np.ones(m)
    p1 = np.zeros(m)
    p2 = np.zeros(m)
    p3 = np.ones(m)
    acc = np.zeros(m)
    c = 0
    while c < checkpoints.size and checkpoints[c] == 0:
        out[:, c] = 0.0
        c += 1
    a00, a01, a10, a11 = mats[:, 0, 0], mats[:, 0, 1], mats[:, 1, 0], mats[:, 1, 1]
    for t in range(words.shape[1]):
        if c >= checkpoints.size:
            break
        x = words[:, t]
        r0 = a00[x] * p0 + a01[x] * p2
        r1 = a00[x] * p1 + a01[x] * p3
        r2 = a10[x] * p0 + a11[x] * p2
        r3 = a10[x] * p1 + a11[x] * p3
        p0, p1, p2, p3 = r0, r1, r2, r3
        if (t + 1) % RENORM_EVERY == 0:
            sc = np.maximum(np.maximum(np.abs(p0), np.abs(p1)), np.maximum(np.abs(p2), np.abs(p3)))
            p0, p1, p2, p3 = p0 / sc, p1 / sc, p2 / sc, p3 / sc
            acc = acc + np.log(sc)
        while c < checkpoints.size and checkpoints[c] == t + 1:
            out[:, c] = acc + _log_spectral(p0, p1, p2, p3)
            c += 1
    return out
