# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled hot loops: counter-based RNG, chain sampling, cocycle norms.

Every function here has a bit-identical twin in ``_kernels_py``.
"""
import numpy as np
cimport numpy as cnp
from libc.math cimport log, sqrt, fabs
from libc.stdint cimport uint64_t, int64_t

cnp.import_array()

cdef uint64_t GOLDEN = 0x9E3779B97F4A7C15ULL
cdef double TWO_M53 = 1.0 / 9007199254740992.0
cdef int RENORM_EVERY = 32


cdef inline uint64_t _mix(uint64_t z) noexcept nogil:
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL
    return z ^ (z >> 31)


cdef inline double _uniform(uint64_t seed, uint64_t index) noexcept nogil:
    # index is the 0-based absolute draw position in the stream
    return <double>(_mix(seed + (index + 1) * GOLDEN) >> 11) * TWO_M53


def splitmix_raw(uint64_t seed, uint64_t counter, Py_ssize_t n):
    out = np.empty(n, dtype=np.uint64)
    cdef uint64_t[::1] o = out
    cdef Py_ssize_t i
    with nogil:
        for i in range(n):
            o[i] = _mix(seed + (counter + i + 1) * GOLDEN)
    return out


def splitmix_uniform(uint64_t seed, uint64_t counter, Py_ssize_t n):
    out = np.empty(n, dtype=np.float64)
    cdef double[::1] o = out
    cdef Py_ssize_t i
    with nogil:
        for i in range(n):
            o[i] = _uniform(seed, counter + i)
    return out


cdef inline int64_t _pick(const double[:, ::1] cdf, const int64_t[::1] last_pos,
                          int64_t s, double u, Py_ssize_t q) noexcept nogil:
    cdef Py_ssize_t a
    for a in range(q):
        if u < cdf[s, a]:
            return a
    return last_pos[s]


def chain_batch(const double[:, ::1] cdf, const int64_t[:, ::1] nxt,
                const int64_t[::1] last_pos, const double[::1] init_cdf,
                const int64_t[:, ::1] states, uint64_t seed, uint64_t counter,
                Py_ssize_t m, Py_ssize_t n):
    """``m`` consecutive orbits of length ``n`` from one stream.

    Orbit ``j`` consumes ``1 + n - b`` draws (``b`` = block length): one for
    its initial block and one per further symbol.
    """
    cdef Py_ssize_t q = cdf.shape[1]
    cdef Py_ssize_t S = states.shape[0]
    cdef Py_ssize_t b = states.shape[1]
    cdef Py_ssize_t head = b if b < n else n
    cdef Py_ssize_t per = 1 + n - head
    out = np.empty((m, n), dtype=np.int64)
    cdef int64_t[:, ::1] o = out
    cdef Py_ssize_t j, t, k
    cdef int64_t s, a
    cdef uint64_t pos
    cdef double u
    with nogil:
        for j in range(m):
            pos = counter + <uint64_t>(j * per)
            u = _uniform(seed, pos)
            pos += 1
            s = S - 1
            for k in range(S):
                if u < init_cdf[k]:
                    s = k
                    break
            for t in range(head):
                o[j, t] = states[s, t]
            for t in range(head, n):
                u = _uniform(seed, pos)
                pos += 1
                a = _pick(cdf, last_pos, s, u, q)
                o[j, t] = a
                s = nxt[s, a]
    return out


cdef inline double _log_spectral(double a, double b, double c, double d) noexcept nogil:
    cdef double t = a * a + b * b + c * c + d * d
    cdef double det = fabs(a * d - b * c)
    cdef double disc = (t - 2.0 * det) * (t + 2.0 * det)
    if disc < 0.0:
        disc = 0.0
    return 0.5 * log(0.5 * (t + sqrt(disc)))


def cocycle_lognorms(const double[:, :, ::1] mats, const int64_t[:, ::1] words,
                     const int64_t[::1] checkpoints):
    """``log || A_{x_n} ... A_{x_1} ||`` at each checkpoint length, per word row."""
    cdef Py_ssize_t m = words.shape[0]
    cdef Py_ssize_t L = words.shape[1]
    cdef Py_ssize_t nc = checkpoints.shape[0]
    out = np.empty((m, nc), dtype=np.float64)
    cdef double[:, ::1] o = out
    cdef Py_ssize_t j, t, c
    cdef int64_t x
    cdef double p0, p1, p2, p3, r0, r1, r2, r3, acc, sc
    with nogil:
        for j in range(m):
            p0 = 1.0; p1 = 0.0; p2 = 0.0; p3 = 1.0
            acc = 0.0
            c = 0
            while c < nc and checkpoints[c] == 0:
                o[j, c] = 0.0
                c += 1
            for t in range(L):
                if c >= nc:
                    break
                x = words[j, t]
                r0 = mats[x, 0, 0] * p0 + mats[x, 0, 1] * p2
                r1 = mats[x, 0, 0] * p1 + mats[x, 0, 1] * p3
                r2 = mats[x, 1, 0] * p0 + mats[x, 1, 1] * p2
                r3 = mats[x, 1, 0] * p1 + mats[x, 1, 1] * p3
                p0 = r0; p1 = r1; p2 = r2; p3 = r3
                if (t + 1) % RENORM_EVERY == 0:
                    sc = fabs(p0)
                    if fabs(p1) > sc: sc = fabs(p1)
                    if fabs(p2) > sc: sc = fabs(p2)
                    if fabs(p3) > sc: sc = fabs(p3)
                    p0 = p0 / sc; p1 = p1 / sc; p2 = p2 / sc; p3 = p3 / sc
                    acc = acc + log(sc)
                while c < nc and checkpoints[c] == t + 1:
                    o[j, c] = acc + _log_spectral(p0, p1, p2, p3)
                    c += 1
    return out
