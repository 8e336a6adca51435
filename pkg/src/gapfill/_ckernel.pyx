# cython: boundscheck=False, wraparound=False, cdivision=True
# cython: language_level=3
"""Compiled query kernel: candidate sweep for gap posteriors.

Mirrors _kernel_py.gap_scores; selected at import by gapfill.kernel.
"""

import numpy as np

BACKEND = "c"

ctypedef long long i64


cdef inline Py_ssize_t _find(const i64[::1] keys, i64 key) noexcept nogil:
    cdef Py_ssize_t lo = 0, hi = keys.shape[0], mid
    while lo < hi:
        mid = (lo + hi) >> 1
        if keys[mid] < key:
            lo = mid + 1
        else:
            hi = mid
    if lo < keys.shape[0] and keys[lo] == key:
        return lo
    return -1


cdef double _logp(
    i64 u, i64 v, i64 w, i64 V,
    const i64[::1] tri_keys, const double[::1] tri_logp,
    const i64[::1] tri_ctx_keys, const double[::1] tri_ctx_bow,
    const i64[::1] bi_keys, const double[::1] bi_logp,
    const i64[::1] bi_ctx_keys, const double[::1] bi_ctx_bow,
    const double[::1] uni_logp,
) noexcept nogil:
    cdef Py_ssize_t idx
    cdef double acc = 0.0
    idx = _find(tri_keys, (u * V + v) * V + w)
    if idx >= 0:
        return tri_logp[idx]
    idx = _find(tri_ctx_keys, u * V + v)
    if idx >= 0:
        acc = tri_ctx_bow[idx]
    idx = _find(bi_keys, v * V + w)
    if idx >= 0:
        return acc + bi_logp[idx]
    idx = _find(bi_ctx_keys, v)
    if idx >= 0:
        acc += bi_ctx_bow[idx]
    return acc + uni_logp[w]


def gap_scores(
    stream,
    Py_ssize_t kpos,
    cands,
    tri_keys,
    tri_logp,
    tri_ctx_keys,
    tri_ctx_bow,
    bi_keys,
    bi_logp,
    bi_ctx_keys,
    bi_ctx_bow,
    uni_logp,
    i64 V,
):
    cdef const i64[::1] s = np.ascontiguousarray(stream, dtype=np.int64)
    cdef const i64[::1] c = np.ascontiguousarray(cands, dtype=np.int64)
    cdef const i64[::1] k3 = tri_keys
    cdef const double[::1] p3 = tri_logp
    cdef const i64[::1] c3 = tri_ctx_keys
    cdef const double[::1] b3 = tri_ctx_bow
    cdef const i64[::1] k2 = bi_keys
    cdef const double[::1] p2 = bi_logp
    cdef const i64[::1] c2 = bi_ctx_keys
    cdef const double[::1] b2 = bi_ctx_bow
    cdef const double[::1] p1 = uni_logp

    out_arr = np.empty(c.shape[0], dtype=np.float64)
    cdef double[::1] out = out_arr
    cdef Py_ssize_t n = s.shape[0], i
    cdef i64 x
    cdef double acc

    with nogil:
        for i in range(c.shape[0]):
            x = c[i]
            acc = _logp(s[kpos - 2], s[kpos - 1], x, V,
                        k3, p3, c3, b3, k2, p2, c2, b2, p1)
            if kpos + 1 < n:
                acc += _logp(s[kpos - 1], x, s[kpos + 1], V,
                             k3, p3, c3, b3, k2, p2, c2, b2, p1)
            if kpos + 2 < n:
                acc += _logp(x, s[kpos + 1], s[kpos + 2], V,
                             k3, p3, c3, b3, k2, p2, c2, b2, p1)
            out[i] = acc
    return out_arr
