# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled Philox4x64-10 stream kernels (see ``_stream_py`` for the reference)."""
import numpy as np
cimport numpy as cnp
from libc.stdint cimport uint64_t, int64_t
from scipy.special.cython_special cimport ndtri

cnp.import_array()

cdef extern from *:
    """
    typedef unsigned __int128 mlp_u128;
    static inline void mlp_mulhilo(uint64_t a, uint64_t b, uint64_t *hi, uint64_t *lo) {
        mlp_u128 p = (mlp_u128)a * (mlp_u128)b;
        *hi = (uint64_t)(p >> 64);
        *lo = (uint64_t)p;
    }
    """
    void mlp_mulhilo(uint64_t a, uint64_t b, uint64_t *hi, uint64_t *lo) nogil

cdef uint64_t MUL0 = 0xD2E7470EE14C6C93ULL
cdef uint64_t MUL1 = 0xCA5A826395121157ULL
cdef uint64_t W0 = 0x9E3779B97F4A7C15ULL
cdef uint64_t W1 = 0xBB67AE8584CAA73BULL
cdef uint64_t FORK_TAG_C = 0x666F726BULL
cdef double TWO_M53 = 1.1102230246251565e-16

FORK_TAG = 0x666F726B


cdef inline void _block(uint64_t *c, uint64_t k0, uint64_t k1) nogil:
    cdef uint64_t hi0, lo0, hi1, lo1, t0, t2
    cdef int r
    for r in range(10):
        if r:
            k0 += W0
            k1 += W1
        mlp_mulhilo(MUL0, c[0], &hi0, &lo0)
        mlp_mulhilo(MUL1, c[2], &hi1, &lo1)
        t0 = hi1 ^ c[1] ^ k0
        t2 = hi0 ^ c[3] ^ k1
        c[0] = t0
        c[1] = lo1
        c[2] = t2
        c[3] = lo0


def philox4x64(const uint64_t[:, ::1] ctr, const uint64_t[:, ::1] key):
    cdef Py_ssize_t n = ctr.shape[0], i
    out = np.empty((n, 4), dtype=np.uint64)
    cdef uint64_t[:, ::1] o = out
    cdef uint64_t c[4]
    with nogil:
        for i in range(n):
            c[0] = ctr[i, 0]; c[1] = ctr[i, 1]; c[2] = ctr[i, 2]; c[3] = ctr[i, 3]
            _block(c, key[i, 0], key[i, 1])
            o[i, 0] = c[0]; o[i, 1] = c[1]; o[i, 2] = c[2]; o[i, 3] = c[3]
    return out


def fork_keys(const uint64_t[:, ::1] keys, comps):
    cdef const int64_t[::1] cv = np.ascontiguousarray(comps, dtype=np.int64)
    cdef Py_ssize_t n = keys.shape[0], i
    out = np.empty((n, 2), dtype=np.uint64)
    cdef uint64_t[:, ::1] o = out
    cdef uint64_t c[4]
    with nogil:
        for i in range(n):
            c[0] = <uint64_t>cv[i]; c[1] = 0; c[2] = 0; c[3] = FORK_TAG_C
            _block(c, keys[i, 0], keys[i, 1])
            o[i, 0] = c[0]; o[i, 1] = c[1]
    return out


cdef inline void _fill(const uint64_t[:, ::1] keys, uint64_t counter, Py_ssize_t d,
                       double[:, ::1] o, bint gaussian) nogil:
    cdef Py_ssize_t n = keys.shape[0], i, j, b, nblocks = (d + 3) // 4
    cdef uint64_t c[4]
    cdef double u
    for i in range(n):
        for b in range(nblocks):
            c[0] = counter; c[1] = <uint64_t>b; c[2] = 0; c[3] = 0
            _block(c, keys[i, 0], keys[i, 1])
            for j in range(4):
                if 4 * b + j >= d:
                    break
                u = (<double>(c[j] >> 11) + 0.5) * TWO_M53
                o[i, 4 * b + j] = ndtri(u) if gaussian else u


def uniforms(const uint64_t[:, ::1] keys, uint64_t counter, Py_ssize_t d):
    out = np.empty((keys.shape[0], d), dtype=np.float64)
    cdef double[:, ::1] o = out
    with nogil:
        _fill(keys, counter, d, o, 0)
    return out


def normals(const uint64_t[:, ::1] keys, uint64_t counter, Py_ssize_t d):
    out = np.empty((keys.shape[0], d), dtype=np.float64)
    cdef double[:, ::1] o = out
    with nogil:
        _fill(keys, counter, d, o, 1)
    return out
