"""Pure numpy implementation of the Philox4x64-10 stream kernels.

Bitwise identical to the compiled ``_stream_ext`` module; used when the
extension is unavailable or ``MLPICARD_PURE_PYTHON`` is set.
"""
import numpy as np
from scipy.special import ndtri

_M32 = np.uint64(0xFFFFFFFF)
_S32 = np.uint64(32)
_S11 = np.uint64(11)
_MUL0 = 0xD2E7470EE14C6C93
_MUL1 = 0xCA5A826395121157
_W0 = np.uint64(0x9E3779B97F4A7C15)
_W1 = np.uint64(0xBB67AE8584CAA73B)
_TWO_M53 = 2.0 ** -53

FORK_TAG = 0x666F726B  # "fork"; fourth counter word separating forks from draws


def _mulhilo(m, b):
    # 64x64 -> 128 bit product of a constant ``m`` with an array ``b``.
    m_lo = np.uint64(m & 0xFFFFFFFF)
    m_hi = np.uint64(m >> 32)
    b_lo = b & _M32
    b_hi = b >> _S32
    p0 = m_lo * b_lo
    p1 = m_lo * b_hi
    p2 = m_hi * b_lo
    p3 = m_hi * b_hi
    mid = (p0 >> _S32) + (p1 & _M32) + (p2 & _M32)
    hi = p3 + (p1 >> _S32) + (p2 >> _S32) + (mid >> _S32)
    lo = np.uint64(m) * b
    return hi, lo


def philox4x64(ctr, key):
    """Philox4x64 with 10 rounds.

    ``ctr`` has shape ``(K, 4)`` and ``key`` shape ``(K, 2)``, both uint64.
    Returns the ``(K, 4)`` output block.
    """
    with np.errstate(over="ignore"):
        c0, c1, c2, c3 = (ctr[:, i].copy() for i in range(4))
        k0 = key[:, 0].copy()
        k1 = key[:, 1].copy()
        for r in range(10):
            if r:
                k0 += _W0
                k1 += _W1
            hi0, lo0 = _mulhilo(_MUL0, c0)
            hi1, lo1 = _mulhilo(_MUL1, c2)
            c0, c1, c2, c3 = hi1 ^ c1 ^ k0, lo1, hi0 ^ c3 ^ k1, lo0
    return np.stack([c0, c1, c2, c3], axis=1)


def fork_keys(keys, comps):
    """Child keys: one Philox block keyed by the parent with the component in the counter."""
    n = keys.shape[0]
    ctr = np.zeros((n, 4), dtype=np.uint64)
    ctr[:, 0] = comps.astype(np.int64).view(np.uint64)
    ctr[:, 3] = FORK_TAG
    return np.ascontiguousarray(philox4x64(ctr, keys)[:, :2])


def uniforms(keys, counter, d):
    """``(K, d)`` uniforms on the open unit interval, deterministic in ``(key, counter)``."""
    n = keys.shape[0]
    nblocks = (d + 3) // 4
    ctr = np.zeros((n * nblocks, 4), dtype=np.uint64)
    ctr[:, 0] = np.uint64(counter)
    ctr[:, 1] = np.tile(np.arange(nblocks, dtype=np.uint64), n)
    words = philox4x64(ctr, np.repeat(keys, nblocks, axis=0))
    words = words.reshape(n, nblocks * 4)[:, :d]
    return ((words >> _S11).astype(np.float64) + 0.5) * _TWO_M53


def normals(keys, counter, d):
    """``(K, d)`` standard normals by inverse-CDF transform of :func:`uniforms`."""
    return ndtri(uniforms(keys, counter, d))
