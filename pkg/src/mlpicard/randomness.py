"""Index-addressed independent Brownian streams.

Every random quantity in the solver is addressed by a path of integers
(root seed, then the components of each index tuple).  The path is folded
into a 128-bit Philox key, one Philox block per component, and draws are
pure functions of ``(key, counter)``.  Distinct paths therefore give
independent streams and the same path always reproduces the same numbers,
regardless of evaluation order or thread schedule.
"""
from __future__ import annotations

import math
import os
from dataclasses import dataclass

import numpy as np

from ._backend import kernels
from .errors import InvalidIntervalError

SEED_ENV = "MLPICARD_SEED"
_U64 = (1 << 64) - 1


def _as_components(component):
    if isinstance(component, (tuple, list)):
        return tuple(int(c) for c in component)
    return (int(component),)


@dataclass(frozen=True)
class StreamKey:
    """Immutable stream address: the integer path and its folded Philox key."""

    words: tuple
    path: tuple = ()

    @classmethod
    def root(cls, seed=None):
        if seed is None:
            seed = int(os.environ.get(SEED_ENV, "0"))
        seed = int(seed)
        if not 0 <= seed <= _U64:
            raise ValueError(f"seed must be a 64-bit unsigned integer, got {seed}")
        return cls((seed, 0), (seed,))

    def fork(self, component):
        comps = _as_components(component)
        arr = self.as_array()
        for c in comps:
            arr = kernels.fork_keys(arr, np.array([c], dtype=np.int64))
        return StreamKey((int(arr[0, 0]), int(arr[0, 1])), self.path + comps)

    def as_array(self):
        return np.array([self.words], dtype=np.uint64)


def root_key(seed=None):
    """Root stream key; ``seed`` defaults to ``$MLPICARD_SEED`` or 0."""
    return StreamKey.root(seed)


def fork(key: StreamKey, component) -> StreamKey:
    """Child key for an integer component or tuple of components.

    Forking by a tuple is the same as forking by its elements one at a time.
    """
    return key.fork(component)


@dataclass
class CostLedger:
    """Running counts of scalar normal variates and f/g evaluations."""

    normals: int = 0
    evaluations: int = 0

    def add(self, other):
        self.normals += other.normals
        self.evaluations += other.evaluations


def gaussian_vector(key: StreamKey, counter: int, d: int, ledger: CostLedger | None = None):
    """``d`` iid standard normals, a pure function of ``(key, counter)``."""
    if d < 1:
        raise ValueError("dimension must be positive")
    z = kernels.normals(key.as_array(), int(counter), int(d))[0]
    if ledger is not None:
        ledger.normals += d
    return z


@dataclass(frozen=True)
class BrownianIncrement:
    values: np.ndarray
    from_time: float
    to_time: float


def brownian_increment(key, counter, t0, t1, d, ledger=None):
    """Increment ``W_{t1} - W_{t0}`` of the Brownian motion addressed by ``key``."""
    if t1 < t0:
        raise InvalidIntervalError(f"increment end {t1} precedes start {t0}")
    if t1 == t0:
        return BrownianIncrement(np.zeros(d), float(t0), float(t1))
    z = gaussian_vector(key, counter, d, ledger)
    return BrownianIncrement(math.sqrt(t1 - t0) * z, float(t0), float(t1))


# Batched forms used by the solver: ``keys`` is a C-contiguous (K, 2) uint64 array.

def key_array(keys):
    """Stack StreamKeys (or pass through an array) into a ``(K, 2)`` uint64 array."""
    if isinstance(keys, np.ndarray):
        return np.ascontiguousarray(keys, dtype=np.uint64).reshape(-1, 2)
    if isinstance(keys, StreamKey):
        return keys.as_array()
    return np.array([k.words for k in keys], dtype=np.uint64).reshape(-1, 2)


def fork_many(keys, component):
    """Fork every key by ``component`` (scalar, or one integer per key)."""
    comps = np.broadcast_to(np.asarray(component, dtype=np.int64), (keys.shape[0],))
    return kernels.fork_keys(keys, np.ascontiguousarray(comps))


def fork_grid(keys, components):
    """Fork each of ``K`` keys by each of ``C`` components: result ``(K * C, 2)``, key-major."""
    components = np.asarray(components, dtype=np.int64)
    rep = np.repeat(keys, len(components), axis=0)
    return kernels.fork_keys(rep, np.tile(components, keys.shape[0]))


def normals_many(keys, counter, d, ledger=None):
    z = kernels.normals(keys, int(counter), int(d))
    if ledger is not None:
        ledger.normals += z.size
    return z


def increments_many(keys, counter, t0, t1, d, ledger=None):
    """Brownian increments over ``[t0, t1]`` for each key, shape ``(K, d)``."""
    if t1 < t0:
        raise InvalidIntervalError(f"increment end {t1} precedes start {t0}")
    if t1 == t0:
        return np.zeros((keys.shape[0], d))
    return math.sqrt(t1 - t0) * normals_many(keys, counter, d, ledger)
