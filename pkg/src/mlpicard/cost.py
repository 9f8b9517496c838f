"""Exact operation counts for one realization of the heat-equation scheme.

``rn_model`` counts scalar standard normal draws and ``fe_model`` counts
evaluations of f and g.  Both take the recursive upper bounds with equality,
in exact integer arithmetic, so they serve as an envelope for the counts the
solver actually records.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache


def _check(n, M, Q):
    if n < 0 or M < 1 or Q < 1:
        raise ValueError(f"need n >= 0 and M, Q >= 1 (got n={n}, M={M}, Q={Q})")


@lru_cache(maxsize=None)
def _rn(n, M, Q, d):
    if n == 0:
        return 0
    total = d * M**n
    for l in range(n):
        inner = d + _rn(l, M, Q, d) + (_rn(l - 1, M, Q, d) if l >= 1 else 0)
        total += Q * M ** (n - l) * inner
    return total


@lru_cache(maxsize=None)
def _fe(n, M, Q):
    if n == 0:
        return 0
    total = M**n
    for l in range(n):
        ind = 1 if l >= 1 else 0
        inner = 1 + _fe(l, M, Q) + ind + (ind * _fe(l - 1, M, Q) if ind else 0)
        total += Q * M ** (n - l) * inner
    return total


def rn_model(n, M, Q, d):
    """Normal-variate count of one realization of ``U_{n,M,Q}(t, x)``, ``t < T``."""
    _check(n, M, Q)
    if d < 1:
        raise ValueError("dimension must be positive")
    return _rn(int(n), int(M), int(Q), int(d))


def fe_model(n, M, Q):
    """Evaluation count (f and g together) of one realization of ``U_{n,M,Q}``."""
    _check(n, M, Q)
    return _fe(int(n), int(M), int(Q))


def rn_bound(N, d):
    return 8 * d * N ** (2 * N)


def fe_bound(N):
    return 8 * N ** (2 * N)


def model_error(N, L=1.0, T=1.0, alpha=0.25):
    """Shape ``[(1 + 2L) e^T / N^(2 alpha)]^N`` of the diagonal error bound (constant omitted)."""
    return ((1.0 + 2.0 * L) * math.exp(T) / N ** (2.0 * alpha)) ** N


@dataclass(frozen=True)
class CostRow:
    N: int
    rn: int
    fe: int
    bound_rn: int
    bound_fe: int
    model_error: float


def complexity_table(N_max, d, L=1.0, T=1.0, alpha=0.25):
    """Rows for ``N = 1..N_max`` on the diagonal ``N = M = Q``.

    The ``model_error`` column is the bound's shape only, not a measurement.
    """
    if N_max < 1 or N_max > 8:
        raise ValueError("N_max must lie in [1, 8]")
    return [
        CostRow(N, rn_model(N, N, N, d), fe_model(N, N, N), rn_bound(N, d), fe_bound(N),
                model_error(N, L, T, alpha))
        for N in range(1, N_max + 1)
    ]
