"""Gauss-Legendre rules, nested quadrature measures and Gauss-Hermite rules.

The Legendre roots are found by Newton iteration started from Chebyshev-angle
guesses; weights use the closed form ``2 / ((1 - x**2) * P_n'(x)**2)``.
Everything here is a pure function of its arguments and results are cached.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Callable

import numpy as np

from .errors import InvalidOrderError, ResourceLimitError

MAX_ORDER = 64
MAX_NESTED_DEPTH = 8
MAX_ATOMS = 10**7

_NEWTON_TOL = 1e-15
_NEWTON_MAXITER = 100


def _check_order(n):
    if not isinstance(n, (int, np.integer)) or n < 1 or n > MAX_ORDER:
        raise InvalidOrderError(f"quadrature order must be an integer in [1, {MAX_ORDER}], got {n!r}")


def legendre_eval(n, x):
    """Return ``(P_n(x), P_{n-1}(x))`` via the three-term recurrence."""
    x = np.asarray(x, dtype=float)
    p_prev = np.ones_like(x)
    p = x.copy()
    if n == 0:
        return p_prev, np.zeros_like(x)
    for k in range(1, n):
        p_prev, p = p, ((2 * k + 1) * x * p - k * p_prev) / (k + 1)
    return p, p_prev


@lru_cache(maxsize=None)
def _reference_rule(n):
    # Only the non-negative half is iterated; the other half is mirrored so
    # that symmetry about zero is exact.
    half = (n + 1) // 2
    i = np.arange(1, half + 1)
    x = np.cos(np.pi * (i - 0.25) / (n + 0.5))
    for _ in range(_NEWTON_MAXITER):
        p, p_prev = legendre_eval(n, x)
        dp = n * (x * p - p_prev) / (x * x - 1.0)
        step = p / dp
        x = x - step
        if np.max(np.abs(step)) <= _NEWTON_TOL:
            break
    p, p_prev = legendre_eval(n, x)
    dp = n * (x * p - p_prev) / (x * x - 1.0)
    w = 2.0 / ((1.0 - x * x) * dp * dp)
    if n % 2 == 1:
        x[-1] = 0.0
    # x is decreasing and positive (except a possible trailing 0)
    pos = x[::-1]
    wpos = w[::-1]
    if n % 2 == 1:
        nodes = np.concatenate([-pos[:0:-1], pos])
        weights = np.concatenate([wpos[:0:-1], wpos])
    else:
        nodes = np.concatenate([-pos[::-1], pos])
        weights = np.concatenate([wpos[::-1], wpos])
    nodes.flags.writeable = False
    weights.flags.writeable = False
    return nodes, weights


def legendre_roots(n):
    """Roots of the degree-``n`` Legendre polynomial in increasing order."""
    _check_order(n)
    return _reference_rule(int(n))[0].copy()


@dataclass(frozen=True, eq=False)
class QuadratureRule:
    """A finitely supported quadrature rule on ``[interval_start, interval_end]``."""

    interval_start: float
    interval_end: float
    nodes: np.ndarray
    weights: np.ndarray
    order: int

    def __len__(self):
        return len(self.nodes)

    @property
    def is_empty(self):
        return len(self.nodes) == 0


def gauss_legendre(Q, a, b):
    """Q-point Gauss-Legendre rule mapped affinely onto ``[a, b]``.

    A degenerate interval (``a == b``) gives the empty rule.
    """
    _check_order(Q)
    a = float(a)
    b = float(b)
    if b < a:
        raise ValueError(f"interval end {b} precedes start {a}")
    if a == b:
        empty = np.empty(0)
        empty.flags.writeable = False
        return QuadratureRule(a, b, empty, empty, int(Q))
    ref_x, ref_w = _reference_rule(int(Q))
    half = 0.5 * (b - a)
    nodes = (0.5 * (a + b)) + half * ref_x
    weights = half * ref_w
    nodes.flags.writeable = False
    weights.flags.writeable = False
    return QuadratureRule(a, b, nodes, weights, int(Q))


def integrate(rule: QuadratureRule, f: Callable[[float], float]) -> float:
    """Return ``sum_i w_i f(t_i)``; zero for the empty rule."""
    return math.fsum(float(w) * float(f(float(t))) for t, w in zip(rule.nodes, rule.weights))


@dataclass(frozen=True, eq=False)
class NestedMeasure:
    """Discrete measure on ``[0, T]`` obtained by composing Gauss-Legendre rules.

    ``times`` is sorted increasingly; ``masses[i]`` is the mass at ``times[i]``.
    """

    times: np.ndarray
    masses: np.ndarray
    depth: int
    order: int
    horizon: float

    @property
    def atoms(self):
        return list(zip(self.times.tolist(), self.masses.tolist()))

    def total_mass(self):
        return math.fsum(self.masses.tolist())

    def integrate(self, phi):
        """Return ``sum_t mass(t) * phi(t)`` with ``phi`` vectorised over times."""
        return math.fsum((self.masses * np.asarray(phi(self.times), dtype=float)).tolist())


def nested_measure(n, Q, T):
    """Build the depth-``n`` nested measure with ``Q``-point rules on ``[0, T]``.

    Depth 0 is the unit point mass at 0; depth ``n`` puts, for every atom
    ``(s, m)`` of depth ``n-1``, the mass ``m * w`` on each node of the
    Gauss-Legendre rule on ``[s, T]``.  Atoms at identical times are merged.
    """
    _check_order(Q)
    if n < 0 or n > MAX_NESTED_DEPTH:
        raise ResourceLimitError(f"nested depth must lie in [0, {MAX_NESTED_DEPTH}], got {n}")
    if T <= 0:
        raise ValueError("horizon must be positive")
    if Q ** n > MAX_ATOMS:
        raise ResourceLimitError(f"nested measure would need {Q ** n} atoms (limit {MAX_ATOMS})")
    T = float(T)
    times = np.zeros(1)
    masses = np.ones(1)
    ref_x, ref_w = _reference_rule(int(Q))
    for _ in range(n):
        half = 0.5 * (T - times)
        new_t = (0.5 * (times + T))[:, None] + half[:, None] * ref_x[None, :]
        new_m = (masses * half)[:, None] * ref_w[None, :]
        times, inverse = np.unique(new_t.ravel(), return_inverse=True)
        masses = np.bincount(inverse.ravel(), weights=new_m.ravel(), minlength=len(times))
    times.flags.writeable = False
    masses.flags.writeable = False
    return NestedMeasure(times, masses, int(n), int(Q), T)


@lru_cache(maxsize=None)
def _hermite_rule(n):
    # Newton on the orthonormal physicists' Hermite recurrence; initial guesses
    # are the classical asymptotic ones, largest root first.
    roots = np.zeros(n)
    weights = np.zeros(n)
    m = (n + 1) // 2
    pim4 = math.pi ** -0.25
    z = 0.0
    for i in range(m):
        if i == 0:
            z = math.sqrt(2 * n + 1) - 1.85575 * (2 * n + 1) ** (-1.0 / 6.0)
        elif i == 1:
            z -= 1.14 * n ** 0.426 / z
        elif i == 2:
            z = 1.86 * z - 0.86 * roots[0]
        elif i == 3:
            z = 1.91 * z - 0.91 * roots[1]
        else:
            z = 2.0 * z - roots[i - 2]
        pp = 1.0
        for _ in range(_NEWTON_MAXITER):
            p1, p2 = pim4, 0.0
            for j in range(1, n + 1):
                p3 = p2
                p2 = p1
                p1 = z * math.sqrt(2.0 / j) * p2 - math.sqrt((j - 1) / j) * p3
            pp = math.sqrt(2.0 * n) * p2
            z1 = z
            z = z1 - p1 / pp
            if abs(z - z1) <= 1e-14 * max(1.0, abs(z)):
                break
        roots[i] = z
        roots[n - 1 - i] = -z
        weights[i] = weights[n - 1 - i] = 2.0 / (pp * pp)
    if n % 2 == 1:
        roots[m - 1] = 0.0
    order = np.argsort(roots)
    nodes = math.sqrt(2.0) * roots[order]
    w = weights[order] / math.sqrt(math.pi)
    nodes.flags.writeable = False
    w.flags.writeable = False
    return nodes, w


def gauss_hermite(n):
    """Nodes and weights with ``sum_i w_i phi(z_i) ~ E[phi(Z)]`` for ``Z ~ N(0, 1)``."""
    if n < 1 or n > 256:
        raise InvalidOrderError(f"Hermite order must lie in [1, 256], got {n}")
    x, w = _hermite_rule(int(n))
    return x.copy(), w.copy()
