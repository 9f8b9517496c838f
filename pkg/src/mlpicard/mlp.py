"""Full-history recursive multi-level Picard evaluators.

Two schemes are implemented.

Heat mode (zero drift, identity diffusion, gradient-free nonlinearity)::

    U_0 = 0
    U_n(t, x) = M^-n sum_i g(x + W^(0,-i)_T - W^(0,-i)_t)
              + sum_{l<n} sum_s q(s) M^-(n-l) sum_i
                    [F(U_l^(l,i,s)) - 1{l>0} F(U_{l-1}^(-l,i,s))](s, x + W^(l,i)_s - W^(l,i)_t)

where ``q`` is the Q-point Gauss-Legendre rule on ``[t, T]``.

General mode returns the value together with the gradient part
``sigma^T grad u`` and uses the state/weight processes of :mod:`mlpicard.sde`,
a control variate ``g(x)`` and sample counts ``floor(rho^j)``.

Every random draw is addressed by the index path ``(theta, ...)`` through
:mod:`mlpicard.randomness`, so the recursion may run over a batch of
independent keys at once: all arrays carry a leading batch axis and all
realizations in a batch share the evaluation time.  The value of each
realization depends only on its own key.
"""
from __future__ import annotations

import math
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Optional

import numpy as np

from . import randomness as rnd
from .errors import ResourceLimitError
from .problems import NamedProblem
from .quadrature import MAX_ORDER, gauss_legendre
from .sde import euler_path, exact_brownian_path, steps_for_level

MAX_DEPTH = 10
MAX_SAMPLES = 10**8
_CHUNK_BUDGET = 2_000_000


@dataclass(frozen=True)
class MlpParams:
    """Heat-mode parameters: iteration depth ``n``, Monte Carlo base ``M``, quadrature order ``Q``."""

    n: int
    M: int
    Q: int

    def check(self):
        n, M, Q = self.n, self.M, self.Q
        if n < 0 or M < 1 or Q < 1:
            raise ValueError(f"need n >= 0 and M, Q >= 1 (got n={n}, M={M}, Q={Q})")
        if n > MAX_DEPTH:
            raise ResourceLimitError(f"depth n={n} exceeds the limit {MAX_DEPTH}")
        if M**n > MAX_SAMPLES:
            raise ResourceLimitError(f"M^n = {M**n} exceeds the limit {MAX_SAMPLES}")
        if Q > MAX_ORDER:
            raise ResourceLimitError(f"quadrature order Q={Q} exceeds the limit {MAX_ORDER}")

    @property
    def within_rate_regime(self):
        """Whether ``1 <= n <= 2Q - 1``, the range covered by the error bound."""
        return 1 <= self.n <= 2 * self.Q - 1


@dataclass(frozen=True)
class GeneralParams:
    """General-mode parameters: level ``k`` and accuracy base ``rho``.

    Level ``j`` uses ``floor(rho^j)`` samples; every quadrature rule has
    ``floor(rho)`` Gauss-Legendre nodes.
    """

    k: int
    rho: float

    def samples(self, j):
        return int(math.floor(self.rho**j))

    @property
    def nodes(self):
        return int(math.floor(self.rho))

    def check(self):
        if self.k < 0:
            raise ValueError("k must be non-negative")
        if self.rho < 1:
            raise ValueError("rho must be at least 1")
        if self.k > MAX_DEPTH:
            raise ResourceLimitError(f"level k={self.k} exceeds the limit {MAX_DEPTH}")
        if self.samples(self.k) > MAX_SAMPLES:
            raise ResourceLimitError(f"rho^k exceeds the limit {MAX_SAMPLES}")
        if self.nodes > MAX_ORDER:
            raise ResourceLimitError(f"floor(rho)={self.nodes} exceeds the limit {MAX_ORDER}")


@dataclass
class EvalReport:
    """One approximation value (and gradient part in general mode) with its realized cost."""

    value: float
    gradient: Optional[np.ndarray]
    normals: int
    evaluations: int
    wall_time: float


def _unwrap(problem):
    return problem.problem if isinstance(problem, NamedProblem) else problem


def _keys_for(base, component, m):
    # keys for (theta, component, i), i = 1..m, key-major
    return rnd.fork_grid(rnd.fork_many(base, component), np.arange(1, m + 1))


def _heat(problem, n, M, Q, t, X, keys, ledger):
    B, d = X.shape
    if n == 0:
        return np.zeros(B)
    T = problem.T
    m = M**n
    gkeys = rnd.fork_grid(rnd.fork_many(keys, 0), -np.arange(1, m + 1))
    Xrep = np.repeat(X, m, axis=0)
    inc = rnd.increments_many(gkeys, 0, t, T, d, ledger)
    gv = np.asarray(problem.g(Xrep + inc), dtype=float)
    ledger.evaluations += gv.size
    out = gv.reshape(B, m).sum(axis=1) / m
    rule = gauss_legendre(Q, t, T)
    if rule.is_empty:
        return out
    for l in range(n):
        m = M ** (n - l)
        pkeys = _keys_for(keys, l, m)
        nkeys = _keys_for(keys, -l, m) if l >= 1 else None
        Xrep = np.repeat(X, m, axis=0)
        W = np.zeros_like(Xrep)
        prev = t
        for j, (s, w) in enumerate(zip(rule.nodes, rule.weights)):
            W = W + rnd.increments_many(pkeys, j, prev, s, d, ledger)
            prev = s
            Y = Xrep + W
            u = _heat(problem, l, M, Q, s, Y, rnd.fork_many(pkeys, j), ledger)
            F = np.asarray(problem.f(s, Y, u), dtype=float)
            ledger.evaluations += F.size
            if l >= 1:
                u_prev = _heat(problem, l - 1, M, Q, s, Y, rnd.fork_many(nkeys, j), ledger)
                F2 = np.asarray(problem.f(s, Y, u_prev), dtype=float)
                ledger.evaluations += F2.size
                F = F - F2
            out = out + w * (F.reshape(B, m).sum(axis=1) / m)
    return out


def _paths(problem, keys, s, X, times, level, rho, ledger):
    coeffs = problem.coefficients
    if coeffs is None:
        return exact_brownian_path(keys, s, X, times, ledger)
    return euler_path(coeffs, keys, s, X, times, steps_for_level(level, rho), ledger)


def _apply_f(problem, t, Y, U):
    if problem.gradient_dependent:
        return np.asarray(problem.f(t, Y, U[:, 0], U[:, 1:]), dtype=float)
    return np.asarray(problem.f(t, Y, U[:, 0]), dtype=float)


def _general(problem, params, k, s, X, keys, ledger):
    B, d = X.shape
    if k == 0:
        return np.zeros((B, d + 1))
    T = problem.T
    rho = params.rho
    m = params.samples(k)
    gkeys = rnd.fork_grid(rnd.fork_many(keys, 0), -np.arange(1, m + 1))
    Xrep = np.repeat(X, m, axis=0)
    (XT, IT), = _paths(problem, gkeys, s, Xrep, [T], k, rho, ledger)
    gx = np.asarray(problem.g(X), dtype=float)
    gX = np.asarray(problem.g(XT), dtype=float)
    ledger.evaluations += gx.size + gX.size
    diff = gX - np.repeat(gx, m)
    out = (diff[:, None] * IT).reshape(B, m, d + 1).sum(axis=1) / m
    out[:, 0] += gx
    rule = gauss_legendre(params.nodes, s, T)
    if rule.is_empty:
        return out
    for l in range(k):
        m = params.samples(k - l)
        pkeys = _keys_for(keys, l, m)
        nkeys = _keys_for(keys, -l, m) if l >= 1 else None
        Xrep = np.repeat(X, m, axis=0)
        path = _paths(problem, pkeys, s, Xrep, rule.nodes, k - l, rho, ledger)
        for j, ((Y, I), t, w) in enumerate(zip(path, rule.nodes, rule.weights)):
            U = _general(problem, params, l, t, Y, rnd.fork_many(pkeys, j), ledger)
            F = _apply_f(problem, t, Y, U)
            ledger.evaluations += F.size
            if l >= 1:
                U2 = _general(problem, params, l - 1, t, Y, rnd.fork_many(nkeys, j), ledger)
                F2 = _apply_f(problem, t, Y, U2)
                ledger.evaluations += F2.size
                F = F - F2
            out = out + w * ((F[:, None] * I).reshape(B, m, d + 1).sum(axis=1) / m)
    return out


def _prepare(problem, t, X):
    X = np.atleast_2d(np.asarray(X, dtype=float))
    if X.shape[1] != problem.d:
        raise ValueError(f"points must have dimension {problem.d}, got {X.shape[1]}")
    if not 0.0 <= t <= problem.T:
        raise ValueError(f"time {t} outside [0, {problem.T}]")
    return X


def evaluate_batch(problem, params, t, X, keys, ledger=None):
    """Heat-mode values at points ``X`` (shape ``(B, d)``) for keys ``(B, 2)``.

    Returns the values and the ledger; ledger counts are totals over the batch.
    """
    problem = _unwrap(problem)
    params.check()
    X = _prepare(problem, t, X)
    keys = rnd.key_array(keys)
    if keys.shape[0] != X.shape[0]:
        X = np.broadcast_to(X, (keys.shape[0], problem.d))
    ledger = ledger if ledger is not None else rnd.CostLedger()
    values = _heat(problem, params.n, params.M, params.Q, float(t), np.ascontiguousarray(X), keys, ledger)
    return values, ledger


def evaluate_general_batch(problem, params, s, X, keys, ledger=None):
    """General-mode ``(value, gradient part)`` rows, shape ``(B, 1 + d)``."""
    problem = _unwrap(problem)
    params.check()
    X = _prepare(problem, s, X)
    keys = rnd.key_array(keys)
    if keys.shape[0] != X.shape[0]:
        X = np.broadcast_to(X, (keys.shape[0], problem.d))
    ledger = ledger if ledger is not None else rnd.CostLedger()
    rows = _general(problem, params, params.k, float(s), np.ascontiguousarray(X), keys, ledger)
    return rows, ledger


def mlp_evaluate(problem, params: MlpParams, t, x, key) -> EvalReport:
    """One realization of the heat-mode approximation at ``(t, x)``."""
    start = time.perf_counter()
    values, ledger = evaluate_batch(problem, params, t, np.asarray(x, dtype=float)[None, :], key)
    return EvalReport(float(values[0]), None, ledger.normals, ledger.evaluations,
                      time.perf_counter() - start)


def mlp_evaluate_general(problem, params: GeneralParams, s, x, key) -> EvalReport:
    """One realization of the general scheme; ``gradient`` holds the ``sigma^T grad u`` part."""
    start = time.perf_counter()
    rows, ledger = evaluate_general_batch(problem, params, s, np.asarray(x, dtype=float)[None, :], key)
    return EvalReport(float(rows[0, 0]), rows[0, 1:].copy(), ledger.normals, ledger.evaluations,
                      time.perf_counter() - start)


@dataclass
class Estimate:
    """Mean and sample standard deviation over independent repetitions."""

    mean: float
    std: float
    values: np.ndarray
    report: EvalReport
    gradient_mean: Optional[np.ndarray] = None
    gradients: Optional[np.ndarray] = None

    @property
    def stderr(self):
        return self.std / math.sqrt(len(self.values))


def repetition_keys(root, R):
    """Keys ``fork(root, r)`` for ``r = 0..R-1``, shape ``(R, 2)``."""
    return rnd.fork_grid(rnd.key_array(root), np.arange(R))


def _chunk_size(per_rep, R):
    return max(1, min(R, _CHUNK_BUDGET // max(per_rep, 1)))


def mlp_estimate(problem, params, t, x, root, R, threads=1, general=False) -> Estimate:
    """Average ``R`` independent realizations driven by ``fork(root, r)``.

    Repetitions are evaluated in chunks, optionally on a thread pool.  Results
    are gathered and reduced in repetition order, so the output is bitwise
    independent of ``threads``.
    """
    if R < 1:
        raise ValueError("need at least one repetition")
    inner = _unwrap(problem)
    params.check()
    start = time.perf_counter()
    keys = repetition_keys(root, R)
    x = np.asarray(x, dtype=float)
    if general:
        per_rep = params.samples(params.k) * (inner.d + 1)
    else:
        per_rep = params.M**params.n * inner.d
    size = _chunk_size(per_rep, R)
    chunks = [keys[i:i + size] for i in range(0, R, size)]

    def run(chunk):
        X = np.broadcast_to(x, (chunk.shape[0], inner.d))
        if general:
            return evaluate_general_batch(inner, params, t, X, chunk)
        return evaluate_batch(inner, params, t, X, chunk)

    if threads > 1 and len(chunks) > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            results = list(pool.map(run, chunks))
    else:
        results = [run(c) for c in chunks]
    ledger = rnd.CostLedger()
    for _, led in results:
        ledger.add(led)
    if general:
        rows = np.concatenate([r for r, _ in results], axis=0)
        values = rows[:, 0].copy()
        grads = rows[:, 1:].copy()
    else:
        values = np.concatenate([r for r, _ in results])
        grads = None
    mean = float(np.mean(values))
    std = float(np.std(values, ddof=1)) if R > 1 else 0.0
    report = EvalReport(mean, None if grads is None else grads.mean(axis=0), ledger.normals,
                        ledger.evaluations, time.perf_counter() - start)
    return Estimate(mean, std, values, report,
                    None if grads is None else grads.mean(axis=0), grads)
