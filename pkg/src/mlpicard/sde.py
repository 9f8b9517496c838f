"""State and weight processes for the gradient-aware scheme.

For a start point ``(s, x)`` and a later time ``t`` a sample consists of the
state ``X_t`` and the weight

    (1, sigma(s, x)^T / (t - s) * int_s^t [sigma(r, X_r)^-1 D_r]^T dW_r)

where ``D`` is the derivative of the flow with respect to ``x``.  Two
discretisations are provided: exact Brownian motion (zero drift, identity
diffusion) and Euler-Maruyama on the coupled ``(X, D)`` system.  At
``t == s`` the weight is ``(1, 0)`` (the 0/0 = 0 convention).

Batched functions take ``keys`` of shape ``(K, 2)`` and states ``(K, d)``.
Coefficient callables are vectorised over leading axes:

* ``mu(t, x) -> (..., d)``
* ``sigma(t, x) -> (..., d, d)``
* ``dmu(t, x) -> (..., d, d)`` with ``[a, b] = d mu_a / d x_b``
* ``dsigma(t, x) -> (..., d, d, d)`` with ``[a, b, j] = d sigma_aj / d x_b``
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from . import randomness as rnd
from .errors import SingularDiffusionError

_COND_LIMIT = 1.0 / np.finfo(float).eps


@dataclass(frozen=True)
class CoefficientSet:
    mu: Callable
    sigma: Callable
    dmu: Optional[Callable] = None
    dsigma: Optional[Callable] = None

    def require_jacobians(self):
        if self.dmu is None or self.dsigma is None:
            raise ValueError("Euler mode needs the Jacobians dmu and dsigma")


@dataclass(frozen=True)
class PathSample:
    state: np.ndarray
    weight: np.ndarray
    steps: int


def steps_for_level(level, rho):
    """Euler steps per segment for accuracy level ``level``: ``max(1, floor(rho^(level/2)))``."""
    return max(1, int(math.floor(rho ** (level / 2.0))))


def exact_brownian_path(keys, s, x, times, ledger=None):
    """States and weights at increasing ``times`` along one Brownian path per key.

    The increment into the ``j``-th time uses draw counter ``j``.
    """
    k, d = x.shape
    out = []
    w = np.zeros((k, d))
    prev = s
    for j, t in enumerate(times):
        w = w + rnd.increments_many(keys, j, prev, t, d, ledger)
        prev = t
        weight = np.empty((k, d + 1))
        weight[:, 0] = 1.0
        weight[:, 1:] = w / (t - s) if t > s else 0.0
        out.append((x + w, weight))
    return out


def _check_sigma(sig, step):
    if sig.shape[-1] == 1:
        # scalar case: condition number is 1 unless sigma vanishes
        bad = ~np.isfinite(sig) | (sig == 0.0)
        if np.any(bad):
            raise SingularDiffusionError(step, float("inf"))
        return
    cond = np.linalg.cond(sig)
    worst = float(np.max(cond)) if np.size(cond) else 0.0
    if not np.isfinite(worst) or worst > _COND_LIMIT:
        raise SingularDiffusionError(step, worst)


def _euler_step(coeffs, X, D, acc, r, dt, dW, step):
    k, d = X.shape
    sig = np.asarray(coeffs.sigma(r, X), dtype=float).reshape(k, d, d)
    _check_sigma(sig, step)
    mu = np.asarray(coeffs.mu(r, X), dtype=float).reshape(k, d)
    dmu = np.asarray(coeffs.dmu(r, X), dtype=float).reshape(k, d, d)
    dsig = np.asarray(coeffs.dsigma(r, X), dtype=float).reshape(k, d, d, d)
    # [sigma^-1 D]^T dW = D^T sigma^-T dW
    if d == 1:
        y = dW / sig[:, 0, :]
    else:
        y = np.linalg.solve(np.swapaxes(sig, -1, -2), dW[..., None])[..., 0]
    acc = acc + np.einsum("kba,kb->ka", D, y)
    X_new = X + mu * dt + np.einsum("kab,kb->ka", sig, dW)
    D = D + np.einsum("kab,kbc->kac", dmu, D) * dt + np.einsum("kabj,kbc,kj->kac", dsig, D, dW)
    return X_new, D, acc


def euler_path(coeffs: CoefficientSet, keys, s, x, times, steps, ledger=None):
    """Euler-Maruyama on ``(X, D)`` with ``steps`` sub-steps per segment between output times.

    Draw counters run consecutively over all sub-steps of the path.
    """
    coeffs.require_jacobians()
    k, d = x.shape
    X = np.array(x, dtype=float)
    D = np.broadcast_to(np.eye(d), (k, d, d)).copy()
    acc = np.zeros((k, d))
    sig0 = np.asarray(coeffs.sigma(s, X), dtype=float).reshape(k, d, d)
    _check_sigma(sig0, 0)
    out = []
    r = s
    counter = 0
    for t in times:
        if t > r:
            dt = (t - r) / steps
            for _ in range(steps):
                dW = rnd.increments_many(keys, counter, 0.0, dt, d, ledger)
                X, D, acc = _euler_step(coeffs, X, D, acc, r, dt, dW, counter)
                counter += 1
                r = r + dt
            r = t
        weight = np.empty((k, d + 1))
        weight[:, 0] = 1.0
        if t > s:
            weight[:, 1:] = np.einsum("kba,kb->ka", sig0, acc) / (t - s)
        else:
            weight[:, 1:] = 0.0
        out.append((X.copy(), weight))
    return out


def exact_brownian_sample(key, counter, s, x, t, ledger=None) -> PathSample:
    """State ``x + W_t - W_s`` and weight ``(1, (W_t - W_s) / (t - s))``."""
    x = np.asarray(x, dtype=float)
    d = x.shape[0]
    if t < s:
        raise ValueError("t must not precede s")
    if t == s:
        return PathSample(x.copy(), np.concatenate([[1.0], np.zeros(d)]), 0)
    inc = rnd.brownian_increment(key, counter, s, t, d, ledger).values
    weight = np.concatenate([[1.0], inc / (t - s)])
    return PathSample(x + inc, weight, 1)


def euler_sample(coeffs, key, counter, s, x, t, steps, ledger=None) -> PathSample:
    """Euler-Maruyama sample with ``steps`` steps; draws use counters ``counter, counter+1, ...``."""
    if steps < 1:
        raise ValueError("steps must be positive")
    if t < s:
        raise ValueError("t must not precede s")
    x = np.asarray(x, dtype=float)
    d = x.shape[0]
    if t == s:
        return PathSample(x.copy(), np.concatenate([[1.0], np.zeros(d)]), 0)
    coeffs.require_jacobians()
    X = x[None, :].copy()
    D = np.eye(d)[None]
    acc = np.zeros((1, d))
    sig0 = np.asarray(coeffs.sigma(s, X), dtype=float).reshape(1, d, d)
    _check_sigma(sig0, 0)
    dt = (t - s) / steps
    r = s
    keys = key.as_array()
    for i in range(steps):
        dW = rnd.increments_many(keys, counter + i, 0.0, dt, d, ledger)
        X, D, acc = _euler_step(coeffs, X, D, acc, r, dt, dW, i)
        r += dt
    weight = np.concatenate([[1.0], np.einsum("kba,kb->ka", sig0, acc)[0] / (t - s)])
    return PathSample(X[0], weight, steps)
