"""Monte Carlo estimates of the nested-quadrature semi-norms.

For a random field ``V(s, z)`` the semi-norm of depth ``n`` and order ``Q`` is

    ||V||_{n,Q} = sum_t qbar(t) sup_{s >= t} sup_{u <= s} sup_z sqrt(E|V(s, z + W_u)|^2)

where ``qbar`` is the nested Gauss-Legendre measure on ``[0, T]``.  The
suprema are restricted to a finite set of probes ``(s, u, z)``, so the
estimate is a lower bound of the true value.  The expectation is over both
the Brownian motion ``W`` and the randomness of ``V``.

A field is a callable ``V(s, z, keys)`` where ``z`` has shape ``(m, d)`` and
``keys`` is an ``(m, 2)`` array of stream keys; it returns ``m`` values.
All fields estimated with the same root key see the same ``W`` samples and
the same field keys (common random numbers).
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from . import randomness as rnd
from .errors import InvalidOrderError
from .problems import NamedProblem
from .quadrature import MAX_NESTED_DEPTH, MAX_ORDER, gauss_legendre, nested_measure

REFERENCE_ORDER = 64


@dataclass(frozen=True)
class SeminormSpec:
    depth: int
    Q: int
    T: float
    probes: tuple
    inner_samples: int = 1000

    def __post_init__(self):
        if not self.probes:
            raise ValueError("the probe set must not be empty")
        if not 1 <= self.Q <= MAX_ORDER:
            raise InvalidOrderError(f"Q must lie in [1, {MAX_ORDER}], got {self.Q}")
        if not 0 <= self.depth <= MAX_NESTED_DEPTH:
            raise ValueError(f"depth must lie in [0, {MAX_NESTED_DEPTH}], got {self.depth}")
        if self.inner_samples < 2:
            raise ValueError("need at least two inner samples")
        probes = []
        for s, u, z in self.probes:
            if not 0.0 <= u <= s <= self.T:
                raise ValueError(f"probe needs 0 <= u <= s <= T, got s={s}, u={u}")
            probes.append((float(s), float(u), np.atleast_1d(np.asarray(z, dtype=float))))
        dims = {p[2].shape[0] for p in probes}
        if len(dims) != 1:
            raise ValueError("all probe points must have the same dimension")
        object.__setattr__(self, "probes", tuple(probes))

    @property
    def d(self):
        return self.probes[0][2].shape[0]


@dataclass(frozen=True)
class SeminormEstimate:
    """Estimate with a one-standard-error band and the per-probe RMS values."""

    value: float
    band: float
    probe_rms: np.ndarray
    probe_se: np.ndarray


def _probe_samples(V, probe, index, spec, key):
    s, u, z = probe
    m = spec.inner_samples
    keys = rnd.fork_grid(rnd.key_array(rnd.fork(key, index)), np.arange(m))
    shifts = rnd.increments_many(keys, 0, 0.0, u, spec.d)
    values = np.asarray(V(s, z[None, :] + shifts, rnd.fork_many(keys, 1)), dtype=float)
    return values.reshape(m)


def probe_rms(values):
    """Root mean square of samples with its delta-method standard error."""
    sq = np.square(np.asarray(values, dtype=float))
    ms = float(np.mean(sq))
    rms = math.sqrt(ms)
    se_ms = float(np.std(sq, ddof=1)) / math.sqrt(sq.size)
    se = se_ms / (2.0 * rms) if rms > 0 else 0.0
    return rms, se


def seminorm_estimate(V: Callable, spec: SeminormSpec, key) -> SeminormEstimate:
    """Semi-norm estimate with its band; see :func:`estimate_seminorm`."""
    rms = np.empty(len(spec.probes))
    se = np.empty(len(spec.probes))
    for p, probe in enumerate(spec.probes):
        rms[p], se[p] = probe_rms(_probe_samples(V, probe, p, spec, key))
    s_probe = np.array([p[0] for p in spec.probes])
    measure = nested_measure(spec.depth, spec.Q, spec.T)
    value = 0.0
    band = 0.0
    for t, mass in measure.atoms:
        # atoms past every probe contribute nothing (lower bound)
        eligible = np.flatnonzero(s_probe >= t)
        if eligible.size == 0:
            continue
        best = eligible[np.argmax(rms[eligible])]
        value += mass * float(rms[best])
        band += mass * float(se[best])
    return SeminormEstimate(value, band, rms, se)


def estimate_seminorm(V: Callable, spec: SeminormSpec, key) -> float:
    """Probe-restricted estimate of ``||V||_{depth,Q}``.

    For each atom ``t`` of the nested measure the largest probe RMS among
    probes with ``s >= t`` is weighted by the atom's mass.
    """
    return seminorm_estimate(V, spec, key).value


def centered_mean_field(field: Callable, m: int, mean: Callable | None = None) -> Callable:
    """Field ``(1/m) sum_i (field_i - mean)`` over ``m`` independent copies.

    Copy ``i`` is driven by the key forked with ``i``, so fields for
    different ``m`` share their leading copies.
    """

    def V(s, z, keys):
        total = np.zeros(z.shape[0])
        for i in range(m):
            total += np.asarray(field(s, z, rnd.fork_many(keys, i)), dtype=float)
        total /= m
        if mean is not None:
            total -= np.asarray(mean(s, z), dtype=float)
        return total

    return V


def _f_of_solution(named):
    problem = named.problem
    if problem.gradient_dependent:
        raise ValueError("quadrature defect needs a gradient-free nonlinearity")

    def F(t, x):
        return np.asarray(problem.f(t, x, named.solution(t, x)), dtype=float)

    return F


def quadrature_defect(named: NamedProblem, Q, probe, inner_samples=1000, key=None,
                      outer_samples=64):
    """L2 size of the conditional quadrature defect at probe ``(t, u, z)``.

    Given ``Y = z + W_u`` the defect is

        sum_s q(s) phi_Y(s) - int_t^T phi_Y(r) dr,   phi_Y(r) = E[F(r, Y + W'_{r-t})]

    with ``q`` the ``Q``-point rule on ``[t, T]`` and ``F = f(., ., u)`` at the
    closed-form solution.  ``phi_Y`` is estimated with ``inner_samples``
    standard normals ``xi`` shared across times, ``W'_{r-t} = sqrt(r-t) xi``;
    this keeps every marginal exact and makes each sample smooth in ``r``.
    The reference integral uses a high-order rule after ``r = t + (T-t) v^2``.
    Returns the root mean square over ``outer_samples`` draws of ``Y``.
    """
    if not isinstance(named, NamedProblem) or named.solution is None:
        raise ValueError("quadrature defect needs a problem with a closed-form solution")
    t, u, z = probe
    T = named.problem.T
    d = named.problem.d
    z = np.atleast_1d(np.asarray(z, dtype=float))
    if not 0.0 <= u <= t <= T:
        raise ValueError(f"probe needs 0 <= u <= t <= T, got t={t}, u={u}")
    if t == T:
        return 0.0
    key = rnd.root_key() if key is None else key
    F = _f_of_solution(named)
    keys = rnd.fork_grid(rnd.key_array(key), np.arange(outer_samples))
    Y = z[None, :] + rnd.increments_many(keys, 0, 0.0, u, d)
    inner_keys = rnd.fork_grid(rnd.fork_many(keys, 1), np.arange(inner_samples))
    xi = rnd.normals_many(inner_keys, 0, d).reshape(outer_samples, inner_samples, d)

    def phi_samples(r):
        pts = Y[:, None, :] + math.sqrt(r - t) * xi
        return F(r, pts)

    rule = gauss_legendre(Q, t, T)
    approx = sum(w * phi_samples(s) for s, w in zip(rule.nodes, rule.weights))
    ref = gauss_legendre(REFERENCE_ORDER, 0.0, 1.0)
    exact = sum(w * 2.0 * (T - t) * v * phi_samples(t + (T - t) * v * v)
                for v, w in zip(ref.nodes, ref.weights))
    conditional = np.mean(approx - exact, axis=1)
    return float(math.sqrt(np.mean(np.square(conditional))))
