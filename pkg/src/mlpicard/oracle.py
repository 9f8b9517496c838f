"""Deterministic reference solutions for one-dimensional problems.

``picard_oracle`` iterates the time-discretised fixed-point map

    u_k(s, x) = E[g(x + W_{T-s})] + sum_t w_t E[f(t, x + W_{t-s}, u_{k-1}(t, x + W_{t-s}))]

on a uniform space-time grid, with Gauss-Legendre nodes ``t`` on ``[s, T]``
and Gaussian expectations by Gauss-Hermite quadrature.  Between grid points
``u_{k-1}`` is evaluated by cubic splines (time first, then space) with
constant extrapolation beyond the space grid.  No Monte Carlo noise enters.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np
from scipy.interpolate import CubicSpline

from .errors import UnknownProblemError
from .problems import NamedProblem, get_problem
from .quadrature import gauss_hermite, gauss_legendre

COVERAGE_TOL = 1e-12


@dataclass(frozen=True)
class GridSpec:
    n_t: int = 64
    n_x: int = 512
    x_max: float = 8.0
    hermite: int = 64
    Q: int = 4

    def refined(self):
        """Every resolution doubled (quadrature order kept)."""
        return GridSpec(2 * self.n_t, 2 * self.n_x, self.x_max, 2 * self.hermite, self.Q)


@dataclass(frozen=True, eq=False)
class GridFunction:
    times: np.ndarray
    xs: np.ndarray
    values: np.ndarray
    warnings: tuple = field(default_factory=tuple)

    @cached_property
    def _time_spline(self):
        return CubicSpline(self.times, self.values, axis=0)

    def at_time(self, t):
        """Values on the space grid at an arbitrary time ``t`` (cubic in time)."""
        if len(self.times) < 2:
            return self.values[0]
        return self._time_spline(t)

    def __call__(self, t, x):
        spline = CubicSpline(self.xs, self.at_time(t))
        x = np.clip(np.asarray(x, dtype=float), self.xs[0], self.xs[-1])
        return spline(x)


def _unwrap(problem):
    return problem.problem if isinstance(problem, NamedProblem) else problem


def _coverage_warnings(T, spec, z):
    out = []
    # Gaussian mass of the stencil from the origin that leaves the space grid
    _, w = gauss_hermite(spec.hermite)
    outside = float(np.sum(w[np.abs(math.sqrt(T) * z) > spec.x_max]))
    if outside > COVERAGE_TOL:
        msg = (f"space grid [-{spec.x_max}, {spec.x_max}] misses Gaussian mass {outside:.2e} "
               f"of the Hermite stencil at horizon {T}")
        warnings.warn(msg, RuntimeWarning, stacklevel=3)
        out.append(msg)
    return tuple(out)


def picard_sequence(problem, iterations, spec: GridSpec = GridSpec()):
    """All iterates ``u_0, ..., u_K`` as grid functions (``u_0 = 0``)."""
    problem = _unwrap(problem)
    if problem.d != 1:
        raise ValueError("the grid oracle is one-dimensional")
    if problem.gradient_dependent:
        raise ValueError("the grid oracle needs a gradient-free nonlinearity")
    if iterations < 0:
        raise ValueError("iterations must be non-negative")
    T = problem.T
    times = np.linspace(0.0, T, spec.n_t)
    xs = np.linspace(-spec.x_max, spec.x_max, spec.n_x)
    z, wz = gauss_hermite(spec.hermite)
    notes = _coverage_warnings(T, spec, z)

    # g-term is the same for every iterate
    g_term = np.empty((spec.n_t, spec.n_x))
    for a, s in enumerate(times):
        pts = xs[:, None] + math.sqrt(T - s) * z[None, :]
        g_term[a] = np.asarray(problem.g(pts[..., None]), dtype=float) @ wz

    u = GridFunction(times, xs, np.zeros((spec.n_t, spec.n_x)), notes)
    seq = [u]
    for _ in range(iterations):
        new = g_term.copy()
        for a, s in enumerate(times):
            rule = gauss_legendre(spec.Q, s, T)
            for t, w in zip(rule.nodes, rule.weights):
                pts = xs[:, None] + math.sqrt(t - s) * z[None, :]
                prev = u(t, pts)
                fv = np.asarray(problem.f(t, pts[..., None], prev), dtype=float)
                new[a] += w * (fv @ wz)
        u = GridFunction(times, xs, new, notes)
        seq.append(u)
    return seq


def picard_oracle(problem, iterations, spec: GridSpec = GridSpec()) -> GridFunction:
    """The ``iterations``-th Picard iterate on the grid described by ``spec``."""
    return picard_sequence(problem, iterations, spec)[-1]


def _heat_moment(t, x, T=1.0):
    x = np.asarray(x, dtype=float)
    return np.sum(x * x, axis=-1) + x.shape[-1] * (T - t)


def _exp_ode(t, x, T=1.0, lam=0.5):
    return np.full(np.shape(x)[:-1], math.exp(lam * (T - t)))


CLOSED_FORMS = {
    "heat-moment": _heat_moment,
    "exp-ode": _exp_ode,
}


def closed_form(name, t, x, **params):
    """Analytic solution ``u(t, x)`` of a registered linear or manufactured case.

    Besides the entries of ``CLOSED_FORMS``, any registered problem with a
    closed-form solution can be named (its dimension is taken from ``x``).
    """
    x = np.atleast_1d(np.asarray(x, dtype=float))
    if name in CLOSED_FORMS:
        return float(CLOSED_FORMS[name](t, x, **params))
    named = get_problem(name, d=x.shape[-1], **params)
    if named.solution is None:
        raise UnknownProblemError(f"problem {name!r} has no closed-form solution")
    return float(named.solution(t, x))
