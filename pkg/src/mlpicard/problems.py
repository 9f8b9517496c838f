"""Problem definitions and the named benchmark registry.

A problem is the terminal-value PDE

    du/dt + 1/2 Laplace(u) + f(t, x, u) = 0 on [0, T) x R^d,   u(T, .) = g,

optionally with general drift/diffusion coefficients for the gradient-aware
scheme.  ``g`` maps an array of points with trailing axis ``d`` to values;
``f`` maps ``(t, x, u)`` (or ``(t, x, u, z)`` when gradient dependent) to
values, vectorised over leading axes.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from .errors import UnknownProblemError
from .sde import CoefficientSet

RESIDUAL_TOL = 1e-8


@dataclass(frozen=True)
class Problem:
    T: float
    d: int
    g: Callable
    f: Callable
    L: float = 1.0
    coefficients: Optional[CoefficientSet] = None
    gradient_dependent: bool = False

    def __post_init__(self):
        if self.T <= 0:
            raise ValueError("horizon T must be positive")
        if self.d < 1:
            raise ValueError("dimension d must be positive")
        if self.L < 0:
            raise ValueError("Lipschitz constant must be non-negative")

    def check_lipschitz(self, n_probes=200, seed=0, spread=3.0):
        """Spot-check the declared Lipschitz constant in ``u``; returns the worst ratio seen."""
        rng = np.random.default_rng(seed)
        t = rng.uniform(0.0, self.T, n_probes)
        x = rng.normal(size=(n_probes, self.d))
        u1 = rng.uniform(-spread, spread, n_probes)
        u2 = rng.uniform(-spread, spread, n_probes)
        worst = 0.0
        for i in range(n_probes):
            args1 = (t[i], x[i], np.array(u1[i]))
            args2 = (t[i], x[i], np.array(u2[i]))
            if self.gradient_dependent:
                z = np.zeros(self.d)
                args1 += (z,)
                args2 += (z,)
            diff = abs(float(self.f(*args1)) - float(self.f(*args2)))
            worst = max(worst, diff / max(abs(u1[i] - u2[i]), 1e-300))
        return worst


@dataclass(frozen=True)
class NamedProblem:
    name: str
    problem: Problem
    solution: Optional[Callable] = None
    note: str = ""
    params: dict = field(default_factory=dict)

    def residual(self, t, x, h=2e-3):
        """Finite-difference PDE residual of the closed-form solution at ``(t, x)``.

        Fourth-order central differences in time and in every space direction.
        """
        if self.solution is None:
            raise ValueError(f"problem {self.name!r} has no closed-form solution")
        v = self.solution
        x = np.asarray(x, dtype=float)
        dt = (-v(t + 2 * h, x) + 8 * v(t + h, x) - 8 * v(t - h, x) + v(t - 2 * h, x)) / (12 * h)
        eye = np.eye(self.problem.d) * h
        xp1, xm1 = x + eye, x - eye
        xp2, xm2 = x + 2 * eye, x - 2 * eye
        lap = np.sum(-v(t, xp2) + 16 * v(t, xp1) - 30 * v(t, x) + 16 * v(t, xm1) - v(t, xm2)) / (12 * h * h)
        u = v(t, x)
        return float(dt + 0.5 * lap + self.problem.f(t, x, np.asarray(u)))

    def check_residual(self, n_probes=100, seed=12345):
        """Largest absolute residual over random probes in ``[0, T] x N(0, I)``."""
        rng = np.random.default_rng(seed)
        T, d = self.problem.T, self.problem.d
        worst = 0.0
        for _ in range(n_probes):
            t = rng.uniform(0.0, T)
            x = rng.normal(size=d)
            worst = max(worst, abs(self.residual(t, x)))
        return worst


def _verified(named):
    res = named.check_residual()
    if not res <= RESIDUAL_TOL:
        raise AssertionError(f"closed form of {named.name!r} fails the PDE residual check ({res:.3e})")
    return named


def allen_cahn(d=100, T=1.0, clip=2.0):
    """Allen-Cahn ``du/dt = 1/2 Laplace(u) + u - u^3`` run backwards in time.

    The initial condition ``(1 + max_i x_i^2)^-1`` becomes the terminal
    condition.  The cubic is evaluated at ``u`` clipped to ``[-clip, clip]``,
    which makes it globally Lipschitz with constant ``3 clip^2 - 1``.
    """

    def g(x):
        return 1.0 / (1.0 + np.max(np.square(x), axis=-1))

    def f(t, x, u):
        c = np.clip(u, -clip, clip)
        return c - c * c * c

    problem = Problem(T=float(T), d=int(d), g=g, f=f, L=3.0 * clip * clip - 1.0)
    return NamedProblem("allen-cahn", problem, None,
                        "time-reversed Allen-Cahn with a clipped double-well nonlinearity",
                        {"clip": clip})


def manufactured(d=1, beta=1.0, T=1.0):
    """Problem whose exact solution is ``v(t, x) = sin(t + beta * sum(x) / sqrt(d))``.

    ``f(t, x, u) = sin(u) - sin(v) + h`` with ``h = -dv/dt - 1/2 Laplace(v)``,
    so ``f`` is 1-Lipschitz in ``u`` and ``v`` solves the PDE exactly.
    """
    d = int(d)
    scale = beta / np.sqrt(d)

    def phase(t, x):
        return t + scale * np.sum(x, axis=-1)

    def v(t, x):
        return np.sin(phase(t, x))

    def g(x):
        return v(T, x)

    def f(t, x, u):
        ph = phase(t, x)
        return np.sin(u) - np.sin(np.sin(ph)) - np.cos(ph) + 0.5 * beta * beta * np.sin(ph)

    problem = Problem(T=float(T), d=d, g=g, f=f, L=1.0)
    return _verified(NamedProblem("manufactured", problem, v,
                                  "manufactured solution sin(t + beta * mean-direction)",
                                  {"beta": beta}))


def quadratic(d=1, T=1.0):
    def g(x):
        return np.sum(np.square(x), axis=-1)

    def f(t, x, u):
        return np.zeros_like(np.asarray(u, dtype=float))

    def sol(t, x):
        return np.sum(np.square(x), axis=-1) + d * (T - t)

    problem = Problem(T=float(T), d=int(d), g=g, f=f, L=0.0)
    return _verified(NamedProblem("quadratic", problem, sol, "heat equation with g = |x|^2"))


def constant(d=1, T=1.0, c=1.0):
    def g(x):
        return np.full(np.shape(x)[:-1], float(c))

    def f(t, x, u):
        return np.zeros_like(np.asarray(u, dtype=float))

    def sol(t, x):
        return np.full(np.shape(x)[:-1], float(c))

    problem = Problem(T=float(T), d=int(d), g=g, f=f, L=0.0)
    return _verified(NamedProblem("constant", problem, sol, "heat equation with constant g",
                                  {"c": c}))


def exp_ode(d=1, T=1.0, lam=0.5):
    """Linear reaction ``f = lam * u`` with ``g = 1``; the solution is ``exp(lam (T - t))``."""

    def g(x):
        return np.ones(np.shape(x)[:-1])

    def f(t, x, u):
        return lam * np.asarray(u, dtype=float)

    def sol(t, x):
        return np.full(np.shape(x)[:-1], np.exp(lam * (T - t)))

    problem = Problem(T=float(T), d=int(d), g=g, f=f, L=abs(lam))
    return _verified(NamedProblem("exp-ode", problem, sol, "space-constant linear reaction",
                                  {"lam": lam}))


LINEAR_BASELINES = {"quadratic": quadratic, "constant": constant, "exp-ode": exp_ode}

REGISTRY = {
    "allen-cahn": allen_cahn,
    "manufactured": manufactured,
    **LINEAR_BASELINES,
}


def linear_baseline(name, d=1, **kwargs):
    try:
        factory = LINEAR_BASELINES[name]
    except KeyError:
        raise UnknownProblemError(f"unknown linear baseline {name!r}") from None
    return factory(d=d, **kwargs)


def get_problem(name, d=1, **kwargs) -> NamedProblem:
    try:
        factory = REGISTRY[name]
    except KeyError:
        raise UnknownProblemError(
            f"unknown problem {name!r}; known: {', '.join(sorted(REGISTRY))}") from None
    return factory(d=d, **kwargs)


def list_problems():
    return sorted(REGISTRY)
