"""Property suites behind ``mlpicard validate``.

Each suite returns a list of :class:`Check` rows.  Rows contain no timings
and every random input is drawn from the root seed, so two runs with the
same seed produce identical rows.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np

from . import randomness as rnd
from .cost import fe_bound, fe_model, rn_bound, rn_model
from .mlp import MlpParams, evaluate_batch
from .oracle import GridSpec, picard_oracle, picard_sequence
from .problems import get_problem, list_problems
from .quadrature import gauss_legendre, nested_measure
from .seminorm import SeminormSpec, centered_mean_field, seminorm_estimate

SUITES = ("quadrature", "cost", "seminorm", "oracle")


@dataclass(frozen=True)
class Check:
    suite: str
    name: str
    passed: bool
    detail: str


def _fmt(x):
    return f"{x:.6e}"


def quadrature_checks(seed=0):
    out = []
    for a, b in ((0.0, 1.0), (0.3, 2.7)):
        worst = 0.0
        for Q in range(1, 33):
            rule = gauss_legendre(Q, a, b)
            for k in range(2 * Q):
                exact = (b ** (k + 1) - a ** (k + 1)) / (k + 1)
                approx = math.fsum((rule.weights * rule.nodes**k).tolist())
                worst = max(worst, abs(approx - exact) / abs(exact))
        out.append(Check("quadrature", f"monomial exactness Q<=32 on [{a}, {b}]",
                         worst <= 1e-12, f"max rel err {_fmt(worst)}"))
    worst = 0.0
    for T in (1.0, 2.5):
        for Q in range(1, 9):
            for n in range(5):
                measure = nested_measure(n, Q, T)
                for k in range(max(0, 2 * Q - n)):
                    lhs = measure.integrate(lambda t: (T - t) ** k / math.factorial(k))
                    rhs = T ** (n + k) / math.factorial(n + k)
                    worst = max(worst, abs(lhs - rhs) / rhs)
    out.append(Check("quadrature", "nested measure moment identity Q<=8 n<=4",
                     worst <= 1e-10, f"max rel err {_fmt(worst)}"))
    positive = all(np.all(gauss_legendre(Q, 0.0, 1.0).weights > 0) for Q in range(1, 65))
    out.append(Check("quadrature", "positive weights Q<=64", positive, ""))
    empty = gauss_legendre(4, 0.5, 0.5).is_empty
    out.append(Check("quadrature", "degenerate interval gives empty rule", empty, ""))
    return out


def _ledger_grid():
    for d in (1, 10):
        for n in range(5):
            for M in range(1, 4):
                for Q in range(1, 4):
                    yield n, M, Q, d


def cost_checks(seed=0):
    out = []
    ok = True
    for N in range(1, 7):
        for d in (1, 10, 100):
            ok &= rn_model(N, N, N, d) <= rn_bound(N, d)
        ok &= fe_model(N, N, N) <= fe_bound(N)
    out.append(Check("cost", "diagonal bounds N<=6 d in {1,10,100}", bool(ok), ""))
    anchor = all(rn_model(1, 1, 1, d) == 2 * d for d in (1, 10, 100)) and fe_model(1, 1, 1) == 2
    out.append(Check("cost", "depth-one anchors rn=2d fe=2", anchor, ""))
    zero = rn_model(0, 3, 3, 5) == 0 and fe_model(0, 3, 3) == 0
    out.append(Check("cost", "depth-zero cost vanishes", zero, ""))
    monotone = all(rn_model(N, N, N, 1) < rn_model(N + 1, N + 1, N + 1, 1) for N in range(1, 8))
    out.append(Check("cost", "diagonal rn strictly increasing", monotone, ""))

    root = rnd.root_key(seed)
    worst = 0.0
    conform = True
    for n, M, Q, d in _ledger_grid():
        named = get_problem("manufactured", d=d)
        key = rnd.key_array(rnd.fork(root, (n, M, Q, d)))
        _, ledger = evaluate_batch(named, MlpParams(n, M, Q), 0.0, np.zeros((1, d)), key)
        conform &= ledger.normals <= rn_model(n, M, Q, d)
        conform &= ledger.evaluations <= fe_model(n, M, Q)
        if n:
            worst = max(worst, ledger.normals / rn_model(n, M, Q, d))
    out.append(Check("cost", "realized counts within model n<=4 M<=3 Q<=3",
                     bool(conform), f"max normals/model {_fmt(worst)}"))
    return out


def _const(s, z, keys):
    return np.ones(z.shape[0])


def _noise(s, z, keys):
    return np.cos(z[:, 0]) * rnd.normals_many(keys, 0, 1)[:, 0]


def _other(s, z, keys):
    return np.sin(s + z[:, 0]) + 0.5 * rnd.normals_many(keys, 1, 1)[:, 0]


def seminorm_checks(seed=0):
    out = []
    root = rnd.root_key(seed)
    probes = ((1.0, 1.0, (0.0,)), (0.6, 0.3, (0.5,)), (0.3, 0.0, (-1.0,)))
    worst = 0.0
    for k in range(4):
        spec = SeminormSpec(k, 2, 1.0, probes, 16)
        est = seminorm_estimate(_const, spec, root).value
        worst = max(worst, abs(est - 1.0 / math.factorial(k)) * math.factorial(k))
    out.append(Check("seminorm", "constants have norm T^k/k!", worst <= 1e-12,
                     f"max rel err {_fmt(worst)}"))

    spec = SeminormSpec(0, 2, 1.0, ((0.7, 0.7, (0.0,)),), 20000)
    est = seminorm_estimate(lambda s, z, k: z[:, 0], spec, root)
    gap = abs(est.value - math.sqrt(0.7))
    out.append(Check("seminorm", "RMS of W_s is sqrt(s)", gap <= 4 * est.band,
                     f"gap {_fmt(gap)} band {_fmt(est.band)}"))

    spec = SeminormSpec(2, 3, 1.0, probes, 4000)
    a = seminorm_estimate(_noise, spec, root)
    b = seminorm_estimate(_other, spec, root)
    both = seminorm_estimate(lambda s, z, k: _noise(s, z, k) + _other(s, z, k), spec, root)
    sub = both.value <= a.value + b.value + 3 * (a.band + b.band + both.band)
    out.append(Check("seminorm", "subadditivity", sub, ""))
    scaled = seminorm_estimate(lambda s, z, k: -2.5 * _noise(s, z, k), spec, root)
    homog = abs(scaled.value - 2.5 * a.value) <= 1e-12 * a.value
    out.append(Check("seminorm", "absolute homogeneity", homog, ""))
    smaller = seminorm_estimate(lambda s, z, k: 0.5 * np.sin(z[:, 0]) * _noise(s, z, k), spec, root)
    out.append(Check("seminorm", "monotonicity", smaller.value <= a.value + a.band + smaller.band, ""))
    lip = seminorm_estimate(lambda s, z, k: np.sin(_noise(s, z, k)) - np.sin(_other(s, z, k)),
                            spec, root)
    diff = seminorm_estimate(lambda s, z, k: _noise(s, z, k) - _other(s, z, k), spec, root)
    out.append(Check("seminorm", "Lipschitz transport with L=1",
                     lip.value <= diff.value + lip.band + diff.band, ""))

    spec = SeminormSpec(1, 3, 1.0, ((1.0, 0.5, (0.0,)), (0.5, 0.5, (1.0,))), 4000)
    base = seminorm_estimate(centered_mean_field(_noise, 1), spec, root).value
    ratios = []
    for m in (1, 4, 16):
        est = seminorm_estimate(centered_mean_field(_noise, m), spec, root).value
        ratios.append(est * math.sqrt(m) / base)
    ok = all(0.7 <= r <= 1.4 for r in ratios)
    out.append(Check("seminorm", "centered m-sample mean scales like m^-1/2", ok,
                     " ".join(_fmt(r) for r in ratios)))
    return out


ORACLE_BASE = GridSpec(n_t=32, n_x=256, hermite=32, Q=4)


def oracle_checks(seed=0):
    out = []
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", RuntimeWarning)
        for name in list_problems():
            named = get_problem(name, d=1)
            a = float(picard_oracle(named, 4, ORACLE_BASE)(0.0, [0.0])[0])
            b = float(picard_oracle(named, 4, ORACLE_BASE.refined())(0.0, [0.0])[0])
            out.append(Check("oracle", f"grid refinement stable on {name}", abs(a - b) <= 1e-4,
                             f"change {_fmt(abs(a - b))}"))
        named = get_problem("manufactured", d=1)
        seq = picard_sequence(named, 7, GridSpec(Q=4))
        sups = [float(np.max(np.abs(seq[k + 1].values - seq[k].values))) for k in range(7)]
        ratios = [sups[k + 1] / sups[k] for k in range(2, 6)]
        out.append(Check("oracle", "Picard differences contract", all(r < 1 for r in ratios),
                         " ".join(_fmt(r) for r in ratios)))
        err = abs(float(seq[7](0.0, [0.0])[0]) - float(named.solution(0.0, np.zeros(1))))
        out.append(Check("oracle", "manufactured iterate 7 matches solution", err <= 1e-4,
                         f"error {_fmt(err)}"))
        for name in ("quadratic", "constant", "exp-ode"):
            named = get_problem(name, d=1)
            u = float(picard_oracle(named, 8, GridSpec(Q=8))(0.0, [0.0])[0])
            err = abs(u - float(named.solution(0.0, np.zeros(1))))
            out.append(Check("oracle", f"closed form of {name}", err <= 1e-6, f"error {_fmt(err)}"))
    return out


_RUNNERS = {
    "quadrature": quadrature_checks,
    "cost": cost_checks,
    "seminorm": seminorm_checks,
    "oracle": oracle_checks,
}


def run_suite(name, seed=0):
    """Checks of suite ``name`` (or of every suite for ``"all"``)."""
    if name == "all":
        return [c for s in SUITES for c in _RUNNERS[s](seed)]
    try:
        runner = _RUNNERS[name]
    except KeyError:
        raise KeyError(f"unknown suite {name!r}; known: all, {', '.join(SUITES)}") from None
    return runner(seed)

