import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from mlpicard.errors import UnknownProblemError
from mlpicard.mlp import MlpParams, evaluate_batch, repetition_keys
from mlpicard.problems import (REGISTRY, allen_cahn, get_problem, linear_baseline, list_problems,
                               manufactured)


def test_registry_names():
    assert list_problems() == ["allen-cahn", "constant", "exp-ode", "manufactured", "quadratic"]
    with pytest.raises(UnknownProblemError):
        get_problem("burgers")
    with pytest.raises(UnknownProblemError):
        linear_baseline("manufactured")


def test_allen_cahn_terminal_values():
    g = allen_cahn(d=100).problem.g
    assert g(np.zeros(100)) == 1.0
    e1 = np.zeros(100)
    e1[0] = 1.0
    assert g(e1) == 0.5


@settings(max_examples=50, deadline=None)
@given(arrays(np.float64, 7, elements=st.floats(-1e3, 1e3)))
def test_allen_cahn_g_bounds(x):
    value = allen_cahn(d=7).problem.g(x)
    assert 0.0 < value <= 1.0


def test_allen_cahn_clip_lipschitz():
    named = allen_cahn(d=3)
    assert named.problem.L == 11.0
    assert named.problem.check_lipschitz(spread=5.0) <= 11.0 + 1e-9
    f = named.problem.f
    u = np.linspace(-1, 1, 11)
    np.testing.assert_array_equal(f(0.0, np.zeros(3), u), u - u**3)


def test_allen_cahn_benchmark_values_in_range(root):
    named = allen_cahn(d=100)
    keys = repetition_keys(root, 10)
    values, _ = evaluate_batch(named, MlpParams(3, 3, 3), 0.0, np.zeros((10, 100)), keys)
    assert np.all(np.isfinite(values)) and np.all(np.abs(values) <= 2.0)


@pytest.mark.parametrize("name", sorted(set(REGISTRY) - {"allen-cahn"}))
@pytest.mark.parametrize("d", [1, 4])
def test_closed_forms_solve_the_pde(name, d):
    named = get_problem(name, d=d)
    assert named.check_residual() <= 1e-8
    x = np.linspace(-1, 1, d)
    assert named.solution(named.problem.T, x) == pytest.approx(float(named.problem.g(x)), abs=1e-15)


def test_manufactured_lipschitz_and_shape():
    named = manufactured(d=5, beta=2.0)
    assert named.problem.L == 1.0
    assert named.problem.check_lipschitz() <= 1.0 + 1e-12
    x = np.ones(5)
    assert named.solution(0.3, x) == pytest.approx(np.sin(0.3 + 2.0 * 5 / np.sqrt(5)))


def test_linear_baselines():
    assert linear_baseline("quadratic", d=3).solution(0.5, np.ones(3)) == pytest.approx(3 + 1.5)
    assert linear_baseline("constant", d=2, c=4.0).solution(0.0, np.zeros(2)) == 4.0
    assert linear_baseline("exp-ode", lam=0.5).solution(0.0, np.zeros(1)) == pytest.approx(np.exp(0.5))


def test_invalid_problem_arguments():
    from mlpicard.problems import Problem

    with pytest.raises(ValueError):
        Problem(T=0.0, d=1, g=np.sum, f=lambda t, x, u: u)
    with pytest.raises(ValueError):
        Problem(T=1.0, d=0, g=np.sum, f=lambda t, x, u: u)
