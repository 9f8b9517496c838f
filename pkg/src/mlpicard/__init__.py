"""Full-history recursive multi-level Picard approximations for semilinear heat PDEs."""
from ._backend import NAME as BACKEND
from .cost import complexity_table, fe_model, rn_model
from .errors import (InvalidIntervalError, InvalidOrderError, MlpicardError, ResourceLimitError,
                     SingularDiffusionError, UnknownProblemError)
from .mlp import (GeneralParams, MlpParams, mlp_estimate, mlp_evaluate, mlp_evaluate_general)
from .oracle import GridSpec, closed_form, picard_oracle
from .problems import NamedProblem, Problem, get_problem, list_problems
from .quadrature import gauss_legendre, nested_measure
from .randomness import fork, root_key
from .seminorm import SeminormSpec, estimate_seminorm, quadrature_defect

__version__ = "0.1.0"

__all__ = [
    "BACKEND", "GeneralParams", "GridSpec", "InvalidIntervalError", "InvalidOrderError",
    "MlpParams", "MlpicardError", "NamedProblem", "Problem", "ResourceLimitError",
    "SeminormSpec", "SingularDiffusionError", "UnknownProblemError", "closed_form",
    "complexity_table", "estimate_seminorm", "fe_model", "fork", "gauss_legendre",
    "get_problem", "list_problems", "mlp_estimate", "mlp_evaluate", "mlp_evaluate_general",
    "nested_measure", "picard_oracle", "quadrature_defect", "rn_model", "root_key",
]
