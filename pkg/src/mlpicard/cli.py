"""Command-line front end.

Single evaluations print one JSON record; sweeps write CSV with a header
row.  Every record carries ``schema_version``.  Exit codes:

* 0 success
* 1 a validation or verification check failed
* 2 unknown problem or suite
* 3 resource limit exceeded
* 64 invalid flags
"""
from __future__ import annotations

import argparse
import csv
import json
import math
import os
import sys
import time
import warnings
from dataclasses import asdict, dataclass, field

import numpy as np

from .cost import complexity_table, fe_model, rn_model
from .errors import ResourceLimitError, UnknownProblemError
from .mlp import GeneralParams, MlpParams, mlp_estimate
from .oracle import GridSpec, picard_oracle
from .problems import get_problem, list_problems
from .randomness import SEED_ENV, root_key
from .seminorm import SeminormSpec, seminorm_estimate

SCHEMA_VERSION = 1
THREADS_ENV = "MLPICARD_THREADS"

EXIT_OK = 0
EXIT_FAILED = 1
EXIT_UNKNOWN = 2
EXIT_RESOURCE = 3
EXIT_USAGE = 64


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


@dataclass
class RunConfig:
    problem: str = "manufactured"
    d: int = 1
    mode: str = "heat"
    N: int = 2
    M: int | None = None
    Q: int | None = None
    k: int = 2
    rho: float = 2.0
    t: float = 0.0
    x: str = "zero"
    reps: int = 10
    seed: int = 0
    threads: int = 1
    deterministic: bool = False
    out: str | None = None
    params: dict = field(default_factory=dict)

    def to_json(self):
        return json.dumps(asdict(self), sort_keys=True)

    @classmethod
    def from_json(cls, text):
        return cls(**json.loads(text))

    def point(self):
        return parse_point(self.x, self.d)

    def heat_params(self):
        M = self.N if self.M is None else self.M
        Q = self.N if self.Q is None else self.Q
        return MlpParams(self.N, M, Q)

    def general_params(self):
        return GeneralParams(self.k, self.rho)


def parse_point(spec, d):
    """``zero``, ``radial:r`` (``x = r / sqrt(d) * (1, ..., 1)``) or a comma list of length ``d``."""
    spec = spec.strip()
    if spec == "zero":
        return np.zeros(d)
    if spec.startswith("radial:"):
        try:
            r = float(spec.split(":", 1)[1])
        except ValueError:
            raise UsageError(f"bad radial point {spec!r}") from None
        return np.full(d, r / math.sqrt(d))
    try:
        values = [float(v) for v in spec.split(",")]
    except ValueError:
        raise UsageError(f"bad point {spec!r}") from None
    if len(values) != d:
        raise UsageError(f"point has {len(values)} coordinates, dimension is {d}")
    return np.array(values)


def _version():
    from . import __version__

    return __version__


def _int_list(text):
    try:
        return [int(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}") from None


def _default_seed():
    return int(os.environ.get(SEED_ENV, "0"))


def _default_threads():
    env = os.environ.get(THREADS_ENV)
    if env:
        return int(env)
    return os.cpu_count() or 1


def _open_out(path):
    if path in (None, "-"):
        return sys.stdout, False
    return open(path, "w", encoding="utf-8", newline=""), True


def _emit_json(record, path):
    stream, close = _open_out(path)
    try:
        stream.write(json.dumps(record, sort_keys=True) + "\n")
    finally:
        if close:
            stream.close()


def _emit_csv(header, rows, path):
    stream, close = _open_out(path)
    try:
        writer = csv.writer(stream, lineterminator="\n")
        writer.writerow(list(header) + ["schema_version"])
        for row in rows:
            writer.writerow(list(row) + [SCHEMA_VERSION])
    finally:
        if close:
            stream.close()


def _config_from_args(args):
    return RunConfig(problem=args.problem, d=args.dim, mode=args.mode, N=args.N, M=args.M,
                     Q=args.Q, k=args.k, rho=args.rho, t=args.time, x=args.x, reps=args.reps,
                     seed=args.seed, threads=args.threads, deterministic=args.deterministic,
                     out=args.out)


LIMIT_ITERATIONS = 12


def _reference(named, t, x, params=None):
    """Reference value for a run at ``(t, x)``.

    With ``params`` in one dimension this is the grid-oracle Picard iterate
    with the same ``(n, Q)``, the quantity a heat-mode run estimates.
    Otherwise the closed form, or in one dimension a converged oracle
    iterate standing in for the exact solution.
    """
    one_d = named.problem.d == 1
    if params is not None and one_d:
        iterations, spec = params.n, GridSpec(Q=params.Q)
    elif named.solution is not None:
        return float(named.solution(t, x)), "closed-form"
    elif one_d:
        iterations, spec = LIMIT_ITERATIONS, GridSpec(Q=8)
    else:
        return None, None
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", RuntimeWarning)
        u = picard_oracle(named, iterations, spec)
    return float(u(t, x)[0]), "oracle"


def cmd_run(config: RunConfig):
    """Evaluate one configuration; returns ``(exit code, record)``."""
    named = get_problem(config.problem, d=config.d, **config.params)
    x = config.point()
    root = root_key(config.seed)
    start = time.perf_counter()
    if config.mode == "heat":
        params = config.heat_params()
        est = mlp_estimate(named, params, config.t, x, root, config.reps, config.threads)
        pdict = {"N": params.n, "M": params.M, "Q": params.Q}
        bounds = (rn_model(params.n, params.M, params.Q, config.d),
                  fe_model(params.n, params.M, params.Q))
    else:
        params = config.general_params()
        est = mlp_estimate(named, params, config.t, x, root, config.reps, config.threads,
                           general=True)
        pdict = {"k": params.k, "rho": params.rho}
        bounds = (None, None)
    wall_ms = (time.perf_counter() - start) * 1000.0
    record = {
        "problem": config.problem,
        "dim": config.d,
        "mode": config.mode,
        "params": pdict,
        "point": {"t": config.t, "x": x.tolist()},
        "mean": est.mean,
        "std": est.std,
        "reps": config.reps,
        "rn_used": est.report.normals // config.reps,
        "fe_used": est.report.evaluations // config.reps,
        "rn_bound": bounds[0],
        "fe_bound": bounds[1],
        "wall_ms": wall_ms,
        "seed": config.seed,
        "schema_version": SCHEMA_VERSION,
    }
    if est.gradient_mean is not None:
        record["gradient_mean"] = est.gradient_mean.tolist()
    return EXIT_OK, record


def cmd_convergence(config: RunConfig, n_list):
    """Diagonal ``N = M = Q`` sweep; returns ``(exit code, rows)``."""
    named = get_problem(config.problem, d=config.d, **config.params)
    x = config.point()
    root = root_key(config.seed)
    ref, _ = _reference(named, config.t, x)
    if ref is None:
        raise UsageError(f"problem {config.problem!r} has no reference solution in d={config.d}")
    rows = []
    for N in n_list:
        params = MlpParams(N, N, N)
        start = time.perf_counter()
        est = mlp_estimate(named, params, config.t, x, root, config.reps, config.threads)
        wall_ms = (time.perf_counter() - start) * 1000.0
        err = np.abs(est.values - ref)
        se = float(np.std(err, ddof=1)) / math.sqrt(err.size) if err.size > 1 else 0.0
        rows.append((N, float(np.mean(err)), se, rn_model(N, N, N, config.d), fe_model(N, N, N),
                     wall_ms))
    return EXIT_OK, rows


def cmd_validate(suite, seed=0, out=None):
    """Run a property suite; prints a table and optionally writes a results file."""
    from .validate import run_suite

    checks = run_suite(suite, seed)
    width = max(len(c.name) for c in checks)
    for c in checks:
        status = "PASS" if c.passed else "FAIL"
        print(f"{status}  {c.suite:<10}  {c.name:<{width}}  {c.detail}")
    if out is not None:
        _emit_csv(("suite", "check", "passed", "detail"),
                  [(c.suite, c.name, int(c.passed), c.detail) for c in checks], out)
    return EXIT_OK if all(c.passed for c in checks) else EXIT_FAILED


def _build_parser():
    common = _Parser(add_help=False)
    common.add_argument("--problem", default="manufactured")
    common.add_argument("--dim", type=int, default=1)
    common.add_argument("--mode", choices=("heat", "general"), default="heat")
    common.add_argument("-N", type=int, default=2)
    common.add_argument("-M", type=int, default=None)
    common.add_argument("-Q", type=int, default=None)
    common.add_argument("-k", type=int, default=2)
    common.add_argument("--rho", type=float, default=2.0)
    common.add_argument("--time", type=float, default=0.0)
    common.add_argument("--x", default="zero")
    common.add_argument("--reps", type=int, default=10)
    common.add_argument("--seed", type=int, default=None)
    common.add_argument("--threads", type=int, default=None)
    common.add_argument("--deterministic", action="store_true")
    common.add_argument("--out", default=None)

    parser = _Parser(prog="mlpicard", description="Multi-level Picard solver for semilinear heat PDEs")
    parser.add_argument("--version", action="version", version=_version())
    sub = parser.add_subparsers(dest="command", parser_class=_Parser, required=True)

    sub.add_parser("run", parents=[common], help="evaluate one configuration (JSON)")
    conv = sub.add_parser("convergence", parents=[common], help="diagonal N=M=Q sweep (CSV)")
    conv.add_argument("--n-list", type=_int_list, default=[1, 2, 3, 4])
    sub.add_parser("verify", parents=[common], help="compare a run with the reference solution")

    table = sub.add_parser("cost-table", help="cost model on the diagonal (CSV)")
    table.add_argument("--n-max", type=int, default=6)
    table.add_argument("--dim", type=int, default=1)
    table.add_argument("--lipschitz", type=float, default=1.0)
    table.add_argument("--horizon", type=float, default=1.0)
    table.add_argument("--alpha", type=float, default=0.25)
    table.add_argument("--out", default=None)

    val = sub.add_parser("validate", help="run property suites")
    val.add_argument("suite", nargs="?", default="all")
    val.add_argument("--seed", type=int, default=None)
    val.add_argument("--deterministic", action="store_true")
    val.add_argument("--out", default=None)

    semi = sub.add_parser("seminorm", parents=[common], help="semi-norm of the error field (CSV)")
    semi.add_argument("--depth", type=int, default=1)
    semi.add_argument("--inner", type=int, default=50)
    semi.add_argument("--probe-times", type=str, default="0.25,0.5,0.75")

    probs = sub.add_parser("problems", help="problem registry")
    probs.add_argument("action", choices=("list",))
    return parser


def _seminorm_rows(config, args):
    named = get_problem(config.problem, d=config.d, **config.params)
    if named.solution is None:
        raise UsageError(f"problem {config.problem!r} has no closed-form solution")
    params = config.heat_params()
    params.check()
    problem = named.problem
    try:
        times = [float(v) for v in args.probe_times.split(",")]
    except ValueError:
        raise UsageError(f"bad probe times {args.probe_times!r}") from None
    x = config.point()
    from .mlp import evaluate_batch

    def error_field(s, z, keys):
        values, _ = evaluate_batch(named, params, s, z, keys)
        return values - named.solution(s, z)

    for s in times:
        if not 0.0 <= s <= problem.T:
            raise UsageError(f"probe time {s} outside [0, {problem.T}]")
    probes = [(s, s, x) for s in times]
    key = root_key(config.seed)
    rows = []
    for p, probe in enumerate(probes):
        spec = SeminormSpec(args.depth, params.Q, problem.T, (probe,), args.inner)
        est = seminorm_estimate(error_field, spec, key)
        rows.append((p, args.depth, repr(est.value), repr(est.band)))
    spec = SeminormSpec(args.depth, params.Q, problem.T, tuple(probes), args.inner)
    est = seminorm_estimate(error_field, spec, key)
    rows.append(("all", args.depth, repr(est.value), repr(est.band)))
    return rows


def _dispatch(args):
    if args.command == "problems":
        for name in list_problems():
            named = get_problem(name)
            print(f"{name}\t{named.note}")
        return EXIT_OK
    if args.command == "cost-table":
        rows = [(r.N, r.rn, r.fe, r.bound_rn, r.bound_fe, repr(r.model_error))
                for r in complexity_table(args.n_max, args.dim, args.lipschitz, args.horizon,
                                          args.alpha)]
        _emit_csv(("N", "rn", "fe", "bound_rn", "bound_fe", "model_error"), rows, args.out)
        return EXIT_OK
    if args.command == "validate":
        seed = _default_seed() if args.seed is None else args.seed
        return cmd_validate(args.suite, seed, args.out)

    args.seed = _default_seed() if args.seed is None else args.seed
    args.threads = _default_threads() if args.threads is None else args.threads
    if args.threads < 1 or args.reps < 1 or args.dim < 1:
        raise UsageError("--threads, --reps and --dim must be positive")
    config = _config_from_args(args)
    if args.command == "run":
        code, record = cmd_run(config)
        _emit_json(record, config.out)
        return code
    if args.command == "verify":
        code, record = cmd_run(config)
        named = get_problem(config.problem, d=config.d)
        params = config.heat_params() if config.mode == "heat" else None
        ref, source = _reference(named, config.t, config.point(), params)
        if ref is None:
            raise UsageError(f"problem {config.problem!r} has no reference in d={config.d}")
        stderr = record["std"] / math.sqrt(config.reps)
        gap = abs(record["mean"] - ref)
        record.update(reference=ref, reference_source=source, abs_error=gap,
                      passed=bool(gap <= 4 * stderr) if stderr > 0 else bool(gap <= 1e-12))
        _emit_json(record, config.out)
        return EXIT_OK if record["passed"] else EXIT_FAILED
    if args.command == "convergence":
        code, rows = cmd_convergence(config, args.n_list)
        _emit_csv(("N", "mean_abs_error", "std_error", "rn_model", "fe_model", "wall_ms"), rows,
                  config.out)
        return code
    if args.command == "seminorm":
        rows = _seminorm_rows(config, args)
        _emit_csv(("probe", "depth", "estimate", "band"), rows, config.out)
        return EXIT_OK
    raise UsageError(f"unknown command {args.command!r}")


def main(argv=None):
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        return _dispatch(args)
    except UnknownProblemError as exc:
        print(f"mlpicard: {exc}", file=sys.stderr)
        return EXIT_UNKNOWN
    except KeyError as exc:
        print(f"mlpicard: {exc.args[0] if exc.args else exc}", file=sys.stderr)
        return EXIT_UNKNOWN
    except ResourceLimitError as exc:
        print(f"mlpicard: {exc}", file=sys.stderr)
        return EXIT_RESOURCE
    except (UsageError, ValueError) as exc:
        print(f"mlpicard: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
