"""Compare the compiled stream kernels with the numpy fallback.

Usage: python benchmarks/bench_kernels.py [--repeat 5] [--csv out.csv]

Kernel rows time the two implementations in-process.  The ``mlp`` row runs a
full estimate in a subprocess per backend, selected with MLPICARD_PURE_PYTHON,
and checks that both backends return the same value.
"""
import argparse
import csv
import os
import subprocess
import sys
import timeit

import numpy as np

from mlpicard import _stream_py

try:
    from mlpicard import _stream_ext
except ImportError:
    _stream_ext = None

MLP_SNIPPET = (
    "import time, mlpicard as m;"
    "p = m.get_problem('manufactured', d=10);"
    "t = time.perf_counter();"
    "e = m.mlp_estimate(p, m.MlpParams(4, 4, 4), 0.0, [0.0] * 10, m.root_key(0), 20);"
    "print(repr(e.mean), time.perf_counter() - t)"
)


def kernel_cases(n):
    keys = np.random.default_rng(0).integers(0, 2**63, size=(n, 2)).astype(np.uint64)
    comps = np.arange(n, dtype=np.int64)
    return {
        "fork_keys": lambda mod: mod.fork_keys(keys, comps),
        "uniforms_d8": lambda mod: mod.uniforms(keys, 3, 8),
        "normals_d8": lambda mod: mod.normals(keys, 3, 8),
    }


def best_time(fn, repeat):
    return min(timeit.repeat(fn, number=1, repeat=repeat))


def run_mlp(pure):
    env = dict(os.environ, MLPICARD_PURE_PYTHON="1" if pure else "0")
    out = subprocess.run([sys.executable, "-c", MLP_SNIPPET], env=env, capture_output=True,
                         text=True, check=True).stdout.split()
    return float(out[0]), float(out[1])


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--size", type=int, default=200_000)
    parser.add_argument("--repeat", type=int, default=5)
    parser.add_argument("--csv", default=None)
    args = parser.parse_args()
    if _stream_ext is None:
        sys.exit("compiled extension not built; run `pip install -e . --no-build-isolation`")

    rows = []
    for name, call in kernel_cases(args.size).items():
        t_py = best_time(lambda: call(_stream_py), args.repeat)
        t_ext = best_time(lambda: call(_stream_ext), args.repeat)
        same = np.array_equal(call(_stream_py), call(_stream_ext))
        rows.append((name, args.size, t_py, t_ext, t_py / t_ext, same))

    value_py, t_py = run_mlp(pure=True)
    value_ext, t_ext = run_mlp(pure=False)
    rows.append(("mlp_N4_d10_R20", 20, t_py, t_ext, t_py / t_ext, value_py == value_ext))

    header = ("case", "size", "numpy_s", "compiled_s", "speedup", "identical")
    print(f"{header[0]:<16}{header[1]:>9}{header[2]:>11}{header[3]:>12}{header[4]:>9}  {header[5]}")
    for case, size, a, b, s, same in rows:
        print(f"{case:<16}{size:>9}{a:>11.4f}{b:>12.4f}{s:>9.2f}  {same}")
    if args.csv:
        with open(args.csv, "w", newline="", encoding="utf-8") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(header)
            writer.writerows(rows)


if __name__ == "__main__":
    main()
