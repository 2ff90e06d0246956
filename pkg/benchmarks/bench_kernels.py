"""Compare the compiled and pure-Python kernels.

Times the two inner loops on the default experiment (T=128, M=50) and one
full composite evaluation per backend. The end-to-end run of the Python
backend happens in a subprocess with ``SPARSE_SMOOTH_PURE_PYTHON=1``.

Usage::

    python3 benchmarks/bench_kernels.py [--repeat 5]
"""

from __future__ import annotations

import argparse
import json
import os
import subprocess
import sys
import time

import numpy as np

from sparse_smooth import _kernels_py
from sparse_smooth.pipeline import Experiment, ExperimentConfig
from sparse_smooth.solver import CompositeProblem

try:
    from sparse_smooth import _kernels
except ImportError:
    _kernels = None

END_TO_END = """
import json, time
from sparse_smooth import kernels
from sparse_smooth.pipeline import Experiment, ExperimentConfig
exp = Experiment(ExperimentConfig())
exp.evaluate("composite", 8e-7, 5e-10)
best = float("inf")
for _ in range({repeat}):
    t0 = time.perf_counter()
    r = exp.evaluate("composite", 8e-7, 5e-10)
    best = min(best, time.perf_counter() - t0)
print(json.dumps({{"backend": kernels.BACKEND, "seconds": best, "snr": r.snr_db}}))
"""


def best_of(fn, repeat):
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t0)
    return min(times)


def admm_inputs():
    """The reduced ADMM operands of the default composite problem."""
    exp = Experiment(ExperimentConfig())
    p = CompositeProblem.from_setup(exp.setup, exp.data.y, 8e-7, 5e-10)
    k1, k2 = p.kept(1), p.kept(2)
    H = np.hstack([p.H1[:, k1], p.H2[:, k2]])
    L1 = p.L1[:, k1]
    R = 2 * p.lam2 * p.L2[:, k2].T @ p.L2[:, k2]
    n1, mu = len(k1), p.lam1
    Q = H.T @ H
    Q[:n1, :n1] += mu * L1.T @ L1
    Q[n1:, n1:] += R
    E1 = np.zeros((H.shape[1], L1.shape[0]))
    E1[:n1] = L1.T
    G = np.linalg.solve(Q, E1)
    W = mu * L1 @ G[:n1]
    W = 0.5 * (W + W.T)
    v0 = L1 @ np.linalg.solve(Q, H.T @ p.y)[:n1]
    return W, v0, np.ascontiguousarray(L1.T), mu, p.lam1


def simplex_inputs(m=50, n=300, seed=0):
    rng = np.random.default_rng(seed)
    A = rng.standard_normal((m, n))
    x = np.zeros(n)
    x[:m] = rng.uniform(0.5, 1.5, m)
    b = A @ x
    cost = rng.uniform(0.1, 1.0, n)
    T = np.zeros((m + 1, n + 1))
    T[:m, :n] = np.linalg.solve(A[:, :m], A)
    T[:m, -1] = np.linalg.solve(A[:, :m], b)
    T[m, :n] = cost - cost[:m] @ T[:m, :n]
    T[m, -1] = -cost[:m] @ T[:m, -1]
    return T, np.arange(m, dtype=np.int64), np.ones(n, dtype=np.uint8)


def main(argv=None):
    parser = argparse.ArgumentParser(description=__doc__.split("\n")[0])
    parser.add_argument("--repeat", type=int, default=5)
    args = parser.parse_args(argv)
    impls = {"python": _kernels_py}
    if _kernels is not None:
        impls["cython"] = _kernels
    else:
        print("compiled kernels not built; timing the Python backend only", file=sys.stderr)

    W, v0, Lt, mu, lam = admm_inputs()
    T0, basis0, allowed = simplex_inputs()
    rows = []
    for name, impl in impls.items():
        def run_admm():
            z, u = np.zeros(len(v0)), np.zeros(len(v0))
            return impl.admm_l1_loop(W, v0, Lt, mu, lam, 1.5, 1e-10, 1e-8, 20000, z, u)

        def run_simplex():
            return impl.simplex_iterate(T0.copy(), basis0.copy(), allowed, 1e-10, 100000)

        its = run_admm()[0]
        pivots = run_simplex()[1]
        rows.append((name, "admm_l1_loop", f"{its} iterations", best_of(run_admm, args.repeat)))
        rows.append((name, "simplex_iterate", f"{pivots} pivots",
                     best_of(run_simplex, args.repeat)))

    for pure in ("0", "1"):
        env = {**os.environ, "SPARSE_SMOOTH_PURE_PYTHON": pure}
        out = subprocess.run([sys.executable, "-c", END_TO_END.format(repeat=args.repeat)],
                             env=env, capture_output=True, text=True, check=True)
        res = json.loads(out.stdout)
        rows.append((res["backend"], "composite evaluation", f"SNR {res['snr']:.2f} dB",
                     res["seconds"]))

    print(f"{'backend':8s} {'kernel':22s} {'work':18s} {'best time':>12s}")
    for backend, kernel, work, seconds in rows:
        print(f"{backend:8s} {kernel:22s} {work:18s} {seconds * 1e3:10.2f} ms")
    timings = {(b, k): s for b, k, _, s in rows}
    for kernel in ("admm_l1_loop", "simplex_iterate", "composite evaluation"):
        if ("cython", kernel) in timings:
            ratio = timings[("python", kernel)] / timings[("cython", kernel)]
            print(f"speed-up of {kernel}: {ratio:.1f}x")


if __name__ == "__main__":
    main()
