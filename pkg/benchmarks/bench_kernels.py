"""Compare the compiled kernels against the numpy fallback.

    python3 benchmarks/bench_kernels.py [--trials 2000] [--steps 2000] [--repeat 3]

Both paths are always available here: the numpy functions are imported
directly, so ``POLYAPROC_DISABLE_NUMBA`` does not need to be set.
"""

from __future__ import annotations

import argparse
import time

import numpy as np

from polyaproc import _kernels
from polyaproc.fixtures import get_fixture
from polyaproc.moments import _eval_vector
from polyaproc.operator import PhiMatrix, ReducedTable
from polyaproc.simulate import scaled_system, trial_uniforms
from polyaproc.spectral import analyze
from polyaproc.upoly import UPolynomial


def best_of(fn, repeat: int) -> float:
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t0)
    return min(times)


def bench_advance(trials: int, steps: int, repeat: int) -> dict:
    spec = get_fixture("two-three-tree").spec
    sc = scaled_system(spec, steps + 1)
    uni = np.stack([trial_uniforms(1, i, steps) for i in range(trials)])
    results = {}
    outs = {}
    for name, fn in (("numpy", _kernels.advance_block_numpy), ("numba", _kernels.advance_block_numba)):
        out = np.empty((trials, sc.x0.shape[0]), dtype=sc.x0.dtype)
        status = np.zeros(trials, dtype=np.int64)
        fn(sc.x0, sc.increments, uni[:2], out[:2], status[:2], sc.neg_tol)  # warm up / compile
        results[name] = best_of(lambda: fn(sc.x0, sc.increments, uni, out, status, sc.neg_tol), repeat)
        outs[name] = out.copy()
    results["identical"] = bool(np.array_equal(outs["numpy"], outs["numba"]))
    return results


def bench_moments(degree: int, horizon: int, repeat: int) -> dict:
    fx = get_fixture("triangular-3d")
    sd = analyze(fx.spec)
    table = ReducedTable(fx.spec, sd)
    alpha = (0, 0, degree)
    mat = PhiMatrix.build(alpha, table.op)
    indptr, indices, data = mat.to_csr()
    f = UPolynomial.monomial(alpha, 1 + 0j)
    g0 = np.array([complex(c) for c in mat.vector(f, False)])
    e = np.array([complex(v) for v in _eval_vector(mat.basis, sd.forms_at(fx.spec.initial))])
    ns = np.array([horizon], dtype=np.int64)
    tau1 = float(fx.spec.tau1)
    results = {"basis": len(mat)}
    vals = {}
    for name, fn in (("numpy", _kernels.moment_iterate_numpy), ("numba", _kernels.moment_iterate_numba)):
        fn(indptr, indices, data, g0, e, tau1, np.array([2], dtype=np.int64))
        results[name] = best_of(lambda: fn(indptr, indices, data, g0, e, tau1, ns), repeat)
        vals[name] = fn(indptr, indices, data, g0, e, tau1, ns)[0]
    results["rel_diff"] = abs(vals["numpy"] - vals["numba"]) / max(1.0, abs(vals["numpy"]))
    return results


def main() -> None:
    ap = argparse.ArgumentParser()
    ap.add_argument("--trials", type=int, default=2000)
    ap.add_argument("--steps", type=int, default=2000)
    ap.add_argument("--degree", type=int, default=6)
    ap.add_argument("--horizon", type=int, default=20000)
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args()
    if not _kernels.HAVE_NUMBA:
        print("numba unavailable or disabled; the 'numba' column runs the Python fallback")
    a = bench_advance(args.trials, args.steps, args.repeat)
    print(f"advance_block  {args.trials} trials x {args.steps} steps: "
          f"numpy {a['numpy']:.3f}s  numba {a['numba']:.3f}s  "
          f"speedup {a['numpy'] / a['numba']:.1f}x  identical={a['identical']}")
    m = bench_moments(args.degree, args.horizon, args.repeat)
    print(f"moment_iterate basis {m['basis']}, {args.horizon} steps: "
          f"numpy {m['numpy']:.3f}s  numba {m['numba']:.3f}s  "
          f"speedup {m['numpy'] / m['numba']:.1f}x  rel diff {m['rel_diff']:.1e}")


if __name__ == "__main__":
    main()
