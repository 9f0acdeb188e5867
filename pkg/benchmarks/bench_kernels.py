"""Timing comparison of the jitted kernels against their Python fallbacks.

Run:

    python benchmarks/bench_kernels.py

Each kernel is exercised on a representative workload; when the JIT is
active (the default) the same inputs also go through the uncompiled
``py_func`` path and the outputs are checked for bit equality.  Set
``TRENDCSC_NO_NUMBA=1`` to see the fallback timings alone.
"""

import time

import numpy as np

from trendcsc._accel import NUMBA_ENABLED
from trendcsc.coding import (
    _cross_correlation_table,
    _lgcd_kernel,
    build_state,
    lambda_max,
)
from trendcsc.dictupdate import _spike_conv_add, _spike_corr
from trendcsc.simulate import SyntheticParams, gen_signal
from trendcsc.tv import _tv1d_kernel


def best_of(fn, repeat):
    best = np.inf
    for _ in range(repeat):
        start = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - start)
    return best


def report(name, jit_fn, py_fn, agree, repeat_jit=5, repeat_py=2):
    if NUMBA_ENABLED:
        jit_fn()  # warm-up: compile or load from cache
        t_jit = best_of(jit_fn, repeat_jit)
        t_py = best_of(py_fn, repeat_py)
        ok = "ok" if agree() else "MISMATCH"
        print(
            f"{name:<18} jit {t_jit * 1e3:9.2f} ms   python {t_py * 1e3:9.2f} ms"
            f"   speedup {t_py / t_jit:7.1f}x   agreement {ok}"
        )
    else:
        t_py = best_of(jit_fn, repeat_py)  # jit_fn IS the python path here
        print(f"{name:<18} python {t_py * 1e3:9.2f} ms   (JIT disabled)")


def bench_tv():
    rng = np.random.default_rng(0)
    v = np.cumsum(rng.normal(size=10_000)) + rng.normal(scale=0.5, size=10_000)
    weight = 15.0
    out_jit = np.empty_like(v)
    out_py = np.empty_like(v)

    def run_jit():
        _tv1d_kernel(v, weight, out_jit)

    def run_py():
        _tv1d_kernel.py_func(v, weight, out_py)

    report(
        "tv prox (T=10k)",
        run_jit,
        run_py,
        lambda: np.array_equal(out_jit, out_py),
    )


def make_lgcd_problem(n_samples):
    signal, _ = gen_signal(SyntheticParams(duration_s=n_samples / 1000.0, seed=1))
    x = np.asarray(signal.samples)
    rng = np.random.default_rng(2)
    atoms = rng.normal(size=(1, 120))
    atoms /= np.linalg.norm(atoms, axis=1, keepdims=True)
    lam = 0.3 * lambda_max(x, atoms)
    length = x.size - atoms.shape[1] + 1
    z0 = np.zeros((1, length))
    state = build_state(x, atoms, z0)
    cross = _cross_correlation_table(atoms)
    return state, cross, lam, z0


def bench_lgcd():
    # both paths solve the same cold-start problem; 2000 samples keeps
    # the python side to a few tens of seconds
    state, cross, lam, z0 = make_lgcd_problem(2_000)
    holder = {}

    def solve(kernel, key):
        beta = state.beta.copy()
        z = z0.copy()
        kernel(
            beta, z, cross, state.norms, lam,
            state.segment_bounds, 1e-6 * lam, 10_000_000, False,
        )
        holder[key] = z

    def run_jit():
        solve(_lgcd_kernel, "jit")

    def run_py():
        solve(_lgcd_kernel.py_func, "py")

    report(
        "lgcd (T=2k)",
        run_jit,
        run_py,
        lambda: np.array_equal(holder["jit"], holder["py"]),
        repeat_jit=3,
        repeat_py=1,
    )


def bench_spike_ops():
    rng = np.random.default_rng(3)
    n = 10_000
    w = 120
    atom = rng.normal(size=w)
    idx = np.sort(rng.choice(n - w + 1, size=200, replace=False)).astype(np.int64)
    vals = rng.normal(size=200)
    r = rng.normal(size=n)
    out_jit = np.zeros(n)
    out_py = np.zeros(n)
    corr_jit = np.zeros(w)
    corr_py = np.zeros(w)

    def conv_jit():
        out_jit[:] = 0.0
        for _ in range(200):
            _spike_conv_add(atom, idx, vals, out_jit)

    def conv_py():
        out_py[:] = 0.0
        for _ in range(200):
            _spike_conv_add.py_func(atom, idx, vals, out_py)

    report(
        "spike conv x200",
        conv_jit,
        conv_py,
        lambda: np.array_equal(out_jit, out_py),
    )

    def corr_jit_fn():
        corr_jit[:] = 0.0
        for _ in range(200):
            _spike_corr(r, idx, vals, corr_jit)

    def corr_py_fn():
        corr_py[:] = 0.0
        for _ in range(200):
            _spike_corr.py_func(r, idx, vals, corr_py)

    report(
        "spike corr x200",
        corr_jit_fn,
        corr_py_fn,
        lambda: np.array_equal(corr_jit, corr_py),
    )


def main():
    mode = "numba JIT active" if NUMBA_ENABLED else "pure Python fallback"
    print(f"kernel timings ({mode})")
    bench_tv()
    bench_spike_ops()
    bench_lgcd()


if __name__ == "__main__":
    main()
