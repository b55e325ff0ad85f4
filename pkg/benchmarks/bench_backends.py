#!/usr/bin/env python3
"""Benchmark the compiled right-hand-side kernel against the NumPy fallback.

Times single right-hand-side evaluations at the reference resolution and a
short time-stepping loop, for whichever backends are importable.

Usage: python benchmarks/bench_backends.py [--cells N] [--loops K]
"""

import argparse
import importlib
import time

import numpy as np

from augburgers import _kernels_py
from augburgers.flux import FluxKind
from augburgers.grid import make_grid, project_initial
from augburgers.initial import sine_bumps
from augburgers.kernel import build, choose_n
from augburgers.scheme import (
    CorrectorMode,
    PhysicalParams,
    SchemeConfig,
    SolverState,
    stable_dt,
    step_euler,
)


def load_backends():
    backends = {}
    try:
        backends["cython"] = importlib.import_module("augburgers._kernels")
    except ImportError:
        pass
    backends["python"] = _kernels_py
    return backends


def bench_rhs(mod, args, loops):
    mod.rhs_kernel(*args)  # warm-up
    best = float("inf")
    for _ in range(5):
        t0 = time.perf_counter()
        for _ in range(loops):
            mod.rhs_kernel(*args)
        best = min(best, (time.perf_counter() - t0) / loops)
    return best


def bench_steps(mod, n_steps=200):
    import augburgers.backend as backend_mod

    dx = 0.1
    grid = make_grid(-160.0, 160.0, dx)
    quad = build(dx, 1.0, choose_n(dx, 1.0, 1e-8))
    params = PhysicalParams(nu=1e-2, c=2e-2, theta=1.0)
    config = SchemeConfig(
        flux=FluxKind.ENGQUIST_OSHER,
        quadrature=quad,
        corrector_mode=CorrectorMode.CORRECTED,
        grid=grid,
    )
    state = SolverState(0.0, project_initial(sine_bumps(), grid))
    saved = backend_mod.rhs_kernel
    backend_mod.rhs_kernel = mod.rhs_kernel
    try:
        t0 = time.perf_counter()
        for _ in range(n_steps):
            dt = stable_dt(state, params, config, safety=0.9)
            state, _ = step_euler(state, params, config, dt)
        return (time.perf_counter() - t0) / n_steps
    finally:
        backend_mod.rhs_kernel = saved


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--cells", type=int, default=3200)
    parser.add_argument("--loops", type=int, default=50)
    opts = parser.parse_args()

    rng = np.random.default_rng(0)
    u = np.ascontiguousarray(rng.uniform(-0.1, 0.1, opts.cells))
    quad = build(0.1, 1.0, choose_n(0.1, 1.0, 1e-8))
    args = (u, quad.weights, 0.1, 1e-2, 2e-2, 1.0, quad.moment0, quad.moment1, 0, 1.0)

    backends = load_backends()
    print(f"right-hand side: {opts.cells} cells, {quad.n_terms} kernel terms")
    print(f"{'backend':<8} {'rhs eval':>12} {'full step':>12}")
    results = {}
    for name, mod in backends.items():
        rhs_t = bench_rhs(mod, args, opts.loops)
        step_t = bench_steps(mod)
        results[name] = rhs_t
        print(f"{name:<8} {rhs_t * 1e3:>10.3f}ms {step_t * 1e3:>10.3f}ms")
    if "cython" in results:
        print(f"speedup (rhs): {results['python'] / results['cython']:.1f}x")


if __name__ == "__main__":
    main()
