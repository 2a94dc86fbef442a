"""Time the theta lattice-jet kernel on both backends.

    python benchmarks/bench_theta.py [--genus 3] [--order 6] [--repeat 5]

Uses a random Riemann matrix of the requested genus, the same lattice
truncation the sigma model uses, and checks the two backends agree before
timing them.
"""
from __future__ import annotations

import argparse
import time

import numpy as np

from kleinian import _kernels
from kleinian.thetasigma import ThetaParams, monomial_index


def random_tau(g: int, rng: np.random.Generator) -> np.ndarray:
    X = rng.uniform(-0.5, 0.5, (g, g))
    B = rng.normal(size=(g, g))
    Y = B @ B.T / g + 0.8 * np.eye(g)
    return 0.5 * (X + X.T) + 1j * Y


def best_of(f, repeat: int) -> float:
    times = []
    for _ in range(repeat):
        t = time.perf_counter()
        f()
        times.append(time.perf_counter() - t)
    return min(times)


def main(argv=None):
    ap = argparse.ArgumentParser()
    ap.add_argument("--genus", type=int, default=3)
    ap.add_argument("--order", type=int, default=6)
    ap.add_argument("--repeat", type=int, default=5)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args(argv)

    rng = np.random.default_rng(args.seed)
    g = args.genus
    params = ThetaParams(random_tau(g, rng), (0.5,) * g, (0.5,) * g)
    z = rng.uniform(-0.5, 0.5, g) + params.tau @ rng.uniform(-0.5, 0.5, g)
    mi = monomial_index(g, args.order)
    nvec = params.lattice(z, mi.K)
    M = 2j * np.pi * np.eye(g)
    exps = mi.array
    print(f"genus {g}, jet order {args.order}: {len(nvec)} lattice points, {len(exps)} monomials")

    ref = _kernels.jet_numpy(nvec, params.tau, z + params.dpp, M, exps)
    t_np = best_of(lambda: _kernels.jet_numpy(nvec, params.tau, z + params.dpp, M, exps), args.repeat)
    print(f"numpy  {t_np * 1e3:9.2f} ms")
    if not _kernels.HAVE_NUMBA:
        print("numba  unavailable (KLEINIAN_NO_NUMBA set or not installed)")
        return
    t = time.perf_counter()
    got = _kernels.jet_numba(nvec, params.tau, z + params.dpp, M, exps)
    print(f"numba  first call incl. compile {time.perf_counter() - t:.2f} s")
    err = float(np.max(np.abs(got - ref)) / np.max(np.abs(ref)))
    t_nb = best_of(lambda: _kernels.jet_numba(nvec, params.tau, z + params.dpp, M, exps), args.repeat)
    print(f"numba  {t_nb * 1e3:9.2f} ms   speedup {t_np / t_nb:.1f}x   max rel diff {err:.1e}")


if __name__ == "__main__":
    main()
