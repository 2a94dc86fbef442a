"""Lattice-sum jet kernel for theta functions.

Given lattice vectors n (already shifted by the characteristic), the kernel
returns the Taylor coefficients

    J[alpha] = sum_n T_n * prod_i w_{n,i}^alpha_i / alpha_i!

where T_n = exp(pi i n.tau.n + 2 pi i n.zd) and w_n = M n.  Two backends:
numba (default when importable) and plain numpy.  Set KLEINIAN_NO_NUMBA=1 to
force numpy.
"""
from __future__ import annotations

import math
import os

import numpy as np

try:  # pragma: no cover - exercised implicitly
    if os.environ.get("KLEINIAN_NO_NUMBA", "") not in ("", "0"):
        raise ImportError("numba disabled by environment")
    from numba import njit
    HAVE_NUMBA = True
except ImportError:  # pragma: no cover
    HAVE_NUMBA = False

    def njit(*args, **kwargs):
        if args and callable(args[0]):
            return args[0]
        return lambda f: f


def backend_name() -> str:
    return "numba" if HAVE_NUMBA else "numpy"


def _inv_factorials(kmax: int) -> np.ndarray:
    return np.array([1.0 / math.factorial(p) for p in range(kmax + 1)])


def jet_numpy(nvec, tau, zd, M, exps, chunk=2048):
    N, g = nvec.shape
    kmax = int(exps.max()) if exps.size else 0
    invf = _inv_factorials(kmax)
    out = np.zeros(exps.shape[0], dtype=complex)
    for s in range(0, N, chunk):
        nv = nvec[s:s + chunk]
        phase = np.einsum("ni,ij,nj->n", nv, tau, nv) * (1j * np.pi) + (nv @ zd) * (2j * np.pi)
        T = np.exp(phase)
        W = nv @ M.T                                        # (n, g)
        P = W[:, :, None] ** np.arange(kmax + 1)[None, None, :] * invf  # (n, g, k+1)
        prod = np.ones((nv.shape[0], exps.shape[0]), dtype=complex)
        for i in range(g):
            prod *= P[:, i, exps[:, i]]
        out += T @ prod
    return out


@njit(cache=True, fastmath=False)
def _jet_numba(nvec, tau, zd, M, exps, invf):  # pragma: no cover - compiled
    N, g = nvec.shape
    nm = exps.shape[0]
    kmax = invf.shape[0] - 1
    out = np.zeros(nm, dtype=np.complex128)
    W = np.empty(g, dtype=np.complex128)
    P = np.empty((g, kmax + 1), dtype=np.complex128)
    for a in range(N):
        q = 0.0 + 0.0j
        for i in range(g):
            for j in range(g):
                q += nvec[a, i] * tau[i, j] * nvec[a, j]
        lin = 0.0 + 0.0j
        for i in range(g):
            lin += nvec[a, i] * zd[i]
        T = np.exp(1j * np.pi * q + 2j * np.pi * lin)
        for i in range(g):
            w = 0.0 + 0.0j
            for j in range(g):
                w += M[i, j] * nvec[a, j]
            W[i] = w
            p = 1.0 + 0.0j
            for k in range(kmax + 1):
                P[i, k] = p * invf[k]
                p *= w
        for m in range(nm):
            t = T
            for i in range(g):
                t *= P[i, exps[m, i]]
            out[m] += t
    return out


def jet_numba(nvec, tau, zd, M, exps):
    kmax = int(exps.max()) if exps.size else 0
    return _jet_numba(np.ascontiguousarray(nvec, dtype=np.float64),
                      np.ascontiguousarray(tau, dtype=np.complex128),
                      np.ascontiguousarray(zd, dtype=np.complex128),
                      np.ascontiguousarray(M, dtype=np.complex128),
                      np.ascontiguousarray(exps, dtype=np.int64),
                      _inv_factorials(kmax))


def lattice_jet(nvec, tau, zd, M, exps, backend: str | None = None):
    backend = backend or backend_name()
    if backend == "numba":
        if not HAVE_NUMBA:
            raise RuntimeError("numba backend requested but unavailable")
        return jet_numba(nvec, tau, zd, M, exps)
    return jet_numpy(nvec, tau, zd, M, exps)
