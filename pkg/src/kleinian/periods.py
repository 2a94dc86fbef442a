"""Period matrices and the Abel map of a cyclic (n,s) curve.

Cycle construction
------------------
Every finite branch point is a total ramification point of x: (x,y) -> x, so
for an edge A-B joining two branch points the path "A to B on sheet k, then
back from B to A on sheet k+1" is closed.  Over the edges of a Euclidean
minimum spanning tree of the branch points and k = 0..n-2 these give
(s-1)(n-1) = 2g cycles, a basis of homology.  Their intersection matrix is
computed numerically by tracing small perturbations of each cycle and counting
signed crossings on matching sheets.  An integer symplectic reduction then
produces the alpha/beta basis.

Sheets along an edge are labelled by a branch ``y0`` that is continuous on the
open segment; sheet k carries ``y = zeta**k * y0`` with ``zeta = exp(2 pi i/n)``.
"""
from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Sequence

import mpmath as mp
import numpy as np

from .curvedef import CurveSpec, ValidationError


class ConditioningError(ValueError):
    pass


class CycleConstructionError(RuntimeError):
    pass


@dataclass(frozen=True)
class EdgeCycle:
    a: int          # index of start branch point
    b: int          # index of end branch point
    k: int          # outgoing sheet

    def describe(self, e) -> str:
        return f"e{self.a}({complex(e[self.a]):.6g}) -> e{self.b}({complex(e[self.b]):.6g}) on sheet {self.k}, back on sheet {self.k + 1}"


@dataclass(frozen=True)
class PeriodData:
    omega1: np.ndarray              # columns: alpha-periods of du_1..du_g
    omega2: np.ndarray              # columns: beta-periods
    tau: np.ndarray
    branch_points: tuple
    cycle_descriptions: tuple
    precision_digits: int
    omega1_mp: mp.matrix = field(repr=False, default=None)
    omega2_mp: mp.matrix = field(repr=False, default=None)
    tau_mp: mp.matrix = field(repr=False, default=None)
    edge_cycles: tuple = ()
    edge_periods: np.ndarray = None     # g x 2g, periods of the raw edge cycles
    intersection_matrix: np.ndarray = None
    symplectic_transform: np.ndarray = None   # rows: alpha_1..alpha_g, beta_1..beta_g in edge-cycle coordinates
    tau_symmetry_residual: float = 0.0
    im_tau_min_eig: float = 0.0
    quad_error: float = 0.0
    curve: CurveSpec = field(repr=False, default=None)

    @property
    def genus(self) -> int:
        return self.omega1.shape[0]

    @property
    def omega1_inv(self) -> np.ndarray:
        return np.linalg.inv(self.omega1)

    def lattice_vector(self, l1, l2) -> np.ndarray:
        return self.omega1 @ np.asarray(l1) + self.omega2 @ np.asarray(l2)

    def to_json(self) -> dict:
        def mpm(m):
            return [[[mp.nstr(m[i, j].real, self.precision_digits + 3),
                      mp.nstr(m[i, j].imag, self.precision_digits + 3)]
                     for j in range(m.cols)] for i in range(m.rows)]
        return {
            "precision_digits": self.precision_digits,
            "omega1": mpm(self.omega1_mp),
            "omega2": mpm(self.omega2_mp),
            "tau": mpm(self.tau_mp),
            "branch_points": [[mp.nstr(mp.mpc(z).real, self.precision_digits + 3),
                               mp.nstr(mp.mpc(z).imag, self.precision_digits + 3)] for z in self.branch_points],
            "cycle_descriptions": list(self.cycle_descriptions),
            "intersection_matrix": self.intersection_matrix.tolist(),
            "symplectic_transform": self.symplectic_transform.tolist(),
            "tau_symmetry_residual": self.tau_symmetry_residual,
            "im_tau_min_eig": self.im_tau_min_eig,
            "quad_error": self.quad_error,
        }


# branch points and spanning tree -------------------------------------------

def branch_points_mp(curve: CurveSpec, dps: int) -> list:
    with mp.workdps(dps + 10):
        coeffs = [mp.mpc(c.real, c.imag) for c in curve.poly_coeffs()]
        roots = mp.polyroots(coeffs, maxsteps=400, extraprec=4 * dps)
    return sorted(roots, key=lambda z: (float(mp.re(z)), float(mp.im(z))))


def _mst(points: np.ndarray) -> list[tuple[int, int]]:
    # Prim's algorithm on the complete graph; s <= 9 so O(s^3) is fine.
    m = len(points)
    inside = {0}
    edges = []
    while len(inside) < m:
        best = None
        for i in inside:
            for j in range(m):
                if j in inside:
                    continue
                d = abs(points[i] - points[j])
                if best is None or d < best[0]:
                    best = (d, i, j)
        edges.append((best[1], best[2]))
        inside.add(best[2])
    return edges


def _dist_point_segment(p, a, b) -> float:
    d = b - a
    t = ((p - a) * d.conjugate()).real / abs(d) ** 2
    t = min(1.0, max(0.0, t))
    return abs(p - (a + t * d))


# integrals along an edge ---------------------------------------------------

def _edge_integrals(e: list, a: int, b: int, n: int, diffs, dps: int):
    """I_l = int_A^B x^a y0^m dx / n for every differential, with y0 continuous
    on the open segment.  Returns (values, max error estimate).

    Each half of the segment is integrated in the variable w with
    (distance to the endpoint) = w^n, which removes the algebraic endpoint
    singularity, so Gauss-Legendre converges geometrically."""
    with mp.workdps(dps + 10):
        A, B = e[a], e[b]
        others = [e[i] for i in range(len(e)) if i not in (a, b)]
        inv_n = mp.mpf(1) / n
        c0 = (B - A) ** inv_n * (A - B) ** inv_n
        for q in others:
            c0 *= (A - q) ** inv_n
        wmax = mp.mpf(2) ** (-inv_n)

        def reduced_y0(t):
            # y0 without the two endpoint factors
            x = A + t * (B - A)
            v = c0
            for q in others:
                v *= ((x - q) / (A - q)) ** inv_n
            return x, v

        caches = ({}, {})

        def node(w, side):
            got = caches[side].get(w)
            if got is None:
                wn = w ** n
                t, s = (wn, 1 - wn) if side == 0 else (1 - wn, wn)
                x, v = reduced_y0(t)
                other = s ** inv_n if side == 0 else t ** inv_n
                got = caches[side][w] = (x, v * other)
            return got

        out, err = [], mp.mpf(0)
        for (pa, pb) in diffs:
            m = pb - (n - 1)
            total = mp.mpc(0)
            for side in (0, 1):
                def f(w, side=side, pa=pa, m=m):
                    x, v = node(w, side)
                    # y0^m dt = v^m w^m * n w^(n-1) dw on both halves
                    return x ** pa * v ** m * w ** (m + n - 1) * n
                val, er = mp.quad(f, [0, wmax], method="gauss-legendre", error=True)
                total += val
                err = max(err, abs(er))
            out.append(total * (B - A) / n)
    return out, float(err)


# intersection numbers ------------------------------------------------------

def _track(curve: CurveSpec, xs: np.ndarray, y_start: complex) -> np.ndarray:
    """Continue y along the polyline xs by nearest root."""
    n = curve.n
    zeta = np.exp(2j * np.pi * np.arange(n) / n)
    r = curve.radicand(xs) ** (1.0 / n)
    ys = np.empty(len(xs), dtype=complex)
    prev = y_start
    for i in range(len(xs)):
        cand = r[i] * zeta
        j = int(np.argmin(np.abs(cand - prev)))
        # the step must be small compared with the sheet separation
        if i and abs(cand[j] - prev) > 0.3 * abs(cand[j]) * abs(1 - zeta[1 % n]):
            raise CycleConstructionError("sheet tracking step too coarse")
        prev = cand[j]
        ys[i] = prev
    return ys


def _graded_line(p, q, e: np.ndarray, frac=0.05) -> np.ndarray:
    pts = [p]
    L = abs(q - p)
    d = (q - p) / L
    t = 0.0
    while True:
        x = p + t * d
        h = frac * max(np.min(np.abs(e - x)), 1e-9)
        t += min(h, L / 16)
        if t >= L:
            break
        pts.append(p + t * d)
    pts.append(q)
    return np.array(pts)


def _circle(center, start, ccw: bool, m: int = 160) -> np.ndarray:
    v = start - center
    ang = np.linspace(0.0, 2 * np.pi, m + 1) * (1 if ccw else -1)
    return center + v * np.exp(1j * ang)


def _perturbed_loop(curve: CurveSpec, e: np.ndarray, cyc: EdgeCycle, r: float, o: float):
    A, B = e[cyc.a], e[cyc.b]
    L = abs(B - A)
    d = (B - A) / L
    nu = 1j * d
    back = math.sqrt(r * r - o * o)
    Ap = A + back * d + o * nu
    Bp = B - back * d + o * nu
    mid = 0.5 * (A + B) + o * nu
    # sheet k at the midpoint of the segment
    y_mid = _y0_on_segment(e, cyc.a, cyc.b, curve.n, 0.5) * np.exp(2j * np.pi * cyc.k / curve.n)
    pieces = [
        _graded_line(mid, Bp, e),
        _circle(B, Bp, ccw=True)[1:],
        _graded_line(Bp, Ap, e)[1:],
        _circle(A, Ap, ccw=False)[1:],
        _graded_line(Ap, mid, e)[1:],
    ]
    xs = np.concatenate(pieces)
    ys = _track(curve, xs, y_mid)
    if abs(ys[-1] - ys[0]) > 1e-6 * max(1.0, abs(ys[0])):
        raise CycleConstructionError("perturbed cycle does not close")
    return xs, ys


def _y0_on_segment(e, a, b, n, t) -> complex:
    A, B = complex(e[a]), complex(e[b])
    x = A + t * (B - A)
    v = (B - A) ** (1 / n) * (A - B) ** (1 / n) * t ** (1 / n) * (1 - t) ** (1 / n)
    for i, q in enumerate(e):
        if i in (a, b):
            continue
        q = complex(q)
        v *= (A - q) ** (1 / n) * ((x - q) / (A - q)) ** (1 / n)
    return v


def _crossings(xa, ya, xb, yb, sep) -> int:
    p, dp = xa[:-1], np.diff(xa)
    q, dq = xb[:-1], np.diff(xb)
    # bounding box prefilter
    pminr = np.minimum(xa[:-1].real, xa[1:].real)[:, None]
    pmaxr = np.maximum(xa[:-1].real, xa[1:].real)[:, None]
    pmini = np.minimum(xa[:-1].imag, xa[1:].imag)[:, None]
    pmaxi = np.maximum(xa[:-1].imag, xa[1:].imag)[:, None]
    qminr = np.minimum(xb[:-1].real, xb[1:].real)[None, :]
    qmaxr = np.maximum(xb[:-1].real, xb[1:].real)[None, :]
    qmini = np.minimum(xb[:-1].imag, xb[1:].imag)[None, :]
    qmaxi = np.maximum(xb[:-1].imag, xb[1:].imag)[None, :]
    ii, jj = np.nonzero((pminr <= qmaxr) & (qminr <= pmaxr) & (pmini <= qmaxi) & (qmini <= pmaxi))
    total = 0
    for i, j in zip(ii, jj):
        den = (np.conj(dp[i]) * dq[j]).imag
        if den == 0:
            continue
        w = q[j] - p[i]
        s = (np.conj(w) * dq[j]).imag / den
        t = (np.conj(w) * dp[i]).imag / den
        if 0 <= s < 1 and 0 <= t < 1:
            y1 = ya[i] + s * (ya[i + 1] - ya[i])
            y2 = yb[j] + t * (yb[j + 1] - yb[j])
            if abs(y1 - y2) < sep * max(abs(y1), 1e-300):
                total += 1 if den > 0 else -1
    return total


def intersection_matrix(curve: CurveSpec, e: np.ndarray, cycles: Sequence[EdgeCycle]) -> np.ndarray:
    dmin = min(abs(a - b) for i, a in enumerate(e) for b in e[i + 1:])
    m = len(cycles)
    loops = []
    for c, cyc in enumerate(cycles):
        r = dmin * (0.10 + 0.18 * c / m)
        o = dmin * 0.008 * (c + 1) * (1 if c % 2 == 0 else -1)
        loops.append(_perturbed_loop(curve, e, cyc, r, abs(o) if abs(o) < r else r / 2))
    sep = 0.5 * abs(1 - np.exp(2j * np.pi / curve.n))
    K = np.zeros((m, m), dtype=np.int64)
    for i in range(m):
        for j in range(i + 1, m):
            K[i, j] = _crossings(*loops[i], *loops[j], sep)
            K[j, i] = -K[i, j]
    return K


def symplectic_reduction(K: np.ndarray) -> np.ndarray:
    """Integer matrix M (rows = new cycles) with M K M^T = [[0, I], [-I, 0]]."""
    m = K.shape[0]
    vecs = [np.eye(m, dtype=np.int64)[i] for i in range(m)]

    def form(x, y):
        return int(x @ K @ y)

    alphas, betas = [], []
    while vecs:
        pair = None
        for i, a in enumerate(vecs):
            for j, b in enumerate(vecs):
                if i != j and abs(form(a, b)) == 1:
                    pair = (i, j)
                    break
            if pair:
                break
        if pair is None:
            raise CycleConstructionError("intersection form has no unit pivot; cycles are not a homology basis")
        i, j = pair
        a, b = vecs[i], vecs[j] * form(vecs[i], vecs[j])
        rest = [v for k, v in enumerate(vecs) if k not in pair]
        vecs = [c - form(c, b) * a + form(c, a) * b for c in rest]
        alphas.append(a)
        betas.append(b)
    M = np.array(alphas + betas, dtype=np.int64)
    g = m // 2
    J = np.block([[np.zeros((g, g), int), np.eye(g, dtype=int)], [-np.eye(g, dtype=int), np.zeros((g, g), int)]])
    if not np.array_equal(M @ K @ M.T, J):
        raise CycleConstructionError("symplectic reduction failed")
    return M


# main entry points -----------------------------------------------------------

def compute_periods(curve: CurveSpec, precision_digits: int = 30, threads: int = 1) -> PeriodData:
    dps = int(precision_digits)
    e_mp = branch_points_mp(curve, dps)
    e = np.array([complex(z) for z in e_mp])
    scale = max(1.0, float(np.max(np.abs(e))))
    dmin = min(abs(a - b) for i, a in enumerate(e) for b in e[i + 1:])
    if dmin / scale < 1e-6:
        raise ConditioningError(f"branch points nearly collide (separation {dmin:.3g})")
    edges = _mst(e)
    for a, b in edges:
        for i, p in enumerate(e):
            if i not in (a, b) and _dist_point_segment(p, e[a], e[b]) < 1e-3 * dmin:
                raise ConditioningError("a branch point lies on a spanning-tree edge")
    n, g = curve.n, curve.genus
    cycles = [EdgeCycle(a, b, k) for (a, b) in edges for k in range(n - 1)]
    diffs = curve.differentials

    jobs = [(a, b) for (a, b) in edges]
    if threads > 1:
        with ThreadPoolExecutor(threads) as ex:
            results = list(ex.map(lambda ab: _edge_integrals(e_mp, ab[0], ab[1], n, diffs, dps), jobs))
    else:
        results = [_edge_integrals(e_mp, a, b, n, diffs, dps) for a, b in jobs]
    integrals = {ab: r[0] for ab, r in zip(jobs, results)}
    quad_err = max(r[1] for r in results)

    with mp.workdps(dps + 10):
        zeta = mp.exp(2j * mp.pi / n)
        P = mp.matrix(g, len(cycles))
        for c, cyc in enumerate(cycles):
            I = integrals[(cyc.a, cyc.b)]
            for l, (pa, pb) in enumerate(diffs):
                m = pb - (n - 1)
                P[l, c] = (zeta ** (cyc.k * m) - zeta ** ((cyc.k + 1) * m)) * I[l]

    K = intersection_matrix(curve, e, cycles)
    if round(abs(np.linalg.det(K))) != 1:
        raise CycleConstructionError(f"edge cycles are not a homology basis (det K = {np.linalg.det(K):.3g})")
    M = symplectic_reduction(K)

    with mp.workdps(dps + 10):
        Mm = mp.matrix(M.T.tolist())
        W = P * Mm
        A = W[:, :g]
        B = W[:, g:]
        tau = mp.inverse(A) * B
        if not _im_pos_def(tau):
            # orientation flip: beta -> -beta
            B = -B
            M[g:] = -M[g:]
            tau = -tau
            if not _im_pos_def(tau):
                raise CycleConstructionError("Im tau is not definite")
        sym = max(abs(tau[i, j] - tau[j, i]) for i in range(g) for j in range(g))
        tau_np = np.array([[complex(tau[i, j]) for j in range(g)] for i in range(g)])
    tol = 10.0 ** (2 - dps)
    if float(sym) > max(tol, 1e-300) * max(1.0, float(np.max(np.abs(tau_np)))):
        raise CycleConstructionError(f"tau not symmetric (residual {float(sym):.3g})")
    tau_np = 0.5 * (tau_np + tau_np.T)
    desc = []
    for r in range(2 * g):
        label = ("alpha" if r < g else "beta") + str(r % g + 1)
        terms = [f"{int(M[r, c]):+d}*[{cycles[c].describe(e)}]" for c in range(len(cycles)) if M[r, c]]
        desc.append(f"{label} = " + " ".join(terms))
    to_np = lambda X: np.array([[complex(X[i, j]) for j in range(X.cols)] for i in range(X.rows)])
    return PeriodData(
        omega1=to_np(A), omega2=to_np(B), tau=tau_np, branch_points=tuple(e_mp),
        cycle_descriptions=tuple(desc), precision_digits=dps,
        omega1_mp=A, omega2_mp=B, tau_mp=tau, edge_cycles=tuple(cycles),
        edge_periods=to_np(P), intersection_matrix=K, symplectic_transform=M,
        tau_symmetry_residual=float(sym),
        im_tau_min_eig=float(np.min(np.linalg.eigvalsh(tau_np.imag))),
        quad_error=quad_err, curve=curve)


def _im_pos_def(tau) -> bool:
    Y = np.array([[float(mp.im(tau[i, j])) for j in range(tau.cols)] for i in range(tau.rows)])
    Y = 0.5 * (Y + Y.T)
    return bool(np.all(np.linalg.eigvalsh(Y) > 0))


# Abel map ------------------------------------------------------------------

@dataclass(frozen=True)
class AbelImage:
    u: np.ndarray
    u_mp: tuple
    base_point: str = "infinity"
    path_description: tuple = ()


def _ray_direction(x0: complex, e: np.ndarray) -> complex:
    """Direction of a ray from x0 keeping clear of the other branch points."""
    best, best_d = None, -1.0
    base = math.atan2(x0.imag, x0.real) if abs(x0) > 1e-12 else 0.3
    for k in range(64):
        th = base + 2 * math.pi * k / 64 * (1 if k % 2 else -1) * 0.5
        d = complex(math.cos(th), math.sin(th))
        clear = np.inf
        for p in e:
            w = p - x0
            t = (w * d.conjugate()).real
            if abs(w) < 1e-12:
                continue
            dist = abs(w) if t <= 0 else abs(w - t * d)
            clear = min(clear, dist)
        if clear > best_d + 1e-12:
            best, best_d = d, clear
        if clear > 0.2:
            return d
    return best


def on_curve_residual(curve: CurveSpec, x: complex, y: complex) -> float:
    r = complex(curve.radicand(complex(x)))
    return abs(complex(y) ** curve.n - r) / max(1.0, abs(r), abs(complex(x)) ** curve.s)


def abel_point(curve: CurveSpec, e_mp: list, x0, y0, dps: int):
    """-int_P^infinity du along a ray; returns list of mpc."""
    n = curve.n
    with mp.workdps(dps + 8):
        x0 = mp.mpc(x0)
        y0 = mp.mpc(y0)
        e_c = np.array([complex(z) for z in e_mp])
        d = mp.mpc(_ray_direction(complex(x0), e_c))
        inv_n = mp.mpf(1) / n
        at = [i for i, z in enumerate(e_mp) if abs(z - x0) < mp.mpf(10) ** (-(dps // 2))]
        if at:
            a = at[0]
            x0 = e_mp[a]
            others = [z for i, z in enumerate(e_mp) if i != a]
            c0 = mp.mpf(1)
            for q in others:
                c0 *= (x0 - q) ** inv_n

            def yfun(t):
                x = x0 + t * d
                v = c0 * (t * d) ** inv_n
                for q in others:
                    v *= ((x - q) / (x0 - q)) ** inv_n
                return v
        else:
            def yfun(t):
                x = x0 + t * d
                v = y0
                for q in e_mp:
                    v *= ((x - q) / (x0 - q)) ** inv_n
                return v
        cache = {}

        def ycache(t):
            v = cache.get(t)
            if v is None:
                v = cache[t] = yfun(t)
            return v

        L = 1 + 2 * max(abs(z - x0) for z in e_mp)
        out = []
        for (pa, pb) in curve.differentials:
            m = pb - (n - 1)

            def f(t, pa=pa, m=m):
                return (x0 + t * d) ** pa * ycache(t) ** m * d / n

            if at:
                # t = w^n removes the branch-point singularity at the start
                near = mp.quad(lambda w: f(w ** n) * n * w ** (n - 1), [0, L ** inv_n],
                               method="gauss-legendre")
            else:
                near = mp.quad(f, [0, L])
            # t = L v^(-n): the differential is holomorphic at infinity, so the
            # integrand is smooth in v
            tail = mp.quad(lambda v: f(L / v ** n) * n * L / v ** (n + 1), [0, 1],
                           method="gauss-legendre")
            out.append(-(near + tail))
    return out


def abel_map(curve: CurveSpec, periods: PeriodData, points: Sequence, digits: int | None = None) -> AbelImage:
    """Sum over P of the integral from infinity to P of du.  ``points`` are
    (x, y) pairs on the curve."""
    g = curve.genus
    dps = digits or periods.precision_digits
    total = [mp.mpc(0)] * g
    desc = []
    for (x, y) in points:
        if on_curve_residual(curve, x, y) > 1e-10:
            raise ValidationError(f"point ({x}, {y}) is not on the curve")
        vals = abel_point(curve, list(periods.branch_points), complex(x), complex(y), dps)
        with mp.workdps(dps + 8):
            total = [t + v for t, v in zip(total, vals)]
        desc.append(f"ray from ({complex(x):.6g}, {complex(y):.6g}) to infinity")
    return AbelImage(u=np.array([complex(t) for t in total]), u_mp=tuple(total), path_description=tuple(desc))


def random_curve_point(curve: CurveSpec, rng: np.random.Generator, radius: float = 1.5):
    from .curvedef import curve_rhs
    x = complex(*(rng.uniform(-radius, radius, 2)))
    ys = curve_rhs(curve, x)
    return x, ys[int(rng.integers(curve.n))]


def reduce_mod_lattice(periods: PeriodData, u):
    """Split u = u_red + omega1 l1 + omega2 l2 with the real coordinates of
    u_red in [-1/2, 1/2).  High precision when u holds mpmath numbers."""
    g = periods.genus
    use_mp = any(isinstance(v, (mp.mpc, mp.mpf)) for v in u)
    uc = np.array([complex(v) for v in u])
    R = np.block([[periods.omega1.real, periods.omega2.real], [periods.omega1.imag, periods.omega2.imag]])
    coords = np.linalg.solve(R, np.concatenate([uc.real, uc.imag]))
    ls = np.floor(coords + 0.5).astype(np.int64)
    l1, l2 = ls[:g], ls[g:]
    if use_mp:
        with mp.workdps(periods.precision_digits + 8):
            lat = periods.omega1_mp * mp.matrix(l1.tolist()) + periods.omega2_mp * mp.matrix(l2.tolist())
            red = [mp.mpc(u[i]) - lat[i] for i in range(g)]
        return red, l1, l2
    red = uc - periods.omega1 @ l1 - periods.omega2 @ l2
    return red, l1, l2
