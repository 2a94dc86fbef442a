"""Theta functions with characteristics, the sigma function and its jets.

sigma(u) = c * exp(u.kappa.u / 2) * theta[delta](A^{-1} u | tau)

with A = omega1, tau = A^{-1} omega2.  Derivatives are always taken from the
term-wise differentiated lattice sum, never by finite differences.  The
matrix kappa and the constant c are calibrated numerically (see
:func:`calibrate`).
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from typing import Callable, Sequence

import numpy as np

from . import _kernels
from .curvedef import CurveSpec, ValidationError, schur_weierstrass
from .periods import PeriodData, abel_map, random_curve_point

TRUNCATION_TOL = 1e-20   # complex128 summation: deeper truncation buys nothing


class CalibrationError(RuntimeError):
    pass


class CharacteristicError(RuntimeError):
    pass


# truncated Taylor arrays ---------------------------------------------------

class MonomialIndex:
    """All exponent vectors in g variables of total degree <= K, graded."""

    def __init__(self, g: int, K: int):
        self.g, self.K = g, K
        exps = []
        for d in range(K + 1):
            for c in itertools.combinations_with_replacement(range(g), d):
                e = [0] * g
                for i in c:
                    e[i] += 1
                exps.append(tuple(e))
        exps.sort(key=lambda e: (sum(e), tuple(-x for x in e)))
        self.exps = exps
        self.array = np.array(exps, dtype=np.int64).reshape(len(exps), g)
        self.pos = {e: i for i, e in enumerate(exps)}
        self.degree = self.array.sum(axis=1)
        self.factorial = np.array([math.prod(math.factorial(a) for a in e) for e in exps], dtype=float)
        self._mul = None

    def __len__(self):
        return len(self.exps)

    def _table(self):
        if self._mul is None:
            I, J, Kk = [], [], []
            for i, a in enumerate(self.exps):
                da = sum(a)
                for j, b in enumerate(self.exps):
                    if da + sum(b) > self.K:
                        continue
                    I.append(i)
                    J.append(j)
                    Kk.append(self.pos[tuple(x + y for x, y in zip(a, b))])
            self._mul = (np.array(I), np.array(J), np.array(Kk))
        return self._mul

    def mul(self, a: np.ndarray, b: np.ndarray) -> np.ndarray:
        I, J, Kk = self._table()
        prod = a[I] * b[J]
        n = len(self.exps)
        return (np.bincount(Kk, weights=prod.real, minlength=n)
                + 1j * np.bincount(Kk, weights=prod.imag, minlength=n))

    def exp_nilpotent(self, q: np.ndarray) -> np.ndarray:
        """exp(q) for q without constant term."""
        out = np.zeros(len(self), dtype=complex)
        out[0] = 1.0
        term = out.copy()
        for j in range(1, self.K + 1):
            term = self.mul(term, q) / j
            out = out + term
        return out

    def log1p_nilpotent(self, s: np.ndarray) -> np.ndarray:
        """log(1 + s) for s without constant term."""
        out = np.zeros(len(self), dtype=complex)
        term = np.zeros(len(self), dtype=complex)
        term[0] = 1.0
        for j in range(1, self.K + 1):
            term = self.mul(term, s)
            out = out + ((-1) ** (j + 1) / j) * term
        return out

    def unit(self, i: int) -> tuple:
        e = [0] * self.g
        e[i] = 1
        return tuple(e)


@lru_cache(maxsize=None)
def monomial_index(g: int, K: int) -> MonomialIndex:
    return MonomialIndex(g, K)


def indices_to_exponent(indices: Sequence[int], g: int) -> tuple:
    """1-based index multiset -> exponent vector."""
    e = [0] * g
    for i in indices:
        e[i - 1] += 1
    return tuple(e)


# theta ---------------------------------------------------------------------

@dataclass
class ThetaParams:
    tau: np.ndarray
    delta_prime: tuple
    delta_dblprime: tuple
    truncation_radius: float = 0.0
    precision_digits: int = 30
    _offsets: dict = field(default_factory=dict, repr=False)

    def __post_init__(self):
        self.tau = np.asarray(self.tau, dtype=complex)
        self.Y = self.tau.imag.copy()
        self.Yinv = np.linalg.inv(self.Y)
        self.dp = np.array([float(x) for x in self.delta_prime])
        self.dpp = np.array([float(x) for x in self.delta_dblprime])
        if not self.truncation_radius:
            self.truncation_radius = self.radius_for(0)

    @property
    def g(self) -> int:
        return self.tau.shape[0]

    def radius_for(self, order: int) -> float:
        lmin = float(np.min(np.linalg.eigvalsh(self.Y)))
        R = 1.0
        while math.exp(-math.pi * R * R) * (R / math.sqrt(lmin) + 1.0) ** order > TRUNCATION_TOL:
            R += 0.05
        return R

    def offsets(self, order: int) -> np.ndarray:
        """Integer vectors k with ||k||_Y <= R(order) + rounding slack."""
        if order not in self._offsets:
            R = self.radius_for(order)
            L = np.linalg.cholesky(self.Y)
            slack = 0.5 * math.sqrt(self.g * float(np.max(np.linalg.eigvalsh(self.Y))))
            Rp = R + slack
            bound = [int(math.ceil(Rp * math.sqrt(self.Yinv[i, i]))) for i in range(self.g)]
            grids = np.meshgrid(*[np.arange(-b, b + 1) for b in bound], indexing="ij")
            K = np.stack([gr.ravel() for gr in grids], axis=1).astype(float)
            norm = np.sum((K @ L) ** 2, axis=1)
            K = K[norm <= Rp * Rp]
            norm = norm[norm <= Rp * Rp]
            order_ix = np.lexsort(tuple(K.T[::-1]) + (np.round(norm, 12),))
            self._offsets[order] = K[order_ix]
        return self._offsets[order]

    def lattice(self, z: np.ndarray, order: int) -> np.ndarray:
        c = -self.Yinv @ np.asarray(z).imag
        m0 = np.round(c - self.dp)
        return self.offsets(order) + (m0 + self.dp)[None, :]


def theta_taylor(params: ThetaParams, z: np.ndarray, M: np.ndarray, mi: MonomialIndex,
                 backend: str | None = None) -> np.ndarray:
    """Taylor coefficients in variables h, of theta[delta](z + M' h) where the
    derivative linear form of each lattice term is M n."""
    z = np.asarray(z, dtype=complex)
    nvec = params.lattice(z, mi.K)
    return _kernels.lattice_jet(nvec, params.tau, z + params.dpp, M, mi.array, backend)


def theta_jet(params: ThetaParams, z, max_order: int, backend: str | None = None) -> dict:
    """All partial derivatives d^alpha theta[delta](z), |alpha| <= max_order,
    keyed by exponent vector."""
    if max_order > 8:
        raise ValueError("max_order must be <= 8")
    g = params.g
    mi = monomial_index(g, max_order)
    coef = theta_taylor(params, np.asarray(z, dtype=complex), 2j * np.pi * np.eye(g), mi, backend)
    return {e: coef[i] * mi.factorial[i] for i, e in enumerate(mi.exps)}


def theta_value(params: ThetaParams, z) -> complex:
    return theta_jet(params, z, 0)[(0,) * params.g]


def invariant_theta_norm(params: ThetaParams, z) -> float:
    """|theta(z)| exp(-pi Im z . Y^-1 . Im z): periodic up to a bounded factor."""
    z = np.asarray(z, dtype=complex)
    y = z.imag
    return abs(theta_value(params, z)) * math.exp(-math.pi * float(y @ params.Yinv @ y))


def all_characteristics(g: int):
    halves = [tuple(Fraction(b, 2) for b in bits) for bits in itertools.product((0, 1), repeat=g)]
    for dp in halves:
        for dpp in halves:
            yield dp, dpp


def characteristic_parity(dp, dpp) -> int:
    return -1 if int(sum(4 * a * b for a, b in zip(dp, dpp))) % 2 else 1


# characteristic selection -----------------------------------------------------

def strata_points(curve: CurveSpec, periods: PeriodData, rng: np.random.Generator, count: int,
                  k: int | None = None, digits: int = 20) -> list[np.ndarray]:
    """Abel images of k random curve points (default k = g-1)."""
    k = curve.genus - 1 if k is None else k
    out = []
    for _ in range(count):
        pts = [random_curve_point(curve, rng) for _ in range(k)]
        out.append(abel_map(curve, periods, pts, digits=digits).u)
    return out


def select_characteristic(curve: CurveSpec, periods: PeriodData, samples: int = 10,
                          seed: int = 12345, threshold: float = 1e-6, report: dict | None = None):
    """Scan the half-integer characteristics for the one whose theta function
    vanishes on the Abel image of g-1 points."""
    rng = np.random.default_rng(seed)
    g = curve.genus
    Ainv = np.linalg.inv(periods.omega1)
    zs = [Ainv @ u for u in strata_points(curve, periods, rng, samples)] if g > 1 else [np.zeros(1, complex)]
    # typical scale: the invariant norm at random points of the torus
    zr = [rng.uniform(-0.5, 0.5, g) + periods.tau @ rng.uniform(-0.5, 0.5, g) for _ in range(16)]
    rows = []
    for dp, dpp in all_characteristics(g):
        p = ThetaParams(periods.tau, dp, dpp)
        scale = float(np.median([invariant_theta_norm(p, z) for z in zr]))
        res = [invariant_theta_norm(p, z) / scale for z in zs]
        rows.append((dp, dpp, max(res), float(np.mean(res))))
    passing = [r for r in rows if r[2] < threshold]
    if report is not None:
        report["scan"] = [{"delta_prime": [str(x) for x in r[0]], "delta_dblprime": [str(x) for x in r[1]],
                           "max_rel": r[2], "mean_rel": r[3]} for r in sorted(rows, key=lambda r: r[3])[:4]]
        report["passing"] = len(passing)
    if not passing:
        raise CharacteristicError("no characteristic vanishes on the strata sample")
    best = min(passing, key=lambda r: r[3])
    return best[0], best[1]


# sigma -------------------------------------------------------------------------

@dataclass(frozen=True)
class Calibration:
    kappa: np.ndarray
    c: complex
    delta_prime: tuple
    delta_dblprime: tuple
    fit_report: dict = field(default_factory=dict, repr=False)


@dataclass(frozen=True)
class SigmaJet:
    point: np.ndarray
    order: int
    taylor: np.ndarray = field(repr=False)
    index: MonomialIndex = field(repr=False)

    def coef(self, alpha) -> complex:
        return self.taylor[self.index.pos[tuple(alpha)]]

    def deriv(self, alpha) -> complex:
        i = self.index.pos[tuple(alpha)]
        return self.taylor[i] * self.index.factorial[i]

    @property
    def value(self) -> complex:
        return self.taylor[0]

    @property
    def values(self) -> dict:
        return {e: self.taylor[i] * self.index.factorial[i] for i, e in enumerate(self.index.exps)}


class SigmaModel:
    """Precomputed data for repeated sigma evaluations on one curve."""

    def __init__(self, curve: CurveSpec, periods: PeriodData, kappa, c, dp, dpp, backend=None):
        self.curve, self.periods = curve, periods
        self.g = curve.genus
        self.kappa = np.asarray(kappa, dtype=complex)
        self.c = complex(c)
        self.Ainv = np.linalg.inv(periods.omega1)
        self.M = 2j * np.pi * self.Ainv.T
        self.theta = ThetaParams(periods.tau, dp, dpp, precision_digits=periods.precision_digits)
        self.backend = backend

    def theta_u(self, u, K: int) -> np.ndarray:
        """Taylor array in u of theta[delta](A^{-1} u)."""
        mi = monomial_index(self.g, K)
        return theta_taylor(self.theta, self.Ainv @ np.asarray(u, dtype=complex), self.M, mi, self.backend)

    def prefactor(self, u, K: int) -> np.ndarray:
        mi = monomial_index(self.g, K)
        u = np.asarray(u, dtype=complex)
        q = np.zeros(len(mi), dtype=complex)
        if K >= 1:
            p = self.kappa @ u
            for i in range(self.g):
                q[mi.pos[mi.unit(i)]] = p[i]
        if K >= 2:
            for i in range(self.g):
                for j in range(i, self.g):
                    e = [0] * self.g
                    e[i] += 1
                    e[j] += 1
                    q[mi.pos[tuple(e)]] = self.kappa[i, j] * (0.5 if i == j else 1.0)
        return np.exp(0.5 * u @ self.kappa @ u) * mi.exp_nilpotent(q)

    def jet(self, u, K: int) -> SigmaJet:
        mi = monomial_index(self.g, K)
        u = np.asarray(u, dtype=complex)
        t = self.c * mi.mul(self.prefactor(u, K), self.theta_u(u, K))
        return SigmaJet(point=u, order=K, taylor=t, index=mi)

    def value(self, u) -> complex:
        return self.jet(u, 0).value


_MODELS: dict = {}


def sigma_model(curve: CurveSpec, periods: PeriodData, calib: Calibration) -> SigmaModel:
    key = (id(curve), id(periods), id(calib))
    hit = _MODELS.get(key)
    if hit is None:
        hit = SigmaModel(curve, periods, calib.kappa, calib.c, calib.delta_prime, calib.delta_dblprime)
        _MODELS[key] = (hit, curve, periods, calib)
        return hit
    return hit[0]


def sigma(curve: CurveSpec, periods: PeriodData, calib: Calibration, u, max_order: int = 0) -> SigmaJet:
    return sigma_model(curve, periods, calib).jet(u, max_order)


def quasi_periodicity_factor(model: SigmaModel, u, l1, l2) -> complex:
    """sigma(u + l)/sigma(u) predicted for l = A l1 + B l2."""
    A, B = model.periods.omega1, model.periods.omega2
    l1 = np.asarray(l1, dtype=float)
    l2 = np.asarray(l2, dtype=float)
    ell = A @ l1 + B @ l2
    psi = model.kappa @ ell - 2j * np.pi * model.Ainv.T @ l2
    dp, dpp = model.theta.dp, model.theta.dpp
    chi = np.exp(2j * np.pi * (dp @ l1 - dpp @ l2) + 1j * np.pi * (l1 @ l2))
    return chi * np.exp((np.asarray(u) + ell / 2) @ psi)


# automorphisms ---------------------------------------------------------------------

def automorphism_apply(curve: CurveSpec, kind: str, j: int, u) -> np.ndarray:
    """Action of (x,y) -> (zeta x, ...) style automorphisms on u.

    kind='zeta' on (3,4): u_k -> eps^(wt u_k * j) u_k with eps = zeta^2, zeta = exp(2 pi i/3).
    kind='quartic' on y^3 = x^4 + lambda_0: eps = -i.
    """
    u = np.asarray(u, dtype=complex)
    if kind == "zeta":
        if curve.key != (3, 4):
            raise ValidationError("zeta automorphism needs a (3,4) curve")
        eps = np.exp(4j * np.pi / 3)
    elif kind == "quartic":
        if not curve.is_restricted_quartic:
            raise ValidationError("quartic automorphism needs y^3 = x^4 + lambda_0")
        eps = -1j
    else:
        raise ValidationError(f"unknown automorphism kind {kind!r}")
    w = np.array(curve.u_weights)
    return u * eps ** ((w * j) % (3 if kind == "zeta" else 4))


def automorphism_multiplier(curve: CurveSpec, kind: str, j: int) -> complex:
    """Expected sigma([eps^j] u) / sigma(u) = eps^(j * wt sigma)."""
    eps = np.exp(4j * np.pi / 3) if kind == "zeta" else -1j
    return eps ** ((curve.sigma_weight * j) % (3 if kind == "zeta" else 4))


# calibration -------------------------------------------------------------------

def sample_fundamental(periods: PeriodData, rng: np.random.Generator, count: int,
                       model: SigmaModel | None = None, keep_quantile: float = 0.2) -> list[np.ndarray]:
    """Random u in the fundamental parallelotope, rejecting the smallest
    ``keep_quantile`` fraction by invariant theta magnitude."""
    g = periods.genus
    cand = []
    for _ in range(int(math.ceil(count / (1 - keep_quantile))) + 2):
        xi, eta = rng.uniform(-0.5, 0.5, g), rng.uniform(-0.5, 0.5, g)
        cand.append(periods.omega1 @ xi + periods.omega2 @ eta)
    if model is None:
        return cand[:count]
    Ainv = np.linalg.inv(periods.omega1)
    mags = np.array([invariant_theta_norm(model.theta, Ainv @ u) for u in cand])
    cut = np.quantile(mags, keep_quantile)
    kept = [u for u, m in zip(cand, mags) if m > cut]
    return kept[:count]


def _pairs(g):
    return [(i, j) for i in range(g) for j in range(i, g)]


def _kappa_from_vec(v, g):
    K = np.zeros((g, g), dtype=complex)
    for x, (i, j) in zip(v, _pairs(g)):
        K[i, j] = K[j, i] = x
    return K


def fit_kappa(curve: CurveSpec, model: SigmaModel, points, relations, extra=None,
              max_iter: int = 60, tol: float = 1e-14):
    """Damped Gauss-Newton for kappa.

    ``relations`` are objects with ``residual(lookup, lam) -> (value, scale)``
    where ``lookup(fid)`` evaluates P and Q function ids.  The 4-index and
    higher functions do not depend on kappa; 2-index ones shift by -kappa.
    """
    from .abelfunc import log_taylor

    g = curve.genus
    mi = monomial_index(g, 4)
    logs = []
    for u in points:
        th = model.theta_u(u, 4)
        logs.append(log_taylor(mi, th))
    lam = curve.lam

    def residuals(v):
        K = _kappa_from_vec(v, g)
        out = []
        for L in logs:
            look = _lookup_from_log(mi, L, K)
            for rel in relations:
                val, scale = rel.residual(look, lam)
                out.append(val / max(scale, 1e-300))
        if extra is not None:
            out.extend(extra(K))
        return np.array(out, dtype=complex)

    v = np.zeros(len(_pairs(g)), dtype=complex)
    r = residuals(v)
    trace = [float(np.linalg.norm(r))]
    sv = None
    for it in range(max_iter):
        h = 1e-7
        J = np.empty((len(r), len(v)), dtype=complex)
        for k in range(len(v)):
            dv = np.zeros_like(v)
            dv[k] = h
            J[:, k] = (residuals(v + dv) - residuals(v - dv)) / (2 * h)
        sv = np.linalg.svd(J, compute_uv=False)
        step = np.linalg.lstsq(J, -r, rcond=1e-10)[0]
        lam_damp = 1.0
        while True:
            r_new = residuals(v + lam_damp * step)
            if np.linalg.norm(r_new) <= np.linalg.norm(r) or lam_damp < 1e-4:
                break
            lam_damp *= 0.5
        v = v + lam_damp * step
        r = r_new
        trace.append(float(np.linalg.norm(r)))
        if np.linalg.norm(lam_damp * step) < tol * (1 + np.linalg.norm(v)):
            break
    else:
        raise CalibrationError(f"kappa fit did not converge; residual trace {trace[-5:]}")
    _, sv, Vh = np.linalg.svd(J)
    rank = int(np.sum(sv > 1e-8 * sv[0])) if len(sv) else 0
    # directions the relations do not see; the step above is minimum-norm, so
    # the fitted kappa has no component along them
    null = [[complex(x) for x in Vh[k].conj()] for k in range(rank, len(v))]
    return _kappa_from_vec(v, g), {"trace": trace, "jacobian_rank": rank, "unknowns": len(v),
                                   "final_residual": trace[-1], "null_space": null,
                                   "pair_order": [list(p) for p in _pairs(g)]}


def _lookup_from_log(mi: MonomialIndex, L: np.ndarray, kappa: np.ndarray) -> Callable:
    from .abelfunc import wp_from_log

    cache = {}

    def P(idx):
        idx = tuple(sorted(idx))
        if idx not in cache:
            v = wp_from_log(mi, L, idx)
            if len(idx) == 2:
                v -= kappa[idx[0] - 1, idx[1] - 1]
            cache[idx] = v
        return cache[idx]

    def look(fid):
        if fid.family == "P":
            return P(fid.indices)
        if fid.family == "Q" and len(fid.indices) == 4:
            i, j, k, l = fid.indices
            return P((i, j, k, l)) - 2 * (P((i, j)) * P((k, l)) + P((i, k)) * P((j, l)) + P((i, l)) * P((j, k)))
        raise ValueError(f"calibration lookup cannot evaluate {fid}")
    return look


def expansion_structure_residuals(curve: CurveSpec, model: SigmaModel, K: int = 6):
    """Taylor coefficients at u = 0 of exp(u.kappa.u/2) theta(A^{-1}u) on
    monomials of weight below wt(sigma); they vanish for the correct kappa.
    Returns a function of kappa (scaled residual list) and the monomials used."""
    g = curve.genus
    mi = monomial_index(g, K)
    th = model.theta_u(np.zeros(g), K)
    w = np.array(curve.u_weights)
    sel = [i for i, e in enumerate(mi.exps) if 0 < sum(e) and int(np.dot(e, w)) < curve.sigma_weight]
    sw = schur_weierstrass(curve)
    lead = [i for i, e in enumerate(mi.exps) if e in sw.terms]
    scale = max(abs(th[i]) for i in lead) if lead else max(abs(th).max(), 1e-300)

    def f(kappa):
        saved = model.kappa
        model.kappa = kappa
        try:
            pre = model.prefactor(np.zeros(g), K)
        finally:
            model.kappa = saved
        s = mi.mul(pre, th)
        return [s[i] / scale for i in sel]
    return f, [mi.exps[i] for i in sel]


def normalization_constant(curve: CurveSpec, model: SigmaModel, rng: np.random.Generator,
                           t0: float = 0.6, q: float = 0.8, levels: int = 7):
    """c from sigma_{c=1}(t o u0) / (t^wt SW(u0)) -> 1/c as t -> 0, with
    Richardson extrapolation in t^n.  Also returns the jet-coefficient value."""
    from .exactpoly import eval_exact

    g, n, wt = curve.genus, curve.n, curve.sigma_weight
    sw = schur_weierstrass(curve)
    w = np.array(curve.u_weights)
    saved = model.c
    model.c = 1.0
    try:
        for _ in range(20):
            u0 = rng.uniform(-1, 1, g) + 1j * rng.uniform(-1, 1, g)
            swv = complex(eval_exact(sw, {f"u{i + 1}": complex(u0[i]) for i in range(g)}))
            if abs(swv) > 0.2:
                break
        ts = [t0 * q ** k for k in range(levels)]
        vals = [model.value(u0 * t ** w) / (t ** wt * swv) for t in ts]
        # Neville in x = t^n towards x = 0
        xs = [t ** n for t in ts]
        table = [list(vals)]
        estimates = [vals[0]]
        for k in range(1, levels):
            prev = table[-1]
            row = [((0 - xs[i]) * prev[i + 1] - (0 - xs[i + k]) * prev[i]) / (xs[i + k] - xs[i])
                   for i in range(levels - k)]
            table.append(row)
            estimates.append(row[-1])
        inv_c = estimates[-1]
        spread = abs(estimates[-1] - estimates[-2]) / abs(inv_c)
        # jet route: coefficient of the lowest-degree SW monomial
        e, coeff = min(sw.terms.items(), key=lambda t: (sum(t[0]), t[0]))
        K = sum(e)
        mi = monomial_index(g, K)
        s = mi.mul(model.prefactor(np.zeros(g), K), model.theta_u(np.zeros(g), K))
        inv_c_jet = s[mi.pos[tuple(e)]] / complex(coeff)
    finally:
        model.c = saved
    return 1.0 / inv_c, 1.0 / inv_c_jet, {"richardson_spread": float(spread),
                                         "richardson_estimates": [complex(x) for x in estimates]}


def calibrate(curve: CurveSpec, periods: PeriodData, seed: int = 2024, fit_points: int = 4,
              relations=None, characteristic=None) -> Calibration:
    rng = np.random.default_rng(seed)
    report: dict = {}
    if characteristic is None:
        char_report: dict = {}
        dp, dpp = select_characteristic(curve, periods, report=char_report)
        report["characteristic"] = char_report
    else:
        dp, dpp = characteristic
    g = curve.genus
    model = SigmaModel(curve, periods, np.zeros((g, g)), 1.0, dp, dpp)
    if relations is None:
        from .relationdb import calibration_relations
        relations = calibration_relations(curve)
    points = sample_fundamental(periods, rng, fit_points, model)
    struct_f, struct_monos = expansion_structure_residuals(curve, model)
    kappa, fit = fit_kappa(curve, model, points, relations)
    fit["identified"] = fit["jacobian_rank"] == fit["unknowns"]
    report["kappa_fit"] = fit
    report["fit_relations"] = [getattr(r, "label", str(i)) for i, r in enumerate(relations)]
    report["expansion_structure_max"] = float(max((abs(x) for x in struct_f(kappa)), default=0.0))
    model.kappa = kappa
    c, c_jet, crep = normalization_constant(curve, model, rng)
    crep["c_jet"] = c_jet
    crep["relative_difference"] = float(abs(c - c_jet) / abs(c_jet))
    report["normalization"] = crep
    if crep["relative_difference"] > 1e-5:
        raise CalibrationError(f"normalization routes disagree: {c} vs {c_jet}")
    return Calibration(kappa=kappa, c=c, delta_prime=tuple(dp), delta_dblprime=tuple(dpp), fit_report=report)
