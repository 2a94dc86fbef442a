"""Cyclic (n,s) curves  y^n = x^s + sum_j lambda_j x^j  and their weight data."""
from __future__ import annotations

import cmath
import json
import math
from dataclasses import dataclass
from fractions import Fraction
from pathlib import Path
from typing import Sequence

import numpy as np

from .exactpoly import GradedPoly, Ring, curve_ring

SUPPORTED = {(2, 3), (2, 7), (3, 4), (2, 9)}

# Reference characteristics (reduced mod 1) for the classical cycle choices.
# Used only as expected outcomes; the runtime selection never assumes them.
REFERENCE_CHARACTERISTICS = {
    (2, 7): ((Fraction(3, 2), Fraction(1), Fraction(1, 2)),
             (Fraction(1, 2), Fraction(1, 2), Fraction(1, 2))),
    (3, 4): ((Fraction(0), Fraction(1, 2), Fraction(0)),
             (Fraction(0), Fraction(1, 2), Fraction(0))),
    (2, 3): ((Fraction(1, 2),), (Fraction(1, 2),)),
}

# Hard-coded Schur-Weierstrass polynomials used to validate the construction.
SW_REFERENCE = {
    (2, 3): "1 * u1",
    (2, 7): "1/45 * u3^6 + -1/3 * u2 u3^3 + -1 * u2^2 + 1 * u1 u3",
    (3, 4): "1/20 * u3^5 + -1 * u2^2 u3 + 1 * u1",
}


class CapabilityError(ValueError):
    pass


class ValidationError(ValueError):
    pass


def gap_sequence(n: int, s: int) -> tuple[int, ...]:
    """Weierstrass gaps of the semigroup <n,s>, decreasing."""
    g = (n - 1) * (s - 1) // 2
    top = 2 * g
    rep = {a * n + b * s for a in range(top // n + 1) for b in range(top // s + 1)}
    gaps = [k for k in range(1, top) if k not in rep]
    assert len(gaps) == g
    return tuple(sorted(gaps, reverse=True))


def differential_numerators(n: int, s: int) -> tuple[tuple[int, int], ...]:
    """Exponents (a, b) of x^a y^b in du_i = x^a y^b dx / f_y, ordered by
    decreasing weight of u_i."""
    g = (n - 1) * (s - 1) // 2
    mons = [(a, b) for a in range(2 * g) for b in range(n - 1)
            if n * a + s * b <= 2 * g - 2]
    mons.sort(key=lambda ab: n * ab[0] + s * ab[1])
    assert len(mons) == g
    return tuple(mons)


@dataclass(frozen=True)
class CurveSpec:
    n: int
    s: int
    lam: tuple[complex, ...]
    genus: int
    u_weights: tuple[int, ...]
    lambda_weights: tuple[int, ...]
    sigma_weight: int
    parity_sign: int
    differentials: tuple[tuple[int, int], ...]
    delta_prime: tuple | None = None
    delta_dblprime: tuple | None = None
    name: str = ""

    @property
    def key(self) -> tuple[int, int]:
        return (self.n, self.s)

    @property
    def tag(self) -> str:
        return f"c{self.n}{self.s}"

    @property
    def is_restricted_quartic(self) -> bool:
        return self.key == (3, 4) and all(abs(c) == 0 for c in self.lam[1:])

    def ring(self) -> Ring:
        return curve_ring(self.u_weights, self.lambda_weights)

    def u_ring(self) -> Ring:
        return curve_ring(self.u_weights)

    def poly_coeffs(self) -> np.ndarray:
        """Coefficients of x^s + sum lambda_j x^j, highest degree first."""
        c = np.zeros(self.s + 1, dtype=complex)
        c[0] = 1.0
        for j, l in enumerate(self.lam):
            c[self.s - j] = l
        return c

    def radicand(self, x):
        return np.polyval(self.poly_coeffs(), x)

    def branch_points(self) -> np.ndarray:
        return np.roots(self.poly_coeffs())

    def to_json(self) -> dict:
        return {"n": self.n, "s": self.s, "lambda": [[l.real, l.imag] for l in self.lam]}


def make_curve(n: int, s: int, lam: Sequence = None, name: str = "") -> CurveSpec:
    if math.gcd(n, s) != 1:
        raise ValidationError(f"gcd({n},{s}) != 1")
    if (n, s) not in SUPPORTED:
        raise CapabilityError(f"unsupported curve ({n},{s})")
    lam = tuple(complex(l) for l in (lam if lam is not None else [0] * s))
    if len(lam) != s:
        raise ValidationError(f"lambda must have length {s}")
    g = (n - 1) * (s - 1) // 2
    wt = (n * n - 1) * (s * s - 1) // 24
    ref = REFERENCE_CHARACTERISTICS.get((n, s))
    dp = dpp = None
    if ref:
        dp = tuple(x % 1 for x in ref[0])
        dpp = tuple(x % 1 for x in ref[1])
    return CurveSpec(n=n, s=s, lam=lam, genus=g, u_weights=gap_sequence(n, s),
                     lambda_weights=tuple(-n * (s - j) for j in range(s)),
                     sigma_weight=wt, parity_sign=(-1) ** wt,
                     differentials=differential_numerators(n, s),
                     delta_prime=dp, delta_dblprime=dpp, name=name or f"c{n}{s}")


def _complete_homogeneous(ring: Ring, times: dict[int, GradedPoly], kmax: int) -> list[GradedPoly]:
    # sum_k h_k z^k = exp(sum_w t_w z^w);  k h_k = sum_j j t_j h_{k-j}
    h = [ring.one()]
    for k in range(1, kmax + 1):
        acc = ring.zero()
        for j, t in times.items():
            if j <= k:
                acc = acc + t * h[k - j] * j
        h.append(acc * Fraction(1, k))
    return h


def _det(m: list[list[GradedPoly]], ring: Ring) -> GradedPoly:
    if len(m) == 1:
        return m[0][0]
    total = ring.zero()
    for j, entry in enumerate(m[0]):
        if entry.is_zero():
            continue
        minor = [row[:j] + row[j + 1:] for row in m[1:]]
        term = entry * _det(minor, ring)
        total = total + (term if j % 2 == 0 else -term)
    return total


def schur_weierstrass(curve: CurveSpec) -> GradedPoly:
    """Schur polynomial of the gap partition in the variables t_{w_i} = u_i."""
    ring = curve.u_ring()
    gaps = curve.u_weights
    g = curve.genus
    part = [gaps[i] - (g - 1 - i) for i in range(g)]
    times = {w: ring.var(f"u{i + 1}") for i, w in enumerate(gaps)}
    h = _complete_homogeneous(ring, times, max(part) + g)

    def H(k):
        return h[k] if k >= 0 else ring.zero()

    mat = [[H(part[i] - i + j) for j in range(g)] for i in range(g)]
    sw = _det(mat, ring)
    ref = SW_REFERENCE.get(curve.key)
    if ref is not None:
        from .exactpoly import parse_text
        if sw != parse_text(ref, ring):
            raise AssertionError(f"Schur construction disagrees with reference for {curve.key}")
    return sw


class YRoots(list):
    """The n values of y over x; ``singular`` marks a branch point."""
    singular: bool = False


def curve_rhs(curve: CurveSpec, x: complex, tol: float = 1e-12) -> YRoots:
    """Sheet convention: principal n-th root of the radicand times
    exp(2 pi i k / n) for k = 0..n-1."""
    r = complex(curve.radicand(complex(x)))
    y0 = r ** (1.0 / curve.n) if r != 0 else 0j
    out = YRoots(y0 * cmath.exp(2j * math.pi * k / curve.n) for k in range(curve.n))
    scale = max(1.0, abs(complex(x))) ** curve.s
    out.singular = abs(r) <= tol * scale
    return out


# JSON and named curves -------------------------------------------------------

def _parse_scalar(v) -> complex:
    if isinstance(v, (list, tuple)):
        return complex(float(v[0]), float(v[1]))
    if isinstance(v, str):
        v = v.strip()
        if "/" in v and "j" not in v:
            return complex(Fraction(v))
        return complex(v.replace(" ", ""))
    return complex(v)


def curve_from_json(obj: dict) -> CurveSpec:
    n, s = int(obj["n"]), int(obj["s"])
    lam = obj.get("lambda")
    if lam is None:
        raise ValidationError("curve JSON needs a 'lambda' list")
    return make_curve(n, s, [_parse_scalar(v) for v in lam], name=obj.get("name", ""))


def load_curve(path: str | Path) -> CurveSpec:
    with open(path) as fh:
        return curve_from_json(json.load(fh))


NAMED = {"c23": (2, 3), "c27": (2, 7), "c34": (3, 4), "c29": (2, 9), "c34r": (3, 4)}


def random_lambda(n: int, s: int, rng: np.random.Generator, restricted: bool = False,
                  real: bool = False, min_sep: float = 0.15, radius: float = 1.0) -> list[complex]:
    """Random curve coefficients in the polydisc of given radius, rejecting
    curves whose branch points come closer than ``min_sep``."""
    for _ in range(1000):
        if restricted:
            lam = [0j] * s
            a = rng.uniform(0.3, 1.0) * radius
            lam[0] = a * (cmath.exp(2j * math.pi * rng.uniform()) if not real else rng.choice([-1, 1]))
        else:
            r = radius * np.sqrt(rng.uniform(size=s))
            ph = 0.0 if real else rng.uniform(0, 2 * math.pi, size=s)
            lam = list(r * np.exp(1j * ph) * (rng.choice([-1, 1], size=s) if real else 1))
        c = make_curve(n, s, lam)
        e = c.branch_points()
        d = min(abs(a - b) for i, a in enumerate(e) for b in e[i + 1:])
        if d > min_sep:
            return [complex(x) for x in lam]
    raise RuntimeError("could not draw a well separated curve")


def named_curve(tag: str, rng: np.random.Generator | None = None) -> CurveSpec:
    if tag not in NAMED:
        raise CapabilityError(f"unknown curve tag {tag!r}")
    n, s = NAMED[tag]
    rng = rng or np.random.default_rng(0)
    lam = random_lambda(n, s, rng, restricted=(tag == "c34r"))
    return make_curve(n, s, lam, name=tag)
