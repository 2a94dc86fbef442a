"""Exact weight-graded multivariate polynomials over the rationals.

Coefficients are :class:`fractions.Fraction`.  Every polynomial lives in a
:class:`Ring`, a fixed tuple of variable names with a Sato weight attached to
each.  Exponent vectors are dense tuples with the ring's arity.
"""
from __future__ import annotations

import re
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Mapping, Union

Rational = Fraction
Number = Union[int, Fraction, complex, float]


class StructuralError(ValueError):
    """Mismatched rings, missing assignments, malformed text."""


@dataclass(frozen=True)
class Ring:
    names: tuple[str, ...]
    weights: tuple[int, ...]

    def __post_init__(self):
        if len(self.names) != len(self.weights):
            raise StructuralError("names and weights differ in length")
        if len(set(self.names)) != len(self.names):
            raise StructuralError("duplicate variable names")

    @property
    def arity(self) -> int:
        return len(self.names)

    def index(self, name: str) -> int:
        try:
            return self.names.index(name)
        except ValueError:
            raise StructuralError(f"unknown variable {name!r}") from None

    def zero(self) -> "GradedPoly":
        return GradedPoly(self, {})

    def one(self) -> "GradedPoly":
        return self.const(1)

    def const(self, c) -> "GradedPoly":
        c = Fraction(c)
        return GradedPoly(self, {(0,) * self.arity: c} if c else {})

    def var(self, name: str) -> "GradedPoly":
        e = [0] * self.arity
        e[self.index(name)] = 1
        return GradedPoly(self, {tuple(e): Fraction(1)})

    def gens(self) -> list["GradedPoly"]:
        return [self.var(n) for n in self.names]


def curve_ring(u_weights: Iterable[int], lambda_weights: Iterable[int] = ()) -> Ring:
    """Ring in u1..ug followed by l0..l_{s-1}."""
    uw = tuple(u_weights)
    lw = tuple(lambda_weights)
    names = tuple(f"u{i + 1}" for i in range(len(uw))) + tuple(f"l{j}" for j in range(len(lw)))
    return Ring(names, uw + lw)


@dataclass(frozen=True)
class Inhomogeneous:
    """Verdict of :func:`weight_of` when two monomials disagree."""
    first: int
    second: int

    def __str__(self):
        return f"inhomogeneous ({self.first} vs {self.second})"


@dataclass(frozen=True, eq=False)
class GradedPoly:
    ring: Ring
    terms: Mapping[tuple, Fraction] = field(default_factory=dict)

    def __post_init__(self):
        clean = {}
        for e, c in self.terms.items():
            if len(e) != self.ring.arity:
                raise StructuralError("exponent vector arity mismatch")
            c = Fraction(c)
            if c:
                clean[tuple(e)] = c
        object.__setattr__(self, "terms", clean)

    # ring operations -------------------------------------------------
    def _check(self, other: "GradedPoly"):
        if not isinstance(other, GradedPoly):
            raise StructuralError("operand is not a GradedPoly")
        if other.ring != self.ring:
            raise StructuralError("ring (arity/weight table) mismatch")

    def _lift(self, other) -> "GradedPoly":
        if isinstance(other, GradedPoly):
            self._check(other)
            return other
        if isinstance(other, (int, Fraction)):
            return self.ring.const(other)
        raise StructuralError(f"cannot combine GradedPoly with {type(other).__name__}")

    def __add__(self, other):
        other = self._lift(other)
        out = dict(self.terms)
        for e, c in other.terms.items():
            out[e] = out.get(e, 0) + c
        return GradedPoly(self.ring, out)

    __radd__ = __add__

    def __neg__(self):
        return GradedPoly(self.ring, {e: -c for e, c in self.terms.items()})

    def __sub__(self, other):
        return self + (-self._lift(other))

    def __rsub__(self, other):
        return self._lift(other) - self

    def __mul__(self, other):
        other = self._lift(other)
        out: dict = {}
        for e1, c1 in self.terms.items():
            for e2, c2 in other.terms.items():
                e = tuple(a + b for a, b in zip(e1, e2))
                out[e] = out.get(e, 0) + c1 * c2
        return GradedPoly(self.ring, out)

    __rmul__ = __mul__

    def __pow__(self, k: int):
        if k < 0:
            raise StructuralError("negative power")
        result = self.ring.one()
        base = self
        while k:
            if k & 1:
                result = result * base
            base = base * base
            k >>= 1
        return result

    def __eq__(self, other):
        if isinstance(other, (int, Fraction)):
            other = self.ring.const(other)
        if not isinstance(other, GradedPoly):
            return NotImplemented
        return self.ring == other.ring and self.terms == other.terms

    def __hash__(self):
        return hash((self.ring, frozenset(self.terms.items())))

    def __bool__(self):
        return bool(self.terms)

    def __repr__(self):
        return f"GradedPoly({to_text(self)!r})"

    def is_zero(self) -> bool:
        return not self.terms

    def is_constant(self) -> bool:
        return all(not any(e) for e in self.terms)

    def monomial_weight(self, e) -> int:
        return sum(a * w for a, w in zip(e, self.ring.weights))

    def sorted_terms(self):
        """Terms in canonical graded-lex order: (weight, exponent vector)."""
        return sorted(self.terms.items(), key=lambda t: (self.monomial_weight(t[0]), t[0]))

    def degree_in(self, name: str) -> int:
        i = self.ring.index(name)
        return max((e[i] for e in self.terms), default=0)

    def substitute_zero(self, names: Iterable[str]) -> "GradedPoly":
        idx = [self.ring.index(n) for n in names]
        return GradedPoly(self.ring, {e: c for e, c in self.terms.items() if all(e[i] == 0 for i in idx)})


def add(a: GradedPoly, b: GradedPoly) -> GradedPoly:
    return a + b


def mul(a: GradedPoly, b: GradedPoly) -> GradedPoly:
    return a * b


def diff(a: GradedPoly, var: Union[str, int]) -> GradedPoly:
    i = a.ring.index(var) if isinstance(var, str) else var
    out = {}
    for e, c in a.terms.items():
        if e[i]:
            e2 = list(e)
            e2[i] -= 1
            out[tuple(e2)] = c * e[i]
    return GradedPoly(a.ring, out)


def weight_of(p: GradedPoly) -> Union[int, Inhomogeneous, None]:
    """Common Sato weight of all monomials, an :class:`Inhomogeneous` verdict,
    or ``None`` for the zero polynomial (which has every weight)."""
    w0 = None
    for e in p.terms:
        w = p.monomial_weight(e)
        if w0 is None:
            w0 = w
        elif w != w0:
            return Inhomogeneous(w0, w)
    return w0


def eval_exact(p: GradedPoly, assignment: Mapping[str, Number]):
    """Evaluate ``p``.  Exact when every assigned value is rational."""
    missing = [n for i, n in enumerate(p.ring.names)
               if n not in assignment and any(e[i] for e in p.terms)]
    if missing:
        raise StructuralError(f"missing assignment for {missing}")
    vals = [assignment.get(n, 0) for n in p.ring.names]
    vals = [Fraction(v) if isinstance(v, int) else v for v in vals]
    total = Fraction(0)
    for e, c in p.sorted_terms():
        t = c
        for v, k in zip(vals, e):
            if k:
                t = t * v ** k
        total = total + t
    return total


# exact division and rational limits -----------------------------------------

def _lex_leading(p: GradedPoly):
    e = max(p.terms)
    return e, p.terms[e]


def divide_exact(a: GradedPoly, b: GradedPoly) -> GradedPoly | None:
    """Quotient ``a / b`` if ``b`` divides ``a`` exactly, else ``None``.

    Lex-leading-term division: if b | a then LT(b) | LT(r) at every step, so a
    failed monomial division proves non-divisibility.
    """
    a._check(b)
    if b.is_zero():
        raise ZeroDivisionError("division by zero polynomial")
    eb, cb = _lex_leading(b)
    q: dict = {}
    r = a
    while not r.is_zero():
        er, cr = _lex_leading(r)
        de = tuple(x - y for x, y in zip(er, eb))
        if any(d < 0 for d in de):
            return None
        c = cr / cb
        q[de] = q.get(de, 0) + c
        r = r - GradedPoly(a.ring, {de: c}) * b
    return GradedPoly(a.ring, q)


def reduce_power(numer: GradedPoly, base: GradedPoly, power: int):
    """Cancel factors of ``base`` from ``numer / base**power``.

    Returns ``(numer', power')`` with ``numer'/base**power'`` equal to the input
    and ``base`` not dividing ``numer'`` whenever ``power' > 0``.
    """
    while power > 0 and not numer.is_zero():
        q = divide_exact(numer, base)
        if q is None:
            break
        numer, power = q, power - 1
    if numer.is_zero():
        power = 0
    return numer, power


def rational_limit_pole_order(numer: GradedPoly, denom_base: GradedPoly, k_max: int,
                              denom_power: int) -> int:
    """Smallest ``k`` with ``numer / denom_base**denom_power * denom_base**k``
    a polynomial.  Raises if that ``k`` exceeds ``k_max``."""
    _, k = reduce_power(numer, denom_base, denom_power)
    if k > k_max:
        raise ValueError(f"pole order > {k_max}")
    return k


# text form ------------------------------------------------------------------

def _fmt_coeff(c: Fraction) -> str:
    return f"{c.numerator}/{c.denominator}" if c.denominator != 1 else str(c.numerator)


def to_text(p: GradedPoly) -> str:
    """Canonical text: ``coeff * u1^a u2^b l0^d`` joined by `` + ``."""
    if p.is_zero():
        return "0"
    parts = []
    for e, c in p.sorted_terms():
        mono = " ".join(n if k == 1 else f"{n}^{k}" for n, k in zip(p.ring.names, e) if k)
        parts.append(f"{_fmt_coeff(c)} * {mono}" if mono else _fmt_coeff(c))
    return " + ".join(parts)


_TERM_RE = re.compile(r"^\s*([+-]?\d+(?:/\d+)?)\s*(?:\*\s*(.*))?$")


def parse_text(text: str, ring: Ring) -> GradedPoly:
    """Inverse of :func:`to_text`."""
    text = text.strip()
    if text == "0":
        return ring.zero()
    out: dict = {}
    for chunk in text.split(" + "):
        m = _TERM_RE.match(chunk)
        if not m:
            raise StructuralError(f"cannot parse term {chunk!r}")
        c = Fraction(m.group(1))
        e = [0] * ring.arity
        for factor in (m.group(2) or "").split():
            name, _, k = factor.partition("^")
            e[ring.index(name)] += int(k) if k else 1
        e = tuple(e)
        out[e] = out.get(e, 0) + c
    return GradedPoly(ring, out)
