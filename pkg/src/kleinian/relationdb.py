"""Relation database: DSL, numeric verifier, audits and rank checks.

Relations are stored as JSON expression trees (see ``node_from_json``).  A
compact text form is accepted as well, e.g.

    P[3,3,3,3] = 4*P[2,3] + 4*P[3,3]*L6 + 2*L5 + 6*P[3,3]^2
    S@(u+v)*S@(u-v)*S@(u)^-2*S@(v)^-2 = DELTA27@(u) - P[1,1]@(v)*P[3,3]@(u)

``F@(arg)`` evaluates a function at a point combination such as
``u+zeta^1 v+zeta^2 w``; ``S`` is sigma itself.  Without ``@`` the point is u.
"""
from __future__ import annotations

import itertools
import json
import os
import re
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path
from typing import Callable, Iterable, Sequence

import numpy as np

from .abelfunc import (EvalContext, FunctionId, PointValues, WpPoly, basis_catalog, catalog_order,
                       catalog_value, definition, parse_function_id)
from .curvedef import CapabilityError, CurveSpec, ValidationError
from .exactpoly import GradedPoly, Ring
from .thetasigma import automorphism_apply

DATA_DIR = Path(__file__).parent / "data"


class ParseError(ValueError):
    pass


class IntegrityError(ValueError):
    pass


class SamplingError(RuntimeError):
    pass


def data_dir() -> Path:
    env = os.environ.get("KLEINIAN_DATA_DIR")
    return Path(env) if env else DATA_DIR


# ---------------------------------------------------------------------------
# point arguments

@dataclass(frozen=True)
class PointArg:
    """sum of coeff * [aut^power] name."""
    terms: tuple = (("1", "", 0, "u"),)

    @staticmethod
    def parse(text: str) -> "PointArg":
        s = text.replace(" ", "")
        if not s:
            raise ParseError("empty point argument")
        parts = re.findall(r"([+-]?)(\d*)((?:zeta|i)\^-?\d+)?([uvw])", s)
        if "".join("".join(p) for p in parts) != s:
            raise ParseError(f"bad point argument {text!r}")
        terms = []
        for sign, num, aut, name in parts:
            c = int(num or "1") * (-1 if sign == "-" else 1)
            a, p = ("", 0)
            if aut:
                a, p = aut.split("^")
                p = int(p)
            terms.append((c, a, p, name))
        return PointArg(tuple(terms))

    @staticmethod
    def from_json(arg) -> "PointArg":
        if isinstance(arg, str):
            return PointArg.parse(arg)
        terms = []
        for item in arg:
            if not (isinstance(item, list) and len(item) == 2):
                raise ParseError(f"point argument entries must be [coeff, point]: {item!r}")
            c = int(item[0])
            rest = item[1].strip()
            m = re.fullmatch(r"(?:(zeta|i)\^(-?\d+)\s+)?([uvw])", rest)
            if not m:
                raise ParseError(f"bad point reference {rest!r}")
            terms.append((c, m.group(1) or "", int(m.group(2) or 0), m.group(3)))
        return PointArg(tuple(terms))

    def __post_init__(self):
        norm = []
        for t in self.terms:
            c, a, p, n = t
            norm.append((int(c), a, int(p), n))
        object.__setattr__(self, "terms", tuple(norm))

    def to_json(self):
        return [[f"{c:+d}", (f"{a}^{p} {n}" if a else n)] for c, a, p, n in self.terms]

    def __str__(self):
        out = ""
        for c, a, p, n in self.terms:
            s = ("+" if c > 0 else "-") + (str(abs(c)) if abs(c) != 1 else "")
            s += (f"{a}^{p} " if a else "") + n
            out += s
        return out.lstrip("+")

    def names(self) -> set:
        return {n for _, _, _, n in self.terms}

    def substitute(self, mapping: dict) -> "PointArg":
        return PointArg(tuple((c, a, p, mapping.get(n, n)) for c, a, p, n in self.terms))

    def evaluate(self, curve: CurveSpec, points: dict) -> np.ndarray:
        g = curve.genus
        acc = np.zeros(g, dtype=complex)
        for c, a, p, n in self.terms:
            v = np.asarray(points[n], dtype=complex)
            if a == "zeta":
                v = automorphism_apply(curve, "zeta", p, v)
            elif a == "i":
                v = automorphism_apply(curve, "quartic", p, v)
            acc = acc + c * v
        return acc


U = PointArg()


# ---------------------------------------------------------------------------
# expression nodes

@dataclass(frozen=True)
class Node:
    def children(self) -> tuple:
        return ()


@dataclass(frozen=True)
class Rat(Node):
    v: Fraction


@dataclass(frozen=True)
class Lam(Node):
    j: int


@dataclass(frozen=True)
class Fn(Node):
    fid: FunctionId
    arg: PointArg = U


@dataclass(frozen=True)
class Sig(Node):
    arg: PointArg = U


@dataclass(frozen=True)
class Sum(Node):
    xs: tuple

    def children(self):
        return self.xs


@dataclass(frozen=True)
class Prod(Node):
    xs: tuple

    def children(self):
        return self.xs


@dataclass(frozen=True)
class Pow(Node):
    b: Node
    e: int

    def children(self):
        return (self.b,)


def walk(node: Node):
    yield node
    for c in node.children():
        yield from walk(c)


def node_from_json(obj, where: str = "$") -> Node:
    if not isinstance(obj, dict) or "k" not in obj:
        raise ParseError(f"{where}: node must be an object with key 'k'")
    k = obj["k"]
    try:
        if k == "rat":
            return Rat(Fraction(str(obj["v"])))
        if k == "lam":
            return Lam(int(obj["j"]))
        if k == "fn":
            return Fn(parse_function_id(obj["id"]), PointArg.from_json(obj.get("arg", "u")))
        if k == "sigma":
            return Sig(PointArg.from_json(obj.get("arg", "u")))
        if k in ("sum", "prod"):
            xs = tuple(node_from_json(x, f"{where}.xs[{i}]") for i, x in enumerate(obj["xs"]))
            return Sum(xs) if k == "sum" else Prod(xs)
        if k == "pow":
            return Pow(node_from_json(obj["b"], f"{where}.b"), int(obj["e"]))
    except KeyError as exc:
        raise ParseError(f"{where}: node of kind {k!r} is missing key {exc.args[0]!r}") from None
    except ValidationError as exc:
        raise ParseError(f"{where}: {exc}") from None
    raise ParseError(f"{where}: unknown node kind {k!r}")


def node_to_json(n: Node):
    if isinstance(n, Rat):
        return {"k": "rat", "v": str(n.v)}
    if isinstance(n, Lam):
        return {"k": "lam", "j": n.j}
    if isinstance(n, Fn):
        out = {"k": "fn", "id": str(n.fid)}
        if n.arg != U:
            out["arg"] = n.arg.to_json()
        return out
    if isinstance(n, Sig):
        return {"k": "sigma", "arg": n.arg.to_json()}
    if isinstance(n, Sum):
        return {"k": "sum", "xs": [node_to_json(x) for x in n.xs]}
    if isinstance(n, Prod):
        return {"k": "prod", "xs": [node_to_json(x) for x in n.xs]}
    if isinstance(n, Pow):
        return {"k": "pow", "b": node_to_json(n.b), "e": n.e}
    raise TypeError(n)


def node_to_text(n: Node) -> str:
    if isinstance(n, Rat):
        return str(n.v) if n.v >= 0 else f"({n.v})"
    if isinstance(n, Lam):
        return f"L{n.j}"
    if isinstance(n, Fn):
        return str(n.fid) + ("" if n.arg == U else f"@({n.arg})")
    if isinstance(n, Sig):
        return f"S@({n.arg})"
    if isinstance(n, Sum):
        out = ""
        for i, x in enumerate(n.xs):
            t = node_to_text(x)
            out += t if i == 0 else (" - " + t[1:] if t.startswith("-") else " + " + t)
        return out or "0"
    if isinstance(n, Prod):
        return "*".join(f"({node_to_text(x)})" if isinstance(x, Sum) else node_to_text(x) for x in n.xs)
    if isinstance(n, Pow):
        b = node_to_text(n.b)
        if not isinstance(n.b, (Fn, Lam, Sig)):
            b = f"({b})"
        return f"{b}^{n.e}"
    raise TypeError(n)


# text parser -----------------------------------------------------------------

def _tokenize(text: str) -> list:
    toks = []
    pos = 0
    text = text.rstrip()
    while pos < len(text):
        m = re.match(r"\s*L(\d+)(?![\w\[])", text[pos:])
        if m:
            toks.append(("lam", int(m.group(1))))
            pos += m.end()
            continue
        m = re.match(r"\s*(D\d+\()", text[pos:])
        if m:
            toks.append(("deriv", m.group(1)))
            pos += m.end()
            continue
        m = re.match(r"\s*([A-Z][A-Z0-9]*(?:\[[\d,\s]*\])?)", text[pos:])
        if m:
            toks.append(("fn", m.group(1)))
            pos += m.end()
            continue
        m = re.match(r"\s*(\d+(?:/\d+)?)", text[pos:])
        if m:
            toks.append(("num", Fraction(m.group(1))))
            pos += m.end()
            continue
        m = re.match(r"\s*([-+*^()=@])", text[pos:])
        if m:
            toks.append(("op", m.group(1)))
            pos += m.end()
            continue
        if text[pos:].strip() == "":
            break
        raise ParseError(f"cannot tokenize near {text[pos:pos + 25]!r}")
    return toks


class _Parser:
    def __init__(self, text: str):
        self.text = text
        self.toks = _tokenize(text)
        self.i = 0

    def peek(self, k=0):
        j = self.i + k
        return self.toks[j] if j < len(self.toks) else (None, None)

    def take(self):
        t = self.peek()
        self.i += 1
        return t

    def expect(self, op):
        t = self.take()
        if t != ("op", op):
            raise ParseError(f"expected {op!r} in {self.text!r}, got {t[1]!r}")

    def expr(self) -> Node:
        terms = []
        sign = 1
        if self.peek() in (("op", "+"), ("op", "-")):
            sign = -1 if self.take()[1] == "-" else 1
        terms.append(_neg(self.term()) if sign < 0 else self.term())
        while self.peek() in (("op", "+"), ("op", "-")):
            s = self.take()[1]
            t = self.term()
            terms.append(_neg(t) if s == "-" else t)
        return terms[0] if len(terms) == 1 else Sum(tuple(terms))

    def term(self) -> Node:
        fs = [self.factor()]
        while self.peek() == ("op", "*"):
            self.take()
            fs.append(self.factor())
        return fs[0] if len(fs) == 1 else Prod(tuple(fs))

    def factor(self) -> Node:
        b = self.atom()
        if self.peek() == ("op", "^"):
            self.take()
            sign = 1
            if self.peek() == ("op", "-"):
                self.take()
                sign = -1
            t = self.take()
            if t[0] != "num" or t[1].denominator != 1:
                raise ParseError(f"integer exponent expected in {self.text!r}")
            b = Pow(b, sign * int(t[1]))
        return b

    def fid_text(self, first) -> str:
        kind, val = first
        if kind == "deriv":
            inner = self.fid_text(self.take())
            self.expect(")")
            return f"{val}{inner})"
        if kind != "fn":
            raise ParseError(f"function id expected in {self.text!r}")
        return val

    def atom(self) -> Node:
        t = self.take()
        kind, val = t
        if t == ("op", "("):
            e = self.expr()
            self.expect(")")
            return e
        if t == ("op", "-"):
            return _neg(self.factor())
        if kind == "num":
            return Rat(val)
        if kind == "lam":
            return Lam(val)
        if kind in ("fn", "deriv"):
            text = self.fid_text(t)
            if text == "S":
                return Sig(U)
            try:
                return Fn(parse_function_id(text))
            except ValidationError as exc:
                raise ParseError(str(exc)) from None
        raise ParseError(f"unexpected token {val!r} in {self.text!r}")


def _neg(n: Node) -> Node:
    if isinstance(n, Rat):
        return Rat(-n.v)
    if isinstance(n, Prod) and isinstance(n.xs[0], Rat):
        return Prod((Rat(-n.xs[0].v),) + n.xs[1:])
    return Prod((Rat(Fraction(-1)),) + (n.xs if isinstance(n, Prod) else (n,)))


def parse_relation_text(text: str):
    if text.count("=") != 1:
        raise ParseError(f"relation needs exactly one '=': {text!r}")
    lhs, rhs = text.split("=")
    return _parse_with_args(lhs), _parse_with_args(rhs)


def _parse_with_args(text: str) -> Node:
    # replace point arguments by placeholders, parse, then restore
    args = []

    def repl(m):
        args.append(m.group(1))
        return f"@(ARG{len(args) - 1})"

    masked = re.sub(r"@\(([^()]*)\)", repl, text)
    return _ArgParser(masked, args).parse()


class _ArgParser(_Parser):
    def __init__(self, text, args):
        super().__init__(text)
        self.args = args

    def parse(self):
        e = self.expr()
        if self.i != len(self.toks):
            raise ParseError(f"trailing tokens in {self.text!r}")
        return e

    def atom(self) -> Node:
        t = self.peek()
        if t[0] in ("fn", "deriv"):
            self.take()
            text = self.fid_text(t)
            arg = U
            if self.peek() == ("op", "@"):
                self.take()
                self.expect("(")
                ref = self.take()
                self.expect(")")
                if ref[0] != "fn" or not ref[1].startswith("ARG"):
                    raise ParseError(f"bad point argument in {self.text!r}")
                arg = PointArg.parse(self.args[int(ref[1][3:])])
            if text == "S":
                return Sig(arg)
            try:
                return Fn(parse_function_id(text), arg)
            except ValidationError as exc:
                raise ParseError(str(exc)) from None
        return super().atom()


def parse_text_expr(text: str) -> Node:
    return _parse_with_args(text)


# ---------------------------------------------------------------------------
# relations

@dataclass
class Relation:
    label: str
    lhs: Node
    rhs: Node
    weight: int | None = None
    consumed: bool = False
    ambiguous: bool = False
    candidates: list = field(default_factory=list)   # [(name, lhs, rhs)]
    note: str = ""

    @staticmethod
    def from_text(text: str, label: str = "", weight: int | None = None, **kw) -> "Relation":
        lhs, rhs = parse_relation_text(text)
        return Relation(label or text.split("=")[0].strip(), lhs, rhs, weight, **kw)

    def text(self) -> str:
        return f"{node_to_text(self.lhs)} = {node_to_text(self.rhs)}"

    def readings(self):
        if self.ambiguous and self.candidates:
            return list(self.candidates)
        return [("main", self.lhs, self.rhs)]

    def functions(self) -> set:
        out = set()
        for _, l, r in self.readings():
            for side in (l, r):
                for n in walk(side):
                    if isinstance(n, Fn):
                        out.add(n.fid)
        return out

    # single-point residual used by calibration
    def residual(self, lookup: Callable, lam) -> tuple:
        def val(fid, arg):
            if arg != U:
                raise ValueError("calibration relations must be single-point")
            return lookup(fid)
        a = term_values(self.lhs, val, lam, None)
        b = term_values(self.rhs, val, lam, None)
        return sum(a) - sum(b), max(abs(x) for x in a + b)

    def to_json(self) -> dict:
        out = {"label": self.label, "weight": self.weight, "lhs": node_to_json(self.lhs),
               "rhs": node_to_json(self.rhs), "text": self.text()}
        if self.consumed:
            out["consumed"] = True
        if self.ambiguous:
            out["ambiguous"] = True
            out["candidates"] = [{"name": n, "lhs": node_to_json(l), "rhs": node_to_json(r),
                                  "text": f"{node_to_text(l)} = {node_to_text(r)}"}
                                 for n, l, r in self.candidates]
        if self.note:
            out["note"] = self.note
        return out

    @staticmethod
    def from_json(obj: dict, where: str = "$") -> "Relation":
        for key in ("lhs", "rhs"):
            if key not in obj:
                raise ParseError(f"{where}: relation is missing key {key!r}")
        cands = []
        for i, c in enumerate(obj.get("candidates", [])):
            cands.append((c.get("name", str(i)), node_from_json(c["lhs"], f"{where}.candidates[{i}].lhs"),
                          node_from_json(c["rhs"], f"{where}.candidates[{i}].rhs")))
        w = obj.get("weight")
        return Relation(label=obj.get("label", where), lhs=node_from_json(obj["lhs"], f"{where}.lhs"),
                        rhs=node_from_json(obj["rhs"], f"{where}.rhs"),
                        weight=None if w is None else int(w), consumed=bool(obj.get("consumed", False)),
                        ambiguous=bool(obj.get("ambiguous", False)), candidates=cands,
                        note=obj.get("note", ""))


@dataclass
class RelationSet:
    name: str
    curve: str
    relations: list
    declared_count: int | None = None
    kind: str = "relations"          # relations | addition | blocks
    meta: dict = field(default_factory=dict)

    def to_json(self) -> dict:
        out = {"set": self.name, "curve": self.curve, "declared_count": self.declared_count,
               "kind": self.kind}
        out.update(self.meta)
        out["relations"] = [r.to_json() for r in self.relations]
        return out

    def curve_key(self):
        from .curvedef import NAMED
        return NAMED[self.curve]


SET_NAMES = ["app_b_27", "app_b_34", "app_c_quad27", "app_d_quad34", "bilinear27", "bilinear34",
             "add_2t2v_27", "add_2t2v_34", "add_3t3v_34", "add_4t2v_34restricted"]
BASIS_SETS = {"basis_27_2": ("c27", 2), "basis_27_3": ("c27", 3), "basis_27_4": ("c27", 4),
              "basis_34_2": ("c34", 2), "basis_34_3": ("c34", 3), "basis_34_4": ("c34", 4),
              "basis_29_2": ("c29", 2), "basis_29_3": ("c29", 3)}


def parse_relation_file(path) -> RelationSet:
    with open(path) as fh:
        try:
            obj = json.load(fh)
        except json.JSONDecodeError as exc:
            raise ParseError(f"{path}: invalid JSON: {exc}") from None
    return relation_set_from_json(obj, str(path))


def relation_set_from_json(obj: dict, where: str = "$") -> RelationSet:
    for key in ("set", "curve", "relations"):
        if key not in obj:
            raise ParseError(f"{where}: missing top-level key {key!r}")
    rels = [Relation.from_json(r, f"{where}.relations[{i}]") for i, r in enumerate(obj["relations"])]
    meta = {k: v for k, v in obj.items() if k not in ("set", "curve", "relations", "declared_count", "kind")}
    rs = RelationSet(obj["set"], obj["curve"], rels, obj.get("declared_count"), obj.get("kind", "relations"), meta)
    if rs.declared_count is not None and rs.declared_count != len(rels):
        raise IntegrityError(f"{rs.name}: declared {rs.declared_count} relations, file holds {len(rels)}")
    return rs


def load_set(name: str) -> RelationSet:
    path = data_dir() / f"{name}.json"
    if not path.exists():
        raise CapabilityError(f"no relation file for set {name!r} in {data_dir()}")
    return parse_relation_file(path)


# ---------------------------------------------------------------------------
# symbolic view: expand a node into a WpPoly-like polynomial over
# (fid, arg) atoms and lambdas

def expand(node: Node) -> dict:
    """Expand into {monomial: Fraction}; monomial = sorted tuple of atoms,
    atoms ('F', str(fid), str(arg)) | ('L', j) | ('S', str(arg), power)."""
    if isinstance(node, Rat):
        return {(): node.v} if node.v else {}
    if isinstance(node, Lam):
        return {(("L", node.j),): Fraction(1)}
    if isinstance(node, Fn):
        return {(("F", str(node.fid), str(node.arg)),): Fraction(1)}
    if isinstance(node, Sig):
        return {(("S", str(node.arg)),): Fraction(1)}
    if isinstance(node, Sum):
        out: dict = {}
        for x in node.xs:
            for m, c in expand(x).items():
                out[m] = out.get(m, 0) + c
        return {m: c for m, c in out.items() if c}
    if isinstance(node, Prod):
        out = {(): Fraction(1)}
        for x in node.xs:
            out = _mul_expanded(out, expand(x))
        return out
    if isinstance(node, Pow):
        if node.e < 0:
            base = expand(node.b)
            if len(base) != 1:
                raise ValueError("negative powers only of single atoms")
            (m, c), = base.items()
            return {tuple(sorted(m * (-node.e))) + (("INV",),): Fraction(1) / c ** (-node.e)}
        base = expand(node.b)
        out = {(): Fraction(1)}
        for _ in range(node.e):
            out = _mul_expanded(out, base)
        return out
    raise TypeError(node)


def _mul_expanded(a: dict, b: dict) -> dict:
    new: dict = {}
    for m1, c1 in a.items():
        for m2, c2 in b.items():
            m = tuple(sorted(m1 + m2))
            new[m] = new.get(m, 0) + c1 * c2
    return {m: c for m, c in new.items() if c}


def relation_polynomial(rel_lhs: Node, rel_rhs: Node) -> dict:
    """lhs - rhs expanded."""
    out = dict(expand(rel_lhs))
    for m, c in expand(rel_rhs).items():
        out[m] = out.get(m, 0) - c
    return {m: c for m, c in out.items() if c}


def expression_weights(node: Node, curve: CurveSpec) -> set:
    """Weights of all monomials in a node, handling sigma ratios."""
    ws = set()
    for m in _expand_signed(node):
        ws.add(_signed_weight(m, curve))
    return ws


def _expand_signed(node: Node) -> list:
    """Monomials as lists of (atom, exponent) with signed exponents."""
    if isinstance(node, Rat):
        return [[]] if node.v else []
    if isinstance(node, Lam):
        return [[(("L", node.j), 1)]]
    if isinstance(node, Fn):
        return [[(("F", str(node.fid)), 1)]]
    if isinstance(node, Sig):
        return [[(("S",), 1)]]
    if isinstance(node, Sum):
        out = []
        for x in node.xs:
            out.extend(_expand_signed(x))
        return out
    if isinstance(node, Prod):
        out = [[]]
        for x in node.xs:
            out = [a + b for a in out for b in _expand_signed(x)]
        return out
    if isinstance(node, Pow):
        base = _expand_signed(node.b)
        if node.e < 0:
            if len(base) != 1:
                raise ValueError("negative powers only of single monomials")
            return [[(a, e * node.e) for a, e in base[0]]]
        out = [[]]
        for _ in range(node.e):
            out = [a + b for a in out for b in base]
        return out
    raise TypeError(node)


def _signed_weight(m, curve: CurveSpec):
    w = 0
    for a, e in m:
        if a[0] == "L":
            w += e * curve.lambda_weights[a[1]]
        elif a[0] == "F":
            ws = definition(parse_function_id(a[1])).weight(curve.u_weights, curve.lambda_weights)
            if len(ws) != 1:
                return "inhomogeneous function"
            w += e * ws.pop()
        elif a[0] == "S":
            w += e * curve.sigma_weight
    return w


# ---------------------------------------------------------------------------
# numeric evaluation

def term_values(node: Node, val: Callable, lam, sig: Callable | None) -> list:
    """Values of the top-level summands (nested sums flattened)."""
    if isinstance(node, Sum):
        out = []
        for x in node.xs:
            out.extend(term_values(x, val, lam, sig))
        return out
    return [evaluate(node, val, lam, sig)]


def evaluate(node: Node, val: Callable, lam, sig: Callable | None) -> complex:
    if isinstance(node, Rat):
        return complex(node.v)
    if isinstance(node, Lam):
        return complex(lam[node.j])
    if isinstance(node, Fn):
        return val(node.fid, node.arg)
    if isinstance(node, Sig):
        if sig is None:
            raise ValueError("sigma node outside an addition formula")
        return sig(node.arg)
    if isinstance(node, Sum):
        return sum((evaluate(x, val, lam, sig) for x in node.xs), 0j)
    if isinstance(node, Prod):
        out = 1 + 0j
        for x in node.xs:
            out *= evaluate(x, val, lam, sig)
        return out
    if isinstance(node, Pow):
        return evaluate(node.b, val, lam, sig) ** node.e
    raise TypeError(node)


class PointEvaluator:
    """Caches one jet per distinct point for a trial."""

    def __init__(self, ctx: EvalContext, points: dict, orders: dict | None = None):
        self.ctx = ctx
        self.points = points
        self._pv: dict = {}
        self.orders = orders or {}

    def _vec(self, arg: PointArg) -> np.ndarray:
        return arg.evaluate(self.ctx.curve, self.points)

    def point_values(self, arg: PointArg, order: int) -> PointValues:
        key = str(arg)
        pv = self._pv.get(key)
        if pv is None or pv.order < order:
            pv = PointValues(self.ctx, self._vec(arg), max(order, self.orders.get(key, 0), 2))
            self._pv[key] = pv
        return pv

    def value(self, fid: FunctionId, arg: PointArg) -> complex:
        d = definition(fid)
        pv = self.point_values(arg, max(2, d.max_index_len()))
        return d.evaluate(pv.P, self.ctx.curve.lam)

    def sigma(self, arg: PointArg) -> complex:
        key = str(arg)
        if key in self._pv:
            return self._pv[key].jet.value
        return complex(self.ctx.model.value(self._vec(arg)))


def required_orders(nodes: Iterable[Node]) -> dict:
    out: dict = {}
    for root in nodes:
        for n in walk(root):
            if isinstance(n, Fn):
                k = str(n.arg)
                out[k] = max(out.get(k, 2), definition(n.fid).max_index_len())
    return out


def relation_residual(ev: PointEvaluator, lhs: Node, rhs: Node) -> dict:
    lam = ev.ctx.curve.lam
    a = term_values(lhs, ev.value, lam, ev.sigma)
    b = term_values(rhs, ev.value, lam, ev.sigma)
    diff = sum(a) - sum(b)
    scale = max(abs(x) for x in a + b)
    return {"lhs": sum(a), "rhs": sum(b), "abs": abs(diff), "scale": scale,
            "rel": abs(diff) / scale if scale else float("inf")}


# ---------------------------------------------------------------------------
# sampling

def admissible_points(ctx: EvalContext, rng: np.random.Generator, count: int) -> list:
    """Random u in the fundamental domain, rejecting the lowest 20% of
    invariant sigma magnitudes."""
    pts = ctx.sample(rng, count)
    if len(pts) < count:
        raise SamplingError("could not draw enough admissible points")
    return pts


# ---------------------------------------------------------------------------
# verification

@dataclass
class VerificationReport:
    set_name: str
    rows: list
    environment: dict

    @property
    def verdict_counts(self):
        c = {"pass": 0, "fail": 0, "ambiguous": 0}
        for r in self.rows:
            c[r["verdict"]] = c.get(r["verdict"], 0) + 1
        return c

    def exit_code(self) -> int:
        v = self.verdict_counts
        if v.get("fail", 0):
            return 1
        if v.get("ambiguous", 0):
            return 2
        return 0

    def to_json(self) -> dict:
        return {"set": self.set_name, "environment": self.environment, "summary": self.verdict_counts,
                "rows": self.rows}


def _check_curve(ctx: EvalContext, rs: RelationSet):
    if ctx.curve.key != rs.curve_key():
        raise ValidationError(f"set {rs.name} is for curve {rs.curve_key()}, context has {ctx.curve.key}")
    if rs.meta.get("restricted") and not ctx.curve.is_restricted_quartic:
        raise ValidationError(f"set {rs.name} needs the curve y^3 = x^4 + lambda_0")


def _draw_points(ctx, rng, names, trials):
    sets = []
    pool = admissible_points(ctx, rng, trials * len(names))
    for t in range(trials):
        sets.append({n: pool[t * len(names) + k] for k, n in enumerate(names)})
    return sets


def _point_names(rel: Relation) -> list:
    names = set()
    for _, l, r in rel.readings():
        for side in (l, r):
            for n in walk(side):
                if isinstance(n, (Fn, Sig)):
                    names |= n.arg.names()
    return sorted(names) or ["u"]


def verify_set(ctx: EvalContext, rs: RelationSet, trials: int = 3, tol: float = 1e-6, seed: int = 0,
               consumed_labels: Sequence[str] | None = None) -> VerificationReport:
    if trials < 1:
        raise ValueError("trials must be >= 1")
    if rs.kind == "blocks":
        return verify_addition(ctx, rs, trials=trials, tol=tol, seed=seed)
    _check_curve(ctx, rs)
    rng = np.random.default_rng(seed)
    consumed = set(consumed_labels if consumed_labels is not None
                   else ctx.calibration.fit_report.get("fit_relations", []))
    names = sorted({n for r in rs.relations for n in _point_names(r)})
    trial_points = _draw_points(ctx, rng, names, trials)
    rows = []
    evs = []
    for pts in trial_points:
        orders = required_orders([s for r in rs.relations for _, l, rr in r.readings() for s in (l, rr)])
        evs.append(PointEvaluator(ctx, pts, orders))
    for idx, rel in enumerate(rs.relations):
        readings = []
        for name, lhs, rhs in rel.readings():
            res = [relation_residual(ev, lhs, rhs) for ev in evs]
            worst = max(r["rel"] for r in res)
            readings.append({"reading": name, "max_rel_residual": worst, "pass": worst < tol})
        row = {"index": idx, "label": rel.label, "weight": rel.weight,
               "consumed_by_calibration": rel.label in consumed or rel.consumed}
        if rel.ambiguous:
            row["readings"] = readings
            row["max_rel_residual"] = min(r["max_rel_residual"] for r in readings)
            passing = [r["reading"] for r in readings if r["pass"]]
            row["passing_readings"] = passing
            row["verdict"] = "ambiguous"
        else:
            row["max_rel_residual"] = readings[0]["max_rel_residual"]
            row["verdict"] = "pass" if readings[0]["pass"] else "fail"
        rows.append(row)
    env = _environment(ctx, trials, tol, seed)
    return VerificationReport(rs.name, rows, env)


def _environment(ctx: EvalContext, trials, tol, seed) -> dict:
    return {"curve": ctx.curve.to_json(), "precision_digits": ctx.periods.precision_digits,
            "truncation_radius": float(ctx.model.theta.truncation_radius), "trials": trials, "tol": tol,
            "seed": seed, "backend": ctx.model.backend or __import__("kleinian._kernels", fromlist=["x"]).backend_name(),
            "characteristic": [[str(x) for x in ctx.calibration.delta_prime],
                               [str(x) for x in ctx.calibration.delta_dblprime]]}


# ---------------------------------------------------------------------------
# addition formulae

_PERMS3 = list(itertools.permutations(["u", "v", "w"]))


def verify_addition(ctx: EvalContext, formula, trials: int = 3, tol: float = 1e-6, seed: int = 0
                    ) -> VerificationReport:
    rs = formula if isinstance(formula, RelationSet) else load_set(ADDITION_SETS[formula][ctx.curve.key]
                                                                   if formula in ADDITION_SETS else formula)
    _check_curve(ctx, rs)
    rng = np.random.default_rng(seed)
    rows = []
    if rs.kind == "relations":
        # each relation is a complete identity (two-term formulae)
        names = sorted({n for r in rs.relations for n in _point_names(r)})
        trial_points = _draw_points(ctx, rng, names, trials)
        for idx, rel in enumerate(rs.relations):
            res = []
            for pts in trial_points:
                ev = PointEvaluator(ctx, pts)
                res.append(relation_residual(ev, rel.lhs, rel.rhs))
            worst = max(r["rel"] for r in res)
            row = {"index": idx, "label": rel.label, "max_rel_residual": worst,
                   "verdict": "pass" if worst < tol else "fail"}
            if rs.meta.get("symmetry") is not None:
                row["symmetry"] = swap_symmetry(rel, ctx.curve)
                if not row["symmetry"]["ok"]:
                    row["verdict"] = "fail"
            rows.append(row)
        return VerificationReport(rs.name, rows, _environment(ctx, trials, tol, seed))
    # block form: lhs sigma ratio, rhs = sum over permutations of the blocks
    lhs = parse_text_expr(rs.meta["lhs"])
    trial_points = _draw_points(ctx, rng, ["u", "v", "w"], trials)
    block_totals = []
    per_trial = []
    for pts in trial_points:
        ev = PointEvaluator(ctx, pts)
        lv = evaluate(lhs, ev.value, ctx.curve.lam, ev.sigma)
        blocks = []
        for rel in rs.relations:
            tot = 0j
            mx = 0.0
            for perm in _PERMS3:
                mapping = dict(zip(["u", "v", "w"], perm))
                node = substitute_points(rel.rhs, mapping)
                tv = term_values(node, ev.value, ctx.curve.lam, ev.sigma)
                tot += sum(tv)
                mx = max([mx] + [abs(x) for x in tv])
            blocks.append((rel.label, tot, mx))
        sign = rs.meta.get("rhs_sign", 1)
        rhs_val = sign * sum(b[1] for b in blocks)
        scale = max([abs(lv)] + [b[2] for b in blocks])
        per_trial.append({"lhs": lv, "rhs": rhs_val, "rel": abs(lv - rhs_val) / scale})
        block_totals.append(blocks)
    worst = max(t["rel"] for t in per_trial)
    rows.append({"index": 0, "label": rs.name, "max_rel_residual": worst,
                 "verdict": "pass" if worst < tol else "fail",
                 "rhs_sign": rs.meta.get("rhs_sign", 1), "errata": rs.meta.get("errata", []),
                 "blocks": [{"label": lab, "max_abs_value": max(abs(bt[i][1]) for bt in block_totals)}
                            for i, (lab, _, _) in enumerate(block_totals[0])]})
    return VerificationReport(rs.name, rows, _environment(ctx, trials, tol, seed))


ADDITION_SETS = {"2t2v": {(2, 7): "add_2t2v_27", (3, 4): "add_2t2v_34"},
                 "3t3v": {(3, 4): "add_3t3v_34"},
                 "4t2v": {(3, 4): "add_4t2v_34restricted"}}


def addition_set_for(formula: str, curve: CurveSpec) -> RelationSet:
    table = ADDITION_SETS.get(formula)
    if table is None:
        raise ValidationError(f"unknown addition formula {formula!r}")
    if curve.key not in table:
        raise ValidationError(f"formula {formula} is not available for curve {curve.key}")
    if formula == "4t2v" and not curve.is_restricted_quartic:
        raise ValidationError("the four-term formula needs y^3 = x^4 + lambda_0")
    return load_set(table[curve.key])


def substitute_points(node: Node, mapping: dict) -> Node:
    if isinstance(node, Fn):
        return Fn(node.fid, node.arg.substitute(mapping))
    if isinstance(node, Sig):
        return Sig(node.arg.substitute(mapping))
    if isinstance(node, Sum):
        return Sum(tuple(substitute_points(x, mapping) for x in node.xs))
    if isinstance(node, Prod):
        return Prod(tuple(substitute_points(x, mapping) for x in node.xs))
    if isinstance(node, Pow):
        return Pow(substitute_points(node.b, mapping), node.e)
    return node


def swap_symmetry(rel: Relation, curve: CurveSpec) -> dict:
    """Structural check RHS(v,u) = parity * RHS(u,v)."""
    a = relation_polynomial(rel.rhs, Rat(Fraction(0)))
    b = relation_polynomial(substitute_points(rel.rhs, {"u": "v", "v": "u"}), Rat(Fraction(0)))
    sgn = curve.parity_sign
    diff = dict(b)
    for m, c in a.items():
        diff[m] = diff.get(m, 0) - sgn * c
    bad = {m: c for m, c in diff.items() if c}
    return {"ok": not bad, "expected_sign": sgn, "mismatched_terms": len(bad)}


# ---------------------------------------------------------------------------
# calibration relations

CALIBRATION_LABELS = {
    (2, 7): ["P[3,3,3,3]", "P[2,3,3,3]", "P[2,2,3,3]", "P[1,3,3,3]", "P[2,2,2,3]", "P[1,2,3,3]"],
    # P[1,3,3,3] is the definition of Q[1,3,3,3] on this curve and carries no information
    (3, 4): ["P[3,3,3,3]", "P[2,3,3,3]", "P[2,2,3,3]", "P[2,2,2,3]", "P[1,2,3,3]", "P[1,2,2,3]"],
}


def _hyperelliptic_top_relations(g: int) -> list:
    """P_{gggi} for the monic hyperelliptic curve of genus g."""
    out = []
    lg, lg1 = f"L{2 * g}", f"L{2 * g - 1}"
    for i in range(g, 0, -1):
        lhs = f"P[{i},{g},{g},{g}]"
        rhs = f"6*P[{g},{g}]*P[{g},{i}] + 4*{lg}*P[{g},{i}]"
        if i > 1:
            rhs += f" + 6*P[{g},{i - 1}]"
        if g > 1:
            rhs += f" - 2*P[{g - 1},{i}]"
        if i == g:
            rhs += f" + 2*{lg1}"
        out.append(Relation.from_text(f"{lhs} = {rhs}", label=lhs))
    return out


def calibration_relations(curve: CurveSpec) -> list:
    if curve.key == (2, 3):
        return [Relation.from_text("P[1,1,1,1] = 6*P[1,1]^2 + 4*L2*P[1,1] + 2*L1", label="P[1,1,1,1]")]
    if curve.key == (2, 9):
        return _hyperelliptic_top_relations(4)
    rs = load_set("app_b_27" if curve.key == (2, 7) else "app_b_34")
    by_label = {r.label: r for r in rs.relations}
    return [by_label[l] for l in CALIBRATION_LABELS[curve.key]]


# ---------------------------------------------------------------------------
# audits

def audit_weights(rs: RelationSet, curve: CurveSpec | None = None) -> dict:
    from .curvedef import make_curve
    curve = curve or make_curve(*rs.curve_key())
    rows = []
    for idx, rel in enumerate(rs.relations):
        for name, lhs, rhs in rel.readings():
            ws = expression_weights(lhs, curve) | expression_weights(rhs, curve)
            ws.discard(None)
            target = rel.weight
            ok = len(ws) == 1 and (target is None or ws == {target})
            rows.append({"index": idx, "label": rel.label, "reading": name, "declared": target,
                         "found": sorted(ws, key=str), "ok": ok})
    return {"set": rs.name, "rows": rows, "all_ok": all(r["ok"] for r in rows if r["reading"] == "main")
            and all(any(r2["ok"] for r2 in rows if r2["index"] == r["index"]) for r in rows)}


def _fn_parity(fid: FunctionId):
    ps = {sum(len(a[1]) for a in m if a[0] == "P") % 2 for m in definition(fid).terms}
    return ps.pop() if len(ps) == 1 else None


def audit_parity(rs: RelationSet) -> dict:
    """Every monomial of lhs - rhs must have odd total index count."""
    rows = []
    for idx, rel in enumerate(rs.relations):
        for name, lhs, rhs in rel.readings():
            parities = set()
            for m in _expand_signed(Sum((lhs, rhs))):
                p = 0
                for a, e in m:
                    if a[0] == "F":
                        fp = _fn_parity(parse_function_id(a[1]))
                        if fp is None:
                            p = None
                            break
                        p += fp * abs(e)
                if p is not None:
                    p %= 2
                parities.add(p)
            rows.append({"index": idx, "label": rel.label, "reading": name, "parities": sorted(parities, key=str),
                         "odd": parities == {1}})
    return {"set": rs.name, "rows": rows, "all_odd": all(r["odd"] for r in rows)}


def lint_quadratic(rs: RelationSet) -> dict:
    """Right-hand sides of quadratic 3-index relations: only 2-index P's and
    lambdas, plus the extra basis function appearing at most linearly or
    times one 2-index P."""
    extra = "DELTA27" if rs.curve == "c27" else "Q[1,3,3,3]"
    rows = []
    for idx, rel in enumerate(rs.relations):
        ok = True
        for m in _expand_signed(rel.rhs):
            fns = [a[1] for a, e in m for _ in range(abs(e)) if a[0] == "F"]
            n_extra = fns.count(extra)
            others = [f for f in fns if f != extra]
            if any(not (f.startswith("P[") and f.count(",") == 1) for f in others):
                ok = False
            if n_extra > 1 or (n_extra == 1 and len(others) > 1):
                ok = False
        rows.append({"index": idx, "label": rel.label, "ok": ok})
    return {"set": rs.name, "rows": rows, "all_ok": all(r["ok"] for r in rows)}


# ---------------------------------------------------------------------------
# determinantal formula for the (2,7) quadratic relations

def _A_matrix():
    P = WpPoly.P
    z = WpPoly()
    return [
        [z, -P(3, 3, 3), P(2, 3, 3), -P(2, 2, 3) + P(1, 3, 3), P(2, 2, 2) - 2 * P(1, 2, 3)],
        [P(3, 3, 3), z, -P(1, 3, 3), P(1, 2, 3), -P(1, 2, 2) + P(1, 1, 3)],
        [-P(2, 3, 3), P(1, 3, 3), z, -P(1, 1, 3), P(1, 1, 2)],
        [P(2, 2, 3) - P(1, 3, 3), -P(1, 2, 3), P(1, 1, 3), z, -P(1, 1, 1)],
        [-P(2, 2, 2) + 2 * P(1, 2, 3), P(1, 2, 2) - P(1, 1, 3), -P(1, 1, 2), P(1, 1, 1), z],
    ]


def _H_matrix():
    P, L = WpPoly.P, WpPoly.L
    return [
        [4 * L(0), 2 * L(1), -2 * P(1, 1), -2 * P(1, 2), -2 * P(1, 3)],
        [2 * L(1), 4 * L(2) + 4 * P(1, 1), 2 * L(3) + 2 * P(1, 2), -2 * P(2, 2) + 4 * P(1, 3), -2 * P(2, 3)],
        [-2 * P(1, 1), 2 * L(3) + 2 * P(1, 2), 4 * L(4) + 4 * P(2, 2) - 4 * P(1, 3), 2 * L(5) + 2 * P(2, 3),
         -2 * P(3, 3)],
        [-2 * P(1, 2), -2 * P(2, 2) + 4 * P(1, 3), 2 * L(5) + 2 * P(2, 3), 4 * L(6) + 4 * P(3, 3),
         WpPoly.const(2)],
        [-2 * P(1, 3), -2 * P(2, 3), -2 * P(3, 3), WpPoly.const(2), WpPoly()],
    ]


def _det_poly(m):
    n = len(m)
    if n == 1:
        return m[0][0]
    total = WpPoly()
    # expand along the sparsest row
    r = min(range(n), key=lambda i: sum(0 if x.is_zero() else 1 for x in m[i]))
    for j in range(n):
        if m[r][j].is_zero():
            continue
        minor = [row[:j] + row[j + 1:] for i, row in enumerate(m) if i != r]
        term = m[r][j] * _det_poly(minor)
        total = total + (term if (r + j) % 2 == 0 else -term)
    return total


def _unit(v) -> int:
    v = list(v)
    if len(v) != 5 or sorted(v) != [0, 0, 0, 0, 1]:
        raise ValidationError("determinantal vectors must be unit vectors of length 5")
    return v.index(1)


def determinantal_expand(l, k, l2, k2) -> tuple:
    """(lhs, rhs) WpPolys of (l^T A k)(l2^T A k2) = -1/4 det[[H,l2,k2],[l^T,0,0],[k^T,0,0]]."""
    il, ik, il2, ik2 = (_unit(x) for x in (l, k, l2, k2))
    A = _A_matrix()
    H = _H_matrix()
    lhs = A[il][ik] * A[il2][ik2]
    one, zero = WpPoly.const(1), WpPoly()
    M = []
    for i in range(5):
        M.append(H[i] + [one if i == il2 else zero, one if i == ik2 else zero])
    M.append([one if j == il else zero for j in range(5)] + [zero, zero])
    M.append([one if j == ik else zero for j in range(5)] + [zero, zero])
    rhs = Fraction(-1, 4) * _det_poly(M)
    return lhs, rhs


def wp_to_node(p: WpPoly) -> Node:
    terms = []
    for m, c in sorted(p.terms.items(), key=lambda t: str(t[0])):
        fs = [Rat(c)] if c != 1 else []
        for a in m:
            fs.append(Lam(a[1]) if a[0] == "L" else Fn(FunctionId("P", a[1])))
        terms.append(fs[0] if len(fs) == 1 else Prod(tuple(fs)) if fs else Rat(Fraction(1)))
    if not terms:
        return Rat(Fraction(0))
    return terms[0] if len(terms) == 1 else Sum(tuple(terms))


def node_to_wp(node: Node) -> WpPoly:
    """Single-point expression -> WpPoly (named functions expanded)."""
    if isinstance(node, Rat):
        return WpPoly.const(node.v)
    if isinstance(node, Lam):
        return WpPoly.L(node.j)
    if isinstance(node, Fn):
        if node.arg != U:
            raise ValueError("multi-point expression")
        return definition(node.fid)
    if isinstance(node, Sum):
        out = WpPoly()
        for x in node.xs:
            out = out + node_to_wp(x)
        return out
    if isinstance(node, Prod):
        out = WpPoly.const(1)
        for x in node.xs:
            out = out * node_to_wp(x)
        return out
    if isinstance(node, Pow):
        if node.e < 0:
            raise ValueError("negative power")
        return node_to_wp(node.b) ** node.e
    raise TypeError(node)


def reduce_with(poly: WpPoly, rules: dict) -> WpPoly:
    """Rewrite products of two 3-index P's using rules {monomial: WpPoly}."""
    changed = True
    while changed:
        changed = False
        out = WpPoly()
        for m, c in poly.terms.items():
            three = [a for a in m if a[0] == "P" and len(a[1]) == 3]
            if len(three) >= 2:
                key = tuple(sorted(three[:2]))
                if key in rules:
                    rest = list(m)
                    rest.remove(three[0])
                    rest.remove(three[1])
                    out = out + WpPoly({tuple(rest): c}) * rules[key]
                    changed = True
                    continue
            out = out + WpPoly({m: c})
        poly = out
    return poly


def quadratic_rules(rs: RelationSet) -> dict:
    rules = {}
    for rel in rs.relations:
        l = node_to_wp(rel.lhs)
        (m, c), = l.terms.items()
        rules[tuple(sorted(m))] = node_to_wp(rel.rhs) * (Fraction(1) / c)
    return rules


def determinantal_check(rs: RelationSet, l, k, l2, k2) -> dict:
    """Both sides of the determinantal identity reduced with the quadratic set;
    exact agreement means the set implies the identity."""
    lhs, rhs = determinantal_expand(l, k, l2, k2)
    rules = quadratic_rules(rs)
    diff = reduce_with(lhs - rhs, rules)
    return {"vectors": [list(l), list(k), list(l2), list(k2)], "exact_zero": diff.is_zero(),
            "remaining_terms": len(diff.terms)}


def wp_to_graded(polys: Sequence[WpPoly], curve: CurveSpec) -> list:
    """The WpPolys as GradedPolys over one ring whose generators are the
    atoms (P333, L4, ...) weighted by their Sato weights."""
    atoms = sorted(set().union(*(p.atoms() for p in polys)))
    names = tuple(("P" + "".join(map(str, a[1]))) if a[0] == "P" else f"L{a[1]}" for a in atoms)
    weights = tuple(-sum(curve.u_weights[i - 1] for i in a[1]) if a[0] == "P" else curve.lambda_weights[a[1]]
                    for a in atoms)
    ring = Ring(names, weights)
    pos = {a: i for i, a in enumerate(atoms)}
    out = []
    for p in polys:
        terms = {}
        for m, c in p.terms.items():
            e = [0] * len(atoms)
            for a in m:
                e[pos[a]] += 1
            terms[tuple(e)] = c
        out.append(GradedPoly(ring, terms))
    return out


def determinantal_numeric(P: Callable, lam, l, k, l2, k2) -> dict:
    """Both sides of the determinantal identity for arbitrary complex
    5-vectors, with the P's evaluated through ``P(idx)``."""
    A = np.array([[x.evaluate(P, lam) for x in row] for row in _A_matrix()])
    H = np.array([[x.evaluate(P, lam) for x in row] for row in _H_matrix()])
    l, k, l2, k2 = (np.asarray(v, dtype=complex) for v in (l, k, l2, k2))
    lhs = (l @ A @ k) * (l2 @ A @ k2)
    M = np.zeros((7, 7), dtype=complex)
    M[:5, :5] = H
    M[:5, 5], M[:5, 6] = l2, k2
    M[5, :5], M[6, :5] = l, k
    rhs = -0.25 * np.linalg.det(M)
    return {"lhs": lhs, "rhs": rhs, "rel": abs(lhs - rhs) / max(abs(lhs), abs(rhs))}


# ---------------------------------------------------------------------------
# basis ranks

def _catalog_matrix(ctx: EvalContext, items: list, samples: int, seed: int) -> np.ndarray:
    rng = np.random.default_rng(seed)
    pts = admissible_points(ctx, rng, samples)
    order = catalog_order(items)
    M = np.empty((samples, len(items)), dtype=complex)
    for r, u in enumerate(pts):
        pv = PointValues(ctx, u, order)
        for c, f in enumerate(items):
            M[r, c] = catalog_value(ctx, f, pv)
    return M


def _rank(M: np.ndarray, rel: float = 1e-8) -> tuple:
    # columns are scaled to unit norm so that weight differences do not bias the rank
    norms = np.linalg.norm(M, axis=0)
    norms[norms == 0] = 1.0
    sv = np.linalg.svd(M / norms, compute_uv=False)
    rank = int(np.sum(sv > rel * sv[0]))
    # with a catalog of exactly rank columns there is no next value; the gap is
    # then measured against the rank threshold itself
    nxt = sv[rank] if rank < len(sv) else rel * sv[0]
    gap = float(sv[rank - 1] / nxt) if nxt > 0 else float("inf")
    return rank, sv, gap


def basis_rank(ctx: EvalContext, pole_order: int, sample_count: int | None = None, seed: int = 0,
               extra: list | None = None) -> dict:
    items = basis_catalog(ctx.curve, pole_order) + list(extra or [])
    expected = pole_order ** ctx.g
    sample_count = sample_count or expected + 8
    if sample_count < expected + 8:
        raise ValidationError("sample_count must be at least expected_dim + 8")
    M = _catalog_matrix(ctx, items, sample_count, seed)
    rank, sv, gap = _rank(M)
    return {"curve": list(ctx.curve.key), "pole_order": pole_order, "catalog_size": len(items),
            "rank": rank, "expected_dim": expected, "samples": sample_count, "sv_gap": gap,
            "singular_values": [float(x) for x in sv]}


def dependent_pair_check(ctx: EvalContext, sample_count: int = 40, seed: int = 0) -> dict:
    items = basis_catalog(ctx.curve, 3)
    M = _catalog_matrix(ctx, items + [FunctionId("MINOR", (2, 2)), FunctionId("MINOR", (1, 3)),
                                      FunctionId("P", (1, 1))], sample_count, seed)
    n = len(items)
    base_rank, _, _ = _rank(M[:, :n])
    out = {"curve": list(ctx.curve.key), "catalog_rank": base_rank, "catalog_size": n}
    if ctx.curve.key == (2, 7):
        with22, _, _ = _rank(M[:, :n + 1])
        out["rank_with_minor22"] = with22
        out["dependent"] = with22 == base_rank
    else:
        out["contains_minor13_and_minor22"] = (FunctionId("MINOR", (1, 3)) in items
                                               and FunctionId("MINOR", (2, 2)) in items)
    zero_col = np.zeros((M.shape[0], 1), dtype=complex)
    out["rank_with_zero_column"] = _rank(np.hstack([M[:, :n], zero_col]))[0]
    return out
