import copy
import json

import pytest
from hypothesis import given, settings, strategies as st

from kleinian.abelfunc import WpPoly, parse_function_id
from kleinian.curvedef import CapabilityError, make_curve
from kleinian.exactpoly import weight_of
from kleinian.relationdb import (SET_NAMES, Fn, IntegrityError, Lam, ParseError, PointArg, Pow, Prod, Rat,
                                 Relation, Sig, Sum, audit_parity, audit_weights, determinantal_check,
                                 determinantal_expand, expand, lint_quadratic, load_set, node_from_json,
                                 node_to_json, node_to_text, node_to_wp, parse_relation_file,
                                 parse_relation_text, parse_text_expr, relation_set_from_json, wp_to_graded)

ARGS = [PointArg.parse(a) for a in ("u", "v", "u+v", "u-v", "2u-v", "u+zeta^1 v+zeta^2 w", "u+i^3 v")]
fids = st.sampled_from(["P[1,1]", "P[2,3]", "P[3,3,3]", "P[1,2,3,3]", "Q[1,3,3,3]", "DELTA27", "D2(MINOR[1,3])"])
leaves = st.one_of(
    st.fractions(-9, 9, max_denominator=6).map(Rat),
    st.integers(0, 6).map(Lam),
    st.builds(lambda f, a: Fn(parse_function_id(f), a), fids, st.sampled_from(ARGS)),
    st.sampled_from(ARGS).map(Sig),
)


def _inverse_atom():
    return st.builds(Pow, st.one_of(st.sampled_from(ARGS).map(Sig),
                                    st.builds(lambda f, a: Fn(parse_function_id(f), a), fids, st.sampled_from(ARGS))),
                     st.integers(-3, -1))


nodes = st.recursive(
    st.one_of(leaves, _inverse_atom()),
    lambda kids: st.one_of(
        st.lists(kids, min_size=2, max_size=3).map(lambda xs: Sum(tuple(xs))),
        st.lists(kids, min_size=2, max_size=3).map(lambda xs: Prod(tuple(xs))),
        st.builds(Pow, kids, st.integers(0, 3)),
    ),
    max_leaves=8,
)


@given(nodes)
@settings(max_examples=150, deadline=None)
def test_json_round_trip_is_exact(n):
    assert node_from_json(json.loads(json.dumps(node_to_json(n)))) == n


@given(nodes)
@settings(max_examples=150, deadline=None)
def test_text_round_trip_preserves_expansion(n):
    assert expand(parse_text_expr(node_to_text(n))) == expand(n)


@given(st.lists(st.tuples(st.integers(-3, 3).filter(bool), st.sampled_from(["", "zeta", "i"]),
                          st.integers(0, 3), st.sampled_from("uvw")), min_size=1, max_size=3))
def test_point_argument_round_trip(terms):
    a = PointArg(tuple((c, aut, p if aut else 0, n) for c, aut, p, n in terms))
    assert PointArg.parse(str(a)) == a
    assert PointArg.from_json(a.to_json()) == a


def test_parse_examples():
    lhs, rhs = parse_relation_text("P[3,3,3,3] = 4*P[2,3] + 4*P[3,3]*L6 + 2*L5 + 6*P[3,3]^2")
    assert node_to_wp(rhs) == 4 * WpPoly.P(2, 3) + 4 * WpPoly.P(3, 3) * WpPoly.L(6) + 2 * WpPoly.L(5) \
        + 6 * WpPoly.P(3, 3) ** 2
    lhs, rhs = parse_relation_text("S@(u+v)*S@(u-v)*S@(u)^-2*S@(v)^-2 = DELTA27@(u) - P[1,1]@(v)*P[3,3]@(u)")
    assert isinstance(lhs, Prod) and isinstance(lhs.xs[0], Sig)
    assert lhs.xs[0].arg == PointArg.parse("u+v")
    assert expand(rhs)[(("F", "P[1,1]", "v"), ("F", "P[3,3]", "u"))] == -1
    assert node_to_wp(parse_text_expr("D3(P[1,3])")) == WpPoly.P(1, 3, 3)


@pytest.mark.parametrize("text", ["P[1,1] = = 2", "P[1] = 0", "P[1,1]^x = 0", "P[1,1] = 2*", "P[1,1]@(q) = 0",
                                  "P[1,1] = 3 $ 4", "P[1,1] 3 = 4"])
def test_parse_errors(text):
    with pytest.raises(ParseError):
        Relation.from_text(text)


def test_json_errors_name_the_location():
    with pytest.raises(ParseError, match=r"\$\.xs\[1\].*unknown node kind 'frob'"):
        node_from_json({"k": "sum", "xs": [{"k": "lam", "j": 1}, {"k": "frob"}]})
    with pytest.raises(ParseError, match="missing key 'id'"):
        node_from_json({"k": "fn"})
    with pytest.raises(ParseError, match="missing key 'rhs'"):
        Relation.from_json({"label": "x", "lhs": {"k": "rat", "v": "1"}})
    with pytest.raises(ParseError, match="missing top-level key 'curve'"):
        relation_set_from_json({"set": "x", "relations": []})


def test_count_mismatch_is_an_integrity_error():
    obj = load_set("app_b_27").to_json()
    obj["relations"] = obj["relations"][:-1]
    with pytest.raises(IntegrityError):
        relation_set_from_json(obj)


def test_invalid_json_file(tmp_path):
    p = tmp_path / "bad.json"
    p.write_text("{not json")
    with pytest.raises(ParseError):
        parse_relation_file(p)


def test_data_directory_override(tmp_path, monkeypatch):
    rs = load_set("app_b_34")
    (tmp_path / "app_b_34.json").write_text(json.dumps(rs.to_json()))
    monkeypatch.setenv("KLEINIAN_DATA_DIR", str(tmp_path))
    assert len(load_set("app_b_34").relations) == 15
    with pytest.raises(CapabilityError):
        load_set("app_b_27")


@pytest.mark.parametrize("name,count", [("app_b_27", 15), ("app_b_34", 15), ("app_c_quad27", 55),
                                        ("app_d_quad34", 55), ("bilinear27", 24), ("bilinear34", 21),
                                        ("add_3t3v_34", 11)])
def test_shipped_sets_load_with_declared_counts(name, count):
    rs = load_set(name)
    assert len(rs.relations) == rs.declared_count == count


def test_every_shipped_set_serializes_back():
    for name in SET_NAMES:
        rs = load_set(name)
        again = relation_set_from_json(json.loads(json.dumps(rs.to_json())))
        assert [r.text() for r in again.relations] == [r.text() for r in rs.relations]


@pytest.mark.parametrize("name", [n for n in SET_NAMES])
def test_weight_audit(name):
    assert audit_weights(load_set(name))["all_ok"]


def test_weight_audit_catches_inhomogeneous_relation():
    rs = load_set("app_b_27")
    bad = copy.deepcopy(rs)
    bad.relations[0] = Relation.from_text("P[3,3,3,3] = 6*P[3,3]^2 + L6", label="x", weight=-4)
    assert not audit_weights(bad)["all_ok"]


def test_bilinear_parity_audit():
    assert audit_parity(load_set("bilinear27"))["all_odd"]
    assert audit_parity(load_set("bilinear34"))["all_odd"]


def test_quadratic_lint():
    assert lint_quadratic(load_set("app_c_quad27"))["all_ok"]
    assert lint_quadratic(load_set("app_d_quad34"))["all_ok"]


def test_ambiguous_relation_keeps_both_readings():
    rs = load_set("bilinear34")
    amb = [r for r in rs.relations if r.ambiguous]
    assert len(amb) == 1
    assert len(amb[0].readings()) == 2
    assert amb[0].weight == -19


def test_three_term_blocks_carry_sign_and_errata():
    rs = load_set("add_3t3v_34")
    assert rs.kind == "blocks"
    assert rs.meta["rhs_sign"] == -1
    assert len(rs.meta["errata"]) >= 5


def test_determinantal_expansion_reproduces_quadratic_relation():
    c = make_curve(2, 7)
    e1, e2 = [1, 0, 0, 0, 0], [0, 1, 0, 0, 0]
    lhs, rhs = determinantal_expand(e2, e1, e2, e1)
    rel = load_set("app_c_quad27").relations[0]
    g = wp_to_graded([lhs, rhs, node_to_wp(rel.lhs), node_to_wp(rel.rhs)], c)
    assert g[0] == g[2] and g[1] == g[3]
    assert weight_of(g[1]) == -6


def test_quadratic_set_implies_determinantal_identities():
    rs = load_set("app_c_quad27")
    basis = [[int(i == k) for i in range(5)] for k in range(5)]
    for a, b, c, d in [(1, 0, 1, 0), (2, 0, 1, 0), (3, 1, 2, 0), (4, 3, 4, 2), (2, 1, 4, 0)]:
        assert determinantal_check(rs, basis[a], basis[b], basis[c], basis[d])["exact_zero"]
