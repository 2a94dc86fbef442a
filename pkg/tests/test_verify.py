from fractions import Fraction
from pathlib import Path

import numpy as np
import pytest

from kleinian.abelfunc import PointValues
from kleinian.curvedef import ValidationError
from kleinian.relationdb import (CALIBRATION_LABELS, addition_set_for, admissible_points, basis_rank,
                                 dependent_pair_check, determinantal_numeric, load_set, parse_relation_file,
                                 relation_set_from_json, verify_addition, verify_set)

DATA = Path(__file__).parent / "data"


def corrupt_first_coefficient(obj: dict, skip_labels) -> str:
    """Add 1 to the first rational coefficient on the right-hand side of the
    first relation whose label is not in ``skip_labels``; returns that label."""
    def bump(n):
        if n.get("k") == "rat":
            n["v"] = str(Fraction(n["v"]) + 1)
            return True
        return any(bump(x) for x in n.get("xs", []))

    for r in obj["relations"]:
        if r["label"] not in skip_labels and bump(r["rhs"]):
            return r["label"]
    raise AssertionError("nothing to corrupt")


def test_mutated_relation_fails_and_others_pass(ctx34):
    obj = load_set("app_b_34").to_json()
    label = corrupt_first_coefficient(obj, set(CALIBRATION_LABELS[(3, 4)]))
    rep = verify_set(ctx34, relation_set_from_json(obj), seed=5)
    by_label = {r["label"]: r for r in rep.rows}
    assert by_label[label]["verdict"] == "fail"
    assert by_label[label]["max_rel_residual"] > 1e-3
    assert all(r["verdict"] == "pass" for r in rep.rows if r["label"] != label)
    assert rep.exit_code() == 1


def test_calibration_relations_are_flagged(ctx27):
    rep = verify_set(ctx27, load_set("app_b_27"), trials=2, seed=1)
    flagged = [r["label"] for r in rep.rows if r["consumed_by_calibration"]]
    assert sorted(flagged) == sorted(CALIBRATION_LABELS[(2, 7)])
    assert rep.verdict_counts == {"pass": 15, "fail": 0, "ambiguous": 0}


def test_ambiguous_bilinear_relation_reports_readings(ctx34):
    rs = load_set("bilinear34")
    amb = next(r for r in rs.relations if r.ambiguous)
    rs.relations = [amb]
    rs.declared_count = 1
    rep = verify_set(ctx34, rs, trials=2, seed=2)
    row = rep.rows[0]
    assert row["verdict"] == "ambiguous"
    assert len(row["readings"]) == 2
    assert row["passing_readings"] == ["restored"]
    assert rep.exit_code() == 2


def test_literal_three_term_reading_fails(ctx34):
    lit = parse_relation_file(DATA / "add_3t3v_34_literal.json")
    assert verify_addition(ctx34, lit, trials=2, tol=1e-5, seed=4).rows[0]["verdict"] == "fail"
    rep = verify_addition(ctx34, load_set("add_3t3v_34"), trials=2, tol=1e-5, seed=4)
    assert rep.rows[0]["verdict"] == "pass"


def test_addition_formula_curve_checks(ctx27, ctx34):
    with pytest.raises(ValidationError):
        addition_set_for("3t3v", ctx27.curve)
    with pytest.raises(ValidationError):
        addition_set_for("4t2v", ctx34.curve)
    with pytest.raises(ValidationError):
        verify_set(ctx27, load_set("app_b_34"))


def test_verification_is_deterministic(ctx27):
    rs = load_set("app_c_quad27")
    rs.relations = rs.relations[:5]
    rs.declared_count = 5
    a = verify_set(ctx27, rs, trials=2, seed=9).to_json()
    b = verify_set(ctx27, rs, trials=2, seed=9).to_json()
    assert a == b


def test_determinantal_identity_for_random_vectors(ctx27):
    rng = np.random.default_rng(21)
    for u in admissible_points(ctx27, rng, 4):
        pv = PointValues(ctx27, u, 3)
        vs = [rng.normal(size=5) + 1j * rng.normal(size=5) for _ in range(4)]
        assert determinantal_numeric(pv.P, ctx27.curve.lam, *vs)["rel"] < 1e-10


def test_pole_order_two_rank(ctx27, ctx34):
    for ctx in (ctx27, ctx34):
        rep = basis_rank(ctx, 2, seed=3)
        assert rep["rank"] == rep["expected_dim"] == 8
        assert rep["samples"] >= 16
        assert rep["sv_gap"] >= 1e4


def test_dependent_pair(ctx27):
    rep = dependent_pair_check(ctx27, seed=4)
    assert rep["dependent"]
