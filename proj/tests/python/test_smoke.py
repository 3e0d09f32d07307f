import pytest

import edgecsp as ec

MATCH2 = ["10", "01"]


def triangle():
    return ec.Instance(
        ["e12", "e13", "e23"],
        [
            ("n1", ec.Relation(["e12", "e13"], MATCH2)),
            ("n2", ec.Relation(["e12", "e23"], MATCH2)),
            ("n3", ec.Relation(["e13", "e23"], MATCH2)),
        ],
    )


def test_relation_basics():
    r = ec.Relation(["x", "y"], ["01", "10", "01"])
    assert r.arity == 2
    assert len(r) == 2  # deduplicated
    assert r.tuples == ["10", "01"]  # sorted by integer value, position 0 = LSB
    assert "01" in r and "11" not in r
    assert r == ec.Relation(["x", "y"], ["10", "01"])
    with pytest.raises(ec.ParseError):
        ec.Relation(["x", "y"], ["0"])


def test_solver_matches_brute_force_on_the_triangle():
    inst = triangle()
    assert inst.variables == ["e12", "e13", "e23"]
    assert inst.constraint_ids == ["n1", "n2", "n3"]
    assert inst.relation("n1").tuples == MATCH2

    solved = ec.solve(inst)
    assert solved["count"] == 1
    assert solved["count"] == ec.brute_force(inst)["count"]
    assert set(solved["labeling"]) == {
        "e12@n1", "e12@n2", "e13@n1", "e13@n3", "e23@n2", "e23@n3",
    }


def test_solve_refuses_but_solve_coverable_handles_mixed_parity():
    inst = ec.Instance(
        ["u", "v"],
        [
            ("A", ec.Relation(["u", "v"], ["00", "11"])),
            ("B", ec.Relation(["u", "v"], ["10", "01", "11"])),
        ],
    )
    with pytest.raises(ec.RefusalError):
        ec.solve(inst)
    solved = ec.solve_coverable(inst)
    assert solved["count"] == 0
    assert solved["count"] == ec.brute_force(inst)["count"]


def test_relation_classes_and_algebra():
    m = ec.interference_relation()
    assert ec.is_delta_matroid(m)
    assert not ec.is_even(m)
    assert ec.contains_interference_minor(m)
    assert ec.detect_oracle_kind(m) == "coindependent"
    assert ec.detect_oracle_kind(ec.matching_relation(3)) == "compact"

    product = ec.direct_product(m, ec.rename_scope(m, ["w1", "w2", "w3"]))
    assert len(product) == len(m) ** 2
    assert ec.minor_fix(m, "v1", False).tuples == ["00", "11"]
    assert ec.d_transform(ec.even_relation(2)).tuples == ["00"]

    cover = ec.even_zebra_cover_search(m, "000")
    assert cover is not None
    ok, problems = ec.verify_cover(m, "000", cover)
    assert ok and problems == []
    assert ec.even_zebra_cover_search(product, "000111") is None


def test_realize_and_the_arity6_counterexample():
    y = ec.realize(
        ["a", "b", "c"], [("a", "b"), ("b", "c"), ("a", "c")], ["a", "b", "c"]
    )
    assert y.tuples == ["100", "010", "001", "111"]
    assert ec.is_even(y) and ec.is_delta_matroid(y)

    r = ec.counterexample_arity6()
    assert len(r) == 19
    assert ec.is_even(r) and ec.is_delta_matroid(r)


def test_planar_report():
    report = ec.planar_tractability_report([ec.even_relation(2)])
    assert report["condition_holds"] is True
    assert report["relations"][0]["self_complementary"] is True
    assert len(report["even_constants"]) == 3
    report = ec.planar_tractability_report([ec.interference_relation()])
    assert report["condition_holds"] is False


def test_shape_errors_are_precondition_errors():
    with pytest.raises(ec.PreconditionError):
        ec.Instance(["x"], [("C", ec.Relation(["x"], ["0"]))])
