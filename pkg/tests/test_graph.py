import numpy as np
import pytest

from signed_degroot.graph import (SignedMultigraph, flip_relations, in_group, is_sslss, out_group, out_weight,
                                  validate)
from signed_degroot.scenario import load_preset
from signed_degroot.spectrum import DeviationSpec, Interval

PM1 = Interval(-1, 1)


def make(W, F, spec=None):
    spec = spec or DeviationSpec.soft(PM1)
    return SignedMultigraph(np.array(W, dtype=float), F, {"D": spec}, PM1)


def test_validate_reports_row_sum():
    g = make([[0.5, 0.4], [0.5, 0.5]], [["F", "F"], ["F", "F"]])
    problems = validate(g)
    assert len(problems) == 1 and "row 0" in problems[0]


def test_validate_probinv2_clean():
    assert validate(load_preset("probinv2").graph) == []


def test_validate_identity_deviation():
    g = make([[0.5, 0.5], [0.5, 0.5]], [["F", "D"], ["F", "F"]], DeviationSpec("identity", PM1))
    assert any("invalid deviation" in p for p in validate(g))


def test_validate_other_problems():
    g = SignedMultigraph(np.array([[1.2, -0.2], [0.5, 0.5]]), [["F", "X"], ["F", "F"]], {}, PM1)
    problems = validate(g)
    assert any("negative" in p for p in problems)
    assert any("unknown deviation" in p for p in problems)
    g = SignedMultigraph(np.array([[1.0]]), [["F"]], {}, PM1)
    assert any("at least 2" in p for p in validate(g))


def test_groups_of_complex_society():
    g = load_preset("complex_society").graph
    assert out_group(g, 2) == {0, 1, 3, 4, 5}
    for i in range(g.n):
        assert out_group(g, i) | in_group(g, i) == set(range(g.n))
        assert not out_group(g, i) & in_group(g, i)
        ins = g.weights[i, sorted(in_group(g, i))].sum()
        assert out_weight(g, i) + ins == pytest.approx(1, abs=1e-12)


def test_out_weight_examples():
    g = load_preset("probinv2").graph
    assert out_weight(g, 0) == pytest.approx(1 / 3)
    assert out_weight(g, 1) == 0
    g = make(np.full((4, 4), 0.25), [["F", "F", "D", "D"]] + [["F"] * 4] * 3)
    assert out_weight(g, 0) == pytest.approx(0.5)


def test_sslss_membership():
    g = load_preset("example_general").graph
    assert is_sslss(g.subgraph([0, 1, 2]))
    loop = make([[0.5, 0.5], [1, 0]], [["F", "F"], ["F", "F"]])
    assert not is_sslss(loop)
    hard = make([[0, 1], [1, 0]], [["F", "D"], ["D", "F"]], DeviationSpec.hard(PM1))
    check = is_sslss(hard)
    assert not check and any("soft" in r for r in check.reasons)
    asym = make([[0, 1], [1, 0]], [["F", "D"], ["F", "F"]])
    assert not is_sslss(asym)


def test_flip_relations_is_involution():
    g = load_preset("example_bip").graph
    twice = flip_relations(flip_relations(g, "D"), "D")
    assert twice.relations == g.relations
    assert flip_relations(g, "D").relations[0] == ("D", "D", "F", "F")


def test_construction_checks_shapes():
    with pytest.raises(ValueError):
        SignedMultigraph(np.ones((2, 3)) / 3, [["F"] * 3] * 2, {}, PM1)
    with pytest.raises(ValueError):
        SignedMultigraph(np.eye(2), [["F"]], {}, PM1)
