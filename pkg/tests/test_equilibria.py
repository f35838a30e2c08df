import itertools

import numpy as np
import pytest

from signed_degroot.analysis import opposition_bipartition, reverse_opposition_bipartition
from signed_degroot.dynamics import step_discrete
from signed_degroot.equilibria import (CONDITIONALLY_WISE, NEVER_WISE, WISE_FOR_ALL, BoundExceeded,
                                       CharacterizationUnavailable, brute_force_fixed_points,
                                       build_multipolarization, build_oscillation_pair, build_polarization,
                                       consensus_fixed_points, is_fixed_point, wisdom_verdict)
from signed_degroot.graph import SignedMultigraph
from signed_degroot.scenario import load_preset
from signed_degroot.spectrum import DeviationSpec, DiscreteOrdered, FixedSet, Interval

from helpers import PM1

BIN = DiscreteOrdered(("0", "1"))
TRIANGLE = np.array([[0, 0.5, 0.5], [0.5, 0, 0.5], [0.5, 0.5, 0]])


def soft_graph(W, rel, spectrum=PM1):
    return SignedMultigraph(np.array(W, dtype=float), rel, {"D": DeviationSpec.soft(spectrum)}, spectrum)


def test_sslss_with_opposition_admits_only_the_centre():
    g = load_preset("example_general").graph.subgraph([0, 1, 2])
    char = consensus_fixed_points(g)
    assert char.admissible == FixedSet(frozenset({0.0}))
    assert char.admits(0.0) and not char.admits(0.3)


def test_complex_society_first_five_disagree_forever():
    g = load_preset("complex_society").graph.subgraph([0, 1, 2, 3, 4])
    char = consensus_fixed_points(g)
    assert char.persistent_disagreement
    assert char.to_json()["persistent_disagreement"] is True


def test_complex_society_needs_one_deviation_per_agent():
    with pytest.raises(CharacterizationUnavailable):
        consensus_fixed_points(load_preset("complex_society").graph)


def test_all_follow_admits_everything():
    g = soft_graph(TRIANGLE, [["F"] * 3] * 3)
    char = consensus_fixed_points(g)
    assert char.strong_out_agents == []
    assert char.admits(0.77) and char.admits(-1.0)


def test_consensus_characterisation_forward_direction():
    # every admissible consensus is a fixed point
    for spec in (DeviationSpec.soft(PM1), DeviationSpec.affine(PM1, 0.5, 0.1), DeviationSpec.constant(PM1, 0.4)):
        g = SignedMultigraph(TRIANGLE, [["F", "D", "D"], ["D", "F", "F"], ["D", "F", "F"]], {"D": spec}, PM1)
        (c,) = consensus_fixed_points(g).admissible.points
        assert is_fixed_point(g, [c] * 3)


def test_is_fixed_point_examples():
    g = load_preset("probinv2").graph
    assert is_fixed_point(g, [0.0, 0.0])
    assert not is_fixed_point(g, [1.0, -1.0])
    assert is_fixed_point(load_preset("example_multiple").graph, ["L", "L", "L", "M", "R", "R"])


def test_build_polarization_example_bip():
    g = load_preset("example_bip").graph
    p = build_polarization(g, opposition_bipartition(g), "unlikely", "likely")
    assert [g.spectrum.labels[k] for k in p] == ["unlikely", "unlikely", "likely", "likely"]
    with pytest.raises(ValueError):
        build_polarization(g, opposition_bipartition(g), "unlikely", "possible")


def test_build_polarization_continuous_and_degenerate():
    g = load_preset("example_general").graph.subgraph([0, 1, 2])
    p = build_polarization(g, opposition_bipartition(g), 1.0, -1.0)
    assert p.tolist() == [1.0, -1.0, -1.0]
    follow = soft_graph(TRIANGLE, [["F"] * 3] * 3)
    cert = opposition_bipartition(follow)
    assert cert.side2 == []
    assert build_polarization(follow, cert, 0.4, 0.4).tolist() == [0.4] * 3


def test_build_multipolarization():
    g = load_preset("example_multiple").graph
    p = build_multipolarization(g, [[0, 1, 2], [3], [4, 5]], ["L", "M", "R"])
    assert [g.spectrum.labels[k] for k in p] == ["L", "L", "L", "M", "R", "R"]
    with pytest.raises(ValueError, match="edge"):
        build_multipolarization(g, [[0, 1, 2], [3], [4, 5]], ["M", "L", "R"])


def test_multipolarization_reduces_to_polarization():
    g = load_preset("example_bip").graph
    cert = opposition_bipartition(g)
    p2 = build_polarization(g, cert, "unlikely", "likely")
    pk = build_multipolarization(g, [cert.side1, cert.side2], ["unlikely", "likely"])
    assert np.array_equal(p2, pk)


def test_oscillation_pair_example_opp():
    g = load_preset("example_opp").graph
    p, q = build_oscillation_pair(g, reverse_opposition_bipartition(g), "unlikely", "likely")
    labels = g.spectrum.labels
    assert [labels[k] for k in p] == ["unlikely", "unlikely", "likely", "likely"]
    assert [labels[k] for k in q] == ["likely", "likely", "unlikely", "unlikely"]
    assert np.array_equal(step_discrete(g, p), q) and np.array_equal(step_discrete(g, q), p)


def test_oscillation_pair_two_agents():
    # A = [[0, -1], [-1, 0]]: both agents deviate from each other and share one side
    g = soft_graph([[0, 1], [1, 0]], [["F", "D"], ["D", "F"]])
    cert = reverse_opposition_bipartition(g)
    assert cert.side2 == []
    p, q = build_oscillation_pair(g, cert, 1.0, -1.0)
    assert p.tolist() == [1.0, 1.0] and q.tolist() == [-1.0, -1.0]
    # the mixed vector is a fixed point here, not part of a two-step orbit
    assert is_fixed_point(g, [1.0, -1.0])
    p, q = build_oscillation_pair(g, cert, 0.0, 0.0)
    assert np.array_equal(p, q)


def test_brute_force_small_cases():
    follow = SignedMultigraph(np.array([[0.5, 0.5], [0.5, 0.5]]), [["F", "F"], ["F", "F"]], {}, BIN)
    assert set(brute_force_fixed_points(follow)) == {(0, 0), (1, 1), (0, 1), (1, 0)}
    assert set(brute_force_fixed_points(follow, "lowest")) == {(0, 0), (1, 1)}
    anti = SignedMultigraph(np.array([[0.0, 1.0], [1.0, 0.0]]), [["F", "D"], ["D", "F"]],
                            {"D": DeviationSpec.soft(BIN)}, BIN)
    assert set(brute_force_fixed_points(anti)) == {(0, 1), (1, 0)}


def test_brute_force_matches_direct_enumeration():
    g = load_preset("example_multiple").graph
    fps = brute_force_fixed_points(g)
    assert (0, 0, 0, 1, 2, 2) in fps
    direct = [b for b in itertools.product(range(3), repeat=6)
              if np.array_equal(step_discrete(g, np.array(b)), np.array(b))]
    assert fps == direct


def test_brute_force_bound():
    g = load_preset("example_multiple").graph
    with pytest.raises(BoundExceeded):
        brute_force_fixed_points(g, bound=100)
    with pytest.raises(ValueError):
        brute_force_fixed_points(load_preset("probinv2").graph)


def test_wisdom_verdicts():
    g = load_preset("example_general").graph
    polar = g.subgraph([0, 1, 2])
    neutral = g.subgraph([7, 8, 9, 10])
    assert wisdom_verdict(polar, 0.3) == NEVER_WISE
    assert wisdom_verdict(neutral, 0.0) == WISE_FOR_ALL
    assert wisdom_verdict(polar, 0.0) == CONDITIONALLY_WISE
    follow = soft_graph(TRIANGLE, [["F"] * 3] * 3)
    assert wisdom_verdict(follow, 0.42) == CONDITIONALLY_WISE
