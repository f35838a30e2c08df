import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from hypothesis.extra.numpy import arrays

from signed_degroot.graph import SignedMultigraph
from signed_degroot.scenario import load_preset
from signed_degroot.spectral import (RegimeError, RepresentationUnavailable, affine_representation,
                                     eigen_symmetric, gauge_matrix, gauge_signs, has_eigenvalue,
                                     influence_report, spectral_radius, stationary_left)
from signed_degroot.dynamics import step_continuous
from signed_degroot.spectrum import DeviationSpec, Interval

from helpers import PM1, random_digraph

finite = st.floats(-10, 10, allow_nan=False, allow_infinity=False)


@settings(max_examples=60, deadline=None)
@given(arrays(float, st.tuples(st.integers(1, 7)).map(lambda t: (t[0], t[0])), elements=finite))
def test_jacobi_matches_numpy(M):
    S = (M + M.T) / 2
    vals, vecs = eigen_symmetric(S)
    assert np.allclose(vals, np.linalg.eigvalsh(S), atol=1e-9)
    assert np.allclose(vecs.T @ vecs, np.eye(len(S)), atol=1e-9)
    assert np.allclose(S @ vecs, vecs * vals, atol=1e-8)


def test_jacobi_rejects_asymmetric():
    with pytest.raises(ValueError):
        eigen_symmetric([[0, 1], [0, 0]])


def test_power_estimate_against_polynomial_roots():
    rng = np.random.default_rng(3)
    for _ in range(30):
        n = int(rng.integers(2, 7))
        A = rng.uniform(-1, 1, (n, n))
        rad = spectral_radius(A)
        assert rad.is_estimate
        # independent oracle: roots of the characteristic polynomial
        assert rad.value == pytest.approx(max(abs(np.roots(np.poly(A)))), rel=1e-6)


def test_probinv2_representation_and_radius():
    g = load_preset("probinv2").graph
    rep = affine_representation(g)
    assert np.allclose(rep.A, [[2 / 3, -1 / 3], [1 / 3, 2 / 3]])
    assert np.allclose(rep.d, 0)
    assert spectral_radius(rep.A).value == pytest.approx(math.sqrt(5 / 9), abs=1e-12)


def test_affine_offsets_and_fidelity():
    spec = DeviationSpec.affine(Interval(0, 10), -1.0, 10.0)  # the soft reflection on [0, 10]
    g = SignedMultigraph(np.array([[0.5, 0.5], [0.25, 0.75]]), [["F", "D"], ["D", "F"]], {"D": spec}, Interval(0, 10))
    rep = affine_representation(g)
    assert np.allclose(rep.d, [5.0, 2.5])
    rng = np.random.default_rng(0)
    for _ in range(20):
        x = rng.uniform(0, 10, 2)
        assert np.allclose(rep(x), step_continuous(g, x), atol=1e-12)


def test_hard_deviation_has_no_representation():
    with pytest.raises(RepresentationUnavailable):
        affine_representation(load_preset("probinv3").graph)


def test_gauge_against_enumeration():
    rng = np.random.default_rng(11)
    for _ in range(40):
        g = random_digraph(rng, int(rng.integers(2, 6)), density=0.6)
        A = affine_representation(g).A
        found = gauge_signs(A)
        brute = None
        for bits in range(2 ** g.n):
            s = np.array([1 if bits >> k & 1 else -1 for k in range(g.n)])
            if np.all(np.outer(s, s) * A >= -1e-12):
                brute = s
                break
        assert (found is None) == (brute is None)
        if found is not None:
            D = np.diag(found.astype(float))
            assert np.allclose(D @ A @ D, np.abs(A))


def test_gauge_matrix_probinv2_absent():
    assert gauge_matrix(load_preset("probinv2").graph) is None


def test_has_eigenvalue_tolerance():
    assert has_eigenvalue([0.2, 1 - 1e-9], 1.0)
    assert not has_eigenvalue([0.2, 1 - 1e-6], 1.0)


def test_stationary_left_matches_numpy():
    rng = np.random.default_rng(5)
    M = rng.random((5, 5))
    M /= M.sum(axis=1, keepdims=True)
    s = stationary_left(M)
    vals, vecs = np.linalg.eig(M.T)
    v = np.real(vecs[:, np.argmin(np.abs(vals - 1))])
    assert np.allclose(s, v / v.sum(), atol=1e-10)


def test_influence_on_example_general_group():
    g = load_preset("example_general").graph.subgraph([0, 1, 2])
    rep = influence_report(g)
    assert np.allclose(rep.s, 1 / 3)
    assert rep.g_signs.tolist() == [1, -1, -1]
    assert rep.value(np.ones(3)) == pytest.approx(-1 / 3)
    assert np.allclose(rep.predict(np.ones(3)), [-1 / 3, 1 / 3, 1 / 3])


@pytest.mark.parametrize("agents, condition", [
    ([3, 4, 5, 6], "reverse_opposition_bipartite"),
    ([7, 8, 9, 10], "not_opposition_bipartite"),
    ([0, 1, 2, 7, 8, 9, 10], "not_strongly_connected"),
])
def test_influence_regime_errors(agents, condition):
    g = load_preset("example_general").graph.subgraph(agents)
    with pytest.raises(RegimeError) as exc:
        influence_report(g)
    assert exc.value.condition == condition


def test_influence_outside_class():
    with pytest.raises(RegimeError) as exc:
        influence_report(load_preset("probinv2").graph)
    assert exc.value.condition == "not_sslss"
