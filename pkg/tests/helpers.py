import numpy as np

from signed_degroot.graph import SignedMultigraph
from signed_degroot.spectrum import DeviationSpec, Interval

PM1 = Interval(-1, 1)


def random_digraph(rng, n, density=0.4, deviate=0.5, spec=None, zero_diagonal=False):
    """Random row-stochastic signed digraph with every row nonempty."""
    E = rng.random((n, n)) < density
    if zero_diagonal:
        np.fill_diagonal(E, False)
    for i in range(n):
        if not E[i].any():
            E[i, (i + 1 + rng.integers(n - 1)) % n if zero_diagonal else rng.integers(n)] = True
    W = np.where(E, rng.random((n, n)) + 0.1, 0.0)
    W /= W.sum(axis=1, keepdims=True)
    rel = [["D" if rng.random() < deviate else "F" for _ in range(n)] for _ in range(n)]
    return SignedMultigraph(W, rel, {"D": spec or DeviationSpec.soft(PM1)}, PM1)


def to_networkx(g):
    import networkx as nx
    G = nx.DiGraph()
    G.add_nodes_from(range(g.n))
    G.add_edges_from((int(i), int(j)) for i, j in zip(*np.nonzero(g.edges)))
    return G
