"""Fixed points, consensus characterisation, constructed equilibria and wisdom verdicts."""
from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .analysis import (NEUTRAL_CONSENSUS, OPPOSITION, REVERSE_OPPOSITION, BipartitionCertificate,
                       classify, verify_k_partition)
from .dynamics import TIE_TOL, default_rule, step
from .graph import EDGE_EPS, SignedMultigraph, is_sslss, out_weight
from .spectrum import DeviationSpec, FixedSet, are_opposing_viewpoints, fixed_points

FIXED_TOL = 1e-10
BRUTE_FORCE_BOUND = 10**6

NEVER_WISE = "never_wise"
WISE_FOR_ALL = "wise_for_all_b0"
CONDITIONALLY_WISE = "conditionally_wise"


class CharacterizationUnavailable(ValueError):
    """Some agent applies different deviation functions to different neighbours."""


class BoundExceeded(ValueError):
    pass


@dataclass
class ConsensusCharacterization:
    strong_out_agents: list[int]
    threshold: float
    admissible: FixedSet
    spectrum: object

    @property
    def persistent_disagreement(self) -> bool:
        return self.admissible.is_empty()

    def admits(self, value) -> bool:
        return value in self.admissible

    def to_json(self) -> dict:
        return {
            "strong_out_agents": [a + 1 for a in self.strong_out_agents],
            "threshold": self.threshold,
            "admissible_consensus": self.admissible.describe(self.spectrum),
            "persistent_disagreement": self.persistent_disagreement,
        }


def agent_deviations(g: SignedMultigraph) -> dict[int, DeviationSpec]:
    """The single deviation each agent applies on its weighted deviate edges."""
    E = g.edges & g.deviate_mask
    out = {}
    for i in range(g.n):
        specs = []
        for j in np.flatnonzero(E[i]):
            spec = g.deviations[g.relations[i][j]]
            if spec not in specs:
                specs.append(spec)
        if len(specs) > 1:
            raise CharacterizationUnavailable(
                f"agent {i + 1} uses {len(specs)} different deviation functions; "
                "the consensus characterisation needs one per agent")
        if specs:
            out[i] = specs[0]
    return out


def consensus_fixed_points(g: SignedMultigraph, rule: str | None = None) -> ConsensusCharacterization:
    """Consensus values c for which (c, ..., c) is a fixed point.

    They are the common neutral opinions of the agents whose out-group weight
    exceeds C0 (0 for averaging, 1/2 for majority).
    """
    rule = rule or default_rule(g)
    c0 = 0.5 if rule == "discrete" else 0.0
    per_agent = agent_deviations(g)
    strong = [i for i in range(g.n) if out_weight(g, i) > c0 + max(EDGE_EPS, TIE_TOL)]
    admissible = FixedSet.everything(g.spectrum)
    for i in strong:
        admissible = admissible.intersect(fixed_points(per_agent[i]))
    return ConsensusCharacterization(strong, c0, admissible, g.spectrum)


def _as_vector(g: SignedMultigraph, b) -> np.ndarray:
    s = g.spectrum
    if s.discrete:
        return np.array([s.index(x) for x in b], dtype=np.int64)
    return np.asarray(b, dtype=float)


def is_fixed_point(g: SignedMultigraph, b, rule: str | None = None, tol: float = FIXED_TOL,
                   tie_rule: str = "keep") -> bool:
    """step(b) == b, exactly for majority updating and within ``tol`` for averaging."""
    b = _as_vector(g, b)
    nxt = step(g, b, rule, tie_rule)
    if g.spectrum.discrete:
        return bool(np.array_equal(nxt, b))
    return bool(np.max(np.abs(nxt - b)) <= tol)


def _single_spec(g: SignedMultigraph) -> DeviationSpec | None:
    specs = g.specs_used()
    if len(specs) > 1:
        raise ValueError("construction needs a single deviation function")
    return specs[0] if specs else None


def _two_sided(g, cert, x, y, kind):
    if cert.kind != kind:
        raise ValueError(f"need a {kind} certificate, got {cert.kind}")
    if sorted(cert.side) != list(range(g.n)):
        raise ValueError("certificate must cover every agent")
    if not cert.holds_for(g):
        raise ValueError("certificate does not hold for this graph")
    spec = _single_spec(g)
    xi, yi = _as_vector(g, [x, y])
    if spec is not None and not are_opposing_viewpoints(spec, xi, yi):
        raise ValueError(f"{x!r} and {y!r} are not opposing viewpoints")
    if spec is None and cert.side2 and xi != yi:
        raise ValueError("without a deviation function both sides must hold the same opinion")
    p = np.array([xi if cert.side[i] == 1 else yi for i in range(g.n)])
    return p


def build_polarization(g: SignedMultigraph, cert: BipartitionCertificate, x, y) -> np.ndarray:
    """x on side 1 and y on side 2; a fixed point whenever (x, y) are opposing viewpoints."""
    p = _two_sided(g, cert, x, y, OPPOSITION)
    if not is_fixed_point(g, p):
        raise AssertionError("constructed polarization is not a fixed point")
    return p


def build_multipolarization(g: SignedMultigraph, partition: Sequence[Iterable[int]], targets: Sequence) -> np.ndarray:
    """Opinion targets[k] on group k; needs D_ij(targets[group j]) == targets[group i] on every deviate edge."""
    groups = [sorted(set(p)) for p in partition]
    if len(targets) != len(groups):
        raise ValueError("need one target per group")
    if not verify_k_partition(g, groups):
        raise ValueError("partition is not an opposition k-partition of the graph")
    tv = _as_vector(g, targets)
    label = np.empty(g.n, dtype=int)
    for k, grp in enumerate(groups):
        label[grp] = k
    E = g.edges & g.deviate_mask
    for i, j in zip(*np.nonzero(E)):
        spec = g.deviation(i, j)
        got = spec.apply(tv[label[j]])
        want = tv[label[i]]
        if (got != want) if g.spectrum.discrete else abs(got - want) > FIXED_TOL:
            raise ValueError(f"condition fails on edge ({i + 1}, {j + 1}): "
                             f"deviation maps group {label[j] + 1}'s target to {got!r}, not {want!r}")
    p = tv[label]
    if not is_fixed_point(g, p):
        raise AssertionError("constructed multipolarization is not a fixed point")
    return p


def build_oscillation_pair(g: SignedMultigraph, cert: BipartitionCertificate, x, y) -> tuple[np.ndarray, np.ndarray]:
    """(p, p_bar) with step(p) == p_bar and step(p_bar) == p for a reverse opposition bipartite graph."""
    p = _two_sided(g, cert, x, y, REVERSE_OPPOSITION)
    spec = _single_spec(g)
    q = spec.apply(p) if spec is not None else p.copy()
    q = q.astype(p.dtype)
    for a, b in ((p, q), (q, p)):
        nxt = step(g, a)
        ok = np.array_equal(nxt, b) if g.spectrum.discrete else np.max(np.abs(nxt - b)) <= FIXED_TOL
        if not ok:
            raise AssertionError("constructed pair is not a two-step orbit")
    return p, q


def brute_force_fixed_points(g: SignedMultigraph, tie_rule: str = "keep", bound: int = BRUTE_FORCE_BOUND) -> list[tuple[int, ...]]:
    """Every fixed point of the majority update, by exhaustive enumeration (label indices)."""
    s = g.spectrum
    if not s.discrete:
        raise ValueError("enumeration needs a discrete spectrum")
    total = s.size ** g.n
    if total > bound:
        raise BoundExceeded(f"{s.size}^{g.n} = {total} opinion vectors exceeds the bound {bound}")
    out = []
    for b in itertools.product(range(s.size), repeat=g.n):
        if is_fixed_point(g, np.array(b, dtype=np.int64), "discrete", tie_rule=tie_rule):
            out.append(b)
    return out


def wisdom_verdict(g: SignedMultigraph, mu, rule: str | None = None) -> str:
    """never_wise if mu cannot be a consensus limit; wise_for_all_b0 when every group reaches the
    neutral consensus mu; conditionally_wise otherwise."""
    char = consensus_fixed_points(g, rule)
    s = g.spectrum
    m = s.index(mu) if s.discrete else float(mu)
    if not char.admits(m):
        return NEVER_WISE
    if not s.discrete and abs(m - s.center) <= FIXED_TOL and is_sslss(g):
        res = classify(g)
        if res.groups and all(grp.verdict == NEUTRAL_CONSENSUS for grp in res.groups):
            return WISE_FOR_ALL
    return CONDITIONALLY_WISE
