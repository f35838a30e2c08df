"""Graph structure of the W > 0 digraph and the long-run classification it implies."""
from __future__ import annotations

import math
from collections import deque
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from .graph import SignedMultigraph, is_sslss

POLARIZES = "polarizes"
DIVERGES = "diverges"
NEUTRAL_CONSENSUS = "neutral_consensus"

OPPOSITION = "opposition"
REVERSE_OPPOSITION = "reverse_opposition"


def _successors(E: np.ndarray) -> list[list[int]]:
    return [[int(j) for j in np.flatnonzero(row)] for row in E]


def strongly_connected_components(g: SignedMultigraph) -> list[list[int]]:
    """Maximal SCCs of the W > 0 digraph (iterative Tarjan), each sorted, ordered by smallest member."""
    succ = _successors(g.edges)
    n = g.n
    index = [-1] * n
    low = [0] * n
    on_stack = [False] * n
    stack: list[int] = []
    comps: list[list[int]] = []
    counter = 0
    for root in range(n):
        if index[root] >= 0:
            continue
        work = [(root, 0)]
        index[root] = low[root] = counter
        counter += 1
        stack.append(root)
        on_stack[root] = True
        while work:
            v, k = work[-1]
            if k < len(succ[v]):
                work[-1] = (v, k + 1)
                w = succ[v][k]
                if index[w] < 0:
                    index[w] = low[w] = counter
                    counter += 1
                    stack.append(w)
                    on_stack[w] = True
                    work.append((w, 0))
                elif on_stack[w]:
                    low[v] = min(low[v], index[w])
                continue
            work.pop()
            if work:
                u = work[-1][0]
                low[u] = min(low[u], low[v])
            if low[v] == index[v]:
                comp = []
                while True:
                    w = stack.pop()
                    on_stack[w] = False
                    comp.append(w)
                    if w == v:
                        break
                comps.append(sorted(comp))
    return sorted(comps, key=lambda c: c[0])


def is_strongly_connected(g: SignedMultigraph, subset: Iterable[int] | None = None) -> bool:
    sub = g if subset is None else g.subgraph(sorted(subset))
    return len(strongly_connected_components(sub)) == 1


@dataclass
class StructurePartition:
    groups: list[list[int]]
    rest: list[int]


def structure_partition(g: SignedMultigraph) -> StructurePartition:
    """Closed strongly connected groups plus the rest of the world."""
    E = g.edges
    groups = []
    for comp in strongly_connected_components(g):
        inside = np.zeros(g.n, dtype=bool)
        inside[comp] = True
        if not np.any(E[comp][:, ~inside]):
            groups.append(comp)
    member = {i for c in groups for i in c}
    return StructurePartition(groups, [i for i in range(g.n) if i not in member])


@dataclass
class BipartitionCertificate:
    """side[agent] is 1 or 2; side 2 may be empty."""

    side: dict[int, int]
    kind: str

    @property
    def side1(self) -> list[int]:
        return sorted(a for a, s in self.side.items() if s == 1)

    @property
    def side2(self) -> list[int]:
        return sorted(a for a, s in self.side.items() if s == 2)

    def signs(self, n: int | None = None) -> np.ndarray:
        """+1 on side 1, -1 on side 2, indexed by agent (0 for agents outside)."""
        n = n if n is not None else max(self.side) + 1
        out = np.zeros(n, dtype=int)
        for a, s in self.side.items():
            out[a] = 1 if s == 1 else -1
        return out

    def holds_for(self, g: SignedMultigraph) -> bool:
        """Edge-by-edge check of the certificate's defining condition."""
        E, D = g.edges, g.deviate_mask
        for i in self.side:
            for j in self.side:
                if not E[i, j]:
                    continue
                crossing = self.side[i] != self.side[j]
                must_deviate = crossing if self.kind == OPPOSITION else not crossing
                if bool(D[i, j]) != must_deviate:
                    return False
        return True

    def to_json(self, one_based: bool = True) -> dict:
        o = 1 if one_based else 0
        return {"kind": self.kind, "side1": [a + o for a in self.side1], "side2": [a + o for a in self.side2]}


def _parity_bipartition(E: np.ndarray, crossing: np.ndarray, subset: Sequence[int]) -> dict[int, int] | None:
    """Two-colour ``subset`` so that crossing[i, j] says whether edge i->j joins different colours."""
    members = set(subset)
    adj: dict[int, list[tuple[int, bool]]] = {i: [] for i in subset}
    for i in subset:
        for j in np.flatnonzero(E[i]):
            j = int(j)
            if j in members:
                adj[i].append((j, bool(crossing[i, j])))
                adj[j].append((i, bool(crossing[i, j])))
    side: dict[int, int] = {}
    for root in sorted(subset):
        if root in side:
            continue
        side[root] = 1
        queue = deque([root])
        while queue:
            u = queue.popleft()
            for v, cross in adj[u]:
                want = (3 - side[u]) if cross else side[u]
                if v not in side:
                    side[v] = want
                    queue.append(v)
                elif side[v] != want:
                    return None
    return side


def opposition_bipartition(g: SignedMultigraph, subset: Iterable[int] | None = None) -> BipartitionCertificate | None:
    """Certificate that follow edges stay within sides and deviate edges cross, or None."""
    subset = list(range(g.n)) if subset is None else sorted(subset)
    side = _parity_bipartition(g.edges, g.deviate_mask, subset)
    if side is None:
        return None
    cert = BipartitionCertificate(side, OPPOSITION)
    return cert if cert.holds_for(g) else None


def reverse_opposition_bipartition(g: SignedMultigraph, subset: Iterable[int] | None = None) -> BipartitionCertificate | None:
    """Certificate with the roles swapped: deviate within sides, follow across."""
    subset = list(range(g.n)) if subset is None else sorted(subset)
    # flipping every relation turns this into the ordinary opposition problem
    side = _parity_bipartition(g.edges, ~g.deviate_mask, subset)
    if side is None:
        return None
    cert = BipartitionCertificate(side, REVERSE_OPPOSITION)
    return cert if cert.holds_for(g) else None


def verify_k_partition(g: SignedMultigraph, partition: Sequence[Iterable[int]]) -> bool:
    """True iff within-group W > 0 edges all follow and cross-group ones all deviate."""
    groups = [sorted(set(p)) for p in partition]
    flat = [a for grp in groups for a in grp]
    if len(flat) != len(set(flat)) or sorted(flat) != list(range(g.n)):
        raise ValueError("partition must cover all agents exactly once")
    label = np.empty(g.n, dtype=int)
    for k, grp in enumerate(groups):
        label[grp] = k
    crossing = label[:, None] != label[None, :]
    E = g.edges
    return bool(np.all(g.deviate_mask[E] == crossing[E]))


def period(g: SignedMultigraph, subset: Iterable[int] | None = None) -> int:
    """gcd of cycle lengths of the strongly connected W > 0 digraph on ``subset``.

    A lone agent without a self-loop has period 0.
    """
    subset = list(range(g.n)) if subset is None else sorted(subset)
    sub = g.subgraph(subset)
    E = sub.edges
    if len(subset) == 1:
        return 1 if E[0, 0] else 0
    if len(strongly_connected_components(sub)) != 1:
        raise ValueError("period is only defined on a strongly connected subset")
    level = [-1] * len(subset)
    level[0] = 0
    queue = deque([0])
    while queue:
        u = queue.popleft()
        for v in np.flatnonzero(E[u]):
            if level[v] < 0:
                level[v] = level[u] + 1
                queue.append(int(v))
    d = 0
    for u, v in zip(*np.nonzero(E)):
        d = math.gcd(d, abs(level[u] + 1 - level[v]))
    return d


def is_aperiodic(g: SignedMultigraph, subset: Iterable[int] | None = None) -> bool:
    return period(g, subset) == 1


@dataclass
class GroupVerdict:
    members: list[int]
    verdict: str | None
    period: int
    opposition: BipartitionCertificate | None = None
    reverse: BipartitionCertificate | None = None
    in_theory: bool = True
    notes: list[str] = field(default_factory=list)

    def to_json(self) -> dict:
        return {
            "members": [a + 1 for a in self.members],
            "verdict": self.verdict,
            "period": self.period,
            "certificate": {
                "opposition": None if self.opposition is None else self.opposition.to_json(),
                "reverse_opposition": None if self.reverse is None else self.reverse.to_json(),
            },
            "in_theory": self.in_theory,
            "notes": self.notes,
        }


@dataclass
class ClassificationResult:
    groups: list[GroupVerdict]
    rest: list[int]
    overall_converges: bool
    in_theory: bool

    def verdict_of(self, agent: int) -> str | None:
        for grp in self.groups:
            if agent in grp.members:
                return grp.verdict
        return None

    def to_json(self) -> dict:
        return {
            "schema_version": 1,
            "groups": [grp.to_json() for grp in self.groups],
            "rest": [a + 1 for a in self.rest],
            "overall_converges": self.overall_converges,
            "in_theory": self.in_theory,
        }


def verdict_from(opposition: bool, reverse: bool, per: int) -> str:
    if reverse:
        return DIVERGES
    if opposition and per == 1:
        return POLARIZES
    return NEUTRAL_CONSENSUS


def classify(g: SignedMultigraph) -> ClassificationResult:
    """Predict the long-run regime of every closed strongly connected group.

    Polarizes iff opposition bipartite and aperiodic, diverges iff reverse
    opposition bipartite, neutral consensus otherwise.  Groups outside the
    simple/soft/symmetric class still get certificates and a verdict but are
    flagged ``in_theory=False``.
    """
    part = structure_partition(g)
    verdicts = []
    for grp in part.groups:
        sub = g.subgraph(grp)
        per = period(g, grp)
        opp = opposition_bipartition(g, grp)
        rev = reverse_opposition_bipartition(g, grp)
        check = is_sslss(sub)
        notes = list(check.reasons)
        if per == 0:
            notes.append("single agent without self-loop; not classifiable")
            verdicts.append(GroupVerdict(grp, None, per, opp, rev, False, notes))
            continue
        verdicts.append(GroupVerdict(grp, verdict_from(opp is not None, rev is not None, per), per,
                                     opp, rev, check.ok, notes))
    converges = all(v.verdict != DIVERGES for v in verdicts)
    in_theory = all(v.in_theory for v in verdicts)
    return ClassificationResult(verdicts, part.rest, converges, in_theory)
