"""Signed multigraphs: intensity weights W plus follow/deviate relations F."""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Mapping, NamedTuple, Sequence

import numpy as np

from .spectrum import DeviationSpec, Spectrum

FOLLOW = "F"
# An edge i -> j exists iff W_ij exceeds this.
EDGE_EPS = 1e-12
ROW_SUM_TOL = 1e-12


@dataclass(frozen=True, eq=False)
class SignedMultigraph:
    """n agents, a weight matrix and an n x n table of relations.

    ``relations[i][j]`` is ``"F"`` when agent i follows j and otherwise the id
    of the deviation spec i applies to j's opinion.  Agents are 0-based.
    Construction only checks shapes; call :func:`validate` for the model's
    invariants.
    """

    weights: np.ndarray
    relations: tuple[tuple[str, ...], ...]
    deviations: Mapping[str, DeviationSpec]
    spectrum: Spectrum
    _masks: dict = field(default_factory=dict, init=False, repr=False, compare=False)

    def __post_init__(self):
        W = np.array(self.weights, dtype=float)
        W.setflags(write=False)
        object.__setattr__(self, "weights", W)
        rel = tuple(tuple(str(r) for r in row) for row in self.relations)
        object.__setattr__(self, "relations", rel)
        object.__setattr__(self, "deviations", dict(self.deviations))
        if W.ndim != 2 or W.shape[0] != W.shape[1]:
            raise ValueError(f"weights must be square, got shape {W.shape}")
        if len(rel) != W.shape[0] or any(len(row) != W.shape[0] for row in rel):
            raise ValueError("relations must have the same n x n shape as weights")

    @property
    def n(self) -> int:
        return self.weights.shape[0]

    @property
    def edges(self) -> np.ndarray:
        """Boolean adjacency of the W > 0 digraph."""
        return self.weights > EDGE_EPS

    @property
    def deviate_mask(self) -> np.ndarray:
        """Boolean n x n matrix, True where F_ij is a deviation (any weight)."""
        if "deviate" not in self._masks:
            m = np.array([[r != FOLLOW for r in row] for row in self.relations], dtype=bool).reshape(self.n, self.n)
            m.setflags(write=False)
            self._masks["deviate"] = m
        return self._masks["deviate"]

    def spec_masks(self) -> dict[str, np.ndarray]:
        """Per spec-id boolean masks of the deviate entries using that spec."""
        if "specs" not in self._masks:
            out: dict[str, np.ndarray] = {}
            for i, row in enumerate(self.relations):
                for j, r in enumerate(row):
                    if r != FOLLOW:
                        out.setdefault(r, np.zeros((self.n, self.n), dtype=bool))[i, j] = True
            self._masks["specs"] = out
        return self._masks["specs"]

    def deviation(self, i: int, j: int) -> DeviationSpec | None:
        r = self.relations[i][j]
        return None if r == FOLLOW else self.deviations[r]

    def specs_used(self, *, weighted_only: bool = True) -> list[DeviationSpec]:
        """Distinct deviation specs on deviate edges (on W > 0 edges by default)."""
        seen: list[DeviationSpec] = []
        E = self.edges
        for sid, mask in self.spec_masks().items():
            if weighted_only and not np.any(mask & E):
                continue
            spec = self.deviations.get(sid)
            if spec is not None and spec not in seen:
                seen.append(spec)
        return seen

    def subgraph(self, agents: Sequence[int]) -> "SignedMultigraph":
        """Restriction to ``agents`` (in the given order); weights are not renormalised."""
        idx = list(agents)
        W = self.weights[np.ix_(idx, idx)]
        rel = [[self.relations[i][j] for j in idx] for i in idx]
        used = {r for row in rel for r in row if r != FOLLOW}
        return SignedMultigraph(W, rel, {k: v for k, v in self.deviations.items() if k in used}, self.spectrum)

    def with_relations(self, relations) -> "SignedMultigraph":
        return SignedMultigraph(self.weights, relations, self.deviations, self.spectrum)


def flip_relations(g: SignedMultigraph, spec_id: str | None = None) -> SignedMultigraph:
    """Swap follow and deviate on every pair: the complement graph W (.) not-F.

    New deviate entries use ``spec_id`` (default: the first spec id of ``g``).
    """
    if spec_id is None:
        if not g.deviations:
            raise ValueError("graph has no deviation spec to flip into; pass spec_id")
        spec_id = next(iter(g.deviations))
    rel = [[spec_id if r == FOLLOW else FOLLOW for r in row] for row in g.relations]
    return g.with_relations(rel)


def validate(g: SignedMultigraph) -> list[str]:
    """List every violated model invariant; empty means valid."""
    problems: list[str] = []
    W = g.weights
    if g.n < 2:
        problems.append(f"need at least 2 agents, got {g.n}")
    if not np.all(np.isfinite(W)):
        problems.append("weights contain non-finite values")
    neg = np.argwhere(W < 0)
    for i, j in neg:
        problems.append(f"negative weight W[{i}][{j}] = {float(W[i, j])}")
    sums = W.sum(axis=1)
    for i, s in enumerate(sums):
        if abs(s - 1) > ROW_SUM_TOL:
            problems.append(f"row {i} is not stochastic: sums to {float(s)!r}")
    for sid in sorted({r for row in g.relations for r in row if r != FOLLOW}):
        spec = g.deviations.get(sid)
        if spec is None:
            problems.append(f"relation references unknown deviation spec {sid!r}")
        elif spec.spectrum != g.spectrum:
            problems.append(f"deviation spec {sid!r} is bound to a different spectrum")
        elif spec.is_identity():
            problems.append(f"invalid deviation: spec {sid!r} is the identity")
    return problems


def out_group(g: SignedMultigraph, i: int) -> set[int]:
    """Agents i deviates from, regardless of weight."""
    return {j for j, r in enumerate(g.relations[i]) if r != FOLLOW}


def in_group(g: SignedMultigraph, i: int) -> set[int]:
    """Agents i follows, regardless of weight."""
    return {j for j, r in enumerate(g.relations[i]) if r == FOLLOW}


def out_weight(g: SignedMultigraph, i: int) -> float:
    """Total weight agent i puts on its out-group."""
    return float(g.weights[i][g.deviate_mask[i]].sum())


class SslsCheck(NamedTuple):
    ok: bool
    reasons: list[str]

    def __bool__(self):
        return self.ok


def is_sslss(g: SignedMultigraph) -> SslsCheck:
    """Membership in the simple, linear, soft-opposition class on a symmetric spectrum.

    Requires a zero diagonal, a symmetric interval spectrum (or the real
    line), soft opposition as the only deviation in use, and a symmetric
    affine representation.  A graph with no deviate edges qualifies.
    """
    from .spectral import affine_representation

    reasons = []
    W = g.weights
    if np.any(np.abs(np.diag(W)) > 0):
        reasons.append("self-loops present (W_ii != 0)")
    s = g.spectrum
    if s.discrete or not s.symmetric:
        reasons.append("spectrum is not a symmetric interval or the real line")
    specs = g.specs_used()
    if len(specs) > 1:
        reasons.append(f"{len(specs)} distinct deviation specs in use")
    if any(sp.kind != "soft" for sp in specs):
        reasons.append("deviation is not soft opposition")
    if not reasons:
        A = affine_representation(g).A
        if np.max(np.abs(A - A.T), initial=0.0) > 1e-12:
            reasons.append("affine representation A is not symmetric")
    return SslsCheck(not reasons, reasons)
