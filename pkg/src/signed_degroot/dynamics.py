"""Synchronous updating: weighted averaging (continuous) and weighted majority (discrete)."""
from __future__ import annotations

import csv
import json
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .graph import FOLLOW, SignedMultigraph
from .spectrum import DomainError

DEFAULT_TOL = 1e-9
DEFAULT_T_MAX = 10_000
CONFIRM_WINDOW = 10
CYCLE_HISTORY = 64
# A detected cycle must keep its amplitude: at least this large, and not
# shrinking by more than CYCLE_DECAY over the confirmation window.
CYCLE_MIN_AMPLITUDE = 1e3
CYCLE_DECAY = 1e-3
TIE_TOL = 1e-12
TIE_RULES = ("keep", "lowest")


class WrongRuleError(ValueError):
    """Update rule does not match the spectrum type."""


def _operator(g: SignedMultigraph) -> Callable[[np.ndarray], np.ndarray]:
    """Compile the continuous update b -> sum_j W_ij F_ij(b_j) for repeated use."""
    if g.spectrum.discrete:
        raise WrongRuleError("continuous averaging needs an interval spectrum")
    W = g.weights
    W_follow = np.where(g.deviate_mask, 0.0, W)
    parts = [(g.deviations[sid], np.where(mask, W, 0.0)) for sid, mask in g.spec_masks().items()]
    parts = [(spec, Wd) for spec, Wd in parts if np.any(Wd)]
    spectrum = g.spectrum

    def step(b):
        out = W_follow @ b
        for spec, Wd in parts:
            out = out + Wd @ spec.apply(b)
        return spectrum.clip(out)

    return step


def step_continuous(g: SignedMultigraph, b) -> np.ndarray:
    b = np.asarray(b, dtype=float)
    if g.spectrum.discrete:
        raise WrongRuleError("continuous averaging needs an interval spectrum")
    if b.shape != (g.n,):
        raise ValueError(f"opinion vector must have length {g.n}")
    if not g.spectrum.contains(b):
        raise DomainError("opinion vector leaves the spectrum")
    return _operator(g)(b)


def _signals(g: SignedMultigraph, b: np.ndarray) -> np.ndarray:
    """sig[i, j] = F_ij(b_j) as label indices."""
    sig = np.broadcast_to(b, (g.n, g.n)).copy()
    for sid, mask in g.spec_masks().items():
        inv = g.deviations[sid].apply(b)
        sig[mask] = np.broadcast_to(inv, (g.n, g.n))[mask]
    return sig


def label_scores(g: SignedMultigraph, b) -> np.ndarray:
    """scores[i, s] = sum_j W_ij * 1(F_ij(b_j) == s)."""
    b = np.asarray(b, dtype=np.int64)
    sig = _signals(g, b)
    K = g.spectrum.size
    onehot = sig[:, :, None] == np.arange(K)[None, None, :]
    return np.einsum("ij,ijs->is", g.weights, onehot)


def step_discrete(g: SignedMultigraph, b, tie_rule: str = "keep") -> np.ndarray:
    """Each agent adopts the weighted-majority label of its (possibly inverted) signals.

    ``tie_rule="keep"`` keeps the current label when it is among the maximisers
    and otherwise takes the lowest-index maximiser; ``"lowest"`` always takes
    the lowest-index maximiser.
    """
    if not g.spectrum.discrete:
        raise WrongRuleError("majority updating needs a discrete spectrum")
    if tie_rule not in TIE_RULES:
        raise ValueError(f"tie_rule must be one of {TIE_RULES}")
    b = np.asarray(b)
    if b.shape != (g.n,) or not g.spectrum.contains(b):
        raise DomainError("opinion vector leaves the spectrum")
    b = b.astype(np.int64)
    scores = label_scores(g, b)
    best = scores.max(axis=1, keepdims=True)
    maximal = scores >= best - TIE_TOL
    out = maximal.argmax(axis=1)
    if tie_rule == "keep":
        keep = maximal[np.arange(g.n), b]
        out = np.where(keep, b, out)
    return out.astype(np.int64)


def default_rule(g: SignedMultigraph) -> str:
    return "discrete" if g.spectrum.discrete else "continuous"


def step(g: SignedMultigraph, b, rule: str | None = None, tie_rule: str = "keep") -> np.ndarray:
    rule = rule or default_rule(g)
    if rule == "continuous":
        return step_continuous(g, b)
    if rule == "discrete":
        return step_discrete(g, b, tie_rule)
    raise ValueError(f"unknown rule {rule!r}")


@dataclass
class LimitReport:
    status: str  # "converged" | "oscillating" | "undetermined"
    tol: float
    t_max: int
    limit: np.ndarray | None = None
    t_star: int | None = None
    period: int | None = None
    orbit: list[np.ndarray] = field(default_factory=list)
    steps_run: int = 0

    @property
    def converged(self) -> bool:
        return self.status == "converged"

    @property
    def oscillating(self) -> bool:
        return self.status == "oscillating"

    def to_json(self, spectrum=None) -> dict:
        enc = _encoder(spectrum)
        out = {"schema_version": 1, "status": self.status, "tol": self.tol, "t_max": self.t_max,
               "steps_run": self.steps_run, "confirm_window": CONFIRM_WINDOW}
        if self.converged:
            out["t_star"] = self.t_star
            out["limit"] = enc(self.limit)
        elif self.oscillating:
            out["period"] = self.period
            out["orbit"] = [enc(x) for x in self.orbit]
        return out


def _encoder(spectrum):
    if spectrum is not None and spectrum.discrete:
        return lambda x: [spectrum.labels[int(k)] for k in x]
    return lambda x: [float(v) for v in x]


@dataclass
class Trajectory:
    steps: np.ndarray  # shape (T + 1, n)
    graph: SignedMultigraph
    rule: str
    tie_rule: str = "keep"

    def __len__(self):
        return len(self.steps)

    def write_csv(self, path):
        enc = _encoder(self.graph.spectrum)
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["t"] + [f"b_{i + 1}" for i in range(self.graph.n)])
            for t, row in enumerate(self.steps):
                w.writerow([t] + [repr(v) if isinstance(v, float) else v for v in enc(row)])


def simulate(g: SignedMultigraph, b0, rule: str | None = None, t_max: int = DEFAULT_T_MAX,
             tol: float = DEFAULT_TOL, tie_rule: str = "keep") -> tuple[Trajectory, LimitReport]:
    """Iterate the update from ``b0`` and classify the long-run behaviour.

    Continuous: converged once the sup-norm step stays below ``tol`` for
    ``CONFIRM_WINDOW`` consecutive steps; oscillating once the state matches
    the state ``p`` steps back (2 <= p <= 64) within ``tol`` for the same
    window.  Discrete: an exact revisit of an earlier state decides.
    """
    if t_max < 1:
        raise ValueError("t_max must be >= 1")
    rule = rule or default_rule(g)
    if rule == "discrete":
        return _simulate_discrete(g, b0, t_max, tol, tie_rule)
    if rule != "continuous":
        raise ValueError(f"unknown rule {rule!r}")
    b = np.asarray(b0, dtype=float)
    if b.shape != (g.n,):
        raise ValueError(f"opinion vector must have length {g.n}")
    if not g.spectrum.contains(b):
        raise DomainError("initial opinions leave the spectrum")
    f = _operator(g)
    states = [b.copy()]
    H = CYCLE_HISTORY
    ring = np.full((H + 1, g.n), np.nan)  # ring[t % (H+1)] = state t
    ring[0] = b
    S = H + CONFIRM_WINDOW + 1
    steps = np.zeros(S)  # steps[t % S] = sup-norm of state t - state t-1
    still = 0
    cyc_run = np.zeros(H - 1, dtype=np.int64)  # index p - 2
    report = None
    for t in range(1, t_max + 1):
        b = f(b)
        states.append(b)
        prev = ring[(t - 1) % (H + 1)]
        ring[t % (H + 1)] = b
        steps[t % S] = delta = np.max(np.abs(b - prev))
        if delta < tol:
            still += 1
            if still >= CONFIRM_WINDOW:
                t_star = t - CONFIRM_WINDOW
                report = LimitReport("converged", tol, t_max, limit=b.copy(), t_star=t_star, steps_run=t)
                break
            continue
        still = 0
        # distance to the states p steps back
        lags = (t - np.arange(2, H + 1)) % (H + 1)
        d = np.max(np.abs(ring[lags] - b), axis=1)
        cyc_run = np.where(d < tol, cyc_run + 1, 0)
        hits = np.flatnonzero(cyc_run >= CONFIRM_WINDOW)
        found = int(hits[0]) + 2 if hits.size else None
        if found is not None and t > found + CONFIRM_WINDOW:
            # a slowly decaying alternating mode also repeats within tol; a cycle keeps its size
            now = steps[(t - np.arange(found)) % S].max()
            then = steps[(t - CONFIRM_WINDOW - np.arange(found)) % S].max()
            if now < CYCLE_MIN_AMPLITUDE * tol or now < (1 - CYCLE_DECAY) * then:
                found = None
        else:
            found = None
        if found is not None:
            orbit = [states[t - found + 1 + k].copy() for k in range(found)]
            report = LimitReport("oscillating", tol, t_max, period=found, orbit=orbit, steps_run=t)
            break
    if report is None:
        report = LimitReport("undetermined", tol, t_max, steps_run=t_max)
    return Trajectory(np.array(states), g, "continuous"), report


def _simulate_discrete(g, b0, t_max, tol, tie_rule):
    b = np.asarray([g.spectrum.index(x) for x in b0], dtype=np.int64)
    seen = {tuple(b): 0}
    states = [b]
    report = None
    for t in range(1, t_max + 1):
        b = step_discrete(g, b, tie_rule)
        states.append(b)
        key = tuple(b)
        if key in seen:
            t0 = seen[key]
            period = t - t0
            if period == 1:
                report = LimitReport("converged", tol, t_max, limit=b.copy(), t_star=t0, steps_run=t)
            else:
                report = LimitReport("oscillating", tol, t_max, period=period,
                                     orbit=[s.copy() for s in states[t0:t]], steps_run=t)
            break
        seen[key] = t
    if report is None:
        report = LimitReport("undetermined", tol, t_max, steps_run=t_max)
    return Trajectory(np.array(states), g, "discrete", tie_rule), report


def utility_continuous(g: SignedMultigraph, b, i: int) -> float:
    """u_i(b) = -sum_j W_ij (b_i - F_ij(b_j))^2."""
    b = np.asarray(b, dtype=float)
    total = 0.0
    for j in range(g.n):
        w = g.weights[i, j]
        if w == 0:
            continue
        r = g.relations[i][j]
        signal = b[j] if r == FOLLOW else float(g.deviations[r].apply(b[j]))
        total += w * (b[i] - signal) ** 2
    return -total


def utility_discrete(g: SignedMultigraph, b, i: int) -> float:
    """u_i(b) = -sum_j W_ij (1 - 1(F_ij(b_j), b_i))."""
    b = np.asarray(b, dtype=np.int64)
    total = 0.0
    for j in range(g.n):
        w = g.weights[i, j]
        if w == 0:
            continue
        r = g.relations[i][j]
        signal = b[j] if r == FOLLOW else int(g.deviations[r].apply(b[j]))
        if signal != b[i]:
            total += w
    return -total


def limit_report_json(report: LimitReport, spectrum) -> str:
    return json.dumps(report.to_json(spectrum), indent=2)
