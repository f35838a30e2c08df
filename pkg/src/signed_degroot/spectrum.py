"""Opinion spectra and deviation functions.

A spectrum is either a real interval or an ordered set of labels.  Discrete
opinions are stored as 0-based label indices; continuous opinions are floats.
A :class:`DeviationSpec` describes how an agent inverts the opinion of someone
it opposes.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Any, Mapping

import numpy as np

# Equality tolerance for closed-form continuous kinds.
EQ_TOL = 1e-12
# Slack accepted on interval bounds; averaging can overshoot by a few ulps.
BOUND_SLACK = 1e-9


class DomainError(ValueError):
    """An opinion lies outside the spectrum it is evaluated on."""


class InvalidDeviationError(ValueError):
    """A deviation function is malformed or equals the identity."""


@dataclass(frozen=True)
class Interval:
    lo: float
    hi: float

    discrete = False

    def __post_init__(self):
        lo, hi = float(self.lo), float(self.hi)
        object.__setattr__(self, "lo", lo)
        object.__setattr__(self, "hi", hi)
        if math.isnan(lo) or math.isnan(hi) or not lo < hi:
            raise ValueError(f"interval needs lo < hi, got [{lo}, {hi}]")
        if math.isinf(lo) != math.isinf(hi):
            raise ValueError("half-bounded intervals are not supported")

    @classmethod
    def real_line(cls) -> "Interval":
        return cls(-math.inf, math.inf)

    @property
    def bounded(self) -> bool:
        return math.isfinite(self.lo)

    @property
    def center(self) -> float:
        return 0.0 if not self.bounded else (self.lo + self.hi) / 2

    @property
    def symmetric(self) -> bool:
        """True for spectra of the form [-beta, beta] or the real line."""
        return not self.bounded or abs(self.lo + self.hi) <= EQ_TOL * max(1.0, abs(self.hi))

    def contains(self, x) -> bool:
        x = np.asarray(x, dtype=float)
        if not np.all(np.isfinite(x)):
            return False
        return bool(np.all((x >= self.lo - BOUND_SLACK) & (x <= self.hi + BOUND_SLACK)))

    def clip(self, x):
        if not self.bounded:
            return x
        return np.clip(x, self.lo, self.hi)

    def to_json(self) -> dict:
        enc = lambda v: None if math.isinf(v) else v  # noqa: E731
        return {"type": "interval", "lo": enc(self.lo), "hi": enc(self.hi)}


@dataclass(frozen=True)
class DiscreteOrdered:
    labels: tuple[str, ...]

    discrete = True

    def __post_init__(self):
        labels = tuple(str(s) for s in self.labels)
        object.__setattr__(self, "labels", labels)
        if len(labels) < 2:
            raise ValueError("a discrete spectrum needs at least two labels")
        if len(set(labels)) != len(labels):
            raise ValueError(f"duplicate labels in {labels}")

    @property
    def size(self) -> int:
        return len(self.labels)

    def index(self, label) -> int:
        if isinstance(label, (int, np.integer)) and not isinstance(label, bool):
            if not 0 <= label < self.size:
                raise DomainError(f"label index {label} outside 0..{self.size - 1}")
            return int(label)
        try:
            return self.labels.index(str(label))
        except ValueError:
            raise DomainError(f"unknown label {label!r}") from None

    def contains(self, x) -> bool:
        x = np.asarray(x)
        if x.dtype.kind not in "iu":
            return False
        return bool(np.all((x >= 0) & (x < self.size)))

    def to_json(self) -> dict:
        return {"type": "discrete", "labels": list(self.labels)}


Spectrum = Interval | DiscreteOrdered


def spectrum_from_json(obj: Mapping[str, Any]) -> Spectrum:
    kind = obj.get("type", "interval")
    if kind == "interval":
        lo = -math.inf if obj.get("lo") is None else float(obj["lo"])
        hi = math.inf if obj.get("hi") is None else float(obj["hi"])
        return Interval(lo, hi)
    if kind == "discrete":
        return DiscreteOrdered(tuple(obj["labels"]))
    raise ValueError(f"unknown spectrum type {kind!r}")


KINDS = ("identity", "soft", "hard", "affine", "constant", "signed_power", "table")


@dataclass(frozen=True)
class FixedSet:
    """Exact description of a fixed-point set: isolated points plus at most one interval.

    For discrete spectra the points are label indices.
    """

    points: frozenset = frozenset()
    interval: tuple[float, float] | None = None

    @classmethod
    def everything(cls, spectrum: Spectrum) -> "FixedSet":
        if spectrum.discrete:
            return cls(frozenset(range(spectrum.size)))
        return cls(interval=(spectrum.lo, spectrum.hi))

    def is_empty(self) -> bool:
        return not self.points and self.interval is None

    def __contains__(self, x) -> bool:
        if self.interval is not None:
            lo, hi = self.interval
            if lo - EQ_TOL <= x <= hi + EQ_TOL:
                return True
        if isinstance(x, (int, np.integer)) and x in self.points:
            return True
        return any(isinstance(p, float) and abs(p - x) <= EQ_TOL for p in self.points)

    def intersect(self, other: "FixedSet") -> "FixedSet":
        points = {p for p in self.points if p in other} | {p for p in other.points if p in self}
        interval = None
        if self.interval is not None and other.interval is not None:
            lo = max(self.interval[0], other.interval[0])
            hi = min(self.interval[1], other.interval[1])
            if lo < hi:
                interval = (lo, hi)
            elif lo == hi:
                points.add(float(lo))
        if interval is not None:
            points = {p for p in points if not interval[0] <= p <= interval[1]}
        # collapse float duplicates from the two sides
        dedup: list = []
        for p in sorted(points):
            if not dedup or isinstance(p, (int, np.integer)) or abs(p - dedup[-1]) > EQ_TOL:
                dedup.append(p)
        return FixedSet(frozenset(dedup), interval)

    def describe(self, spectrum: Spectrum | None = None):
        if isinstance(spectrum, DiscreteOrdered):
            return sorted(spectrum.labels[p] for p in self.points)
        out: dict = {"points": sorted(float(p) for p in self.points)}
        if self.interval is not None:
            lo, hi = self.interval
            out["interval"] = [None if math.isinf(lo) else lo, None if math.isinf(hi) else hi]
        return out


@dataclass(frozen=True)
class DeviationSpec:
    """A parametric deviation function bound to a spectrum.

    ``kind`` is one of ``identity``, ``soft``, ``hard``, ``affine``, ``constant``,
    ``signed_power`` or ``table``.  Kind-specific parameters: ``a`` and ``b``
    (affine), ``target`` (constant; a float or label index), ``p``
    (signed_power), ``table`` (tuple of label indices, one per label) and
    ``midpoint_to_upper`` (hard).
    """

    kind: str
    spectrum: Spectrum
    a: float = 0.0
    b: float = 0.0
    target: Any = None
    p: float = 1.0
    table: tuple[int, ...] | None = None
    midpoint_to_upper: bool = True

    def __post_init__(self):
        s = self.spectrum
        if self.kind not in KINDS:
            raise InvalidDeviationError(f"unknown deviation kind {self.kind!r}")
        if self.kind == "affine":
            if s.discrete:
                raise InvalidDeviationError("affine deviation needs an interval spectrum")
            if s.bounded:
                if abs(self.a) > 1 + EQ_TOL:
                    raise InvalidDeviationError(f"affine |a| must be <= 1 on a bounded spectrum, got {self.a}")
                ends = (self.a * s.lo + self.b, self.a * s.hi + self.b)
                if min(ends) < s.lo - EQ_TOL or max(ends) > s.hi + EQ_TOL:
                    raise InvalidDeviationError(
                        f"affine map {self.a}x+{self.b} does not map [{s.lo}, {s.hi}] into itself")
        elif self.kind == "hard":
            if not s.discrete and not s.bounded:
                raise InvalidDeviationError("hard opposition needs a bounded spectrum")
        elif self.kind == "signed_power":
            if s.discrete or not s.bounded or not s.symmetric:
                raise InvalidDeviationError("signed_power needs a bounded symmetric interval")
            if not self.p > 0:
                raise InvalidDeviationError(f"signed_power needs p > 0, got {self.p}")
        elif self.kind == "constant":
            if self.target is None:
                raise InvalidDeviationError("constant deviation needs a target")
            if s.discrete:
                object.__setattr__(self, "target", s.index(self.target))
            else:
                object.__setattr__(self, "target", float(self.target))
                if not s.contains(self.target):
                    raise DomainError(f"constant target {self.target} outside the spectrum")
        elif self.kind == "table":
            if not s.discrete:
                raise InvalidDeviationError("table deviation needs a discrete spectrum")
            tab = tuple(int(v) for v in (self.table or ()))
            if len(tab) != s.size or not all(0 <= v < s.size for v in tab):
                raise InvalidDeviationError("table must map every label to a label")
            object.__setattr__(self, "table", tab)

    # -- construction helpers -------------------------------------------------
    @classmethod
    def soft(cls, spectrum):
        return cls("soft", spectrum)

    @classmethod
    def hard(cls, spectrum, midpoint_to_upper=True):
        return cls("hard", spectrum, midpoint_to_upper=midpoint_to_upper)

    @classmethod
    def affine(cls, spectrum, a, b=0.0):
        return cls("affine", spectrum, a=float(a), b=float(b))

    @classmethod
    def constant(cls, spectrum, target):
        return cls("constant", spectrum, target=target)

    @classmethod
    def signed_power(cls, spectrum, p):
        return cls("signed_power", spectrum, p=float(p))

    @classmethod
    def from_table(cls, spectrum: DiscreteOrdered, mapping: Mapping):
        tab = [None] * spectrum.size
        for k, v in mapping.items():
            tab[spectrum.index(k)] = spectrum.index(v)
        if any(v is None for v in tab):
            raise InvalidDeviationError("table must be total over the labels")
        return cls("table", spectrum, table=tuple(tab))

    # -------------------------------------------------------------------------
    def is_identity(self) -> bool:
        """True if the spec acts as the identity on its spectrum (not a deviation)."""
        if self.kind == "identity":
            return True
        if self.kind == "affine":
            return abs(self.a - 1) <= EQ_TOL and abs(self.b) <= EQ_TOL
        if self.kind == "signed_power":
            return abs(self.p - 1) <= EQ_TOL
        if self.kind == "table":
            return self.table == tuple(range(self.spectrum.size))
        return False

    def __call__(self, x):
        return eval_deviation(self, x)

    def apply(self, x):
        """Vectorised evaluation without domain checks; used on the hot path."""
        s = self.spectrum
        kind = self.kind
        if s.discrete:
            x = np.asarray(x, dtype=np.int64)
            K = s.size
            if kind == "soft":
                return K - 1 - x
            if kind == "hard":
                mid2 = K - 1  # compare 2k against K-1 to stay in integers
                upper = np.where(2 * x == mid2, K - 1 if self.midpoint_to_upper else 0, 0)
                return np.where(2 * x < mid2, K - 1, np.where(2 * x > mid2, 0, upper))
            if kind == "constant":
                return np.full_like(x, self.target)
            if kind == "table":
                return np.asarray(self.table, dtype=np.int64)[x]
            if kind == "identity":
                return x.copy()
            raise InvalidDeviationError(f"{kind} is not defined on a discrete spectrum")
        x = np.asarray(x, dtype=float)
        if kind == "soft":
            return (s.lo + s.hi) - x if s.bounded else -x
        if kind == "hard":
            mid = s.center
            at_mid = s.hi if self.midpoint_to_upper else s.lo
            return np.where(x < mid, s.hi, np.where(x > mid, s.lo, at_mid))
        if kind == "affine":
            return self.a * x + self.b
        if kind == "constant":
            return np.full_like(x, self.target)
        if kind == "signed_power":
            beta = s.hi
            return np.sign(x) * beta * (np.abs(x) / beta) ** self.p
        if kind == "identity":
            return x.copy()
        raise InvalidDeviationError(f"{kind} is not defined on an interval spectrum")

    def affine_params(self) -> tuple[float, float] | None:
        """(a, b) with D(x) = a*x + b, or None when the kind is not affine."""
        s = self.spectrum
        if s.discrete:
            return None
        if self.kind == "soft":
            return (-1.0, (s.lo + s.hi) if s.bounded else 0.0)
        if self.kind == "affine":
            return (self.a, self.b)
        if self.kind == "constant":
            return (0.0, self.target)
        if self.kind == "signed_power" and abs(self.p - 1) <= EQ_TOL:
            return (1.0, 0.0)
        return None

    def to_json(self) -> dict:
        s = self.spectrum
        out: dict = {"kind": self.kind}
        if self.kind == "hard":
            out["midpoint_to_upper"] = self.midpoint_to_upper
        elif self.kind == "affine":
            out["a"], out["b"] = self.a, self.b
        elif self.kind == "constant":
            out["target"] = s.labels[self.target] if s.discrete else self.target
        elif self.kind == "signed_power":
            out["p"] = self.p
        elif self.kind == "table":
            out["map"] = {s.labels[k]: s.labels[v] for k, v in enumerate(self.table)}
        return out


def deviation_from_json(obj: Mapping[str, Any], spectrum: Spectrum) -> DeviationSpec:
    kind = obj["kind"]
    if kind == "table":
        return DeviationSpec.from_table(spectrum, obj["map"])
    if kind == "hard":
        return DeviationSpec.hard(spectrum, bool(obj.get("midpoint_to_upper", True)))
    if kind == "affine":
        return DeviationSpec.affine(spectrum, obj["a"], obj.get("b", 0.0))
    if kind == "constant":
        return DeviationSpec.constant(spectrum, obj["target"])
    if kind == "signed_power":
        return DeviationSpec.signed_power(spectrum, obj["p"])
    if kind in ("soft", "identity"):
        return DeviationSpec(kind, spectrum)
    raise InvalidDeviationError(f"unknown deviation kind {kind!r}")


def _check_opinion(spec: DeviationSpec, x):
    s = spec.spectrum
    if s.discrete:
        return s.index(x)
    if not s.contains(x):
        raise DomainError(f"opinion {x} outside [{s.lo}, {s.hi}]")
    return float(x)


def eval_deviation(spec: DeviationSpec, x):
    """Evaluate the deviation function at a single opinion (label, label index or float)."""
    if spec.kind == "identity":
        raise InvalidDeviationError("the identity is not a deviation function")
    x = _check_opinion(spec, x)
    y = spec.apply(x)
    return int(y) if spec.spectrum.discrete else float(y)


def fixed_points(spec: DeviationSpec) -> FixedSet:
    """Exact set of neutral opinions of ``spec``."""
    s = spec.spectrum
    if s.discrete:
        xs = np.arange(s.size)
        return FixedSet(frozenset(int(k) for k in xs[spec.apply(xs) == xs]))
    if spec.is_identity():
        return FixedSet.everything(s)
    kind = spec.kind
    if kind == "soft":
        return FixedSet(frozenset({s.center}))
    if kind == "hard":
        return FixedSet()
    if kind == "constant":
        return FixedSet(frozenset({spec.target}))
    if kind == "signed_power":
        return FixedSet(frozenset({-s.hi, 0.0, s.hi}))
    if kind == "affine":
        if abs(spec.a - 1) <= EQ_TOL:
            return FixedSet()  # pure translation, b != 0
        c = spec.b / (1 - spec.a)
        if s.contains(c):
            return FixedSet(frozenset({float(np.clip(c, s.lo, s.hi))}))
        return FixedSet()
    raise InvalidDeviationError(f"no fixed-point rule for {kind}")


def are_opposing_viewpoints(spec: DeviationSpec, x, y) -> bool:
    """True iff D(x) == y and D(y) == x."""
    s = spec.spectrum
    dx, dy = eval_deviation(spec, x), eval_deviation(spec, y)
    if s.discrete:
        return dx == s.index(y) and dy == s.index(x)
    return abs(dx - float(y)) <= EQ_TOL and abs(dy - float(x)) <= EQ_TOL
