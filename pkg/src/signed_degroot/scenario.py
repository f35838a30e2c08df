"""Scenario JSON: a signed multigraph plus optional initial opinions."""
from __future__ import annotations

import json
from dataclasses import dataclass
from importlib import resources
from pathlib import Path
from typing import Any

import numpy as np

from .graph import FOLLOW, SignedMultigraph, validate
from .spectrum import deviation_from_json, spectrum_from_json

LOAD_ROW_TOL = 1e-9
PRESETS = ("probinv2", "probinv3", "complex_society", "example_general",
           "example_multiple", "example_bip", "example_opp")


class ScenarioError(ValueError):
    """Malformed scenario; ``problems`` lists every violation found."""

    def __init__(self, problems: list[str]):
        super().__init__("; ".join(problems))
        self.problems = problems


@dataclass
class Scenario:
    graph: SignedMultigraph
    b0: np.ndarray | None = None
    name: str | None = None

    def encoded_b0(self):
        if self.b0 is None:
            return None
        s = self.graph.spectrum
        if s.discrete:
            return [s.labels[int(k)] for k in self.b0]
        return [float(v) for v in self.b0]

    def to_json(self) -> dict:
        g = self.graph
        out: dict[str, Any] = {
            "schema_version": 1,
            "n": g.n,
            "spectrum": g.spectrum.to_json(),
            "weights": g.weights.tolist(),
            "relations": [list(row) for row in g.relations],
            "deviations": {sid: spec.to_json() for sid, spec in g.deviations.items()},
        }
        if self.b0 is not None:
            out["initial_opinions"] = self.encoded_b0()
        if self.name:
            out["name"] = self.name
        return out

    def dumps(self) -> str:
        return json.dumps(self.to_json(), indent=2)


def scenario_from_json(obj: dict, strict: bool = False) -> Scenario:
    """Build a scenario, renormalising rows that sum to 1 within 1e-9 (unless ``strict``)."""
    problems: list[str] = []
    try:
        spectrum = spectrum_from_json(obj.get("spectrum", {"type": "interval", "lo": -1, "hi": 1}))
        deviations = {str(k): deviation_from_json(v, spectrum) for k, v in obj.get("deviations", {}).items()}
        W = np.array(obj["weights"], dtype=float)
        rel = obj.get("relations")
        if rel is None:
            rel = [[FOLLOW] * W.shape[0] for _ in range(W.shape[0])]
    except (KeyError, TypeError, ValueError) as exc:
        raise ScenarioError([f"cannot parse scenario: {exc}"]) from exc
    if "n" in obj and W.ndim == 2 and int(obj["n"]) != W.shape[0]:
        problems.append(f"n = {obj['n']} but weights are {W.shape[0]} x {W.shape[1]}")
    if W.ndim == 2 and W.shape[0] == W.shape[1] and np.all(np.isfinite(W)) and not strict:
        sums = W.sum(axis=1)
        close = np.abs(sums - 1) <= LOAD_ROW_TOL
        W = np.where(close[:, None], W / np.where(close, sums, 1.0)[:, None], W)
    try:
        g = SignedMultigraph(W, rel, deviations, spectrum)
    except ValueError as exc:
        raise ScenarioError(problems + [str(exc)]) from exc
    problems += validate(g)
    b0 = None
    if obj.get("initial_opinions") is not None:
        raw = obj["initial_opinions"]
        if len(raw) != g.n:
            problems.append(f"initial_opinions has length {len(raw)}, expected {g.n}")
        else:
            try:
                if spectrum.discrete:
                    b0 = np.array([spectrum.index(x) for x in raw], dtype=np.int64)
                else:
                    b0 = np.array(raw, dtype=float)
                    if not spectrum.contains(b0):
                        problems.append("initial opinions leave the spectrum")
            except ValueError as exc:
                problems.append(str(exc))
    if problems:
        raise ScenarioError(problems)
    return Scenario(g, b0, obj.get("name"))


def load_preset(name: str) -> Scenario:
    if name not in PRESETS:
        raise ScenarioError([f"unknown preset {name!r}; choose from {', '.join(PRESETS)}"])
    text = resources.files("signed_degroot").joinpath("presets", f"{name}.json").read_text()
    return scenario_from_json(json.loads(text))


def load_scenario(source: str | Path, strict: bool = False) -> Scenario:
    """Load a scenario file, or a preset when ``source`` is a preset name (optionally ``preset:name``)."""
    src = str(source)
    if src.startswith("preset:"):
        return load_preset(src.split(":", 1)[1])
    path = Path(src)
    if not path.exists() and src in PRESETS:
        return load_preset(src)
    try:
        obj = json.loads(path.read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise ScenarioError([f"cannot read {src}: {exc}"]) from exc
    return scenario_from_json(obj, strict=strict)


def dump_scenario(sc: Scenario, path: str | Path) -> None:
    Path(path).write_text(sc.dumps() + "\n")
