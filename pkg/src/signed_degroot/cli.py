"""Command-line entry point: ``signed-degroot <command> ...``."""
from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from . import analysis, equilibria, spectral, verify
from .dynamics import DEFAULT_T_MAX, DEFAULT_TOL, TIE_RULES, simulate
from .scenario import PRESETS, Scenario, ScenarioError, load_preset, load_scenario
from .spectrum import DomainError, InvalidDeviationError

EXIT_OK = 0
EXIT_MALFORMED = 1
EXIT_UNDETERMINED = 2


def _emit(obj, out: str | None = None):
    text = json.dumps(obj, indent=2)
    if out:
        Path(out).write_text(text + "\n")
    print(text)


def _parse_agents(text: str | None, n: int) -> list[int] | None:
    if not text:
        return None
    agents = sorted({int(a) - 1 for a in text.replace(" ", "").split(",") if a})
    if not agents or agents[0] < 0 or agents[-1] >= n:
        raise ScenarioError([f"agents must be 1-based indices in 1..{n}"])
    return agents


def _parse_b0(text: str | None, sc: Scenario) -> np.ndarray:
    s = sc.graph.spectrum
    if text is None:
        if sc.b0 is None:
            raise ScenarioError(["scenario has no initial_opinions; pass --b0"])
        return sc.b0
    parts = [p.strip() for p in text.split(",")]
    if len(parts) != sc.graph.n:
        raise ScenarioError([f"--b0 needs {sc.graph.n} values, got {len(parts)}"])
    if s.discrete:
        return np.array([s.index(p) for p in parts], dtype=np.int64)
    b0 = np.array([float(p) for p in parts])
    if not s.contains(b0):
        raise ScenarioError(["--b0 leaves the spectrum"])
    return b0


def _restrict(sc: Scenario, agents) -> Scenario:
    if agents is None:
        return sc
    b0 = None if sc.b0 is None else sc.b0[agents]
    return Scenario(sc.graph.subgraph(agents), b0, sc.name)


def cmd_simulate(args) -> int:
    sc = load_scenario(args.scenario, strict=args.strict)
    b0 = _parse_b0(args.b0, sc)
    traj, report = simulate(sc.graph, b0, args.rule, args.steps, args.tol, args.tie_rule)
    out = report.to_json(sc.graph.spectrum)
    if args.out:
        prefix = Path(args.out)
        prefix.parent.mkdir(parents=True, exist_ok=True)
        traj.write_csv(f"{prefix}.trajectory.csv")
        Path(f"{prefix}.limit.json").write_text(json.dumps(out, indent=2) + "\n")
    _emit(out)
    return EXIT_UNDETERMINED if report.status == "undetermined" else EXIT_OK


def cmd_classify(args) -> int:
    sc = load_scenario(args.scenario, strict=args.strict)
    _emit(analysis.classify(sc.graph).to_json(), args.out)
    return EXIT_OK


def cmd_influence(args) -> int:
    sc = load_scenario(args.scenario, strict=args.strict)
    agents = _parse_agents(args.agents, sc.graph.n)
    sub = _restrict(sc, agents)
    members = [a + 1 for a in (agents if agents is not None else range(sc.graph.n))]
    try:
        rep = spectral.influence_report(sub.graph)
    except spectral.RegimeError as exc:
        _emit({"schema_version": 1, "agents": members, "regime": exc.condition, "message": str(exc),
               "s": None, "g_signs": None, "example_prediction": None}, args.out)
        return EXIT_OK
    b0 = sub.b0 if sub.b0 is not None else np.ones(sub.graph.n)
    out = rep.to_json(b0)
    out["agents"] = members
    _emit(out, args.out)
    return EXIT_OK


def _opposing_pairs(spec, spectrum) -> list[tuple]:
    if spectrum.discrete:
        cands = range(spectrum.size)
    elif spectrum.bounded:
        cands = np.linspace(spectrum.lo, spectrum.hi, 5)
    else:
        cands = [1.0, -1.0]
    pairs = []
    for x in cands:
        y = spec.apply(x)
        if y != x and spectrum.contains(np.asarray(y)) and np.all(spec.apply(y) == x):
            pair = tuple(sorted((x, y)))
            if pair not in pairs:
                pairs.append(pair)
    return pairs


def _encode(vec, spectrum):
    if spectrum.discrete:
        return [spectrum.labels[int(k)] for k in vec]
    return [float(v) for v in vec]


def cmd_equilibria(args) -> int:
    sc = load_scenario(args.scenario, strict=args.strict)
    g = sc.graph
    s = g.spectrum
    out: dict = {"schema_version": 1}
    try:
        out["characterization"] = equilibria.consensus_fixed_points(g, args.rule).to_json()
    except equilibria.CharacterizationUnavailable as exc:
        out["characterization"] = {"unavailable": str(exc)}
    constructed = []
    specs = g.specs_used()
    spec = specs[0] if len(specs) == 1 else None
    opp = analysis.opposition_bipartition(g)
    rev = analysis.reverse_opposition_bipartition(g)
    if spec is not None:
        for x, y in _opposing_pairs(spec, s):
            if opp is not None:
                p = equilibria.build_polarization(g, opp, x, y)
                constructed.append({"kind": "polarization", "vector": _encode(p, s)})
            if rev is not None:
                p, q = equilibria.build_oscillation_pair(g, rev, x, y)
                constructed.append({"kind": "oscillation_pair", "vectors": [_encode(p, s), _encode(q, s)]})
    if args.partition:
        groups = [[int(a) - 1 for a in grp.split(",")] for grp in args.partition.split("/")]
        targets = [t.strip() for t in args.targets.split(",")] if args.targets else None
        if targets is None:
            raise ScenarioError(["--partition needs --targets"])
        p = equilibria.build_multipolarization(g, groups, targets)
        constructed.append({"kind": "multipolarization", "vector": _encode(p, s)})
    out["constructed"] = constructed
    if s.discrete:
        try:
            fps = equilibria.brute_force_fixed_points(g, args.tie_rule)
            out["fixed_points"] = [_encode(f, s) for f in fps]
        except equilibria.BoundExceeded as exc:
            out["fixed_points"] = {"refused": str(exc)}
    if sc.b0 is not None:
        out["initial_opinions_fixed"] = equilibria.is_fixed_point(g, sc.b0, args.rule, tie_rule=args.tie_rule)
    if args.mu is not None:
        try:
            out["wisdom"] = {"mu": args.mu, "verdict": equilibria.wisdom_verdict(g, args.mu, args.rule)}
        except equilibria.CharacterizationUnavailable as exc:
            out["wisdom"] = {"mu": args.mu, "verdict": None, "unavailable": str(exc)}
    _emit(out, args.out)
    return EXIT_OK


def cmd_verify(args) -> int:
    cfg = verify.TrialConfig(trials=args.trials, n_max=args.n_max, seed=args.seed, density=args.density,
                             sign_prob=args.sign_prob, rule=args.rule or "continuous", workers=args.workers)
    rep = verify.run_trials(cfg)
    text = rep.dumps()
    if args.out:
        Path(args.out).write_text(text + "\n")
    print(text)
    return EXIT_OK if rep.ok else EXIT_UNDETERMINED


def cmd_presets(args) -> int:
    if args.name:
        print(load_preset(args.name).dumps())
    else:
        print("\n".join(PRESETS))
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="signed-degroot",
                                 description="Opinion dynamics on signed multigraphs.")
    sub = ap.add_subparsers(dest="command", required=True)

    def scenario_cmd(name, help_):
        p = sub.add_parser(name, help=help_)
        p.add_argument("scenario", help="scenario JSON path or preset name (see `presets`)")
        p.add_argument("--strict", action="store_true", help="reject rows that do not sum to 1 exactly")
        return p

    p = scenario_cmd("simulate", "iterate the update and report the limit")
    p.add_argument("--rule", choices=["continuous", "discrete"])
    p.add_argument("--steps", type=int, default=DEFAULT_T_MAX, help="maximum number of steps")
    p.add_argument("--tol", type=float, default=DEFAULT_TOL)
    p.add_argument("--tie-rule", choices=TIE_RULES, default="keep")
    p.add_argument("--b0", help="comma-separated initial opinions (overrides the scenario)")
    p.add_argument("--out", help="output prefix; writes PREFIX.trajectory.csv and PREFIX.limit.json")
    p.set_defaults(func=cmd_simulate)

    p = scenario_cmd("classify", "predict the long-run regime of each closed group")
    p.add_argument("--out")
    p.set_defaults(func=cmd_classify)

    p = scenario_cmd("influence", "influence weights and polarized limit values")
    p.add_argument("--agents", help="comma-separated 1-based agents to restrict to, e.g. 1,2,3")
    p.add_argument("--out")
    p.set_defaults(func=cmd_influence)

    p = scenario_cmd("equilibria", "consensus characterisation, constructed equilibria, fixed points")
    p.add_argument("--rule", choices=["continuous", "discrete"])
    p.add_argument("--tie-rule", choices=TIE_RULES, default="keep")
    p.add_argument("--mu", help="true value for the wisdom verdict")
    p.add_argument("--partition", help="groups for a multipolarization, e.g. 1,2,3/4/5,6")
    p.add_argument("--targets", help="one opinion per group, e.g. L,M,R")
    p.add_argument("--out")
    p.set_defaults(func=cmd_equilibria)

    p = sub.add_parser("verify", help="randomised agreement checks")
    p.add_argument("--trials", type=int, default=500)
    p.add_argument("--n-max", type=int, default=8)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--density", type=float, default=0.5)
    p.add_argument("--sign-prob", type=float, default=0.5)
    p.add_argument("--rule", choices=["continuous", "discrete"])
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--out", help="write the report JSON here as well")
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("presets", help="list bundled scenarios or print one")
    p.add_argument("name", nargs="?", choices=PRESETS)
    p.set_defaults(func=cmd_presets)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    if getattr(args, "mu", None) is not None:
        try:
            args.mu = float(args.mu)
        except ValueError:
            pass  # a label on a discrete spectrum
    try:
        return args.func(args)
    except ScenarioError as exc:
        _emit({"schema_version": 1, "error": "malformed scenario", "problems": exc.problems})
        return EXIT_MALFORMED
    except (DomainError, InvalidDeviationError, ValueError) as exc:
        _emit({"schema_version": 1, "error": type(exc).__name__, "problems": [str(exc)]})
        return EXIT_MALFORMED


if __name__ == "__main__":
    sys.exit(main())
