"""Randomised agreement checks between certificates, spectra and simulation."""
from __future__ import annotations

import json
from collections import deque
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field

import numpy as np

from . import analysis, spectral
from .dynamics import simulate, step_continuous, step_discrete, utility_continuous, utility_discrete
from .equilibria import brute_force_fixed_points, consensus_fixed_points
from .graph import FOLLOW, SignedMultigraph, flip_relations
from .scenario import Scenario
from .spectrum import DeviationSpec, DiscreteOrdered, Interval

REGIMES = ("bipartite", "reverse", "imbalanced", "uniform")
SINKHORN_MAX_ITER = 2000
SINKHORN_TOL = 1e-13
# give up early when the residual is still large; such supports have no scaling
SINKHORN_CHECK = (200, 1e-6)
MAX_RESAMPLE = 1000


class ProjectionFailed(RuntimeError):
    pass


@dataclass
class TrialConfig:
    trials: int = 500
    n_min: int = 2
    n_max: int = 8
    density: float = 0.5
    sign_prob: float = 0.5
    rule: str = "continuous"
    b0_samples: int = 5
    seed: int = 0
    sim_tol: float = 1e-6
    eig_tol: float = spectral.UNIT_EIG_TOL
    workers: int = 1

    def __post_init__(self):
        if not (0 <= self.density <= 1 and 0 <= self.sign_prob <= 1):
            raise ValueError("density and sign_prob must lie in [0, 1]")
        if not 2 <= self.n_min <= self.n_max:
            raise ValueError("need 2 <= n_min <= n_max")
        if self.rule not in ("continuous", "discrete"):
            raise ValueError("rule must be continuous or discrete")
        if self.trials < 0:
            raise ValueError("trials must be >= 0")

    def to_json(self) -> dict:
        """Everything that determines the outcome (the worker count does not)."""
        out = asdict(self)
        out.pop("workers")
        return out


@dataclass
class AgreementReport:
    config: dict
    counts: dict[str, dict[str, int]] = field(default_factory=dict)
    counterexamples: list[dict] = field(default_factory=list)

    def record(self, prop: str, ok: bool, trial: int | None = None, detail: str = "",
               scenario: Scenario | None = None):
        c = self.counts.setdefault(prop, {"pass": 0, "fail": 0})
        c["pass" if ok else "fail"] += 1
        if not ok:
            self.counterexamples.append({"property": prop, "trial": trial, "detail": detail,
                                         "scenario": None if scenario is None else scenario.to_json()})

    def merge(self, other: "AgreementReport"):
        for prop, c in other.counts.items():
            mine = self.counts.setdefault(prop, {"pass": 0, "fail": 0})
            mine["pass"] += c["pass"]
            mine["fail"] += c["fail"]
        self.counterexamples.extend(other.counterexamples)

    @property
    def failures(self) -> int:
        return sum(c["fail"] for c in self.counts.values())

    @property
    def ok(self) -> bool:
        return self.failures == 0

    def to_json(self) -> dict:
        return {"schema_version": 1, "config": self.config, "ok": self.ok,
                "counts": dict(sorted(self.counts.items())), "counterexamples": self.counterexamples}

    def dumps(self) -> str:
        return json.dumps(self.to_json(), indent=2, sort_keys=True)


# -- generators ----------------------------------------------------------------

def _connected(adj: np.ndarray) -> bool:
    n = adj.shape[0]
    seen = {0}
    queue = deque([0])
    while queue:
        u = queue.popleft()
        for v in np.flatnonzero(adj[u]):
            if int(v) not in seen:
                seen.add(int(v))
                queue.append(int(v))
    return len(seen) == n


def _symmetric_sinkhorn(M: np.ndarray) -> np.ndarray:
    """Scale a symmetric nonnegative M to D M D with unit row sums."""
    x = np.ones(M.shape[0])
    for it in range(SINKHORN_MAX_ITER):
        x = np.sqrt(x / (M @ x))
        if not np.all(np.isfinite(x)) or x.max() > 1e150:
            break  # support admits no doubly stochastic scaling
        W = x[:, None] * M * x[None, :]
        resid = np.max(np.abs(W.sum(axis=1) - 1))
        if resid < SINKHORN_TOL:
            return (W + W.T) / 2
        if it == SINKHORN_CHECK[0] and resid > SINKHORN_CHECK[1]:
            break
    raise ProjectionFailed("symmetric scaling did not reach unit row sums")


def _sample_support(n, density, rng):
    for _ in range(MAX_RESAMPLE):
        upper = np.triu(rng.random((n, n)) < density, 1)
        adj = upper | upper.T
        if _connected(adj):
            return adj
    return ~np.eye(n, dtype=bool)


def random_sslss(n: int, density: float = 0.5, sign_prob: float = 0.5, seed=0,
                 regime: str | None = None) -> SignedMultigraph:
    """Random connected member of the simple soft symmetric class on [-1, 1].

    Symmetric zero-diagonal support (resampled until connected), symmetric
    positive weights scaled to unit row sums, and symmetric relations.
    ``regime`` forces an opposition bipartite, reverse, imbalanced (one edge
    flipped from bipartite) or independent (``uniform``) sign pattern.
    """
    if n < 2:
        raise ValueError("need n >= 2")
    rng = np.random.default_rng(seed)
    regime = regime or "uniform"
    if regime not in REGIMES:
        raise ValueError(f"regime must be one of {REGIMES}")
    for _ in range(MAX_RESAMPLE):
        adj = _sample_support(n, density, rng)
        M = np.where(adj, rng.uniform(0.1, 1.0, (n, n)), 0.0)
        M = np.triu(M, 1)
        M = M + M.T
        try:
            W = _symmetric_sinkhorn(M)
        except ProjectionFailed:
            continue
        if np.any(adj & (W <= 1e-9)):
            continue  # scaling drove an edge to zero
        break
    else:
        raise ProjectionFailed("could not sample a scalable support")
    W[~adj] = 0.0
    W = W / W.sum(axis=1, keepdims=True)
    W = (W + W.T) / 2

    side = rng.random(n) < 0.5
    crossing = side[:, None] != side[None, :]
    if regime == "bipartite":
        dev = crossing.copy()
    elif regime == "reverse":
        dev = ~crossing
    elif regime == "imbalanced":
        dev = crossing.copy()
        iu, ju = np.nonzero(np.triu(adj, 1))
        k = rng.integers(len(iu))
        dev[iu[k], ju[k]] = dev[ju[k], iu[k]] = not dev[iu[k], ju[k]]
    else:
        upper = np.triu(rng.random((n, n)) < sign_prob, 1)
        dev = upper | upper.T
    dev &= adj
    rel = [["D" if dev[i, j] else FOLLOW for j in range(n)] for i in range(n)]
    spec = Interval(-1.0, 1.0)
    return SignedMultigraph(W, rel, {"D": DeviationSpec.soft(spec)}, spec)


def _trial_rng(seed: int, trial: int, stream: int = 0) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence([seed, trial, stream]))


def _trial_seed(seed: int, trial: int) -> int:
    return int(np.random.SeedSequence([seed, trial]).generate_state(1)[0])


def trial_graph(cfg: TrialConfig, trial: int) -> SignedMultigraph:
    rng = _trial_rng(cfg.seed, trial)
    n = int(rng.integers(cfg.n_min, cfg.n_max + 1))
    regime = REGIMES[trial % len(REGIMES)]
    return random_sslss(n, cfg.density, cfg.sign_prob, _trial_seed(cfg.seed, trial), regime)


# -- continuous property checks --------------------------------------------------

def check_sslss_trial(g: SignedMultigraph, b0s, rep: AgreementReport, trial=None, sim_tol=1e-6,
                      eig_tol=spectral.UNIT_EIG_TOL):
    """All continuous-model properties for one strongly connected graph in the class."""
    sc = Scenario(g)
    opp = analysis.opposition_bipartition(g)
    rev = analysis.reverse_opposition_bipartition(g)
    per = analysis.period(g)
    verdict = analysis.verdict_from(opp is not None, rev is not None, per)

    A = spectral.affine_representation(g).A
    vals, _ = spectral.eigen_symmetric(A)
    has_one = spectral.has_eigenvalue(vals, 1.0, eig_tol)
    has_minus = spectral.has_eigenvalue(vals, -1.0, eig_tol)
    rho = float(np.max(np.abs(vals)))

    # representation fidelity
    rng = np.random.default_rng(0)
    xs = rng.uniform(-1, 1, (20, g.n))
    err = max(float(np.max(np.abs(step_continuous(g, x) - A @ x))) for x in xs)
    rep.record("affine_representation", err <= 1e-12, trial, f"max error {err:.3e}", sc)

    rep.record("eigenvalue_one_iff_opposition", has_one == (opp is not None), trial,
               f"1 in spectrum: {has_one}, certificate: {opp is not None}", sc)
    rep.record("eigenvalue_minus_one_iff_reverse", has_minus == (rev is not None), trial,
               f"-1 in spectrum: {has_minus}, certificate: {rev is not None}", sc)
    rep.record("radius_below_inf_norm", rho <= np.max(np.abs(A).sum(axis=1)) + 1e-12, trial,
               f"rho {rho}", sc)

    flipped = flip_relations(g, "D")
    rep.record("flip_swaps_certificates",
               (opp is not None) == (analysis.reverse_opposition_bipartition(flipped) is not None), trial,
               "opposition(g) vs reverse(flip(g))", sc)
    if per == 2:
        ok = (opp is None) == (rev is None)
    else:
        ok = not (opp is not None and rev is not None)
    rep.record("period_links_certificates", ok, trial, f"period {per}, opp {opp is not None}, rev {rev is not None}", sc)

    gauge = spectral.gauge_signs(A)
    rep.record("gauge_iff_opposition", (gauge is not None) == (opp is not None), trial,
               f"gauge {gauge is not None}, certificate {opp is not None}", sc)
    if gauge is not None:
        D = np.diag(gauge.astype(float))
        abs_vals, _ = spectral.eigen_symmetric(np.abs(A))
        same = np.max(np.abs(np.sort(vals) - np.sort(abs_vals))) <= eig_tol
        conj = np.max(np.abs(D @ A @ D - np.abs(A))) <= 1e-12
        rep.record("gauge_similarity", bool(same and conj), trial, "spectra of A and |A| differ", sc)

    report = None
    if verdict == analysis.POLARIZES:
        report = spectral.influence_report(g)
        rep.record("influence_uniform", bool(np.max(np.abs(report.s - 1 / g.n)) <= 1e-10), trial,
                   f"s = {report.s.tolist()}", sc)

    for k, b0 in enumerate(b0s):
        sc_b = Scenario(g, np.asarray(b0, dtype=float))
        _, lim = simulate(g, b0)
        # spectral prediction of convergence: no eigenvalue -1
        rep.record("spectral_convergence", lim.converged == (not has_minus), trial,
                   f"b0 #{k}: status {lim.status}, -1 in spectrum {has_minus}", sc_b)
        if verdict == analysis.POLARIZES:
            ok = lim.converged
            detail = lim.status
            if ok:
                signs = opp.signs(g.n)
                a = float(np.mean(signs * lim.limit))
                dev = float(np.max(np.abs(lim.limit - signs * a)))
                pred = float(np.max(np.abs(lim.limit - report.predict(b0))))
                ok = dev <= sim_tol and pred <= sim_tol
                detail = f"split error {dev:.2e}, influence error {pred:.2e}"
            rep.record("polarizes_simulated", ok, trial, f"b0 #{k}: {detail}", sc_b)
        elif verdict == analysis.NEUTRAL_CONSENSUS:
            ok = lim.converged and float(np.max(np.abs(lim.limit))) <= sim_tol
            rep.record("neutral_consensus_simulated", ok, trial, f"b0 #{k}: {lim.status}", sc_b)
        else:
            ok = lim.oscillating and lim.period == 2
            rep.record("diverges_simulated", ok, trial, f"b0 #{k}: {lim.status}, period {lim.period}", sc_b)


def _continuous_chunk(args) -> AgreementReport:
    cfg, trials = args
    rep = AgreementReport(cfg.to_json())
    for t in trials:
        g = trial_graph(cfg, t)
        b0s = _trial_rng(cfg.seed, t, 1).uniform(-1, 1, (cfg.b0_samples, g.n))
        check_sslss_trial(g, b0s, rep, t, cfg.sim_tol, cfg.eig_tol)
        best_response_continuous(g, _trial_rng(cfg.seed, t, 2).uniform(-1, 1, g.n), rep, t)
    return rep


def influence_suite(graphs: int = 100, seed: int = 0, n_max: int = 8, tol: float = 1e-6) -> AgreementReport:
    """Simulated polarized limits against sum_j g_j b0_j / n on random aperiodic opposition bipartite graphs."""
    rep = AgreementReport({"graphs": graphs, "seed": seed, "n_max": n_max, "tol": tol})
    for t in range(graphs):
        for attempt in range(MAX_RESAMPLE):
            rng = _trial_rng(seed, t, 5 + attempt)
            n = int(rng.integers(2, n_max + 1))
            g = random_sslss(n, 0.5, 0.5, rng, "bipartite")
            if analysis.period(g) == 1:
                break
        cert = analysis.opposition_bipartition(g)
        signs = cert.signs(g.n)
        b0 = rng.uniform(-1, 1, g.n)
        _, lim = simulate(g, b0)
        a = float(np.sum(signs * b0)) / g.n
        err = float(np.max(np.abs(lim.limit - signs * a))) if lim.converged else np.inf
        rep.record("influence_formula", err <= tol, t, f"{lim.status}, error {err:.3e}", Scenario(g, b0))
    return rep


# -- best responses ----------------------------------------------------------------

def best_response_continuous(g: SignedMultigraph, b, rep: AgreementReport, trial=None, tol=1e-10):
    """step must equal the vertex of each agent's quadratic utility (fitted from three evaluations)."""
    b = np.asarray(b, dtype=float)
    nxt = step_continuous(g, b)
    worst = 0.0
    for i in range(g.n):
        u = []
        for x in (-1.0, 0.0, 1.0):
            bb = b.copy()
            bb[i] = x
            u.append(utility_continuous(g, bb, i))
        a2 = (u[0] + u[2]) / 2 - u[1]
        a1 = (u[2] - u[0]) / 2
        x_star = -a1 / (2 * a2)
        worst = max(worst, abs(x_star - nxt[i]))
    rep.record("best_response_continuous", worst <= tol, trial, f"max gap {worst:.3e}", Scenario(g, b))


def best_response_discrete(g: SignedMultigraph, b, rep: AgreementReport, trial=None):
    """step must pick a label that maximises each agent's utility (exhaustive scan)."""
    b = np.asarray(b, dtype=np.int64)
    nxt = step_discrete(g, b)
    ok = True
    for i in range(g.n):
        utils = []
        for s in range(g.spectrum.size):
            bb = b.copy()
            bb[i] = s
            utils.append(utility_discrete(g, bb, i))
        bb = b.copy()
        bb[i] = nxt[i]
        ok &= utility_discrete(g, bb, i) >= max(utils) - 1e-12
    rep.record("best_response_discrete", bool(ok), trial, "", Scenario(g, b))


def random_signed_graph(n: int, spectrum, rng: np.random.Generator, per_agent: bool = True,
                        grid: int | None = None) -> SignedMultigraph:
    """Random W_ii = 0 row-stochastic graph with assorted deviation kinds.

    With ``grid`` the weights are multiples of 1/grid, which makes majority ties common.
    """
    W = np.zeros((n, n))
    for i in range(n):
        others = [j for j in range(n) if j != i]
        if grid:
            counts = rng.multinomial(grid, np.ones(len(others)) / len(others))
            W[i, others] = counts / grid
        else:
            W[i, others] = rng.dirichlet(np.ones(len(others)))
    specs = _spec_pool(spectrum, rng)
    ids = list(specs)
    rel = []
    for i in range(n):
        own = ids[rng.integers(len(ids))]
        row = []
        for j in range(n):
            if rng.random() < 0.5:
                row.append(FOLLOW)
            else:
                row.append(own if per_agent else ids[rng.integers(len(ids))])
        rel.append(row)
    return SignedMultigraph(W, rel, specs, spectrum)


def _spec_pool(spectrum, rng) -> dict[str, DeviationSpec]:
    if spectrum.discrete:
        K = spectrum.size
        pool = {"soft": DeviationSpec.soft(spectrum), "hard": DeviationSpec.hard(spectrum),
                "const": DeviationSpec.constant(spectrum, int(rng.integers(K)))}
        while True:
            tab = tuple(int(v) for v in rng.integers(0, K, K))
            if tab != tuple(range(K)):
                break
        pool["table"] = DeviationSpec("table", spectrum, table=tab)
        return pool
    return {"soft": DeviationSpec.soft(spectrum), "hard": DeviationSpec.hard(spectrum),
            "affine": DeviationSpec.affine(spectrum, float(rng.uniform(-1, 1)), 0.0),
            "const": DeviationSpec.constant(spectrum, float(rng.uniform(-1, 1))),
            "power": DeviationSpec.signed_power(spectrum, float(rng.uniform(0.3, 3.0)))}


def best_response_suite(instances: int = 200, seed: int = 0) -> AgreementReport:
    """Both update rules against per-agent utility maximisation on random W_ii = 0 graphs."""
    rep = AgreementReport({"instances": instances, "seed": seed})
    interval = Interval(-1.0, 1.0)
    for t in range(instances):
        rng = _trial_rng(seed, t, 3)
        n = int(rng.integers(2, 7))
        g = random_signed_graph(n, interval, rng, per_agent=False)
        best_response_continuous(g, rng.uniform(-1, 1, n), rep, t)
        K = int(rng.integers(2, 6))
        gd = random_signed_graph(n, DiscreteOrdered(tuple(f"s{k}" for k in range(K))), rng,
                                 per_agent=False, grid=int(rng.choice([2, 4, 6])))
        best_response_discrete(gd, rng.integers(0, K, n), rep, t)
    return rep


# -- discrete limits ------------------------------------------------------------------

def lim_fix_suite(configs: int = 50, seed: int = 0) -> AgreementReport:
    """Every simulated majority-rule limit is a brute-force fixed point and every consensus
    limit is admissible, exhaustively over initial vectors on small graphs."""
    rep = AgreementReport({"configs": configs, "seed": seed})
    for t in range(configs):
        rng = _trial_rng(seed, t, 4)
        n = int(rng.integers(2, 4))
        K = int(rng.integers(2, 4))
        spectrum = DiscreteOrdered(tuple(f"s{k}" for k in range(K)))
        g = random_signed_graph(n, spectrum, rng, per_agent=True, grid=int(rng.choice([2, 4, 6])))
        fixed = set(brute_force_fixed_points(g))
        char = consensus_fixed_points(g, "discrete")
        for b0 in np.ndindex(*([K] * n)):
            _, lim = simulate(g, np.array(b0), "discrete")
            sc = Scenario(g, np.array(b0))
            if not lim.converged:
                rep.record("limit_status_decided", not lim.status == "undetermined", t, lim.status, sc)
                continue
            key = tuple(int(v) for v in lim.limit)
            rep.record("limit_is_fixed_point", key in fixed, t, f"limit {key}", sc)
            if len(set(key)) == 1:
                rep.record("consensus_limit_admissible", char.admits(key[0]), t, f"consensus on {key[0]}", sc)
    return rep


# -- driver ------------------------------------------------------------------------------

def run_trials(cfg: TrialConfig) -> AgreementReport:
    """Run the property suite for ``cfg.rule``; identical configs give identical reports."""
    rep = AgreementReport(cfg.to_json())
    if cfg.trials == 0:
        return rep
    if cfg.rule == "discrete":
        rep.merge(lim_fix_suite(cfg.trials, cfg.seed))
        rep.merge(best_response_suite(cfg.trials, cfg.seed))
        return rep
    trials = list(range(cfg.trials))
    if cfg.workers > 1:
        chunks = [trials[k::cfg.workers] for k in range(cfg.workers)]
        with ProcessPoolExecutor(cfg.workers) as ex:
            parts = list(ex.map(_continuous_chunk, [(cfg, c) for c in chunks]))
        for part in parts:
            rep.merge(part)
    else:
        rep.merge(_continuous_chunk((cfg, trials)))
    # trial order, so the report does not depend on the worker count
    rep.counterexamples.sort(key=lambda c: (c["trial"], c["property"]))
    return rep
