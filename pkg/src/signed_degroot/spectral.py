"""Affine form of the update, eigen-analysis, gauge transform and influence weights."""
from __future__ import annotations

from collections import deque
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .graph import SignedMultigraph

JACOBI_TOL = 1e-12
JACOBI_MAX_SWEEPS = 100
SYM_TOL = 1e-12
POWER_MAX_ITER = 10_000
POWER_TOL = 1e-12
POWER_SEED = 12345
UNIT_EIG_TOL = 1e-8


class RepresentationUnavailable(ValueError):
    """Some deviation in use is not affine."""


class RegimeError(ValueError):
    """The influence formula's preconditions fail; ``condition`` names which one."""

    def __init__(self, condition: str, message: str):
        super().__init__(message)
        self.condition = condition


@dataclass(frozen=True)
class AffineRep:
    A: np.ndarray
    d: np.ndarray

    def __call__(self, x):
        return self.A @ np.asarray(x, dtype=float) + self.d


def affine_representation(g: SignedMultigraph) -> AffineRep:
    """(A, d) with (W.F)(x) = A x + d; deviate edges with D(x) = a x + b give A_ij = a W_ij, d_i += b W_ij."""
    W = g.weights
    A = np.where(g.deviate_mask, 0.0, W)
    d = np.zeros(g.n)
    for sid, mask in g.spec_masks().items():
        if not np.any(W[mask]):
            continue
        spec = g.deviations[sid]
        params = spec.affine_params()
        if params is None:
            raise RepresentationUnavailable(f"deviation {sid!r} ({spec.kind}) is not affine")
        a, b = params
        Wd = np.where(mask, W, 0.0)
        A = A + a * Wd
        d = d + b * Wd.sum(axis=1)
    return AffineRep(A, d)


def eigen_symmetric(A) -> tuple[np.ndarray, np.ndarray]:
    """Eigenvalues (ascending) and orthonormal eigenvectors (columns) by cyclic Jacobi rotations."""
    A = np.array(A, dtype=float)
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise ValueError("matrix must be square")
    if np.max(np.abs(A - A.T), initial=0.0) > SYM_TOL:
        raise ValueError("matrix is not symmetric")
    n = A.shape[0]
    A = (A + A.T) / 2
    Q = np.eye(n)

    def off(M):
        return np.sqrt(2 * np.sum(np.triu(M, 1) ** 2))

    for _ in range(JACOBI_MAX_SWEEPS):
        if off(A) < JACOBI_TOL:
            break
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = A[p, q]
                if abs(apq) < 1e-300:
                    continue
                theta = (A[q, q] - A[p, p]) / (2 * apq)
                t = np.sign(theta) / (abs(theta) + np.hypot(1.0, theta)) if theta != 0 else 1.0
                c = 1 / np.hypot(1.0, t)
                s = t * c
                # A <- J^T A J with J the (p, q) plane rotation
                ap, aq = A[:, p].copy(), A[:, q].copy()
                A[:, p] = c * ap - s * aq
                A[:, q] = s * ap + c * aq
                ap, aq = A[p, :].copy(), A[q, :].copy()
                A[p, :] = c * ap - s * aq
                A[q, :] = s * ap + c * aq
                A[p, q] = A[q, p] = 0.0
                qp, qq = Q[:, p].copy(), Q[:, q].copy()
                Q[:, p] = c * qp - s * qq
                Q[:, q] = s * qp + c * qq
    else:
        raise RuntimeError("Jacobi iteration did not converge")
    vals = np.diag(A).copy()
    order = np.argsort(vals, kind="stable")
    return vals[order], Q[:, order]


class SpectralRadius(NamedTuple):
    value: float
    method: str  # "jacobi" (exact up to rounding) or "power_estimate"

    @property
    def is_estimate(self) -> bool:
        return self.method != "jacobi"


def _power_radius(A: np.ndarray, seed: int = POWER_SEED) -> float:
    """Dominant modulus from a power iteration that also fits a 2-term recurrence.

    A real dominant eigenvalue shows up as y1 ~ lam y0; a complex (or +-)
    pair shows up as y2 = c1 y1 + c0 y0, whose characteristic roots carry
    the modulus.
    """
    n = A.shape[0]
    rng = np.random.default_rng(seed)
    y = rng.standard_normal(n)
    y /= np.linalg.norm(y)
    est = None
    stable = 0
    for _ in range(POWER_MAX_ITER):
        y1 = A @ y
        n1 = np.linalg.norm(y1)
        if n1 == 0:
            return 0.0
        y2 = A @ y1
        lam = y @ y1
        if np.linalg.norm(y1 - lam * y) <= POWER_TOL * max(n1, 1.0):
            new = abs(lam)
        else:
            K = np.column_stack([y1, y])
            coef, *_ = np.linalg.lstsq(K, y2, rcond=None)
            roots = np.roots([1.0, -coef[0], -coef[1]])
            new = float(np.max(np.abs(roots)))
            resid = np.linalg.norm(K @ coef - y2)
            if resid <= POWER_TOL * max(np.linalg.norm(y2), 1.0):
                return new
        if est is not None and abs(new - est) <= POWER_TOL * max(new, 1.0):
            stable += 1
            if stable >= 3:
                return new
        else:
            stable = 0
        est = new
        y = y1 / n1
    return float(est)


def spectral_radius(A) -> SpectralRadius:
    A = np.asarray(A, dtype=float)
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise ValueError("matrix must be square")
    if np.max(np.abs(A - A.T), initial=0.0) <= SYM_TOL:
        vals, _ = eigen_symmetric(A)
        return SpectralRadius(float(np.max(np.abs(vals), initial=0.0)), "jacobi")
    return SpectralRadius(_power_radius(A), "power_estimate")


def has_eigenvalue(vals, target: float, tol: float = UNIT_EIG_TOL) -> bool:
    return bool(np.any(np.abs(np.asarray(vals) - target) <= tol))


@dataclass(frozen=True)
class GaugeMatrix:
    signs: np.ndarray

    @property
    def matrix(self) -> np.ndarray:
        return np.diag(self.signs.astype(float))


def gauge_signs(A, tol: float = 1e-12) -> np.ndarray | None:
    """+-1 vector with s_i s_j A_ij >= 0 everywhere, or None if the sign pattern is unbalanced."""
    A = np.asarray(A, dtype=float)
    n = A.shape[0]
    support = (np.abs(A) > tol) | (np.abs(A.T) > tol)
    signs = np.zeros(n, dtype=int)
    for root in range(n):
        if signs[root]:
            continue
        signs[root] = 1
        queue = deque([root])
        while queue:
            u = queue.popleft()
            for v in np.flatnonzero(support[u]):
                val = A[u, v] if abs(A[u, v]) > tol else A[v, u]
                want = signs[u] * (1 if val > 0 else -1)
                if signs[v] == 0:
                    signs[v] = want
                    queue.append(int(v))
                elif signs[v] != want:
                    return None
    D = signs[:, None] * signs[None, :]
    if np.any(D * A < -tol):
        return None
    return signs


def gauge_matrix(g: SignedMultigraph) -> GaugeMatrix | None:
    """Delta with Delta A Delta = |A|, read off the sign pattern of A."""
    signs = gauge_signs(affine_representation(g).A)
    return None if signs is None else GaugeMatrix(signs)


def stationary_left(M, seed: int = POWER_SEED) -> np.ndarray:
    """Left unit eigenvector s of a nonnegative row-stochastic M with s.sum() == 1 (power iteration)."""
    M = np.asarray(M, dtype=float)
    n = M.shape[0]
    rng = np.random.default_rng(seed)
    s = rng.random(n) + 0.5
    s /= s.sum()
    for _ in range(POWER_MAX_ITER):
        nxt = s @ M
        nxt /= nxt.sum()
        if np.max(np.abs(nxt - s)) < POWER_TOL:
            return nxt
        s = nxt
    # periodic chains only oscillate around s; the Cesaro average of two steps settles
    return (s + (s @ M) / (s @ M).sum()) / 2


@dataclass
class InfluenceReport:
    s: np.ndarray
    g_signs: np.ndarray

    def value(self, b0) -> float:
        """a = sum_j g_j s_j b0_j; the other pole is -a."""
        return float(np.sum(self.g_signs * self.s * np.asarray(b0, dtype=float)))

    def predict(self, b0) -> np.ndarray:
        return self.g_signs * self.value(b0)

    def to_json(self, b0=None) -> dict:
        out = {"schema_version": 1, "regime": "polarizes", "s": self.s.tolist(),
               "g_signs": [int(v) for v in self.g_signs]}
        if b0 is not None:
            a = self.value(b0)
            out["example_prediction"] = {"b0": [float(v) for v in b0], "a": a, "b": -a,
                                         "limit": self.predict(b0).tolist()}
        return out


def influence_report(g: SignedMultigraph) -> InfluenceReport:
    from .analysis import is_strongly_connected, opposition_bipartition, period, reverse_opposition_bipartition
    from .graph import is_sslss

    check = is_sslss(g)
    if not check:
        raise RegimeError("not_sslss", "graph is outside the simple soft symmetric class: " + "; ".join(check.reasons))
    if not is_strongly_connected(g):
        raise RegimeError("not_strongly_connected", "graph is not strongly connected")
    if reverse_opposition_bipartition(g) is not None:
        raise RegimeError("reverse_opposition_bipartite", "reverse opposition bipartite: influence undefined, opinions diverge")
    cert = opposition_bipartition(g)
    if cert is None:
        raise RegimeError("not_opposition_bipartite", "neither bipartite kind: all powers vanish, neutral consensus")
    if period(g) != 1:
        raise RegimeError("periodic", "periodic graph: no polarization limit")
    A = affine_representation(g).A
    s = stationary_left(np.abs(A))
    return InfluenceReport(s, cert.signs(g.n))
