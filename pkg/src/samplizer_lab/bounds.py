"""Hard instances and numeric verifiers for the inequalities behind the lower bounds.

Every verifier returns a :class:`VerifierReport` whose ``min_margin`` is the
smallest value of ``rhs - lhs`` seen, together with the point where it occurred,
so a failure can be reproduced from the report alone.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import itertools

import numpy as np
from scipy.special import gammaln

from .qcore import DensityMatrix, DimensionError, fidelity, max_dim, renyi_entropy, renyi_moment, trace_norm, \
    von_neumann_entropy

MARGIN_TOL = 1e-10


@dataclass
class VerifierReport:
    name: str
    min_margin: float
    argmin: dict
    n_checked: int
    tol: float = MARGIN_TOL
    extra: dict = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return self.min_margin >= -self.tol

    def to_dict(self) -> dict:
        return {"name": self.name, "min_margin": self.min_margin, "argmin": self.argmin,
                "n_checked": self.n_checked, "pass": self.passed, "extra": self.extra}


class _Tracker:
    def __init__(self, name: str):
        self.name, self.best, self.where, self.n = name, math.inf, {}, 0

    def add(self, margin: float, **where):
        self.n += 1
        if margin < self.best:
            self.best, self.where = float(margin), where

    def report(self, **extra) -> VerifierReport:
        return VerifierReport(self.name, self.best, self.where, self.n, extra=extra)


# ---------------------------------------------------------------------------
# Instances
# ---------------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class HardInstancePair:
    rho0: DensityMatrix
    rho1: DensityMatrix
    description: str
    analytic_gap: float


def make_mixedness_instance(n: int, eps: float, z: float) -> DensityMatrix:
    """Diagonal state at trace distance ``eps`` from ``I/n``.

    ``|S| = z n`` eigenvalues are raised to ``1/n + eps/|S|`` and the remaining
    ``|T|`` lowered to ``1/n - eps/|T|``.
    """
    if eps == 0:
        return DensityMatrix.maximally_mixed(n)
    if not 0 < eps < 1:
        raise ValueError("eps must lie in [0, 1)")
    s = round(z * n)
    if abs(s - z * n) > 1e-9 or not 1 <= s <= n - 1:
        raise ValueError("z * n must be an integer in [1, n - 1]")
    if not eps / (n - 1) - 1e-12 <= z <= 1 - eps + 1e-12:
        raise ValueError(f"z = {z} outside the valid range [{eps / (n - 1)}, {1 - eps}]")
    t = n - s
    spectrum = np.concatenate([np.full(s, 1 / n + eps / s), np.full(t, max(1 / n - eps / t, 0.0))])
    return DensityMatrix(np.diag(spectrum), rank_hint=int(np.count_nonzero(spectrum > 0)))


def mixedness_pair(n: int, eps: float, z: float) -> HardInstancePair:
    rho = make_mixedness_instance(n, eps, z)
    return HardInstancePair(DensityMatrix.maximally_mixed(n), rho, f"I/{n} vs eps={eps}-far state (z={z})", eps)


def renyi_lt1_pair(n: int, alpha: float, eps: float) -> tuple[HardInstancePair, float]:
    """``diag(1-d, d/(n-1), ...)`` vs ``|0><0|`` with ``d = (2 eps / (n-1)^(1-alpha))^(1/alpha)``.

    Returns the pair (gap = ``S_alpha`` of the mixed member, in closed form) and ``d``.
    """
    if not 0 < alpha < 1:
        raise ValueError("alpha must lie in (0, 1)")
    if n <= 2 * eps ** (1 - alpha) + 1:
        raise ValueError("n must exceed 2 eps^(1-alpha) + 1")
    d = (2 * eps / (n - 1) ** (1 - alpha)) ** (1 / alpha)
    rho = DensityMatrix(np.diag([1 - d] + [d / (n - 1)] * (n - 1)))
    sigma = DensityMatrix(np.diag([1.0] + [0.0] * (n - 1)))
    gap = math.log((1 - d) ** alpha + d ** alpha * (n - 1) ** (1 - alpha)) / (1 - alpha)
    return HardInstancePair(rho, sigma, f"rank-deficient pair n={n} alpha={alpha} eps={eps}", gap), d


# ---------------------------------------------------------------------------
# Scalar inequalities
# ---------------------------------------------------------------------------

def log_eq_lhs(eps: float, z: float) -> float:
    """``(z+eps) ln(1+eps/z) + (1-z-eps) ln(1-eps/(1-z))`` with ``0 ln 0 = 0``."""
    a = (z + eps) * math.log1p(eps / z)
    w = 1 - z - eps
    b = 0.0 if w <= 0 else w * math.log1p(-eps / (1 - z))
    return a + b


def verify_log_eq(n_eps: int = 100, n_z: int = 100) -> VerifierReport:
    """The two-point relative-entropy lower bound ``>= eps^2`` on an ``n_eps x n_z`` grid."""
    tr = _Tracker("log-relative-entropy")
    for eps in np.linspace(0, 0.5, n_eps + 2)[1:-1]:
        for frac in np.linspace(0, 1, n_z + 1)[1:]:
            z = frac * (1 - eps)
            tr.add(log_eq_lhs(eps, z) - eps ** 2, eps=float(eps), z=float(z))
    return tr.report()


def renyi_lt1_rhs(p: np.ndarray, alpha: float) -> float:
    n = len(p)
    eps = 0.5 * float(np.sum(np.abs(p - 1 / n)))
    return (1 - alpha * (1 - alpha) * eps ** 2) * n ** (1 - alpha)


def verify_renyi_lt1_ineq(distributions: Iterable[np.ndarray], alpha: float) -> VerifierReport:
    """``sum p^alpha <= (1 - alpha(1-alpha) eps^2) n^(1-alpha)`` where ``sum |p - 1/n| = 2 eps``."""
    tr = _Tracker("renyi-lt1-deficit")
    for i, p in enumerate(distributions):
        p = np.asarray(p, dtype=float)
        tr.add(renyi_lt1_rhs(p, alpha) - float(np.sum(p ** alpha)), index=i, alpha=alpha, n=len(p))
    return tr.report()


def perturbed_uniform(n: int, rng: np.random.Generator) -> np.ndarray:
    """Uniform distribution moved a random fraction of the way toward a random distribution."""
    q = rng.dirichlet(np.ones(n) * rng.uniform(0.2, 3))
    t = rng.uniform()
    return (1 - t) / n + t * q


def verify_p_alpha_beta(distributions: Iterable[np.ndarray], pairs: Sequence[tuple[float, float]]) -> VerifierReport:
    """``(sum p^b)^(a/b) <= sum p^a <= n^(1-a/b) (sum p^b)^(a/b)`` for ``0 < a < b``."""
    tr = _Tracker("power-sum-sandwich")
    for i, p in enumerate(distributions):
        p = np.asarray(p, dtype=float)
        p = p[p > 0]
        n = len(p)
        for a, b in pairs:
            if not 0 < a < b:
                raise ValueError("pairs need 0 < a < b")
            pa = float(np.sum(p ** a))
            pb = float(np.sum(p ** b)) ** (a / b)
            tr.add(min(pa - pb, n ** (1 - a / b) * pb - pa) / max(pa, 1e-300), index=i, a=a, b=b)
    return tr.report()


# ---------------------------------------------------------------------------
# State inequalities
# ---------------------------------------------------------------------------

def verify_alpha_ordering(states: Sequence[DensityMatrix], alphas: Sequence[float]) -> VerifierReport:
    """``S_alpha <= S`` for alpha > 1 and ``S_alpha`` non-increasing in alpha."""
    tr = _Tracker("renyi-ordering")
    alphas = sorted(alphas)
    for i, rho in enumerate(states):
        s = von_neumann_entropy(rho)
        vals = [renyi_entropy(rho, a) for a in alphas]
        for a, v in zip(alphas, vals):
            if a > 1:
                tr.add(s - v, index=i, alpha=a, kind="below-von-neumann")
        for (a, v), (b, w) in zip(zip(alphas, vals), zip(alphas[1:], vals[1:])):
            tr.add(v - w, index=i, alpha=a, beta=b, kind="monotone")
    return tr.report()


def verify_moment_range(states: Sequence[DensityMatrix], alphas: Sequence[float]) -> VerifierReport:
    """``r^(1-alpha) <= P_alpha <= 1`` (alpha > 1) and ``1 <= P_alpha <= r^(1-alpha)`` (alpha < 1)."""
    tr = _Tracker("moment-range")
    for i, rho in enumerate(states):
        r = rho.rank
        for a in alphas:
            p = renyi_moment(rho, a)
            lo, hi = (r ** (1 - a), 1.0) if a > 1 else (1.0, r ** (1 - a))
            tr.add(min(p - lo, hi - p), index=i, alpha=a, rank=r)
    return tr.report()


def verify_mixedness_entropy(instances: Iterable[tuple[int, float, float]]) -> VerifierReport:
    """``S(rho) <= ln n - eps^2`` and trace distance ``eps`` for mixedness instances."""
    tr = _Tracker("mixedness-entropy")
    worst_td = 0.0
    for n, eps, z in instances:
        rho = make_mixedness_instance(n, eps, z)
        worst_td = max(worst_td, abs(0.5 * trace_norm(rho.data - np.eye(n) / n) - eps))
        tr.add(math.log(n) - eps ** 2 - von_neumann_entropy(rho), n=n, eps=eps, z=z)
    return tr.report(max_trace_distance_error=worst_td)


# ---------------------------------------------------------------------------
# Two-state discrimination
# ---------------------------------------------------------------------------

@dataclass
class HelstromReport:
    copies: int
    trials: int
    empirical_success: float
    optimal_success: float
    helstrom_bound: float
    fidelity_bound: float
    half_trace_distance: float
    slack: float

    @property
    def passed(self) -> bool:
        return (self.empirical_success <= self.helstrom_bound + self.slack
                and self.half_trace_distance <= self.fidelity_bound + 1e-12)

    @property
    def margin(self) -> float:
        return min(self.helstrom_bound + self.slack - self.empirical_success,
                   self.fidelity_bound - self.half_trace_distance)

    def to_dict(self) -> dict:
        d = dict(self.__dict__)
        d["pass"] = self.passed
        return d


def _is_diag(m: np.ndarray) -> bool:
    return bool(np.allclose(m, np.diag(np.diag(m)), atol=1e-14))


def _tensor_power_diag(p: np.ndarray, copies: int) -> np.ndarray:
    out = np.ones(1)
    for _ in range(copies):
        out = np.kron(out, p)
    return out


def _compositions(total: int, parts: int):
    """All non-negative integer vectors of length ``parts`` summing to ``total``."""
    for cuts in itertools.combinations(range(total + parts - 1), parts - 1):
        prev, out = -1, []
        for c in cuts:
            out.append(c - prev - 1)
            prev = c
        out.append(total + parts - 2 - prev)
        yield out


def product_half_trace_distance(p: np.ndarray, q: np.ndarray, copies: int, max_terms: int = 10 ** 6) -> float:
    """``TV(p^copies, q^copies)`` for distributions on the same alphabet.

    Outcomes sharing the same ``(p_i, q_i)`` pair are merged into classes; the
    likelihood ratio of a sequence depends only on its class counts, so the
    distance is a sum over multinomial count vectors.  Falls back to the
    explicit product distribution when there are too many count vectors.
    """
    p, q = np.asarray(p, float), np.asarray(q, float)
    keys = {}
    for a, b in zip(p, q):
        k = (round(float(a), 15), round(float(b), 15))
        keys[k] = keys.get(k, 0) + 1
    cls = [(a * m, b * m) for (a, b), m in keys.items() if a > 0 or b > 0]
    k = len(cls)
    if math.comb(copies + k - 1, k - 1) <= max_terms:
        with np.errstate(divide="ignore"):
            la = np.log([c[0] for c in cls])
            lb = np.log([c[1] for c in cls])
        total = 0.0
        lf = gammaln(copies + 1)
        for counts in _compositions(copies, k):
            c = np.asarray(counts)
            coef = lf - float(np.sum(gammaln(c + 1)))
            xa = coef + float(c @ np.where(c > 0, la, 0.0))
            xb = coef + float(c @ np.where(c > 0, lb, 0.0))
            total += abs(math.exp(xa) - math.exp(xb))
        return 0.5 * total
    if p.size ** copies <= 2 ** 22:
        return 0.5 * float(np.sum(np.abs(_tensor_power_diag(p, copies) - _tensor_power_diag(q, copies))))
    return float("nan")


def helstrom_bound_check(rho0: DensityMatrix, rho1: DensityMatrix, copies: int, trials: int = 20000,
                         seed: int = 0) -> HelstromReport:
    """Simulate the optimal measurement on ``copies`` copies and compare with the analytic bounds.

    Diagonal pairs are handled as product distributions (likelihood-ratio test);
    general pairs use the dense projector onto the positive part of the
    difference, with ``dim^copies`` capped by the configured maximum dimension.
    """
    if rho0.dim != rho1.dim:
        raise DimensionError("states have different dimensions")
    rng = np.random.default_rng(seed)
    bits = rng.integers(0, 2, size=trials)
    if _is_diag(rho0.data) and _is_diag(rho1.data):
        p = [np.clip(np.real(np.diag(r.data)), 0, None) for r in (rho0, rho1)]
        half_td = product_half_trace_distance(p[0], p[1], copies)
        with np.errstate(divide="ignore"):
            logs = [np.log(q) for q in p]
        hits = 0
        for b in (0, 1):
            n_b = int(np.sum(bits == b))
            if n_b == 0:
                continue
            x = rng.choice(rho0.dim, size=(n_b, copies), p=p[b] / p[b].sum())
            l0 = logs[0][x].sum(axis=1)
            l1 = logs[1][x].sum(axis=1)
            guess = np.where(l0 >= l1, 0, 1)
            hits += int(np.sum(guess == b))
        optimal = 0.5 * (1 + half_td)
    else:
        dim = rho0.dim ** copies
        if dim > max_dim():
            raise DimensionError(f"{copies} copies exceed the dimension cap")
        a, b_ = rho0.data, rho1.data
        ra, rb = np.ones((1, 1)), np.ones((1, 1))
        for _ in range(copies):
            ra, rb = np.kron(ra, a), np.kron(rb, b_)
        w, v = np.linalg.eigh((ra - rb + (ra - rb).conj().T) / 2)
        half_td = 0.5 * float(np.sum(np.abs(w)))
        proj = (v[:, w > 0]) @ v[:, w > 0].conj().T
        p_correct = [float(np.real(np.trace(proj @ ra))), float(np.real(np.trace((np.eye(dim) - proj) @ rb)))]
        hits = sum(int(rng.binomial(int(np.sum(bits == b)), min(max(p_correct[b], 0), 1))) for b in (0, 1))
        optimal = 0.5 * (p_correct[0] + p_correct[1])
    emp = hits / trials
    f = fidelity(rho0, rho1)
    sigma = math.sqrt(max(optimal * (1 - optimal), 1e-12) / trials)
    return HelstromReport(copies, trials, emp, optimal, 0.5 * (1 + half_td),
                          math.sqrt(max(0.0, 1 - f ** (2 * copies))), half_td, 3 * sigma)
