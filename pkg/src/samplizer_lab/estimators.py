"""Entropy estimators driven by block-encoded access to a state.

Every estimator has two evaluation submodes:

* ``exact`` - the acceptance probability of the measured circuit is computed
  analytically and used in place of its empirical mean (no shot noise);
* ``sampled`` - shot outcomes are drawn with :func:`binomial_fast_path`, which is
  distributed exactly like ``k`` independent circuit runs.

and two access modes: ``ideal`` uses the pinned unitary block-encoding of
``rho / 2``; ``faithful`` replaces it by the coherent part of the sample-based
construction in :mod:`samplizer_lab.samplizer` and reports the decoherent part as
an explicit slack on the acceptance probability.

Randomness: batch ``j`` of recursion level ``l`` draws from the Philox substream
``SeedSequence(seed, spawn_key=(l, j))``, so results do not depend on
evaluation order.
"""
from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field
from functools import lru_cache
import numpy as np

from . import polyapprox
from .polyapprox import CertifiedPolynomial
from .qcore import (BlockEncoding, DensityMatrix, UnitaryMatrix, dagger, num_qubits, renyi_moment, swap_operator,
                    von_neumann_entropy)
from .qet import eigen_transform, hadamard_probability
from .samplizer import ORACLE_ANCILLAS, faithful_parts, nominal_unitary

#: degree cap for estimator polynomials; the parameter formulas call for very
#: high degrees when eps is small, and the Chebyshev machinery handles ~1e7.
ESTIMATOR_MAX_DEGREE = 2 ** 26
RECURSION_DEPTH_CAP = 200
MODES = ("ideal-exact", "ideal-sampled", "faithful-exact", "faithful-sampled")


class ParameterError(ValueError):
    """Inputs fall outside the range where the parameter formulas are valid."""


# ---------------------------------------------------------------------------
# Randomness
# ---------------------------------------------------------------------------

def substream(seed: int, *key: int) -> np.random.Generator:
    """Independent counter-based stream for ``key`` under the 64-bit ``seed``."""
    return np.random.Generator(np.random.Philox(np.random.SeedSequence(int(seed), spawn_key=tuple(key))))


def binomial_fast_path(p: float, k: int, seed) -> int:
    """Number of successes in ``k`` Bernoulli(``p``) shots, as a single draw."""
    if not 0 <= p <= 1:
        raise ValueError("p must lie in [0, 1]")
    if k < 1:
        raise ValueError("k must be >= 1")
    rng = seed if isinstance(seed, np.random.Generator) else substream(seed)
    return int(rng.binomial(k, p))


def median_of_batches(p: float, k: int, m: int, seed: int, level: int, transform) -> tuple[float, list[float]]:
    """Median over ``m`` batches of ``transform(successes / k)``."""
    vals = [transform(binomial_fast_path(p, k, substream(seed, level, j)) / k) for j in range(m)]
    return float(np.median(vals)), vals


@dataclass(frozen=True)
class Mode:
    access: str
    evaluation: str

    @classmethod
    def parse(cls, mode: "str | Mode") -> "Mode":
        if isinstance(mode, Mode):
            return mode
        if mode not in MODES:
            raise ParameterError(f"mode must be one of {MODES}")
        a, e = mode.split("-")
        return cls(a, e)

    def __str__(self):
        return f"{self.access}-{self.evaluation}"


def effective_rank(rho: DensityMatrix) -> int:
    """``rank_hint`` when given, else the dimension (a safe upper bound)."""
    return rho.rank_hint if rho.rank_hint is not None else rho.dim


# ---------------------------------------------------------------------------
# Parameters
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class VonNeumannParams:
    eps: float
    fail_prob: float
    rank: int
    delta_p: float = field(init=False)
    eps_p: float = field(init=False)
    delta_q: float = field(init=False)
    delta_a: float = field(init=False)
    eps_h: float = field(init=False)
    k: int = field(init=False)

    def __post_init__(self):
        eps, r = self.eps, self.rank
        if not 0 < eps < 1:
            raise ParameterError("eps must lie in (0, 1)")
        if not 0 < self.fail_prob < 1:
            raise ParameterError("fail_prob must lie in (0, 1)")
        if r < 1:
            raise ParameterError("rank must be >= 1")
        dp = eps / (128 * r * math.log(32 * r / eps))
        if not 0 < dp <= 1 / 3:
            raise ParameterError(f"delta_p = {dp} outside (0, 1/3]")
        lg = math.log(2 / dp)
        set_ = object.__setattr__
        set_(self, "delta_p", dp)
        set_(self, "eps_p", eps / (32 * lg))
        set_(self, "delta_q", eps / (32 * r * lg))
        set_(self, "delta_a", eps / (64 * lg))
        set_(self, "eps_h", self.delta_a)
        set_(self, "k", math.ceil(math.log(2 / self.fail_prob) / (2 * self.eps_h ** 2)))

    @property
    def log_factor(self) -> float:
        return math.log(2 / self.delta_p)

    def acceptance_bound(self) -> float:
        """Bias bound of the exact acceptance probability."""
        r = self.rank
        return 4 * (2 * r * self.delta_p + self.eps_p + r * self.delta_q) * self.log_factor

    def composite_bound(self) -> float:
        """Bias + faithful-access + Hoeffding allowances; at most ``eps`` by construction."""
        r = self.rank
        return 4 * (2 * r * self.delta_p + self.eps_p + r * self.delta_q + 2 * self.delta_a + 2 * self.eps_h) \
            * self.log_factor

    def to_dict(self) -> dict:
        return asdict(self)


@dataclass(frozen=True)
class RenyiParams:
    alpha: float
    eps: float
    fail_prob: float
    rank: int
    promise_p: float
    branch: str = field(init=False)
    beta: float | None = field(init=False)
    m: int = field(init=False)
    delta_p: float = field(init=False)
    eps_p: float = field(init=False)
    delta_q: float = field(init=False)
    delta_a: float = field(init=False)
    k: int = field(init=False)
    scale: float = field(init=False)  # (4 beta)^(1 - alpha) or (2 delta_p)^(1 - alpha)

    def __post_init__(self):
        a, eps, r, P = self.alpha, self.eps, self.rank, self.promise_p
        if a <= 0 or a == 1:
            raise ParameterError("alpha must be positive and different from 1")
        if not 0 < eps <= 1:
            raise ParameterError("eps must lie in (0, 1]")
        if not 0 < self.fail_prob < 1:
            raise ParameterError("fail_prob must lie in (0, 1)")
        if r < 1 or P <= 0:
            raise ParameterError("rank must be >= 1 and the promise value positive")
        set_ = object.__setattr__
        dp = 0.5 * (P * eps / (40 * r)) ** (1 / a)
        if a > 1:
            beta = min((10 * P) ** (1 / a), 0.5)
            if not 0 < dp <= beta:
                raise ParameterError(f"delta_p = {dp} outside (0, beta = {beta}]")
            scale = (4 * beta) ** (1 - a)
            set_(self, "branch", "gt1")
        else:
            if not 0 < dp < 0.5:
                raise ParameterError(f"delta_p = {dp} outside (0, 1/2)")
            beta = None
            scale = (2 * dp) ** (1 - a)
            set_(self, "branch", "lt1")
        set_(self, "beta", beta)
        set_(self, "delta_p", dp)
        set_(self, "scale", scale)
        set_(self, "m", math.ceil(8 * math.log(1 / self.fail_prob)))
        set_(self, "eps_p", scale * P * eps / 256)
        set_(self, "delta_q", scale * P * eps / (128 * r))
        set_(self, "delta_a", scale * P * eps / 128)
        set_(self, "k", math.ceil(65536 / (scale * P * eps ** 2)))
        if not 0 < self.eps_p <= 0.5:
            raise ParameterError(f"eps_p = {self.eps_p} outside (0, 1/2]")

    @property
    def post_factor(self) -> float:
        """Multiplier turning an acceptance probability into an estimate of ``P_alpha``."""
        return 16 / self.scale

    def acceptance_bound(self) -> float:
        """Bound on ``|p_a - P_alpha / post_factor|`` for the exact acceptance probability."""
        a, r = self.alpha, self.rank
        if self.branch == "gt1":
            lead = 5 / 8 * (2 * self.beta) ** (1 - a) * r * self.delta_p ** a
        else:
            lead = 5 / 8 * r * self.delta_p
        return lead + 2 * self.eps_p + 2 * r * self.delta_q

    def estimator_bound(self) -> float:
        """The same bound after multiplying by ``post_factor``."""
        a, r = self.alpha, self.rank
        return 5 * r * (2 * self.delta_p) ** a + 32 / self.scale * (self.eps_p + r * self.delta_q)

    def to_dict(self) -> dict:
        return asdict(self)


# ---------------------------------------------------------------------------
# Polynomials and subroutines
# ---------------------------------------------------------------------------

@lru_cache(maxsize=64)
def von_neumann_polynomial(delta_p: float, eps_p: float) -> CertifiedPolynomial:
    """``|p(x) - ln(1/x) / (4 ln(2/delta_p))| <= eps_p`` on ``[delta_p, 1]``, ``|p| <= 1/2``."""
    return polyapprox.build_log(delta_p, eps_p, normalization=4, max_degree=ESTIMATOR_MAX_DEGREE)


@lru_cache(maxsize=64)
def renyi_gt1_polynomial(alpha: float, delta_p: float, beta: float, eps_p: float) -> CertifiedPolynomial:
    """``~ (1/4)(x / 2 beta)^((alpha-1)/2)`` on ``[delta_p, beta]``."""
    return polyapprox.build_positive_power((alpha - 1) / 2, delta_p, beta, eps_p,
                                           max_degree=ESTIMATOR_MAX_DEGREE)


@lru_cache(maxsize=64)
def renyi_lt1_polynomial(alpha: float, delta_p: float, eps_p: float) -> CertifiedPolynomial:
    """``~ (1/4)(x / delta_p)^((alpha-1)/2)`` on ``[delta_p, 1]``: half of a negative-power polynomial."""
    base = polyapprox.build_negative_power((1 - alpha) / 2, delta_p, 2 * eps_p, max_degree=ESTIMATOR_MAX_DEGREE)
    return base.scaled(0.5, kind="renyi-lt1")


def _polynomial_for(params) -> CertifiedPolynomial:
    if isinstance(params, VonNeumannParams):
        return von_neumann_polynomial(params.delta_p, params.eps_p)
    if params.branch == "gt1":
        return renyi_gt1_polynomial(params.alpha, params.delta_p, params.beta, params.eps_p)
    return renyi_lt1_polynomial(params.alpha, params.delta_p, params.eps_p)


def von_neumann_subroutine(u: BlockEncoding, params: VonNeumannParams) -> BlockEncoding:
    return eigen_transform(u, von_neumann_polynomial(params.delta_p, params.eps_p), params.delta_q).encoding


def renyi_gt1_subroutine(u: BlockEncoding, params: RenyiParams) -> BlockEncoding:
    if params.branch != "gt1":
        raise ParameterError("parameters are for alpha < 1")
    return eigen_transform(u, _polynomial_for(params), params.delta_q).encoding


def renyi_lt1_subroutine(u: BlockEncoding, params: RenyiParams) -> BlockEncoding:
    if params.branch != "lt1":
        raise ParameterError("parameters are for alpha > 1")
    return eigen_transform(u, _polynomial_for(params), params.delta_q).encoding


# ---------------------------------------------------------------------------
# Acceptance probabilities
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Acceptance:
    """Acceptance probability of the measured circuit plus bookkeeping."""

    p: float
    degree: int
    samples_per_run: int = 0
    faithful_slack: float = 0.0


def state_access(rho: DensityMatrix, access: str, per_query_delta: float | None = None):
    """Block-encoding of ``rho`` (scale 2) together with per-query faithful bookkeeping."""
    if access == "ideal":
        return nominal_unitary(rho), None
    parts = faithful_parts(rho, per_query_delta)
    be = BlockEncoding(UnitaryMatrix(parts.coherent_unitary), num_qubits(rho.dim), ORACLE_ANCILLAS, 2.0,
                       2 * parts.upper, rho.data, 1)
    return be, parts


def acceptance(rho: DensityMatrix, poly: CertifiedPolynomial, measurement: str, access: str = "ideal",
               delta_a: float = 0.0, delta_q: float = 0.0) -> Acceptance:
    """Acceptance probability for ``p(rho / 2)`` measured by ``measurement``.

    ``hadamard``: outcome-1 probability of the Hadamard test, ``(1 + Re tr(p rho))/2``.
    ``zero``: probability that all ancillas read zero, ``tr(p rho p^dag)``.

    Faithful access splits ``delta_a`` evenly over the ``deg(p)`` queries; the
    coherent part enters the probability, the decoherent part is reported as
    ``faithful_slack`` (half its diamond bound times the number of queries).
    """
    d = poly.degree
    if access == "faithful":
        if delta_a <= 0:
            raise ParameterError("faithful access needs a positive delta_a")
        u, parts = state_access(rho, "faithful", min(delta_a / max(d, 1), 0.999))
    else:
        u, parts = state_access(rho, "ideal")
    enc = eigen_transform(u, poly, delta_q).encoding
    c = enc.corner()
    if measurement == "hadamard":
        p = hadamard_probability(c, rho, "real")
    elif measurement == "zero":
        p = float(np.real(np.trace(c @ rho.data @ dagger(c))))
    else:
        raise ValueError("measurement must be 'hadamard' or 'zero'")
    p = float(np.clip(p, 0.0, 1.0))
    if parts is None:
        return Acceptance(p, d)
    return Acceptance(p, d, d * parts.samples_per_query, d * parts.noise_diamond.upper / 2)


_ACCEPT_CACHE: dict = {}
_ACCEPT_CACHE_SIZE = 4096


def _acceptance_for(rho: DensityMatrix, params, access: str) -> Acceptance:
    """Cached :func:`acceptance` for the estimator's own polynomial and measurement."""
    vn = isinstance(params, VonNeumannParams)
    key = (np.ascontiguousarray(rho.data).tobytes(), rho.dim, access, type(params).__name__,
           getattr(params, "alpha", None), getattr(params, "beta", None),
           params.delta_p, params.eps_p, params.delta_q, params.delta_a)
    if key not in _ACCEPT_CACHE:
        if len(_ACCEPT_CACHE) >= _ACCEPT_CACHE_SIZE:
            _ACCEPT_CACHE.clear()
        _ACCEPT_CACHE[key] = acceptance(rho, _polynomial_for(params), "hadamard" if vn else "zero", access,
                                        params.delta_a, params.delta_q)
    return _ACCEPT_CACHE[key]


# ---------------------------------------------------------------------------
# Reports
# ---------------------------------------------------------------------------

@dataclass
class EstimatorReport:
    estimate: float
    truth: float
    params: dict
    shots_used: int
    seed: int
    mode: str
    quantity: str
    samples_consumed: int = 0
    bound: float | None = None
    details: dict = field(default_factory=dict)

    @property
    def abs_error(self) -> float:
        return abs(self.estimate - self.truth)

    def to_dict(self) -> dict:
        d = asdict(self)
        d["abs_error"] = self.abs_error
        return d


# ---------------------------------------------------------------------------
# von Neumann entropy
# ---------------------------------------------------------------------------

def von_neumann_from_probability(p: float, params: VonNeumannParams) -> float:
    return 4 * (2 * p - 1) * params.log_factor - math.log(2)


def estimate_von_neumann(rho: DensityMatrix, eps: float, delta: float, mode="ideal-exact",
                         seed: int = 0) -> EstimatorReport:
    """Entropy from the Hadamard test on a block-encoding of ``p(rho/2)`` with ``p`` ~ normalised log."""
    md = Mode.parse(mode)
    params = VonNeumannParams(eps, delta, effective_rank(rho))
    acc = _acceptance_for(rho, params, md.access)
    if md.evaluation == "exact":
        xbar, shots = acc.p, 0
    else:
        xbar = binomial_fast_path(acc.p, params.k, substream(seed, 0, 0)) / params.k
        shots = params.k
    est = von_neumann_from_probability(xbar, params)
    return EstimatorReport(est, von_neumann_entropy(rho), params.to_dict(), shots, seed, str(md), "S",
                           samples_consumed=shots * (1 + acc.samples_per_run),
                           bound=params.acceptance_bound() if md.evaluation == "exact" else params.composite_bound(),
                           details={"p_accept": acc.p, "degree": acc.degree, "faithful_slack": acc.faithful_slack})


# ---------------------------------------------------------------------------
# Renyi entropies
# ---------------------------------------------------------------------------

@dataclass
class PromiseResult:
    estimate: float
    params: RenyiParams
    p_accept: float
    degree: int
    shots: int
    samples: int
    batches: list[float]


def _promise(rho: DensityMatrix, alpha: float, P: float, eps: float, delta: float, md: Mode, seed: int,
             level: int) -> PromiseResult:
    params = RenyiParams(alpha, eps, delta, effective_rank(rho), P)
    acc = _acceptance_for(rho, params, md.access)
    f = params.post_factor
    if md.evaluation == "exact":
        return PromiseResult(f * acc.p, params, acc.p, acc.degree, 0, 0, [])
    est, batches = median_of_batches(acc.p, params.k, params.m, seed, level, lambda x: f * x)
    shots = params.k * params.m
    return PromiseResult(est, params, acc.p, acc.degree, shots, shots * (1 + acc.samples_per_run), batches)


def estimate_renyi_gt1_promise(rho, alpha, P, eps, delta, mode="ideal-exact", seed=0, level=0) -> PromiseResult:
    """Multiplicative ``eps`` estimate of ``P_alpha`` (alpha > 1) given ``P <= P_alpha <= 10 P``."""
    if alpha <= 1:
        raise ParameterError("alpha must exceed 1")
    return _promise(rho, alpha, P, eps, delta, Mode.parse(mode), seed, level)


def estimate_renyi_lt1_promise(rho, alpha, P, eps, delta, mode="ideal-exact", seed=0, level=0) -> PromiseResult:
    """Multiplicative ``eps`` estimate of ``P_alpha`` (alpha < 1) given ``P <= P_alpha <= 10 P``."""
    if not 0 < alpha < 1:
        raise ParameterError("alpha must lie in (0, 1)")
    return _promise(rho, alpha, P, eps, delta, Mode.parse(mode), seed, level)


def annealing_ratio(rank: int, branch: str) -> float:
    """``1 + 1/ln r`` (gt1) or ``1 - 1/ln r`` (lt1); infinite schedule for rank one."""
    if rank <= 1:
        return math.inf if branch == "gt1" else -math.inf
    return 1 + 1 / math.log(rank) if branch == "gt1" else 1 - 1 / math.log(rank)


def recursion_depth(alpha: float, rank: int) -> int:
    """Number of promise-estimator calls made by the annealing recursion (final call included)."""
    branch = "gt1" if alpha > 1 else "lt1"
    lam = annealing_ratio(rank, branch)
    depth, a = 1, alpha
    while (a > lam) if branch == "gt1" else (a < lam):
        a /= lam
        depth += 1
        if depth > RECURSION_DEPTH_CAP:
            raise ParameterError("recursion depth cap exceeded")
    return depth


def _renyi_recursive(rho, alpha, eps, delta, md: Mode, seed: int, trace: list, level: int = 0) -> float:
    if level > RECURSION_DEPTH_CAP:
        raise ParameterError("recursion depth cap exceeded")
    branch = "gt1" if alpha > 1 else "lt1"
    lam = annealing_ratio(effective_rank(rho), branch)
    base = alpha <= lam if branch == "gt1" else alpha >= lam
    if base:
        P = math.exp(-1) if branch == "gt1" else 1.0
    else:
        prev = _renyi_recursive(rho, alpha / lam, 0.25, delta / 2, md, seed, trace, level + 1)
        P = (4 * prev / 5) ** lam * (math.exp(-1) if branch == "gt1" else 1.0)
    res = _promise(rho, alpha, P, eps, delta / 2, md, seed, level)
    trace.append(res)
    return res.estimate


def estimate_renyi_gt1(rho, alpha, eps, delta, mode="ideal-exact", seed=0):
    """Multiplicative ``eps`` estimate of ``P_alpha`` for alpha > 1; returns ``(estimate, promise calls)``."""
    if alpha <= 1:
        raise ParameterError("alpha must exceed 1")
    trace: list = []
    return _renyi_recursive(rho, alpha, eps, delta, Mode.parse(mode), seed, trace), trace


def estimate_renyi_lt1(rho, alpha, eps, delta, mode="ideal-exact", seed=0):
    """Multiplicative ``eps`` estimate of ``P_alpha`` for 0 < alpha < 1; returns ``(estimate, promise calls)``."""
    if not 0 < alpha < 1:
        raise ParameterError("alpha must lie in (0, 1)")
    trace: list = []
    return _renyi_recursive(rho, alpha, eps, delta, Mode.parse(mode), seed, trace), trace


def estimate_renyi_alpha(rho: DensityMatrix, alpha: float, eps: float, delta: float, mode="ideal-exact",
                         seed: int = 0) -> EstimatorReport:
    """Additive ``eps`` estimate of ``S_alpha(rho)`` via a multiplicative ``|1-alpha| eps / 2`` estimate of ``P_alpha``."""
    if alpha == 1:
        raise ParameterError("alpha = 1 is the von Neumann entropy; use estimate_von_neumann")
    if alpha <= 0:
        raise ParameterError("alpha must be positive")
    if not 0 < eps <= 1:
        raise ParameterError("eps must lie in (0, 1]")
    md = Mode.parse(mode)
    inner = abs(1 - alpha) * eps / 2
    fn = estimate_renyi_gt1 if alpha > 1 else estimate_renyi_lt1
    p_est, trace = fn(rho, alpha, inner, delta, md, seed)
    est = math.log(max(p_est, 1e-300)) / (1 - alpha)
    truth = math.log(renyi_moment(rho, alpha)) / (1 - alpha)
    final = trace[-1]
    calls = [{"alpha": t.params.alpha, "P": t.params.promise_p, "eps": t.params.eps, "estimate": t.estimate,
              "p_accept": t.p_accept, "degree": t.degree, "shots": t.shots} for t in trace]
    return EstimatorReport(est, truth, final.params.to_dict(), sum(t.shots for t in trace), seed, str(md),
                           f"S_{alpha:g}", samples_consumed=sum(t.samples for t in trace), bound=eps,
                           details={"P_estimate": p_est, "P_true": renyi_moment(rho, alpha), "calls": calls})


# ---------------------------------------------------------------------------
# SWAP test
# ---------------------------------------------------------------------------

def swap_test_probability(rho: DensityMatrix) -> float:
    """Outcome-0 probability of the controlled-SWAP circuit on ``rho (x) rho``.

    Simulated directly: control in ``|+>``, controlled SWAP, Hadamard on the
    control; the outcome-0 branch operator is ``(I + S)/2``.
    """
    d = rho.dim
    s = swap_operator(d)
    branch = (np.eye(d * d) + s) / 2
    return float(np.real(np.trace(branch @ np.kron(rho.data, rho.data) @ dagger(branch))))


def swap_shots(rank: int, eps: float) -> int:
    return math.ceil(16 * rank ** 2 / eps ** 2)


def estimate_purity_swap(rho: DensityMatrix, eps: float, delta: float, seed: int = 0) -> EstimatorReport:
    """``S_2`` from the SWAP test: median over ``ceil(8 ln(1/delta))`` batches of ``k = ceil(16 r^2/eps^2)`` shots."""
    if not 0 < eps <= 1 or not 0 < delta < 1:
        raise ParameterError("need eps in (0, 1] and delta in (0, 1)")
    r = effective_rank(rho)
    p0 = swap_test_probability(rho)
    k = swap_shots(r, eps)
    m = math.ceil(8 * math.log(1 / delta))
    purity, batches = median_of_batches(p0, k, m, seed, 0, lambda x: 2 * x - 1)
    est = -math.log(max(purity, 1e-300))
    truth = -math.log(renyi_moment(rho, 2))
    return EstimatorReport(est, truth, {"eps": eps, "fail_prob": delta, "rank": r, "k": k, "m": m}, k * m, seed,
                           "sampled", "S_2", samples_consumed=2 * k * m, bound=eps,
                           details={"p0": p0, "purity_estimate": purity})
