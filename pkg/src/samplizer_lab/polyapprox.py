"""Bounded real polynomials in the Chebyshev basis with grid certificates.

Every builder follows the same recipe:

1. pick an entire (analytic everywhere) surrogate ``g`` of the target that
   already satisfies every region inequality with a positive margin;
2. interpolate ``g`` at Chebyshev extrema (a type-I DCT), growing the grid
   until the trailing coefficients vanish;
3. truncate at the smallest degree whose discarded coefficient mass is below
   half the margin (``|p - g| <= sum |c_k|`` over the dropped tail);
4. certify on a dense grid, escalating the degree if any region fails.

The positive-power polynomial is the exact product of a negative-power
polynomial, a rectangle polynomial and a monomial; the arcsin polynomial is a
minimax linear program because its target touches the global bound.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from functools import lru_cache
from typing import Callable, Sequence

import numpy as np
from scipy import fft as sfft
from scipy.optimize import linprog
from scipy.signal import fftconvolve
from scipy.special import erf, erfcinv, ndtr

DEFAULT_GRID_POINTS = 20001
DEFAULT_MAX_DEGREE = 2000
CLENSHAW_MAX_DEGREE = 2 ** 15
_CHUNK = 2 ** 21


class CertificationError(RuntimeError):
    """No polynomial satisfying every region was found within the degree cap."""

    def __init__(self, message: str, failing_point: float | None = None, degree: int | None = None):
        super().__init__(message)
        self.failing_point = failing_point
        self.degree = degree


class PolynomialParameterError(ValueError):
    """Builder called outside its parameter preconditions."""


# ---------------------------------------------------------------------------
# Chebyshev-series arithmetic
# ---------------------------------------------------------------------------

def clenshaw(coeffs: np.ndarray, x) -> np.ndarray:
    """Evaluate ``sum_k c_k T_k(x)`` with the Clenshaw recurrence."""
    x = np.asarray(x, dtype=float)
    c = np.asarray(coeffs, dtype=float)
    if c.size == 0:
        return np.zeros_like(x)
    if c.size == 1:
        return np.full_like(x, c[0])
    b1 = np.zeros_like(x)
    b2 = np.zeros_like(x)
    two_x = 2 * x
    for ck in c[:0:-1]:
        b1, b2 = ck + two_x * b1 - b2, b1
    return c[0] + x * b1 - b2


def cosine_sum(coeffs: np.ndarray, x) -> np.ndarray:
    """Evaluate ``sum_k c_k cos(k arccos x)`` directly, chunked over ``k``.

    Used for very high degrees at a handful of points, where the Python-level
    Clenshaw loop would dominate.
    """
    x = np.atleast_1d(np.asarray(x, dtype=float))
    theta = np.arccos(np.clip(x, -1, 1))
    c = np.asarray(coeffs, dtype=float)
    out = np.zeros_like(x)
    step = max(1, _CHUNK // max(1, x.size))
    for start in range(0, c.size, step):
        k = np.arange(start, min(c.size, start + step))
        out += np.cos(np.outer(theta, k)) @ c[k]
    return out


def evaluate_series(coeffs: np.ndarray, x) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    scalar = x.ndim == 0
    xs = np.atleast_1d(x)
    if len(coeffs) - 1 <= CLENSHAW_MAX_DEGREE or xs.size * len(coeffs) <= 2 ** 26:
        if len(coeffs) - 1 <= CLENSHAW_MAX_DEGREE:
            out = clenshaw(coeffs, xs)
        else:
            out = cosine_sum(coeffs, xs)
    else:
        out = cosine_sum(coeffs, xs)
    return out[0] if scalar else out


def chebyshev_extrema_values(coeffs: np.ndarray, m: int) -> np.ndarray:
    """Values at ``x_j = cos(pi j / m)``, ``j = 0..m`` (requires ``m >= degree``)."""
    d = len(coeffs) - 1
    if m < d:
        raise ValueError("grid smaller than the degree")
    a = np.zeros(m + 1)
    a[: d + 1] = coeffs
    a[0] *= 2
    a[m] *= 2
    vals = sfft.dct(a, type=1, overwrite_x=True)
    vals /= 2
    return vals


def chebyshev_interpolate(g: Callable[[np.ndarray], np.ndarray], m: int) -> np.ndarray:
    """Coefficients of the degree-``m`` interpolant of ``g`` at Chebyshev extrema."""
    idx = np.arange(m + 1)
    v = np.empty(m + 1)
    for start in range(0, m + 1, _CHUNK):
        sl = slice(start, min(m + 1, start + _CHUNK))
        v[sl] = g(np.cos(np.pi * idx[sl] / m))
    c = sfft.dct(v, type=1, overwrite_x=True)
    c /= m
    c[0] /= 2
    c[-1] /= 2
    return c


def chebyshev_multiply(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Product of two Chebyshev series via the symmetric z-series convolution."""
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    za = np.concatenate([a[:0:-1] / 2, [a[0]], a[1:] / 2])
    zb = np.concatenate([b[:0:-1] / 2, [b[0]], b[1:] / 2])
    if za.size * zb.size > 2 ** 22:
        zc = fftconvolve(za, zb)
    else:
        zc = np.convolve(za, zb)
    n = len(a) + len(b) - 2
    centre = zc.size // 2
    out = zc[centre: centre + n + 1].copy()
    out[1:] *= 2
    return out


def chebyshev_times_x(a: np.ndarray) -> np.ndarray:
    return chebyshev_multiply(a, np.array([0.0, 1.0]))


def _truncation_degree(c: np.ndarray, tol: float) -> int:
    """Smallest ``d`` with ``sum_{k>d} |c_k| <= tol``."""
    tail = np.cumsum(np.abs(c[::-1]))[::-1]  # tail[k] = sum_{j>=k}
    above = np.nonzero(tail > tol)[0]
    return int(above[-1]) if above.size else 0


def _apply_parity(c: np.ndarray, parity: str | None) -> np.ndarray:
    c = c.copy()
    if parity == "even":
        c[1::2] = 0
    elif parity == "odd":
        c[0::2] = 0
    return c


def _fit(g: Callable, tol: float, parity: str | None, max_degree: int, width: float | None = None) -> np.ndarray:
    """Chebyshev coefficients of ``g`` resolved well past the point where the tail drops below ``tol``.

    ``width`` is the narrowest smoothing length of ``g``; near ``x = 0`` the
    coefficients of a Gaussian-smoothed kink decay like ``exp(-(k width)^2 / 2)``,
    which gives a starting grid close to the final one and keeps memory low at
    very high degree.
    """
    if width is not None:
        guess = math.sqrt(2 * math.log(100 / tol)) / width
        m = sfft.next_fast_len(max(256, int(1.25 * guess)))
    else:
        m = 256
    limit = max(4 * max_degree, 1024)
    while True:
        c = chebyshev_interpolate(g, m)
        d = _truncation_degree(c, tol)
        if d <= 0.85 * m and np.sum(np.abs(c[int(0.95 * m):])) <= tol * 1e-2:
            break
        if d > max_degree and m > 2 * max_degree:
            raise CertificationError(f"required degree exceeds the cap {max_degree}", degree=d)
        if m >= limit:
            raise CertificationError(f"required degree exceeds the cap {max_degree}", degree=d)
        m = sfft.next_fast_len(int(m * 1.5))
    return _apply_parity(c, parity)


# ---------------------------------------------------------------------------
# Regions and certificates
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Region:
    """One closed-interval inequality.

    ``kind`` is ``"abs_le"`` (``|p| <= value``), ``"range"`` (``lo <= p <= hi``
    with ``value = (lo, hi)``) or ``"approx"`` (``|p - target| <= value``).
    """

    interval: tuple[float, float]
    kind: str
    value: float | tuple[float, float]
    target: Callable[[np.ndarray], np.ndarray] | None = field(default=None, compare=False)
    target_id: str = ""

    def margin(self, x: np.ndarray, px: np.ndarray) -> np.ndarray:
        if self.kind == "abs_le":
            return self.value - np.abs(px)
        if self.kind == "range":
            lo, hi = self.value
            return np.minimum(px - lo, hi - px)
        if self.kind == "approx":
            return self.value - np.abs(px - self.target(x))
        raise ValueError(f"unknown region kind {self.kind!r}")

    def describe(self) -> dict:
        value = list(self.value) if isinstance(self.value, tuple) else self.value
        return {"interval": list(self.interval), "kind": self.kind, "value": value,
                "target": self.target_id or None}


@dataclass(frozen=True)
class RegionResult:
    region: Region
    margin: float
    argmin: float
    points: int

    @property
    def passed(self) -> bool:
        return self.margin >= 0

    def to_dict(self) -> dict:
        d = self.region.describe()
        d.update(margin=self.margin, argmin=self.argmin, points=self.points, **{"pass": self.passed})
        return d


@dataclass(frozen=True)
class CertificateReport:
    degree: int
    grid_points: int
    results: tuple[RegionResult, ...]
    parity_ok: bool

    @property
    def passed(self) -> bool:
        return self.parity_ok and all(r.passed for r in self.results)

    @property
    def worst(self) -> RegionResult:
        return min(self.results, key=lambda r: r.margin)

    def to_dict(self) -> dict:
        return {"degree": self.degree, "grid_points": self.grid_points, "parity_ok": self.parity_ok,
                "certified": self.passed, "regions": [r.to_dict() for r in self.results]}


@dataclass(frozen=True, eq=False)
class CertifiedPolynomial:
    coeffs_chebyshev: np.ndarray
    regions: tuple[Region, ...]
    parity: str | None = None
    certificate_grid_points: int = DEFAULT_GRID_POINTS
    certified: bool = False
    report: CertificateReport | None = None
    kind: str = "custom"
    params: dict = field(default_factory=dict)

    def __post_init__(self):
        c = np.trim_zeros(np.array(self.coeffs_chebyshev, dtype=float), "b")
        if c.size == 0:
            c = np.zeros(1)
        c.setflags(write=False)
        object.__setattr__(self, "coeffs_chebyshev", c)
        object.__setattr__(self, "regions", tuple(self.regions))

    @property
    def degree(self) -> int:
        return len(self.coeffs_chebyshev) - 1

    def __call__(self, x):
        return evaluate_series(self.coeffs_chebyshev, x)

    def global_bound(self) -> float:
        """Tightest stated ``|p| <= b`` over ``[-1, 1]`` (``inf`` when none)."""
        bounds = [r.value for r in self.regions
                  if r.kind == "abs_le" and r.interval[0] <= -1 and r.interval[1] >= 1]
        return min(bounds) if bounds else math.inf

    def scaled(self, factor: float, kind: str | None = None) -> "CertifiedPolynomial":
        """``factor * p`` with every region rescaled; the certificate is recomputed."""
        regions = []
        for r in self.regions:
            if r.kind == "abs_le":
                regions.append(replace(r, value=abs(factor) * r.value))
            elif r.kind == "range":
                lo, hi = sorted((factor * r.value[0], factor * r.value[1]))
                regions.append(replace(r, value=(lo, hi)))
            else:
                tgt = r.target
                regions.append(replace(r, value=abs(factor) * r.value,
                                       target=lambda x, t=tgt: factor * t(x),
                                       target_id=f"{factor:g}*{r.target_id}"))
        p = CertifiedPolynomial(factor * self.coeffs_chebyshev, tuple(regions), self.parity,
                                self.certificate_grid_points, False, None, kind or self.kind,
                                dict(self.params, scale=factor))
        return finalize(p)


def _next_pow2(n: int) -> int:
    return 1 << max(0, int(math.ceil(math.log2(max(n, 1)))))


def _region_points(region: Region, degree: int) -> np.ndarray:
    lo, hi = region.interval
    pts = [np.array([lo, hi])]
    if degree <= 4096:
        # geometric refinement toward each endpoint catches edge behaviour
        w = hi - lo
        if w > 0:
            offs = np.geomspace(min(1e-9, w), w, 400)
            pts += [lo + offs, hi - offs]
    return np.clip(np.concatenate(pts), lo, hi)


def _scan(regions, best, xs, vs):
    for i, r in enumerate(regions):
        lo, hi = r.interval
        mask = (xs >= lo) & (xs <= hi)
        if not mask.any():
            continue
        x, v = xs[mask], vs[mask]
        marg = r.margin(x, v)
        j = int(np.argmin(marg))
        m, a, n = best[i]
        best[i] = (float(marg[j]), float(x[j]), n + x.size) if marg[j] < m else (m, a, n + x.size)


def certify(p: CertifiedPolynomial) -> CertificateReport:
    """Evaluate every region inequality on the dense certificate grid.

    The grid is the uniform ``certificate_grid_points`` mesh, the Chebyshev
    extrema of order ``max(4096, 2 degree)`` and the region endpoints (plus a
    geometric refinement toward them for moderate degrees).  Beyond degree
    ``2**15`` the uniform mesh is dropped: the extrema mesh is then strictly
    finer everywhere.
    """
    c = p.coeffs_chebyshev
    d = p.degree
    m = max(4096, sfft.next_fast_len(2 * d))
    cv = chebyshev_extrema_values(c, m)
    extra = np.unique(np.concatenate([_region_points(r, d) for r in p.regions])) if p.regions else np.zeros(0)
    best = [(math.inf, float("nan"), 0) for _ in p.regions]
    for start in range(0, m + 1, _CHUNK):
        idx = np.arange(start, min(m + 1, start + _CHUNK))
        _scan(p.regions, best, np.cos(np.pi * idx / m), cv[idx])
    del cv
    npts = m + 1 + extra.size
    if d <= CLENSHAW_MAX_DEGREE:
        xs = np.concatenate([np.linspace(-1, 1, p.certificate_grid_points), extra])
        _scan(p.regions, best, xs, clenshaw(c, xs))
        npts += p.certificate_grid_points
    else:
        _scan(p.regions, best, extra, cosine_sum(c, extra))
    results = tuple(RegionResult(r, *b) for r, b in zip(p.regions, best))

    parity_ok = True
    scale = max(1.0, float(np.max(np.abs(c))))
    if p.parity == "even":
        parity_ok = bool(np.all(np.abs(c[1::2]) < 1e-12 * scale))
    elif p.parity == "odd":
        parity_ok = bool(np.all(np.abs(c[0::2]) < 1e-12 * scale))
    return CertificateReport(d, int(npts), results, parity_ok)


def finalize(p: CertifiedPolynomial) -> CertifiedPolynomial:
    report = certify(p)
    return replace(p, certified=report.passed, report=report)


def _certify_with_escalation(c_full: np.ndarray, tail_tol: float, regions, parity, kind, params,
                             max_degree: int) -> CertifiedPolynomial:
    d = _truncation_degree(c_full, tail_tol)
    if parity == "odd" and d % 2 == 0:
        d += 1
    if parity == "even" and d % 2 == 1:
        d += 1
    last = None
    while True:
        if d > max_degree:
            fp = last.report.worst.argmin if last is not None else None
            raise CertificationError(f"{kind}: degree {d} exceeds the cap {max_degree}",
                                     failing_point=fp, degree=d)
        coeffs = c_full[: d + 1]
        p = finalize(CertifiedPolynomial(coeffs, regions, parity, kind=kind, params=params))
        if p.certified:
            return p
        last = p
        if d + 1 >= c_full.size:
            raise CertificationError(f"{kind}: surrogate does not meet the regions",
                                     failing_point=p.report.worst.argmin, degree=d)
        d = min(c_full.size - 1, int(math.ceil(d * 1.25)) + 1)


# ---------------------------------------------------------------------------
# Surrogates
# ---------------------------------------------------------------------------

def _gauss_ramp(u: np.ndarray) -> np.ndarray:
    """``E[max(0, u + Z)]`` for standard normal ``Z``."""
    return u * ndtr(u) + np.exp(-0.5 * u * u) / math.sqrt(2 * math.pi)


def smoothed_abs(x, floor: float, sigma: float) -> np.ndarray:
    """Gaussian smoothing of ``max(|x|, floor)``: entire, even, and never below ``floor``."""
    x = np.asarray(x, dtype=float)
    return floor + sigma * (_gauss_ramp((x - floor) / sigma) + _gauss_ramp((-x - floor) / sigma))


def _pick_sigma(delta: float, floor: float, target: Callable, surrogate: Callable, budget: float) -> float:
    """Widest smoothing whose error at ``x = delta`` (its worst point) is within ``budget``."""
    for u0 in np.arange(2.0, 40.0, 0.25):
        sigma = (delta - floor) / u0
        err = abs(float(surrogate(np.array([delta]), sigma)[0]) - float(target(np.array([delta]))[0]))
        if err <= budget:
            return sigma
    raise CertificationError("no smoothing width meets the surrogate budget")


def _check_unit(name: str, v: float, lo: float, hi: float, lo_open=True, hi_open=True):
    ok_lo = v > lo if lo_open else v >= lo
    ok_hi = v < hi if hi_open else v <= hi
    if not (ok_lo and ok_hi and math.isfinite(v)):
        lb = "(" if lo_open else "["
        rb = ")" if hi_open else "]"
        raise PolynomialParameterError(f"{name}={v} outside {lb}{lo}, {hi}{rb}")


# ---------------------------------------------------------------------------
# Builders
# ---------------------------------------------------------------------------

@lru_cache(maxsize=64)
def build_rectangle(t: float, delta: float, eps: float, max_degree: int = DEFAULT_MAX_DEGREE) -> CertifiedPolynomial:
    """Even ``p`` close to 1 on ``[-t+delta, t-delta]`` and close to 0 beyond ``|x| >= t+delta``."""
    _check_unit("delta", delta, 0, 0.5)
    _check_unit("eps", eps, 0, 0.5)
    _check_unit("t", t, -1, 1, False, False)
    if t - delta <= 0:
        raise PolynomialParameterError("need t - delta > 0")
    k = float(erfcinv(eps / 4)) / delta

    def g(x):
        return eps / 4 + (1 - eps / 2) * 0.5 * (erf(k * (x + t)) - erf(k * (x - t)))

    regions = [Region((-1.0, 1.0), "abs_le", 1.0),
               Region((-t + delta, t - delta), "range", (1 - eps, 1.0))]
    if t + delta <= 1:
        regions += [Region((-1.0, -t - delta), "range", (0.0, eps)),
                    Region((t + delta, 1.0), "range", (0.0, eps))]
    tail = eps / 8
    c = _fit(g, tail, "even", max_degree, width=1 / (k * math.sqrt(2)))
    return _certify_with_escalation(c, tail, tuple(regions), "even", "rectangle",
                                    {"t": t, "delta": delta, "eps": eps}, max_degree)


@lru_cache(maxsize=64)
def build_negative_power(c: float, delta: float, eps: float, max_degree: int = DEFAULT_MAX_DEGREE) -> CertifiedPolynomial:
    """Even ``p`` with ``|p| <= 1`` and ``|p(x) - (x/delta)^(-c) / 2| <= eps`` on ``[delta, 1]``."""
    if not c > 0:
        raise PolynomialParameterError("exponent c must be positive")
    _check_unit("delta", delta, 0, 0.5)
    _check_unit("eps", eps, 0, 0.5)
    floor = delta * 1.8 ** (-1.0 / c)  # caps the surrogate at 0.9

    def target(x):
        return 0.5 * (np.asarray(x) / delta) ** (-c)

    def surrogate(x, sigma):
        return 0.5 * (smoothed_abs(x, floor, sigma) / delta) ** (-c)

    sigma = _pick_sigma(delta, floor, target, surrogate, eps / 8)
    regions = (Region((-1.0, 1.0), "abs_le", 1.0),
               Region((delta, 1.0), "approx", eps, target, f"0.5*(x/{delta:g})^(-{c:g})"))
    tail = 7 * eps / 16
    coeffs = _fit(lambda x: surrogate(x, sigma), tail, "even", max_degree, width=sigma)
    return _certify_with_escalation(coeffs, tail, regions, "even", "negative_power",
                                    {"c": c, "delta": delta, "eps": eps}, max_degree)


@lru_cache(maxsize=64)
def build_log(delta: float, eps: float, normalization: int = 2,
              max_degree: int = DEFAULT_MAX_DEGREE) -> CertifiedPolynomial:
    """Even ``p`` approximating ``ln(1/x) / (normalization * ln(2/delta))`` on ``[delta, 1]``.

    ``normalization=2`` has global bound 1; ``normalization=4`` is half of the
    former (built at twice the precision) and has global bound 1/2.
    """
    _check_unit("delta", delta, 0, 1, hi_open=False)
    _check_unit("eps", eps, 0, 0.5, hi_open=False)
    if normalization == 4:
        base = build_log(delta, min(2 * eps, 0.5), 2, max_degree)
        half = base.scaled(0.5)
        scale_l = 4 * math.log(2 / delta)
        target4 = lambda x: np.log(1 / np.asarray(x)) / scale_l
        regions = (Region((-1.0, 1.0), "abs_le", 0.5),
                   Region((delta, 1.0), "approx", eps, target4, f"ln(1/x)/(4 ln(2/{delta:g}))"))
        p = finalize(CertifiedPolynomial(half.coeffs_chebyshev, regions, "even", kind="log",
                                         params={"delta": delta, "eps": eps, "normalization": 4}))
        if not p.certified:
            raise CertificationError("halved logarithm polynomial failed", p.report.worst.argmin, p.degree)
        return p
    if normalization != 2:
        raise PolynomialParameterError("normalization must be 2 or 4")
    scale_l = 2 * math.log(2 / delta)
    floor = delta / 2  # the surrogate therefore never exceeds 1/2

    def target(x):
        return np.log(1 / np.asarray(x)) / scale_l

    def surrogate(x, sigma):
        return np.log(1 / smoothed_abs(x, floor, sigma)) / scale_l

    sigma = _pick_sigma(delta, floor, target, surrogate, eps / 8)
    regions = (Region((-1.0, 1.0), "abs_le", 1.0),
               Region((delta, 1.0), "approx", eps, target, f"ln(1/x)/(2 ln(2/{delta:g}))"))
    tail = 7 * eps / 16
    coeffs = _fit(lambda x: surrogate(x, sigma), tail, "even", max_degree, width=sigma)
    return _certify_with_escalation(coeffs, tail, regions, "even", "log",
                                    {"delta": delta, "eps": eps, "normalization": 2}, max_degree)


def positive_power_target(c: float, beta: float) -> Callable[[np.ndarray], np.ndarray]:
    return lambda x: 0.25 * (np.asarray(x) / (2 * beta)) ** c


@lru_cache(maxsize=64)
def build_positive_power(c: float, delta: float, beta: float, eps: float,
                         max_degree: int = DEFAULT_MAX_DEGREE) -> CertifiedPolynomial:
    """``p = (2 beta)^(-c) delta^(c - ceil c) q(x) r(x) x^ceil(c) / 2``.

    ``q`` approximates ``(x/delta)^(c - ceil c) / 2`` and ``r`` is a rectangle
    that is flat on ``[-beta, beta]`` and vanishes beyond ``2 beta``; both are
    built at the internal precision ``eps (2 beta)^c delta^(ceil c - c)``.
    """
    if not c > 0:
        raise PolynomialParameterError("exponent c must be positive")
    if not (0 < delta < beta <= 0.5):
        raise PolynomialParameterError("need 0 < delta < beta <= 1/2")
    _check_unit("eps", eps, 0, 0.5)
    cc = math.ceil(c)
    frac = cc - c
    eps_int = eps * (2 * beta) ** c * delta ** frac
    if frac > 1e-12:
        q = build_negative_power(frac, delta, eps_int, max_degree).coeffs_chebyshev
    else:
        q = np.array([0.5])
    r = build_rectangle(1.5 * beta, 0.5 * beta, eps_int, max_degree).coeffs_chebyshev
    prod = chebyshev_multiply(q, r)
    for _ in range(cc):
        prod = chebyshev_times_x(prod)
    prod = 0.5 * (2 * beta) ** (-c) * delta ** (c - cc) * prod
    parity = "even" if cc % 2 == 0 else "odd"
    prod = _apply_parity(prod, parity)
    f = positive_power_target(c, beta)
    f_delta = float(f(delta))
    regions = (Region((0.0, delta), "abs_le", 2 * f_delta),
               Region((delta, beta), "approx", eps, f, f"0.25*(x/{2 * beta:g})^{c:g}"),
               Region((-1.0, 1.0), "abs_le", 0.5))
    if len(prod) - 1 > max_degree:
        raise CertificationError(f"positive_power: degree {len(prod) - 1} exceeds the cap {max_degree}",
                                 degree=len(prod) - 1)
    p = finalize(CertifiedPolynomial(prod, regions, parity, kind="positive_power",
                                     params={"c": c, "delta": delta, "beta": beta, "eps": eps,
                                             "eps_internal": eps_int}))
    if not p.certified:
        raise CertificationError("positive_power: product failed its certificate",
                                 p.report.worst.argmin, p.degree)
    return p


_SIN1 = math.sin(1.0)


def _arcsin_lp(d: int, eps: float, slack: float, npts: int):
    """Minimax odd polynomial for ``arcsin(x)/2`` on ``[0, sin 1]`` with ``|p| <= 1/2 - slack``."""
    ks = np.arange(1, d + 1, 2)
    theta = np.linspace(0, np.pi / 2, npts)
    xb = np.cos(theta)
    xa = np.concatenate([xb[xb <= _SIN1], [_SIN1]])
    ta = np.cos(np.outer(np.arccos(xa), ks))
    tb = np.cos(np.outer(np.arccos(xb), ks))
    f = np.arcsin(xa) / 2
    n = ks.size
    one_a = np.ones((xa.size, 1))
    zero_b = np.zeros((xb.size, 1))
    a_ub = np.vstack([np.hstack([ta, -one_a]), np.hstack([-ta, -one_a]),
                      np.hstack([tb, zero_b]), np.hstack([-tb, zero_b])])
    bound = 0.5 - slack
    b_ub = np.concatenate([f, -f, np.full(xb.size, bound), np.full(xb.size, bound)])
    cost = np.zeros(n + 1)
    cost[-1] = 1
    res = linprog(cost, A_ub=a_ub, b_ub=b_ub, bounds=[(None, None)] * n + [(0, None)], method="highs")
    if res.status != 0:
        return None, math.inf
    coeffs = np.zeros(d + 1)
    coeffs[ks] = res.x[:n]
    return coeffs, float(res.x[-1])


@lru_cache(maxsize=64)
def build_arcsin_half(eps: float, max_degree: int = DEFAULT_MAX_DEGREE) -> CertifiedPolynomial:
    """Odd ``p`` with ``|p| <= 1/2`` and ``|p(x) - arcsin(x)/2| <= eps`` on ``[-sin 1, sin 1]``.

    The target reaches the global bound at ``x = sin 1``, so no smoothing
    margin exists there; a linear-programming minimax fit is used instead and
    the best achievable error decays only like ``1/degree``.
    """
    _check_unit("eps", eps, 0, 0.25)
    target = lambda x: np.arcsin(np.clip(x, -1, 1)) / 2
    regions = (Region((-1.0, 1.0), "abs_le", 0.5),
               Region((-_SIN1, _SIN1), "approx", eps, target, "arcsin(x)/2"))
    d = 3
    while d <= max_degree:
        npts = max(1500, 8 * d)
        coeffs, err = _arcsin_lp(d, eps, eps / 50, npts)
        if coeffs is not None and err <= 0.8 * eps:
            for slack in (eps / 50, eps / 10, eps / 4):
                if slack != eps / 50:
                    coeffs, err = _arcsin_lp(d, eps, slack, 2 * npts)
                    if coeffs is None or err > 0.95 * eps:
                        break
                p = finalize(CertifiedPolynomial(coeffs, regions, "odd", kind="arcsin_half",
                                                 params={"eps": eps}))
                if p.certified:
                    return p
        # the minimax error decays like 1/d; jump close to the predicted degree
        if math.isfinite(err) and err > 0:
            guess = int(d * err / (0.8 * eps))
            d = max(d + 2, min(guess, int(d * 1.5)))
        else:
            d += 2
        if d % 2 == 0:
            d += 1
    raise CertificationError(f"arcsin_half: degree exceeds the cap {max_degree}", degree=d)


def constant_polynomial(value: float, regions: Sequence[Region] = ()) -> CertifiedPolynomial:
    return finalize(CertifiedPolynomial(np.array([value]), tuple(regions), "even", kind="constant"))


def linear_polynomial(slope: float) -> CertifiedPolynomial:
    """``p(x) = slope * x`` certified against ``|p| <= |slope|``."""
    return finalize(CertifiedPolynomial(np.array([0.0, slope]), (Region((-1.0, 1.0), "abs_le", abs(slope)),),
                                        "odd", kind="linear", params={"slope": slope}))


def build(kind: str, **kw) -> CertifiedPolynomial:
    """Dispatch by name (used by the command line)."""
    builders = {"rectangle": build_rectangle, "negative-power": build_negative_power,
                "positive-power": build_positive_power, "log": build_log, "arcsin-half": build_arcsin_half}
    key = kind.replace("_", "-")
    if key not in builders:
        raise PolynomialParameterError(f"unknown polynomial kind {kind!r}")
    return builders[key](**kw)
