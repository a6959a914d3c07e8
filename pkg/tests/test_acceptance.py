"""Acceptance suite: ten end-to-end criteria, each printing one PASS/FAIL line.

Run directly (``python tests/test_acceptance.py``) or through pytest; in the
latter case the lines are also collected into the terminal summary.
"""
import math
import sys
import time

import numpy as np
import pytest

from samplizer_lab.cli import ExperimentConfig, render_json, run
from samplizer_lab.ensembles import haar_unitary, random_channel, random_density_matrix
from samplizer_lab.estimators import (estimate_purity_swap, estimate_renyi_alpha, estimate_renyi_gt1_promise,
                                      estimate_renyi_lt1_promise, estimate_von_neumann, swap_test_probability)
from samplizer_lab.experiments import bounds_suite, composition_scaling, lmr_scaling, lmr_time_scaling, loglog_slope
from samplizer_lab.polyapprox import (DEFAULT_GRID_POINTS, build_arcsin_half, build_log, build_negative_power,
                                      build_positive_power, build_rectangle, certify)
from samplizer_lab.qcore import channel_trace_distance, diamond_distance, operator_norm, renyi_moment
from samplizer_lab.samplizer import lower_bound_instance_check, unitarity_defect

ACCEPTANCE_LINES: list[str] = []


def record(number: int, title: str, passed: bool, detail: str, elapsed: float) -> str:
    line = f"{'PASS' if passed else 'FAIL'} criterion {number:>2} ({title}): {detail} [{elapsed:.1f}s]"
    ACCEPTANCE_LINES.append(line)
    print(line)
    return line


def binomial_floor(runs: int, delta: float) -> float:
    """``1 - delta - 3 sigma`` for ``runs`` Bernoulli(1 - delta) trials."""
    return 1 - delta - 3 * math.sqrt(delta * (1 - delta) / runs)


def _random_state(rng, dims, max_rank=4):
    n = int(rng.choice(dims))
    r = int(rng.integers(1, min(n, max_rank) + 1))
    return random_density_matrix(n, r, rng)


# ---------------------------------------------------------------------------
# 1-2: von Neumann entropy
# ---------------------------------------------------------------------------

def criterion_1():
    rng = np.random.default_rng(101)
    worst, fails = math.inf, 0
    for _ in range(200):
        rho = _random_state(rng, [2, 4, 8])
        rep = estimate_von_neumann(rho, float(rng.choice([0.5, 0.9])), 0.25, "ideal-exact")
        margin = rep.bound - rep.abs_error
        worst = min(worst, margin)
        fails += margin < 0
    return fails == 0, f"200 exact-mode instances, violations={fails}, worst margin={worst:.3e}"


def criterion_2():
    hits = 0
    for seed in range(40):
        rho = random_density_matrix(4, 2, np.random.default_rng(1000 + seed))
        rep = estimate_von_neumann(rho, 0.5, 0.25, "ideal-sampled", seed=seed)
        hits += rep.abs_error <= 0.5
    return hits >= 27, f"{hits}/40 sampled runs within 0.5 (need >= 27)"


# ---------------------------------------------------------------------------
# 3-5: Renyi entropies and the SWAP test
# ---------------------------------------------------------------------------

P_GRID = [10 ** (-j / 2) for j in range(0, 8)]


def _promise_value(alpha, p_alpha):
    if alpha < 1:
        return 1.0
    return max(p for p in P_GRID if p <= p_alpha * (1 + 1e-9))


def criterion_3():
    rng = np.random.default_rng(303)
    details, ok = [], True
    for alpha in (0.5, 2.0, 3.0):
        worst_accept, worst_est, n = math.inf, math.inf, 0
        for _ in range(200):
            rho = _random_state(rng, [2, 4])
            pa = renyi_moment(rho, alpha)
            P = _promise_value(alpha, pa)
            assert P <= pa * (1 + 1e-9) and pa <= 10 * P
            fn = estimate_renyi_gt1_promise if alpha > 1 else estimate_renyi_lt1_promise
            res = fn(rho, alpha, P, float(rng.choice([0.5, 1.0])), 0.25)
            prm = res.params
            worst_accept = min(worst_accept, prm.acceptance_bound() - abs(res.p_accept - pa / prm.post_factor))
            worst_est = min(worst_est, prm.estimator_bound() - abs(prm.post_factor * res.p_accept - pa))
            n += 1
        ok &= worst_accept >= 0 and worst_est >= 0
        details.append(f"alpha={alpha:g}: n={n} acceptance margin={worst_accept:.2e} estimate margin={worst_est:.2e}")
    return ok, "; ".join(details)


def criterion_4():
    floor = binomial_floor(40, 0.25)
    parts, ok = [], True
    for alpha in (0.5, 2.0):
        hits = 0
        for seed in range(40):
            rho = random_density_matrix(4, 2, np.random.default_rng(4000 + seed))
            rep = estimate_renyi_alpha(rho, alpha, 0.7, 0.25, "ideal-sampled", seed=seed)
            hits += rep.abs_error <= 0.7
        ok &= hits / 40 >= floor
        parts.append(f"alpha={alpha:g}: {hits}/40")
    return ok, f"{', '.join(parts)} within 0.7 (need fraction >= {floor:.3f})"


def criterion_5():
    rng = np.random.default_rng(505)
    worst = 0.0
    for _ in range(50):
        rho = _random_state(rng, [2, 4, 8], 8)
        worst = max(worst, abs(swap_test_probability(rho) - (1 + renyi_moment(rho, 2)) / 2))
    agree, eps_swap, eps_pipe = 0, 0.5, 0.7
    for i in range(20):
        rho = random_density_matrix(4, 2, np.random.default_rng(5000 + i))
        swap = estimate_purity_swap(rho, eps_swap, 0.1, seed=i)
        pipe = estimate_renyi_alpha(rho, 2.0, eps_pipe, 0.25, "ideal-sampled", seed=i)
        agree += abs(swap.estimate - pipe.estimate) <= eps_swap + eps_pipe
    ok = worst <= 1e-10 and agree == 20
    return ok, f"max |p0 - (1+tr rho^2)/2| = {worst:.1e} on 50 states; {agree}/20 SWAP vs pipeline agreements"


# ---------------------------------------------------------------------------
# 6-7: sample-based channels
# ---------------------------------------------------------------------------

def criterion_6():
    rng = np.random.default_rng(606)
    steps, times = [4, 8, 16, 32, 64], [0.25, 0.5, 1.0, 2.0]
    n_slopes, t_slopes = [], []
    for _ in range(5):
        rho = random_density_matrix(2, 2, rng)
        rows = lmr_scaling(rho, 1.0, steps)
        n_slopes.append(loglog_slope(steps, [r["diamond_upper"] for r in rows]))
        rows = lmr_time_scaling(rho, times, 64)
        t_slopes.append(loglog_slope(times, [r["diamond_upper"] for r in rows]))
    ok = all(abs(s + 1) <= 0.15 for s in n_slopes) and all(abs(s - 2) <= 0.3 for s in t_slopes)
    return ok, (f"step slopes {[round(s, 3) for s in n_slopes]} (target -1 +/- 0.15); "
                f"time slopes {[round(s, 3) for s in t_slopes]} (target 2 +/- 0.3)")


def criterion_7():
    rho = random_density_matrix(2, 2, np.random.default_rng(707))
    delta = 0.4
    rows = composition_scaling(rho, [1, 2, 3, 4], delta, seed=7)
    uppers = [r["diamond_upper"] for r in rows]
    slope = loglog_slope([r["queries"] for r in rows], [r["samples"] for r in rows])
    ok = all(u <= delta for u in uppers) and abs(slope - 2) <= 0.2
    return ok, (f"diamond upper brackets {[round(u, 4) for u in uppers]} <= {delta}; samples "
                f"{[r['samples'] for r in rows]}, slope {slope:.3f} (target 2 +/- 0.2)")


# ---------------------------------------------------------------------------
# 8-10: polynomials, inequalities, infrastructure
# ---------------------------------------------------------------------------

def polynomial_grid():
    grid = []
    for delta in (0.05, 0.1, 0.2):
        for eps in (0.1, 0.01, 0.001):
            grid.append(("rectangle", lambda d=delta, e=eps: build_rectangle(0.5, d, e)))
    for delta in (0.1, 0.2, 0.3):
        for eps in (0.1, 0.01, 0.001):
            grid.append(("negative-power", lambda d=delta, e=eps: build_negative_power(0.5, d, e)))
    for c, delta in ((0.5, 0.05), (1.5, 0.1), (2.0, 0.2)):
        for eps in (0.05, 0.01, 0.005):
            grid.append(("positive-power", lambda c=c, d=delta, e=eps: build_positive_power(c, d, 0.5, e)))
    for delta in (0.05, 0.1, 0.2):
        for eps in (0.05, 0.01, 0.005):
            grid.append(("log", lambda d=delta, e=eps: build_log(d, e)))
    for eps in (0.05, 0.02, 0.01):
        for points in (DEFAULT_GRID_POINTS, 2 * DEFAULT_GRID_POINTS - 1, 4 * DEFAULT_GRID_POINTS - 3):
            grid.append(("arcsin-half", lambda e=eps, g=points: _regrid(build_arcsin_half(e), g)))
    return grid


def _regrid(p, points):
    from dataclasses import replace
    return replace(p, certificate_grid_points=points)


def criterion_8():
    counts, violations, worst = {}, 0, math.inf
    for kind, make in polynomial_grid():
        p = make()
        rep = certify(p)
        assert rep.grid_points >= DEFAULT_GRID_POINTS
        violations += sum(not r.passed for r in rep.results) + (not rep.parity_ok)
        worst = min(worst, rep.worst.margin)
        counts[kind] = counts.get(kind, 0) + 1
    ok = violations == 0 and all(v == 9 for v in counts.values())
    return ok, f"{sum(counts.values())} polynomials over {len(counts)} builders, violations={violations}, " \
               f"worst margin={worst:.2e}"


def criterion_9():
    res = bounds_suite(seed=909)
    bad = [k for k, v in res.items() if not v["pass"]]
    sizes = {k: v["n_checked"] for k, v in res.items()}
    ok = not bad and sizes["log-inequality"] == 10 ** 4 and sizes["renyi-below-one-inequality"] == 500
    return ok, f"suites {sizes}; failing={bad or 'none'}"


def criterion_10():
    rng = np.random.default_rng(1010)
    sandwich_bad = 0
    for _ in range(50):
        d = int(rng.choice([2, 3]))
        e, f = random_channel(d, rng, int(rng.integers(1, 4))), random_channel(d, rng, int(rng.integers(1, 4)))
        td = channel_trace_distance(e, f, restarts=16).value
        br = diamond_distance(e, f)
        sandwich_bad += not (br.upper / d - 1e-6 <= td <= br.upper + 1e-6)
    defect_bad = 0
    for _ in range(100):
        n = int(rng.choice([2, 3, 4]))
        u = haar_unitary(n, rng)
        r = rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))
        a = u + float(rng.uniform(1e-4, 0.5)) * r / operator_norm(r)
        lhs, rhs = unitarity_defect(a, u)
        defect_bad += lhs > rhs + 1e-12
    composite_bad, worst = 0, math.inf
    for i in range(100):
        rho = random_density_matrix(2, int(rng.integers(1, 3)), rng)
        rep = lower_bound_instance_check(rho, float(rng.uniform(0.1, 3.0)), float(rng.uniform(1e-3, 0.1)),
                                         float(rng.uniform(0.0, 0.3)), seed=i)
        composite_bad += not rep.passed
        worst = min(worst, rep.margin)
    cfgs = [ExperimentConfig("estimate-von-neumann", "random-rank-r", 4, 2, mode="ideal-sampled", seed=99),
            ExperimentConfig("estimate-renyi", "random-rank-r", 4, 2, alpha=2.0, eps=0.7, mode="ideal-sampled",
                             seed=99),
            ExperimentConfig("purity", "random-rank-r", 4, 2, eps=0.5, seed=99)]
    identical = all(render_json(run(c, timestamp=False)[0]) == render_json(run(c, timestamp=False)[0]) for c in cfgs)
    ok = sandwich_bad == 0 and defect_bad == 0 and composite_bad == 0 and identical
    return ok, (f"sandwich violations {sandwich_bad}/50, unitarity-defect violations {defect_bad}/100, "
                f"composite-bound violations {composite_bad}/100 (worst margin {worst:.3f}), "
                f"byte-identical reports: {identical}")


CRITERIA = [
    (1, "von Neumann exact-mode bias bound", criterion_1),
    (2, "von Neumann sampled end-to-end", criterion_2),
    (3, "Renyi promise acceptance bounds", criterion_3),
    (4, "Renyi sampled end-to-end", criterion_4),
    (5, "SWAP-test consistency", criterion_5),
    (6, "partial-swap exponentiation scaling", criterion_6),
    (7, "circuit composition budget and samples", criterion_7),
    (8, "polynomial certificates", criterion_8),
    (9, "inequality suite", criterion_9),
    (10, "channel-distance and determinism infrastructure", criterion_10),
]


@pytest.mark.slow
@pytest.mark.parametrize("number, title, check", CRITERIA, ids=[f"criterion_{n}" for n, _, _ in CRITERIA])
def test_acceptance(number, title, check):
    start = time.perf_counter()
    passed, detail = check()
    line = record(number, title, passed, detail, time.perf_counter() - start)
    assert passed, line


if __name__ == "__main__":
    results = []
    for number, title, check in CRITERIA:
        start = time.perf_counter()
        passed, detail = check()
        record(number, title, passed, detail, time.perf_counter() - start)
        results.append(passed)
    sys.exit(0 if all(results) else 1)
