"""Reusable experiment drivers shared by the command line, scripts and acceptance tests.

Each driver returns plain rows (lists of dicts) or JSON-ready dicts so results
can be written as CSV/JSON without further massaging.
"""
from __future__ import annotations

import math
import time
from typing import Sequence

import numpy as np

from .bounds import (helstrom_bound_check, mixedness_pair, perturbed_uniform, renyi_lt1_pair, verify_alpha_ordering,
                     verify_log_eq, verify_mixedness_entropy, verify_moment_range, verify_p_alpha_beta,
                     verify_renyi_lt1_ineq)
from .ensembles import haar_unitary, random_density_matrix, random_distribution
from .qcore import DensityMatrix, diamond_distance
from .samplizer import (FixedGate, LmrConfig, OracleSlot, QueryCircuit, exponential_channel, lmr_channel,
                        samplize)


def loglog_slope(x: Sequence[float], y: Sequence[float]) -> float:
    """Least-squares slope of ``log y`` against ``log x``."""
    return float(np.polyfit(np.log(np.asarray(x, float)), np.log(np.asarray(y, float)), 1)[0])


# ---------------------------------------------------------------------------
# Density-matrix exponentiation
# ---------------------------------------------------------------------------

def lmr_row(rho: DensityMatrix, t: float, steps: int) -> dict:
    start = time.perf_counter()
    cfg = LmrConfig(t, steps)
    br = diamond_distance(lmr_channel(rho, cfg), exponential_channel(rho, t))
    wall = (time.perf_counter() - start) * 1e3
    return {"t": t, "steps": steps, "diamond_lower": br.lower, "diamond_upper": br.upper,
            "samples": cfg.copies, "wall_ms": wall}


def lmr_scaling(rho: DensityMatrix, t: float, steps: Sequence[int]) -> list[dict]:
    """Diamond bracket of the ``n``-step partial-swap channel against ``exp(-i rho t)``."""
    return [lmr_row(rho, t, n) for n in steps]


def lmr_time_scaling(rho: DensityMatrix, times: Sequence[float], steps: int) -> list[dict]:
    return [lmr_row(rho, t, steps) for t in times]


# ---------------------------------------------------------------------------
# Circuit composition
# ---------------------------------------------------------------------------

def toy_circuit(queries: int, seed: int, system_qubits: int = 1) -> QueryCircuit:
    """Alternating Haar gates and oracle slots (every second slot inverted)."""
    rng = np.random.default_rng(seed)
    dim = 2 ** (system_qubits + 4)
    gates = []
    for i in range(queries):
        gates.append(FixedGate(haar_unitary(dim, rng)))
        gates.append(OracleSlot(inverse=bool(i % 2)))
    gates.append(FixedGate(haar_unitary(dim, rng)))
    return QueryCircuit(system_qubits, 4, gates)


def composition_scaling(rho: DensityMatrix, queries: Sequence[int], delta: float, seed: int = 0,
                        measure_lower: bool = False) -> list[dict]:
    """Total diamond bracket and sample count of sample-based circuits at fixed total budget ``delta``."""
    rows = []
    for q in queries:
        start = time.perf_counter()
        res = samplize(toy_circuit(q, seed + q), rho, delta, "faithful", measure_lower=measure_lower, seed=seed)
        rows.append({"queries": q, "delta": delta, "diamond_lower": res.diamond.lower,
                     "diamond_upper": res.diamond.upper, "samples": res.samples_consumed,
                     "per_query_error": res.per_query_error,
                     "wall_ms": (time.perf_counter() - start) * 1e3})
    return rows


# ---------------------------------------------------------------------------
# Inequality suite
# ---------------------------------------------------------------------------

BOUNDS_SUITES = ("log-inequality", "renyi-below-one-inequality", "moment-comparison", "renyi-ordering",
                 "moment-range", "mixedness-entropy", "discrimination")


def discrimination_family() -> list[tuple[str, DensityMatrix, DensityMatrix, int]]:
    """Hard pairs with their copy counts: rank-deficient pairs at ``ceil(1/d)`` copies and mixedness pairs."""
    out = []
    for n, alpha, eps in ((4, 0.5, 0.3), (8, 0.5, 0.3), (16, 0.5, 0.2), (8, 0.7, 0.2), (16, 0.7, 0.3)):
        pair, d = renyi_lt1_pair(n, alpha, eps)
        for copies in (1, math.ceil(1 / d), 3 * math.ceil(1 / d)):
            out.append((pair.description, pair.rho0, pair.rho1, copies))
    for n, eps in ((4, 0.2), (8, 0.3)):
        pair = mixedness_pair(n, eps, 0.5)
        for copies in (1, 4, 16):
            out.append((pair.description, pair.rho0, pair.rho1, copies))
    return out


def bounds_suite(seed: int = 0, suites: Sequence[str] = BOUNDS_SUITES) -> dict[str, dict]:
    """Run the scalar, state and discrimination inequality checks; one JSON-ready dict per suite."""
    unknown = set(suites) - set(BOUNDS_SUITES)
    if unknown:
        raise ValueError(f"unknown suites {sorted(unknown)}")
    rng = np.random.default_rng(seed)
    out: dict[str, dict] = {}
    if "log-inequality" in suites:
        out["log-inequality"] = verify_log_eq(100, 100).to_dict()
    if "renyi-below-one-inequality" in suites:
        dists = [perturbed_uniform(int(rng.integers(2, 17)), rng) for _ in range(250)]
        dists += [random_distribution(int(rng.integers(2, 17)), rng) for _ in range(250)]
        reports = [verify_renyi_lt1_ineq(dists, a) for a in (0.25, 0.5, 0.75)]
        worst = min(reports, key=lambda r: r.min_margin)
        d = worst.to_dict()
        d["extra"] = {"alphas": [0.25, 0.5, 0.75], "per_alpha_margin": [r.min_margin for r in reports]}
        d["pass"] = all(r.passed for r in reports)
        out["renyi-below-one-inequality"] = d
    if "moment-comparison" in suites:
        dists = [random_distribution(int(rng.integers(2, 12)), rng) for _ in range(200)]
        out["moment-comparison"] = verify_p_alpha_beta(dists, [(0.5, 2.0), (1.5, 3.0), (0.2, 0.8)]).to_dict()
    states = None
    if {"renyi-ordering", "moment-range"} & set(suites):
        states = []
        for _ in range(200):
            n = int(rng.choice([2, 3, 4, 8]))
            states.append(random_density_matrix(n, int(rng.integers(1, n + 1)), rng))
    if "renyi-ordering" in suites:
        out["renyi-ordering"] = verify_alpha_ordering(states, [0.5, 1.5, 2.0, 3.0]).to_dict()
    if "moment-range" in suites:
        out["moment-range"] = verify_moment_range(states, [0.5, 1.5, 2.0, 3.0]).to_dict()
    if "mixedness-entropy" in suites:
        grid = [(n, e, 0.5) for n in (2, 4, 8, 16) for e in (0.01, 0.1, 0.25, 0.4)]
        out["mixedness-entropy"] = verify_mixedness_entropy(grid).to_dict()
    if "discrimination" in suites:
        rows = []
        for i, (desc, r0, r1, copies) in enumerate(discrimination_family()):
            rep = helstrom_bound_check(r0, r1, copies, trials=20000, seed=seed + i)
            row = rep.to_dict()
            row["instance"] = desc
            rows.append(row)
        margins = [min(r["helstrom_bound"] + r["slack"] - r["empirical_success"],
                       r["fidelity_bound"] - r["half_trace_distance"]) for r in rows]
        out["discrimination"] = {"name": "discrimination", "min_margin": float(min(margins)),
                                 "n_checked": len(rows), "pass": all(r["pass"] for r in rows), "instances": rows}
    return out
