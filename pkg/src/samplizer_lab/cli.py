"""Command-line experiment runner.

Every subcommand resolves its options into an :class:`ExperimentConfig`,
runs it, and writes a versioned JSON report (``"schema": 1``) or, for the
scaling sweep, a CSV series.  ``--no-timestamp`` also blanks wall-clock
columns so reruns are byte-identical.  Exit codes: 0 success, 1 a verification check
failed, 2 parameter or sample-budget errors, 3 polynomial certification
failures.  Errors are also serialised into a partial report.
"""
from __future__ import annotations

import csv
import dataclasses
import io
import json
import math
import sys
import time
from dataclasses import dataclass, field
from pathlib import Path

import click
import numpy as np

from . import __version__
from .estimators import (ParameterError, estimate_purity_swap, estimate_renyi_alpha, estimate_von_neumann,
                         substream)
from .ensembles import random_density_matrix, random_pure_state
from .experiments import BOUNDS_SUITES, bounds_suite, lmr_scaling
from .polyapprox import CertificationError, PolynomialParameterError, build
from .qcore import DensityMatrix, DimensionError
from .samplizer import SampleBudgetError

SCHEMA_VERSION = 1
FAMILIES = ("maximally-mixed", "pure", "random-rank-r")
COMMANDS = ("estimate-von-neumann", "estimate-renyi", "purity", "samplizer-scaling", "poly-certify",
            "bounds-verify")
EXIT_OK, EXIT_CHECK_FAILED, EXIT_PARAMETER, EXIT_CERTIFICATION = 0, 1, 2, 3
STATE_STREAM = 2 ** 20  # substream key reserved for state generation


class ConfigError(ValueError):
    """Malformed configuration file or state file."""


@dataclass
class ExperimentConfig:
    """Everything needed to reproduce one run.  Round-trips through ``to_dict``/``from_dict``."""

    command: str
    family: str = "maximally-mixed"
    N: int = 2
    rank: int | None = None
    state_file: str | None = None
    alpha: float | None = None
    eps: float = 0.5
    delta: float = 0.25
    mode: str = "ideal-exact"
    seed: int = 0
    output: str | None = None
    options: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.command not in COMMANDS:
            raise ConfigError(f"unknown command {self.command!r}")
        if self.family not in FAMILIES:
            raise ConfigError(f"unknown state family {self.family!r}")
        if not 0 <= int(self.seed) < 2 ** 64:
            raise ConfigError("seed must be a 64-bit unsigned integer")

    def to_dict(self) -> dict:
        return dataclasses.asdict(self)

    @classmethod
    def from_dict(cls, data: dict) -> "ExperimentConfig":
        known = {f.name for f in dataclasses.fields(cls)}
        unknown = sorted(set(data) - known)
        if unknown:
            raise ConfigError(f"unknown configuration keys: {unknown}")
        return cls(**data)

    @classmethod
    def load(cls, path: str | Path) -> "ExperimentConfig":
        try:
            data = json.loads(Path(path).read_text())
        except json.JSONDecodeError as exc:
            raise ConfigError(f"config file is not valid JSON: {exc}") from exc
        if not isinstance(data, dict):
            raise ConfigError("config file must hold a JSON object")
        return cls.from_dict(data)


# ---------------------------------------------------------------------------
# States
# ---------------------------------------------------------------------------

def _complex_matrix(rows) -> np.ndarray:
    try:
        arr = np.asarray(rows, dtype=float)
    except (TypeError, ValueError) as exc:
        raise ConfigError("matrix entries must be [re, im] pairs") from exc
    if arr.ndim != 3 or arr.shape[-1] != 2:
        raise ConfigError("matrix must be a square array of [re, im] pairs")
    return arr[..., 0] + 1j * arr[..., 1]


def load_state(path: str | Path) -> DensityMatrix:
    """Read a state file: ``{"matrix": [[[re, im], ...], ...]}`` or ``{"eigenvalues": [...], "eigenvectors": ...}``.

    An optional ``"rank"`` entry is used as the rank hint.
    """
    try:
        data = json.loads(Path(path).read_text())
    except json.JSONDecodeError as exc:
        raise ConfigError(f"state file is not valid JSON: {exc}") from exc
    rank = data.get("rank")
    extra = set(data) - {"matrix", "eigenvalues", "eigenvectors", "rank"}
    if extra:
        raise ConfigError(f"unknown state-file keys: {sorted(extra)}")
    if "matrix" in data:
        return DensityMatrix(_complex_matrix(data["matrix"]), rank)
    if "eigenvalues" in data:
        vecs = data.get("eigenvectors")
        return DensityMatrix.from_spectrum(data["eigenvalues"], None if vecs is None else _complex_matrix(vecs), rank)
    raise ConfigError("state file needs 'matrix' or 'eigenvalues'")


def dump_state(rho: DensityMatrix) -> dict:
    m = rho.data
    return {"matrix": [[[float(z.real), float(z.imag)] for z in row] for row in m], "rank": rho.rank_hint}


def resolve_state(cfg: ExperimentConfig) -> DensityMatrix:
    if cfg.state_file:
        return load_state(cfg.state_file)
    n = int(cfg.N)
    if n < 1:
        raise ParameterError("N must be positive")
    if cfg.family == "maximally-mixed":
        return DensityMatrix.maximally_mixed(n)
    rng = substream(int(cfg.seed), STATE_STREAM)
    if cfg.family == "pure":
        return DensityMatrix.from_pure(random_pure_state(n, rng))
    rank = n if cfg.rank is None else int(cfg.rank)
    if not 1 <= rank <= n:
        raise ParameterError("rank must lie in [1, N]")
    return random_density_matrix(n, rank, rng)


# ---------------------------------------------------------------------------
# Running
# ---------------------------------------------------------------------------

def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, (np.floating, float)):
        v = float(obj)
        return v if math.isfinite(v) else str(v)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (np.bool_,)):
        return bool(obj)
    return obj


def render_json(report: dict) -> str:
    return json.dumps(_jsonable(report), indent=2, sort_keys=True) + "\n"


def render_csv(rows: list[dict], columns: list[str]) -> str:
    buf = io.StringIO()
    writer = csv.DictWriter(buf, fieldnames=columns, lineterminator="\n", extrasaction="ignore")
    writer.writeheader()
    for r in rows:
        writer.writerow({k: (repr(float(v)) if isinstance(v, (float, np.floating)) else v) for k, v in r.items()})
    return buf.getvalue()


def _estimate(cfg: ExperimentConfig) -> tuple[dict, int]:
    rho = resolve_state(cfg)
    if cfg.command == "estimate-von-neumann":
        rep = estimate_von_neumann(rho, cfg.eps, cfg.delta, cfg.mode, cfg.seed)
    elif cfg.command == "estimate-renyi":
        if cfg.alpha is None:
            raise ParameterError("--alpha is required")
        rep = estimate_renyi_alpha(rho, cfg.alpha, cfg.eps, cfg.delta, cfg.mode, cfg.seed)
    else:
        rep = estimate_purity_swap(rho, cfg.eps, cfg.delta, cfg.seed)
    d = rep.to_dict()
    d["within_bound"] = bool(rep.abs_error <= rep.bound) if rep.bound is not None else None
    return d, EXIT_OK


def _poly(cfg: ExperimentConfig) -> tuple[dict, int]:
    opts = dict(cfg.options)
    kind = opts.pop("kind", "log")
    kw = {"eps": cfg.eps, **opts}
    if kind != "arcsin-half":
        kw.setdefault("delta", cfg.delta)
    p = build(kind, **kw)
    rep = p.report.to_dict()
    regions = [{"interval": r["interval"], "kind": r["kind"], "bound": r["value"], "target": r["target"],
                "margin": r["margin"], "argmin": r["argmin"], "pass": r["pass"]} for r in rep["regions"]]
    out = {"kind": kind, "params": p.params, "degree": p.degree, "grid_points": rep["grid_points"],
           "parity": p.parity, "parity_ok": rep["parity_ok"], "certified": p.certified, "regions": regions}
    return out, EXIT_OK if p.certified else EXIT_CERTIFICATION


def _bounds(cfg: ExperimentConfig) -> tuple[dict, int]:
    suites = cfg.options.get("suites") or list(BOUNDS_SUITES)
    res = bounds_suite(cfg.seed, suites)
    ok = all(v["pass"] for v in res.values())
    return {"suites": res, "all_pass": ok}, EXIT_OK if ok else EXIT_CHECK_FAILED


def _scaling(cfg: ExperimentConfig) -> tuple[dict, int]:
    rho = resolve_state(cfg)
    t = float(cfg.options.get("t", 1.0))
    steps = [int(s) for s in cfg.options.get("steps", [4, 8, 16, 32])]
    if any(s < 1 for s in steps):
        raise ParameterError("steps must be positive")
    rows = lmr_scaling(rho, t, steps)
    return {"rows": rows}, EXIT_OK


SCALING_COLUMNS = ["t", "steps", "diamond_lower", "diamond_upper", "samples", "wall_ms"]
_RUNNERS = {"estimate-von-neumann": _estimate, "estimate-renyi": _estimate, "purity": _estimate,
            "poly-certify": _poly, "bounds-verify": _bounds, "samplizer-scaling": _scaling}


def run(cfg: ExperimentConfig, timestamp: bool = True) -> tuple[dict, int]:
    """Execute ``cfg``; returns ``(report, exit_code)``.  Never raises for expected failures."""
    report = {"schema": SCHEMA_VERSION, "version": __version__, "command": cfg.command, "config": cfg.to_dict()}
    if timestamp:
        report["timestamp"] = time.strftime("%Y-%m-%dT%H:%M:%SZ", time.gmtime())
    try:
        result, code = _RUNNERS[cfg.command](cfg)
        report["status"] = "ok" if code == EXIT_OK else "failed"
        report["result"] = result
    except CertificationError as exc:
        code = EXIT_CERTIFICATION
        report["status"] = "error"
        report["error"] = {"type": type(exc).__name__, "message": str(exc), "failing_point": exc.failing_point,
                           "degree": exc.degree}
    except (ParameterError, PolynomialParameterError, SampleBudgetError, DimensionError, ConfigError,
            ValueError) as exc:
        code = EXIT_PARAMETER
        report["status"] = "error"
        report["error"] = {"type": type(exc).__name__, "message": str(exc)}
    return report, code


def _emit(text: str, output: str | None):
    if output:
        Path(output).write_text(text)
    else:
        click.echo(text, nl=False)


def _execute(cfg: ExperimentConfig, no_timestamp: bool):
    report, code = run(cfg, timestamp=not no_timestamp)
    if no_timestamp and report.get("status") == "ok" and "rows" in report["result"]:
        for row in report["result"]["rows"]:
            row["wall_ms"] = ""  # wall-clock time is not reproducible
    if cfg.command == "samplizer-scaling" and report.get("status") == "ok":
        _emit(render_csv(report["result"]["rows"], SCALING_COLUMNS), cfg.output)
        report_path = cfg.options.get("report")
        if report_path:
            Path(report_path).write_text(render_json(report))
    else:
        _emit(render_json(report), cfg.output)
    if code != EXIT_OK and report.get("error"):
        click.echo(f"error: {report['error']['message']}", err=True)
    sys.exit(code)


# ---------------------------------------------------------------------------
# click wiring
# ---------------------------------------------------------------------------

def _state_options(f):
    f = click.option("--family", type=click.Choice(FAMILIES), default="maximally-mixed", show_default=True)(f)
    f = click.option("--N", "N", type=int, default=2, show_default=True, help="Hilbert-space dimension.")(f)
    f = click.option("--rank", type=int, default=None, help="Rank for the random-rank-r family.")(f)
    f = click.option("--state-file", type=click.Path(exists=True, dir_okay=False), default=None,
                     help="JSON state file (overrides --family).")(f)
    return f


def _common_options(f):
    f = click.option("--seed", type=click.IntRange(0, 2 ** 64 - 1), default=0, show_default=True)(f)
    f = click.option("--output", type=click.Path(dir_okay=False), default=None, help="Write here instead of stdout.")(f)
    f = click.option("--no-timestamp", is_flag=True, help="Omit the timestamp (byte-identical reruns).")(f)
    return f


@click.group()
@click.version_option(__version__)
def main():
    """Sample-based entropy estimation experiments."""


@main.command("estimate-von-neumann")
@_state_options
@_common_options
@click.option("--eps", type=float, default=0.5, show_default=True)
@click.option("--delta", type=float, default=0.25, show_default=True)
@click.option("--mode", type=click.Choice(["ideal-exact", "ideal-sampled", "faithful-exact", "faithful-sampled"]),
              default="ideal-exact", show_default=True)
def estimate_von_neumann_cmd(family, N, rank, state_file, seed, output, no_timestamp, eps, delta, mode):
    """Estimate S(rho) to additive eps."""
    _execute(ExperimentConfig("estimate-von-neumann", family, N, rank, state_file, None, eps, delta, mode, seed,
                              output), no_timestamp)


@main.command("estimate-renyi")
@_state_options
@_common_options
@click.option("--alpha", type=float, required=True)
@click.option("--eps", type=float, default=0.7, show_default=True)
@click.option("--delta", type=float, default=0.25, show_default=True)
@click.option("--mode", type=click.Choice(["ideal-exact", "ideal-sampled", "faithful-exact", "faithful-sampled"]),
              default="ideal-exact", show_default=True)
def estimate_renyi_cmd(family, N, rank, state_file, seed, output, no_timestamp, alpha, eps, delta, mode):
    """Estimate S_alpha(rho) to additive eps."""
    _execute(ExperimentConfig("estimate-renyi", family, N, rank, state_file, alpha, eps, delta, mode, seed, output),
             no_timestamp)


@main.command("purity")
@_state_options
@_common_options
@click.option("--eps", type=float, default=0.5, show_default=True)
@click.option("--delta", type=float, default=0.25, show_default=True)
def purity_cmd(family, N, rank, state_file, seed, output, no_timestamp, eps, delta):
    """Estimate S_2(rho) with the SWAP test."""
    _execute(ExperimentConfig("purity", family, N, rank, state_file, 2.0, eps, delta, "ideal-sampled", seed, output),
             no_timestamp)


def _int_list(ctx, param, value):
    try:
        return [int(v) for v in value.split(",") if v.strip()]
    except ValueError as exc:
        raise click.BadParameter("expected a comma-separated list of integers") from exc


@main.command("samplizer-scaling")
@_state_options
@_common_options
@click.option("--t", "t", type=float, default=1.0, show_default=True, help="Evolution time.")
@click.option("--steps", callback=_int_list, default="4,8,16,32", show_default=True)
@click.option("--report", type=click.Path(dir_okay=False), default=None, help="Also write a JSON report here.")
def samplizer_scaling_cmd(family, N, rank, state_file, seed, output, no_timestamp, t, steps, report):
    """CSV of the partial-swap exponentiation error against the step count."""
    if family == "maximally-mixed" and state_file is None and N == 2 and rank is None:
        family, rank = "random-rank-r", 2
    opts = {"t": t, "steps": steps}
    if report:
        opts["report"] = report
    _execute(ExperimentConfig("samplizer-scaling", family, N, rank, state_file, None, 0.5, 0.25, "ideal-exact", seed,
                              output, opts), no_timestamp)


@main.command("poly-certify")
@click.option("--kind", type=click.Choice(["rectangle", "negative-power", "positive-power", "log", "arcsin-half"]),
              required=True)
@click.option("--delta", type=float, default=0.1, show_default=True)
@click.option("--eps", type=float, default=0.01, show_default=True)
@click.option("--t", "t", type=float, default=None, help="Rectangle half-width.")
@click.option("--c", "c", type=float, default=None, help="Exponent for the power kinds.")
@click.option("--beta", type=float, default=None, help="Positive-power cutoff.")
@click.option("--normalization", type=click.Choice(["2", "4"]), default=None, help="Logarithm normalization.")
@click.option("--max-degree", type=int, default=None)
@click.option("--output", type=click.Path(dir_okay=False), default=None)
@click.option("--no-timestamp", is_flag=True)
def poly_certify_cmd(kind, delta, eps, t, c, beta, normalization, max_degree, output, no_timestamp):
    """Build a bounded polynomial and print its grid certificate."""
    opts = {"kind": kind}
    defaults = {"rectangle": {"t": 0.5}, "negative-power": {"c": 0.5}, "positive-power": {"c": 0.5, "beta": 0.5}}
    opts.update(defaults.get(kind, {}))
    for name, value in (("t", t), ("c", c), ("beta", beta), ("max_degree", max_degree)):
        if value is not None:
            opts[name] = value
    if normalization is not None:
        opts["normalization"] = int(normalization)
    if kind == "arcsin-half":
        delta = 0.0
    else:
        opts["delta"] = delta
    _execute(ExperimentConfig("poly-certify", eps=eps, delta=delta, output=output, options=opts), no_timestamp)


@main.command("bounds-verify")
@click.option("--suite", "suites", multiple=True, type=click.Choice(BOUNDS_SUITES),
              help="Restrict to these suites (repeatable); default all.")
@click.option("--seed", type=click.IntRange(0, 2 ** 64 - 1), default=0, show_default=True)
@click.option("--output", type=click.Path(dir_okay=False), default=None)
@click.option("--no-timestamp", is_flag=True)
def bounds_verify_cmd(suites, seed, output, no_timestamp):
    """Check the entropy and discrimination inequalities numerically."""
    opts = {"suites": list(suites)} if suites else {}
    _execute(ExperimentConfig("bounds-verify", seed=seed, output=output, options=opts), no_timestamp)


@main.command("run")
@click.argument("config", type=click.Path(exists=True, dir_okay=False))
@click.option("--output", type=click.Path(dir_okay=False), default=None, help="Overrides the config's output.")
@click.option("--no-timestamp", is_flag=True)
def run_cmd(config, output, no_timestamp):
    """Run a JSON configuration file (unknown keys are rejected)."""
    try:
        cfg = ExperimentConfig.load(config)
    except (ConfigError, TypeError) as exc:
        click.echo(f"error: {exc}", err=True)
        sys.exit(EXIT_PARAMETER)
    if output:
        cfg = dataclasses.replace(cfg, output=output)
    _execute(cfg, no_timestamp)


if __name__ == "__main__":  # pragma: no cover
    main()
