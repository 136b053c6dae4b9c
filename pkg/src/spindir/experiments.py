"""Config-driven experiment runner and table emitter.

One preset per figure-style study plus a free-form sweep.  A config is a
flat JSON object; every run is fully determined by (config, seed) and the
emitted files are byte-identical across repeat runs and thread counts.
Emitted metadata echoes the resolved config so a run can be reproduced
from its output file alone.
"""

from __future__ import annotations

import json
import math
import os
import time

import numpy as np

from . import __version__
from .pointer import (
    QuadratureError,
    povm_kernel,
    score_vs_delta,
    thermal_pointer_score,
)
from .score import exact_mean_score
from .spinops import HalfInt, as_halfint
from .thermal import ThermalSpec, pure_polarized
from .weak import tmax_scan, weak1d_score_exact, weak1d_simulated_score

__all__ = ["ConfigError", "ExperimentConfig", "ResultTable", "run", "emit"]

KINDS = ("fig1", "fig2", "fig3", "fig4", "fig5", "sweep")

# curve factors around the matched width sqrt(J/4) for pointer sweeps
_DELTA_FACTORS = (0.35, 0.5, 0.7, 1.0, 1.4, 2.0, 2.8, 4.0)
# sqrt(t)/delta targets for repeated-z sweeps
_RATIO_TARGETS = (0.25, 0.5, 0.75, 1.0, 1.5, 2.0, 3.0)
# prior for the 3D optimum sqrt(t_max)/delta ~ C/sqrt(N), used to size tau
_RATIO_PRIOR = 2.4


class ConfigError(ValueError):
    """Invalid experiment config; collects field-level messages."""

    def __init__(self, problems):
        if isinstance(problems, str):
            problems = [("config", problems)]
        self.problems = list(problems)
        super().__init__(
            "; ".join(f"{field}: {msg}" for field, msg in self.problems)
        )


_FIELDS = {
    "kind", "J", "N", "delta", "beta", "sz_over_j", "t", "tau",
    "n_trajectories", "seed", "threads", "out", "format",
}


class ExperimentConfig:
    """Resolved experiment parameters (defaults already applied)."""

    __slots__ = (
        "kind", "J", "N", "delta", "beta", "sz_over_j", "t", "tau",
        "n_trajectories", "seed", "threads", "out", "format",
    )

    def __init__(self, **kw):
        for name in self.__slots__:
            setattr(self, name, kw.get(name))

    def as_dict(self) -> dict:
        return {name: getattr(self, name) for name in self.__slots__}

    def experiment_dict(self) -> dict:
        """The fields that define the results (delivery knobs excluded).

        Thread count, output path and format cannot change a single row,
        so they stay out of the metadata echo and emitted files remain
        byte-identical across those choices.
        """
        skip = {"out", "format", "threads"}
        return {k: v for k, v in self.as_dict().items() if k not in skip}


def _check_list(problems, raw, field, kind=float, positive=False, allow_rules=False):
    value = raw.get(field)
    if value is None:
        return None
    if not isinstance(value, list) or len(value) == 0:
        problems.append((field, "must be a non-empty list"))
        return None
    out = []
    for entry in value:
        if allow_rules and isinstance(entry, str):
            out.append(entry)
            continue
        if isinstance(entry, bool) or not isinstance(entry, (int, float)):
            problems.append((field, f"bad entry {entry!r}"))
            return None
        if positive and entry <= 0:
            problems.append((field, f"entry {entry!r} must be positive"))
            return None
        out.append(kind(entry))
    return out


def parse_config(raw: dict) -> ExperimentConfig:
    """Validate a raw JSON mapping into an ExperimentConfig."""
    problems: list[tuple[str, str]] = []
    if not isinstance(raw, dict):
        raise ConfigError("config must be a JSON object")
    unknown = sorted(set(raw) - _FIELDS)
    for field in unknown:
        problems.append((field, "unknown field"))

    kind = raw.get("kind")
    if kind not in KINDS:
        problems.append(("kind", f"must be one of {KINDS}, got {kind!r}"))

    j_list = _check_list(problems, raw, "J", positive=False)
    if j_list is not None:
        for value in j_list:
            try:
                as_halfint(value)
            except ValueError:
                problems.append(("J", f"{value!r} is not a half-integer"))
    n_list = _check_list(problems, raw, "N", kind=int, positive=True)
    delta = _check_list(problems, raw, "delta", positive=True, allow_rules=True)
    beta = _check_list(problems, raw, "beta")
    sz = _check_list(problems, raw, "sz_over_j")
    if sz is not None and any(not 0.0 <= c < 1.0 for c in sz):
        problems.append(("sz_over_j", "entries must lie in [0, 1)"))
    t_list = _check_list(problems, raw, "t", kind=int, positive=True)

    tau = raw.get("tau")
    if tau is not None and (isinstance(tau, bool) or not isinstance(tau, int) or tau < 1):
        problems.append(("tau", f"must be a positive integer, got {tau!r}"))
    n_traj = raw.get("n_trajectories", 10_000)
    if isinstance(n_traj, bool) or not isinstance(n_traj, int) or n_traj < 1:
        problems.append(("n_trajectories", f"must be a positive integer, got {n_traj!r}"))
    seed = raw.get("seed")
    if seed is None:
        problems.append(("seed", "required (runs never seed from the clock)"))
    elif isinstance(seed, bool) or not isinstance(seed, int) or seed < 0:
        problems.append(("seed", f"must be a non-negative integer, got {seed!r}"))
    threads = raw.get("threads", 1)
    if isinstance(threads, bool) or not isinstance(threads, int) or threads < 0:
        problems.append(("threads", f"must be a non-negative integer, got {threads!r}"))
    fmt = raw.get("format", "csv")
    if fmt not in ("csv", "json"):
        problems.append(("format", f"must be 'csv' or 'json', got {fmt!r}"))
    out = raw.get("out")
    if out is not None and not isinstance(out, str):
        problems.append(("out", "must be a string path"))

    if problems:
        raise ConfigError(problems)
    return ExperimentConfig(
        kind=kind, J=j_list, N=n_list, delta=delta, beta=beta, sz_over_j=sz,
        t=t_list, tau=tau, n_trajectories=n_traj, seed=seed, threads=threads,
        out=out, format=fmt,
    )


def _eval_delta(entry, *, N=None, J=None) -> float:
    """A delta entry is a positive number or an expression in N, J, sqrt."""
    if isinstance(entry, (int, float)):
        return float(entry)
    names = {"sqrt": math.sqrt, "N": N, "J": J}
    try:
        value = float(eval(entry, {"__builtins__": {}}, names))  # noqa: S307
    except Exception as exc:
        raise ConfigError([("delta", f"rule {entry!r} failed: {exc}")]) from exc
    if not value > 0:
        raise ConfigError([("delta", f"rule {entry!r} gave non-positive {value!r}")])
    return value


def _threads(cfg: ExperimentConfig) -> int:
    return cfg.threads if cfg.threads else (os.cpu_count() or 1)


def _auto_tau(N: int, delta: float) -> int:
    t_est = (_RATIO_PRIOR / math.sqrt(N) * delta) ** 2
    return max(60, int(2.5 * t_est) + 40)


class ResultTable:
    """Rectangular numeric results with reproducibility metadata."""

    __slots__ = ("columns", "rows", "meta")

    def __init__(self, columns, rows, meta):
        self.columns = list(columns)
        for row in rows:
            if len(row) != len(self.columns):
                raise ValueError("ragged result row")
        self.rows = [list(r) for r in rows]
        self.meta = dict(meta)


def _fig1(cfg: ExperimentConfig):
    js = cfg.J if cfg.J else [5, 10, 18]
    rows = []
    for j_val in js:
        J = as_halfint(j_val)
        matched = math.sqrt(float(J) / 4.0)
        if cfg.delta:
            deltas = [_eval_delta(d, N=J.twice, J=float(J)) for d in cfg.delta]
        else:
            deltas = [f * matched for f in _DELTA_FACTORS]
        curve = score_vs_delta(J, deltas, refine=True)
        for i in range(len(deltas)):
            rows.append([
                float(J), float(curve.deltas[i]), float(curve.score[i]),
                float(curve.score_opt[i]), float(curve.epsilon[i]),
            ])
    return ["J", "delta", "G", "G_opt", "eps_J"], rows


def _fig2(cfg: ExperimentConfig):
    js = cfg.J if cfg.J else [4, 8, 12]
    if cfg.beta:
        betas = list(cfg.beta)
    else:
        cs = cfg.sz_over_j if cfg.sz_over_j else [0.6, 0.8, 0.95]
        betas = [2.0 * math.atanh(c) for c in cs]
    rows = []
    for j_val in js:
        for beta in betas:
            res = thermal_pointer_score(ThermalSpec(as_halfint(j_val), beta))
            rows.append([float(as_halfint(j_val)), beta, res.j_delta_g])
    return ["J", "beta", "J_delta_G"], rows


def _fig3(cfg: ExperimentConfig):
    js = cfg.J if cfg.J else [2, 4, 8, 16]
    delta = _eval_delta(cfg.delta[0]) if cfg.delta else 10.0
    if cfg.t:
        ts = list(cfg.t)
    else:
        ts = sorted({max(1, round((x * delta) ** 2)) for x in _RATIO_TARGETS})
    rows = []
    combo = 0
    for j_val in js:
        J = as_halfint(j_val)
        for t in ts:
            est = weak1d_simulated_score(
                J, t, delta, cfg.n_trajectories, (cfg.seed, combo),
                threads=_threads(cfg),
            )
            rows.append([
                float(J), math.sqrt(t) / delta,
                weak1d_score_exact(J, t, delta), est.mean, est.stderr,
            ])
            combo += 1
    return ["J", "sqrt_t_over_delta", "G_analytic", "G_simulated", "stderr"], rows


def _fig4(cfg: ExperimentConfig):
    ns = cfg.N if cfg.N else [20]
    rules = cfg.delta if cfg.delta else ["4*sqrt(N)", "8*sqrt(N)", "16*sqrt(N)"]
    rows = []
    combo = 0
    for n in ns:
        deltas = [_eval_delta(d, N=n, J=n / 2.0) for d in rules]
        tau = cfg.tau if cfg.tau else max(_auto_tau(n, d) for d in deltas)
        scan = tmax_scan(
            n, deltas, tau, cfg.n_trajectories, (cfg.seed, combo),
            threads=_threads(cfg),
        )
        for row in scan:
            for t_idx, t in enumerate(row.curve.t):
                rows.append([
                    float(n), row.delta, int(t), float(row.curve.mean[t_idx]),
                    row.t_max, row.ratio,
                ])
        combo += 1
    return ["N", "delta", "t", "G", "t_max", "ratio"], rows


def _fig5(cfg: ExperimentConfig):
    ns = cfg.N if cfg.N else [5, 10, 15, 20]
    rules = cfg.delta if cfg.delta else ["1", "8*sqrt(N)"]
    rows = []
    combo = 0
    for n in ns:
        for rule in rules:
            delta = _eval_delta(rule, N=n, J=n / 2.0)
            tau = cfg.tau if cfg.tau else _auto_tau(n, delta)
            scan = tmax_scan(
                n, [delta], tau, cfg.n_trajectories, (cfg.seed, combo),
                threads=_threads(cfg),
            )
            row = scan[0]
            rows.append([
                float(n), delta, row.t_max, row.g_max,
                (n / 2.0) * (1.0 - row.g_max),
            ])
            combo += 1
    return ["N", "delta", "t_max", "G_max", "eps_N"], rows


def _sweep(cfg: ExperimentConfig):
    """Free-form grid: trajectory scan if tau/t given, thermal if beta/c
    given, otherwise a pointer-width sweep."""
    if cfg.tau is not None or cfg.t is not None:
        if not cfg.N:
            raise ConfigError([("N", "trajectory sweep needs a non-empty N list")])
        return _fig4(cfg)
    if cfg.beta is not None or cfg.sz_over_j is not None:
        if not cfg.J:
            raise ConfigError([("J", "thermal sweep needs a non-empty J list")])
        return _fig2(cfg)
    if not cfg.J:
        raise ConfigError([("J", "pointer sweep needs a non-empty J list")])
    return _fig1(cfg)


_RUNNERS = {
    "fig1": _fig1, "fig2": _fig2, "fig3": _fig3,
    "fig4": _fig4, "fig5": _fig5, "sweep": _sweep,
}


def run(cfg: ExperimentConfig) -> ResultTable:
    """Execute the experiment described by cfg."""
    started = time.perf_counter()
    columns, rows = _RUNNERS[cfg.kind](cfg)
    meta = {
        "config": cfg.experiment_dict(),
        "version": __version__,
        "runtime_seconds": time.perf_counter() - started,
    }
    return ResultTable(columns, rows, meta)


# keys that vary between identical runs and are kept out of emitted files
_VOLATILE_META = {"runtime_seconds"}


def _cell(value) -> str:
    if isinstance(value, float):
        return repr(value)
    return str(value)


def emit(table: ResultTable, fmt: str, path: str) -> None:
    """Write a ResultTable as CSV or JSON.

    CSV carries the metadata as '#'-prefixed leading comments, then the
    header and '.'-decimal rows, newline-terminated.  JSON uses
    {"meta": ..., "columns": [...], "rows": [[...]]}.  Metadata keys that
    vary between identical runs (wall-clock timing) are omitted so the
    same config and seed always produce byte-identical files.
    """
    meta = {k: v for k, v in table.meta.items() if k not in _VOLATILE_META}
    try:
        if fmt == "csv":
            lines = [f"# {key}: {json.dumps(meta[key], sort_keys=True)}" for key in sorted(meta)]
            lines.append(",".join(table.columns))
            for row in table.rows:
                lines.append(",".join(_cell(v) for v in row))
            text = "\n".join(lines) + "\n"
        elif fmt == "json":
            text = json.dumps(
                {"meta": meta, "columns": table.columns, "rows": table.rows},
                sort_keys=True,
            ) + "\n"
        else:
            raise ValueError(f"unknown format {fmt!r}")
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(text)
    except OSError as exc:
        raise OSError(f"cannot write result table to {path}: {exc}") from exc
