"""Command-line front end.

Configuration is a flat key = value text file with dotted keys (see
RunConfig._SCHEMA for the full key set and defaults); rate functions are
given by their mean and comma-separated harmonic:amplitude terms, e.g.

    model.k = 7
    model.m = 4
    model.arrival.base = 3
    model.arrival.sin = 1:-2
    model.service.base = 5
    model.service.sin = 1:4

Subcommands: analyze, roots, oracle, bounds, waiting, busy, compare.  Every
command writes CSV files (first line `# schema: <name>`, floats with 17
significant digits, fixed row order, so identical configs give identical
bytes) and JSON summaries into --out.  Exit codes: 0 success, 2 bad
configuration or usage, 3 numerical failure.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .bounds import truncation_error_bound
from .busy import busy_oracle, busy_period_cdf
from .model import ModelSpec, RateFunction
from .oracle import extract_boundary, integrate_periodic
from .roots import build_root_set
from .series import SeriesEvaluator
from .waiting import oracle_wait_cdf, wait_cdf


class ConfigError(Exception):
    """Anything wrong with the run configuration."""


def _parse_int(raw: str) -> int:
    try:
        return int(raw)
    except ValueError as exc:
        raise ConfigError(f"expected an integer, got {raw!r}") from exc


def _parse_float(raw: str) -> float:
    try:
        return float(raw)
    except ValueError as exc:
        raise ConfigError(f"expected a number, got {raw!r}") from exc


def _parse_int_list(raw: str) -> tuple[int, ...]:
    if not raw.strip():
        return ()
    return tuple(_parse_int(part.strip()) for part in raw.split(","))


def _parse_terms(raw: str) -> tuple[tuple[int, float], ...]:
    """Harmonic terms like '1:-2, 3:0.5'."""
    if not raw.strip():
        return ()
    terms = []
    for part in raw.split(","):
        if ":" not in part:
            raise ConfigError(f"harmonic term {part.strip()!r} is not j:amplitude")
        j, amp = part.split(":", 1)
        terms.append((_parse_int(j.strip()), _parse_float(amp.strip())))
    return tuple(terms)


def _parse_pair(raw: str) -> tuple[int, int]:
    parts = _parse_int_list(raw)
    if len(parts) != 2:
        raise ConfigError(f"expected 'a,s', got {raw!r}")
    return parts[0], parts[1]


def _parse_kind(raw: str) -> str:
    raw = raw.strip()
    if raw not in ("queue", "sojourn"):
        raise ConfigError(f"waiting.kind must be queue or sojourn, got {raw!r}")
    return raw


@dataclass
class RunConfig:
    """Typed view of a parsed configuration file."""

    values: dict

    _SCHEMA = {
        "model.k": (_parse_int, None),
        "model.m": (_parse_int, None),
        "model.arrival.base": (_parse_float, None),
        "model.arrival.cos": (_parse_terms, ()),
        "model.arrival.sin": (_parse_terms, ()),
        "model.service.base": (_parse_float, None),
        "model.service.cos": (_parse_terms, ()),
        "model.service.sin": (_parse_terms, ()),
        "series.order": (_parse_int, 10),
        "series.nodes": (_parse_int, 8),
        "series.panels": (_parse_int, 64),
        "oracle.levels": (_parse_int, 50),
        "oracle.grid": (_parse_int, 512),
        "oracle.tol": (_parse_float, 1e-10),
        "oracle.max_periods": (_parse_int, 500),
        "analyze.levels": (_parse_int_list, (1, 2, 3)),
        "analyze.times": (_parse_int, 16),
        "bounds.levels": (_parse_int_list, (3, 4, 5)),
        "bounds.orders": (_parse_int_list, (3, 5, 10)),
        "bounds.reference": (_parse_int, 40),
        "bounds.times": (_parse_int, 16),
        "waiting.u": (_parse_float, 0.2),
        "waiting.kind": (_parse_kind, "queue"),
        "waiting.horizon": (_parse_float, 3.0),
        "waiting.steps": (_parse_int, 61),
        "busy.level": (_parse_int, 1),
        "busy.phase": (_parse_pair, None),
        "busy.u": (_parse_float, 0.0),
        "busy.horizon": (_parse_float, 5.0),
        "busy.step": (_parse_float, 1.0 / 512),
        "busy.cap": (_parse_int, 40),
        "busy.substeps": (_parse_int, 4),
        "threads": (_parse_int, 1),
    }
    _REQUIRED = ("model.k", "model.m", "model.arrival.base", "model.service.base")

    @classmethod
    def from_text(cls, text: str) -> "RunConfig":
        raw: dict[str, str] = {}
        for lineno, line in enumerate(text.splitlines(), start=1):
            stripped = line.strip()
            if not stripped or stripped.startswith("#"):
                continue
            if "=" not in stripped:
                raise ConfigError(f"line {lineno}: expected key = value")
            key, value = stripped.split("=", 1)
            key = key.strip()
            if key not in cls._SCHEMA:
                raise ConfigError(f"line {lineno}: unknown key {key!r}")
            if key in raw:
                raise ConfigError(f"line {lineno}: duplicate key {key!r}")
            raw[key] = value.strip()

        for key in cls._REQUIRED:
            if key not in raw:
                raise ConfigError(f"missing required key {key!r}")

        values = {}
        for key, (parse, default) in cls._SCHEMA.items():
            if key in raw:
                try:
                    values[key] = parse(raw[key])
                except ConfigError as exc:
                    raise ConfigError(f"key {key!r}: {exc}") from exc
            else:
                values[key] = default
        if values["busy.phase"] is None:
            values["busy.phase"] = (0, 0)
        return cls(values=values)

    @classmethod
    def load(cls, path: str) -> "RunConfig":
        try:
            text = Path(path).read_text()
        except OSError as exc:
            raise ConfigError(f"cannot read config {path!r}: {exc}") from exc
        return cls.from_text(text)

    def __getitem__(self, key: str):
        return self.values[key]

    def spec(self) -> ModelSpec:
        try:
            arrival = RateFunction(
                base=self["model.arrival.base"],
                cos=self["model.arrival.cos"],
                sin=self["model.arrival.sin"],
            )
            service = RateFunction(
                base=self["model.service.base"],
                cos=self["model.service.cos"],
                sin=self["model.service.sin"],
            )
            return ModelSpec(k=self["model.k"], m=self["model.m"],
                             arrival=arrival, service=service)
        except ValueError as exc:
            raise ConfigError(str(exc)) from exc


def _fmt(value) -> str:
    if isinstance(value, (bool, np.bool_)):
        return str(bool(value))
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        return format(float(value), ".17g")
    return str(value)


def _write_csv(path: Path, schema: str, header, rows) -> None:
    with open(path, "w", newline="") as fh:
        fh.write(f"# schema: {schema}\n")
        fh.write(",".join(header) + "\n")
        for row in rows:
            fh.write(",".join(_fmt(v) for v in row) + "\n")


def _write_json(path: Path, payload: dict) -> None:
    with open(path, "w") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True)
        fh.write("\n")


def _time_grid(count: int) -> np.ndarray:
    return np.arange(count) / count


def _map_maybe_parallel(fn, items, threads: int):
    if threads <= 1 or len(items) <= 1:
        return [fn(item) for item in items]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(fn, items))


def cmd_roots(cfg: RunConfig, spec: ModelSpec, out: Path, threads: int) -> None:
    roots = build_root_set(spec, cfg["series.order"])
    rows = [
        (r.n, r.branch, r.y.real, r.y.imag, abs(r.y), r.poly_residual, r.exp_residual)
        for r in roots.roots
    ]
    _write_csv(out / "roots.csv", "roots v1",
               ("n", "branch", "re_y", "im_y", "abs_y",
                "poly_residual", "exp_residual"), rows)


def cmd_oracle(cfg: RunConfig, spec: ModelSpec, out: Path, threads: int) -> None:
    t0 = time.perf_counter()
    dist = integrate_periodic(
        spec, level_cap=cfg["oracle.levels"], grid_size=cfg["oracle.grid"],
        tol=cfg["oracle.tol"], max_periods=cfg["oracle.max_periods"],
    )
    elapsed = time.perf_counter() - t0
    m = spec.m
    rows = []
    for i, t in enumerate(dist.grid):
        for a in range(spec.k):
            rows.append((t, 0, a, -1, dist.idle[i, a]))
        for j in range(1, dist.level_cap + 1):
            for ph in range(spec.phase_count):
                rows.append((t, j, ph // m, ph % m, dist.levels[i, j - 1, ph]))
    _write_csv(out / "distribution.csv", "periodic-distribution v1",
               ("t", "level", "arrival_stage", "service_stage", "probability"),
               rows)

    boundary = extract_boundary(dist)
    brows = []
    for i, t in enumerate(boundary.grid):
        for a in range(spec.k):
            brows.append((t, "idle", a, -1, boundary.idle[i, a]))
        for ph in range(spec.phase_count):
            brows.append((t, "first", ph // m, ph % m, boundary.first[i, ph]))
    _write_csv(out / "boundary.csv", "boundary v1",
               ("t", "kind", "arrival_stage", "service_stage", "value"), brows)

    _write_json(out / "oracle.json", {
        "periods": dist.periods,
        "residual": dist.residual,
        "cap_mass": dist.cap_mass(),
        "level_cap": dist.level_cap,
        "grid_size": dist.grid_size,
        "runtime_seconds": elapsed,
    })


def _series_setup(cfg: RunConfig, spec: ModelSpec):
    t0 = time.perf_counter()
    dist = integrate_periodic(
        spec, level_cap=cfg["oracle.levels"], grid_size=cfg["oracle.grid"],
        tol=cfg["oracle.tol"], max_periods=cfg["oracle.max_periods"],
    )
    oracle_time = time.perf_counter() - t0
    boundary = extract_boundary(dist)
    return dist, boundary, oracle_time


def cmd_analyze(cfg: RunConfig, spec: ModelSpec, out: Path, threads: int) -> None:
    dist, boundary, oracle_time = _series_setup(cfg, spec)
    order = cfg["series.order"]
    t0 = time.perf_counter()
    roots = build_root_set(spec, order)
    ev = SeriesEvaluator(roots, boundary,
                         nodes=cfg["series.nodes"], panels=cfg["series.panels"])
    times = _time_grid(cfg["analyze.times"])
    oracle_levels = dist.levels_at(times)

    def one_level(j):
        series_vals = ev.level_matrix(j, times).real
        oracle_vals = oracle_levels[:, j - 1, :]
        budget = truncation_error_bound(spec, 0.0, j, order,
                                        nodes=cfg["series.nodes"],
                                        panels=cfg["series.panels"])
        return series_vals, oracle_vals, budget

    levels = list(cfg["analyze.levels"])
    for j in levels:
        if not 1 <= j <= dist.level_cap:
            raise ValueError(f"analyze level {j} outside oracle truncation")
    results = _map_maybe_parallel(one_level, levels, threads)
    series_time = time.perf_counter() - t0

    m = spec.m
    rows = []
    sup = {}
    for j, (series_vals, oracle_vals, budget) in zip(levels, results):
        diff = np.abs(series_vals - oracle_vals)
        sup[str(j)] = float(diff.max())
        bound_txt = _fmt(budget.bound) if budget.applicable else "NA"
        for i, t in enumerate(times):
            for ph in range(spec.phase_count):
                rows.append((t, j, ph // m, ph % m,
                             series_vals[i, ph], oracle_vals[i, ph],
                             diff[i, ph], bound_txt))
    _write_csv(out / "levels.csv", "level-comparison v1",
               ("t", "level", "arrival_stage", "service_stage",
                "series", "oracle", "abs_diff", "tail_bound"), rows)
    _write_json(out / "analyze.json", {
        "order": order,
        "sup_error_by_level": sup,
        "oracle_periods": dist.periods,
        "oracle_residual": dist.residual,
        "runtime_seconds": {"oracle": oracle_time, "series": series_time},
    })


def cmd_bounds(cfg: RunConfig, spec: ModelSpec, out: Path, threads: int) -> None:
    _, boundary, _ = _series_setup(cfg, spec)
    times = _time_grid(cfg["bounds.times"])
    reference = build_root_set(spec, cfg["bounds.reference"])
    ev_ref = SeriesEvaluator(reference, boundary,
                             nodes=cfg["series.nodes"], panels=cfg["series.panels"])

    evs = {}
    for q in cfg["bounds.orders"]:
        evs[q] = SeriesEvaluator(build_root_set(spec, q), boundary,
                                 nodes=cfg["series.nodes"],
                                 panels=cfg["series.panels"])

    rows = []
    for j in cfg["bounds.levels"]:
        ref_vals = ev_ref.level_matrix(j, times).real
        for q in cfg["bounds.orders"]:
            measured = float(np.abs(evs[q].level_matrix(j, times).real - ref_vals).max())
            budgets = [truncation_error_bound(spec, t, j, q,
                                              nodes=cfg["series.nodes"],
                                              panels=cfg["series.panels"])
                       for t in times]
            if all(b.applicable for b in budgets):
                bound_txt = _fmt(max(b.bound for b in budgets))
            else:
                bound_txt = "NA"
            rows.append((j, q, bound_txt, measured))
    _write_csv(out / "bounds.csv", "tail-bounds v1",
               ("level", "order", "bound", "measured"), rows)


def cmd_waiting(cfg: RunConfig, spec: ModelSpec, out: Path, threads: int) -> None:
    dist, boundary, _ = _series_setup(cfg, spec)
    roots = build_root_set(spec, cfg["series.order"])
    horizons = np.linspace(0.0, cfg["waiting.horizon"], cfg["waiting.steps"])
    kind = cfg["waiting.kind"]
    u = cfg["waiting.u"]
    series = wait_cdf(spec, roots, boundary, u, horizons, kind=kind,
                      nodes=cfg["series.nodes"], panels=cfg["series.panels"])
    reference = oracle_wait_cdf(spec, dist, u, horizons, kind=kind)
    rows = [
        (t, sv, ov, abs(sv - ov))
        for t, sv, ov in zip(horizons, series.values, reference.values)
    ]
    _write_csv(out / "waiting.csv", "waiting v1",
               ("t", "series", "oracle", "abs_diff"), rows)
    _write_json(out / "waiting.json", {
        "kind": kind,
        "u": u,
        "order": cfg["series.order"],
        "sup_diff": float(np.abs(series.values - reference.values).max()),
    })


def cmd_busy(cfg: RunConfig, spec: ModelSpec, out: Path, threads: int) -> None:
    level = cfg["busy.level"]
    phase = cfg["busy.phase"]
    vol = busy_period_cdf(spec, level, phase, u=cfg["busy.u"],
                          horizon=cfg["busy.horizon"], step=cfg["busy.step"])
    ode = busy_oracle(spec, level, phase, u=cfg["busy.u"],
                      horizon=cfg["busy.horizon"], step=cfg["busy.step"],
                      level_cap=cfg["busy.cap"], substeps=cfg["busy.substeps"])
    header = ["t"]
    header += [f"volterra_a{a}" for a in range(spec.k)]
    header += [f"ode_a{a}" for a in range(spec.k)]
    header += ["volterra_total", "ode_total"]
    vt, ot = vol.total(), ode.total()
    rows = []
    for i, t in enumerate(vol.times):
        rows.append((t, *vol.values[i], *ode.values[i], vt[i], ot[i]))
    _write_csv(out / "busy.csv", "busy-period v1", header, rows)
    _write_json(out / "busy.json", {
        "level": level,
        "phase": list(divmod(vol.phase, spec.m)),
        "u": cfg["busy.u"],
        "step": vol.step,
        "sup_diff": float(np.abs(vt - ot).max()),
        "off_support": vol.off_support,
        "cap_mass": ode.cap_mass,
    })


def cmd_compare(cfg: RunConfig, spec: ModelSpec, out: Path, threads: int) -> None:
    dist, boundary, _ = _series_setup(cfg, spec)
    roots = build_root_set(spec, cfg["series.order"])
    ev = SeriesEvaluator(roots, boundary,
                         nodes=cfg["series.nodes"], panels=cfg["series.panels"])
    times = _time_grid(cfg["analyze.times"])
    oracle_levels = dist.levels_at(times)
    levels = {}
    for j in cfg["analyze.levels"]:
        diff = np.abs(ev.level_matrix(j, times).real - oracle_levels[:, j - 1, :])
        levels[str(j)] = float(diff.max())

    horizons = np.linspace(0.0, cfg["waiting.horizon"], cfg["waiting.steps"])
    u = cfg["waiting.u"]
    waits = {}
    for kind in ("queue", "sojourn"):
        series = wait_cdf(spec, roots, boundary, u, horizons, kind=kind,
                          nodes=cfg["series.nodes"], panels=cfg["series.panels"])
        reference = oracle_wait_cdf(spec, dist, u, horizons, kind=kind)
        waits[kind] = float(np.abs(series.values - reference.values).max())

    _write_json(out / "compare.json", {
        "order": cfg["series.order"],
        "levels_sup_diff": levels,
        "waiting_sup_diff": waits,
        "waiting_u": u,
    })


_COMMANDS = {
    "analyze": cmd_analyze,
    "roots": cmd_roots,
    "oracle": cmd_oracle,
    "bounds": cmd_bounds,
    "waiting": cmd_waiting,
    "busy": cmd_busy,
    "compare": cmd_compare,
}


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="ekemq",
        description="Periodic Erlang-k/Erlang-m/1 queue computations",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for name in _COMMANDS:
        p = sub.add_parser(name)
        p.add_argument("--config", required=True, help="path to key=value config")
        p.add_argument("--out", default="out", help="output directory")
        p.add_argument("--threads", type=int, default=None,
                       help="parallel workers for independent work items")
        if name == "waiting":
            p.add_argument("--u", type=float, default=None,
                           help="override waiting.u")
            p.add_argument("--kind", choices=("queue", "sojourn"), default=None,
                           help="override waiting.kind")
        if name == "busy":
            p.add_argument("--j", type=int, default=None, help="override busy.level")
            p.add_argument("--u", type=float, default=None, help="override busy.u")

    args = parser.parse_args(argv)

    try:
        cfg = RunConfig.load(args.config)
        if getattr(args, "u", None) is not None:
            key = "waiting.u" if args.command == "waiting" else "busy.u"
            cfg.values[key] = float(args.u)
        if getattr(args, "kind", None) is not None:
            cfg.values["waiting.kind"] = args.kind
        if getattr(args, "j", None) is not None:
            cfg.values["busy.level"] = int(args.j)
        threads = args.threads if args.threads is not None else cfg["threads"]
        if threads < 1:
            raise ConfigError("threads must be >= 1")
        spec = cfg.spec()
    except ConfigError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return 2

    out = Path(args.out)
    try:
        out.mkdir(parents=True, exist_ok=True)
        _COMMANDS[args.command](cfg, spec, out, threads)
    except Exception as exc:  # noqa: BLE001 - boundary of the process
        kind = f"{type(exc).__module__}.{type(exc).__qualname__}"
        print(f"numerical failure in {args.command}: {kind}: {exc}", file=sys.stderr)
        return 3
    return 0


if __name__ == "__main__":
    sys.exit(main())
