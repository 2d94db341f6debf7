"""
Command-line pipeline: graph generation, quantum warm starts, annealing batches
and analysis. Commands talk to each other only through files.

Exit codes: 0 success, 2 input or validation error, 3 resource limit.
"""

from __future__ import annotations

import argparse
import csv
import json
import math
import os
import sys
from dataclasses import dataclass
from pathlib import Path
from typing import Optional

import numpy as np

from . import __version__
from .analysis import (REFERENCE_A0, REFERENCE_B, REFERENCE_C_US, REFERENCE_D, ScalingFit,
                       advantage_fraction, build_ratio_points, extrapolate_nc, fit_epoch_ratio,
                       fit_ets, fit_t_step, read_ratio_points, write_fit, write_ratio_points)
from .annealer import (EPOCH_UNITS, CoolingSchedule, EnergyParams, anneal,
                       random_init_matched_occupation, read_records, run_seed, select_warm_start,
                       write_records)
from .exceptions import ResourceLimitError
from .experiments import run_tasks
from .graph import (build_unit_disk_edges, exact_mis, generate_kings_graph, load_graph,
                    maximum_independent_sets, save_graph)
from .quantum import (C6_N70, C6_N71, SIMULATOR_LIMIT, TWO_PI, AtomRegister, aqc_schedule,
                      evolve, load_samples, qe_schedule, sample, save_samples)

OUTPUT_DIR_ENV = "QESA_OUTPUT_DIR"
#: enumerate every MIS for Hamming distances up to this size, else use one witness
HD_ENUMERATION_LIMIT = 40


class InputError(ValueError):
    """Bad flags, config or input files (exit code 2)."""


# ---------------------------------------------------------------------------
# configuration and provenance

@dataclass
class ExperimentConfig:
    """Merged flags and ``--config`` overrides for one command."""

    values: dict

    _PATH_KEYS = ("graph", "warm_start", "sa", "warm", "points", "records", "series",
                  "params", "positions")

    @classmethod
    def from_args(cls, args: argparse.Namespace) -> "ExperimentConfig":
        values = {k: v for k, v in vars(args).items() if k != "func"}
        path = values.pop("config", None)
        if path:
            try:
                with open(path) as fh:
                    overrides = json.load(fh)
            except (OSError, json.JSONDecodeError) as exc:
                raise InputError(f"cannot read config {path}: {exc}") from exc
            if not isinstance(overrides, dict):
                raise InputError("config file must hold a JSON object")
            for key, val in overrides.items():
                key = key.replace("-", "_")
                if key not in values:
                    raise InputError(f"config key {key!r} is not an option of {args.command}")
                values[key] = val
        cfg = cls(values)
        cfg.validate()
        return cfg

    def validate(self) -> None:
        v = self.values
        for key in self._PATH_KEYS:
            paths = v.get(key)
            for p in paths if isinstance(paths, list) else [paths]:
                if p is not None and not Path(p).exists():
                    raise InputError(f"{key} file not found: {p}")
        target = v.get("target")
        if target is not None and not 0 < target <= 1:
            raise InputError("alpha target must lie in (0, 1]")
        if "seed" in v and v["seed"] is None:
            raise InputError("a master seed is required")

    def __getattr__(self, name):
        try:
            return self.values[name]
        except KeyError:
            raise AttributeError(name) from None

    def provenance(self) -> dict:
        flags = {k: v for k, v in sorted(self.values.items()) if k != "command"}
        return {"tool": "qesa", "version": __version__, "command": self.values["command"],
                "flags": flags}

    def output_path(self, name: str) -> Path:
        path = Path(name)
        if not path.is_absolute():
            path = Path(self.values.get("output_dir") or os.environ.get(OUTPUT_DIR_ENV, ".")) / path
        path.parent.mkdir(parents=True, exist_ok=True)
        return path


def _write_json(path: Path, data: dict) -> None:
    with open(path, "w") as fh:
        json.dump(data, fh, indent=1)
        fh.write("\n")


def _write_sidecar(path: Path, cfg: ExperimentConfig) -> None:
    # CSV files carry their provenance in a neighbouring JSON file
    _write_json(Path(str(path) + ".provenance.json"), {"provenance": cfg.provenance()})


def _load_graph(path):
    try:
        return load_graph(path)
    except (OSError, KeyError, TypeError, json.JSONDecodeError) as exc:
        raise InputError(f"cannot read graph {path}: {exc}") from exc


def _read_records(paths):
    records = []
    for p in paths if isinstance(paths, list) else [paths]:
        try:
            records.extend(read_records(p))
        except (OSError, KeyError, json.JSONDecodeError) as exc:
            raise InputError(f"cannot read run records {p}: {exc}") from exc
    if not records:
        raise InputError("no run records in input")
    return records


# ---------------------------------------------------------------------------
# gen-graph

def cmd_gen_graph(cfg: ExperimentConfig) -> int:
    if cfg.kind == "kings":
        graph = generate_kings_graph(cfg.rows, cfg.cols, cfg.fill, cfg.spacing, seed=cfg.seed)
    else:
        if cfg.positions is None or cfg.radius is None:
            raise InputError("unit_disk graphs need --positions and --radius")
        with open(cfg.positions) as fh:
            positions = json.load(fh)
        graph = build_unit_disk_edges(positions, cfg.radius)
    out = cfg.output_path(cfg.out)
    save_graph(graph, out, provenance=cfg.provenance())
    print(f"wrote {out}: n={graph.n} edges={graph.n_edges}")
    return 0


# ---------------------------------------------------------------------------
# quantum

def cmd_quantum(cfg: ExperimentConfig) -> int:
    graph = _load_graph(cfg.graph)
    c6 = cfg.c6_value if cfg.c6_value is not None else {"n70": C6_N70, "n71": C6_N71}[cfg.c6]
    register = AtomRegister(graph, c6=c6, interaction_scope=cfg.scope, limit=cfg.limit)
    omega = TWO_PI * cfg.omega_mhz
    if cfg.mode == "aqc":
        schedule = aqc_schedule(cfg.duration, omega_peak=omega,
                                delta_start=TWO_PI * cfg.delta_start_mhz,
                                delta_end=TWO_PI * cfg.delta_end_mhz)
    else:
        schedule = qe_schedule(graph, omega=omega, rise_fall=cfg.rise_fall_ns * 1e-3)
    psi = evolve(register, schedule, dt_max=cfg.dt_max)
    samples = sample(psi, cfg.shots, cfg.seed)
    out = cfg.output_path(cfg.out)
    prov = cfg.provenance()
    prov["mode"] = cfg.mode
    save_samples(samples, out, provenance=prov)
    print(f"wrote {out}: {len(samples.counts)} distinct outcomes, modal {samples.modal()}")
    return 0


# ---------------------------------------------------------------------------
# anneal

def _mis_targets(graph):
    if graph.n <= HD_ENUMERATION_LIMIT:
        return maximum_independent_sets(graph)
    return [exact_mis(graph).witness]


def _anneal_task(task):
    (graph, init, schedule, target, mis, seed, graph_id, kind, targets, keep_going,
     timing, unit) = task
    return anneal(graph, init, schedule, EnergyParams(), target, mis, seed, graph_id=graph_id,
                  init_kind=kind, targets=targets, stop_at_target=not keep_going,
                  timing=timing, epoch_unit=unit)


def cmd_anneal(cfg: ExperimentConfig) -> int:
    graph = _load_graph(cfg.graph)
    targets = _mis_targets(graph)
    mis = int(targets[0].sum())
    samples = load_samples(cfg.warm_start, graph) if cfg.warm_start else None
    matched = cfg.random_matched
    if samples is None and matched is None:
        raise InputError("anneal needs --warm-start and/or --random-matched")
    if samples is None and matched == -1:
        raise InputError("--random-matched without a count needs --warm-start samples")
    if matched is not None and matched != -1 and not 0 <= matched <= graph.n:
        raise InputError("--random-matched count must lie in [0, n]")
    if samples is not None:
        warm_kind = "warm_start_aqc" if _sample_mode(cfg.warm_start) == "aqc" else "warm_start_qe"
        warm = select_warm_start(samples, graph, mis, cfg.policy)
        shots = select_warm_start(samples, graph, mis, "per_shot")
    schedule = CoolingSchedule(cfg.t_initial, cfg.t_final, cfg.cooling,
                               cfg.epochs_max or cfg.epochs_per_vertex * graph.n)
    graph_id = cfg.graph_id or Path(cfg.graph).stem
    tasks = []
    for k in range(cfg.runs):
        rng = np.random.default_rng(run_seed(cfg.seed, k))
        if matched is None:
            init = warm[int(rng.integers(len(warm)))] if isinstance(warm, list) else warm
            kind = warm_kind
        else:
            # occupation from the warm-start shots when available, else from the flag
            occ = int(shots[int(rng.integers(len(shots)))].sum()) if matched == -1 else matched
            init = random_init_matched_occupation(graph.n, occ, int(rng.integers(2**63)))
            kind = "random_matched"
        tasks.append((graph, init, schedule, cfg.target, mis, int(rng.integers(2**63)),
                      graph_id, kind, targets, cfg.continue_after_target, cfg.timing,
                      cfg.epoch_unit))
    records = run_tasks(_anneal_task, tasks, cfg.parallel)
    out = cfg.output_path(cfg.out)
    write_records(records, out, provenance=cfg.provenance())
    hits = [r.epochs_to_target for r in records if r.epochs_to_target is not None]
    print(f"wrote {out}: {len(records)} runs, {len(hits)} reached the target")
    return 0


def _sample_mode(path) -> Optional[str]:
    with open(path) as fh:
        return json.load(fh).get("provenance", {}).get("mode")


# ---------------------------------------------------------------------------
# analyze

def cmd_ratio_points(cfg: ExperimentConfig) -> int:
    sa = _read_records(cfg.sa)
    warm = _read_records(cfg.warm) if cfg.warm else None
    points = build_ratio_points(sa, warm, tuple(cfg.levels), cfg.final, source=cfg.source)
    if not points:
        raise InputError("no ratio points: records share no alpha crossings")
    out = cfg.output_path(cfg.out)
    write_ratio_points(points, out)
    _write_sidecar(out, cfg)
    print(f"wrote {out}: {len(points)} points")
    return 0


def cmd_fit_eq4(cfg: ExperimentConfig) -> int:
    try:
        points = read_ratio_points(cfg.points)
    except (OSError, KeyError, ValueError) as exc:
        raise InputError(f"cannot read ratio points {cfg.points}: {exc}") from exc
    if not points:
        raise InputError("ratio point file is empty")
    fit = fit_epoch_ratio(points)
    out = cfg.output_path(cfg.out)
    resid = out.with_name(out.stem + "_residuals.csv")
    with open(resid, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["hd_over_n", "epoch_ratio", "fitted", "residual"])
        for p in points:
            y_hat = fit(p.hd_over_n)
            w.writerow([repr(p.hd_over_n), repr(p.epoch_ratio), repr(y_hat),
                        repr(p.epoch_ratio - y_hat)])
    _write_sidecar(resid, cfg)
    write_fit(out, "eq4", {"c1": fit.c1, "beta": fit.beta}, fit.r2_adj, fit.n_points,
              resid.name, cfg.provenance())
    print(f"c1={fit.c1:.6g} beta={fit.beta:.6g} r2_adj={fit.r2_adj:.4f}")
    return 0


def _read_series(path):
    with open(path, newline="") as fh:
        rows = [r for r in csv.reader(fh) if r]
    if rows and not _is_number(rows[0][0]):
        rows = rows[1:]
    if not rows:
        raise InputError(f"series file {path} is empty")
    return [(float(r[0]), float(r[1])) for r in rows]


def _is_number(text: str) -> bool:
    try:
        float(text)
        return True
    except ValueError:
        return False


def _series_from_records(records, model):
    by_n = {}
    for rec in records:
        by_n.setdefault(rec.n, []).append(rec)
    series = []
    for n in sorted(by_n):
        recs = by_n[n]
        if model == "eq5":
            hits = [r.epochs_to_target for r in recs if r.epochs_to_target is not None]
            if hits:
                # mean epochs of successful runs divided by the success rate
                series.append((n, float(np.mean(hits)) * len(recs) / len(hits)))
        else:
            times = [r.timing["seconds_per_epoch"] for r in recs if r.timing]
            if times:
                series.append((n, float(np.median(times))))
    return series


def cmd_fit_scaling(cfg: ExperimentConfig) -> int:
    if cfg.series:
        series = _read_series(cfg.series)
    elif cfg.records:
        series = _series_from_records(_read_records(cfg.records), cfg.model)
    else:
        raise InputError("fit-scaling needs --series or --records")
    if cfg.model == "eq5":
        fit = fit_ets(series)
        params = {"a": fit.scale, "b": fit.exponent}
    else:
        fit = fit_t_step(series)
        params = {"c_us": fit.scale, "d": fit.exponent}
    out = cfg.output_path(cfg.out)
    resid = out.with_name(out.stem + "_series.csv")
    with open(resid, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["n", "epochs" if cfg.model == "eq5" else "seconds_per_epoch"])
        for n, val in series:
            w.writerow([repr(n), repr(val)])
    _write_sidecar(resid, cfg)
    write_fit(out, cfg.model, params, fit.r2_adj, len(series), resid.name, cfg.provenance())
    print(" ".join(f"{k}={v:.6g}" for k, v in params.items()) + f" r2_adj={fit.r2_adj:.4f}")
    return 0


def _scaling_from_params(path) -> ScalingFit:
    with open(path) as fh:
        data = json.load(fh)
    p = data.get("params", data)
    a0 = p.get("a0", REFERENCE_A0)
    a = p.get("a", a0 / p.get("divisor", 1.0))
    c = p.get("c_us", p.get("c", REFERENCE_C_US))
    return ScalingFit(a=a, b=p.get("b", REFERENCE_B), c=c, d=p.get("d", REFERENCE_D),
                      label=p.get("label", ""), a0=a0)


def cmd_extrapolate(cfg: ExperimentConfig) -> int:
    if cfg.params:
        fit = _scaling_from_params(cfg.params)
    else:
        fit = ScalingFit(a=cfg.a, b=cfg.b, c=cfg.c_us, d=cfg.d)
    n_c = extrapolate_nc(cfg.budget_seconds, fit)
    if cfg.out:
        _write_json(cfg.output_path(cfg.out), {
            "n_c": n_c, "budget_seconds": cfg.budget_seconds,
            "params": {"a": fit.a, "b": fit.b, "c_us": fit.c, "d": fit.d},
            "t_processing_at_n_c": fit.t_processing(n_c), "provenance": cfg.provenance()})
    print(f"N_c = {n_c}")
    return 0


def cmd_advantage_fraction(cfg: ExperimentConfig) -> int:
    warm = _read_records(cfg.warm)
    sa = _read_records(cfg.sa)
    if len(warm) != len(sa):
        raise InputError("warm and random record files must pair line by line")
    pairs = []
    for w, s in zip(warm, sa):
        if w.n != s.n:
            raise InputError("paired records come from graphs of different size")
        epoch = max(1, math.ceil(cfg.epoch_fraction * w.n))
        pairs.append((w.alpha_at(epoch), s.alpha_at(epoch)))
    frac = advantage_fraction(pairs)
    if cfg.out:
        out = cfg.output_path(cfg.out)
        with open(out, "w", newline="") as fh:
            wr = csv.writer(fh)
            wr.writerow(["alpha_warm", "alpha_random"])
            for a_w, a_s in pairs:
                wr.writerow([repr(a_w), repr(a_s)])
        _write_sidecar(out, cfg)
    print(f"advantage fraction = {frac:.4f} over {len(pairs)} pairs")
    return 0


# ---------------------------------------------------------------------------
# parser

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="qesa", description=__doc__.strip().splitlines()[0])
    parser.add_argument("--version", action="version", version=f"qesa {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    def command(name, func, **kw):
        p = sub.add_parser(name, **kw)
        p.set_defaults(func=func)
        p.add_argument("--config", help="JSON file whose keys override the flags")
        p.add_argument("--output-dir", help=f"directory for relative outputs (default ${OUTPUT_DIR_ENV} or .)")
        return p

    g = command("gen-graph", cmd_gen_graph, help="generate a King's or unit-disk graph")
    g.add_argument("--kind", choices=("kings", "unit_disk"), default="kings")
    g.add_argument("--rows", type=int, default=4)
    g.add_argument("--cols", type=int, default=4)
    g.add_argument("--fill", type=float, default=1.0)
    g.add_argument("--spacing", type=float, default=6.0, help="lattice spacing in um")
    g.add_argument("--positions", help="JSON list of [x, y] (unit_disk)")
    g.add_argument("--radius", type=float, help="blockade radius in um (unit_disk)")
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("--out", default="graph.json")

    q = command("quantum", cmd_quantum, help="simulate AQC or quench evolution and sample")
    q.add_argument("--graph", required=True)
    q.add_argument("--mode", choices=("aqc", "qe"), required=True)
    q.add_argument("--shots", type=int, default=1000)
    q.add_argument("--seed", type=int, default=0)
    q.add_argument("--duration", type=float, default=4.0, help="AQC duration in us")
    q.add_argument("--omega-mhz", type=float, default=1.0, help="peak Rabi frequency / 2pi")
    q.add_argument("--delta-start-mhz", type=float, default=-4.0)
    q.add_argument("--delta-end-mhz", type=float, default=2.0)
    q.add_argument("--rise-fall-ns", type=float, default=50.0)
    q.add_argument("--c6", choices=("n70", "n71"), default="n70")
    q.add_argument("--c6-value", type=float, help="explicit C6 in rad/us um^6")
    q.add_argument("--scope", choices=("all_pairs", "edges_only"), default="all_pairs")
    q.add_argument("--dt-max", type=float, default=1e-3, help="us")
    q.add_argument("--limit", type=int, default=SIMULATOR_LIMIT, help="largest simulated n")
    q.add_argument("--out", default="samples.json")

    a = command("anneal", cmd_anneal, help="batch of simulated-annealing runs")
    a.add_argument("--graph", required=True)
    a.add_argument("--warm-start", help="SampleSet JSON used for warm starts")
    a.add_argument("--policy", choices=("best_alpha", "modal", "per_shot"), default="best_alpha")
    a.add_argument("--random-matched", type=int, nargs="?", const=-1, metavar="K",
                   help="random starts with K occupied vertices (occupations from the "
                        "warm-start shots when K is omitted)")
    a.add_argument("--runs", type=int, default=10)
    a.add_argument("--target", type=float)
    a.add_argument("--continue-after-target", action="store_true")
    a.add_argument("--seed", type=int, default=0)
    a.add_argument("--t-initial", type=float, default=2.0)
    a.add_argument("--t-final", type=float, default=0.03)
    a.add_argument("--cooling", choices=("geometric", "linear"), default="geometric")
    a.add_argument("--epochs-max", type=int)
    a.add_argument("--epochs-per-vertex", type=int, default=100,
                   help="schedule length in units of n when --epochs-max is absent")
    a.add_argument("--epoch-unit", choices=EPOCH_UNITS, default="update")
    a.add_argument("--graph-id")
    a.add_argument("--parallel", type=int, default=1)
    a.add_argument("--timing", action="store_true")
    a.add_argument("--out", default="runs.jsonl")

    an = sub.add_parser("analyze", help="ratio points, fits and extrapolation")
    asub = an.add_subparsers(dest="analysis", required=True)

    def analysis(name, func, **kw):
        p = asub.add_parser(name, **kw)
        p.set_defaults(func=func, command=f"analyze {name}")
        p.add_argument("--config")
        p.add_argument("--output-dir")
        return p

    r = analysis("ratio-points", cmd_ratio_points)
    r.add_argument("--sa", nargs="+", required=True, help="random-start run records")
    r.add_argument("--warm", nargs="+", help="warm-start run records (omit for the SA-only model)")
    r.add_argument("--levels", type=float, nargs="+", default=[0.85, 0.88, 0.91])
    r.add_argument("--final", type=float, default=0.95)
    r.add_argument("--source", choices=("model_pipeline", "aqc", "qe"))
    r.add_argument("--out", default="ratio_points.csv")

    f = analysis("fit-eq4", cmd_fit_eq4)
    f.add_argument("--points", required=True)
    f.add_argument("--out", default="fit_eq4.json")

    s = analysis("fit-scaling", cmd_fit_scaling)
    s.add_argument("--model", choices=("eq5", "eq6"), required=True)
    s.add_argument("--series", help="CSV of n,value")
    s.add_argument("--records", nargs="+", help="run records with targets (eq5) or timing (eq6)")
    s.add_argument("--out", default="fit_scaling.json")

    e = analysis("extrapolate", cmd_extrapolate)
    e.add_argument("--budget-seconds", type=float, default=86400.0)
    e.add_argument("--params", help="JSON with a (or a0 and divisor), b, c_us, d")
    e.add_argument("--a", type=float, default=REFERENCE_A0)
    e.add_argument("--b", type=float, default=REFERENCE_B)
    e.add_argument("--c-us", type=float, default=REFERENCE_C_US)
    e.add_argument("--d", type=float, default=REFERENCE_D)
    e.add_argument("--out")

    v = analysis("advantage-fraction", cmd_advantage_fraction)
    v.add_argument("--warm", nargs="+", required=True)
    v.add_argument("--sa", nargs="+", required=True)
    v.add_argument("--epoch-fraction", type=float, default=0.5)
    v.add_argument("--out")
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        cfg = ExperimentConfig.from_args(args)
        return args.func(cfg)
    except ResourceLimitError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3
    except (InputError, ValueError, KeyError, OSError, json.JSONDecodeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
