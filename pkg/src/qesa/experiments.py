"""
Seeded desk-scale experiments built from the library primitives.

Each function is deterministic given its ``seed``. Work is split into
independent per-graph tasks so that :func:`run_tasks` can spread them over
processes; results are always returned in task order.
"""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from typing import Callable, Optional, Sequence

import numpy as np

from .annealer import (CoolingSchedule, EnergyParams, anneal, random_init_matched_occupation,
                       run_seed, select_warm_start)
from .graph import Graph, exact_mis, generate_kings_graph, maximum_independent_sets
from .quantum import AtomRegister, C6_N70, TWO_PI, evolve, qe_schedule, sample


def run_tasks(fn: Callable, tasks: Sequence, workers: int = 1) -> list:
    """Map ``fn`` over ``tasks``, optionally in a process pool; order is preserved."""
    if workers <= 1 or len(tasks) <= 1:
        return [fn(t) for t in tasks]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, tasks))


def diluted_kings_graphs(count: int, n_min: int, n_max: int, rows: int = 5, cols: int = 5,
                         fill_range=(0.5, 0.64), spacing: float = 5.3, seed: int = 0) -> list:
    """``count`` random King's graphs with ``n_min <= n <= n_max`` and at least one edge."""
    rng = np.random.default_rng(seed)
    graphs = []
    attempts = 0
    while len(graphs) < count:
        attempts += 1
        if attempts > 1000 * max(count, 1):
            raise ValueError("could not draw graphs in the requested size range")
        fill = float(rng.uniform(*fill_range))
        g = generate_kings_graph(rows, cols, fill, spacing, seed=int(rng.integers(2**31)))
        if n_min <= g.n <= n_max and g.n_edges > 0:
            graphs.append(g)
    return graphs


def qe_samples(graph: Graph, shots: int = 1000, seed: int = 0, omega: float = TWO_PI,
               c6: float = C6_N70):
    """Simulated quench-evolution measurement shots for ``graph``."""
    psi = evolve(AtomRegister(graph, c6=c6), qe_schedule(graph, omega=omega))
    return sample(psi, shots, seed)


# ---------------------------------------------------------------------------
# warm start versus matched random start

@dataclass(frozen=True)
class AdvantageTask:
    graph: Graph
    graph_index: int
    runs: int
    seed: int
    shots: int = 1000
    policy: str = "best_alpha"
    epoch_fraction: float = 0.5
    schedule_epochs_per_vertex: int = 100
    t_initial: float = 2.0
    epoch_unit: str = "update"


def _advantage_one(task: AdvantageTask) -> list:
    g = task.graph
    mis = exact_mis(g).size
    shots = qe_samples(g, task.shots, seed=run_seed(task.seed, 10_000 + task.graph_index))
    warm = select_warm_start(shots, g, mis, task.policy)
    pool = warm if isinstance(warm, list) else None
    schedule = CoolingSchedule(t_initial=task.t_initial,
                               epochs_max=task.schedule_epochs_per_vertex * g.n)
    stop = max(1, math.ceil(task.epoch_fraction * g.n))
    pairs = []
    for k in range(task.runs):
        sd = run_seed(task.seed, task.graph_index * 100_000 + k)
        rng = np.random.default_rng(sd)
        w = pool[int(rng.integers(len(pool)))] if pool is not None else warm
        rnd = random_init_matched_occupation(g.n, int(w.sum()), int(rng.integers(2**63)))
        run_sd = int(rng.integers(2**63))
        common = dict(schedule=schedule, mis_size=mis, seed=run_sd, stop_epoch=stop,
                      epoch_unit=task.epoch_unit)
        a_w = anneal(g, w, **common).alpha_at(stop)
        a_r = anneal(g, rnd, **common).alpha_at(stop)
        pairs.append((a_w, a_r))
    return pairs


def warm_start_advantage(graphs: Sequence[Graph], runs_per_graph: int = 10, seed: int = 0,
                         workers: int = 1, **options) -> np.ndarray:
    """Paired alpha values (warm start, matched random start) after ``epoch_fraction * n`` epochs.

    Both arms of a pair share the annealing seed. ``options`` are forwarded
    to :class:`AdvantageTask` (``policy``, ``epoch_fraction``, ``shots``, ...).
    """
    tasks = [AdvantageTask(g, i, runs_per_graph, seed, **options) for i, g in enumerate(graphs)]
    results = run_tasks(_advantage_one, tasks, workers)
    return np.array([p for r in results for p in r], dtype=float).reshape(-1, 2)


# ---------------------------------------------------------------------------
# epoch-ratio trend

@dataclass(frozen=True)
class TrendTask:
    graph: Graph
    graph_index: int
    runs: int
    seed: int
    target_alpha: float = 0.95
    schedule_epochs_per_vertex: int = 100
    t_initial: float = 2.0
    epoch_unit: str = "update"
    max_mis_count: int = 20_000


def _trend_one(task: TrendTask) -> list:
    g = task.graph
    targets = maximum_independent_sets(g, max_vertices=max(40, g.n), max_count=task.max_mis_count)
    mis = int(targets[0].sum())
    schedule = CoolingSchedule(t_initial=task.t_initial,
                               epochs_max=task.schedule_epochs_per_vertex * g.n)
    records = []
    for k in range(task.runs):
        sd = run_seed(task.seed, task.graph_index * 100_000 + k)
        rng = np.random.default_rng(sd)
        init = rng.integers(0, 2, size=g.n)
        records.append(anneal(g, init, schedule, EnergyParams(), task.target_alpha, mis,
                              int(rng.integers(2**63)), graph_id=f"g{task.graph_index:03d}",
                              init_kind="explicit", targets=targets, epoch_unit=task.epoch_unit))
    return records


def ratio_trend_records(graphs: Sequence[Graph], runs_per_graph: int = 30, seed: int = 0,
                        workers: int = 1, **options) -> list:
    """Random-start annealing records with Hamming distances to the nearest MIS recorded
    at every alpha crossing, for the SA-only epoch-ratio pipeline."""
    tasks = [TrendTask(g, i, runs_per_graph, seed, **options) for i, g in enumerate(graphs)]
    return [r for batch in run_tasks(_trend_one, tasks, workers) for r in batch]


def perturbed_configuration(config, flips: int, seed: Optional[int] = None) -> np.ndarray:
    """Copy of ``config`` with ``flips`` distinct bits inverted."""
    x = np.array(config, dtype=np.int8)
    if not 0 <= flips <= len(x):
        raise ValueError("flips must lie in [0, n]")
    rng = np.random.default_rng(seed)
    x[rng.choice(len(x), size=flips, replace=False)] ^= 1
    return x
