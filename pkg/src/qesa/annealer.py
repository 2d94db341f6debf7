"""
Rydberg-style simulated annealing for maximum independent set.

The proposal kernel has three moves: add a free vertex, swap an occupied
vertex's occupation with a neighbour (each neighbour in ascending index order is
tried with probability 1/8, first success wins) or remove the vertex. Proposals
are accepted with the Metropolis rule on the cost energy

    E(s) = -delta * sum_j n_j + u * sum_(j,k) n_j n_k

By default one epoch is a single proposal at a uniformly random vertex and the
temperature is lowered after every update. The ``"sweep"`` epoch unit groups
``n`` proposals (vertices drawn with replacement) at one temperature.
"""

from __future__ import annotations

import json
import math
import time
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .graph import (Graph, approximation_ratio, as_config, hamming_distance,
                    min_hamming_to_set, to_bitstring, violating_edges)

SWAP_PROBABILITY = 1.0 / 8.0
DEFAULT_T_INITIAL = 2.0
DEFAULT_T_FINAL = 0.03
INIT_KINDS = ("random_matched", "warm_start_aqc", "warm_start_qe", "explicit")
#: alpha levels whose first-crossing epochs are stored with every run record
CROSSING_LEVELS = (0.85, 0.88, 0.91, 0.95, 0.99, 1.0)
EPOCH_UNITS = ("update", "sweep")
DEFAULT_EPOCH_UNIT = "update"
_DRAW_BLOCK = 1024


@dataclass(frozen=True)
class EnergyParams:
    delta: float = 1.0
    u: float = 11.0

    def __post_init__(self):
        if not 0 < self.delta < self.u:
            raise ValueError("energy parameters require 0 < delta < u")


@dataclass(frozen=True)
class CoolingSchedule:
    """Temperature per epoch, from ``t_initial`` down to ``t_final`` at ``epochs_max``."""

    t_initial: float = DEFAULT_T_INITIAL
    t_final: float = DEFAULT_T_FINAL
    kind: str = "geometric"
    epochs_max: int = 2000

    def __post_init__(self):
        if self.t_initial <= 0 or self.t_final <= 0:
            raise ValueError("temperatures must be positive")
        if self.t_final > self.t_initial:
            raise ValueError("t_final must not exceed t_initial")
        if self.epochs_max < 1:
            raise ValueError("epochs_max must be >= 1")
        if self.kind not in ("geometric", "linear"):
            raise ValueError(f"unknown schedule kind {self.kind!r}")

    def temperatures(self) -> np.ndarray:
        """Temperature used during epochs 1..epochs_max."""
        if self.epochs_max == 1:
            return np.array([self.t_final])
        if self.kind == "geometric":
            return np.geomspace(self.t_initial, self.t_final, self.epochs_max)
        return np.linspace(self.t_initial, self.t_final, self.epochs_max)


def mis_energy(graph: Graph, config, params: EnergyParams = EnergyParams()) -> float:
    x = as_config(config, graph.n)
    return -params.delta * int(x.sum()) + params.u * violating_edges(graph, x)


@dataclass(frozen=True)
class Proposal:
    kind: str                  # "add", "swap", "remove" or "null"
    flipped_bits: tuple = ()
    partner: Optional[int] = None


def _choose_move(occupied: int, free: bool, neighbors: Sequence[int], swap_draws) -> tuple:
    """Shared proposal logic. ``swap_draws[k]`` is the uniform for the k-th neighbour."""
    if not occupied:
        return ("add", None) if free else ("null", None)
    for k, j in enumerate(neighbors):
        if swap_draws[k] < SWAP_PROBABILITY:
            return "swap", j
    return "remove", None


def propose_update(graph: Graph, config, vertex: int, rng: np.random.Generator) -> Proposal:
    """Draw one proposal at ``vertex`` for the current configuration."""
    if not 0 <= vertex < graph.n:
        raise ValueError("vertex out of range")
    x = as_config(config, graph.n)
    nb = graph.neighbors[vertex]
    free = not any(x[j] for j in nb)
    draws = rng.random(len(nb)) if x[vertex] else ()
    kind, j = _choose_move(int(x[vertex]), free, nb, draws)
    if kind == "add" or kind == "remove":
        return Proposal(kind, (vertex,))
    if kind == "swap":
        flipped = (vertex, j) if x[j] == 0 else ()
        return Proposal(kind, flipped, partner=j)
    return Proposal("null")


def metropolis_accept(delta_e: float, temperature: float, rng: np.random.Generator) -> bool:
    """Accept with probability ``min(1, exp(-delta_e / temperature))``."""
    if temperature <= 0:
        raise ValueError("temperature must be positive")
    if delta_e <= 0:
        return True
    return bool(rng.random() < math.exp(-delta_e / temperature))


def random_init_matched_occupation(n: int, n_occupied: int, seed=None) -> np.ndarray:
    """Uniformly random configuration with exactly ``n_occupied`` ones."""
    if not 0 <= n_occupied <= n:
        raise ValueError("n_occupied must lie in [0, n]")
    rng = np.random.default_rng(seed)
    x = np.zeros(n, dtype=np.int8)
    x[rng.choice(n, size=n_occupied, replace=False)] = 1
    return x


class AnnealState:
    """Mutable chain state with incremental energy bookkeeping."""

    def __init__(self, graph: Graph, config, params: EnergyParams):
        self.graph = graph
        self.params = params
        self.nbrs = graph.neighbors
        self.x = [int(b) for b in as_config(config, graph.n)]
        self.cnt = [sum(self.x[j] for j in nb) for nb in self.nbrs]
        self.pop = sum(self.x)
        self.viol = sum(self.x[i] & self.x[j] for i, j in graph.edges)

    @property
    def energy(self) -> float:
        return -self.params.delta * self.pop + self.params.u * self.viol

    def config(self) -> np.ndarray:
        return np.array(self.x, dtype=np.int8)

    def _set(self, v: int, value: int) -> None:
        d = 1 if value else -1
        self.x[v] = value
        self.pop += d
        self.viol += d * self.cnt[v]
        for w in self.nbrs[v]:
            self.cnt[w] += d

    def step(self, vertex: int, swap_draws, accept_draw: float, temperature: float) -> tuple:
        """One proposal/acceptance at ``vertex``; returns (kind, delta_e, accepted)."""
        x, cnt, p = self.x, self.cnt, self.params
        i = vertex
        kind, j = _choose_move(x[i], cnt[i] == 0, self.nbrs[i], swap_draws)
        if kind == "null":
            return kind, 0.0, False
        if kind == "add":
            de = -p.delta
        elif kind == "remove":
            de = p.delta - p.u * cnt[i]
        elif x[j]:
            return kind, 0.0, True
        else:
            # i leaves, j enters; j's count includes i before the move
            de = p.u * ((cnt[j] - 1) - cnt[i])
        if de > 0 and not accept_draw < math.exp(-de / temperature):
            return kind, de, False
        if kind == "add":
            self._set(i, 1)
        elif kind == "remove":
            self._set(i, 0)
        else:
            self._set(i, 0)
            self._set(j, 1)
        return kind, de, True


@dataclass
class RunRecord:
    graph_id: str
    init_kind: str
    seed: int
    alpha_trajectory: list
    epochs_to_target: Optional[int]
    final_config: np.ndarray
    initial_hd_to_mis: int
    target_alpha: Optional[float] = None
    initial_config: Optional[np.ndarray] = None
    mis_size: Optional[int] = None
    crossings: dict = field(default_factory=dict)
    timing: Optional[dict] = None

    def __post_init__(self):
        if not self.alpha_trajectory:
            raise ValueError("alpha trajectory must be non-empty")
        if self.init_kind not in INIT_KINDS:
            raise ValueError(f"unknown init kind {self.init_kind!r}")

    @property
    def n(self) -> int:
        return len(self.final_config)

    def first_epoch_reaching(self, level: float) -> Optional[int]:
        """First recorded epoch with alpha >= level, or None."""
        for lv, entry in self.crossings.items():
            if abs(lv - level) < 1e-12:
                return entry[0] if entry is not None else None
        for epoch, alpha in self.alpha_trajectory:
            if alpha >= level - 1e-12:
                return epoch
        return None

    def hd_at_crossing(self, level: float) -> Optional[int]:
        for lv, entry in self.crossings.items():
            if abs(lv - level) < 1e-12:
                return entry[1] if entry is not None else None
        return None

    def alpha_at(self, epoch: int) -> float:
        """Alpha after ``epoch`` epochs (last recorded value at or before it)."""
        value = self.alpha_trajectory[0][1]
        for e, a in self.alpha_trajectory:
            if e > epoch:
                break
            value = a
        return value

    def to_json(self) -> dict:
        traj = [[e, a] for e, a in self.alpha_trajectory if e <= 100 or e % 10 == 0]
        last = self.alpha_trajectory[-1]
        if traj[-1][0] != last[0]:
            traj.append([last[0], last[1]])
        out = {
            "graph_id": self.graph_id,
            "init_kind": self.init_kind,
            "seed": self.seed,
            "target_alpha": self.target_alpha,
            "epochs_to_target": self.epochs_to_target,
            "initial_hd": self.initial_hd_to_mis,
            "alpha_trajectory": traj,
            "final_config": to_bitstring(self.final_config),
            "initial_config": None if self.initial_config is None else to_bitstring(self.initial_config),
            "mis_size": self.mis_size,
            "crossings": {f"{lv:g}": (None if v is None else list(v)) for lv, v in self.crossings.items()},
        }
        if self.timing is not None:
            out["timing"] = self.timing
        return out

    @classmethod
    def from_json(cls, data: dict) -> "RunRecord":
        init = data.get("initial_config")
        return cls(
            graph_id=data["graph_id"],
            init_kind=data["init_kind"],
            seed=int(data["seed"]),
            alpha_trajectory=[(int(e), float(a)) for e, a in data["alpha_trajectory"]],
            epochs_to_target=data.get("epochs_to_target"),
            final_config=as_config(data["final_config"]),
            initial_hd_to_mis=int(data["initial_hd"]),
            target_alpha=data.get("target_alpha"),
            initial_config=None if init is None else as_config(init),
            mis_size=data.get("mis_size"),
            crossings={float(k): (None if v is None else tuple(v))
                       for k, v in (data.get("crossings") or {}).items()},
            timing=data.get("timing"),
        )


def write_records(records, path, provenance: Optional[dict] = None) -> None:
    with open(path, "w") as fh:
        for rec in records:
            row = rec.to_json()
            if provenance is not None:
                row["provenance"] = provenance
            fh.write(json.dumps(row) + "\n")


def read_records(path) -> list:
    with open(path) as fh:
        return [RunRecord.from_json(json.loads(line)) for line in fh if line.strip()]


def proposals_per_epoch(n: int, epoch_unit: str) -> int:
    """Proposal attempts in one epoch: 1 for ``"update"``, ``n`` for ``"sweep"``."""
    if epoch_unit == "update":
        return 1
    if epoch_unit == "sweep":
        return max(1, n)
    raise ValueError(f"unknown epoch unit {epoch_unit!r}")


def anneal(graph: Graph, init, schedule: CoolingSchedule = CoolingSchedule(),
           params: EnergyParams = EnergyParams(), target_alpha: Optional[float] = None,
           mis_size: int = 1, seed=None, *, graph_id: str = "", init_kind: str = "explicit",
           targets: Optional[Sequence] = None, crossing_levels: Sequence[float] = CROSSING_LEVELS,
           stop_at_target: bool = True, timing: bool = False,
           epoch_unit: str = DEFAULT_EPOCH_UNIT, stop_epoch: Optional[int] = None) -> RunRecord:
    """Run one simulated-annealing trajectory.

    Parameters
    ----------
    init : array_like
        Initial configuration (length ``graph.n``).
    target_alpha : float, optional
        Stop at the first epoch whose alpha reaches this value (if
        ``stop_at_target``). Without a target the chain runs for
        ``schedule.epochs_max`` epochs.
    mis_size : int
        Exact MIS size used to normalise alpha.
    targets : sequence of configurations, optional
        Maximum independent sets used for Hamming distances. The distance to
        the nearest one is recorded.
    epoch_unit : {"update", "sweep"}
        ``"update"``: one proposal per epoch, the temperature drops after every
        update. ``"sweep"``: ``n`` proposals per epoch at a fixed temperature.
    stop_epoch : int, optional
        Truncate the run after this many epochs without changing the
        temperature sequence (which is always laid out over ``epochs_max``).
    """
    if mis_size < 1:
        raise ValueError("mis_size must be positive")
    n = graph.n
    x0 = as_config(init, n)
    per_epoch = proposals_per_epoch(n, epoch_unit)
    rng = np.random.default_rng(seed)
    state = AnnealState(graph, x0, params)
    temps = schedule.temperatures().tolist()
    max_deg = max(1, int(graph.degrees.max()) if n else 1)
    targets = np.asarray(targets, dtype=np.int8) if targets is not None and len(targets) else []

    def hd_now():
        return min_hamming_to_set(state.x, targets) if len(targets) else -1

    levels = sorted(crossing_levels)
    crossings = {lv: None for lv in levels}

    def check_crossings(epoch, alpha):
        for lv in levels:
            if crossings[lv] is None and alpha >= lv - 1e-12:
                crossings[lv] = (epoch, hd_now())

    alpha = (state.pop - state.viol) / mis_size
    trajectory = [(0, alpha)]
    check_crossings(0, alpha)
    hit = 0 if target_alpha is not None and alpha >= target_alpha else None
    seconds_per_epoch = None
    if not (hit is not None and stop_at_target):
        started = time.perf_counter()
        epochs_run = 0
        # random numbers are drawn in fixed-size blocks, independent of the epoch unit
        block = max(per_epoch, _DRAW_BLOCK)
        verts = acc = swaps = ()
        pos = block
        step = state.step
        last = schedule.epochs_max if stop_epoch is None else min(stop_epoch, schedule.epochs_max)
        for epoch in range(1, last + 1):
            epochs_run = epoch
            temperature = temps[epoch - 1]
            for _ in range(per_epoch):
                if pos == block:
                    verts = rng.integers(0, n, size=block).tolist()
                    acc = rng.random(block).tolist()
                    swaps = rng.random((block, max_deg)).tolist()
                    pos = 0
                step(verts[pos], swaps[pos], acc[pos], temperature)
                pos += 1
            alpha = (state.pop - state.viol) / mis_size
            trajectory.append((epoch, alpha))
            check_crossings(epoch, alpha)
            if target_alpha is not None and hit is None and alpha >= target_alpha:
                hit = epoch
                if stop_at_target:
                    break
        if timing:
            # mean wall-clock time per epoch, including alpha bookkeeping
            seconds_per_epoch = (time.perf_counter() - started) / max(epochs_run, 1)
    return RunRecord(
        graph_id=graph_id, init_kind=init_kind, seed=int(seed) if seed is not None else -1,
        alpha_trajectory=trajectory, epochs_to_target=hit, final_config=state.config(),
        initial_hd_to_mis=min_hamming_to_set(x0, targets) if len(targets) else -1,
        target_alpha=target_alpha, initial_config=x0, mis_size=mis_size,
        crossings=crossings,
        timing={"seconds_per_epoch": seconds_per_epoch} if seconds_per_epoch is not None else None,
    )


def run_seed(master_seed: int, run_index: int) -> int:
    """Independent per-run seed derived from (master_seed, run_index)."""
    return int(np.random.SeedSequence([int(master_seed), int(run_index)]).generate_state(1)[0])


def select_warm_start(samples, graph: Graph, mis_size: int, policy: str = "best_alpha"):
    """Pick warm-start configuration(s) from measured samples.

    ``best_alpha`` returns the shot with the highest alpha (ties: lowest
    bitstring value), ``modal`` the most frequent shot (ties: lowest bitstring),
    ``per_shot`` a list with every shot repeated by its count.
    """
    counts = samples.counts if hasattr(samples, "counts") else dict(samples)
    counts = {k: v for k, v in counts.items() if v > 0}
    if not counts:
        raise ValueError("empty sample set")
    keys = sorted(counts)  # lexicographic == numeric for equal-length bitstrings
    if policy == "best_alpha":
        best = max(keys, key=lambda k: (approximation_ratio(graph, k, mis_size), -int(k, 2)))
        return as_config(best, graph.n)
    if policy == "modal":
        best = max(keys, key=lambda k: (counts[k], -int(k, 2)))
        return as_config(best, graph.n)
    if policy == "per_shot":
        return [as_config(k, graph.n) for k in keys for _ in range(counts[k])]
    raise ValueError(f"unknown warm-start policy {policy!r}")


__all__ = [
    "EnergyParams", "CoolingSchedule", "Proposal", "RunRecord", "AnnealState",
    "mis_energy", "propose_update", "metropolis_accept", "anneal",
    "random_init_matched_occupation", "select_warm_start", "run_seed",
    "write_records", "read_records", "hamming_distance", "proposals_per_epoch",
    "EPOCH_UNITS", "CROSSING_LEVELS",
]
