"""
Graphs, exact maximum independent sets and solution-quality metrics.

Vertices carry 2D positions in micrometres. For King's and unit-disk graphs the
edge set is exactly the set of pairs closer than (or at) the blockade radius.

Spin configurations are plain ``numpy`` arrays of 0/1 occupation numbers, one
entry per vertex. Vertex 0 is the leftmost character of a bitstring.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterable, Optional, Sequence

import numpy as np

from .exceptions import MISBudgetExceeded

GRAPH_KINDS = ("kings", "unit_disk", "explicit")

#: Relative guard on the King's-graph blockade radius (spacing * sqrt(2) * 1.01).
KINGS_RADIUS_GUARD = 1.01


@dataclass(frozen=True)
class Graph:
    """Immutable simple graph with vertex positions.

    Parameters
    ----------
    n : int
        Number of vertices.
    positions : ndarray, shape (n, 2)
        Vertex coordinates in micrometres. Must be pairwise distinct.
    edges : tuple of (int, int)
        Canonical edges, ``i < j``, sorted lexicographically.
    blockade_radius : float or None
        Distance threshold that generated the edges, if any.
    kind : {"kings", "unit_disk", "explicit"}
    seed : int or None
        Seed used by a random generator, recorded for provenance.
    """

    n: int
    positions: np.ndarray
    edges: tuple
    blockade_radius: Optional[float] = None
    kind: str = "explicit"
    seed: Optional[int] = None
    _validated: bool = field(default=False, repr=False, compare=False)

    def __post_init__(self):
        pos = np.array(self.positions, dtype=float).reshape(-1, 2)
        pos.setflags(write=False)
        object.__setattr__(self, "positions", pos)
        edges = tuple(sorted({(min(i, j), max(i, j)) for i, j in
                              ((int(a), int(b)) for a, b in self.edges)}))
        object.__setattr__(self, "edges", edges)
        if self.kind not in GRAPH_KINDS:
            raise ValueError(f"unknown graph kind {self.kind!r}")
        if self.n < 0 or pos.shape[0] != self.n:
            raise ValueError("positions must have one row per vertex")
        for i, j in edges:
            if i == j:
                raise ValueError("self-loop in edge list")
            if j >= self.n or i < 0:
                raise ValueError(f"edge ({i}, {j}) out of range for n={self.n}")
        if self.n > 1 and len({tuple(p) for p in pos.tolist()}) != self.n:
            raise ValueError("duplicate vertex positions")

    @classmethod
    def from_edges(cls, n: int, edges: Iterable, positions=None) -> "Graph":
        """Explicit graph; vertices are placed on a unit circle if no positions are given."""
        if positions is None:
            angles = 2 * np.pi * np.arange(n) / max(n, 1)
            positions = np.column_stack([np.cos(angles), np.sin(angles)])
        return cls(n=n, positions=positions, edges=tuple(edges), kind="explicit")

    @cached_property
    def neighbors(self) -> tuple:
        """Sorted neighbour tuples, one per vertex."""
        adj = [[] for _ in range(self.n)]
        for i, j in self.edges:
            adj[i].append(j)
            adj[j].append(i)
        return tuple(tuple(sorted(a)) for a in adj)

    @cached_property
    def edge_array(self) -> np.ndarray:
        arr = np.array(self.edges, dtype=np.int64).reshape(-1, 2)
        arr.setflags(write=False)
        return arr

    @cached_property
    def degrees(self) -> np.ndarray:
        return np.array([len(a) for a in self.neighbors], dtype=np.int64)

    @property
    def n_edges(self) -> int:
        return len(self.edges)

    def to_dict(self) -> dict:
        return {
            "kind": self.kind,
            "n": self.n,
            "positions": [[float(x), float(y)] for x, y in self.positions.tolist()],
            "edges": [[i, j] for i, j in self.edges],
            "blockade_radius": self.blockade_radius,
            "seed": self.seed,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "Graph":
        kind = data.get("kind", "explicit")
        graph = cls(
            n=int(data["n"]),
            positions=np.array(data["positions"], dtype=float).reshape(-1, 2),
            edges=tuple(tuple(e) for e in data["edges"]),
            blockade_radius=data.get("blockade_radius"),
            kind=kind,
            seed=data.get("seed"),
        )
        if kind in ("kings", "unit_disk"):
            expected = _threshold_edges(graph.positions, graph.blockade_radius)
            if expected != graph.edges:
                raise ValueError("edge list does not match the blockade-radius predicate")
        return graph


def save_graph(graph: Graph, path, provenance: Optional[dict] = None) -> None:
    data = graph.to_dict()
    if provenance is not None:
        data["provenance"] = provenance
    with open(path, "w") as fh:
        json.dump(data, fh, indent=1, sort_keys=False)
        fh.write("\n")


def load_graph(path) -> Graph:
    with open(path) as fh:
        return Graph.from_dict(json.load(fh))


def _threshold_edges(positions: np.ndarray, radius: float) -> tuple:
    pos = np.asarray(positions, dtype=float)
    if len(pos) < 2:
        return ()
    diff = pos[:, None, :] - pos[None, :, :]
    dist = np.sqrt((diff ** 2).sum(-1))
    ii, jj = np.nonzero(np.triu(dist <= radius, k=1))
    return tuple(sorted(zip(ii.tolist(), jj.tolist())))


def generate_kings_graph(rows: int, cols: int, fill_fraction: float = 1.0,
                         lattice_spacing: float = 6.0, seed: Optional[int] = None) -> Graph:
    """Random (diluted) King's graph on a square lattice.

    ``ceil(fill_fraction * rows * cols)`` lattice sites are kept, chosen uniformly
    at random with ``seed``. Lateral and diagonal neighbours are connected,
    sites two spacings apart are not.
    """
    if rows < 1 or cols < 1:
        raise ValueError("rows and cols must be >= 1")
    if lattice_spacing <= 0:
        raise ValueError("lattice spacing must be positive")
    n_sites = rows * cols
    keep = math.ceil(fill_fraction * n_sites) if fill_fraction > 0 else 0
    if keep <= 0:
        raise ValueError("empty graph")
    keep = min(keep, n_sites)
    if keep == n_sites:
        sites = np.arange(n_sites)
    else:
        rng = np.random.default_rng(seed)
        sites = np.sort(rng.choice(n_sites, size=keep, replace=False))
    r, c = np.divmod(sites, cols)
    positions = np.column_stack([c * lattice_spacing, r * lattice_spacing]).astype(float)
    radius = lattice_spacing * math.sqrt(2) * KINGS_RADIUS_GUARD
    return Graph(n=keep, positions=positions, edges=_threshold_edges(positions, radius),
                 blockade_radius=radius, kind="kings", seed=seed)


def build_unit_disk_edges(positions, radius: float) -> Graph:
    """Unit-disk graph: edge (i, j) iff ``|p_i - p_j| <= radius``."""
    if radius <= 0:
        raise ValueError("radius must be positive")
    pos = np.asarray(positions, dtype=float).reshape(-1, 2)
    return Graph(n=len(pos), positions=pos, edges=_threshold_edges(pos, radius),
                 blockade_radius=float(radius), kind="unit_disk")


# ---------------------------------------------------------------------------
# spin configurations and metrics

def as_config(bits, n: Optional[int] = None) -> np.ndarray:
    """Coerce ``bits`` (sequence or bitstring) to a 0/1 int8 array, checking the length."""
    if isinstance(bits, str):
        arr = np.frombuffer(bits.encode(), dtype=np.uint8) - ord("0")
        arr = arr.astype(np.int8)
    else:
        arr = np.asarray(bits)
        if arr.ndim != 1:
            raise ValueError("configuration must be one-dimensional")
        arr = arr.astype(np.int8)
    if not np.all((arr == 0) | (arr == 1)):
        raise ValueError("configuration values must be 0 or 1")
    if n is not None and len(arr) != n:
        raise ValueError(f"configuration length {len(arr)} does not match n={n}")
    return arr


def to_bitstring(config) -> str:
    return "".join("1" if b else "0" for b in np.asarray(config).tolist())


def violating_edges(graph: Graph, config) -> int:
    """Number of edges with both endpoints occupied."""
    x = as_config(config, graph.n)
    if graph.n_edges == 0:
        return 0
    e = graph.edge_array
    return int(np.count_nonzero(x[e[:, 0]] & x[e[:, 1]]))


def is_independent(graph: Graph, config) -> bool:
    return violating_edges(graph, config) == 0


def approximation_ratio(graph: Graph, config, mis_size: int) -> float:
    """(occupied vertices - violated edges) / |MIS|. Not clamped; may be negative."""
    if mis_size <= 0:
        raise ValueError("mis_size must be positive")
    x = as_config(config, graph.n)
    return (int(x.sum()) - violating_edges(graph, x)) / mis_size


def hamming_distance(s, t) -> int:
    s = as_config(s)
    t = as_config(t)
    if len(s) != len(t):
        raise ValueError("configurations have different lengths")
    return int(np.count_nonzero(s != t))


def average_degree(graph: Graph) -> float:
    if graph.n < 1:
        raise ValueError("graph has no vertices")
    return 2.0 * graph.n_edges / graph.n


# ---------------------------------------------------------------------------
# exact MIS

@dataclass(frozen=True)
class MisCertificate:
    size: int
    witness: np.ndarray

    def __post_init__(self):
        w = as_config(self.witness)
        w.setflags(write=False)
        object.__setattr__(self, "witness", w)
        if int(w.sum()) != self.size:
            raise ValueError("witness popcount does not match size")


def _masks(graph: Graph) -> list:
    return [sum(1 << j for j in nb) for nb in graph.neighbors]


def _bits(mask: int):
    while mask:
        low = mask & -mask
        yield low.bit_length() - 1
        mask ^= low


def _clique_cover_bound(cand: int, nbr: list) -> int:
    # Greedy clique cover; the number of cliques bounds any independent set in cand.
    cliques = []
    for v in _bits(cand):
        nv = nbr[v]
        for k, cm in enumerate(cliques):
            if cm & nv == cm:
                cliques[k] = cm | (1 << v)
                break
        else:
            cliques.append(1 << v)
    return len(cliques)


class _MISSearch:
    def __init__(self, nbr: list, budget: int):
        self.nbr = nbr
        self.budget = budget
        self.nodes = 0
        self.best_size = 0
        self.best_set = 0

    def run(self, cand: int, chosen: int, size: int) -> None:
        self.nodes += 1
        if self.nodes > self.budget:
            raise MISBudgetExceeded("MIS oracle budget exceeded")
        nbr = self.nbr
        # degree-0 / degree-1 reductions: some maximum set contains such a vertex
        changed = True
        while changed and cand:
            changed = False
            for v in _bits(cand):
                if (nbr[v] & cand).bit_count() <= 1:
                    chosen |= 1 << v
                    size += 1
                    cand &= ~(nbr[v] | (1 << v))
                    changed = True
                    break
        if not cand:
            if size > self.best_size:
                self.best_size, self.best_set = size, chosen
            return
        if size + _clique_cover_bound(cand, nbr) <= self.best_size:
            return
        v = max(_bits(cand), key=lambda u: (nbr[u] & cand).bit_count())
        self.run(cand & ~(nbr[v] | (1 << v)), chosen | (1 << v), size + 1)
        self.run(cand & ~(1 << v), chosen, size)


def _greedy_mis(nbr: list, n: int) -> int:
    cand = (1 << n) - 1
    chosen = 0
    while cand:
        v = min(_bits(cand), key=lambda u: (nbr[u] & cand).bit_count())
        chosen |= 1 << v
        cand &= ~(nbr[v] | (1 << v))
    return chosen


def _mask_to_config(mask: int, n: int) -> np.ndarray:
    return np.array([(mask >> v) & 1 for v in range(n)], dtype=np.int8)


def exact_mis(graph: Graph, max_vertices: int = 150, node_budget: int = 2_000_000) -> MisCertificate:
    """Exact maximum independent set by branch and bound.

    Uses degree-0/1 reductions, max-degree branching and a greedy clique-cover
    upper bound. Raises :class:`MISBudgetExceeded` if more than ``node_budget``
    search nodes are expanded.
    """
    if graph.n > max_vertices:
        raise ValueError(f"graph has {graph.n} vertices, above the MIS oracle limit {max_vertices}")
    if graph.n == 0:
        raise ValueError("empty graph")
    nbr = _masks(graph)
    search = _MISSearch(nbr, node_budget)
    greedy = _greedy_mis(nbr, graph.n)
    search.best_size, search.best_set = greedy.bit_count(), greedy
    search.run((1 << graph.n) - 1, 0, 0)
    return MisCertificate(size=search.best_size, witness=_mask_to_config(search.best_set, graph.n))


def maximum_independent_sets(graph: Graph, max_vertices: int = 40,
                             max_count: int = 100_000) -> list:
    """Enumerate every maximum independent set (small graphs only)."""
    if graph.n > max_vertices:
        raise ValueError(f"enumeration limited to {max_vertices} vertices")
    nbr = _masks(graph)
    best = [exact_mis(graph, max_vertices=max_vertices).size]
    found = []

    def rec(cand, chosen, size):
        # isolated vertices belong to every maximum set of the subproblem
        for v in _bits(cand):
            if not nbr[v] & cand:
                chosen |= 1 << v
                size += 1
                cand &= ~(1 << v)
        if not cand:
            if size == best[0]:
                found.append(chosen)
                if len(found) > max_count:
                    raise MISBudgetExceeded("too many maximum independent sets")
            return
        if size + _clique_cover_bound(cand, nbr) < best[0]:
            return
        v = max(_bits(cand), key=lambda u: (nbr[u] & cand).bit_count())
        rec(cand & ~(nbr[v] | (1 << v)), chosen | (1 << v), size + 1)
        rec(cand & ~(1 << v), chosen, size)

    rec((1 << graph.n) - 1, 0, 0)
    return [_mask_to_config(m, graph.n) for m in sorted(found)]


def brute_force_mis_size(graph: Graph) -> int:
    """Exhaustive maximum over all 2**n subsets. Intended as a test oracle, n <= 24."""
    n = graph.n
    if n > 24:
        raise ValueError("brute force limited to n <= 24")
    best = 0
    chunk = 1 << min(n, 16)
    for start in range(0, 1 << n, chunk):
        idx = np.arange(start, start + chunk, dtype=np.int64)
        ok = np.ones(chunk, dtype=bool)
        for i, j in graph.edges:
            ok &= ~(((idx >> i) & 1).astype(bool) & ((idx >> j) & 1).astype(bool))
        if ok.any():
            pop = np.bitwise_count(idx[ok].astype(np.uint64)) if hasattr(np, "bitwise_count") \
                else np.array([int(v).bit_count() for v in idx[ok]])
            best = max(best, int(pop.max()))
    return best


def min_hamming_to_set(config, targets: Sequence) -> int:
    """Smallest Hamming distance from ``config`` to any of ``targets``."""
    x = as_config(config)
    if len(targets) and isinstance(targets[0], str):
        targets = [as_config(t) for t in targets]
    tgt = np.asarray(targets, dtype=np.int8).reshape(-1, len(x))
    if len(tgt) == 0:
        raise ValueError("no target configurations")
    return int(np.count_nonzero(tgt != x, axis=1).min())
