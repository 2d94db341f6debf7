"""
Exact state-vector simulation of a driven Rydberg atom array.

    H(t) = sum_j [ (Omega(t)/2) X_j - Delta(t) n_j ] + sum_{j<k} (C6 / r_jk^6) n_j n_k

Units: time in microseconds, all frequencies as angular frequencies in rad/us.
A value quoted as "2 pi x f MHz" is stored as ``2 * pi * f``. ``C6`` is in
rad/us * um^6.

Basis index ``b`` of a 2**n state vector encodes the occupation of vertex ``j``
in bit ``n - 1 - j``, so ``format(b, "0{n}b")`` is the bitstring with vertex 0
leftmost.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from typing import Optional

import numpy as np
import scipy.sparse as sp
from numba import njit

from .exceptions import IntegratorError, SimulatorLimitError
from .graph import Graph, average_degree

TWO_PI = 2.0 * math.pi
SIMULATOR_LIMIT = 22

#: Published pair interactions used to calibrate C6 (frequency in MHz, distance in um).
N70_DIAGONAL = (4.8, 7.5)
N70_LATERAL = (39.0, 5.3)
N71_DIAGONAL = (2.7, 8.5)
N71_LATERAL = (21.7, 6.0)

AQC_RAMP = 0.3  # us
QE_RISE_FALL = 0.05  # us


def c6_from_pair(u_pair: float, r: float) -> float:
    """Van der Waals coefficient reproducing interaction ``u_pair`` at distance ``r``."""
    if u_pair <= 0 or r <= 0:
        raise ValueError("u_pair and r must be positive")
    return u_pair * r ** 6


C6_N70 = TWO_PI * c6_from_pair(*N70_DIAGONAL)
C6_N71 = TWO_PI * c6_from_pair(*N71_DIAGONAL)


@dataclass(frozen=True)
class AtomRegister:
    graph: Graph
    c6: float = C6_N70
    interaction_scope: str = "all_pairs"
    limit: int = SIMULATOR_LIMIT

    def __post_init__(self):
        if self.c6 <= 0:
            raise ValueError("c6 must be positive")
        if self.interaction_scope not in ("all_pairs", "edges_only"):
            raise ValueError(f"unknown interaction scope {self.interaction_scope!r}")
        if self.graph.n > self.limit:
            raise SimulatorLimitError(
                f"{self.graph.n} atoms exceed the simulator limit of {self.limit}")

    @property
    def n(self) -> int:
        return self.graph.n

    def pair_interactions(self) -> list:
        """(j, k, C6 / r^6) for every interacting pair."""
        pos = self.graph.positions
        if self.interaction_scope == "edges_only":
            pairs = self.graph.edges
        else:
            pairs = [(j, k) for j in range(self.n) for k in range(j + 1, self.n)]
        out = []
        for j, k in pairs:
            r = float(np.hypot(*(pos[j] - pos[k])))
            out.append((j, k, self.c6 / r ** 6))
        return out

    @property
    def max_interaction(self) -> float:
        vals = [v for _, _, v in self.pair_interactions()]
        return max(vals) if vals else 0.0


def occupation_table(n: int) -> np.ndarray:
    """Array of shape (2**n, n): occupation of each vertex in each basis state."""
    idx = np.arange(1 << n, dtype=np.int64)
    shifts = n - 1 - np.arange(n)
    return ((idx[:, None] >> shifts[None, :]) & 1).astype(np.int8)


class RydbergHamiltonian:
    """H = (omega/2) sum X_j + diag(interaction - delta * n_occ), applied matrix-free."""

    def __init__(self, register: AtomRegister, omega: float, delta: float,
                 interaction_diagonal: Optional[np.ndarray] = None,
                 n_occupied: Optional[np.ndarray] = None):
        self.register = register
        self.n = register.n
        self.omega = float(omega)
        self.delta = float(delta)
        if interaction_diagonal is None or n_occupied is None:
            interaction_diagonal, n_occupied = _diagonal_parts(register)
        self.interaction_diagonal = interaction_diagonal
        self.n_occupied = n_occupied

    @property
    def diagonal(self) -> np.ndarray:
        return self.interaction_diagonal - self.delta * self.n_occupied

    def matvec(self, psi: np.ndarray) -> np.ndarray:
        out = self.diagonal * psi
        if self.omega:
            t = psi.reshape((2,) * self.n)
            half = 0.5 * self.omega
            acc = np.zeros_like(t)
            for ax in range(self.n):
                acc += np.flip(t, axis=ax)
            out = out + half * acc.reshape(-1)
        return out

    def to_sparse(self) -> sp.csr_matrix:
        dim = 1 << self.n
        rows = [np.arange(dim)]
        cols = [np.arange(dim)]
        vals = [self.diagonal.astype(complex)]
        idx = np.arange(dim)
        for j in range(self.n):
            rows.append(idx)
            cols.append(idx ^ (1 << (self.n - 1 - j)))
            vals.append(np.full(dim, 0.5 * self.omega, dtype=complex))
        return sp.csr_matrix((np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))),
                             shape=(dim, dim))

    def expectation(self, psi: np.ndarray) -> float:
        return float(np.real(np.vdot(psi, self.matvec(psi))))


def _diagonal_parts(register: AtomRegister):
    occ = occupation_table(register.n)
    inter = np.zeros(1 << register.n)
    for j, k, v in register.pair_interactions():
        inter += v * (occ[:, j] & occ[:, k])
    return inter, occ.sum(axis=1).astype(float)


def build_hamiltonian(register: AtomRegister, omega_now: float, delta_now: float) -> RydbergHamiltonian:
    if register.n > register.limit:
        raise SimulatorLimitError(f"register exceeds the simulator limit of {register.limit}")
    return RydbergHamiltonian(register, omega_now, delta_now)


# ---------------------------------------------------------------------------
# pulse schedules

@dataclass(frozen=True)
class PulseSchedule:
    """Piecewise-linear Omega(t) and Delta(t) on [0, duration]."""

    duration: float
    omega_times: tuple
    omega_values: tuple
    delta_times: tuple
    delta_values: tuple
    kind: str = "custom"

    def __post_init__(self):
        for name in ("omega_times", "omega_values", "delta_times", "delta_values"):
            object.__setattr__(self, name, tuple(float(v) for v in getattr(self, name)))
        if self.duration <= 0:
            raise ValueError("duration must be positive")
        for times, values in ((self.omega_times, self.omega_values),
                              (self.delta_times, self.delta_values)):
            if len(times) != len(values) or len(times) < 2:
                raise ValueError("each waveform needs matching times and values (>= 2 points)")
            if any(b <= a for a, b in zip(times, times[1:])):
                raise ValueError("breakpoints must be strictly increasing")
            if abs(times[0]) > 1e-12 or abs(times[-1] - self.duration) > 1e-9:
                raise ValueError("waveforms must span [0, duration]")
        if min(self.omega_values) < 0:
            raise ValueError("omega must be non-negative")

    def omega(self, t):
        return np.interp(t, self.omega_times, self.omega_values)

    def delta(self, t):
        return np.interp(t, self.delta_times, self.delta_values)

    def breakpoints(self) -> np.ndarray:
        return np.unique(np.concatenate([self.omega_times, self.delta_times]))

    def to_dict(self) -> dict:
        return {"kind": self.kind, "duration": self.duration,
                "omega": [list(self.omega_times), list(self.omega_values)],
                "delta": [list(self.delta_times), list(self.delta_values)]}


def aqc_schedule(duration: float = 4.0, omega_peak: float = TWO_PI * 1.0,
                 delta_start: float = -TWO_PI * 4.0, delta_end: float = TWO_PI * 2.0,
                 ramp: float = AQC_RAMP) -> PulseSchedule:
    """Trapezoidal Omega with a linear detuning sweep during the plateau."""
    if duration <= 2 * ramp:
        raise ValueError("duration shorter than the two Omega ramps")
    t1, t2 = ramp, duration - ramp
    return PulseSchedule(
        duration=duration,
        omega_times=(0.0, t1, t2, duration), omega_values=(0.0, omega_peak, omega_peak, 0.0),
        delta_times=(0.0, t1, t2, duration),
        delta_values=(delta_start, delta_start, delta_end, delta_end),
        kind="aqc",
    )


def quench_time(avg_degree: float, omega: float) -> float:
    """Flat-top quench duration pi / (2 sqrt(<deg>) Omega)."""
    if avg_degree <= 0:
        raise ValueError("quench duration undefined for edgeless graph")
    if omega <= 0:
        raise ValueError("omega must be positive")
    return math.pi / (2.0 * math.sqrt(avg_degree) * omega)


def qe_schedule(graph: Graph, omega: float = TWO_PI * 1.0,
                rise_fall: float = QE_RISE_FALL) -> PulseSchedule:
    """Resonant trapezoidal quench: ramp over ``rise_fall``, hold for the quench time, ramp down."""
    t_q = quench_time(average_degree(graph), omega)
    if rise_fall < 0:
        raise ValueError("rise_fall must be non-negative")
    if rise_fall == 0:
        times, vals = (0.0, t_q), (omega, omega)
    else:
        times = (0.0, rise_fall, rise_fall + t_q, t_q + 2 * rise_fall)
        vals = (0.0, omega, omega, 0.0)
    duration = times[-1]
    return PulseSchedule(duration=duration, omega_times=times, omega_values=vals,
                         delta_times=(0.0, duration), delta_values=(0.0, 0.0), kind="quench")


# ---------------------------------------------------------------------------
# states, evolution, sampling

def ground_state(n: int) -> np.ndarray:
    psi = np.zeros(1 << n, dtype=complex)
    psi[0] = 1.0
    return psi


def basis_state(bitstring: str) -> np.ndarray:
    psi = np.zeros(1 << len(bitstring), dtype=complex)
    psi[int(bitstring, 2)] = 1.0
    return psi


def _rotate_all(psi: np.ndarray, n: int, theta: float) -> np.ndarray:
    """Apply prod_j exp(-i theta X_j)."""
    c, s = math.cos(theta), -1j * math.sin(theta)
    t = psi.reshape((2,) * n)
    for ax in range(n):
        t = c * t + s * np.flip(t, axis=ax)
    return t.reshape(-1)


#: Fourth-order composition weights for symmetric second-order steps.
_W1 = 1.0 / (2.0 - 2.0 ** (1.0 / 3.0))
_W0 = 1.0 - 2.0 * _W1
YOSHIDA_WEIGHTS = (_W1, _W0, _W1)


@njit(cache=True)
def _rotate_inplace(psi, n, c, sn):
    # exp(-i theta X) on every qubit, c = cos(theta), sn = sin(theta)
    dim = psi.shape[0]
    for q in range(n):
        m = 1 << q
        for base in range(0, dim, 2 * m):
            for b in range(base, base + m):
                a0 = psi[b]
                a1 = psi[b + m]
                psi[b] = c * a0 - 1j * sn * a1
                psi[b + m] = c * a1 - 1j * sn * a0


@njit(cache=True)
def _substeps(psi, inter_phases, slots, occ_tables, n_occ, thetas, n):
    # phase k precedes rotation k; the last phase closes the segment
    dim = psi.shape[0]
    for k in range(thetas.shape[0] + 1):
        ph = inter_phases[slots[k]]
        tab = occ_tables[k]
        for b in range(dim):
            psi[b] *= ph[b] * tab[n_occ[b]]
        if k < thetas.shape[0] and thetas[k] != 0.0:
            _rotate_inplace(psi, n, np.cos(thetas[k]), np.sin(thetas[k]))


def max_step(register: AtomRegister, schedule: PulseSchedule, dt_max: float) -> float:
    scale = max(max(abs(v) for v in schedule.omega_values),
                max(abs(v) for v in schedule.delta_values),
                register.max_interaction)
    return min(dt_max, 1.0 / (50.0 * scale)) if scale > 0 else dt_max


def _segment_plan(t0: float, h: float, n_steps: int, schedule: PulseSchedule):
    """Sub-step lengths and midpoint times of the composed scheme on one segment."""
    w = np.array(YOSHIDA_WEIGHTS)
    hs = np.tile(w * h, n_steps)
    starts = t0 + h * np.repeat(np.arange(n_steps), 3) + np.tile(np.concatenate(([0.0], np.cumsum(w)[:-1])) * h, n_steps)
    mids = starts + 0.5 * hs
    return hs, schedule.omega(mids), schedule.delta(mids)


def evolve(register: AtomRegister, schedule: PulseSchedule, initial: Optional[np.ndarray] = None,
           dt_max: float = 1e-3, record_norms: bool = False):
    """Integrate i d|psi>/dt = H(t)|psi> over the schedule.

    Each step of length ``h`` is a fourth-order composition of three
    symmetric sub-steps (weights ``YOSHIDA_WEIGHTS``). A sub-step applies half
    the diagonal phase, an exact product of single-atom X rotations and the
    other half of the diagonal phase, with Omega and Delta sampled at the
    sub-step midpoint. Steps never straddle a waveform breakpoint, and ``h``
    is at most ``dt_max`` and at most ``1 / (50 max(|Omega|, |Delta|, U_max))``.

    Returns the final state, or ``(state, norms)`` with ``record_norms``.
    """
    if dt_max <= 0:
        raise ValueError("dt_max must be positive")
    n = register.n
    psi = ground_state(n) if initial is None else np.array(initial, dtype=complex)
    if psi.shape != (1 << n,):
        raise ValueError("initial state has the wrong dimension")
    if abs(np.linalg.norm(psi) - 1.0) > 1e-8:
        raise ValueError("initial state must be normalised")
    inter, n_occ = _diagonal_parts(register)
    n_occ_idx = n_occ.astype(np.int64)
    occ_levels = np.arange(n + 1)
    dt_cap = max_step(register, schedule, dt_max)
    bps = schedule.breakpoints()
    norms = []
    psi = np.ascontiguousarray(psi)
    for t0, t1 in zip(bps[:-1], bps[1:]):
        n_steps = max(1, math.ceil((t1 - t0) / dt_cap - 1e-9))
        h = (t1 - t0) / n_steps
        hs, omegas, deltas = _segment_plan(t0, h, n_steps, schedule)
        # phase k joins the second half of sub-step k-1 and the first half of sub-step k
        h_pad = np.concatenate(([0.0], hs, [0.0]))
        hd_pad = np.concatenate(([0.0], hs * deltas, [0.0]))
        taus = 0.5 * (h_pad[:-1] + h_pad[1:])
        weights = 0.5 * (hd_pad[:-1] + hd_pad[1:])
        uniq, slots = np.unique(taus, return_inverse=True)
        inter_phases = np.exp(-1j * np.outer(uniq, inter))
        occ_tables = np.exp(1j * np.outer(weights, occ_levels))
        _substeps(psi, inter_phases, slots.astype(np.int64), occ_tables, n_occ_idx,
                  0.5 * omegas * hs, n)
        norm = float(np.linalg.norm(psi))
        if abs(norm - 1.0) > 1e-6:
            raise IntegratorError("integrator unstable, reduce dt_max")
        psi /= norm
        if record_norms:
            norms.append(norm)
    if record_norms:
        return psi, np.array(norms)
    return psi


def occupation_probabilities(psi: np.ndarray) -> np.ndarray:
    """Per-atom Rydberg probabilities <n_j>."""
    n = int(round(math.log2(len(psi))))
    p = np.abs(psi) ** 2
    return p @ occupation_table(n)


@dataclass
class SampleSet:
    n: int
    shots: int
    counts: dict
    bit_order: str = "v0-leftmost"

    def __post_init__(self):
        self.counts = {k: int(v) for k, v in self.counts.items() if int(v) > 0}
        for k in self.counts:
            if len(k) != self.n or set(k) - {"0", "1"}:
                raise ValueError(f"bitstring {k!r} is not a length-{self.n} binary string")
        if sum(self.counts.values()) != self.shots:
            raise ValueError("counts do not sum to shots")
        if self.bit_order != "v0-leftmost":
            raise ValueError(f"unsupported bit order {self.bit_order!r}")

    def to_dict(self) -> dict:
        return {"n": self.n, "shots": self.shots, "bit_order": self.bit_order,
                "counts": {k: self.counts[k] for k in sorted(self.counts)}}

    @classmethod
    def from_dict(cls, data: dict) -> "SampleSet":
        return cls(n=int(data["n"]), shots=int(data["shots"]), counts=dict(data["counts"]),
                   bit_order=data.get("bit_order", "v0-leftmost"))

    def modal(self) -> str:
        return max(sorted(self.counts), key=lambda k: self.counts[k])


def save_samples(samples: SampleSet, path, provenance: Optional[dict] = None) -> None:
    data = samples.to_dict()
    if provenance is not None:
        data["provenance"] = provenance
    with open(path, "w") as fh:
        json.dump(data, fh, indent=1)
        fh.write("\n")


def load_samples(path, graph: Optional[Graph] = None) -> SampleSet:
    """Read a SampleSet file (simulated or external hardware data)."""
    with open(path) as fh:
        samples = SampleSet.from_dict(json.load(fh))
    if graph is not None and samples.n != graph.n:
        raise ValueError(f"sample bitstrings have length {samples.n}, graph has {graph.n} vertices")
    return samples


def sample(state: np.ndarray, shots: int, seed=None) -> SampleSet:
    """Draw ``shots`` projective measurements in the occupation basis."""
    if shots < 1:
        raise ValueError("shots must be >= 1")
    n = int(round(math.log2(len(state))))
    p = np.abs(state) ** 2
    p = p / p.sum()
    rng = np.random.default_rng(seed)
    hits = rng.multinomial(shots, p)
    nz = np.nonzero(hits)[0]
    counts = {format(int(b), f"0{n}b"): int(hits[b]) for b in nz}
    return SampleSet(n=n, shots=shots, counts=counts)
