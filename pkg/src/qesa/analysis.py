"""
Warm-start advantage and scaling analysis.

Models
------
epoch ratio        y(x) = 1 / (c1 (exp(beta x) - 1)),   x = HD / N
epochs to solution ETS(N) = a N b**sqrt(N)
time per epoch     t_step(N) = c N**d                    (c in microseconds)
processing time    t(N) = ETS(N) * t_step(N)             (seconds)
"""

from __future__ import annotations

import csv
import json
import math
import warnings
from dataclasses import dataclass
from typing import NamedTuple, Optional

import numpy as np
from scipy import optimize, stats

RATIO_SOURCES = ("model_pipeline", "aqc", "qe")
DEFAULT_ALPHA_LEVELS = (0.85, 0.88, 0.91)
DEFAULT_ALPHA_FINAL = 0.95
ONE_DAY = 86400.0

#: Published epoch-ratio constants.
REFERENCE_C1 = 0.1602
REFERENCE_BETA = 6.738

#: Published scaling constants: a0, b, c (us), d and per-series a0/a divisors.
REFERENCE_A0 = 5.0508
REFERENCE_B = 1.0738
REFERENCE_C_US = 25.44
REFERENCE_D = 0.76
REFERENCE_SERIES = (
    # label, a0/a divisor, separately listed fitted a, published N_c
    ("SA", 1.0, 5.05, 5312),
    ("<HD/N>=0.32", 1.15, 4.39, 5484),
    ("<HD/N>=0.21", 1.74, 2.89, 6023),
    ("<HD/N>=0.15", 2.63, 1.92, 6584),
    ("<HD/N>=0.07", 9.94, 0.51, 8655),
)


@dataclass(frozen=True)
class RatioPoint:
    hd_over_n: float
    epoch_ratio: float
    n: int
    source: str = "model_pipeline"

    def __post_init__(self):
        if not 0.0 <= self.hd_over_n <= 1.0:
            raise ValueError("hd_over_n must lie in [0, 1]")
        if not (math.isfinite(self.epoch_ratio) and self.epoch_ratio > 0):
            raise ValueError("epoch_ratio must be finite and positive")
        if self.source not in RATIO_SOURCES:
            raise ValueError(f"unknown source {self.source!r}")


@dataclass(frozen=True)
class EpochRatioFit:
    c1: float
    beta: float
    r2_adj: float
    n_points: int = 0

    def __call__(self, x):
        return epoch_ratio_model(x, self.c1, self.beta)


@dataclass(frozen=True)
class ScalingFit:
    a: float
    b: float
    c: float
    d: float
    r2_adj_ets: float = float("nan")
    r2_adj_tstep: float = float("nan")
    label: str = ""
    a0: Optional[float] = None

    def __post_init__(self):
        if self.a <= 0 or self.c <= 0:
            raise ValueError("a and c must be positive")
        if self.b <= 1:
            raise ValueError("b must exceed 1")

    def t_processing(self, n):
        return t_processing(n, self.a, self.b, self.c, self.d)


class LogLinearFit(NamedTuple):
    scale: float
    exponent: float
    r2_adj: float


def adjusted_r2(y, y_hat, n_params: int) -> float:
    """1 - (1 - R^2)(m - 1)/(m - p - 1)."""
    y = np.asarray(y, dtype=float)
    y_hat = np.asarray(y_hat, dtype=float)
    m = len(y)
    ss_res = float(np.sum((y - y_hat) ** 2))
    ss_tot = float(np.sum((y - y.mean()) ** 2))
    if ss_res == 0.0:
        return 1.0
    if ss_tot == 0.0 or m - n_params - 1 <= 0:
        return float("nan")
    r2 = 1.0 - ss_res / ss_tot
    return 1.0 - (1.0 - r2) * (m - 1) / (m - n_params - 1)


# ---------------------------------------------------------------------------
# epoch-ratio model

def epoch_ratio_model(x, c1: float = REFERENCE_C1, beta: float = REFERENCE_BETA):
    x_arr = np.asarray(x, dtype=float)
    if np.any(x_arr <= 0):
        raise ValueError("ratio diverges at zero Hamming distance")
    y = 1.0 / (c1 * np.expm1(beta * x_arr))
    return float(y) if np.ndim(x) == 0 else y


def _beta_given_c1(x, y, c1):
    z = np.log1p(1.0 / (c1 * y))  # ln(1/y + c1) - ln c1
    return float(np.dot(x, z) / np.dot(x, x))


def fit_epoch_ratio(points, y=None) -> EpochRatioFit:
    """Fit y = 1/(c1 (exp(beta x) - 1)).

    For a trial ``c1`` the slope ``beta`` comes from regressing
    ``ln(1/y + c1) - ln c1`` on ``x`` through the origin. ``c1`` itself is
    found by a bounded 1-D search minimising squared log residuals.
    ``points`` is a sequence of :class:`RatioPoint` or an array of x values
    (then pass ``y``).
    """
    if y is None:
        x = np.array([p.hd_over_n for p in points], dtype=float)
        y = np.array([p.epoch_ratio for p in points], dtype=float)
    else:
        x = np.asarray(points, dtype=float)
        y = np.asarray(y, dtype=float)
    if len(x) < 3 or len(np.unique(x)) < 3:
        raise ValueError("need at least 3 points with distinct x")
    if np.any(x <= 0) or np.any(y <= 0):
        raise ValueError("x and y must be positive")
    log_y = np.log(y)

    def loss(log_c1):
        c1 = math.exp(log_c1)
        beta = _beta_given_c1(x, y, c1)
        if beta <= 0:
            return 1e300
        return float(np.sum((log_y + np.log(c1) + np.log(np.expm1(beta * x))) ** 2))

    grid = np.linspace(-12.0, 8.0, 81)
    k = int(np.argmin([loss(g) for g in grid]))
    lo, hi = grid[max(k - 1, 0)], grid[min(k + 1, len(grid) - 1)]
    res = optimize.minimize_scalar(loss, bounds=(lo, hi), method="bounded",
                                   options={"xatol": 1e-13, "maxiter": 500})
    c1 = math.exp(res.x)
    beta = _beta_given_c1(x, y, c1)
    r2 = adjusted_r2(y, epoch_ratio_model(x, c1, beta), 2)
    return EpochRatioFit(c1=c1, beta=beta, r2_adj=r2, n_points=len(x))


def _crossing(record, level):
    epoch = record.first_epoch_reaching(level)
    if epoch is None:
        return None
    hd = record.hd_at_crossing(level)
    if hd is None or hd < 0:
        hd = record.initial_hd_to_mis
    return epoch, hd


def _epoch_differences(records, level, alpha_final):
    # (record, hd at the level crossing, epochs from the crossing to alpha_final)
    out = []
    for rec in records:
        c_i = _crossing(rec, level)
        e_f = rec.first_epoch_reaching(alpha_final)
        if c_i is None or e_f is None:
            continue
        out.append((rec, c_i[1], e_f - c_i[0]))
    return out


def build_ratio_points(sa_records, warm_records=None, alpha_levels=DEFAULT_ALPHA_LEVELS,
                       alpha_final: float = DEFAULT_ALPHA_FINAL,
                       source: Optional[str] = None) -> list:
    """Epoch-ratio points Epoch#(SA) / Epoch#(warm start) versus HD/N.

    Without ``warm_records`` the warm start is modelled from the SA runs
    themselves: a run that crossed ``alpha_i`` is treated as if it had been
    started at its configuration at that crossing. Its warm epoch count is
    ``epochs(alpha_final) - epochs(alpha_i)``, its HD is the distance to the
    nearest MIS at the crossing, and Epoch#(SA) is the median number of epochs
    random-start runs on the same graph needed to reach ``alpha_final``.

    With ``warm_records`` (measured warm starts) both sides contribute the
    difference ``epochs(alpha_final) - epochs(alpha_i)``. The two lists are
    sorted by initial HD and paired rank by rank, and HD/N is taken from the
    warm record's initial configuration.

    Records that never cross a level are skipped, as are pairs with a
    non-positive difference.
    """
    points = []
    if warm_records is None:
        source = source or "model_pipeline"
        reference = {}
        for rec in sa_records:
            e_f = rec.first_epoch_reaching(alpha_final)
            if e_f is not None:
                reference.setdefault(rec.graph_id, []).append(e_f)
        reference = {k: float(np.median(v)) for k, v in reference.items()}
        for level in alpha_levels:
            for rec, hd, diff in _epoch_differences(sa_records, level, alpha_final):
                if diff <= 0 or reference.get(rec.graph_id, 0) <= 0:
                    continue
                points.append(RatioPoint(hd_over_n=hd / rec.n,
                                         epoch_ratio=reference[rec.graph_id] / diff,
                                         n=rec.n, source=source))
    else:
        source = source or "qe"
        for level in alpha_levels:
            def by_initial_hd(records):
                rows = _epoch_differences(records, level, alpha_final)
                return sorted(rows, key=lambda t: (t[0].initial_hd_to_mis, t[2]))

            for (_, _, d_sa), (warm, _, d_w) in zip(by_initial_hd(sa_records),
                                                    by_initial_hd(warm_records)):
                if d_w <= 0 or d_sa <= 0 or warm.initial_hd_to_mis < 0:
                    continue
                points.append(RatioPoint(hd_over_n=warm.initial_hd_to_mis / warm.n,
                                         epoch_ratio=d_sa / d_w, n=warm.n, source=source))
    if not points:
        warnings.warn("no overlapping alpha crossings; ratio point list is empty")
    return points


def ratio_trend(points) -> float:
    """Spearman rank correlation between HD/N and epoch ratio."""
    x = [p.hd_over_n for p in points]
    y = [p.epoch_ratio for p in points]
    return float(stats.spearmanr(x, y).statistic)


# ---------------------------------------------------------------------------
# scaling models

def ets_model(n, a: float, b: float):
    n = np.asarray(n, dtype=float)
    if np.any(n < 1):
        raise ValueError("n must be >= 1")
    out = a * n * b ** np.sqrt(n)
    return float(out) if out.ndim == 0 else out


def t_step_model(n, c: float, d: float):
    """Seconds per epoch for ``c`` given in microseconds."""
    n = np.asarray(n, dtype=float)
    out = c * 1e-6 * n ** d
    return float(out) if out.ndim == 0 else out


def t_processing(n, a: float, b: float, c: float, d: float):
    """Total processing time in seconds, ``a n b**sqrt(n) * c n**d`` with ``c`` in us."""
    n = np.asarray(n, dtype=float)
    if np.any(n < 1):
        raise ValueError("n must be >= 1")
    out = a * n * b ** np.sqrt(n) * c * 1e-6 * n ** d
    return float(out) if out.ndim == 0 else out


def _series(series):
    arr = np.asarray(series, dtype=float)
    if arr.ndim != 2 or arr.shape[1] != 2:
        raise ValueError("series must be a list of (n, value) pairs")
    if len(np.unique(arr[:, 0])) < 3:
        raise ValueError("need at least 3 distinct n")
    if np.any(arr[:, 1] <= 0):
        raise ValueError("values must be positive")
    return arr[:, 0], arr[:, 1]


def fit_ets(series) -> LogLinearFit:
    """Regress ln(epochs / n) on sqrt(n); returns (a, b, adjusted R^2 on the log scale)."""
    n, epochs = _series(series)
    xs = np.sqrt(n)
    ys = np.log(epochs / n)
    slope, intercept = np.polyfit(xs, ys, 1)
    return LogLinearFit(math.exp(intercept), math.exp(slope),
                        adjusted_r2(ys, intercept + slope * xs, 1))


def fit_t_step(timings) -> LogLinearFit:
    """Log-log regression of seconds-per-epoch on n; returns (c in us, d, adjusted R^2)."""
    n, secs = _series(timings)
    xs = np.log(n)
    ys = np.log(secs * 1e6)
    d, intercept = np.polyfit(xs, ys, 1)
    return LogLinearFit(math.exp(intercept), float(d), adjusted_r2(ys, intercept + d * xs, 1))


def extrapolate_nc(budget: float, fit: ScalingFit) -> int:
    """Largest integer n with ``t_processing(n) <= budget``."""
    if budget < fit.t_processing(1):
        raise ValueError("budget below the processing time of a single vertex")
    lo, hi = 1, 2
    while fit.t_processing(hi) <= budget:
        lo, hi = hi, hi * 2
        if hi > 1 << 60:
            raise ValueError("budget too large to bracket")
    while hi - lo > 1:
        mid = (lo + hi) // 2
        if fit.t_processing(mid) <= budget:
            lo = mid
        else:
            hi = mid
    return lo


def reference_scaling_fits(a_source: str = "ratio") -> list:
    """Published scaling series as :class:`ScalingFit` objects.

    ``a_source="ratio"`` uses a = a0 / divisor; ``"fitted"`` uses the separately
    listed fitted a values.
    """
    fits = []
    for label, divisor, a_fit, _ in REFERENCE_SERIES:
        a = REFERENCE_A0 / divisor if a_source == "ratio" else a_fit
        fits.append(ScalingFit(a=a, b=REFERENCE_B, c=REFERENCE_C_US, d=REFERENCE_D,
                               label=label, a0=REFERENCE_A0))
    return fits


def a_value_discrepancy() -> list:
    """Relative difference between fitted a and a0/divisor for every published series."""
    return [(label, a_fit, REFERENCE_A0 / div, a_fit / (REFERENCE_A0 / div) - 1.0)
            for label, div, a_fit, _ in REFERENCE_SERIES]


def advantage_fraction(paired_results) -> float:
    """Fraction of (alpha_warm, alpha_sa) pairs with alpha_warm > alpha_sa; ties count 1/2."""
    pairs = np.asarray(paired_results, dtype=float).reshape(-1, 2)
    if len(pairs) == 0:
        raise ValueError("no paired results")
    wins = np.sum(pairs[:, 0] > pairs[:, 1])
    ties = np.sum(pairs[:, 0] == pairs[:, 1])
    return float((wins + 0.5 * ties) / len(pairs))


# ---------------------------------------------------------------------------
# files

def write_ratio_points(points, path) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["hd_over_n", "epoch_ratio", "n", "source"])
        for p in points:
            w.writerow([repr(p.hd_over_n), repr(p.epoch_ratio), p.n, p.source])


def read_ratio_points(path) -> list:
    with open(path, newline="") as fh:
        rows = list(csv.DictReader(fh))
    return [RatioPoint(float(r["hd_over_n"]), float(r["epoch_ratio"]), int(r["n"]), r["source"])
            for r in rows]


def write_fit(path, model: str, params: dict, r2_adj: float, n_points: int,
              residuals_file: Optional[str] = None, provenance: Optional[dict] = None) -> None:
    data = {"model": model, "params": params, "r2_adj": r2_adj, "n_points": n_points,
            "residuals_file": residuals_file}
    if provenance is not None:
        data["provenance"] = provenance
    with open(path, "w") as fh:
        json.dump(data, fh, indent=1)
        fh.write("\n")


def ratio_fixture_path():
    """Bundled synthetic ratio points drawn from the published epoch-ratio curve with 5% noise."""
    from importlib.resources import files
    return files("qesa") / "data" / "epoch_ratio_synthetic.csv"
