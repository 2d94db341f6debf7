"""Epoch-ratio points from random-start runs, the ratio-curve fit and the one-day size bound.

    python3 demos/04_epoch_ratio_and_scaling.py
"""

import numpy as np

from qesa.analysis import (REFERENCE_SERIES, build_ratio_points, extrapolate_nc,
                           fit_epoch_ratio, ratio_trend, reference_scaling_fits)
from qesa.experiments import diluted_kings_graphs, ratio_trend_records

graphs = diluted_kings_graphs(4, 60, 75, rows=9, cols=9, fill_range=(0.8, 0.9), spacing=6.0,
                              seed=5)
records = ratio_trend_records(graphs, runs_per_graph=20, seed=6)
points = build_ratio_points(records)
x = np.array([p.hd_over_n for p in points])
y = np.array([p.epoch_ratio for p in points])
print(f"{len(points)} ratio points from {len(records)} runs on n = {[g.n for g in graphs]}")
print(f"Spearman(HD/N, ratio) = {ratio_trend(points):+.3f}")
for lo, hi in ((0.0, 0.1), (0.1, 0.2), (0.2, 0.4)):
    sel = (x >= lo) & (x < hi)
    if sel.any():
        print(f"  HD/N in [{lo:.1f}, {hi:.1f}): median ratio {np.median(y[sel]):.2f} ({sel.sum()} pts)")
if len(np.unique(x)) >= 3:
    fit = fit_epoch_ratio(points)
    print(f"fit: c1={fit.c1:.4f} beta={fit.beta:.3f} adjusted R^2={fit.r2_adj:.3f}")

print("\nlargest graph solvable in one day, published scaling constants:")
for fit, (label, _, _, published) in zip(reference_scaling_fits(), REFERENCE_SERIES):
    print(f"  {label:>12}: N_c = {extrapolate_nc(86400, fit):5d} (published {published})")
