"""Warm-started annealing against matched-occupation random starts.

Each pair shares the annealing seed; alpha is compared after n/2 epochs.

    python3 demos/03_warm_vs_random.py
"""

from qesa.analysis import advantage_fraction
from qesa.experiments import diluted_kings_graphs, warm_start_advantage

graphs = diluted_kings_graphs(8, 12, 14, seed=3)
print("graph sizes:", [g.n for g in graphs])
for policy in ("best_alpha", "per_shot"):
    pairs = warm_start_advantage(graphs, runs_per_graph=10, seed=4, policy=policy)
    print(f"{policy:>10}: warm start ahead in {advantage_fraction(pairs):.2f} of {len(pairs)} pairs,"
          f" mean alpha warm {pairs[:, 0].mean():.3f} vs random {pairs[:, 1].mean():.3f}")
