"""King's-graph instances, exact maximum independent sets and the approximation ratio.

    python3 demos/01_kings_graph_and_mis.py
"""

import numpy as np

from qesa.graph import (approximation_ratio, exact_mis, generate_kings_graph,
                        maximum_independent_sets, to_bitstring, violating_edges)

# A full 3x3 lattice: lateral and diagonal neighbours are blockaded.
g = generate_kings_graph(3, 3, fill_fraction=1.0, lattice_spacing=6.0)
cert = exact_mis(g)
print(f"3x3 King's graph: n={g.n}, edges={g.n_edges}, |MIS|={cert.size}")
print("unique MIS (the four corners):", [to_bitstring(s) for s in maximum_independent_sets(g)])

# A diluted 6x6 lattice drawn with a fixed seed.
g = generate_kings_graph(6, 6, fill_fraction=0.75, lattice_spacing=6.0, seed=4)
cert = exact_mis(g)
sets = maximum_independent_sets(g)
print(f"\n6x6 at 75% fill: n={g.n}, |MIS|={cert.size}, {len(sets)} maximum sets")

# alpha = (occupied - violated edges) / |MIS| can be negative for dense guesses.
rng = np.random.default_rng(0)
for occupancy in (0.2, 0.5, 0.8):
    x = (rng.random(g.n) < occupancy).astype(int)
    print(f"random guess at {occupancy:.0%} occupancy: popcount={x.sum():2d} "
          f"violations={violating_edges(g, x):2d} alpha={approximation_ratio(g, x, cert.size):+.3f}")
