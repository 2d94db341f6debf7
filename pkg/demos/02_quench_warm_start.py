"""Simulated Rydberg-array warm starts: a short quench and a slow adiabatic sweep.

    python3 demos/02_quench_warm_start.py
"""

from qesa.annealer import select_warm_start
from qesa.graph import approximation_ratio, exact_mis, generate_kings_graph, to_bitstring
from qesa.quantum import AtomRegister, aqc_schedule, evolve, qe_schedule, sample

g = generate_kings_graph(3, 4, fill_fraction=0.9, lattice_spacing=5.3, seed=2)
mis = exact_mis(g).size
register = AtomRegister(g)
print(f"graph: n={g.n}, edges={g.n_edges}, |MIS|={mis}")

for label, schedule in (("quench", qe_schedule(g)), ("adiabatic 4 us", aqc_schedule(4.0))):
    shots = sample(evolve(register, schedule), 1000, seed=1)
    mean_alpha = sum(c * approximation_ratio(g, b, mis) for b, c in shots.counts.items()) / 1000
    best = select_warm_start(shots, g, mis, "best_alpha")
    print(f"\n{label}: duration {schedule.duration:.3f} us, {len(shots.counts)} distinct outcomes")
    print(f"  mean alpha over shots {mean_alpha:+.3f}")
    print(f"  modal shot {shots.modal()}, best shot {to_bitstring(best)} "
          f"(alpha {approximation_ratio(g, best, mis):.3f})")
