"""Quantum-warm-started simulated annealing for maximum independent set."""

__version__ = "0.1.0"

from .graph import (Graph, MisCertificate, approximation_ratio, exact_mis,  # noqa: E402
                    generate_kings_graph, build_unit_disk_edges, hamming_distance)
from .annealer import CoolingSchedule, EnergyParams, RunRecord, anneal  # noqa: E402
from .quantum import AtomRegister, SampleSet, evolve, sample  # noqa: E402
from .analysis import (build_ratio_points, extrapolate_nc, fit_epoch_ratio,  # noqa: E402
                       ScalingFit, EpochRatioFit)

__all__ = [
    "Graph", "MisCertificate", "approximation_ratio", "exact_mis", "generate_kings_graph",
    "build_unit_disk_edges", "hamming_distance", "CoolingSchedule", "EnergyParams", "RunRecord",
    "anneal", "AtomRegister", "SampleSet", "evolve", "sample", "build_ratio_points",
    "extrapolate_nc", "fit_epoch_ratio", "ScalingFit", "EpochRatioFit",
]
