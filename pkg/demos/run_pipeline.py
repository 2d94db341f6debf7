"""End-to-end CLI pipeline on small graphs.

Every step calls the ``qesa`` command line with relative paths from inside the
output directory, so two runs into different directories should produce
byte-identical files apart from wall-clock timing fields.

    python3 demos/run_pipeline.py OUTDIR
"""

import os
import shutil
import sys
from pathlib import Path

from qesa.analysis import ratio_fixture_path
from qesa.cli import main

STEPS = [
    # quantum warm starts on a 3x3 King's graph
    ["gen-graph", "--rows", "3", "--cols", "3", "--spacing", "5.3", "--seed", "1",
     "--out", "small.json"],
    ["quantum", "--graph", "small.json", "--mode", "qe", "--shots", "500", "--seed", "2",
     "--out", "qe.json"],
    ["quantum", "--graph", "small.json", "--mode", "aqc", "--duration", "2.0", "--shots", "500",
     "--seed", "3", "--out", "aqc.json"],
    ["anneal", "--graph", "small.json", "--warm-start", "qe.json", "--runs", "20",
     "--target", "1.0", "--seed", "4", "--out", "warm.jsonl"],
    ["anneal", "--graph", "small.json", "--warm-start", "qe.json", "--random-matched",
     "--runs", "20", "--target", "1.0", "--seed", "4", "--out", "random.jsonl"],
    ["analyze", "advantage-fraction", "--warm", "warm.jsonl", "--sa", "random.jsonl",
     "--out", "advantage.csv"],
    # random-start runs on a 7x7 graph for ratio points
    ["gen-graph", "--rows", "7", "--cols", "7", "--fill", "0.9", "--seed", "5",
     "--out", "medium.json"],
    ["anneal", "--graph", "medium.json", "--random-matched", "20", "--runs", "30",
     "--target", "0.95", "--seed", "6", "--out", "sa_medium.jsonl"],
    ["analyze", "ratio-points", "--sa", "sa_medium.jsonl", "--levels", "0.8", "0.85",
     "--final", "0.95", "--out", "ratio_points.csv"],
    ["analyze", "fit-eq4", "--points", "ratio_points.csv", "--out", "fit_eq4_measured.json"],
    ["analyze", "fit-eq4", "--points", "epoch_ratio_synthetic.csv", "--out", "fit_eq4.json"],
    # scaling series from three lattice sizes
    ["gen-graph", "--rows", "4", "--cols", "4", "--out", "k4.json"],
    ["gen-graph", "--rows", "5", "--cols", "5", "--out", "k5.json"],
    ["gen-graph", "--rows", "6", "--cols", "6", "--out", "k6.json"],
    ["anneal", "--graph", "k4.json", "--random-matched", "8", "--runs", "20", "--target", "1.0",
     "--seed", "7", "--timing", "--out", "k4.jsonl"],
    ["anneal", "--graph", "k5.json", "--random-matched", "12", "--runs", "20", "--target", "1.0",
     "--seed", "8", "--timing", "--out", "k5.jsonl"],
    ["anneal", "--graph", "k6.json", "--random-matched", "18", "--runs", "20", "--target", "1.0",
     "--seed", "9", "--timing", "--out", "k6.jsonl"],
    ["analyze", "fit-scaling", "--model", "eq5", "--records", "k4.jsonl", "k5.jsonl", "k6.jsonl",
     "--out", "fit_ets.json"],
    ["analyze", "fit-scaling", "--model", "eq6", "--records", "k4.jsonl", "k5.jsonl", "k6.jsonl",
     "--out", "fit_tstep.json"],
    ["analyze", "extrapolate", "--params", "fit_ets_published.json", "--out", "n_c.json"],
]

#: outputs derived from wall-clock timings
TIMING_OUTPUTS = ("fit_tstep.json", "fit_tstep_series.csv", "fit_tstep_series.csv.provenance.json")

PUBLISHED = '{"a0": 5.0508, "divisor": 9.94, "b": 1.0738, "c_us": 25.44, "d": 0.76}\n'


def run_pipeline(outdir) -> None:
    outdir = Path(outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    shutil.copyfile(ratio_fixture_path(), outdir / "epoch_ratio_synthetic.csv")
    (outdir / "fit_ets_published.json").write_text(PUBLISHED)
    here = os.getcwd()
    os.chdir(outdir)
    try:
        for argv in STEPS:
            print("$ qesa " + " ".join(argv), flush=True)
            code = main(argv)
            if code != 0:
                raise SystemExit(f"step failed with exit code {code}: {' '.join(argv)}")
    finally:
        os.chdir(here)


if __name__ == "__main__":
    run_pipeline(sys.argv[1] if len(sys.argv) > 1 else "pipeline_out")
