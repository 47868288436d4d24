"""Acceptance ensemble: 200 chains at N=256, alpha=0.5, auto beta schedule."""
import time
from rapidpoints.config import ExperimentConfig
from rapidpoints.runner import run_experiment

cfg = ExperimentConfig(
    ensemble=200,
    master_seed=424242,
    output_dir="/root/pkg/experiments/acceptance-main",
    probability_trials=100_000,
    precision="float32",
    osc_depth=2,
    spectrum_stages="final",
    write_run_files=False,
)
t0 = time.time()
rep = run_experiment(cfg)
print("done in %.0fs, all_died=%s" % (time.time() - t0, rep.all_died))
