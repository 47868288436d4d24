"""Experiment pipeline: ensembles of chains, spectra, fits, and checks.

Outputs are a pure function of (config, master_seed): run seeds derive
from the master seed and run index, per-stage probability estimates from
the master seed alone, and aggregation is sorted by run index, so the
degree of parallelism never changes a byte of output.
"""

import json
import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

import numpy as np

from ._rng import child_seed
from .bounds import probability_monotonicity_check
from .chain import measures_from_sample, sample_chain
from .config import ExperimentConfig
from .errors import DomainError
from .fourier import (
    SpectrumGrid,
    _phase_average,
    decay_exponent,
    fit_to_dict,
    fourier_dimension_estimate,
    lemma22_check,
    log_frequency_grid,
    spectrum_to_csv,
    transform_measure,
)
from .measure import (
    box_dimension_estimate,
    chain_to_csv,
    counts_to_csv,
    mass_monotonicity_check,
    total_mass,
)
from .selection import (
    StageConfig,
    analytic_probability_bounds,
    estimate_selection_probability,
    probability_table_csv,
)


def stage_configs(config):
    return [
        StageConfig(N=config.N, stage=m + 1, beta=b, rule=config.rule)
        for m, b in enumerate(config.betas)
    ]


def stage_probabilities(config):
    """Per-stage selection probabilities plus how each one was obtained.

    Analytic mode uses the closed-form lower bound where its bracket is
    valid and falls back to the Monte-Carlo estimate where it degenerates
    (small beta^2 m log N); the source is recorded per stage.
    """
    probs, sources, table = [], [], []
    dtype = np.float32 if config.precision == "float32" else np.float64
    for cfg in stage_configs(config):
        # estimator resolution mirrors what the chain sampler reads at this stage
        deep = config.osc_depth == 2 and cfg.stage < config.stages
        points = config.N**2 if deep else config.N
        est = estimate_selection_probability(
            cfg,
            config.probability_trials,
            child_seed(config.master_seed, "phat", cfg.stage),
            points_per_interval=points,
            dtype=dtype,
        )
        p, source = est.p_hat, "empirical"
        if config.probability_mode == "analytic":
            try:
                p, source = analytic_probability_bounds(cfg)[0], "analytic-lower"
            except DomainError:
                source = "empirical (analytic bracket degenerate)"
        probs.append(p)
        sources.append(source)
        table.append((cfg, est))
    return probs, sources, table


def _spectrum_stage_list(config):
    if config.spectrum_stages == "none":
        return []
    if config.spectrum_stages == "final":
        return [config.stages]
    return list(range(1, config.stages + 1))


def uniform_spectrum(u):
    """Spectrum of Lebesgue measure on [0,1] on the grid u."""
    return SpectrumGrid(u_values=u, values=_phase_average(u), measure_id="mu0")


def run_single(config, run_index, probabilities):
    """One ensemble member: chain, spectra, fits, checks."""
    cfgs = stage_configs(config)
    dtype = np.float32 if config.precision == "float32" else np.float64
    run_seed = child_seed(config.master_seed, "run", run_index)
    attempts = 0
    sample = sample_chain(
        child_seed(run_seed, "attempt", 0), config.N, cfgs, dtype=dtype, osc_depth=config.osc_depth
    )
    while not sample.completed and attempts < config.retry_on_death:
        attempts += 1
        sample = sample_chain(
            child_seed(run_seed, "attempt", attempts),
            config.N,
            cfgs,
            dtype=dtype,
            osc_depth=config.osc_depth,
        )

    record = {
        "run": run_index,
        "seed": sample.seed,
        "attempts": attempts + 1,
        "died_at": sample.died_at,
        "counts": list(sample.counts),
    }
    artifacts = {}
    if len(sample.selected) == 0:
        return record, artifacts

    chain = measures_from_sample(sample, probabilities[: len(sample.selected)])
    record["masses"] = [total_mass(m) for m in chain.stages]
    record["nesting_orphans"] = sum(
        int(np.sum(~np.isin((fine - 1) // config.N + 1, coarse)))
        for coarse, fine in zip(sample.selected, sample.selected[1:])
    )
    if len(chain) >= 2:
        counts = [(m.interval_length, len(m.selected)) for m in chain.stages]
        record["box_dimension"] = box_dimension_estimate(counts)
        record["mass_monotonicity_violations"] = mass_monotonicity_check(chain).violations
    artifacts["chain"] = chain

    want = [m for m in _spectrum_stage_list(config) if m <= len(chain)]
    if want:
        u = log_frequency_grid(config.u_max, config.points_per_decade)
        mu0 = uniform_spectrum(u)
        record["lemma22"] = {}
        spectra = {}
        for m in want:
            spec = transform_measure(chain.stages[m - 1], u, measure_id=f"mu{m}")
            spectra[m] = spec
            rep = lemma22_check(spec, mu0, config.epsilon, config.alpha)
            record["lemma22"][str(m)] = {
                "violations": len(rep.violating_u),
                "max_ratio": rep.max_ratio,
            }
            mass = total_mass(chain.stages[m - 1])
            record.setdefault("mass_bound_ok", {})[str(m)] = bool(
                (np.abs(spec.values) <= mass * (1.0 + 1e-12)).all()
            )
        final = max(want)
        if final == config.stages:
            fit = decay_exponent(spectra[final], config.u_fit_min)
            record["decay_fit"] = fit_to_dict(fit)
            record["fourier_dimension"] = fourier_dimension_estimate(fit)
        artifacts["spectra"] = spectra
    return record, artifacts


def _write_run_files(config, record, artifacts, run_dir):
    os.makedirs(run_dir, exist_ok=True)
    chain = artifacts.get("chain")
    if chain is not None:
        with open(os.path.join(run_dir, "chain.csv"), "w") as fh:
            chain_to_csv(chain, fh)
        with open(os.path.join(run_dir, "counts.csv"), "w") as fh:
            counts_to_csv(chain, fh)
    for m, spec in artifacts.get("spectra", {}).items():
        with open(os.path.join(run_dir, f"spectrum_stage{m}.csv"), "w") as fh:
            spectrum_to_csv(spec, fh)
    if "decay_fit" in record:
        with open(os.path.join(run_dir, "fit.json"), "w") as fh:
            json.dump(record["decay_fit"], fh, indent=1, sort_keys=True)
            fh.write("\n")


def _quantiles(xs):
    if not xs:
        return None
    q = np.quantile(np.asarray(xs, dtype=float), [0.25, 0.5, 0.75])
    return {"q25": float(q[0]), "median": float(q[1]), "q75": float(q[2]), "n": len(xs)}


def _worker(args):
    config_dict, run_index, probabilities = args
    config = ExperimentConfig.from_dict(config_dict)
    record, artifacts = run_single(config, run_index, probabilities)
    if config.write_run_files:
        run_dir = os.path.join(config.output_dir, "runs", f"run_{run_index:04d}")
        _write_run_files(config, record, artifacts, run_dir)
    return record


@dataclass
class ExperimentReport:
    summary: dict
    all_died: bool


def run_experiment(config, jobs=1):
    """Run the full ensemble and write CSV/JSON outputs under output_dir."""
    config.validate()
    os.makedirs(config.output_dir, exist_ok=True)
    probs, sources, table = stage_probabilities(config)
    with open(os.path.join(config.output_dir, "probabilities.csv"), "w") as fh:
        probability_table_csv(table, fh)

    raw = {k: v for k, v in config.materialized().items() if k != "beta_schedule_resolved"}
    args = [(raw, i, probs) for i in range(config.ensemble)]
    jsonl_path = os.path.join(config.output_dir, "runs.jsonl")
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            records = list(pool.map(_worker, args))
        records.sort(key=lambda r: r["run"])
        with open(jsonl_path, "w") as fh:
            for record in records:
                fh.write(json.dumps(record, sort_keys=True) + "\n")
    else:
        records = []
        with open(jsonl_path, "w") as fh:
            for a in args:
                record = _worker(a)
                records.append(record)
                fh.write(json.dumps(record, sort_keys=True) + "\n")
                fh.flush()

    summary = aggregate_records(config, probs, sources, records)
    summary_path = os.path.join(config.output_dir, "summary.json")
    validate_summary(summary)
    with open(summary_path, "w") as fh:
        json.dump(summary, fh, indent=1, sort_keys=True)
        fh.write("\n")
    all_died = all(r["died_at"] is not None for r in records)
    return ExperimentReport(summary=summary, all_died=all_died)


def aggregate_records(config, probs, sources, records):
    survivors = [r for r in records if r["died_at"] is None]
    exps = [r["decay_fit"]["exponent"] for r in survivors if "decay_fit" in r]
    summary = {
        "config": config.materialized(),
        "probabilities": {
            "values": probs,
            "sources": sources,
            "monotonicity_violations": (
                probability_monotonicity_check(probs, config.N).violations if len(probs) >= 2 else 0
            ),
        },
        "runs": records,
        "death_rate": 1.0 - len(survivors) / max(1, len(records)),
        "quantiles": {
            "decay_exponent": _quantiles(exps),
            "fourier_dimension": _quantiles([r["fourier_dimension"] for r in survivors if "fourier_dimension" in r]),
            "box_dimension": _quantiles([r["box_dimension"] for r in survivors if "box_dimension" in r]),
            "stage1_mass": _quantiles([r["masses"][0] for r in survivors if r.get("masses")]),
            "final_mass": _quantiles([r["masses"][-1] for r in survivors if r.get("masses")]),
        },
        "lemma22_zero_violation_fraction": _lemma22_fraction(records, config.stages),
    }
    return summary


def _lemma22_fraction(records, final_stage):
    vals = []
    for r in records:
        lem = r.get("lemma22", {}).get(str(final_stage))
        if lem is not None:
            vals.append(1.0 if lem["violations"] == 0 else 0.0)
    return float(np.mean(vals)) if vals else None


def validate_summary(summary):
    import jsonschema

    jsonschema.validate(summary, load_schema("summary"))


def load_schema(name):
    path = os.path.join(os.path.dirname(__file__), "schemas", f"{name}.schema.json")
    with open(path) as fh:
        return json.load(fh)
