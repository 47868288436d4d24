"""Experiment configuration: one flat JSON document, defaults materialized.

Every field of ExperimentConfig round-trips through the emitted summary,
so reports are self-describing and re-runnable.
"""

import json
from dataclasses import asdict, dataclass

from .errors import InvalidArgumentError

PROBABILITY_MODES = ("empirical", "analytic")
PRECISIONS = ("float64", "float32")


class ConfigError(InvalidArgumentError):
    """Invalid experiment configuration; carries per-field messages."""

    def __init__(self, errors):
        super().__init__("; ".join(f"{f}: {m}" for f, m in errors))
        self.errors = list(errors)

    def to_json(self):
        return {"error": "invalid-config", "fields": [{"field": f, "message": m} for f, m in self.errors]}


def auto_beta_schedule(alpha, stages, scale=0.9):
    """beta_m = alpha * (1 - 2^-m) * scale: approaches but never reaches alpha."""
    return [alpha * (1.0 - 2.0**-m) * scale for m in range(1, stages + 1)]


@dataclass
class ExperimentConfig:
    alpha: float = 0.5
    N: int = 256
    stages: int = 3
    beta_schedule: object = "auto"   # explicit list of floats, or "auto"
    beta_scale: float = 0.9
    rule: str = "canonical-gauge"
    ensemble: int = 1
    master_seed: int = 0
    probability_mode: str = "empirical"
    probability_trials: int = 100_000
    u_max: float = None              # default: N^stages
    points_per_decade: int = 64
    u_fit_min: float = 10.0
    epsilon: float = 0.5
    gamma: float = None              # default: (1 - alpha^2)/2
    output_dir: str = "out"
    retry_on_death: int = 0
    precision: str = "float64"
    osc_depth: int = 2               # 1 = N+1 points per interval, 2 = one level deeper
    write_run_files: bool = True
    spectrum_stages: str = "all"     # "all", "final", or "none"

    def __post_init__(self):
        if self.u_max is None and isinstance(self.N, int) and isinstance(self.stages, int):
            self.u_max = float(self.N) ** self.stages
        if self.gamma is None and isinstance(self.alpha, float):
            self.gamma = 0.5 * (1.0 - self.alpha**2)

    @property
    def betas(self):
        if self.beta_schedule == "auto":
            return auto_beta_schedule(self.alpha, self.stages, self.beta_scale)
        return list(self.beta_schedule)

    def validate(self):
        errors = []
        if not (isinstance(self.alpha, (int, float)) and 0.0 < self.alpha < 1.0):
            errors.append(("alpha", "must lie in (0, 1)"))
        if not (isinstance(self.N, int) and self.N >= 2):
            errors.append(("N", "must be an integer >= 2"))
        if not (isinstance(self.stages, int) and self.stages >= 1):
            errors.append(("stages", "must be a positive integer"))
        if self.beta_schedule != "auto":
            sched = self.beta_schedule
            if not isinstance(sched, (list, tuple)) or len(sched) != self.stages:
                errors.append(("beta_schedule", "must be 'auto' or a list with one beta per stage"))
            else:
                if any(not (0.0 < b < 1.0) for b in sched):
                    errors.append(("beta_schedule", "betas must lie in (0, 1)"))
                if isinstance(self.alpha, (int, float)) and any(b >= self.alpha for b in sched):
                    errors.append(("beta_schedule", "every beta must be strictly less than alpha"))
                if any(b2 < b1 for b1, b2 in zip(sched, sched[1:])):
                    errors.append(("beta_schedule", "betas must be nondecreasing"))
        if not (0.0 < self.beta_scale < 1.0):
            errors.append(("beta_scale", "must lie in (0, 1)"))
        if self.rule not in ("canonical-gauge", "paper-literal"):
            errors.append(("rule", "must be 'canonical-gauge' or 'paper-literal'"))
        if not (isinstance(self.ensemble, int) and self.ensemble >= 1):
            errors.append(("ensemble", "must be a positive integer"))
        if not isinstance(self.master_seed, int) or self.master_seed < 0:
            errors.append(("master_seed", "must be a nonnegative integer"))
        if self.probability_mode not in PROBABILITY_MODES:
            errors.append(("probability_mode", f"must be one of {PROBABILITY_MODES}"))
        if not (isinstance(self.probability_trials, int) and self.probability_trials >= 100):
            errors.append(("probability_trials", "must be an integer >= 100"))
        if not (isinstance(self.u_max, (int, float)) and self.u_max > 1.0):
            errors.append(("u_max", "must exceed 1"))
        if not (isinstance(self.points_per_decade, int) and self.points_per_decade >= 1):
            errors.append(("points_per_decade", "must be a positive integer"))
        if not (isinstance(self.epsilon, (int, float)) and self.epsilon > 0.0):
            errors.append(("epsilon", "must be positive"))
        if isinstance(self.alpha, (int, float)) and not (
            isinstance(self.gamma, (int, float)) and self.gamma < 1.0 - self.alpha**2
        ):
            errors.append(("gamma", "must be < 1 - alpha^2"))
        if not (isinstance(self.retry_on_death, int) and self.retry_on_death >= 0):
            errors.append(("retry_on_death", "must be a nonnegative integer"))
        if self.precision not in PRECISIONS:
            errors.append(("precision", f"must be one of {PRECISIONS}"))
        if self.osc_depth not in (1, 2):
            errors.append(("osc_depth", "must be 1 or 2"))
        if self.spectrum_stages not in ("all", "final", "none"):
            errors.append(("spectrum_stages", "must be 'all', 'final' or 'none'"))
        if errors:
            raise ConfigError(errors)
        return self

    def materialized(self):
        """Plain dict with all defaults resolved (including the beta schedule)."""
        d = asdict(self)
        d["beta_schedule_resolved"] = self.betas
        return d

    @classmethod
    def from_dict(cls, raw):
        known = {f for f in cls.__dataclass_fields__}
        unknown = sorted(set(raw) - known)
        if unknown:
            raise ConfigError([(k, "unknown field") for k in unknown])
        return cls(**raw)

    @classmethod
    def from_json_file(cls, path):
        with open(path) as fh:
            return cls.from_dict(json.load(fh))
