"""Stage-wise rapid-interval selection.

At stage m the unit interval is split into N^m equal intervals; an
interval is "rapid" when the path's oscillation inside it clears a
threshold tied to the gauge at scale N^-m. Two threshold rules are
shipped because the source construction is ambiguous about the log term
at stages m >= 2:

* ``canonical-gauge``: beta * sqrt(2 N^-m log N^m), i.e. beta times the
  gauge of the interval length (used for headline experiments);
* ``paper-literal``: beta * N^(-m/2) * sqrt(2 log N), with log N at
  every stage.

The rules coincide at m = 1.
"""

import math
from dataclasses import dataclass, field

import numpy as np

from ._rng import child_seed, generator
from .brownian import interval_oscillations
from .errors import DomainError, InsufficientResolutionError, InvalidArgumentError

RULES = ("canonical-gauge", "paper-literal")


@dataclass(frozen=True)
class StageConfig:
    """Parameters of one selection stage (interval length N^-stage)."""

    N: int
    stage: int
    beta: float
    rule: str = "canonical-gauge"

    def __post_init__(self):
        if self.N < 2:
            raise InvalidArgumentError("N must be >= 2")
        if self.stage < 1:
            raise InvalidArgumentError("stage must be >= 1")
        if not 0.0 < self.beta < 1.0:
            raise InvalidArgumentError("beta must lie in (0, 1)")
        if self.rule not in RULES:
            raise InvalidArgumentError(f"rule must be one of {RULES}")

    @property
    def interval_length(self):
        return self.N ** (-self.stage)

    @property
    def n_intervals(self):
        return self.N**self.stage


@dataclass(frozen=True)
class SelectionMask:
    """Indices (1-based, in [1, N^m]) of the rapid intervals at one stage."""

    config: StageConfig
    selected: np.ndarray
    threshold: float = None

    def __post_init__(self):
        if self.threshold is None:
            object.__setattr__(self, "threshold", selection_threshold(self.config))
        sel = np.asarray(self.selected, dtype=np.int64)
        sel = np.sort(sel)
        object.__setattr__(self, "selected", sel)
        if len(sel) and (sel[0] < 1 or sel[-1] > self.config.n_intervals):
            raise InvalidArgumentError("selected indices must lie in [1, N^m]")
        sel.setflags(write=False)

    def __len__(self):
        return len(self.selected)


@dataclass(frozen=True)
class ProbabilityEstimate:
    """Monte-Carlo estimate of a selection probability."""

    p_hat: float
    trials: int
    ci95_halfwidth: float = field(default=None)

    def __post_init__(self):
        if self.ci95_halfwidth is None:
            hw = 1.96 * math.sqrt(self.p_hat * (1.0 - self.p_hat) / self.trials)
            object.__setattr__(self, "ci95_halfwidth", hw)


def selection_threshold(config):
    """Oscillation threshold above which a stage-m interval is rapid."""
    N, m, beta = config.N, config.stage, config.beta
    if config.rule == "paper-literal":
        return beta * N ** (-m / 2.0) * math.sqrt(2.0 * math.log(N))
    return beta * math.sqrt(2.0 * N ** (-m) * m * math.log(N))


def select_rapid(path, config):
    """Apply the stage-m selection rule to a tabulated path."""
    n_int = config.n_intervals
    if path.resolution % n_int != 0:
        raise InvalidArgumentError(f"path resolution {path.resolution} is not a multiple of N^m = {n_int}")
    if path.resolution < n_int * config.N:
        raise InsufficientResolutionError(
            f"stage {config.stage} selection needs resolution >= N^(m+1) = {n_int * config.N}"
        )
    osc = interval_oscillations(path.values, n_int)
    thr = selection_threshold(config)
    selected = np.flatnonzero(osc >= thr) + 1
    return SelectionMask(config=config, selected=selected, threshold=thr)


def simulate_interval_oscillations(config, trials, seed, points_per_interval=None, dtype=np.float64):
    """Oscillations of `trials` fresh Brownian stretches of length N^-m.

    Each stretch is sampled at `points_per_interval` (default N) uniform
    increments, matching the resolution floor used by select_rapid.
    """
    n = points_per_interval or config.N
    h = config.interval_length
    rng = generator(child_seed(seed, "interval-osc", config.N, config.stage))
    out = np.empty(trials)
    chunk = max(1, min(trials, 2**22 // n + 1))
    std = np.sqrt(h / n)
    done = 0
    while done < trials:
        b = min(chunk, trials - done)
        z = rng.standard_normal((b, n), dtype=dtype)
        z *= std
        c = np.cumsum(z, axis=1, dtype=dtype)
        hi = np.maximum(c.max(axis=1), 0.0)
        lo = np.minimum(c.min(axis=1), 0.0)
        out[done : done + b] = hi - lo
        done += b
    return out


def estimate_selection_probability(config, trials, seed, points_per_interval=None, dtype=np.float64):
    """Monte-Carlo estimate of the per-interval selection probability."""
    if trials < 100:
        raise InvalidArgumentError("trials must be >= 100")
    osc = simulate_interval_oscillations(config, trials, seed, points_per_interval, dtype)
    p_hat = float(np.mean(osc >= selection_threshold(config)))
    return ProbabilityEstimate(p_hat=p_hat, trials=trials)


def analytic_probability_bounds(config):
    """Closed-form bracket for the selection probability at stage m.

    lower = N^(-beta^2 m) / (sqrt(2 pi) 2^(3/2) beta (m log N)^(1/2))
    upper = N^(-beta^2 m) / (sqrt(2 pi) (2 m beta^2 log N)^(1/2))

    Valid only where the underlying Gaussian-tail bracket is positive,
    i.e. 2 beta^2 m log N > 1.
    """
    N, m, beta = config.N, config.stage, config.beta
    lam2 = 2.0 * beta * beta * m * math.log(N)
    if lam2 <= 1.0:
        raise DomainError(
            f"degenerate bracket: 2 beta^2 m log N = {lam2:.4f} <= 1, lower bound would be non-positive"
        )
    scale = N ** (-beta * beta * m)
    root2pi = math.sqrt(2.0 * math.pi)
    lower = scale / (root2pi * 2.0**1.5 * beta * math.sqrt(m * math.log(N)))
    upper = scale / (root2pi * math.sqrt(2.0 * m * beta * beta * math.log(N)))
    return lower, upper


@dataclass(frozen=True)
class NestingReport:
    orphan_count: int
    orphan_indices: tuple


def check_nesting(coarse, fine):
    """Count fine intervals whose containing coarse interval is unselected."""
    if fine.config.N != coarse.config.N:
        raise InvalidArgumentError("masks must share the base N")
    if fine.config.stage != coarse.config.stage + 1:
        raise InvalidArgumentError("fine stage must be coarse stage + 1")
    N = coarse.config.N
    parents = (fine.selected + N - 1) // N
    coarse_set = set(int(k) for k in coarse.selected)
    orphans = [int(k) for k, par in zip(fine.selected, parents) if int(par) not in coarse_set]
    return NestingReport(orphan_count=len(orphans), orphan_indices=tuple(orphans))


def mask_to_csv(masks, stream):
    """Dump masks as `stage,k` rows."""
    stream.write("stage,k\n")
    for mask in masks:
        for k in mask.selected:
            stream.write(f"{mask.config.stage},{int(k)}\n")


def probability_table_csv(rows, stream):
    """Dump probability estimates as `N,m,beta,rule,p_hat,ci95,trials` rows."""
    stream.write("N,m,beta,rule,p_hat,ci95,trials\n")
    for cfg, est in rows:
        stream.write(
            f"{cfg.N},{cfg.stage},{cfg.beta!r},{cfg.rule},{est.p_hat!r},{est.ci95_halfwidth!r},{est.trials}\n"
        )
