"""Stage measures and nested measure chains.

A stage-m measure is piecewise uniform with density 1/p on the union of
its selected intervals of length N^-m (p is the per-interval selection
probability used as normaliser), and zero elsewhere.
"""

from dataclasses import dataclass

import numpy as np

from .errors import ChainDiedError, EmptyMeasureError, InvalidArgumentError
from .selection import select_rapid


@dataclass(frozen=True)
class StageMeasure:
    """Piecewise-uniform measure with density 1/p on selected intervals."""

    stage: int
    base: int
    selected: np.ndarray
    p: float

    def __post_init__(self):
        if not 0.0 < self.p <= 1.0:
            raise InvalidArgumentError("p must lie in (0, 1]")
        sel = np.sort(np.asarray(self.selected, dtype=np.int64))
        object.__setattr__(self, "selected", sel)
        sel.setflags(write=False)

    @property
    def density(self):
        return 1.0 / self.p

    @property
    def interval_length(self):
        return self.base ** (-self.stage)

    def interval_bounds(self):
        """(left, right) endpoints of each selected interval."""
        h = self.interval_length
        left = (self.selected - 1) * h
        return left, left + h

    def measure_of(self, a, b):
        """mu([a, b]) for a grid-aligned interval [a, b]."""
        h = self.interval_length
        ia, ib = round(a / h), round(b / h)
        if not (0 <= ia < ib <= self.base**self.stage):
            raise InvalidArgumentError("require grid-aligned 0 <= a < b <= 1")
        if abs(ia * h - a) > 1e-12 or abs(ib * h - b) > 1e-12:
            raise InvalidArgumentError("interval endpoints must be multiples of N^-m")
        inside = np.count_nonzero((self.selected > ia) & (self.selected <= ib))
        return inside * self.density * h


def build_stage_measure(mask, p):
    """Measure with uniform density 1/p on the mask's intervals."""
    if len(mask) == 0:
        raise EmptyMeasureError(f"stage {mask.config.stage} selected no intervals")
    return StageMeasure(stage=mask.config.stage, base=mask.config.N, selected=mask.selected, p=p)


def total_mass(measure):
    """|selected| * p^-1 * N^-m."""
    return len(measure.selected) * measure.density * measure.interval_length


@dataclass(frozen=True)
class MeasureChain:
    """Measures of strictly increasing stage with nested supports."""

    path_seed: int
    stages: tuple

    def __post_init__(self):
        for prev, cur in zip(self.stages, self.stages[1:]):
            if cur.stage != prev.stage + 1:
                raise InvalidArgumentError("stages must increase by 1")
            parents = (cur.selected + prev.base - 1) // prev.base
            if not np.isin(parents, prev.selected).all():
                raise InvalidArgumentError("supports must be nested")

    def __len__(self):
        return len(self.stages)


def intersect_with_parent(selected, parent_selected, N):
    """Drop indices whose containing parent interval is unselected."""
    parents = (selected + N - 1) // N
    return selected[np.isin(parents, parent_selected)]


def build_measure_chain(path, N, stage_configs, probabilities):
    """Select at each stage, enforce nesting by intersection, build measures.

    Raises ChainDiedError (carrying the surviving prefix) if any stage is
    empty after intersection with the previous support.
    """
    if len(stage_configs) != len(probabilities):
        raise InvalidArgumentError("need one probability per stage")
    betas = [c.beta for c in stage_configs]
    if any(b2 < b1 for b1, b2 in zip(betas, betas[1:])):
        raise InvalidArgumentError("beta schedule must be nondecreasing")
    measures = []
    prev = None
    for cfg, p in zip(stage_configs, probabilities):
        if cfg.stage != len(measures) + 1 or cfg.N != N:
            raise InvalidArgumentError("stage configs must be m = 1, 2, ... over the same base N")
        mask = select_rapid(path, cfg)
        selected = mask.selected
        if prev is not None:
            selected = intersect_with_parent(selected, prev.selected, N)
        if len(selected) == 0:
            raise ChainDiedError(cfg.stage, MeasureChain(path_seed=path.seed, stages=tuple(measures)))
        prev = StageMeasure(stage=cfg.stage, base=N, selected=selected, p=p)
        measures.append(prev)
    return MeasureChain(path_seed=path.seed, stages=tuple(measures))


@dataclass(frozen=True)
class MonotonicityReport:
    violations: int


def mass_monotonicity_check(chain):
    """Count surviving fine intervals whose measure drops below the parent's.

    With a shared per-stage probability this is |stage m+1| whenever
    p_m / N > p_{m+1}, and zero otherwise.
    """
    if len(chain) < 2:
        raise InvalidArgumentError("need a chain of >= 2 stages")
    violations = 0
    for prev, cur in zip(chain.stages, chain.stages[1:]):
        coarse_mass = prev.density * prev.interval_length
        fine_mass = cur.density * cur.interval_length
        if fine_mass > coarse_mass:
            violations += len(cur.selected)
    return MonotonicityReport(violations=violations)


def box_dimension_estimate(counts):
    """Least-squares slope of log count against log(1/h)."""
    if len(counts) < 2:
        raise InvalidArgumentError("need counts at >= 2 scales")
    h = np.array([c[0] for c in counts], dtype=float)
    n = np.array([c[1] for c in counts], dtype=float)
    if (n < 1).any():
        raise InvalidArgumentError("all counts must be >= 1")
    slope = np.polyfit(np.log(1.0 / h), np.log(n), 1)[0]
    return float(slope)


def chain_to_csv(chain, stream):
    """Dump a chain as `stage,k,density` rows."""
    stream.write("stage,k,density\n")
    for meas in chain.stages:
        d = meas.density
        for k in meas.selected:
            stream.write(f"{meas.stage},{int(k)},{d!r}\n")


def counts_to_csv(chain, stream):
    """Dump per-stage `stage,h,count,mass` rows."""
    stream.write("stage,h,count,mass\n")
    for meas in chain.stages:
        stream.write(f"{meas.stage},{meas.interval_length!r},{len(meas.selected)},{total_mass(meas)!r}\n")
