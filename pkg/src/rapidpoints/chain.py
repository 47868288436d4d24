"""Streaming sampler for nested selection chains.

Building a chain through stage M notionally requires the path at
resolution N^(M+1); at experiment scale that grid does not fit in
memory. Because selection at stage m is intersected with the stage-(m-1)
support anyway, only surviving intervals ever need refining. This module
samples the construction stage by stage: each surviving interval carries
N+1 path values, and its N spans are bridge-refined on demand (the same
conditional law refine_path uses), so the result is equal in law to
refining the whole path first and selecting afterwards.

Oscillation sampling depth
--------------------------
With osc_depth=1 the stage-m oscillation is read off N+1 grid points per
interval, the floor the selection contract allows. With osc_depth=2 every
non-final stage is measured one refinement level deeper (N^2+1 points per
interval), which is the resolution those stages see when the whole path
is refined to the final grid first. The fine values generated for the
stage-m oscillation are exactly the stage-(m+1) candidate segments, so
the deeper measurement reuses them instead of redrawing; for the
penultimate stage the final stage's oscillations are computed in the same
pass and never stored.

Per-stage draw streams are seeded as hash(seed, "stage", m) and consumed
in fixed span order, so a chain is a pure function of its seed (at fixed
osc_depth and span chunking).
"""

from dataclasses import dataclass

import numpy as np

from ._rng import child_seed, generator
from .brownian import bridge_refine_spans, interval_oscillations
from .errors import InvalidArgumentError
from .measure import MeasureChain, StageMeasure
from .selection import selection_threshold

SPAN_CHUNK = 1 << 16


@dataclass(frozen=True)
class ChainSample:
    """Surviving interval indices per stage (1-based, global at stage m)."""

    seed: int
    N: int
    configs: tuple
    selected: tuple   # one int64 array per completed stage
    died_at: int = None   # stage at which no interval survived, or None

    @property
    def counts(self):
        return tuple(len(s) for s in self.selected)

    @property
    def completed(self):
        return self.died_at is None


def _validate_configs(N, configs):
    for i, cfg in enumerate(configs):
        if cfg.N != N or cfg.stage != i + 1:
            raise InvalidArgumentError("stage configs must be m = 1, 2, ... over the base N")
    betas = [c.beta for c in configs]
    if any(b2 < b1 for b1, b2 in zip(betas, betas[1:])):
        raise InvalidArgumentError("beta schedule must be nondecreasing")


def _base_segments(seed, N, dtype):
    """Stage-1 candidate segments: the unit path at resolution N^2.

    Returns (N, N+1) localized rows, one per stage-1 interval.
    """
    rng = generator(child_seed(seed, "stage", 1))
    inc = rng.standard_normal(N * N) * np.sqrt(1.0 / (N * N))
    base = np.concatenate([[0.0], np.cumsum(inc)])
    seg = base[:-1].reshape(N, N)
    seg = np.concatenate([seg, base[N::N, None]], axis=1)
    return (seg - seg[:, :1]).astype(dtype)


def _sample_floor(seed, N, configs, dtype, span_chunk):
    """Depth-1 sampler: every stage read at N+1 points per interval."""
    seg = _base_segments(seed, N, dtype)
    osc = seg.max(axis=1) - seg.min(axis=1)
    sel = np.flatnonzero(osc >= selection_threshold(configs[0])) + 1
    selected = [sel.astype(np.int64)]
    if len(sel) == 0:
        return ChainSample(seed=int(seed), N=N, configs=configs, selected=tuple(selected), died_at=1)
    seg = seg[sel - 1]

    for m in range(2, len(configs) + 1):
        cfg = configs[m - 1]
        thr = selection_threshold(cfg)
        span_len = float(N) ** (-m)
        left = seg[:, :-1].reshape(-1)
        diff = np.diff(seg, axis=1).reshape(-1)
        child_global = (selected[-1][:, None] - 1) * N + np.arange(1, N + 1)[None, :]
        child_global = child_global.reshape(-1)
        rng = generator(child_seed(seed, "stage", m))
        keep_idx = []
        keep_vals = [] if m < len(configs) else None
        for start in range(0, len(left), span_chunk):
            vals = bridge_refine_spans(
                left[start : start + span_chunk],
                diff[start : start + span_chunk],
                span_len,
                N,
                rng,
                dtype=dtype,
            )
            o = vals.max(axis=1) - vals.min(axis=1)
            hit = o >= thr
            keep_idx.append(child_global[start : start + span_chunk][hit])
            if keep_vals is not None:
                kept = vals[hit]
                keep_vals.append(kept - kept[:, :1])
        sel = np.concatenate(keep_idx)
        selected.append(sel.astype(np.int64))
        if len(sel) == 0:
            return ChainSample(seed=int(seed), N=N, configs=configs, selected=tuple(selected), died_at=m)
        if keep_vals is not None:
            seg = np.concatenate(keep_vals, axis=0)

    return ChainSample(seed=int(seed), N=N, configs=configs, selected=tuple(selected))


def _sample_deep(seed, N, configs, dtype, span_chunk):
    """Depth-2 sampler: non-final stages read one refinement level deeper.

    Stage-m candidate segments (N+1 points) are refined by N; the fine
    view yields the stage-m oscillation, and its rows are the
    stage-(m+1) candidate segments. At the penultimate stage the final
    stage is selected inside the same chunk loop from the fine rows.
    """
    S = len(configs)
    seg = _base_segments(seed, N, dtype)
    glob = np.arange(1, N + 1, dtype=np.int64)
    selected = []
    row_chunk = max(1, span_chunk // N)

    for m in range(1, S):
        cfg = configs[m - 1]
        thr = selection_threshold(cfg)
        thr_next = selection_threshold(configs[m])
        span_len = float(N) ** (-(m + 1))
        rng = generator(child_seed(seed, "stage", m + 1))
        fused = m == S - 1
        keep_idx = []
        next_idx = []
        next_vals = [] if not fused else None
        for start in range(0, len(seg), row_chunk):
            rows = seg[start : start + row_chunk]
            vals = bridge_refine_spans(
                rows[:, :-1].reshape(-1),
                np.diff(rows, axis=1).reshape(-1),
                span_len,
                N,
                rng,
                dtype=dtype,
            )
            fine = vals.reshape(len(rows), N, N + 1)
            osc = fine.max(axis=(1, 2)) - fine.min(axis=(1, 2))
            hit = osc >= thr
            g = glob[start : start + row_chunk][hit]
            keep_idx.append(g)
            if len(g) == 0:
                continue
            child = fine[hit].reshape(-1, N + 1)
            child_global = ((g[:, None] - 1) * N + np.arange(1, N + 1)[None, :]).reshape(-1)
            if fused:
                o = child.max(axis=1) - child.min(axis=1)
                sub = o >= thr_next
                next_idx.append(child_global[sub])
            else:
                next_idx.append(child_global)
                next_vals.append(child - child[:, :1])
        sel = np.concatenate(keep_idx) if keep_idx else np.empty(0, np.int64)
        selected.append(sel.astype(np.int64))
        if len(sel) == 0:
            return ChainSample(seed=int(seed), N=N, configs=configs, selected=tuple(selected), died_at=m)
        if fused:
            fin = np.concatenate(next_idx) if next_idx else np.empty(0, np.int64)
            selected.append(fin.astype(np.int64))
            died = S if len(fin) == 0 else None
            return ChainSample(seed=int(seed), N=N, configs=configs, selected=tuple(selected), died_at=died)
        seg = np.concatenate(next_vals, axis=0)
        glob = np.concatenate(next_idx)

    # single-stage chain: the floor read is already the final grid
    return _sample_floor(seed, N, configs, dtype, span_chunk)


def sample_chain(seed, N, stage_configs, dtype=np.float64, span_chunk=SPAN_CHUNK, osc_depth=1):
    """Sample the nested construction for one fresh Brownian path."""
    configs = tuple(stage_configs)
    _validate_configs(N, configs)
    if osc_depth not in (1, 2):
        raise InvalidArgumentError("osc_depth must be 1 or 2")
    if osc_depth == 2 and len(configs) > 1:
        return _sample_deep(seed, N, configs, dtype, span_chunk)
    return _sample_floor(seed, N, configs, dtype, span_chunk)


def measures_from_sample(sample, probabilities):
    """Wrap a chain sample's surviving indices as a MeasureChain."""
    if len(probabilities) < len(sample.selected):
        raise InvalidArgumentError("need one probability per completed stage")
    stages = tuple(
        StageMeasure(stage=m + 1, base=sample.N, selected=sel, p=probabilities[m])
        for m, sel in enumerate(sample.selected)
    )
    return MeasureChain(path_seed=sample.seed, stages=stages)
