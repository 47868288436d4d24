"""Brownian sample paths on uniform grids.

Paths live on a grid of M+1 points over [0,1] and can be refined in place
(law-preserving) by conditional Brownian-bridge interpolation, so later
stages of a construction observe the *same* sample path at finer
resolution.
"""

from dataclasses import dataclass, field

import numpy as np

from ._rng import NORMAL_METHOD, child_seed, generator
from .errors import InvalidArgumentError


@dataclass(frozen=True)
class PathGrid:
    """A Brownian path tabulated on a uniform grid of [0,1].

    values[k] = X(k/resolution); values[0] is exactly 0.
    """

    resolution: int
    values: np.ndarray
    seed: int
    generation_log: tuple = field(default_factory=tuple)

    def __post_init__(self):
        if self.resolution < 1:
            raise InvalidArgumentError("resolution must be >= 1")
        if len(self.values) != self.resolution + 1:
            raise InvalidArgumentError("values length must equal resolution + 1")
        self.values.setflags(write=False)

    def grid_index(self, t):
        """Index of grid-aligned time t; raises if t is off-grid."""
        k = round(t * self.resolution)
        if abs(t * self.resolution - k) > 1e-9 or not (0 <= k <= self.resolution):
            raise InvalidArgumentError(f"t={t} is not aligned to a grid of {self.resolution} intervals")
        return int(k)


def generate_path(resolution, seed):
    """Sample a Brownian path at `resolution` uniform increments.

    values[k] = sum of k iid Normal(0, 1/resolution) increments.
    """
    if resolution < 1:
        raise InvalidArgumentError("resolution must be >= 1")
    rng = generator(seed)
    z = rng.standard_normal(resolution) * np.sqrt(1.0 / resolution)
    values = np.empty(resolution + 1)
    values[0] = 0.0
    np.cumsum(z, out=values[1:])
    return PathGrid(
        resolution=resolution,
        values=values,
        seed=int(seed),
        generation_log=(("generate", int(seed), NORMAL_METHOD),),
    )


def bridge_refine_spans(left, diff, span_length, factor, rng, dtype=np.float64):
    """Refine spans of a Brownian path by the conditional bridge law.

    left: (n,) span left endpoint values; diff: (n,) endpoint differences;
    span_length: common span length. Returns (n, factor+1) values whose
    columns 0 and `factor` reproduce the endpoints exactly.

    Interior points are sampled by pinning a fresh random walk to the span
    endpoints: v_k = left + S_k + (k/factor)(diff - S_factor), which has
    exactly the joint bridge law (equivalent to sequential conditioning).
    """
    n = len(left)
    sub = np.sqrt(span_length / factor)
    walk = rng.standard_normal((n, factor), dtype=dtype)
    walk *= dtype(sub) if dtype == np.float32 else sub
    s = np.cumsum(walk, axis=1, dtype=dtype)
    frac = (np.arange(1, factor + 1, dtype=dtype) / factor)[None, :]
    out = np.empty((n, factor + 1), dtype=dtype)
    out[:, 0] = left
    out[:, 1:] = s
    out[:, 1:] += frac * (np.asarray(diff, dtype=dtype)[:, None] - s[:, -1:])
    out[:, 1:] += np.asarray(left, dtype=dtype)[:, None]
    out[:, -1] = np.asarray(left, dtype=dtype) + np.asarray(diff, dtype=dtype)
    return out


def refine_path(path, factor, seed):
    """Refine a path by an integer factor, preserving old values bit-exactly.

    Each new interior point follows the Brownian bridge law conditional on
    the surrounding coarse values; distinct spans are independent.
    """
    if factor < 2:
        raise InvalidArgumentError("factor must be >= 2")
    old = path.values
    n = path.resolution
    span = 1.0 / n
    rng = generator(child_seed(seed, "refine"))
    refined = bridge_refine_spans(old[:-1], np.diff(old), span, factor, rng)
    values = np.append(refined[:, :factor].reshape(-1), old[-1])
    # restore coarse values bit-exactly at their rescaled indices
    values[::factor] = old
    return PathGrid(
        resolution=n * factor,
        values=values,
        seed=path.seed,
        generation_log=path.generation_log + (("refine", int(seed), NORMAL_METHOD),),
    )


def oscillation(path, a, b):
    """max - min of the path over grid points in [a, b].

    Discrete surrogate for sup over s,t in [a,b] of |X(t)-X(s)|.
    """
    ia, ib = path.grid_index(a), path.grid_index(b)
    if ia >= ib:
        raise InvalidArgumentError("require a < b")
    seg = path.values[ia : ib + 1]
    return float(seg.max() - seg.min())


def interval_oscillations(values, n_intervals):
    """Oscillation of each of n_intervals equal blocks of a value array.

    values has n_intervals * step + 1 points; each block includes both of
    its endpoints (shared with neighbours).
    """
    n_pts = len(values) - 1
    if n_pts % n_intervals != 0:
        raise InvalidArgumentError("value count - 1 must be divisible by the interval count")
    step = n_pts // n_intervals
    body = values[:-1].reshape(n_intervals, step)
    right = values[step::step]
    hi = np.maximum(body.max(axis=1), right)
    lo = np.minimum(body.min(axis=1), right)
    return hi - lo


def gauge(h):
    """Gauge sqrt(2 h log(1/h)) against which increments are measured."""
    if not 0.0 < h < 1.0:
        raise InvalidArgumentError("gauge requires 0 < h < 1")
    return float(np.sqrt(2.0 * h * np.log(1.0 / h)))


def path_to_csv(path, stream):
    """Dump a path as `t,x` rows at full round-trip precision."""
    stream.write("t,x\n")
    n = path.resolution
    for k, x in enumerate(path.values):
        stream.write(f"{k / n!r},{float(x)!r}\n")
