"""Verification laboratory for the supporting inequalities.

Every bound used by the construction is implemented next to an exact or
brute-force counterpart: exponential-moment and Chernoff bounds for
centred Bernoulli sums, Mills-ratio brackets for the Gaussian tail,
Feller's second-moment binomial tail bounds (with exact log-domain tail
sums), the per-stage exceptional-probability budget, and the stage
probability monotonicity condition.
"""

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.special import gammaln

from ._rng import child_seed, generator
from .errors import DomainError, InvalidArgumentError
from .selection import ProbabilityEstimate


@dataclass(frozen=True)
class MomentCheck:
    lhs: float
    mid: float
    rhs: float
    holds: bool


def exponential_moment_check(p, t):
    """p e^{t(1-p)} + (1-p) e^{-pt} <= 1 + p(1-p) t^2 <= e^{t^2 p}."""
    if not 0.0 <= p <= 1.0:
        raise InvalidArgumentError("p must lie in [0, 1]")
    if not -1.0 <= t <= 1.0:
        raise InvalidArgumentError("t must lie in [-1, 1]")
    lhs = p * math.exp(t * (1.0 - p)) + (1.0 - p) * math.exp(-p * t)
    mid = 1.0 + p * (1.0 - p) * t * t
    rhs = math.exp(t * t * p)
    return MomentCheck(lhs=lhs, mid=mid, rhs=rhs, holds=lhs <= mid <= rhs)


@dataclass(frozen=True)
class ChernoffParams:
    """Parameters of the centred Bernoulli sum Z = sum (p - xi_n) a_n."""

    p: float
    weights: np.ndarray
    Y: float
    sigma2: float = field(init=False)
    B: float = field(init=False)

    def __post_init__(self):
        if not 0.0 < self.p <= 1.0:
            raise InvalidArgumentError("p must lie in (0, 1]")
        if self.Y <= 0:
            raise InvalidArgumentError("Y must be positive")
        w = np.asarray(self.weights, dtype=complex)
        if w.size == 0:
            raise InvalidArgumentError("weights must be nonempty")
        object.__setattr__(self, "weights", w)
        object.__setattr__(self, "sigma2", float(np.sum(np.abs(w) ** 2)))
        object.__setattr__(self, "B", float(np.max(np.abs(w))))
        w.setflags(write=False)

    @property
    def admissible(self):
        return self.Y * self.B < 2.0 * self.p * self.sigma2


def chernoff_tail_bound(params):
    """4 exp(-Y^2 / (16 p sigma^2)) for admissible parameters."""
    if not params.admissible:
        raise DomainError(
            f"inadmissible: Y*B = {params.Y * params.B:.6g} >= 2*p*sigma^2 = {2 * params.p * params.sigma2:.6g}"
        )
    return 4.0 * math.exp(-params.Y**2 / (16.0 * params.p * params.sigma2))


def chernoff_empirical(params, trials, seed, chunk=None):
    """Monte-Carlo frequency of |sum (p - xi_n) a_n| >= Y."""
    if trials < 10**4:
        raise InvalidArgumentError("trials must be >= 10^4")
    if not params.admissible:
        raise DomainError("inadmissible parameter set")
    rng = generator(child_seed(seed, "chernoff"))
    m = len(params.weights)
    chunk = chunk or max(1, 2**22 // m)
    hits = 0
    done = 0
    base = params.p * params.weights.sum()
    while done < trials:
        b = min(chunk, trials - done)
        xi = rng.random((b, m)) < params.p
        z = base - xi @ params.weights
        hits += int(np.count_nonzero(np.abs(z) >= params.Y))
        done += b
    return ProbabilityEstimate(p_hat=hits / trials, trials=trials)


def gaussian_tail_bounds(Y):
    """Mills-ratio bracket and exact value of the standard Gaussian tail.

    lower = phi(Y)(1/Y - 1/Y^3) floored at 0, upper = phi(Y)/Y,
    exact = Q(Y) via the complementary error function.
    """
    if Y <= 0:
        raise InvalidArgumentError("Y must be positive")
    phi = math.exp(-0.5 * Y * Y) / math.sqrt(2.0 * math.pi)
    lower = max(0.0, phi * (1.0 / Y - 1.0 / Y**3))
    upper = phi / Y
    exact = 0.5 * math.erfc(Y / math.sqrt(2.0))
    return lower, upper, exact


def _log_binomial_pmf(n, p, k):
    k = np.asarray(k, dtype=float)
    return (
        gammaln(n + 1.0)
        - gammaln(k + 1.0)
        - gammaln(n - k + 1.0)
        + k * math.log(p)
        + (n - k) * math.log1p(-p)
    )


def exact_binomial_tail(n, p, r, side):
    """Exact P{S_n >= r} or P{S_n <= r} by log-domain summation.

    Stable down to tails far below 1e-300.
    """
    if side == "upper":
        ks = np.arange(math.ceil(r), n + 1)
    elif side == "lower":
        ks = np.arange(0, math.floor(r) + 1)
    else:
        raise InvalidArgumentError("side must be 'upper' or 'lower'")
    if len(ks) == 0:
        return 0.0
    logs = _log_binomial_pmf(n, p, ks)
    peak = logs.max()
    return float(min(1.0, math.exp(peak) * np.exp(logs - peak).sum()))


def binomial_tail_bounds(n, p, r, side):
    """Feller's second-moment tail bound paired with the exact tail.

    upper: P{S_n >= r} <= r(1-p) / (r - np)^2, valid for r > np;
    lower: P{S_n <= r} <= (n-r)p / (np - r)^2, valid for r < np.
    """
    if n < 1 or not 0.0 < p < 1.0:
        raise InvalidArgumentError("need n >= 1 and p in (0, 1)")
    mean = n * p
    if side == "upper":
        if r <= mean:
            raise DomainError(f"upper bound requires r > np (r={r}, np={mean})")
        bound = r * (1.0 - p) / (r - mean) ** 2
    elif side == "lower":
        if r >= mean:
            raise DomainError(f"lower bound requires r < np (r={r}, np={mean})")
        bound = (n - r) * p / (mean - r) ** 2
    else:
        raise InvalidArgumentError("side must be 'upper' or 'lower'")
    return bound, exact_binomial_tail(n, p, r, side)


def binomial_tail_table(n, p):
    """Exact tails for every integer r at once.

    Returns (upper_tails, lower_tails) with upper_tails[r] = P{S_n >= r}
    and lower_tails[r] = P{S_n <= r} for r = 0..n, computed by cumulative
    log-domain summation.
    """
    ks = np.arange(0, n + 1)
    logs = _log_binomial_pmf(n, p, ks)
    lower = np.logaddexp.accumulate(logs)
    upper = np.logaddexp.accumulate(logs[::-1])[::-1]
    return np.minimum(1.0, np.exp(upper)), np.minimum(1.0, np.exp(lower))


@dataclass(frozen=True)
class CountBoundReport:
    threshold: float
    bound: float
    empirical_freq: float
    holds: bool


def count_bound_check(N, beta, gamma, counts):
    """Frequency of |A| >= N^(1-beta^2-gamma) against the bound N^-(1-beta^2-gamma)."""
    expo = 1.0 - beta * beta - gamma
    if expo <= 0:
        raise DomainError("need 1 - beta^2 - gamma > 0")
    counts = np.asarray(counts, dtype=float)
    if counts.size == 0:
        raise InvalidArgumentError("ensemble must be nonempty")
    threshold = N**expo
    bound = N ** (-expo)
    freq = float(np.mean(counts >= threshold))
    ci = math.sqrt(freq * (1.0 - freq) / counts.size)
    return CountBoundReport(threshold=threshold, bound=bound, empirical_freq=freq, holds=freq <= bound + 3.0 * ci)


def exceptional_budget(eta, N, delta2, gamma, stages):
    """Partial sum of the per-stage exceptional-probability series.

    nth term: eta^n + N^-n sqrt(2 n log N) + N^(-n(1 - delta2 - gamma)).
    """
    if not 0.0 < eta < 0.5:
        raise DomainError("eta must lie in (0, 1/2)")
    if 1.0 - delta2 - gamma <= 0:
        raise DomainError("need 1 - delta2 - gamma > 0")
    if N < 2 or stages < 1:
        raise DomainError("need N >= 2 and stages >= 1")
    total = 0.0
    for n in range(1, stages + 1):
        total += eta**n + math.sqrt(2.0 * n * math.log(N)) / N**n + N ** (-n * (1.0 - delta2 - gamma))
    return total


@dataclass(frozen=True)
class ProbabilityMonotonicityReport:
    violations: int


def probability_monotonicity_check(probabilities, N):
    """Count stages where p_m / N > p_{m+1}."""
    if len(probabilities) < 2:
        raise InvalidArgumentError("need probabilities for >= 2 stages")
    violations = sum(1 for a, b in zip(probabilities, probabilities[1:]) if a / N > b)
    return ProbabilityMonotonicityReport(violations=violations)
