"""Grid sweeps over the inequality laboratory, emitted as one JSON report."""

import json
import math

import numpy as np

from .bounds import (
    binomial_tail_table,
    chernoff_tail_bound,
    ChernoffParams,
    exceptional_budget,
    exponential_moment_check,
    gaussian_tail_bounds,
)
from .errors import InvalidArgumentError

DEFAULT_GRIDS = {
    "moment_points": 200,                       # per axis of the (p, t) grid
    "gaussian_y": [0.01, 8.0, 0.01],            # start, stop, step
    "binomial_n": [10, 200],                    # inclusive range
    "binomial_p": [0.05, 0.95, 0.05],           # start, stop, step
    "chernoff_points": 50,
    "budget_stages": [50, 60],
}


def _moment_sweep(points):
    worst = None
    failures = 0
    for p in np.linspace(0.0, 1.0, points):
        for t in np.linspace(-1.0, 1.0, points):
            chk = exponential_moment_check(float(p), float(t))
            if not chk.holds:
                failures += 1
                worst = {"p": float(p), "t": float(t)}
    return {
        "check": "exponential_moment",
        "params": {"grid": f"{points}x{points} over [0,1]x[-1,1]"},
        "failures": failures,
        "worst": worst,
        "holds": failures == 0,
    }


def _gaussian_sweep(spec):
    start, stop, step = spec
    ys = np.arange(start, stop + step / 2, step)
    failures = 0
    for y in ys:
        lo, hi, exact = gaussian_tail_bounds(float(y))
        if not lo <= exact <= hi:
            failures += 1
    return {
        "check": "gaussian_tail_bracket",
        "params": {"Y": [float(start), float(stop), float(step)], "points": len(ys)},
        "failures": failures,
        "holds": failures == 0,
    }


def _binomial_sweep(n_range, p_spec):
    n_lo, n_hi = n_range
    ps = np.arange(p_spec[0], p_spec[1] + p_spec[2] / 2, p_spec[2])
    failures = checked = skipped = 0
    for n in range(n_lo, n_hi + 1):
        for p in ps:
            p = float(p)
            upper, lower = binomial_tail_table(n, p)
            mean = n * p
            for r in range(0, n + 1):
                if r > mean:
                    checked += 1
                    if upper[r] > r * (1.0 - p) / (r - mean) ** 2 * (1 + 1e-12):
                        failures += 1
                elif r < mean:
                    checked += 1
                    if lower[r] > (n - r) * p / (mean - r) ** 2 * (1 + 1e-12):
                        failures += 1
                else:
                    skipped += 1   # r == np: neither side's precondition holds
    return {
        "check": "binomial_tail_feller",
        "params": {"n": list(n_range), "p": [float(x) for x in p_spec]},
        "checked": checked,
        "skipped_precondition": skipped,
        "failures": failures,
        "holds": failures == 0,
    }


def chernoff_parameter_grid(points=50):
    """Admissible equal-weight (m, p, Y) triples, Y swept below 2pm."""
    cases = []
    ms = [20, 50, 100, 200, 400]
    ps = [0.1, 0.3, 0.5, 0.7, 0.9]
    fracs = np.linspace(0.3, 0.9, math.ceil(points / (len(ms) * len(ps))) + 1)
    for m in ms:
        for p in ps:
            for f in fracs:
                y = float(f * 2.0 * p * m) * 0.999
                if y > 0:
                    cases.append((m, p, y))
                if len(cases) == points:
                    return cases
    return cases


def _chernoff_sweep(points):
    failures = 0
    cases = chernoff_parameter_grid(points)
    for m, p, y in cases:
        params = ChernoffParams(p=p, weights=np.ones(m), Y=y)
        bound = chernoff_tail_bound(params)
        upper, lower = binomial_tail_table(m, p)
        mean = m * p
        hi = upper[math.ceil(mean + y)] if mean + y <= m else 0.0
        lo = lower[math.floor(mean - y)] if mean - y >= 0 else 0.0
        if hi + lo > bound * (1 + 1e-12):
            failures += 1
    return {
        "check": "chernoff_vs_exact_binomial",
        "params": {"points": len(cases)},
        "failures": failures,
        "holds": failures == 0,
    }


def _budget_check(stage_pair, eta=0.1, N=256, delta2=0.25, gamma=0.25):
    s50 = exceptional_budget(eta, N, delta2, gamma, stage_pair[0])
    s60 = exceptional_budget(eta, N, delta2, gamma, stage_pair[1])
    partials = [exceptional_budget(eta, N, delta2, gamma, k) for k in range(1, stage_pair[0] + 1)]
    monotone = all(b >= a for a, b in zip(partials, partials[1:]))
    return {
        "check": "exceptional_budget_convergence",
        "params": {"eta": eta, "N": N, "delta2": delta2, "gamma": gamma, "stages": list(stage_pair)},
        "gap": abs(s60 - s50),
        "monotone": monotone,
        "holds": monotone and abs(s60 - s50) < 1e-10,
    }


def run_bounds_suite(grids=None):
    """Run every inequality sweep; returns the verification report dict."""
    cfg = dict(DEFAULT_GRIDS)
    if grids:
        cfg.update(grids)
    if cfg["moment_points"] < 2 or not cfg["gaussian_y"] or cfg["binomial_n"][0] > cfg["binomial_n"][1]:
        raise InvalidArgumentError("empty or degenerate verification grid")
    if cfg["chernoff_points"] < 1:
        raise InvalidArgumentError("empty chernoff grid")
    checks = [
        _moment_sweep(cfg["moment_points"]),
        _gaussian_sweep(cfg["gaussian_y"]),
        _binomial_sweep(cfg["binomial_n"], cfg["binomial_p"]),
        _chernoff_sweep(cfg["chernoff_points"]),
        _budget_check(cfg["budget_stages"]),
    ]
    return {"checks": checks, "holds_all": all(c["holds"] for c in checks)}


def write_report(report, path):
    from .runner import load_schema
    import jsonschema

    jsonschema.validate(report, load_schema("verification"))
    with open(path, "w") as fh:
        json.dump(report, fh, indent=1, sort_keys=True)
        fh.write("\n")
