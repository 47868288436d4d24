"""Aggregate reporting: quantile tables (CSV) and matplotlib figures.

Figures are rendered deterministically (Agg backend, fixed metadata) so
reports stay byte-reproducible.
"""

import json
import os

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np

_PNG_META = {"Software": "rapidpoints"}


def load_summary(output_dir):
    with open(os.path.join(output_dir, "summary.json")) as fh:
        return json.load(fh)


def write_quantiles_csv(summary, path):
    with open(path, "w") as fh:
        fh.write("metric,q25,median,q75,n\n")
        for name, q in sorted(summary["quantiles"].items()):
            if q is None:
                continue
            fh.write(f"{name},{q['q25']!r},{q['median']!r},{q['q75']!r},{q['n']}\n")


def _survivors(summary):
    return [r for r in summary["runs"] if r["died_at"] is None]


def fig_box_counts(summary, path):
    """Median survivor count per stage on log-log axes with fitted slope."""
    runs = _survivors(summary)
    if not runs:
        return False
    N = summary["config"]["N"]
    stages = max(len(r["counts"]) for r in runs)
    med = [np.median([r["counts"][m] for r in runs if len(r["counts"]) > m]) for m in range(stages)]
    scales = [float(N) ** (m + 1) for m in range(stages)]
    fig, ax = plt.subplots(figsize=(5, 4))
    ax.loglog(scales, med, "o-", label="median count")
    if stages >= 2:
        slope = np.polyfit(np.log(scales), np.log(med), 1)[0]
        ax.set_title(f"box counts, fitted slope {slope:.3f}")
    ax.set_xlabel("1/h")
    ax.set_ylabel("surviving intervals")
    ax.legend()
    fig.tight_layout()
    fig.savefig(path, metadata=_PNG_META)
    plt.close(fig)
    return True


def fig_decay_exponents(summary, path):
    runs = [r for r in _survivors(summary) if "decay_fit" in r]
    if not runs:
        return False
    alpha = summary["config"]["alpha"]
    exps = [r["decay_fit"]["exponent"] for r in runs]
    fig, ax = plt.subplots(figsize=(5, 4))
    ax.hist(exps, bins=max(10, len(exps) // 10), color="steelblue")
    ax.axvline((1 - alpha**2) / 2, color="crimson", linestyle="--", label="(1-alpha^2)/2")
    ax.set_xlabel("fitted decay exponent")
    ax.set_ylabel("runs")
    ax.legend()
    fig.tight_layout()
    fig.savefig(path, metadata=_PNG_META)
    plt.close(fig)
    return True


def fig_masses(summary, path):
    runs = [r for r in _survivors(summary) if r.get("masses")]
    if not runs:
        return False
    stages = max(len(r["masses"]) for r in runs)
    data = [[r["masses"][m] for r in runs if len(r["masses"]) > m] for m in range(stages)]
    fig, ax = plt.subplots(figsize=(5, 4))
    ax.boxplot(data, tick_labels=[str(m + 1) for m in range(stages)])
    ax.axhline(0.25, color="crimson", linestyle="--", label="mass floor 1/4")
    ax.set_xlabel("stage")
    ax.set_ylabel("total mass")
    ax.legend()
    fig.tight_layout()
    fig.savefig(path, metadata=_PNG_META)
    plt.close(fig)
    return True


def render_report(output_dir):
    """Write quantiles.csv plus the standard figure set next to summary.json."""
    summary = load_summary(output_dir)
    write_quantiles_csv(summary, os.path.join(output_dir, "quantiles.csv"))
    written = ["quantiles.csv"]
    for name, fn in [
        ("box_counts.png", fig_box_counts),
        ("decay_exponents.png", fig_decay_exponents),
        ("masses.png", fig_masses),
    ]:
        if fn(summary, os.path.join(output_dir, name)):
            written.append(name)
    return written
