"""Vector-graphics figures drawn from the CSV tables of the other stages.

Every function takes already-parsed rows (``tables.read_csv`` output) and a
destination path.  SVG output is made reproducible: fixed hash salt, no
date metadata, text kept as text.
"""

from __future__ import annotations

from collections import defaultdict
from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

from .tables import parse_float  # noqa: E402

plt.rcParams.update({
    "svg.hashsalt": "hashnet",
    "svg.fonttype": "none",
    "font.size": 8,
    "axes.spines.top": False,
    "axes.spines.right": False,
    "legend.frameon": False,
    "figure.dpi": 100,
})

POLICY_STYLE = {"rolling_window": "-", "growing_aggregated": "--", "static_full": ":"}


def save(fig, path) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fig.savefig(path, format="svg", metadata={"Date": None}, bbox_inches="tight")
    plt.close(fig)
    return path


def _col(rows, key, conv=parse_float):
    return [conv(r[key]) for r in rows]


def _xy(rows, xkey, ykey):
    xs, ys = [], []
    for r in rows:
        y = parse_float(r[ykey])
        if y is not None:
            xs.append(float(r[xkey]))
            ys.append(y)
    return xs, ys


def metrics_panels(rows_by_policy: dict, path):
    keys = ["n_nodes", "n_edges", "density", "avg_degree", "clustering_standard",
            "clustering_raw", "assortativity", "largest_component_fraction"]
    fig, axes = plt.subplots(2, 4, figsize=(11, 4.5))
    for ax, key in zip(axes.ravel(), keys):
        for policy, rows in sorted(rows_by_policy.items()):
            xs, ys = _xy(rows, "week_index", key)
            ax.plot(xs, ys, POLICY_STYLE.get(policy, "-"), marker="o", ms=2, label=policy)
        ax.set_title(key)
        ax.set_xlabel("week")
    axes[0, 0].legend(fontsize=6)
    fig.tight_layout()
    return save(fig, path)


def persistence_panels(rows_by_policy: dict, path):
    keys = ["node_retention", "edge_retention", "node_renewal", "edge_renewal"]
    fig, axes = plt.subplots(1, 4, figsize=(11, 2.6), sharey=True)
    for ax, key in zip(axes, keys):
        for policy, rows in sorted(rows_by_policy.items()):
            xs, ys = _xy(rows, "week_index", key)
            ax.plot(xs, ys, POLICY_STYLE.get(policy, "-"), marker="o", ms=2, label=policy)
        ax.set_title(key)
        ax.set_xlabel("week")
        ax.set_ylim(0, 1.05)
    axes[0].legend(fontsize=6)
    fig.tight_layout()
    return save(fig, path)


def topic_counts(rows, path):
    fig, ax = plt.subplots(figsize=(4.5, 3))
    by_policy = defaultdict(list)
    for r in rows:
        by_policy[r["policy"]].append(r)
    for policy, rs in sorted(by_policy.items()):
        xs, ys = _xy(rs, "week_index", "n_topics")
        ax.plot(xs, ys, POLICY_STYLE.get(policy, "-"), marker="o", ms=2, label=policy)
    ax.set_xlabel("week")
    ax.set_ylabel("topics")
    ax.legend(fontsize=6)
    return save(fig, path)


def hashtag_histogram(rows, path):
    fig, ax = plt.subplots(figsize=(4, 3))
    xs = _col(rows, "n_hashtags")
    ys = _col(rows, "n_events")
    ax.bar(xs, ys, color="0.4")
    ax.set_yscale("log")
    ax.set_xlabel("hashtags per post")
    ax.set_ylabel("posts")
    return save(fig, path)


def _by(rows, key):
    out = defaultdict(list)
    for r in rows:
        out[r[key]].append(r)
    return dict(sorted(out.items()))


def hashtag_entropy(rows, path):
    fig, ax = plt.subplots(figsize=(6, 3))
    for group, rs in _by(rows, "group").items():
        xs, ys = _xy(rs, "day", "entropy")
        ax.plot(xs, ys, lw=1 if group != "all" else 2, label=group)
    ax.set_xlabel("day")
    ax.set_ylabel("hashtag entropy")
    ax.legend(fontsize=6, ncol=2)
    return save(fig, path)


def topic_entropy(rows_by_policy: dict, path):
    fig, axes = plt.subplots(1, len(rows_by_policy), figsize=(4 * len(rows_by_policy), 3),
                             squeeze=False, sharey=True)
    for ax, (policy, rows) in zip(axes[0], sorted(rows_by_policy.items())):
        for group, rs in _by(rows, "group").items():
            xs, ys = _xy(rs, "week_index", "entropy")
            ax.plot(xs, ys, marker="o", ms=2, lw=1 if group != "all" else 2, label=group)
        ax.set_title(policy)
        ax.set_xlabel("week")
    axes[0][0].set_ylabel("topic entropy")
    axes[0][0].legend(fontsize=6, ncol=2)
    return save(fig, path)


def similarity_lines(rows_by_policy: dict, path, self_pairs: bool = False):
    fig, axes = plt.subplots(len(rows_by_policy), 1, figsize=(7, 2.6 * len(rows_by_policy)),
                             squeeze=False, sharex=True)
    for ax, (policy, rows) in zip(axes[:, 0], sorted(rows_by_policy.items())):
        for r_key, rs in _by(rows, "pair").items():
            a, b = r_key.split("|")
            if (a == b) != self_pairs:
                continue
            xs, ys = _xy(rs, "day", "similarity")
            ax.plot(xs, ys, lw=1, label=r_key)
        ax.axhline(0, color="0.7", lw=0.5)
        ax.set_title(policy)
        ax.set_ylabel("self-similarity" if self_pairs else "similarity")
    axes[-1, 0].set_xlabel("day")
    axes[0, 0].legend(fontsize=5, ncol=4)
    return save(fig, path)


def policy_scatter(rows_a, rows_b, policies, path, max_pairs: int = 12):
    """Same pair under two policies, one point per shared day, coloured by time."""
    a_by, b_by = _by(rows_a, "pair"), _by(rows_b, "pair")
    pairs = [p for p in a_by if p in b_by][:max_pairs]
    n = max(len(pairs), 1)
    ncol = min(4, n)
    nrow = -(-n // ncol)
    fig, axes = plt.subplots(nrow, ncol, figsize=(2.6 * ncol, 2.4 * nrow), squeeze=False)
    for ax, pair in zip(axes.ravel(), pairs):
        va = {r["day"]: parse_float(r["similarity"]) for r in a_by[pair]}
        vb = {r["day"]: parse_float(r["similarity"]) for r in b_by[pair]}
        days = sorted(set(va) & set(vb), key=int)
        x = np.array([va[d] for d in days])
        y = np.array([vb[d] for d in days])
        ax.scatter(x, y, c=[int(d) for d in days], s=4, cmap="viridis")
        if len(days) > 1 and x.std() > 0 and y.std() > 0:
            ax.set_title(f"{pair}  r={np.corrcoef(x, y)[0, 1]:.2f}", fontsize=7)
        else:
            ax.set_title(pair, fontsize=7)
        ax.set_xlabel(policies[0], fontsize=6)
        ax.set_ylabel(policies[1], fontsize=6)
    for ax in axes.ravel()[len(pairs):]:
        ax.axis("off")
    fig.tight_layout()
    return save(fig, path)


def correlation_heatmap(grid_rows, path, title: str = "", low: float = 0.5):
    labels = [r["group"] for r in grid_rows]
    m = np.array([[np.nan if r[c] == "" else float(r[c]) for c in labels] for r in grid_rows])
    fig, ax = plt.subplots(figsize=(1 + 0.5 * len(labels), 0.8 + 0.5 * len(labels)))
    im = ax.imshow(m, vmin=-1, vmax=1, cmap="RdBu")
    ax.set_xticks(range(len(labels)), labels, rotation=90)
    ax.set_yticks(range(len(labels)), labels)
    for i in range(len(labels)):
        for j in range(len(labels)):
            if not np.isnan(m[i, j]) and m[i, j] < low:
                ax.text(j, i, "*", ha="center", va="center", fontsize=8)
    ax.set_title(title, fontsize=7)
    fig.colorbar(im, ax=ax, shrink=0.8)
    return save(fig, path)


def group_sizes(rows, path):
    fig, ax = plt.subplots(figsize=(6, 3))
    for label, rs in _by(rows, "label").items():
        xs, ys = _xy(rs, "week", "size")
        ax.plot(xs, ys, marker="o", ms=2, label=label)
    ax.set_xlabel("week")
    ax.set_ylabel("weekly group size")
    ax.legend(fontsize=6, ncol=3)
    return save(fig, path)
