import csv
import json
import logging
import math
import os
import re

from experiments.output import SUMMARY_HEADER

_EPS_SUFFIX = re.compile(r"^(?P<name>.*)\[eps=(?P<eps>[^\]]+)\]$")


def _float(text):
    return float(text) if text not in ("", None) else math.nan


def read_summary(path):
    with open(path, newline="", encoding="utf-8") as f:
        reader = csv.reader(f)
        header = next(reader, None)
        if header != SUMMARY_HEADER:
            raise ValueError(f"{path} does not start with the summary header {','.join(SUMMARY_HEADER)}")
        return [dict(zip(header, row)) for row in reader]


def _run_info(out_dir):
    """eps of a single run and statistic kinds/anchors from verdict.json, when present."""
    path = os.path.join(out_dir, "verdict.json")
    if not os.path.exists(path):
        return math.nan, {}, ""
    with open(path, encoding="utf-8") as f:
        doc = json.load(f)
    runs = doc.get("runs", [])
    eps = runs[0]["eps"] if len(runs) == 1 else math.nan
    kinds = {}
    for run in runs:
        for s in run.get("statistics", []):
            kinds[s["name"]] = s["kind"]
    return eps, kinds, doc.get("anchor", "")


def collect_blocks(rows, default_eps=math.nan, kinds=None):
    """Group summary rows by statistic; each block is a list of (eps, estimate, stderr, target, z, pass)."""
    kinds = kinds or {}
    blocks = {}
    for row in rows:
        name = row["statistic"]
        if name.startswith("trend:"):
            continue
        m = _EPS_SUFFIX.match(name)
        eps = float(m.group("eps")) if m else default_eps
        base = m.group("name") if m else name
        column = "variance" if kinds.get(base) == "variance" else "mean"
        blocks.setdefault(base, []).append(
            (eps, _float(row[column]), _float(row["stderr"]), _float(row["target"]), _float(row["z"]),
             1 if row["pass"] == "true" else 0))
    for points in blocks.values():
        points.sort(key=lambda p: -p[0] if not math.isnan(p[0]) else 0.0)
    return blocks


def write_report_dat(path, blocks, anchor=""):
    """One gnuplot block per statistic, separated by two blank lines (select with `index`)."""
    with open(path, "w", encoding="utf-8") as f:
        if anchor:
            f.write(f"# anchor: {anchor}\n")
        for i, (name, points) in enumerate(blocks.items()):
            if i:
                f.write("\n\n")
            f.write(f"# index {i}: {name}\n")
            f.write("# eps estimate stderr target z pass\n")
            for point in points:
                f.write(" ".join(format(v, ".10g") if isinstance(v, float) else str(v) for v in point) + "\n")
    return path


def write_figure(path, blocks):
    import matplotlib
    matplotlib.use("Agg")
    from matplotlib import pyplot as plt

    n = max(len(blocks), 1)
    fig, axes = plt.subplots(n, 1, figsize=(6, 2.6 * n), squeeze=False)
    for ax, (name, points) in zip(axes[:, 0], blocks.items()):
        xs = list(range(len(points)))
        est = [p[1] for p in points]
        err = [p[2] if math.isfinite(p[2]) else 0.0 for p in points]
        ax.errorbar(xs, est, yerr=err, fmt="o", capsize=3)
        targets = [p[3] for p in points if math.isfinite(p[3])]
        if targets:
            ax.axhline(targets[-1], color="tab:red", linestyle="--", linewidth=1)
        ax.set_xticks(xs)
        ax.set_xticklabels([f"{p[0]:g}" for p in points])
        ax.set_xlabel("eps")
        ax.set_title(name, fontsize=9)
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)
    return path


def build_report(out_dir, figure=False):
    summary = os.path.join(out_dir, "summary.csv")
    if not os.path.exists(summary):
        raise ValueError(f"No summary.csv in {out_dir}; run an experiment with --out {out_dir} first")
    eps, kinds, anchor = _run_info(out_dir)
    blocks = collect_blocks(read_summary(summary), eps, kinds)
    paths = [write_report_dat(os.path.join(out_dir, "report.dat"), blocks, anchor)]
    if figure:
        paths.append(write_figure(os.path.join(out_dir, "report.png"), blocks))
    logging.info(f"Report written: {', '.join(paths)}")
    return paths
