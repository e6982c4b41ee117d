import csv
import io
import json
import logging
import math
import os

SUMMARY_HEADER = ["statistic", "mean", "variance", "stderr", "target", "z", "pass"]
TRIALS_HEADER = ["trial", "statistic", "value"]


def format_float(value):
    if value is None:
        return ""
    value = float(value)
    if math.isnan(value):
        return "nan"
    if math.isinf(value):
        return "inf" if value > 0 else "-inf"
    return format(value, ".17g")


def _suffix(verdict, sweep):
    return f"[eps={verdict.eps:g}]" if sweep else ""


def summary_rows(verdicts, trends=()):
    sweep = len(verdicts) > 1
    rows = []
    for verdict in verdicts:
        for s in verdict.statistics:
            rows.append([s.name + _suffix(verdict, sweep), format_float(s.mean), format_float(s.variance),
                         format_float(s.stderr), format_float(s.target), format_float(s.z),
                         "true" if s.passed else "false"])
    for trend in trends:
        at = f"[eps={trend.eps[0]:g}]" if sweep and trend.points is not None else ""
        rows.append([f"trend:{trend.statistic}:{trend.direction}{at}", "", "", "", "", "",
                     "true" if trend.passed else "false"])
    return rows


def summary_csv(verdicts, trends=()):
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(SUMMARY_HEADER)
    writer.writerows(summary_rows(verdicts, trends))
    return buffer.getvalue()


def trials_csv(verdicts):
    sweep = len(verdicts) > 1
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(TRIALS_HEADER)
    for verdict in verdicts:
        sample = verdict.sample
        if sample is None:
            continue
        for trial in range(sample.n):
            for j, name in enumerate(sample.names):
                writer.writerow([trial, name + _suffix(verdict, sweep), format_float(sample.values[trial, j])])
    return buffer.getvalue()


def verdict_document(spec, verdicts, trends=()):
    passed = all(v.passed for v in verdicts) and all(t.passed for t in trends)
    doc = {
        "experiment": spec.name,
        "command": spec.command,
        "anchor": spec.anchor,
        "seed": spec.seed,
        "trials": spec.trials,
        "z_threshold": spec.z_threshold,
        "passed": passed,
        "runs": [v.to_dict() for v in verdicts],
    }
    if trends:
        doc["trends"] = [t.to_dict() for t in trends]
    return doc


def json_safe(value):
    """Non-finite floats become None so the document stays valid JSON."""
    if isinstance(value, float) and not math.isfinite(value):
        return None
    if isinstance(value, dict):
        return {k: json_safe(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [json_safe(v) for v in value]
    return value


def verdict_json(spec, verdicts, trends=()):
    return json.dumps(json_safe(verdict_document(spec, verdicts, trends)), indent=2, allow_nan=False) + "\n"


def write_outputs(out_dir, spec, verdicts, trends=()):
    """Write summary.csv, trials.csv and verdict.json into out_dir and return their paths."""
    os.makedirs(out_dir, exist_ok=True)
    files = {
        "summary.csv": summary_csv(verdicts, trends),
        "trials.csv": trials_csv(verdicts),
        "verdict.json": verdict_json(spec, verdicts, trends),
    }
    paths = []
    for name, text in files.items():
        path = os.path.join(out_dir, name)
        with open(path, "w", encoding="utf-8", newline="") as f:
            f.write(text)
        paths.append(path)
    logging.debug(f"Wrote {', '.join(paths)}")
    return paths


def write_particles_csv(path, X):
    with open(path, "w", encoding="utf-8", newline="") as f:
        writer = csv.writer(f, lineterminator="\n")
        writer.writerow(["id", "x", "v", "r"])
        for pid, x, v, r in zip(X.ids, X.x, X.v, X.r):
            writer.writerow([int(pid), format_float(x), format_float(v), format_float(r)])
    logging.debug(f"Wrote {X.n} particles to {path}")
    return path
