import logging
import math
from concurrent.futures import ThreadPoolExecutor

import numpy as np

from estimators import (FieldSample, aggregate, jackknife_stderr, leave_one_out_variances,
                        pair_displacement_cov)
from experiments.spec import StatisticVerdict, TrendCheck, Verdict
from sampler import BudgetError, GasParameters, sample


def _z_score(estimate, target, stderr):
    diff = estimate - target
    if diff == 0:
        return 0.0
    if not stderr or not math.isfinite(stderr):
        return math.copysign(math.inf, diff)
    return diff / stderr


def evaluate(request, sample_, summary, eps, z_threshold):
    """Turn per-trial columns into one statistic verdict."""
    first = request.columns[0]
    i = summary.index(first)
    mean = float(summary.mean[i])
    variance = float(summary.variance[i])
    if request.kind == "mean":
        estimate, stderr = mean, float(summary.stderr_mean[i])
    elif request.kind == "variance":
        estimate, stderr = variance, float(summary.stderr_variance[i])
    elif request.kind == "correlation":
        stats = pair_displacement_cov(sample_.column(first), sample_.column(request.columns[1]))
        estimate, stderr = stats.correlation, stats.correlation_stderr
        mean, variance = estimate, stderr ** 2
    else:
        num = sample_.column(first)
        den = sample_.column(request.columns[1])
        den_var = float(np.var(den, ddof=1))
        estimate = float(np.var(num, ddof=1)) / den_var if den_var > 0 else math.nan
        with np.errstate(invalid="ignore", divide="ignore"):
            stderr = jackknife_stderr(leave_one_out_variances(num) / leave_one_out_variances(den))
        mean, variance = estimate, stderr ** 2

    enforced = request.check_max_eps is None or eps <= request.check_max_eps
    z = None
    passed = True
    if request.target is not None:
        z = _z_score(estimate, request.target, stderr)
        passed = abs(z) <= z_threshold
    if request.lower is not None and not estimate >= request.lower:
        passed = False
    if request.upper is not None and not estimate <= request.upper:
        passed = False
    return StatisticVerdict(request.name, request.kind, estimate, stderr, mean, variance, request.target, z,
                            passed or not enforced, enforced, request.lower, request.upper, request.anchor)


def _run_trial(family, spec, eps, window, trial_index):
    params = GasParameters(eps, window[0], window[1], spec.seed, trial_index)
    X = sample(params, spec.measure)
    return family.trial(X)


def run(spec, eps=None, threads=1):
    """Run every trial of one experiment at one eps and return its verdict."""
    eps = spec.eps_list[0] if eps is None else float(eps)
    spec = spec.replace(eps_list=[eps])
    family = spec.family(spec)
    requests = family.statistics(eps)
    try:
        window = family.window(eps)
    except BudgetError as e:
        raise BudgetError(f"{spec.name}: {str(e)}") from e
    logging.info(f"Running {spec.name} at eps={eps} with {spec.trials} trials on window {window}")

    def one(trial_index):
        try:
            return _run_trial(family, spec, eps, window, trial_index)
        except ValueError as e:
            names = ", ".join(r.name for r in requests)
            raise type(e)(f"{spec.name} (statistics {names}), trial {trial_index}: {str(e)}") from e

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            rows = list(pool.map(one, range(spec.trials)))
    else:
        rows = [one(i) for i in range(spec.trials)]

    sample_ = FieldSample.from_rows(rows)
    summary = aggregate(sample_)
    statistics = [evaluate(r, sample_, summary, eps, spec.z_threshold) for r in requests]
    verdict = Verdict(spec.name, eps, spec.trials, spec.seed, statistics, spec.anchor, family.notes(eps), sample_)
    for s in verdict.failures:
        logging.warning(f"{spec.name} eps={eps}: {s.name} failed, estimate {s.estimate:.6g} "
                        f"vs target {s.target} (z={s.z}) [{s.anchor}]")
    logging.info(f"{spec.name} at eps={eps}: {'PASS' if verdict.passed else 'FAIL'}")
    return verdict


def sweep(spec, eps_list=None, threads=1):
    eps_list = spec.eps_list if eps_list is None else [float(e) for e in eps_list]
    return [run(spec, eps, threads) for eps in eps_list]


def _monotone(estimates, stderrs, direction, z):
    """Consecutive points move in `direction` within +-(z/2) stderr bars; "flat" asks for agreement within z."""
    half = 0.5 * z
    for k in range(1, len(estimates)):
        prev, cur = estimates[k - 1], estimates[k]
        if direction == "decreasing":
            ok = cur - half * stderrs[k] <= prev + half * stderrs[k - 1]
        elif direction == "increasing":
            ok = cur + half * stderrs[k] >= prev - half * stderrs[k - 1]
        else:
            ok = abs(cur - prev) <= z * math.hypot(stderrs[k], stderrs[k - 1])
        if not ok:
            return False
    return True


def _finite(stderr):
    return stderr if math.isfinite(stderr) else 0.0


def check_trends(spec, verdicts, z_threshold=None):
    """Monotonicity of the statistics named in spec.trends along the sweep, within error bars."""
    z = spec.z_threshold if z_threshold is None else z_threshold
    checks = []
    if len(verdicts) < 2:
        return checks
    for name, direction in spec.trends.items():
        points = [v.statistic(name) for v in verdicts]
        est = [p.estimate for p in points]
        se = [_finite(p.stderr) for p in points]
        check = TrendCheck(name, direction, [v.eps for v in verdicts], est, se, _monotone(est, se, direction, z))
        checks.append(check)
        if not check.passed:
            logging.warning(f"{spec.name}: {check.describe()}")
    return checks


def check_orderings(spec, verdict, z_threshold=None):
    """Monotonicity across the statistics listed in spec.orderings, within one verdict."""
    z = spec.z_threshold if z_threshold is None else z_threshold
    checks = []
    for names, direction in spec.orderings:
        points = [verdict.statistic(name) for name in names]
        est = [p.estimate for p in points]
        se = [_finite(p.stderr) for p in points]
        label = f"{names[0]}..{names[-1]}"
        check = TrendCheck(label, direction, [verdict.eps], est, se, _monotone(est, se, direction, z), points=names)
        checks.append(check)
        if not check.passed:
            logging.warning(f"{spec.name}: {check.describe()}")
    return checks
