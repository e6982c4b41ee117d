import copy
import math

STATISTIC_KINDS = ("mean", "variance", "correlation", "variance_ratio")
TREND_DIRECTIONS = ("increasing", "decreasing", "flat")


class StatisticRequest:
    """One statistic an experiment reports.

    `columns` name the per-trial columns it is computed from: one for mean and
    variance, two for correlation (d1, d2) and variance_ratio (numerator,
    denominator). A statistic without target and bounds is property-only.
    """

    def __init__(self, name, kind, columns, target=None, lower=None, upper=None, check_max_eps=None, anchor=""):
        if kind not in STATISTIC_KINDS:
            raise ValueError(f"Unknown statistic kind {kind!r}; expected one of {STATISTIC_KINDS}")
        columns = (columns,) if isinstance(columns, str) else tuple(columns)
        expected = 1 if kind in ("mean", "variance") else 2
        if len(columns) != expected:
            raise ValueError(f"Statistic {name} of kind {kind} needs {expected} column(s), got {columns}")
        self.name = name
        self.kind = kind
        self.columns = columns
        self.target = None if target is None else float(target)
        self.lower = None if lower is None else float(lower)
        self.upper = None if upper is None else float(upper)
        self.check_max_eps = check_max_eps
        self.anchor = anchor

    @property
    def property_only(self):
        return self.target is None and self.lower is None and self.upper is None

    def __repr__(self):
        return f"StatisticRequest({self.name!r}, {self.kind!r}, target={self.target})"


class ExperimentSpec:
    def __init__(self, name, command, family, measure, eps_list=(0.01,), trials=500, horizon=1.0, times=(),
                 params=None, seed=0, z_threshold=3.0, anchor="", description="", trends=None, orderings=None):
        self.name = name
        self.command = command
        self.family = family
        self.measure = measure
        self.eps_list = [float(e) for e in eps_list]
        self.trials = int(trials)
        self.horizon = float(horizon)
        self.times = [float(t) for t in times]
        self.params = dict(params or {})
        self.seed = int(seed)
        self.z_threshold = float(z_threshold)
        self.anchor = anchor
        self.description = description
        self.trends = dict(trends or {})
        self.orderings = [(tuple(names), direction) for names, direction in (orderings or [])]
        self.validate()

    def validate(self):
        if self.trials < 2:
            raise ValueError(f"Experiment {self.name} needs at least 2 trials, got {self.trials}")
        if not self.eps_list:
            raise ValueError(f"Experiment {self.name} has no eps values")
        for eps in self.eps_list:
            if not (math.isfinite(eps) and 0 < eps <= 1):
                raise ValueError(f"Experiment {self.name}: eps must lie in (0, 1], got {eps}")
        if self.horizon < 0:
            raise ValueError(f"Experiment {self.name}: horizon must be nonnegative, got {self.horizon}")
        if any(t <= 0 for t in self.times):
            raise ValueError(f"Experiment {self.name}: times must be positive, got {self.times}")
        if self.seed < 0:
            raise ValueError(f"Experiment {self.name}: seed must be nonnegative, got {self.seed}")
        if not self.z_threshold > 0:
            raise ValueError(f"Experiment {self.name}: z_threshold must be positive, got {self.z_threshold}")
        for stat, direction in self.trends.items():
            if direction not in TREND_DIRECTIONS:
                raise ValueError(f"Experiment {self.name}: trend for {stat} must be one of {TREND_DIRECTIONS}")
        for names, direction in self.orderings:
            if len(names) < 2 or direction not in TREND_DIRECTIONS:
                raise ValueError(f"Experiment {self.name}: ordering {names} needs two statistics and a direction "
                                 f"in {TREND_DIRECTIONS}, got {direction!r}")

    def replace(self, **changes):
        clone = copy.copy(self)
        clone.params = dict(self.params)
        clone.trends = dict(self.trends)
        clone.orderings = list(self.orderings)
        for key, value in changes.items():
            if not hasattr(clone, key):
                raise ValueError(f"ExperimentSpec has no field {key}")
            setattr(clone, key, value)
        clone.eps_list = [float(e) for e in clone.eps_list]
        clone.times = [float(t) for t in clone.times]
        clone.trials = int(clone.trials)
        clone.horizon = float(clone.horizon)
        clone.seed = int(clone.seed)
        clone.z_threshold = float(clone.z_threshold)
        clone.validate()
        return clone

    def __repr__(self):
        return f"ExperimentSpec({self.name!r}, eps={self.eps_list}, trials={self.trials})"


class StatisticVerdict:
    def __init__(self, name, kind, estimate, stderr, mean, variance, target=None, z=None, passed=True,
                 enforced=True, lower=None, upper=None, anchor=""):
        self.name = name
        self.kind = kind
        self.estimate = estimate
        self.stderr = stderr
        self.mean = mean
        self.variance = variance
        self.target = target
        self.z = z
        self.passed = passed
        self.enforced = enforced
        self.lower = lower
        self.upper = upper
        self.anchor = anchor

    def to_dict(self):
        out = {"name": self.name, "kind": self.kind, "estimate": self.estimate, "stderr": self.stderr,
               "mean": self.mean, "variance": self.variance, "passed": self.passed, "enforced": self.enforced}
        for key in ("target", "z", "lower", "upper"):
            value = getattr(self, key)
            if value is not None:
                out[key] = value
        if self.anchor:
            out["anchor"] = self.anchor
        return out


class Verdict:
    def __init__(self, experiment, eps, trials, seed, statistics, anchor="", notes=None, sample=None):
        self.experiment = experiment
        self.eps = eps
        self.trials = trials
        self.seed = seed
        self.statistics = list(statistics)
        self.anchor = anchor
        self.notes = list(notes or [])
        self.sample = sample

    @property
    def passed(self):
        return all(s.passed for s in self.statistics)

    @property
    def failures(self):
        return [s for s in self.statistics if not s.passed]

    def statistic(self, name):
        for s in self.statistics:
            if s.name == name:
                return s
        raise ValueError(f"Verdict for {self.experiment} has no statistic {name}")

    def to_dict(self):
        out = {"eps": self.eps, "trials": self.trials, "passed": self.passed,
               "statistics": [s.to_dict() for s in self.statistics]}
        if self.notes:
            out["notes"] = list(self.notes)
        return out


class TrendCheck:
    """Monotonicity of estimates along the eps sweep, or along `points` (statistic names) within one run."""

    def __init__(self, statistic, direction, eps, estimates, stderrs, passed, points=None):
        self.statistic = statistic
        self.direction = direction
        self.eps = list(eps)
        self.estimates = list(estimates)
        self.stderrs = list(stderrs)
        self.passed = passed
        self.points = list(points) if points is not None else None

    def describe(self):
        if self.points is not None:
            return f"{self.statistic} is not {self.direction} along {self.points} at eps={self.eps[0]:g}"
        return f"{self.statistic} is not {self.direction} along eps={self.eps}"

    def to_dict(self):
        out = {"statistic": self.statistic, "direction": self.direction, "eps": self.eps,
               "estimates": self.estimates, "stderrs": self.stderrs, "passed": self.passed}
        if self.points is not None:
            out["points"] = self.points
        return out
