from experiments.registry import default_experiment, get_experiment, list_experiments
from experiments.runner import check_orderings, check_trends, run, sweep
from experiments.spec import ExperimentSpec, StatisticRequest, Verdict
