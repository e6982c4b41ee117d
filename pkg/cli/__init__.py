import argparse
import logging
import os
import sys

from cli.config import ConfigError, RunConfig
from cli.report import build_report
from database import archive_verdict
from experiments import (check_orderings, check_trends, default_experiment, get_experiment, list_experiments, run,
                         sweep)
from experiments.output import summary_csv, verdict_document, verdict_json, write_outputs, write_particles_csv
from experiments.registry import COMMANDS
from sampler import GasParameters, sample

EXIT_PASS = 0
EXIT_FAIL = 1
EXIT_USAGE = 2

COMMAND_HELP = {
    "sample": "Poisson sampler checks and exact mean laws",
    "tagged-msd": "tagged quasi-particle diffusion",
    "pair-cov": "covariance of tagged quasi-particle pairs",
    "euler-field": "Euler-scale velocity and field transport",
    "diffusive-field": "diffusive-scale field stationarity",
    "static-cov": "static covariance of the point and rod fields",
    "fourier": "persistence of windowed Fourier modes",
}


def _eps_list(text):
    try:
        values = [float(part) for part in text.split(",") if part.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}")
    if not values:
        raise argparse.ArgumentTypeError("no eps values given")
    return values


def build_parser():
    parser = argparse.ArgumentParser(prog="rodflux",
                                     description="Hard-rod gas simulator and fluctuation verification harness")
    parser.add_argument("-v", "--verbose", action="count", default=0, help="-v for INFO, -vv for DEBUG")
    sub = parser.add_subparsers(dest="command", metavar="command")
    sub.required = True

    for command in COMMANDS:
        p = sub.add_parser(command, help=COMMAND_HELP[command])
        p.add_argument("--config", help="YAML run configuration")
        p.add_argument("--experiment", help="built-in experiment name (see list-experiments)")
        p.add_argument("--eps", type=_eps_list, help="scale parameter; a comma list runs a sweep")
        p.add_argument("--trials", type=int)
        p.add_argument("--seed", type=int)
        p.add_argument("--threads", type=int)
        p.add_argument("--out", help="output directory")
        p.add_argument("--format", choices=("csv", "json"), help="what to print on stdout")
        p.add_argument("--archive", help="MongoDB connection string for the results archive")
        p.add_argument("-v", "--verbose", action="count", default=0, dest="sub_verbose")

    sub.add_parser("list-experiments", help="print the built-in experiments")

    p = sub.add_parser("report", help="turn a run directory into report.dat (and report.png)")
    p.add_argument("--out", required=True, help="run directory holding summary.csv")
    p.add_argument("--figure", action="store_true", help="also render report.png")
    return parser


def _set_verbosity(level):
    root = logging.getLogger()
    if level >= 2:
        root.setLevel(logging.DEBUG)
    elif level == 1:
        root.setLevel(logging.INFO)
    else:
        root.setLevel(logging.WARNING)


def _first(*values):
    for value in values:
        if value is not None:
            return value
    return None


def _env_int(name):
    raw = os.environ.get(name)
    if raw is None or raw == "":
        return None
    try:
        value = int(raw)
    except ValueError:
        raise ValueError(f"{name} must be an integer, got {raw!r}")
    if value < 1:
        raise ValueError(f"{name} must be at least 1, got {value}")
    return value


def resolve_spec(args, config):
    """Built-in experiment with config values, then flags, applied on top."""
    name = _first(args.experiment, config.experiment.get("name") if config else None)
    spec = get_experiment(name, args.command) if name else default_experiment(args.command)
    if spec.command != args.command:
        raise ValueError(f"Experiment {spec.name} belongs to the {spec.command} command, not {args.command}")

    changes = {}
    if config is not None:
        if config.measure is not None:
            changes["measure"] = config.measure
        for key, field in (("eps", "eps_list"), ("trials", "trials"), ("horizon", "horizon"),
                           ("times", "times"), ("z_threshold", "z_threshold")):
            if key in config.experiment:
                changes[field] = config.experiment[key]
        if config.params:
            changes["params"] = {**spec.params, **config.params}
        if "seed" in config.run:
            changes["seed"] = config.run["seed"]
    if args.eps is not None:
        changes["eps_list"] = args.eps
    if args.trials is not None:
        changes["trials"] = args.trials
    if args.seed is not None:
        changes["seed"] = args.seed
    return spec.replace(**changes) if changes else spec


def _run_command(args):
    config = RunConfig.from_file(args.config) if args.config else None
    run_cfg = config.run if config else {}
    spec = resolve_spec(args, config)
    threads = _first(args.threads, run_cfg.get("threads"), _env_int("RODFLUX_THREADS"), 1)
    if threads < 1:
        raise ValueError(f"--threads must be at least 1, got {threads}")
    out_dir = _first(args.out, run_cfg.get("out"), os.path.join("rodflux-out", spec.name))
    fmt = _first(args.format, run_cfg.get("format"), "csv")
    archive = _first(args.archive, run_cfg.get("archive"), os.environ.get("RODFLUX_ARCHIVE") or None)

    logging.info(f"{spec.name}: eps={spec.eps_list}, trials={spec.trials}, seed={spec.seed}, threads={threads}")
    if len(spec.eps_list) > 1:
        verdicts = sweep(spec, spec.eps_list, threads)
        trends = check_trends(spec, verdicts)
    else:
        verdicts = [run(spec, spec.eps_list[0], threads)]
        trends = []
    trends += [check for verdict in verdicts for check in check_orderings(spec, verdict)]

    write_outputs(out_dir, spec, verdicts, trends)
    if args.command == "sample":
        family = spec.family(spec)
        eps = spec.eps_list[0]
        lo, hi = family.window(eps)
        X = sample(GasParameters(eps, lo, hi, spec.seed, 0), spec.measure)
        write_particles_csv(os.path.join(out_dir, "particles.csv"), X)

    if fmt == "json":
        sys.stdout.write(verdict_json(spec, verdicts, trends))
    else:
        sys.stdout.write(summary_csv(verdicts, trends))

    if archive:
        ok, message = archive_verdict(archive, verdict_document(spec, verdicts, trends))
        if ok:
            logging.info(message)
        else:
            logging.warning(f"Archive skipped: {message}")

    passed = all(v.passed for v in verdicts) and all(t.passed for t in trends)
    if not passed:
        for verdict in verdicts:
            for s in verdict.failures:
                target = f" target {s.target:.6g}, z={s.z:.3g}" if s.target is not None else ""
                bounds = "".join(f" {label} {value:g}" for label, value in (("lower", s.lower), ("upper", s.upper))
                                 if value is not None)
                sys.stderr.write(f"FAIL {s.name} at eps={verdict.eps:g}: estimate {s.estimate:.6g}{target}"
                                 f"{bounds} [{s.anchor or spec.anchor}]\n")
        for trend in trends:
            if not trend.passed:
                sys.stderr.write(f"FAIL trend {trend.describe()}\n")
    return EXIT_PASS if passed else EXIT_FAIL


def _list_command():
    for spec in list_experiments():
        eps = ",".join(f"{e:g}" for e in spec.eps_list)
        sys.stdout.write(f"{spec.name:32s} {spec.command:16s} eps={eps:16s} trials={spec.trials:<6d} {spec.anchor}\n")
    return EXIT_PASS


def main(argv=None):
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return EXIT_USAGE if e.code not in (0, None) else EXIT_PASS
    _set_verbosity(max(args.verbose, getattr(args, "sub_verbose", 0)))

    try:
        if args.command == "list-experiments":
            return _list_command()
        if args.command == "report":
            for path in build_report(args.out, args.figure):
                sys.stdout.write(path + "\n")
            return EXIT_PASS
        return _run_command(args)
    except ConfigError as e:
        sys.stderr.write(f"rodflux: config error: {str(e)}\n")
        return EXIT_USAGE
    except (ValueError, OSError) as e:
        logging.error(f"{args.command} failed: {str(e)}")
        sys.stderr.write(f"rodflux: error: {str(e)}\n")
        return EXIT_USAGE
