"""YAML run configuration.

    rho: 1.0
    atoms:
      - {v: -1.0, r: 0.5, w: 0.5}
      - {v: 1.0, r: 0.5, w: 0.5}

    experiment:
      name: tagged-msd-setupA
      eps: [0.005]          # a single number is accepted too
      trials: 2000
      horizon: 1.0
      times: [0.25, 0.5, 1.0]
      z_threshold: 3.0
      params:               # family-specific values, passed through
        v: 1.0

    run:
      seed: 7
      threads: 4
      out: results/tagged
      format: csv           # or json
      archive: mongodb://localhost:27017/
"""
import logging
import math

from ruamel.yaml import YAML
from ruamel.yaml.error import YAMLError

from measure_model import WEIGHT_TOLERANCE, VelocityLengthMeasure

_NUMBER = (int, float)

SECTIONS = ("rho", "atoms", "experiment", "run")
EXPERIMENT_KEYS = {"name": str, "eps": "eps", "trials": int, "horizon": _NUMBER, "times": "numbers",
                   "z_threshold": _NUMBER, "params": dict}
RUN_KEYS = {"seed": int, "threads": int, "out": str, "format": str, "archive": str}
ATOM_KEYS = ("v", "r", "w")
FORMATS = ("csv", "json")


class ConfigError(ValueError):
    def __init__(self, message, key=None, line=None):
        self.key = key
        self.line = line
        where = f"line {line}: " if line else ""
        super().__init__(f"{where}{message}")


def _line(node, key):
    """1-based line of a mapping key or sequence item, from the round-trip loader's position data."""
    try:
        if isinstance(node, list):
            return node.lc.item(key)[0] + 1
        return node.lc.key(key)[0] + 1
    except (AttributeError, KeyError, IndexError, TypeError):
        return None


def _plain(value):
    if isinstance(value, dict):
        return {str(k): _plain(v) for k, v in value.items()}
    if isinstance(value, list):
        return [_plain(v) for v in value]
    if isinstance(value, bool):
        return value
    if isinstance(value, int):
        return int(value)
    if isinstance(value, float):
        return float(value)
    if isinstance(value, str):
        return str(value)
    return value


def _is_number(value):
    return isinstance(value, _NUMBER) and not isinstance(value, bool)


class RunConfig:
    """A parsed config file. Unset values stay empty so command-line flags and the environment can fill them."""

    def __init__(self, path=None):
        self.path = path
        self.rho = None
        self.atoms = []
        self.measure = None
        self.experiment = {}
        self.params = {}
        self.run = {}

    @staticmethod
    def error(message, key, node=None, at=None):
        """ConfigError for dotted `key`, located at `at` (a key or index) inside `node`."""
        return ConfigError(f"{key}: {message}", key, _line(node, at) if node is not None else None)

    @classmethod
    def from_file(cls, path):
        try:
            with open(path, "r", encoding="utf-8") as f:
                text = f.read()
        except OSError as e:
            raise ConfigError(f"Cannot read config {path}: {str(e)}") from e
        config = cls.from_text(text, path)
        logging.debug(f"Loaded config {path}")
        return config

    @classmethod
    def from_text(cls, text, path=None):
        config = cls(path)
        try:
            data = YAML().load(text)
        except YAMLError as e:
            mark = getattr(e, "problem_mark", None) or getattr(e, "context_mark", None)
            raise ConfigError(f"Malformed config: {str(e)}", line=mark.line + 1 if mark else None) from e
        config._parse(data)
        return config

    def _check_type(self, value, expected, key, node, at):
        if expected == "eps":
            values = value if isinstance(value, list) else [value]
            if not values or not all(_is_number(v) for v in values):
                raise self.error("expected a number or a list of numbers", key, node, at)
            return [float(v) for v in values]
        if expected == "numbers":
            if not isinstance(value, list) or not all(_is_number(v) for v in value):
                raise self.error("expected a list of numbers", key, node, at)
            return [float(v) for v in value]
        if expected is _NUMBER:
            if not _is_number(value):
                raise self.error(f"expected a number, got {type(value).__name__}", key, node, at)
            return float(value)
        if isinstance(value, bool) or not isinstance(value, expected):
            raise self.error(f"expected {expected.__name__}, got {type(value).__name__}", key, node, at)
        return _plain(value)

    def _finite(self, node, at, key):
        value = self._check_type(node[at], _NUMBER, key, node, at)
        if not math.isfinite(value):
            raise self.error(f"must be finite, got {value}", key, node, at)
        return value

    def _section(self, data, name):
        section = data.get(name)
        if section is None:
            return {}
        if not isinstance(section, dict):
            raise self.error("expected a mapping", name, data, name)
        return section

    def _parse(self, data):
        if data is None:
            return
        if not isinstance(data, dict):
            raise ConfigError("The config must be a mapping of sections", line=1)
        for key in data:
            if key not in SECTIONS:
                raise self.error("unknown key", str(key), data, key)

        if "rho" in data:
            self.rho = self._finite(data, "rho", "rho")
            if self.rho <= 0:
                raise self.error(f"must be positive, got {self.rho}", "rho", data, "rho")
        self._parse_atoms(data)
        if self.atoms or self.rho is not None:
            self._build_measure(data)

        experiment = self._section(data, "experiment")
        for key, value in experiment.items():
            path = f"experiment.{key}"
            if key not in EXPERIMENT_KEYS:
                raise self.error("unknown key", path, experiment, key)
            checked = self._check_type(value, EXPERIMENT_KEYS[key], path, experiment, key)
            if key == "params":
                self.params = dict(checked)
            else:
                self.experiment[key] = checked
        if "trials" in self.experiment and self.experiment["trials"] < 2:
            raise self.error("at least 2 trials are needed", "experiment.trials", experiment, "trials")

        run = self._section(data, "run")
        for key, value in run.items():
            path = f"run.{key}"
            if key not in RUN_KEYS:
                raise self.error("unknown key", path, run, key)
            self.run[key] = self._check_type(value, RUN_KEYS[key], path, run, key)
        if "format" in self.run and self.run["format"] not in FORMATS:
            raise self.error(f"must be one of {FORMATS}", "run.format", run, "format")
        if "threads" in self.run and self.run["threads"] < 1:
            raise self.error("must be at least 1", "run.threads", run, "threads")
        if "seed" in self.run and self.run["seed"] < 0:
            raise self.error("must be nonnegative", "run.seed", run, "seed")

    def _parse_atoms(self, data):
        atoms = data.get("atoms")
        if atoms is None:
            return
        if not isinstance(atoms, list) or not atoms:
            raise self.error("expected a list of atoms with v, r and w", "atoms", data, "atoms")
        for i, atom in enumerate(atoms):
            path = f"atoms.{i}"
            if not isinstance(atom, dict):
                raise self.error("expected a mapping with v, r and w", path, atoms, i)
            for key in atom:
                if key not in ATOM_KEYS:
                    raise self.error("unknown key", f"{path}.{key}", atom, key)
            for key in ATOM_KEYS:
                if key not in atom:
                    raise self.error("missing", f"{path}.{key}", atoms, i)
            record = {key: self._finite(atom, key, f"{path}.{key}") for key in ATOM_KEYS}
            if record["w"] <= 0:
                raise self.error(f"atom weight must be positive, got {record['w']}", f"{path}.w", atom, "w")
            self.atoms.append(record)

    def _build_measure(self, data):
        if not self.atoms:
            raise self.error("rho is set but no atoms are given", "rho", data, "rho")
        if self.rho is None:
            raise self.error("missing; the measure needs rho with its atoms", "rho", data, "atoms")
        total = math.fsum(atom["w"] for atom in self.atoms)
        if abs(total - 1.0) > WEIGHT_TOLERANCE:
            raise self.error(f"atom weights w sum to {total!r}, expected 1", "atoms", data, "atoms")
        try:
            self.measure = VelocityLengthMeasure.from_atoms(self.atoms, self.rho)
        except ValueError as e:
            raise self.error(str(e), "atoms", data, "atoms") from e
