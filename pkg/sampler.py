import logging
import math
from dataclasses import dataclass

import numpy as np

DEFAULT_MEMORY_CAP = 10 ** 8
DEFAULT_MARGIN = 0.1


class BudgetError(ValueError):
    """Expected particle count is over the memory cap."""


@dataclass(frozen=True)
class GasParameters:
    eps: float
    window_lo: float
    window_hi: float
    seed: int = 0
    trial_index: int = 0
    memory_cap: int = DEFAULT_MEMORY_CAP

    def __post_init__(self):
        if not (math.isfinite(self.eps) and self.eps > 0):
            raise ValueError(f"eps must be positive, got {self.eps}")
        if not (math.isfinite(self.window_lo) and math.isfinite(self.window_hi)):
            raise ValueError(f"Window bounds must be finite, got [{self.window_lo}, {self.window_hi}]")
        if not self.window_lo < self.window_hi:
            raise ValueError(f"Empty window [{self.window_lo}, {self.window_hi}]")
        if int(self.seed) != self.seed or self.seed < 0:
            raise ValueError(f"seed must be a nonnegative integer, got {self.seed}")
        if int(self.trial_index) != self.trial_index or self.trial_index < 0:
            raise ValueError(f"trial_index must be a nonnegative integer, got {self.trial_index}")

    @property
    def window(self):
        return (float(self.window_lo), float(self.window_hi))

    @property
    def width(self):
        return float(self.window_hi - self.window_lo)


class PointConfiguration:
    """Immutable point-frame gas: particles sorted by position plus a per-atom index.

    Positions are x0 + v * time, so a configuration also represents the free gas
    after `time`. `window` is the region that is still fully populated; it shrinks
    as the gas evolves.
    """

    def __init__(self, ids, x0, atom, atom_v, atom_r, eps, window, base_window=None, time=0.0):
        ids = np.asarray(ids, dtype=np.int64)
        x0 = np.asarray(x0, dtype=np.float64)
        atom = np.asarray(atom, dtype=np.intp)
        if not (ids.shape == x0.shape == atom.shape) or ids.ndim != 1:
            raise ValueError(f"Particle arrays disagree in shape: {ids.shape}, {x0.shape}, {atom.shape}")
        self.atom_v = np.array(atom_v, dtype=np.float64)
        self.atom_r = np.array(atom_r, dtype=np.float64)
        if atom.size and (atom.min() < 0 or atom.max() >= self.atom_v.size):
            raise ValueError("Particle atom index out of range")
        self.eps = float(eps)
        self.time = float(time)
        self.window = (float(window[0]), float(window[1]))
        self.base_window = self.window if base_window is None else (float(base_window[0]), float(base_window[1]))

        x = x0 + self.atom_v[atom] * self.time if self.time != 0 else x0.copy()
        order = np.lexsort((ids, x))
        self.ids = ids[order]
        self.x0 = x0[order]
        self.atom = atom[order]
        self.x = self._separate_ties(x[order])
        self.v = self.atom_v[self.atom]
        self.r = self.atom_r[self.atom]

        self._atom_x = []
        self._atom_ids = []
        for a in range(self.atom_v.size):
            sel = self.atom == a
            self._atom_x.append(self.x[sel])
            self._atom_ids.append(self.ids[sel])

        if self.ids.size > 1 and np.any(np.diff(np.sort(self.ids)) == 0):
            raise ValueError("Particle ids are not unique")
        self._slot = None

        for arr in (self.ids, self.x0, self.x, self.atom, self.v, self.r, self.atom_v, self.atom_r,
                    *self._atom_x, *self._atom_ids):
            arr.setflags(write=False)

    @staticmethod
    def _separate_ties(x):
        """Nudge coincident positions apart so that x is strictly increasing; id order breaks ties."""
        ties = np.flatnonzero(np.diff(x) <= 0)
        if ties.size == 0:
            return x
        x = x.copy()
        logging.debug(f"Separating {ties.size} coincident positions")
        for i in range(int(ties[0]) + 1, x.size):
            if x[i] <= x[i - 1]:
                x[i] = np.nextafter(x[i - 1], np.inf)
        return x

    @classmethod
    def from_particles(cls, x, atom, mu, eps, window, ids=None):
        x = np.asarray(x, dtype=np.float64)
        if ids is None:
            ids = np.arange(x.size)
        return cls(ids, x, atom, mu.v, mu.r, eps, window)

    @property
    def n(self):
        return int(self.ids.size)

    @property
    def n_atoms(self):
        return int(self.atom_v.size)

    def __len__(self):
        return self.n

    def atom_positions(self, atom_index):
        return self._atom_x[atom_index]

    def atom_ids(self, atom_index):
        return self._atom_ids[atom_index]

    def prefix_r(self, atom_index):
        """Cumulative rod length by rank within one atom; every rod of an atom has the same length."""
        return self.atom_r[atom_index] * np.arange(self._atom_x[atom_index].size + 1, dtype=np.float64)

    def slot(self, particle_id):
        if self._slot is None:
            self._slot = {int(pid): k for k, pid in enumerate(self.ids)}
        try:
            return self._slot[int(particle_id)]
        except KeyError:
            raise ValueError(f"No particle with id {particle_id}") from None

    def evolved(self, time, window):
        return PointConfiguration(self.ids, self.x0, self.atom, self.atom_v, self.atom_r, self.eps,
                                  window, self.base_window, time)

    def __repr__(self):
        return (f"PointConfiguration(n={self.n}, eps={self.eps}, window={self.window}, "
                f"time={self.time})")


def _generator(seed, trial_index):
    return np.random.Generator(np.random.Philox(np.random.SeedSequence(int(seed), spawn_key=(int(trial_index),))))


def expected_count(params, mu):
    return mu.rho * params.width / params.eps


def sample(params, mu):
    lam = expected_count(params, mu)
    if lam > params.memory_cap:
        max_width = params.memory_cap * params.eps / mu.rho
        raise BudgetError(
            f"Expected {lam:.3g} particles exceeds the memory cap {params.memory_cap:.3g}; "
            f"at eps={params.eps} the window must be narrower than {max_width:.6g}, "
            f"or raise eps to at least {mu.rho * params.width / params.memory_cap:.3g}")
    rng = _generator(params.seed, params.trial_index)
    n = int(rng.poisson(lam))
    x = rng.uniform(params.window_lo, params.window_hi, size=n)
    atom = rng.choice(mu.n_atoms, size=n, p=mu.w) if mu.n_atoms > 1 else np.zeros(n, dtype=np.intp)
    return PointConfiguration(np.arange(n), x, atom, mu.v, mu.r, params.eps, params.window)


def required_window(experiment_extent, v_span, horizon, eps, margin=DEFAULT_MARGIN):
    if experiment_extent < 0 or v_span < 0 or horizon < 0:
        raise ValueError(f"extent, v_span and horizon must be nonnegative, got "
                         f"{experiment_extent}, {v_span}, {horizon}")
    half = experiment_extent + v_span * horizon * (1.0 + margin)
    # a zero-width window cannot be sampled
    half = max(half, eps)
    logging.debug(f"Window half-width {half} for extent {experiment_extent}, v_span {v_span}, horizon {horizon}")
    return (-half, half)
