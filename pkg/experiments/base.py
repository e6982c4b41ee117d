import logging

import numpy as np

from measure_model import effective_velocity, moments
from sampler import required_window


class ExperimentFamily:
    """Shared plumbing for the experiment families.

    A family turns one sampled configuration into a row of named per-trial
    values (`trial`) and declares the statistics computed over those rows
    (`statistics`). The window is sized from the family's extent and horizon.
    """

    slack = 1.0

    def __init__(self, spec):
        self.spec = spec
        self.mu = spec.measure
        self.m = moments(self.mu)
        self.params = spec.params

    def horizon(self, eps):
        """Free-gas time the flow queries reach."""
        return 0.0

    def extent(self, eps):
        """Half-width of the point-frame region the statistics read."""
        return self.slack

    def window(self, eps):
        extent = self.extent(eps)
        horizon = self.horizon(eps)
        window = required_window(extent, self.mu.v_span(), horizon, eps)
        logging.debug(f"{self.spec.name}: eps={eps}, extent={extent}, horizon={horizon}, window={window}")
        return window

    def notes(self, eps):
        return []

    def trial(self, X):
        raise NotImplementedError

    def statistics(self, eps):
        raise NotImplementedError

    # helpers

    def atom(self, v):
        return self.mu.atom_index(v)

    def rod_extent(self, supports, euler_time=0.0):
        """Point-frame extent covering rod-frame supports, moved along the characteristics up to euler_time."""
        reach = max(max(abs(lo), abs(hi)) for lo, hi in supports)
        drift = float(np.max(np.abs(effective_velocity(self.mu.v, self.m)))) * euler_time
        return (reach + drift) / (1.0 + self.m.sigma) + self.slack

    def selector(self, velocities=None):
        """Indicator of the atoms with the given velocities, or of all atoms."""
        if velocities is None:
            return np.ones(self.mu.n_atoms)
        sel = np.zeros(self.mu.n_atoms)
        for v in velocities:
            sel[self.mu.v == v] = 1.0
        return sel
