import math

from estimators import default_envelope, plane_wave_observable, rod_snapshot, snapshot_field
from experiments.base import ExperimentFamily
from experiments.spec import StatisticRequest
from measure_model import CosineBump, length_mean, static_covariance


class FourierModeExperiment(ExperimentFamily):
    """Squared modulus of a windowed plane-wave mode of one velocity atom at several diffusive times."""

    def __init__(self, spec):
        super().__init__(spec)
        self.k = float(self.params.get("k", 2.0))
        center = float(self.params.get("center", 5.0))
        if self.k == 0:
            self.envelope = CosineBump(center, float(self.params.get("width", 5.0)))
        else:
            self.envelope = default_envelope(self.k, center, float(self.params.get("wavelengths", 10.0)))
        self.atom_index = self.atom(float(self.params.get("v", 1.0)))
        self.times = spec.times or [spec.horizon]
        self.phi = plane_wave_observable(self.k, self.atom_index, self.envelope, self.mu.n_atoms)
        self.mean = length_mean(self.phi, self.mu)
        self.center = self.mean / (1.0 + self.m.sigma)
        self.target = static_covariance(self.phi, self.phi, self.mu, self.m)

    def horizon(self, eps):
        return max(self.times) / eps

    def extent(self, eps):
        return self.rod_extent([self.envelope.support])

    def trial(self, X):
        row = {}
        for t in self.times:
            snap = rod_snapshot(X, t / X.eps, recenter=self.m)
            mode = (snapshot_field(snap, self.phi) - self.center) / math.sqrt(X.eps)
            row[f"|mode(t={t:g})|^2"] = abs(mode) ** 2
        return row

    def notes(self, eps):
        bias = abs(self.center)
        return [f"window bias |<phi>|/(1+sigma) = {bias:.3g} for k={self.k:g}, envelope width {self.envelope.width:g}"]

    def statistics(self, eps):
        return [StatisticRequest(f"|mode(t={t:g})|^2_mean", "mean", f"|mode(t={t:g})|^2", target=self.target,
                                 anchor="E |mode_t|^2 = E |mode_0|^2")
                for t in self.times]
