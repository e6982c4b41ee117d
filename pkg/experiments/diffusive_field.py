import math

from estimators import rod_snapshot, snapshot_field
from experiments.base import ExperimentFamily
from experiments.spec import StatisticRequest
from measure_model import FieldObservable, length_mean, static_covariance


class DiffusiveStationarityExperiment(ExperimentFamily):
    """Second moment of the diffusive rod field recentered on the Euler characteristics, at several times."""

    def __init__(self, spec):
        super().__init__(spec)
        self.times = spec.times or [spec.horizon]
        self.phi = FieldObservable.bump(self.params.get("center", 3.0), self.params.get("width", 2.0),
                                        self.selector(self.params.get("velocities", [1.0])), name="bump")
        self.center = length_mean(self.phi, self.mu) / (1.0 + self.m.sigma)
        self.target = static_covariance(self.phi, self.phi, self.mu, self.m)

    def horizon(self, eps):
        return max(self.times) / eps

    def extent(self, eps):
        return self.rod_extent([self.phi.support])

    def trial(self, X):
        row = {}
        for t in self.times:
            snap = rod_snapshot(X, t / X.eps, recenter=self.m)
            row[f"Xi(t={t:g})"] = (snapshot_field(snap, self.phi) - self.center) / math.sqrt(X.eps)
        return row

    def statistics(self, eps):
        return [StatisticRequest(f"Xi(t={t:g})_variance", "variance", f"Xi(t={t:g})", target=self.target,
                                 anchor="E Xi_t(phi)^2 constant in t")
                for t in self.times]
