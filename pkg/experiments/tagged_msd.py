from dynamics import select_particle, track
from experiments.base import ExperimentFamily
from experiments.spec import StatisticRequest
from measure_model import diffusion_coefficient


class TaggedMSDExperiment(ExperimentFamily):
    """Variance of the recentered displacement of one tagged quasi-particle at diffusive times t / eps."""

    def __init__(self, spec):
        super().__init__(spec)
        self.v = float(self.params.get("v", 1.0))
        self.times = spec.times or [spec.horizon]
        self.empirical = bool(self.params.get("empirical", False))
        self.D = diffusion_coefficient(self.v, self.mu)

    def horizon(self, eps):
        return max(self.times) / eps

    def trial(self, X):
        pid = select_particle(X, self.atom(self.v), 0.0)
        path = track(X, pid, [t / X.eps for t in self.times], self.m, empirical=self.empirical)
        return {f"d(t={t:g})": s.displacement for t, s in zip(self.times, path.samples)}

    def statistics(self, eps):
        return [StatisticRequest(f"d(t={t:g})_variance", "variance", f"d(t={t:g})", target=t * self.D,
                                 anchor="Var[y(T) - y0 - v_eff T] = t D(v), T = t / eps")
                for t in self.times]
