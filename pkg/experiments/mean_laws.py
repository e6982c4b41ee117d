from dynamics import dilate, flow, mass_measure
from experiments.base import ExperimentFamily
from experiments.spec import StatisticRequest


class MeanLawsExperiment(ExperimentFamily):
    """Exact first-moment laws of the mass measure, the collision flow and the dilation."""

    def __init__(self, spec):
        super().__init__(spec)
        self.a = float(self.params.get("a", 0.0))
        self.b = float(self.params.get("b", 1.0))
        self.x = float(self.params.get("x", 0.0))
        self.v = float(self.params.get("v", 1.0))
        self.t = spec.horizon

    def horizon(self, eps):
        return self.t

    def extent(self, eps):
        return max(abs(self.a), abs(self.b), abs(self.x)) + self.slack

    def trial(self, X):
        return {
            "mass": mass_measure(X, self.a, self.b),
            "flow": flow(X, self.x, self.v, self.t),
            "dilation": float(dilate(X, [self.b])[0]),
        }

    def statistics(self, eps):
        m = self.m
        return [
            StatisticRequest("mass_mean", "mean", "mass", target=(self.b - self.a) * m.sigma,
                             anchor="E m_a^b = (b - a) sigma"),
            StatisticRequest("flow_mean", "mean", "flow", target=self.t * (self.v * m.sigma - m.pi),
                             anchor="E j(x, v, t) = t (v sigma - pi)"),
            StatisticRequest("dilation_mean", "mean", "dilation", target=self.b * (1.0 + m.sigma),
                             anchor="E D_0(b) = b (1 + sigma)"),
        ]
