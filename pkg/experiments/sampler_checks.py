from estimators import field_n
from experiments.base import ExperimentFamily
from experiments.spec import StatisticRequest
from measure_model import FieldObservable, length_mean


class SamplerCheckExperiment(ExperimentFamily):
    """Poisson count law and the law of large numbers for N(phi) on a fixed window."""

    def __init__(self, spec):
        super().__init__(spec)
        self.half_width = float(self.params.get("half_width", 10.0))
        self.phi = FieldObservable.bump(self.params.get("center", 0.0), self.params.get("width", 2.0),
                                        self.selector(), name="bump")
        self.phi_mean = length_mean(self.phi, self.mu)

    def window(self, eps):
        return (-self.half_width, self.half_width)

    def trial(self, X):
        return {"count": float(X.n), "N(bump)": field_n(X, self.phi)}

    def statistics(self, eps):
        expected = self.mu.rho * 2.0 * self.half_width / eps
        return [
            StatisticRequest("count_mean", "mean", "count", target=expected, anchor="E N = rho |W| / eps"),
            StatisticRequest("count_variance", "variance", "count", target=expected,
                             anchor="Var N = E N (Poisson)"),
            StatisticRequest("N(bump)_mean", "mean", "N(bump)", target=self.phi_mean,
                             anchor="E N(phi) = <phi>"),
        ]
