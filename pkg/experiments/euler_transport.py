import math

from estimators import rod_snapshot, snapshot_field
from experiments.base import ExperimentFamily
from experiments.spec import StatisticRequest
from measure_model import FieldObservable, effective_velocity, length_mean, transport_residual_variance


class EulerTransportExperiment(ExperimentFamily):
    """Per-realization transport of the rod field: xi_t(phi) against xi_0(phi_t) on the same configuration.

    phi_t(y, v, r) = phi(y + v_eff(v) t). The residual between the two fields
    does not vanish with eps: the sqrt(eps) fluctuations of the collision flow
    leave an order-one part whose variance is transport_residual_variance. It
    is small against the field when the bump is wide compared with the
    crossing shift (1 + sigma)(v - w) t.
    """

    def __init__(self, spec):
        super().__init__(spec)
        self.t = spec.horizon
        self.phi = FieldObservable.bump(self.params.get("center", 0.0), self.params.get("width", 8.0),
                                        self.selector(self.params.get("velocities")), name="bump")
        self.phi_t = self.phi.transported(effective_velocity(self.mu.v, self.m) * self.t, name="bump_t")
        self.center = length_mean(self.phi, self.mu) / (1.0 + self.m.sigma)
        self.residual_target = transport_residual_variance(self.phi, self.mu, self.m, self.t)
        self.ratio_bound = float(self.params.get("ratio_bound", 0.1))
        self.check_max_eps = self.params.get("check_max_eps", 0.01)

    def horizon(self, eps):
        return self.t

    def extent(self, eps):
        return self.rod_extent([self.phi.support, self.phi_t.support], self.t)

    def trial(self, X):
        scale = 1.0 / math.sqrt(X.eps)
        at_t = snapshot_field(rod_snapshot(X, self.t), self.phi)
        initial = rod_snapshot(X, 0.0)
        at_0 = snapshot_field(initial, self.phi)
        transported = snapshot_field(initial, self.phi_t)
        xi_t = (at_t - self.center) * scale
        return {
            "K_t(bump)": at_t,
            "xi_t(bump)": xi_t,
            "xi_0(bump)": (at_0 - self.center) * scale,
            "residual": xi_t - (transported - self.center) * scale,
        }

    def notes(self, eps):
        return [f"flow-fluctuation residual variance {self.residual_target:.6g} at t={self.t:g}"]

    def statistics(self, eps):
        return [
            StatisticRequest("K_t(bump)_mean", "mean", "K_t(bump)", target=self.center,
                             anchor="E K_t(phi) = <phi> / (1 + sigma)"),
            StatisticRequest("residual_variance", "variance", "residual", target=self.residual_target,
                             check_max_eps=self.check_max_eps,
                             anchor="Var[xi_t(phi) - xi_0(phi_t)] -> flow-fluctuation residual"),
            StatisticRequest("residual_ratio", "variance_ratio", ("residual", "xi_0(bump)"),
                             upper=self.ratio_bound, check_max_eps=self.check_max_eps,
                             anchor="xi_t(phi) = xi_0(phi_t) up to the flow-fluctuation residual"),
        ]
