from estimators import rod_snapshot, snapshot_field, xi_x
from experiments.base import ExperimentFamily
from experiments.spec import StatisticRequest
from measure_model import FieldObservable, length_mean, second_moment, static_covariance


class StaticCovarianceExperiment(ExperimentFamily):
    """Static fluctuations of the point field and of the dilated rod field."""

    def __init__(self, spec):
        super().__init__(spec)
        width = self.params.get("width", 2.0)
        selector = self.selector(self.params.get("velocities"))
        self.phi = FieldObservable.bump(self.params.get("center", 3.0), width, selector, name="phi")
        self.psi = FieldObservable.bump(self.params.get("disjoint_center", 6.0), width, selector, name="psi")
        lo_phi, hi_phi = self.phi.support
        lo_psi, hi_psi = self.psi.support
        if not (hi_phi <= lo_psi or hi_psi <= lo_phi):
            raise ValueError(f"{spec.name}: phi and psi must have disjoint supports")
        self.phi_mean = length_mean(self.phi, self.mu)
        self.psi_mean = length_mean(self.psi, self.mu)
        self.rod_center = self.phi_mean / (1.0 + self.m.sigma)

    def extent(self, eps):
        point_reach = max(abs(b) for b in self.phi.support + self.psi.support) + self.slack
        return max(point_reach, self.rod_extent([self.phi.support]))

    def trial(self, X):
        xi_phi = xi_x(X, self.phi, self.mu, center=self.phi_mean)
        xi_psi = xi_x(X, self.psi, self.mu, center=self.psi_mean)
        xi_y = (snapshot_field(rod_snapshot(X, 0.0), self.phi) - self.rod_center) / X.eps ** 0.5
        return {
            "xi_x(phi)": xi_phi,
            "xi_x(phi)*xi_x(psi)": xi_phi * xi_psi,
            "xi_y(phi)": xi_y,
        }

    def statistics(self, eps):
        return [
            StatisticRequest("xi_x(phi)_mean", "mean", "xi_x(phi)", target=0.0, anchor="E xi_x(phi) = 0"),
            StatisticRequest("xi_x(phi)_variance", "variance", "xi_x(phi)",
                             target=second_moment(self.phi, self.phi, self.mu),
                             anchor="Var xi_x(phi) = <phi^2>_2"),
            StatisticRequest("xi_x_disjoint_cov", "mean", "xi_x(phi)*xi_x(psi)", target=0.0,
                             anchor="Cov(xi_x(phi), xi_x(psi)) = <phi psi>_2 = 0 on disjoint supports"),
            StatisticRequest("xi_y(phi)_variance", "variance", "xi_y(phi)",
                             target=static_covariance(self.phi, self.phi, self.mu, self.m),
                             anchor="Var xi_y(phi) = <C phi C phi>_2 / (1 + sigma)"),
        ]
