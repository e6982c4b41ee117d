from dynamics import quasiparticle_position, select_particle
from experiments.base import ExperimentFamily
from experiments.spec import StatisticRequest
from measure_model import effective_velocity


class EulerVelocityExperiment(ExperimentFamily):
    """Mean speed (y(t) - y0) / t of a tagged quasi-particle of each velocity."""

    def __init__(self, spec):
        super().__init__(spec)
        self.t = spec.horizon
        if self.t <= 0:
            raise ValueError(f"{spec.name}: the Euler velocity needs a positive horizon, got {self.t}")
        self.velocities = [float(v) for v in self.params.get("velocities", sorted(set(self.mu.v.tolist())))]
        self.near = float(self.params.get("near", 0.0))

    def horizon(self, eps):
        return self.t

    def extent(self, eps):
        return abs(self.near) + self.slack

    def trial(self, X):
        row = {}
        for v in self.velocities:
            # lengths may differ between atoms sharing a velocity; the tagged one is any of them
            atom = self.atom(v)
            pid = select_particle(X, atom, self.near)
            y0 = quasiparticle_position(X, pid, 0.0)
            y = quasiparticle_position(X, pid, self.t)
            row[f"speed(v={v:g})"] = (y - y0) / self.t
        return row

    def statistics(self, eps):
        return [StatisticRequest(f"speed(v={v:g})_mean", "mean", f"speed(v={v:g})",
                                 target=effective_velocity(v, self.m), anchor="(y(t) - y0) / t -> v_eff(v)")
                for v in self.velocities]
