from dynamics import select_particle
from estimators import pair_displacements
from experiments.base import ExperimentFamily
from experiments.spec import StatisticRequest
from measure_model import diffusion_coefficient, gamma


class PairCovarianceExperiment(ExperimentFamily):
    """Joint recentered displacements of tagged quasi-particle pairs.

    Each pair is (v, w, x_v, x_w): the particle of velocity v nearest x_v and
    the other particle of velocity w nearest x_w. Same-velocity pairs test rigidity
    (covariance t D(v), correlation near 1); distinct velocities test t Gamma(v, w).
    """

    def __init__(self, spec):
        super().__init__(spec)
        self.t = spec.horizon
        if self.t <= 0:
            raise ValueError(f"{spec.name}: pair statistics need a positive horizon, got {self.t}")
        self.pairs = [tuple(float(c) for c in pair) for pair in self.params.get("pairs", [(1.0, 1.0, 0.0, 1.0)])]
        self.corr_lower = self.params.get("corr_lower")
        self.corr_max_eps = self.params.get("corr_max_eps")

    def horizon(self, eps):
        return self.t / eps

    def extent(self, eps):
        return max(max(abs(p[2]), abs(p[3])) for p in self.pairs) + self.slack

    @staticmethod
    def label(pair):
        v, w, xv, xw = pair
        return f"v={v:g}@{xv:g},w={w:g}@{xw:g}"

    def trial(self, X):
        row = {}
        T = self.t / X.eps
        for pair in self.pairs:
            v, w, xv, xw = pair
            id1 = select_particle(X, self.atom(v), xv)
            id2 = select_particle(X, self.atom(w), xw, exclude={id1})
            d1, d2 = pair_displacements(X, id1, id2, T, self.m)
            key = self.label(pair)
            row[f"d1[{key}]"] = d1
            row[f"d2[{key}]"] = d2
            row[f"d1*d2[{key}]"] = d1 * d2
        return row

    def statistics(self, eps):
        stats = []
        for pair in self.pairs:
            v, w = pair[0], pair[1]
            key = self.label(pair)
            if v == w:
                target = self.t * diffusion_coefficient(v, self.mu)
                anchor = "Cov(d1, d2) -> t D(v) for one velocity"
            else:
                target = self.t * gamma(v, w, self.mu)
                anchor = "Cov(d1, d2) -> t Gamma(v, w)"
            stats.append(StatisticRequest(f"cov[{key}]", "mean", f"d1*d2[{key}]", target=target, anchor=anchor))
            stats.append(StatisticRequest(f"d1_variance[{key}]", "variance", f"d1[{key}]",
                                          target=self.t * diffusion_coefficient(v, self.mu),
                                          anchor="Var d = t D(v)"))
            lower = self.corr_lower if v == w else None
            stats.append(StatisticRequest(f"corr[{key}]", "correlation", (f"d1[{key}]", f"d2[{key}]"),
                                          lower=lower, check_max_eps=self.corr_max_eps if lower is not None else None,
                                          anchor="asymptotically complete correlation" if v == w else ""))
        return stats
