"""Built-in experiments, addressable by name from the command line."""
from experiments.diffusive_field import DiffusiveStationarityExperiment
from experiments.euler_transport import EulerTransportExperiment
from experiments.euler_velocity import EulerVelocityExperiment
from experiments.fourier import FourierModeExperiment
from experiments.mean_laws import MeanLawsExperiment
from experiments.pair_cov import PairCovarianceExperiment
from experiments.sampler_checks import SamplerCheckExperiment
from experiments.spec import ExperimentSpec
from experiments.static_cov import StaticCovarianceExperiment
from experiments.tagged_msd import TaggedMSDExperiment
from measure_model import VelocityLengthMeasure

COMMANDS = ("sample", "tagged-msd", "pair-cov", "euler-field", "diffusive-field", "static-cov", "fourier")

# same-velocity pair separations, smallest first
SEPARATIONS = (0.5, 1.0, 2.0, 4.0)

FAMILIES = {
    "sampler": SamplerCheckExperiment,
    "mean-laws": MeanLawsExperiment,
    "euler-velocity": EulerVelocityExperiment,
    "euler-transport": EulerTransportExperiment,
    "static-cov": StaticCovarianceExperiment,
    "tagged-msd": TaggedMSDExperiment,
    "pair-cov": PairCovarianceExperiment,
    "diffusive": DiffusiveStationarityExperiment,
    "fourier": FourierModeExperiment,
}

# default family of each subcommand when a config names no built-in experiment
COMMAND_FAMILIES = {
    "sample": "sampler",
    "tagged-msd": "tagged-msd",
    "pair-cov": "pair-cov",
    "euler-field": "euler-transport",
    "diffusive-field": "diffusive",
    "static-cov": "static-cov",
    "fourier": "fourier",
}


def setup_a():
    """Two velocities +-1, length 1/2, rho = 1: sigma = 1/2, pi = 0, D(+-1) = 1/4."""
    return VelocityLengthMeasure.two_velocity(1.0, 0.5, 1.0)


def setup_b():
    return VelocityLengthMeasure([-1.0, 0.0, 1.0], [0.5, 0.5, 0.5], [1 / 3] * 3, 1.0)


def balanced(a=0.5, rho=1.0):
    """Velocities +-1 with lengths +-a in equal weight: sigma = pi = 0 but D(+-1) = rho a^2."""
    return VelocityLengthMeasure([-1.0, -1.0, 1.0, 1.0], [a, -a, a, -a], [0.25] * 4, rho)


def _builtins():
    a = setup_a()
    return [
        ExperimentSpec("sample-setupA", "sample", SamplerCheckExperiment, a, eps_list=[0.01], trials=1000,
                       horizon=0.0, anchor="N ~ Poisson(rho |W| / eps); E N(phi) = <phi>",
                       description="Poisson count law and LLN of the empirical length field"),
        ExperimentSpec("mean-laws-setupA", "sample", MeanLawsExperiment, a, eps_list=[0.01], trials=500,
                       horizon=1.0, anchor="E m_a^b = (b-a) sigma; E j = t (v sigma - pi); E D_0(b) = b (1+sigma)",
                       description="Exact mean laws of mass measure, flow and dilation"),
        ExperimentSpec("euler-velocity-setupA", "euler-field", EulerVelocityExperiment, a, eps_list=[0.01],
                       trials=500, horizon=1.0, anchor="v_eff(v) = v (1 + sigma) - pi",
                       description="Quasi-particle speed against the effective velocity"),
        ExperimentSpec("euler-velocity-balanced", "euler-field", EulerVelocityExperiment, balanced(),
                       eps_list=[0.01], trials=500, horizon=1.0, anchor="v_eff(v) = v when sigma = pi = 0",
                       description="Balanced lengths: free Euler drift"),
        ExperimentSpec("euler-transport-setupA", "euler-field", EulerTransportExperiment, a,
                       eps_list=[0.05, 0.02, 0.01], trials=500, horizon=0.5,
                       params={"center": 0.0, "width": 8.0, "ratio_bound": 0.1, "check_max_eps": 0.01},
                       anchor="xi_t(phi) = xi_0(phi_t), phi_t(y, v) = phi(y + v_eff(v) t), up to the flow residual",
                       description="Per-realization Euler transport of rod-field fluctuations",
                       trends={"residual_variance": "flat"}),
        ExperimentSpec("static-cov-setupA", "static-cov", StaticCovarianceExperiment, a, eps_list=[0.01],
                       trials=2000, horizon=0.0, params={"center": 3.0, "disjoint_center": 6.0, "width": 2.0,
                                                         "velocities": [1.0]},
                       anchor="Var xi_x(phi) = <phi^2>_2; Var xi_y(phi) = <C phi C phi>_2 / (1+sigma)",
                       description="Static covariance of the point and rod fields"),
        ExperimentSpec("tagged-msd-setupA", "tagged-msd", TaggedMSDExperiment, a, eps_list=[0.005], trials=2000,
                       horizon=1.0, times=[0.25, 0.5, 1.0], params={"v": 1.0},
                       anchor="Var[y(T) - y0 - v_eff T] = t D(v)",
                       description="Tagged quasi-particle diffusion"),
        ExperimentSpec("tagged-msd-balanced", "tagged-msd", TaggedMSDExperiment, balanced(), eps_list=[0.005],
                       trials=2000, horizon=1.0, times=[0.25, 0.5, 1.0], params={"v": 1.0},
                       anchor="Var[y(T) - y0 - v T] = t rho a^2 when sigma = pi = 0",
                       description="Tagged diffusion with zero mean length"),
        ExperimentSpec("pair-rigidity-setupA", "pair-cov", PairCovarianceExperiment, a,
                       eps_list=[0.05, 0.02, 0.01], trials=2000, horizon=1.0,
                       params={"pairs": [(1.0, 1.0, 0.0, 1.0)], "corr_lower": 0.9, "corr_max_eps": 0.01},
                       anchor="Cov(d1, d2) -> t D(v), corr -> 1 for one velocity",
                       description="Same-velocity pair rigidity",
                       trends={"corr[v=1@0,w=1@1]": "increasing"}),
        ExperimentSpec("pair-separation-setupA", "pair-cov", PairCovarianceExperiment, a, eps_list=[0.01],
                       trials=1000, horizon=1.0,
                       params={"pairs": [(1.0, 1.0, 0.0, d) for d in SEPARATIONS]},
                       anchor="corr(d1, d2) nondecreasing as the separation shrinks",
                       description="Same-velocity pair correlation against separation",
                       orderings=[([f"corr[v=1@0,w=1@{d:g}]" for d in SEPARATIONS], "decreasing")]),
        ExperimentSpec("pair-gamma-setupB", "pair-cov", PairCovarianceExperiment, setup_b(), eps_list=[0.01],
                       trials=2000, horizon=1.0,
                       params={"pairs": [(0.0, 1.0, 0.0, 0.0), (-1.0, 1.0, 0.0, 0.0)]},
                       anchor="Cov(d_v, d_w) -> t Gamma(v, w)",
                       description="Cross-velocity covariance"),
        ExperimentSpec("diffusive-stationarity-setupA", "diffusive-field", DiffusiveStationarityExperiment, a,
                       eps_list=[0.01], trials=1000, horizon=1.0, times=[0.25, 0.5, 1.0],
                       params={"center": 3.0, "width": 2.0, "velocities": [1.0]},
                       anchor="E Xi_t(phi)^2 = <C phi C phi>_2 / (1+sigma) for all t",
                       description="Stationarity of the diffusive rod field"),
        ExperimentSpec("fourier-setupA", "fourier", FourierModeExperiment, a, eps_list=[0.01], trials=1000,
                       horizon=1.0, times=[0.25, 0.5, 1.0],
                       params={"k": 2.0, "wavelengths": 10.0, "center": 5.0, "v": 1.0},
                       anchor="|mode(k, v, t)|^2 conserved in mean",
                       description="Persistence of windowed Fourier modes"),
    ]


def list_experiments():
    return _builtins()


def get_experiment(name, command=None):
    """Resolve an exact name, then `<command>-<name>`, then a unique suffix among the command's experiments."""
    specs = _builtins()
    by_name = {s.name: s for s in specs}
    if name in by_name:
        return by_name[name]
    if command is not None:
        prefixed = f"{command}-{name}"
        if prefixed in by_name:
            return by_name[prefixed]
        hits = [s for s in specs if s.command == command and s.name.endswith(name)]
        if len(hits) == 1:
            return hits[0]
        if len(hits) > 1:
            raise ValueError(f"Experiment {name!r} is ambiguous for {command}: {', '.join(s.name for s in hits)}")
    raise ValueError(f"Unknown experiment {name!r}; run list-experiments for the registry")


def default_experiment(command):
    for spec in _builtins():
        if spec.command == command:
            return spec
    raise ValueError(f"No built-in experiment for {command}")
