import logging
import math
import warnings
from dataclasses import dataclass

import numpy as np
from scipy import integrate
from scipy.fft import fft

WEIGHT_TOLERANCE = 1e-12
QUAD_RELATIVE_TOLERANCE = 1e-8
GAMMA_TOLERANCE = 1e-12


class QuadratureError(ValueError):
    """Adaptive quadrature of an observable did not converge."""


@dataclass(frozen=True)
class Moments:
    sigma: float
    pi: float
    r2: float


@dataclass(frozen=True)
class VelocityLengthMeasure:
    """Finite discrete probability on (velocity, length) pairs plus the gas density rho.

    Atom i sits at (v[i], r[i]) with weight w[i]. Lengths may be negative but the
    length density must keep 1 + sigma > 0, otherwise the dilation map degenerates.
    """
    v: np.ndarray
    r: np.ndarray
    w: np.ndarray
    rho: float

    def __post_init__(self):
        v = np.array(self.v, dtype=np.float64).ravel()
        r = np.array(self.r, dtype=np.float64).ravel()
        w = np.array(self.w, dtype=np.float64).ravel()
        if v.size == 0:
            raise ValueError("Measure needs at least one atom")
        if not (v.size == r.size == w.size):
            raise ValueError(f"Atom arrays disagree in length: v={v.size}, r={r.size}, w={w.size}")
        if not (np.all(np.isfinite(v)) and np.all(np.isfinite(r)) and np.all(np.isfinite(w))):
            raise ValueError("Atom velocities, lengths and weights must be finite")
        if np.any(w <= 0):
            raise ValueError(f"Atom weights must be positive, got {w.tolist()}")
        total = math.fsum(w)
        if abs(total - 1.0) > WEIGHT_TOLERANCE:
            raise ValueError(f"Atom weights sum to {total!r}, expected 1")
        rho = float(self.rho)
        if not (math.isfinite(rho) and rho > 0):
            raise ValueError(f"Gas density rho must be positive, got {self.rho}")
        for arr in (v, r, w):
            arr.setflags(write=False)
        object.__setattr__(self, "v", v)
        object.__setattr__(self, "r", r)
        object.__setattr__(self, "w", w)
        object.__setattr__(self, "rho", rho)
        sigma = rho * math.fsum(w * r)
        if 1.0 + sigma <= 0:
            raise ValueError(f"Length density sigma={sigma} gives 1 + sigma <= 0; the dilation map degenerates")
        logging.debug(f"Measure with {v.size} atoms, rho={rho}, sigma={sigma}")

    @classmethod
    def from_atoms(cls, atoms, rho):
        """Build from records that are either mappings with v, r, w or (v, r, w) tuples."""
        v, r, w = [], [], []
        for atom in atoms:
            if isinstance(atom, dict):
                v.append(atom["v"])
                r.append(atom["r"])
                w.append(atom["w"])
            else:
                av, ar, aw = atom
                v.append(av)
                r.append(ar)
                w.append(aw)
        return cls(np.array(v), np.array(r), np.array(w), rho)

    @classmethod
    def two_velocity(cls, v0=1.0, a=0.5, rho=1.0):
        return cls(np.array([-v0, v0]), np.array([a, a]), np.array([0.5, 0.5]), rho)

    @property
    def n_atoms(self):
        return int(self.v.size)

    @property
    def atoms(self):
        return [(float(v), float(r), float(w)) for v, r, w in zip(self.v, self.r, self.w)]

    def v_span(self):
        return float(np.max(self.v) - np.min(self.v))

    def atom_index(self, v, r=None):
        """Index of the first atom with velocity v (and length r when given)."""
        mask = self.v == v
        if r is not None:
            mask &= self.r == r
        hits = np.flatnonzero(mask)
        if hits.size == 0:
            raise ValueError(f"No atom with v={v}" + (f", r={r}" if r is not None else ""))
        return int(hits[0])


def moments(mu):
    return Moments(
        sigma=mu.rho * math.fsum(mu.w * mu.r),
        pi=mu.rho * math.fsum(mu.w * mu.r * mu.v),
        r2=mu.rho * math.fsum(mu.w * mu.r * mu.r),
    )


def effective_velocity(v, m):
    return v * (1.0 + m.sigma) - m.pi


def diffusion_coefficient(v, mu):
    return mu.rho * math.fsum(mu.w * mu.r * mu.r * np.abs(v - mu.v))


def gamma(v, w, mu):
    lo, hi = (v, w) if v <= w else (w, v)
    below = np.where(mu.v < lo, lo - mu.v, 0.0)
    above = np.where(mu.v > hi, mu.v - hi, 0.0)
    indicator_form = mu.rho * math.fsum(mu.w * mu.r * mu.r * (below + above))

    d_lo = diffusion_coefficient(lo, mu)
    d_hi = diffusion_coefficient(hi, mu)
    r2 = moments(mu).r2
    closed_form = 0.5 * (d_lo + d_hi - (hi - lo) * r2)

    scale = max(1.0, d_lo + d_hi + (hi - lo) * abs(r2))
    if abs(indicator_form - closed_form) > GAMMA_TOLERANCE * scale:
        raise ArithmeticError(
            f"Gamma({lo}, {hi}) disagrees between forms: {indicator_form!r} vs {closed_form!r}")
    return indicator_form


def gamma_matrix(mu):
    n = mu.n_atoms
    out = np.empty((n, n))
    for i in range(n):
        for j in range(i, n):
            out[i, j] = out[j, i] = gamma(mu.v[i], mu.v[j], mu)
    return out


def wiener_correlation(v, w, mu):
    """Correlation of the limiting Wiener family at velocities v and w."""
    d = math.sqrt(diffusion_coefficient(v, mu) * diffusion_coefficient(w, mu))
    if d == 0:
        return 0.0
    return gamma(v, w, mu) / d


# Spatial factors

@dataclass(frozen=True)
class CosineBump:
    """cos^2(pi (y - center) / width) on |y - center| <= width / 2."""
    center: float = 0.0
    width: float = 1.0

    def __post_init__(self):
        if not self.width > 0:
            raise ValueError(f"CosineBump width must be positive, got {self.width}")

    is_complex = False

    @property
    def support(self):
        half = 0.5 * self.width
        return (self.center - half, self.center + half)

    def __call__(self, y):
        y = np.asarray(y, dtype=np.float64)
        d = y - self.center
        return np.where(np.abs(d) <= 0.5 * self.width, np.cos(np.pi * d / self.width) ** 2, 0.0)


@dataclass(frozen=True)
class TruncatedGaussian:
    """Gaussian cut at 6 standard deviations and shifted down to vanish at the cut."""
    center: float = 0.0
    scale: float = 1.0

    CUT = 6.0

    def __post_init__(self):
        if not self.scale > 0:
            raise ValueError(f"TruncatedGaussian scale must be positive, got {self.scale}")

    is_complex = False

    @property
    def support(self):
        half = self.CUT * self.scale
        return (self.center - half, self.center + half)

    def __call__(self, y):
        z = (np.asarray(y, dtype=np.float64) - self.center) / self.scale
        floor = math.exp(-0.5 * self.CUT ** 2)
        return np.where(np.abs(z) <= self.CUT, np.exp(-0.5 * z * z) - floor, 0.0)


@dataclass(frozen=True)
class PlaneWave:
    """exp(i 2 pi k y) windowed by a compactly supported envelope."""
    k: float
    envelope: object

    is_complex = True

    @property
    def support(self):
        return self.envelope.support

    def __call__(self, y):
        y = np.asarray(y, dtype=np.float64)
        return np.exp(2j * np.pi * self.k * y) * self.envelope(y)


@dataclass(frozen=True)
class FieldObservable:
    """Separable test function phi(y, v_i, r_i) = spatial(y + offsets[i]) * selector[i] * r_i**r_power.

    Offsets are zero unless the observable was transported along the Euler
    characteristics.
    """
    spatial: object
    selector: np.ndarray
    r_power: int = 0
    offsets: np.ndarray = None
    name: str = "phi"

    def __post_init__(self):
        selector = np.array(self.selector, dtype=np.float64).ravel()
        selector.setflags(write=False)
        object.__setattr__(self, "selector", selector)
        if int(self.r_power) != self.r_power or self.r_power < 0:
            raise ValueError(f"r_power must be a nonnegative integer, got {self.r_power}")
        object.__setattr__(self, "r_power", int(self.r_power))
        if self.offsets is not None:
            offsets = np.array(self.offsets, dtype=np.float64).ravel()
            if offsets.size != selector.size:
                raise ValueError(f"offsets has {offsets.size} entries for {selector.size} atoms")
            offsets.setflags(write=False)
            object.__setattr__(self, "offsets", offsets)

    @classmethod
    def bump(cls, center=0.0, width=1.0, selector=(1.0,), name="bump"):
        return cls(CosineBump(center, width), np.asarray(selector, dtype=np.float64), name=name)

    @classmethod
    def on_atom(cls, spatial, atom_index, n_atoms, name=None):
        selector = np.zeros(n_atoms)
        selector[atom_index] = 1.0
        return cls(spatial, selector, name=name or f"phi@atom{atom_index}")

    @property
    def n_atoms(self):
        return int(self.selector.size)

    @property
    def is_complex(self):
        return bool(getattr(self.spatial, "is_complex", False))

    @property
    def is_transported(self):
        return self.offsets is not None and bool(np.any(self.offsets != 0))

    @property
    def support(self):
        lo, hi = self.spatial.support
        if not self.is_transported:
            return (lo, hi)
        active = self.offsets[self.selector != 0]
        if active.size == 0:
            return (lo, hi)
        return (lo - float(np.max(active)), hi - float(np.min(active)))

    def coefficients(self, atom_r):
        """Per-atom factor selector[i] * r_i**r_power."""
        if self.r_power == 0:
            return self.selector.copy()
        return self.selector * np.asarray(atom_r, dtype=np.float64) ** self.r_power

    def __call__(self, y, atom, atom_r):
        """Evaluate at rod positions y for particles of atom indices `atom`."""
        y = np.asarray(y, dtype=np.float64)
        atom = np.asarray(atom, dtype=np.intp)
        if self.offsets is not None:
            y = y + self.offsets[atom]
        return self.spatial(y) * self.coefficients(atom_r)[atom]

    def transported(self, offsets, name=None):
        return FieldObservable(self.spatial, self.selector, self.r_power, offsets,
                               name or f"{self.name}_t")

    def with_selector(self, selector, name=None):
        return FieldObservable(self.spatial, selector, self.r_power, self.offsets, name or self.name)


# Quadrature

def _quad(func, lo, hi, epsabs, what):
    with warnings.catch_warnings():
        warnings.simplefilter("error", integrate.IntegrationWarning)
        try:
            value, _ = integrate.quad(func, lo, hi, epsrel=QUAD_RELATIVE_TOLERANCE, epsabs=epsabs, limit=500)
        except integrate.IntegrationWarning as e:
            raise QuadratureError(f"Quadrature of {what} on [{lo}, {hi}] did not converge: {str(e)}") from e
    return value


def integrate_spatial(func, lo, hi, is_complex=False, what="observable"):
    if not lo < hi:
        return 0j if is_complex else 0.0
    # oscillating integrands can cancel to zero, so the absolute tolerance follows the integrand's size
    samples = np.abs(func(np.linspace(lo, hi, 257)))
    epsabs = max(QUAD_RELATIVE_TOLERANCE * 1e-2 * (hi - lo) * float(np.max(samples)), 1e-300)
    if not is_complex:
        return _quad(lambda y: float(np.real(func(y))), lo, hi, epsabs, what)
    re = _quad(lambda y: float(np.real(func(y))), lo, hi, epsabs, f"{what} (real part)")
    im = _quad(lambda y: float(np.imag(func(y))), lo, hi, epsabs, f"{what} (imaginary part)")
    return complex(re, im)


def _atom_overlaps(phi, psi):
    """Per-atom integral of phi's spatial factor times the conjugate of psi's."""
    n = phi.n_atoms
    off_phi = phi.offsets if phi.offsets is not None else np.zeros(n)
    off_psi = psi.offsets if psi.offsets is not None else np.zeros(n)
    is_complex = phi.is_complex or psi.is_complex
    cache = {}
    out = np.zeros(n, dtype=np.complex128 if is_complex else np.float64)
    for i in range(n):
        key = (off_phi[i], off_psi[i])
        if key not in cache:
            lo_a, hi_a = phi.spatial.support
            lo_b, hi_b = psi.spatial.support
            lo = max(lo_a - off_phi[i], lo_b - off_psi[i])
            hi = min(hi_a - off_phi[i], hi_b - off_psi[i])
            sa, sb, oa, ob = phi.spatial, psi.spatial, off_phi[i], off_psi[i]
            cache[key] = integrate_spatial(lambda y: sa(y + oa) * np.conj(sb(y + ob)), lo, hi,
                                           is_complex, f"{phi.name}*{psi.name}")
        out[i] = cache[key]
    return out


def _check_atoms(phi, mu):
    if phi.n_atoms != mu.n_atoms:
        raise ValueError(f"Observable {phi.name} has {phi.n_atoms} selector entries for {mu.n_atoms} atoms")


def _weighted_sum(values):
    if np.iscomplexobj(values):
        return complex(math.fsum(np.real(values)), math.fsum(np.imag(values)))
    return math.fsum(values)


def length_mean(phi, mu):
    """<phi> = rho * sum_i w_i r_i * integral phi(y, v_i, r_i) dy."""
    _check_atoms(phi, mu)
    lo, hi = phi.spatial.support
    total = integrate_spatial(phi.spatial, lo, hi, phi.is_complex, phi.name)
    return mu.rho * _weighted_sum(mu.w * mu.r * phi.coefficients(mu.r) * total)


def second_moment(phi, psi, mu):
    """<phi conj(psi)>_2 = rho * sum_i w_i r_i^2 * integral phi conj(psi) dy."""
    _check_atoms(phi, mu)
    _check_atoms(psi, mu)
    overlaps = _atom_overlaps(phi, psi)
    a = phi.coefficients(mu.r)
    b = psi.coefficients(mu.r)
    return mu.rho * _weighted_sum(mu.w * mu.r * mu.r * a * b * overlaps)


# Operators P and C

def _p_constant(phi, mu, m):
    if phi.is_transported:
        raise ValueError(f"P is defined on untransported observables, {phi.name} carries offsets")
    _check_atoms(phi, mu)
    return mu.rho / (1.0 + m.sigma) * math.fsum(mu.w * mu.r * phi.coefficients(mu.r))


def apply_p(phi, mu, m):
    c = _p_constant(phi, mu, m)
    return FieldObservable(phi.spatial, np.full(mu.n_atoms, c), 0, None, f"P[{phi.name}]")


def apply_c(phi, mu, m):
    c = _p_constant(phi, mu, m)
    return FieldObservable(phi.spatial, phi.coefficients(mu.r) - c, 0, None, f"C[{phi.name}]")


def static_covariance(phi, psi, mu, m):
    """<C phi conj(C psi)>_2 / (1 + sigma), real part; the second moment carries rho.

    Composes C explicitly; no closed-form shortcut for the operator is used.
    """
    c_phi = apply_c(phi, mu, m)
    c_psi = apply_c(psi, mu, m)
    value = mu.rho / (1.0 + m.sigma) * _weighted_sum(
        mu.w * mu.r * mu.r * c_phi.selector * c_psi.selector * _atom_overlaps(c_phi, c_psi))
    return float(np.real(value))


def static_covariance_spectral(phi, psi, mu, m, n_grid=2 ** 14, padding=4.0):
    """Same quadratic form evaluated on Fourier transforms of the spatial factors."""
    c_phi = apply_c(phi, mu, m)
    c_psi = apply_c(psi, mu, m)
    lo = min(phi.spatial.support[0], psi.spatial.support[0])
    hi = max(phi.spatial.support[1], psi.spatial.support[1])
    span = (hi - lo) * padding
    y = lo - 0.5 * (span - (hi - lo)) + span * np.arange(n_grid) / n_grid
    dy = span / n_grid
    f_hat = fft(c_phi.spatial(y)) * dy
    g_hat = fft(c_psi.spatial(y)) * dy
    dk = 1.0 / span
    # Phase factors from the grid origin cancel in the product
    overlap = np.sum(f_hat * np.conj(g_hat)) * dk
    value = mu.rho / (1.0 + m.sigma) * _weighted_sum(
        mu.w * mu.r * mu.r * c_phi.selector * c_psi.selector * overlap)
    return float(np.real(value))


# Euler transport residual

def transport_residual_variance(phi, mu, m, t):
    """Limit variance of xi_t(phi) - xi_0(phi_t) at Euler time t.

    The collision flow of every quasi-particle fluctuates by order sqrt(eps),
    which leaves an order-one residual between the evolved field and the
    transported initial field. To first order it is the point field of

        g_j(x) = r_j rho / (1 + sigma) * sum_i w_i r_i phi_i(y + e_i) - phi_i(y + e_i - (1 + sigma)(v_i - v_j) t)

    with y = (1 + sigma) x and e_i = v_eff(v_i) t, so the variance is
    rho^3 / (1 + sigma)^3 * sum_j w_j r_j^2 * integral h_j(y)^2 dy.
    """
    _check_atoms(phi, mu)
    if phi.is_transported:
        raise ValueError(f"{phi.name} is already transported")
    if phi.is_complex:
        raise ValueError(f"The transport residual is defined for real observables, {phi.name} is complex")
    if t < 0:
        raise ValueError(f"Euler time must be nonnegative, got {t}")
    if t == 0:
        return 0.0
    scale = 1.0 + m.sigma
    coef = mu.w * mu.r * phi.coefficients(mu.r)
    e = effective_velocity(mu.v, m) * t
    lo, hi = phi.spatial.support
    s = phi.spatial
    per_atom = np.zeros(mu.n_atoms)
    for j in range(mu.n_atoms):
        shift = scale * (mu.v - mu.v[j]) * t
        active = np.flatnonzero((coef != 0) & (shift != 0))
        if active.size == 0:
            continue

        def h(y, active=active, shift=shift):
            y = np.asarray(y, dtype=np.float64)
            total = np.zeros(y.shape)
            for i in active:
                total = total + coef[i] * (s(y + e[i]) - s(y + e[i] - shift[i]))
            return total

        edges = sorted({lo - e[i] for i in active} | {hi - e[i] for i in active}
                       | {lo - e[i] + shift[i] for i in active} | {hi - e[i] + shift[i] for i in active})
        per_atom[j] = math.fsum(integrate_spatial(lambda y: h(y) ** 2, a, b, what=f"transport residual of {phi.name}")
                                for a, b in zip(edges, edges[1:]))
    return mu.rho ** 3 / scale ** 3 * _weighted_sum(mu.w * mu.r * mu.r * per_atom)
