"""Exact evolution of the gas in the reduced (point-frame) description.

Rods never collide here. Every particle moves freely and rod positions are
reconstructed from the dilation map plus the collision flow. Each kernel has
a brute-force scan twin used as an oracle in tests; both reduce their per-atom
terms through the same compensated sum in atom order so they agree bitwise.
"""
from dataclasses import dataclass, field

import numpy as np

from measure_model import Moments, effective_velocity


class WindowError(ValueError):
    """A query or an evolution reaches outside the sampled window."""


def _check_range(X, lo, hi, what):
    w_lo, w_hi = X.window
    if lo < w_lo or hi > w_hi:
        raise WindowError(f"{what} spans [{lo}, {hi}], outside the window [{w_lo}, {w_hi}]")


def _compensated_sum(terms):
    """Neumaier sum over the first axis, elementwise over the rest."""
    terms = np.asarray(terms, dtype=np.float64)
    s = np.zeros(terms.shape[1:])
    c = np.zeros(terms.shape[1:])
    for t in terms:
        tmp = s + t
        c = c + np.where(np.abs(s) >= np.abs(t), (s - tmp) + t, (t - tmp) + s)
        s = tmp
    return s + c


def _count_half_open(xs, lo, hi):
    """Number of xs in [lo, hi)."""
    return np.searchsorted(xs, hi, side="left") - np.searchsorted(xs, lo, side="left")


def _count_open(xs, lo, hi):
    """Number of xs in (lo, hi); zero when the interval is empty."""
    return np.maximum(np.searchsorted(xs, hi, side="left") - np.searchsorted(xs, lo, side="right"), 0)


# Mass measure and dilation

def mass_measures(X, a, b):
    """m_a^b for a scalar a and an array of b.

    Intervals are half-open on both orientations, [a, b) for a < b and [b, a)
    counted negatively for b < a, so m_a^b = -m_b^a holds exactly.
    """
    b = np.atleast_1d(np.asarray(b, dtype=np.float64))
    if b.size == 0:
        return b.copy()
    _check_range(X, min(a, float(b.min())), max(a, float(b.max())), "mass measure")
    terms = np.zeros((X.n_atoms, b.size))
    forward = b > a
    for k in range(X.n_atoms):
        xs = X.atom_positions(k)
        counts = np.where(forward, _count_half_open(xs, a, b), -_count_half_open(xs, b, a))
        terms[k] = (X.eps * X.atom_r[k]) * counts
    return _compensated_sum(terms)


def mass_measure(X, a, b):
    return float(mass_measures(X, a, [b])[0])


def mass_measure_bruteforce(X, a, b):
    _check_range(X, min(a, b), max(a, b), "mass measure")
    terms = np.zeros((X.n_atoms, 1))
    for k in range(X.n_atoms):
        xs = X.x[X.atom == k]
        if b > a:
            count = np.count_nonzero((xs >= a) & (xs < b))
        else:
            count = -np.count_nonzero((xs >= b) & (xs < a))
        terms[k, 0] = (X.eps * X.atom_r[k]) * count
    return float(_compensated_sum(terms)[0])


def dilate(X, points=None, anchor=0.0):
    """D_a(b) = b - a + m_a^b, for every particle unless query points are given."""
    points = X.x if points is None else np.atleast_1d(np.asarray(points, dtype=np.float64))
    if points.size == 0:
        return np.array(points, dtype=np.float64)
    return points - anchor + mass_measures(X, anchor, points)


# Free evolution

def free_evolve(X, t):
    time = X.time + t
    lo, hi = X.base_window
    shift = X.atom_v * time
    window = (lo + float(np.max(shift)), hi + float(np.min(shift)))
    if not window[0] < window[1]:
        raise WindowError(
            f"Free evolution to time {time} leaves no fully populated region of the window "
            f"[{lo}, {hi}]; the sampling buffer is undersized")
    return X.evolved(time, window)


# Collision flow

def _flow_terms(X, x, v, t, scan):
    terms = np.zeros((X.n_atoms, x.size))
    for k in range(X.n_atoms):
        vk = X.atom_v[k]
        d = (v - vk) * t
        end = x + d
        slower = vk < v
        faster = vk > v
        if scan:
            xs = X.x[X.atom == k][:, None]
            ahead = np.count_nonzero((xs > x) & (xs < end), axis=0)
            behind = np.count_nonzero((xs > end) & (xs < x), axis=0)
        else:
            xs = X.atom_positions(k)
            ahead = _count_open(xs, x, end)
            behind = _count_open(xs, end, x)
        counts = np.where(slower, ahead, 0) - np.where(faster, behind, 0)
        terms[k] = (X.eps * X.atom_r[k]) * counts
    return terms


def _check_flow_range(X, x, v, t):
    if t < 0:
        raise ValueError(f"Flow time must be nonnegative, got {t}")
    if x.size == 0:
        return
    d_lo = (v - float(np.max(X.atom_v))) * t
    d_hi = (v - float(np.min(X.atom_v))) * t
    lo = float(np.min(np.minimum(x, x + d_lo)))
    hi = float(np.max(np.maximum(x, x + d_hi)))
    _check_range(X, lo, hi, "flow interval")


def flows(X, x, v, t):
    """Collision flow j(x_k, v_k, t) for arrays of base points and velocities."""
    x = np.atleast_1d(np.asarray(x, dtype=np.float64))
    v = np.broadcast_to(np.asarray(v, dtype=np.float64), x.shape)
    _check_flow_range(X, x, v, t)
    return _compensated_sum(_flow_terms(X, x, v, t, scan=False))


def flow(X, x, v, t):
    return float(flows(X, [x], [v], t)[0])


def flow_bruteforce(X, x, v, t):
    x = np.array([x], dtype=np.float64)
    v = np.array([v], dtype=np.float64)
    _check_flow_range(X, x, v, t)
    return float(_compensated_sum(_flow_terms(X, x, v, t, scan=True))[0])


# Quasi-particles

def core_mask(X, horizon):
    """Particles whose flow intervals up to `horizon` stay inside the window."""
    lo, hi = X.window
    reach_right = (X.v - float(np.min(X.atom_v))) * horizon
    reach_left = (X.v - float(np.max(X.atom_v))) * horizon
    return (X.x + reach_right <= hi) & (X.x + reach_left >= lo)


def _require_initial(X):
    if X.time != 0:
        raise ValueError(f"Quasi-particle positions are built on the initial configuration, got time {X.time}")


def quasiparticle_positions(X, t, mask=None):
    """y_t = D_0(x) + v t + j(x, v, t) for all particles, or those selected by mask."""
    _require_initial(X)
    x = X.x if mask is None else X.x[mask]
    v = X.v if mask is None else X.v[mask]
    if x.size == 0:
        return np.zeros(0)
    return dilate(X, x) + v * t + flows(X, x, v, t)


def quasiparticle_position(X, particle_id, t):
    _require_initial(X)
    k = X.slot(particle_id)
    x, v = float(X.x[k]), float(X.v[k])
    return float(dilate(X, [x])[0]) + v * t + flow(X, x, v, t)


def select_particle(X, atom_index, near=0.0, exclude=()):
    """Id of the particle of one atom closest to `near`, skipping the ids in `exclude`."""
    xs = X.atom_positions(atom_index)
    ids = X.atom_ids(atom_index)
    lo = int(np.searchsorted(xs, near)) - 1
    hi = lo + 1
    while lo >= 0 or hi < xs.size:
        if hi >= xs.size or (lo >= 0 and near - xs[lo] <= xs[hi] - near):
            j, lo = lo, lo - 1
        else:
            j, hi = hi, hi + 1
        if int(ids[j]) not in exclude:
            return int(ids[j])
    raise ValueError(f"No eligible particle of atom {atom_index} in the configuration")


def empirical_moments(X):
    """sigma, pi and r2 estimated from the particles, per unit length of the sampled window."""
    width = X.base_window[1] - X.base_window[0]
    return Moments(
        sigma=X.eps * float(np.sum(X.r)) / width,
        pi=X.eps * float(np.sum(X.r * X.v)) / width,
        r2=X.eps * float(np.sum(X.r * X.r)) / width,
    )


@dataclass(frozen=True)
class TrackSample:
    time: float
    position: float
    displacement: float


@dataclass
class QuasiParticleTrack:
    particle_id: int
    velocity: float
    y0: float
    v_eff: float
    samples: list = field(default_factory=list)

    @property
    def times(self):
        return np.array([s.time for s in self.samples])

    @property
    def displacements(self):
        return np.array([s.displacement for s in self.samples])


def track(X, particle_id, times, m, empirical=False):
    times = [float(T) for T in times]
    if not times:
        raise ValueError("track needs at least one time")
    if times[0] < 0 or any(b <= a for a, b in zip(times, times[1:])):
        raise ValueError(f"Track times must be nonnegative and strictly increasing, got {times}")
    if empirical:
        m = empirical_moments(X)
    k = X.slot(particle_id)
    v = float(X.v[k])
    v_eff = effective_velocity(v, m)
    y0 = quasiparticle_position(X, particle_id, 0.0)
    result = QuasiParticleTrack(int(particle_id), v, y0, v_eff)
    for T in times:
        y = y0 if T == 0 else quasiparticle_position(X, particle_id, T)
        result.samples.append(TrackSample(T, y, (y - y0) - v_eff * T))
    return result
