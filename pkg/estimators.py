import logging
import math
from dataclasses import dataclass

import numpy as np

from dynamics import (WindowError, core_mask, dilate, empirical_moments, quasiparticle_positions,
                      track)
from measure_model import CosineBump, FieldObservable, PlaneWave, effective_velocity, length_mean

__all__ = [
    "FieldSample", "MCSummary", "PairStatistics", "RodSnapshot", "aggregate", "empirical_moments",
    "field_k", "field_n", "fourier_mode", "jackknife_stderr", "leave_one_out_covariances",
    "leave_one_out_variances", "pair_displacement_cov", "pair_displacements", "rod_snapshot",
    "snapshot_field", "xi_diffusive", "xi_x", "xi_y",
]


def _sum(values):
    if values.size == 0:
        return 0j if np.iscomplexobj(values) else 0.0
    total = np.sum(values)
    return complex(total) if np.iscomplexobj(values) else float(total)


# Fields on the point frame

def field_n(X, phi):
    """N(phi) = eps * sum r phi(x, v, r) over the point configuration."""
    lo, hi = phi.support
    w_lo, w_hi = X.window
    if lo < w_lo or hi > w_hi:
        raise WindowError(f"Support [{lo}, {hi}] of {phi.name} leaves the window [{w_lo}, {w_hi}]")
    a = np.searchsorted(X.x, lo, side="left")
    b = np.searchsorted(X.x, hi, side="right")
    x, atom, r = X.x[a:b], X.atom[a:b], X.r[a:b]
    return X.eps * _sum(r * phi(x, atom, X.atom_r))


def xi_x(X, phi, mu, center=None):
    if center is None:
        center = length_mean(phi, mu)
    return (field_n(X, phi) - center) / math.sqrt(X.eps)


# Fields on the rod frame

@dataclass(frozen=True)
class RodSnapshot:
    """Rod positions of the core quasi-particles at one free-gas time T."""
    y: np.ndarray
    atom: np.ndarray
    r: np.ndarray
    atom_r: np.ndarray
    eps: float
    time: float

    @property
    def extent(self):
        if self.y.size == 0:
            return (0.0, 0.0)
        return (float(np.min(self.y)), float(np.max(self.y)))


def rod_snapshot(X, T, recenter=None):
    """Quasi-particle positions at free time T, optionally shifted back by v_eff(v) * T.

    `recenter` is a Moments instance; when given, the snapshot is taken in the
    frame moving with the Euler characteristics.
    """
    mask = core_mask(X, T)
    if T == 0:
        y = dilate(X, X.x[mask])
    else:
        y = quasiparticle_positions(X, T, mask)
    if recenter is not None and T != 0:
        y = y - effective_velocity(X.v[mask], recenter) * T
    return RodSnapshot(y, X.atom[mask], X.r[mask], X.atom_r, X.eps, float(T))


def snapshot_field(snapshot, phi):
    lo, hi = phi.support
    y_lo, y_hi = snapshot.extent
    if lo <= y_lo or hi >= y_hi:
        raise WindowError(
            f"Support [{lo}, {hi}] of {phi.name} reaches the edge of the core image "
            f"[{y_lo}, {y_hi}] at time {snapshot.time}")
    sel = (snapshot.y >= lo) & (snapshot.y <= hi)
    vals = phi(snapshot.y[sel], snapshot.atom[sel], snapshot.atom_r)
    return snapshot.eps * _sum(snapshot.r[sel] * vals)


def _rod_center(phi, mu, m):
    return length_mean(phi, mu) / (1.0 + m.sigma)


def field_k(X, phi, t):
    """K_t(phi) = eps * sum r phi(y_t(x), v, r) at Euler time t."""
    return snapshot_field(rod_snapshot(X, t), phi)


def xi_y(X, phi, t, mu, m, center=None):
    if center is None:
        center = _rod_center(phi, mu, m)
    return (field_k(X, phi, t) - center) / math.sqrt(X.eps)


def xi_diffusive(X, phi, t, mu, m, center=None, empirical=False):
    """Rod field at free time t / eps, recentered on the Euler characteristics."""
    if center is None:
        center = _rod_center(phi, mu, m)
    recenter = empirical_moments(X) if empirical else m
    snap = rod_snapshot(X, t / X.eps, recenter=recenter)
    return (snapshot_field(snap, phi) - center) / math.sqrt(X.eps)


def plane_wave_observable(k, atom_index, envelope, n_atoms):
    return FieldObservable.on_atom(PlaneWave(k, envelope), atom_index, n_atoms, name=f"wave(k={k})@atom{atom_index}")


def fourier_mode(X, k, atom_index, envelope, t, mu, m):
    phi = plane_wave_observable(k, atom_index, envelope, mu.n_atoms)
    return complex(xi_diffusive(X, phi, t, mu, m))


def default_envelope(k, center=0.0, wavelengths=10):
    if k == 0:
        raise ValueError("The default envelope needs a nonzero wavenumber")
    return CosineBump(center, wavelengths / abs(k))


# Tagged pairs

def pair_displacements(X, id1, id2, T, m, empirical=False):
    """Recentered displacements of two tagged quasi-particles at free time T."""
    d1 = track(X, id1, [T], m, empirical).samples[-1].displacement
    d2 = track(X, id2, [T], m, empirical).samples[-1].displacement
    return d1, d2


@dataclass(frozen=True)
class PairStatistics:
    n: int
    covariance: float
    covariance_stderr: float
    correlation: float
    correlation_stderr: float


def pair_displacement_cov(d1, d2):
    """Trial mean of d1*d2 and the uncentered correlation, both with standard errors."""
    d1 = np.asarray(d1, dtype=np.float64)
    d2 = np.asarray(d2, dtype=np.float64)
    n = d1.size
    if n < 2 or d2.size != n:
        raise ValueError(f"Pair statistics need two aligned columns of at least 2 trials, got {d1.size} and {d2.size}")
    prod = d1 * d2
    cov = float(np.mean(prod))
    cov_se = float(np.std(prod, ddof=1) / math.sqrt(n))

    s12, s11, s22 = float(np.sum(prod)), float(np.sum(d1 * d1)), float(np.sum(d2 * d2))
    denom = math.sqrt(s11 * s22)
    corr = s12 / denom if denom > 0 else float("nan")
    with np.errstate(invalid="ignore", divide="ignore"):
        loo = (s12 - prod) / np.sqrt((s11 - d1 * d1) * (s22 - d2 * d2))
    return PairStatistics(n, cov, cov_se, corr, jackknife_stderr(loo))


# Aggregation

class FieldSample:
    """Per-trial values of named statistics, one row per trial, all from the same realization."""

    def __init__(self, names, values):
        self.names = list(names)
        self.values = np.asarray(values, dtype=np.float64).reshape(-1, len(self.names))

    @classmethod
    def from_rows(cls, rows):
        rows = list(rows)
        if not rows:
            raise ValueError("No trial rows to aggregate")
        names = list(rows[0].keys())
        for i, row in enumerate(rows):
            if list(row.keys()) != names:
                raise ValueError(f"Trial {i} reports statistics {list(row.keys())}, expected {names}")
        return cls(names, [[row[name] for name in names] for row in rows])

    @property
    def n(self):
        return int(self.values.shape[0])

    def column(self, name):
        try:
            return self.values[:, self.names.index(name)]
        except ValueError:
            raise ValueError(f"No statistic named {name}; have {self.names}") from None


def leave_one_out_covariances(x, y):
    """Unbiased covariance of x and y with each trial left out in turn."""
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    n = x.size
    if n < 3:
        return np.full(n, np.nan)
    cx = x - np.mean(x)
    cy = y - np.mean(y)
    sxy = np.sum(cx * cy)
    return (sxy - n / (n - 1) * cx * cy) / (n - 2)


def leave_one_out_variances(x):
    return leave_one_out_covariances(x, x)


def jackknife_stderr(loo_estimates):
    loo = np.asarray(loo_estimates, dtype=np.float64)
    n = loo.size
    if n < 2 or not np.all(np.isfinite(loo)):
        return float("nan")
    return float(math.sqrt((n - 1) / n * np.sum((loo - np.mean(loo)) ** 2)))


@dataclass(frozen=True)
class MCSummary:
    names: list
    n: int
    mean: np.ndarray
    variance: np.ndarray
    stderr_mean: np.ndarray
    stderr_variance: np.ndarray
    covariance: np.ndarray
    stderr_covariance: np.ndarray

    def index(self, name):
        return self.names.index(name)


def aggregate(sample):
    n = sample.n
    if n < 2:
        raise ValueError(f"Aggregation needs at least 2 trials, got {n}")
    values = sample.values
    k = values.shape[1]
    mean = np.mean(values, axis=0)
    covariance = np.atleast_2d(np.cov(values, rowvar=False, ddof=1))
    variance = np.diag(covariance).copy()
    stderr_mean = np.sqrt(variance / n)
    stderr_cov = np.empty((k, k))
    for i in range(k):
        for j in range(i, k):
            loo = leave_one_out_covariances(values[:, i], values[:, j])
            stderr_cov[i, j] = stderr_cov[j, i] = jackknife_stderr(loo)
    logging.debug(f"Aggregated {k} statistics over {n} trials")
    return MCSummary(list(sample.names), n, mean, variance, stderr_mean, np.diag(stderr_cov).copy(),
                     covariance, stderr_cov)
