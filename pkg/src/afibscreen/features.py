"""Interval-irregularity features.

``extract_features`` returns five numbers per recording:

* ``f1`` - population std of the 5th-order successive differences (ms)
* ``f2`` - entropy of a 2-bin interval histogram, in nats
* ``f3`` - grid L1 gap between the interval KDE and the best-fitting
  Rayleigh density
* ``f4`` - radius of the horizontal visibility graph (see :mod:`.hvg`)
* ``f5`` - ``sum e_ab ln e_ab`` of the HVG degree mixing matrix (<= 0)
"""

from __future__ import annotations

import math
from dataclasses import astuple, dataclass

import numpy as np

from .errors import NonPositiveInterval, SeriesTooShort
from .hvg import hvg_disassortative_entropy, hvg_radius
from .preprocess import IBISequence

GRID_STEP_MS = 1.0
RAYLEIGH_TAIL = 0.01
MIN_BANDWIDTH_MS = 1.0
KDE_REACH = 3.0  # grid extends this many bandwidths past the longest interval
MIN_INTERVALS = 10

FEATURE_NAMES = ("f1", "f2", "f3", "f4", "f5")
INTEGER_FEATURES = frozenset({"f4"})


@dataclass(frozen=True)
class FeatureVector:
    f1: float
    f2: float
    f3: float
    f4: int
    f5: float

    def __array__(self, dtype=None, copy=None):
        return np.asarray(astuple(self), dtype=float if dtype is None else dtype)

    def as_array(self) -> np.ndarray:
        return np.asarray(self)


@dataclass(frozen=True)
class RayleighFit:
    sigma_ml: float
    grid_step: float
    grid_len: int


def _values(I) -> np.ndarray:
    if isinstance(I, IBISequence):
        return I.intervals
    return np.asarray(I, dtype=float).ravel()


def f1_sd_derivative(I, n: int = 5) -> float:
    x = _values(I)
    if x.size < n + 2:
        raise SeriesTooShort(f"order-{n} differences need at least {n + 2} intervals, got {x.size}")
    return float(np.std(np.diff(x, n=n)))


def f2_histogram_entropy(I, bins: int = 2) -> float:
    """Entropy ``-sum h_j ln(h_j / w_j)`` of an equal-width histogram over ``[min, max]``.

    ``h_j`` are bin fractions and ``w_j`` the bin width in ms. A flat series
    has no spread to bin and yields 0.
    """
    x = _values(I)
    if x.size < 2:
        raise SeriesTooShort(f"need at least 2 intervals, got {x.size}")
    if bins < 1:
        raise ValueError("bins must be positive")
    lo, hi = float(x.min()), float(x.max())
    if hi == lo:
        return 0.0
    width = (hi - lo) / bins
    idx = np.minimum(((x - lo) / width).astype(int), bins - 1)
    h = np.bincount(idx, minlength=bins) / x.size
    h = h[h > 0]
    return float(-np.sum(h * np.log(h / width)))


def rayleigh_pdf(x, sigma: float) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    s2 = sigma * sigma
    return np.where(x >= 0, x / s2 * np.exp(-x * x / (2.0 * s2)), 0.0)


def silverman_bandwidth(I) -> float:
    """``(4 sd^5 / 3N)^(1/5)`` with population sd, floored at 1 ms."""
    x = _values(I)
    sd = float(np.std(x))
    sigma = (4.0 * sd**5 / (3.0 * x.size)) ** 0.2
    return max(sigma, MIN_BANDWIDTH_MS)


def kde_density(I, x, bandwidth: float | None = None) -> np.ndarray | float:
    """Gaussian KDE of the intervals evaluated at ``x`` (ms), in 1/ms."""
    data = _values(I)
    if data.size < 1:
        raise SeriesTooShort("need at least 1 interval")
    h = silverman_bandwidth(data) if bandwidth is None else bandwidth
    pts = np.asarray(x, dtype=float)
    z = (pts.reshape(-1, 1) - data.reshape(1, -1)) / h
    dens = np.exp(-0.5 * z * z).sum(axis=1) / (data.size * h * math.sqrt(2.0 * math.pi))
    return float(dens[0]) if pts.ndim == 0 else dens.reshape(pts.shape)


def _tail_grid_len(sigma: float, step: float) -> int:
    # first grid point past the mode where the density is below 1% of its peak
    peak = rayleigh_pdf(sigma, sigma)
    start = max(1, int(math.ceil(sigma / step)))
    stop = int(math.ceil(10.0 * sigma / step)) + 2
    j = np.arange(start, stop)
    below = np.flatnonzero(rayleigh_pdf(j * step, sigma) < RAYLEIGH_TAIL * peak)
    return int(j[below[0]])


def rayleigh_sigma_ml(I) -> RayleighFit:
    """Closed-form Rayleigh scale MLE plus the summation grid it implies.

    The grid length is the first point past the mode where the fitted
    density drops below 1 % of its peak, extended if needed to reach
    ``max(I) + 3 * bandwidth`` so the KDE's mass is covered as well.
    """
    x = _values(I)
    if x.size < 2:
        raise SeriesTooShort(f"need at least 2 intervals, got {x.size}")
    if np.any(x <= 0):
        raise NonPositiveInterval("Rayleigh fit needs strictly positive intervals")
    sigma = math.sqrt(float(np.sum(x * x)) / (2.0 * x.size))
    m_tail = _tail_grid_len(sigma, GRID_STEP_MS)
    m_kde = int(math.ceil((x.max() + KDE_REACH * silverman_bandwidth(x)) / GRID_STEP_MS))
    return RayleighFit(sigma, GRID_STEP_MS, max(m_tail, m_kde))


def f3_rayleigh_resemblance(I) -> float:
    x = _values(I)
    fit = rayleigh_sigma_ml(x)
    grid = np.arange(1, fit.grid_len + 1) * fit.grid_step
    diff = np.abs(rayleigh_pdf(grid, fit.sigma_ml) - kde_density(x, grid))
    return float(np.sum(diff) / fit.grid_step)


def extract_features(I, n: int = 5, bins: int = 2) -> FeatureVector:
    x = _values(I)
    if x.size < MIN_INTERVALS:
        raise SeriesTooShort(f"need at least {MIN_INTERVALS} intervals, got {x.size}")
    return FeatureVector(
        f1=f1_sd_derivative(x, n),
        f2=f2_histogram_entropy(x, bins),
        f3=f3_rayleigh_resemblance(x),
        f4=hvg_radius(x),
        f5=hvg_disassortative_entropy(x),
    )
