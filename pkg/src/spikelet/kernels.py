"""
Scale-space smoothing kernels and their discrete-time realizations.

Three smoothers are provided, all with unit DC gain:

- smooth_gaussian       - sampled, renormalized Gaussian (non-causal).
- smooth_exponential    - first-order leaky integrator (truncated exponential).
- smooth_limit_kernel   - finite cascade of leaky integrators approximating
                          the time-causal limit kernel.

Scales are in seconds; a Signal carries its own sample interval.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy import ndimage, signal as sps

__all__ = [
    "ALPHA_FLOOR", "C_MIN", "DEFAULT_CASCADE_ORDER", "GAUSS_TRUNCATE",
    "Signal", "ScaleGrid", "KernelSpec", "StabilityError",
    "make_scale_grid", "mu_min", "check_stable",
    "limit_time_constants", "max_cascade_order",
    "smooth_gaussian", "smooth_exponential", "smooth_limit_kernel",
    "gaussian_taps", "exp_filter",
]

ALPHA_FLOOR = 0.01
C_MIN = 1.05
DEFAULT_CASCADE_ORDER = 7
GAUSS_TRUNCATE = 6.0


class StabilityError(ValueError):
    """A time constant is too short for the sample interval."""

    def __init__(self, message, stage=None):
        super().__init__(message)
        self.stage = stage


@dataclass(frozen=True)
class Signal:
    """Uniformly sampled real time series."""

    samples: np.ndarray
    dt: float

    def __post_init__(self):
        x = np.array(self.samples, dtype=float).ravel()
        if x.size < 1:
            raise ValueError("signal must contain at least one sample")
        if not np.all(np.isfinite(x)):
            raise ValueError("signal samples must be finite")
        if not (np.isfinite(self.dt) and self.dt > 0):
            raise ValueError(f"dt must be positive and finite, got {self.dt!r}")
        x.flags.writeable = False
        object.__setattr__(self, "samples", x)
        object.__setattr__(self, "dt", float(self.dt))

    def __len__(self):
        return self.samples.size

    @property
    def t(self):
        return np.arange(self.samples.size) * self.dt

    @property
    def duration(self):
        return self.samples.size * self.dt

    def replace(self, samples):
        """New signal on the same time grid."""
        return Signal(samples, self.dt)

    @classmethod
    def impulse(cls, n, dt, at=0):
        x = np.zeros(n)
        x[at] = 1.0
        return cls(x, dt)


@dataclass(frozen=True)
class ScaleGrid:
    """Geometric ladder of scales sigma_0 < sigma_1 < ... < sigma_K.

    Build it with :func:`make_scale_grid`; ``levels[0]`` is sigma_1 / c.
    """

    c: float
    levels: np.ndarray = field(repr=False)

    @property
    def K(self):
        return self.levels.size - 1

    @property
    def sigma1(self):
        return float(self.levels[1])

    @property
    def coarsest(self):
        return float(self.levels[-1])

    def __repr__(self):
        return (f"ScaleGrid(c={self.c:.6g}, K={self.K}, "
                f"sigma_0={self.levels[0]:.4g}, sigma_K={self.coarsest:.4g})")


def make_scale_grid(sigma1, c, K):
    """Levels sigma_k = sigma1 * c**(k-1) for k = 0..K."""
    if not all(np.isfinite([sigma1, c])):
        raise ValueError("sigma1 and c must be finite")
    if sigma1 <= 0:
        raise ValueError(f"sigma1 must be positive, got {sigma1}")
    if c < C_MIN:
        raise ValueError(f"scale ratio c={c} is below the channel-distinctness "
                         f"floor {C_MIN}")
    if int(K) != K or K < 1:
        raise ValueError(f"K must be a positive integer, got {K}")
    K = int(K)
    levels = sigma1 * float(c) ** (np.arange(K + 1) - 1.0)
    levels.flags.writeable = False
    return ScaleGrid(float(c), levels)


def mu_min(dt, alpha_floor=ALPHA_FLOOR):
    """Shortest time constant whose discrete decay alpha stays above the floor."""
    return dt / -math.log(alpha_floor)


def check_stable(mu, dt, stage=None):
    # relative slack so that mu == mu_min(dt) computed elsewhere passes
    if mu < mu_min(dt) * (1 - 1e-12):
        where = "" if stage is None else f" (cascade stage {stage})"
        raise StabilityError(
            f"time constant {mu:.4g} s{where} is below the integrator floor "
            f"{mu_min(dt):.4g} s for dt={dt:.4g} s (alpha < {ALPHA_FLOOR})",
            stage=stage)


def limit_time_constants(sigma, c, n, match_variance=False):
    """Stage time constants c**-j * sqrt(c**2 - 1) * sigma, j = 1..n.

    With ``match_variance`` the truncated cascade is rescaled so that the
    stage variances sum to sigma**2 exactly (n = 1 then gives mu = sigma).
    """
    if n < 1:
        raise ValueError("cascade order must be >= 1")
    j = np.arange(1, n + 1)
    mus = float(c) ** -j * math.sqrt(c * c - 1.0) * sigma
    if match_variance:
        mus *= sigma / math.sqrt(np.sum(mus ** 2))
    return mus


def max_cascade_order(sigma, c, dt, cap=DEFAULT_CASCADE_ORDER):
    """Largest n <= cap for which every cascade stage passes the floor (0 if none)."""
    floor = mu_min(dt) * (1 - 1e-12)
    mus = limit_time_constants(sigma, c, cap)
    ok = mus >= floor
    return int(np.argmin(ok)) if not ok.all() else cap


@dataclass(frozen=True)
class KernelSpec:
    """One smoothing kernel: family, scale and (limit kernel only) cascade parameters."""

    family: str
    scale: float
    n: int | None = None
    c: float | None = None

    def __post_init__(self):
        if self.family not in ("gaussian", "exponential", "limit"):
            raise ValueError(f"unknown kernel family {self.family!r}")
        if not self.scale > 0:
            raise ValueError("kernel scale must be positive")
        if self.family == "limit" and (self.n is None or self.c is None):
            raise ValueError("limit kernel needs cascade order n and ratio c")

    def time_constants(self):
        if self.family == "exponential":
            return np.array([self.scale])
        if self.family == "limit":
            return limit_time_constants(self.scale, self.c, self.n)
        raise ValueError("the Gaussian has no time constants")

    def apply(self, signal):
        if self.family == "gaussian":
            return smooth_gaussian(signal, self.scale)
        if self.family == "exponential":
            return smooth_exponential(signal, self.scale)
        return smooth_limit_kernel(signal, self.scale, self.c, self.n)


def gaussian_taps(sigma, dt, truncate=GAUSS_TRUNCATE):
    """Centered Gaussian taps on [-truncate*sigma, truncate*sigma], unit sum."""
    half = max(1, int(math.ceil(truncate * sigma / dt)))
    t = np.arange(-half, half + 1) * dt
    taps = np.exp(-0.5 * (t / sigma) ** 2)
    return taps / taps.sum()


def smooth_gaussian(signal, sigma):
    """Convolve with a sampled, renormalized Gaussian (symmetric-reflect edges)."""
    if sigma < 0:
        raise ValueError("sigma must be >= 0")
    if sigma == 0:
        return signal.replace(signal.samples.copy())
    taps = gaussian_taps(sigma, signal.dt)
    y = ndimage.convolve1d(signal.samples, taps, mode="reflect")
    return signal.replace(y)


def exp_filter(x, mu, dt):
    """y[t] = a*y[t-1] + (1-a)*x[t], a = exp(-dt/mu), zero initial state.

    Works along the last axis of ``x``.
    """
    a = math.exp(-dt / mu)
    return sps.lfilter([1.0 - a], [1.0, -a], x, axis=-1)


def smooth_exponential(signal, mu):
    """Causal first-order leaky integrator with time constant mu (unit DC gain)."""
    check_stable(mu, signal.dt)
    return signal.replace(exp_filter(signal.samples, mu, signal.dt))


def smooth_limit_kernel(signal, sigma, c, n=None, match_variance=False):
    """Cascade of n leaky integrators with geometrically shrinking time constants.

    ``n=None`` picks the largest order <= 7 that keeps every stage stable.
    """
    if n is None:
        n = max_cascade_order(sigma, c, signal.dt)
        if n < 1:
            mus = limit_time_constants(sigma, c, 1, match_variance)
            check_stable(mus[0], signal.dt, stage=1)
    mus = limit_time_constants(sigma, c, n, match_variance)
    for j, mu in enumerate(mus, start=1):
        check_stable(mu, signal.dt, stage=j)
    y = signal.samples
    for mu in mus:
        y = exp_filter(y, mu, signal.dt)
    return signal.replace(y)
