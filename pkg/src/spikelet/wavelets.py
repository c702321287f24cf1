"""
Bandpass filter banks built from differences of adjacent scale-space levels.

Families
--------
dog : difference of Gaussians (non-causal)
doe : difference of truncated exponentials (one leaky integrator per level)
dot : difference of time-causal limit kernels (n-stage integrator cascades)

A bank has K bandpass channels and one lowpass residual at the coarsest
scale. Two impulse responses exist per channel:

* ``wavelet_impulse`` is the scale-covariant wavelet psi(t; sigma_k, c),
  the difference between levels sigma_k and sigma_{k-1} of the grid
  (with sigma_0 = sigma_1 / c). Frame diagnostics use this one.
* ``channel_impulse`` is what :func:`analyze` actually applies. It is
  identical for k >= 2. For k = 1 the finer reference is the input itself
  (scale zero), so that lowpass minus the bandpass sum telescopes back to
  the input exactly.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np
from scipy import ndimage, optimize

from .kernels import (
    ScaleGrid, Signal, check_stable, exp_filter, gaussian_taps,
    limit_time_constants, make_scale_grid, max_cascade_order, GAUSS_TRUNCATE,
)

__all__ = [
    "FAMILIES", "FilterBank", "ChannelDecomposition", "SampledKernel",
    "make_bank", "analyze", "synthesize",
    "level_response", "frequency_response", "lowpass_response",
    "wavelet_impulse", "channel_impulse", "lowpass_impulse",
    "peak_frequency", "bandwidth_3db", "doe_band_roots", "channel_scale",
]

FAMILIES = ("dog", "doe", "dot")

# tail length for causal impulse responses, in units of the coarsest scale
_CAUSAL_TAIL = 40.0


@dataclass(frozen=True)
class SampledKernel:
    """Kernel samples on a grid; ``offset`` is the index of t = 0."""

    samples: np.ndarray
    dt: float
    offset: int = 0

    @property
    def t(self):
        return (np.arange(self.samples.size) - self.offset) * self.dt

    def __len__(self):
        return self.samples.size


@dataclass(frozen=True)
class FilterBank:
    """Wavelet family on a scale grid, sampled at ``dt``.

    ``norms[k-1]`` is the L2 norm of channel k's sampled impulse response;
    :func:`analyze` divides each bandpass channel by it.
    """

    family: str
    grid: ScaleGrid
    dt: float
    n: int | None = None
    theta: float = 0.1
    norms: np.ndarray = field(default=None, repr=False)

    @property
    def K(self):
        return self.grid.K

    @property
    def c(self):
        return self.grid.c

    def scale(self, k):
        return float(self.grid.levels[k])

    def with_dt(self, dt):
        """Same bank resampled at another interval (norms recomputed)."""
        return make_bank(self.family, self.grid.sigma1, self.c, self.K, dt,
                         n=self.n, theta=self.theta)


@dataclass(frozen=True)
class ChannelDecomposition:
    """Lowpass residual plus K normalized bandpass channels of one signal."""

    lowpass: Signal
    bandpass: np.ndarray  # shape (K, T), normalized
    bank: FilterBank

    def __post_init__(self):
        if self.bandpass.ndim != 2 or self.bandpass.shape[0] != self.bank.K:
            raise ValueError("bandpass must have shape (K, T)")
        if self.bandpass.shape[1] != len(self.lowpass):
            raise ValueError("bandpass and lowpass lengths differ")

    @property
    def dt(self):
        return self.lowpass.dt

    def channel(self, k):
        """Bandpass channel k (1-based) as a Signal, still normalized."""
        return Signal(self.bandpass[k - 1], self.dt)

    def denormalized(self, k):
        return self.bandpass[k - 1] * self.bank.norms[k - 1]


def make_bank(family, sigma1, c, K, dt, n=None, theta=0.1):
    """Build a bank and its channel normalization constants.

    For DoT, ``n=None`` picks the largest cascade order <= 7 whose finest
    stage at sigma_1 passes the integrator floor.
    """
    family = family.lower()
    if family not in FAMILIES:
        raise ValueError(f"unknown family {family!r}; expected one of {FAMILIES}")
    if not theta > 0:
        raise ValueError("theta must be positive")
    grid = make_scale_grid(sigma1, c, K)
    if family == "dot":
        if n is None:
            n = max_cascade_order(grid.sigma1, grid.c, dt)
            if n < 1:
                first = limit_time_constants(grid.sigma1, grid.c, 1)[0]
                check_stable(first, dt, stage=1)
        n = int(n)
        for j, mu in enumerate(limit_time_constants(grid.sigma1, grid.c, n), 1):
            check_stable(mu, dt, stage=j)
    else:
        n = None
        if family == "doe":
            check_stable(grid.sigma1, dt)
    bank = FilterBank(family, grid, float(dt), n, float(theta))
    norms = np.array([np.linalg.norm(channel_impulse(bank, k).samples)
                      for k in range(1, K + 1)])
    if not np.all(norms > 0):
        raise ValueError("degenerate channel with zero norm")
    norms.flags.writeable = False
    return replace(bank, norms=norms)


def channel_scale(bank, k):
    """Time constant associated with level k (used for LIF integration)."""
    return bank.scale(k)


# -- time domain --------------------------------------------------------------

def _smooth_level(x, bank, k, dt=None, mode="reflect"):
    """Level-k smoothing of the array ``x`` (last axis)."""
    dt = bank.dt if dt is None else dt
    s = bank.scale(k)
    if bank.family == "dog":
        return ndimage.convolve1d(x, gaussian_taps(s, dt), axis=-1, mode=mode)
    if bank.family == "doe":
        check_stable(s, dt)
        return exp_filter(x, s, dt)
    y = x
    for j, mu in enumerate(limit_time_constants(s, bank.c, bank.n), 1):
        check_stable(mu, dt, stage=j)
        y = exp_filter(y, mu, dt)
    return y


def _impulse_grid(bank, dt, span=None):
    """Impulse vector and offset long enough for the coarsest level.

    ``span`` overrides the causal support (seconds after t = 0).
    """
    sK = bank.grid.coarsest
    if bank.family == "dog":
        half = int(math.ceil(GAUSS_TRUNCATE * sK / dt)) + 1
        x = np.zeros(2 * half + 1)
        x[half] = 1.0
        return x, half
    span = _CAUSAL_TAIL * sK if span is None else span
    length = int(math.ceil(span / dt)) + 2
    x = np.zeros(length)
    x[0] = 1.0
    return x, 0


def _level_impulse(bank, k, dt, span=None):
    x, off = _impulse_grid(bank, dt, span)
    if bank.family == "dog":
        # the response to a centered impulse is the tap vector itself
        taps = gaussian_taps(bank.scale(k), dt)
        h = taps.size // 2
        x = np.zeros_like(x)
        x[off - h:off + h + 1] = taps
        return x, off
    return _smooth_level(x, bank, k, dt, mode="constant"), off


def wavelet_impulse(bank, k, dt=None, span=None):
    """Sampled psi(t; sigma_k, c) = h(sigma_k) - h(sigma_{k-1}), pre-normalization.

    ``span`` limits the causal support in seconds (default 40 sigma_K).
    """
    if not 1 <= k <= bank.K:
        raise IndexError(f"channel index {k} outside 1..{bank.K}")
    dt = bank.dt if dt is None else dt
    hk, off = _level_impulse(bank, k, dt, span)
    hk1, _ = _level_impulse(bank, k - 1, dt, span)
    return SampledKernel(hk - hk1, dt, off)


def channel_impulse(bank, k, dt=None):
    """Impulse response of bandpass channel k as applied by :func:`analyze`."""
    if not 1 <= k <= bank.K:
        raise IndexError(f"channel index {k} outside 1..{bank.K}")
    if k > 1:
        return wavelet_impulse(bank, k, dt)
    dt = bank.dt if dt is None else dt
    h1, off = _level_impulse(bank, 1, dt)
    delta = np.zeros_like(h1)
    delta[off] = 1.0
    return SampledKernel(h1 - delta, dt, off)


def lowpass_impulse(bank, dt=None):
    dt = bank.dt if dt is None else dt
    h, off = _level_impulse(bank, bank.K, dt)
    return SampledKernel(h, dt, off)


def analyze(signal, bank):
    """Split ``signal`` into a lowpass residual and K normalized bandpass channels."""
    if abs(signal.dt - bank.dt) > 1e-12 * bank.dt:
        raise ValueError(f"signal dt={signal.dt} does not match bank dt={bank.dt}")
    x = signal.samples
    prev = x
    bands = np.empty((bank.K, x.size))
    for k in range(1, bank.K + 1):
        cur = _smooth_level(x, bank, k)
        bands[k - 1] = (cur - prev) / bank.norms[k - 1]
        prev = cur
    return ChannelDecomposition(signal.replace(prev), bands, bank)


def synthesize(decomp):
    """Lowpass minus the denormalized bandpass sum."""
    bank = decomp.bank
    if decomp.bandpass.shape[1] != len(decomp.lowpass):
        raise ValueError("channel lengths differ")
    total = np.einsum("k,kt->t", bank.norms, decomp.bandpass)
    return decomp.lowpass.replace(decomp.lowpass.samples - total)


# -- frequency domain -----------------------------------------------------------

def level_response(bank, k, omega):
    """Closed-form transfer function of the level-k smoother at s = i*omega."""
    w = np.asarray(omega, dtype=float)
    s = bank.scale(k)
    if bank.family == "dog":
        return np.exp(-0.5 * (s * w) ** 2).astype(complex)
    if bank.family == "doe":
        return 1.0 / (1.0 + 1j * s * w)
    mus = limit_time_constants(s, bank.c, bank.n)
    out = np.ones(w.shape, dtype=complex)
    for mu in mus:
        out /= 1.0 + 1j * mu * w
    return out


def frequency_response(bank, k, omega):
    """Closed-form spectrum of psi(.; sigma_k, c), pre-normalization."""
    if not 1 <= k <= bank.K:
        raise IndexError(f"channel index {k} outside 1..{bank.K}")
    return level_response(bank, k, omega) - level_response(bank, k - 1, omega)


def lowpass_response(bank, omega):
    return level_response(bank, bank.K, omega)


def doe_band_roots(c):
    """Roots u_- < u_+ of u**2 - (c**2 + 4c + 1) u + c**2 = 0."""
    b = c * c + 4 * c + 1
    r = (c + 1) * math.sqrt(c * c + 6 * c + 1)
    return 0.5 * (b - r), 0.5 * (b + r)


def _power(bank, k):
    return lambda w: float(np.abs(frequency_response(bank, k, np.array([w])))[0] ** 2)


def peak_frequency(bank, k):
    """Angular frequency (rad/s) of channel k's magnitude peak."""
    if not 1 <= k <= bank.K:
        raise IndexError(f"channel index {k} outside 1..{bank.K}")
    s = bank.scale(k)
    if bank.family == "doe":
        return math.sqrt(bank.c) / s
    if bank.family == "dog":
        s0 = bank.scale(k - 1)
        return math.sqrt(4.0 * math.log(bank.c) / (s * s - s0 * s0))
    mu1 = limit_time_constants(s, bank.c, 1)[0]
    power = _power(bank, k)
    # coarse log grid to bracket the maximum, then golden section on log(omega)
    logs = np.linspace(math.log(1e-3 / mu1), math.log(10.0 / mu1), 401)
    p = np.abs(frequency_response(bank, k, np.exp(logs))) ** 2
    i = int(np.argmax(p))
    if i == 0 or i == logs.size - 1:
        raise RuntimeError(f"DoT peak of channel {k} not bracketed in search range")
    res = optimize.minimize_scalar(lambda lw: -power(math.exp(lw)),
                                   bracket=(logs[i - 1], logs[i], logs[i + 1]),
                                   method="golden", tol=1e-10)
    if not res.success:
        raise RuntimeError(f"DoT peak search failed for channel {k}: {res.message}")
    return math.exp(res.x)


def bandwidth_3db(bank, k):
    """Half-power band edges and quality factor: (omega_minus, omega_plus, Q)."""
    peak = peak_frequency(bank, k)
    if bank.family == "doe":
        um, up = doe_band_roots(bank.c)
        s = bank.scale(k)
        lo, hi = math.sqrt(um) / s, math.sqrt(up) / s
        return lo, hi, peak / (hi - lo)
    power = _power(bank, k)
    half = 0.5 * power(peak)
    f = lambda lw: power(math.exp(lw)) - half
    lp = math.log(peak)
    a, b = lp - math.log(1e4), lp + math.log(1e4)
    if f(a) > 0 or f(b) > 0:
        raise RuntimeError(f"half-power crossing of channel {k} not bracketed")
    lo = math.exp(optimize.brentq(f, a, lp, xtol=1e-14, rtol=1e-13))
    hi = math.exp(optimize.brentq(f, lp, b, xtol=1e-14, rtol=1e-13))
    return lo, hi, peak / (hi - lo)
