"""
Spike-train decoding by per-channel least squares over shifted kernels.

Each channel k has a reconstruction kernel R_k = h_exp(mu_r) * psi_k (the
lowpass uses the level-K smoother instead of psi). A channel's spikes
place polarity-signed copies of R_k at their time indices; the weights are
fit against the channel's analysis output with a small ridge, or set from
the inter-spike-interval formula when no target is available.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg as sla
import scipy.sparse as sp
import scipy.sparse.linalg as spla
from scipy import signal as sps

from .kernels import Signal, check_stable, exp_filter
from .spike_codec import identity_amplitude
from .wavelets import channel_impulse, lowpass_impulse

__all__ = [
    "ReconstructionKernel", "ChannelFit", "ReconstructionReport",
    "composed_exponentials", "numerical_composition", "reconstruction_kernel",
    "design_matrix", "ridge_solve", "decode_channel", "decode",
    "nrmse",
]

RIDGE = 1e-8
KERNEL_REL_TOL = 1e-6
KERNEL_SPAN = 10.0  # support cap in units of max(mu_k, mu_r)
DENSE_MAX = 3000


def composed_exponentials(t, mu_a, mu_b):
    """Closed form of h_exp(mu_a) * h_exp(mu_b) for t >= 0 (zero before).

    (exp(-t/mu_a) - exp(-t/mu_b)) / (mu_a - mu_b), with the confluent limit
    t exp(-t/mu) / mu**2 when mu_a == mu_b.
    """
    t = np.asarray(t, dtype=float)
    out = np.zeros_like(t)
    pos = t >= 0
    tp = t[pos]
    if math.isclose(mu_a, mu_b, rel_tol=1e-12):
        out[pos] = tp * np.exp(-tp / mu_a) / mu_a ** 2
    else:
        out[pos] = (np.exp(-tp / mu_a) - np.exp(-tp / mu_b)) / (mu_a - mu_b)
    return out


def numerical_composition(mu_a, mu_b, dt, t_max):
    """Trapezoidal convolution of two sampled continuous exponentials.

    Returns (t, values) on [0, t_max].
    """
    n = int(round(t_max / dt)) + 1
    t = np.arange(n) * dt
    ha = np.exp(-t / mu_a) / mu_a
    hb = np.exp(-t / mu_b) / mu_b
    full = sps.fftconvolve(ha, hb)[:n]
    # trapezoid: drop half of each end-point product
    full -= 0.5 * (ha[0] * hb + hb[0] * ha)
    return t, full * dt


@dataclass(frozen=True)
class ReconstructionKernel:
    """Peak-normalized, truncated kernel for channel k (0 = lowpass).

    ``offset`` is the sample index of t = 0; ``mu`` is the encoder's
    integration constant for the channel, ``mu_r`` the reconstruction one.
    """

    channel: int
    samples: np.ndarray
    offset: int
    dt: float
    mu: float
    mu_r: float

    @property
    def support(self):
        return self.samples.size

    @property
    def t(self):
        return (np.arange(self.samples.size) - self.offset) * self.dt


def reconstruction_kernel(bank, k, mu_r=None):
    """R_k: discrete leaky integrator (mu_r) applied to channel k's impulse response.

    ``k = 0`` selects the lowpass. ``mu_r`` defaults to the channel scale.
    """
    if not 0 <= k <= bank.K:
        raise IndexError(f"channel {k} outside 0..{bank.K}")
    mu = bank.scale(bank.K if k == 0 else k)
    mu_r = mu if mu_r is None else float(mu_r)
    check_stable(mu_r, bank.dt)
    imp = lowpass_impulse(bank) if k == 0 else channel_impulse(bank, k)
    r = exp_filter(imp.samples, mu_r, bank.dt)
    peak = np.max(np.abs(r))
    if not peak > 0:
        raise ValueError(f"channel {k} has a zero reconstruction kernel")
    big = np.flatnonzero(np.abs(r) >= KERNEL_REL_TOL * peak)
    first, last = big[0], big[-1]
    cap = imp.offset + int(math.ceil(KERNEL_SPAN * max(mu, mu_r) / bank.dt))
    last = min(last, cap)
    first = min(first, imp.offset)
    r = r[first:last + 1] / peak
    r.flags.writeable = False
    return ReconstructionKernel(k, r, imp.offset - first, bank.dt, mu, mu_r)


def design_matrix(train, kernel):
    """Sparse T x m matrix whose column i is p_i R(t - t_i)."""
    T = train.n_samples
    m = len(train)
    L = kernel.support
    if m == 0:
        return sp.csc_matrix((T, 0))
    rows = train.times[:, None] - kernel.offset + np.arange(L)[None, :]
    vals = train.polarity[:, None].astype(float) * kernel.samples[None, :]
    cols = np.repeat(np.arange(m), L).reshape(m, L)
    keep = (rows >= 0) & (rows < T)
    return sp.csc_matrix((vals[keep], (rows[keep], cols[keep])), shape=(T, m))


def ridge_solve(A, y, ridge=RIDGE):
    """Solve (A^T A + lam I) w = A^T y with lam = ridge * trace(A^T A) / m.

    Returns (w, lam).
    """
    m = A.shape[1]
    AtA = (A.T @ A).tocsc()
    Aty = A.T @ y
    tr = AtA.diagonal().sum()
    lam = ridge * tr / m if tr > 0 else ridge
    if m <= DENSE_MAX:
        M = AtA.toarray()
        M[np.diag_indices(m)] += lam
        w = sla.solve(M, Aty, assume_a="pos")
    else:
        w = spla.spsolve(AtA + lam * sp.identity(m, format="csc"), Aty)
    return np.asarray(w), lam


@dataclass
class ChannelFit:
    channel: int
    reconstruction: np.ndarray
    weights: np.ndarray
    residual_norm: float = math.nan
    ridge: float = 0.0
    rank_deficient: bool = False


def _identity_hold(train, mu):
    """Zero-order hold of the interval-implied input level.

    Spike i closes the interval since the previous spike of the channel (or
    since t = -dt); that interval is filled with p_i * I(delta_i), where I
    is the constant input that would make a reset integrator fire after
    delta_i. Samples after the last spike stay at zero.
    """
    t = train.times
    prev = np.concatenate([[-1], t[:-1]])
    delta = np.maximum(t - prev, 1) * train.dt
    amp = np.array([identity_amplitude(d, train.theta, mu) for d in delta])
    w = train.polarity * amp
    rec = np.zeros(train.n_samples)
    for lo, hi, v in zip(prev + 1, t + 1, w):
        rec[lo:hi] = v
    return rec, w


def decode_channel(train, kernel, target=None, mode="lstsq"):
    """Reconstruct one channel from its spike train.

    Parameters
    ----------
    train : SpikeTrain
    kernel : ReconstructionKernel
    target : array_like, optional
        Channel analysis output; required for ``mode="lstsq"``.
    mode : {"lstsq", "identity"}
        Least-squares weights on the columns of R_k, or identity weights:
        each spike carries the input level implied by its inter-spike
        interval, held over that interval.
    """
    T = train.n_samples
    if mode not in ("lstsq", "identity"):
        raise ValueError(f"unknown decode mode {mode!r}")
    if len(train) == 0:
        return ChannelFit(train.channel, np.zeros(T), np.zeros(0),
                          0.0 if target is None else float(np.linalg.norm(target)))
    dup = np.unique(train.times).size < len(train)
    if mode == "identity":
        rec, w = _identity_hold(train, kernel.mu)
        res = math.nan if target is None else float(np.linalg.norm(target - rec))
        return ChannelFit(train.channel, rec, w, res, 0.0, dup)
    if target is None:
        raise ValueError("least-squares decoding needs the channel target")
    y = np.asarray(getattr(target, "samples", target), dtype=float)
    if y.size != T:
        raise ValueError("target length does not match the spike train")
    A = design_matrix(train, kernel)
    w, lam = ridge_solve(A, y)
    rec = A @ w
    return ChannelFit(train.channel, rec, w, float(np.linalg.norm(y - rec)),
                      lam, dup)


def nrmse(original, reconstructed):
    """RMSE divided by the standard deviation of ``original``."""
    f = np.asarray(getattr(original, "samples", original), dtype=float)
    g = np.asarray(getattr(reconstructed, "samples", reconstructed), dtype=float)
    if f.shape != g.shape:
        raise ValueError("length mismatch")
    rmse = math.sqrt(np.mean((f - g) ** 2))
    sd = float(np.std(f))
    if sd == 0:
        return 0.0 if rmse == 0 else math.inf
    return rmse / sd


@dataclass
class ReconstructionReport:
    reconstructed: Signal
    channels: list = field(repr=False)
    nrmse: float = math.nan

    @property
    def residual_norms(self):
        return {c.channel: c.residual_norm for c in self.channels}

    @property
    def spike_counts(self):
        return {c.channel: c.weights.size for c in self.channels}

    @property
    def weights(self):
        return {c.channel: c.weights for c in self.channels}

    @property
    def rank_deficient(self):
        return any(c.rank_deficient for c in self.channels)


def decode(trains, bank, targets=None, mode="lstsq", original=None, mu_r=None):
    """Decode all channels and synthesize f~ = lowpass - sum_k norm_k x~_k.

    ``targets`` is the :class:`ChannelDecomposition` of the encoded signal
    (needed for least squares). ``original`` enables the nRMSE.
    """
    by_ch = {tr.channel: tr for tr in trains}
    if sorted(by_ch) != list(range(bank.K + 1)) or len(trains) != bank.K + 1:
        raise ValueError(f"expected one train per channel 0..{bank.K}, got "
                         f"{sorted(tr.channel for tr in trains)}")
    T = by_ch[0].n_samples
    for tr in trains:
        if tr.n_samples != T or abs(tr.dt - bank.dt) > 1e-12 * bank.dt:
            raise ValueError(f"channel {tr.channel} does not match the bank grid")
    fits = []
    for k in range(bank.K + 1):
        tgt = None
        if targets is not None:
            tgt = targets.lowpass.samples if k == 0 else targets.bandpass[k - 1]
        ker = reconstruction_kernel(bank, k, mu_r)
        fits.append(decode_channel(by_ch[k], ker, tgt, mode))
    out = fits[0].reconstruction.copy()
    for k in range(1, bank.K + 1):
        out -= bank.norms[k - 1] * fits[k].reconstruction
    rec = Signal(out, bank.dt)
    err = math.nan if original is None else nrmse(original, rec)
    return ReconstructionReport(rec, fits, err)
