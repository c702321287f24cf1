"""
Comparison transforms: orthonormal Haar DWT and dense complex CWTs.

The CWT banks (Morlet, causal Szu) keep every shifted coefficient and
reconstruct through a ridge-regularized least-squares inverse of the
stacked analysis operator, so they are limited to desk-scale windows.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg as sla
from scipy import signal as sps

from .decoder import RIDGE, nrmse
from .kernels import Signal, make_scale_grid

__all__ = [
    "haar_forward", "haar_inverse", "haar_round_trip",
    "DenseCwtBank", "morlet_bank", "szu_bank", "cwt_coefficients",
    "cwt_encode_decode", "CwtReport", "MAX_CWT_SAMPLES", "MAX_CWT_CHANNELS",
]

MAX_CWT_SAMPLES = 4096
MAX_CWT_CHANNELS = 16
MORLET_W0 = 5.0
SZU_DECAY = 0.5
_SQ2 = math.sqrt(2.0)


def haar_forward(x, levels):
    """Orthonormal Haar analysis. Returns [a_L, d_L, ..., d_1] and the padded length.

    The input is zero-padded to a multiple of 2**levels.
    """
    x = np.asarray(x, dtype=float)
    if levels < 1:
        raise ValueError("levels must be >= 1")
    block = 2 ** levels
    n = x.size
    padded = -(-n // block) * block
    a = np.concatenate([x, np.zeros(padded - n)])
    details = []
    for _ in range(levels):
        even, odd = a[0::2], a[1::2]
        details.append((even - odd) / _SQ2)
        a = (even + odd) / _SQ2
    return [a] + details[::-1], n


def haar_inverse(coeffs, n=None):
    a = coeffs[0]
    for d in coeffs[1:]:
        out = np.empty(2 * a.size)
        out[0::2] = (a + d) / _SQ2
        out[1::2] = (a - d) / _SQ2
        a = out
    return a if n is None else a[:n]


def haar_round_trip(signal, levels):
    """(coefficients, reconstructed Signal) of a Haar analysis/synthesis pass."""
    coeffs, n = haar_forward(signal.samples, levels)
    return coeffs, signal.replace(haar_inverse(coeffs, n))


@dataclass(frozen=True)
class DenseCwtBank:
    """K complex kernels on a scale grid; ``offsets[k]`` indexes t = 0."""

    family: str
    kernels: tuple = field(repr=False)
    offsets: tuple
    grid: object
    dt: float

    @property
    def K(self):
        return len(self.kernels)


def _l2(h):
    return h / np.linalg.norm(h)


def morlet_bank(sigma1, c, K, dt):
    """Morlet kernels (pi s**2)**-1/4 (exp(i w t) - exp(-w**2 s**2/2)) exp(-t**2/2 s**2), w = 5/s."""
    grid = make_scale_grid(sigma1, c, K)
    ks, offs = [], []
    for s in grid.levels[1:]:
        half = int(math.ceil(6.0 * s / dt))
        t = np.arange(-half, half + 1) * dt
        w = MORLET_W0 / s
        psi = ((math.pi * s * s) ** -0.25
               * (np.exp(1j * w * t) - math.exp(-0.5 * (w * s) ** 2))
               * np.exp(-0.5 * (t / s) ** 2))
        ks.append(_l2(psi))
        offs.append(half)
    return DenseCwtBank("morlet", tuple(ks), tuple(offs), grid, float(dt))


def szu_bank(sigma1, c, K, dt, tail=1e-8):
    """Causal Szu kernels exp((5i - 0.5) t / s) for t >= 0, zero before."""
    grid = make_scale_grid(sigma1, c, K)
    ks = []
    for s in grid.levels[1:]:
        n = int(math.ceil(-math.log(tail) / SZU_DECAY * s / dt)) + 1
        t = np.arange(n) * dt / s
        ks.append(_l2(np.exp((MORLET_W0 * 1j - SZU_DECAY) * t)))
    return DenseCwtBank("szu", tuple(ks), (0,) * K, grid, float(dt))


def _check_size(T, K):
    if T > MAX_CWT_SAMPLES:
        raise ValueError(f"dense CWT limited to {MAX_CWT_SAMPLES} samples, got {T}")
    if K > MAX_CWT_CHANNELS:
        raise ValueError(f"dense CWT limited to {MAX_CWT_CHANNELS} channels, got {K}")


def _corr_kernels(bank):
    """Kernels g with sum_s x[s] conj(g[s - t]) == sum_s x[s] psi[t - s].

    Coefficients are filter outputs, so a causal psi only sees x[s <= t].
    For the Morlet (psi(-t) = conj psi(t)) this is the usual correlation.
    """
    for h, off in zip(bank.kernels, bank.offsets):
        yield np.conj(h[::-1]), h.size - 1 - off


def cwt_coefficients(x, bank):
    """c_k[t] = sum_s x[s] psi_k[t - s], shape (K, T)."""
    x = np.asarray(x, dtype=float)
    T = x.size
    out = np.empty((bank.K, T), dtype=complex)
    for k, (h, off) in enumerate(_corr_kernels(bank)):
        # correlation = convolution with the time-reversed conjugate kernel
        full = sps.fftconvolve(x, np.conj(h[::-1]))
        start = h.size - 1 - off
        out[k] = full[start:start + T]
    return out


@dataclass
class CwtReport:
    reconstructed: Signal
    coefficients: np.ndarray = field(repr=False)
    nrmse: float
    ridge: float


def cwt_encode_decode(signal, bank, ridge=RIDGE):
    """Dense CWT analysis and ridge least-squares synthesis of one window.

    Coefficients are kept at the T window positions; the normal equations
    use the exact Gram of that truncated operator.
    """
    T = len(signal)
    _check_size(T, bank.K)
    if abs(signal.dt - bank.dt) > 1e-12 * bank.dt:
        raise ValueError("signal and bank sampling intervals differ")
    coef = cwt_coefficients(signal.samples, bank)
    M = _exact_gram(bank, T)
    rhs = _adjoint(coef, bank, T)
    lam = ridge * np.trace(M) / T
    M[np.diag_indices(T)] += lam
    x = sla.solve(M, rhs, assume_a="pos")
    rec = signal.replace(x)
    return CwtReport(rec, coef, nrmse(signal, rec), lam)


def _adjoint(coef, bank, T):
    """Phi^H c (real part) for the truncated correlation operator."""
    out = np.zeros(T)
    for k, (h, off) in enumerate(_corr_kernels(bank)):
        # x[s] += sum_t c[t] g[s - t]  ->  convolution of c with psi
        full = sps.fftconvolve(coef[k], h)
        out += full[off:off + T].real
    return out


def _exact_gram(bank, T):
    """Real part of Phi^H Phi for the truncated ('same'-length) analysis.

    With g[j] = psi[j + off], entry (s, s + d) is the windowed sum
    Re sum_{j = s-T+1}^{s} g[j] conj(g[j + d]), evaluated per diagonal from
    cumulative sums; cost O(T * kernel length) per channel.
    """
    M = np.zeros((T, T))
    flat = M.reshape(-1)
    s_idx = np.arange(T)
    for h, off in _corr_kernels(bank):
        L = h.size
        # g on j in [-T+1, T-1+L] (zero outside the kernel support)
        base = T - 1
        g = np.zeros(2 * T + L, dtype=complex)
        lo, hi = max(-off, -base), min(L - 1 - off, T - 1 + L)
        g[lo + base:hi + base + 1] = h[lo + off:hi + off + 1]
        n = 2 * T - 1  # j = -T+1 .. T-1
        for d in range(min(T, L)):
            prod = (g[:n] * np.conj(g[d:d + n])).real
            cs = np.concatenate([[0.0], np.cumsum(prod)])
            m = T - d
            # sum over j in [s-T+1, s]  ->  cs[s + base + 1] - cs[s - T + base + 1]
            sv = s_idx[:m]
            vals = cs[sv + base + 1] - cs[sv + 1 - T + base]
            flat[sv * T + sv + d] += vals
            if d:
                flat[(sv + d) * T + sv] += vals
    return M
