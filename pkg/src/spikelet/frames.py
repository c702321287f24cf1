"""
Frame diagnostics for the wavelet banks.

Energy capture S(omega) = |lowpass|**2 + sum_k |psi_k|**2 is evaluated from
the closed-form transfer functions (before channel normalization). The
upper frame bound B is its supremum, the lower bound A its infimum over a
finite frequency range. The Gram matrix is computed in the time domain from
sampled impulse responses on a fine reference grid.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .kernels import C_MIN, DEFAULT_CASCADE_ORDER, make_scale_grid
from .wavelets import (
    FAMILIES, FilterBank, frequency_response, level_response, lowpass_response,
    _level_impulse,
)

__all__ = [
    "FrameReport", "DesignError", "spectral_bank", "energy_capture",
    "frame_bounds", "gram_matrix", "design_ratio", "max_channels",
    "frame_report", "reference_dt", "default_omega_range",
]

N_OMEGA = 8192
# reference grid: step 1e-3 sigma_1, support 20 sigma_K, at most this many samples
GRAM_MAX_SAMPLES = 2 ** 21


class DesignError(ValueError):
    """Requested channel count packs scales closer than the c floor allows."""

    def __init__(self, message, k_max):
        super().__init__(message)
        self.k_max = k_max


@dataclass(frozen=True)
class FrameReport:
    A: float
    B: float
    omega_range: tuple
    omega: np.ndarray = field(repr=False)
    energy: np.ndarray = field(repr=False)
    gram: np.ndarray = field(repr=False)
    condition_number: float = math.inf

    def to_dict(self):
        return {
            "A": self.A, "B": self.B,
            "omega_range": list(self.omega_range),
            "condition_number": self.condition_number,
            "gram": self.gram.tolist(),
        }


def spectral_bank(family, c, K, sigma_K=1.0, n=DEFAULT_CASCADE_ORDER):
    """Bank for frequency-domain work only (no sampling, no norms).

    The grid is anchored at the coarsest scale ``sigma_K``.
    """
    family = family.lower()
    if family not in FAMILIES:
        raise ValueError(f"unknown family {family!r}")
    grid = make_scale_grid(sigma_K / c ** (K - 1), c, K)
    return FilterBank(family, grid, math.nan, int(n) if family == "dot" else None)


def energy_capture(bank, omega):
    """Sampled S(omega). For DoT also returns the telescoped form.

    Returns
    -------
    S : ndarray
    S_tel : ndarray or None
        DoT only: |Psi(omega; sigma_0)|**2, which the direct sum equals when
        each level is the previous one times one more integrator stage.
        With a finite cascade the two differ by the truncation error.
    """
    w = np.asarray(omega, dtype=float)
    if np.any(~np.isfinite(w)) or np.any(w < 0):
        raise ValueError("omega must be finite and non-negative")
    S = np.abs(lowpass_response(bank, w)) ** 2
    for k in range(1, bank.K + 1):
        S = S + np.abs(frequency_response(bank, k, w)) ** 2
    tel = None
    if bank.family == "dot":
        tel = np.abs(level_response(bank, 0, w)) ** 2
    return S, tel


def reference_dt(bank):
    """Reference grid step and support for time-domain inner products."""
    span = 20.0 * bank.grid.coarsest
    dt = 1e-3 * bank.grid.sigma1
    if bank.family == "dog":
        # two-sided support of 6 sigma_K per side
        n = 12.0 * bank.grid.coarsest / dt
    else:
        n = span / dt
    if n > GRAM_MAX_SAMPLES:
        dt *= n / GRAM_MAX_SAMPLES
    return dt, span


def default_omega_range(bank):
    """[2 pi 0.01, pi / dt] on the nominal reference grid dt = 1e-3 sigma_1.

    The memory cap in :func:`reference_dt` only affects Gram sampling.
    """
    return (2 * math.pi * 0.01, math.pi / (1e-3 * bank.grid.sigma1))


def _sup_grid(bank):
    lo = 1e-6 / bank.grid.coarsest
    hi = 1e4 / bank.scale(0)
    return np.concatenate([[0.0], np.geomspace(lo, hi, N_OMEGA)])


def frame_bounds(bank, omega_range=None):
    """(A, B): inf of S over ``omega_range`` and sup of S including omega = 0."""
    if omega_range is None:
        omega_range = default_omega_range(bank)
    lo, hi = map(float, omega_range)
    if not (0 < lo < hi and math.isfinite(hi)):
        raise ValueError("omega_range must satisfy 0 < lo < hi < inf")
    S_all, _ = energy_capture(bank, _sup_grid(bank))
    S_rng, _ = energy_capture(bank, np.geomspace(lo, hi, N_OMEGA))
    return float(S_rng.min()), float(max(S_all.max(), S_rng.max()))


def gram_matrix(bank, normalized=True):
    """K x K inner products of the sampled wavelets on the reference grid.

    Returns the normalized matrix G_jk / sqrt(G_jj G_kk) unless
    ``normalized`` is False.
    """
    dt, span = reference_dt(bank)
    levels = [_level_impulse(bank, k, dt, span)[0] for k in range(bank.K + 1)]
    psi = np.diff(np.stack(levels), axis=0)
    del levels
    G = psi @ psi.T * dt
    G = 0.5 * (G + G.T)
    d = np.diag(G)
    if np.any(d <= 0):
        bad = int(np.argmin(d)) + 1
        raise ValueError(f"channel {bad} has zero norm")
    if not normalized:
        return G
    # the outer product is exactly symmetric, so Gn is too
    Gn = G / np.sqrt(np.outer(d, d))
    np.fill_diagonal(Gn, 1.0)
    return Gn


def _condition(G):
    ev = np.linalg.eigvalsh(G)
    return math.inf if ev[0] <= 0 else float(ev[-1] / ev[0])


def max_channels(f_min, f_max, c_min=C_MIN):
    """Largest K whose ratio (f_max/f_min)**(1/(K-1)) is still >= c_min."""
    return 1 + int(math.floor(math.log(f_max / f_min) / math.log(c_min)))


def design_ratio(f_min, f_max, K):
    """Scale ratio that spreads K channels geometrically over [f_min, f_max]."""
    if not (0 < f_min < f_max):
        raise ValueError("need 0 < f_min < f_max")
    if K < 2:
        raise ValueError("K must be at least 2")
    c = (f_max / f_min) ** (1.0 / (K - 1))
    if c < C_MIN:
        k_max = max_channels(f_min, f_max)
        raise DesignError(f"K={K} gives c={c:.4f} < {C_MIN}; at most "
                          f"K_max={k_max} channels fit this range", k_max)
    return c


def frame_report(bank, omega_range=None):
    if omega_range is None:
        omega_range = default_omega_range(bank)
    A, B = frame_bounds(bank, omega_range)
    w = np.geomspace(*omega_range, N_OMEGA)
    S, _ = energy_capture(bank, w)
    G = gram_matrix(bank)
    return FrameReport(A, B, tuple(omega_range), w, S, G, _condition(G))
