"""
Leaky integrate-and-fire quantization of channel signals into polarity spikes.

Each channel drives two rectified LIF units, one integrating +x and one -x,
through the discrete leaky integrator

    u[t] = a * u[t-1] + (1 - a) * x[t],    a = exp(-dt / mu).

A unit fires when u >= theta; the default soft reset subtracts theta, the
hard reset sets u to 0. At most one spike per sample and polarity is emitted.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import optimize

from .kernels import check_stable

__all__ = [
    "SpikeTrain", "LifState", "encode_channel", "encode",
    "identity_amplitude", "crossing_interval", "spike_counts",
]

RESETS = ("soft", "hard")


@dataclass(frozen=True)
class SpikeTrain:
    """Polarity spikes of one channel (0 = lowpass, 1..K = bandpass).

    Events are sorted by time index; at equal index the +1 event comes first.
    """

    channel: int
    times: np.ndarray
    polarity: np.ndarray
    theta: float
    dt: float
    n_samples: int

    def __post_init__(self):
        t = np.asarray(self.times, dtype=np.int64).ravel()
        p = np.asarray(self.polarity, dtype=np.int8).ravel()
        if t.size != p.size:
            raise ValueError("times and polarity lengths differ")
        if not self.theta > 0:
            raise ValueError("theta must be positive")
        if t.size:
            if np.any(np.diff(t) < 0):
                raise ValueError("spike times must be non-decreasing")
            if not np.all(np.isin(p, (-1, 1))):
                raise ValueError("polarity must be +1 or -1")
            if t.min() < 0 or t.max() >= self.n_samples:
                raise ValueError("spike index outside the signal")
            key = t * 2 + (p < 0)
            if np.unique(key).size != key.size:
                raise ValueError("duplicate (time, polarity) event")
        t.flags.writeable = False
        p.flags.writeable = False
        object.__setattr__(self, "times", t)
        object.__setattr__(self, "polarity", p)

    def __len__(self):
        return self.times.size

    def events(self):
        return list(zip(self.times.tolist(), self.polarity.tolist()))

    def to_dirac(self):
        """Signed spike sequence z[t] = z+[t] - z-[t] on the sample grid."""
        z = np.zeros(self.n_samples)
        np.add.at(z, self.times, self.polarity.astype(float))
        return z


@dataclass
class LifState:
    """Membrane potentials of the two polarity units."""

    u_plus: float = 0.0
    u_minus: float = 0.0
    mu: float = 1.0


def encode_channel(channel_signal, mu, theta, reset="soft", channel=0,
                   state=None):
    """Encode one channel signal into a :class:`SpikeTrain`.

    Parameters
    ----------
    channel_signal : Signal
    mu : float
        Integrator time constant in seconds; must pass the stability floor.
    theta : float
        Firing threshold (> 0), in signal units.
    reset : {"soft", "hard"}
    state : LifState, optional
        Initial membranes; updated in place when given.
    """
    if not theta > 0:
        raise ValueError("theta must be positive")
    if reset not in RESETS:
        raise ValueError(f"reset must be one of {RESETS}")
    dt = channel_signal.dt
    check_stable(mu, dt)
    a = math.exp(-dt / mu)
    g = 1.0 - a
    st = state if state is not None else LifState(mu=mu)
    up, um = st.u_plus, st.u_minus
    soft = reset == "soft"
    times, pols = [], []
    for i, v in enumerate(channel_signal.samples.tolist()):
        up = a * up + g * v
        um = a * um - g * v
        if up < 0.0:
            up = 0.0
        if um < 0.0:
            um = 0.0
        if up >= theta:
            times.append(i)
            pols.append(1)
            up = up - theta if soft else 0.0
        if um >= theta:
            times.append(i)
            pols.append(-1)
            um = um - theta if soft else 0.0
        if not (math.isfinite(up) and math.isfinite(um)):
            raise FloatingPointError(f"membrane became non-finite at sample {i}")
    st.u_plus, st.u_minus, st.mu = up, um, mu
    return SpikeTrain(channel, np.array(times, dtype=np.int64),
                      np.array(pols, dtype=np.int8), float(theta), dt,
                      len(channel_signal))


def encode(decomp, theta=None, reset="soft"):
    """Encode lowpass (channel 0) and bandpass channels 1..K independently.

    Bandpass channel k integrates with mu = sigma_k, the lowpass with sigma_K.
    ``theta`` defaults to the bank's threshold.
    """
    bank = decomp.bank
    theta = bank.theta if theta is None else theta
    trains = [encode_channel(decomp.lowpass, bank.scale(bank.K), theta, reset, 0)]
    for k in range(1, bank.K + 1):
        trains.append(encode_channel(decomp.channel(k), bank.scale(k), theta,
                                     reset, k))
    return trains


def spike_counts(trains):
    return {tr.channel: len(tr) for tr in trains}


def _step_charge(delta, mu_a, mu_b):
    """Integral over [0, delta] of (h(mu_a) - h(mu_b)) / C, C = (mu_b - mu_a)/(mu_a mu_b)."""
    if mu_b is None:
        return 1.0 - math.exp(-delta / mu_a)
    if math.isclose(mu_a, mu_b, rel_tol=1e-12):
        return delta * math.exp(-delta / mu_a)
    C = (mu_b - mu_a) / (mu_a * mu_b)
    return (math.exp(-delta / mu_b) - math.exp(-delta / mu_a)) / C


def identity_amplitude(delta, theta, mu_a, mu_b=None):
    """Constant input level that reaches ``theta`` after an interval ``delta``.

    With a single integrator (``mu_b`` None) this is theta / (1 - exp(-delta/mu)).
    With two time constants the membrane kernel is the scaled difference of
    two exponentials and the level is theta * C / (exp(-delta/mu_b) - exp(-delta/mu_a)).
    """
    if delta <= 0:
        raise ValueError("interval must be positive")
    q = _step_charge(delta, mu_a, mu_b)
    if q <= 0:
        raise ValueError("interval gives no charge; check time-constant order")
    return theta / q


def crossing_interval(level, theta, mu_a, mu_b=None):
    """First time a constant input ``level`` drives the membrane to ``theta``.

    Returns ``inf`` when the membrane never gets there.
    """
    if level <= 0:
        return math.inf
    target = theta / level
    if mu_b is None:
        return -mu_a * math.log1p(-target) if target < 1 else math.inf
    if math.isclose(mu_a, mu_b, rel_tol=1e-12):
        t_peak = mu_a
    else:
        t_peak = math.log(mu_b / mu_a) * mu_a * mu_b / (mu_b - mu_a)
    q_peak = _step_charge(t_peak, mu_a, mu_b)
    if q_peak < target:
        return math.inf
    if q_peak == target:
        return t_peak
    return optimize.brentq(lambda d: _step_charge(d, mu_a, mu_b) - target,
                           0.0, t_peak, xtol=1e-15, rtol=1e-14)
