"""Regenerate the bundled example clips in src/spikelet/data (seeded, deterministic).

ecg_like.csv     10 s at 360 Hz from a three-variable dynamical ECG model
                 (limit cycle plus Gaussian P-Q-R-S-T events), scaled to mV,
                 with baseline wander and noise, quantized to 5 uV.
speech_like.wav  1 s at 16 kHz, PCM16: formant-filtered glottal pulse trains
                 with pitch drift, separated by fricative noise bursts.
"""

from pathlib import Path

import numpy as np
from scipy import signal as sps
from scipy.integrate import solve_ivp
from scipy.io import wavfile

OUT = Path(__file__).resolve().parents[1] / "src" / "spikelet" / "data"


def ecg_clip(seconds=10.0, fs=360.0, seed=2024):
    rng = np.random.default_rng(seed)
    theta = np.array([-np.pi / 3, -np.pi / 12, 0.0, np.pi / 12, np.pi / 2])
    a = np.array([1.2, -5.0, 30.0, -7.5, 0.75])
    b = np.array([0.25, 0.1, 0.1, 0.1, 0.4])
    ph = rng.uniform(0, 2 * np.pi, 3)

    def rr(t):
        return (0.85 + 0.04 * np.sin(2 * np.pi * 0.1 * t + ph[0])
                + 0.02 * np.sin(2 * np.pi * 0.25 * t + ph[1]))

    def rhs(t, s):
        x, y, z = s
        alpha = 1.0 - np.hypot(x, y)
        w = 2 * np.pi / rr(t)
        d = np.angle(np.exp(1j * (np.arctan2(y, x) - theta)))
        dz = -np.sum(a * d * w * np.exp(-d ** 2 / (2 * b ** 2))) - z
        return [alpha * x - w * y, alpha * y + w * x, dz]

    t = np.arange(int(seconds * fs)) / fs
    sol = solve_ivp(rhs, (0, t[-1]), [-1.0, 0.0, 0.0], t_eval=t, max_step=1 / 2000,
                    rtol=1e-8, atol=1e-10)
    z = sol.y[2]
    # model output is dimensionless; map to a typical lead range in mV
    z = (z - z.min()) / (z.max() - z.min()) * 1.6 - 0.4
    z += 0.1 * np.sin(2 * np.pi * 0.25 * t + ph[2])
    z += 0.01 * rng.standard_normal(t.size)
    return np.round(z / 0.005) * 0.005


def speech_clip(fs=16000, seed=7):
    rng = np.random.default_rng(seed)
    n = fs
    t = np.arange(n) / fs
    x = np.zeros(n)
    # (start, end, kind, formants)
    segs = [(0.05, 0.30, "v", (730, 1090, 2440)), (0.30, 0.38, "f", None),
            (0.38, 0.62, "v", (270, 2290, 3010)), (0.66, 0.72, "f", None),
            (0.72, 0.95, "v", (570, 840, 2410))]
    for s0, s1, kind, formants in segs:
        i0, i1 = int(s0 * fs), int(s1 * fs)
        m = i1 - i0
        env = np.sin(np.pi * np.arange(m) / m) ** 0.5
        if kind == "f":
            noise = rng.standard_normal(m)
            sos = sps.butter(4, [2500, 7000], btype="bandpass", fs=fs, output="sos")
            x[i0:i1] += 0.15 * env * sps.sosfilt(sos, noise)
            continue
        f0 = 120 + 20 * np.sin(2 * np.pi * 2.0 * t[i0:i1]) + rng.normal(0, 1.0, m)
        phase = np.cumsum(f0) / fs
        pulses = np.diff(np.floor(phase), prepend=np.floor(phase[0])).astype(float)
        src = sps.lfilter([1.0], [1.0, -0.97], pulses)  # glottal roll-off
        y = src
        for fc, bw in zip(formants, (80, 100, 140)):
            r = np.exp(-np.pi * bw / fs)
            y = sps.lfilter([1 - r], [1, -2 * r * np.cos(2 * np.pi * fc / fs), r * r], y)
        x[i0:i1] += env * y / (np.max(np.abs(y)) + 1e-12)
    x += 0.002 * rng.standard_normal(n)
    return np.round(x / np.max(np.abs(x)) * 0.8 * 32767).astype(np.int16)


if __name__ == "__main__":
    OUT.mkdir(parents=True, exist_ok=True)
    z = ecg_clip()
    with open(OUT / "ecg_like.csv", "w") as fh:
        fh.write("ecg_mV@360Hz\n")
        fh.writelines(f"{v:.3f}\n" for v in z)
    wavfile.write(OUT / "speech_like.wav", 16000, speech_clip())
    print("wrote", OUT)
