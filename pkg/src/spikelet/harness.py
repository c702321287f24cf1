"""
Experiment pipeline: corpora, z-scoring, encode/decode runs, sweeps, tables.

Every window is z-scored, decomposed, and either synthesized directly
(``mode="exact"``) or pushed through LIF encoding and least-squares
decoding (``mode="spiking"``). Results are aggregated per wavelet family.
"""

from __future__ import annotations

import csv
import io
import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field
from importlib import resources
from pathlib import Path

import numpy as np
from scipy import signal as sps, stats
from scipy.io import wavfile

from .baselines import (
    MAX_CWT_SAMPLES, cwt_encode_decode, haar_round_trip, morlet_bank, szu_bank,
)
from .decoder import decode, nrmse
from .frames import design_ratio
from .kernels import Signal
from .spike_codec import encode
from .wavelets import analyze, make_bank, synthesize

__all__ = [
    "z_score", "synthetic_corpus", "CORPUS_KINDS", "read_wav", "write_wav",
    "read_csv", "write_csv", "load_signal", "bundled_path", "windows",
    "ExperimentConfig", "ResultRow", "ResultTable", "run_experiment",
    "run_window", "SweepResult", "threshold_sweep", "plot_sweep",
    "plot_frequency_responses", "worker_count",
]

CORPUS_KINDS = ("ecgBurst", "chirp", "boxcar", "bandlimitedNoise")
SPIKING_FAMILIES = ("dog", "doe", "dot")
EXACT_FAMILIES = ("dog", "doe", "dot", "haar", "morlet", "szu")
DEFAULT_SIGMA1_SAMPLES = 2.0


def z_score(signal):
    """Zero mean, unit (population) variance."""
    x = signal.samples
    sd = float(np.std(x))
    if not sd > 0:
        raise ValueError("cannot z-score a constant signal")
    return signal.replace((x - x.mean()) / sd)


# -- corpora ---------------------------------------------------------------

def _ecg_burst(rng, n, fs):
    t = np.arange(n) / fs
    x = np.zeros(n)
    rr = rng.uniform(0.7, 1.0)
    t0 = rng.uniform(0.0, rr)
    # (offset s, width s, amplitude) for P, Q, R, S, T waves
    waves = [(-0.2, 0.025, 0.15), (-0.03, 0.011, -0.1), (0.0, 0.014, 1.0),
             (0.035, 0.011, -0.25), (0.25, 0.05, 0.3)]
    for beat in np.arange(t0 - rr, t[-1] + rr, rr):
        beat += rng.normal(0.0, 0.01)
        for off, w, a in waves:
            x += a * np.exp(-0.5 * ((t - beat - off) / w) ** 2)
    x += 0.1 * np.sin(2 * np.pi * rng.uniform(0.1, 0.4) * t + rng.uniform(0, 2 * np.pi))
    x += 0.005 * rng.standard_normal(n)
    return x


def _chirp(rng, n, fs, band):
    t = np.arange(n) / fs
    f0, f1 = band
    phase = rng.uniform(0, 2 * np.pi)
    return sps.chirp(t, f0, t[-1] if n > 1 else 1.0, f1, method="logarithmic",
                     phi=np.degrees(phase))


def _boxcar(rng, n, fs, jitter):
    x = np.zeros(n)
    a, b = 0.25, 0.75
    if jitter:
        a += rng.uniform(-0.1, 0.1)
        b += rng.uniform(-0.1, 0.1)
    x[int(round(a * n)):int(round(b * n))] = 1.0
    return x


def _bandlimited(rng, n, fs, band):
    lo, hi = band
    sos = sps.butter(4, [lo, hi], btype="bandpass", fs=fs, output="sos")
    pad = 4 * n
    w = rng.standard_normal(n + 2 * pad)
    return sps.sosfiltfilt(sos, w)[pad:pad + n]


def synthetic_corpus(kind, seconds=1.0, rate_hz=360.0, seed=0, count=1, band=None):
    """Reproducible synthetic signals (not z-scored).

    Parameters
    ----------
    kind : {"ecgBurst", "chirp", "boxcar", "bandlimitedNoise"}
    band : (f_lo, f_hi) in Hz, optional
        Frequency span for ``chirp`` and ``bandlimitedNoise``. Defaults to
        (1 Hz, rate/4) and (1 Hz, rate/8).
    """
    if kind not in CORPUS_KINDS:
        raise ValueError(f"unknown corpus kind {kind!r}; expected one of {CORPUS_KINDS}")
    n = int(round(seconds * rate_hz))
    if n < 2:
        raise ValueError("corpus windows need at least two samples")
    rng = np.random.default_rng(seed)
    dt = 1.0 / rate_hz
    out = []
    for i in range(count):
        if kind == "ecgBurst":
            x = _ecg_burst(rng, n, rate_hz)
        elif kind == "chirp":
            x = _chirp(rng, n, rate_hz, band or (1.0, rate_hz / 4))
        elif kind == "boxcar":
            x = _boxcar(rng, n, rate_hz, jitter=i > 0)
        else:
            x = _bandlimited(rng, n, rate_hz, band or (1.0, rate_hz / 8))
        out.append(Signal(x, dt))
    return out


# -- file IO -----------------------------------------------------------------

def read_wav(path):
    """Mono float Signal from a PCM16/PCM32/float WAV (multi-channel is averaged)."""
    rate, data = wavfile.read(path)
    if data.dtype == np.int16:
        x = data / 32768.0
    elif data.dtype == np.int32:
        x = data / 2147483648.0
    elif data.dtype == np.uint8:
        x = (data.astype(float) - 128.0) / 128.0
    else:
        x = data.astype(float)
    if x.ndim == 2:
        x = x.mean(axis=1)
    return Signal(x, 1.0 / rate)


def write_wav(path, signal, pcm16=False):
    rate = int(round(1.0 / signal.dt))
    x = signal.samples
    if pcm16:
        peak = np.max(np.abs(x)) or 1.0
        data = np.round(x / peak * 32767).astype(np.int16)
    else:
        data = x.astype(np.float32)
    wavfile.write(path, rate, data)


def read_csv(path, rate_hz=None):
    """Single-column CSV; an optional non-numeric header line is skipped.

    A header of the form ``name@<rate>Hz`` sets the sample rate when
    ``rate_hz`` is not given.
    """
    text = Path(path).read_text()
    lines = [ln.strip() for ln in text.splitlines() if ln.strip()]
    if not lines:
        raise ValueError(f"{path}: empty CSV")
    header = None
    try:
        float(lines[0].split(",")[0])
    except ValueError:
        header, lines = lines[0], lines[1:]
    try:
        x = np.array([float(ln.split(",")[0]) for ln in lines])
    except ValueError as exc:
        raise ValueError(f"{path}: non-numeric sample ({exc})") from None
    if rate_hz is None and header and "@" in header:
        rate_hz = float(header.split("@", 1)[1].lower().rstrip("hz"))
    if rate_hz is None:
        raise ValueError(f"{path}: sample rate unknown; pass rate_hz")
    return Signal(x, 1.0 / rate_hz)


def write_csv(path, signal, name="x"):
    rate = 1.0 / signal.dt
    with open(path, "w", newline="") as fh:
        fh.write(f"{name}@{rate:.10g}Hz\n")
        for v in signal.samples:
            fh.write(f"{v:.17g}\n")


def bundled_path(name):
    """Path of a data file shipped with the package (``ecg_like.csv``, ``speech_like.wav``)."""
    return Path(str(resources.files("spikelet") / "data" / name))


def load_signal(path, rate_hz=None):
    p = Path(path)
    if not p.exists():
        raise FileNotFoundError(f"input file not found: {p}")
    if p.suffix.lower() == ".wav":
        return read_wav(p)
    return read_csv(p, rate_hz)


def windows(signal, seconds):
    """Non-overlapping windows of ``seconds`` (a shorter tail is dropped)."""
    n = int(round(seconds / signal.dt))
    if n < 2:
        raise ValueError("window shorter than two samples")
    if len(signal) < n:
        return [signal]
    return [signal.replace(signal.samples[i:i + n])
            for i in range(0, len(signal) - n + 1, n)]


# -- experiments -----------------------------------------------------------------

@dataclass
class ExperimentConfig:
    """Parameters of one experiment.

    ``c`` may be omitted when ``f_range`` (Hz) is given; c then follows from
    spreading K channels over that range and sigma_1 is placed so the finest
    channel peaks at the upper frequency. Otherwise sigma_1 is
    ``sigma1_samples`` sample intervals.
    """

    families: tuple = ("dot",)
    c: float | None = 2.0
    K: int = 8
    f_range: tuple | None = None
    theta: float = 0.1
    mode: str = "spiking"
    window_seconds: float = 1.0
    sample_rate_hz: float = 360.0
    source: dict = field(default_factory=lambda: {"kind": "ecgBurst", "count": 20})
    seed: int = 0
    sigma1_samples: float = DEFAULT_SIGMA1_SAMPLES
    n: int | None = None
    reset: str = "soft"
    decode_mode: str = "lstsq"

    def __post_init__(self):
        self.families = tuple(f.lower() for f in self.families)
        if self.mode not in ("exact", "spiking"):
            raise ValueError(f"mode must be 'exact' or 'spiking', got {self.mode!r}")
        allowed = EXACT_FAMILIES if self.mode == "exact" else SPIKING_FAMILIES
        bad = [f for f in self.families if f not in allowed]
        if bad:
            raise ValueError(f"families {bad} not available in {self.mode} mode")
        if self.c is None and self.f_range is None:
            raise ValueError("give either c or f_range")
        if self.c is None:
            self.c = design_ratio(self.f_range[0], self.f_range[1], self.K)
        if not self.theta > 0:
            raise ValueError("theta must be positive")
        n = int(round(self.window_seconds * self.sample_rate_hz))
        if any(f in ("morlet", "szu") for f in self.families) and n > MAX_CWT_SAMPLES:
            raise ValueError(f"window of {n} samples exceeds the dense CWT guard "
                             f"{MAX_CWT_SAMPLES}")

    @property
    def dt(self):
        return 1.0 / self.sample_rate_hz

    @property
    def sigma1(self):
        if self.f_range is not None:
            return math.sqrt(self.c) / (2 * math.pi * self.f_range[1])
        return self.sigma1_samples * self.dt

    def label(self):
        return f"c={self.c:.4g},K={self.K},theta={self.theta:g},{self.mode}"

    def to_dict(self):
        d = asdict(self)
        d["families"] = list(self.families)
        return d


def _source_signals(cfg):
    src = dict(cfg.source)
    kind = src.get("kind", "ecgBurst")
    if kind == "file":
        sig = load_signal(src["path"], src.get("rate_hz"))
        if abs(sig.dt - cfg.dt) > 1e-9 * cfg.dt:
            raise ValueError(f"{src['path']}: sample rate {1 / sig.dt:g} Hz does "
                             f"not match the config's {cfg.sample_rate_hz:g} Hz")
        wins = windows(sig, cfg.window_seconds)
        return wins[: src["count"]] if "count" in src else wins
    band = tuple(src["band"]) if "band" in src else None
    return synthetic_corpus(kind, cfg.window_seconds, cfg.sample_rate_hz,
                            seed=src.get("seed", cfg.seed),
                            count=int(src.get("count", 1)), band=band)


def _bank(cfg, family):
    return make_bank(family, cfg.sigma1, cfg.c, cfg.K, cfg.dt, n=cfg.n,
                     theta=cfg.theta)


def run_window(f, family, cfg, bank=None):
    """nRMSE and spike count of one z-scored window for one family."""
    if family == "haar":
        _, rec = haar_round_trip(f, cfg.K)
        return nrmse(f, rec), 0
    if family in ("morlet", "szu"):
        mk = morlet_bank if family == "morlet" else szu_bank
        rep = cwt_encode_decode(f, mk(cfg.sigma1, cfg.c, cfg.K, cfg.dt))
        return rep.nrmse, 0
    bank = bank or _bank(cfg, family)
    d = analyze(f, bank)
    if cfg.mode == "exact":
        return nrmse(f, synthesize(d)), 0
    trains = encode(d, cfg.theta, cfg.reset)
    rep = decode(trains, bank, d if cfg.decode_mode == "lstsq" else None,
                 cfg.decode_mode, original=f)
    return rep.nrmse, sum(len(t) for t in trains)


def worker_count():
    """Worker threads, capped by the SPIKELET_THREADS environment variable."""
    env = os.environ.get("SPIKELET_THREADS")
    if env is None:
        return 1
    try:
        v = int(env)
    except ValueError:
        raise ValueError(f"SPIKELET_THREADS must be an integer, got {env!r}") from None
    return max(1, v)


@dataclass(frozen=True)
class ResultRow:
    wavelet: str
    config: str
    mean_nrmse: float
    std_nrmse: float
    spikes_per_second: float
    n_windows: int


@dataclass
class ResultTable:
    rows: list = field(default_factory=list)
    per_window: dict = field(default_factory=dict, repr=False)

    COLUMNS = ("wavelet", "config", "mean_nrmse", "std_nrmse",
               "spikes_per_second", "n_windows")

    def row(self, wavelet):
        for r in self.rows:
            if r.wavelet == wavelet:
                return r
        raise KeyError(wavelet)

    def to_csv(self, path=None):
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(self.COLUMNS)
        for r in self.rows:
            w.writerow([r.wavelet, r.config, f"{r.mean_nrmse:.6e}",
                        f"{r.std_nrmse:.6e}", f"{r.spikes_per_second:.6g}",
                        r.n_windows])
        text = buf.getvalue()
        if path is not None:
            Path(path).write_text(text)
        return text

    def to_text(self):
        lines = [f"{'wavelet':<8} {'nRMSE':>20} {'spikes/s':>10} {'n':>4}  config"]
        for r in self.rows:
            lines.append(f"{r.wavelet:<8} {r.mean_nrmse:9.3f} +/- {r.std_nrmse:6.3f} "
                         f"{r.spikes_per_second:10.1f} {r.n_windows:4d}  {r.config}")
        return "\n".join(lines)


def run_experiment(cfg, signals=None):
    """Run every family of ``cfg`` over the corpus and aggregate per family.

    ``signals`` overrides the configured source. Windows are processed in
    parallel when SPIKELET_THREADS > 1; results stay in window order.
    """
    sigs = list(signals) if signals is not None else _source_signals(cfg)
    if not sigs:
        raise ValueError("no input windows")
    zs = [z_score(s) for s in sigs]
    table = ResultTable()
    for fam in cfg.families:
        bank = _bank(cfg, fam) if fam in SPIKING_FAMILIES else None
        job = lambda f, fam=fam, bank=bank: run_window(f, fam, cfg, bank)
        workers = worker_count()
        if workers > 1:
            with ThreadPoolExecutor(workers) as ex:
                res = list(ex.map(job, zs))
        else:
            res = [job(f) for f in zs]
        errs = np.array([r[0] for r in res])
        dur = sum(f.duration for f in zs)
        spikes = sum(r[1] for r in res)
        table.per_window[fam] = errs
        table.rows.append(ResultRow(fam, cfg.label(), float(errs.mean()),
                                    float(errs.std()), spikes / dur, len(zs)))
    return table


@dataclass
class SweepResult:
    thetas: np.ndarray
    nrmse: np.ndarray
    spikes: np.ndarray
    slope: float
    intercept: float
    r2: float

    def to_csv(self, path=None):
        lines = ["theta,nrmse,spikes_per_second"]
        lines += [f"{t:g},{e:.6e},{s:.6g}" for t, e, s in
                  zip(self.thetas, self.nrmse, self.spikes)]
        lines.append(f"# fit slope={self.slope:.6g} intercept={self.intercept:.6g} "
                     f"r2={self.r2:.6f}")
        text = "\n".join(lines) + "\n"
        if path is not None:
            Path(path).write_text(text)
        return text


def threshold_sweep(cfg, thetas, signals=None, family=None):
    """Mean nRMSE per threshold plus an affine least-squares fit (slope, intercept, R^2)."""
    thetas = np.asarray(sorted(thetas), dtype=float)
    if thetas.size < 4 or np.any(thetas <= 0):
        raise ValueError("need at least four positive thresholds")
    family = family or cfg.families[0]
    sigs = list(signals) if signals is not None else _source_signals(cfg)
    errs, rates = [], []
    for th in thetas:
        sub = ExperimentConfig(**{**cfg.to_dict(), "families": (family,),
                                  "theta": float(th), "mode": "spiking"})
        tab = run_experiment(sub, sigs)
        errs.append(tab.rows[0].mean_nrmse)
        rates.append(tab.rows[0].spikes_per_second)
    errs = np.array(errs)
    fit = stats.linregress(thetas, errs)
    return SweepResult(thetas, errs, np.array(rates), float(fit.slope),
                       float(fit.intercept), float(fit.rvalue ** 2))


# -- plots ---------------------------------------------------------------------

def _pyplot():
    import matplotlib
    matplotlib.use("Agg")
    import matplotlib.pyplot as plt
    plt.rcParams["svg.hashsalt"] = "spikelet"
    return plt


def plot_sweep(sweep, path):
    plt = _pyplot()
    fig, ax = plt.subplots(figsize=(5, 3.5))
    ax.plot(sweep.thetas, sweep.nrmse, "o", label="measured")
    tt = np.linspace(0, sweep.thetas.max(), 50)
    ax.plot(tt, sweep.intercept + sweep.slope * tt, "-",
            label=f"affine fit, R$^2$={sweep.r2:.3f}")
    ax.set_xlabel("threshold")
    ax.set_ylabel("nRMSE")
    ax.legend()
    fig.tight_layout()
    fig.savefig(path, format="svg", metadata={"Date": None})
    plt.close(fig)


def plot_frequency_responses(bank, path, omega=None):
    from .wavelets import frequency_response, lowpass_response
    plt = _pyplot()
    if omega is None:
        omega = np.geomspace(0.01 / bank.grid.coarsest, 10 / bank.scale(0), 2000)
    fig, ax = plt.subplots(figsize=(6, 3.5))
    for k in range(1, bank.K + 1):
        ax.loglog(omega, np.abs(frequency_response(bank, k, omega)), lw=1)
    ax.loglog(omega, np.abs(lowpass_response(bank, omega)), "k--", lw=1, label="lowpass")
    ax.set_xlabel("angular frequency (rad/s)")
    ax.set_ylabel("|response|")
    ax.set_ylim(1e-4, 2)
    ax.legend()
    fig.tight_layout()
    fig.savefig(path, format="svg", metadata={"Date": None})
    plt.close(fig)
