"""
Acceptance suite: one test per primary criterion, each at its stated tolerance.

Every test prints a single PASS/FAIL line with its measured values and
runtime (also collected in the terminal summary). Run on its own with
``pytest tests/test_acceptance.py -v``.
"""

import math
import subprocess
import sys
import time
from pathlib import Path

import numpy as np
import pytest

from conftest import ACCEPTANCE_LINES
from spikelet.baselines import cwt_encode_decode, haar_round_trip, morlet_bank, szu_bank
from spikelet.decoder import composed_exponentials, nrmse, numerical_composition
from spikelet.frames import default_omega_range, frame_bounds, spectral_bank
from spikelet.harness import (
    ExperimentConfig, bundled_path, load_signal, run_experiment, synthetic_corpus,
    threshold_sweep, windows, z_score,
)
from spikelet.kernels import Signal
from spikelet.spike_codec import encode
from spikelet.wavelets import (
    analyze, bandwidth_3db, doe_band_roots, frequency_response, make_bank,
    peak_frequency, synthesize,
)

FS = 360.0
DT = 1.0 / FS
SQ2 = math.sqrt(2.0)
# (c, mu) combinations shared by the peak checks
PEAK_COMBOS = [(SQ2, 1.0), (SQ2, 0.01), (2.0, 1.0), (2.0, 0.05), (3.0, 1.0),
               (3.0, 0.2), (1.5, 1.0), (1.2, 0.5), (1.1, 2.0), (2.5, 0.1)]


class Criterion:
    """Times a block of checks and records one PASS/FAIL line."""

    def __init__(self, name, budget=None):
        self.name, self.budget = name, budget
        self.failures, self.notes = [], []

    def check(self, ok, msg):
        if not ok:
            self.failures.append(msg)
        return ok

    def note(self, msg):
        self.notes.append(msg)

    def __enter__(self):
        self.t0 = time.perf_counter()
        return self

    def __exit__(self, exc_type, exc, tb):
        dt = time.perf_counter() - self.t0
        if exc_type is not None:
            self.failures.append(f"{exc_type.__name__}: {exc}")
        if self.budget is not None:
            self.check(dt < self.budget, f"runtime {dt:.1f}s over {self.budget:g}s budget")
        status = "PASS" if not self.failures else "FAIL"
        detail = "; ".join(self.failures or self.notes)
        line = f"{status}  {self.name:<34} {dt:6.1f}s  {detail}"
        ACCEPTANCE_LINES.append(line)
        print(line)
        if exc_type is None and self.failures:
            pytest.fail("; ".join(self.failures), pytrace=False)
        return False


def _ecg_windows(count=20):
    return [z_score(s) for s in synthetic_corpus("ecgBurst", 1.0, FS, seed=0, count=count)]


def _clip_windows():
    return [z_score(w) for w in windows(load_signal(bundled_path("ecg_like.csv")), 1.0)]


def test_exact_reconstruction():
    with Criterion("exact reconstruction", budget=10) as cr:
        rng = np.random.default_rng(0)
        sigs = [z_score(Signal(rng.standard_normal(360), DT)) for _ in range(20)]
        worst = 0.0
        for fam in ("dog", "doe", "dot"):
            for c in (SQ2, 2.0):
                for K in (2, 8):
                    b = make_bank(fam, 2 * DT, c, K, DT)
                    e = max(nrmse(x, synthesize(analyze(x, b))) for x in sigs)
                    worst = max(worst, e)
                    cr.check(e < 1e-9, f"{fam} c={c:.3g} K={K}: {e:.2e}")
        eh = max(nrmse(x, haar_round_trip(x, 8)[1]) for x in sigs)
        cr.check(eh < 1e-9, f"haar: {eh:.2e}")
        cr.note(f"max nRMSE {max(worst, eh):.2e} over 13 configs x 20 signals")


def test_spiking_reconstruction():
    with Criterion("spiking reconstruction", budget=60) as cr:
        sigs = _clip_windows() + _ecg_windows(20)
        res = {}
        for fam, tol in (("dot", 0.10), ("dog", 0.15), ("doe", 0.15)):
            cfg = ExperimentConfig(families=(fam,), c=2.0, K=8, theta=0.1)
            res[fam] = run_experiment(cfg, sigs).row(fam).mean_nrmse
            cr.check(res[fam] <= tol, f"{fam} mean nRMSE {res[fam]:.4f} > {tol}")
        cr.note(", ".join(f"{k} {v:.4f}" for k, v in res.items())
                + f" over {len(sigs)} windows")


def test_causality_penalty():
    with Criterion("causality penalty Szu/Morlet", budget=120) as cr:
        sigs = _clip_windows() + _ecg_windows(20)
        mb, sb = morlet_bank(2 * DT, SQ2, 15, DT), szu_bank(2 * DT, SQ2, 15, DT)
        m = np.mean([cwt_encode_decode(x, mb).nrmse for x in sigs])
        s = np.mean([cwt_encode_decode(x, sb).nrmse for x in sigs])
        ratio = s / m
        cr.check(2.0 <= ratio <= 8.0,
                 f"ratio {ratio:.3g} outside [2, 8] (Szu {s:.3e}, Morlet {m:.3e})")
        cr.note(f"ratio {ratio:.3g}")


def test_frame_bounds():
    with Criterion("frame bounds", budget=30) as cr:
        table = {1: 1.000, 2: 1.157, 4: 1.564, 8: 1.926, 16: 1.999}
        got = {}
        for K, ref in table.items():
            doe = spectral_bank("doe", SQ2, K)
            A, B = frame_bounds(doe)
            cr.check(abs(B - 1.0) <= 1e-3, f"B(DoE, K={K}) = {B:.6f}")
            cr.check(A > 0, f"A(DoE, K={K}) = {A:.3e}")
            dot = spectral_bank("dot", SQ2, K)
            A, B = frame_bounds(dot)
            got[K] = B
            cr.check(abs(B - ref) <= 5e-3, f"B(DoT, K={K}) = {B:.4f} vs {ref}")
            cr.check(A > 0, f"A(DoT, K={K}) = {A:.3e}")
            for rng in (default_omega_range(dot), (1e-2, 1e2)):
                cr.check(frame_bounds(dot, rng)[0] > 0, f"A(DoT) on {rng} not positive")
        cr.note("B(DoT) " + ", ".join(f"K={k}: {v:.4f}" for k, v in got.items()))


def test_peak_bandwidth():
    with Criterion("peak/bandwidth closed forms", budget=10) as cr:
        worst_dot = 0.0
        for c, mu in PEAK_COMBOS:
            dt = mu / 1000
            doe = make_bank("doe", mu, c, 2, dt)
            # DoE: argmax on a log grid within one step of sqrt(c)/mu
            w = np.geomspace(1e-2 / mu, 1e2 / mu, 20001)
            step = np.log(w[1] / w[0])
            p = np.abs(frequency_response(doe, 1, w))
            off = abs(np.log(w[np.argmax(p)]) - np.log(math.sqrt(c) / mu))
            cr.check(off <= step, f"DoE peak off by {off / step:.2f} steps (c={c}, mu={mu})")
            # half-power edges are the biquadratic roots
            lo, hi, _ = bandwidth_3db(doe, 1)
            um, up = doe_band_roots(c)
            for u in (um, up):
                cr.check(abs(u * u - (c * c + 4 * c + 1) * u + c * c) < 1e-6 * c * c,
                         f"root residual c={c}")
            half = 0.5 * np.abs(frequency_response(doe, 1, [math.sqrt(c) / mu]))[0] ** 2
            for edge in (lo, hi):
                val = np.abs(frequency_response(doe, 1, [edge]))[0] ** 2
                cr.check(abs(val - half) < 1e-6, f"DoE edge power off by {val - half:.2e}")
            # DoT: numerical peak <= 1/mu_1 with mu_1 = sqrt(c^2 - 1) mu / c
            dot = make_bank("dot", mu, c, 2, dt)
            mu1 = math.sqrt(c * c - 1) * mu / c
            r = peak_frequency(dot, 1) * mu1
            worst_dot = max(worst_dot, r)
            cr.check(r <= 1.0, f"DoT peak = {r:.3f}/mu_1 (c={c}, mu={mu})")
        b = make_bank("doe", 1.0, SQ2, 8, 1e-3)
        steps = -np.diff(np.log([peak_frequency(b, k) for k in range(1, 9)]))
        dq = float(np.max(np.abs(steps - math.log(SQ2))))
        cr.check(dq <= 1e-6, f"constant-Q spacing off by {dq:.2e}")
        cr.note(f"max DoT omega_peak mu_1 = {worst_dot:.3f}, Q spacing err {dq:.1e}")


def test_threshold_linearity():
    with Criterion("threshold linearity", budget=120) as cr:
        cfg = ExperimentConfig(families=("dot",), c=2.0, K=8,
                               source={"kind": "bandlimitedNoise", "count": 10})
        sw = threshold_sweep(cfg, (0.025, 0.05, 0.1, 0.2, 0.4))
        cr.check(sw.r2 >= 0.95, f"R^2 = {sw.r2:.4f}")
        cr.note(f"R^2 = {sw.r2:.4f}, nRMSE " + " ".join(f"{e:.3f}" for e in sw.nrmse))


def test_scale_covariance():
    with Criterion("scale covariance") as cr:
        rng = np.random.default_rng(3)
        x = rng.standard_normal(720)
        n = 0
        for fam in ("dog", "doe", "dot"):
            ref = encode(analyze(Signal(x, DT), make_bank(fam, 2 * DT, 2.0, 6, DT)), 0.1)
            for s in (2, 4):
                # x(t / s) sampled at s dt is the same sample sequence
                b = make_bank(fam, 2 * s * DT, 2.0, 6, s * DT)
                out = encode(analyze(Signal(x, s * DT), b), 0.1)
                for a, o in zip(ref, out):
                    n += len(a)
                    cr.check(a.events() == o.events(), f"{fam} s={s} channel {a.channel}")
        cr.note(f"{n} spikes per scale identical across 3 families")


def test_composed_exponential_oracle():
    with Criterion("composed-exponential oracle") as cr:
        pairs = [(1.0, 2.0), (2.0, 1.0), (0.5, 3.0), (0.1, 0.2), (3.0, 0.7),
                 (1.0, 1.0), (0.5, 0.5), (2.0, 2.0), (1.0, 1.05), (0.3, 4.0)]
        worst = 0.0
        for a, b in pairs:
            # oracle step resolves the faster exponential equally for every pair
            t, num = numerical_composition(a, b, 1e-3 * min(a, b), 20 * max(a, b))
            ref = composed_exponentials(t, a, b)
            dev = np.max(np.abs(num - ref)) / ref.max()
            worst = max(worst, dev)
            cr.check(dev < 1e-6, f"({a}, {b}) relative deviation {dev:.2e}")
            cr.check(ref[0] == 0.0, f"({a}, {b}) nonzero at t = 0")
        cr.note(f"max deviation {worst:.2e} peak over 10 pairs (3 confluent)")


PROPERTY_TESTS = [
    "tests/test_wavelets.py::test_admissibility",
    "tests/test_wavelets.py::test_causal_channels_zero_prefix",
    "tests/test_baselines.py::test_szu_causal",
    "tests/test_frames.py::test_gram_psd_unit_diagonal",
    "tests/test_frames.py::test_dot_telescoping_identity",
    "tests/test_frames.py::test_dot_telescoped_form_is_finest_level",
    "tests/test_decoder.py::test_least_squares_orthogonality",
    "tests/test_cli.py::test_spikefile_round_trip",
    "tests/test_harness.py::test_determinism_and_threads",
    "tests/test_harness.py::test_corpus_deterministic",
]


def test_invariant_suites():
    with Criterion("invariant property suites") as cr:
        root = Path(__file__).resolve().parents[1]
        proc = subprocess.run([sys.executable, "-m", "pytest", "-q", "-p", "no:cacheprovider",
                               *PROPERTY_TESTS], cwd=root, capture_output=True, text=True)
        tail = proc.stdout.strip().splitlines()[-1] if proc.stdout.strip() else proc.stderr
        cr.check(proc.returncode == 0, f"property suites failed: {tail}")
        cr.note(tail)
