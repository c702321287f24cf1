import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from spikelet.kernels import (
    ALPHA_FLOOR, KernelSpec, Signal, StabilityError, exp_filter, gaussian_taps,
    limit_time_constants, make_scale_grid, max_cascade_order, mu_min,
    smooth_exponential, smooth_gaussian, smooth_limit_kernel,
)


# -- Signal / ScaleGrid --------------------------------------------------------

@pytest.mark.parametrize("samples, dt", [([], 1.0), ([1.0, np.nan], 1.0),
                                         ([1.0], 0.0), ([1.0], -1.0)])
def test_signal_rejects_invalid(samples, dt):
    with pytest.raises(ValueError):
        Signal(samples, dt)


def test_signal_is_read_only():
    s = Signal([1.0, 2.0], 0.5)
    with pytest.raises(ValueError):
        s.samples[0] = 3.0
    assert s.duration == 1.0


def test_scale_grid_levels():
    g = make_scale_grid(1.0, 2.0, 3)
    np.testing.assert_array_equal(g.levels, [0.5, 1.0, 2.0, 4.0])
    assert g.K == 3 and g.coarsest == 4.0


def test_scale_grid_sigma0_sqrt2():
    g = make_scale_grid(1.0, math.sqrt(2), 1)
    assert g.levels[0] == pytest.approx(7.071e-01, abs=5e-5)


@pytest.mark.parametrize("args", [(1.0, 1.0, 2), (1.0, 1.04, 2), (0.0, 2.0, 2),
                                  (1.0, 2.0, 0), (np.inf, 2.0, 2)])
def test_scale_grid_rejects(args):
    with pytest.raises(ValueError):
        make_scale_grid(*args)


@given(st.floats(1e-3, 1e3), st.floats(1.05, 4.0), st.integers(1, 20))
def test_scale_grid_is_geometric(sigma1, c, K):
    g = make_scale_grid(sigma1, c, K)
    ratio = g.levels[1:] / g.levels[:-1]
    np.testing.assert_allclose(ratio, c, rtol=1e-12)
    assert np.all(np.diff(g.levels) > 0)


# -- Gaussian ------------------------------------------------------------------

def test_gaussian_preserves_constants():
    s = Signal(np.full(200, 5.0), 0.1)
    np.testing.assert_allclose(smooth_gaussian(s, 0.7).samples, 5.0, rtol=1e-12)


def test_gaussian_zero_scale_is_identity(rng):
    s = Signal(rng.standard_normal(50), 1.0)
    np.testing.assert_array_equal(smooth_gaussian(s, 0.0).samples, s.samples)


def test_gaussian_impulse_matches_density():
    dt, sigma = 1.0, 10.0
    s = Signal.impulse(201, dt, at=100)
    y = smooth_gaussian(s, sigma).samples
    t = (np.arange(201) - 100) * dt
    direct = np.exp(-t ** 2 / (2 * sigma ** 2)) / (math.sqrt(2 * math.pi) * sigma) * dt
    assert abs(y.sum() - 1.0) < 1e-9
    np.testing.assert_allclose(y, direct, atol=1e-9)


def test_gaussian_semigroup():
    dt = 1.0
    t = np.arange(2000)
    x = np.sin(2 * np.pi * t / 97.0) + 0.5 * np.cos(2 * np.pi * t / 41.0)
    s = Signal(x, dt)
    a = smooth_gaussian(smooth_gaussian(s, 3.0), 4.0).samples
    b = smooth_gaussian(s, 5.0).samples
    sl = slice(100, -100)
    err = np.sqrt(np.mean((a[sl] - b[sl]) ** 2)) / np.std(b[sl])
    assert err < 1e-3


def test_gaussian_taps_variance():
    taps = gaussian_taps(4.0, 1.0)
    t = np.arange(taps.size) - taps.size // 2
    assert np.sum(taps * t ** 2) == pytest.approx(16.0, rel=1e-6)


# -- exponential ---------------------------------------------------------------

def test_exponential_steady_state():
    mu, dt = 0.3, 0.01
    n = int(10 * mu / dt) + 400
    y = smooth_exponential(Signal(np.full(n, -2.5), dt), mu).samples
    assert abs(y[-1] / -2.5 - 1) < 1e-6


def test_exponential_impulse_response():
    mu, dt = 1.0, 0.01
    y = smooth_exponential(Signal.impulse(20000, dt), mu).samples
    a = math.exp(-dt / mu)
    np.testing.assert_allclose(y, (1 - a) * a ** np.arange(20000), rtol=1e-12, atol=1e-300)
    assert abs(y.sum() - 1.0) < 1e-9
    # proportional to exp(-t/mu)
    ratio = y / np.exp(-np.arange(20000) * dt / mu)
    np.testing.assert_allclose(ratio[:5000], ratio[0], rtol=1e-9)


def test_exponential_floor():
    with pytest.raises(StabilityError):
        smooth_exponential(Signal(np.zeros(10), 0.01), 0.001)
    # the floor itself is admissible
    smooth_exponential(Signal(np.zeros(10), 0.01), mu_min(0.01))
    assert math.exp(-0.01 / mu_min(0.01)) == pytest.approx(ALPHA_FLOOR)


@given(st.integers(1, 300), st.floats(0.05, 5.0), st.sampled_from(["exp", "limit"]))
def test_causal_zero_prefix(onset, mu, kind):
    rng = np.random.default_rng(onset)
    x = np.zeros(400)
    x[onset:] = rng.standard_normal(400 - onset)
    s = Signal(x, 0.01)
    if kind == "exp":
        y = smooth_exponential(s, mu).samples
    else:
        y = smooth_limit_kernel(s, mu, math.sqrt(2)).samples
    assert np.all(y[:onset] == 0.0)


# -- limit kernel ---------------------------------------------------------------

def test_limit_time_constants_formula():
    mus = limit_time_constants(1.0, 2.0, 3)
    np.testing.assert_allclose(mus, math.sqrt(3) * np.array([0.5, 0.25, 0.125]))


def test_limit_variance_converges():
    # the untruncated cascade has sum(mu_j**2) = sigma**2
    for c in (math.sqrt(2), 2.0, 3.0):
        mus = limit_time_constants(2.0, c, 80)
        assert abs(np.sum(mus ** 2) - 4.0) < 1e-6 * 4.0


@given(st.floats(0.1, 10), st.floats(1.05, 3.0), st.integers(1, 9))
def test_limit_match_variance(sigma, c, n):
    mus = limit_time_constants(sigma, c, n, match_variance=True)
    assert abs(np.sum(mus ** 2) - sigma ** 2) < 1e-6 * sigma ** 2


def test_limit_n1_conventions():
    assert limit_time_constants(3.0, 2.0, 1)[0] == pytest.approx(math.sqrt(3) * 3 / 2)
    assert limit_time_constants(3.0, 2.0, 1, match_variance=True)[0] == pytest.approx(3.0)


def test_limit_preserves_constants():
    s = Signal(np.full(3000, 1.7), 0.01)
    y = smooth_limit_kernel(s, 1.0, math.sqrt(2), n=7).samples
    assert abs(y[-1] / 1.7 - 1) < 1e-6


def test_limit_n1_equals_exponential(rng):
    s = Signal(rng.standard_normal(500), 0.01)
    mu1 = limit_time_constants(0.5, 2.0, 1)[0]
    np.testing.assert_array_equal(smooth_limit_kernel(s, 0.5, 2.0, n=1).samples,
                                  smooth_exponential(s, mu1).samples)


def test_limit_impulse_variance():
    sigma, c, dt = 1.0, math.sqrt(2), 1e-3
    y = smooth_limit_kernel(Signal.impulse(40000, dt), sigma, c, n=7).samples
    t = np.arange(y.size) * dt
    m1 = np.sum(y * t)
    var = np.sum(y * t ** 2) - m1 ** 2
    target = np.sum(limit_time_constants(sigma, c, 7) ** 2)
    assert abs(var / target - 1) < 0.02


def test_max_cascade_order_matches_brute_force():
    for sigma, c, dt in [(1.0, 2.0, 1.0), (2.0, 2.0, 1.0), (2.0, math.sqrt(2), 1.0),
                         (10.0, 1.1, 1.0), (0.3, 2.0, 1.0)]:
        n = 0
        for j in range(1, 8):
            if limit_time_constants(sigma, c, j)[-1] >= dt / math.log(100):
                n = j
            else:
                break
        assert max_cascade_order(sigma, c, dt) == n


def test_limit_stage_error_names_stage():
    s = Signal(np.zeros(10), 1.0)
    with pytest.raises(StabilityError) as exc:
        smooth_limit_kernel(s, 1.0, 2.0, n=5)
    assert exc.value.stage == 3


# -- scale covariance --------------------------------------------------------

@pytest.mark.parametrize("s", [2, 4])
def test_exponential_time_rescaling_exact(rng, s):
    x = rng.standard_normal(300)
    a = exp_filter(x, 0.05, 0.01)
    b = exp_filter(x, 0.05 * s, 0.01 * s)
    np.testing.assert_array_equal(a, b)


@pytest.mark.parametrize("s", [2, 3])
def test_exponential_upsampled_covariance(s):
    # smooth(upsample(x), s*mu) ~ upsample(smooth(x, mu)) for slowly varying x
    # (the recursion lags by ~dt/2, so the period must be long against dt)
    dt, mu, period, n = 1.0, 200.0, 9000.0, 30000
    t = np.arange(n) * dt
    ref = exp_filter(np.sin(2 * np.pi * t / period), mu, dt)
    tu = np.arange(n * s) * dt / s
    up = exp_filter(np.sin(2 * np.pi * tu / period), mu, dt / s)[::s]
    assert np.max(np.abs(up - ref)[3000:]) / np.max(np.abs(ref)) < 1e-3


def test_kernel_spec():
    spec = KernelSpec("limit", 1.0, n=3, c=2.0)
    assert spec.time_constants().size == 3
    with pytest.raises(ValueError):
        KernelSpec("limit", 1.0)
    with pytest.raises(ValueError):
        KernelSpec("gaussian", 0.0)
    s = Signal(np.ones(100), 0.01)
    np.testing.assert_allclose(KernelSpec("gaussian", 0.05).apply(s).samples, 1.0)
