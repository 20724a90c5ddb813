import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from su11sim import gaussian
from su11sim.detection import (
    DetectorKernel,
    FringeTrace,
    default_dt,
    direct_power_trace,
    fit_fringe,
    fringe_visibility,
    homodyne_coefficients,
    homodyne_trace,
    homodyne_variance,
    kernel_overlap,
    noise_levels,
    shot_noise,
)
from su11sim.exceptions import ConfigError, ResolutionError
from su11sim.interferometer import InterferometerSpec, build
from su11sim.modes import Band, ModeId, PulseTrainSpec

DT = 20e-9
TRAIN = PulseTrainSpec(delta_t=DT, n_pulses=32)


def brute_force_variance(spec, kernel):
    """Photocurrent variance from the full signal-band covariance, averaged over one period."""
    t = build(spec)
    n = spec.pulse_train.n_pulses
    modes = [ModeId(Band.SIGNAL, j) for j in range(n)]
    cov = gaussian.quadrature_covariance(t, 0.0, modes)
    q = round(DT / kernel.dt)
    k = kernel.samples
    j0 = n - 1 - abs(spec.delay_slots)  # last pulse whose neighbourhood is fully populated
    total = 0.0
    for s in range(q):
        idx = (j0 - np.arange(n)) * q + s
        w = np.where((idx >= 0) & (idx < k.size), k[np.clip(idx, 0, k.size - 1)], 0.0)
        total += w @ cov @ w
    return total / np.sum(k**2)


def test_default_dt():
    assert default_dt(DT) == pytest.approx(DT / 16)
    assert default_dt(DT, DT / 40) == pytest.approx(DT / 40)


def test_square_kernel_shape():
    k = DetectorKernel.square(4 * DT, DT / 8)
    assert k.samples.sum() == 32
    assert k.integral() == pytest.approx(4 * DT)


def test_single_pole_time_constant():
    f = 1e6
    k = DetectorKernel.single_pole(f, 1e-9)
    assert k.t_r == pytest.approx(1 / (2 * np.pi * f))
    assert k.describe()["f_3db"] == f


@pytest.mark.parametrize("bad", [dict(t_r=0.0, dt=1e-9), dict(t_r=1e-8, dt=-1.0)])
def test_kernel_validation(bad):
    with pytest.raises(ConfigError):
        DetectorKernel.square(**bad)


def test_from_samples_rejects_zero():
    with pytest.raises(ConfigError):
        DetectorKernel.from_samples(np.zeros(5), 1e-9)


@pytest.mark.parametrize("m", [0, 1, 7, 31, 80])
def test_overlap_matches_numpy_correlate(m):
    kernel = DetectorKernel.single_pole(1 / (2 * np.pi * 10 * DT), DT / 16)
    k = kernel.samples
    full = np.correlate(k, k, mode="full")
    expected = full[k.size - 1 + m] / full[k.size - 1]
    assert kernel_overlap(kernel, m * kernel.dt) == pytest.approx(expected, rel=1e-12)


@settings(max_examples=50)
@given(st.floats(0.0, 3.0))
def test_square_overlap_is_triangle(x):
    t_r = 5 * DT
    kernel = DetectorKernel.square(t_r, DT / 16)
    assert kernel_overlap(kernel, x * t_r) == pytest.approx(max(0.0, 1 - x), abs=1e-12)


def test_overlap_beyond_grid_raises_for_smooth_kernel():
    kernel = DetectorKernel.single_pole(1e7, DT / 16)
    with pytest.raises(ResolutionError):
        kernel_overlap(kernel, 2 * kernel.span)


@pytest.mark.parametrize("dt", [DT / 2, DT / 6.5])
def test_resolution_errors(dt):
    spec = InterferometerSpec(0.5, 0.5, pulse_train=TRAIN)
    with pytest.raises(ResolutionError):
        homodyne_coefficients(spec, DetectorKernel.square(4 * DT, dt))


def test_window_too_small_for_kernel():
    spec = InterferometerSpec(0.5, 0.5, pulse_train=PulseTrainSpec(DT, 8))
    with pytest.raises(ResolutionError):
        homodyne_variance(spec, DetectorKernel.square(20 * DT, DT / 4))


def test_vacuum_homodyne_is_shot_noise():
    spec = InterferometerSpec(0.0, 0.0, pulse_train=TRAIN)
    assert homodyne_variance(spec, DetectorKernel.square(5 * DT, DT / 8)) == pytest.approx(1.0, rel=1e-13)


def test_shot_noise_scales_with_lo_power():
    kernel = DetectorKernel.square(5 * DT, DT / 8)
    assert shot_noise(TRAIN, kernel, 3.0) == pytest.approx(9 * shot_noise(TRAIN, kernel))
    assert shot_noise(TRAIN, kernel) == pytest.approx(5.0)


@pytest.mark.parametrize("d", [0, 1, 2])
@pytest.mark.parametrize("theta", [0.0, 2.0])
@pytest.mark.parametrize(
    "kernel",
    [DetectorKernel.square(5 * DT, DT / 8), DetectorKernel.single_pole(1 / (2 * np.pi * 2 * DT), DT / 8, 12 * DT)],
    ids=["square", "single_pole"],
)
def test_homodyne_matches_brute_force(d, theta, kernel):
    spec = InterferometerSpec(0.6, 1.1, theta=theta, delay_slots=d, arm_loss_idler=0.8, pulse_train=TRAIN)
    assert homodyne_variance(spec, kernel) == pytest.approx(brute_force_variance(spec, kernel), rel=1e-12)


def test_fit_fringe_recovers_parameters():
    theta = np.linspace(0, 2 * np.pi, 20, endpoint=False)
    y = 3.0 + 1.2 * np.cos(theta) - 0.5 * np.sin(theta)
    fit = fit_fringe(theta, y)
    assert (fit.offset, fit.cos_amp, fit.sin_amp) == pytest.approx((3.0, 1.2, -0.5))
    assert fit.visibility == pytest.approx(1.3 / 3.0)
    assert fit.minimum == pytest.approx(1.7)
    weighted = fit_fringe(theta, y, sigma=np.full(theta.size, 0.1))
    assert weighted.signed_visibility == pytest.approx(0.4)
    assert weighted.offset_err > 0


def test_fringe_visibility_flat_is_zero():
    x = np.linspace(0, 1, 5)
    flat = FringeTrace("theta", x, np.full(5, 2.0), np.full(5, 1.0))
    assert fringe_visibility(flat) == 0.0
    assert fringe_visibility(FringeTrace("theta", x, x + 1, x)) == pytest.approx(1 / 3)


def test_direct_trace_photons_per_pulse():
    spec = InterferometerSpec(0.5, 0.5, pulse_train=TRAIN)
    kernel = DetectorKernel.square(4 * DT, DT / 8)
    trace = direct_power_trace(spec, kernel, [0.0, np.pi])
    assert trace.values_norm[0] == pytest.approx(np.sinh(1.0) ** 2)
    assert trace.values_norm[1] == pytest.approx(0.0, abs=1e-12)
    assert set(trace.columns()) == {"theta_rad", "value", "value_norm"}


def test_homodyne_trace_db_reference():
    spec = InterferometerSpec(0.0, 0.8, delay_slots=1, pulse_train=TRAIN)
    kernel = DetectorKernel.square(5 * DT, DT / 8)
    trace = homodyne_trace(spec, kernel, [0.0, 1.0])
    np.testing.assert_allclose(trace.values_db, 0.0, atol=1e-12)
    assert "value_db" in trace.columns()


def test_noise_levels_lossless_balanced():
    k1, k2 = 0.5, 0.9
    spec = InterferometerSpec(k1, k2, pulse_train=TRAIN)
    levels = noise_levels(spec, DetectorKernel.square(5 * DT, DT / 8))
    assert levels.reference == pytest.approx(np.cosh(2 * k2))
    assert levels.minimum == pytest.approx(np.cosh(2 * (k2 - k1)))
    assert levels.maximum == pytest.approx(np.cosh(2 * (k2 + k1)))
    assert levels.reduction_db < 0 < levels.antisqueezing_db
