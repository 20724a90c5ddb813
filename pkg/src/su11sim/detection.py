"""Detector kernels, direct power detection and slow homodyne detection.

Kernels are sampled on a uniform causal grid ``t_n = n * dt``. Integrals over
the kernel are Riemann sums over that grid (samples are cell values), which is
exact for piecewise-constant kernels and makes the time average over one pulse
period of a pulse-train sum identical to the corresponding kernel integral.
Pulses sit at ``t = j * delta_t``, so ``delta_t`` must be a whole number of
kernel samples.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from su11sim import gaussian
from su11sim._parallel import parallel_map
from su11sim.exceptions import ConfigError, ResolutionError
from su11sim.interferometer import InterferometerSpec, build
from su11sim.modes import Band, ModeId, PulseTrainSpec

DEFAULT_SAMPLES_PER_PULSE = 16
SQUARE_SPAN_FACTOR = 2.5
SINGLE_POLE_SPAN_FACTOR = 20.0


def default_dt(delta_t: float, t_r: Optional[float] = None) -> float:
    """``delta_t / 16``, refined to a whole fraction of ``delta_t`` that resolves ``t_r``."""
    q = DEFAULT_SAMPLES_PER_PULSE
    if t_r is not None and t_r > 0:
        q = max(q, math.ceil(delta_t / t_r - 1e-9))
    return delta_t / q


@dataclass(frozen=True, eq=False)
class DetectorKernel:
    """Causal detector response ``k(t)`` sampled on ``t_n = n * dt``.

    Attributes:
        shape: ``"square"``, ``"single_pole"`` or ``"samples"``.
        t_r: response time in seconds (square width, or RC time for a single pole).
        dt: sample step in seconds.
        samples: ``k(t_n)``; the grid span is ``len(samples) * dt``.
    """

    shape: str
    t_r: float
    dt: float
    samples: np.ndarray = field(repr=False)
    f_3db: Optional[float] = None

    def __post_init__(self):
        samples = np.asarray(self.samples, dtype=float)
        samples.setflags(write=False)
        object.__setattr__(self, "samples", samples)
        if samples.ndim != 1 or samples.size == 0:
            raise ConfigError("kernel samples must be a non-empty 1-D array")
        if not np.all(np.isfinite(samples)):
            raise ConfigError("kernel samples must be finite")
        if not self.dt > 0:
            raise ConfigError(f"kernel dt must be positive, got {self.dt}")
        if self.shape != "samples" and np.any(samples < 0):
            raise ConfigError("parametric kernels must be non-negative")
        if not np.any(samples):
            raise ConfigError("kernel is identically zero")

    @classmethod
    def square(cls, t_r: float, dt: float, span: Optional[float] = None) -> "DetectorKernel":
        """Unit-height box of width ``t_r``, zero-padded to ``span`` (default ``2.5 t_r``)."""
        if not t_r > 0:
            raise ConfigError(f"square kernel width must be positive, got {t_r}")
        span = SQUARE_SPAN_FACTOR * t_r if span is None else span
        n = max(int(math.ceil(span / dt - 1e-9)), 1) + 1
        t = np.arange(n) * dt
        samples = (t < t_r - 1e-9 * dt).astype(float)
        return cls("square", float(t_r), float(dt), samples)

    @classmethod
    def single_pole(cls, f_3db: float, dt: float, span: Optional[float] = None) -> "DetectorKernel":
        """First-order low pass: ``k(t) = exp(-t / tau_c) / tau_c`` with ``tau_c = 1 / (2 pi f_3db)``."""
        if not f_3db > 0:
            raise ConfigError(f"3 dB bandwidth must be positive, got {f_3db}")
        tau_c = 1.0 / (2.0 * np.pi * f_3db)
        span = SINGLE_POLE_SPAN_FACTOR * tau_c if span is None else span
        n = max(int(math.ceil(span / dt - 1e-9)), 1) + 1
        samples = np.exp(-np.arange(n) * dt / tau_c) / tau_c
        return cls("single_pole", float(tau_c), float(dt), samples, f_3db=float(f_3db))

    @classmethod
    def from_samples(cls, samples, dt: float, t_r: Optional[float] = None) -> "DetectorKernel":
        samples = np.asarray(samples, dtype=float)
        if t_r is None:
            # RMS width of k^2 as a nominal response time
            t = np.arange(samples.size) * dt
            w = samples**2
            t_r = float(np.sum(w * t) / np.sum(w)) * 2 if np.sum(w * t) > 0 else dt
        return cls("samples", float(t_r), float(dt), samples)

    @property
    def span(self) -> float:
        return self.samples.size * self.dt

    def integral(self) -> float:
        return float(np.sum(self.samples) * self.dt)

    def integral_sq(self) -> float:
        return float(np.sum(self.samples**2) * self.dt)

    def describe(self) -> dict:
        info = {"shape": self.shape, "t_r": self.t_r, "dt": self.dt, "span": self.span}
        if self.f_3db is not None:
            info["f_3db"] = self.f_3db
        return info

    def _correlation(self, m: int) -> float:
        k = self.samples
        if m >= k.size:
            return 0.0
        return float(np.dot(k[: k.size - m], k[m:]))


def kernel_overlap(kernel: DetectorKernel, tau: float) -> float:
    """``int k(t) k(t - tau) dt / int k(t)^2 dt`` on the kernel grid.

    Lags that are not whole samples are linearly interpolated between the
    neighbouring sample lags (exact for box kernels). Lags past the grid span
    raise, except for box kernels whose support is known to end.
    """
    tau = abs(float(tau))
    if tau >= kernel.span:
        if kernel.shape == "square":
            return 0.0  # box support ends inside the grid
        raise ResolutionError(f"lag {tau:g} s is beyond the kernel grid span {kernel.span:g} s")
    x = tau / kernel.dt
    m = int(round(x))
    norm = kernel._correlation(0)
    if abs(x - m) <= 1e-9 * max(1.0, x):
        return kernel._correlation(m) / norm
    lo = int(math.floor(x))
    frac = x - lo
    return ((1 - frac) * kernel._correlation(lo) + frac * kernel._correlation(lo + 1)) / norm


def _samples_per_pulse(pulse_train: PulseTrainSpec, kernel: DetectorKernel) -> int:
    q = pulse_train.delta_t / kernel.dt
    if kernel.dt > pulse_train.delta_t / 4 * (1 + 1e-12):
        raise ResolutionError(
            f"kernel step {kernel.dt:g} s is coarser than delta_t/4 = {pulse_train.delta_t / 4:g} s"
        )
    qi = int(round(q))
    if abs(q - qi) > 1e-9 * q:
        raise ResolutionError(
            f"delta_t = {pulse_train.delta_t:g} s is not a whole number of kernel steps ({q:.6g})"
        )
    return qi


@dataclass(frozen=True, eq=False)
class HomodyneCoefficients:
    """Weights ``w[s, j] = |E0| k(t_s - j delta_t)`` over one pulse period at the window plateau.

    ``times`` are the sample instants ``t_s``; ``modes`` are the signal-band
    output modes that carry weight; ``phases`` the measured quadrature phase per mode.
    """

    modes: tuple
    times: np.ndarray
    weights: np.ndarray
    phases: np.ndarray
    lo_amplitude: float
    kernel_norm: float  # sum_n k_n^2

    @property
    def mode_indices(self) -> np.ndarray:
        return np.array([m.pulse for m in self.modes], dtype=int)


def _plateau_pulse(spec: InterferometerSpec, reach: int) -> int:
    """Pulse index at which to evaluate, clear of both window edges."""
    n = spec.pulse_train.n_pulses
    margin = abs(spec.delay_slots)
    lo = margin + reach
    hi = n - 1 - margin
    if lo > hi:
        raise ResolutionError(
            f"window of {n} pulses cannot hold a kernel reaching {reach} pulses back "
            f"plus {margin} edge slots; increase n_pulses"
        )
    return (lo + hi + 1) // 2


def homodyne_coefficients(
    spec: InterferometerSpec,
    kernel: DetectorKernel,
    lo_phase: float = 0.0,
    lo_amplitude: float = 1.0,
) -> HomodyneCoefficients:
    q = _samples_per_pulse(spec.pulse_train, kernel)
    k = kernel.samples
    reach = (k.size - 1) // q
    j_eval = _plateau_pulse(spec, reach)
    pulses = np.arange(j_eval - reach, j_eval + 1)
    s = np.arange(q)
    # sample index of t_s - j*delta_t for every (s, j)
    n = (j_eval - pulses)[None, :] * q + s[:, None]
    w = np.where(n < k.size, k[np.minimum(n, k.size - 1)], 0.0)
    keep = np.any(w != 0.0, axis=0)
    modes = tuple(ModeId(Band.SIGNAL, int(j)) for j in pulses[keep])
    return HomodyneCoefficients(
        modes=modes,
        times=(j_eval * q + s) * kernel.dt,
        weights=abs(lo_amplitude) * w[:, keep],
        phases=np.full(len(modes), float(lo_phase)),
        lo_amplitude=abs(lo_amplitude),
        kernel_norm=float(np.sum(k**2)),
    )


def shot_noise(pulse_train: PulseTrainSpec, kernel: DetectorKernel, lo_amplitude: float = 1.0) -> float:
    """``R_p |E0|^2 int k^2 dt``: homodyne variance for vacuum at the signal port."""
    return pulse_train.rep_rate * abs(lo_amplitude) ** 2 * kernel.integral_sq()


def homodyne_variance(
    spec: InterferometerSpec,
    kernel: DetectorKernel,
    lo_phase: float = 0.0,
    theta: Optional[float] = None,
    transform: Optional[gaussian.BogoliubovTransform] = None,
) -> float:
    """Time-averaged photocurrent variance in units of the vacuum shot-noise level.

    Evaluated as the quadratic form of the kernel weights with the output
    quadrature covariance, averaged over one pulse period at the window plateau.
    """
    if theta is not None:
        spec = spec.replace(theta=theta)
    coeffs = homodyne_coefficients(spec, kernel, lo_phase)
    t = transform if transform is not None else build(spec)
    cov = gaussian.quadrature_covariance(t, coeffs.phases, coeffs.modes)
    w = coeffs.weights
    per_time = np.einsum("si,ij,sj->s", w, cov, w)
    return float(np.sum(per_time) / (coeffs.lo_amplitude**2 * coeffs.kernel_norm))


def hd_gain_prefactor(k1: float, k2: float) -> float:
    """Lossless fringe visibility of slow homodyne detection at full kernel overlap."""
    num = np.sinh(2 * k1) * np.sinh(2 * k2)
    return float(num / (1.0 + 2.0 * np.sinh(k2 - k1) ** 2 + num))


def visibility_hd(spec: InterferometerSpec, kernel: DetectorKernel) -> float:
    """Closed-form homodyne fringe visibility: gain prefactor times kernel overlap at the arm lag."""
    return hd_gain_prefactor(spec.k1, spec.k2) * kernel_overlap(kernel, spec.lag)


def direct_visibility(k1: float, k2: float) -> float:
    """Closed-form fringe visibility of balanced direct power detection."""
    a = np.sinh(k1) * np.cosh(k2)
    b = np.sinh(k2) * np.cosh(k1)
    den = a * a + b * b
    return float(2 * a * b / den) if den > 0 else 0.0


# --- traces -----------------------------------------------------------------


@dataclass
class FringeTrace:
    """Observable sampled over a scan variable, with run metadata."""

    scan_name: str
    scan_values: np.ndarray
    values: np.ndarray
    values_norm: np.ndarray
    metadata: dict = field(default_factory=dict)

    def __post_init__(self):
        self.scan_values = np.asarray(self.scan_values, dtype=float)
        self.values = np.asarray(self.values, dtype=float)
        self.values_norm = np.asarray(self.values_norm, dtype=float)
        if not (self.scan_values.shape == self.values.shape == self.values_norm.shape):
            raise ValueError("trace columns must have equal length")

    def columns(self) -> dict:
        return {self.scan_name: self.scan_values, "value": self.values, "value_norm": self.values_norm}


@dataclass
class VarianceTrace(FringeTrace):
    values_db: Optional[np.ndarray] = None
    std_error: Optional[np.ndarray] = None
    n_samples: Optional[int] = None
    seed: Optional[int] = None

    def columns(self) -> dict:
        cols = super().columns()
        if self.values_db is not None:
            cols["value_db"] = np.asarray(self.values_db, dtype=float)
        if self.std_error is not None:
            n = len(self.values)
            cols["std_error"] = np.asarray(self.std_error, dtype=float)
            cols["n_samples"] = np.full(n, self.n_samples, dtype=np.int64)
            cols["seed"] = np.full(n, self.seed, dtype=np.int64)
        return cols


@dataclass(frozen=True)
class FringeFit:
    """Least-squares fit of ``offset + a cos(theta) + b sin(theta)``."""

    offset: float
    cos_amp: float
    sin_amp: float
    offset_err: float = 0.0
    cos_amp_err: float = 0.0

    @property
    def visibility(self) -> float:
        if self.offset == 0:
            return 0.0
        return float(np.hypot(self.cos_amp, self.sin_amp) / abs(self.offset))

    @property
    def signed_visibility(self) -> float:
        """Fringe contrast along ``cos(theta)``; negative if the fringe is inverted."""
        return float(self.cos_amp / self.offset) if self.offset else 0.0

    @property
    def signed_visibility_err(self) -> float:
        if not self.offset:
            return 0.0
        v = self.cos_amp / self.offset
        return float(np.hypot(self.cos_amp_err / self.offset, v * self.offset_err / self.offset))

    @property
    def minimum(self) -> float:
        return float(self.offset - np.hypot(self.cos_amp, self.sin_amp))

    @property
    def maximum(self) -> float:
        return float(self.offset + np.hypot(self.cos_amp, self.sin_amp))


def fit_fringe(theta, values, sigma=None) -> FringeFit:
    theta = np.asarray(theta, dtype=float)
    y = np.asarray(values, dtype=float)
    design = np.column_stack([np.ones_like(theta), np.cos(theta), np.sin(theta)])
    if sigma is None:
        coef, *_ = np.linalg.lstsq(design, y, rcond=None)
        return FringeFit(*map(float, coef))
    sigma = np.asarray(sigma, dtype=float)
    a = design / sigma[:, None]
    coef, *_ = np.linalg.lstsq(a, y / sigma, rcond=None)
    cov = np.linalg.inv(a.T @ a)
    err = np.sqrt(np.diag(cov))
    return FringeFit(float(coef[0]), float(coef[1]), float(coef[2]), float(err[0]), float(err[1]))


def fringe_visibility(trace: FringeTrace) -> float:
    """``(max - min) / (max + min)``; 0 for a flat trace."""
    y = trace.values
    hi, lo = float(np.max(y)), float(np.min(y))
    if hi + lo == 0 or hi - lo <= 1e-12 * max(abs(hi), abs(lo)):
        return 0.0
    return (hi - lo) / (hi + lo)


def _spec_metadata(spec: InterferometerSpec) -> dict:
    return {
        "k1": spec.k1,
        "k2": spec.k2,
        "theta": spec.theta,
        "delay_slots": spec.delay_slots,
        "delay_band": spec.delay_band.value,
        "arm_loss_signal": spec.arm_loss_signal,
        "arm_loss_idler": spec.arm_loss_idler,
        "det_loss_signal": spec.det_loss_signal,
        "det_loss_idler": spec.det_loss_idler,
        "delta_t": spec.pulse_train.delta_t,
        "n_pulses": spec.pulse_train.n_pulses,
    }


def direct_power_level(spec: InterferometerSpec, kernel: DetectorKernel) -> tuple[float, float]:
    """Plateau photocurrent ``sum_j k(t - j delta_t) <n_j>`` and its kernel sum ``sum_j k``."""
    q = _samples_per_pulse(spec.pulse_train, kernel)
    k = kernel.samples
    reach = (k.size - 1) // q
    j_eval = _plateau_pulse(spec, reach)
    pulses = np.arange(j_eval - reach, j_eval + 1)
    w = k[(j_eval - pulses) * q]
    t = build(spec)
    n = gaussian.mean_photon_numbers(t, [ModeId(Band.SIGNAL, int(j)) for j in pulses])
    return float(np.dot(w, n)), float(np.sum(w))


def direct_power_trace(spec: InterferometerSpec, kernel: DetectorKernel, theta_grid) -> FringeTrace:
    """Signal-port direct-detection plateau level versus interferometer phase.

    ``value_norm`` is the level divided by ``sum_j k(t - j delta_t)``, i.e. photons per pulse.
    """
    theta_grid = np.asarray(theta_grid, dtype=float)
    levels = parallel_map(lambda th: direct_power_level(spec.replace(theta=float(th)), kernel), theta_grid)
    values = np.array([v for v, _ in levels])
    ksum = np.array([s for _, s in levels])
    meta = {"observable": "direct_power", "spec": _spec_metadata(spec), "kernel": kernel.describe()}
    return FringeTrace("theta_rad", theta_grid, values, values / ksum, meta)


def blocked_reference(spec: InterferometerSpec, kernel: DetectorKernel, lo_phase: float = 0.0) -> float:
    """Homodyne variance with the first amplifier switched off (``k1 = 0``)."""
    return homodyne_variance(spec.replace(k1=0.0), kernel, lo_phase)


def homodyne_trace(
    spec: InterferometerSpec, kernel: DetectorKernel, theta_grid, lo_phase: float = 0.0
) -> VarianceTrace:
    """Homodyne variance versus interferometer phase.

    ``value`` is the absolute variance for unit LO amplitude, ``value_norm`` is
    in units of the vacuum shot noise and ``value_db`` is relative to the
    ``k1 = 0`` reference.
    """
    theta_grid = np.asarray(theta_grid, dtype=float)
    norm = parallel_map(
        lambda th: homodyne_variance(spec, kernel, lo_phase, theta=float(th)), theta_grid
    )
    norm = np.asarray(norm)
    ref = blocked_reference(spec, kernel, lo_phase)
    vsn = shot_noise(spec.pulse_train, kernel)
    meta = {
        "observable": "homodyne_variance",
        "spec": _spec_metadata(spec),
        "kernel": kernel.describe(),
        "lo_phase": lo_phase,
        "shot_noise": vsn,
        "blocked_reference_norm": ref,
    }
    return VarianceTrace(
        "theta_rad", theta_grid, norm * vsn, norm, meta, values_db=10 * np.log10(norm / ref)
    )


@dataclass(frozen=True)
class NoiseLevels:
    reference: float
    minimum: float
    maximum: float

    @property
    def reduction_db(self) -> float:
        return float(10 * np.log10(self.minimum / self.reference))

    @property
    def antisqueezing_db(self) -> float:
        return float(10 * np.log10(self.maximum / self.reference))


def noise_levels(
    spec: InterferometerSpec, kernel: DetectorKernel, lo_phase: float = 0.0, n_theta: int = 16
) -> NoiseLevels:
    """Extreme homodyne noise over the phase scan relative to the ``k1 = 0`` reference.

    The variance is a first-harmonic function of theta, so the extremes follow
    exactly from a three-coefficient fit over ``n_theta`` phases.
    """
    theta = np.linspace(0, 2 * np.pi, n_theta, endpoint=False)
    values = [homodyne_variance(spec, kernel, lo_phase, theta=float(th)) for th in theta]
    fit = fit_fringe(theta, values)
    return NoiseLevels(blocked_reference(spec, kernel, lo_phase), fit.minimum, fit.maximum)


def noise_reduction_db(spec: InterferometerSpec, kernel: DetectorKernel, lo_phase: float = 0.0) -> float:
    return noise_levels(spec, kernel, lo_phase).reduction_db
