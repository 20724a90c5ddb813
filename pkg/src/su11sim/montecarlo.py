"""Monte Carlo estimates of homodyne observables by Wigner sampling.

Vacuum inputs are drawn as classical complex amplitudes ``z = (x + i p) / 2``
with independent standard-normal ``x, p`` (so ``X(phi)`` has unit variance),
pushed through ``a_out = C z + S conj(z)``, and turned into homodyne currents
with the detector kernel. For Gaussian states the symmetrized second moments of
these classical samples are exact, so the estimates converge to the analytic
variances without sharing their code path.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from su11sim import gaussian
from su11sim._parallel import parallel_map
from su11sim.detection import (
    DetectorKernel,
    VarianceTrace,
    _spec_metadata,
    homodyne_coefficients,
    shot_noise,
)
from su11sim.exceptions import ConfigError
from su11sim.interferometer import InterferometerSpec, build

MIN_SAMPLES = 100
RNG_ALGORITHM = "numpy PCG64, SeedSequence(seed, spawn_key=(point,))"
NORMAL_ALGORITHM = "numpy Generator.standard_normal (ziggurat)"


@dataclass(frozen=True)
class SamplerConfig:
    n_samples: int = 1_000_000
    seed: int = 0
    batch: int = 65_536

    def __post_init__(self):
        if int(self.n_samples) != self.n_samples or self.n_samples < MIN_SAMPLES:
            raise ConfigError(f"n_samples must be an integer >= {MIN_SAMPLES}, got {self.n_samples}")
        if int(self.batch) != self.batch or self.batch < 1:
            raise ConfigError(f"batch must be a positive integer, got {self.batch}")
        if not 0 <= int(self.seed) < 2**64:
            raise ConfigError(f"seed must be a 64-bit unsigned integer, got {self.seed}")


def make_rng(seed: int, point: int = 0) -> np.random.Generator:
    """Independent stream for scan point ``point``, derived by hashing ``(seed, point)``."""
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence(int(seed), spawn_key=(int(point),))))


class _OutputSampler:
    """Samples output amplitudes of selected modes from vacuum inputs."""

    def __init__(self, transform: gaussian.BogoliubovTransform, rows):
        c = transform.c[rows, :]
        s = transform.s[rows, :]
        cols = np.union1d(c.tocoo().col, s.tocoo().col)
        self.c = c[:, cols].toarray()
        self.s = s[:, cols].toarray()
        self.n_inputs = cols.size

    def amplitudes(self, rng: np.random.Generator, n: int) -> np.ndarray:
        x = rng.standard_normal((n, self.n_inputs))
        p = rng.standard_normal((n, self.n_inputs))
        z = 0.5 * (x + 1j * p)
        return z @ self.c.T + z.conj() @ self.s.T


def sample_quadratures(
    transform: gaussian.BogoliubovTransform,
    modes,
    phases,
    n_samples: int,
    rng: np.random.Generator,
) -> np.ndarray:
    """``(n_samples, len(modes))`` draws of ``X_m(phi_m) = 2 Re(a_m exp(-i phi_m))``."""
    rows = [transform.registry.index(m) if not isinstance(m, (int, np.integer)) else int(m) for m in modes]
    phases = np.broadcast_to(np.asarray(phases, dtype=float), (len(rows),))
    a = _OutputSampler(transform, rows).amplitudes(rng, n_samples)
    return 2.0 * np.real(a * np.exp(-1j * phases))


def sample_variance(
    spec: InterferometerSpec,
    kernel: DetectorKernel,
    lo_phase: float,
    theta: Optional[float],
    cfg: SamplerConfig,
    point: int = 0,
) -> tuple[float, float]:
    """Empirical time-averaged homodyne variance (units of shot noise) and its standard error.

    The current has zero mean for vacuum inputs, so the variance estimator uses
    the known mean. Samples are consumed in fixed-size batches from a single
    stream, so the result depends only on ``(seed, point, n_samples, batch)``.
    """
    if theta is not None:
        spec = spec.replace(theta=theta)
    coeffs = homodyne_coefficients(spec, kernel, lo_phase)
    t = build(spec)
    sampler = _OutputSampler(t, [t.registry.index(m) for m in coeffs.modes])
    rot = np.exp(-1j * coeffs.phases)
    w = coeffs.weights.T  # (modes, times)
    norm = coeffs.lo_amplitude**2 * coeffs.kernel_norm
    rng = make_rng(cfg.seed, point)

    total = 0.0
    total_sq = 0.0
    done = 0
    while done < cfg.n_samples:
        b = min(cfg.batch, cfg.n_samples - done)
        x = 2.0 * np.real(sampler.amplitudes(rng, b) * rot)
        current = x @ w
        y = np.sum(current * current, axis=1) / norm
        total += float(np.sum(y))
        total_sq += float(np.dot(y, y))
        done += b
    n = cfg.n_samples
    mean = total / n
    var_y = max(total_sq / n - mean * mean, 0.0) * n / (n - 1)
    return mean, float(np.sqrt(var_y / n))


def sample_fringe(
    spec: InterferometerSpec,
    kernel: DetectorKernel,
    lo_phase: float,
    theta_grid,
    cfg: SamplerConfig,
) -> VarianceTrace:
    """Monte Carlo homodyne variance over a phase grid, one substream per grid point."""
    theta_grid = np.asarray(theta_grid, dtype=float)
    results = parallel_map(
        lambda item: sample_variance(spec, kernel, lo_phase, float(item[1]), cfg, point=item[0]),
        list(enumerate(theta_grid)),
    )
    est = np.array([r[0] for r in results])
    err = np.array([r[1] for r in results])
    vsn = shot_noise(spec.pulse_train, kernel)
    meta = {
        "observable": "homodyne_variance",
        "engine": "montecarlo",
        "spec": _spec_metadata(spec),
        "kernel": kernel.describe(),
        "lo_phase": lo_phase,
        "shot_noise": vsn,
        "rng": RNG_ALGORITHM,
        "normal_variates": NORMAL_ALGORITHM,
        "batch": cfg.batch,
    }
    return VarianceTrace(
        "theta_rad",
        theta_grid,
        est * vsn,
        est,
        meta,
        std_error=err,
        n_samples=cfg.n_samples,
        seed=cfg.seed,
    )
