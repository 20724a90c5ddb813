"""Pulse-train SU(1,1) interferometer simulator.

Bogoliubov-transform model of two pulse-pumped parametric amplifiers with a
whole-slot delay between them, with direct power detection, slow homodyne
detection, a Monte Carlo oracle and Schmidt-mode diagnostics.
"""

__version__ = "0.1.0"

from su11sim.modes import Band, ModeId, ModeRegistry, PulseTrainSpec, shift_mode, registry_index, OUT_OF_WINDOW
from su11sim.gaussian import (
    BogoliubovTransform,
    chain,
    compose,
    delay,
    identity,
    loss,
    mean_photon_number,
    phase_shift,
    quadrature_covariance,
    squeezer,
)
from su11sim.interferometer import InterferometerSpec, build, preset
from su11sim.detection import (
    DetectorKernel,
    direct_power_trace,
    fringe_visibility,
    homodyne_variance,
    kernel_overlap,
    noise_reduction_db,
    shot_noise,
    visibility_hd,
)
