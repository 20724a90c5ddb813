"""SU(1,1) interferometer topology: PA1, arm losses, delay + phase, PA2, detection losses."""

from __future__ import annotations

import dataclasses
import re
from dataclasses import dataclass, field

import numpy as np

from su11sim import gaussian
from su11sim.exceptions import ConfigError
from su11sim.modes import Band, ModeRegistry, PulseTrainSpec

PRESET_GAIN1_SQ = 2.8
PRESET_GAIN2_SQ = 10.0
PRESET_DELTA_T = 20e-9


def gain_from_power_gain(g_squared: float) -> float:
    """Gain parameter ``K`` for a power gain ``G^2 = cosh^2 K``."""
    if not g_squared >= 1.0:
        raise ValueError(f"power gain must be >= 1, got {g_squared}")
    return float(np.arccosh(np.sqrt(g_squared)))


def theta_from_pump_phase(phi_pump: float) -> float:
    """Scanning the second pump phase by ``phi`` shifts the interferometer phase by ``phi / 2``."""
    return 0.5 * phi_pump


@dataclass(frozen=True)
class InterferometerSpec:
    """Parameters of a pulse-pumped SU(1,1) interferometer.

    ``delay_slots`` delays ``delay_band`` (idler by default) by whole pulse
    separations between the amplifiers; a negative value delays the other band.
    Loss parameters are transmissivities, 1.0 meaning lossless.
    """

    k1: float
    k2: float
    theta: float = 0.0
    delay_slots: int = 0
    delay_band: Band = Band.IDLER
    arm_loss_signal: float = 1.0
    arm_loss_idler: float = 1.0
    det_loss_signal: float = 1.0
    det_loss_idler: float = 1.0
    pulse_train: PulseTrainSpec = field(default_factory=PulseTrainSpec)

    def __post_init__(self):
        object.__setattr__(self, "delay_band", Band(self.delay_band))
        if not (np.isfinite(self.k1) and np.isfinite(self.k2)) or self.k1 < 0 or self.k2 < 0:
            raise ConfigError(f"gains must be finite and >= 0, got k1={self.k1}, k2={self.k2}")
        if int(self.delay_slots) != self.delay_slots:
            raise ConfigError(f"delay_slots must be an integer, got {self.delay_slots}")
        object.__setattr__(self, "delay_slots", int(self.delay_slots))
        for name in ("arm_loss_signal", "arm_loss_idler", "det_loss_signal", "det_loss_idler"):
            eta = getattr(self, name)
            if not 0.0 <= eta <= 1.0:
                raise ConfigError(f"{name} must lie in [0, 1], got {eta}")
        if not abs(self.delay_slots) < self.pulse_train.n_pulses / 4:
            raise ConfigError(
                f"|delay_slots|={abs(self.delay_slots)} must be below n_pulses/4 "
                f"({self.pulse_train.n_pulses / 4:g})"
            )

    @property
    def registry(self) -> ModeRegistry:
        return ModeRegistry(self.pulse_train.n_pulses)

    @property
    def delayed_band(self) -> Band:
        return self.delay_band if self.delay_slots >= 0 else self.delay_band.other

    @property
    def lag(self) -> float:
        """Delay between the interfering arms in seconds."""
        return abs(self.delay_slots) * self.pulse_train.delta_t

    def replace(self, **changes) -> "InterferometerSpec":
        return dataclasses.replace(self, **changes)

    def swapped_bands(self) -> "InterferometerSpec":
        """Same interferometer with the delay moved to the other band."""
        return self.replace(
            delay_band=self.delay_band.other,
            arm_loss_signal=self.arm_loss_idler,
            arm_loss_idler=self.arm_loss_signal,
            det_loss_signal=self.det_loss_idler,
            det_loss_idler=self.det_loss_signal,
        )


def build(spec: InterferometerSpec, validate: bool = True) -> gaussian.BogoliubovTransform:
    reg = spec.registry
    pairs = gaussian.pulse_pairs(reg)
    elements = [gaussian.squeezer(pairs, spec.k1, reg)]
    for band, eta in ((Band.SIGNAL, spec.arm_loss_signal), (Band.IDLER, spec.arm_loss_idler)):
        if eta < 1.0:
            elements.append(gaussian.loss(band, eta, reg))
    elements.append(gaussian.delay(spec.delayed_band, abs(spec.delay_slots), spec.theta, reg))
    elements.append(gaussian.squeezer(pairs, spec.k2, reg))
    for band, eta in ((Band.SIGNAL, spec.det_loss_signal), (Band.IDLER, spec.det_loss_idler)):
        if eta < 1.0:
            elements.append(gaussian.loss(band, eta, reg))
    t = gaussian.chain(*elements)
    if validate:
        t.validate()
    return t


def _reference(delay_slots: int) -> InterferometerSpec:
    return InterferometerSpec(
        k1=gain_from_power_gain(PRESET_GAIN1_SQ),
        k2=gain_from_power_gain(PRESET_GAIN2_SQ),
        delay_slots=delay_slots,
        pulse_train=PulseTrainSpec(delta_t=PRESET_DELTA_T),
    )


PRESETS = {
    "paper-balanced": lambda: _reference(0),
    "paper-unbalanced": lambda: _reference(1),
}

_SYMMETRIC = re.compile(r"^symmetric\(\s*([-+0-9.eE]+)\s*\)$")


def preset(name: str) -> InterferometerSpec:
    name = name.strip()
    if name in PRESETS:
        return PRESETS[name]()
    match = _SYMMETRIC.match(name)
    if match:
        try:
            k = float(match.group(1))
        except ValueError:
            pass
        else:
            return InterferometerSpec(k1=k, k2=k, pulse_train=PulseTrainSpec(delta_t=PRESET_DELTA_T))
    available = ", ".join([*PRESETS, "symmetric(K)"])
    raise ConfigError(f"unknown preset {name!r}; available presets: {available}")
