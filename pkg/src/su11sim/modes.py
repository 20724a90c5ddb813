"""Bookkeeping for the pulsed temporal modes of a signal/idler pulse train.

Every pump pulse ``j`` carries exactly one signal and one idler mode (narrow
pulse limit: the mode shapes are never sampled, each pulse is a point event at
``t = j * delta_t``).  A :class:`ModeRegistry` fixes a finite window of
``n_pulses`` slots and a dense ordering: the signal block first, then the idler
block.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import Iterator, Optional

DEFAULT_N_PULSES = 256


class Band(str, enum.Enum):
    SIGNAL = "signal"
    IDLER = "idler"

    @property
    def other(self) -> "Band":
        return Band.IDLER if self is Band.SIGNAL else Band.SIGNAL


@dataclass(frozen=True, order=True)
class ModeId:
    band: Band
    pulse: int

    def __str__(self) -> str:
        return f"{self.band.value}[{self.pulse}]"


class _OutOfWindow:
    """Marker returned when a shifted mode leaves the simulation window."""

    _instance = None

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __repr__(self) -> str:
        return "OUT_OF_WINDOW"

    def __bool__(self) -> bool:
        return False


OUT_OF_WINDOW = _OutOfWindow()


@dataclass(frozen=True)
class PulseTrainSpec:
    """Equally spaced pump pulses.

    Args:
        delta_t: pulse separation in seconds.
        n_pulses: number of slots in the simulation window.
    """

    delta_t: float = 20e-9
    n_pulses: int = DEFAULT_N_PULSES

    def __post_init__(self):
        if not self.delta_t > 0:
            raise ValueError(f"delta_t must be positive, got {self.delta_t}")
        if int(self.n_pulses) != self.n_pulses or self.n_pulses < 1:
            raise ValueError(f"n_pulses must be a positive integer, got {self.n_pulses}")

    @property
    def rep_rate(self) -> float:
        return 1.0 / self.delta_t


@dataclass(frozen=True)
class ModeRegistry:
    """Dense index ordering over the ``2 * n_pulses`` physical modes."""

    n_pulses: int = DEFAULT_N_PULSES
    _size: int = field(init=False, repr=False)

    def __post_init__(self):
        if int(self.n_pulses) != self.n_pulses or self.n_pulses < 1:
            raise ValueError(f"n_pulses must be a positive integer, got {self.n_pulses}")
        object.__setattr__(self, "_size", 2 * self.n_pulses)

    def __len__(self) -> int:
        return self._size

    def __iter__(self) -> Iterator[ModeId]:
        for index in range(self._size):
            yield self.mode(index)

    def __contains__(self, m: object) -> bool:
        return isinstance(m, ModeId) and 0 <= m.pulse < self.n_pulses

    def index(self, m: ModeId) -> int:
        """Dense matrix index of ``m``; raises ``KeyError`` for unknown modes."""
        if m not in self:
            raise KeyError(f"mode {m!r} is not in a registry of {self.n_pulses} pulses")
        offset = 0 if m.band is Band.SIGNAL else self.n_pulses
        return offset + m.pulse

    def mode(self, index: int) -> ModeId:
        if not 0 <= index < self._size:
            raise KeyError(f"index {index} outside registry of size {self._size}")
        band, pulse = divmod(index, self.n_pulses)
        return ModeId(Band.SIGNAL if band == 0 else Band.IDLER, pulse)

    def band_indices(self, band: Band) -> range:
        offset = 0 if band is Band.SIGNAL else self.n_pulses
        return range(offset, offset + self.n_pulses)

    def shift(self, m: ModeId, d: int):
        """Same band, ``d`` slots later; :data:`OUT_OF_WINDOW` if that leaves the window."""
        if m not in self:
            raise KeyError(f"mode {m!r} is not in a registry of {self.n_pulses} pulses")
        pulse = m.pulse + d
        if not 0 <= pulse < self.n_pulses:
            return OUT_OF_WINDOW
        return ModeId(m.band, pulse)

    def interior(self, margin: int) -> range:
        """Pulse indices at least ``margin`` slots from either window edge."""
        margin = abs(margin)
        return range(margin, max(margin, self.n_pulses - margin))


def shift_mode(m: ModeId, d: int, registry: Optional[ModeRegistry] = None):
    registry = registry or ModeRegistry()
    return registry.shift(m, d)


def registry_index(m: ModeId, registry: ModeRegistry) -> int:
    return registry.index(m)
