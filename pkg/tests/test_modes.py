import pytest
from hypothesis import given, strategies as st

from su11sim.modes import OUT_OF_WINDOW, Band, ModeId, ModeRegistry, PulseTrainSpec, shift_mode


def test_band_other():
    assert Band.SIGNAL.other is Band.IDLER
    assert Band.IDLER.other is Band.SIGNAL


def test_pulse_train_defaults():
    pt = PulseTrainSpec()
    assert pt.rep_rate == pytest.approx(1 / pt.delta_t)


@given(n=st.integers(1, 300), data=st.data())
def test_registry_is_a_bijection(n, data):
    reg = ModeRegistry(n)
    i = data.draw(st.integers(0, 2 * n - 1))
    assert reg.index(reg.mode(i)) == i
    modes = list(reg)
    assert len(modes) == len(set(modes)) == 2 * n


def test_signal_block_precedes_idler():
    reg = ModeRegistry(4)
    assert reg.index(ModeId(Band.SIGNAL, 3)) == 3
    assert reg.index(ModeId(Band.IDLER, 0)) == 4
    assert reg.band_indices(Band.IDLER) == range(4, 8)


@pytest.mark.parametrize("bad", [ModeId(Band.SIGNAL, -1), ModeId(Band.IDLER, 10)])
def test_unknown_mode_raises(bad):
    with pytest.raises(KeyError):
        ModeRegistry(10).index(bad)


@given(pulse=st.integers(0, 63), d=st.integers(-80, 80))
def test_shift_inverse_or_out_of_window(pulse, d):
    reg = ModeRegistry(64)
    m = ModeId(Band.IDLER, pulse)
    shifted = reg.shift(m, d)
    if 0 <= pulse + d < 64:
        assert reg.shift(shifted, -d) == m
    else:
        assert shifted is OUT_OF_WINDOW
        assert not shifted


def test_shift_mode_default_registry():
    assert shift_mode(ModeId(Band.SIGNAL, 0), 5) == ModeId(Band.SIGNAL, 5)
    assert shift_mode(ModeId(Band.SIGNAL, 0), -1) is OUT_OF_WINDOW


def test_interior():
    assert ModeRegistry(10).interior(2) == range(2, 8)
    assert ModeRegistry(10).interior(-3) == range(3, 7)


def test_bad_registry_size():
    with pytest.raises(ValueError):
        ModeRegistry(0)
