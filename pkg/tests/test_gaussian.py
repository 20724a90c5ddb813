import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from su11sim import gaussian
from su11sim.exceptions import SymplecticError
from su11sim.gaussian import BogoliubovTransform
from su11sim.modes import Band, ModeId, ModeRegistry

REG = ModeRegistry(6)
S0, I0 = ModeId(Band.SIGNAL, 0), ModeId(Band.IDLER, 0)


def element(kind, value, band, d, reg=REG):
    if kind == "squeeze":
        return gaussian.squeezer(gaussian.pulse_pairs(reg), value, reg)
    if kind == "phase":
        return gaussian.phase_shift(band, value * 4, reg)
    if kind == "delay":
        return gaussian.delay(band, d, value * 4, reg)
    return gaussian.loss(band, min(1.0, value), reg)


elements = st.builds(
    element,
    st.sampled_from(["squeeze", "phase", "delay", "loss"]),
    st.floats(0.0, 0.75),
    st.sampled_from(list(Band)),
    st.integers(-2, 2),
)


@pytest.mark.parametrize(
    "t",
    [
        gaussian.identity(REG),
        gaussian.squeezer(gaussian.pulse_pairs(REG), 1.3, REG),
        gaussian.phase_shift([S0, I0], 0.7, REG),
        gaussian.delay(Band.IDLER, 2, 0.4, REG),
        gaussian.delay(Band.SIGNAL, -3, 1.1, REG),
        gaussian.loss(Band.SIGNAL, 0.3, REG),
    ],
)
def test_elements_are_symplectic(t):
    assert t.is_symplectic()


def test_squeezer_coefficients():
    k = 0.8
    c, s = gaussian.squeezer([(S0, I0)], k, REG).dense()
    i, j = REG.index(S0), REG.index(I0)
    assert c[i, i] == pytest.approx(np.cosh(k))
    assert s[i, j] == pytest.approx(np.sinh(k))
    assert s[j, i] == pytest.approx(np.sinh(k))
    assert c[1, 1] == 1 and np.count_nonzero(s) == 2


def test_squeezer_rejects_repeated_mode():
    with pytest.raises(ValueError):
        gaussian.squeezer([(S0, I0), (S0, ModeId(Band.IDLER, 1))], 0.1, REG)


def test_delay_routing():
    t = gaussian.delay(Band.IDLER, 2, 0.3, REG)
    assert t.ancilla_count == 2
    c, _ = t.dense()
    out = REG.index(ModeId(Band.IDLER, 4))
    src = REG.index(ModeId(Band.IDLER, 2))
    assert c[out, src] == pytest.approx(np.exp(0.3j))
    # vacated slot fed by an ancilla
    vacated = REG.index(ModeId(Band.IDLER, 0))
    assert np.flatnonzero(c[vacated]).tolist() == [len(REG)]
    # signal band untouched
    assert c[0, 0] == 1


def test_loss_photon_number():
    reg = ModeRegistry(1)
    t = gaussian.chain(
        gaussian.squeezer(gaussian.pulse_pairs(reg), np.arcsinh(1.0), reg),
        gaussian.loss(Band.SIGNAL, 0.25, reg),
    )
    assert gaussian.mean_photon_number(t, ModeId(Band.SIGNAL, 0)) == pytest.approx(0.25, abs=1e-14)
    assert gaussian.mean_photon_number(t, ModeId(Band.IDLER, 0)) == pytest.approx(1.0, abs=1e-14)


def test_validate_raises_on_broken_transform():
    t = gaussian.identity(REG)
    bad = BogoliubovTransform(t.c * 1.01, t.s, REG)
    with pytest.raises(SymplecticError):
        bad.validate()


def test_compose_order_matches_matmul():
    a = gaussian.squeezer(gaussian.pulse_pairs(REG), 0.4, REG)
    b = gaussian.phase_shift(Band.IDLER, 0.9, REG)
    ca, sa = (b @ a).dense()
    cb, sb = gaussian.chain(a, b).dense()
    np.testing.assert_allclose(ca, cb)
    np.testing.assert_allclose(sa, sb)


def _dense_compose(t2, t1):
    c1, s1 = t1
    c2, s2 = t2
    return c2 @ c1 + s2 @ s1.conj(), c2 @ s1 + s2 @ c1.conj()


def test_compose_matches_dense_formula():
    reg = REG
    t1 = gaussian.squeezer(gaussian.pulse_pairs(reg), 0.6, reg)
    t2 = gaussian.phase_shift(Band.SIGNAL, 0.5, reg)
    t3 = gaussian.squeezer(gaussian.pulse_pairs(reg), 0.3, reg)
    expected = _dense_compose(t3.dense(), _dense_compose(t2.dense(), t1.dense()))
    got = gaussian.chain(t1, t2, t3).dense()
    np.testing.assert_allclose(got[0], expected[0], atol=1e-14)
    np.testing.assert_allclose(got[1], expected[1], atol=1e-14)


@settings(max_examples=60, deadline=None)
@given(st.lists(elements, min_size=1, max_size=6))
def test_random_chains_are_symplectic(ts):
    t = gaussian.chain(*ts)
    r1, r2 = t.symplectic_residuals()
    assert r1 < 1e-10 and r2 < 1e-10


@settings(max_examples=40, deadline=None)
@given(st.lists(elements, min_size=3, max_size=6), st.data())
def test_composition_is_associative(ts, data):
    cut = data.draw(st.integers(1, len(ts) - 1))
    left = gaussian.chain(gaussian.chain(*ts[:cut]), gaussian.chain(*ts[cut:]))
    flat = gaussian.chain(*ts)
    assert left.ancilla_count == flat.ancilla_count
    for x, y in zip(left.dense(), flat.dense()):
        np.testing.assert_allclose(x, y, atol=1e-9)


def test_vacuum_quadrature_variance_is_one():
    cov = gaussian.quadrature_covariance(gaussian.identity(REG), 0.3)
    np.testing.assert_allclose(cov, np.eye(len(REG)), atol=1e-15)


def test_two_mode_squeezed_covariance():
    k = 0.7
    reg = ModeRegistry(1)
    t = gaussian.squeezer(gaussian.pulse_pairs(reg), k, reg)
    cov = gaussian.quadrature_covariance(t, 0.0)
    np.testing.assert_allclose(np.diag(cov), np.cosh(2 * k))
    assert cov[0, 1] == pytest.approx(np.sinh(2 * k))
    # X_s - X_i is squeezed to e^{-2k}
    v = np.array([1, -1]) / np.sqrt(2)
    assert v @ cov @ v == pytest.approx(np.exp(-2 * k))


def test_mean_photon_numbers_vectorised():
    t = gaussian.squeezer(gaussian.pulse_pairs(REG), 0.5, REG)
    np.testing.assert_allclose(gaussian.mean_photon_numbers(t), np.sinh(0.5) ** 2)
