import numpy as np
import pytest

from fock_oracle import TwoModeFock
from su11sim import gaussian
from su11sim.exceptions import ConfigError
from su11sim.modes import Band, ModeId, ModeRegistry
from su11sim.schmidt import (
    JointSpectralFunction,
    decompose,
    decomposition_columns,
    gaussian_jsf,
    load_jsf_csv,
    pairwise_gains,
    save_jsf_csv,
    trapezoid_weights,
)

GRID = np.linspace(-6, 6, 121)


def orthonormal_modes(grid, n):
    """Hermite-Gauss-like functions made exactly orthonormal under the trapezoid weights."""
    w = trapezoid_weights(grid)
    raw = np.column_stack([grid**k * np.exp(-grid**2 / 2) for k in range(n)])
    q, _ = np.linalg.qr(np.sqrt(w)[:, None] * raw)
    return q / np.sqrt(w)[:, None]


def two_mode_jsf(r=(0.8, 0.6), k=1.7, phase=0.0):
    phi = orthonormal_modes(GRID, 2)
    psi = orthonormal_modes(GRID, 2) * np.exp(1j * phase)
    values = k * sum(rk * np.outer(phi[:, i], psi[:, i]) for i, rk in enumerate(r))
    return JointSpectralFunction(GRID, GRID, values)


def test_trapezoid_weights():
    w = trapezoid_weights(np.array([0.0, 0.5, 1.0]))
    np.testing.assert_allclose(w, [0.25, 0.5, 0.25])
    with pytest.raises(ConfigError):
        trapezoid_weights(np.array([0.0, 1.0, 3.0]))


def test_factorable_is_single_mode():
    dec = decompose(gaussian_jsf(0.5, 2.0, 0.0, GRID, GRID))
    assert dec.r[0] > 1 - 1e-12
    assert dec.effective_mode_number == pytest.approx(1.0)


def test_anticorrelated_is_multimode():
    dec = decompose(gaussian_jsf(0.3, 2.0, np.pi / 4, GRID, GRID))
    assert dec.r[0] < 0.9
    assert dec.effective_mode_number > 2


@pytest.mark.parametrize("phase", [0.0, 0.7])
def test_constructed_spectrum_recovered(phase):
    dec = decompose(two_mode_jsf(phase=phase))
    np.testing.assert_allclose(dec.r[:2], [0.8, 0.6], atol=1e-12)
    assert dec.k_total == pytest.approx(1.7, rel=1e-12)
    assert np.all(dec.r[2:] < 1e-12)


def test_reconstruction_and_orthonormality():
    jsf = gaussian_jsf(0.4, 1.5, 0.6, GRID, GRID, amplitude=2.0)
    dec = decompose(jsf)
    assert np.max(np.abs(dec.reconstruct() - jsf.values)) < 1e-12
    assert max(dec.gram_errors()) < 1e-10
    assert np.sum(dec.r**2) == pytest.approx(1.0, abs=1e-14)
    assert dec.k_total == pytest.approx(jsf.overall_gain, rel=1e-12)


def test_grid_refinement_converges():
    coarse = decompose(gaussian_jsf(0.3, 2.0, np.pi / 4, GRID, GRID)).r[:3]
    fine_grid = np.linspace(-6, 6, 241)
    fine = decompose(gaussian_jsf(0.3, 2.0, np.pi / 4, fine_grid, fine_grid)).r[:3]
    np.testing.assert_allclose(coarse, fine, atol=1e-6)


def test_pairwise_gains_match_fock_photon_numbers():
    dec = decompose(two_mode_jsf(k=0.5))
    reg = ModeRegistry(1)
    for g in pairwise_gains(dec)[:2]:
        t = gaussian.squeezer(gaussian.pulse_pairs(reg), g, reg)
        n = gaussian.mean_photon_number(t, ModeId(Band.SIGNAL, 0))
        assert n == pytest.approx(TwoModeFock(g, dim=30).mean_photons(), abs=1e-10)
    np.testing.assert_allclose(pairwise_gains(dec)[:2], [0.4, 0.3], atol=1e-12)


def test_zero_jsf_rejected():
    with pytest.raises(ConfigError):
        decompose(JointSpectralFunction(GRID, GRID, np.zeros((121, 121))))


def test_shape_mismatch_rejected():
    with pytest.raises(ConfigError):
        JointSpectralFunction(GRID, GRID[:5], np.zeros((121, 121)))


def test_csv_round_trip(tmp_path):
    jsf = two_mode_jsf(phase=0.3)
    path = tmp_path / "jsf.csv"
    save_jsf_csv(jsf, path)
    back = load_jsf_csv(path)
    np.testing.assert_array_equal(back.values, jsf.values)
    np.testing.assert_array_equal(back.grid_s, GRID)


def test_malformed_csv(tmp_path):
    path = tmp_path / "bad.csv"
    path.write_text(",0,1\n0,x,1\n1,2,3\n")
    with pytest.raises(ConfigError):
        load_jsf_csv(path)


def test_decomposition_columns_long_format():
    dec = decompose(two_mode_jsf())
    cols = decomposition_columns(dec, 2)
    assert len(cols["mode"]) == 2 * 2 * GRID.size
    assert set(cols["band"]) == {"signal", "idler"}
