"""Schmidt (singular value) decomposition of discretized joint spectral functions.

A pulse-pumped parametric process couples signal and idler in pairs of
temporal modes, one pair per Schmidt component. This module is diagnostic: it
quantifies how close a joint spectral function is to single-mode operation.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from su11sim.exceptions import ConfigError


def trapezoid_weights(grid: np.ndarray) -> np.ndarray:
    grid = np.asarray(grid, dtype=float)
    if grid.size < 2:
        raise ConfigError("frequency grids need at least two points")
    step = np.diff(grid)
    if not np.allclose(step, step[0], rtol=1e-9, atol=0) or step[0] <= 0:
        raise ConfigError("frequency grids must be uniform and increasing")
    w = np.full(grid.size, step[0])
    w[[0, -1]] *= 0.5
    return w


@dataclass(frozen=True, eq=False)
class JointSpectralFunction:
    grid_s: np.ndarray
    grid_i: np.ndarray
    values: np.ndarray

    def __post_init__(self):
        values = np.asarray(self.values, dtype=complex)
        object.__setattr__(self, "grid_s", np.asarray(self.grid_s, dtype=float))
        object.__setattr__(self, "grid_i", np.asarray(self.grid_i, dtype=float))
        object.__setattr__(self, "values", values)
        if values.shape != (self.grid_s.size, self.grid_i.size):
            raise ConfigError(
                f"JSF shape {values.shape} does not match grids ({self.grid_s.size}, {self.grid_i.size})"
            )
        if not np.all(np.isfinite(values)):
            raise ConfigError("JSF values must be finite")
        trapezoid_weights(self.grid_s)
        trapezoid_weights(self.grid_i)

    @property
    def overall_gain(self) -> float:
        """L2 norm of F over the grid: the total gain ``K`` of the process."""
        ws, wi = trapezoid_weights(self.grid_s), trapezoid_weights(self.grid_i)
        return float(np.sqrt(np.sum(ws[:, None] * wi[None, :] * np.abs(self.values) ** 2)))


@dataclass(frozen=True, eq=False)
class SchmidtDecomposition:
    """``F(w1, w2) = k_total * sum_k r_k modes_s[:, k] modes_i[:, k]``.

    Mode columns are orthonormal under the trapezoidal quadrature weights of
    their grids, approximating L2-orthonormal continuum functions.
    """

    r: np.ndarray
    modes_s: np.ndarray
    modes_i: np.ndarray
    k_total: float
    grid_s: np.ndarray
    grid_i: np.ndarray

    @property
    def effective_mode_number(self) -> float:
        return float(1.0 / np.sum(self.r**4))

    def reconstruct(self) -> np.ndarray:
        return self.k_total * (self.modes_s * self.r) @ self.modes_i.T

    def gram_errors(self) -> tuple[float, float]:
        """Max-abs deviation of the weighted Gram matrices from identity."""
        out = []
        for modes, grid in ((self.modes_s, self.grid_s), (self.modes_i, self.grid_i)):
            w = trapezoid_weights(grid)
            gram = modes.conj().T @ (w[:, None] * modes)
            out.append(float(np.max(np.abs(gram - np.eye(gram.shape[0])))))
        return out[0], out[1]


def gaussian_jsf(
    pump_bandwidth: float,
    phasematch_bandwidth: float,
    correlation_angle: float,
    grid_s,
    grid_i,
    amplitude: float = 1.0,
) -> JointSpectralFunction:
    """Two-dimensional Gaussian JSF.

    ``F = A exp(-u^2 / 2 sigma_p^2 - v^2 / 2 sigma_pm^2)`` with ``(u, v)`` the
    frequency offsets rotated by ``correlation_angle``. At angle 0 the function
    factorizes; at ``pi/4`` the pump axis lies along ``w1 + w2`` and a narrow
    pump gives frequency anti-correlation.
    """
    if not (pump_bandwidth > 0 and phasematch_bandwidth > 0):
        raise ConfigError("JSF bandwidths must be positive")
    w1, w2 = np.meshgrid(np.asarray(grid_s, float), np.asarray(grid_i, float), indexing="ij")
    c, s = np.cos(correlation_angle), np.sin(correlation_angle)
    u = c * w1 + s * w2
    v = -s * w1 + c * w2
    values = amplitude * np.exp(-(u**2) / (2 * pump_bandwidth**2) - v**2 / (2 * phasematch_bandwidth**2))
    return JointSpectralFunction(grid_s, grid_i, values)


def decompose(jsf: JointSpectralFunction) -> SchmidtDecomposition:
    ws = np.sqrt(trapezoid_weights(jsf.grid_s))
    wi = np.sqrt(trapezoid_weights(jsf.grid_i))
    m = ws[:, None] * jsf.values * wi[None, :]
    u, sigma, vh = np.linalg.svd(m, full_matrices=False)
    k_total = float(np.sqrt(np.sum(sigma**2)))
    if k_total == 0.0:
        raise ConfigError("JSF is identically zero")
    return SchmidtDecomposition(
        r=sigma / k_total,
        modes_s=u / ws[:, None],
        modes_i=vh.T / wi[:, None],
        k_total=k_total,
        grid_s=jsf.grid_s,
        grid_i=jsf.grid_i,
    )


def pairwise_gains(dec: SchmidtDecomposition) -> np.ndarray:
    """Squeezing gain ``K r_k`` of each Schmidt mode pair."""
    return dec.k_total * dec.r


def load_jsf_csv(path, grid_s=None, grid_i=None) -> JointSpectralFunction:
    """Read a JSF matrix from CSV.

    Layout: first row ``"", w_i[0], w_i[1], ...``; every following row starts
    with ``w_s[n]`` then the values. Complex entries use Python syntax (``1+2j``).
    """
    with open(path, newline="") as fh:
        rows = [row for row in csv.reader(fh) if row and not row[0].startswith("#")]
    try:
        gi = np.array([float(x) for x in rows[0][1:]])
        gs = np.array([float(r[0]) for r in rows[1:]])
        values = np.array([[complex(x.replace(" ", "")) for x in r[1:]] for r in rows[1:]])
    except (ValueError, IndexError) as exc:
        raise ConfigError(f"{path}: malformed JSF CSV ({exc})") from None
    return JointSpectralFunction(gs, gi, values)


def save_jsf_csv(jsf: JointSpectralFunction, path) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow([""] + [repr(float(x)) for x in jsf.grid_i])
        for w, row in zip(jsf.grid_s, jsf.values):
            writer.writerow([repr(float(w))] + [_fmt_complex(v) for v in row])


def _fmt_complex(v: complex) -> str:
    v = complex(v)
    return repr(v.real) if v.imag == 0 else repr(v).strip("()")


def decomposition_columns(dec: SchmidtDecomposition, n_modes: int) -> dict:
    """Long-format columns: one row per (mode, grid point) plus the coefficients."""
    n_modes = min(n_modes, dec.r.size)
    cols = {"mode": [], "r": [], "gain": [], "band": [], "omega": [], "re": [], "im": []}
    gains = pairwise_gains(dec)
    for k in range(n_modes):
        for band, grid, modes in (("signal", dec.grid_s, dec.modes_s), ("idler", dec.grid_i, dec.modes_i)):
            for w, val in zip(grid, modes[:, k]):
                cols["mode"].append(k)
                cols["r"].append(dec.r[k])
                cols["gain"].append(gains[k])
                cols["band"].append(band)
                cols["omega"].append(w)
                cols["re"].append(val.real)
                cols["im"].append(val.imag)
    return cols
