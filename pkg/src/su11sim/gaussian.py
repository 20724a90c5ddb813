"""Bogoliubov transforms on a pulse-train mode registry.

A transform maps the vector of input annihilation operators to the outputs,

    a_out = C a_in + S a_in^dagger,

over the physical registry modes followed by any vacuum ancilla modes that
loss and delay elements introduce. Ancillas are appended, never traced out, so
every transform stays symplectic and can be validated.

Quadratures use ``X(phi) = a exp(-i phi) + a^dagger exp(i phi)`` (vacuum variance 1).
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import reduce
from typing import Iterable, Optional, Sequence, Union

import numpy as np
import scipy.sparse as sp

from su11sim.exceptions import SymplecticError
from su11sim.modes import Band, ModeId, ModeRegistry

SYMPLECTIC_TOL = 1e-10

ModeSelection = Union[Band, ModeId, Iterable[ModeId]]


@dataclass(frozen=True, eq=False)
class BogoliubovTransform:
    """Pair of sparse complex matrices ``(c, s)`` acting on registry modes plus ancillas."""

    c: sp.csr_array
    s: sp.csr_array
    registry: ModeRegistry
    ancilla_count: int = 0

    def __post_init__(self):
        dim = len(self.registry) + self.ancilla_count
        if self.c.shape != (dim, dim) or self.s.shape != (dim, dim):
            raise ValueError(
                f"expected {dim}x{dim} matrices, got {self.c.shape} and {self.s.shape}"
            )

    @property
    def dim(self) -> int:
        return len(self.registry) + self.ancilla_count

    @property
    def n_physical(self) -> int:
        return len(self.registry)

    def __matmul__(self, other: "BogoliubovTransform") -> "BogoliubovTransform":
        return compose(self, other)

    def symplectic_residuals(self) -> tuple[float, float]:
        """Max-abs residuals of ``C C^H - S S^H - I`` and ``C S^T - S C^T``."""
        c, s = self.c, self.s
        eye = sp.identity(self.dim, dtype=complex, format="csr")
        r1 = c @ c.conj().T - s @ s.conj().T - eye
        r2 = c @ s.T - s @ c.T
        return _max_abs(r1), _max_abs(r2)

    def is_symplectic(self, tol: float = SYMPLECTIC_TOL) -> bool:
        r1, r2 = self.symplectic_residuals()
        return r1 <= tol and r2 <= tol

    def validate(self, tol: float = SYMPLECTIC_TOL) -> "BogoliubovTransform":
        r1, r2 = self.symplectic_residuals()
        if r1 > tol or r2 > tol:
            raise SymplecticError(
                f"transform violates symplectic conditions: |CC^H-SS^H-I|={r1:.3e}, "
                f"|CS^T-SC^T|={r2:.3e} (tol {tol:g})"
            )
        return self

    def dense(self) -> tuple[np.ndarray, np.ndarray]:
        return self.c.toarray(), self.s.toarray()


def _max_abs(m) -> float:
    m = sp.csr_array(m)
    return float(np.abs(m.data).max()) if m.nnz else 0.0


def _csr(m) -> sp.csr_array:
    return sp.csr_array(m, dtype=complex)


def _resolve(selection: ModeSelection, registry: ModeRegistry) -> list[int]:
    if isinstance(selection, Band):
        return list(registry.band_indices(selection))
    if isinstance(selection, ModeId):
        return [registry.index(selection)]
    indices = [registry.index(m) for m in selection]
    if len(set(indices)) != len(indices):
        raise ValueError("mode selection contains duplicates")
    return indices


def identity(registry: ModeRegistry) -> BogoliubovTransform:
    n = len(registry)
    return BogoliubovTransform(
        _csr(sp.identity(n, dtype=complex)), _csr((n, n)), registry
    )


def pulse_pairs(registry: ModeRegistry) -> list[tuple[ModeId, ModeId]]:
    """Same-pulse (signal, idler) pairs: the coupling of a pulse-pumped amplifier."""
    return [
        (ModeId(Band.SIGNAL, j), ModeId(Band.IDLER, j)) for j in range(registry.n_pulses)
    ]


def squeezer(
    pairing: Sequence[tuple[ModeId, ModeId]], k: float, registry: ModeRegistry
) -> BogoliubovTransform:
    """Two-mode squeezer: ``a_out = a cosh k + b^dagger sinh k`` for every pair ``(a, b)``."""
    k = float(k)
    if not np.isfinite(k):
        raise ValueError(f"gain must be finite, got {k}")
    n = len(registry)
    seen = set()
    rows, cols = [], []
    for a, b in pairing:
        ia, ib = registry.index(a), registry.index(b)
        if ia in seen or ib in seen or ia == ib:
            raise ValueError(f"mode appears twice in squeezer pairing: {a}, {b}")
        seen.update((ia, ib))
        rows += [ia, ib]
        cols += [ib, ia]
    diag = np.ones(n, dtype=complex)
    idx = np.fromiter(seen, dtype=int, count=len(seen))
    diag[idx] = np.cosh(k)
    c = _csr(sp.diags_array(diag))
    s = _csr(
        sp.coo_array((np.full(len(rows), np.sinh(k), dtype=complex), (rows, cols)), shape=(n, n))
    )
    return BogoliubovTransform(c, s, registry)


def phase_shift(selection: ModeSelection, phi: float, registry: ModeRegistry) -> BogoliubovTransform:
    n = len(registry)
    diag = np.ones(n, dtype=complex)
    diag[_resolve(selection, registry)] = np.exp(1j * phi)
    return BogoliubovTransform(_csr(sp.diags_array(diag)), _csr((n, n)), registry)


def delay(band: Band, d: int, theta: float, registry: ModeRegistry) -> BogoliubovTransform:
    """Delay one band by ``d`` pulse slots and shift its phase by ``theta``.

    Output ``(band, j)`` receives ``exp(i theta) * (band, j - d)``. Slots vacated at
    the window edge are fed by fresh vacuum ancillas; modes pushed out of the
    window are routed to those same ancillas.
    """
    n_pulses = registry.n_pulses
    d = int(d)
    if abs(d) >= n_pulses:
        raise ValueError(f"|d|={abs(d)} must be smaller than n_pulses={n_pulses}")
    if d == 0:
        return phase_shift(band, theta, registry)
    n = len(registry)
    nd = abs(d)
    dim = n + nd
    offset = registry.band_indices(band).start
    phase = np.exp(1j * theta)

    rows = [i for i in range(n) if not offset <= i < offset + n_pulses]
    cols = list(rows)
    vals = [1.0 + 0j] * len(rows)
    for j in range(n_pulses):
        src = j - d
        if 0 <= src < n_pulses:
            rows.append(offset + j)
            cols.append(offset + src)
            vals.append(phase)
    vacated = range(d) if d > 0 else range(n_pulses - nd, n_pulses)
    evicted = range(n_pulses - nd, n_pulses) if d > 0 else range(nd)
    for k, (j_in, j_out) in enumerate(zip(vacated, evicted)):
        rows += [offset + j_in, n + k]
        cols += [n + k, offset + j_out]
        vals += [1.0 + 0j, 1.0 + 0j]
    c = _csr(sp.coo_array((vals, (rows, cols)), shape=(dim, dim)))
    return BogoliubovTransform(c, _csr((dim, dim)), registry, ancilla_count=nd)


def loss(selection: ModeSelection, eta: float, registry: ModeRegistry) -> BogoliubovTransform:
    """Beamsplitter of transmissivity ``eta`` coupling each selected mode to a vacuum ancilla."""
    eta = float(eta)
    if not 0.0 <= eta <= 1.0:
        raise ValueError(f"transmissivity must lie in [0, 1], got {eta}")
    if eta == 1.0:
        return identity(registry)
    indices = _resolve(selection, registry)
    n = len(registry)
    na = len(indices)
    dim = n + na
    t, r = np.sqrt(eta), np.sqrt(1.0 - eta)
    lossy = set(indices)
    rows = [i for i in range(n) if i not in lossy]
    cols = list(rows)
    vals = [1.0 + 0j] * len(rows)
    for k, i in enumerate(indices):
        anc = n + k
        rows += [i, i, anc, anc]
        cols += [i, anc, anc, i]
        vals += [t, r, t, -r]
    c = _csr(sp.coo_array((vals, (rows, cols)), shape=(dim, dim)))
    return BogoliubovTransform(c, _csr((dim, dim)), registry, ancilla_count=na)


def _embed(t: BogoliubovTransform, total_ancillas: int, offset: int):
    """Matrices of ``t`` on a space with ``total_ancillas``, its own ancillas placed at ``offset``."""
    n = t.n_physical
    dim = n + total_ancillas
    if t.ancilla_count == total_ancillas and offset == 0:
        return t.c, t.s
    # index map from t's local space into the enlarged one
    local_to_global = np.concatenate(
        [np.arange(n), n + offset + np.arange(t.ancilla_count)]
    ).astype(int)
    others = np.setdiff1d(np.arange(dim), local_to_global)

    def lift(m, with_identity):
        coo = m.tocoo()
        rows = local_to_global[coo.row]
        cols = local_to_global[coo.col]
        vals = coo.data
        if with_identity:
            rows = np.concatenate([rows, others])
            cols = np.concatenate([cols, others])
            vals = np.concatenate([vals, np.ones(len(others), dtype=complex)])
        return _csr(sp.coo_array((vals, (rows, cols)), shape=(dim, dim)))

    return lift(t.c, True), lift(t.s, False)


def compose(t2: BogoliubovTransform, t1: BogoliubovTransform) -> BogoliubovTransform:
    """Apply ``t1`` then ``t2``; ancillas of ``t2`` are appended after those of ``t1``."""
    if t1.registry.n_pulses != t2.registry.n_pulses:
        raise ValueError(
            f"registry mismatch: {t1.registry.n_pulses} vs {t2.registry.n_pulses} pulses"
        )
    total = t1.ancilla_count + t2.ancilla_count
    c1, s1 = _embed(t1, total, 0)
    c2, s2 = _embed(t2, total, t1.ancilla_count)
    c = c2 @ c1 + s2 @ s1.conj()
    s = c2 @ s1 + s2 @ c1.conj()
    c.eliminate_zeros()
    s.eliminate_zeros()
    return BogoliubovTransform(_csr(c), _csr(s), t1.registry, total)


def chain(*transforms: BogoliubovTransform) -> BogoliubovTransform:
    """Compose in application order: ``chain(a, b, c)`` applies ``a`` first."""
    if not transforms:
        raise ValueError("chain needs at least one transform")
    return reduce(lambda acc, t: compose(t, acc), transforms[1:], transforms[0])


def _row_indices(t: BogoliubovTransform, modes) -> np.ndarray:
    if modes is None:
        return np.arange(t.n_physical)
    return np.array(
        [t.registry.index(m) if isinstance(m, ModeId) else int(m) for m in modes], dtype=int
    )


def mean_photon_number(t: BogoliubovTransform, m: ModeId) -> float:
    """Vacuum expectation of the output number operator: ``sum_k |S_mk|^2``."""
    row = t.s[[t.registry.index(m)], :]
    return float(np.sum(np.abs(row.data) ** 2))


def mean_photon_numbers(t: BogoliubovTransform, modes=None) -> np.ndarray:
    rows = _row_indices(t, modes)
    s = t.s[rows, :]
    return np.asarray(abs(s).power(2).sum(axis=1)).ravel()


def quadrature_rows(t: BogoliubovTransform, phases, modes=None) -> np.ndarray:
    """Coefficients ``alpha`` with ``X_m(phi_m) = sum_k alpha_mk a_k + h.c.`` (dense rows).

    ``phases`` is a scalar or one phase per selected mode.
    """
    rows = _row_indices(t, modes)
    phases = np.broadcast_to(np.asarray(phases, dtype=float), rows.shape)
    c = t.c[rows, :].toarray()
    s = t.s[rows, :].toarray()
    return np.exp(-1j * phases)[:, None] * c + np.exp(1j * phases)[:, None] * s.conj()


def quadrature_covariance(t: BogoliubovTransform, phases=0.0, modes=None) -> np.ndarray:
    """Symmetrized vacuum covariance of the output quadratures ``X_m(phi_m)``.

    Restricted to physical modes unless ``modes`` (ModeIds or dense indices) is given.
    """
    alpha = quadrature_rows(t, phases, modes)
    return np.real(alpha @ alpha.conj().T)
