"""Truncated Fock-space two-mode squeezer, used as an independent oracle."""

import numpy as np
import scipy.sparse as sp
from scipy.sparse.linalg import expm_multiply


class TwoModeFock:
    def __init__(self, k, dim=50):
        a = sp.diags_array(np.sqrt(np.arange(1, dim, dtype=float)), offsets=1, format="csr")
        eye = sp.identity(dim, format="csr")
        self.a = sp.kron(a, eye, format="csr")
        self.b = sp.kron(eye, a, format="csr")
        # U = exp(k (a^dag b^dag - a b)) so that U^dag a U = a cosh k + b^dag sinh k
        gen = k * (self.a.T @ self.b.T - self.a @ self.b)
        vac = np.zeros(dim * dim)
        vac[0] = 1.0
        self.psi = expm_multiply(gen, vac).astype(complex)

    def expect(self, op):
        return complex(np.vdot(self.psi, op @ self.psi))

    def mean_photons(self, mode="a"):
        m = self.a if mode == "a" else self.b
        return self.expect(m.T @ m).real

    def quadrature(self, mode="a", phi=0.0):
        m = self.a if mode == "a" else self.b
        return np.exp(-1j * phi) * m + np.exp(1j * phi) * m.T

    def variance(self, op):
        mean = self.expect(op)
        return (self.expect(op @ op) - mean**2).real
