"""Kerr-Debye type quasilinear system of nonlinear optics."""

import numpy as np

from ..core import ModelSystem

# Levi-Civita symbol
_LC = np.zeros((3, 3, 3))
for _i, _j, _k in ((0, 1, 2), (1, 2, 0), (2, 0, 1)):
    _LC[_i, _j, _k] = 1.0
    _LC[_i, _k, _j] = -1.0


class NonlinearOptics(ModelSystem):
    """``D_t - curl B = 0``, ``B_t + curl E = 0``, ``chi_t = |E|^2 - chi``, ``D = (1 + chi) E``.

    State ``(D, B, chi)`` in R^7 with ``chi > 0``. Entropy
    ``|D|^2 / (1 + chi) + |B|^2 + chi^2 / 2``; ``L = diag(0_6, 1)``.
    """

    name = "nonlinear_optics"
    has_flux_jacobian = True
    has_source_jacobian = True

    def __init__(self):
        self.n, self.d, self.r = 7, 3, 1
        box = [(-1.0, 1.0)] * 6 + [(0.1, 10.0)]
        ref = np.array([1.0, 0.0, 0.0, 0.0, 0.0, 0.0, 1.0])
        self._finalize(np.eye(7), box, ref)

    @staticmethod
    def _parts(U):
        U = np.asarray(U, dtype=float)
        return U[..., 0:3], U[..., 3:6], U[..., 6]

    def electric_field(self, U):
        D, _, chi = self._parts(U)
        return D / (1.0 + chi)[..., None]

    def flux(self, U, j=0):
        _, B, _ = self._parts(U)
        E = self.electric_field(U)
        out = np.zeros(np.shape(U))
        out[..., 0:3] = -np.einsum("ik,...k->...i", _LC[:, j, :], B)
        out[..., 3:6] = np.einsum("ik,...k->...i", _LC[:, j, :], E)
        return out

    def analytic_flux_jacobian(self, U, j=0):
        _, _, chi = self._parts(U)
        E = self.electric_field(U)
        J = np.zeros(np.shape(U)[:-1] + (7, 7))
        eps = _LC[:, j, :]
        J[..., 0:3, 3:6] = -eps
        J[..., 3:6, 0:3] = eps / (1.0 + chi)[..., None, None]
        J[..., 3:6, 6] = -np.einsum("ik,...k->...i", eps, E) / (1.0 + chi)[..., None]
        return J

    def source(self, U):
        _, _, chi = self._parts(U)
        E = self.electric_field(U)
        out = np.zeros(np.shape(U))
        out[..., 6] = np.sum(E * E, axis=-1) - chi
        return out

    def analytic_source_jacobian(self, U):
        _, _, chi = self._parts(U)
        E = self.electric_field(U)
        J = np.zeros(np.shape(U)[:-1] + (7, 7))
        J[..., 6, 0:3] = 2.0 * E / (1.0 + chi)[..., None]
        J[..., 6, 6] = -2.0 * np.sum(E * E, axis=-1) / (1.0 + chi) - 1.0
        return J

    def entropy(self, U):
        D, B, chi = self._parts(U)
        return np.sum(D * D, axis=-1) / (1.0 + chi) + np.sum(B * B, axis=-1) + 0.5 * chi**2

    def entropy_gradient(self, U):
        _, B, chi = self._parts(U)
        E = self.electric_field(U)
        g = np.empty(np.shape(U))
        g[..., 0:3] = 2.0 * E
        g[..., 3:6] = 2.0 * B
        g[..., 6] = chi - np.sum(E * E, axis=-1)
        return g

    def entropy_hessian(self, U):
        _, _, chi = self._parts(U)
        E = self.electric_field(U)
        w = 1.0 / (1.0 + chi)
        H = np.zeros(np.shape(U)[:-1] + (7, 7))
        H[..., 0:3, 0:3] = 2.0 * w[..., None, None] * np.eye(3)
        H[..., 3:6, 3:6] = 2.0 * np.eye(3)
        H[..., 0:3, 6] = -2.0 * E * w[..., None]
        H[..., 6, 0:3] = H[..., 0:3, 6]
        H[..., 6, 6] = 2.0 * np.sum(E * E, axis=-1) * w + 1.0
        return H

    def dissipation_matrix(self, U):
        L = np.zeros(np.shape(U)[:-1] + (7, 7))
        L[..., 6, 6] = 1.0
        return L

    def in_state_space(self, U):
        U = np.asarray(U, dtype=float)
        return np.all(np.isfinite(U), axis=-1) & (U[..., 6] > 0)


def nonlinear_optics():
    return NonlinearOptics()
