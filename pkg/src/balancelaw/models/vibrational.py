"""Lagrangian gas dynamics with one vibrational relaxation mode."""

import numpy as np

from ..core import ModelSystem


class VibrationalGas(ModelSystem):
    """``nu_t - u_x = 0``, ``u_t + p_x = 0``, ``E_t + (p u)_x = 0``, ``q_t = w(T1) - w(T2)``.

    Two-temperature ideal gas closure: ``e = c_v T1 + q``, ``q = c_r T2``,
    ``p = R T1 / nu`` and linear exchange ``w(T) = a T``. The entropy is the
    negative of ``S = c_v ln T1 + R ln nu + c_r ln T2``, which gives
    ``eta_q = 1/T1 - 1/T2`` and ``L = a T1 T2 diag(0, 0, 0, 1)``.

    Samples are drawn in ``(nu, u, T1, T2)``.
    """

    name = "vibrational_gas"
    has_flux_jacobian = True
    has_source_jacobian = True

    def __init__(self, c_v=1.5, c_r=1.0, R=1.0, a=1.0):
        if min(c_v, c_r, R, a) <= 0:
            raise ValueError("c_v, c_r, R and a must be positive")
        self.c_v, self.c_r, self.R, self.a = float(c_v), float(c_r), float(R), float(a)
        self.n, self.d, self.r = 4, 1, 1
        box = [(0.5, 2.0), (-1.0, 1.0), (0.5, 2.0), (0.5, 2.0)]
        ref = self.from_sample([1.0, 0.0, 1.0, 1.5])
        self._finalize(np.eye(4), box, ref,
                       {"c_v": self.c_v, "c_r": self.c_r, "R": self.R, "a": self.a})

    def from_sample(self, X):
        X = np.asarray(X, dtype=float)
        nu, u, T1, T2 = X[..., 0], X[..., 1], X[..., 2], X[..., 3]
        q = self.c_r * T2
        return np.stack([nu, u, self.c_v * T1 + q + 0.5 * u * u, q], axis=-1)

    def temperatures(self, U):
        U = np.asarray(U, dtype=float)
        u, E, q = U[..., 1], U[..., 2], U[..., 3]
        return (E - 0.5 * u * u - q) / self.c_v, q / self.c_r

    def pressure(self, U):
        T1, _ = self.temperatures(U)
        return self.R * T1 / np.asarray(U)[..., 0]

    def flux(self, U, j=0):
        U = np.asarray(U, dtype=float)
        u = U[..., 1]
        p = self.pressure(U)
        return np.stack([-u, p, p * u, np.zeros_like(u)], axis=-1)

    def _grad_p(self, U):
        U = np.asarray(U, dtype=float)
        nu, u = U[..., 0], U[..., 1]
        p = self.pressure(U)
        k = self.R / (nu * self.c_v)
        return np.stack([-p / nu, -k * u, k, -k], axis=-1)

    def analytic_flux_jacobian(self, U, j=0):
        U = np.asarray(U, dtype=float)
        u = U[..., 1]
        p = self.pressure(U)
        gp = self._grad_p(U)
        J = np.zeros(np.shape(U)[:-1] + (4, 4))
        J[..., 0, 1] = -1.0
        J[..., 1, :] = gp
        J[..., 2, :] = u[..., None] * gp
        J[..., 2, 1] += p
        return J

    def source(self, U):
        T1, T2 = self.temperatures(U)
        out = np.zeros(np.shape(U))
        out[..., 3] = self.a * (T1 - T2)
        return out

    def analytic_source_jacobian(self, U):
        U = np.asarray(U, dtype=float)
        u = U[..., 1]
        J = np.zeros(np.shape(U)[:-1] + (4, 4))
        J[..., 3, 1] = -self.a * u / self.c_v
        J[..., 3, 2] = self.a / self.c_v
        J[..., 3, 3] = -self.a / self.c_v - self.a / self.c_r
        return J

    def entropy(self, U):
        U = np.asarray(U, dtype=float)
        T1, T2 = self.temperatures(U)
        return -(self.c_v * np.log(T1) + self.R * np.log(U[..., 0]) + self.c_r * np.log(T2))

    def entropy_gradient(self, U):
        U = np.asarray(U, dtype=float)
        T1, T2 = self.temperatures(U)
        return np.stack(
            [-self.R / U[..., 0], U[..., 1] / T1, -1.0 / T1, 1.0 / T1 - 1.0 / T2], axis=-1
        )

    def entropy_hessian(self, U):
        U = np.asarray(U, dtype=float)
        nu, u, q = U[..., 0], U[..., 1], U[..., 3]
        w = self.c_v * self.temperatures(U)[0]
        dw = np.stack([np.zeros_like(u), -u, np.ones_like(u), -np.ones_like(u)], axis=-1)
        H = self.c_v * dw[..., :, None] * dw[..., None, :] / (w * w)[..., None, None]
        H[..., 1, 1] += self.c_v / w
        H[..., 0, 0] += self.R / nu**2
        H[..., 3, 3] += self.c_r / q**2
        return H

    def dissipation_matrix(self, U):
        T1, T2 = self.temperatures(U)
        L = np.zeros(np.shape(U)[:-1] + (4, 4))
        L[..., 3, 3] = self.a * T1 * T2
        return L

    def in_state_space(self, U):
        U = np.asarray(U, dtype=float)
        with np.errstate(invalid="ignore"):
            T1, T2 = self.temperatures(U)
            return (np.all(np.isfinite(U), axis=-1) & (U[..., 0] > 0) & (T1 > 0) & (T2 > 0))


def vibrational_gas(c_v=1.5, c_r=1.0, R=1.0, a=1.0):
    return VibrationalGas(c_v=c_v, c_r=c_r, R=R, a=a)
