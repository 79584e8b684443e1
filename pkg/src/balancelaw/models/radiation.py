"""Discrete-ordinate radiation hydrodynamics (Euler + L transport equations)."""

import numpy as np

from ..core import ModelSystem


def default_directions(L):
    """Unit vectors whose x-components are the Gauss-Legendre nodes of order L."""
    if L == 2:
        return np.array([[1.0, 0.0, 0.0], [-1.0, 0.0, 0.0]])
    mu, _ = np.polynomial.legendre.leggauss(L)
    return np.stack([mu, np.sqrt(1.0 - mu * mu), np.zeros(L)], axis=-1)


class RadiationHydro(ModelSystem):
    """Euler equations coupled to ``L`` discrete-ordinate intensities.

    State ``(rho, rho v, rho E, I_1..I_L)``. Ideal gas ``e = c_v T``,
    ``p = (gamma - 1) rho e``; Planck function ``B(T) = a T^4`` with inverse
    ``b(y) = (y / a)^(1/4)``. Entropy
    ``-rho s(rho, e) - C sum_l int_{B(T0)}^{I_l} dy / b(y)`` with
    ``s = c_v ln T - R ln rho`` (``R = (gamma - 1) c_v``).

    The coupling weights ``sigma_l = (I_l - B(T)) / (1/T - 1/b(I_l))`` are
    evaluated in the factored form ``a T b_l (b_l + T)(b_l^2 + T^2)``, which
    is exact for the quartic Planck law and has no 0/0 at ``I_l = B(T)``.

    Samples are drawn in ``(rho, v, T, T_rad_1..T_rad_L)`` with ``I_l = B(T_rad_l)``.
    """

    name = "radiation_hydro"
    has_source_jacobian = False

    def __init__(self, L=2, directions=None, C=1.0, a_rad=1.0, gamma=1.4, c_v=1.0, theta0=0.1):
        if L < 1 or C <= 0 or a_rad <= 0 or theta0 <= 0 or gamma <= 1 or c_v <= 0:
            raise ValueError("invalid radiation hydrodynamics parameters")
        mu = default_directions(L) if directions is None else np.asarray(directions, dtype=float)
        if mu.shape != (L, 3) or not np.allclose(np.linalg.norm(mu, axis=1), 1.0, atol=1e-12):
            raise ValueError("directions must be L unit vectors in R^3")
        self.L, self.mu = L, mu
        self.C, self.a_rad, self.gamma, self.c_v, self.theta0 = C, a_rad, gamma, c_v, theta0
        self.R = (gamma - 1.0) * c_v
        self.n, self.d, self.r = L + 5, 3, L
        P = np.eye(self.n)
        P[4, 5:] = C
        box = [(0.5, 2.0)] + [(-1.0, 1.0)] * 3 + [(0.5, 2.0)] * (L + 1)
        ref = self.from_sample(np.r_[1.0, 0.2, 0.0, 0.0, 1.0, np.full(L, 1.2)])
        params = {"L": L, "directions": mu.tolist(), "C": C, "a_rad": a_rad,
                  "gamma": gamma, "c_v": c_v, "theta0": theta0}
        self._finalize(P, box, ref, params)

    def planck(self, T):
        return self.a_rad * np.asarray(T) ** 4

    def planck_inverse(self, y):
        return (np.asarray(y) / self.a_rad) ** 0.25

    def from_sample(self, X):
        X = np.asarray(X, dtype=float)
        rho, v, T = X[..., 0], X[..., 1:4], X[..., 4]
        e = self.c_v * T
        rhoE = rho * (e + 0.5 * np.sum(v * v, axis=-1))
        return np.concatenate(
            [rho[..., None], rho[..., None] * v, rhoE[..., None], self.planck(X[..., 5:])], axis=-1
        )

    def primitives(self, U):
        """Return ``rho, v, T, I`` for a state batch."""
        U = np.asarray(U, dtype=float)
        rho = U[..., 0]
        v = U[..., 1:4] / rho[..., None]
        e = U[..., 4] / rho - 0.5 * np.sum(v * v, axis=-1)
        return rho, v, e / self.c_v, U[..., 5:]

    def sigma(self, U):
        _, _, T, I = self.primitives(U)
        b = self.planck_inverse(I)
        T = T[..., None]
        return self.a_rad * T * b * (b + T) * (b * b + T * T)

    def sigma_quotient(self, U):
        """Literal quotient form of ``sigma_l`` (undefined at equilibrium)."""
        _, _, T, I = self.primitives(U)
        T = T[..., None]
        return (I - self.planck(T)) / (1.0 / T - 1.0 / self.planck_inverse(I))

    def flux(self, U, j=0):
        U = np.asarray(U, dtype=float)
        rho, v, T, I = self.primitives(U)
        p = rho * self.R * T
        vj = v[..., j]
        out = np.empty(np.shape(U))
        out[..., 0] = U[..., 1 + j]
        out[..., 1:4] = U[..., 1:4] * vj[..., None]
        out[..., 1 + j] += p
        out[..., 4] = (U[..., 4] + p) * vj
        out[..., 5:] = self.mu[:, j] * I
        return out

    def max_wave_speed(self, U, j=0):
        _, v, T, _ = self.primitives(U)
        c = np.sqrt(self.gamma * self.R * T)
        return np.maximum(np.abs(v[..., j]) + c, np.max(np.abs(self.mu[:, j])))

    def source(self, U):
        rho, _, T, I = self.primitives(U)
        defect = I - self.planck(T)[..., None]
        out = np.zeros(np.shape(U))
        out[..., 4] = self.C * rho * np.sum(defect, axis=-1)
        out[..., 5:] = -rho[..., None] * defect
        return out

    def _gas_entropy_density(self, rho, T):
        return rho * (self.c_v * np.log(T) - self.R * np.log(rho))

    def entropy(self, U):
        rho, _, T, I = self.primitives(U)
        k = self.C * self.a_rad**0.25 * 4.0 / 3.0
        B0 = self.planck(self.theta0)
        rad = k * np.sum(I**0.75 - B0**0.75, axis=-1)
        return -self._gas_entropy_density(rho, T) - rad

    def entropy_gradient(self, U):
        rho, v, T, I = self.primitives(U)
        e = self.c_v * T
        s = self.c_v * np.log(T) - self.R * np.log(rho)
        vv = np.sum(v * v, axis=-1)
        g = np.empty(np.shape(U))
        g[..., 0] = (e + self.R * T - T * s - 0.5 * vv) / T
        g[..., 1:4] = v / T[..., None]
        g[..., 4] = -1.0 / T
        g[..., 5:] = -self.C / self.planck_inverse(I)
        return g

    def entropy_hessian(self, U):
        rho, v, T, I = self.primitives(U)
        e = self.c_v * T
        shape = np.shape(U)[:-1]
        # d(rho, v, T)/dU for the gas block, then J^T diag(R/rho, rho/T, rho c_v/T^2) J
        J = np.zeros(shape + (5, 5))
        J[..., 0, 0] = 1.0
        J[..., 1:4, 0] = -v / rho[..., None]
        J[..., 1:4, 1:4] = np.eye(3) / rho[..., None, None]
        J[..., 4, 0] = (0.5 * np.sum(v * v, axis=-1) - e) / (rho * self.c_v)
        J[..., 4, 1:4] = -v / (rho * self.c_v)[..., None]
        J[..., 4, 4] = 1.0 / (rho * self.c_v)
        w = np.stack([self.R / rho, rho / T, rho / T, rho / T, rho * self.c_v / T**2], axis=-1)
        H = np.zeros(shape + (self.n, self.n))
        H[..., :5, :5] = np.einsum("...ki,...k,...kj->...ij", J, w, J)
        b = self.planck_inverse(I)
        idx = np.arange(5, self.n)
        H[..., idx, idx] = self.C / (4.0 * I * b)
        return H

    def dissipation_matrix(self, U):
        rho = np.asarray(U, dtype=float)[..., 0]
        sig = self.sigma(U)
        L = np.zeros(np.shape(U)[:-1] + (self.n, self.n))
        L[..., 4, 4] = self.C * np.sum(sig, axis=-1)
        L[..., 4, 5:] = -sig
        L[..., 5:, 4] = -sig
        idx = np.arange(5, self.n)
        L[..., idx, idx] = sig / self.C
        return rho[..., None, None] * L

    def in_state_space(self, U):
        U = np.asarray(U, dtype=float)
        with np.errstate(invalid="ignore", divide="ignore"):
            rho, _, T, I = self.primitives(U)
            return (np.all(np.isfinite(U), axis=-1) & (rho > 0) & (T > self.theta0)
                    & np.all(I > self.planck(self.theta0), axis=-1))


def radiation_hydro(L=2, directions=None, C=1.0, a_rad=1.0, gamma=1.4, c_v=1.0, theta0=0.1):
    return RadiationHydro(L=L, directions=directions, C=C, a_rad=a_rad, gamma=gamma, c_v=c_v,
                          theta0=theta0)
