"""Euler equations of gas dynamics with linear momentum damping."""

from dataclasses import dataclass

import numpy as np

from ..core import ModelSystem
from ..errors import InvalidPressureLaw


@dataclass(frozen=True)
class PressureLaw:
    """Barotropic pressure ``p(rho)``.

    ``isothermal``: ``p = scale * rho``; ``gamma-law``: ``p = scale * rho**gamma``.
    """

    kind: str = "isothermal"
    gamma: float = 1.0
    scale: float = 1.0

    def __post_init__(self):
        if self.kind not in ("isothermal", "gamma-law"):
            raise InvalidPressureLaw(f"unknown pressure law kind {self.kind!r}")
        if self.kind == "gamma-law" and not self.gamma > 1.0:
            raise InvalidPressureLaw("gamma-law requires gamma > 1")
        if not self.gamma >= 1.0:
            raise InvalidPressureLaw("gamma must be >= 1")

    def p(self, rho):
        if self.kind == "isothermal":
            return self.scale * rho
        return self.scale * rho**self.gamma

    def dp(self, rho):
        if self.kind == "isothermal":
            return self.scale * np.ones_like(rho)
        return self.scale * self.gamma * rho ** (self.gamma - 1.0)

    def potential(self, rho):
        """Double integral of ``p'(s)/s``, integration constants set to zero."""
        if self.kind == "isothermal":
            return self.scale * (rho * np.log(rho) - rho)
        return self.scale * rho**self.gamma / (self.gamma - 1.0)

    def dpotential(self, rho):
        if self.kind == "isothermal":
            return self.scale * np.log(rho)
        return self.scale * self.gamma * rho ** (self.gamma - 1.0) / (self.gamma - 1.0)


class EulerDamping(ModelSystem):
    """``rho_t + div(m) = 0``, ``m_t + div(m m / rho) + grad p = -m``.

    State ``U = (rho, m_1..m_d)``. Entropy ``|m|^2/(2 rho) + Phi(rho)`` where
    ``Phi'' = p'/rho``; for the isothermal law ``Phi = rho ln rho - rho``.
    Dissipation ``L = diag(0, rho I_d)``, ``P = I``.
    """

    name = "euler_damping"
    has_flux_jacobian = True
    has_source_jacobian = True

    def __init__(self, d=1, law=None):
        if d not in (1, 2, 3):
            raise ValueError("d must be 1, 2 or 3")
        self.law = law if law is not None else PressureLaw()
        self.n, self.d, self.r = d + 1, d, d
        box = [(0.5, 2.0)] + [(-1.0, 1.0)] * d
        rho = np.linspace(box[0][0], box[0][1], 101)
        if not np.all(self.law.dp(rho) > 0):
            raise InvalidPressureLaw("p'(rho) must be positive on the sampled range")
        ref = np.r_[1.0, np.full(d, 0.5)]
        params = {"d": d, "law": {"kind": self.law.kind, "gamma": self.law.gamma,
                                  "scale": self.law.scale}}
        self._finalize(np.eye(self.n), box, ref, params)

    def _split(self, U):
        U = np.asarray(U, dtype=float)
        return U[..., 0], U[..., 1:]

    def flux(self, U, j=0):
        rho, m = self._split(U)
        out = np.empty(np.shape(U))
        out[..., 0] = m[..., j]
        out[..., 1:] = m * (m[..., j] / rho)[..., None]
        out[..., 1 + j] += self.law.p(rho)
        return out

    def analytic_flux_jacobian(self, U, j=0):
        rho, m = self._split(U)
        d = self.d
        vel = m / rho[..., None]
        J = np.zeros(np.shape(U)[:-1] + (self.n, self.n))
        J[..., 0, 1 + j] = 1.0
        J[..., 1:, 0] = -vel * vel[..., j, None]
        J[..., 1 + j, 0] += self.law.dp(rho)
        J[..., 1:, 1:] = vel[..., j, None, None] * np.eye(d)
        J[..., 1:, 1 + j] += vel
        return J

    def max_wave_speed(self, U, j=0):
        rho, m = self._split(U)
        return np.abs(m[..., j] / rho) + np.sqrt(self.law.dp(rho))

    def source(self, U):
        out = np.zeros(np.shape(U))
        out[..., 1:] = -np.asarray(U)[..., 1:]
        return out

    def analytic_source_jacobian(self, U):
        J = np.zeros(np.shape(U)[:-1] + (self.n, self.n))
        J[..., 1:, 1:] = -np.eye(self.d)
        return J

    def entropy(self, U):
        rho, m = self._split(U)
        return 0.5 * np.sum(m * m, axis=-1) / rho + self.law.potential(rho)

    def entropy_gradient(self, U):
        rho, m = self._split(U)
        g = np.empty(np.shape(U))
        g[..., 0] = -0.5 * np.sum(m * m, axis=-1) / rho**2 + self.law.dpotential(rho)
        g[..., 1:] = m / rho[..., None]
        return g

    def entropy_hessian(self, U):
        rho, m = self._split(U)
        H = np.zeros(np.shape(U)[:-1] + (self.n, self.n))
        H[..., 0, 0] = np.sum(m * m, axis=-1) / rho**3 + self.law.dp(rho) / rho
        H[..., 0, 1:] = -m / rho[..., None] ** 2
        H[..., 1:, 0] = H[..., 0, 1:]
        H[..., 1:, 1:] = np.eye(self.d) / rho[..., None, None]
        return H

    def dissipation_matrix(self, U):
        rho, _ = self._split(U)
        L = np.zeros(np.shape(U)[:-1] + (self.n, self.n))
        L[..., 1:, 1:] = rho[..., None, None] * np.eye(self.d)
        return L

    def in_state_space(self, U):
        U = np.asarray(U, dtype=float)
        return np.all(np.isfinite(U), axis=-1) & (U[..., 0] > 0)


def euler_damping(d=1, law=None):
    return EulerDamping(d=d, law=law)
