"""Isothermal viscoelastic material in Lagrangian coordinates."""

import numpy as np

from ..core import ModelSystem
from ..errors import NoConvergence, SubcharacteristicViolation


class StressLaw:
    """Equilibrium stress ``g(nu)`` with derivative and antiderivative.

    ``g_int`` is any antiderivative of ``g``; it is only used to evaluate the
    entropy for non-linear laws.
    """

    def __init__(self, g, dg, g_int, label="custom", slope=None):
        self.g, self.dg, self.g_int = g, dg, g_int
        self.label = label
        self.slope = slope

    @classmethod
    def linear(cls, slope):
        return cls(lambda nu: slope * nu, lambda nu: slope + 0.0 * nu,
                   lambda nu: 0.5 * slope * nu * nu, label="linear", slope=slope)

    @classmethod
    def tanh(cls, E, base=0.5, bump=0.2):
        """``g = E (base nu + bump tanh nu)``; subcharacteristic iff ``0 < base`` and ``base + bump < 1``."""
        return cls(
            lambda nu: E * (base * nu + bump * np.tanh(nu)),
            lambda nu: E * (base + bump / np.cosh(nu) ** 2),
            lambda nu: E * (0.5 * base * nu * nu + bump * np.log(np.cosh(nu))),
            label="tanh",
        )


class Viscoelastic(ModelSystem):
    """``nu_t - u_x = 0``, ``u_t + p_x = 0``, ``(p + E nu)_t = -p - g(nu)``.

    The stored third component is ``w = p + E nu``. With ``h(nu) = g(nu) - E nu``
    the entropy is ``u^2/2 + E nu^2/2 - w nu - H(-w)`` where
    ``H(y) = int_0^y h^{-1}``, so ``eta_w = h^{-1}(-w) - nu``. The dissipation
    coefficient ``L_33 = (p + g(nu)) / (h^{-1}(-w) - nu)`` equals ``E`` minus
    the divided difference of ``g`` between ``nu`` and ``h^{-1}(-w)``, which
    removes the 0/0 at equilibrium.

    Samples are drawn in ``(nu, u, p)``.
    """

    name = "viscoelastic"
    has_flux_jacobian = True
    has_source_jacobian = True

    def __init__(self, E=1.0, law=None):
        if E <= 0:
            raise ValueError("E must be positive")
        self.E = float(E)
        self.law = law if law is not None else StressLaw.linear(0.5 * self.E)
        self.n, self.d, self.r = 3, 1, 1
        box = [(0.5, 2.0), (-1.0, 1.0), (-2.0, 1.0)]
        nu = np.linspace(0.25, 4.0, 400)
        slope = self.law.dg(nu)
        if not np.all((slope > 0) & (slope < self.E)):
            raise SubcharacteristicViolation("need 0 < g'(nu) < E on the sampled range")
        ref = self.from_sample([1.0, 0.0, 0.0])
        self._finalize(np.eye(3), box, ref, {"E": self.E, "g": self.law.label})

    def from_sample(self, X):
        X = np.asarray(X, dtype=float)
        nu, u, p = X[..., 0], X[..., 1], X[..., 2]
        return np.stack([nu, u, p + self.E * nu], axis=-1)

    def h(self, nu):
        return self.law.g(nu) - self.E * nu

    def h_inv(self, y):
        y = np.asarray(y, dtype=float)
        if self.law.slope is not None:
            return y / (self.law.slope - self.E)
        nu = -y / self.E
        for _ in range(60):
            step = (self.h(nu) - y) / (self.law.dg(nu) - self.E)
            nu = nu - step
            if np.all(np.abs(step) <= 1e-15 * (1.0 + np.abs(nu))):
                return nu
        raise NoConvergence("inverse of h(nu) = g(nu) - E nu did not converge")

    def h_inv_integral(self, y):
        """``int_0^y h^{-1}(s) ds`` via integration by parts on the inverse."""
        y = np.asarray(y, dtype=float)
        if self.law.slope is not None:
            return 0.5 * y * y / (self.law.slope - self.E)
        t1 = self.h_inv(y)
        t0 = self.h_inv(np.zeros_like(y))
        Hint = lambda t: self.law.g_int(t) - 0.5 * self.E * t * t  # noqa: E731
        return t1 * y - (Hint(t1) - Hint(t0))

    @staticmethod
    def _parts(U):
        U = np.asarray(U, dtype=float)
        return U[..., 0], U[..., 1], U[..., 2]

    def pressure(self, U):
        nu, _, w = self._parts(U)
        return w - self.E * nu

    def flux(self, U, j=0):
        nu, u, w = self._parts(U)
        return np.stack([-u, w - self.E * nu, np.zeros_like(u)], axis=-1)

    def analytic_flux_jacobian(self, U, j=0):
        J = np.zeros(np.shape(U)[:-1] + (3, 3))
        J[..., 0, 1] = -1.0
        J[..., 1, 0] = -self.E
        J[..., 1, 2] = 1.0
        return J

    def source(self, U):
        nu, _, _ = self._parts(U)
        out = np.zeros(np.shape(U))
        out[..., 2] = -self.pressure(U) - self.law.g(nu)
        return out

    def analytic_source_jacobian(self, U):
        nu, _, _ = self._parts(U)
        J = np.zeros(np.shape(U)[:-1] + (3, 3))
        J[..., 2, 0] = self.E - self.law.dg(nu)
        J[..., 2, 2] = -1.0
        return J

    def entropy(self, U):
        nu, u, w = self._parts(U)
        return 0.5 * u * u + 0.5 * self.E * nu * nu - w * nu - self.h_inv_integral(-w)

    def entropy_gradient(self, U):
        nu, u, w = self._parts(U)
        return np.stack([self.E * nu - w, u, self.h_inv(-w) - nu], axis=-1)

    def entropy_hessian(self, U):
        nu, _, w = self._parts(U)
        nu1 = self.h_inv(-w)
        H = np.zeros(np.shape(U)[:-1] + (3, 3))
        H[..., 0, 0] = self.E
        H[..., 1, 1] = 1.0
        H[..., 0, 2] = H[..., 2, 0] = -1.0
        H[..., 2, 2] = 1.0 / (self.E - self.law.dg(nu1))
        return H

    def relaxation_coefficient(self, U):
        nu, _, w = self._parts(U)
        nu1 = self.h_inv(-w)
        gap = nu1 - nu
        close = np.abs(gap) < 1e-6 * (1.0 + np.abs(nu))
        safe = np.where(close, 1.0, gap)
        divided = np.where(close, self.law.dg(0.5 * (nu + nu1)),
                           (self.law.g(nu1) - self.law.g(nu)) / safe)
        return self.E - divided

    def dissipation_matrix(self, U):
        L = np.zeros(np.shape(U)[:-1] + (3, 3))
        L[..., 2, 2] = self.relaxation_coefficient(U)
        return L

    def in_state_space(self, U):
        U = np.asarray(U, dtype=float)
        return np.all(np.isfinite(U), axis=-1) & (U[..., 0] > 0)


def viscoelastic(E=1.0, law=None):
    return Viscoelastic(E=E, law=law)
