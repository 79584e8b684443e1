"""Multi-component reactive Euler equations with mass-action kinetics."""

from dataclasses import dataclass, field

import numpy as np
import scipy.linalg

from ..core import ModelSystem
from ..errors import ConstructionError, NoConvergence


def _poly_eval(coeffs, theta):
    """``sum_p c_p theta^p`` for per-species coefficient rows; returns ``(..., n_s)``."""
    theta = np.asarray(theta, dtype=float)[..., None]
    out = np.zeros(np.shape(theta)[:-1] + (coeffs.shape[0],))
    for p in range(coeffs.shape[1]):
        out = out + coeffs[:, p] * theta**p
    return out


def _poly_int(coeffs, theta, theta0):
    """``int_theta0^theta c_v(y) dy``."""
    theta = np.asarray(theta, dtype=float)[..., None]
    out = np.zeros(np.shape(theta)[:-1] + (coeffs.shape[0],))
    for p in range(coeffs.shape[1]):
        out = out + coeffs[:, p] * (theta ** (p + 1) - theta0 ** (p + 1)) / (p + 1)
    return out


def _poly_int_over_y(coeffs, theta, theta0):
    """``int_theta0^theta c_v(y) / y dy``."""
    theta = np.asarray(theta, dtype=float)[..., None]
    out = coeffs[:, 0] * np.log(theta / theta0)
    for p in range(1, coeffs.shape[1]):
        out = out + coeffs[:, p] * (theta**p - theta0**p) / p
    return out


@dataclass
class ReactionNetwork:
    """Species data and reversible reactions ``sum nu'_ki S_k <-> sum nu''_ki S_k``.

    ``c_v`` holds polynomial coefficients per species (row ``k`` gives
    ``c_vk(theta) = sum_p c_v[k, p] theta^p``). Forward constants are
    Arrhenius ``k0 * exp(-Ea / (R_g theta))``; reverse constants follow from
    the equilibrium constant and are never free parameters.
    """

    molar_masses: np.ndarray
    nu_forward: np.ndarray
    nu_reverse: np.ndarray
    elements: np.ndarray
    c_v: np.ndarray
    energy0: np.ndarray
    entropy0: np.ndarray
    k0: np.ndarray
    activation: np.ndarray
    R_g: float = 1.0
    theta0: float = 0.1
    species: list = field(default_factory=list)

    def __post_init__(self):
        self.molar_masses = np.asarray(self.molar_masses, dtype=float)
        ns = self.molar_masses.size
        self.nu_forward = np.asarray(self.nu_forward, dtype=float).reshape(ns, -1)
        self.nu_reverse = np.asarray(self.nu_reverse, dtype=float).reshape(ns, -1)
        self.elements = np.asarray(self.elements, dtype=float).reshape(ns, -1)
        self.c_v = np.atleast_2d(np.asarray(self.c_v, dtype=float).reshape(ns, -1))
        self.energy0 = np.asarray(self.energy0, dtype=float).reshape(ns)
        self.entropy0 = np.asarray(self.entropy0, dtype=float).reshape(ns)
        nr = self.nu_forward.shape[1]
        self.k0 = np.broadcast_to(np.asarray(self.k0, dtype=float), (nr,)).copy()
        self.activation = np.broadcast_to(np.asarray(self.activation, dtype=float), (nr,)).copy()
        if not self.species:
            self.species = [f"S{k}" for k in range(ns)]
        if self.nu_reverse.shape != self.nu_forward.shape:
            raise ConstructionError("forward and reverse stoichiometry shapes differ")
        if np.any(self.molar_masses <= 0) or self.R_g <= 0 or self.theta0 <= 0:
            raise ConstructionError("molar masses, R_g and theta0 must be positive")
        if np.any(self.nu_forward < 0) or np.any(self.nu_reverse < 0):
            raise ConstructionError("stoichiometric coefficients must be non-negative")
        if np.any(self.k0 <= 0):
            raise ConstructionError("pre-exponential factors must be positive")
        theta = np.linspace(self.theta0, 100.0 * max(1.0, self.theta0), 200)
        if np.any(_poly_eval(self.c_v, theta) <= 0):
            raise ConstructionError("heat capacities must stay positive")
        elem = self.nu.T @ self.elements
        if np.max(np.abs(elem), initial=0.0) > 1e-12:
            raise ConstructionError("reactions do not conserve elements")
        if np.max(np.abs(self.molar_masses @ self.nu), initial=0.0) > 1e-12 * np.max(self.molar_masses):
            raise ConstructionError("reactions do not conserve mass: sum_k m_k nu_ki != 0")

    @property
    def n_species(self):
        return self.molar_masses.size

    @property
    def n_reactions(self):
        return self.nu_forward.shape[1]

    @property
    def nu(self):
        return self.nu_reverse - self.nu_forward

    @property
    def specific_gas_constants(self):
        return self.R_g / self.molar_masses

    @classmethod
    def isomerization(cls):
        """``A <-> B`` with ``m_A = m_B = 1``, ``c_v = 1.5`` and ``Ea = k0 = 1``."""
        return cls(
            molar_masses=[1.0, 1.0],
            nu_forward=[[1.0], [0.0]],
            nu_reverse=[[0.0], [1.0]],
            elements=[[1.0], [1.0]],
            c_v=[[1.5], [1.5]],
            energy0=[0.0, -0.5],
            entropy0=[0.0, 0.0],
            k0=[1.0],
            activation=[1.0],
            species=["A", "B"],
        )

    def to_dict(self):
        return {
            "molar_masses": self.molar_masses.tolist(),
            "nu_forward": self.nu_forward.tolist(),
            "nu_reverse": self.nu_reverse.tolist(),
            "elements": self.elements.tolist(),
            "c_v": self.c_v.tolist(),
            "energy0": self.energy0.tolist(),
            "entropy0": self.entropy0.tolist(),
            "k0": self.k0.tolist(),
            "activation": self.activation.tolist(),
            "R_g": self.R_g,
            "theta0": self.theta0,
            "species": list(self.species),
        }


class ReactiveEuler(ModelSystem):
    """Reactive Euler equations, state ``(rho_1..rho_ns, rho v, rho E)``.

    Pressure ``p = theta sum r_k rho_k`` with ``r_k = R_g / m_k``; species
    energies and entropies are integrated from ``theta0``. The source is
    ``m_k omega_k`` with ``omega = sum_i tau_i nu_i``; the dissipation matrix
    is ``R_g^{-1} diag(M V Delta V^T M, 0)`` where ``Delta_i`` uses the
    exponential mean of the affinity.

    Samples are drawn in ``(rho_1..rho_ns, v, theta)``.
    """

    name = "reactive_euler"

    def __init__(self, net=None):
        self.net = net if net is not None else ReactionNetwork.isomerization()
        ns = self.net.n_species
        self.ns = ns
        self.n, self.d = ns + 4, 3
        MV = self.net.molar_masses[:, None] * self.net.nu
        self.MV = MV
        self.r = int(np.linalg.matrix_rank(MV)) if MV.size else 0
        self._finalize(self._build_transform(MV),
                       [(0.2, 2.0)] * ns + [(-1.0, 1.0)] * 3 + [(0.5, 2.0)],
                       self.from_sample(np.r_[np.ones(ns), 0.2, 0.0, 0.0, 1.0]),
                       self.net.to_dict())

    def _build_transform(self, MV):
        ns = self.ns
        null = scipy.linalg.null_space(MV.T) if MV.size else np.eye(ns)
        ones = np.ones(ns) / np.sqrt(ns)
        # put total mass first when it is a conserved combination
        if null.shape[1] and np.linalg.norm(null.T @ ones) > 1 - 1e-12:
            rest = null - np.outer(ones, ones @ null)
            rest = scipy.linalg.orth(rest) if null.shape[1] > 1 else np.zeros((ns, 0))
            null = np.column_stack([np.ones(ns), rest])
        rows_v = MV.T if np.linalg.matrix_rank(MV) == MV.shape[1] else scipy.linalg.orth(MV).T
        P = np.zeros((self.n, self.n))
        k = null.shape[1]
        P[:k, :ns] = null.T
        P[k:k + 4, ns:] = np.eye(4)
        P[k + 4:, :ns] = rows_v
        return P

    # -- thermodynamics ----------------------------------------------------
    def species_energy(self, theta):
        return self.net.energy0 + _poly_int(self.net.c_v, theta, self.net.theta0)

    def species_entropy(self, rho_k, theta):
        net = self.net
        return (net.entropy0 + _poly_int_over_y(net.c_v, theta, net.theta0)
                - net.specific_gas_constants * np.log(rho_k / net.molar_masses))

    def chemical_potential(self, rho_k, theta):
        theta_ = np.asarray(theta)[..., None]
        return (self.species_energy(theta) + self.net.specific_gas_constants * theta_
                - self.species_entropy(rho_k, theta) * theta_)

    def from_sample(self, X):
        X = np.asarray(X, dtype=float)
        ns = self.ns
        rho_k, v, theta = X[..., :ns], X[..., ns:ns + 3], X[..., ns + 3]
        rho = rho_k.sum(axis=-1)
        rhoE = np.sum(rho_k * self.species_energy(theta), axis=-1) + 0.5 * rho * np.sum(v * v, axis=-1)
        return np.concatenate([rho_k, rho[..., None] * v, rhoE[..., None]], axis=-1)

    def temperature(self, U):
        U = np.asarray(U, dtype=float)
        ns, net = self.ns, self.net
        rho_k = U[..., :ns]
        rho = rho_k.sum(axis=-1)
        m = U[..., ns:ns + 3]
        internal = U[..., ns + 3] - 0.5 * np.sum(m * m, axis=-1) / rho - rho_k @ net.energy0
        if net.c_v.shape[1] == 1:
            return net.theta0 + internal / (rho_k @ net.c_v[:, 0])
        theta = np.full(np.shape(internal), 1.0)
        for _ in range(100):
            res = np.sum(rho_k * _poly_int(net.c_v, theta, net.theta0), axis=-1) - internal
            step = res / np.sum(rho_k * _poly_eval(net.c_v, theta), axis=-1)
            theta = np.maximum(theta - step, 0.5 * theta)
            if np.all(np.abs(step) <= 1e-15 * theta):
                return theta
        raise NoConvergence("temperature inversion did not converge")

    def natural(self, U):
        """Natural variables ``rho_k, v, theta``."""
        U = np.asarray(U, dtype=float)
        ns = self.ns
        rho_k = U[..., :ns]
        v = U[..., ns:ns + 3] / rho_k.sum(axis=-1)[..., None]
        return rho_k, v, self.temperature(U)

    def pressure(self, U):
        rho_k, _, theta = self.natural(U)
        return theta * (rho_k @ self.net.specific_gas_constants)

    # -- kinetics ------------------------------------------------------------
    def forward_constant(self, theta):
        net = self.net
        return net.k0 * np.exp(-net.activation / (net.R_g * np.asarray(theta)[..., None]))

    def equilibrium_constant(self, theta):
        net = self.net
        rho_unit = np.broadcast_to(net.molar_masses, np.shape(theta) + (self.ns,))
        mu0 = self.chemical_potential(rho_unit, theta)
        expo = -(mu0 / (net.specific_gas_constants * np.asarray(theta)[..., None])) @ net.nu
        return np.exp(expo)

    def rates_of_progress(self, U):
        """Mass-action ``tau_i`` with ``K_r = K_f / K_e``."""
        rho_k, _, theta = self.natural(U)
        conc = rho_k / self.net.molar_masses
        logc = np.log(conc)
        kf = self.forward_constant(theta)
        kr = kf / self.equilibrium_constant(theta)
        return kf * np.exp(logc @ self.net.nu_forward) - kr * np.exp(logc @ self.net.nu_reverse)

    def production_rates(self, U):
        return self.rates_of_progress(U) @ self.net.nu.T

    def affinities(self, U):
        """``<Y, M nu_i>`` with ``Y = mu / (R_g theta)``."""
        rho_k, _, theta = self.natural(U)
        Y = self.chemical_potential(rho_k, theta) / (self.net.R_g * theta[..., None])
        return Y @ self.MV

    def delta(self, U):
        rho_k, _, theta = self.natural(U)
        a = self.affinities(U)
        small = np.abs(a) < 1e-8
        a_safe = np.where(small, 1.0, a)
        mean = np.where(small, 1.0 + 0.5 * a, np.expm1(a_safe) / a_safe)
        logc = np.log(rho_k / self.net.molar_masses)
        return self.forward_constant(theta) * np.exp(logc @ self.net.nu_forward) * mean

    # -- contract ------------------------------------------------------------
    def flux(self, U, j=0):
        U = np.asarray(U, dtype=float)
        ns = self.ns
        _, v, _ = self.natural(U)
        p = self.pressure(U)
        vj = v[..., j]
        out = U * vj[..., None]
        out[..., ns + j] += p
        out[..., ns + 3] += p * vj
        return out

    def sound_speed(self, U):
        rho_k, _, theta = self.natural(U)
        rho = rho_k.sum(axis=-1)
        R_mix = rho_k @ self.net.specific_gas_constants
        cv_mix = np.sum(rho_k * _poly_eval(self.net.c_v, theta), axis=-1)
        return np.sqrt((1.0 + R_mix / cv_mix) * theta * R_mix / rho)

    def max_wave_speed(self, U, j=0):
        _, v, _ = self.natural(U)
        return np.abs(v[..., j]) + self.sound_speed(U)

    def source(self, U):
        out = np.zeros(np.shape(U))
        out[..., :self.ns] = self.net.molar_masses * self.production_rates(U)
        return out

    def entropy(self, U):
        rho_k, _, theta = self.natural(U)
        return -np.sum(rho_k * self.species_entropy(rho_k, theta), axis=-1)

    def entropy_gradient(self, U):
        rho_k, v, theta = self.natural(U)
        ns = self.ns
        vv = np.sum(v * v, axis=-1)
        g = np.empty(np.shape(U))
        g[..., :ns] = self.chemical_potential(rho_k, theta) - 0.5 * vv[..., None]
        g[..., ns:ns + 3] = v
        g[..., ns + 3] = -1.0
        return g / theta[..., None]

    def entropy_hessian(self, U):
        rho_k, v, theta = self.natural(U)
        ns, n = self.ns, self.n
        rho = rho_k.sum(axis=-1)
        cv_mix = np.sum(rho_k * _poly_eval(self.net.c_v, theta), axis=-1)
        eps = self.species_energy(theta)
        J = np.zeros(np.shape(U)[:-1] + (n, n))
        J[..., :ns, :ns] = np.eye(ns)
        J[..., ns:ns + 3, :ns] = -(v / rho[..., None])[..., :, None]
        J[..., ns:ns + 3, ns:ns + 3] = np.eye(3) / rho[..., None, None]
        J[..., n - 1, :ns] = 0.5 * np.sum(v * v, axis=-1)[..., None] - eps
        J[..., n - 1, ns:ns + 3] = -v
        J[..., n - 1, n - 1] = 1.0
        J[..., n - 1, :] /= cv_mix[..., None]
        w = np.concatenate([
            self.net.specific_gas_constants / rho_k,
            np.repeat((rho / theta)[..., None], 3, axis=-1),
            (cv_mix / theta**2)[..., None],
        ], axis=-1)
        return np.einsum("...ki,...k,...kj->...ij", J, w, J)

    def dissipation_matrix(self, U):
        D = self.delta(U)
        L = np.zeros(np.shape(U)[:-1] + (self.n, self.n))
        L[..., :self.ns, :self.ns] = np.einsum("ki,...i,li->...kl", self.MV, D, self.MV) / self.net.R_g
        return L

    def in_state_space(self, U):
        # rho E above phi(U) is equivalent to theta > theta0 since c_v > 0
        U = np.asarray(U, dtype=float)
        ns = self.ns
        ok = np.all(np.isfinite(U), axis=-1) & np.all(U[..., :ns] > 0, axis=-1)
        rho = np.where(ok, U[..., :ns].sum(axis=-1), 1.0)
        m = U[..., ns:ns + 3]
        floor = 0.5 * np.sum(m * m, axis=-1) / rho + U[..., :ns] @ self.net.energy0
        return ok & (U[..., ns + 3] > floor)


def reactive_euler(net=None):
    return ReactiveEuler(net)
