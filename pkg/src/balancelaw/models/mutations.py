"""Deliberately broken variants of catalog models, used as counterexamples."""

import numpy as np

from ..core import ModelSystem

# mutation name -> checks it is designed to break
TARGETS = {
    "flip-source": ("source_factorization", "dissipation_inequality", "equilibrium_jacobian"),
    "negate-dissipation": ("source_factorization", "dissipation_inequality"),
    "swap-flux": ("entropy_structure",),
}


class MutatedModel(ModelSystem):
    """Wraps ``base`` and corrupts exactly one ingredient.

    The transform, box and reference state are inherited unchanged, so
    construction never rejects the mutant.
    """

    def __init__(self, base, mutation):
        if mutation not in TARGETS:
            raise ValueError(f"unknown mutation {mutation!r}; choose from {sorted(TARGETS)}")
        self.base = base
        self.mutation = mutation
        self.name = base.name
        self.n, self.d, self.r = base.n, base.d, base.r
        self.has_flux_jacobian = base.has_flux_jacobian and mutation != "swap-flux"
        self.has_source_jacobian = base.has_source_jacobian and mutation != "flip-source"
        self.P, self.P_inv = base.P, base.P_inv
        self.box = base.box
        self.reference_state = base.reference_state
        self.params = dict(base.params)

    def flux(self, U, j=0):
        F = self.base.flux(U, j)
        if self.mutation == "swap-flux":
            F = F.copy()
            F[..., [0, -1]] = F[..., [-1, 0]]
        return F

    def analytic_flux_jacobian(self, U, j=0):
        return self.base.analytic_flux_jacobian(U, j)

    def analytic_source_jacobian(self, U):
        return self.base.analytic_source_jacobian(U)

    def source(self, U):
        Q = self.base.source(U)
        return -Q if self.mutation == "flip-source" else Q

    def entropy(self, U):
        return self.base.entropy(U)

    def entropy_gradient(self, U):
        return self.base.entropy_gradient(U)

    def entropy_hessian(self, U):
        return self.base.entropy_hessian(U)

    def dissipation_matrix(self, U):
        L = self.base.dissipation_matrix(U)
        return -L if self.mutation == "negate-dissipation" else L

    def in_state_space(self, U):
        return self.base.in_state_space(U)

    def from_sample(self, X):
        return self.base.from_sample(X)

    def max_wave_speed(self, U, j=0):
        return self.base.max_wave_speed(U, j)

    def describe(self):
        out = self.base.describe()
        out["mutation"] = self.mutation
        return out


def mutate(model, mutation):
    return MutatedModel(model, mutation)


class RankDropModel(ModelSystem):
    """``L(U) = diag(U_1^2, 1)`` with entropy ``|U|^2/2``: the kernel exists only at ``U_1 = 0``.

    Declared ``r = 1`` from the reference state on that line, so almost every
    sampled state has the wrong kernel dimension.
    """

    name = "rank_drop"
    has_flux_jacobian = True

    def __init__(self):
        self.n, self.d, self.r = 2, 1, 1
        self._finalize(np.eye(2), [(-1.0, 1.0), (-1.0, 1.0)], [0.0, 0.5])

    def flux(self, U, j=0):
        return np.array(U, dtype=float)

    def analytic_flux_jacobian(self, U, j=0):
        return np.broadcast_to(np.eye(2), np.shape(U)[:-1] + (2, 2)).copy()

    def source(self, U):
        return -np.einsum("...ij,...j->...i", self.dissipation_matrix(U), np.asarray(U, dtype=float))

    def entropy(self, U):
        U = np.asarray(U, dtype=float)
        return 0.5 * np.sum(U * U, axis=-1)

    def entropy_gradient(self, U):
        return np.array(U, dtype=float)

    def entropy_hessian(self, U):
        return np.broadcast_to(np.eye(2), np.shape(U)[:-1] + (2, 2)).copy()

    def dissipation_matrix(self, U):
        U = np.asarray(U, dtype=float)
        L = np.zeros(np.shape(U)[:-1] + (2, 2))
        L[..., 0, 0] = U[..., 0] ** 2
        L[..., 1, 1] = 1.0
        return L

    def in_state_space(self, U):
        return np.all(np.isfinite(np.asarray(U, dtype=float)), axis=-1)
