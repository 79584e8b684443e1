"""Model contract for first-order balance laws ``U_t + sum_j F_j(U)_{x_j} = Q(U)``.

A :class:`ModelSystem` bundles fluxes, source, a strictly convex entropy with
its derivatives, the dissipation matrix ``L(U)`` with ``Q = -L eta_U``, and a
constant invertible transform ``P`` whose first ``n - r`` rows span the
(state-independent) kernel of ``L``.

All model methods are vectorized: a state argument has shape ``(..., n)`` and
results carry the same leading shape.
"""

from dataclasses import dataclass

import numpy as np

from .errors import (
    ConstructionError,
    NonFiniteResult,
    SingularTransform,
    StateSpaceViolation,
)
from .linalg import kernel_basis, max_principal_angle, orthonormal_rows

FD_STEP = np.finfo(float).eps ** (1.0 / 3.0)
TRANSFORM_COND_CAP = 1e12


def fd_steps(U):
    """Per-component central-difference steps ``eps^(1/3) * max(1, |U_k|)``."""
    return FD_STEP * np.maximum(1.0, np.abs(U))


def fd_jacobian(func, U, h=None):
    """Central-difference Jacobian of ``func`` (vectorized) at ``U``.

    ``U`` may be a batch ``(..., n)``; the result has shape ``(..., m, n)`` with
    column ``k`` equal to ``(func(U + h_k e_k) - func(U - h_k e_k)) / (2 h_k)``.
    """
    U = np.asarray(U, dtype=float)
    n = U.shape[-1]
    if h is None:
        h = fd_steps(U)
    else:
        h = np.broadcast_to(np.asarray(h, dtype=float), U.shape)
    cols = []
    for k in range(n):
        dU = np.zeros_like(U)
        dU[..., k] = h[..., k]
        cols.append((func(U + dU) - func(U - dU)) / (2.0 * h[..., k, None]))
    return np.stack(cols, axis=-1)


class ModelSystem:
    """Base class for a balance-law model with the three structural properties.

    Subclasses set ``n, d, r``, the transform ``P`` and the sampling box, then
    call :meth:`_finalize`. They implement :meth:`flux`, :meth:`source`,
    :meth:`entropy`, :meth:`entropy_gradient`, :meth:`entropy_hessian`,
    :meth:`dissipation_matrix` and :meth:`in_state_space`. An analytic flux
    Jacobian is optional (``has_flux_jacobian``).

    Sampling happens in model-chosen coordinates: ``box`` lists intervals in
    those coordinates and :meth:`from_sample` maps a draw to a conserved state.
    """

    name = "model"
    has_flux_jacobian = False
    has_source_jacobian = False

    n: int
    d: int
    r: int

    def _finalize(self, P, box, reference_state, params=None):
        P = np.array(P, dtype=float)
        if P.shape != (self.n, self.n):
            raise ConstructionError(f"transform must be {self.n}x{self.n}, got {P.shape}")
        if not np.all(np.isfinite(P)) or np.linalg.cond(P) > TRANSFORM_COND_CAP:
            raise ConstructionError("transform P is singular")
        if not 0 <= self.r <= self.n:
            raise ConstructionError(f"rank r={self.r} outside [0, {self.n}]")
        self.P = _frozen(P)
        self.P_inv = _frozen(np.linalg.inv(P))
        self.box = _frozen(np.array(box, dtype=float))
        self.reference_state = _frozen(np.array(reference_state, dtype=float))
        self.params = dict(params or {})
        if not bool(self.in_state_space(self.reference_state)):
            raise ConstructionError("reference state lies outside the state space")
        self._check_rank()

    def _check_rank(self):
        L = self.dissipation_matrix(self.reference_state)
        ker = kernel_basis(L)
        if ker.shape[1] != self.n - self.r:
            raise ConstructionError(
                f"declared r={self.r} but L at the reference state has "
                f"kernel dimension {ker.shape[1]}"
            )
        declared = orthonormal_rows(self.P[: self.n - self.r])
        if declared.shape[1] != ker.shape[1] or max_principal_angle(ker, declared) > 1e-8:
            raise ConstructionError("first n-r rows of P do not span ker L")

    # -- contract -----------------------------------------------------------
    def flux(self, U, j=0):
        raise NotImplementedError

    def source(self, U):
        raise NotImplementedError

    def entropy(self, U):
        raise NotImplementedError

    def entropy_gradient(self, U):
        raise NotImplementedError

    def entropy_hessian(self, U):
        raise NotImplementedError

    def dissipation_matrix(self, U):
        raise NotImplementedError

    def in_state_space(self, U):
        raise NotImplementedError

    def analytic_flux_jacobian(self, U, j=0):
        raise NotImplementedError

    def analytic_source_jacobian(self, U):
        raise NotImplementedError

    def from_sample(self, X):
        """Map sampling coordinates to conserved states (identity by default)."""
        return np.asarray(X, dtype=float)

    def max_wave_speed(self, U, j=0):
        """Spectral radius of ``F_jU`` at each state."""
        J = flux_jacobian(self, U, j)
        return np.max(np.abs(np.linalg.eigvals(J)), axis=-1)

    def describe(self):
        return {"family": self.name, "params": self.params}

    def __repr__(self):
        return f"{type(self).__name__}(n={self.n}, d={self.d}, r={self.r})"


def _frozen(a):
    a.setflags(write=False)
    return a


def as_state(model, U):
    """Validate shape and finiteness of a state (or batch of states)."""
    U = np.asarray(U, dtype=float)
    if U.shape[-1] != model.n:
        raise ValueError(f"state has length {U.shape[-1]}, model expects n={model.n}")
    if not np.all(np.isfinite(U)):
        raise NonFiniteResult("state contains NaN/Inf")
    return U


def flux_jacobian(model, U, j=0, h=None):
    """Flux Jacobian ``F_jU``; analytic when the model supplies it, else central FD."""
    U = as_state(model, U)
    if not 0 <= j < model.d:
        raise ValueError(f"direction {j} outside [0, {model.d})")
    if model.has_flux_jacobian:
        return model.analytic_flux_jacobian(U, j)
    if h is None:
        h = fd_steps(U)
    h = np.broadcast_to(np.asarray(h, dtype=float), U.shape)
    eye = np.eye(model.n)
    probes = np.concatenate(
        [U[..., None, :] + h[..., None, :] * eye, U[..., None, :] - h[..., None, :] * eye],
        axis=-2,
    )
    if not np.all(model.in_state_space(probes)):
        raise StateSpaceViolation("finite-difference probe left the state space")
    F = model.flux(probes, j)
    if not np.all(np.isfinite(F)):
        raise NonFiniteResult("flux evaluation returned NaN/Inf")
    n = model.n
    diff = (F[..., :n, :] - F[..., n:, :]) / (2.0 * h[..., :, None])
    return np.swapaxes(diff, -1, -2)


def source_jacobian(model, U, h=None):
    """Source Jacobian ``Q_U``; analytic if available, else central FD."""
    U = as_state(model, U)
    if model.has_source_jacobian:
        return model.analytic_source_jacobian(U)
    return fd_jacobian(model.source, U, h)


@dataclass(frozen=True)
class PartitionedState:
    """Split of ``P U`` into conserved part ``u`` and non-equilibrium part ``v``."""

    u: np.ndarray
    v: np.ndarray


def to_partitioned(model, U):
    U = as_state(model, U)
    V = U @ model.P.T
    k = model.n - model.r
    return PartitionedState(V[..., :k], V[..., k:])


def from_partitioned(model, p):
    V = np.concatenate([np.asarray(p.u, dtype=float), np.asarray(p.v, dtype=float)], axis=-1)
    U = V @ model.P_inv.T
    if not np.all(np.isfinite(U)):
        raise NonFiniteResult("reconstructed state is not finite")
    return U


def join(model, u, v):
    """``P^{-1} (u, v)`` for batched ``u``, ``v`` without the dataclass wrapper."""
    return np.concatenate([u, v], axis=-1) @ model.P_inv.T


def reduced_source(model, U):
    """Last ``r`` components of ``P Q(U)`` (the non-trivial source ``q``)."""
    return (model.source(U) @ model.P.T)[..., model.n - model.r:]


class TransformedModel(ModelSystem):
    """The model in coordinates ``V = P_new U``.

    Fluxes and source become ``P_new F(P_new^{-1} V)``, the entropy is
    ``eta(P_new^{-1} V)`` and the dissipation matrix ``P_new L P_new^T``.
    """

    def __init__(self, base, P_new):
        self.base = base
        self.A = _frozen(np.array(P_new, dtype=float))
        self.A_inv = _frozen(np.linalg.inv(self.A))
        self.name = base.name
        self.n, self.d, self.r = base.n, base.d, base.r
        self.has_flux_jacobian = base.has_flux_jacobian
        self._finalize(
            base.P @ self.A_inv,
            base.box,
            self.A @ base.reference_state,
            params=dict(base.params),
        )

    def _back(self, V):
        return V @ self.A_inv.T

    def _fwd(self, U):
        return U @ self.A.T

    def flux(self, V, j=0):
        return self._fwd(self.base.flux(self._back(V), j))

    def source(self, V):
        return self._fwd(self.base.source(self._back(V)))

    def entropy(self, V):
        return self.base.entropy(self._back(V))

    def entropy_gradient(self, V):
        return self.base.entropy_gradient(self._back(V)) @ self.A_inv

    def entropy_hessian(self, V):
        H = self.base.entropy_hessian(self._back(V))
        return self.A_inv.T @ H @ self.A_inv

    def dissipation_matrix(self, V):
        L = self.base.dissipation_matrix(self._back(V))
        return self.A @ L @ self.A.T

    def in_state_space(self, V):
        return self.base.in_state_space(self._back(V))

    def analytic_flux_jacobian(self, V, j=0):
        J = self.base.analytic_flux_jacobian(self._back(V), j)
        return self.A @ J @ self.A_inv

    def from_sample(self, X):
        return self._fwd(self.base.from_sample(X))

    def describe(self):
        out = self.base.describe()
        out["transform"] = self.A.tolist()
        return out


def apply_linear_transform(model, P_new, cond_cap=TRANSFORM_COND_CAP):
    """Rewrite ``model`` in the coordinates ``V = P_new U``."""
    P_new = np.asarray(P_new, dtype=float)
    if P_new.shape != (model.n, model.n):
        raise SingularTransform(f"transform must be {model.n}x{model.n}")
    if not np.all(np.isfinite(P_new)) or np.linalg.cond(P_new) > cond_cap:
        raise SingularTransform("transform is numerically singular")
    return TransformedModel(model, P_new)
