"""Discrete velocity models with quadratic collision terms."""

import numpy as np
import scipy.linalg

from ..core import ModelSystem
from ..errors import ConstructionError, NonNegativityViolation, SymmetryViolation


class CollisionTable:
    """Velocities ``a(k)`` and the dense coefficient tensor ``A[i, j, k, l] = A_ij^kl``.

    The coefficients describe the collision ``(i, j) -> (k, l)`` and must be
    non-negative with ``A_ij^kl = A_kl^ij = A_lk^ij``.
    """

    def __init__(self, velocities, A):
        self.velocities = np.atleast_2d(np.asarray(velocities, dtype=float))
        if self.velocities.shape[0] == 1 and np.ndim(velocities) == 1:
            self.velocities = self.velocities.T
        self.A = np.asarray(A, dtype=float)
        n = self.velocities.shape[0]
        if self.A.shape != (n, n, n, n):
            raise ConstructionError(f"coefficient tensor must have shape {(n,) * 4}")
        if np.any(self.A < 0):
            raise NonNegativityViolation("collision coefficients must be non-negative")
        scale = max(1.0, float(np.max(np.abs(self.A))))
        if (np.max(np.abs(self.A - self.A.transpose(2, 3, 0, 1))) > 1e-14 * scale
                or np.max(np.abs(self.A - self.A.transpose(1, 0, 2, 3))) > 1e-14 * scale):
            raise SymmetryViolation("coefficients violate A_ij^kl = A_kl^ij = A_lk^ij")
        self.A.setflags(write=False)

    @property
    def n(self):
        return self.velocities.shape[0]

    @property
    def d(self):
        return self.velocities.shape[1]

    @classmethod
    def from_collisions(cls, velocities, collisions):
        """Build the tensor from ``(i, j, k, l, value)`` entries.

        Each entry is expanded over its symmetry orbit, so only one
        representative per collision family needs to be listed.
        """
        n = np.atleast_2d(np.asarray(velocities, dtype=float)).shape[0]
        if np.ndim(velocities) == 1:
            n = len(velocities)
        A = np.zeros((n, n, n, n))
        for i, j, k, l, val in collisions:
            for a, b, c, e in ((i, j, k, l), (k, l, i, j)):
                for p, q in ((a, b), (b, a)):
                    for s, t in ((c, e), (e, c)):
                        A[p, q, s, t] = val
        return cls(velocities, A)

    def collision_vectors(self):
        """Rows ``e_i + e_j - e_k - e_l`` for every non-zero coefficient."""
        idx = np.argwhere(self.A > 0)
        C = np.zeros((len(idx), self.n))
        for row, (i, j, k, l) in enumerate(idx):
            C[row, i] += 1
            C[row, j] += 1
            C[row, k] -= 1
            C[row, l] -= 1
        return C


def log_mean(x, y):
    """Logarithmic mean ``(x - y) / (log x - log y)``, equal to ``x`` when ``x == y``."""
    t = np.log(x) - np.log(y)
    small = np.abs(t) < 1e-4
    ts = np.where(small, 1.0, t)
    ratio = np.where(small, 1.0 + t / 2 + t * t / 6 + t**3 / 24, np.expm1(ts) / ts)
    return y * ratio


class DiscreteVelocityModel(ModelSystem):
    """``f_kt + a(k) . grad f_k = Q_k`` with entropy ``sum f_k (log f_k - 1)``.

    ``L(U) = [a_km]`` is assembled from the coefficient-weighted logarithmic
    means ``b_ij^kl = logmean(f_i f_j, f_k f_l)``. The transform ``P`` is built
    once from the collision vectors: its first rows span their common
    orthogonal complement (the collision invariants), the rest span their range.
    """

    name = "dvm"
    has_flux_jacobian = True

    def __init__(self, table, transform=None, box=None, reference_state=None, name=None,
                 params=None):
        self.table = table
        if name is not None:
            self.name = name
        self.n, self.d = table.n, table.d
        C = table.collision_vectors()
        if C.shape[0]:
            rng_basis = scipy.linalg.orth(C.T)
            null_basis = scipy.linalg.null_space(C)
        else:
            rng_basis = np.zeros((self.n, 0))
            null_basis = np.eye(self.n)
        self.r = rng_basis.shape[1]
        if transform is None:
            transform = np.vstack([null_basis.T, rng_basis.T])
        if box is None:
            box = [(0.5, 4.0)] * self.n
        if reference_state is None:
            reference_state = np.ones(self.n)
        if params is None:
            params = {
                "velocities": table.velocities.tolist(),
                "collisions": [[int(i), int(j), int(k), int(l), float(table.A[i, j, k, l])]
                               for i, j, k, l in np.argwhere(table.A > 0)],
            }
        self._finalize(transform, box, reference_state, params)

    def flux(self, U, j=0):
        return np.asarray(U, dtype=float) * self.table.velocities[:, j]

    def analytic_flux_jacobian(self, U, j=0):
        shape = np.shape(U)[:-1] + (self.n, self.n)
        return np.broadcast_to(np.diag(self.table.velocities[:, j]), shape).copy()

    def max_wave_speed(self, U, j=0):
        return np.full(np.shape(U)[:-1], np.max(np.abs(self.table.velocities[:, j])))

    def source(self, U):
        f = np.asarray(U, dtype=float)
        A = self.table.A
        gain = np.einsum("ijkl,...i,...j->...k", A, f, f)
        loss = f * np.einsum("kl,...l->...k", A.sum(axis=(2, 3)), f)
        return gain - loss

    def entropy(self, U):
        f = np.asarray(U, dtype=float)
        return np.sum(f * (np.log(f) - 1.0), axis=-1)

    def entropy_gradient(self, U):
        return np.log(np.asarray(U, dtype=float))

    def entropy_hessian(self, U):
        f = np.asarray(U, dtype=float)
        return np.eye(self.n) / f[..., None, :]

    def weighted_means(self, U):
        """``A_ij^kl * b_ij^kl`` as an array of shape ``(..., n, n, n, n)``."""
        f = np.asarray(U, dtype=float)
        pair = f[..., :, None] * f[..., None, :]
        b = log_mean(pair[..., :, :, None, None], pair[..., None, None, :, :])
        return self.table.A * b

    def dissipation_matrix(self, U):
        W = self.weighted_means(U)
        # a_km = -sum_jl W_mjkl - sum_il W_imkl + sum_ij W_ijkm + delta_km sum_ijl W_ijkl
        t1 = np.einsum("...mjkl->...km", W)
        t2 = np.einsum("...imkl->...km", W)
        t3 = np.einsum("...ijkm->...km", W)
        diag = np.einsum("...ijkl->...k", W)
        return -t1 - t2 + t3 + diag[..., :, None] * np.eye(self.n)

    def in_state_space(self, U):
        U = np.asarray(U, dtype=float)
        return np.all(np.isfinite(U) & (U > 0), axis=-1)


def dvm(table, transform=None):
    return DiscreteVelocityModel(table, transform=transform)


def broadwell(a=1.0):
    """Three-velocity Broadwell model, speeds ``(1, 0, -1)``.

    The single collision family ``f_+ f_- <-> f_0 f_0`` has coefficient ``a``.
    ``P`` rows are mass ``(1, 1, 1)``, momentum ``(1, 0, -1)`` and the
    rest-particle density ``f_0``.
    """
    table = CollisionTable.from_collisions([1.0, 0.0, -1.0], [(1, 1, 0, 2, a)])
    P = [[1.0, 1.0, 1.0], [1.0, 0.0, -1.0], [0.0, 1.0, 0.0]]
    return DiscreteVelocityModel(table, transform=P, name="broadwell", params={"a": a})
