"""Small dense linear-algebra helpers used across the package.

Everything here works on stacks of matrices with shape ``(..., n, n)``.
"""

import numpy as np

KERNEL_CUTOFF = 1e-10


def symmetrize(A):
    return 0.5 * (A + np.swapaxes(A, -1, -2))


def asymmetry(A):
    """Max-abs entry of ``A - A^T`` for each matrix in the stack."""
    return np.max(np.abs(A - np.swapaxes(A, -1, -2)), axis=(-2, -1))


def min_eigenvalue(A):
    """Smallest eigenvalue of the symmetric part of each matrix."""
    return np.linalg.eigvalsh(symmetrize(A))[..., 0]


def max_eigenvalue(A):
    return np.linalg.eigvalsh(symmetrize(A))[..., -1]


def kernel_basis(A, cutoff=KERNEL_CUTOFF):
    """Orthonormal basis (as columns) of the numerical null space of ``A``.

    Singular values at or below ``cutoff * sigma_max`` count as zero. A zero
    matrix has the whole space as its kernel.
    """
    A = np.asarray(A, dtype=float)
    _, s, vh = np.linalg.svd(A)
    smax = s[0] if s.size else 0.0
    if smax == 0.0:
        return np.eye(A.shape[1])
    rank = int(np.sum(s > cutoff * smax))
    return vh[rank:].T.copy()


def orthonormal_rows(rows):
    """Orthonormal basis (as columns) of the span of the given rows."""
    rows = np.atleast_2d(np.asarray(rows, dtype=float))
    if rows.shape[0] == 0:
        return np.zeros((rows.shape[1], 0))
    u, s, _ = np.linalg.svd(rows.T, full_matrices=False)
    rank = int(np.sum(s > KERNEL_CUTOFF * s[0])) if s.size and s[0] > 0 else 0
    return u[:, :rank]


def max_principal_angle(A, B):
    """Largest principal angle between span(A) and span(B).

    ``A`` and ``B`` hold orthonormal bases as columns. The angle is computed
    from the sine, ``||(I - A A^T) B||_2``, which keeps full relative accuracy
    for tiny angles (the cosine route loses everything below ~1e-8).
    Subspaces of different dimension are at angle pi/2.
    """
    if A.shape[1] != B.shape[1]:
        return np.pi / 2
    if A.shape[1] == 0:
        return 0.0
    resid = B - A @ (A.T @ B)
    s = np.linalg.norm(resid, 2)
    return float(np.arcsin(min(1.0, s)))


def principal_angles(A, B):
    """All principal angles (ascending) between the column spans of A and B."""
    qa = orthonormal_rows(np.asarray(A).T)
    qb = orthonormal_rows(np.asarray(B).T)
    cos = np.linalg.svd(qa.T @ qb, compute_uv=False)
    return np.sort(np.arccos(np.clip(cos, -1.0, 1.0)))


def random_well_conditioned(n, rng, max_cond=10.0):
    """Random invertible matrix with condition number at most ``max_cond``."""
    q1, _ = np.linalg.qr(rng.standard_normal((n, n)))
    q2, _ = np.linalg.qr(rng.standard_normal((n, n)))
    s = np.exp(rng.uniform(0.0, np.log(max_cond), size=n))
    s[0], s[-1] = 1.0, max_cond if n > 1 else 1.0
    return (q1 * s) @ q2
