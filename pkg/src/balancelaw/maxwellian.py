"""Local equilibria by convex minimization of the entropy in the non-equilibrium variables.

For fixed conserved part ``u`` the map ``v -> eta(P^{-1}(u, v))`` is strictly
convex; its unique critical point is ``h(u)`` and the Maxwellian of ``U`` is
``P^{-1}(u, h(u))``. Every routine here is batched over leading axes.
"""

from dataclasses import dataclass

import numpy as np

from .core import as_state, join
from .errors import NoConvergence, StateSpaceExit

TOL = 1e-12
MAX_ITER = 100
MAX_HALVINGS = 60

CONVERGED = "converged"
NOT_CONVERGED = "no_convergence"
LEFT_DOMAIN = "state_space_exit"


@dataclass(frozen=True)
class EquilibriumSolve:
    """Raw output of the batched Newton iteration."""

    v: np.ndarray
    iterations: np.ndarray
    residual: np.ndarray
    status: np.ndarray
    objective_trace: list

    @property
    def converged(self):
        return self.status == CONVERGED


@dataclass(frozen=True)
class MaxwellianResult:
    M: np.ndarray
    iterations: int
    residual: float
    converged: bool
    status: str = CONVERGED


def reduced_entropy(model, u, v):
    return model.entropy(join(model, u, v))


def reduced_gradient(model, U):
    """``eta~_v`` at ``U``: last ``r`` entries of ``P^{-T} eta_U``."""
    k = model.n - model.r
    return (model.entropy_gradient(U) @ model.P_inv)[..., k:]


def reduced_hessian(model, U):
    k = model.n - model.r
    H = model.P_inv.T @ model.entropy_hessian(U) @ model.P_inv
    return H[..., k:, k:]


def _objective(model, u, v):
    U = join(model, u, v)
    ok = model.in_state_space(U)
    with np.errstate(all="ignore"):
        f = np.where(ok, model.entropy(np.where(ok[..., None], U, model.reference_state)), np.inf)
    return f, ok


def solve_equilibrium_batch(model, u, v0, tol=TOL, max_iter=MAX_ITER, max_halvings=MAX_HALVINGS,
                            trace=False):
    """Damped Newton for ``eta~_v(u, v) = 0`` on a batch of ``u`` rows; never raises.

    The step ``-eta~_vv^{-1} eta~_v`` is halved until the objective does not
    increase beyond rounding and the state stays in ``G``. A row converges
    when ``|eta~_v|_inf <= tol``, or when the Newton step has reached rounding
    level with a gradient below ``sqrt(tol)``.
    """
    u = np.atleast_2d(np.asarray(u, dtype=float))
    v = np.atleast_2d(np.array(v0, dtype=float))
    B = u.shape[0]
    v = np.broadcast_to(v, (B, model.r)).copy()
    iters = np.zeros(B, dtype=int)
    status = np.full(B, NOT_CONVERGED, dtype=object)
    resid = np.full(B, np.inf)
    history = [[] for _ in range(B)] if trace else []

    f, ok = _objective(model, u, v)
    status[~ok] = LEFT_DOMAIN
    active = ok.copy()
    if model.r == 0:
        status[ok] = CONVERGED
        resid[ok] = 0.0
        return EquilibriumSolve(v, iters, resid, status, history)

    for _ in range(max_iter + 1):
        idx = np.flatnonzero(active)
        if idx.size == 0:
            break
        U = join(model, u[idx], v[idx])
        g = reduced_gradient(model, U)
        gnorm = np.max(np.abs(g), axis=-1)
        resid[idx] = gnorm
        done = gnorm <= tol
        if done.any():
            # one undamped polishing step: quadratic convergence takes the
            # residual from tol to rounding level
            rows = idx[done]
            H = reduced_hessian(model, U[done])
            cand = v[rows] - np.linalg.solve(H, g[done][..., None])[..., 0]
            f_new, inside = _objective(model, u[rows], cand)
            take = inside & (f_new <= f[rows] + 16 * np.finfo(float).eps * (1.0 + np.abs(f[rows])))
            v[rows[take]] = cand[take]
            f[rows[take]] = f_new[take]
            g_new = reduced_gradient(model, join(model, u[rows[take]], cand[take]))
            resid[rows[take]] = np.max(np.abs(g_new), axis=-1)
        status[idx[done]] = CONVERGED
        active[idx[done]] = False
        keep = ~done & (iters[idx] < max_iter)
        active[idx[~done & ~keep]] = False
        idx, g = idx[keep], g[keep]
        if idx.size == 0:
            continue
        if trace:
            for i in idx:
                history[i].append(float(f[i]))
        H = reduced_hessian(model, join(model, u[idx], v[idx]))
        step = -np.linalg.solve(H, g[..., None])[..., 0]
        iters[idx] += 1

        t = np.ones(idx.size)
        accepted = np.zeros(idx.size, dtype=bool)
        seen_inside = np.zeros(idx.size, dtype=bool)
        f_old = f[idx]
        slack = 16 * np.finfo(float).eps * (1.0 + np.abs(f_old))
        for _ in range(max_halvings + 1):
            pending = ~accepted
            if not pending.any():
                break
            cand = v[idx[pending]] + t[pending, None] * step[pending]
            f_new, inside = _objective(model, u[idx[pending]], cand)
            seen_inside[pending] |= inside
            good = inside & (f_new <= f_old[pending] + slack[pending])
            pos = np.flatnonzero(pending)[good]
            v[idx[pos]] = cand[good]
            f[idx[pos]] = f_new[good]
            accepted[pos] = True
            t[pending & ~accepted] *= 0.5

        stuck = ~accepted
        if stuck.any():
            # no admissible descent: either at rounding level or outside the domain of h
            rows = idx[stuck]
            tiny = np.max(np.abs(step[stuck]), axis=-1) <= 1e3 * np.finfo(float).eps * (
                1.0 + np.max(np.abs(v[rows]), axis=-1))
            near = resid[rows] <= np.sqrt(tol)
            status[rows] = np.where(tiny & near, CONVERGED,
                                    np.where(seen_inside[stuck], NOT_CONVERGED, LEFT_DOMAIN))
            active[rows] = False
        # rounding-level steps that were accepted count as converged
        small = accepted & (np.max(np.abs(step), axis=-1)
                            <= 4 * np.finfo(float).eps * (1.0 + np.max(np.abs(v[idx]), axis=-1)))
        small &= resid[idx] <= np.sqrt(tol)
        if small.any():
            rows = idx[small]
            resid[rows] = np.max(np.abs(reduced_gradient(model, join(model, u[rows], v[rows]))), axis=-1)
            status[rows] = CONVERGED
            active[rows] = False

    return EquilibriumSolve(v, iters, resid, status, history)


def _default_guess(model, u):
    k = model.n - model.r
    return np.broadcast_to((model.P @ model.reference_state)[k:], np.shape(u)[:-1] + (model.r,))


def solve_equilibrium_v(model, u, v0=None, tol=TOL, max_iter=MAX_ITER):
    """``h(u)``: the unique zero of ``eta~_v(u, .)``; raises on failure."""
    u = np.asarray(u, dtype=float)
    if u.shape[-1] != model.n - model.r:
        raise ValueError(f"u must have length n - r = {model.n - model.r}")
    if v0 is None:
        v0 = _default_guess(model, u)
    lead = u.shape[:-1]
    res = solve_equilibrium_batch(model, u.reshape(-1, u.shape[-1]),
                                  np.broadcast_to(v0, lead + (model.r,)).reshape(-1, model.r),
                                  tol=tol, max_iter=max_iter)
    if np.any(res.status == LEFT_DOMAIN):
        raise StateSpaceExit("every damped Newton step left the state space; u may lie outside "
                             "the domain of h")
    if not np.all(res.converged):
        raise NoConvergence(f"equilibrium Newton did not converge in {max_iter} steps "
                            f"(residual {np.max(res.residual):.3e})")
    return res.v.reshape(lead + (model.r,))


def maxwellian_batch(model, U, v0=None, tol=TOL, max_iter=MAX_ITER):
    """Maxwellians of a batch ``(B, n)``; returns ``(M, EquilibriumSolve)`` without raising."""
    U = np.atleast_2d(as_state(model, U))
    k = model.n - model.r
    V = U @ model.P.T
    u, v = V[:, :k], V[:, k:]
    res = solve_equilibrium_batch(model, u, v if v0 is None else v0, tol=tol, max_iter=max_iter)
    M = join(model, u, res.v)
    M[~res.converged] = np.nan
    return M, res


def maxwellian(model, U, v0=None, tol=TOL, max_iter=MAX_ITER):
    """Maxwellian ``M(U) = P^{-1}(u, h(u))`` of a single state."""
    U = as_state(model, U)
    if U.ndim != 1:
        raise ValueError("maxwellian expects a single state; use maxwellian_batch for batches")
    M, res = maxwellian_batch(model, U, v0=v0, tol=tol, max_iter=max_iter)
    if res.status[0] == LEFT_DOMAIN:
        raise StateSpaceExit("equilibrium Newton left the state space")
    if not res.converged[0]:
        raise NoConvergence(f"equilibrium Newton did not converge (residual {res.residual[0]:.3e})")
    # u-part copied verbatim from P U (only v is solved for)
    return MaxwellianResult(M=M[0], iterations=int(res.iterations[0]),
                            residual=float(res.residual[0]), converged=True)


def random_starts(model, U, count, rng, shrink=0.5, max_tries=60):
    """``count`` initial guesses per row of ``U`` with ``(u, v0)`` in ``G``.

    Each guess blends the row's own ``v`` with the ``v`` of a random box draw,
    shrinking the blend toward the row until the pair is admissible (always
    possible since ``G`` is open).
    """
    U = np.atleast_2d(U)
    k = model.n - model.r
    V = U @ model.P.T
    u, v = V[:, :k], V[:, k:]
    lo, hi = model.box[:, 0], model.box[:, 1]
    starts = np.empty((U.shape[0], count, model.r))
    for c in range(count):
        other = model.from_sample(lo + (hi - lo) * rng.random((U.shape[0], lo.size)))
        target = (other @ model.P.T)[:, k:]
        s = np.ones(U.shape[0])
        cand = target.copy()
        for _ in range(max_tries):
            cand = v + s[:, None] * (target - v)
            ok = model.in_state_space(join(model, u, cand))
            if ok.all():
                break
            s = np.where(ok, s, s * shrink)
        cand = v + s[:, None] * (target - v)
        starts[:, c] = cand
    return starts


def multistart_spread(model, U, count, rng, tol=TOL):
    """Solve from ``count`` random starts per row; return the max spread of converged ``h(u)``.

    Returns ``(spread, n_converged, n_total)`` where spread is the largest
    sup-norm distance from each row's first converged solution.
    """
    U = np.atleast_2d(U)
    k = model.n - model.r
    u = (U @ model.P.T)[:, :k]
    starts = random_starts(model, U, count, rng)
    B = U.shape[0]
    uu = np.repeat(u, count, axis=0)
    res = solve_equilibrium_batch(model, uu, starts.reshape(B * count, model.r), tol=tol)
    sol = res.v.reshape(B, count, model.r)
    conv = res.converged.reshape(B, count)
    spread = 0.0
    for b in range(B):
        good = sol[b, conv[b]]
        if len(good) > 1:
            scale = max(1.0, float(np.max(np.abs(good[0]))))
            spread = max(spread, float(np.max(np.abs(good - good[0]))) / scale)
    return spread, int(conv.sum()), B * count
