"""First-order finite-volume IMEX solver on periodic 1-D grids.

Three modes share one scheme:

``full``        ``U_t + F(U)_x = Q(U) / eps``
``simplified``  ``U_t + F(U)_x = -L(U_*) eta_U(U) / eps``
``equilibrium`` ``u_t + f(u, h(u))_x = 0`` with ``v = h(u)`` enforced every step

Transport is explicit Rusanov; the source is backward Euler, solved cell by
cell with Newton in the non-equilibrium coordinates ``v`` (the conserved
coordinates ``u`` are untouched by the source).
"""

import csv
import io
import math
from dataclasses import dataclass, field

import numpy as np

from .core import join, source_jacobian
from .errors import (
    GridMismatch,
    NewtonFailure,
    NonFiniteResult,
    StateSpaceExit,
    StateSpaceViolation,
)
from .maxwellian import maxwellian_batch, solve_equilibrium_batch

MODES = ("full", "simplified", "equilibrium")


@dataclass(frozen=True)
class Grid1D:
    cells: int
    x_min: float = 0.0
    x_max: float = 1.0
    boundary: str = "periodic"

    def __post_init__(self):
        if self.cells < 4:
            raise ValueError("need at least 4 cells")
        if not self.x_max > self.x_min:
            raise ValueError("x_max must exceed x_min")
        if self.boundary != "periodic":
            raise ValueError("only periodic boundaries are supported")

    @property
    def dx(self):
        return (self.x_max - self.x_min) / self.cells

    @property
    def centers(self):
        return self.x_min + (np.arange(self.cells) + 0.5) * self.dx


@dataclass(frozen=True)
class SolverConfig:
    mode: str = "full"
    eps: float = 0.1
    cfl: float = 0.4
    t_final: float = 0.5
    u_star: tuple = None
    snapshot_every: int = 0
    time_step: str = "fixed"
    newton_tol: float = 1e-12
    newton_max_iter: int = 50

    def __post_init__(self):
        if self.mode not in MODES:
            raise ValueError(f"mode must be one of {MODES}")
        if self.mode != "equilibrium" and not self.eps > 0:
            raise ValueError("eps must be positive")
        if not 0 < self.cfl < 1:
            raise ValueError("cfl must lie in (0, 1)")
        if not self.t_final > 0:
            raise ValueError("t_final must be positive")
        if self.time_step not in ("fixed", "adaptive"):
            raise ValueError("time_step must be 'fixed' or 'adaptive'")


@dataclass
class Trajectory:
    grid: Grid1D
    config: SolverConfig
    times: list
    states: list
    entropy: list
    step_times: np.ndarray = None
    step_entropy: np.ndarray = None
    newton_iterations: int = 0
    u_star: np.ndarray = None
    meta: dict = field(default_factory=dict)

    @property
    def final(self):
        return self.states[-1]

    def entropy_csv(self):
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["t", "total_entropy"])
        for t, e in zip(self.times, self.entropy):
            w.writerow([_fmt(t), _fmt(e)])
        return buf.getvalue()

    def states_csv(self):
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        n = self.states[0].shape[1]
        w.writerow(["t", "x"] + [f"comp_{k}" for k in range(n)])
        x = self.grid.centers
        for t, U in zip(self.times, self.states):
            for xi, row in zip(x, U):
                w.writerow([_fmt(t), _fmt(xi)] + [_fmt(c) for c in row])
        return buf.getvalue()


def _fmt(x):
    return format(float(x), ".17g")


# -- transport ------------------------------------------------------------------

def numerical_flux(model, U_L, U_R, j=0):
    """Rusanov flux ``(F(U_L) + F(U_R))/2 - s (U_R - U_L)/2`` with ``s`` the larger spectral radius."""
    U_L = np.asarray(U_L, dtype=float)
    U_R = np.asarray(U_R, dtype=float)
    s = np.maximum(model.max_wave_speed(U_L, j), model.max_wave_speed(U_R, j))
    F = 0.5 * (model.flux(U_L, j) + model.flux(U_R, j)) - 0.5 * np.asarray(s)[..., None] * (U_R - U_L)
    if not np.all(np.isfinite(F)):
        raise NonFiniteResult("numerical flux is not finite")
    return F


def transport_step(model, U, dt, dx):
    """Explicit conservative update on a periodic grid."""
    F = numerical_flux(model, U, np.roll(U, -1, axis=0))  # F[i] at interface i + 1/2
    return U - (dt / dx) * (F - np.roll(F, 1, axis=0))


def max_speed(model, U):
    return float(np.max(model.max_wave_speed(U, 0)))


# -- implicit source --------------------------------------------------------------

class _SourceSolver:
    """Backward-Euler source update ``v = v* + (dt/eps) q(u, v)`` per cell."""

    def __init__(self, model, config, u_star=None):
        self.model = model
        self.config = config
        self.k = model.n - model.r
        if config.mode == "simplified":
            self.L_star = model.dissipation_matrix(u_star)

    def q(self, u, v):
        m = self.model
        U = join(m, u, v)
        if self.config.mode == "simplified":
            Q = -(m.entropy_gradient(U) @ self.L_star.T)
        else:
            Q = m.source(U)
        return (Q @ m.P.T)[..., self.k:]

    def q_v(self, u, v):
        m, k = self.model, self.k
        U = join(m, u, v)
        if self.config.mode == "simplified":
            J = -(m.P @ self.L_star @ m.entropy_hessian(U) @ m.P_inv)
            return J[..., k:, k:]
        if m.has_source_jacobian:
            return (m.P @ source_jacobian(m, U) @ m.P_inv)[..., k:, k:]
        # central differences in v only (r columns instead of n)
        h = np.finfo(float).eps ** (1.0 / 3.0) * np.maximum(1.0, np.abs(v))
        cols = []
        for c in range(m.r):
            dv = np.zeros_like(v)
            dv[..., c] = h[..., c]
            cols.append((self.q(u, v + dv) - self.q(u, v - dv)) / (2.0 * h[..., c, None]))
        return np.stack(cols, axis=-1)

    def solve(self, U_star, dt, t):
        cfg, m, k = self.config, self.model, self.k
        if math.isinf(cfg.eps):
            return U_star, 0
        V = U_star @ m.P.T
        u, v0 = V[:, :k], V[:, k:]
        if m.r == 0:
            return U_star, 0
        a = dt / cfg.eps
        v = v0.copy()
        active = np.ones(len(v), dtype=bool)
        total = 0
        eye = np.eye(m.r)
        for it in range(cfg.newton_max_iter + 1):
            idx = np.flatnonzero(active)
            if idx.size == 0:
                break
            R = v[idx] - v0[idx] - a * self.q(u[idx], v[idx])
            scale = 1.0 + np.max(np.abs(v0[idx]), axis=-1)
            done = np.max(np.abs(R), axis=-1) <= cfg.newton_tol * scale
            active[idx[done]] = False
            idx, R = idx[~done], R[~done]
            if idx.size == 0:
                break
            if it == cfg.newton_max_iter:
                raise NewtonFailure(f"implicit source solve did not converge in cell {int(idx[0])} "
                                    f"at t={t:.6g}", cell=int(idx[0]), time=t)
            J = eye - a * self.q_v(u[idx], v[idx])
            step = -np.linalg.solve(J, R[..., None])[..., 0]
            total += 1
            lam = np.ones(idx.size)
            for _ in range(30):
                ok = m.in_state_space(join(m, u[idx], v[idx] + lam[:, None] * step))
                if ok.all():
                    break
                lam = np.where(ok, lam, 0.5 * lam)
            else:
                bad = int(idx[np.flatnonzero(~ok)[0]])
                raise NewtonFailure(f"implicit source Newton left the state space in cell {bad} "
                                    f"at t={t:.6g}", cell=bad, time=t)
            v[idx] = v[idx] + lam[:, None] * step
        return join(m, u, v), total


def _project_to_equilibrium(model, U, v_guess, t):
    k = model.n - model.r
    u = (U @ model.P.T)[:, :k]
    res = solve_equilibrium_batch(model, u, v_guess)
    if not res.converged.all():
        bad = int(np.flatnonzero(~res.converged)[0])
        raise NewtonFailure(f"equilibrium projection failed in cell {bad} at t={t:.6g} "
                            f"({res.status[bad]})", cell=bad, time=t)
    return join(model, u, res.v), res.v, int(res.iterations.sum())


def step_imex(model, config, U, dt, dx, t=0.0, source=None, v_guess=None):
    """One transport + implicit-source step; returns ``(U_new, newton_iterations)``.

    In equilibrium mode the transported state is projected back onto its
    Maxwellian (``v = h(u)``) instead of relaxing with a finite ``eps``.
    """
    U_t = transport_step(model, U, dt, dx)
    if not np.all(model.in_state_space(U_t)):
        bad = int(np.flatnonzero(~model.in_state_space(U_t))[0])
        raise StateSpaceExit(f"cell {bad} left the state space at t={t + dt:.6g}")
    if config.mode == "equilibrium":
        k = model.n - model.r
        if v_guess is None:
            v_guess = (U_t @ model.P.T)[:, k:]
        U_new, _, its = _project_to_equilibrium(model, U_t, v_guess, t + dt)
        return U_new, its
    if source is None:
        u_star = _default_u_star(model, U) if config.u_star is None else np.asarray(config.u_star)
        source = _SourceSolver(model, config, u_star)
    return source.solve(U_t, dt, t + dt)


# -- initial data ------------------------------------------------------------------

@dataclass(frozen=True)
class InitialCondition:
    """Gaussian bump ``amplitude * exp(-((x - center)/width)^2)`` on a base state.

    ``kind="equilibrium_gaussian"`` perturbs conserved coordinate ``component``
    of the base Maxwellian and sets ``v = h(u)`` cellwise; ``kind="gaussian"``
    perturbs state component ``component`` directly (not in equilibrium).
    ``base`` defaults to the model's reference state.
    """

    kind: str = "equilibrium_gaussian"
    amplitude: float = 0.5
    width: float = 0.1
    center: float = None
    component: int = 0
    base: tuple = None

    def __post_init__(self):
        if self.kind not in ("equilibrium_gaussian", "gaussian", "uniform"):
            raise ValueError(f"unknown initial condition kind {self.kind!r}")
        if not self.width > 0:
            raise ValueError("width must be positive")


def initial_state(model, grid, ic):
    base = model.reference_state if ic.base is None else np.asarray(ic.base, dtype=float)
    x = grid.centers
    center = 0.5 * (grid.x_min + grid.x_max) if ic.center is None else ic.center
    # sum over periodic images so the bump is smooth across the boundary
    L = grid.x_max - grid.x_min
    shifts = np.arange(-3, 4)[:, None] * L
    bump = ic.amplitude * np.sum(np.exp(-(((x - center + shifts) / ic.width) ** 2)), axis=0)
    if ic.kind == "uniform":
        U = np.tile(base, (grid.cells, 1))
    elif ic.kind == "gaussian":
        U = np.tile(base, (grid.cells, 1))
        U[:, ic.component] += bump
    else:
        k = model.n - model.r
        if not 0 <= ic.component < k:
            raise ValueError(f"component must index a conserved coordinate (< {k})")
        M, res = maxwellian_batch(model, base)
        if not res.converged[0]:
            raise StateSpaceExit("base state has no Maxwellian")
        V = np.tile(M[0] @ model.P.T, (grid.cells, 1))
        V[:, ic.component] += bump
        sol = solve_equilibrium_batch(model, V[:, :k], V[:, k:])
        if not sol.converged.all():
            raise StateSpaceExit("equilibrium initial data could not be constructed")
        U = join(model, V[:, :k], sol.v)
    if not np.all(model.in_state_space(U)):
        raise StateSpaceViolation("initial data leaves the state space")
    return U


def _default_u_star(model, U0):
    """Maxwellian of the spatial mean of the initial data."""
    M, res = maxwellian_batch(model, U0.mean(axis=0))
    if not res.converged[0]:
        raise StateSpaceExit("the mean initial state has no Maxwellian; pass u_star explicitly")
    return M[0]


def total_entropy(model, U, dx):
    # fixed left-to-right summation order
    return float(math.fsum(model.entropy(U) * dx))


# -- driver --------------------------------------------------------------------------

def simulate(model, config, grid, ic=None, U0=None):
    """Advance ``U0`` (or the state built from ``ic``) to ``config.t_final``."""
    if U0 is None:
        U0 = initial_state(model, grid, ic or InitialCondition())
    U = np.array(U0, dtype=float)
    if U.shape != (grid.cells, model.n):
        raise ValueError(f"initial data must have shape {(grid.cells, model.n)}")
    if not np.all(model.in_state_space(U)):
        raise StateSpaceViolation("initial data leaves the state space")
    dx = grid.dx
    u_star = None
    source = None
    if config.mode == "simplified":
        u_star = _default_u_star(model, U) if config.u_star is None else np.asarray(config.u_star, float)
        if not bool(model.in_state_space(u_star)):
            raise StateSpaceViolation("u_star lies outside the state space")
    if config.mode != "equilibrium":
        source = _SourceSolver(model, config, u_star)
    v_guess = None
    if config.mode == "equilibrium":
        k = model.n - model.r
        U, v_guess, _ = _project_to_equilibrium(model, U, (U @ model.P.T)[:, k:], 0.0)

    s0 = max_speed(model, U)
    dt = config.cfl * dx / s0
    n_steps = max(1, math.ceil(config.t_final / dt - 1e-12))
    dt = config.t_final / n_steps

    times, states, ent = [0.0], [U.copy()], [total_entropy(model, U, dx)]
    step_t, step_e = [0.0], [ent[0]]
    newton = 0
    t, step = 0.0, 0
    while t < config.t_final * (1 - 1e-14):
        if config.time_step == "adaptive":
            dt = min(config.cfl * dx / max_speed(model, U), config.t_final - t)
        elif max_speed(model, U) * dt / dx > 1.0:
            raise StateSpaceExit(f"CFL number exceeded 1 at t={t:.6g}; use time_step='adaptive'")
        if config.mode == "equilibrium":
            U_t = transport_step(model, U, dt, dx)
            inside = model.in_state_space(U_t)
            if not inside.all():
                raise StateSpaceExit(f"cell {int(np.flatnonzero(~inside)[0])} left the state "
                                     f"space at t={t + dt:.6g}")
            U, v_guess, its = _project_to_equilibrium(model, U_t, v_guess, t + dt)
        else:
            U, its = step_imex(model, config, U, dt, dx, t, source=source)
        newton += its
        step += 1
        t = step * dt if config.time_step == "fixed" else t + dt
        if not np.all(model.in_state_space(U)):
            bad = int(np.flatnonzero(~model.in_state_space(U))[0])
            raise StateSpaceExit(f"cell {bad} left the state space at t={t:.6g}")
        e = total_entropy(model, U, dx)
        step_t.append(t)
        step_e.append(e)
        last = t >= config.t_final * (1 - 1e-14)
        if last or (config.snapshot_every and step % config.snapshot_every == 0):
            times.append(t)
            states.append(U.copy())
            ent.append(e)

    return Trajectory(grid=grid, config=config, times=times, states=states, entropy=ent,
                      step_times=np.array(step_t), step_entropy=np.array(step_e),
                      newton_iterations=newton, u_star=u_star,
                      meta={"dt": dt, "steps": step, "model": model.describe()})


# -- comparison ----------------------------------------------------------------------

def compare_trajectories(A, B, norm="sup", part="all", model=None, over="final"):
    """Discrete distance between two trajectories on the same grid and time levels.

    ``part="u"`` compares only the conserved coordinates (needs ``model``).
    ``over="max"`` takes the maximum over all shared snapshots.
    """
    if A.grid != B.grid:
        raise GridMismatch("trajectories live on different grids")
    if len(A.times) != len(B.times) or not np.allclose(A.times, B.times, rtol=0,
                                                        atol=1e-12 * max(1.0, A.times[-1])):
        raise GridMismatch("trajectories have different snapshot times")
    if norm not in ("sup", "L1"):
        raise ValueError("norm must be 'sup' or 'L1'")
    pairs = list(zip(A.states, B.states))
    if over == "final":
        pairs = pairs[-1:]
    out = 0.0
    for X, Y in pairs:
        D = X - Y
        if part == "u":
            if model is None:
                raise ValueError("part='u' requires the model")
            D = (D @ model.P.T)[:, : model.n - model.r]
        if norm == "sup":
            val = float(np.max(np.abs(D)))
        else:
            val = float(np.max(np.sum(np.abs(D), axis=0) * A.grid.dx))
        out = max(out, val)
    return out


def conserved_totals(model, U, dx):
    k = model.n - model.r
    return np.array([math.fsum(col) for col in ((U @ model.P.T)[:, :k] * dx).T])
