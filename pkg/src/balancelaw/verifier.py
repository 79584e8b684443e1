"""Sample-based certification of the structural properties of a model.

Each ``check_*`` function evaluates one property over a batch of states and
returns a :class:`CheckRecord`. :func:`run_full_suite` runs them all, turns
exceptions into failed records and assembles a deterministic report.
"""

import json
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field, replace

import numpy as np

from .core import apply_linear_transform, flux_jacobian, join, source_jacobian
from .errors import (
    BalanceLawError,
    MaxwellianUnavailable,
    NoEquilibriumFound,
    NotEquilibrium,
    RankMismatch,
    SamplingExhausted,
)
from .linalg import (
    KERNEL_CUTOFF,
    asymmetry,
    max_eigenvalue,
    max_principal_angle,
    min_eigenvalue,
    orthonormal_rows,
    random_well_conditioned,
)
from .maxwellian import maxwellian_batch, multistart_spread, solve_equilibrium_batch

CHECKS = (
    "entropy_structure",
    "source_factorization",
    "null_space_constancy",
    "dissipation_inequality",
    "equilibrium_characterizations",
    "equilibrium_jacobian",
    "qv_invertibility",
    "maxwellian_bounds",
    "maxwellian_uniqueness",
    "transform_invariance",
)


@dataclass(frozen=True)
class SampleSpec:
    count: int = 1000
    seed: int = 42
    box: tuple = None

    def __post_init__(self):
        if self.count < 1:
            raise ValueError("sample count must be positive")


@dataclass(frozen=True)
class Tolerances:
    analytic: float = 1e-10
    symmetry: float = 1e-12
    fd: float = 1e-5
    angle: float = 1e-8
    qv_condition: float = 1e8
    ratio_floor: float = 1e-3
    transform_angle: float = 1e-6
    transform_condition: float = 10.0
    equilibria: int = 10
    multistart_states: int = 100
    multistart_starts: int = 10

    def scaled(self, factor):
        """Loosen every residual tolerance by ``factor``."""
        return replace(self, analytic=self.analytic * factor, symmetry=self.symmetry * factor,
                       fd=self.fd * factor, angle=self.angle * factor,
                       qv_condition=self.qv_condition * factor)


@dataclass
class CheckRecord:
    name: str
    passed: bool
    worst_residual: float
    tolerance: float
    worst_state: list = None
    details: dict = field(default_factory=dict)
    error: str = None

    def to_dict(self):
        return _clean(asdict(self))


@dataclass
class VerificationReport:
    model: dict
    sample: dict
    tolerances: dict
    checks: list
    wall_time: float = 0.0

    @property
    def passed(self):
        return all(c.passed for c in self.checks)

    def check(self, name):
        for c in self.checks:
            if c.name == name:
                return c
        raise KeyError(name)

    def to_dict(self):
        # wall time is excluded so that reports are byte-identical across runs
        return {
            "model": _clean(self.model),
            "sample": _clean(self.sample),
            "tolerances": _clean(self.tolerances),
            "checks": [c.to_dict() for c in self.checks],
            "passed": self.passed,
        }

    def to_json(self):
        return json.dumps(self.to_dict(), sort_keys=True, indent=2) + "\n"


def _clean(obj):
    """Convert numpy scalars/arrays to plain JSON types; non-finite floats become strings."""
    if isinstance(obj, dict):
        return {str(k): _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _clean(obj.tolist())
    if isinstance(obj, (np.bool_, bool)):
        return bool(obj)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        x = float(obj)
        return x if np.isfinite(x) else repr(x)
    return obj


# -- sampling -----------------------------------------------------------------

def sample_states(model, spec):
    """Draw ``spec.count`` states uniformly from the sampling box, rejecting non-G draws."""
    box = np.asarray(model.box if spec.box is None else spec.box, dtype=float)
    lo, hi = box[:, 0], box[:, 1]
    rng = np.random.default_rng(spec.seed)
    kept, attempts = [], 0
    need = spec.count
    while need > 0:
        if attempts >= 100 * spec.count:
            raise SamplingExhausted(
                f"only {spec.count - need} of {spec.count} draws landed in G after {attempts} attempts")
        batch = min(max(need, 16), 100 * spec.count - attempts)
        X = lo + (hi - lo) * rng.random((batch, lo.size))
        attempts += batch
        U = model.from_sample(X)
        ok = model.in_state_space(U)
        kept.append(U[ok][:need])
        need -= min(int(ok.sum()), need)
    return np.concatenate(kept, axis=0)


def _states(model, sample):
    if isinstance(sample, SampleSpec):
        return sample_states(model, sample)
    return np.atleast_2d(np.asarray(sample, dtype=float))


def _worst(resid, states):
    i = int(np.nanargmax(resid)) if np.size(resid) else 0
    worst = float(resid[i]) if np.size(resid) else 0.0
    return worst, (states[i].tolist() if len(states) else None)


def _norm(x):
    return np.linalg.norm(x, axis=-1)


def _matvec(A, x):
    return np.einsum("...ij,...j->...i", A, x)


# -- entropy structure ----------------------------------------------------------

def check_entropy_structure(model, sample, tol_sym=None, tol_pd=0.0):
    """``eta_UU`` positive definite and ``eta_UU F_jU`` symmetric at every state."""
    U = _states(model, sample)
    if tol_sym is None:
        tol_sym = 1e-10 if model.has_flux_jacobian else 1e-5
    H = model.entropy_hessian(U)
    resid = np.zeros(len(U))
    for j in range(model.d):
        S = H @ flux_jacobian(model, U, j)
        scale = 1.0 + np.max(np.abs(S), axis=(-2, -1))
        resid = np.maximum(resid, asymmetry(S) / scale)
    min_eig = min_eigenvalue(H)
    worst, state = _worst(resid, U)
    passed = bool(worst <= tol_sym and np.all(min_eig > tol_pd))
    return CheckRecord("entropy_structure", passed, worst, tol_sym, state,
                       {"min_hessian_eigenvalue": float(np.min(min_eig)), "tol_pd": tol_pd,
                        "analytic_jacobian": bool(model.has_flux_jacobian)})


# -- source factorization -------------------------------------------------------

def check_source_factorization(model, sample, tol=1e-10, tol_sym=1e-12):
    """``Q = -L eta_U`` (relative), ``L`` symmetric and non-negative definite."""
    U = _states(model, sample)
    Q = model.source(U)
    L = model.dissipation_matrix(U)
    g = model.entropy_gradient(U)
    resid = _norm(Q + _matvec(L, g)) / (1.0 + _norm(Q))
    sym = asymmetry(L)
    min_eig = min_eigenvalue(L)
    worst, state = _worst(resid, U)
    passed = bool(worst <= tol and np.max(sym) <= tol_sym and np.min(min_eig) >= -tol)
    return CheckRecord("source_factorization", passed, worst, tol, state,
                       {"max_asymmetry": float(np.max(sym)), "tol_symmetry": tol_sym,
                        "min_eigenvalue": float(np.min(min_eig))})


# -- constant kernel ------------------------------------------------------------

def _kernels(L, cutoff=KERNEL_CUTOFF):
    """Kernel bases (rows of ``vh``) and their dimensions for a stack of matrices."""
    _, s, vh = np.linalg.svd(L)
    smax = s[..., :1]
    zero = (s <= cutoff * smax) | (smax == 0.0)
    return vh, np.sum(zero, axis=-1)


def check_null_space_constancy(model, sample, tol_angle=1e-8):
    """``dim ker L = n - r`` at every state and the kernel never rotates."""
    U = _states(model, sample)
    k = model.n - model.r
    vh, dims = _kernels(model.dissipation_matrix(U))
    bad = np.flatnonzero(dims != k)
    if bad.size:
        i = int(bad[0])
        raise RankMismatch(f"kernel dimension {int(dims[i])} != n - r = {k} at sample {i}")
    K = np.swapaxes(vh[:, model.n - k:, :], -1, -2)  # (B, n, k) orthonormal columns
    ref = K[0]
    declared = orthonormal_rows(model.P[:k])
    if k == 0:
        angles = np.zeros(len(U))
        declared_angle = 0.0
    else:
        angles = np.linalg.norm(K - ref @ (ref.T @ K), ord=2, axis=(-2, -1))
        angles = np.arcsin(np.minimum(1.0, angles))
        declared_angle = max_principal_angle(ref, declared)
    worst, state = _worst(angles, U)
    passed = bool(worst <= tol_angle and declared_angle <= tol_angle)
    return CheckRecord("null_space_constancy", passed, worst, tol_angle, state,
                       {"kernel_dimension": k, "angle_to_transform_rows": declared_angle})


# -- dissipation ----------------------------------------------------------------

def check_dissipation_inequality(model, sample, tol=1e-10):
    """``eta_U . Q + |Q|^2 / lambda_max(L) <= 0``, and ``Q = 0`` wherever ``L`` vanishes."""
    U = _states(model, sample)
    Q = model.source(U)
    g = model.entropy_gradient(U)
    lam = max_eigenvalue(model.dissipation_matrix(U))
    q2 = np.sum(Q * Q, axis=-1)
    degenerate = lam < 1e-14
    safe = np.where(degenerate, 1.0, lam)
    lhs = np.sum(g * Q, axis=-1) + np.where(degenerate, 0.0, q2 / safe)
    resid = np.maximum(lhs, 0.0) / (1.0 + q2)
    resid = np.where(degenerate, np.maximum(resid, np.sqrt(q2)), resid)
    worst, state = _worst(resid, U)
    return CheckRecord("dissipation_inequality", bool(worst <= tol), worst, tol, state,
                       {"degenerate_states": int(degenerate.sum()),
                        "max_entropy_production": float(np.max(np.sum(g * Q, axis=-1)))})


# -- equilibrium characterizations ----------------------------------------------

def equilibrium_states(model, U, count):
    """Maxwellians of the first sampled states whose Newton solve converges."""
    M, res = maxwellian_batch(model, U[: max(count * 5, count)])
    M = M[res.converged][:count]
    if len(M) == 0:
        raise NoEquilibriumFound("the Maxwellian solver failed for every sampled state")
    return M


def check_equilibrium_characterizations(model, sample, tol=1e-10, n_equilibria=10,
                                        indicator_tol=1e-8):
    """``Q = 0 <=> eta_U.Q = 0 <=> L eta_U = 0``, and ``eta_U(U_e) . Q(U) = 0``."""
    U = _states(model, sample)
    Ue = equilibrium_states(model, U, n_equilibria)
    allU = np.concatenate([U, Ue], axis=0)
    Q = model.source(allU)
    g = model.entropy_gradient(allU)
    a = _norm(Q) <= indicator_tol
    b = np.abs(np.sum(g * Q, axis=-1)) <= indicator_tol
    c = _norm(_matvec(model.dissipation_matrix(allU), g)) <= indicator_tol
    mismatch = (a != b) | (b != c)
    missed = ~a[len(U):]
    Qs = model.source(U)
    ge = model.entropy_gradient(Ue)
    orth = np.abs(Qs @ ge.T) / (1.0 + _norm(Qs))[:, None]
    worst_per_state = np.max(orth, axis=1)
    worst, state = _worst(worst_per_state, U)
    passed = bool(worst <= tol and not mismatch.any() and not missed.any())
    return CheckRecord("equilibrium_characterizations", passed, worst, tol, state,
                       {"equilibria": int(len(Ue)), "indicator_mismatches": int(mismatch.sum()),
                        "equilibria_not_detected": int(missed.sum()),
                        "indicator_tol": indicator_tol})


# -- linearization at equilibria ------------------------------------------------

def _require_equilibrium(model, Ue, tol):
    Q = _norm(model.source(Ue))
    if np.any(Q > tol):
        i = int(np.argmax(Q))
        raise NotEquilibrium(f"|Q| = {Q[i]:.3e} exceeds {tol:.1e} at state {i}")


def check_equilibrium_jacobian(model, equilibria, tol=1e-10, tol_fd=1e-5):
    """``B = Q_U eta_UU^{-1}`` is symmetric, non-positive and has kernel ``ker L``."""
    Ue = np.atleast_2d(np.asarray(equilibria, dtype=float))
    _require_equilibrium(model, Ue, tol)
    k = model.n - model.r
    QU = source_jacobian(model, Ue)
    H = model.entropy_hessian(Ue)
    B = np.swapaxes(np.linalg.solve(np.swapaxes(H, -1, -2), np.swapaxes(QU, -1, -2)), -1, -2)
    scale = 1.0 + np.max(np.abs(B), axis=(-2, -1))
    asym = asymmetry(B) / scale
    top = max_eigenvalue(B) / scale
    _, s, vh = np.linalg.svd(B)
    kerB = np.swapaxes(vh[:, model.n - k:, :], -1, -2)
    kernel_sv = s[:, model.n - k] / scale if k else np.zeros(len(Ue))
    angles = np.zeros(len(Ue))
    for i, Lm in enumerate(model.dissipation_matrix(Ue)):
        _, sl, vl = np.linalg.svd(Lm)
        kerL = vl[model.n - k:].T
        angles[i] = max_principal_angle(kerL, kerB[i]) if k else 0.0
    resid = np.maximum.reduce([asym, np.maximum(top, 0.0), angles, kernel_sv])
    worst, state = _worst(resid, Ue)
    return CheckRecord("equilibrium_jacobian", bool(worst <= tol_fd), worst, tol_fd, state,
                       {"max_asymmetry": float(np.max(asym)),
                        "max_eigenvalue": float(np.max(top)),
                        "max_kernel_angle": float(np.max(angles)),
                        "max_kernel_singular_value": float(np.max(kernel_sv)),
                        "analytic_source_jacobian": bool(model.has_source_jacobian)})


def partitioned_source_jacobian(model, U):
    """``q_v``: trailing ``r x r`` block of ``P Q_U P^{-1}``."""
    k = model.n - model.r
    J = model.P @ source_jacobian(model, U) @ model.P_inv
    return J[..., k:, k:]


def check_qv_invertibility(model, equilibria, tol=1e-10, max_condition=1e8):
    Ue = np.atleast_2d(np.asarray(equilibria, dtype=float))
    _require_equilibrium(model, Ue, tol)
    if model.r == 0:
        return CheckRecord("qv_invertibility", True, 0.0, max_condition, None, {"r": 0})
    s = np.linalg.svd(partitioned_source_jacobian(model, Ue), compute_uv=False)
    cond = np.where(s[:, -1] > 0, s[:, 0] / np.where(s[:, -1] > 0, s[:, -1], 1.0), np.inf)
    worst, state = _worst(cond, Ue)
    return CheckRecord("qv_invertibility", bool(worst <= max_condition), worst, max_condition,
                       state, {"min_singular_value": float(np.min(s[:, -1]))})


# -- Maxwellian bounds and uniqueness ---------------------------------------------

def near_equilibrium_states(model, U, rng, max_tries=30):
    """``P^{-1}(u, h(u) + delta)`` with ``delta`` uniform in a ball of radius ``0.1|h| + 0.01``.

    Returns ``(states, maxwellians, unavailable)``; rows whose equilibrium
    solve fails are dropped and counted.
    """
    k, r = model.n - model.r, model.r
    V = U @ model.P.T
    u = V[:, :k]
    res = solve_equilibrium_batch(model, u, V[:, k:])
    ok = res.converged
    u, h = u[ok], res.v[ok]
    direction = rng.standard_normal((len(u), r))
    direction /= np.maximum(_norm(direction), 1e-300)[:, None]
    radius = (0.1 * _norm(h) + 0.01) * rng.random(len(u)) ** (1.0 / max(r, 1))
    delta = direction * radius[:, None]
    for _ in range(max_tries):
        inside = model.in_state_space(join(model, u, h + delta))
        if inside.all():
            break
        delta[~inside] *= 0.5
    X = join(model, u, h + delta)
    M = join(model, u, h)
    return X, M, int((~ok).sum())


def check_maxwellian_bounds(model, sample, tol=1e-10, ratio_floor=1e-3, seed=0):
    """Empirical ``c <= |Q(U)| / |U - M(U)| <= C`` and ``U - M`` has zero conserved part."""
    U = _states(model, sample)
    rng = np.random.default_rng(seed)
    X, M0, failed = near_equilibrium_states(model, U, rng)
    if len(X) == 0:
        raise MaxwellianUnavailable("no near-equilibrium state has a computable Maxwellian")
    M, res = maxwellian_batch(model, X)
    ok = res.converged
    failed += int((~ok).sum())
    X, M = X[ok], M[ok]
    k = model.n - model.r
    dist = _norm(X - M)
    Qn = _norm(model.source(X))
    nz = dist > 1e-12 * (1.0 + _norm(X))
    ratio = Qn[nz] / dist[nz]
    c_est = float(np.min(ratio)) if ratio.size else float("nan")
    C_est = float(np.max(ratio)) if ratio.size else float("nan")
    orth = _norm(((X - M) @ model.P.T)[:, :k]) / (1.0 + _norm(X))
    worst, state = _worst(orth, X)
    consistent = float(np.max(_norm(M - M0[ok]) / (1.0 + _norm(M)))) if len(M) else 0.0
    passed = bool(ratio.size > 0 and np.isfinite(C_est) and c_est >= ratio_floor
                  and worst <= tol and consistent <= 1e-8)
    return CheckRecord("maxwellian_bounds", passed, worst, tol, state,
                       {"ratio_lower": c_est, "ratio_upper": C_est, "ratio_floor": ratio_floor,
                        "states_used": int(ratio.size), "maxwellian_unavailable": failed,
                        "maxwellian_mismatch": consistent})


def check_maxwellian_uniqueness(model, sample, tol=1e-10, states=100, starts=10, seed=0):
    """Multi-start Newton solves agree, and ``|Q(M)| <= tol`` at every computed Maxwellian."""
    U = _states(model, sample)
    rng = np.random.default_rng(seed)
    spread, conv, total = multistart_spread(model, U[:states], starts, rng)
    M, res = maxwellian_batch(model, U)
    if not res.converged.any():
        raise MaxwellianUnavailable("no sampled state has a computable Maxwellian")
    Qm = _norm(model.source(M[res.converged]))
    worst_q, state = _worst(Qm, M[res.converged])
    worst = max(spread, worst_q)
    return CheckRecord("maxwellian_uniqueness", bool(worst <= tol), worst, tol, state,
                       {"multistart_spread": spread, "multistart_converged": conv,
                        "multistart_total": total, "max_source_at_maxwellian": worst_q,
                        "maxwellian_failures": int((~res.converged).sum())})


# -- suite --------------------------------------------------------------------------

def _guarded(name, tolerance, fn):
    try:
        return fn()
    except (BalanceLawError, np.linalg.LinAlgError, FloatingPointError, ValueError) as exc:
        return CheckRecord(name, False, float("inf"), tolerance, None, {},
                           f"{type(exc).__name__}: {exc}")


def _base_checks(model, U, tol, workers=1):
    """Run every non-recursive check on the states ``U``; order is fixed."""
    sym_tol = tol.analytic if model.has_flux_jacobian else tol.fd
    cache = {}

    def equilibria():
        if "Ue" not in cache:
            cache["Ue"] = equilibrium_states(model, U, tol.equilibria)
        return cache["Ue"]

    jobs = [
        ("entropy_structure", sym_tol, lambda: check_entropy_structure(model, U, sym_tol)),
        ("source_factorization", tol.analytic,
         lambda: check_source_factorization(model, U, tol.analytic, tol.symmetry)),
        ("null_space_constancy", tol.angle, lambda: check_null_space_constancy(model, U, tol.angle)),
        ("dissipation_inequality", tol.analytic,
         lambda: check_dissipation_inequality(model, U, tol.analytic)),
        ("equilibrium_characterizations", tol.analytic,
         lambda: check_equilibrium_characterizations(model, U, tol.analytic, tol.equilibria)),
        ("equilibrium_jacobian", tol.fd,
         lambda: check_equilibrium_jacobian(model, equilibria(), tol.analytic, tol.fd)),
        ("qv_invertibility", tol.qv_condition,
         lambda: check_qv_invertibility(model, equilibria(), tol.analytic, tol.qv_condition)),
        ("maxwellian_bounds", tol.analytic,
         lambda: check_maxwellian_bounds(model, U, tol.analytic, tol.ratio_floor)),
        ("maxwellian_uniqueness", tol.analytic,
         lambda: check_maxwellian_uniqueness(model, U, tol.analytic, tol.multistart_states,
                                             tol.multistart_starts)),
    ]
    if workers > 1:
        # equilibria are computed once up front so that worker threads share them
        _guarded("equilibria", 0.0, equilibria)
        with ThreadPoolExecutor(max_workers=workers) as pool:
            futures = [pool.submit(_guarded, name, t, fn) for name, t, fn in jobs]
            return [f.result() for f in futures]
    return [_guarded(name, t, fn) for name, t, fn in jobs]


def check_transform_invariance(model, sample, base_records, tol=Tolerances(), seed=0):
    """Re-run the suite on ``V = A U`` for a random ``A`` with ``cond(A) = transform_condition``.

    Passes when every check has the same outcome as on the original model and
    ``ker(A L A^T)`` equals ``A^{-T} ker L`` at the sampled states.
    """
    U = _states(model, sample)
    rng = np.random.default_rng(seed + 7919)
    A = random_well_conditioned(model.n, rng, tol.transform_condition)
    tm = apply_linear_transform(model, A)
    V = U @ A.T
    records = _base_checks(tm, V, tol.scaled(np.linalg.cond(A)))
    before = {c.name: c.passed for c in base_records}
    after = {c.name: c.passed for c in records}
    same = all(before.get(name) == after[name] for name in after)

    k = model.n - model.r
    angles = np.zeros(min(len(U), 100))
    if 0 < k:
        A_invT = np.linalg.inv(A).T
        vh, _ = _kernels(model.dissipation_matrix(U[: len(angles)]))
        vt, dims = _kernels(tm.dissipation_matrix(V[: len(angles)]))
        for i in range(len(angles)):
            mapped = orthonormal_rows((A_invT @ vh[i, model.n - k:].T).T)
            if dims[i] != k:
                angles[i] = np.pi / 2
            else:
                angles[i] = max_principal_angle(mapped, vt[i, model.n - k:].T)
    worst, state = _worst(angles, U)
    passed = bool(same and worst <= tol.transform_angle)
    return CheckRecord("transform_invariance", passed, worst, tol.transform_angle, state,
                       {"condition_number": float(np.linalg.cond(A)),
                        "transformed_outcomes": after, "outcomes_match": same})


def run_full_suite(model, sample=SampleSpec(), tolerances=Tolerances(), workers=1):
    """All checks on one fixed sample; never raises for a failing check."""
    t0 = time.perf_counter()
    spec_echo = asdict(sample) if isinstance(sample, SampleSpec) else {"count": len(sample)}
    try:
        U = _states(model, sample)
    except BalanceLawError as exc:
        records = [CheckRecord(name, False, float("inf"), 0.0, None, {},
                               f"{type(exc).__name__}: {exc}") for name in CHECKS]
        return VerificationReport(model.describe(), spec_echo, asdict(tolerances), records,
                                  time.perf_counter() - t0)
    records = _base_checks(model, U, tolerances, workers)
    records.append(_guarded("transform_invariance", tolerances.transform_angle,
                            lambda: check_transform_invariance(model, U, records, tolerances)))
    return VerificationReport(model.describe(), spec_echo, asdict(tolerances), records,
                              time.perf_counter() - t0)
