import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from balancelaw.core import fd_jacobian
from balancelaw.errors import ConstructionError, InvalidPressureLaw, SubcharacteristicViolation
from balancelaw.linalg import asymmetry, kernel_basis, max_principal_angle, min_eigenvalue, orthonormal_rows
from balancelaw.models import (
    FAMILIES,
    CollisionTable,
    PressureLaw,
    ReactionNetwork,
    StressLaw,
    broadwell,
    build_model,
    dvm,
    euler_damping,
    nonlinear_optics,
    radiation_hydro,
    reactive_euler,
    vibrational_gas,
    viscoelastic,
)
from balancelaw.errors import ValidationError

from conftest import draw


def matvec(A, x):
    return np.einsum("...ij,...j->...i", A, x)


# -- structure shared by every catalog model ------------------------------------

def test_factorization_and_symmetry(model):
    U = draw(model, 200, seed=11)
    Q = model.source(U)
    L = model.dissipation_matrix(U)
    resid = np.linalg.norm(Q + matvec(L, model.entropy_gradient(U)), axis=-1)
    assert np.max(resid / (1 + np.linalg.norm(Q, axis=-1))) <= 1e-10
    assert np.max(asymmetry(L)) <= 1e-12 * (1 + np.abs(L).max())
    assert np.min(min_eigenvalue(L)) >= -1e-10


def test_entropy_derivatives_match_finite_differences(model):
    U = draw(model, 20, seed=12)
    g = fd_jacobian(lambda X: model.entropy(X)[..., None], U)[..., 0, :]
    assert np.max(np.abs(g - model.entropy_gradient(U))) <= 1e-6 * (1 + np.abs(g).max())
    H = fd_jacobian(model.entropy_gradient, U)
    assert np.max(np.abs(H - model.entropy_hessian(U))) <= 1e-5 * (1 + np.abs(H).max())
    assert np.min(min_eigenvalue(model.entropy_hessian(U))) > 0


def test_kernel_spanned_by_conserved_rows(model):
    declared = orthonormal_rows(model.P[: model.n - model.r])
    for U in draw(model, 50, seed=13):
        K = kernel_basis(model.dissipation_matrix(U))
        assert max_principal_angle(K, declared) <= 1e-8


def test_vectorized_evaluation_matches_loop(model):
    U = draw(model, 6, seed=14)
    batch = model.source(U)
    for i in range(6):
        assert np.array_equal(model.source(U[i]), batch[i])
    stacked = U.reshape(2, 3, model.n)
    assert np.allclose(model.dissipation_matrix(stacked).reshape(6, model.n, model.n),
                       model.dissipation_matrix(U), rtol=0, atol=0)


# -- euler with damping ------------------------------------------------------------

def test_euler_source_value():
    m = euler_damping()
    assert np.array_equal(m.source([1.0, 2.0]), [0.0, -2.0])


def test_euler_factorization_exact():
    m = euler_damping(d=2)
    U = draw(m, 100, seed=1)
    resid = m.source(U) + matvec(m.dissipation_matrix(U), m.entropy_gradient(U))
    assert np.max(np.abs(resid)) <= 1e-12


def test_euler_gamma_law_and_bad_law():
    m = euler_damping(d=1, law=PressureLaw("gamma-law", gamma=1.4))
    U = draw(m, 50)
    assert np.min(min_eigenvalue(m.entropy_hessian(U))) > 0
    with pytest.raises(InvalidPressureLaw):
        PressureLaw("gamma-law", gamma=1.0)
    with pytest.raises(InvalidPressureLaw):
        PressureLaw("stiffened")
    with pytest.raises(InvalidPressureLaw):
        euler_damping(law=PressureLaw(scale=-1.0))


# -- nonlinear optics ---------------------------------------------------------------

def test_optics_source_value():
    m = nonlinear_optics()
    U = np.array([1.0, 0, 0, 0, 0, 0, 1.0])
    assert np.allclose(m.electric_field(U), [0.5, 0, 0])
    assert m.source(U)[6] == pytest.approx(-0.75, abs=1e-15)


def test_optics_entropy_convex_on_box():
    m = nonlinear_optics()
    U = draw(m, 100, seed=2)
    assert np.all(U[:, 6] > 0.1 - 1e-15)
    assert np.min(min_eigenvalue(m.entropy_hessian(U))) > 0


# -- vibrational gas ------------------------------------------------------------

def test_vibrational_gradient_identity():
    m = vibrational_gas()
    U = draw(m, 100, seed=3)
    T1, T2 = m.temperatures(U)
    g = fd_jacobian(lambda X: m.entropy(X)[..., None], U)[..., 0, 3]
    assert np.max(np.abs(g - (1 / T1 - 1 / T2))) <= 1e-6


def test_vibrational_relaxation_entry():
    m = vibrational_gas(a=2.0)
    U = draw(m, 100, seed=4)
    T1, T2 = m.temperatures(U)
    L = m.dissipation_matrix(U)
    assert np.allclose(L[:, 3, 3], 2.0 * T1 * T2, rtol=1e-14)
    assert np.all(L[:, 3, 3] > 0)


# -- viscoelastic ---------------------------------------------------------------

def test_viscoelastic_default_equilibrium():
    m = viscoelastic()
    U = m.from_sample([1.0, 0.0, 0.0])
    assert m.source(U)[2] == pytest.approx(-0.5, abs=1e-15)
    # h^{-1}(-w) = nu exactly at p = -g(nu) = -E nu / 2
    Ue = m.from_sample([1.0, 0.0, -0.5])
    assert np.allclose(m.source(Ue), 0.0, atol=1e-15)
    assert m.h_inv(-Ue[2]) == pytest.approx(1.0, abs=1e-15)


def test_viscoelastic_relaxation_coefficient_positive():
    for law in (None, StressLaw.tanh(1.0)):
        m = viscoelastic(law=law)
        U = draw(m, 100, seed=5)
        assert np.all(m.dissipation_matrix(U)[:, 2, 2] > 0)


def test_viscoelastic_divided_difference_continuous_at_equilibrium():
    m = viscoelastic(law=StressLaw.tanh(1.0))
    nu = 1.3
    w_eq = -m.h(nu)
    vals = [m.relaxation_coefficient(np.array([nu, 0.0, w_eq + d])) for d in (0.0, 1e-9, 1e-5)]
    assert abs(vals[0] - vals[1]) < 1e-8 and abs(vals[1] - vals[2]) < 1e-4


def test_viscoelastic_subcharacteristic():
    with pytest.raises(SubcharacteristicViolation):
        viscoelastic(E=1.0, law=StressLaw.linear(1.5))


# -- radiation hydrodynamics -------------------------------------------------------

def test_radiation_equilibrium_sigma_limit():
    m = radiation_hydro(L=2)
    theta = 1.3
    U = m.from_sample([1.0, 0.1, 0.0, 0.0, theta, theta, theta])
    assert np.allclose(m.source(U), 0.0, atol=1e-14)
    limit = theta**2 * 4 * m.a_rad * theta**3
    assert np.allclose(m.sigma(U), limit, rtol=1e-14)
    # the literal quotient approaches the same value from off-equilibrium states
    V = m.from_sample([1.0, 0.1, 0.0, 0.0, theta, theta * (1 + 1e-6), theta * (1 - 1e-6)])
    assert np.allclose(m.sigma_quotient(V), m.sigma(V), rtol=1e-6)


def test_radiation_kernel_is_constant():
    m = radiation_hydro(L=2, C=0.5)
    basis = np.eye(7)[:5].copy()
    basis[4, 5:] = 0.5
    target = orthonormal_rows(basis)
    for U in draw(m, 50, seed=6):
        assert max_principal_angle(kernel_basis(m.dissipation_matrix(U)), target) <= 1e-8


def test_radiation_sigma_positive():
    m = radiation_hydro(L=4)
    assert np.all(m.sigma(draw(m, 100, seed=7)) > 0)


def test_radiation_source_balances_energy():
    m = radiation_hydro(L=3, C=2.0)
    Q = m.source(draw(m, 20, seed=8))
    assert np.allclose(Q[:, 4] + 2.0 * Q[:, 5:].sum(axis=1), 0.0, atol=1e-13)


# -- reactive Euler ---------------------------------------------------------------

def isomerization_oracle(rho_a, rho_b, theta):
    """Closed-form A <-> B kinetics for the default fixture."""
    kf = np.exp(-1.0 / theta)
    ke = np.exp(0.5 / theta)
    tau = kf * (rho_a - rho_b / ke)
    return np.stack([-tau, tau], axis=-1), ke


def test_reactive_mass_conservation():
    m = reactive_euler()
    Q = m.source(draw(m, 100, seed=9))
    assert np.max(np.abs(Q[:, :2] @ m.net.molar_masses)) <= 1e-14


def test_reactive_matches_closed_form_kinetics():
    m = reactive_euler()
    X = np.random.default_rng(10).uniform([0.2, 0.2, -1, -1, -1, 0.5], [2, 2, 1, 1, 1, 2], (100, 6))
    U = m.from_sample(X)
    assert np.allclose(m.temperature(U), X[:, 5], rtol=1e-13)
    omega, ke = isomerization_oracle(X[:, 0], X[:, 1], X[:, 5])
    assert np.allclose(m.source(U)[:, :2], omega, rtol=1e-10, atol=1e-14)
    assert np.allclose(m.equilibrium_constant(X[:, 5])[:, 0], ke, rtol=1e-13)
    fact = -matvec(m.dissipation_matrix(U), m.entropy_gradient(U))[:, :2]
    assert np.max(np.abs(fact - omega) / (1 + np.abs(omega))) <= 1e-10


def test_reactive_equilibrium_ratio():
    m = reactive_euler()
    theta = 1.4
    ke = np.exp(0.5 / theta)
    U = m.from_sample([0.5, 0.5 * ke, 0.1, 0.0, 0.0, theta])
    assert np.allclose(m.source(U), 0.0, atol=1e-15)


def test_reaction_network_validation():
    with pytest.raises(ConstructionError):
        ReactionNetwork(molar_masses=[1.0, 2.0], nu_forward=[[1.0], [0.0]],
                        nu_reverse=[[0.0], [1.0]], elements=[[1.0], [1.0]], c_v=[[1.5], [1.5]],
                        energy0=[0, 0], entropy0=[0, 0], k0=[1.0], activation=[1.0])
    net = ReactionNetwork.isomerization()
    assert ReactionNetwork(**net.to_dict()).to_dict() == net.to_dict()


def test_reactive_polynomial_heat_capacity():
    net = ReactionNetwork.isomerization().to_dict()
    net["c_v"] = [[1.5, 0.1], [1.4, 0.2]]
    m = reactive_euler(ReactionNetwork(**net))
    X = np.random.default_rng(11).uniform([0.2, 0.2, -1, -1, -1, 0.5], [2, 2, 1, 1, 1, 2], (20, 6))
    assert np.allclose(m.temperature(m.from_sample(X)), X[:, 5], rtol=1e-12)


# -- discrete velocity models ---------------------------------------------------------

def test_broadwell_against_collision_formula():
    m = broadwell(a=1.5)
    f = np.array([2.0, 1.0, 1.0])
    c = np.array([1.0, -2.0, 1.0])
    defect = f[1] ** 2 - f[0] * f[2]
    Q = 1.5 * defect * c
    assert np.allclose(m.source(f), Q, atol=1e-15)
    assert np.allclose(-m.dissipation_matrix(f) @ np.log(f), Q, atol=1e-12)


@given(st.lists(st.floats(0.1, 5.0), min_size=3, max_size=3),
       st.lists(st.floats(-3, 3), min_size=3, max_size=3))
def test_broadwell_quadratic_form(f, y):
    f, y = np.array(f), np.array(y)
    m = broadwell()
    x, z = f[0] * f[2], f[1] ** 2
    b = x if np.isclose(x, z, rtol=1e-12) else (x - z) / (np.log(x) - np.log(z))
    direct = b * (y[0] + y[2] - 2 * y[1]) ** 2
    assert y @ m.dissipation_matrix(f) @ y == pytest.approx(direct, rel=1e-9, abs=1e-12)
    assert direct >= 0


def test_dvm_family_from_collisions():
    table = CollisionTable.from_collisions([1.0, 0.0, -1.0], [(1, 1, 0, 2, 2.0)])
    m = dvm(table)
    assert (m.n, m.r) == (3, 1)
    U = draw(m, 20)
    resid = m.source(U) + matvec(m.dissipation_matrix(U), m.entropy_gradient(U))
    assert np.max(np.abs(resid)) <= 1e-12


# -- registry ---------------------------------------------------------------------

def test_build_model_registry():
    assert set(FAMILIES) >= {"euler_damping", "broadwell", "reactive_euler"}
    assert build_model("viscoelastic", {"g": {"kind": "tanh"}}).params["g"] == "tanh"
    assert build_model("euler_damping", {"d": 2, "law": {"kind": "gamma-law", "gamma": 1.4}}).n == 3
    with pytest.raises(ValidationError):
        build_model("navier")
    with pytest.raises(ValidationError):
        build_model("broadwell", {"speed": 2})
