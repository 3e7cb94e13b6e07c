import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from discrete_dirac.core_geometry import (
    Chart,
    ConstantOneForms,
    ProductRetraction,
    VectorRetraction,
    discrete_one_form_minus,
    discrete_one_form_plus,
    discretize_force,
    discretize_lagrangian,
    extend_one_form,
    product_retraction,
)
from discrete_dirac.errors import ConfigurationError, DomainError, LayoutError, ShapeError
from discrete_dirac.model import GeneralLagrangian, LinearDamping, QuadraticLagrangian

finite = st.floats(-10, 10, allow_nan=False, allow_infinity=False)


def vec(n):
    return arrays(np.float64, n, elements=finite)


# --- Chart ---------------------------------------------------------------

def test_chart_rejects_duplicate_names():
    with pytest.raises(ShapeError):
        Chart.from_names(["q", "q"])


def test_chart_index():
    c = Chart.from_names(["a", "b", "c"])
    assert c.dim == 3 and c.index("b") == 1


# --- Retractions ----------------------------------------------------------

@given(vec(3), vec(3), st.floats(1e-3, 1.0))
def test_vector_retraction_axioms(q, v, h):
    R = VectorRetraction(h, 3)
    assert np.array_equal(R.apply(q, np.zeros(3)), q)
    assert np.max(np.abs(R.inverse(q, R.apply(q, v)) - v)) <= 1e-12 * (1 + np.abs(q).max() / h)


@given(vec(4), vec(4))
def test_vector_retraction_antisymmetric(q0, q1):
    R = VectorRetraction(0.01, 4)
    assert np.array_equal(R.inverse(q0, q1), -R.inverse(q1, q0))


@given(vec(5), vec(5))
def test_product_retraction_axioms(q, v):
    R = product_retraction([VectorRetraction(0.01, 3), VectorRetraction(0.01, 2)])
    assert np.array_equal(R.apply(q, np.zeros(5)), q)
    assert np.max(np.abs(R.inverse(q, R.apply(q, v)) - v)) <= 1e-12 * (1 + 100 * np.abs(q).max())


def test_product_of_vector_retractions_is_vector_retraction(rng):
    R = product_retraction([VectorRetraction(0.01, 2), VectorRetraction(0.01, 2)])
    V = VectorRetraction(0.01, 4)
    q0, q1 = rng.standard_normal(4), rng.standard_normal(4)
    assert isinstance(R, ProductRetraction)
    assert np.array_equal(R.inverse(q0, q1), V.inverse(q0, q1))


def test_product_retraction_mismatched_h():
    with pytest.raises(ConfigurationError):
        product_retraction([VectorRetraction(0.01, 1), VectorRetraction(0.02, 1)])


def test_nonpositive_step_rejected():
    with pytest.raises(ConfigurationError):
        VectorRetraction(0.0, 2)


# --- Discrete one-forms ----------------------------------------------------

def test_one_form_plus_spring_first_step():
    R = VectorRetraction(0.01, 4)
    val = discrete_one_form_plus([0.0, 1.0, -1.0, 0.0], R, [0, 1, 1, 2], [1e-4, 1, 1, 2.0299])
    assert val == 0.0


def test_one_form_zero_displacement():
    R = VectorRetraction(0.3, 3)
    q = np.array([1.0, -2.0, 0.5])
    assert discrete_one_form_plus([1.0, 2.0, 3.0], R, q, q) == 0.0
    assert discrete_one_form_minus([1.0, 2.0, 3.0], R, q, q) == 0.0


def test_one_form_scalar_examples():
    R = VectorRetraction(1.0, 1)
    assert discrete_one_form_plus([1.0], R, [0.0], [3.0]) == 3.0
    assert discrete_one_form_minus([1.0], R, [0.0], [3.0]) == 3.0


def test_one_form_shape_mismatch():
    with pytest.raises(ShapeError):
        discrete_one_form_plus([1.0, 2.0], VectorRetraction(1.0, 3), np.zeros(3), np.ones(3))


@given(vec(4), vec(4), vec(4))
def test_constant_forms_plus_equals_minus(w, q0, q1):
    R = VectorRetraction(0.05, 4)
    a = discrete_one_form_plus(w, R, q0, q1)
    b = discrete_one_form_minus(w, R, q0, q1)
    assert abs(a - b) <= 1e-14 * (1 + abs(a))


def test_one_form_basis_evaluates_rows():
    W = ConstantOneForms([[1.0, -1.0, -1.0], [0.0, 1.0, 0.0]])
    vals = discrete_one_form_plus(W, VectorRetraction(0.5, 3), np.zeros(3), [1.0, 0.5, 0.5])
    np.testing.assert_allclose(vals, [0.0, 1.0])


def test_extend_one_form_circuit_rows():
    e2 = extend_one_form([[-1.0, 1.0]], (3, 5), 5)
    e1 = extend_one_form([[1.0, -1.0, -1.0]], (0, 3), 5)
    np.testing.assert_array_equal(e2.eval(np.zeros(5)), [[0, 0, 0, -1, 1]])
    np.testing.assert_array_equal(e1.eval(np.zeros(5)), [[1, -1, -1, 0, 0]])
    z = extend_one_form([[0.0, 0.0]], (1, 3), 4)
    np.testing.assert_array_equal(z.eval(np.zeros(4)), np.zeros((1, 4)))


@pytest.mark.parametrize("block", [(3, 6), (-1, 2), (2, 2)])
def test_extend_one_form_bad_block(block):
    with pytest.raises(LayoutError):
        extend_one_form([[1.0, 1.0, 1.0]], block, 5)


# --- Discrete Lagrangians ------------------------------------------------

def test_kinetic_discrete_lagrangian_value():
    Ld = discretize_lagrangian(QuadraticLagrangian([[1.0]]), VectorRetraction(0.01, 1))
    assert Ld.eval([0.0], [0.01]) == pytest.approx(0.005, abs=1e-15)


@given(st.floats(-5, 5), st.floats(0.01, 1))
def test_potential_vanishing_at_q0(q1, h):
    Ld = discretize_lagrangian(QuadraticLagrangian([[0.0]], [[1.0]]), VectorRetraction(h, 1))
    assert Ld.eval([0.0], [q1]) == 0.0


def test_spring_subsystem_discrete_lagrangian_by_hand():
    # L1 = 1/2 (v1^2 + v2^2) - 1/2 q1^2 - 1/2 (q2 - q1)^2
    h = 0.01
    K = np.array([[2.0, -1.0], [-1.0, 1.0]])
    Ld = discretize_lagrangian(QuadraticLagrangian(np.eye(2), K), VectorRetraction(h, 2))
    q0, q1 = np.array([0.0, 1.0]), np.array([1e-4, 1.0])
    v1, v2 = (1e-4 - 0.0) / h, 0.0
    by_hand = h * (0.5 * (v1 ** 2 + v2 ** 2) - 0.5 * 0.0 ** 2 - 0.5 * (1.0 - 0.0) ** 2)
    assert Ld.eval(q0, q1) == pytest.approx(by_hand, rel=1e-14)
    assert by_hand == pytest.approx(-0.0049995, rel=1e-12)


def _random_quadratic(rng, n, damp=False):
    A = rng.standard_normal((n, n))
    B = rng.standard_normal((n, n))
    return QuadraticLagrangian(A @ A.T + np.eye(n), B + B.T, rng.standard_normal(n))


def test_discretization_is_linear_in_lagrangian(rng):
    R = VectorRetraction(0.07, 3)
    L1, L2 = _random_quadratic(rng, 3), _random_quadratic(rng, 3)
    Ls = discretize_lagrangian(L1 + L2, R)
    A, B = discretize_lagrangian(L1, R), discretize_lagrangian(L2, R)
    for _ in range(100):
        q0, q1 = rng.standard_normal(3), rng.standard_normal(3)
        s = Ls.eval(q0, q1)
        assert abs(s - (A.eval(q0, q1) + B.eval(q0, q1))) <= 1e-14 * max(1.0, abs(s)) * 10


@pytest.mark.parametrize("general", [False, True])
def test_partials_match_finite_differences(rng, general):
    L = _random_quadratic(rng, 3)
    if general:
        base = L
        L = GeneralLagrangian(3, lambda q, v: base.value(q, v) + 0.1 * np.sin(q[0]) * v[1] ** 2)
    Ld = discretize_lagrangian(L, VectorRetraction(0.1, 3))
    eps = 1e-6
    for _ in range(10):
        q0, q1 = rng.standard_normal(3), rng.standard_normal(3)
        for f, x, other in ((Ld.d1, q0, "q0"), (Ld.d2, q1, "q1")):
            g = np.empty(3)
            for i in range(3):
                e = np.zeros(3)
                e[i] = eps
                if other == "q0":
                    g[i] = (Ld.eval(q0 + e, q1) - Ld.eval(q0 - e, q1)) / (2 * eps)
                else:
                    g[i] = (Ld.eval(q0, q1 + e) - Ld.eval(q0, q1 - e)) / (2 * eps)
            np.testing.assert_allclose(f(q0, q1), g, rtol=1e-6, atol=1e-6)


def test_nonfinite_pair_is_domain_error():
    Ld = discretize_lagrangian(QuadraticLagrangian([[1.0]]), VectorRetraction(0.1, 1))
    with pytest.raises(DomainError):
        Ld.eval([0.0], [np.inf])


# --- Discrete forces ------------------------------------------------------

def test_discrete_force_plus_is_zero(rng):
    fd = discretize_force(LinearDamping(np.diag([2.0, 1.0])), VectorRetraction(0.1, 2))
    for _ in range(5):
        assert np.array_equal(fd.plus(rng.standard_normal(2), rng.standard_normal(2)), np.zeros(2))


def test_resistor_discrete_force():
    fd = discretize_force(LinearDamping(np.diag([1.0, 0.0, 0.0])), VectorRetraction(0.1, 3))
    np.testing.assert_allclose(fd.minus([0.0, 0, 0], [0.5, 0, 0]), [0.5, 0.0, 0.0], atol=1e-15)


def test_zero_force():
    fd = discretize_force(LinearDamping.none(2), VectorRetraction(0.1, 2))
    assert np.array_equal(fd.minus([1.0, 2.0], [3.0, 4.0]), np.zeros(2))
    assert np.array_equal(fd.plus([1.0, 2.0], [3.0, 4.0]), np.zeros(2))
