import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from discrete_dirac import dirac_algebra as da
from discrete_dirac._numerics import null_space
from discrete_dirac.core_geometry import ConstantOneForms, VectorRetraction, discretize_lagrangian
from discrete_dirac.errors import DomainError, LayoutError, ShapeError, UnsupportedError
from discrete_dirac.integrator import DiscreteState, step_plus
from discrete_dirac.lab import build_rlc, build_spring_chain, structure_suite
from discrete_dirac.model import QuadraticLagrangian

finite = st.floats(-5, 5, allow_nan=False, allow_infinity=False)


# --- pairing and fibers -----------------------------------------------------

def test_pairing_examples():
    assert da.symmetric_pairing(([1.0], [2.0]), ([3.0], [4.0])) == 10.0
    assert da.symmetric_pairing(([1.0], [0.0]), ([1.0], [0.0])) == 0.0
    assert da.symmetric_pairing(([1.0], [1.0]), ([1.0], [1.0])) == 2.0


def test_pairing_dimension_mismatch():
    with pytest.raises(ShapeError):
        da.symmetric_pairing(([1.0], [2.0]), ([1.0, 2.0], [3.0, 4.0]))


@given(arrays(np.float64, 6, elements=finite), arrays(np.float64, 6, elements=finite))
def test_pairing_symmetric(a, b):
    assert da.symmetric_pairing(a, b) == pytest.approx(da.symmetric_pairing(b, a), abs=1e-12)


def test_is_dirac_fiber_examples():
    assert da.is_dirac_fiber(np.array([[1.0], [0.0]]))
    assert not da.is_dirac_fiber(np.array([[1.0], [1.0]]))
    assert not da.is_dirac_fiber(np.eye(2))


def test_fiber_rejects_dependent_columns():
    with pytest.raises(ShapeError):
        da.LinearDiracFiber(1, np.array([[1.0, 2.0], [0.0, 0.0]]))


def test_canonical_induced_fiber_n1():
    D = da.induced_dirac_fiber(np.eye(2), da.canonical_omega(1))
    expected = np.array([[1.0, 0.0, 0.0, 1.0], [0.0, 1.0, -1.0, 0.0]]).T
    assert D.distance(da.LinearDiracFiber(2, expected)) <= 1e-12


def test_zero_distribution_fiber():
    D = da.induced_dirac_fiber(np.zeros((3, 0)), np.zeros((3, 3)))
    assert D.dim == 3
    assert np.abs(D.vectors).max() == 0.0
    assert da.is_dirac_fiber(D)


def test_induced_rejects_bad_input():
    with pytest.raises(ShapeError):
        da.induced_dirac_fiber(np.array([[1.0, 2.0], [1.0, 2.0]]), np.zeros((2, 2)))
    with pytest.raises(ShapeError):
        da.induced_dirac_fiber(np.eye(2), np.eye(2))


def test_circuit_induced_fiber_brute_force():
    # (v, alpha) with v_q in ker omega, alpha_p = v_q, alpha_q + v_p in span(omega)
    w = np.array([1.0, -1.0, -1.0])
    D = da.induced_from_constraints([w])
    rows = []
    # alpha_p - v_q = 0
    for i in range(3):
        r = np.zeros(12)
        r[9 + i], r[i] = 1.0, -1.0
        rows.append(r)
    # w . v_q = 0
    rows.append(np.concatenate([w, np.zeros(9)]))
    # alpha_q + v_p orthogonal to ker(w)
    for k in null_space(w[None, :]).T:
        rows.append(np.concatenate([np.zeros(3), k, k, np.zeros(3)]))
    brute = null_space(np.array(rows))
    assert brute.shape[1] == 6
    assert D.distance(da.LinearDiracFiber(6, brute)) <= 1e-12


@given(st.integers(1, 3), st.integers(0, 3), st.integers(0, 2 ** 31 - 1))
def test_induced_fibers_are_dirac(n, k, seed):
    rng = np.random.default_rng(seed)
    N = 2 * n
    k = min(k, N)
    A = rng.standard_normal((N, N))
    D = da.induced_dirac_fiber(rng.standard_normal((N, k)), A - A.T)
    assert da.is_dirac_fiber(D)


def test_induced_two_form():
    D = da.induced_dirac_fiber(np.eye(2), da.canonical_omega(1))
    assert da.induced_two_form(D, [1.0, 0.0], [0.0, 1.0]) == pytest.approx(1.0)
    assert da.induced_two_form(D, [0.3, 0.7], [0.3, 0.7]) == pytest.approx(0.0, abs=1e-14)
    flat = da.induced_dirac_fiber(np.array([[1.0], [0.0]]), np.zeros((2, 2)))
    assert da.induced_two_form(flat, [2.0, 0.0], [1.0, 0.0]) == pytest.approx(0.0, abs=1e-14)
    with pytest.raises(DomainError):
        da.induced_two_form(flat, [0.0, 1.0], [1.0, 0.0])


# --- Tulczyjew maps -----------------------------------------------------------

def test_tulczyjew_examples():
    assert [x.item() for x in da.tulczyjew_kappa(1, 2, 3, 4)] == [1, 3, 4, 2]
    assert [x.item() for x in da.tulczyjew_omega_flat(1, 2, 3, 4)] == [1, 2, -4, 3]
    assert [x.item() for x in da.tulczyjew_gamma(1, 3, 4, 2)] == [1, 2, -4, 3]


def test_tulczyjew_shape_mismatch():
    with pytest.raises(ShapeError):
        da.tulczyjew_kappa([1, 2], 2, 3, 4)


def test_gamma_kappa_equals_omega_flat(rng):
    for _ in range(100):
        x = [rng.standard_normal(3) for _ in range(4)]
        lhs = da.tulczyjew_gamma(*da.tulczyjew_kappa(*x))
        rhs = da.tulczyjew_omega_flat(*x)
        for a, b in zip(lhs, rhs):
            assert np.array_equal(a, b)


def test_discrete_maps_examples():
    assert [x.item() for x in da.discrete_omega_flat_plus((1, 2), (3, 4))] == [1, 4, 2, 3]
    assert [x.item() for x in da.discrete_kappa((1, 2), (3, 4))] == [1, 3, -2, 4]
    assert [x.item() for x in da.discrete_omega_flat_minus((1, 2), (3, 4))] == [2, 3, -1, -4]


def test_discrete_dirac_differential_examples():
    out = da.discrete_dirac_differential_plus(lambda a, b: float(a @ b), [2.0], [3.0])
    np.testing.assert_allclose(np.concatenate(out), [2, 2, -3, 3], atol=1e-8)
    out = da.discrete_dirac_differential_plus(lambda a, b: 0.0, [1.0, 2.0], [3.0, 4.0])
    np.testing.assert_allclose(np.concatenate(out), [1, 2, 0, 0, 0, 0, 3, 4], atol=1e-12)


def test_discrete_dirac_differential_spring_fd():
    K = np.array([[2.0, -1.0], [-1.0, 1.0]])
    Ld = discretize_lagrangian(QuadraticLagrangian(np.eye(2), K), VectorRetraction(0.01, 2))
    q0, q1 = np.array([0.0, 1.0]), np.array([1e-4, 1.0])
    exact = da.discrete_dirac_differential_plus(Ld, q0, q1)
    fd = da.discrete_dirac_differential_plus(lambda a, b: Ld.eval(a, b), q0, q1)
    for a, b in zip(exact, fd):
        np.testing.assert_allclose(a, b, atol=1e-6)


# --- direct sums and tensor products ----------------------------------------

def test_direct_sum_of_canonical_fibers_is_product_induced():
    D1 = da.induced_dirac_fiber(np.eye(2), da.canonical_omega(1))
    D2 = da.induced_dirac_fiber(np.eye(4), da.canonical_omega(2))
    S = da.direct_sum_fiber(D1, D2)
    omega = np.zeros((6, 6))
    omega[:2, :2] = da.canonical_omega(1)
    omega[2:, 2:] = da.canonical_omega(2)
    assert S.dim == 6 and da.is_dirac_fiber(S)
    assert S.distance(da.induced_dirac_fiber(np.eye(6), omega)) <= 1e-12


def test_direct_sum_with_zero_distribution_block():
    D1 = da.induced_dirac_fiber(np.eye(2), da.canonical_omega(1))
    Z = da.induced_dirac_fiber(np.zeros((2, 0)), np.zeros((2, 2)))
    S = da.direct_sum_fiber(D1, Z)
    # constrained block: v2 = 0, alpha2 free
    assert np.abs(S.vectors[2:]).max() <= 1e-14
    assert da.is_dirac_fiber(S)


def test_tensor_with_full_interaction_is_identity():
    Da = da.induced_from_constraints([[1.0, -1.0, 0.0]])
    Db = da.interaction_fiber(np.zeros((0, 3)), 3)
    assert da.tensor_product_fiber(Da, Db).distance(Da) <= 1e-12


def test_tensor_hand_case_n1():
    Da = da.induced_dirac_fiber(np.eye(2), da.canonical_omega(1))
    Db = da.interaction_fiber([[1.0]])
    target = da.induced_from_constraints([[1.0]])
    T = da.tensor_product_fiber(Da, Db)
    assert T.distance(target) <= 1e-12


def test_proposition_on_random_fibers(rng):
    for _ in range(20):
        n1, n2 = 2, 3
        W1 = rng.standard_normal((1, n1))
        W2 = rng.standard_normal((1, n2))
        n = n1 + n2
        rows = np.zeros((2, n))
        rows[0, :n1], rows[1, n1:] = W1, W2
        sigma = rng.standard_normal((1, n))
        lhs = da.tensor_product_fiber(da.induced_from_constraints(rows), da.interaction_fiber(sigma))
        rhs = da.induced_from_constraints(np.vstack([rows, sigma]))
        assert lhs.distance(rhs) <= 1e-10


def test_permute_fiber_rejects_non_permutation():
    D = da.induced_from_constraints(np.zeros((0, 2)), 2)
    with pytest.raises(LayoutError):
        da.permute_fiber(D, [0, 0, 1, 2])


# --- discrete membership ----------------------------------------------------

def _pt(q, p, qp, pp, aq, ap):
    return da.DiscretePoint(q, p, qp, pp, aq, ap)


def test_unconstrained_induced_membership():
    data = da.DiscreteDiracData.from_rows(np.zeros((0, 2)), h=0.1, n=2)
    pt = _pt([0, 1], [2, 3], [4, 5], [6, 7], [2, 3], [4, 5])
    assert da.membership_induced_dplus(data, pt)
    assert not da.membership_induced_dplus(data, pt.replace(alpha_p=[4, 5.1]))


def test_spring_step_is_member():
    m = build_spring_chain()
    res = step_plus(m.discrete, m.initial)
    pt = da.dirac_point_from_step(m.discrete.Ld, m.initial.q, m.initial.p, res.next.q, res.next.p)
    sys_ = m.system
    data = da.DiscreteDiracData(sys_.constraint_rows, m.discrete.Ld.retraction, 4)
    assert da.membership_induced_dplus(data, pt)
    direct = da.DirectSumDPlus([da.InducedDPlus(da.DiscreteDiracData.from_rows(np.zeros((0, 2)), 0.01, 2)),
                                da.InducedDPlus(da.DiscreteDiracData.from_rows(np.zeros((0, 2)), 0.01, 2))])
    assert da.membership_tensor_dplus(direct, [[0.0, 1.0, -1.0, 0.0]], pt, VectorRetraction(0.01, 4))


def test_spring_trajectory_steps_are_members():
    m = build_spring_chain()
    traj = m.simulate(100)
    data = da.DiscreteDiracData(m.system.constraint_rows, m.discrete.Ld.retraction, 4)
    s = da.InducedDPlus(data)
    for k in range(100):
        pt = da.dirac_point_from_step(m.discrete.Ld, traj.q[k], traj.p[k], traj.q[k + 1], traj.p[k + 1])
        assert s(pt)


def test_interaction_membership():
    sigma = [[0.0, 1.0, -1.0, 0.0]]
    R = VectorRetraction(0.01, 4)
    zero = np.zeros(4)
    assert da.membership_interaction_dplus(np.zeros((0, 4)), _pt(zero, zero, np.ones(4), zero, zero, zero))
    bad = _pt(zero, zero, [0, 1.0, 0.5, 0], zero, zero, zero)
    assert not da.membership_interaction_dplus(sigma, bad, R)
    for lam in (-3.0, 0.0, 2.5):
        good = _pt(zero, zero, [0.3, 1.0, 1.0, 0], zero, lam * np.array(sigma[0]), zero)
        assert da.membership_interaction_dplus(sigma, good, R)


def test_direct_sum_membership():
    d = da.DiscreteDiracData.from_rows(np.zeros((0, 1)), h=1.0, n=1)
    pt = _pt([0, 1], [2, 3], [4, 5], [0, 0], [2, 3], [4, 5])
    assert da.membership_direct_sum_dplus(d, d, pt)
    assert not da.membership_direct_sum_dplus(d, d, pt.replace(alpha_q=[2, 3.5]))
    with pytest.raises(LayoutError):
        da.membership_direct_sum_dplus(d, d, _pt([0], [0], [0], [0], [0], [0]))


def test_tensor_with_empty_sigma_reduces_to_lhs(rng):
    data = da.DiscreteDiracData.from_rows([[1.0, -1.0, 0.0]], h=0.1)
    lhs = da.InducedDPlus(data)
    smp = da.structure_sampler(lhs, lhs)
    for kind in ("uniform", "a"):
        for _ in range(20):
            pt = smp(rng, kind)
            assert da.membership_tensor_dplus(lhs, np.zeros((0, 3)), pt) == lhs(pt)


def test_tensor_needs_affine_lhs():
    pt = _pt([0], [0], [0], [0], [0], [0])
    with pytest.raises(UnsupportedError):
        da.membership_tensor_dplus(lambda p: True, [[1.0]], pt)


def test_projection_lands_in_structure(rng):
    data = da.DiscreteDiracData.from_rows([[1.0, -1.0, -1.0]], h=0.1)
    s = da.InducedDPlus(data)
    for _ in range(20):
        pt = da.DiscretePoint.from_flat(rng.standard_normal(18), 3)
        assert s(s.project(pt))


# --- verification harness ---------------------------------------------------

def test_verify_identical_predicates():
    data = da.DiscreteDiracData.from_rows([[1.0, 2.0]], h=0.5)
    s = da.InducedDPlus(data)
    rep = da.verify_equivalence(s, s, da.structure_sampler(s, s), 99, seed=1)
    assert rep.disagreements == 0 and rep.agreements == 99
    assert rep.by_kind == {"uniform": 33, "a": 33, "b": 33}


def test_verify_detects_wrong_identity():
    a = da.InducedDPlus(da.DiscreteDiracData.from_rows([[1.0, 0.0]], h=0.5))
    b = da.InducedDPlus(da.DiscreteDiracData.from_rows([[0.0, 1.0]], h=0.5))
    rep = da.verify_equivalence(a, b, da.structure_sampler(a, b), 60, seed=3)
    assert rep.disagreements > 0 and rep.witnesses


def test_verify_is_deterministic():
    a = da.InducedDPlus(da.DiscreteDiracData.from_rows([[1.0, 0.0]], h=0.5))
    b = da.InducedDPlus(da.DiscreteDiracData.from_rows([[1.0, 1e-3]], h=0.5))
    r1 = da.verify_equivalence(a, b, da.structure_sampler(a, b), 30, seed=7)
    r2 = da.verify_equivalence(a, b, da.structure_sampler(a, b), 30, seed=7)
    assert (r1.agreements, r1.disagreements) == (r2.agreements, r2.disagreements)


def test_report_merge_associative():
    r = [da.EquivalenceReport("x", s, s - d, d, [d], {"a": s}) for s, d in ((3, 1), (5, 0), (7, 2))]
    left = r[0].merge(r[1]).merge(r[2])
    right = r[0].merge(r[1].merge(r[2]))
    assert (left.samples, left.disagreements, left.witnesses, left.by_kind) == \
        (right.samples, right.disagreements, right.witnesses, right.by_kind)


def test_sampler_failure_is_reported():
    from discrete_dirac.errors import NumericalError

    def bad(rng, kind):
        raise RuntimeError("boom")
    with pytest.raises(NumericalError):
        da.verify_equivalence(lambda p: True, lambda p: True, bad, 3, seed=0)


@pytest.mark.parametrize("builder", [build_spring_chain, build_rlc])
def test_structure_suite_examples(builder):
    rep = structure_suite(builder(), samples=300, seed=11, base_points=20)
    assert rep.ok, [(c.name, c.witness) for c in rep.checks if not c.ok]


def test_discrete_point_shapes():
    with pytest.raises(ShapeError):
        da.DiscretePoint([0, 1], [0], [0], [0], [0], [0])
    pt = da.DiscretePoint.from_flat(np.arange(12.0), 2)
    assert np.array_equal(da.DiscretePoint.from_flat(pt.flat(), 2).flat(), pt.flat())
    r = pt.restrict((1, 2))
    assert r.n == 1 and r.q[0] == 1.0 and r.alpha_p[0] == 11.0


def test_distribution_intersection_identity(rng):
    R = VectorRetraction(0.2, 3)
    d1 = da.DistributionDPlus.from_data(da.DiscreteDiracData(ConstantOneForms([[1.0, 0, 0]]), R, 3))
    d2 = da.DistributionDPlus.from_data(da.DiscreteDiracData(ConstantOneForms([[0, 1.0, 1.0]]), R, 3))
    both = da.DistributionDPlus.from_data(
        da.DiscreteDiracData(ConstantOneForms([[1.0, 0, 0], [0, 1.0, 1.0]]), R, 3))
    inter = d1.intersect(d2)
    rep = da.verify_equivalence(inter, both, da.structure_sampler(inter, both), 300, seed=5)
    assert rep.disagreements == 0
