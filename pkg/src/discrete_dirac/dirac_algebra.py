"""Fiberwise Dirac structure algebra.

Continuous part: linear subspaces of V + V* (``LinearDiracFiber``), with the
symmetric pairing, induced structures, direct sums and the Dirac tensor
product. Basis columns stack the vector part on top of the covector part.

Discrete part: (+) discrete structures as membership predicates on points
((q, p), (q+, p+), alpha) with alpha = (alpha_q, alpha_p) the covector over
(q, p+). Every structure used here has the same shape: a discrete
distribution condition on (q, q+), plus an affine condition
alpha in center + span. That makes direct sums and the discrete tensor
product computable by stacking, and lets a sampler project random points onto
each set.
"""

from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np

from ._numerics import SUBSPACE_TOL, fd_gradient, in_span, null_space, orth, subspace_distance
from .core_geometry import OneFormBasis, Retraction, VectorRetraction, as_one_forms
from .errors import DomainError, LayoutError, NumericalError, ShapeError, UnsupportedError

MEMBER_TOL = 1e-10
FEASIBILITY_TOL = 1e-9


# ---------------------------------------------------------------------------
# Continuous fibers
# ---------------------------------------------------------------------------

def _split_pair(a):
    if isinstance(a, (tuple, list)) and len(a) == 2:
        v, alpha = (np.atleast_1d(np.asarray(x, dtype=float)) for x in a)
    else:
        x = np.asarray(a, dtype=float).reshape(-1)
        if x.size % 2:
            raise ShapeError(f"stacked (v, alpha) vector has odd length {x.size}")
        v, alpha = x[: x.size // 2], x[x.size // 2:]
    if v.shape != alpha.shape:
        raise ShapeError(f"vector part has width {v.size}, covector part {alpha.size}")
    return v, alpha


def symmetric_pairing(a, b):
    """<(v, alpha), (w, beta)> = alpha(w) + beta(v).

    Each argument is a (v, alpha) pair or a stacked vector [v; alpha].
    """
    v, alpha = _split_pair(a)
    w, beta = _split_pair(b)
    if v.size != w.size:
        raise ShapeError(f"pairing of dimensions {v.size} and {w.size}")
    return float(alpha @ w + beta @ v)


def pairing_matrix(n):
    """Gram matrix of the symmetric pairing on R^n + R^n*."""
    eye = np.eye(n)
    z = np.zeros((n, n))
    return np.block([[z, eye], [eye, z]])


def canonical_omega(n):
    """Canonical symplectic matrix on T*R^n in (q, p) order."""
    eye = np.eye(n)
    z = np.zeros((n, n))
    return np.block([[z, eye], [-eye, z]])


@dataclass(frozen=True)
class LinearDiracFiber:
    """A subspace of V + V*, stored as an orthonormal 2n x k basis."""

    n: int
    basis: np.ndarray

    def __post_init__(self):
        b = np.asarray(self.basis, dtype=float)
        if b.ndim != 2 or b.shape[0] != 2 * self.n:
            raise ShapeError(f"fiber basis must have {2 * self.n} rows, got shape {b.shape}")
        q = orth(b)
        if q.shape[1] != b.shape[1]:
            raise ShapeError(f"fiber basis columns are dependent (rank {q.shape[1]} of {b.shape[1]})")
        q.setflags(write=False)
        object.__setattr__(self, "basis", q)

    @classmethod
    def from_spanning(cls, n, columns):
        """Fiber spanned by possibly dependent columns."""
        return cls(n, orth(np.asarray(columns, dtype=float).reshape(2 * n, -1)))

    @property
    def dim(self):
        return self.basis.shape[1]

    @property
    def vectors(self):
        return self.basis[: self.n]

    @property
    def covectors(self):
        return self.basis[self.n:]

    def isotropy_defect(self):
        if self.dim == 0:
            return 0.0
        G = self.basis.T @ pairing_matrix(self.n) @ self.basis
        return float(np.abs(G).max())

    def contains(self, x, tol=SUBSPACE_TOL):
        v, alpha = _split_pair(x)
        return in_span(np.concatenate([v, alpha]), self.basis, tol)

    def distance(self, other):
        return subspace_distance(self.basis, other.basis)

    def equals(self, other, tol=SUBSPACE_TOL):
        return self.n == other.n and self.distance(other) <= tol

    def vector_projection(self):
        """Columns spanning Delta_D, the projection of D to V."""
        return orth(self.vectors)


def is_dirac_fiber(S, tol=SUBSPACE_TOL):
    """True iff S has dimension n and the pairing vanishes on it."""
    if not isinstance(S, LinearDiracFiber):
        b = np.asarray(S, dtype=float)
        S = LinearDiracFiber.from_spanning(b.shape[0] // 2, b)
    return S.dim == S.n and S.isotropy_defect() <= tol


def _check_skew(omega, n):
    omega = np.atleast_2d(np.asarray(omega, dtype=float))
    if omega.shape != (n, n):
        raise ShapeError(f"two-form has shape {omega.shape}, expected ({n}, {n})")
    if np.abs(omega + omega.T).max(initial=0.0) > SUBSPACE_TOL:
        raise ShapeError("two-form matrix is not skew-symmetric")
    return omega


def induced_dirac_fiber(delta_basis, omega):
    """{(v, alpha) | v in Delta, alpha - Omega_flat(v) in Delta^o}.

    ``delta_basis`` has columns spanning Delta (possibly zero columns);
    Omega_flat(v) = Omega(v, .) = Omega^T v.
    """
    D = np.asarray(delta_basis, dtype=float)
    omega = np.atleast_2d(np.asarray(omega, dtype=float))
    N = omega.shape[0]
    if D.size == 0:
        D = np.zeros((N, 0))
    D = D.reshape(N, -1) if D.ndim == 1 else D
    if D.shape[0] != N:
        raise ShapeError(f"distribution basis has {D.shape[0]} rows, two-form acts on {N}")
    omega = _check_skew(omega, N)
    B = orth(D)
    if B.shape[1] != D.shape[1]:
        raise ShapeError(f"distribution basis is rank-deficient (rank {B.shape[1]} of {D.shape[1]})")
    ann = null_space(B.T) if B.shape[1] else np.eye(N)
    cols = np.hstack([np.vstack([B, omega.T @ B]), np.vstack([np.zeros((N, ann.shape[1])), ann])])
    return LinearDiracFiber(N, cols)


def lift_distribution(delta_basis, n=None):
    """(T pi)^{-1}(Delta_Q) in T(T*Q): columns [[B, 0], [0, I]] in (q, p) order."""
    B = np.asarray(delta_basis, dtype=float)
    if B.size == 0:
        if n is None:
            raise ShapeError("empty distribution basis needs an explicit dimension")
        B = np.zeros((n, 0))
    n = B.shape[0]
    return np.block([[B, np.zeros((n, n))], [np.zeros((n, B.shape[1])), np.eye(n)]])


def induced_from_constraints(rows, n=None):
    """Induced fiber on T*Q from constraint rows (annihilator basis) on Q."""
    W = np.asarray(rows, dtype=float)
    if W.size == 0:
        W = np.zeros((0, n))
    n = W.shape[1]
    return induced_dirac_fiber(lift_distribution(null_space(W), n), canonical_omega(n))


def interaction_fiber(sigma_rows, n=None):
    """Interaction fiber induced by the lifted Sigma_Q with zero two-form."""
    W = np.asarray(sigma_rows, dtype=float)
    if W.size == 0:
        W = np.zeros((0, n))
    n = W.shape[1]
    return induced_dirac_fiber(lift_distribution(null_space(W), n), np.zeros((2 * n, 2 * n)))


def induced_two_form(D: LinearDiracFiber, v, u, tol=SUBSPACE_TOL):
    """alpha_v(u) for any alpha_v with (v, alpha_v) in D.

    Raises ``DomainError`` if v or u is not in Delta_D; the result is checked
    to be independent of the choice of alpha_v.
    """
    v = np.asarray(v, dtype=float).reshape(-1)
    u = np.asarray(u, dtype=float).reshape(-1)
    V, A = D.vectors, D.covectors
    c, *_ = np.linalg.lstsq(V, v, rcond=None)
    if np.linalg.norm(V @ c - v) > tol * (1.0 + np.linalg.norm(v)):
        raise DomainError("v is not in the vector projection of the fiber")
    if not in_span(u, D.vector_projection(), tol):
        raise DomainError("u is not in the vector projection of the fiber")
    Z = null_space(V)
    if Z.shape[1] and np.abs(u @ (A @ Z)).max() > tol * (1.0 + np.linalg.norm(u)):
        raise NumericalError("two-form depends on the choice of covector; fiber is not isotropic")
    return float((A @ c) @ u)


def direct_sum_fiber(D1: LinearDiracFiber, D2: LinearDiracFiber):
    """D1 + D2 on M1 x M2, coordinates ordered (v1, v2, alpha1, alpha2)."""
    n1, n2 = D1.n, D2.n
    k1, k2 = D1.dim, D2.dim
    B = np.zeros((2 * (n1 + n2), k1 + k2))
    B[:n1, :k1] = D1.vectors
    B[n1:n1 + n2, k1:] = D2.vectors
    B[n1 + n2:2 * n1 + n2, :k1] = D1.covectors
    B[2 * n1 + n2:, k1:] = D2.covectors
    return LinearDiracFiber(n1 + n2, B)


def phase_to_cotangent_order(dims):
    """Permutation taking (q1, p1, q2, p2, ...) to (q1, q2, ..., p1, p2, ...)."""
    perm_q, perm_p, start = [], [], 0
    for d in dims:
        perm_q.extend(range(start, start + d))
        perm_p.extend(range(start + d, start + 2 * d))
        start += 2 * d
    return np.array(perm_q + perm_p)


def permute_fiber(D: LinearDiracFiber, perm):
    """Apply the same coordinate permutation to the vector and covector parts."""
    perm = np.asarray(perm)
    if sorted(perm.tolist()) != list(range(D.n)):
        raise LayoutError(f"not a permutation of {D.n} coordinates")
    B = D.basis
    return LinearDiracFiber(D.n, np.vstack([B[: D.n][perm], B[D.n:][perm]]))


def tensor_product_fiber(Da: LinearDiracFiber, Db: LinearDiracFiber):
    """{(v, alpha) | exists beta: (v, alpha + beta) in Da, (v, -beta) in Db}.

    With Da = span[Va; Aa], Db = span[Vb; Ab], pairs (x, y) with Va x = Vb y
    give v = Va x and alpha = Aa x + Ab y.
    """
    if Da.n != Db.n:
        raise ShapeError(f"tensor product of fibers over dimensions {Da.n} and {Db.n}")
    n = Da.n
    K = null_space(np.hstack([Da.vectors, -Db.vectors]))
    ka = Da.dim
    X, Y = K[:ka], K[ka:]
    cols = np.vstack([Da.vectors @ X, Da.covectors @ X + Db.covectors @ Y])
    return LinearDiracFiber.from_spanning(n, cols)


# ---------------------------------------------------------------------------
# Tulczyjew maps
# ---------------------------------------------------------------------------

def _blocks(*xs):
    out = [np.atleast_1d(np.asarray(x, dtype=float)) for x in xs]
    widths = {x.shape for x in out}
    if len(widths) != 1:
        raise ShapeError(f"inconsistent block widths {sorted(w[0] for w in widths)}")
    return out


def tulczyjew_kappa(q, p, dq, dp):
    """(q, p, dq, dp) -> (q, dq, dp, p)."""
    q, p, dq, dp = _blocks(q, p, dq, dp)
    return q, dq, dp, p


def tulczyjew_kappa_inverse(q, dq, dp, p):
    q, dq, dp, p = _blocks(q, dq, dp, p)
    return q, p, dq, dp


def tulczyjew_omega_flat(q, p, dq, dp):
    """(q, p, dq, dp) -> (q, p, -dp, dq)."""
    q, p, dq, dp = _blocks(q, p, dq, dp)
    return q, p, -dp, dq


def tulczyjew_gamma(q, dq, dp, p):
    """gamma = Omega_flat o kappa^{-1}."""
    return tulczyjew_omega_flat(*tulczyjew_kappa_inverse(q, dq, dp, p))


def discrete_omega_flat_plus(z0, z1):
    """((q0, p0), (q1, p1)) -> (q0, p1, p0, q1)."""
    q0, p0, q1, p1 = _blocks(*z0, *z1)
    return q0, p1, p0, q1


def discrete_omega_flat_minus(z0, z1):
    """((q0, p0), (q1, p1)) -> (p0, q1, -q0, -p1)."""
    q0, p0, q1, p1 = _blocks(*z0, *z1)
    return p0, q1, -q0, -p1


def discrete_kappa(z0, z1):
    """((q0, p0), (q1, p1)) -> (q0, q1, -p0, p1)."""
    q0, p0, q1, p1 = _blocks(*z0, *z1)
    return q0, q1, -p0, p1


def discrete_kappa_inverse(q0, q1, a0, a1):
    q0, q1, a0, a1 = _blocks(q0, q1, a0, a1)
    return (q0, -a0), (q1, a1)


def _partials(Ld, q0, q1):
    if hasattr(Ld, "d1") and hasattr(Ld, "d2"):
        return np.asarray(Ld.d1(q0, q1), dtype=float), np.asarray(Ld.d2(q0, q1), dtype=float)
    q0, q1 = np.atleast_1d(np.asarray(q0, dtype=float)), np.atleast_1d(np.asarray(q1, dtype=float))
    return fd_gradient(lambda x: Ld(x, q1), q0), fd_gradient(lambda x: Ld(q0, x), q1)


def discrete_dirac_differential_plus(Ld, q0, q1):
    """gamma^{d+}(dL_d) = Omega_{d+}_flat o kappa_d^{-1} applied to (q0, q1, D1, D2).

    Gives (q0, D2 L_d, -D1 L_d, q1). ``Ld`` is a ``DiscreteLagrangian`` or a
    plain callable (partials by central differences).
    """
    d1, d2 = _partials(Ld, q0, q1)
    return discrete_omega_flat_plus(*discrete_kappa_inverse(q0, q1, d1, d2))


# ---------------------------------------------------------------------------
# Discrete structures
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class DiscretePoint:
    """((q, p), (q+, p+)) together with alpha = (alpha_q, alpha_p) over (q, p+)."""

    q: np.ndarray
    p: np.ndarray
    q_plus: np.ndarray
    p_plus: np.ndarray
    alpha_q: np.ndarray
    alpha_p: np.ndarray

    def __post_init__(self):
        arrs = [np.atleast_1d(np.asarray(getattr(self, f), dtype=float)).reshape(-1)
                for f in ("q", "p", "q_plus", "p_plus", "alpha_q", "alpha_p")]
        if len({a.size for a in arrs}) != 1:
            raise ShapeError(f"discrete point blocks have widths {[a.size for a in arrs]}")
        for f, a in zip(("q", "p", "q_plus", "p_plus", "alpha_q", "alpha_p"), arrs):
            object.__setattr__(self, f, a)

    @classmethod
    def from_tuples(cls, z, z_plus, alpha_hat):
        return cls(z[0], z[1], z_plus[0], z_plus[1], alpha_hat[0], alpha_hat[1])

    @classmethod
    def from_flat(cls, x, n):
        x = np.asarray(x, dtype=float).reshape(-1)
        if x.size != 6 * n:
            raise ShapeError(f"flat point has length {x.size}, expected {6 * n}")
        return cls(*x.reshape(6, n))

    @property
    def n(self):
        return self.q.size

    @property
    def alpha(self):
        return np.concatenate([self.alpha_q, self.alpha_p])

    def flat(self):
        return np.concatenate([self.q, self.p, self.q_plus, self.p_plus, self.alpha_q, self.alpha_p])

    def restrict(self, block):
        b = block if isinstance(block, slice) else slice(*block)
        return DiscretePoint(self.q[b], self.p[b], self.q_plus[b], self.p_plus[b],
                             self.alpha_q[b], self.alpha_p[b])

    def replace(self, **kw):
        d = {f: getattr(self, f) for f in ("q", "p", "q_plus", "p_plus", "alpha_q", "alpha_p")}
        d.update(kw)
        return DiscretePoint(**d)


def dirac_point_from_step(Ld, q0, p0, q1, p1):
    """The point (X_d^k, D^+ L_d(q_k, q_{k+1})) of one (+) step."""
    _, _, a_q, a_p = discrete_dirac_differential_plus(Ld, q0, q1)
    return DiscretePoint(q0, p0, q1, p1, a_q, a_p)


@dataclass(frozen=True)
class DiscreteDiracData:
    """Constraint one-forms and the retraction defining a discrete induced structure."""

    constraint_basis: OneFormBasis
    retraction: Retraction
    n: int

    def __post_init__(self):
        if self.constraint_basis.n != self.n:
            raise ShapeError(f"constraint rows have width {self.constraint_basis.n}, expected {self.n}")
        if self.retraction.dim != self.n:
            raise ShapeError(f"retraction dimension {self.retraction.dim} != {self.n}")

    @classmethod
    def from_rows(cls, rows, h=1.0, n=None):
        basis = as_one_forms(rows, n=n)
        return cls(basis, VectorRetraction(h, basis.n), basis.n)


class DiscreteStructure:
    """Distribution condition c(q, q+) = 0 plus alpha in center + span(columns).

    Subclasses provide ``constraint_values``, ``constraint_jacobian`` (with
    respect to q+), ``alpha_center`` and ``alpha_span``.
    """

    name = "structure"
    n = 0

    def constraint_values(self, q, q_plus):
        raise NotImplementedError

    def constraint_jacobian(self, q, q_plus):
        raise NotImplementedError

    def alpha_center(self, pt):
        raise NotImplementedError

    def alpha_span(self, pt):
        raise NotImplementedError

    def _check(self, pt):
        if pt.n != self.n:
            raise ShapeError(f"point has width {pt.n}, structure has {self.n}")

    def distribution_ok(self, pt, tol=MEMBER_TOL):
        vals = self.constraint_values(pt.q, pt.q_plus)
        if vals.size == 0:
            return True
        J = self.constraint_jacobian(pt.q, pt.q_plus)
        scale = 1.0 + np.abs(J).max(initial=0.0) * (np.abs(pt.q).max() + np.abs(pt.q_plus).max())
        return bool(np.abs(vals).max() <= tol * scale)

    def alpha_residual(self, pt):
        """Distance of alpha from the affine set, and the projected alpha."""
        r = pt.alpha - self.alpha_center(pt)
        S = self.alpha_span(pt)
        if S.shape[1] == 0:
            return float(np.linalg.norm(r)), self.alpha_center(pt)
        coef, *_ = np.linalg.lstsq(S, r, rcond=None)
        return float(np.linalg.norm(S @ coef - r)), self.alpha_center(pt) + S @ coef

    def alpha_tol(self):
        return MEMBER_TOL

    def contains(self, pt, tol=None):
        self._check(pt)
        tol = self.alpha_tol() if tol is None else tol
        if not self.distribution_ok(pt):
            return False
        res, _ = self.alpha_residual(pt)
        return bool(res <= tol * (1.0 + np.linalg.norm(pt.alpha)))

    __call__ = contains

    def project(self, pt, iters=5):
        """Minimum-norm corrections of q+ and then alpha onto the structure."""
        self._check(pt)
        qp = pt.q_plus.copy()
        for _ in range(iters):
            vals = self.constraint_values(pt.q, qp)
            if vals.size == 0 or np.abs(vals).max() <= 1e-14 * (1.0 + np.abs(qp).max()):
                break
            J = self.constraint_jacobian(pt.q, qp)
            qp = qp - np.linalg.lstsq(J, vals, rcond=None)[0]
        out = pt.replace(q_plus=qp)
        _, alpha = self.alpha_residual(out)
        return out.replace(alpha_q=alpha[: self.n], alpha_p=alpha[self.n:])


class _RetractionForms:
    """Discrete (+) forms omega(q) . R^{-1}_q(q+) and their q+ Jacobian."""

    def __init__(self, basis: OneFormBasis, retraction: Retraction):
        if basis.n != retraction.dim:
            raise ShapeError(f"one-form width {basis.n} != retraction dim {retraction.dim}")
        self.basis, self.retraction = basis, retraction

    def values(self, q, qp):
        return self.basis.eval(q) @ self.retraction.inverse(q, qp)

    def jacobian(self, q, qp):
        return self.basis.eval(q) @ self.retraction.inverse_jacobians(q, qp)[1]


class InducedDPlus(DiscreteStructure):
    """D^{d+}: omega_{d+}(q, q+) = 0, alpha_p = q+, alpha_q - p in rowspan(omega(q))."""

    def __init__(self, data: DiscreteDiracData, name="induced"):
        self.data = data
        self.n = data.n
        self.forms = _RetractionForms(data.constraint_basis, data.retraction)
        self.name = name

    def constraint_values(self, q, q_plus):
        return self.forms.values(q, q_plus)

    def constraint_jacobian(self, q, q_plus):
        return self.forms.jacobian(q, q_plus)

    def alpha_center(self, pt):
        return np.concatenate([pt.p, pt.q_plus])

    def alpha_span(self, pt):
        W = self.data.constraint_basis.eval(pt.q)
        return np.vstack([W.T, np.zeros((self.n, W.shape[0]))])


class InteractionDPlus(DiscreteStructure):
    """D_int^{d+}: Sigma rows vanish on (q, q+), alpha_p = 0, alpha_q in rowspan(Sigma^o(q))."""

    def __init__(self, sigma_basis: OneFormBasis, retraction: Optional[Retraction] = None,
                 name="interaction"):
        self.sigma = sigma_basis
        self.n = sigma_basis.n
        self.forms = _RetractionForms(sigma_basis, retraction or VectorRetraction(1.0, self.n))
        self.name = name

    def constraint_values(self, q, q_plus):
        return self.forms.values(q, q_plus)

    def constraint_jacobian(self, q, q_plus):
        return self.forms.jacobian(q, q_plus)

    def alpha_center(self, pt):
        return np.zeros(2 * self.n)

    def alpha_span(self, pt):
        S = self.sigma.eval(pt.q)
        return np.vstack([S.T, np.zeros((self.n, S.shape[0]))])


class DirectSumDPlus(DiscreteStructure):
    """Blockwise structure: each factor sees its block of q, p, q+, p+, alpha_q, alpha_p."""

    def __init__(self, parts: Sequence[DiscreteStructure], blocks=None, name="direct_sum"):
        self.parts = tuple(parts)
        if blocks is None:
            blocks, start = [], 0
            for s in self.parts:
                blocks.append(slice(start, start + s.n))
                start += s.n
        self.blocks = tuple(b if isinstance(b, slice) else slice(*b) for b in blocks)
        self.n = sum(s.n for s in self.parts)
        covered = sorted(i for b in self.blocks for i in range(b.start, b.stop))
        if covered != list(range(self.n)) or any(
                b.stop - b.start != s.n for s, b in zip(self.parts, self.blocks)):
            raise LayoutError("direct-sum blocks must tile the coordinates without overlap")
        self.name = name

    def constraint_values(self, q, q_plus):
        vals = [s.constraint_values(q[b], q_plus[b]) for s, b in zip(self.parts, self.blocks)]
        return np.concatenate(vals) if vals else np.zeros(0)

    def constraint_jacobian(self, q, q_plus):
        rows = []
        for s, b in zip(self.parts, self.blocks):
            J = s.constraint_jacobian(q[b], q_plus[b])
            full = np.zeros((J.shape[0], self.n))
            full[:, b] = J
            rows.append(full)
        return np.vstack(rows) if rows else np.zeros((0, self.n))

    def alpha_center(self, pt):
        out = np.zeros(2 * self.n)
        for s, b in zip(self.parts, self.blocks):
            c = s.alpha_center(pt.restrict(b))
            out[b] = c[: s.n]
            out[self.n + b.start:self.n + b.stop] = c[s.n:]
        return out

    def alpha_span(self, pt):
        cols = []
        for s, b in zip(self.parts, self.blocks):
            S = s.alpha_span(pt.restrict(b))
            full = np.zeros((2 * self.n, S.shape[1]))
            full[b] = S[: s.n]
            full[self.n + b.start:self.n + b.stop] = S[s.n:]
            cols.append(full)
        return np.hstack(cols) if cols else np.zeros((2 * self.n, 0))

    def contains(self, pt, tol=None):
        self._check(pt)
        return all(s.contains(pt.restrict(b), tol) for s, b in zip(self.parts, self.blocks))

    __call__ = contains


class TensorDPlus(DiscreteStructure):
    """D_a (x)_d D_b: exists beta with (alpha + beta) in D_a and -beta in D_b.

    For affine alpha-sets this is alpha in (c_a + c_b) + span[S_a, S_b],
    decided by least squares with threshold ``FEASIBILITY_TOL``.
    """

    def __init__(self, a: DiscreteStructure, b: DiscreteStructure, name="tensor"):
        if a.n != b.n:
            raise ShapeError(f"tensor product of structures of widths {a.n} and {b.n}")
        self.a, self.b = a, b
        self.n = a.n
        self.name = name

    def constraint_values(self, q, q_plus):
        return np.concatenate([self.a.constraint_values(q, q_plus), self.b.constraint_values(q, q_plus)])

    def constraint_jacobian(self, q, q_plus):
        return np.vstack([self.a.constraint_jacobian(q, q_plus), self.b.constraint_jacobian(q, q_plus)])

    def distribution_ok(self, pt, tol=MEMBER_TOL):
        return self.a.distribution_ok(pt, tol) and self.b.distribution_ok(pt, tol)

    def alpha_center(self, pt):
        return self.a.alpha_center(pt) + self.b.alpha_center(pt)

    def alpha_span(self, pt):
        return np.hstack([self.a.alpha_span(pt), self.b.alpha_span(pt)])

    def alpha_tol(self):
        return FEASIBILITY_TOL

    def witness_beta(self, pt):
        """A beta certifying membership (or the least-squares best attempt)."""
        Sa, Sb = self.a.alpha_span(pt), self.b.alpha_span(pt)
        r = pt.alpha - self.alpha_center(pt)
        S = np.hstack([Sa, Sb])
        if S.shape[1] == 0:
            return -self.b.alpha_center(pt)
        coef, *_ = np.linalg.lstsq(S, r, rcond=None)
        if not np.all(np.isfinite(coef)):
            raise NumericalError("feasibility least squares failed")
        t = coef[Sa.shape[1]:]
        return -(self.b.alpha_center(pt) + Sb @ t)


class DistributionDPlus(DiscreteStructure):
    """Only the discrete distribution condition; alpha is unconstrained."""

    def __init__(self, forms: Sequence[_RetractionForms], n, name="distribution"):
        self.forms = tuple(forms)
        self.n = n
        self.name = name

    @classmethod
    def from_data(cls, data: DiscreteDiracData, name="distribution"):
        return cls([_RetractionForms(data.constraint_basis, data.retraction)], data.n, name)

    def constraint_values(self, q, q_plus):
        vals = [f.values(q, q_plus) for f in self.forms]
        return np.concatenate(vals) if vals else np.zeros(0)

    def constraint_jacobian(self, q, q_plus):
        rows = [f.jacobian(q, q_plus) for f in self.forms]
        return np.vstack(rows) if rows else np.zeros((0, self.n))

    def alpha_center(self, pt):
        return np.zeros(2 * self.n)

    def alpha_span(self, pt):
        return np.eye(2 * self.n)

    def intersect(self, other: "DistributionDPlus", name="intersection"):
        if other.n != self.n:
            raise ShapeError(f"intersection of distributions of widths {self.n} and {other.n}")
        return DistributionDPlus(self.forms + other.forms, self.n, name)


def membership_induced_dplus(data: DiscreteDiracData, pt: DiscretePoint) -> bool:
    return InducedDPlus(data).contains(pt)


def membership_interaction_dplus(sigma_basis, pt: DiscretePoint, retraction=None) -> bool:
    return InteractionDPlus(as_one_forms(sigma_basis, n=pt.n), retraction).contains(pt)


def membership_direct_sum_dplus(data1: DiscreteDiracData, data2: DiscreteDiracData,
                                pt: DiscretePoint) -> bool:
    if data1.n + data2.n != pt.n:
        raise LayoutError(f"factors of widths {data1.n} + {data2.n} do not tile a point of width {pt.n}")
    return DirectSumDPlus([InducedDPlus(data1), InducedDPlus(data2)]).contains(pt)


def membership_tensor_dplus(lhs: DiscreteStructure, sigma_basis, pt: DiscretePoint,
                            retraction=None) -> bool:
    """(lhs) (x)_d D_int^{d+} membership; ``lhs`` must be an affine ``DiscreteStructure``."""
    if not isinstance(lhs, DiscreteStructure):
        raise UnsupportedError("tensor membership needs a structure with an affine alpha-set")
    sigma = InteractionDPlus(as_one_forms(sigma_basis, n=pt.n), retraction)
    return TensorDPlus(lhs, sigma).contains(pt)


# ---------------------------------------------------------------------------
# Randomized verification
# ---------------------------------------------------------------------------

@dataclass
class EquivalenceReport:
    name: str = "equivalence"
    samples: int = 0
    agreements: int = 0
    disagreements: int = 0
    witnesses: list = field(default_factory=list)
    by_kind: dict = field(default_factory=dict)

    @property
    def ok(self):
        return self.disagreements == 0

    def merge(self, other: "EquivalenceReport"):
        kinds = dict(self.by_kind)
        for k, v in other.by_kind.items():
            kinds[k] = kinds.get(k, 0) + v
        return EquivalenceReport(self.name, self.samples + other.samples,
                                 self.agreements + other.agreements,
                                 self.disagreements + other.disagreements,
                                 self.witnesses + other.witnesses, kinds)


SAMPLE_KINDS = ("uniform", "a", "b")


def structure_sampler(struct_a: DiscreteStructure, struct_b: DiscreteStructure, scale=1.0):
    """Sampler(rng, kind) producing uniform points or points projected onto a or b."""
    n = struct_a.n

    def sample(rng, kind):
        pt = DiscretePoint.from_flat(scale * rng.standard_normal(6 * n), n)
        if kind == "a":
            return struct_a.project(pt)
        if kind == "b":
            return struct_b.project(pt)
        return pt
    return sample


def verify_equivalence(pred_a: Callable, pred_b: Callable, sampler: Callable, count: int,
                       seed: int, name="equivalence", max_witnesses=5) -> EquivalenceReport:
    """Compare two predicates on ``count`` sampled points.

    Samples rotate through uniform points, points projected onto a, and
    points projected onto b. All randomness comes from ``seed``.
    """
    rng = np.random.default_rng(seed)
    rep = EquivalenceReport(name=name)
    for i in range(count):
        kind = SAMPLE_KINDS[i % 3]
        try:
            pt = sampler(rng, kind)
        except Exception as exc:  # surface sampler failures with context
            raise NumericalError(f"sampler failed on a {kind!r} sample: {exc}") from exc
        a, b = bool(pred_a(pt)), bool(pred_b(pt))
        rep.samples += 1
        rep.by_kind[kind] = rep.by_kind.get(kind, 0) + 1
        if a == b:
            rep.agreements += 1
        else:
            rep.disagreements += 1
            if len(rep.witnesses) < max_witnesses:
                rep.witnesses.append({"kind": kind, "a": a, "b": b, "point": pt})
    return rep


__all__ = [
    "symmetric_pairing", "LinearDiracFiber", "is_dirac_fiber", "induced_dirac_fiber",
    "induced_two_form", "lift_distribution", "induced_from_constraints", "interaction_fiber",
    "direct_sum_fiber", "tensor_product_fiber", "phase_to_cotangent_order", "permute_fiber",
    "canonical_omega", "pairing_matrix", "tulczyjew_kappa", "tulczyjew_kappa_inverse",
    "tulczyjew_omega_flat", "tulczyjew_gamma", "discrete_omega_flat_plus",
    "discrete_omega_flat_minus", "discrete_kappa", "discrete_kappa_inverse",
    "discrete_dirac_differential_plus", "DiscretePoint", "DiscreteDiracData",
    "DiscreteStructure", "InducedDPlus", "InteractionDPlus", "DirectSumDPlus", "TensorDPlus",
    "DistributionDPlus", "membership_induced_dplus", "membership_interaction_dplus",
    "membership_direct_sum_dplus", "membership_tensor_dplus", "dirac_point_from_step",
    "EquivalenceReport", "structure_sampler", "verify_equivalence",
]
