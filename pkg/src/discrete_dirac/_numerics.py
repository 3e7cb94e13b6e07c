"""Small dense linear-algebra helpers used across modules."""

import numpy as np
import scipy.linalg

SUBSPACE_TOL = 1e-10


def fd_step(x):
    return 1e-7 * (1.0 + np.linalg.norm(x))


def fd_gradient(f, x):
    """Central-difference gradient of a scalar function."""
    x = np.asarray(x, dtype=float)
    eps = fd_step(x)
    g = np.empty_like(x)
    for i in range(x.size):
        e = np.zeros_like(x)
        e[i] = eps
        g[i] = (f(x + e) - f(x - e)) / (2 * eps)
    return g


def fd_jacobian(f, x):
    """Central-difference Jacobian of a vector function, shape (len(f(x)), len(x))."""
    x = np.asarray(x, dtype=float)
    eps = fd_step(x)
    cols = []
    for i in range(x.size):
        e = np.zeros_like(x)
        e[i] = eps
        cols.append((np.asarray(f(x + e)) - np.asarray(f(x - e))) / (2 * eps))
    if not cols:
        return np.zeros((np.asarray(f(x)).size, 0))
    return np.column_stack(cols)


def orth(a, tol=SUBSPACE_TOL):
    """Orthonormal basis for the column space of ``a`` (possibly zero columns)."""
    a = np.atleast_2d(np.asarray(a, dtype=float))
    if a.size == 0:
        return np.zeros((a.shape[0], 0))
    u, s, _ = np.linalg.svd(a, full_matrices=False)
    if s.size == 0:
        return np.zeros((a.shape[0], 0))
    rank = int(np.sum(s > tol * max(1.0, s[0])))
    return u[:, :rank]


def null_space(a, tol=SUBSPACE_TOL):
    """Orthonormal basis for the kernel of ``a``; works for zero-row matrices."""
    a = np.atleast_2d(np.asarray(a, dtype=float))
    if a.shape[0] == 0:
        return np.eye(a.shape[1])
    return scipy.linalg.null_space(a, rcond=tol)


def rank(a, tol=SUBSPACE_TOL):
    return orth(a, tol).shape[1]


def subspace_distance(a, b):
    """Mutual projection residual between the column spaces of ``a`` and ``b``.

    Zero iff the spaces coincide. Dimension mismatch gives ``inf``.
    """
    qa, qb = orth(a), orth(b)
    if qa.shape[1] != qb.shape[1]:
        return float("inf")
    if qa.shape[1] == 0:
        return 0.0
    ra = qa - qb @ (qb.T @ qa)
    rb = qb - qa @ (qa.T @ qb)
    return float(max(np.abs(ra).max(), np.abs(rb).max()))


def in_span(x, basis, tol):
    """True iff ``x`` lies in the column span of ``basis`` up to ``tol`` (scaled)."""
    x = np.asarray(x, dtype=float)
    scale = 1.0 + np.linalg.norm(x)
    if basis.shape[1] == 0:
        return bool(np.linalg.norm(x) <= tol * scale)
    coef, *_ = np.linalg.lstsq(basis, x, rcond=None)
    return bool(np.linalg.norm(basis @ coef - x) <= tol * scale)
