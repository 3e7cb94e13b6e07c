"""Retractions, one-form bases and the retraction-based discretization of
Lagrangians and external forces.

A discrete Lagrangian built here is the left-rectangle rule

    L_d(q0, q1) = h * L(q0, R^{-1}_{q0}(q1))

where the retraction carries the step size (for the default vector-space
retraction, R^{-1}_{q0}(q1) = (q1 - q0) / h).
"""

from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from ._numerics import fd_jacobian
from .errors import ConfigurationError, DomainError, LayoutError, ShapeError


@dataclass(frozen=True)
class Chart:
    """Local coordinates on an open subset of R^dim."""

    dim: int
    coord_names: tuple

    def __post_init__(self):
        names = tuple(self.coord_names)
        object.__setattr__(self, "coord_names", names)
        if self.dim < 1:
            raise ShapeError(f"chart dimension must be >= 1, got {self.dim}")
        if len(names) != self.dim:
            raise ShapeError(f"{len(names)} coordinate names for a {self.dim}-dim chart")
        if len(set(names)) != len(names):
            raise ShapeError(f"coordinate names are not unique: {names}")

    @classmethod
    def from_names(cls, names):
        names = tuple(names)
        return cls(len(names), names)

    def index(self, name):
        return self.coord_names.index(name)


def _vec(x, n=None, what="vector"):
    if not (type(x) is np.ndarray and x.ndim == 1 and x.dtype == np.float64):
        x = np.asarray(x, dtype=float).reshape(-1)
    if n is not None and x.size != n:
        raise ShapeError(f"{what} has width {x.size}, expected {n}")
    return x


# ---------------------------------------------------------------------------
# Retractions
# ---------------------------------------------------------------------------

class Retraction:
    """Map R: TQ -> Q with the step size folded in.

    Subclasses implement ``apply`` and ``inverse``. ``inverse_jacobians``
    defaults to central differences; ``affine`` marks retractions whose inverse
    is affine in (q0, q1), which lets Newton solvers use exact Jacobians.
    """

    affine = False

    def __init__(self, h, dim):
        if not h > 0:
            raise ConfigurationError(f"step size must be positive, got {h}")
        self.h = float(h)
        self.dim = int(dim)

    def apply(self, q, v):
        raise NotImplementedError

    def inverse(self, q0, q1):
        raise NotImplementedError

    def inverse_jacobians(self, q0, q1):
        """Return (d inverse / d q0, d inverse / d q1), each dim x dim."""
        q0, q1 = _vec(q0, self.dim), _vec(q1, self.dim)
        j0 = fd_jacobian(lambda x: self.inverse(x, q1), q0)
        j1 = fd_jacobian(lambda x: self.inverse(q0, x), q1)
        return j0, j1


class VectorRetraction(Retraction):
    """R_q(v) = q + h v on a vector space."""

    affine = True

    def apply(self, q, v):
        return _vec(q, self.dim) + self.h * _vec(v, self.dim)

    def inverse(self, q0, q1):
        return (_vec(q1, self.dim) - _vec(q0, self.dim)) / self.h

    def inverse_jacobians(self, q0=None, q1=None):
        eye = np.eye(self.dim) / self.h
        return -eye, eye

    def __repr__(self):
        return f"VectorRetraction(h={self.h}, dim={self.dim})"


class ProductRetraction(Retraction):
    """Blockwise retraction R_1 x ... x R_n on a product of charts."""

    def __init__(self, factors):
        factors = list(factors)
        if not factors:
            raise ConfigurationError("product retraction needs at least one factor")
        hs = {f.h for f in factors}
        if len(hs) != 1:
            raise ConfigurationError(f"factors use different step sizes: {sorted(hs)}")
        super().__init__(factors[0].h, sum(f.dim for f in factors))
        self.factors = tuple(factors)
        self.affine = all(f.affine for f in factors)
        offsets = np.cumsum([0] + [f.dim for f in factors])
        self.blocks = tuple(slice(int(a), int(b)) for a, b in zip(offsets[:-1], offsets[1:]))
        # a product of vector retractions is itself one; skip the block loop
        self._flat = VectorRetraction(self.h, self.dim) if all(
            type(f) is VectorRetraction for f in factors) else None

    def apply(self, q, v):
        if self._flat is not None:
            return self._flat.apply(q, v)
        q, v = _vec(q, self.dim), _vec(v, self.dim)
        return np.concatenate([f.apply(q[b], v[b]) for f, b in zip(self.factors, self.blocks)])

    def inverse(self, q0, q1):
        if self._flat is not None:
            return self._flat.inverse(q0, q1)
        q0, q1 = _vec(q0, self.dim), _vec(q1, self.dim)
        return np.concatenate([f.inverse(q0[b], q1[b]) for f, b in zip(self.factors, self.blocks)])

    def inverse_jacobians(self, q0, q1):
        if self._flat is not None:
            return self._flat.inverse_jacobians()
        q0, q1 = _vec(q0, self.dim), _vec(q1, self.dim)
        j0 = np.zeros((self.dim, self.dim))
        j1 = np.zeros((self.dim, self.dim))
        for f, b in zip(self.factors, self.blocks):
            a0, a1 = f.inverse_jacobians(q0[b], q1[b])
            j0[b, b] = a0
            j1[b, b] = a1
        return j0, j1


def product_retraction(retractions):
    """Retraction on Q_1 x ... x Q_n from retractions on each factor.

    A single factor is returned unchanged.
    """
    retractions = list(retractions)
    if len(retractions) == 1:
        return retractions[0]
    return ProductRetraction(retractions)


# ---------------------------------------------------------------------------
# One-form bases
# ---------------------------------------------------------------------------

class OneFormBasis:
    """Rows omega^a(q) spanning an annihilator codistribution.

    ``eval(q)`` returns an (m, n) matrix; ``m`` may be zero.
    """

    constant = False

    def __init__(self, m, n):
        self.m = int(m)
        self.n = int(n)

    def eval(self, q):
        raise NotImplementedError

    def __call__(self, q):
        return self.eval(q)

    def labels(self):
        return [f"row_{i + 1}" for i in range(self.m)]


class ConstantOneForms(OneFormBasis):
    constant = True

    def __init__(self, rows, n=None, labels=None):
        rows = np.asarray(rows, dtype=float)
        if rows.size == 0:
            if n is None:
                raise ShapeError("empty one-form basis needs an explicit width")
            rows = np.zeros((0, int(n)))
        rows = np.atleast_2d(rows)
        if n is not None and rows.shape[1] != n:
            raise ShapeError(f"one-form rows have width {rows.shape[1]}, expected {n}")
        super().__init__(*rows.shape)
        self.rows = rows
        self.rows.setflags(write=False)
        self._labels = list(labels) if labels is not None else None

    def eval(self, q=None):
        return self.rows

    def labels(self):
        return self._labels if self._labels is not None else super().labels()

    def __repr__(self):
        return f"ConstantOneForms({self.rows.tolist()})"


class CallableOneForms(OneFormBasis):
    """Position-dependent one-forms given by ``fn(q) -> (m, n) array``."""

    def __init__(self, fn: Callable, m, n):
        super().__init__(m, n)
        self.fn = fn

    def eval(self, q):
        w = np.asarray(self.fn(_vec(q, self.n)), dtype=float).reshape(self.m, self.n)
        return w


class ExtendedOneForms(OneFormBasis):
    """omega_i evaluated on the block q[block] and zero-padded to the product."""

    def __init__(self, inner: OneFormBasis, block: slice, total_dim):
        super().__init__(inner.m, total_dim)
        self.inner = inner
        self.block = block
        self.constant = inner.constant
        if inner.constant:
            rows = np.zeros((inner.m, total_dim))
            rows[:, block] = inner.eval(None)
            self._rows = rows

    def eval(self, q):
        if self.constant:
            return self._rows
        q = _vec(q, self.n)
        out = np.zeros((self.m, self.n))
        out[:, self.block] = self.inner.eval(q[self.block])
        return out

    def labels(self):
        return self.inner.labels()


class StackedOneForms(OneFormBasis):
    """Row-wise concatenation of several bases of equal width."""

    def __init__(self, parts: Sequence[OneFormBasis], n=None, labels=None):
        parts = list(parts)
        widths = {p.n for p in parts}
        if n is None:
            if len(widths) != 1:
                raise ShapeError(f"cannot stack one-forms of widths {sorted(widths)}")
            n = widths.pop()
        elif widths - {n}:
            raise ShapeError(f"cannot stack one-forms of widths {sorted(widths)} into width {n}")
        super().__init__(sum(p.m for p in parts), n)
        self.parts = tuple(parts)
        self.constant = all(p.constant for p in parts)
        self._labels = labels
        if self.constant:
            self._rows = self._stack(None)

    def _stack(self, q):
        if not self.parts:
            return np.zeros((0, self.n))
        return np.vstack([p.eval(q) for p in self.parts])

    def eval(self, q):
        if self.constant:
            return self._rows
        return self._stack(_vec(q, self.n))

    def labels(self):
        if self._labels is not None:
            return list(self._labels)
        out = []
        for p in self.parts:
            out.extend(p.labels())
        return out


def as_one_forms(omega, n=None):
    """Coerce a constant row / matrix / ``OneFormBasis`` into a ``OneFormBasis``."""
    if isinstance(omega, OneFormBasis):
        if n is not None and omega.n != n:
            raise ShapeError(f"one-form width {omega.n} does not match chart dimension {n}")
        return omega
    return ConstantOneForms(omega, n=n)


def _check_block(block, total_dim):
    if isinstance(block, slice):
        start, stop = block.start or 0, block.stop
    else:
        start, stop = block
    if stop is None or not (0 <= start < stop <= total_dim):
        raise LayoutError(f"block [{start}, {stop}) does not fit in dimension {total_dim}")
    return slice(int(start), int(stop))


def extend_one_form(omega, block, total_dim):
    """Zero-pad a subsystem one-form so it acts on the whole product space.

    ``block`` is a half-open index range ``(start, stop)`` or a ``slice``.
    """
    block = _check_block(block, total_dim)
    width = block.stop - block.start
    return ExtendedOneForms(as_one_forms(omega, n=width), block, total_dim)


def _forms_at(omega, q):
    if isinstance(omega, OneFormBasis):
        return omega.eval(q), True
    if callable(omega):
        return np.atleast_1d(np.asarray(omega(q), dtype=float)), False
    return np.atleast_1d(np.asarray(omega, dtype=float)), False


def _pair(omega, q, v):
    w, is_basis = _forms_at(omega, q)
    if w.shape[-1] != v.size:
        raise ShapeError(f"one-form width {w.shape[-1]} does not match dimension {v.size}")
    out = w @ v
    if is_basis or w.ndim == 2:
        return out
    return float(out)


def discrete_one_form_plus(omega, retraction: Retraction, q0, q1):
    """omega(q0) . R^{-1}_{q0}(q1)."""
    q0, q1 = _vec(q0), _vec(q1)
    return _pair(omega, q0, retraction.inverse(q0, q1))


def discrete_one_form_minus(omega, retraction: Retraction, q0, q1):
    """omega(q1) . (-R^{-1}_{q1}(q0))."""
    q0, q1 = _vec(q0), _vec(q1)
    return _pair(omega, q1, -retraction.inverse(q1, q0))


# ---------------------------------------------------------------------------
# Discrete Lagrangians and forces
# ---------------------------------------------------------------------------

class DiscreteLagrangian:
    """Two-point function L_d(q0, q1) with its partial derivatives.

    ``hessian_blocks`` returns the four n x n blocks d(D_iL_d)/dq_j used by
    the Newton solvers.
    """

    def __init__(self, lagrangian, retraction: Retraction):
        self.lagrangian = lagrangian
        self.retraction = retraction
        self.h = retraction.h
        self.n = retraction.dim
        self._exact_hessian = retraction.affine and lagrangian.hessian(
            np.zeros(self.n), np.zeros(self.n)) is not None
        if retraction.affine:
            self._j = retraction.inverse_jacobians(np.zeros(self.n), np.zeros(self.n))

    def _jac(self, q0, q1):
        if self.retraction.affine:
            return self._j
        return self.retraction.inverse_jacobians(q0, q1)

    def velocity(self, q0, q1):
        return check_inverse_domain(self.retraction, q0, q1)

    def eval(self, q0, q1):
        q0 = _vec(q0, self.n)
        return self.h * self.lagrangian.value(q0, self.velocity(q0, q1))

    __call__ = eval

    def d1(self, q0, q1):
        q0 = _vec(q0, self.n)
        v = self.velocity(q0, q1)
        j0, _ = self._jac(q0, q1)
        return self.h * (self.lagrangian.dq(q0, v) + j0.T @ self.lagrangian.dv(q0, v))

    def d2(self, q0, q1):
        q0 = _vec(q0, self.n)
        v = self.velocity(q0, q1)
        _, j1 = self._jac(q0, q1)
        return self.h * (j1.T @ self.lagrangian.dv(q0, v))

    def hessian_blocks(self, q0, q1):
        """(dD1/dq0, dD1/dq1, dD2/dq0, dD2/dq1)."""
        q0, q1 = _vec(q0, self.n), _vec(q1, self.n)
        if self._exact_hessian:
            v = self.velocity(q0, q1)
            lqq, lqv, lvv = self.lagrangian.hessian(q0, v)
            j0, j1 = self._j
            h = self.h
            d1_q0 = h * (lqq + lqv @ j0 + j0.T @ lqv.T + j0.T @ lvv @ j0)
            d1_q1 = h * (lqv @ j1 + j0.T @ lvv @ j1)
            d2_q0 = h * (j1.T @ (lqv.T + lvv @ j0))
            d2_q1 = h * (j1.T @ lvv @ j1)
            return d1_q0, d1_q1, d2_q0, d2_q1
        d1_q0 = fd_jacobian(lambda x: self.d1(x, q1), q0)
        d1_q1 = fd_jacobian(lambda x: self.d1(q0, x), q1)
        d2_q0 = fd_jacobian(lambda x: self.d2(x, q1), q0)
        d2_q1 = fd_jacobian(lambda x: self.d2(q0, x), q1)
        return d1_q0, d1_q1, d2_q0, d2_q1

    @property
    def linear_derivatives(self):
        """True when D1, D2 are affine in (q0, q1), so their Hessian is constant."""
        return self._exact_hessian and getattr(self.lagrangian, "quadratic", False)


class BlockDiscreteLagrangian:
    """Sum of subsystem discrete Lagrangians, each acting on its own block.

    This is the discretize-then-interconnect assembly; it exposes the same
    interface as ``DiscreteLagrangian``.
    """

    def __init__(self, parts, blocks, n):
        self.parts = tuple(parts)
        self.blocks = tuple(blocks)
        self.n = int(n)
        hs = {p.h for p in self.parts}
        if len(hs) != 1:
            raise ConfigurationError(f"subsystem discretizations use different steps: {sorted(hs)}")
        self.h = hs.pop()

    def eval(self, q0, q1):
        q0, q1 = _vec(q0, self.n), _vec(q1, self.n)
        return sum(p.eval(q0[b], q1[b]) for p, b in zip(self.parts, self.blocks))

    __call__ = eval

    def _stack(self, name, q0, q1):
        q0, q1 = _vec(q0, self.n), _vec(q1, self.n)
        out = np.zeros(self.n)
        for p, b in zip(self.parts, self.blocks):
            out[b] = getattr(p, name)(q0[b], q1[b])
        return out

    def d1(self, q0, q1):
        return self._stack("d1", q0, q1)

    def d2(self, q0, q1):
        return self._stack("d2", q0, q1)

    def hessian_blocks(self, q0, q1):
        q0, q1 = _vec(q0, self.n), _vec(q1, self.n)
        out = [np.zeros((self.n, self.n)) for _ in range(4)]
        for p, b in zip(self.parts, self.blocks):
            for full, part in zip(out, p.hessian_blocks(q0[b], q1[b])):
                full[b, b] = part
        return tuple(out)

    @property
    def linear_derivatives(self):
        return all(p.linear_derivatives for p in self.parts)


def discretize_lagrangian(lagrangian, retraction: Retraction) -> DiscreteLagrangian:
    """L_d(q0, q1) = h L(q0, R^{-1}_{q0}(q1)).

    ``lagrangian`` needs ``value``, ``dq``, ``dv`` and ``hessian`` (which may
    return ``None``); see ``model.QuadraticLagrangian``.
    """
    return DiscreteLagrangian(lagrangian, retraction)


class DiscreteForce:
    """Left-rectangle discretization of an external force field.

    ``plus`` is identically zero. ``minus(q0, q1) = -h F(q0, R^{-1}_{q0}(q1))``
    and enters the momentum equation for p_k as ``-minus``.
    """

    def __init__(self, force, retraction: Retraction):
        self.force = force
        self.retraction = retraction
        self.h = retraction.h
        self.n = retraction.dim
        self.linear = retraction.affine and getattr(force, "linear", False)
        self.zero = getattr(force, "zero", False)

    def plus(self, q0, q1):
        return np.zeros(self.n)

    def minus(self, q0, q1):
        if self.zero:
            return np.zeros(self.n)
        q0 = _vec(q0, self.n)
        return -self.h * self.force.value(q0, self.retraction.inverse(q0, q1))

    def minus_jacobians(self, q0, q1):
        """(d minus / d q0, d minus / d q1)."""
        if self.zero:
            z = np.zeros((self.n, self.n))
            return z, z
        q0 = _vec(q0, self.n)
        v = self.retraction.inverse(q0, q1)
        fq, fv = self.force.jacobians(q0, v)
        j0, j1 = self.retraction.inverse_jacobians(q0, q1)
        return -self.h * (fq + fv @ j0), -self.h * (fv @ j1)

    def plus_jacobians(self, q0, q1):
        z = np.zeros((self.n, self.n))
        return z, z

    def __iter__(self):
        yield self.plus
        yield self.minus


class BlockDiscreteForce:
    """Subsystem discrete forces lifted blockwise to the product."""

    def __init__(self, parts, blocks, n):
        self.parts = tuple(parts)
        self.blocks = tuple(blocks)
        self.n = int(n)
        self.linear = all(p.linear for p in self.parts)
        self.zero = all(p.zero for p in self.parts)

    def plus(self, q0, q1):
        return np.zeros(self.n)

    def minus(self, q0, q1):
        q0, q1 = _vec(q0, self.n), _vec(q1, self.n)
        out = np.zeros(self.n)
        for p, b in zip(self.parts, self.blocks):
            out[b] = p.minus(q0[b], q1[b])
        return out

    def minus_jacobians(self, q0, q1):
        q0, q1 = _vec(q0, self.n), _vec(q1, self.n)
        a = np.zeros((self.n, self.n))
        c = np.zeros((self.n, self.n))
        for p, b in zip(self.parts, self.blocks):
            j0, j1 = p.minus_jacobians(q0[b], q1[b])
            a[b, b] = j0
            c[b, b] = j1
        return a, c

    def plus_jacobians(self, q0, q1):
        z = np.zeros((self.n, self.n))
        return z, z


def discretize_force(force, retraction: Retraction) -> DiscreteForce:
    """Discrete forces (f_d^+, f_d^-) by the same left-rectangle rule as L_d."""
    return DiscreteForce(force, retraction)


def check_inverse_domain(retraction, q0, q1):
    v = retraction.inverse(q0, q1)
    if not np.isfinite(v).all():
        raise DomainError(f"retraction inverse undefined at ({q0}, {q1})")
    return v
