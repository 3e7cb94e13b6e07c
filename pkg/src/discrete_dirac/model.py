"""Subsystems, interconnections and their composition.

Two routes lead to a discrete system:

* compose-then-discretize: ``compose`` builds one ``InterconnectedSystem``
  and ``integrator.discretize`` discretizes it with the product retraction;
* discretize-then-interconnect: ``discretize_then_interconnect`` discretizes
  each subsystem on its own factor and assembles the interconnected equations
  blockwise.

Both produce ``integrator.DiscreteDiracSystem`` objects with identical
interfaces, so the same steppers run either.
"""

from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np
import scipy.linalg

from ._numerics import fd_gradient, fd_jacobian, null_space
from .core_geometry import (
    BlockDiscreteForce,
    BlockDiscreteLagrangian,
    Chart,
    ConstantOneForms,
    OneFormBasis,
    StackedOneForms,
    VectorRetraction,
    _check_block,
    as_one_forms,
    discretize_force,
    discretize_lagrangian,
    extend_one_form,
    product_retraction,
)
from .errors import ConfigurationError, LayoutError, ShapeError
from .integrator import BlockConstraints, DiscreteDiracSystem, RetractionConstraints

SYM_TOL = 1e-12


def _matrix(a, n, what):
    a = np.atleast_2d(np.asarray(a, dtype=float))
    if a.shape != (n, n):
        raise ShapeError(f"{what} has shape {a.shape}, expected ({n}, {n})")
    return a


# ---------------------------------------------------------------------------
# Lagrangians
# ---------------------------------------------------------------------------

class QuadraticLagrangian:
    """L(q, v) = 1/2 v^T M v - 1/2 q^T K q - c^T q.

    M must be symmetric positive semidefinite and may be singular (dummy
    coordinates carry a zero mass row).
    """

    quadratic = True

    def __init__(self, M, K=None, c=None):
        M = np.atleast_2d(np.asarray(M, dtype=float))
        n = M.shape[0]
        self.n = n
        self.M = _matrix(M, n, "mass matrix")
        self.K = np.zeros((n, n)) if K is None else _matrix(K, n, "stiffness matrix")
        self.c = np.zeros(n) if c is None else np.asarray(c, dtype=float).reshape(-1)
        if self.c.size != n:
            raise ShapeError(f"linear potential has width {self.c.size}, expected {n}")
        for name, a in (("mass", self.M), ("stiffness", self.K)):
            if not np.allclose(a, a.T, atol=SYM_TOL, rtol=0):
                raise ShapeError(f"{name} matrix is not symmetric")
        if n and np.linalg.eigvalsh(self.M).min() < -1e-12 * max(1.0, np.abs(self.M).max()):
            raise ShapeError("mass matrix is not positive semidefinite")
        for a in (self.M, self.K, self.c):
            a.setflags(write=False)

    def value(self, q, v):
        return 0.5 * v @ self.M @ v - 0.5 * q @ self.K @ q - self.c @ q

    def dq(self, q, v):
        return -self.K @ q - self.c

    def dv(self, q, v):
        return self.M @ v

    def hessian(self, q, v):
        """(L_qq, L_qv, L_vv)."""
        return -self.K, np.zeros((self.n, self.n)), self.M

    def __add__(self, other):
        if isinstance(other, QuadraticLagrangian):
            if other.n != self.n:
                raise ShapeError(f"cannot add Lagrangians of widths {self.n} and {other.n}")
            return QuadraticLagrangian(self.M + other.M, self.K + other.K, self.c + other.c)
        return SumLagrangian([self, other])

    def __repr__(self):
        return f"QuadraticLagrangian(n={self.n})"


class GeneralLagrangian:
    """User Lagrangian from callables; missing partials use central differences."""

    quadratic = False

    def __init__(self, n, value, dq=None, dv=None, hessian=None):
        self.n = int(n)
        self._value = value
        self._dq = dq
        self._dv = dv
        self._hessian = hessian

    def value(self, q, v):
        return float(self._value(q, v))

    def dq(self, q, v):
        if self._dq is not None:
            return np.asarray(self._dq(q, v), dtype=float)
        return fd_gradient(lambda x: self._value(x, v), q)

    def dv(self, q, v):
        if self._dv is not None:
            return np.asarray(self._dv(q, v), dtype=float)
        return fd_gradient(lambda x: self._value(q, x), v)

    def hessian(self, q, v):
        if self._hessian is None:
            return None
        return self._hessian(q, v)

    def __add__(self, other):
        return SumLagrangian([self, other])


class SumLagrangian:
    """Pointwise sum of Lagrangians on the same chart."""

    def __init__(self, parts):
        self.parts = tuple(parts)
        widths = {p.n for p in self.parts}
        if len(widths) != 1:
            raise ShapeError(f"cannot add Lagrangians of widths {sorted(widths)}")
        self.n = widths.pop()
        self.quadratic = all(getattr(p, "quadratic", False) for p in self.parts)

    def value(self, q, v):
        return sum(p.value(q, v) for p in self.parts)

    def dq(self, q, v):
        return sum(p.dq(q, v) for p in self.parts)

    def dv(self, q, v):
        return sum(p.dv(q, v) for p in self.parts)

    def hessian(self, q, v):
        hs = [p.hessian(q, v) for p in self.parts]
        if any(h is None for h in hs):
            return None
        return tuple(sum(blk) for blk in zip(*hs))

    def __add__(self, other):
        return SumLagrangian(list(self.parts) + [other])


class BlockLagrangian:
    """L(q, v) = sum_i L^i(q[block_i], v[block_i])."""

    def __init__(self, parts, blocks, n):
        self.parts = tuple(parts)
        self.blocks = tuple(blocks)
        self.n = int(n)
        self.quadratic = all(getattr(p, "quadratic", False) for p in self.parts)

    def value(self, q, v):
        return sum(p.value(q[b], v[b]) for p, b in zip(self.parts, self.blocks))

    def _stack(self, name, q, v):
        out = np.zeros(self.n)
        for p, b in zip(self.parts, self.blocks):
            out[b] = getattr(p, name)(q[b], v[b])
        return out

    def dq(self, q, v):
        return self._stack("dq", q, v)

    def dv(self, q, v):
        return self._stack("dv", q, v)

    def hessian(self, q, v):
        out = [np.zeros((self.n, self.n)) for _ in range(3)]
        for p, b in zip(self.parts, self.blocks):
            hb = p.hessian(q[b], v[b])
            if hb is None:
                return None
            for full, part in zip(out, hb):
                full[b, b] = part
        return tuple(out)


# ---------------------------------------------------------------------------
# Forces
# ---------------------------------------------------------------------------

class LinearDamping:
    """F(q, v) = -R v."""

    linear = True

    def __init__(self, R):
        self.R = np.atleast_2d(np.asarray(R, dtype=float))
        n = self.R.shape[0]
        self.R = _matrix(self.R, n, "damping matrix")
        self.n = n
        self.zero = not np.any(self.R)

    @classmethod
    def none(cls, n):
        return cls(np.zeros((n, n)))

    def value(self, q, v):
        return -self.R @ v

    def jacobians(self, q, v):
        """(dF/dq, dF/dv)."""
        return np.zeros((self.n, self.n)), -self.R


class GeneralForce:
    """F(q, v) from a callable; Jacobians fall back to central differences."""

    linear = False
    zero = False

    def __init__(self, n, fn, jacobians=None):
        self.n = int(n)
        self.fn = fn
        self._jac = jacobians

    def value(self, q, v):
        return np.asarray(self.fn(q, v), dtype=float)

    def jacobians(self, q, v):
        if self._jac is not None:
            return self._jac(q, v)
        return fd_jacobian(lambda x: self.fn(x, v), q), fd_jacobian(lambda x: self.fn(q, x), v)


class BlockForce:
    """Sum of subsystem forces pulled back along the projections."""

    def __init__(self, parts, blocks, n):
        self.parts = tuple(parts)
        self.blocks = tuple(blocks)
        self.n = int(n)
        self.linear = all(getattr(p, "linear", False) for p in self.parts)
        self.zero = all(getattr(p, "zero", False) for p in self.parts)

    def value(self, q, v):
        out = np.zeros(self.n)
        for p, b in zip(self.parts, self.blocks):
            out[b] = p.value(q[b], v[b])
        return out

    def jacobians(self, q, v):
        fq = np.zeros((self.n, self.n))
        fv = np.zeros((self.n, self.n))
        for p, b in zip(self.parts, self.blocks):
            a, c = p.jacobians(q[b], v[b])
            fq[b, b] = a
            fv[b, b] = c
        return fq, fv


# ---------------------------------------------------------------------------
# Subsystems and composition
# ---------------------------------------------------------------------------

@dataclass
class Subsystem:
    """One component system: chart, Lagrangian, constraint one-forms, force."""

    chart: Chart
    lagrangian: object
    constraints: Optional[OneFormBasis] = None
    force: object = None
    name: str = "subsystem"

    def __post_init__(self):
        n = self.chart.dim
        if getattr(self.lagrangian, "n", n) != n:
            raise ShapeError(f"{self.name}: Lagrangian width {self.lagrangian.n} != chart dim {n}")
        if self.constraints is None:
            self.constraints = ConstantOneForms(np.zeros((0, n)), n=n)
        self.constraints = as_one_forms(self.constraints, n=n)
        if self.force is None:
            self.force = LinearDamping.none(n)
        if getattr(self.force, "n", n) != n:
            raise ShapeError(f"{self.name}: force width {self.force.n} != chart dim {n}")


@dataclass
class InterconnectionSpec:
    """Rows alpha^b spanning the annihilator of the interconnection distribution."""

    sigma_annihilator: object
    labels: Optional[Sequence[str]] = None

    def width(self):
        """Row width, or None for an empty row list."""
        a = self.sigma_annihilator
        if isinstance(a, OneFormBasis):
            return a.n
        a = np.asarray(a, dtype=float)
        return None if a.size == 0 else np.atleast_2d(a).shape[-1]

    def basis(self, n):
        if isinstance(self.sigma_annihilator, OneFormBasis):
            return as_one_forms(self.sigma_annihilator, n=n)
        rows = np.asarray(self.sigma_annihilator, dtype=float)
        if rows.size == 0:
            rows = np.zeros((0, n))
        return ConstantOneForms(rows, n=n, labels=self.labels)


@dataclass
class InterconnectedSystem:
    """Composed system with constraint rows ordered [omega~_1; ...; omega~_n; alpha]."""

    chart: Chart
    lagrangian: object
    constraint_rows: OneFormBasis
    force: object
    block_layout: tuple
    multiplier_split: tuple
    subsystems: tuple = ()
    interconnection: Optional[OneFormBasis] = None
    name: str = "system"
    witnesses: np.ndarray = None
    witness_labels: list = field(default_factory=list)

    def __post_init__(self):
        n = self.chart.dim
        if self.witnesses is None:
            self.witnesses = np.zeros((0, n))
        self.witnesses = np.atleast_2d(np.asarray(self.witnesses, dtype=float)).reshape(-1, n)
        if len(self.witness_labels) != self.witnesses.shape[0]:
            self.witness_labels = [f"w{i + 1}" for i in range(self.witnesses.shape[0])]

    @property
    def n(self):
        return self.chart.dim

    @property
    def coord_names(self):
        return self.chart.coord_names

    def constraint_labels(self):
        return self.constraint_rows.labels()

    def distribution_basis(self, q):
        """Columns spanning Delta_Q(q) = ker of all constraint rows."""
        return null_space(self.constraint_rows.eval(q))

    def discretize(self, h):
        from .integrator import discretize

        return discretize(self, h)


def _labels_or(basis, fallback):
    labels = list(basis.labels())
    default = [f"row_{i + 1}" for i in range(basis.m)]
    return fallback if labels == default else labels


def _layout(subsystems):
    blocks, start = [], 0
    for s in subsystems:
        blocks.append(slice(start, start + s.chart.dim))
        start += s.chart.dim
    return tuple(blocks), start


def _coord_names(subsystems):
    names = [c for s in subsystems for c in s.chart.coord_names]
    if len(set(names)) == len(names):
        return names
    return [f"{s.name}.{c}" for s in subsystems for c in s.chart.coord_names]


def _combine_lagrangians(subsystems, blocks, n):
    if len(subsystems) == 1:
        return subsystems[0].lagrangian
    if all(isinstance(s.lagrangian, QuadraticLagrangian) for s in subsystems):
        M = scipy.linalg.block_diag(*[s.lagrangian.M for s in subsystems])
        K = scipy.linalg.block_diag(*[s.lagrangian.K for s in subsystems])
        c = np.concatenate([s.lagrangian.c for s in subsystems])
        return QuadraticLagrangian(M, K, c)
    return BlockLagrangian([s.lagrangian for s in subsystems], blocks, n)


def _combine_forces(subsystems, blocks, n):
    if len(subsystems) == 1:
        return subsystems[0].force
    if all(isinstance(s.force, LinearDamping) for s in subsystems):
        return LinearDamping(scipy.linalg.block_diag(*[s.force.R for s in subsystems]))
    return BlockForce([s.force for s in subsystems], blocks, n)


def _row_parts(subsystems, interconnection, blocks, n):
    parts, labels = [], []
    for i, (s, b) in enumerate(zip(subsystems, blocks), start=1):
        if s.constraints.m == 0:
            continue
        parts.append(extend_one_form(s.constraints, b, n))
        labels.extend(_labels_or(s.constraints, [f"omega{i}_{a + 1}" for a in range(s.constraints.m)]))
    mu_rows = sum(p.m for p in parts)
    alpha = (interconnection.basis(n) if interconnection is not None
             else ConstantOneForms(np.zeros((0, n)), n=n))
    if alpha.m:
        parts.append(alpha)
        labels.extend(_labels_or(alpha, [f"alpha_{b + 1}" for b in range(alpha.m)]))
    return parts, labels, (mu_rows, alpha.m), alpha


def compose(subsystems, interconnection: Optional[InterconnectionSpec] = None, name="system",
            witnesses=None, witness_labels=None) -> InterconnectedSystem:
    """Interconnect subsystems on the product chart.

    The Lagrangian is the blockwise sum, forces are pulled back blockwise and
    the constraint rows are [all subsystem rows in order, then interconnection rows].
    """
    subsystems = list(subsystems)
    if not subsystems:
        raise LayoutError("compose needs at least one subsystem")
    blocks, n = _layout(subsystems)
    if interconnection is not None:
        width = interconnection.width()
        if width is not None and width != n:
            raise LayoutError(f"interconnection rows have width {width}, product dimension is {n}")
    chart = Chart.from_names(_coord_names(subsystems))
    parts, labels, split, alpha = _row_parts(subsystems, interconnection, blocks, n)
    rows = StackedOneForms(parts, n=n, labels=labels)
    return InterconnectedSystem(
        chart=chart,
        lagrangian=_combine_lagrangians(subsystems, blocks, n),
        constraint_rows=rows,
        force=_combine_forces(subsystems, blocks, n),
        block_layout=blocks,
        multiplier_split=split,
        subsystems=tuple(subsystems),
        interconnection=alpha,
        name=name,
        witnesses=witnesses,
        witness_labels=list(witness_labels or []),
    )


def restrict_form_to_block(alpha, block, q=None):
    """alpha_i(q) . v_i = alpha(q) . (v_i lifted horizontally): the block slice."""
    if isinstance(alpha, OneFormBasis):
        row = alpha.eval(q)
    elif callable(alpha):
        row = np.asarray(alpha(q), dtype=float)
    else:
        row = np.asarray(alpha, dtype=float)
    b = _check_block(block, row.shape[-1])
    return row[..., b]


def continuous_residual(system: InterconnectedSystem, q, v, p, qdot, pdot, multipliers):
    """Stacked residual of the forced Lagrange-Dirac equations in coordinates.

    Blocks: qdot - v; constraint rows . qdot; pdot - dL/dq - F - W^T nu;
    p - dL/dv.
    """
    q, v, p, qdot, pdot = (np.asarray(x, dtype=float).reshape(-1) for x in (q, v, p, qdot, pdot))
    n = system.n
    for x in (q, v, p, qdot, pdot):
        if x.size != n:
            raise ShapeError(f"state component has width {x.size}, expected {n}")
    nu = np.asarray(multipliers, dtype=float).reshape(-1)
    W = system.constraint_rows.eval(q)
    if nu.size != W.shape[0]:
        raise ShapeError(f"{nu.size} multipliers for {W.shape[0]} constraint rows")
    L = system.lagrangian
    return np.concatenate([
        qdot - v,
        W @ qdot,
        pdot - L.dq(q, v) - system.force.value(q, v) - W.T @ nu,
        p - L.dv(q, v),
    ])


def discretize_then_interconnect(subsystems, interconnection: Optional[InterconnectionSpec] = None,
                                 h=None, retractions=None, name="system", witnesses=None,
                                 witness_labels=None) -> DiscreteDiracSystem:
    """Discretize each subsystem on its own factor, then assemble the
    interconnected discrete equations blockwise.

    Subsystem i contributes L_d^i, its discrete force and omega_{d+,i}; each
    interconnection row is discretized with the product retraction and its
    multiplier acts on every block through ``restrict_form_to_block``.
    """
    subsystems = list(subsystems)
    blocks, n = _layout(subsystems)
    if retractions is None:
        if h is None:
            raise ConfigurationError("need a step size or a list of retractions")
        retractions = [VectorRetraction(h, s.chart.dim) for s in subsystems]
    retractions = list(retractions)
    if len(retractions) != len(subsystems):
        raise LayoutError(f"{len(retractions)} retractions for {len(subsystems)} subsystems")
    product = product_retraction(retractions)

    Ld = BlockDiscreteLagrangian(
        [discretize_lagrangian(s.lagrangian, r) for s, r in zip(subsystems, retractions)], blocks, n)
    fd = BlockDiscreteForce(
        [discretize_force(s.force, r) for s, r in zip(subsystems, retractions)], blocks, n)
    continuous = compose(subsystems, interconnection, name=name, witnesses=witnesses,
                         witness_labels=witness_labels)
    kept = [(s, r, b) for s, r, b in zip(subsystems, retractions, blocks) if s.constraints.m]
    parts = [RetractionConstraints(s.constraints, r) for s, r, _ in kept]
    cons = BlockConstraints(parts, [b for _, _, b in kept], continuous.interconnection, product,
                            labels=continuous.constraint_labels())
    return DiscreteDiracSystem(Ld, fd, cons, continuous.chart.coord_names,
                               continuous.multiplier_split, name=name, continuous=continuous,
                               witnesses=continuous.witnesses,
                               witness_labels=continuous.witness_labels)


__all__ = [
    "QuadraticLagrangian", "GeneralLagrangian", "SumLagrangian", "BlockLagrangian",
    "LinearDamping", "GeneralForce", "BlockForce", "Subsystem", "InterconnectionSpec",
    "InterconnectedSystem", "compose", "restrict_form_to_block", "continuous_residual",
    "discretize_then_interconnect",
]
