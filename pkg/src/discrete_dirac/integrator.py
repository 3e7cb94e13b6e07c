"""Time stepping with the (+) discrete Lagrange-Dirac equations.

For a step from (q_k, p_k) the unknowns are (q_{k+1}, mu, lambda) and the
equations are

    p_k     = -D1 L_d(q_k, q_{k+1}) - f_d^-(q_k, q_{k+1}) + C(q_k)^T nu
    0       = discrete constraint rows on (q_k, q_{k+1})

with nu = (mu, lambda) stacked in the order of the constraint rows. The new
momentum follows explicitly: p_{k+1} = D2 L_d(q_k, q_{k+1}) + f_d^+(q_k, q_{k+1}).
"""

import time
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg

from .core_geometry import (
    ProductRetraction,
    Retraction,
    VectorRetraction,
    discretize_force,
    discretize_lagrangian,
    product_retraction,
)
from .errors import ConvergenceError, RankError, ShapeError, SimulationError, StepError

RANK_RTOL = 1e-12


@dataclass(frozen=True)
class SolverOptions:
    """Newton settings.

    Residuals are measured in the max norm after dividing each block by
    (1 + magnitude of the known data), so large states do not stall on
    roundoff; for O(1) data this is an absolute tolerance.
    """

    tol: float = 1e-12
    max_iter: int = 50


DEFAULT_OPTIONS = SolverOptions()


@dataclass(frozen=True)
class DiscreteState:
    k: int
    q: np.ndarray
    p: np.ndarray

    def __post_init__(self):
        q = np.asarray(self.q, dtype=float).reshape(-1)
        p = np.asarray(self.p, dtype=float).reshape(-1)
        if q.shape != p.shape:
            raise ShapeError(f"q has width {q.size} but p has width {p.size}")
        object.__setattr__(self, "q", q)
        object.__setattr__(self, "p", p)


@dataclass(frozen=True)
class StepResult:
    next: DiscreteState
    mu: np.ndarray
    lam: np.ndarray
    newton_iters: int
    residual_norm: float

    @property
    def multipliers(self):
        return np.concatenate([self.mu, self.lam])


# ---------------------------------------------------------------------------
# Discrete constraints and the discrete system container
# ---------------------------------------------------------------------------

class RetractionConstraints:
    """Discrete constraints omega_{d+/-} from one-form rows and a retraction."""

    def __init__(self, basis, retraction: Retraction):
        if basis.n != retraction.dim:
            raise ShapeError(f"one-form width {basis.n} does not match retraction dim {retraction.dim}")
        self.basis = basis
        self.retraction = retraction
        self.m = basis.m
        self.n = basis.n
        self.linear = basis.constant and retraction.affine
        if retraction.affine:
            self._j = retraction.inverse_jacobians(np.zeros(self.n), np.zeros(self.n))

    def labels(self):
        return self.basis.labels()

    def matrix(self, q):
        return self.basis.eval(q)

    def _j1(self, q0, q1):
        if self.retraction.affine:
            return self._j[1]
        return self.retraction.inverse_jacobians(q0, q1)[1]

    def plus(self, q0, q1):
        return self.basis.eval(q0) @ self.retraction.inverse(q0, q1)

    def plus_jac_q1(self, q0, q1):
        return self.basis.eval(q0) @ self._j1(q0, q1)

    def minus(self, q0, q1):
        return self.basis.eval(q1) @ (-self.retraction.inverse(q1, q0))

    def minus_jac_q0(self, q0, q1):
        return -self.basis.eval(q1) @ self._j1(q1, q0)


class BlockConstraints:
    """Subsystem constraints discretized on their own factors plus
    interconnection rows discretized with the product retraction.

    Multiplier directions are assembled blockwise: subsystem row omega_i^a(q_k^i)
    on block i, and, for each interconnection row, its restriction alpha_i^b(q_k)
    to every block.
    """

    def __init__(self, parts, blocks, alpha, product: Retraction, labels=None):
        self.parts = tuple(parts)
        self._labels = list(labels) if labels is not None else None
        self.blocks = tuple(blocks)
        self.factor_blocks = getattr(product, "blocks", (slice(0, product.dim),))
        self.alpha = alpha
        self.product = product
        self.n = product.dim
        self.m = sum(c.m for c in self.parts) + alpha.m
        self.linear = all(c.linear for c in self.parts) and alpha.constant and product.affine
        if product.affine:
            self._j = product.inverse_jacobians(np.zeros(self.n), np.zeros(self.n))
        self._const = None
        if all(c.basis.constant for c in self.parts) and alpha.constant:
            self._const = self._assemble(np.zeros(self.n))

    def labels(self):
        if self._labels is not None:
            return list(self._labels)
        out = []
        for c in self.parts:
            out.extend(c.labels())
        out.extend(self.alpha.labels())
        return out

    def matrix(self, q):
        if self._const is not None:
            return self._const
        return self._assemble(np.asarray(q, dtype=float))

    def _assemble(self, q):
        from .model import restrict_form_to_block

        out = np.zeros((self.m, self.n))
        r = 0
        for c, b in zip(self.parts, self.blocks):
            out[r:r + c.m, b] = c.matrix(q[b])
            r += c.m
        a = self.alpha.eval(q)
        for row in a:
            for b in self.factor_blocks:
                out[r, b] = restrict_form_to_block(row, b)
            r += 1
        return out

    def _alpha_j1(self, q0, q1):
        if self.product.affine:
            return self._j[1]
        return self.product.inverse_jacobians(q0, q1)[1]

    def plus(self, q0, q1):
        q0, q1 = np.asarray(q0, dtype=float), np.asarray(q1, dtype=float)
        vals = [c.plus(q0[b], q1[b]) for c, b in zip(self.parts, self.blocks)]
        vals.append(self.alpha.eval(q0) @ self.product.inverse(q0, q1))
        return np.concatenate(vals)

    def plus_jac_q1(self, q0, q1):
        q0, q1 = np.asarray(q0, dtype=float), np.asarray(q1, dtype=float)
        out = np.zeros((self.m, self.n))
        r = 0
        for c, b in zip(self.parts, self.blocks):
            out[r:r + c.m, b] = c.plus_jac_q1(q0[b], q1[b])
            r += c.m
        out[r:] = self.alpha.eval(q0) @ self._alpha_j1(q0, q1)
        return out

    def minus(self, q0, q1):
        q0, q1 = np.asarray(q0, dtype=float), np.asarray(q1, dtype=float)
        vals = [c.minus(q0[b], q1[b]) for c, b in zip(self.parts, self.blocks)]
        vals.append(self.alpha.eval(q1) @ (-self.product.inverse(q1, q0)))
        return np.concatenate(vals)

    def minus_jac_q0(self, q0, q1):
        q0, q1 = np.asarray(q0, dtype=float), np.asarray(q1, dtype=float)
        out = np.zeros((self.m, self.n))
        r = 0
        for c, b in zip(self.parts, self.blocks):
            out[r:r + c.m, b] = c.minus_jac_q0(q0[b], q1[b])
            r += c.m
        out[r:] = -self.alpha.eval(q1) @ self._alpha_j1(q1, q0)
        return out


class DiscreteDiracSystem:
    """Everything a stepper needs: L_d, discrete forces and discrete constraints.

    ``split`` is (number of subsystem rows mu, number of interconnection rows
    lambda); the constraint rows are ordered the same way.
    """

    def __init__(self, lagrangian_d, force_d, constraints, coord_names, split=None,
                 name="system", continuous=None, witnesses=None, witness_labels=None):
        self.Ld = lagrangian_d
        self.force = force_d
        self.constraints = constraints
        self.coord_names = tuple(coord_names)
        self.n = len(self.coord_names)
        self.h = lagrangian_d.h
        self.m = constraints.m
        self.split = tuple(split) if split is not None else (self.m, 0)
        if sum(self.split) != self.m:
            raise ShapeError(f"multiplier split {self.split} does not cover {self.m} rows")
        self.name = name
        self.continuous = continuous
        self.witnesses = (np.zeros((0, self.n)) if witnesses is None
                          else np.atleast_2d(np.asarray(witnesses, dtype=float)).reshape(-1, self.n))
        self.witness_labels = (list(witness_labels) if witness_labels is not None
                               else [f"witness_{i + 1}" for i in range(self.witnesses.shape[0])])
        self.linear = bool(lagrangian_d.linear_derivatives and force_d.linear and constraints.linear)
        self._kkt_cache = {}

    def constraint_labels(self):
        return self.constraints.labels()

    def witness_values(self, q):
        return self.witnesses @ np.asarray(q, dtype=float)

    def __repr__(self):
        return f"DiscreteDiracSystem({self.name!r}, n={self.n}, m={self.m}, h={self.h})"


def discretize(system, h=None, retraction=None, name=None):
    """Compose-then-discretize: discretize the summed Lagrangian and the full
    constraint basis of an ``InterconnectedSystem`` with the product retraction.
    """
    if retraction is None:
        if h is None:
            raise ValueError("need a step size or a retraction")
        dims = [b.stop - b.start for b in system.block_layout]
        retraction = product_retraction([VectorRetraction(h, d) for d in dims])
    Ld = discretize_lagrangian(system.lagrangian, retraction)
    fd = discretize_force(system.force, retraction)
    cons = RetractionConstraints(system.constraint_rows, retraction)
    return DiscreteDiracSystem(Ld, fd, cons, system.chart.coord_names, system.multiplier_split,
                               name=name or system.name, continuous=system,
                               witnesses=system.witnesses, witness_labels=system.witness_labels)


# ---------------------------------------------------------------------------
# Newton / KKT machinery
# ---------------------------------------------------------------------------

def _kkt_names(system):
    return list(system.coord_names), list(system.constraint_labels())


def _factor(J, system):
    """LU-factor a KKT matrix after an SVD rank check."""
    s = np.linalg.svd(J, compute_uv=False)
    smax = s[0] if s.size else 0.0
    if s.size and (smax == 0.0 or s[-1] <= RANK_RTOL * smax):
        _, _, vt = np.linalg.svd(J)
        z = vt[-1]
        coords, rows = _kkt_names(system)
        n = system.n
        zmax = np.abs(z).max()
        bad_q = [c for c, x in zip(coords, z[:n]) if abs(x) > 1e-8 * zmax]
        bad_rows = [r for r, x in zip(rows, z[n:]) if abs(x) > 1e-8 * zmax]
        raise RankError(
            f"singular step Jacobian for {system.name!r}: near-null direction involves "
            f"coordinates {bad_q} and constraint rows {bad_rows}",
            coordinates=bad_q, constraint_rows=bad_rows, null_vector=z)
    return scipy.linalg.lu_factor(J, check_finite=False)


def _scales(n, m, p_ref, q_ref, h):
    sp = 1.0 + np.abs(p_ref).max() if n else 1.0
    sq = 1.0 + np.abs(q_ref).max() / h if n else 1.0
    return np.concatenate([np.full(n, sp), np.full(m, sq)])


# Each step kind is a square system F(a, x) = 0 in x = (q_unknown, nu), with
# known data a = (q_known, p_known) (or (q_{k-1}, q_k) for the matched form).

def _plus_residual(system, a, x):
    n = system.n
    q0, p0, q1, nu = a[:n], a[n:], x[:n], x[n:]
    Ld, fd, cons = system.Ld, system.force, system.constraints
    rp = -Ld.d1(q0, q1) - fd.minus(q0, q1) + cons.matrix(q0).T @ nu - p0
    return np.concatenate([rp, cons.plus(q0, q1)])


def _plus_jacobian(system, a, x):
    n, m = system.n, system.m
    q0, q1 = a[:n], x[:n]
    _, d1_q1, _, _ = system.Ld.hessian_blocks(q0, q1)
    _, fm_q1 = system.force.minus_jacobians(q0, q1)
    top = np.hstack([-d1_q1 - fm_q1, system.constraints.matrix(q0).T])
    bottom = np.hstack([system.constraints.plus_jac_q1(q0, q1), np.zeros((m, m))])
    return np.vstack([top, bottom])


def _minus_residual(system, a, x):
    n = system.n
    q1, p1, q0, nu = a[:n], a[n:], x[:n], x[n:]
    Ld, fd, cons = system.Ld, system.force, system.constraints
    rp = Ld.d2(q0, q1) + fd.plus(q0, q1) + cons.matrix(q1).T @ nu - p1
    return np.concatenate([rp, cons.minus(q0, q1)])


def _minus_jacobian(system, a, x):
    n, m = system.n, system.m
    q1, q0 = a[:n], x[:n]
    _, _, d2_q0, _ = system.Ld.hessian_blocks(q0, q1)
    fp_q0, _ = system.force.plus_jacobians(q0, q1)
    top = np.hstack([d2_q0 + fp_q0, system.constraints.matrix(q1).T])
    bottom = np.hstack([system.constraints.minus_jac_q0(q0, q1), np.zeros((m, m))])
    return np.vstack([top, bottom])


def _carried(system, qm, q0):
    return system.Ld.d2(qm, q0) + system.force.plus(qm, q0)


def _matched_residual(system, a, x):
    n = system.n
    qm, q0, q1, nu = a[:n], a[n:], x[:n], x[n:]
    Ld, fd, cons = system.Ld, system.force, system.constraints
    rp = _carried(system, qm, q0) + Ld.d1(q0, q1) + fd.minus(q0, q1) + cons.matrix(q0).T @ nu
    return np.concatenate([rp, cons.plus(q0, q1)])


def _matched_jacobian(system, a, x):
    n, m = system.n, system.m
    q0, q1 = a[n:], x[:n]
    _, d1_q1, _, _ = system.Ld.hessian_blocks(q0, q1)
    _, fm_q1 = system.force.minus_jacobians(q0, q1)
    top = np.hstack([d1_q1 + fm_q1, system.constraints.matrix(q0).T])
    bottom = np.hstack([system.constraints.plus_jac_q1(q0, q1), np.zeros((m, m))])
    return np.vstack([top, bottom])


_KINDS = {
    "plus": (_plus_residual, _plus_jacobian),
    "minus": (_minus_residual, _minus_jacobian),
    "matched": (_matched_residual, _matched_jacobian),
}


def _guess(system, kind, a):
    """Initial iterate: the known position and zero multipliers."""
    n = system.n
    q = a[n:] if kind == "matched" else a[:n]
    return np.concatenate([q, np.zeros(system.m)])


def _affine_form(system, kind):
    """Exact affine form F(a, x0(a) + y) = Jc a + Jx y + r0 of a linear step.

    Probing at the initial guess keeps velocities exactly zero, so no large
    terms cancel. Cached per system together with the LU factors of Jx.
    """
    cached = system._kkt_cache.get(kind)
    if cached is not None:
        return cached
    residual, jacobian = _KINDS[kind]
    n, m = system.n, system.m
    a0 = np.zeros(2 * n)
    r0 = residual(system, a0, _guess(system, kind, a0))
    Jc = np.empty((n + m, 2 * n))
    for i in range(2 * n):
        e = a0.copy()
        e[i] = 1.0
        Jc[:, i] = residual(system, e, _guess(system, kind, e)) - r0
    Jx = jacobian(system, a0, np.zeros(n + m))
    cached = (Jc, Jx, r0, _factor(Jx, system))
    system._kkt_cache[kind] = cached
    return cached


def _momentum_form(system):
    """p_{k+1} = Pq q_k + Pd (q_{k+1} - q_k) + p_c for linear systems."""
    cached = system._kkt_cache.get("momentum")
    if cached is not None:
        return cached
    n = system.n

    def p_next(q0, dq):
        return system.Ld.d2(q0, q0 + dq) + system.force.plus(q0, q0 + dq)

    z = np.zeros(n)
    pc = p_next(z, z)
    eye = np.eye(n)
    Pq = np.column_stack([p_next(eye[i], z) - pc for i in range(n)]) if n else np.zeros((0, 0))
    Pd = np.column_stack([p_next(z, eye[i]) - pc for i in range(n)]) if n else np.zeros((0, 0))
    cached = (Pq, Pd, pc)
    system._kkt_cache["momentum"] = cached
    return cached


def _solve_step(system, kind, a, scales, opts):
    """Full-step Newton from the initial guess.

    Returns (x0, y, iterations, scaled norm) with the solution x = x0 + y.
    """
    x0 = _guess(system, kind, a)
    y = np.zeros_like(x0)
    if system.linear:
        Jc, Jx, r0, lu = _affine_form(system, kind)
        b = Jc @ a + r0

        def residual(dy):
            return Jx @ dy + b

        def factor(dy):
            return lu
    else:
        res_fn, jac_fn = _KINDS[kind]

        def residual(dy):
            return res_fn(system, a, x0 + dy)

        def factor(dy):
            return _factor(jac_fn(system, a, x0 + dy), system)

    norm = np.inf
    for it in range(opts.max_iter + 1):
        r = residual(y)
        norm = float((np.abs(r) / scales).max()) if r.size else 0.0
        if not np.isfinite(norm):
            raise StepError(f"non-finite residual in {system.name!r}", residual=norm)
        if norm <= opts.tol:
            return x0, y, it, norm
        if it == opts.max_iter:
            break
        y = y - scipy.linalg.lu_solve(factor(y), r, check_finite=False)
    raise ConvergenceError(
        f"Newton did not converge for {system.name!r} in {opts.max_iter} iterations "
        f"(residual {norm:.3e})", residual=norm)


def _check_state(system, q, p):
    if q.size != system.n or p.size != system.n:
        raise ShapeError(f"state has width {q.size}, system has {system.n} coordinates")


def step_plus(system: DiscreteDiracSystem, state: DiscreteState, solver_opts=DEFAULT_OPTIONS):
    """Advance one step with the (+) forced interconnected equations.

    Unknowns (q_{k+1}, mu, lambda) start from (q_k, 0, 0); p_{k+1} is then
    evaluated explicitly.
    """
    n, m = system.n, system.m
    q0, p0 = state.q, state.p
    _check_state(system, q0, p0)
    a = np.concatenate([q0, p0])
    x0, y, iters, norm = _solve_step(system, "plus", a, _scales(n, m, p0, q0, system.h),
                                     solver_opts)
    x = x0 + y
    q1, nu = x[:n], x[n:]
    if system.linear:
        Pq, Pd, pc = _momentum_form(system)
        p1 = Pq @ q0 + Pd @ y[:n] + pc
    else:
        p1 = system.Ld.d2(q0, q1) + system.force.plus(q0, q1)
    k = system.split[0]
    return StepResult(DiscreteState(state.k + 1, q1, p1), nu[:k], nu[k:], iters, norm)


def step_minus_backward(system: DiscreteDiracSystem, state: DiscreteState,
                        solver_opts=DEFAULT_OPTIONS):
    """Recover (q_k, p_k) from (q_{k+1}, p_{k+1}) with the (-) equations.

        p_{k+1} = D2 L_d(q_k, q_{k+1}) + f_d^+ + C(q_{k+1})^T nu
        0       = discrete (-) constraint rows on (q_k, q_{k+1})
        p_k     = -D1 L_d(q_k, q_{k+1}) - f_d^-
    """
    n, m = system.n, system.m
    q1, p1 = state.q, state.p
    _check_state(system, q1, p1)
    a = np.concatenate([q1, p1])
    x0, y, iters, norm = _solve_step(system, "minus", a, _scales(n, m, p1, q1, system.h),
                                     solver_opts)
    x = x0 + y
    q0, nu = x[:n], x[n:]
    p0 = -system.Ld.d1(q0, q1) - system.force.minus(q0, q1)
    k = system.split[0]
    return StepResult(DiscreteState(state.k - 1, q0, p0), nu[:k], nu[k:], iters, norm)


def step_momentum_matched(system: DiscreteDiracSystem, q_prev, q_curr, solver_opts=DEFAULT_OPTIONS):
    """Two-step position recurrence with momenta eliminated.

    Solves D2L_d(q_{k-1}, q_k) + f_d^+(q_{k-1}, q_k) + D1L_d(q_k, q_{k+1})
    + f_d^-(q_k, q_{k+1}) + C(q_k)^T nu = 0 with the (+) constraints on
    (q_k, q_{k+1}). Returns (q_{k+1}, mu, lambda, iterations); the multipliers
    are the negatives of those reported by ``step_plus``.
    """
    n, m = system.n, system.m
    qm = np.asarray(q_prev, dtype=float).reshape(-1)
    q0 = np.asarray(q_curr, dtype=float).reshape(-1)
    if qm.size != n or q0.size != n:
        raise ShapeError(f"positions must have width {n}")
    a = np.concatenate([qm, q0])
    scales = _scales(n, m, _carried(system, qm, q0), q0, system.h)
    x0, y, iters, _ = _solve_step(system, "matched", a, scales, solver_opts)
    x = x0 + y
    k = system.split[0]
    return x[:n], x[n:n + k], x[n + k:], iters


# ---------------------------------------------------------------------------
# Trajectories
# ---------------------------------------------------------------------------

@dataclass
class Trajectory:
    """Sampled states q_k, p_k (rows) with per-step multipliers and solver data."""

    q: np.ndarray
    p: np.ndarray
    mu: np.ndarray
    lam: np.ndarray
    h: float
    coord_names: tuple
    newton_iters: np.ndarray = None
    residual_norms: np.ndarray = None
    k0: int = 0
    metadata: dict = field(default_factory=dict)

    @property
    def steps(self):
        return self.q.shape[0] - 1

    @property
    def t(self):
        return (self.k0 + np.arange(self.q.shape[0])) * self.h

    @property
    def states(self):
        return [DiscreteState(self.k0 + i, q, p) for i, (q, p) in enumerate(zip(self.q, self.p))]

    def column(self, name, kind="q"):
        arr = self.q if kind == "q" else self.p
        return arr[:, self.coord_names.index(name)]


def simulate(system: DiscreteDiracSystem, initial: DiscreteState, steps: int, mode="plus",
             solver_opts=DEFAULT_OPTIONS, seed=None):
    """Step ``steps`` times; mode is ``"plus"`` or ``"momentum_matched"``.

    On a failed step raises ``SimulationError`` carrying the partial trajectory.
    """
    if steps < 1:
        raise ValueError(f"steps must be >= 1, got {steps}")
    if mode not in ("plus", "momentum_matched"):
        raise ValueError(f"unknown mode {mode!r}")
    n = system.n
    k_mu, k_lam = system.split
    Q = np.empty((steps + 1, n))
    P = np.empty((steps + 1, n))
    MU = np.empty((steps, k_mu))
    LAM = np.empty((steps, k_lam))
    iters = np.zeros(steps, dtype=int)
    norms = np.zeros(steps)
    Q[0], P[0] = initial.q, initial.p
    start = time.perf_counter()
    state = initial
    done = 0
    try:
        for k in range(steps):
            if mode == "plus" or k == 0:
                res = step_plus(system, state, solver_opts)
                state = res.next
                MU[k], LAM[k] = res.mu, res.lam
                iters[k], norms[k] = res.newton_iters, res.residual_norm
            else:
                q1, mu, lam, it = step_momentum_matched(system, Q[k - 1], Q[k], solver_opts)
                p1 = system.Ld.d2(Q[k], q1) + system.force.plus(Q[k], q1)
                state = DiscreteState(initial.k + k + 1, q1, p1)
                MU[k], LAM[k] = -mu, -lam
                iters[k] = it
            Q[k + 1], P[k + 1] = state.q, state.p
            done = k + 1
    except StepError as exc:
        partial = Trajectory(Q[:done + 1].copy(), P[:done + 1].copy(), MU[:done].copy(),
                             LAM[:done].copy(), system.h, system.coord_names, iters[:done].copy(),
                             norms[:done].copy(), initial.k,
                             {"system": system.name, "seed": seed, "failed_step": done})
        raise SimulationError(f"step {done} -> {done + 1} failed: {exc}", partial, exc) from exc
    meta = {"system": system.name, "seed": seed, "mode": mode,
            "wall_time": time.perf_counter() - start}
    return Trajectory(Q, P, MU, LAM, system.h, system.coord_names, iters, norms, initial.k, meta)


def simulate_backward(system: DiscreteDiracSystem, terminal: DiscreteState, steps: int,
                      solver_opts=DEFAULT_OPTIONS):
    """Apply ``step_minus_backward`` repeatedly; rows are returned in forward time order."""
    qs, ps = [terminal.q], [terminal.p]
    state = terminal
    for _ in range(steps):
        state = step_minus_backward(system, state, solver_opts).next
        qs.append(state.q)
        ps.append(state.p)
    k_mu, k_lam = system.split
    return Trajectory(np.array(qs[::-1]), np.array(ps[::-1]), np.zeros((steps, k_mu)),
                      np.zeros((steps, k_lam)), system.h, system.coord_names, k0=state.k)


def constraint_residuals(system: DiscreteDiracSystem, traj: Trajectory):
    """Discrete (+) constraint values on each consecutive pair, shape (steps, m)."""
    out = np.empty((traj.steps, system.m))
    for k in range(traj.steps):
        out[k] = system.constraints.plus(traj.q[k], traj.q[k + 1])
    return out


__all__ = [
    "SolverOptions", "DiscreteState", "StepResult", "Trajectory", "DiscreteDiracSystem",
    "RetractionConstraints", "BlockConstraints", "discretize", "step_plus",
    "step_minus_backward", "step_momentum_matched", "simulate", "simulate_backward",
    "constraint_residuals", "ProductRetraction",
]
