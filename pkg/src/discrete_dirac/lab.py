"""Built-in example models, a matrix-exponential reference solution and
trajectory diagnostics."""

from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np
import scipy.linalg

from . import dirac_algebra as da
from ._numerics import SUBSPACE_TOL, null_space
from .core_geometry import (
    Chart,
    ConstantOneForms,
    StackedOneForms,
    VectorRetraction,
    extend_one_form,
    product_retraction,
)
from .errors import ConfigurationError, UnsupportedError
from .integrator import DiscreteState, Trajectory, constraint_residuals, discretize, simulate
from .model import (
    InterconnectionSpec,
    LinearDamping,
    QuadraticLagrangian,
    Subsystem,
    compose,
    continuous_residual,
    discretize_then_interconnect,
)

VARIANTS = ("monolithic", "interconnected")

SPRING_DEFAULTS = {"m1": 1.0, "m2": 1.0, "m3": 1.0, "k1": 1.0, "k2": 1.0, "k3": 1.0}
RLC_DEFAULTS = {"R": 1.0, "l": 0.75, "C": 3.0}


@dataclass
class BuiltModel:
    """A composed system, its default discretization and default initial state."""

    name: str
    variant: str
    system: object
    discrete: object
    initial: DiscreteState
    h: float
    params: dict
    interconnection: Optional[InterconnectionSpec] = None

    def path_b(self):
        """The same model discretized subsystem-by-subsystem and then interconnected."""
        return discretize_then_interconnect(
            self.system.subsystems, self.interconnection, h=self.h, name=self.name,
            witnesses=self.system.witnesses, witness_labels=self.system.witness_labels)

    def with_step(self, h):
        return BuiltModel(self.name, self.variant, self.system, discretize(self.system, h),
                          self.initial, h, self.params, self.interconnection)

    def simulate(self, steps, **kw):
        return simulate(self.discrete, self.initial, steps, **kw)


def _params(defaults, params, positive, nonnegative=()):
    out = dict(defaults)
    unknown = set(params or {}) - set(defaults)
    if unknown:
        raise ConfigurationError(f"unknown parameters: {sorted(unknown)}")
    out.update({k: float(v) for k, v in (params or {}).items()})
    bad = [k for k in positive if not out[k] > 0] + [k for k in nonnegative if not out[k] >= 0]
    if bad:
        raise ConfigurationError(f"parameters must be positive: {sorted(bad)}")
    return out


def _check_variant(variant):
    if variant not in VARIANTS:
        raise ConfigurationError(f"variant must be one of {VARIANTS}, got {variant!r}")


def _spring(k):
    return k * np.array([[1.0, -1.0], [-1.0, 1.0]])


def spring_chain_subsystems(params):
    """Two primitive spring systems on (q1, q2) and (q2bar, q3)."""
    m1, m2, m3 = params["m1"], params["m2"], params["m3"]
    k1, k2, k3 = params["k1"], params["k2"], params["k3"]
    s1 = Subsystem(Chart.from_names(["q1", "q2"]),
                   QuadraticLagrangian(np.diag([m1, m2]), np.diag([k1, 0.0]) + _spring(k2)),
                   name="chain")
    s2 = Subsystem(Chart.from_names(["q2bar", "q3"]),
                   QuadraticLagrangian(np.diag([0.0, m3]), _spring(k3)), name="tail")
    sigma = InterconnectionSpec([[0.0, 1.0, -1.0, 0.0]], labels=["joint"])
    return [s1, s2], sigma


def build_spring_chain(variant="interconnected", params=None, h=0.01) -> BuiltModel:
    """Three masses and springs attached to a wall.

    Monolithic coordinates (q1, q2, q3); interconnected coordinates
    (q1, q2, q2bar, q3) with the joint row (0, 1, -1, 0) and witness q2 - q2bar.
    """
    _check_variant(variant)
    p = _params(SPRING_DEFAULTS, params, positive=list(SPRING_DEFAULTS))
    if variant == "monolithic":
        M = np.diag([p["m1"], p["m2"], p["m3"]])
        K = np.zeros((3, 3))
        K[0, 0] += p["k1"]
        K[0:2, 0:2] += _spring(p["k2"])
        K[1:3, 1:3] += _spring(p["k3"])
        sub = Subsystem(Chart.from_names(["q1", "q2", "q3"]), QuadraticLagrangian(M, K),
                        name="chain")
        system = compose([sub], name="spring_chain")
        initial = DiscreteState(0, [0.0, 1.0, 2.0], [0.0, 0.0, 3.0])
        sigma = None
    else:
        subs, sigma = spring_chain_subsystems(p)
        system = compose(subs, sigma, name="spring_chain",
                         witnesses=[[0.0, 1.0, -1.0, 0.0]], witness_labels=["q2-q2bar"])
        initial = DiscreteState(0, [0.0, 1.0, 1.0, 2.0], [0.0, 0.0, 0.0, 3.0])
    return BuiltModel("spring_chain", variant, system, discretize(system, h), initial, h, p, sigma)


def rlc_subsystems(params):
    """RL loop on (qR, qL, qS1) and capacitor branch on (qS2, qC)."""
    R, l, C = params["R"], params["l"], params["C"]
    s1 = Subsystem(Chart.from_names(["qR", "qL", "qS1"]),
                   QuadraticLagrangian(np.diag([0.0, l, 0.0])),
                   ConstantOneForms([[1.0, -1.0, -1.0]], labels=["kcl1"]),
                   LinearDamping(np.diag([R, 0.0, 0.0])), name="rl")
    s2 = Subsystem(Chart.from_names(["qS2", "qC"]),
                   QuadraticLagrangian(np.zeros((2, 2)), np.diag([0.0, 1.0 / C])),
                   ConstantOneForms([[-1.0, 1.0]], labels=["kcl2"]), name="cap")
    sigma = InterconnectionSpec([[0.0, 0.0, 1.0, -1.0, 0.0]], labels=["port"])
    return [s1, s2], sigma


def build_rlc(variant="interconnected", params=None, h=0.1) -> BuiltModel:
    """Parallel RLC circuit with charges as coordinates.

    Monolithic coordinates (qR, qL, qC) with the row (1, -1, -1); interconnected
    coordinates (qR, qL, qS1, qS2, qC) with rows (1,-1,-1,0,0), (0,0,0,-1,1) and
    the port row (0,0,1,-1,0). Initial inductor momentum is 10 l.
    """
    _check_variant(variant)
    p = _params(RLC_DEFAULTS, params, positive=["l", "C"], nonnegative=["R"])
    pL = 10.0 * p["l"]
    if variant == "monolithic":
        sub = Subsystem(Chart.from_names(["qR", "qL", "qC"]),
                        QuadraticLagrangian(np.diag([0.0, p["l"], 0.0]),
                                            np.diag([0.0, 0.0, 1.0 / p["C"]])),
                        ConstantOneForms([[1.0, -1.0, -1.0]], labels=["kcl"]),
                        LinearDamping(np.diag([p["R"], 0.0, 0.0])), name="rlc")
        system = compose([sub], name="rlc")
        initial = DiscreteState(0, np.zeros(3), [0.0, pL, 0.0])
        sigma = None
    else:
        subs, sigma = rlc_subsystems(p)
        system = compose(subs, sigma, name="rlc", witnesses=[[0.0, 0.0, 1.0, -1.0, 0.0]],
                         witness_labels=["qS1-qS2"])
        initial = DiscreteState(0, np.zeros(5), [0.0, pL, 0.0, 0.0, 0.0])
    return BuiltModel("rlc", variant, system, discretize(system, h), initial, h, p, sigma)


BUILDERS = {"spring_chain": build_spring_chain, "rlc": build_rlc}


# ---------------------------------------------------------------------------
# Energy
# ---------------------------------------------------------------------------

def _continuous(system):
    return getattr(system, "continuous", None) or system


class EnergyFunctional:
    """E(q, p) = 1/2 v^T M v + 1/2 q^T K q + c^T q with v = M^+ p."""

    def __init__(self, system, energy_fn: Optional[Callable] = None):
        sys_c = _continuous(system)
        self.energy_fn = energy_fn
        if energy_fn is None:
            L = sys_c.lagrangian
            if not isinstance(L, QuadraticLagrangian):
                raise UnsupportedError("energy needs a quadratic Lagrangian or an energy callable")
            self.M, self.K, self.c = L.M, L.K, L.c
            self.Minv = np.linalg.pinv(L.M, rcond=1e-12, hermitian=True)

    def __call__(self, q, p):
        q = np.asarray(q, dtype=float)
        p = np.asarray(p, dtype=float)
        if self.energy_fn is not None:
            if q.ndim == 1:
                return float(self.energy_fn(q, p))
            return np.array([self.energy_fn(a, b) for a, b in zip(q, p)])
        v = p @ self.Minv
        kin = 0.5 * np.einsum("...i,ij,...j->...", v, self.M, v)
        pot = 0.5 * np.einsum("...i,ij,...j->...", q, self.K, q) + q @ self.c
        out = kin + pot
        return float(out) if np.ndim(out) == 0 else out


def energy(system, q, p, energy_fn=None):
    """Discrete energy at (q, p); accepts single states or stacked rows."""
    return EnergyFunctional(system, energy_fn)(q, p)


# ---------------------------------------------------------------------------
# Matrix-exponential reference
# ---------------------------------------------------------------------------

class LinearReference:
    """Exact flow of a linear constrained system with constant constraint rows.

    Positions are written q = q0 + N s with N an orthonormal basis of ker W.
    The reduced mass matrix splits s = Y a + Z b into inertial directions Y and
    massless directions Z; b obeys a first-order equation (needs invertible
    reduced damping on Z) and a a second-order one. The affine ODE for
    (a, a', b) is integrated with an augmented matrix exponential.
    """

    def __init__(self, system, initial):
        sys_c = _continuous(system)
        L, F, W = sys_c.lagrangian, sys_c.force, sys_c.constraint_rows
        if not isinstance(L, QuadraticLagrangian):
            raise UnsupportedError("reference solution needs a quadratic Lagrangian")
        if not isinstance(F, LinearDamping):
            raise UnsupportedError("reference solution needs linear damping forces")
        if not W.constant:
            raise UnsupportedError("reference solution needs constraint rows constant in q")
        self.system = sys_c
        q0 = np.asarray(initial.q, dtype=float)
        p0 = np.asarray(initial.p, dtype=float)
        n = q0.size
        M, K, c, R = L.M, L.K, L.c, F.R
        N = null_space(W.eval(q0))
        Mr, Kr, Dr = N.T @ M @ N, N.T @ K @ N, N.T @ R @ N
        g = N.T @ (K @ q0 + c)
        lam, V = np.linalg.eigh(0.5 * (Mr + Mr.T))
        keep = lam > 1e-12 * max(1.0, np.abs(lam).max() if lam.size else 1.0)
        Y, Z = V[:, keep], V[:, ~keep]
        ny, nz = Y.shape[1], Z.shape[1]
        Myy = Y.T @ Mr @ Y
        Dyy, Dyz, Dzy, Dzz = Y.T @ Dr @ Y, Y.T @ Dr @ Z, Z.T @ Dr @ Y, Z.T @ Dr @ Z
        Kyy, Kyz, Kzy, Kzz = Y.T @ Kr @ Y, Y.T @ Kr @ Z, Z.T @ Kr @ Y, Z.T @ Kr @ Z
        gy, gz = Y.T @ g, Z.T @ g
        if nz:
            if np.linalg.matrix_rank(Dzz) < nz:
                raise UnsupportedError("massless directions without damping are not supported")
            Dzz_inv = np.linalg.inv(Dzz)
        else:
            Dzz_inv = np.zeros((0, 0))
        Myy_inv = np.linalg.inv(Myy) if ny else np.zeros((0, 0))
        # b' = Bv a' + Ba a + Bb b + B0
        Bv, Ba, Bb, B0 = -Dzz_inv @ Dzy, -Dzz_inv @ Kzy, -Dzz_inv @ Kzz, -Dzz_inv @ gz
        # a'' = Av a' + Aa a + Ab b + A0
        Av = -Myy_inv @ (Dyy + Dyz @ Bv)
        Aa = -Myy_inv @ (Kyy + Dyz @ Ba)
        Ab = -Myy_inv @ (Kyz + Dyz @ Bb)
        A0 = -Myy_inv @ (gy + Dyz @ B0)
        d = 2 * ny + nz
        A = np.zeros((d + 1, d + 1))
        ia, iv, ib = slice(0, ny), slice(ny, 2 * ny), slice(2 * ny, d)
        A[ia, iv] = np.eye(ny)
        A[iv, ia], A[iv, iv], A[iv, ib], A[iv, d] = Aa, Av, Ab, A0
        A[ib, ia], A[ib, iv], A[ib, ib], A[ib, d] = Ba, Bv, Bb, B0
        self.A = A
        self.x0 = np.zeros(d + 1)
        self.x0[iv] = Myy_inv @ (Y.T @ (N.T @ p0)) if ny else 0.0
        self.x0[d] = 1.0
        self.q0, self.N, self.Y, self.Z, self.M = q0, N, Y, Z, M
        self.slices = (ia, iv, ib)
        self.n = n

    def state(self, t):
        """Return dict with q, v, p, pdot at scalar time t."""
        x = scipy.linalg.expm(self.A * float(t)) @ self.x0
        xdot = self.A @ x
        ia, iv, ib = self.slices
        NY, NZ = self.N @ self.Y, self.N @ self.Z
        q = self.q0 + NY @ x[ia] + NZ @ x[ib]
        v = NY @ x[iv] + NZ @ xdot[ib]
        p = self.M @ NY @ x[iv]
        pdot = self.M @ NY @ xdot[iv]
        return {"q": q, "v": v, "p": p, "pdot": pdot}

    def __call__(self, t):
        ts = np.atleast_1d(np.asarray(t, dtype=float))
        qs = np.empty((ts.size, self.n))
        ps = np.empty((ts.size, self.n))
        for i, ti in enumerate(ts):
            s = self.state(ti)
            qs[i], ps[i] = s["q"], s["p"]
        if np.ndim(t) == 0:
            return qs[0], ps[0]
        return qs, ps

    def residual(self, t):
        """continuous_residual at time t with least-squares multipliers."""
        s = self.state(t)
        sysc = self.system
        W = sysc.constraint_rows.eval(s["q"])
        rhs = s["pdot"] - sysc.lagrangian.dq(s["q"], s["v"]) - sysc.force.value(s["q"], s["v"])
        nu = np.linalg.lstsq(W.T, rhs, rcond=None)[0] if W.shape[0] else np.zeros(0)
        return continuous_residual(sysc, s["q"], s["v"], s["p"], s["v"], s["pdot"], nu)


def reference_solution(system, initial, t):
    """Exact (q(t), p(t)) of a linear system; ``t`` may be scalar or an array."""
    return LinearReference(system, initial)(t)


# ---------------------------------------------------------------------------
# Comparison, convergence and reports
# ---------------------------------------------------------------------------

def compare_trajectories(a: Trajectory, b: Trajectory, coordinate_map=None, momentum_map=None):
    """Max absolute difference over steps and mapped coordinates.

    ``coordinate_map`` maps names in ``a`` to names in ``b`` (default: the
    shared names). ``momentum_map`` optionally adds momentum columns.
    """
    if a.q.shape[0] != b.q.shape[0]:
        raise ConfigurationError(f"trajectory lengths differ: {a.q.shape[0]} vs {b.q.shape[0]}")
    if abs(a.h - b.h) > 1e-15 * max(abs(a.h), abs(b.h)):
        raise ConfigurationError(f"step sizes differ: {a.h} vs {b.h}")
    if coordinate_map is None:
        coordinate_map = {c: c for c in a.coord_names if c in b.coord_names}
    diff = 0.0
    for src, dst in coordinate_map.items():
        diff = max(diff, float(np.max(np.abs(a.column(src) - b.column(dst)))))
    for src, dst in (momentum_map or {}).items():
        diff = max(diff, float(np.max(np.abs(a.column(src, "p") - b.column(dst, "p")))))
    return diff


@dataclass
class ConvergenceRow:
    h: float
    error: float
    order: Optional[float]
    max_constraint_residual: float


@dataclass
class ConvergenceTable:
    rows: list
    T_final: float

    @property
    def errors(self):
        return [r.error for r in self.rows]

    @property
    def orders(self):
        return [r.order for r in self.rows if r.order is not None]

    def monotone(self):
        e = self.errors
        return all(b < a for a, b in zip(e, e[1:]))


def convergence_study(builder, h_list, T_final, variant="interconnected", params=None):
    """Max position error against the reference at times shared by every h.

    The observed order between successive step sizes is log(e1/e2) / log(h1/h2).
    """
    h_list = [float(h) for h in h_list]
    if len(h_list) < 3:
        raise ConfigurationError("convergence study needs at least three step sizes")
    counts = []
    for h in h_list:
        k = T_final / h
        if abs(k - round(k)) > 1e-9 * max(1.0, k):
            raise ConfigurationError(f"step {h} does not divide T_final={T_final}")
        counts.append(int(round(k)))
    coarse = max(h_list)
    n_shared = int(round(T_final / coarse))
    t_shared = coarse * np.arange(n_shared + 1)
    rows = []
    ref = None
    for h, steps in zip(h_list, counts):
        model = builder(variant=variant, params=params, h=h)
        if ref is None:
            ref = LinearReference(model.system, model.initial)
            q_ref, _ = ref(t_shared)
        traj = model.simulate(steps)
        stride = int(round(coarse / h))
        err = float(np.max(np.abs(traj.q[::stride][: n_shared + 1] - q_ref)))
        res = constraint_residuals(model.discrete, traj)
        rmax = float(np.max(np.abs(res))) if res.size else 0.0
        order = None
        if rows:
            prev = rows[-1]
            order = float(np.log(prev.error / err) / np.log(prev.h / h)) if err > 0 and prev.error > 0 else None
        rows.append(ConvergenceRow(h, err, order, rmax))
    return ConvergenceTable(rows, T_final)


@dataclass
class ExperimentReport:
    """Per-step series and scalar summaries for one trajectory.

    ``residuals[k]`` holds the discrete constraint rows on (q_{k-1}, q_k);
    row 0 is zero.
    """

    t: np.ndarray
    q: np.ndarray
    p: np.ndarray
    energy: np.ndarray
    residuals: np.ndarray
    witnesses: np.ndarray
    coord_names: tuple
    residual_labels: list
    witness_labels: list
    reference_difference: Optional[float] = None
    metadata: dict = field(default_factory=dict)

    @property
    def max_energy_deviation(self):
        return float(np.max(np.abs(self.energy - self.energy[0])))

    @property
    def energy_drift_slope(self):
        if self.t.size < 2:
            return 0.0
        return float(np.polyfit(self.t, self.energy, 1)[0])

    @property
    def max_constraint_residual(self):
        return float(np.max(np.abs(self.residuals))) if self.residuals.size else 0.0

    @property
    def max_witness(self):
        return float(np.max(np.abs(self.witnesses))) if self.witnesses.size else 0.0


def build_report(discrete, traj: Trajectory, energy_fn=None, reference=None) -> ExperimentReport:
    steps = traj.steps
    res = np.zeros((steps + 1, discrete.m))
    if steps:
        res[1:] = constraint_residuals(discrete, traj)
    wit = traj.q @ discrete.witnesses.T
    try:
        E = EnergyFunctional(discrete, energy_fn)(traj.q, traj.p)
    except UnsupportedError:
        E = np.full(steps + 1, np.nan)
    ref_diff = None
    if reference is not None:
        q_ref, _ = reference(traj.t)
        ref_diff = float(np.max(np.abs(traj.q - q_ref)))
    return ExperimentReport(traj.t, traj.q, traj.p, np.atleast_1d(E), res, wit,
                            tuple(discrete.coord_names), list(discrete.constraint_labels()),
                            list(discrete.witness_labels), ref_diff, dict(traj.metadata))


# ---------------------------------------------------------------------------
# Structure verification
# ---------------------------------------------------------------------------

@dataclass
class IdentityCheck:
    """One identity of the structure suite."""

    name: str
    samples: int
    disagreements: int
    witness: Optional[str] = None
    max_distance: float = 0.0

    @property
    def ok(self):
        return self.disagreements == 0


@dataclass
class StructureReport:
    model: str
    seed: int
    checks: list = field(default_factory=list)

    @property
    def ok(self):
        return all(c.ok for c in self.checks)

    @property
    def disagreements(self):
        return sum(c.disagreements for c in self.checks)

    def check(self, name):
        for c in self.checks:
            if c.name == name:
                return c
        raise KeyError(name)


def _discrete_structures(system, h):
    """Factor structures, their direct sum, the interaction structure, the
    composed induced structure and the matching distribution-only structures."""

    n = system.n
    blocks = system.block_layout
    factors = []
    for sub, b in zip(system.subsystems, blocks):
        d = b.stop - b.start
        factors.append(da.DiscreteDiracData(sub.constraints, VectorRetraction(h, d), d))
    retraction = product_retraction([VectorRetraction(h, b.stop - b.start) for b in blocks])
    direct_rows = StackedOneForms(
        [extend_one_form(sub.constraints, b, n) for sub, b in zip(system.subsystems, blocks)], n=n)
    direct_data = da.DiscreteDiracData(direct_rows, retraction, n)
    composed_data = da.DiscreteDiracData(system.constraint_rows, retraction, n)
    sigma = system.interconnection
    return {
        "direct_sum": da.DirectSumDPlus([da.InducedDPlus(f) for f in factors], blocks),
        "induced_sum": da.InducedDPlus(direct_data),
        "interaction": da.InteractionDPlus(sigma, retraction),
        "composed": da.InducedDPlus(composed_data),
        "dist_sum": da.DistributionDPlus.from_data(direct_data),
        "dist_sigma": da.DistributionDPlus.from_data(da.DiscreteDiracData(sigma, retraction, n)),
        "dist_composed": da.DistributionDPlus.from_data(composed_data),
        "factors": factors,
    }


def _equivalence_check(name, a, b, samples, seed):

    rep = da.verify_equivalence(a, b, da.structure_sampler(a, b), samples, seed, name=name)
    witness = None
    if rep.witnesses:
        w = rep.witnesses[0]
        witness = f"{w['kind']} sample: a={w['a']} b={w['b']} point={w['point'].flat().tolist()}"
    return IdentityCheck(name, rep.samples, rep.disagreements, witness)


def _fiber_checks(system, base_points, rng):
    """Continuous Lemma, Proposition and D = D^perp at random base points."""

    n = system.n
    lemma = prop = dirac = 0
    worst_l = worst_p = 0.0
    constructed = 0
    first = {}
    for _ in range(base_points):
        q = rng.standard_normal(n)
        fibers = []
        for sub, b in zip(system.subsystems, system.block_layout):
            fibers.append(da.induced_from_constraints(sub.constraints.eval(q[b]), b.stop - b.start))
        summed = fibers[0]
        for f in fibers[1:]:
            summed = da.direct_sum_fiber(summed, f)
        dims = [f.n // 2 for f in fibers]
        summed = da.permute_fiber(summed, da.phase_to_cotangent_order(dims))
        W = system.constraint_rows.eval(q)
        mu = system.multiplier_split[0]
        induced_sum = da.induced_from_constraints(W[:mu], n)
        composed = da.induced_from_constraints(W, n)
        tensor = da.tensor_product_fiber(induced_sum, da.interaction_fiber(W[mu:], n))
        d_l, d_p = summed.distance(induced_sum), tensor.distance(composed)
        worst_l, worst_p = max(worst_l, d_l), max(worst_p, d_p)
        if d_l > SUBSPACE_TOL:
            lemma += 1
            first.setdefault("lemma", f"q={q.tolist()} distance={d_l:.3e}")
        if d_p > SUBSPACE_TOL:
            prop += 1
            first.setdefault("prop", f"q={q.tolist()} distance={d_p:.3e}")
        for f in fibers + [summed, induced_sum, composed]:
            constructed += 1
            if not da.is_dirac_fiber(f):
                dirac += 1
                first.setdefault("dirac", f"q={q.tolist()} dim={f.dim} defect={f.isotropy_defect():.3e}")
    return [
        IdentityCheck("continuous_lemma", base_points, lemma, first.get("lemma"), worst_l),
        IdentityCheck("continuous_proposition", base_points, prop, first.get("prop"), worst_p),
        IdentityCheck("dirac_maximal_isotropy", constructed, dirac, first.get("dirac")),
    ]


def structure_suite(model: BuiltModel, samples=1000, seed=0, base_points=100) -> StructureReport:
    """Randomized checks of the direct-sum and tensor-product identities for a model."""

    system = model.system
    s = _discrete_structures(system, model.h)
    seeds = np.random.SeedSequence(seed).generate_state(4)
    rep = StructureReport(model.name, seed)
    rep.checks.append(_equivalence_check("discrete_lemma", s["direct_sum"], s["induced_sum"],
                                         samples, int(seeds[0])))
    tensor = da.TensorDPlus(s["direct_sum"], s["interaction"])
    rep.checks.append(_equivalence_check("discrete_theorem", tensor, s["composed"],
                                         samples, int(seeds[1])))
    rep.checks.append(_equivalence_check("distribution_intersection",
                                         s["dist_sum"].intersect(s["dist_sigma"]),
                                         s["dist_composed"], samples, int(seeds[2])))
    rep.checks.extend(_fiber_checks(system, base_points, np.random.default_rng(int(seeds[3]))))
    return rep


__all__ = [
    "BuiltModel", "build_spring_chain", "build_rlc", "spring_chain_subsystems", "rlc_subsystems",
    "BUILDERS", "energy", "EnergyFunctional", "LinearReference", "reference_solution",
    "compare_trajectories", "convergence_study", "ConvergenceTable", "ConvergenceRow",
    "ExperimentReport", "build_report", "IdentityCheck", "StructureReport", "structure_suite",
]
