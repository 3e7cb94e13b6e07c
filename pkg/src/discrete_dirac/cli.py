"""Command line entry point: run, verify, compare, convergence.

Exit codes: 0 success, 1 validation error, 2 solver failure, 3 disagreement.
"""

import argparse
import io
import os
import sys
import tempfile
import time

import numpy as np

from .config import ConfigError, build_model, config_from_dict, config_to_dict, load_config, model_builder
from .errors import DiracError, SimulationError, StepError
from .integrator import simulate
from .lab import BUILDERS, build_report, compare_trajectories, convergence_study, energy, structure_suite

EXIT_OK, EXIT_VALIDATION, EXIT_SOLVER, EXIT_DISAGREE = 0, 1, 2, 3


def fmt(x):
    return "%.17g" % x


# ---------------------------------------------------------------------------
# Output
# ---------------------------------------------------------------------------

def atomic_write(path, text):
    """Write ``text`` to ``path`` via a temporary file and rename."""
    d = os.path.dirname(os.path.abspath(path))
    os.makedirs(d, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=d, prefix=".tmp-", suffix=os.path.basename(path))
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _emit(text, path):
    if path:
        atomic_write(path, text)
    else:
        sys.stdout.write(text)


def trajectory_header(report):
    cols = ["step", "t"]
    cols += [f"q_{c}" for c in report.coord_names]
    cols += [f"p_{c}" for c in report.coord_names]
    cols.append("energy")
    cols += [f"res_{c}" for c in report.residual_labels]
    cols += [f"witness_{c}" for c in report.witness_labels]
    return cols


def trajectory_csv(report, k0=0):
    """CSV text: step, t, q_*, p_*, energy, res_*, witness_*; 17 significant digits."""
    buf = io.StringIO()
    buf.write(",".join(trajectory_header(report)) + "\n")
    for k in range(report.t.size):
        vals = [report.t[k], *report.q[k], *report.p[k], report.energy[k],
                *report.residuals[k], *report.witnesses[k]]
        buf.write(str(k0 + k) + "," + ",".join(fmt(v) for v in vals) + "\n")
    return buf.getvalue()


def table_csv(header, rows):
    buf = io.StringIO()
    buf.write(",".join(header) + "\n")
    for r in rows:
        buf.write(",".join(x if isinstance(x, str) else fmt(x) for x in r) + "\n")
    return buf.getvalue()


# ---------------------------------------------------------------------------
# Config resolution
# ---------------------------------------------------------------------------

def resolve_config(args):
    """Load the config (or a builtin default) and apply flag overrides."""
    if args.model and args.config:
        raise ConfigError(["--model: cannot be combined with --config"])
    if args.config:
        try:
            d = config_to_dict(load_config(args.config))
        except OSError as exc:
            raise ConfigError([f"config: cannot read {args.config}: {exc.strerror}"]) from exc
    else:
        d = {"model": args.model or "spring_chain"}
    if args.variant:
        d["variant"] = args.variant
    for flag, key in (("seed", "seed"), ("samples", "samples"), ("steps", "steps"), ("dt", "h")):
        v = getattr(args, flag)
        if v is not None:
            d[key] = v
    return config_from_dict(d)


# ---------------------------------------------------------------------------
# Subcommands
# ---------------------------------------------------------------------------

def cmd_run(cfg, args):
    model = build_model(cfg)
    out = args.out or cfg.outputs.get("trajectory")
    try:
        traj = model.simulate(cfg.steps, mode=cfg.mode, seed=cfg.seed)
        status = EXIT_OK
    except SimulationError as exc:
        traj = exc.trajectory
        status = EXIT_SOLVER
        print(f"error: {exc}", file=sys.stderr)
        cause = exc.cause
        if getattr(cause, "coordinates", None):
            print(f"  coordinates: {list(cause.coordinates)}", file=sys.stderr)
            print(f"  constraint rows: {list(cause.constraint_rows)}", file=sys.stderr)
    report = build_report(model.discrete, traj)
    _emit(trajectory_csv(report, traj.k0), out)
    info = sys.stderr if not out else sys.stdout
    print(f"model={model.name} variant={model.variant} h={model.h:g} steps={traj.steps}", file=info)
    print(f"max |E-E0| = {report.max_energy_deviation:.3e}  drift slope = {report.energy_drift_slope:.3e}",
          file=info)
    print(f"max constraint residual = {report.max_constraint_residual:.3e}  "
          f"max witness = {report.max_witness:.3e}", file=info)
    if "wall_time" in traj.metadata:
        print(f"wall time = {traj.metadata['wall_time']:.4f} s (informational)", file=info)
    return status


def cmd_verify(cfg, args):
    model = build_model(cfg)
    rep = structure_suite(model, samples=cfg.samples, seed=cfg.seed)
    rows = [(c.name, str(c.samples), str(c.disagreements), c.max_distance, c.witness or "")
            for c in rep.checks]
    out = args.out or cfg.outputs.get("report")
    if out:
        atomic_write(out, table_csv(["identity", "samples", "disagreements", "max_distance", "witness"], rows))
    print(f"structure verification: model={model.name} seed={cfg.seed} samples={cfg.samples}")
    for c in rep.checks:
        status = "ok" if c.ok else "DISAGREE"
        print(f"  {c.name:<26} samples={c.samples:<6} disagreements={c.disagreements:<4} "
              f"max_distance={c.max_distance:.2e} {status}")
        if c.witness:
            print(f"    first witness: {c.witness}")
    print(f"total disagreements: {rep.disagreements}")
    return EXIT_OK if rep.ok else EXIT_DISAGREE


def _variant_model(cfg, variant):
    d = config_to_dict(cfg)
    d["variant"] = variant
    if cfg.initial:
        names = set(BUILDERS[cfg.model](variant).system.coord_names)
        d["initial"] = {k: {c: v for c, v in vals.items() if c in names} for k, vals in cfg.initial.items()}
    return build_model(config_from_dict(d))


def cmd_compare(cfg, args):
    if cfg.inline:
        raise ConfigError(["compare: needs a builtin model with monolithic and interconnected variants"])
    mono = _variant_model(cfg, "monolithic")
    inter = _variant_model(cfg, "interconnected")
    ta = mono.simulate(cfg.steps, mode=cfg.mode)
    tb = inter.simulate(cfg.steps, mode=cfg.mode)
    shared = [c for c in ta.coord_names if c in tb.coord_names]
    cmap = {c: c for c in shared}
    dq = compare_trajectories(ta, tb, cmap)
    dp = compare_trajectories(ta, tb, {}, cmap)
    tc = simulate_path_b(inter, cfg)
    dab = max(compare_trajectories(tb, tc), compare_trajectories(tb, tc, {}, {c: c for c in tb.coord_names}))
    ea = energy(mono.discrete, ta.q, ta.p)
    eb = energy(inter.discrete, tb.q, tb.p)
    de = float(np.max(np.abs(ea - eb)))
    diff = max(dq, dp)
    rows = [
        ("positions_monolithic_vs_interconnected", dq),
        ("momenta_monolithic_vs_interconnected", dp),
        ("energy_monolithic_vs_interconnected", de),
        ("compose_then_discretize_vs_discretize_then_compose", dab),
        ("wall_time_monolithic_s", ta.metadata["wall_time"]),
        ("wall_time_interconnected_s", tb.metadata["wall_time"]),
    ]
    out = args.out or cfg.outputs.get("comparison")
    if out:
        atomic_write(out, table_csv(["quantity", "value"], rows))
    print(f"compare {cfg.model}: h={cfg.h:g} steps={cfg.steps} shared coordinates={shared}")
    for name, v in rows:
        print(f"  {name} = {v:.3e}")
    print(f"max difference = {fmt(diff)} (tol {args.tol:.1e})")
    return EXIT_OK if diff <= args.tol and dab <= args.tol else EXIT_DISAGREE


def simulate_path_b(model, cfg):
    return simulate(model.path_b(), model.initial, cfg.steps, mode=cfg.mode)


def cmd_convergence(cfg, args):
    hs, T = cfg.convergence["h"], cfg.convergence["t_final"]
    start = time.perf_counter()
    table = convergence_study(model_builder(cfg), hs, T, variant=cfg.variant, params=cfg.params)
    rows = [(r.h, r.error, "" if r.order is None else fmt(r.order), r.max_constraint_residual)
            for r in table.rows]
    text = table_csv(["h", "max_position_error", "observed_order", "max_constraint_residual"], rows)
    out = args.out or cfg.outputs.get("convergence")
    if out:
        atomic_write(out, text)
    print(f"convergence {cfg.model_name}: T_final={fmt(T)}")
    sys.stdout.write(text)
    orders = table.orders
    print(f"monotone={table.monotone()} observed orders={[round(o, 4) for o in orders]} "
          f"min order={min(orders):.4f} ({time.perf_counter() - start:.2f} s)")
    return EXIT_OK if table.monotone() else EXIT_DISAGREE


COMMANDS = {"run": cmd_run, "verify": cmd_verify, "compare": cmd_compare, "convergence": cmd_convergence}


def build_parser():
    p = argparse.ArgumentParser(prog="discrete-dirac",
                                description="Interconnected discrete Dirac mechanics experiments.")
    sub = p.add_subparsers(dest="command", required=True)
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="YAML run configuration")
    common.add_argument("--model", choices=sorted(BUILDERS), help="builtin model when no config is given")
    common.add_argument("--variant", choices=["monolithic", "interconnected"])
    common.add_argument("--out", help="output path (default: from config, else stdout)")
    common.add_argument("--seed", type=int)
    common.add_argument("--samples", type=int)
    common.add_argument("--steps", type=int)
    common.add_argument("--dt", type=float, help="step size h")
    sub.add_parser("run", parents=[common], help="simulate and write the trajectory CSV")
    sub.add_parser("verify", parents=[common], help="randomized structure-algebra checks")
    c = sub.add_parser("compare", parents=[common], help="monolithic vs interconnected")
    c.add_argument("--tol", type=float, default=1e-12)
    sub.add_parser("convergence", parents=[common], help="error against the exact linear solution")
    return p


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        cfg = resolve_config(args)
        return COMMANDS[args.command](cfg, args)
    except ConfigError as exc:
        for e in exc.errors:
            print(f"config error: {e}", file=sys.stderr)
        return EXIT_VALIDATION
    except (SimulationError, StepError) as exc:
        print(f"solver error: {exc}", file=sys.stderr)
        return EXIT_SOLVER
    except DiracError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION


if __name__ == "__main__":
    sys.exit(main())
