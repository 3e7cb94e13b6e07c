"""YAML run configuration: parsing with full error collection, serialization
and model construction."""

import math
from dataclasses import dataclass, field
from typing import Optional, Union

import numpy as np
import yaml

from .core_geometry import Chart, ConstantOneForms
from .errors import ConfigurationError, DiracError
from .integrator import DiscreteState, discretize
from .lab import BUILDERS, BuiltModel, VARIANTS
from .model import InterconnectionSpec, LinearDamping, QuadraticLagrangian, Subsystem, compose

WITNESS_TOL = 1e-12
MODES = ("plus", "momentum_matched")
DEFAULT_STEPS = {"spring_chain": 1000, "rlc": 400}
DEFAULT_H = {"spring_chain": 0.01, "rlc": 0.1}
INLINE_DEFAULT_STEPS = 1000
DEFAULT_CONVERGENCE = {"h": [0.02, 0.01, 0.005], "t_final": 10.0}

_TOP_KEYS = {"model", "variant", "params", "h", "steps", "mode", "initial", "outputs", "seed",
             "samples", "convergence"}
_MODEL_KEYS = {"name", "subsystems", "interconnection", "interconnection_labels", "witnesses",
               "witness_labels"}
_SUB_KEYS = {"name", "coordinates", "mass", "stiffness", "potential", "damping", "constraints",
             "constraint_labels"}
_OUTPUT_KEYS = {"trajectory", "report", "comparison", "convergence"}


class ConfigError(ConfigurationError):
    """Validation failed; ``errors`` lists every problem found."""

    def __init__(self, errors):
        self.errors = list(errors)
        super().__init__("; ".join(self.errors))


@dataclass
class InlineSubsystem:
    name: str
    coordinates: list
    mass: list
    stiffness: Optional[list] = None
    potential: Optional[list] = None
    damping: Optional[list] = None
    constraints: list = field(default_factory=list)
    constraint_labels: Optional[list] = None

    @property
    def n(self):
        return len(self.coordinates)


@dataclass
class InlineModelDef:
    name: str
    subsystems: list
    interconnection: list = field(default_factory=list)
    interconnection_labels: Optional[list] = None
    witnesses: list = field(default_factory=list)
    witness_labels: Optional[list] = None

    @property
    def coord_names(self):
        return [c for s in self.subsystems for c in s.coordinates]


@dataclass
class RunConfig:
    model: Union[str, InlineModelDef]
    variant: Optional[str] = None
    params: dict = field(default_factory=dict)
    h: float = 0.01
    steps: int = 1000
    mode: str = "plus"
    initial: Optional[dict] = None
    outputs: dict = field(default_factory=dict)
    seed: int = 0
    samples: int = 1000
    convergence: dict = field(default_factory=lambda: dict(DEFAULT_CONVERGENCE))

    @property
    def model_name(self):
        return self.model if isinstance(self.model, str) else self.model.name

    @property
    def inline(self):
        return isinstance(self.model, InlineModelDef)


# ---------------------------------------------------------------------------
# Parsing
# ---------------------------------------------------------------------------

def _unknown(where, d, allowed, errors):
    for k in sorted(set(d) - allowed, key=str):
        errors.append(f"{where}: unknown key {k!r}")


def _matrix(value, rows, cols, where, errors, symmetric=False):
    if value is None:
        return None
    try:
        a = np.array(value, dtype=float)
    except (TypeError, ValueError):
        errors.append(f"{where}: not a numeric matrix")
        return None
    if a.size == 0 and rows == 0:
        return []
    if a.ndim != 2 or a.shape[1] != cols or (rows is not None and a.shape[0] != rows):
        want = f"{rows if rows is not None else 'k'}x{cols}"
        errors.append(f"{where}: expected a {want} matrix, got shape {a.shape}")
        return None
    if not np.all(np.isfinite(a)):
        errors.append(f"{where}: non-finite entries")
        return None
    if symmetric and not np.allclose(a, a.T, rtol=0.0, atol=1e-12):
        errors.append(f"{where}: matrix is not symmetric")
        return None
    if symmetric and np.linalg.eigvalsh(a).min(initial=0.0) < -1e-12 * max(1.0, np.abs(a).max()):
        errors.append(f"{where}: matrix is not positive semidefinite")
        return None
    return a.tolist()


def _labels(value, count, where, errors):
    if value is None:
        return None
    if not isinstance(value, list) or not all(isinstance(x, str) for x in value):
        errors.append(f"{where}: labels must be a list of strings")
        return None
    if len(value) != count:
        errors.append(f"{where}: {len(value)} labels for {count} rows")
        return None
    return list(value)


def _parse_subsystem(d, i, errors):
    where = f"model.subsystems[{i}]"
    if not isinstance(d, dict):
        errors.append(f"{where}: expected a mapping")
        return None
    _unknown(where, d, _SUB_KEYS, errors)
    coords = d.get("coordinates")
    if not isinstance(coords, list) or not coords or not all(isinstance(c, str) for c in coords):
        errors.append(f"{where}.coordinates: expected a non-empty list of names")
        return None
    n = len(coords)
    if "mass" not in d:
        errors.append(f"{where}.mass: required")
    mass = _matrix(d.get("mass"), n, n, f"{where}.mass", errors, symmetric=True)
    stiff = _matrix(d.get("stiffness"), n, n, f"{where}.stiffness", errors, symmetric=True)
    damp = _matrix(d.get("damping"), n, n, f"{where}.damping", errors)
    pot = d.get("potential")
    if pot is not None:
        m = _matrix([pot] if pot else [], 1 if pot else 0, n, f"{where}.potential", errors)
        pot = m[0] if m else None
    cons = _matrix(d.get("constraints") or [], None if d.get("constraints") else 0, n,
                   f"{where}.constraints", errors) or []
    labels = _labels(d.get("constraint_labels"), len(cons), f"{where}.constraint_labels", errors)
    return InlineSubsystem(str(d.get("name", f"sub{i + 1}")), list(coords), mass, stiff, pot, damp,
                           cons, labels)


def _parse_model(d, errors):
    if isinstance(d, str):
        if d not in BUILDERS:
            errors.append(f"model: unknown builtin {d!r} (choose from {sorted(BUILDERS)})")
        return d
    if not isinstance(d, dict):
        errors.append("model: expected a builtin name or an inline definition")
        return None
    _unknown("model", d, _MODEL_KEYS, errors)
    subs_raw = d.get("subsystems")
    if not isinstance(subs_raw, list) or not subs_raw:
        errors.append("model.subsystems: expected a non-empty list")
        return None
    subs = [_parse_subsystem(s, i, errors) for i, s in enumerate(subs_raw)]
    if any(s is None for s in subs):
        return None
    names = [c for s in subs for c in s.coordinates]
    if len(set(names)) != len(names):
        errors.append(f"model: duplicate coordinate names {sorted({c for c in names if names.count(c) > 1})}")
    n = len(names)
    inter_raw = d.get("interconnection") or []
    inter = _matrix(inter_raw, None if inter_raw else 0, n, "model.interconnection", errors) or []
    ilab = _labels(d.get("interconnection_labels"), len(inter), "model.interconnection_labels", errors)
    wit_raw = d.get("witnesses") or []
    wit = _matrix(wit_raw, None if wit_raw else 0, n, "model.witnesses", errors) or []
    wlab = _labels(d.get("witness_labels"), len(wit), "model.witness_labels", errors)
    return InlineModelDef(str(d.get("name", "inline")), subs, inter, ilab, wit, wlab)


def _number(value, where, errors, kind=float, positive=False, minimum=None):
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        errors.append(f"{where}: expected a number, got {value!r}")
        return None
    if kind is int and (not float(value).is_integer()):
        errors.append(f"{where}: expected an integer, got {value!r}")
        return None
    v = kind(value)
    if not math.isfinite(v):
        errors.append(f"{where}: must be finite")
        return None
    if positive and not v > 0:
        errors.append(f"{where}: must be positive, got {value!r}")
        return None
    if minimum is not None and v < minimum:
        errors.append(f"{where}: must be >= {minimum}, got {value!r}")
        return None
    return v


def _parse_initial(d, errors):
    if d is None:
        return None
    if not isinstance(d, dict):
        errors.append("initial: expected a mapping with q and p")
        return None
    _unknown("initial", d, {"q", "p"}, errors)
    out = {}
    for key in ("q", "p"):
        vals = d.get(key) or {}
        if not isinstance(vals, dict):
            errors.append(f"initial.{key}: expected a mapping from coordinate name to value")
            continue
        out[key] = {}
        for name, v in vals.items():
            x = _number(v, f"initial.{key}.{name}", errors)
            if x is not None:
                out[key][str(name)] = x
    return out


def _parse_convergence(d, errors):
    if d is None:
        return dict(DEFAULT_CONVERGENCE)
    if not isinstance(d, dict):
        errors.append("convergence: expected a mapping")
        return dict(DEFAULT_CONVERGENCE)
    _unknown("convergence", d, {"h", "t_final"}, errors)
    out = dict(DEFAULT_CONVERGENCE)
    if "h" in d:
        hs = d["h"]
        if not isinstance(hs, list) or len(hs) < 3:
            errors.append("convergence.h: expected a list of at least three step sizes")
        else:
            out["h"] = [_number(h, f"convergence.h[{i}]", errors, positive=True) for i, h in enumerate(hs)]
    if "t_final" in d:
        out["t_final"] = _number(d["t_final"], "convergence.t_final", errors, positive=True)
    return out


def _validate_semantics(cfg: RunConfig, errors):
    """Checks that need the assembled model: names, parameters, witnesses at t=0."""
    try:
        model = build_model(cfg)
    except DiracError as exc:
        errors.append(f"model: {exc}")
        return
    names = list(model.system.coord_names)
    if cfg.initial:
        for key in ("q", "p"):
            for name in cfg.initial.get(key, {}):
                if name not in names:
                    errors.append(f"initial.{key}: unknown coordinate {name!r} (model has {names})")
    W = model.system.witnesses
    if W.size:
        w0 = W @ model.initial.q
        for label, val in zip(model.system.witness_labels, w0):
            if abs(val) > WITNESS_TOL:
                errors.append(f"initial: holonomic witness {label} = {val:.17g} at t=0, expected 0")


def config_from_dict(d) -> RunConfig:
    """Validate a parsed mapping; raises ``ConfigError`` listing every problem."""
    errors = []
    if not isinstance(d, dict):
        raise ConfigError(["config: expected a mapping at the top level"])
    _unknown("config", d, _TOP_KEYS, errors)
    if "model" not in d:
        errors.append("model: required")
    model = _parse_model(d.get("model"), errors) if "model" in d else None
    builtin = isinstance(model, str) and model in BUILDERS
    variant = d.get("variant")
    if isinstance(model, InlineModelDef):
        if variant is not None:
            errors.append("variant: only applies to builtin models")
    elif variant is None:
        variant = "interconnected"
    elif variant not in VARIANTS:
        errors.append(f"variant: expected one of {list(VARIANTS)}, got {variant!r}")
    params = d.get("params") or {}
    if not isinstance(params, dict):
        errors.append("params: expected a mapping")
        params = {}
    elif isinstance(model, InlineModelDef) and params:
        errors.append("params: only applies to builtin models (inline models carry their matrices)")
    else:
        params = {str(k): _number(v, f"params.{k}", errors) for k, v in params.items()}
    h_default = DEFAULT_H.get(model, 0.01) if builtin else 0.01
    steps_default = DEFAULT_STEPS.get(model, INLINE_DEFAULT_STEPS) if builtin else INLINE_DEFAULT_STEPS
    h = _number(d.get("h", h_default), "h", errors, positive=True)
    steps = _number(d.get("steps", steps_default), "steps", errors, kind=int, minimum=1)
    if h is not None and steps is not None and not math.isfinite(h * steps):
        errors.append("h * steps must be finite")
    mode = d.get("mode", "plus")
    if mode not in MODES:
        errors.append(f"mode: expected one of {list(MODES)}, got {mode!r}")
    initial = _parse_initial(d.get("initial"), errors)
    if isinstance(model, InlineModelDef) and initial is None:
        errors.append("initial: required for inline models")
    outputs = d.get("outputs") or {}
    if not isinstance(outputs, dict):
        errors.append("outputs: expected a mapping")
        outputs = {}
    else:
        _unknown("outputs", outputs, _OUTPUT_KEYS, errors)
        outputs = {k: str(v) for k, v in outputs.items()}
    seed = _number(d.get("seed", 0), "seed", errors, kind=int, minimum=0)
    samples = _number(d.get("samples", 1000), "samples", errors, kind=int, minimum=1)
    convergence = _parse_convergence(d.get("convergence"), errors)
    cfg = RunConfig(model, variant if not isinstance(model, InlineModelDef) else None, params,
                    h if h is not None else h_default, steps, mode, initial, outputs, seed, samples,
                    convergence)
    # model-level checks still run when unrelated fields are invalid
    structural = ("model", "variant", "params", "initial")
    if model is not None and not any(e.startswith(structural) for e in errors):
        _validate_semantics(cfg, errors)
    if errors:
        raise ConfigError(errors)
    return cfg


def parse_config(text) -> RunConfig:
    try:
        d = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        raise ConfigError([f"config: malformed YAML: {exc}"]) from exc
    return config_from_dict(d if d is not None else {})


def load_config(path) -> RunConfig:
    with open(path, encoding="utf-8") as fh:
        return parse_config(fh.read())


# ---------------------------------------------------------------------------
# Serialization
# ---------------------------------------------------------------------------

def _drop_none(d):
    return {k: v for k, v in d.items() if v is not None}


def config_to_dict(cfg: RunConfig) -> dict:
    if cfg.inline:
        m = cfg.model
        model = _drop_none({
            "name": m.name,
            "subsystems": [_drop_none({
                "name": s.name, "coordinates": list(s.coordinates), "mass": s.mass,
                "stiffness": s.stiffness, "potential": s.potential, "damping": s.damping,
                "constraints": s.constraints or None, "constraint_labels": s.constraint_labels,
            }) for s in m.subsystems],
            "interconnection": m.interconnection or None,
            "interconnection_labels": m.interconnection_labels,
            "witnesses": m.witnesses or None,
            "witness_labels": m.witness_labels,
        })
    else:
        model = cfg.model
    return _drop_none({
        "model": model, "variant": cfg.variant, "params": dict(cfg.params) or None,
        "h": cfg.h, "steps": cfg.steps, "mode": cfg.mode, "initial": cfg.initial,
        "outputs": dict(cfg.outputs) or None, "seed": cfg.seed, "samples": cfg.samples,
        "convergence": {"h": list(cfg.convergence["h"]), "t_final": cfg.convergence["t_final"]},
    })


def serialize(cfg: RunConfig) -> str:
    return yaml.safe_dump(config_to_dict(cfg), sort_keys=False)


# ---------------------------------------------------------------------------
# Model construction
# ---------------------------------------------------------------------------

def _zeros_if_none(a, n):
    return np.zeros((n, n)) if a is None else np.array(a, dtype=float)


def inline_subsystems(m: InlineModelDef):
    subs = []
    for s in m.subsystems:
        n = s.n
        L = QuadraticLagrangian(np.array(s.mass, dtype=float), _zeros_if_none(s.stiffness, n),
                                None if s.potential is None else np.array(s.potential, dtype=float))
        cons = ConstantOneForms(np.array(s.constraints, dtype=float) if s.constraints else
                                np.zeros((0, n)), n=n, labels=s.constraint_labels)
        force = LinearDamping(_zeros_if_none(s.damping, n))
        subs.append(Subsystem(Chart.from_names(s.coordinates), L, cons, force, name=s.name))
    sigma = None
    if m.interconnection:
        sigma = InterconnectionSpec(m.interconnection, labels=m.interconnection_labels)
    return subs, sigma


def compose_inline(m: InlineModelDef):
    subs, sigma = inline_subsystems(m)
    return compose(subs, sigma, name=m.name, witnesses=m.witnesses or None,
                   witness_labels=m.witness_labels), sigma


def _initial_state(names, initial, default: Optional[DiscreteState]):
    q = np.zeros(len(names)) if default is None else default.q.copy()
    p = np.zeros(len(names)) if default is None else default.p.copy()
    if initial:
        idx = {c: i for i, c in enumerate(names)}
        for name, v in initial.get("q", {}).items():
            if name in idx:
                q[idx[name]] = v
        for name, v in initial.get("p", {}).items():
            if name in idx:
                p[idx[name]] = v
    return DiscreteState(0, q, p)


def build_model(cfg: RunConfig, h=None) -> BuiltModel:
    """Assemble the configured model at step ``h`` (default: the config step)."""
    h = cfg.h if h is None else h
    if cfg.inline:
        system, sigma = compose_inline(cfg.model)
        initial = _initial_state(system.coord_names, cfg.initial, None)
        return BuiltModel(cfg.model.name, "inline", system, discretize(system, h), initial, h, {}, sigma)
    built = BUILDERS[cfg.model](cfg.variant, cfg.params or None, h)
    if cfg.initial:
        built.initial = _initial_state(built.system.coord_names, cfg.initial, built.initial)
    return built


def model_builder(cfg: RunConfig):
    """Callable (variant, params, h) -> BuiltModel, for convergence studies."""
    def build(variant=None, params=None, h=cfg.h):
        return build_model(cfg, h)
    return build


__all__ = [
    "ConfigError", "InlineSubsystem", "InlineModelDef", "RunConfig", "parse_config",
    "config_from_dict", "load_config", "serialize", "config_to_dict", "build_model",
    "compose_inline", "inline_subsystems", "model_builder",
]
