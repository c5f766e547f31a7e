"""Run-file schema, defaults and validation.

A run file is JSON.  Top-level blocks ``group``, ``norm``, ``calculus``,
``quad`` and ``function`` set defaults that any identity or sharpness job may
override with a block of the same name.  Every reporter precondition is
checked here, before anything is computed, and all violations are reported
together.
"""

from __future__ import annotations

import copy
import json
import math
from dataclasses import dataclass, field
from pathlib import Path

from .calculus import RadialMethod
from .group import ConfigurationError, DilationGroup, QuasiNorm
from .quadrature import MAX_DIM, SCHEMES, QuadratureSpec
from .testfuncs import (
    ComplexAngular,
    Constant,
    CoordinateTrace,
    PlateauPower,
    PolyCutoff,
    SeparableFunction,
    SmoothBump,
    make_extremizer,
)

__all__ = [
    "ConfigError",
    "DEFAULTS",
    "IDENTITY_PARAMS",
    "SHARPNESS_PARAMS",
    "JobSpec",
    "SharpnessJobSpec",
    "OptimizeJobSpec",
    "RunConfig",
    "load_config",
    "parse_config",
    "build_group",
    "build_norm",
    "build_method",
    "build_quad",
    "build_function",
]


class ConfigError(ValueError):
    """Invalid run file; ``errors`` lists every violation."""

    def __init__(self, errors):
        self.errors = list(errors)
        super().__init__("invalid configuration:\n  " + "\n  ".join(self.errors))


DEFAULTS = {
    "seed": 0,
    "group": {"weights": [1.0, 1.0, 1.0]},
    "norm": {"kind": "anisotropic", "kappa": None, "c": 16.0},
    "calculus": {"mode": "analytic", "h": 1e-3, "order": 4, "richardson": True},
    "quad": {
        "radial_order": 16,
        "radial_panels": 32,
        "cubature_points": 96,
        "annulus_lambda": 2.0,
        "tol": 1e-8,
        "general_tol": 1e-4,
        "seed": 0,
        "mc_samples": 65536,
        "sphere_order": 24,
        "orbit_order": 8,
        "orbit_radial": 64,
        "scheme": "auto",
    },
    "function": {
        "kind": "bump",
        "support": [0.5, 1.5],
        "degree": 8,
        "eps": 0.0,
        "p": 2.0,
        "gamma": None,
        "cutoffs": [[0.01, 0.02], [50.0, 100.0]],
        "angular": {"kind": "constant", "value": 1.0},
    },
    "output": {"dir": "out", "format": "both", "prefix": "suite"},
}

BLOCKS = ("group", "norm", "calculus", "quad", "function")
TOP_KEYS = {"seed", "jobs", "sharpness", "output", *BLOCKS}

IDENTITY_PARAMS = {
    "HardyLp": {"p"},
    "HardyL2": set(),
    "WeightedL2": {"alpha"},
    "Rellich": set(),
    "HigherOrder": {"k", "alpha"},
    "Uncertainty": {"p"},
    "LogHardy": {"p", "R_list"},
    "IbpFormula": {"p"},
    "ComplexReduction": {"z", "p"},
}
REQUIRED_PARAMS = {
    "HardyLp": {"p"}, "WeightedL2": {"alpha"}, "HigherOrder": {"k"}, "Uncertainty": {"p"},
    "LogHardy": {"p", "R_list"}, "IbpFormula": {"p"}, "ComplexReduction": {"z", "p"},
}
SHARPNESS_PARAMS = {
    "Hardy": {"p", "eps"},
    "Weighted": {"alpha"},
    "Rellich": set(),
    "HigherOrder": {"k", "alpha"},
}
JOB_KEYS = {"identity", "params", "inequality", "label", *BLOCKS}
SWEEP_KEYS = {"inequality", "params", "deltas", "ramp", "min_ratio", "label", "group", "norm",
              "quad"}
OPT_KEYS = {"inequality", "params", "family", "bounds", "start", "maxiter", "xatol", "label",
            "group", "norm", "quad"}
FUNCTION_KINDS = ("bump", "poly_cutoff", "extremizer", "plateau")


def _merge(base: dict, over: dict) -> dict:
    out = copy.deepcopy(base)
    for k, v in over.items():
        if isinstance(v, dict) and isinstance(out.get(k), dict) and k != "angular":
            out[k] = _merge(out[k], v)
        else:
            out[k] = copy.deepcopy(v)
    return out


def _unknown(where, given, allowed, errors):
    for k in sorted(set(given) - set(allowed)):
        errors.append(f"{where}: unknown key {k!r}")


# ---------------------------------------------------------------------------
# builders (assume validated input)


def build_group(block) -> DilationGroup:
    return DilationGroup(tuple(float(w) for w in block["weights"]))


def build_norm(block, group) -> QuasiNorm:
    kappa = block.get("kappa")
    return QuasiNorm(group, block["kind"], None if kappa is None else float(kappa),
                     float(block.get("c", 16.0)))


def build_method(block) -> RadialMethod:
    return RadialMethod(block["mode"], float(block["h"]), int(block["order"]),
                        bool(block["richardson"]))


def build_quad(block, seed=None) -> QuadratureSpec:
    return QuadratureSpec(
        radial_order=int(block["radial_order"]),
        radial_panels=int(block["radial_panels"]),
        cubature_points_per_dim=int(block["cubature_points"]),
        annulus_lambda=float(block["annulus_lambda"]),
        mc_samples=int(block["mc_samples"]),
        target_tol=float(block["tol"]),
        general_tol=float(block["general_tol"]),
        seed=int(block["seed"] if seed is None else seed),
        sphere_order=int(block["sphere_order"]),
        orbit_order=int(block["orbit_order"]),
        orbit_radial=int(block["orbit_radial"]),
        scheme=str(block["scheme"]),
    )


def _build_angular(block):
    kind = block.get("kind")
    if kind == "constant":
        v = block.get("value", 1.0)
        return Constant(complex(v[0], v[1]) if isinstance(v, list) else float(v))
    if kind == "trace":
        return CoordinateTrace(int(block.get("index", 0)), int(block.get("power", 1)))
    if kind == "complex":
        return ComplexAngular(_build_angular(block["real"]), _build_angular(block["imag"]))
    raise ValueError(f"unknown angular kind {kind!r}")


def _build_profile(block):
    kind = block["kind"]
    if kind == "bump":
        a, b = block["support"]
        return SmoothBump(float(a), float(b))
    if kind == "poly_cutoff":
        a, b = block["support"]
        return PolyCutoff(float(a), float(b), int(block["degree"]))
    inner, outer = block["cutoffs"]
    if kind == "extremizer":
        return make_extremizer(float(block["Q"]), float(block["p"]), float(block["eps"]),
                               (tuple(inner), tuple(outer)))
    return PlateauPower(float(block["gamma"]), tuple(inner), tuple(outer))


def build_function(block, norm) -> SeparableFunction:
    block = dict(block)
    block.setdefault("Q", norm.group.Q)
    return SeparableFunction(_build_profile(block), _build_angular(block["angular"]), norm)


# ---------------------------------------------------------------------------
# job specs


@dataclass(frozen=True)
class JobSpec:
    index: int
    identity: str
    params: dict
    blocks: dict
    inequality: bool = True
    label: str = ""

    @property
    def path(self) -> str:
        return "separable" if self.blocks["calculus"]["mode"] == "analytic" else "general"


@dataclass(frozen=True)
class SharpnessJobSpec:
    index: int
    inequality: str
    params: dict
    deltas: tuple
    blocks: dict
    ramp: object = "auto"
    min_ratio: float | None = None
    label: str = ""


@dataclass(frozen=True)
class OptimizeJobSpec:
    index: int
    inequality: str
    params: dict
    family: str
    blocks: dict
    bounds: tuple | None = None
    start: tuple | None = None
    maxiter: int = 200
    xatol: float = 1e-6
    label: str = ""


@dataclass
class RunConfig:
    resolved: dict
    jobs: list = field(default_factory=list)
    sweeps: list = field(default_factory=list)
    optimizations: list = field(default_factory=list)

    @property
    def seed(self) -> int:
        return int(self.resolved["seed"])

    @property
    def output(self) -> dict:
        return self.resolved["output"]


# ---------------------------------------------------------------------------
# validation


def _check_blocks(where, blocks, errors):
    """Validate merged blocks; returns (group, norm, function) or Nones."""
    group = norm = func = None
    g = blocks["group"]
    _unknown(f"{where}.group", g, DEFAULTS["group"], errors)
    try:
        w = g["weights"]
        if not isinstance(w, list) or not w:
            raise ConfigurationError("group.weights must be a non-empty array")
        if len(w) > MAX_DIM:
            raise ConfigurationError(f"group dimension {len(w)} exceeds {MAX_DIM}")
        group = build_group(g)
    except (ConfigurationError, ValueError, TypeError, KeyError) as exc:
        errors.append(f"{where}.group: {exc}")
    n = blocks["norm"]
    _unknown(f"{where}.norm", n, DEFAULTS["norm"], errors)
    if group is not None:
        try:
            norm = build_norm(n, group)
        except (ConfigurationError, ValueError, TypeError, KeyError) as exc:
            errors.append(f"{where}.norm: {exc}")
    c = blocks["calculus"]
    _unknown(f"{where}.calculus", c, DEFAULTS["calculus"], errors)
    try:
        build_method(c)
    except (ValueError, TypeError, KeyError) as exc:
        errors.append(f"{where}.calculus: {exc}")
    q = blocks["quad"]
    _unknown(f"{where}.quad", q, DEFAULTS["quad"], errors)
    try:
        if q.get("scheme") not in SCHEMES:
            raise ValueError(f"scheme must be one of {SCHEMES}")
        build_quad(q)
    except (ValueError, TypeError, KeyError) as exc:
        errors.append(f"{where}.quad: {exc}")
    fb = blocks["function"]
    _unknown(f"{where}.function", fb, DEFAULTS["function"], errors)
    if fb.get("kind") not in FUNCTION_KINDS:
        errors.append(f"{where}.function.kind must be one of {FUNCTION_KINDS}")
    elif norm is not None:
        try:
            if fb["kind"] == "plateau" and fb.get("gamma") is None:
                raise ValueError("plateau profile needs gamma")
            func = build_function(fb, norm)
        except (ValueError, TypeError, KeyError, IndexError) as exc:
            errors.append(f"{where}.function: {exc}")
    return group, norm, func


def _num(params, key, where, errors, kind=float):
    v = params.get(key)
    if kind is int:
        if isinstance(v, bool) or not isinstance(v, int):
            errors.append(f"{where}: {key} must be an integer")
            return None
        return v
    if isinstance(v, bool) or not isinstance(v, (int, float)) or not math.isfinite(v):
        errors.append(f"{where}: {key} must be a finite number")
        return None
    return float(v)


def _check_identity(where, job, group, func, errors):
    ident = job.get("identity")
    if ident not in IDENTITY_PARAMS:
        errors.append(f"{where}: unknown identity {ident!r}")
        return
    params = job.get("params", {})
    if not isinstance(params, dict):
        errors.append(f"{where}.params must be an object")
        return
    _unknown(f"{where}.params", params, IDENTITY_PARAMS[ident], errors)
    for k in sorted(REQUIRED_PARAMS.get(ident, set()) - set(params)):
        errors.append(f"{where}: {ident} needs parameter {k!r}")
    if ident == "ComplexReduction":
        z = params.get("z")
        if not (isinstance(z, list) and len(z) == 2
                and all(isinstance(t, (int, float)) for t in z)):
            errors.append(f"{where}: z must be [re, im]")
        p = _num(params, "p", where, errors) if "p" in params else None
        if p is not None and p < 1:
            errors.append(f"{where}: ComplexReduction needs p >= 1")
        return
    if group is None:
        return
    Q = group.Q
    mode = job["calculus"]["mode"]
    if ident in ("HardyLp", "Uncertainty", "IbpFormula") and "p" in params:
        p = _num(params, "p", where, errors)
        if p is not None and not 1 < p < Q:
            errors.append(f"{where}: {ident} needs 1 < p < Q (p={p:g}, Q={Q:g})")
        if (ident == "HardyLp" and p is not None and p != 2 and func is not None
                and func.is_complex):
            errors.append(f"{where}: HardyLp with p != 2 needs a real-valued function")
    if ident in ("HardyL2", "WeightedL2", "HigherOrder") and Q < 3:
        errors.append(f"{where}: {ident} needs Q >= 3 (Q={Q:g})")
    if ident == "Rellich" and Q < 5:
        errors.append(f"{where}: Rellich needs Q >= 5 (Q={Q:g})")
    if "alpha" in params:
        _num(params, "alpha", where, errors)
    order = {"Rellich": 2}.get(ident, 1)
    if ident == "HigherOrder" and "k" in params:
        k = _num(params, "k", where, errors, int)
        if k is not None and k < 1:
            errors.append(f"{where}: k must be >= 1")
        order = k if k is not None else 1
    if func is not None and order > func.profile.max_order:
        errors.append(f"{where}: profile provides {func.profile.max_order} derivatives, "
                      f"{ident} needs {order}")
    if ident == "LogHardy":
        p = _num(params, "p", where, errors) if "p" in params else None
        if p is not None and p <= 1:
            errors.append(f"{where}: LogHardy needs p > 1")
        R = params.get("R_list")
        if "R_list" in params and not (isinstance(R, list) and R and all(
                isinstance(t, (int, float)) and t > 0 for t in R)):
            errors.append(f"{where}: R_list must be a non-empty array of positive numbers")
        if mode != "analytic":
            errors.append(f"{where}: LogHardy runs on the separable path (calculus.mode "
                          f"'analytic')")


def _blocks_for(raw, job, keys=BLOCKS):
    out = {}
    for b in BLOCKS:
        base = raw.get(b, {})
        if not isinstance(base, dict):
            base = {}
        merged = _merge(DEFAULTS[b], base)
        if b in keys and isinstance(job.get(b), dict):
            merged = _merge(merged, job[b])
        out[b] = merged
    return out


def parse_config(raw: dict, seed: int | None = None) -> RunConfig:
    """Validate ``raw`` and resolve every default."""
    errors: list[str] = []
    if not isinstance(raw, dict):
        raise ConfigError(["run file must be a JSON object"])
    _unknown("config", raw, TOP_KEYS, errors)
    for b in BLOCKS + ("output",):
        if b in raw and not isinstance(raw[b], dict):
            errors.append(f"config.{b} must be an object")
    resolved = {
        "seed": raw.get("seed", DEFAULTS["seed"]) if seed is None else seed,
        "output": _merge(DEFAULTS["output"], raw.get("output", {}) if isinstance(
            raw.get("output"), dict) else {}),
    }
    if isinstance(resolved["seed"], bool) or not isinstance(resolved["seed"], int):
        errors.append("config.seed must be an integer")
    _unknown("config.output", resolved["output"], DEFAULTS["output"], errors)
    if resolved["output"]["format"] not in ("json", "csv", "both"):
        errors.append("config.output.format must be json, csv or both")
    resolved.update(_blocks_for(raw, {}))
    # the global seed drives every randomised rule
    if isinstance(resolved["seed"], int):
        resolved["quad"]["seed"] = resolved["seed"]
    _check_blocks("config", resolved, errors)

    jobs, sweeps, opts = [], [], []
    raw_jobs = raw.get("jobs", [])
    if not isinstance(raw_jobs, list):
        errors.append("config.jobs must be an array")
        raw_jobs = []
    resolved["jobs"] = []
    for i, job in enumerate(raw_jobs):
        where = f"jobs[{i}]"
        if not isinstance(job, dict):
            errors.append(f"{where} must be an object")
            continue
        _unknown(where, job, JOB_KEYS, errors)
        blocks = _blocks_for(raw, job)
        if isinstance(resolved["seed"], int):
            blocks["quad"]["seed"] = resolved["seed"]
        group, norm, func = _check_blocks(where, blocks, errors)
        entry = dict(blocks, identity=job.get("identity"), params=job.get("params", {}),
                     inequality=bool(job.get("inequality", True)), label=job.get("label", ""))
        _check_identity(where, entry, group, func, errors)
        resolved["jobs"].append(entry)
        jobs.append(JobSpec(i, entry["identity"], dict(entry["params"]), blocks,
                            entry["inequality"], str(entry["label"])))

    sh = raw.get("sharpness", {})
    if not isinstance(sh, dict):
        errors.append("config.sharpness must be an object")
        sh = {}
    _unknown("config.sharpness", sh, {"sweeps", "optimize"}, errors)
    resolved["sharpness"] = {"sweeps": [], "optimize": []}
    for i, sw in enumerate(sh.get("sweeps", [])):
        where = f"sharpness.sweeps[{i}]"
        if not isinstance(sw, dict):
            errors.append(f"{where} must be an object")
            continue
        _unknown(where, sw, SWEEP_KEYS, errors)
        blocks = _blocks_for(raw, sw, ("group", "norm", "quad"))
        if isinstance(resolved["seed"], int):
            blocks["quad"]["seed"] = resolved["seed"]
        group, _, _ = _check_blocks(where, blocks, errors)
        ineq, params = _check_sharp_common(where, sw, group, errors)
        deltas = sw.get("deltas", [1e-1, 1e-2, 1e-3])
        if not (isinstance(deltas, list) and deltas
                and all(isinstance(d, (int, float)) and 0 < d < 0.5 for d in deltas)):
            errors.append(f"{where}: deltas must be an array of numbers in (0, 0.5)")
        elif any(b >= a for a, b in zip(deltas, deltas[1:])):
            errors.append(f"{where}: deltas must be strictly decreasing")
        ramp = sw.get("ramp", "auto")
        if ramp != "auto" and not (isinstance(ramp, (int, float)) and 0 < ramp <= 1):
            errors.append(f"{where}: ramp must be 'auto' or a number in (0, 1]")
        min_ratio = sw.get("min_ratio")
        if min_ratio is not None and not isinstance(min_ratio, (int, float)):
            errors.append(f"{where}: min_ratio must be a number")
        entry = dict(blocks, inequality=ineq, params=params, deltas=deltas, ramp=ramp,
                     min_ratio=min_ratio, label=sw.get("label", ""))
        for b in ("calculus", "function"):
            entry.pop(b)
        resolved["sharpness"]["sweeps"].append(entry)
        sweeps.append(SharpnessJobSpec(i, ineq, params, tuple(deltas) if isinstance(
            deltas, list) else (), blocks, ramp, min_ratio, str(entry["label"])))
    for i, op in enumerate(sh.get("optimize", [])):
        where = f"sharpness.optimize[{i}]"
        if not isinstance(op, dict):
            errors.append(f"{where} must be an object")
            continue
        _unknown(where, op, OPT_KEYS, errors)
        blocks = _blocks_for(raw, op, ("group", "norm", "quad"))
        group, _, _ = _check_blocks(where, blocks, errors)
        ineq, params = _check_sharp_common(where, op, group, errors)
        family = op.get("family", "bump")
        if family not in ("bump", "plateau"):
            errors.append(f"{where}: family must be 'bump' or 'plateau'")
        bounds = op.get("bounds")
        start = op.get("start")
        if bounds is not None and not (isinstance(bounds, list) and all(
                isinstance(b, list) and len(b) == 2 and b[0] < b[1] for b in bounds)):
            errors.append(f"{where}: bounds must be an array of [lo, hi] pairs")
        if start is not None and not isinstance(start, list):
            errors.append(f"{where}: start must be an array")
        if (bounds is not None and start is not None and isinstance(bounds, list)
                and isinstance(start, list) and len(bounds) != len(start)):
            errors.append(f"{where}: bounds and start differ in length")
        for key, cap in (("bounds", bounds), ("start", start)):
            if isinstance(cap, list) and len(cap) > 4:
                errors.append(f"{where}: at most four shape parameters ({key})")
        maxiter = op.get("maxiter", 200)
        if isinstance(maxiter, bool) or not isinstance(maxiter, int) or maxiter < 1:
            errors.append(f"{where}: maxiter must be a positive integer")
        xatol = op.get("xatol", 1e-6)
        entry = dict(blocks, inequality=ineq, params=params, family=family, bounds=bounds,
                     start=start, maxiter=maxiter, xatol=xatol, label=op.get("label", ""))
        for b in ("calculus", "function"):
            entry.pop(b)
        resolved["sharpness"]["optimize"].append(entry)
        opts.append(OptimizeJobSpec(
            i, ineq, params, family, blocks,
            tuple(map(tuple, bounds)) if isinstance(bounds, list) else None,
            tuple(start) if isinstance(start, list) else None, maxiter, float(xatol),
            str(entry["label"])))
    if errors:
        raise ConfigError(errors)
    return RunConfig(resolved, jobs, sweeps, opts)


def _check_sharp_common(where, job, group, errors):
    from .sharpness import INEQUALITIES, target_constant

    ineq = job.get("inequality")
    params = job.get("params", {})
    if ineq not in INEQUALITIES:
        errors.append(f"{where}: unknown inequality {ineq!r}")
        return ineq, params
    if not isinstance(params, dict):
        errors.append(f"{where}.params must be an object")
        return ineq, {}
    _unknown(f"{where}.params", params, SHARPNESS_PARAMS[ineq], errors)
    if ineq == "HigherOrder" and "k" not in params:
        errors.append(f"{where}: HigherOrder needs parameter 'k'")
        return ineq, params
    if ineq == "HigherOrder" and (not isinstance(params["k"], int) or not 1 <= params["k"] <= 4):
        errors.append(f"{where}: k must be an integer in [1, 4] (plateau profiles are C^4)")
        return ineq, params
    if group is not None:
        try:
            target_constant(ineq, group.Q, params)
        except ValueError as exc:
            errors.append(f"{where}: {exc}")
    return ineq, params


def load_config(path, seed: int | None = None) -> RunConfig:
    path = Path(path)
    try:
        raw = json.loads(path.read_text())
    except json.JSONDecodeError as exc:
        raise ConfigError([f"{path}: not valid JSON ({exc})"]) from None
    return parse_config(raw, seed)
