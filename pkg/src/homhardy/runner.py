"""Execute a validated run and write its reports."""

from __future__ import annotations

import csv
import io
import json
import logging
import math
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

from .config import (
    RunConfig,
    build_function,
    build_group,
    build_method,
    build_norm,
    build_quad,
)
from .identities import (
    DegenerateConstantError,
    complex_reduction_check,
    hardy_l2_report,
    hardy_lp_report,
    higher_order_report,
    ibp_report,
    log_hardy_report,
    rellich_report,
    uncertainty_report,
    weighted_l2_report,
)
from .sampling import build_sample
from .sharpness import optimize_constant, sharpness_sweep, target_constant

__all__ = ["SuiteResult", "run_suite", "emit", "CSV_COLUMNS", "csv_text"]

log = logging.getLogger(__name__)

CSV_COLUMNS = ("kind", "job", "id", "params", "group", "norm", "path", "lhs", "rhs",
               "abs_residual", "rel_residual", "quad_error", "pass", "delta", "quotient",
               "target", "gap")


@dataclass
class SuiteResult:
    config: dict
    jobs: list = field(default_factory=list)
    sweeps: list = field(default_factory=list)
    optimizations: list = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return all(j["pass"] for j in self.jobs + self.sweeps + self.optimizations)

    @property
    def reports(self) -> list:
        return [j["report"] for j in self.jobs if j.get("report") is not None]

    def to_dict(self) -> dict:
        return {"config": self.config, "jobs": self.jobs, "sharpness": self.sweeps,
                "optimize": self.optimizations, "pass": self.passed}


# ---------------------------------------------------------------------------
# identity jobs


def _order_needed(job) -> int:
    if job.identity == "Rellich":
        return 2
    if job.identity == "HigherOrder":
        return int(job.params["k"])
    return 1


def _sample_key(job) -> str:
    b = job.blocks
    return json.dumps([b["group"], b["norm"], b["calculus"], b["quad"], b["function"]],
                      sort_keys=True)


def _dispatch(job, group, norm, f, spec, method, sample):
    p = job.params
    path = job.path
    kw = dict(spec=spec, path=path, method=method, sample=sample)
    ident = job.identity
    if ident == "HardyLp":
        return hardy_lp_report(group, norm, f, float(p["p"]), **kw)
    if ident == "HardyL2":
        return hardy_l2_report(group, norm, f, **kw)
    if ident == "WeightedL2":
        return weighted_l2_report(group, norm, f, float(p["alpha"]),
                                  check_inequality=job.inequality, **kw)
    if ident == "Rellich":
        return rellich_report(group, norm, f, **kw)
    if ident == "HigherOrder":
        return higher_order_report(group, norm, f, int(p["k"]), float(p.get("alpha", 0.0)),
                                   check_inequality=job.inequality, **kw)
    if ident == "Uncertainty":
        return uncertainty_report(group, norm, f, float(p["p"]), **kw)
    if ident == "IbpFormula":
        return ibp_report(group, norm, f, float(p["p"]), **kw)
    if ident == "LogHardy":
        return log_hardy_report(group, norm, f, float(p["p"]), p["R_list"], spec)
    raise ValueError(f"unknown identity {ident!r}")


def _reduction_entry(job):
    z = complex(*job.params["z"])
    res = complex_reduction_check(z, float(job.params["p"]))
    tol = 10.0 * build_quad(job.blocks["quad"]).target_tol
    report = dict(res, params=dict(job.params), terms={}, remainders=[],
                  quad_error=None, tolerance=tol, path="scalar", inequality=None)
    report["pass"] = res["rel_residual"] < tol
    return report


def _run_group(jobs):
    """Run jobs sharing one (group, norm, function, calculus, quad) setup."""
    out = []
    first = jobs[0]
    b = first.blocks
    group = build_group(b["group"])
    norm = build_norm(b["norm"], group)
    method = build_method(b["calculus"])
    spec = build_quad(b["quad"])
    f = build_function(b["function"], norm)
    sample = None
    needs = [j for j in jobs if j.identity not in ("ComplexReduction", "LogHardy")]
    if needs:
        order = max(_order_needed(j) for j in needs)
        t0 = time.perf_counter()
        try:
            sample = build_sample(f, norm, spec, order, first.path, method)
        except Exception as exc:  # recorded per job below
            sample = exc
        shared = time.perf_counter() - t0
    for job in jobs:
        t0 = time.perf_counter()
        entry = {"index": job.index, "identity": job.identity, "params": dict(job.params),
                 "label": job.label, "path": job.path, "group": b["group"]["weights"],
                 "norm": norm.describe(), "function": f.describe(), "status": "ok",
                 "error": None, "report": None}
        try:
            if job.identity == "ComplexReduction":
                entry["path"] = "scalar"
                rep = _reduction_entry(job)
            else:
                if isinstance(sample, Exception) and job.identity != "LogHardy":
                    raise sample
                rep = _dispatch(job, group, norm, f, spec, method,
                                None if job.identity == "LogHardy" else sample).to_dict()
            entry["report"] = rep
            entry["pass"] = bool(rep["pass"])
        except DegenerateConstantError as exc:
            # the identity was still checked; only the constant is undefined
            entry["status"] = "degenerate_constant"
            entry["error"] = str(exc)
            entry["report"] = exc.report.to_dict() if exc.report is not None else None
            entry["pass"] = bool(entry["report"] and entry["report"]["pass"])
        except Exception as exc:
            entry["status"] = "error"
            entry["error"] = f"{type(exc).__name__}: {exc}"
            entry["pass"] = False
        entry["seconds"] = time.perf_counter() - t0
        if needs and job in needs:
            entry["seconds"] += shared / len(needs)
        out.append(entry)
    return out


def _run_sweep(job):
    b = job.blocks
    group = build_group(b["group"])
    norm = build_norm(b["norm"], group)
    spec = build_quad(b["quad"])
    t0 = time.perf_counter()
    entry = {"index": job.index, "inequality": job.inequality, "params": dict(job.params),
             "label": job.label, "group": b["group"]["weights"], "norm": norm.describe(),
             "min_ratio": job.min_ratio, "error": None, "curve": None}
    try:
        curve = sharpness_sweep(job.inequality, group, norm, job.params, job.deltas, spec,
                                job.ramp)
        d = curve.to_dict()
        ok = d["monotone"] and d["below_target"] and all(d["reliable"])
        if job.min_ratio is not None:
            ok = ok and max(d["ratios"]) >= job.min_ratio
        entry["curve"] = d
        entry["pass"] = bool(ok)
    except Exception as exc:
        entry["error"] = f"{type(exc).__name__}: {exc}"
        entry["pass"] = False
    entry["seconds"] = time.perf_counter() - t0
    return entry


def _run_opt(job):
    b = job.blocks
    group = build_group(b["group"])
    norm = build_norm(b["norm"], group)
    spec = build_quad(b["quad"])
    t0 = time.perf_counter()
    entry = {"index": job.index, "inequality": job.inequality, "params": dict(job.params),
             "family": job.family, "label": job.label, "group": b["group"]["weights"],
             "norm": norm.describe(), "error": None}
    try:
        target = target_constant(job.inequality, group.Q, job.params)
        q, theta = optimize_constant(job.inequality, group, norm, job.params, job.family, spec,
                                     job.bounds, job.start, job.maxiter, job.xatol)
        entry.update(quotient=q, best_params=[float(t) for t in theta], target=target,
                     gap=target - q, ratio=q / target)
        entry["pass"] = bool(q <= target * (1.0 + 10.0 * spec.target_tol))
    except Exception as exc:
        entry["error"] = f"{type(exc).__name__}: {exc}"
        entry["pass"] = False
    entry["seconds"] = time.perf_counter() - t0
    return entry


def _map(fn, items, workers):
    if workers <= 1 or len(items) <= 1:
        return [fn(it) for it in items]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, items))


def run_suite(config: RunConfig, which: str = "all", workers: int = 1) -> SuiteResult:
    """Execute the jobs selected by ``which`` (``verify``, ``sharpness`` or ``all``).

    Results come back in config order whatever the worker count.  A job that
    raises is recorded as failed and the rest carry on.
    """
    if which not in ("verify", "sharpness", "all"):
        raise ValueError("which must be verify, sharpness or all")
    result = SuiteResult(config.resolved)
    if which in ("verify", "all") and config.jobs:
        groups: dict[str, list] = {}
        for job in config.jobs:
            groups.setdefault(_sample_key(job), []).append(job)
        log.info("running %d identity jobs in %d setups", len(config.jobs), len(groups))
        entries = [e for batch in _map(_run_group, list(groups.values()), workers)
                   for e in batch]
        result.jobs = sorted(entries, key=lambda e: e["index"])
    if which in ("sharpness", "all"):
        if config.sweeps:
            log.info("running %d sharpness sweeps", len(config.sweeps))
            result.sweeps = _map(_run_sweep, config.sweeps, workers)
        if config.optimizations:
            log.info("running %d simplex searches", len(config.optimizations))
            result.optimizations = _map(_run_opt, config.optimizations, workers)
    return result


# ---------------------------------------------------------------------------
# output


def _fmt(v):
    if v is None:
        return ""
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, float):
        return repr(v) if math.isfinite(v) else str(v)
    if isinstance(v, (list, dict)):
        return json.dumps(v, sort_keys=True, separators=(",", ":"))
    return str(v)


def _rows(result: SuiteResult):
    for e in result.jobs:
        rep = e.get("report") or {}
        yield {
            "kind": "identity", "job": e["index"], "id": e["identity"], "params": e["params"],
            "group": e["group"], "norm": e["norm"], "path": e["path"],
            "lhs": rep.get("lhs"), "rhs": rep.get("rhs"),
            "abs_residual": rep.get("abs_residual"), "rel_residual": rep.get("rel_residual"),
            "quad_error": rep.get("quad_error"), "pass": e["pass"],
        }
    for e in result.sweeps:
        c = e.get("curve")
        if c is None:
            yield {"kind": "sharpness", "job": e["index"], "id": e["inequality"],
                   "params": e["params"], "group": e["group"], "norm": e["norm"],
                   "pass": e["pass"]}
            continue
        for d, q, g in zip(c["deltas"], c["quotients"], c["gaps"]):
            yield {"kind": "sharpness", "job": e["index"], "id": e["inequality"],
                   "params": e["params"], "group": e["group"], "norm": e["norm"],
                   "pass": e["pass"], "delta": d, "quotient": q, "target": c["target"],
                   "gap": g}
    for e in result.optimizations:
        params = dict(e["params"], family=e["family"], best=e.get("best_params"))
        yield {"kind": "optimize", "job": e["index"], "id": e["inequality"], "params": params,
               "group": e["group"], "norm": e["norm"], "pass": e["pass"],
               "quotient": e.get("quotient"), "target": e.get("target"), "gap": e.get("gap")}


def csv_text(result: SuiteResult) -> str:
    """Flat CSV, one row per report or sweep point.  Timings are left out so
    identical runs give identical bytes."""
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_COLUMNS)
    for row in _rows(result):
        w.writerow([_fmt(row.get(c)) for c in CSV_COLUMNS])
    return buf.getvalue()


def _json_default(o):
    if hasattr(o, "item"):
        return o.item()
    if isinstance(o, complex):
        return [o.real, o.imag]
    raise TypeError(f"cannot serialise {type(o).__name__}")


def json_text(obj) -> str:
    return json.dumps(obj, indent=2, sort_keys=True, default=_json_default) + "\n"


def emit(result: SuiteResult, out_dir, fmt: str = "both", prefix: str = "suite") -> list:
    """Write ``<prefix>.json`` (full result), ``<prefix>_reports.json`` (array
    of identity reports) and/or ``<prefix>.csv``.  Returns the paths written."""
    if fmt not in ("json", "csv", "both"):
        raise ValueError("format must be json, csv or both")
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    written = []
    if fmt in ("json", "both"):
        p = out / f"{prefix}.json"
        p.write_text(json_text(result.to_dict()))
        q = out / f"{prefix}_reports.json"
        q.write_text(json_text(result.reports))
        written += [p, q]
    if fmt in ("csv", "both"):
        p = out / f"{prefix}.csv"
        p.write_text(csv_text(result))
        written.append(p)
    return written
