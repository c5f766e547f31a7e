"""Run file for the identity matrix used by the acceptance suite."""

from homhardy.group import ConfigurationError, QuasiNorm, make_group

GROUPS = ([1, 1, 1], [1, 1, 2], [1, 1, 1, 2], [1, 1, 1, 2, 2], [1, 1, 1, 1, 1])

REAL = {"kind": "bump", "support": [0.5, 1.5],
        "angular": {"kind": "trace", "index": 0, "power": 2}}
COMPLEX = {"kind": "bump", "support": [0.5, 1.5],
           "angular": {"kind": "complex",
                       "real": {"kind": "constant", "value": 1.0},
                       "imag": {"kind": "trace", "index": 0, "power": 1}}}


def norms_for(weights):
    out = []
    for kind in ("anisotropic", "koranyi", "euclidean"):
        try:
            QuasiNorm(make_group(weights), kind)
        except ConfigurationError:
            continue
        out.append(kind)
    return out


def identity_jobs(Q, is_complex):
    jobs = []
    for p in (1.5, 2.0, 3.0):
        if p < Q and not (is_complex and p != 2.0):
            jobs.append({"identity": "HardyLp", "params": {"p": p}})
    jobs.append({"identity": "HardyL2"})
    for a in (-1.0, 0.0, 1.0, (Q - 2) / 2 + 0.3):
        jobs.append({"identity": "WeightedL2", "params": {"alpha": a}})
    if Q >= 5:
        jobs.append({"identity": "Rellich"})
    for k in (1, 2, 3):
        for a in (0.0, 0.5):
            jobs.append({"identity": "HigherOrder", "params": {"k": k, "alpha": a}})
    for p in (2.0, 2.5):
        if p < Q:
            jobs.append({"identity": "IbpFormula", "params": {"p": p}})
    for p in (1.5, 2.0, 3.0):
        if p < Q:
            jobs.append({"identity": "Uncertainty", "params": {"p": p}})
    return jobs


def matrix_config(paths=("analytic", "fd")):
    jobs = []
    for w in GROUPS:
        Q = float(sum(w))
        for kind in norms_for(w):
            for func in (REAL, COMPLEX):
                for mode in paths:
                    for job in identity_jobs(Q, func is COMPLEX):
                        jobs.append(dict(job, group={"weights": w}, norm={"kind": kind},
                                         function=func, calculus={"mode": mode}))
    return {"seed": 0, "jobs": jobs,
            "output": {"dir": "out", "format": "both", "prefix": "matrix"}}


if __name__ == "__main__":
    import json
    import sys

    json.dump(matrix_config(), sys.stdout, indent=1)
    sys.stdout.write("\n")
