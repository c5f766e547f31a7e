"""Acceptance criteria, one test per criterion at its stated tolerance.

Run alone with ``pytest tests/test_acceptance.py -v``; the terminal summary
lists one PASS/FAIL line per criterion.
"""

import math
import time
from pathlib import Path

import numpy as np
import pytest

from homhardy.calculus import DEFAULT_FD, RadialMethod, check_homogeneity, euler_apply, radial_derivative
from homhardy.cli import main
from homhardy.config import parse_config
from homhardy.group import QuasiNorm, make_group
from homhardy.identities import (
    DegenerateConstantError,
    higher_order_report,
    log_hardy_report,
    uncertainty_report,
)
from homhardy.quadrature import QuadratureSpec, SupportBox, integrate_lebesgue, polar_integrate, sphere_integrate
from homhardy.runner import run_suite
from homhardy.sharpness import sharpness_sweep, target_constant
from homhardy.testfuncs import CoordinateTrace, PowerProfile, general, make_bump, separable
from matrix_cases import matrix_config

ROOT = Path(__file__).resolve().parent.parent
SPEC = QuadratureSpec()


@pytest.fixture(scope="module")
def matrix():
    t0 = time.perf_counter()
    res = run_suite(parse_config(matrix_config()), "verify")
    return res, time.perf_counter() - t0


def _matrix_reports(res, skip=("Uncertainty",)):
    return [(e, e["report"]) for e in res.jobs if e["identity"] not in skip]


def test_criterion_1_identity_residuals(matrix, criterion):
    res, seconds = matrix
    bad = []
    worst = {"separable": 0.0, "general": 0.0}
    for e, rep in _matrix_reports(res):
        if rep is None or e["status"] not in ("ok", "degenerate_constant"):
            bad.append(f"job {e['index']}: {e.get('error')}")
            continue
        limit = 1e-6 if rep["path"] == "separable" else 1e-3
        worst[rep["path"]] = max(worst[rep["path"]], rep["rel_residual"])
        if not rep["rel_residual"] < limit:
            bad.append(f"job {e['index']} {e['identity']} {e['params']}: {rep['rel_residual']:.2e}")
    paths = {r["path"] for _, r in _matrix_reports(res) if r}
    ok = not bad and paths == {"separable", "general"} and seconds < 180
    criterion(1, ok, f"{len(res.jobs)} jobs, max rel separable {worst['separable']:.1e}, "
                     f"general {worst['general']:.1e}, {seconds:.0f}s")
    assert not bad, bad[:10]
    assert paths == {"separable", "general"}
    assert seconds < 180


def test_criterion_2_remainders_nonnegative(matrix, criterion):
    res, _ = matrix
    low = min(min(r["remainders"]) for _, r in _matrix_reports(res) if r and r["remainders"])
    criterion(2, low >= -1e-8, f"min remainder {low:.3e}")
    assert low >= -1e-8


SHARP_CASES = [
    ("Hardy", {"p": 2.0}, (1, 1, 2), 0.98),
    ("Hardy", {"p": 2.0}, (1, 1, 1, 2), 0.98),
    ("Hardy", {"p": 3.0}, (1, 1, 1, 2), 0.98),
    ("Rellich", {}, (1, 1, 1, 2), 0.95),
    ("Rellich", {}, (1, 1, 2, 2), 0.95),
    ("HigherOrder", {"k": 2, "alpha": 0.0}, (1, 1, 1, 2, 2), 0.95),
]


def test_criterion_3_sharp_constants(criterion):
    t0 = time.perf_counter()
    short, over = [], []
    notes = []
    for ineq, params, w, factor in SHARP_CASES:
        g = make_group(w)
        nm = QuasiNorm(g, "anisotropic")
        curve = sharpness_sweep(ineq, g, nm, params, [1e-1, 1e-2, 1e-3])
        target = target_constant(ineq, g.Q, params)
        if ineq == "HigherOrder":
            assert target == pytest.approx(4.0 / 15.0)
        q = curve.quotients[-1]
        tag = f"{ineq} Q={g.Q:g} {params}"
        notes.append(f"{tag} {q / target:.4f}")
        if not q >= factor * target:
            short.append(f"{tag}: ratio {q / target:.5f} < {factor}")
        if any(x > target * (1 + 1e-6) for x in curve.quotients):
            over.append(tag)
    seconds = time.perf_counter() - t0
    ok = not short and not over and seconds < 120
    criterion(3, ok, f"ratios [{'; '.join(notes)}], {seconds:.1f}s")
    assert not over, over
    assert seconds < 120
    assert not short, short


def test_criterion_4_even_odd_gate(criterion):
    bump = make_bump(0.5, 1.5)
    g6 = make_group((1, 1, 1, 1, 2))
    n6 = QuasiNorm(g6, "anisotropic")
    f6 = separable(bump, CoordinateTrace(0, 2), n6)
    accepted = [higher_order_report(g6, n6, f6, k, 0.0).inequality["holds"] for k in (1, 2)]
    with pytest.raises(DegenerateConstantError) as info:
        higher_order_report(g6, n6, f6, 3, 0.0)
    rejected = info.value.report is not None and info.value.report.passed
    g7 = make_group((1, 1, 1, 2, 2))
    n7 = QuasiNorm(g7, "anisotropic")
    f7 = separable(bump, CoordinateTrace(0, 2), n7)
    odd = [higher_order_report(g7, n7, f7, k, 0.0).inequality["holds"] for k in (1, 2, 3, 4)]
    ok = all(accepted) and rejected and all(odd)
    criterion(4, ok, f"Q=6 k=1,2 accepted, k=3 degenerate; Q=7 k<=4 {odd}")
    assert ok


def test_criterion_5_measure_consistency(criterion):
    rng = np.random.default_rng(2024)
    choices = [((1, 1, 1), "euclidean"), ((1, 1, 1), "anisotropic"), ((1, 1, 2), "koranyi"),
               ((1, 1, 2), "anisotropic"), ((1, 2), "anisotropic")]
    polar_err = 0.0
    for _ in range(10):
        w, kind = choices[rng.integers(len(choices))]
        g = make_group(w)
        nm = QuasiNorm(g, kind)
        a = rng.uniform(0.3, 1.0)
        prof = make_bump(a, a + rng.uniform(0.5, 1.5))
        u = CoordinateTrace(int(rng.integers(g.n)), 2 * int(rng.integers(0, 2)))
        f = separable(prof, u, nm)
        leb = integrate_lebesgue(f, f.support, SPEC, nm).value
        pol = polar_integrate(prof, u, g, nm, SPEC).value
        polar_err = max(polar_err, abs(pol - leb) / abs(pol))

    lam_err = 0.0
    for w, kind in (((1, 1, 1), "euclidean"), ((1, 1, 2), "koranyi"), ((1, 1, 2), "anisotropic"),
                    ((1, 1, 1, 2), "anisotropic")):
        g = make_group(w)
        nm = QuasiNorm(g, kind)
        u = lambda y: 1 + y[..., 0] ** 2 + 0.3 * y[..., -1]  # noqa: E731
        a = sphere_integrate(u, g, nm, SPEC, 2.0).value
        b = sphere_integrate(u, g, nm, SPEC, 4.0).value
        lam_err = max(lam_err, abs(a - b) / abs(a))

    nm = QuasiNorm(make_group((1, 1, 1)), "euclidean")
    area = sphere_integrate(lambda y: np.ones(len(y)), nm.group, nm, SPEC).value
    ok = polar_err < 1e-3 and lam_err < 1e-3 and abs(area - 4 * math.pi) < 1e-3
    criterion(5, ok, f"polar/Lebesgue {polar_err:.1e}, annulus {lam_err:.1e}, "
                     f"area-4pi {area - 4 * math.pi:.1e}")
    assert ok


def _fd_order(f, x, order, hs):
    exact = float(radial_derivative(f, x, 1, RadialMethod("analytic"))[0])
    err = [abs(float(radial_derivative(f, x, 1, RadialMethod("fd", h, order, False))[0]) - exact)
           for h in hs]
    return np.polyfit(np.log(hs), np.log(err), 1)[0]


def test_criterion_6_operator_fidelity(criterion):
    rng = np.random.default_rng(6)
    g = make_group((1, 1, 2))
    aniso, kor = QuasiNorm(g, "anisotropic"), QuasiNorm(g, "koranyi")
    x0 = g.dilate(0.8, np.array([[0.6, 0.3, 0.5]]) / float(aniso(np.array([0.6, 0.3, 0.5]))))
    step_grid = [1e-2, 5e-3, 2.5e-3]
    bump_f = separable(make_bump(0.5, 1.5), CoordinateTrace(0, 2), aniso)
    power_f = separable(PowerProfile(-1.5), CoordinateTrace(0, 2), aniso)
    slopes = {
        "bump o2": (_fd_order(bump_f, x0, 2, step_grid), 2),
        "bump o4": (_fd_order(bump_f, x0, 4, step_grid), 4),
        "power o6": (_fd_order(power_f, x0, 6, [4e-2, 2e-2, 1e-2]), 6),
    }
    fd_ok = all(abs(s - o) <= 0.2 for s, o in slopes.values())

    bump_g = general(bump_f, bump_f.support)
    x = rng.uniform(-0.5, 0.8, size=(50, 3))
    euler_gap = float(np.max(np.abs(euler_apply(bump_g, x, aniso) - euler_apply(bump_g, x, kor))))

    homogeneous = [
        (lambda z: z[..., 0] ** 2 + 3 * z[..., 2], 2.0),
        (lambda z: z[..., 0] * z[..., 1] * z[..., 2], 4.0),
        (lambda z: kor(z) ** -1.5 * (1 + z[..., 0] / kor(z)), -1.5),
    ]
    box = SupportBox((-1,) * 3, (1,) * 3)
    pts = rng.uniform(0.2, 1.0, size=(40, 3))
    hom_gap = 0.0
    for func, nu in homogeneous:
        f = general(func, box)
        fx = f(pts)
        hom_gap = max(hom_gap, float(np.max(np.abs(euler_apply(f, pts, aniso) - nu * fx))
                                     / np.max(np.abs(fx))))
    y = rng.normal(size=(30, 3))
    y = g.dilate(1.0 / aniso(y), y)
    xb = g.dilate(rng.uniform(0.6, 1.4, 30), y)
    fb = separable(make_bump(0.5, 1.5), CoordinateTrace(0, 1), aniso)
    bump_gap = min(float(np.max(np.abs(euler_apply(fb, xb) - nu * fb(xb))) / np.max(np.abs(fb(xb))))
                   for nu in (-2.0, 0.0, 1.0, 3.0))
    scale_gap = min(check_homogeneity(fb, nu, [(xi, 1.3) for xi in xb], g)
                    for nu in (-2.0, 0.0, 1.0, 3.0))
    ok = fd_ok and euler_gap < 1e-10 and hom_gap < 1e-10 and bump_gap > 0.1 and scale_gap > 0.1
    detail = ", ".join(f"{k} slope {s:.2f}" for k, (s, _) in slopes.items())
    criterion(6, ok, f"{detail}; Euler gauge gap {euler_gap:.1e}; homogeneous {hom_gap:.1e}; "
                     f"bump margin {bump_gap:.2f}")
    assert fd_ok, slopes
    assert euler_gap < 1e-10 and hom_gap < 1e-10
    assert bump_gap > 0.1 and scale_gap > 0.1
    assert DEFAULT_FD.mode == "fd"


def test_criterion_7_uncertainty_log_hardy(matrix, criterion):
    res, _ = matrix
    up = [e for e in res.jobs if e["identity"] == "Uncertainty"]
    slack = min(e["report"]["remainders"][0] for e in up)
    ps = sorted({e["params"]["p"] for e in up})

    g = make_group((1, 1, 1))
    nm = QuasiNorm(g, "euclidean")
    f = separable(make_bump(0.5, 1.5), CoordinateTrace(0, 2), nm)
    rep = uncertainty_report(g, nm, f, 2.0)
    sq, const = rep.terms["squared_quotient"], rep.terms["squared_constant"]

    ratios = []
    for p in (2.0, 3.0):
        lh = log_hardy_report(g, nm, f, p, [0.5, 1.0, 2.0])
        assert lh.inequality["constant"] == pytest.approx(p / (p - 1.0))
        ratios.append(lh.inequality["ratio"] if lh.inequality["holds"] else math.inf)
    ok = (all(e["pass"] for e in up) and slack >= 0 and ps == [1.5, 2.0, 3.0]
          and const == 0.25 and sq >= const and max(ratios) <= 1.0)
    criterion(7, ok, f"{len(up)} UP1 cases, min slack {slack:.3e}; abelian squared quotient "
                     f"{sq:.4f} >= {const}; log-Hardy worst ratio {max(ratios):.3f}")
    assert ok


def test_criterion_8_determinism(tmp_path, criterion, capsys):
    cfg = ROOT / "configs" / "example.json"
    outs = []
    for run in ("a", "b"):
        code = main(["all", str(cfg), "--out", str(tmp_path / run), "--format", "csv"])
        assert code == 0
        outs.append((tmp_path / run / "example.csv").read_bytes())
    capsys.readouterr()
    same = outs[0] == outs[1] and len(outs[0]) > 0
    criterion(8, same, f"{len(outs[0])} bytes identical across two runs")
    assert same
