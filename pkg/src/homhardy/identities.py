"""Reporters for the Hardy, Rellich and higher-order identities.

Each reporter evaluates every named term of one identity on a
``RadialSample``, compares the two sides, and records the remainder terms
whose nonnegativity gives the corresponding inequality.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.special import roots_jacobi

from .calculus import DEFAULT_FD, RadialMethod
from .group import DilationGroup, QuasiNorm
from .quadrature import QuadratureSpec, gauss_legendre, radial_rule
from .sampling import RadialSample, build_sample, sphere_moment
from .testfuncs import CapabilityError, SeparableFunction

__all__ = [
    "DomainError",
    "DegenerateConstantError",
    "IdentityReport",
    "i_p_weight",
    "lp_remainder_density",
    "hardy_lp_report",
    "hardy_l2_report",
    "weighted_l2_report",
    "rellich_report",
    "higher_order_report",
    "uncertainty_report",
    "log_hardy_report",
    "ibp_report",
    "complex_reduction_check",
    "higher_order_constant",
    "weighted_constant",
    "rellich_constant",
    "hardy_constant",
    "IDENTITY_IDS",
]

IDENTITY_IDS = ("HardyLp", "HardyL2", "WeightedL2", "Rellich", "HigherOrder",
                "Uncertainty", "LogHardy", "IbpFormula", "ComplexReduction")

FLOOR = 1e-30


class DomainError(ValueError):
    """Parameters outside the range where the identity is stated."""


class DegenerateConstantError(ValueError):
    """The inequality constant is undefined; ``report`` still holds the identity check."""

    def __init__(self, message, report=None):
        super().__init__(message)
        self.report = report


@dataclass
class IdentityReport:
    identity: str
    params: dict
    terms: dict
    lhs: float
    rhs: float
    abs_residual: float
    rel_residual: float
    remainders: list
    passed: bool
    quad_error: float | None
    tolerance: float
    path: str = "separable"
    inequality: dict | None = None

    def to_dict(self) -> dict:
        return {
            "identity": self.identity,
            "params": dict(self.params),
            "terms": {k: _plain(v) for k, v in self.terms.items()},
            "lhs": self.lhs,
            "rhs": self.rhs,
            "abs_residual": self.abs_residual,
            "rel_residual": self.rel_residual,
            "remainders": list(self.remainders),
            "pass": self.passed,
            "quad_error": self.quad_error,
            "tolerance": self.tolerance,
            "path": self.path,
            "inequality": self.inequality,
        }


def _plain(v):
    if isinstance(v, complex):
        return [v.real, v.imag]
    return float(v)


def _tolerance(spec: QuadratureSpec, path: str) -> float:
    return 10.0 * (spec.target_tol if path == "separable" else spec.general_tol)


def _finish(identity, params, terms, lhs, rhs, remainders, tol, path,
            coarse_terms=None, inequality=None, residual_kind="identity"):
    scale = max(abs(lhs), abs(rhs), FLOOR)
    if residual_kind == "identity":
        abs_res = abs(lhs - rhs)
    else:
        # one-sided: only a violation of lhs >= rhs counts
        abs_res = max(0.0, rhs - lhs)
    rel_res = abs_res / scale
    quad_error = None
    if coarse_terms is not None:
        # relative to the largest term, since lhs and rhs may be differences
        big = max([abs(v) for v in terms.values()] + [FLOOR])
        quad_error = max(
            (abs(terms[k] - coarse_terms[k]) for k in terms if k in coarse_terms), default=0.0
        ) / big
    ok = rel_res < tol and all(rem >= -10.0 * tol for rem in remainders)
    if inequality is not None:
        ok = ok and inequality["holds"]
    return IdentityReport(identity, params, terms, float(lhs), float(rhs), float(abs_res),
                          float(rel_res), [float(x) for x in remainders], bool(ok),
                          None if quad_error is None else float(quad_error), tol, path,
                          inequality)


def _inequality(constant, small, big, tol):
    """Record ``small <= constant * big`` (norms, not powers)."""
    bound = constant * big
    holds = small <= bound * (1.0 + tol) + FLOOR
    return {"constant": constant, "lhs": float(small), "rhs": float(bound),
            "ratio": float(small / bound) if bound > 0 else None, "holds": bool(holds)}


def _sample_for(f, norm, spec, order, path, method, sample):
    if sample is not None:
        if sample.order < order:
            raise CapabilityError(f"sample carries order {sample.order}, need {order}")
        return sample
    return build_sample(f, norm, spec, order, path, method)


def _run(term_fn, sample, *args):
    terms = term_fn(sample, *args)
    coarse = term_fn(sample.coarse, *args) if sample.coarse is not None else None
    return terms, coarse


# ---------------------------------------------------------------------------
# constants


def hardy_constant(Q: float, p: float) -> float:
    if not 1 < p < Q:
        raise DomainError(f"Hardy inequality needs 1 < p < Q, got p={p}, Q={Q}")
    return p / (Q - p)


def weighted_constant(Q: float, alpha: float) -> float:
    d = abs(Q - 2.0 - 2.0 * alpha)
    if d < 1e-12:
        raise DegenerateConstantError(f"Q - 2 - 2*alpha = 0 for Q={Q}, alpha={alpha}")
    return 2.0 / d


def rellich_constant(Q: float) -> float:
    if Q < 5:
        raise DomainError(f"Rellich inequality needs Q >= 5, got Q={Q}")
    return 4.0 / (Q * (Q - 4.0))


def higher_order_constant(Q: float, k: int, alpha: float) -> float:
    """``[prod_j |(Q-2)/2 - (alpha+j)|]^-1`` with the even/odd-Q gate at ``alpha = 0``."""
    if alpha == 0 and float(Q).is_integer() and int(Q) % 2 == 0 and not k < Q / 2:
        raise DegenerateConstantError(
            f"even Q={Q:g} with alpha=0 needs k < Q/2, got k={k}")
    prod = math.prod(abs((Q - 2.0) / 2.0 - (alpha + j)) for j in range(k))
    if prod < 1e-12:
        raise DegenerateConstantError(
            f"product of |(Q-2)/2 - (alpha+j)| vanishes for Q={Q:g}, k={k}, alpha={alpha:g}")
    return 1.0 / prod


# ---------------------------------------------------------------------------
# I_p


_JACOBI_NODES = 6
_GL_NODES = 32


def _jacobi_rule(beta: float):
    x, w = roots_jacobi(_JACOBI_NODES, 0.0, beta)
    # map to tau in [0, 1] with weight tau**beta
    return 0.5 * (1.0 + x), w * 0.5 ** (beta + 1.0)


def _oriented_piece(c, B, p, tau, wt):
    """``int_c^B |xi - c|**(p-2) xi dxi`` (oriented), exact for the linear factor."""
    L = B - c
    inner = np.sum(wt * (c[..., None] + L[..., None] * tau), axis=-1)
    with np.errstate(invalid="ignore", divide="ignore"):
        out = L * np.abs(L) ** (p - 2.0) * inner
    return np.where(L == 0, 0.0, out)


def i_p_weight(h, g, p: float):
    """``(p-1) int_0^1 |xi h + (1-xi) g|**(p-2) xi dxi`` for real ``h, g``.

    The integrand is ``|d|**(p-2) |xi - c|**(p-2) xi`` with ``d = h - g`` and
    root ``c = -g/d``.  When the root is near ``[0, 1]`` the integral is split
    at it and each piece uses Gauss-Jacobi weights for the power singularity;
    otherwise the integrand is smooth and Gauss-Legendre suffices.
    """
    if p <= 1:
        raise DomainError("I_p needs p > 1")
    if p == 2:
        return np.full(np.broadcast(np.asarray(h), np.asarray(g)).shape, 0.5)[()]
    h = np.asarray(h)
    g = np.asarray(g)
    if np.iscomplexobj(h) or np.iscomplexobj(g):
        if np.any(np.imag(h)) or np.any(np.imag(g)):
            raise CapabilityError("I_p for p != 2 is defined here for real arguments only")
        h, g = np.real(h), np.real(g)
    h, g = np.broadcast_arrays(h.astype(float), g.astype(float))
    shape = h.shape
    h, g = h.ravel(), g.ravel()
    d = h - g
    out = np.empty_like(h)

    flat = d == 0
    with np.errstate(divide="ignore"):
        out[flat] = 0.5 * np.abs(g[flat]) ** (p - 2.0)

    nz = ~flat
    c = np.zeros_like(h)
    c[nz] = -g[nz] / d[nz]
    near = nz & (c >= -0.5) & (c <= 1.5)
    if np.any(near):
        tau, wt = _jacobi_rule(p - 2.0)
        cn = c[near]
        val = (_oriented_piece(cn, np.ones_like(cn), p, tau, wt)
               - _oriented_piece(cn, np.zeros_like(cn), p, tau, wt))
        out[near] = np.abs(d[near]) ** (p - 2.0) * val
    far = nz & ~near
    if np.any(far):
        xi, w = gauss_legendre(0.0, 1.0, _GL_NODES)
        seg = np.abs(xi[None, :] * h[far, None] + (1.0 - xi[None, :]) * g[far, None])
        out[far] = np.sum(w * seg ** (p - 2.0) * xi, axis=-1)
    return ((p - 1.0) * out).reshape(shape)[()]


def lp_remainder_density(v, u, p: float):
    """``p * I_p(v, u) * |v - u|**2``, zero where ``v == u``."""
    v = np.asarray(v)
    u = np.asarray(u)
    diff2 = np.abs(v - u) ** 2
    same = diff2 == 0
    vv = np.where(same, 1.0, v)
    uu = np.where(same, 0.0, u)
    dens = p * i_p_weight(vv, uu, p) * diff2
    return np.where(same, 0.0, dens)


# ---------------------------------------------------------------------------
# reporters


def _hardy_lp_terms(s: RadialSample, p):
    Q = s.Q
    c = p / (Q - p)
    f, Rf, r = s.d(0), s.d(1), s.r
    u = -c * Rf
    v = f / r
    if s.is_complex and p == 2:
        dens = np.abs(v - u) ** 2
    else:
        dens = lp_remainder_density(np.real(v), np.real(u), p)
    return {
        "norm_u_p": s.integral(np.abs(u) ** p, p),
        "norm_v_p": s.integral(np.abs(v) ** p, p),
        "remainder": s.integral(dens, p),
        "norm_Rf_p": s.integral(np.abs(Rf) ** p, p),
    }


def hardy_lp_report(group: DilationGroup, norm: QuasiNorm, f, p: float,
                    spec: QuadratureSpec = QuadratureSpec(), path: str = "auto",
                    method: RadialMethod = DEFAULT_FD, sample: RadialSample | None = None):
    """``||u||_p^p - ||v||_p^p = p int I_p(v, u)|v - u|^2`` with
    ``u = -(p/(Q-p)) R f`` and ``v = f/|x|``, plus the Hardy inequality."""
    Q = group.Q
    C = hardy_constant(Q, p)
    if getattr(f, "is_complex", False) and p != 2:
        raise CapabilityError(
            "the L^p remainder identity is stated for real f; use p = 2 or the reduction check")
    s = _sample_for(f, norm, spec, 1, path, method, sample)
    terms, coarse = _run(_hardy_lp_terms, s, p)
    tol = _tolerance(spec, s.path)
    lhs = terms["norm_u_p"] - terms["norm_v_p"]
    ineq = _inequality(C, terms["norm_v_p"] ** (1 / p), terms["norm_Rf_p"] ** (1 / p), tol)
    return _finish("HardyLp", {"p": p, "Q": Q}, terms, lhs, terms["remainder"],
                   [terms["remainder"]], tol, s.path, coarse, ineq)


def _weighted_terms(s: RadialSample, alpha):
    Q = s.Q
    f, Rf, r = s.d(0), s.d(1), s.r
    ra = r ** (-alpha)
    w1 = f * r ** (-alpha - 1.0)
    return {
        "weighted_Rf": s.integral(np.abs(ra * Rf) ** 2),
        "weighted_f": s.integral(np.abs(w1) ** 2),
        "remainder": s.integral(np.abs(ra * Rf + 0.5 * (Q - 2.0 - 2.0 * alpha) * w1) ** 2),
    }


def _weighted(identity, group, norm, f, alpha, spec, path, method, sample, check_inequality):
    Q = group.Q
    if Q < 3:
        raise DomainError(f"needs Q >= 3, got Q={Q}")
    s = _sample_for(f, norm, spec, 1, path, method, sample)
    terms, coarse = _run(_weighted_terms, s, alpha)
    tol = _tolerance(spec, s.path)
    coef = ((Q - 2.0) / 2.0 - alpha) ** 2
    rhs = coef * terms["weighted_f"] + terms["remainder"]
    params = {"alpha": alpha, "Q": Q} if identity == "WeightedL2" else {"Q": Q}
    ineq = None
    degenerate = None
    if check_inequality:
        try:
            C = weighted_constant(Q, alpha)
            ineq = _inequality(C, math.sqrt(terms["weighted_f"]),
                               math.sqrt(terms["weighted_Rf"]), tol)
        except DegenerateConstantError as exc:
            degenerate = exc
    rep = _finish(identity, params, terms, terms["weighted_Rf"], rhs, [terms["remainder"]],
                  tol, s.path, coarse, ineq)
    if degenerate is not None:
        raise DegenerateConstantError(str(degenerate), rep)
    return rep


def hardy_l2_report(group, norm, f, spec=QuadratureSpec(), path="auto", method=DEFAULT_FD,
                    sample=None):
    """``||R f||^2 = ((Q-2)/2)^2 ||f/|x|||^2 + ||R f + (Q-2)/2 f/|x|||^2``."""
    return _weighted("HardyL2", group, norm, f, 0.0, spec, path, method, sample, True)


def weighted_l2_report(group, norm, f, alpha: float, spec=QuadratureSpec(), path="auto",
                       method=DEFAULT_FD, sample=None, check_inequality: bool = True):
    """Weighted identity for ``|x|^-alpha R f``; raises ``DegenerateConstantError``
    (carrying the verified report) when ``Q - 2 - 2 alpha = 0`` and the
    inequality is requested."""
    return _weighted("WeightedL2", group, norm, f, alpha, spec, path, method, sample,
                     check_inequality)


def _rellich_terms(s: RadialSample):
    Q = s.Q
    f, Rf, R2f, r = s.d(0), s.d(1), s.d(2), s.r
    K = Q * (Q - 4.0) / 4.0
    L = R2f + (Q - 1.0) * Rf / r
    return {
        "first_remainder": s.integral(np.abs(L + K * f / r**2) ** 2),
        "second_remainder": s.integral(np.abs(Rf / r + 0.5 * (Q - 4.0) * f / r**2) ** 2),
        "operator_norm": s.integral(np.abs(L) ** 2),
        "weighted_f": s.integral(np.abs(f / r**2) ** 2),
    }


def rellich_report(group, norm, f, spec=QuadratureSpec(), path="auto", method=DEFAULT_FD,
                   sample=None):
    Q = group.Q
    C = rellich_constant(Q)
    s = _sample_for(f, norm, spec, 2, path, method, sample)
    terms, coarse = _run(_rellich_terms, s)
    tol = _tolerance(spec, s.path)
    K = Q * (Q - 4.0) / 4.0
    lhs = terms["first_remainder"] + 2.0 * K * terms["second_remainder"]
    rhs = terms["operator_norm"] - K**2 * terms["weighted_f"]
    ineq = _inequality(C, math.sqrt(terms["weighted_f"]), math.sqrt(terms["operator_norm"]), tol)
    return _finish("Rellich", {"Q": Q}, terms, lhs, rhs,
                   [terms["first_remainder"], terms["second_remainder"]], tol, s.path,
                   coarse, ineq)


def _higher_terms(s: RadialSample, k, alpha):
    Q = s.Q
    r = s.r
    terms = {
        "main": s.integral(np.abs(r ** (-alpha) * s.d(k)) ** 2),
        "weighted_f": s.integral(np.abs(s.d(0) * r ** (-(k + alpha))) ** 2),
    }
    for l in range(1, k):
        e = l + alpha
        expr = r ** (-e) * s.d(k - l) + 0.5 * (Q - 2.0 * (l + 1 + alpha)) * r ** (-e - 1.0) * s.d(k - l - 1)
        terms[f"remainder_{l}"] = s.integral(np.abs(expr) ** 2)
    expr = r ** (-alpha) * s.d(k) + 0.5 * (Q - 2.0 - 2.0 * alpha) * r ** (-1.0 - alpha) * s.d(k - 1)
    terms["final_remainder"] = s.integral(np.abs(expr) ** 2)
    return terms


def _coef_sq(Q, alpha, m):
    return math.prod(((Q - 2.0) / 2.0 - (alpha + j)) ** 2 for j in range(m))


def higher_order_report(group, norm, f, k: int, alpha: float, spec=QuadratureSpec(),
                        path="auto", method=DEFAULT_FD, sample=None,
                        check_inequality: bool = True):
    """Iterated weighted identity of order ``k``.

    Raises ``DegenerateConstantError`` (with the verified identity attached)
    when the inequality is requested but its constant is undefined.
    """
    Q = group.Q
    if Q < 3:
        raise DomainError(f"needs Q >= 3, got Q={Q}")
    if k < 1:
        raise DomainError("k must be a positive integer")
    s = _sample_for(f, norm, spec, k, path, method, sample)
    terms, coarse = _run(_higher_terms, s, k, alpha)
    tol = _tolerance(spec, s.path)
    rhs = _coef_sq(Q, alpha, k) * terms["weighted_f"] + terms["final_remainder"]
    remainders = []
    for l in range(1, k):
        weighted = _coef_sq(Q, alpha, l) * terms[f"remainder_{l}"]
        rhs += weighted
        remainders.append(weighted)
    remainders.append(terms["final_remainder"])
    ineq = None
    degenerate = None
    if check_inequality:
        try:
            C = higher_order_constant(Q, k, alpha)
            ineq = _inequality(C, math.sqrt(terms["weighted_f"]), math.sqrt(terms["main"]), tol)
        except DegenerateConstantError as exc:
            degenerate = exc
    rep = _finish("HigherOrder", {"k": k, "alpha": alpha, "Q": Q}, terms, terms["main"], rhs,
                  remainders, tol, s.path, coarse, ineq)
    if degenerate is not None:
        raise DegenerateConstantError(str(degenerate), rep)
    return rep


def _ibp_terms(s: RadialSample, p):
    Q = s.Q
    f, Rf, r = s.d(0), s.d(1), s.r
    af = np.abs(f)
    live = af > 1e-280
    phase = np.divide(f, af, out=np.zeros_like(f), where=live)
    # |f|^(p-2) f written as |f|^(p-1) * phase so p < 2 stays finite at zeros
    cross = af ** (p - 1.0) * phase * np.conj(Rf) / r ** (p - 1.0)
    return {
        "weighted_f_p": s.integral(af**p / r**p, p),
        "cross": s.integral(np.real(cross), p),
    }


def ibp_report(group, norm, f, p: float, spec=QuadratureSpec(), path="auto",
               method=DEFAULT_FD, sample=None):
    """``int |f|^p/|x|^p = -(p/(Q-p)) Re int |f|^(p-2) f conj(R f) / |x|^(p-1)``."""
    Q = group.Q
    C = hardy_constant(Q, p)
    s = _sample_for(f, norm, spec, 1, path, method, sample)
    terms, coarse = _run(_ibp_terms, s, p)
    tol = _tolerance(spec, s.path)
    rhs = -C * terms["cross"]
    return _finish("IbpFormula", {"p": p, "Q": Q}, terms, terms["weighted_f_p"], rhs, [], tol,
                   s.path, coarse)


def _uncertainty_terms(s: RadialSample, p):
    q = p / (p - 1.0)
    f, Rf, r = s.d(0), s.d(1), s.r
    return {
        "Rf_p": s.integral(np.abs(Rf) ** p, p),
        "xf_q": s.integral(r**q * np.abs(f) ** q, q),
        "f_2": s.integral(np.abs(f) ** 2, 2.0),
    }


def uncertainty_report(group, norm, f, p: float, spec=QuadratureSpec(), path="auto",
                       method=DEFAULT_FD, sample=None):
    """``(int|R f|^p)^(1/p) (int |x|^q |f|^q)^(1/q) >= ((Q-p)/p) int |f|^2``.

    ``remainders`` holds the slack.  For ``p = 2`` the terms also give the
    squared quotient ``int|R f|^2 int|x|^2|f|^2 / (int|f|^2)^2``, bounded below
    by ``((Q-2)/2)^2``.
    """
    Q = group.Q
    if not 1 < p < Q:
        raise DomainError(f"needs 1 < p < Q, got p={p}, Q={Q}")
    q = p / (p - 1.0)
    s = _sample_for(f, norm, spec, 1, path, method, sample)
    terms, coarse = _run(_uncertainty_terms, s, p)
    tol = _tolerance(spec, s.path)

    def sides(t):
        return t["Rf_p"] ** (1 / p) * t["xf_q"] ** (1 / q), (Q - p) / p * t["f_2"]

    lhs, rhs = sides(terms)
    terms = dict(terms, product=lhs, bound=rhs)
    if coarse is not None:
        cl, cr = sides(coarse)
        coarse = dict(coarse, product=cl, bound=cr)
    if p == 2 and terms["f_2"] > 0:
        terms["squared_quotient"] = terms["Rf_p"] * terms["xf_q"] / terms["f_2"] ** 2
        terms["squared_constant"] = ((Q - 2.0) / 2.0) ** 2
    return _finish("Uncertainty", {"p": p, "q": q, "Q": Q}, terms, lhs, rhs, [lhs - rhs], tol,
                   s.path, coarse, residual_kind="inequality")


def log_hardy_report(group, norm, f: SeparableFunction, p: float, R_list,
                     spec=QuadratureSpec()):
    """Logarithmic Hardy inequality at each ``R`` in ``R_list``.

    With ``f_R(x) = f(D_{R/|x|} x) = g(R) u(x/|x|)`` the difference ``f - f_R``
    equals ``-g(R) u`` outside the profile support; that tail is integrated
    in closed form in ``ln r``.  Inside, the radial rule is split at ``r = R``
    where ``(g(r) - g(R)) / log(R/r)`` has a removable singularity.
    """
    if p <= 1:
        raise DomainError("needs p > 1")
    R_list = [float(R) for R in R_list]
    if not R_list or any(R <= 0 for R in R_list):
        raise ValueError("R values must be positive")
    if not isinstance(f, SeparableFunction) or f.norm != norm:
        raise CapabilityError("the log-Hardy reporter uses the separable path")
    Q = group.Q
    prof = f.profile
    a, b = prof.support
    moment = sphere_moment(group, norm, f.angular, float(p), spec)
    tol = _tolerance(spec, "separable")
    r, w = radial_rule(a, b, spec, prof.breakpoints)
    gp = prof.derivative(r, 1)
    rhs_p = moment * float(np.sum(w * np.abs(gp) ** p * r ** (p - 1.0)))
    rhs = p / (p - 1.0) * rhs_p ** (1 / p)
    terms = {"rhs_norm_p": rhs_p}
    ratios = []
    per_R = []
    for R in R_list:
        gR = float(prof(np.array([R]))[0])
        lo, hi = min(a, R), max(b, R)
        rr, ww = radial_rule(lo, hi, spec, tuple(prof.breakpoints) + (R, a, b))
        with np.errstate(divide="ignore", invalid="ignore"):
            dens = np.abs(prof(rr) - gR) ** p / (rr * np.abs(np.log(R / rr)) ** p)
        inner = float(np.sum(ww * dens))
        tail = 0.0
        if gR != 0.0:
            # int_0^lo and int_hi^inf of |g(R)|^p / (r |ln(R/r)|^p) dr
            tail = abs(gR) ** p * (math.log(R / lo) ** (1 - p) + math.log(hi / R) ** (1 - p)) / (p - 1.0)
        lhs_p = moment * (inner + tail)
        lhs = lhs_p ** (1 / p)
        terms[f"lhs_norm_p@{R:g}"] = lhs_p
        ratios.append(lhs / rhs if rhs > 0 else 0.0)
        per_R.append(lhs)
    worst = int(np.argmax(ratios))
    lhs = per_R[worst]
    ineq = {"constant": p / (p - 1.0), "lhs": lhs, "rhs": rhs, "ratio": ratios[worst],
            "holds": bool(all(x <= 1.0 + tol for x in ratios)), "R": R_list[worst],
            "ratios": ratios}
    return _finish("LogHardy", {"p": p, "R_list": R_list, "Q": Q}, terms, rhs, lhs,
                   [rhs - lhs], tol, "separable", None, ineq, residual_kind="inequality")


# ---------------------------------------------------------------------------
# |z|^p via the angular average


def _power_cos_integral(A: float, B: float, p: float, nodes: int = 24) -> float:
    """``int_{-pi}^{pi} |A cos t + B sin t|^p dt`` split at the zeros of the
    trigonometric factor, each piece with Gauss-Jacobi weights at zero ends."""
    rho = math.hypot(A, B)
    if rho == 0:
        return 0.0
    phi = math.atan2(B, A)
    z0 = phi + math.pi / 2
    zeros = sorted({((z0 + k * math.pi + math.pi) % (2 * math.pi)) - math.pi for k in (0, 1)})
    edges = [-math.pi] + [z for z in zeros if -math.pi < z < math.pi] + [math.pi]
    total = 0.0
    for lo, hi in zip(edges[:-1], edges[1:]):
        if hi - lo < 1e-15:
            continue
        left = any(abs(lo - z) < 1e-14 for z in zeros) or abs(math.cos(lo - phi)) < 1e-14
        right = any(abs(hi - z) < 1e-14 for z in zeros) or abs(math.cos(hi - phi)) < 1e-14
        ea, eb = (p if right else 0.0), (p if left else 0.0)
        x, w = roots_jacobi(nodes, ea, eb)
        half = 0.5 * (hi - lo)
        t = 0.5 * (hi + lo) + half * x
        s = np.abs(np.cos(t - phi))
        # divide out the endpoint zeros that the Jacobi weight carries
        den = np.ones_like(t)
        if left:
            den *= ((t - lo) / (2 * half)) ** p
        if right:
            den *= ((hi - t) / (2 * half)) ** p
        vals = s**p / den
        total += half * float(np.sum(w * vals)) * 0.5 ** (ea + eb)
    return rho**p * total


def complex_reduction_check(z: complex, p: float) -> dict:
    """Residual of ``|z|^p = int|Re z cos + Im z sin|^p / int|cos|^p``."""
    if p < 1:
        raise DomainError("needs p >= 1")
    z = complex(z)
    lhs = abs(z) ** p
    num = _power_cos_integral(z.real, z.imag, p)
    den = _power_cos_integral(1.0, 0.0, p)
    rhs = num / den
    return {"identity": "ComplexReduction", "z": [z.real, z.imag], "p": p, "lhs": lhs,
            "rhs": rhs, "abs_residual": abs(lhs - rhs),
            "rel_residual": abs(lhs - rhs) / max(lhs, rhs, FLOOR)}
