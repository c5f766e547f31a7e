"""Rayleigh quotients and how close near-extremisers get to the sharp constants."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import minimize, minimize_scalar

from .calculus import DEFAULT_FD
from .group import DilationGroup, QuasiNorm
from .identities import (
    DomainError,
    hardy_constant,
    higher_order_constant,
    rellich_constant,
    weighted_constant,
)
from .quadrature import QuadratureSpec
from .sampling import build_sample
from .testfuncs import CapabilityError, Constant, PlateauPower, SeparableFunction, SmoothBump

__all__ = [
    "INEQUALITIES",
    "ZeroFunctionError",
    "SharpnessCurve",
    "target_constant",
    "extremal_exponent",
    "plateau_family",
    "rayleigh_quotient",
    "sharpness_sweep",
    "optimize_constant",
    "FAMILIES",
]

INEQUALITIES = ("Hardy", "Weighted", "Rellich", "HigherOrder")


class ZeroFunctionError(ValueError):
    """The quotient's denominator vanishes."""


def _p(params):
    return float(params.get("p", 2.0))


def target_constant(inequality: str, Q: float, params: dict) -> float:
    if inequality == "Hardy":
        return hardy_constant(Q, _p(params))
    if inequality == "Weighted":
        return weighted_constant(Q, float(params.get("alpha", 0.0)))
    if inequality == "Rellich":
        return rellich_constant(Q)
    if inequality == "HigherOrder":
        return higher_order_constant(Q, int(params["k"]), float(params.get("alpha", 0.0)))
    raise ValueError(f"unknown inequality {inequality!r}; expected one of {INEQUALITIES}")


def extremal_exponent(inequality: str, Q: float, params: dict) -> float:
    """Degree of the homogeneous function the quotient is maximised along."""
    if inequality == "Hardy":
        p = _p(params)
        return -(Q - p) / p + float(params.get("eps", 0.0))
    if inequality == "Weighted":
        return float(params.get("alpha", 0.0)) + 1.0 - Q / 2.0
    if inequality == "Rellich":
        return -(Q - 4.0) / 2.0
    if inequality == "HigherOrder":
        return int(params["k"]) - Q / 2.0 + float(params.get("alpha", 0.0))
    raise ValueError(f"unknown inequality {inequality!r}")


def _order(inequality, params):
    return {"Hardy": 1, "Weighted": 1, "Rellich": 2}.get(inequality) or int(params["k"])


def _norms(inequality, s, params):
    """``(numerator, denominator)`` of the quotient on a radial sample."""
    r = s.r
    if inequality == "Hardy":
        p = _p(params)
        num = s.integral(np.abs(s.d(0) / r) ** p, p) ** (1 / p)
        den = s.integral(np.abs(s.d(1)) ** p, p) ** (1 / p)
    elif inequality == "Weighted":
        a = float(params.get("alpha", 0.0))
        num = math.sqrt(s.integral(np.abs(s.d(0) * r ** (-a - 1.0)) ** 2))
        den = math.sqrt(s.integral(np.abs(r ** (-a) * s.d(1)) ** 2))
    elif inequality == "Rellich":
        Q = s.Q
        num = math.sqrt(s.integral(np.abs(s.d(0) / r**2) ** 2))
        den = math.sqrt(s.integral(np.abs(s.d(2) + (Q - 1.0) * s.d(1) / r) ** 2))
    else:
        k = int(params["k"])
        a = float(params.get("alpha", 0.0))
        num = math.sqrt(s.integral(np.abs(s.d(0) * r ** (-(k + a))) ** 2))
        den = math.sqrt(s.integral(np.abs(r ** (-a) * s.d(k)) ** 2))
    return num, den


def _check_range(inequality, Q, params):
    if inequality == "Hardy":
        p = _p(params)
        if not 1 < p < Q:
            raise DomainError(f"Hardy quotient needs 1 < p < Q, got p={p}, Q={Q}")
    elif inequality == "Rellich" and Q < 5:
        raise DomainError(f"Rellich quotient needs Q >= 5, got Q={Q}")
    elif inequality in ("Weighted", "HigherOrder") and Q < 3:
        raise DomainError(f"needs Q >= 3, got Q={Q}")


def rayleigh_quotient(inequality: str, group: DilationGroup, norm: QuasiNorm, f, params: dict,
                      spec: QuadratureSpec = QuadratureSpec(), path: str = "auto",
                      method=DEFAULT_FD) -> float:
    """Left norm over right norm of the inequality, e.g. ``||f/|x|||_p / ||R f||_p``."""
    if inequality not in INEQUALITIES:
        raise ValueError(f"unknown inequality {inequality!r}; expected one of {INEQUALITIES}")
    _check_range(inequality, group.Q, params)
    order = _order(inequality, params)
    s = build_sample(f, norm, spec, order, path, method)
    num, den = _norms(inequality, s, params)
    if not den > 0:
        raise ZeroFunctionError("quotient undefined: the right-hand norm vanishes")
    return num / den


# ---------------------------------------------------------------------------
# plateau family


def plateau_family(gamma: float, delta: float, ramp: float) -> PlateauPower:
    """``r**gamma`` on a plateau inside ``[delta, 1/delta]``.

    ``ramp`` is the fraction of ``ln(1/delta)`` spent by each cutoff, so the
    inner cutoff runs over ``[delta, delta**(1-ramp)]``.  A ramp of
    ``ln 2 / ln(1/delta)`` gives the cutoffs ``[delta, 2 delta]`` and
    ``[1/(2 delta), 1/delta]``.
    """
    if not 0 < delta < 1:
        raise ValueError("delta must lie in (0, 1)")
    if not 0 < ramp <= 1:
        raise ValueError("ramp fraction must lie in (0, 1]")
    L = math.log(1.0 / delta)
    a2 = math.exp(-L * (1.0 - ramp))
    return PlateauPower(gamma, (delta, a2), (1.0 / a2, 1.0 / delta))


def _plateau_quotient(inequality, group, norm, params, spec, gamma, delta, ramp):
    f = SeparableFunction(plateau_family(gamma, delta, ramp), Constant(1.0), norm)
    return rayleigh_quotient(inequality, group, norm, f, params, spec, path="separable")


@dataclass
class SharpnessCurve:
    inequality: str
    params: dict
    deltas: list
    quotients: list
    target: float
    ramps: list = field(default_factory=list)
    reliable: list = field(default_factory=list)
    tol: float = 1e-7

    @property
    def gaps(self) -> list:
        return [self.target - q for q in self.quotients]

    @property
    def best_gap(self) -> float:
        return self.target - max(self.quotients)

    @property
    def ratios(self) -> list:
        return [q / self.target for q in self.quotients]

    @property
    def monotone(self) -> bool:
        """Quotients nondecreasing as delta shrinks, within tolerance."""
        q = self.quotients
        return all(b >= a - self.tol * self.target for a, b in zip(q, q[1:]))

    @property
    def below_target(self) -> bool:
        return all(q <= self.target * (1.0 + self.tol) for q in self.quotients)

    def to_dict(self) -> dict:
        return {
            "inequality": self.inequality,
            "params": dict(self.params),
            "deltas": list(self.deltas),
            "ramps": list(self.ramps),
            "quotients": list(self.quotients),
            "ratios": self.ratios,
            "target": self.target,
            "gaps": self.gaps,
            "best_gap": self.best_gap,
            "monotone": self.monotone,
            "below_target": self.below_target,
            "reliable": list(self.reliable),
        }


def sharpness_sweep(inequality: str, group: DilationGroup, norm: QuasiNorm, params: dict,
                    deltas, spec: QuadratureSpec = QuadratureSpec(), ramp="auto") -> SharpnessCurve:
    """Quotient on the plateau family for each ``delta`` (decreasing).

    With ``ramp="auto"`` the cutoff width is chosen per ``delta`` to maximise
    the quotient; a number fixes it.  A point whose value moves by more than
    the tolerance under a coarser rule is marked unreliable.
    """
    deltas = [float(d) for d in deltas]
    if not deltas or any(not 0 < d < 0.5 for d in deltas):
        raise ValueError("every delta must lie in (0, 0.5)")
    if any(b >= a for a, b in zip(deltas, deltas[1:])):
        raise ValueError("delta list must be strictly decreasing")
    Q = group.Q
    target = target_constant(inequality, Q, params)
    gamma = extremal_exponent(inequality, Q, params)
    tol = 10.0 * spec.target_tol
    coarse = spec.coarser()
    quotients, ramps, reliable = [], [], []
    for d in deltas:
        try:
            if ramp == "auto":
                res = minimize_scalar(
                    lambda w: -_plateau_quotient(inequality, group, norm, params, spec,
                                                 gamma, d, w),
                    bounds=(0.02, 0.98), method="bounded", options={"xatol": 1e-4})
                w = float(res.x)
            else:
                w = float(ramp)
            q = _plateau_quotient(inequality, group, norm, params, spec, gamma, d, w)
            qc = _plateau_quotient(inequality, group, norm, params, coarse, gamma, d, w)
            ok = math.isfinite(q) and abs(q - qc) <= tol * abs(q)
        except (FloatingPointError, ZeroDivisionError, ValueError) as exc:
            if isinstance(exc, (DomainError, CapabilityError)):
                raise
            q, w, ok = math.nan, math.nan, False
        quotients.append(float(q))
        ramps.append(w)
        reliable.append(bool(ok))
    return SharpnessCurve(inequality, dict(params), deltas, quotients, target, ramps, reliable,
                          tol)


# ---------------------------------------------------------------------------
# simplex search


def _bump_family(theta):
    a, width = theta
    return SmoothBump(a, a + width)


def _plateau_params_family(gamma):
    def build(theta):
        log_delta, ramp = theta
        return plateau_family(gamma, math.exp(log_delta), ramp)
    return build


FAMILIES = {
    "bump": {"bounds": [(0.05, 5.0), (0.05, 20.0)], "start": [0.5, 1.0]},
    "plateau": {"bounds": [(math.log(1e-3), math.log(0.4)), (0.02, 0.98)],
                "start": [math.log(1e-2), 0.3]},
}

_PENALTY = 1e300


def optimize_constant(inequality: str, group: DilationGroup, norm: QuasiNorm, params: dict,
                      family="bump", spec: QuadratureSpec = QuadratureSpec(), bounds=None,
                      start=None, maxiter: int = 200, xatol: float = 1e-6):
    """Nelder-Mead maximisation of the quotient over a profile family.

    ``family`` is ``"bump"``, ``"plateau"`` or a callable mapping a parameter
    vector (at most four entries) to a radial profile.  Returns
    ``(best_quotient, best_params)``; points where the quotient is not finite
    are rejected by a penalty and the search carries on.
    """
    Q = group.Q
    if isinstance(family, str):
        if family not in FAMILIES:
            raise ValueError(f"unknown family {family!r}")
        bounds = FAMILIES[family]["bounds"] if bounds is None else bounds
        start = FAMILIES[family]["start"] if start is None else start
        build = (_bump_family if family == "bump"
                 else _plateau_params_family(extremal_exponent(inequality, Q, params)))
    else:
        build = family
    start = np.asarray([] if start is None else start, dtype=float)
    if len(start) > 4:
        raise ValueError("families may have at most four shape parameters")

    def quotient(theta):
        f = SeparableFunction(build(theta), Constant(1.0), norm)
        return rayleigh_quotient(inequality, group, norm, f, params, spec, path="separable")

    if len(start) == 0:
        return quotient(start), start

    def objective(theta):
        try:
            q = quotient(theta)
        except (ValueError, FloatingPointError, ZeroDivisionError) as exc:
            if isinstance(exc, DomainError):
                raise
            return _PENALTY
        return -q if math.isfinite(q) else _PENALTY

    res = minimize(objective, start, method="Nelder-Mead", bounds=bounds,
                   options={"maxiter": maxiter, "xatol": xatol, "fatol": 1e-14})
    best = np.asarray(res.x, dtype=float)
    f0 = objective(start)
    if f0 < res.fun:
        best, val = start, f0
    else:
        val = res.fun
    if val >= _PENALTY:
        raise ValueError("no admissible point found in the family")
    return -float(val), best
