"""Admissible test functions: radial profiles, angular parts, and their products.

A profile carries closed-form derivatives up to ``max_order``.  A separable
function ``f(x) = g(|x|) u(x/|x|)`` is bound to the gauge used to split it,
so ``f(D_r x) = g(r|x|) u(x/|x|)`` holds exactly.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from numpy.polynomial import Polynomial

from .group import QuasiNorm
from .quadrature import SupportBox

__all__ = [
    "CapabilityError",
    "RadialProfile",
    "SmoothBump",
    "PolyCutoff",
    "PlateauPower",
    "PowerProfile",
    "WeightedProfile",
    "DilatedProfile",
    "Constant",
    "CoordinateTrace",
    "ComplexAngular",
    "SeparableFunction",
    "GeneralFunction",
    "make_bump",
    "make_poly_cutoff",
    "make_extremizer",
    "make_plateau",
    "smootherstep",
    "separable",
    "general",
    "evaluate",
    "dilate_function",
]


class CapabilityError(ValueError):
    """Requested derivative order or evaluation mode is not available."""


def falling_factorial(x, k: int):
    out = 1.0
    for i in range(k):
        out = out * (x - i)
    return out


# d^k/dr^k = r**-k * D(D-1)...(D-k+1) with D = d/dt, t = ln r
def _log_chain_coeffs(k: int) -> np.ndarray:
    c = np.array([1.0])
    for i in range(k):
        c = np.convolve(c, [-float(i), 1.0])
    return c  # c[m] multiplies D**m


class RadialProfile:
    """Base for radial profiles ``g`` on ``(0, inf)``."""

    support: tuple[float, float] = (0.0, math.inf)
    max_order: int = 0
    breakpoints: tuple[float, ...] = ()
    compact: bool = True

    def derivative(self, r, k: int = 0) -> np.ndarray:
        raise NotImplementedError

    def __call__(self, r):
        return self.derivative(r, 0)

    def _check_order(self, k):
        if k < 0:
            raise ValueError("derivative order must be non-negative")
        if k > self.max_order:
            raise CapabilityError(
                f"{type(self).__name__} provides derivatives up to order {self.max_order}, "
                f"requested {k}"
            )

    def jet(self, r, order: int) -> np.ndarray:
        """Rows ``g, g', ..., g^(order)`` at ``r``."""
        return np.stack([self.derivative(r, k) for k in range(order + 1)])

    def describe(self) -> dict:
        return {"kind": type(self).__name__}


class SmoothBump(RadialProfile):
    """``exp(-1/((r-a)(b-r)))`` on ``(a, b)``, zero elsewhere.

    Derivatives come from ``g^(k) = g * P_k / q**(2k)`` with ``q = (r-a)(b-r)``
    and ``P_{k+1} = q' P_k + q**2 P_k' - 2k q q' P_k``; the polynomials are
    built once in the variable ``s = r - (a+b)/2`` to limit cancellation.
    """

    def __init__(self, a: float, b: float, max_order: int = 6):
        if not (0 < a < b) or not math.isfinite(b):
            raise ValueError(f"bump needs 0 < a < b, got a={a}, b={b}")
        self.a, self.b = float(a), float(b)
        self.support = (self.a, self.b)
        self.max_order = int(max_order)
        self._mid = 0.5 * (a + b)
        h = 0.5 * (b - a)
        q = Polynomial([h * h, 0.0, -1.0])
        dq = q.deriv()
        polys = [Polynomial([1.0])]
        for k in range(self.max_order):
            P = polys[-1]
            polys.append(dq * P + q * q * P.deriv() - 2 * k * q * dq * P)
        self._q = q
        self._polys = polys

    def derivative(self, r, k=0):
        self._check_order(k)
        r = np.asarray(r, dtype=float)
        out = np.zeros_like(r)
        inside = (r > self.a) & (r < self.b)
        s = r[inside] - self._mid
        q = self._q(s)
        with np.errstate(under="ignore"):
            out[inside] = np.exp(-1.0 / q - 2 * k * np.log(q)) * self._polys[k](s)
        return out

    def describe(self):
        return {"kind": "bump", "a": self.a, "b": self.b}


class PolyCutoff(RadialProfile):
    """``(q / q_max)**degree`` on ``(a, b)``; ``C^(degree-1)`` at the ends."""

    def __init__(self, a: float, b: float, degree: int = 8):
        if not (0 < a < b):
            raise ValueError(f"cutoff needs 0 < a < b, got a={a}, b={b}")
        if degree < 2:
            raise ValueError("degree must be at least 2")
        self.a, self.b, self.degree = float(a), float(b), int(degree)
        self.support = (self.a, self.b)
        self.max_order = self.degree - 1
        h = 0.5 * (b - a)
        self._mid = 0.5 * (a + b)
        base = Polynomial([1.0, 0.0, -1.0 / (h * h)])
        P = base**self.degree
        self._polys = [P]
        for _ in range(self.max_order):
            self._polys.append(self._polys[-1].deriv())

    def derivative(self, r, k=0):
        self._check_order(k)
        r = np.asarray(r, dtype=float)
        out = np.zeros_like(r)
        inside = (r > self.a) & (r < self.b)
        out[inside] = self._polys[k](r[inside] - self._mid)
        return out

    def describe(self):
        return {"kind": "poly", "a": self.a, "b": self.b, "degree": self.degree}


# degree-9 smoothstep: value 0 -> 1 with derivatives 1..4 vanishing at both ends
_SMOOTHSTEP = Polynomial([0, 0, 0, 0, 0, 126.0, -420.0, 540.0, -315.0, 70.0])
_SMOOTHSTEP_DERIVS = [_SMOOTHSTEP]
for _ in range(4):
    _SMOOTHSTEP_DERIVS.append(_SMOOTHSTEP_DERIVS[-1].deriv())


def smootherstep(t, k: int = 0):
    """Degree-9 smoothstep on [0, 1] (k-th derivative), clamped outside."""
    t = np.asarray(t, dtype=float)
    if k == 0:
        return np.where(t <= 0, 0.0, np.where(t >= 1, 1.0, _SMOOTHSTEP(np.clip(t, 0, 1))))
    inside = (t > 0) & (t < 1)
    return np.where(inside, _SMOOTHSTEP_DERIVS[k](np.clip(t, 0, 1)), 0.0)


class PlateauPower(RadialProfile):
    """``chi(r) * r**gamma`` with a plateau ``chi = 1`` on ``[a2, b1]``.

    ``chi`` rises on ``[a1, a2]`` and falls on ``[b1, b2]`` through a degree-9
    smoothstep in ``ln r``, so the profile is ``C^4`` and compactly supported
    away from the origin.  Between the cutoffs it is exactly homogeneous.
    """

    def __init__(self, gamma: float, inner: tuple[float, float], outer: tuple[float, float]):
        a1, a2 = map(float, inner)
        b1, b2 = map(float, outer)
        if not (0 < a1 < a2 <= b1 < b2) or not math.isfinite(b2):
            raise ValueError(
                f"cutoffs must satisfy 0 < a1 < a2 <= b1 < b2, got {inner}, {outer}"
            )
        self.gamma = float(gamma)
        self.inner = (a1, a2)
        self.outer = (b1, b2)
        self.support = (a1, b2)
        self.breakpoints = (a2, b1)
        self.max_order = 4
        self._la = (math.log(a1), math.log(a2) - math.log(a1))
        self._lb = (math.log(b1), math.log(b2) - math.log(b1))

    def _chi(self, t, j):
        ta, wa = self._la
        tb, wb = self._lb
        rise = smootherstep((t - ta) / wa, j) / wa**j
        # the smoothstep is symmetric, S(1-u) = 1 - S(u); this form avoids cancellation
        fall = (-1) ** j * smootherstep((tb + wb - t) / wb, j) / wb**j
        return np.where(t < tb, rise, fall)

    def derivative(self, r, k=0):
        self._check_order(k)
        r = np.asarray(r, dtype=float)
        out = np.zeros_like(r)
        inside = (r > self.support[0]) & (r < self.support[1])
        ri = r[inside]
        t = np.log(ri)
        g = self.gamma
        if k == 0:
            out[inside] = self._chi(t, 0) * np.power(ri, g)
            return out
        # H_m = e^{-gamma t} D^m (chi e^{gamma t}) = sum_j C(m,j) chi^(j) gamma^(m-j)
        chis = [self._chi(t, j) for j in range(k + 1)]
        coeffs = _log_chain_coeffs(k)
        acc = np.zeros_like(ri)
        for m in range(1, k + 1):
            Hm = sum(math.comb(m, j) * chis[j] * g ** (m - j) for j in range(m + 1))
            acc += coeffs[m] * Hm
        out[inside] = np.power(ri, g - k) * acc
        return out

    def describe(self):
        return {"kind": "plateau", "gamma": self.gamma, "inner": list(self.inner),
                "outer": list(self.outer)}


class PowerProfile(RadialProfile):
    """``r**gamma`` on ``(0, inf)``; homogeneous, not admissible for integration."""

    compact = False

    def __init__(self, gamma: float, max_order: int = 8):
        self.gamma = float(gamma)
        self.max_order = int(max_order)

    def derivative(self, r, k=0):
        self._check_order(k)
        r = np.asarray(r, dtype=float)
        return falling_factorial(self.gamma, k) * np.power(r, self.gamma - k)

    def describe(self):
        return {"kind": "power", "gamma": self.gamma}


class WeightedProfile(RadialProfile):
    """``g(r) * r**power`` with derivatives by the Leibniz rule."""

    def __init__(self, base: RadialProfile, power: float):
        self.base = base
        self.power = float(power)
        self.support = base.support
        self.breakpoints = base.breakpoints
        self.max_order = base.max_order
        self.compact = base.compact

    def derivative(self, r, k=0):
        self._check_order(k)
        r = np.asarray(r, dtype=float)
        out = np.zeros_like(r)
        a, b = self.support
        live = (r > 0) & (r >= a) & (r <= b)
        rl = r[live]
        acc = np.zeros_like(rl)
        for j in range(k + 1):
            acc += (math.comb(k, j) * falling_factorial(self.power, k - j)
                    * self.base.derivative(rl, j) * np.power(rl, self.power - (k - j)))
        out[live] = acc
        return out

    def describe(self):
        return {"kind": "weighted", "power": self.power, "base": self.base.describe()}


class DilatedProfile(RadialProfile):
    """``g(lam * r)``: the radial profile of ``f o D_lam``."""

    def __init__(self, base: RadialProfile, lam: float):
        if lam <= 0:
            raise ValueError("dilation factor must be positive")
        self.base = base
        self.lam = float(lam)
        a, b = base.support
        self.support = (a / lam, b / lam)
        self.breakpoints = tuple(t / lam for t in base.breakpoints)
        self.max_order = base.max_order
        self.compact = base.compact

    def derivative(self, r, k=0):
        self._check_order(k)
        return self.lam**k * self.base.derivative(self.lam * np.asarray(r, dtype=float), k)

    def describe(self):
        return {"kind": "dilated", "lam": self.lam, "base": self.base.describe()}


def make_bump(a: float, b: float) -> SmoothBump:
    return SmoothBump(a, b)


def make_poly_cutoff(a: float, b: float, degree: int = 8) -> PolyCutoff:
    return PolyCutoff(a, b, degree)


def make_plateau(gamma: float, inner, outer) -> PlateauPower:
    return PlateauPower(gamma, inner, outer)


def make_extremizer(Q: float, p: float, eps: float, cutoffs) -> PlateauPower:
    """Cut-off version of ``|x|**(-(Q-p)/p + eps)``, the Hardy near-extremiser."""
    if not 1 < p < Q:
        raise ValueError(f"need 1 < p < Q, got p={p}, Q={Q}")
    if eps < 0:
        raise ValueError("eps must be non-negative")
    inner, outer = cutoffs
    return PlateauPower(-(Q - p) / p + eps, inner, outer)


# ----------------------------------------------------------------------------
# angular parts, evaluated on points already projected to the unit sphere


@dataclass(frozen=True)
class Constant:
    value: complex = 1.0

    @property
    def is_complex(self):
        return isinstance(self.value, complex) and self.value.imag != 0

    def __call__(self, y):
        y = np.asarray(y)
        return np.full(y.shape[:-1], self.value, dtype=complex if self.is_complex else float)

    def describe(self):
        v = self.value
        return {"kind": "constant", "value": [v.real, v.imag] if isinstance(v, complex) else v}


@dataclass(frozen=True)
class CoordinateTrace:
    index: int = 0
    power: int = 1

    is_complex = False

    def __call__(self, y):
        return np.power(np.asarray(y)[..., self.index], self.power)

    def describe(self):
        return {"kind": "trace", "index": self.index, "power": self.power}


@dataclass(frozen=True)
class ComplexAngular:
    real: object
    imag: object

    is_complex = True

    def __call__(self, y):
        return self.real(y) + 1j * self.imag(y)

    def describe(self):
        return {"kind": "complex", "real": self.real.describe(), "imag": self.imag.describe()}


# ----------------------------------------------------------------------------
# test functions


@dataclass(frozen=True)
class SeparableFunction:
    """``f(x) = g(|x|) * u(x / |x|)`` for the bound gauge."""

    profile: RadialProfile
    angular: object
    norm: QuasiNorm

    @property
    def is_complex(self) -> bool:
        return bool(getattr(self.angular, "is_complex", False))

    @property
    def support(self) -> SupportBox:
        a, b = self.profile.support
        if not self.profile.compact:
            raise CapabilityError("profile has no compact support")
        return SupportBox.gauge_ball(self.norm, b, rho0=0.5 * a)

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        r = self.norm(x)
        a, b = self.profile.support
        live = (r > 0) & (r >= a) & (r <= b)
        dtype = complex if self.is_complex else float
        out = np.zeros(r.shape, dtype=dtype)
        if np.any(live):
            rl = r[live]
            y = self.norm.group.dilate(1.0 / rl, x[live])
            out[live] = self.profile(rl) * self.angular(y)
        return out

    def describe(self):
        return {"form": "separable", "profile": self.profile.describe(),
                "angular": self.angular.describe(), "norm": self.norm.describe()}


@dataclass(frozen=True)
class GeneralFunction:
    """Any pointwise function with a declared support box."""

    func: Callable
    box: SupportBox
    smooth: bool = True
    complex_valued: bool = False
    label: str = "general"

    @property
    def is_complex(self) -> bool:
        return self.complex_valued

    @property
    def support(self) -> SupportBox:
        return self.box

    def __call__(self, x):
        return self.func(np.asarray(x, dtype=float))

    def describe(self):
        return {"form": "general", "label": self.label}


def separable(profile, angular=None, norm=None) -> SeparableFunction:
    if norm is None:
        raise ValueError("a separable function needs its quasi-norm")
    return SeparableFunction(profile, Constant(1.0) if angular is None else angular, norm)


def general(func, box: SupportBox, smooth=True, complex_valued=False, label="general"):
    return GeneralFunction(func, box, smooth, complex_valued, label)


def evaluate(f, x):
    return f(x)


def dilate_function(f, lam: float, group=None):
    """``f o D_lam`` in the same representation as ``f``."""
    if isinstance(f, SeparableFunction):
        return SeparableFunction(DilatedProfile(f.profile, lam), f.angular, f.norm)
    if group is None:
        raise CapabilityError("dilating a general function needs its group")
    box = f.box.dilated(group, 1.0 / lam)
    return GeneralFunction(lambda x: f(group.dilate(lam, x)), box, f.smooth,
                           f.complex_valued, f"{f.label}@{lam}")
