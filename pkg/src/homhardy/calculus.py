"""Radial derivative along dilation orbits and the operators built from it.

For ``x != 0`` put ``phi_x(s) = f(D_{s/|x|} x)``.  Then ``R^k f(x) =
phi_x^(k)(|x|)``.  The finite-difference mode samples ``phi_x`` at
``s = |x|(1 + m h)``, i.e. at the dilates ``D_{1+mh} x``, so the stencil
points do not depend on which gauge is used, only the step in ``s`` does.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .group import QuasiNorm
from .testfuncs import (
    CapabilityError,
    GeneralFunction,
    SeparableFunction,
    WeightedProfile,
)

__all__ = [
    "RadialMethod",
    "ANALYTIC",
    "DEFAULT_FD",
    "fd_weights",
    "radial_derivative",
    "radial_jet",
    "euler_apply",
    "check_homogeneity",
    "commutation_residual",
]


@dataclass(frozen=True)
class RadialMethod:
    """``mode`` is ``"analytic"`` or ``"fd"``; the rest configures the stencil.

    ``h`` is the step relative to ``|x|`` for first derivatives; order ``k``
    uses ``h * 2**(k-1)``, which keeps rounding error in check for the
    higher derivatives and lets consecutive orders share evaluations.
    """

    mode: str = "fd"
    h: float = 1e-3
    order: int = 4
    richardson: bool = True

    def __post_init__(self):
        if self.mode not in ("analytic", "fd"):
            raise ValueError(f"unknown radial-derivative mode {self.mode!r}")
        if not self.h > 0:
            raise ValueError("step h must be positive")
        if self.order not in (2, 4, 6):
            raise ValueError("stencil order must be 2, 4 or 6")

    def step(self, k: int) -> float:
        return self.h * 2.0 ** (k - 1)


ANALYTIC = RadialMethod(mode="analytic")
DEFAULT_FD = RadialMethod()


@lru_cache(maxsize=None)
def fd_weights(k: int, order: int) -> tuple[np.ndarray, np.ndarray]:
    """Central-difference offsets and weights for the ``k``-th derivative.

    Solves the moment conditions ``sum_m c_m m**j = k! [j == k]`` on the
    smallest symmetric stencil of the requested accuracy.
    """
    npts = 2 * ((k + 1) // 2) - 1 + order
    M = (npts - 1) // 2
    m = np.arange(-M, M + 1, dtype=float)
    V = np.vander(m, npts, increasing=True).T
    rhs = np.zeros(npts)
    rhs[k] = math.factorial(k)
    c = np.linalg.solve(V, rhs)
    c[np.abs(c) < 1e-13 * np.max(np.abs(c))] = 0.0
    m.setflags(write=False)
    c.setflags(write=False)
    return m, c


def _group_of(f, norm):
    if norm is not None:
        return norm.group
    if isinstance(f, SeparableFunction):
        return f.norm.group
    raise ValueError("a quasi-norm is needed to follow dilation orbits")


def _support_or_none(f):
    try:
        return f.support
    except CapabilityError:
        return None


def _analytic_ok(f, norm):
    if not isinstance(f, SeparableFunction):
        raise CapabilityError("analytic radial derivatives need a separable function")
    if norm is not None and norm != f.norm:
        raise CapabilityError("analytic mode needs the gauge the function was split with")


def radial_jet(f, x, K: int, method: RadialMethod = DEFAULT_FD, norm: QuasiNorm | None = None):
    """Stack ``f, R f, ..., R^K f`` at the points ``x`` (shape ``(..., n)``)."""
    x = np.asarray(x, dtype=float)
    norm = norm if norm is not None else getattr(f, "norm", None)
    if norm is None:
        raise ValueError("a quasi-norm is needed to follow dilation orbits")
    r = norm(x)
    if np.any(r == 0):
        raise ValueError("the radial derivative is undefined at the origin")
    if method.mode == "analytic":
        _analytic_ok(f, norm)
        y = norm.group.dilate(1.0 / r, x)
        u = f.angular(y)
        return np.stack([f.profile.derivative(r, k) * u for k in range(K + 1)])

    group = norm.group
    cache: dict[float, np.ndarray] = {}

    def phi(lam):
        key = round(lam, 15)
        if key not in cache:
            cache[key] = np.asarray(f(x if key == 1.0 else group.dilate(lam, x)))
        return cache[key]

    rows = [phi(1.0)]
    for k in range(1, K + 1):
        rows.append(_fd_apply(phi, r, k, method))
    return np.stack(rows)


def _fd_apply(phi, r, k, method):
    offsets, coeffs = fd_weights(k, method.order)
    h = method.step(k)
    if h * offsets[-1] >= 1.0:
        raise ValueError("finite-difference step too large for the stencil")

    def D(step):
        acc = 0.0
        for m, c in zip(offsets, coeffs):
            if c != 0.0:
                acc = acc + c * phi(1.0 + m * step)
        return acc / (step * r) ** k

    if not method.richardson:
        return D(h)
    p = 2.0**method.order
    return (p * D(0.5 * h) - D(h)) / (p - 1.0)


def radial_derivative(f, x, k: int = 1, method: RadialMethod = DEFAULT_FD,
                      norm: QuasiNorm | None = None):
    """``(R^k f)(x)``."""
    if k < 1:
        raise ValueError("k must be >= 1")
    return radial_jet(f, x, k, method, norm)[k]


def euler_apply(f, x, norm: QuasiNorm | None = None, method: RadialMethod = DEFAULT_FD):
    """``|x| * (R f)(x)``; the gauge factors cancel."""
    norm = norm if norm is not None else getattr(f, "norm", None)
    if norm is None:
        raise ValueError("a quasi-norm is needed to follow dilation orbits")
    return norm(np.asarray(x, dtype=float)) * radial_derivative(f, x, 1, method, norm)


def check_homogeneity(f, nu: float, samples, group=None) -> float:
    """Largest relative defect of ``f(D_lam x) = lam**nu f(x)`` over ``samples``.

    ``samples`` is a sequence of ``(x, lam)`` pairs.  Denominators are floored
    at ``1e-12`` times the largest ``|f(x)|`` seen, so a vanishing ``f``
    reports zero.
    """
    samples = list(samples)
    if not samples:
        raise ValueError("need at least one (x, lam) sample")
    group = group if group is not None else _group_of(f, None)
    num, den = [], []
    for x, lam in samples:
        if lam <= 0:
            raise ValueError("dilation factor must be positive")
        x = np.asarray(x, dtype=float)
        fx = np.asarray(f(x))
        fl = np.asarray(f(group.dilate(lam, x)))
        num.append(np.abs(fl - lam**nu * fx).ravel())
        den.append(np.abs(fx).ravel())
    num = np.concatenate(num)
    den = np.concatenate(den)
    scale = float(np.max(den)) if den.size else 0.0
    floor = max(1e-12 * scale, 1e-300)
    return float(np.max(num / np.maximum(den, floor)))


def commutation_residual(f, alpha: float, x, norm: QuasiNorm | None = None,
                         method: RadialMethod = DEFAULT_FD):
    """``|x|**-a R f - [R(f / |x|**a) + a f / |x|**(a+1)]`` in absolute value."""
    norm = norm if norm is not None else getattr(f, "norm", None)
    x = np.asarray(x, dtype=float)
    r = norm(x)
    jet = radial_jet(f, x, 1, method, norm)
    if method.mode == "analytic":
        _analytic_ok(f, norm)
        h = SeparableFunction(WeightedProfile(f.profile, -alpha), f.angular, f.norm)
    else:
        h = GeneralFunction(lambda z: f(z) * norm(z) ** (-alpha), _support_or_none(f),
                            complex_valued=f.is_complex)
    rh = radial_derivative(h, x, 1, method, norm)
    lhs = r ** (-alpha) * jet[1]
    rhs = rh + alpha * jet[0] * r ** (-alpha - 1.0)
    return np.abs(lhs - rhs)
