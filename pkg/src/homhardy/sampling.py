"""Radial jets of a test function on quadrature nodes.

Every identity in the suite integrates pointwise expressions in
``|x|, f, R f, ..., R^k f``.  A ``RadialSample`` holds those values on a
quadrature rule so each reporter is a few weighted sums.

Two routes build a sample:

* separable: ``f = g(|x|) u(x/|x|)`` reduces every integrand that is
  homogeneous of degree ``p`` in the jet to ``(int_sphere |u|^p) * (radial
  integral of g's jet)``.  Only a 1D rule is needed; the sphere factor is
  computed once per power and is common to all terms of one identity.
* general: cubature in exponential coordinates with the finite-difference
  radial operator at every node.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache
from typing import Callable

import numpy as np

from .calculus import DEFAULT_FD, RadialMethod, radial_jet
from .group import DilationGroup, QuasiNorm
from .quadrature import QuadratureSpec, _scheme, cubature_rule, radial_rule, sphere_integrate
from .testfuncs import CapabilityError, Constant, SeparableFunction

CHUNK = 1 << 14

__all__ = ["RadialSample", "separable_sample", "general_sample", "build_sample",
           "sphere_moment"]


@dataclass
class RadialSample:
    """Jet values ``derivs[j] = R^j f`` with radii ``r`` and weights ``weight``."""

    r: np.ndarray
    weight: np.ndarray
    derivs: np.ndarray
    Q: float
    path: str
    moment: Callable[[float], float] = field(repr=False)
    is_complex: bool = False
    coarse: "RadialSample | None" = field(default=None, repr=False)

    @property
    def order(self) -> int:
        return self.derivs.shape[0] - 1

    def d(self, j: int) -> np.ndarray:
        if j > self.order:
            raise CapabilityError(f"sample carries derivatives up to {self.order}, need {j}")
        return self.derivs[j]

    def integral(self, values, power: float = 2.0) -> float:
        """Integrate a density homogeneous of degree ``power`` in the jet."""
        total = np.sum(self.weight * np.real(values))
        return float(total) * self.moment(power)

    def integral_complex(self, values, power: float = 2.0) -> complex:
        return complex(np.sum(self.weight * values)) * self.moment(power)


@lru_cache(maxsize=512)
def sphere_moment(group: DilationGroup, norm: QuasiNorm, angular, power: float,
                  spec: QuadratureSpec) -> float:
    """``int_sphere |u|^power dsigma``."""
    if isinstance(angular, Constant):
        return abs(angular.value) ** power * sphere_moment(group, norm, None, 1.0, spec)
    if angular is None:
        val = sphere_integrate(lambda y: np.ones(len(y)), group, norm, spec).value
    else:
        val = sphere_integrate(lambda y: np.abs(angular(y)) ** power, group, norm, spec).value
    return float(np.real(val))


def separable_sample(f: SeparableFunction, spec: QuadratureSpec, order: int,
                     breakpoints=(), with_coarse: bool = True) -> RadialSample:
    group = f.norm.group
    a, b = f.profile.support
    if not (a > 0 and np.isfinite(b)):
        raise CapabilityError("separable sampling needs a profile supported in (0, inf)")
    if order > f.profile.max_order:
        raise CapabilityError(
            f"profile provides derivatives up to {f.profile.max_order}, need {order}")
    breaks = tuple(f.profile.breakpoints) + tuple(breakpoints)
    r, w = radial_rule(a, b, spec, breaks)
    Q = group.Q
    jet = f.profile.jet(r, order)
    moment = _moment_fn(group, f.norm, f.angular, spec)
    coarse = None
    if with_coarse:
        coarse = separable_sample(f, spec.coarser(), order, breakpoints, with_coarse=False)
    return RadialSample(r, w * r ** (Q - 1), jet, Q, "separable", moment,
                        f.is_complex, coarse)


def _moment_fn(group, norm, angular, spec):
    def moment(power):
        return sphere_moment(group, norm, angular, float(power), spec)
    return moment


def general_sample(f, norm: QuasiNorm, spec: QuadratureSpec, order: int,
                   method: RadialMethod = DEFAULT_FD) -> RadialSample:
    if method.mode != "fd":
        raise CapabilityError("the general path uses the finite-difference operator")
    box = f.support
    Q = norm.group.Q

    def sample(x, w):
        r = norm(x)
        keep = r > 0
        x, w, r = x[keep], w[keep], r[keep]
        # chunks keep the stencil's working set in cache
        jet = np.concatenate(
            [radial_jet(f, x[i:i + CHUNK], order, method, norm) for i in range(0, len(x), CHUNK)],
            axis=1) if len(x) else np.zeros((order + 1, 0))
        return RadialSample(r, w, jet, Q, "general", _unit_moment, f.is_complex)

    x, w = cubature_rule(box, spec, norm)
    fine = sample(x, w)
    if _scheme(box.n, spec, norm) == "qmc":
        # the leading half of a Sobol sequence is itself balanced
        h = len(fine.weight) // 2
        fine.coarse = RadialSample(fine.r[:h], 2.0 * fine.weight[:h], fine.derivs[:, :h], Q,
                                   "general", _unit_moment, f.is_complex)
    else:
        fine.coarse = sample(*cubature_rule(box, spec, norm, coarse=True))
    return fine


def _unit_moment(power):
    return 1.0


def build_sample(f, norm: QuasiNorm, spec: QuadratureSpec, order: int, path: str = "auto",
                 method: RadialMethod = DEFAULT_FD, breakpoints=()) -> RadialSample:
    """Pick the separable route when ``f`` was split with ``norm``."""
    if path == "auto":
        path = "separable" if isinstance(f, SeparableFunction) and f.norm == norm else "general"
    if path == "separable":
        if not isinstance(f, SeparableFunction) or f.norm != norm:
            raise CapabilityError("the separable path needs a function split with this gauge")
        return separable_sample(f, spec, order, breakpoints)
    if path == "general":
        return general_sample(f, norm, spec, order, method)
    raise ValueError(f"unknown evaluation path {path!r}")
