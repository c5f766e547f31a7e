"""Integration on a homogeneous group.

Haar measure is Lebesgue measure in exponential coordinates.  In low
dimension box cubature does the work.  Every dilation orbit crosses the
Euclidean unit sphere exactly once (the same holds for any centred
ellipsoid), so ``x = D_rho(omega)`` is a global chart of ``G \\ {0}`` with

    dx = rho**(Q-1) <A omega, omega> drho dS(omega),    A = diag(weights),

where ``dS`` is Euclidean surface measure.  Writing ``rho = s / |omega|``
with ``s`` the gauge radius turns this into a product rule: a 1D rule in
``s`` times a rule on the unit sphere.  This "orbit rule" is the cubature for
``n >= 4`` and the way annulus integrals are evaluated, since the annulus
``1 <= |x| <= L`` becomes ``1 <= s <= L`` on every orbit.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from functools import lru_cache

import numpy as np
from scipy.special import roots_jacobi
from scipy.stats import qmc

from .group import DilationGroup, QuasiNorm

__all__ = [
    "IntegrationError",
    "QuadratureSpec",
    "SupportBox",
    "Integral",
    "gauss_legendre",
    "radial_rule",
    "radial_integrate",
    "cubature_rule",
    "euclidean_sphere_rule",
    "gauge_sphere_rule",
    "orbit_rule",
    "integrate_lebesgue",
    "haar_scaling_residual",
    "sphere_integrate",
    "polar_integrate",
    "MAX_DIM",
]

MAX_DIM = 6
SCHEMES = ("auto", "tensor", "orbit", "qmc")


class IntegrationError(RuntimeError):
    pass


@dataclass(frozen=True)
class QuadratureSpec:
    radial_order: int = 16
    radial_panels: int = 32
    cubature_points_per_dim: int = 96
    annulus_lambda: float = 2.0
    mc_samples: int = 2**16
    target_tol: float = 1e-8
    general_tol: float = 1e-4
    seed: int = 0
    sphere_order: int = 24
    orbit_order: int = 8
    orbit_radial: int = 64
    scheme: str = "auto"

    def __post_init__(self):
        if self.radial_order < 4:
            raise ValueError("radial_order must be >= 4")
        if self.radial_panels < 1:
            raise ValueError("radial_panels must be >= 1")
        if self.cubature_points_per_dim < 4:
            raise ValueError("cubature_points_per_dim must be >= 4")
        if not 1.0 < self.annulus_lambda <= 8.0:
            raise ValueError("annulus_lambda must lie in (1, 8]")
        if self.mc_samples < 2 or self.mc_samples & (self.mc_samples - 1):
            raise ValueError("mc_samples must be a power of two")
        if not (self.target_tol > 0 and self.general_tol > 0):
            raise ValueError("tolerances must be positive")
        if self.sphere_order < 2 or self.orbit_order < 2 or self.orbit_radial < 4:
            raise ValueError("sphere and orbit rules need at least a few nodes")
        if self.scheme not in SCHEMES:
            raise ValueError(f"scheme must be one of {SCHEMES}")

    def coarser(self) -> "QuadratureSpec":
        return replace(
            self,
            radial_panels=max(1, self.radial_panels // 2),
            cubature_points_per_dim=max(4, (2 * self.cubature_points_per_dim) // 3),
            mc_samples=max(2, self.mc_samples // 2),
            sphere_order=max(2, (2 * self.sphere_order) // 3),
            orbit_order=max(2, (2 * self.orbit_order) // 3),
            orbit_radial=max(4, (2 * self.orbit_radial) // 3),
        )


@dataclass(frozen=True)
class SupportBox:
    """Axis-aligned box with an optional excluded gauge ball ``|x| < rho0``.

    ``rho1``, when set, promises that the integrand vanishes for ``|x| > rho1``
    so radial rules need not reach the box corners.
    """

    lower: tuple[float, ...]
    upper: tuple[float, ...]
    rho0: float = 0.0
    rho1: float | None = None

    def __post_init__(self):
        lo = tuple(float(v) for v in self.lower)
        hi = tuple(float(v) for v in self.upper)
        if len(lo) != len(hi):
            raise ValueError("box bounds have different lengths")
        if any(a >= b for a, b in zip(lo, hi)):
            raise ValueError("box needs lower < upper in every coordinate")
        if self.rho0 < 0:
            raise ValueError("rho0 must be non-negative")
        if self.rho1 is not None and not self.rho1 > self.rho0:
            raise ValueError("rho1 must exceed rho0")
        object.__setattr__(self, "lower", lo)
        object.__setattr__(self, "upper", hi)

    @property
    def n(self) -> int:
        return len(self.lower)

    @property
    def volume(self) -> float:
        return math.prod(b - a for a, b in zip(self.lower, self.upper))

    @classmethod
    def symmetric(cls, half_widths, rho0=0.0) -> "SupportBox":
        h = np.asarray(half_widths, dtype=float)
        return cls(tuple(-h), tuple(h), rho0)

    @classmethod
    def gauge_ball(cls, norm: QuasiNorm, radius: float, rho0=0.0) -> "SupportBox":
        h = np.asarray(norm.coordinate_bounds(radius), dtype=float)
        return cls(tuple(-h), tuple(h), rho0, float(radius))

    def dilated(self, group: DilationGroup, lam: float) -> "SupportBox":
        lo, hi = group.scale_box(lam, self.lower, self.upper)
        rho1 = None if self.rho1 is None else self.rho1 * lam
        return SupportBox(tuple(lo), tuple(hi), self.rho0 * lam, rho1)

    def hull(self, other: "SupportBox") -> "SupportBox":
        lo = np.minimum(self.lower, other.lower)
        hi = np.maximum(self.upper, other.upper)
        rho1 = None
        if self.rho1 is not None and other.rho1 is not None:
            rho1 = max(self.rho1, other.rho1)
        return SupportBox(tuple(lo), tuple(hi), min(self.rho0, other.rho0), rho1)


@dataclass(frozen=True)
class Integral:
    value: complex
    error: float
    nodes: int = 0

    def __float__(self):
        return float(np.real(self.value))


@lru_cache(maxsize=64)
def _leggauss(m: int):
    x, w = np.polynomial.legendre.leggauss(m)
    x.setflags(write=False)
    w.setflags(write=False)
    return x, w


def gauss_legendre(a: float, b: float, m: int):
    """``m``-point Gauss-Legendre nodes and weights on ``[a, b]``."""
    x, w = _leggauss(m)
    half = 0.5 * (b - a)
    return 0.5 * (a + b) + half * x, half * w


def _panel_edges(a, b, panels, breakpoints=(), geometric=None):
    if geometric is None:
        geometric = a > 0 and b / a > 4.0
    if geometric:
        edges = np.geomspace(a, b, panels + 1)
    else:
        edges = np.linspace(a, b, panels + 1)
    extra = [float(t) for t in breakpoints if a < t < b]
    if extra:
        edges = np.unique(np.concatenate([edges, extra]))
        # drop slivers left next to inserted breakpoints
        keep = np.concatenate([[True], np.diff(edges) > 1e-12 * (b - a)])
        edges = edges[keep]
        edges[-1] = b
    return edges


def radial_rule(a: float, b: float, spec: QuadratureSpec, breakpoints=(), geometric=None):
    """Composite Gauss-Legendre rule on ``[a, b]``.

    Panels are geometric when ``b/a`` is large so that scale-invariant
    integrands get the same resolution on every decade.
    """
    if not b > a:
        raise ValueError("radial interval needs a < b")
    edges = _panel_edges(a, b, spec.radial_panels, breakpoints, geometric)
    xs, ws = [], []
    for lo, hi in zip(edges[:-1], edges[1:]):
        x, w = gauss_legendre(lo, hi, spec.radial_order)
        xs.append(x)
        ws.append(w)
    return np.concatenate(xs), np.concatenate(ws)


def radial_integrate(func, a, b, spec: QuadratureSpec, breakpoints=()) -> Integral:
    """1D integral with an error estimate from halving the panel count."""
    x, w = radial_rule(a, b, spec, breakpoints)
    fine = _checked_sum(func(x), w, x)
    xc, wc = radial_rule(a, b, spec.coarser(), breakpoints)
    coarse = _checked_sum(func(xc), wc, xc)
    return Integral(fine, float(abs(fine - coarse)), len(x))


def _checked_sum(values, weights, nodes):
    values = np.asarray(values)
    bad = ~np.isfinite(values)
    if np.any(bad):
        i = int(np.flatnonzero(bad.reshape(len(weights), -1).any(axis=-1))[0])
        raise IntegrationError(f"non-finite integrand at node {np.asarray(nodes)[i]!r}")
    return np.sum(weights * values)


def _tensor_rule(box: SupportBox, m: int):
    axes = [gauss_legendre(a, b, m) for a, b in zip(box.lower, box.upper)]
    grids = np.meshgrid(*[ax[0] for ax in axes], indexing="ij")
    wgrids = np.meshgrid(*[ax[1] for ax in axes], indexing="ij")
    x = np.stack([g.ravel() for g in grids], axis=-1)
    w = np.prod(np.stack([g.ravel() for g in wgrids], axis=-1), axis=-1)
    return x, w


def _sobol_rule(box: SupportBox, m: int, seed: int):
    sampler = qmc.Sobol(d=box.n, scramble=True, seed=seed)
    u = sampler.random_base2(int(round(math.log2(m))))
    lo = np.asarray(box.lower)
    hi = np.asarray(box.upper)
    x = lo + u * (hi - lo)
    w = np.full(len(x), box.volume / len(x))
    return x, w


@lru_cache(maxsize=64)
def euclidean_sphere_rule(n: int, m: int):
    """Product Gauss rule on the unit sphere of ``R^n``.

    Hyperspherical recursion ``omega = (t, sqrt(1-t^2) xi)`` with
    ``dS_n = (1-t^2)**((n-3)/2) dt dS_{n-1}``; the ``t`` rule is Gauss-Jacobi
    with that weight and the circle uses ``2m`` equispaced angles.  Exact for
    polynomials of degree ``<= 2m - 1``.
    """
    if n < 1:
        raise ValueError("sphere dimension must be positive")
    if n == 1:
        pts, wts = np.array([[1.0], [-1.0]]), np.array([1.0, 1.0])
    elif n == 2:
        phi = (np.arange(2 * m) + 0.5) * (math.pi / m)
        pts = np.stack([np.cos(phi), np.sin(phi)], axis=-1)
        wts = np.full(2 * m, math.pi / m)
    else:
        sub, subw = euclidean_sphere_rule(n - 1, m)
        a = 0.5 * (n - 3)
        t, wt = roots_jacobi(m, a, a)
        c = np.sqrt(np.clip(1.0 - t * t, 0.0, None))
        pts = np.concatenate(
            [t.repeat(len(sub))[:, None], (c[:, None, None] * sub[None]).reshape(-1, n - 1)],
            axis=-1)
        wts = (wt[:, None] * subw[None]).ravel()
    pts.setflags(write=False)
    wts.setflags(write=False)
    return pts, wts


@lru_cache(maxsize=64)
def gauge_sphere_rule(norm: QuasiNorm, m: int):
    """Nodes ``y`` on ``{|y| = 1}`` and weights for ``sigma``.

    The chart is the ellipsoid ``S omega`` with ``S`` the half-widths of the
    unit gauge ball, which keeps ``|S omega|`` close to 1.  Then
    ``y = D_{1/|S omega|} S omega`` and
    ``dsigma = det(S) <A omega, omega> |S omega|**-Q dS(omega)``.
    """
    group = norm.group
    omega, w = euclidean_sphere_rule(group.n, m)
    scale = np.asarray(norm.coordinate_bounds(1.0), dtype=float)
    z = omega * scale
    r = norm(z)
    y = group.dilate(1.0 / r, z)
    jac = (np.prod(scale) * np.sum(group.weight_array * omega * omega, axis=-1)
           * r ** (-group.Q))
    wy = w * jac
    y.setflags(write=False)
    wy.setflags(write=False)
    return y, wy


def orbit_rule(norm: QuasiNorm, s_lo: float, s_hi: float, spec: QuadratureSpec,
               breakpoints=(), coarse: bool = False):
    """Nodes and weights for ``int_{s_lo <= |x| <= s_hi} F dx``."""
    if coarse:
        spec = spec.coarser()
    group = norm.group
    y, wy = gauge_sphere_rule(norm, spec.orbit_order)
    panels = max(1, spec.orbit_radial // spec.radial_order)
    rs, ws = radial_rule(s_lo, s_hi, replace(spec, radial_panels=panels), breakpoints,
                         geometric=False)
    x = group.dilate(np.repeat(rs, len(y)), np.tile(y, (len(rs), 1)))
    w = np.outer(ws * rs ** (group.Q - 1.0), wy).ravel()
    return x, w


def _scheme(box_n: int, spec: QuadratureSpec, norm) -> str:
    if spec.scheme != "auto":
        return spec.scheme
    if box_n <= 3:
        return "tensor"
    return "orbit" if norm is not None else "qmc"


def cubature_rule(box: SupportBox, spec: QuadratureSpec, norm: QuasiNorm | None = None,
                  coarse: bool = False):
    """Nodes and weights for ``box``; nodes inside the excluded ball are dropped.

    Tensor Gauss-Legendre for ``n <= 3``.  For ``4 <= n <= 6`` the orbit rule
    when a quasi-norm is at hand, else scrambled Sobol points with a fixed
    seed.  ``spec.scheme`` overrides the choice.
    """
    if box.n > MAX_DIM:
        raise ValueError(f"dimension {box.n} exceeds the supported maximum {MAX_DIM}")
    scheme = _scheme(box.n, spec, norm)
    if scheme == "orbit":
        if norm is None:
            raise ValueError("the orbit rule needs a quasi-norm")
        corners = np.array(np.meshgrid(*zip(box.lower, box.upper), indexing="ij"))
        s_hi = float(np.max(norm(corners.reshape(box.n, -1).T)))
        if box.rho1 is not None:
            s_hi = min(s_hi, box.rho1)
        x, w = orbit_rule(norm, box.rho0, s_hi, spec, coarse=coarse)
        inside = np.all((x >= np.asarray(box.lower)) & (x <= np.asarray(box.upper)), axis=-1)
        return x[inside], w[inside]
    if coarse:
        spec = spec.coarser()
    if scheme == "tensor":
        x, w = _tensor_rule(box, spec.cubature_points_per_dim)
    else:
        x, w = _sobol_rule(box, spec.mc_samples, spec.seed)
    if box.rho0 > 0:
        if norm is None:
            raise ValueError("an excluded ball needs a quasi-norm")
        keep = norm(x) >= box.rho0
        x, w = x[keep], w[keep]
    return x, w


def integrate_lebesgue(F, box: SupportBox, spec: QuadratureSpec,
                       norm: QuasiNorm | None = None) -> Integral:
    """Integrate the pointwise function ``F`` over ``box`` minus the excluded ball."""
    x, w = cubature_rule(box, spec, norm)
    fine = _checked_sum(F(x), w, x)
    if _scheme(box.n, spec, norm) == "qmc":
        # the first half of a Sobol sequence is itself a balanced point set
        half = len(w) // 2
        coarse = _checked_sum(F(x[:half]), 2.0 * w[:half], x[:half])
    else:
        xc, wc = cubature_rule(box, spec, norm, coarse=True)
        coarse = _checked_sum(F(xc), wc, xc)
    err = float(abs(fine - coarse))
    if np.iscomplexobj(fine) and np.imag(fine) == 0:
        fine = float(np.real(fine))
    return Integral(fine, err, len(w))


def haar_scaling_residual(F, lam: float, box: SupportBox, spec: QuadratureSpec,
                          group: DilationGroup, norm: QuasiNorm | None = None):
    """``|int F(D_lam x) dx - lam**-Q int F dx| / |int F dx|``.

    The reference integral runs over ``box`` and the scaled one over its
    preimage ``D_{1/lam} box`` with one more node per axis (or a different
    Sobol seed), so the two rules never coincide up to dilation.  Returns
    ``(residual, flagged)``; ``flagged`` marks a reference integral that
    vanishes relative to ``int |F|``, in which case the residual is absolute.
    """
    if lam <= 0:
        raise ValueError("dilation factor must be positive")
    if lam == 1.0:
        return 0.0, False
    other = replace(spec, cubature_points_per_dim=spec.cubature_points_per_dim + 1,
                    orbit_order=spec.orbit_order + 1, seed=spec.seed + 1)
    ref = integrate_lebesgue(F, box, spec, norm).value
    scaled = integrate_lebesgue(lambda x: F(group.dilate(lam, x)), box.dilated(group, 1.0 / lam),
                                other, norm).value
    diff = abs(scaled - lam ** (-group.Q) * ref)
    mass = integrate_lebesgue(lambda x: np.abs(F(x)), box, spec, norm).value
    if abs(ref) <= 1e-12 * abs(mass):
        return float(diff), True
    return float(diff / abs(ref)), False


def sphere_integrate(u, group: DilationGroup, norm: QuasiNorm, spec: QuadratureSpec,
                     annulus_lambda: float | None = None) -> Integral:
    """``int_sphere u dsigma`` by annulus reduction.

    The annulus integral ``int_{1 <= |x| <= L} u(x/|x|) |x|**-Q dx`` equals
    ``ln L * int u dsigma``.  It is evaluated with the orbit rule, on which
    the integrand factors into ``1/s`` on ``[1, L]`` times ``u`` on the
    sphere nodes.
    """
    lam = spec.annulus_lambda if annulus_lambda is None else float(annulus_lambda)
    if not lam > 1.0:
        raise ValueError("annulus_lambda must exceed 1")
    if norm.group != group:
        raise ValueError("quasi-norm belongs to a different group")

    def annulus(m):
        y, wy = gauge_sphere_rule(norm, m)
        s, ws = radial_rule(1.0, lam, spec)
        radial = float(np.sum(ws * s ** (group.Q - 1.0) * s ** (-group.Q)))
        return radial * _checked_sum(np.asarray(u(y)), wy, y)

    lnl = math.log(lam)
    val = annulus(spec.sphere_order) / lnl
    coarse = annulus(max(2, (2 * spec.sphere_order) // 3)) / lnl
    err = float(abs(val - coarse))
    if np.iscomplexobj(val) and np.imag(val) == 0:
        val = float(np.real(val))
    return Integral(val, err, len(gauge_sphere_rule(norm, spec.sphere_order)[1]))


def polar_integrate(g, u, group: DilationGroup, norm: QuasiNorm, spec: QuadratureSpec,
                    support=None, negative_power: bool = False) -> Integral:
    """``int g(|x|) u(x/|x|) dx`` as a radial integral times a sphere integral.

    ``g`` is a profile (anything with a ``support`` attribute) or a plain
    callable together with ``support=(a, b)``.
    """
    a, b = support if support is not None else g.support
    if a < 0 or not b > a or not math.isfinite(b):
        raise ValueError(f"radial support must be a bounded interval in [0, inf), got {(a, b)}")
    if a == 0 and negative_power:
        raise ValueError("radial support touches the origin for a negative-power profile")
    breaks = getattr(g, "breakpoints", ())
    Q = group.Q
    radial = radial_integrate(lambda r: g(r) * r ** (Q - 1), a, b, spec, breaks)
    sph = sphere_integrate(u, group, norm, spec)
    val = radial.value * sph.value
    err = abs(radial.value) * sph.error + abs(sph.value) * radial.error
    return Integral(val, float(err), radial.nodes + sph.nodes)
