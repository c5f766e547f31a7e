"""Homogeneous groups in exponential coordinates, their dilations and gauges.

Points are plain ``numpy`` arrays whose last axis holds the ``n`` exponential
coordinates.  Haar measure in this chart is Lebesgue measure, so nothing here
needs the group law.
"""

from __future__ import annotations

import math
from functools import cached_property
from dataclasses import dataclass, field

import numpy as np

__all__ = [
    "ConfigurationError",
    "DilationGroup",
    "QuasiNorm",
    "make_group",
    "dilate",
    "quasi_norm",
    "sphere_project",
    "anisotropic_norm",
    "koranyi_norm",
    "euclidean_norm",
    "default_kappa",
]


class ConfigurationError(ValueError):
    """A group/norm combination that cannot be built."""


@dataclass(frozen=True)
class DilationGroup:
    """Diagonal dilations ``D_lam x = (lam**w_1 x_1, ..., lam**w_n x_n)``."""

    weights: tuple[float, ...]
    _w: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        w = tuple(float(v) for v in self.weights)
        if not w:
            raise ConfigurationError("a group needs at least one coordinate")
        if any(not math.isfinite(v) or v <= 0.0 for v in w):
            raise ConfigurationError(f"dilation weights must be positive, got {w}")
        object.__setattr__(self, "weights", w)
        arr = np.array(w, dtype=float)
        arr.setflags(write=False)
        object.__setattr__(self, "_w", arr)

    @property
    def n(self) -> int:
        return len(self.weights)

    @property
    def Q(self) -> float:
        """Homogeneous dimension, the trace of the dilation generator."""
        return math.fsum(self.weights)

    @cached_property
    def _blocks(self):
        """``(weight, column slice or index array)`` per distinct weight."""
        out = []
        for v in dict.fromkeys(self.weights):
            idx = np.flatnonzero(self._w == v)
            cols = slice(idx[0], idx[-1] + 1) if np.all(np.diff(idx) == 1) else idx
            out.append((v, cols))
        return out

    @property
    def weight_array(self) -> np.ndarray:
        return self._w

    @property
    def is_isotropic(self) -> bool:
        return all(v == self.weights[0] for v in self.weights)

    def dilate(self, lam, x):
        """Apply ``D_lam``; ``lam`` may be an array broadcasting against ``x[..., 0]``."""
        lam = np.asarray(lam, dtype=float)
        if np.any(lam <= 0.0):
            raise ValueError("dilation factor must be positive")
        x = np.asarray(x)
        if lam.ndim == 0 and lam == 1.0:
            return x.copy()
        lam = lam[..., None]
        out = np.empty(np.broadcast_shapes(x.shape, lam.shape[:-1] + (self.n,)),
                       dtype=np.result_type(x, float))
        for v, cols in self._blocks:
            out[..., cols] = x[..., cols] * _ipow(lam, v)
        return out

    def scale_box(self, lam, lower, upper):
        s = np.power(float(lam), self._w)
        return np.asarray(lower) * s, np.asarray(upper) * s


def _ipow(a, e: float):
    """``a**e`` with repeated squaring when ``e`` is a small positive integer."""
    if e == 1.0:
        return a
    if e == int(e) and 1 < e <= 16:
        k = int(e)
        out = None
        base = a
        while k:
            if k & 1:
                out = base if out is None else out * base
            k >>= 1
            if k:
                base = base * base
        return out
    return np.power(a, e)


def _enorm(x):
    """Euclidean norm over the last axis without under- or overflow."""
    with np.errstate(over="ignore", under="ignore"):
        r = np.linalg.norm(x, axis=-1)
    bad = ~((r > 1e-150) & (r < 1e150))
    if not np.any(bad):
        return r
    m = np.max(np.abs(x), axis=-1)
    safe = np.where(m > 0, m, 1.0)
    scaled = safe * np.linalg.norm(x / safe[..., None], axis=-1)
    return np.where(bad, np.where(m > 0, scaled, 0.0), r)


def make_group(weights) -> DilationGroup:
    return DilationGroup(tuple(weights))


def dilate(group: DilationGroup, lam, x):
    return group.dilate(lam, x)


def default_kappa(weights) -> float:
    """Smallest even integer >= 2*max(weights)."""
    k = math.ceil(2.0 * max(weights) - 1e-12)
    return float(k + (k % 2))


def _koranyi_split(weights) -> int:
    """Number of weight-1 coordinates for a (1,..,1,2,..,2) pattern."""
    m = sum(1 for v in weights if v == 1.0)
    if m == 0 or m == len(weights) or any(v != 1.0 for v in weights[:m]) or any(
        v != 2.0 for v in weights[m:]
    ):
        raise ConfigurationError(
            f"Koranyi gauge needs weights (1,...,1,2,...,2) with both blocks present, got {weights}"
        )
    return m


@dataclass(frozen=True)
class QuasiNorm:
    """A homogeneous gauge bound to a group.

    ``kind`` is one of ``"anisotropic"`` (parameter ``kappa``),
    ``"koranyi"`` (parameter ``c``) or ``"euclidean"``.
    """

    group: DilationGroup
    kind: str = "anisotropic"
    kappa: float | None = None
    c: float = 16.0

    def __post_init__(self):
        kind = self.kind.lower()
        object.__setattr__(self, "kind", kind)
        w = self.group.weights
        if kind == "anisotropic":
            kappa = default_kappa(w) if self.kappa is None else float(self.kappa)
            if not kappa > 0:
                raise ConfigurationError("kappa must be positive")
            object.__setattr__(self, "kappa", kappa)
        elif kind == "koranyi":
            _koranyi_split(w)
            if not self.c > 0:
                raise ConfigurationError("Koranyi coefficient c must be positive")
        elif kind == "euclidean":
            if not self.group.is_isotropic:
                raise ConfigurationError(
                    f"Euclidean gauge requires equal weights, got {w}"
                )
        else:
            raise ConfigurationError(f"unknown quasi-norm kind {self.kind!r}")

    def __call__(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        w = self.group.weight_array
        if self.kind == "anisotropic":
            if self._integer_exponents:
                # sum |x_i|**(kappa/w_i) directly; rows that under/overflow fall through
                s = 0.0
                with np.errstate(over="ignore", under="ignore"):
                    for v, cols in self.group._blocks:
                        s = s + np.sum(_ipow(x[..., cols] * x[..., cols], self.kappa / (2 * v)),
                                       axis=-1)
                out = np.power(s, 1.0 / self.kappa)
                bad = ~((s > 1e-280) & (s < 1e280))
                if not np.any(bad):
                    return out
                if np.ndim(out) == 0:
                    return self._scaled(x, w)
                out[bad] = self._scaled(x[bad], w)
                return out
            return self._scaled(x, w)
        if self.kind == "koranyi":

            m = _koranyi_split(self.group.weights)
            t1 = _enorm(x[..., :m])
            t2 = self.c**0.25 * np.sqrt(_enorm(x[..., m:]))
            top = np.maximum(t1, t2)
            safe = np.where(top > 0, top, 1.0)
            s = (t1 / safe) ** 4 + (t2 / safe) ** 4
            return np.where(top > 0, safe * s**0.25, 0.0)
        nu = self.group.weights[0]
        r = _enorm(x)
        return r if nu == 1.0 else np.power(r, 1.0 / nu)

    @cached_property
    def _integer_exponents(self) -> bool:
        return all(float(self.kappa / (2 * v)).is_integer() for v in self.group.weights)

    def _scaled(self, x, w):
        # |x_i|**(1/w_i) is homogeneous of degree one; work with its logarithm
        ax = np.abs(x)
        with np.errstate(divide="ignore"):
            lt = np.log(ax) / w
        m = np.max(lt, axis=-1)
        live = np.isfinite(m)
        safe = np.where(live, m, 0.0)
        s = np.sum(np.exp(self.kappa * (lt - safe[..., None])), axis=-1)
        with np.errstate(over="ignore", divide="ignore"):
            return np.where(live, np.exp(safe + np.log(s) / self.kappa), 0.0)

    def coordinate_bounds(self, radius: float) -> np.ndarray:
        """Half-widths of the smallest box containing the gauge ball of ``radius``."""
        w = self.group.weight_array
        if self.kind == "koranyi":
            m = _koranyi_split(self.group.weights)
            out = np.empty_like(w)
            out[:m] = radius
            out[m:] = radius**2 / math.sqrt(self.c)
            return out
        # both anisotropic and Euclidean balls sit inside |x_i| <= R**w_i
        return np.power(float(radius), w)

    def describe(self) -> dict:
        d = {"kind": self.kind}
        if self.kind == "anisotropic":
            d["kappa"] = self.kappa
        elif self.kind == "koranyi":
            d["c"] = self.c
        return d


def anisotropic_norm(group, kappa=None) -> QuasiNorm:
    return QuasiNorm(group, "anisotropic", kappa=kappa)


def koranyi_norm(group, c=16.0) -> QuasiNorm:
    return QuasiNorm(group, "koranyi", c=c)


def euclidean_norm(group) -> QuasiNorm:
    return QuasiNorm(group, "euclidean")


def quasi_norm(norm: QuasiNorm, x) -> np.ndarray:
    return norm(x)


def sphere_project(norm: QuasiNorm, x) -> np.ndarray:
    """Dilate ``x`` onto the unit gauge sphere."""
    x = np.asarray(x, dtype=float)
    r = norm(x)
    if np.any(r == 0.0):
        raise ValueError("cannot project the origin onto the unit sphere")
    return norm.group.dilate(1.0 / r, x)
