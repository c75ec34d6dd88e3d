"""Cell-constant functions on aligned meshes, and exponent bookkeeping.

A SampledFunction is a nonnegative step function on a window [a, a+2^s)^n
with N = 3*2^L uniform cells per axis and zero extension outside the window.
The 3*2^L cell count puts every shifted-dyadic cube boundary of level <= L-s
on a cell boundary, so cube integrals and averages reduce to exact prefix-sum
differences.  Integrals of cell-constant data are exact up to float rounding.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional, Sequence, Union

import numpy as np

from .grid import Box, DyadicCube, GridError, pow2, realize


class MeshError(ValueError):
    pass


class MeshMismatchError(MeshError):
    pass


def parse_rational(x) -> Fraction:
    """Exact rational from int, Fraction, 'a/b' string, or binary float."""
    if isinstance(x, Fraction):
        return x
    if isinstance(x, (int, np.integer)):
        return Fraction(int(x))
    if isinstance(x, str):
        return Fraction(x)
    if isinstance(x, float):
        if not math.isfinite(x):
            raise MeshError(f"non-finite rational {x!r}")
        return Fraction(x)
    raise MeshError(f"cannot interpret {x!r} as a rational")


def _log2_exact(x: Fraction) -> int:
    """k with x == 2**k, error if x is not a power of two."""
    if x <= 0:
        raise MeshError("expected a positive power of two")
    num, den = x.numerator, x.denominator
    if num == 1:
        k = -(den.bit_length() - 1)
        if den != 1 << (-k):
            raise MeshError(f"{x} is not a power of two")
        return k
    if den == 1:
        k = num.bit_length() - 1
        if num != 1 << k:
            raise MeshError(f"{x} is not a power of two")
        return k
    raise MeshError(f"{x} is not a power of two")


class SampledFunction:
    """Nonnegative cell-constant function, zero outside its window."""

    __slots__ = ("dim", "lower", "side", "ncells", "values", "meta", "_prefix")

    def __init__(self, dim: int, lower, side, values, meta: Optional[dict] = None):
        if dim not in (1, 2):
            raise MeshError(f"dim must be 1 or 2, got {dim}")
        self.dim = dim
        lower = tuple(parse_rational(x) for x in (lower if isinstance(lower, (tuple, list)) else (lower,)))
        if len(lower) != dim:
            raise MeshError("window corner arity must match dim")
        if any(x.denominator != 1 for x in lower):
            raise MeshError("window corners must be integers")
        self.lower = lower
        self.side = parse_rational(side)
        _log2_exact(self.side)  # must be a power of two
        if self.side < 1:
            raise MeshError("window side must be a positive integer power of two")
        arr = np.asarray(values, dtype=np.float64)
        if arr.ndim != dim:
            raise MeshError(f"values must be {dim}-dimensional")
        n = arr.shape[0]
        if any(s != n for s in arr.shape):
            raise MeshError("values must be square across axes")
        if n % 3 != 0 or (n // 3) & ((n // 3) - 1):
            raise MeshError(f"cells per axis must be 3*2^L, got {n}")
        if not np.all(np.isfinite(arr)) or np.any(arr < 0):
            raise MeshError("values must be finite and nonnegative")
        self.ncells = n
        arr = arr.copy()
        arr.setflags(write=False)
        self.values = arr
        self.meta = dict(meta) if meta else {}
        self._prefix = None

    # --- construction -------------------------------------------------------

    @classmethod
    def constant(cls, c: float, dim: int, lower, side, ncells: int) -> "SampledFunction":
        shape = (ncells,) * dim
        return cls(dim, lower, side, np.full(shape, float(c)))

    @classmethod
    def zeros(cls, dim: int, lower, side, ncells: int) -> "SampledFunction":
        return cls.constant(0.0, dim, lower, side, ncells)

    @classmethod
    def indicator(cls, box: Box, dim: int, lower, side, ncells: int) -> "SampledFunction":
        """Exact indicator of a cell-aligned box; error if not aligned."""
        f = cls.zeros(dim, lower, side, ncells)
        sl = f.cell_slices(box, require_aligned=True)
        arr = np.zeros((ncells,) * dim)
        arr[sl] = 1.0
        return cls(dim, lower, side, arr)

    def with_values(self, values, meta: Optional[dict] = None) -> "SampledFunction":
        return SampledFunction(self.dim, self.lower, self.side, values, meta=meta)

    # --- geometry -----------------------------------------------------------

    @property
    def h(self) -> Fraction:
        return self.side / self.ncells

    @property
    def cell_volume(self) -> Fraction:
        return self.h ** self.dim

    @property
    def window(self) -> Box:
        return Box(self.lower, self.side)

    @property
    def level_L(self) -> int:
        return _log2_exact(Fraction(self.ncells, 3))

    @property
    def max_aligned_level(self) -> int:
        """Finest dyadic level whose cube boundaries all land on cell edges."""
        return self.level_L - _log2_exact(self.side)

    def same_mesh(self, other: "SampledFunction") -> bool:
        return (
            self.dim == other.dim
            and self.lower == other.lower
            and self.side == other.side
            and self.ncells == other.ncells
        )

    def require_same_mesh(self, other: "SampledFunction"):
        if not self.same_mesh(other):
            raise MeshMismatchError("operands live on different meshes")

    def cell_centers(self, axis: int = 0) -> np.ndarray:
        a = float(self.lower[axis])
        h = float(self.h)
        return a + h * (np.arange(self.ncells) + 0.5)

    def cell_edges(self, axis: int = 0) -> np.ndarray:
        a = float(self.lower[axis])
        h = float(self.h)
        return a + h * np.arange(self.ncells + 1)

    def cell_slices(self, box: Box, require_aligned: bool = False):
        """Per-axis slice of cells covered by box∩window.  With
        require_aligned the box must sit exactly on cell boundaries."""
        if box.dim != self.dim:
            raise MeshMismatchError("box dimension mismatch")
        sl = []
        for ax in range(self.dim):
            lo = max(box.lower[ax], self.lower[ax])
            hi = min(box.lower[ax] + box.side, self.lower[ax] + self.side)
            if hi <= lo:
                sl.append(slice(0, 0))
                continue
            c0 = (lo - self.lower[ax]) / self.h
            c1 = (hi - self.lower[ax]) / self.h
            if require_aligned and (c0.denominator != 1 or c1.denominator != 1):
                raise MeshError(f"box edge not on cell boundary: {box}")
            sl.append(slice(math.floor(c0), math.ceil(c1)))
        return tuple(sl)

    # --- prefix sums and integration ----------------------------------------

    @property
    def prefix(self) -> np.ndarray:
        """(N+1)^dim cumulative sums of raw values; entry [i,(j)] sums cells
        below i (and j)."""
        if self._prefix is None:
            v = self.values
            if self.dim == 1:
                p = np.zeros(self.ncells + 1)
                np.cumsum(v, out=p[1:])
            else:
                p = np.zeros((self.ncells + 1, self.ncells + 1))
                p[1:, 1:] = v.cumsum(axis=0).cumsum(axis=1)
            p.setflags(write=False)
            self._prefix = p
        return self._prefix

    def _prefix_box(self, sl) -> float:
        p = self.prefix
        if self.dim == 1:
            return float(p[sl[0].stop] - p[sl[0].start])
        a0, b0, a1, b1 = sl[0].start, sl[0].stop, sl[1].start, sl[1].stop
        return float(p[b0, b1] - p[a0, b1] - p[b0, a1] + p[a0, a1])

    def integrate_box(self, box: Box) -> float:
        """Exact integral over box (cell-constant data, zero extension)."""
        if box.dim != self.dim:
            raise MeshMismatchError("box dimension mismatch")
        if box.is_empty():
            return 0.0
        weights = []
        aligned = True
        for ax in range(self.dim):
            lo = max(box.lower[ax], self.lower[ax])
            hi = min(box.lower[ax] + box.side, self.lower[ax] + self.side)
            if hi <= lo:
                return 0.0
            c0 = (lo - self.lower[ax]) / self.h
            c1 = (hi - self.lower[ax]) / self.h
            if c0.denominator != 1 or c1.denominator != 1:
                aligned = False
            weights.append((c0, c1))
        if aligned:
            sl = tuple(slice(int(c0), int(c1)) for c0, c1 in weights)
            return self._prefix_box(sl) * float(self.cell_volume)
        # prorate boundary cells exactly
        h = float(self.h)
        axis_w = []
        axis_sl = []
        for c0, c1 in weights:
            j0, j1 = math.floor(c0), math.ceil(c1)
            w = np.full(j1 - j0, h)
            w[0] = float((min(c1, Fraction(j0 + 1)) - c0) * self.h)
            if j1 - j0 > 1:
                w[-1] = float((c1 - Fraction(j1 - 1)) * self.h)
            axis_w.append(w)
            axis_sl.append(slice(j0, j1))
        block = self.values[tuple(axis_sl)]
        if self.dim == 1:
            return float(axis_w[0] @ block)
        return float(axis_w[0] @ block @ axis_w[1])

    # --- pointwise algebra ----------------------------------------------------

    def __mul__(self, other):
        if isinstance(other, SampledFunction):
            self.require_same_mesh(other)
            return self.with_values(self.values * other.values)
        return self.with_values(self.values * float(other))

    __rmul__ = __mul__

    def __add__(self, other):
        if isinstance(other, SampledFunction):
            self.require_same_mesh(other)
            return self.with_values(self.values + other.values)
        return self.with_values(self.values + float(other))

    def power(self, expo: float) -> "SampledFunction":
        """Pointwise power; for negative exponents zero cells map to zero
        (the convention used by factored weight constructions)."""
        e = float(expo)
        v = self.values
        if e >= 0:
            return self.with_values(v ** e)
        out = np.zeros_like(v)
        pos = v > 0
        out[pos] = v[pos] ** e
        return self.with_values(out)

    def restrict_to(self, region: Union[Box, DyadicCube]) -> "SampledFunction":
        """f * indicator(region), exact for cell-aligned regions."""
        box = realize(region) if isinstance(region, DyadicCube) else region
        sl = self.cell_slices(box, require_aligned=True)
        out = np.zeros_like(self.values)
        out[sl] = self.values[sl]
        return self.with_values(out)

    def refine(self, times: int = 1) -> "SampledFunction":
        """Same function on a mesh 2^times finer per axis."""
        v = self.values
        for _ in range(times):
            for ax in range(self.dim):
                v = np.repeat(v, 2, axis=ax)
        return SampledFunction(self.dim, self.lower, self.side, v)

    # --- serialization --------------------------------------------------------

    def to_obj(self) -> dict:
        return {
            "dim": self.dim,
            "window": {"lower": [str(x) for x in self.lower], "side": str(self.side)},
            "cells_per_axis": self.ncells,
            "values": [float(x) for x in self.values.ravel()],
        }

    @classmethod
    def from_obj(cls, obj: dict) -> "SampledFunction":
        dim = int(obj["dim"])
        n = int(obj["cells_per_axis"])
        vals = np.asarray(obj["values"], dtype=np.float64).reshape((n,) * dim)
        w = obj["window"]
        return cls(dim, tuple(Fraction(s) for s in w["lower"]), Fraction(w["side"]), vals)

    def to_csv_rows(self):
        yield ("index", "value")
        for i, v in enumerate(self.values.ravel()):
            yield (i, repr(float(v)))


# === integration / averages / norms ==========================================

def integrate(f: SampledFunction, region: Union[Box, DyadicCube, None] = None) -> float:
    """Integral of f over region∩window (whole window when region is None)."""
    if region is None:
        return float(f.values.sum()) * float(f.cell_volume)
    box = realize(region) if isinstance(region, DyadicCube) else region
    return f.integrate_box(box)


def average(f: SampledFunction, region: Union[Box, DyadicCube]) -> float:
    """Mean of f over the full region volume; zero extension outside the
    window, so partially covered regions are diluted."""
    box = realize(region) if isinstance(region, DyadicCube) else region
    vol = float(box.volume())
    if vol == 0:
        raise MeshError("average over a degenerate region")
    return f.integrate_box(box) / vol


def weighted_measure(w: SampledFunction, region: Union[Box, DyadicCube]) -> float:
    """w(region) = integral of the weight over region∩window."""
    return integrate(w, region)


def lp_norm(f: SampledFunction, p, weight: Optional[SampledFunction] = None) -> float:
    """||f||_{L^p(w dx)} over the window; Lebesgue measure when weight None."""
    pf = float(p)
    if pf <= 0:
        raise MeshError("p must be positive")
    v = f.values
    if weight is not None:
        f.require_same_mesh(weight)
        mass = weight.values * float(f.cell_volume)
    else:
        mass = float(f.cell_volume)
    if math.isinf(pf):
        return float(v.max(initial=0.0))
    total = float(np.sum(v ** pf * mass))
    return total ** (1.0 / pf)


def weak_lq_norm(g: SampledFunction, q, weight: Optional[SampledFunction] = None) -> float:
    """sup_t t * w({g > t})^{1/q}; the sup is attained approaching each
    distinct value of g from below, so it is evaluated at those values."""
    qf = float(q)
    if qf <= 0:
        raise MeshError("q must be positive")
    v = g.values.ravel()
    if weight is not None:
        g.require_same_mesh(weight)
        mass = (weight.values * float(g.cell_volume)).ravel()
    else:
        mass = np.full(v.size, float(g.cell_volume))
    order = np.argsort(v)[::-1]
    vs = v[order]
    cum = np.cumsum(mass[order])
    pos = vs > 0
    if not np.any(pos):
        return 0.0
    return float(np.max(vs[pos] * cum[pos] ** (1.0 / qf)))


# === exponent tuples =========================================================

@dataclass(frozen=True)
class ExponentTuple:
    """Exponent data (n, alpha, p, q) with exact rational derived quantities."""

    n: int
    alpha: Fraction
    p: Fraction
    q: Fraction

    def __post_init__(self):
        if self.n not in (1, 2):
            raise MeshError("n must be 1 or 2")
        for name in ("alpha", "p", "q"):
            object.__setattr__(self, name, parse_rational(getattr(self, name)))
        if not (0 <= self.alpha < self.n):
            raise MeshError(f"alpha must satisfy 0 <= alpha < n, got {self.alpha}")
        if self.p <= 1 or self.q <= 1:
            raise MeshError("p and q must lie in (1, infinity)")

    @property
    def pprime(self) -> Fraction:
        return self.p / (self.p - 1)

    @property
    def qprime(self) -> Fraction:
        return self.q / (self.q - 1)

    @property
    def beta(self) -> Fraction:
        """n(1/p - 1/q), the Sobolev gap the pair (p,q) spans."""
        return self.n * (1 / self.p - 1 / self.q)

    @property
    def s_p(self) -> Fraction:
        """s(p) = 1 + q/p'; equals q(1 - alpha/n) exactly when Sobolev."""
        return 1 + self.q / self.pprime

    @property
    def s_dual(self) -> Fraction:
        """s(q') = 1 + p'/q, the s-index of the dual pair (q', p')."""
        return 1 + self.pprime / self.q

    @property
    def gamma(self) -> Fraction:
        """Factored-weight exponent (alpha/n + 1/q - 1/p) / ((1/n)(1 + 1/q - 1/p))."""
        num = self.alpha / self.n + 1 / self.q - 1 / self.p
        den = Fraction(1, self.n) * (1 + 1 / self.q - 1 / self.p)
        return num / den

    @property
    def is_sobolev(self) -> bool:
        return 1 / self.p - 1 / self.q == self.alpha / self.n

    @property
    def in_fractional_regime(self) -> bool:
        """1/p - 1/q <= alpha/n, the regime where factored pairs exist."""
        return 1 / self.p - 1 / self.q <= self.alpha / self.n

    def dual(self) -> "ExponentTuple":
        return ExponentTuple(self.n, self.alpha, self.qprime, self.pprime)

    def to_obj(self) -> dict:
        return {
            "n": self.n,
            "alpha": str(self.alpha),
            "p": str(self.p),
            "q": str(self.q),
        }


def make_exponents(n: int, alpha, p, q) -> ExponentTuple:
    """Validated exponent tuple; accepts ints, Fractions, or 'a/b' strings."""
    return ExponentTuple(int(n), parse_rational(alpha), parse_rational(p), parse_rational(q))
