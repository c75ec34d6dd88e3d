"""Maximal and potential operators on sampled functions.

All cube-based operators run over shifted dyadic grids whose levels are
aligned with the sample mesh, so every cube average is an exact prefix-sum
difference.  Suprema and sums over levels are therefore truncated at the
requested level range; callers comparing two operators should use the same
range on both sides.  Averages are always taken over the full cube volume,
with the zero extension outside the window contributing nothing.
"""
from __future__ import annotations

import math
from fractions import Fraction
from typing import Optional, Sequence, Tuple

import numpy as np

from .grid import Box, DyadicCube, GridFamily, all_shifts, parent, realize
from .orlicz import YoungFunction, luxemburg
from .sampled import MeshError, SampledFunction, _log2_exact, integrate
from .scan import (
    cell_block,
    cube_cell_sums,
    inside_window_mask,
    iter_scans,
    level_scan,
    map_to_cells,
    prefix_sum,
)

COARSE_MARGIN = 4


class OperatorError(ValueError):
    pass


def default_levels(f: SampledFunction, min_level: Optional[int], max_level: Optional[int]) -> Tuple[int, int]:
    """Level range used when the caller does not pin one down: from a few
    doublings above the window size down to the mesh alignment limit."""
    s = _log2_exact(f.side)
    lo = -(s + COARSE_MARGIN) if min_level is None else int(min_level)
    hi = f.max_aligned_level if max_level is None else int(max_level)
    if hi > f.max_aligned_level:
        raise OperatorError(
            f"max_level {hi} finer than the mesh alignment limit {f.max_aligned_level}"
        )
    if lo > hi:
        raise OperatorError("empty level range")
    return lo, hi


def _grids(f: SampledFunction, shifts, min_level, max_level) -> list:
    lo, hi = default_levels(f, min_level, max_level)
    if shifts is None:
        shifts = all_shifts(f.dim)
    elif isinstance(shifts, tuple) and all(isinstance(x, int) for x in shifts):
        shifts = [shifts]
    return [GridFamily(f.dim, tuple(sh), lo, hi, f.window) for sh in shifts]


def _wrap(f: SampledFunction, values: np.ndarray, **meta) -> SampledFunction:
    return SampledFunction(f.dim, f.lower, f.side, values, meta=meta)


# === fractional maximal operators =============================================

def frac_maximal(
    f: SampledFunction,
    alpha=0,
    shifts=None,
    min_level: Optional[int] = None,
    max_level: Optional[int] = None,
) -> SampledFunction:
    """sup over cubes of |Q|^{alpha/n} times the average of f on Q.

    By default the supremum runs over every shifted grid; pass a single
    shift tuple (or list of them) to restrict it.
    """
    a = float(alpha)
    n = f.dim
    if not 0 <= a < n:
        raise OperatorError(f"alpha must lie in [0, n), got {alpha}")
    out = np.zeros_like(f.values)
    pre = f.prefix
    cellvol = float(f.cell_volume)
    for grid in _grids(f, shifts, min_level, max_level):
        for scan in iter_scans(f, grid):
            k = scan.level
            weight = 2.0 ** (k * (n - a)) * cellvol
            per_cube = cube_cell_sums(scan, pre) * weight
            np.maximum(out, map_to_cells(scan, per_cube), out=out)
    return _wrap(f, out, operator="frac_maximal", alpha=a)


def dyadic_frac_maximal(
    f: SampledFunction,
    alpha=0,
    shift: Optional[Tuple[int, ...]] = None,
    min_level: Optional[int] = None,
    max_level: Optional[int] = None,
) -> SampledFunction:
    """Single-grid fractional maximal; the classic unshifted grid by default."""
    sh = (0,) * f.dim if shift is None else tuple(shift)
    return frac_maximal(f, alpha, shifts=[sh], min_level=min_level, max_level=max_level)


def bilinear_maximal(
    f: SampledFunction,
    g: SampledFunction,
    shifts=None,
    min_level: Optional[int] = None,
    max_level: Optional[int] = None,
) -> SampledFunction:
    """sup over cubes of (average of f) times (average of g)."""
    f.require_same_mesh(g)
    out = np.zeros_like(f.values)
    pf, pg = f.prefix, g.prefix
    cellvol = float(f.cell_volume)
    n = f.dim
    for grid in _grids(f, shifts, min_level, max_level):
        for scan in iter_scans(f, grid):
            inv_vol = 2.0 ** (scan.level * n) * cellvol
            avg_f = cube_cell_sums(scan, pf) * inv_vol
            avg_g = cube_cell_sums(scan, pg) * inv_vol
            np.maximum(out, map_to_cells(scan, avg_f * avg_g), out=out)
    return _wrap(f, out, operator="bilinear_maximal")


def weighted_dyadic_maximal(
    f: SampledFunction,
    mu: SampledFunction,
    beta=0,
    shift: Optional[Tuple[int, ...]] = None,
    min_level: Optional[int] = None,
    max_level: Optional[int] = None,
) -> SampledFunction:
    """sup over cubes of mu(Q)^{beta/n - 1} times the mu-integral of f on Q.

    Cubes with mu(Q) = 0 contribute nothing.  beta = 0 recovers the
    mu-average maximal operator.
    """
    f.require_same_mesh(mu)
    b = float(beta)
    n = f.dim
    if not 0 <= b < n:
        raise OperatorError(f"beta must lie in [0, n), got {beta}")
    sh = (0,) * n if shift is None else tuple(shift)
    out = np.zeros_like(f.values)
    pre_mu = mu.prefix
    pre_fmu = prefix_sum(f.values * mu.values)
    cellvol = float(f.cell_volume)
    expo = b / n - 1.0
    lo, hi = default_levels(f, min_level, max_level)
    grid = GridFamily(n, sh, lo, hi, f.window)
    for scan in iter_scans(f, grid):
        mu_q = cube_cell_sums(scan, pre_mu) * cellvol
        fmu_q = cube_cell_sums(scan, pre_fmu) * cellvol
        vals = np.zeros_like(mu_q)
        pos = mu_q > 0
        vals[pos] = mu_q[pos] ** expo * fmu_q[pos]
        np.maximum(out, map_to_cells(scan, vals), out=out)
    return _wrap(f, out, operator="weighted_dyadic_maximal", beta=b)


def geometric_maximal(
    f: SampledFunction,
    shift: Optional[Tuple[int, ...]] = None,
    min_level: Optional[int] = None,
    max_level: Optional[int] = None,
) -> SampledFunction:
    """sup over cubes of exp(average of log f on Q).

    A cube contributes only when f is strictly positive on all of it and it
    sits fully inside the window; any zero value (including the extension
    outside the window) sends the geometric average to zero.
    """
    n = f.dim
    sh = (0,) * n if shift is None else tuple(shift)
    v = f.values
    zero_mask = (v == 0).astype(np.float64)
    logs = np.zeros_like(v)
    np.log(v, out=logs, where=v > 0)
    pre_zero = prefix_sum(zero_mask)
    pre_log = prefix_sum(logs)
    out = np.zeros_like(v)
    cellvol = float(f.cell_volume)
    lo, hi = default_levels(f, min_level, max_level)
    grid = GridFamily(n, sh, lo, hi, f.window)
    for scan in iter_scans(f, grid):
        zeros_q = cube_cell_sums(scan, pre_zero)
        log_q = cube_cell_sums(scan, pre_log)
        clean = (np.rint(zeros_q) == 0) & inside_window_mask(scan)
        inv_vol = 2.0 ** (scan.level * n) * cellvol
        vals = np.zeros_like(log_q)
        vals[clean] = np.exp(log_q[clean] * inv_vol)
        np.maximum(out, map_to_cells(scan, vals), out=out)
    return _wrap(f, out, operator="geometric_maximal")


def orlicz_maximal(
    f: SampledFunction,
    phi: YoungFunction,
    beta=0,
    shift: Optional[Tuple[int, ...]] = None,
    min_level: Optional[int] = None,
    max_level: Optional[int] = None,
) -> SampledFunction:
    """sup over cubes of |Q|^{beta/n} times the Luxemburg average of f on Q.

    Plain-power Young functions reduce to power averages and vectorize;
    anything else solves the Luxemburg equation cube by cube.
    """
    n = f.dim
    b = float(beta)
    if not 0 <= b < n:
        raise OperatorError(f"beta must lie in [0, n), got {beta}")
    sh = (0,) * n if shift is None else tuple(shift)
    out = np.zeros_like(f.values)
    cellvol = float(f.cell_volume)
    lo, hi = default_levels(f, min_level, max_level)
    grid = GridFamily(n, sh, lo, hi, f.window)
    is_power = getattr(phi, "is_power", False)
    if is_power:
        pre_pow = prefix_sum(f.values ** phi.r)
    for scan in iter_scans(f, grid):
        vol_q = scan.cube_volume()
        side_weight = vol_q ** (b / n)
        if is_power:
            mean_pow = cube_cell_sums(scan, pre_pow) * (cellvol / vol_q)
            vals = mean_pow ** (1.0 / phi.r) * side_weight
        else:
            vals = np.zeros(scan.shape)
            if scan.dim == 1:
                positions = ((j,) for j in range(scan.shape[0]))
            else:
                positions = (
                    (i, j) for i in range(scan.shape[0]) for j in range(scan.shape[1])
                )
            for pos in positions:
                block = cell_block(scan, f.values, pos)
                vals[pos] = side_weight * luxemburg(block, cellvol, vol_q, phi)
        np.maximum(out, map_to_cells(scan, vals), out=out)
    return _wrap(f, out, operator="orlicz_maximal", beta=b)


# === potential operators ======================================================

def dyadic_riesz(
    f: SampledFunction,
    alpha,
    shift: Optional[Tuple[int, ...]] = None,
    min_level: Optional[int] = None,
    max_level: Optional[int] = None,
) -> SampledFunction:
    """Sum over cubes containing x of |Q|^{alpha/n} times the average of f,
    truncated to the level range."""
    a = float(alpha)
    n = f.dim
    if not 0 < a < n:
        raise OperatorError(f"alpha must lie in (0, n), got {alpha}")
    sh = (0,) * n if shift is None else tuple(shift)
    out = np.zeros_like(f.values)
    pre = f.prefix
    cellvol = float(f.cell_volume)
    lo, hi = default_levels(f, min_level, max_level)
    grid = GridFamily(n, sh, lo, hi, f.window)
    for scan in iter_scans(f, grid):
        weight = 2.0 ** (scan.level * (n - a)) * cellvol
        out += map_to_cells(scan, cube_cell_sums(scan, pre) * weight)
    return _wrap(f, out, operator="dyadic_riesz", alpha=a)


def riesz_kernel_1d(ncells: int, h: float, alpha: float) -> np.ndarray:
    """k[m] = integral over a cell at offset m of |x - y|^{alpha - 1} dy,
    for x at a cell center; exact via the antiderivative of the kernel."""
    if not 0 < alpha < 1:
        raise OperatorError(f"alpha must lie in (0, 1), got {alpha}")

    def F(u: np.ndarray) -> np.ndarray:
        return np.sign(u) * np.abs(u) ** alpha / alpha

    m = np.arange(ncells, dtype=np.float64)
    return F((m + 0.5) * h) - F((m - 0.5) * h)


def riesz_potential_1d(f: SampledFunction, alpha) -> SampledFunction:
    """Continuum fractional integral on the line, evaluated at cell centers
    with the kernel integrated exactly over each source cell."""
    if f.dim != 1:
        raise OperatorError("the continuum potential is implemented on the line")
    a = float(alpha)
    k = riesz_kernel_1d(f.ncells, float(f.h), a)
    kk = np.concatenate([k[:0:-1], k])
    out = np.convolve(f.values, kk)[f.ncells - 1 : 2 * f.ncells - 1]
    # rounding can leave tiny negatives on zero cells
    np.maximum(out, 0.0, out=out)
    return _wrap(f, out, operator="riesz_potential_1d", alpha=a)


# === outer shell potential ====================================================

def _axis_locked(cube: DyadicCube, b: Box, window: Box, ax: int) -> bool:
    lo_cov = b.lower[ax] <= window.lower[ax]
    hi_cov = b.lower[ax] + b.side >= window.lower[ax] + window.side
    if lo_cov and hi_cov:
        return True
    if cube.shift[ax] == 0:
        # the unshifted grid keeps an edge at the origin at every level
        if cube.index[ax] == 0 and hi_cov:
            return True
        if cube.index[ax] == -1 and lo_cov:
            return True
    return False


def ancestor_chain(cube0: DyadicCube, window: Box, cap: int = 500) -> list:
    """Ancestors of cube0, finest first, walked until they cover the window
    or are pinned at a grid-persistent edge so coverage can no longer grow."""
    chain = [cube0]
    for _ in range(cap):
        b = realize(chain[-1])
        if b.contains_box(window):
            break
        if all(_axis_locked(chain[-1], b, window, ax) for ax in range(cube0.dim)):
            break
        chain.append(parent(chain[-1]))
    else:
        raise OperatorError("ancestor chain did not stabilize")
    return chain


def outer_riesz(
    sigma: SampledFunction,
    cube0: DyadicCube,
    alpha,
    coeff: Optional[float] = None,
) -> SampledFunction:
    """Shell potential seeded by the mass of sigma on one cube.

    Summing |A|^{alpha/n - 1} sigma(Q0) over all ancestors A of Q0 that
    contain x collapses, by the geometric series, to

        coeff * |A_min(x)|^{alpha/n - 1} * sigma(Q0),

    where A_min(x) is the minimal ancestor containing x and the default
    coeff is 1 / (1 - 2^{alpha - n}).  Points below no ancestor (possible
    for the unshifted grid, whose cubes never cross the origin) get zero.
    """
    n = sigma.dim
    a = float(alpha)
    if not 0 < a < n:
        raise OperatorError(f"alpha must lie in (0, n), got {alpha}")
    if cube0.dim != n:
        raise OperatorError("cube dimension mismatch")
    if cube0.level > sigma.max_aligned_level:
        raise OperatorError("cube finer than the mesh alignment limit")
    C = 1.0 / (1.0 - 2.0 ** (a - n)) if coeff is None else float(coeff)
    mass = integrate(sigma, cube0)
    out = np.zeros_like(sigma.values)
    assigned = np.zeros(sigma.values.shape, dtype=bool)
    for A in ancestor_chain(cube0, sigma.window):
        b = realize(A)
        sl = sigma.cell_slices(b, require_aligned=True)
        fresh = ~assigned[sl]
        out[sl][fresh] = C * float(b.volume()) ** (a / n - 1.0) * mass
        assigned[sl] = True
    return _wrap(sigma, out, operator="outer_riesz", alpha=a)
