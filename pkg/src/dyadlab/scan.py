"""Internal vectorized per-level cube scans over a sampled mesh.

For a sampled function with N = 3*2^L cells per axis on a window of side 2^s,
every cube of level k <= L - s in any of the shifted grids has its boundary
on cell edges.  A LevelScan precomputes, per axis, the integer cell index of
every cube boundary at one (grid, level), plus the owner cube of every cell.
Cube sums then reduce to prefix-sum differences and per-cube quantities map
back to cells by fancy indexing.  All index arithmetic is exact int64.
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Tuple

import numpy as np

from .grid import DyadicCube, GridError, GridFamily
from .sampled import MeshError, SampledFunction, _log2_exact


@dataclass(frozen=True)
class LevelScan:
    """Cell-index geometry of one grid level over a sampled mesh."""

    grid: GridFamily
    level: int
    m_lo: Tuple[int, ...]
    shape: Tuple[int, ...]
    edges: Tuple[np.ndarray, ...]    # per axis, len count+1, clipped to [0, N]
    raw_edges: Tuple[np.ndarray, ...]  # unclipped, for inside-window tests
    owners: Tuple[np.ndarray, ...]   # per axis, len N, 0-based cube position

    @property
    def dim(self) -> int:
        return self.grid.dim

    def cube_at(self, pos: Tuple[int, ...]) -> DyadicCube:
        idx = tuple(self.m_lo[ax] + int(pos[ax]) for ax in range(self.dim))
        return DyadicCube(self.dim, self.level, idx, self.grid.shift)

    def cube_side(self) -> Fraction:
        return Fraction(1, 2 ** self.level) if self.level >= 0 else Fraction(2 ** (-self.level))

    def cube_volume(self) -> float:
        return float(self.cube_side() ** self.dim)


def check_alignment(f: SampledFunction, grid: GridFamily):
    if grid.dim != f.dim:
        raise MeshError("grid dimension does not match the sampled function")
    if grid.window != f.window:
        raise MeshError("grid window does not match the sampled function window")
    if grid.max_level > f.max_aligned_level:
        raise MeshError(
            f"grid max_level {grid.max_level} exceeds the mesh alignment "
            f"limit {f.max_aligned_level}"
        )


def level_scan(f: SampledFunction, grid: GridFamily, level: int) -> LevelScan:
    check_alignment(f, grid)
    if level not in grid.levels:
        raise GridError(f"level {level} outside grid range")
    L = f.level_L
    s = _log2_exact(f.side)
    n_cells = f.ncells
    shift_in_levels = L - s - level
    if not (0 <= shift_in_levels <= 40):
        raise MeshError("level too far from mesh resolution for int64 scans")
    D = np.int64(1) << np.int64(shift_in_levels)
    e = 1 if level % 2 == 0 else -1
    m_lo = []
    shape = []
    edges = []
    raw_edges = []
    owners = []
    for ax in range(f.dim):
        lo, hi = grid.axis_index_range(level, ax)
        a = int(f.lower[ax])
        if abs(a) > 1 << 20:
            raise MeshError("window corner too large for int64 scans")
        tau = grid.shift[ax]
        count = hi - lo + 1
        m = lo + np.arange(count + 1, dtype=np.int64)
        raw = (3 * m + e * tau) * D - 3 * a * np.int64(1 << (L - s))
        clipped = np.clip(raw, 0, n_cells)
        if clipped[0] != 0 or clipped[-1] != n_cells:
            raise MeshError("enumerated cubes do not cover the window")
        if np.any(np.diff(clipped) <= 0):
            raise MeshError("degenerate cube range in scan")
        own = np.searchsorted(clipped, np.arange(n_cells, dtype=np.int64), side="right") - 1
        m_lo.append(lo)
        shape.append(count)
        edges.append(clipped)
        raw_edges.append(raw)
        owners.append(own)
    return LevelScan(
        grid=grid,
        level=level,
        m_lo=tuple(m_lo),
        shape=tuple(shape),
        edges=tuple(edges),
        raw_edges=tuple(raw_edges),
        owners=tuple(owners),
    )


def prefix_sum(arr: np.ndarray) -> np.ndarray:
    """Cumulative-sum table with a zero border; works on signed data."""
    arr = np.asarray(arr, dtype=np.float64)
    if arr.ndim == 1:
        p = np.zeros(arr.shape[0] + 1)
        np.cumsum(arr, out=p[1:])
        return p
    if arr.ndim == 2:
        p = np.zeros((arr.shape[0] + 1, arr.shape[1] + 1))
        p[1:, 1:] = arr.cumsum(axis=0).cumsum(axis=1)
        return p
    raise MeshError("prefix_sum supports 1-D and 2-D arrays")


def cube_cell_sums(scan: LevelScan, prefix: np.ndarray) -> np.ndarray:
    """Raw sums of cell values over each cube's window part.

    `prefix` is a table from prefix_sum (or SampledFunction.prefix).  The
    result has scan.shape; multiply by the cell volume for integrals.
    """
    if scan.dim == 1:
        E = scan.edges[0]
        return prefix[E[1:]] - prefix[E[:-1]]
    E0, E1 = scan.edges
    S = prefix[np.ix_(E0, E1)]
    return S[1:, 1:] - S[:-1, 1:] - S[1:, :-1] + S[:-1, :-1]


def cube_integrals(scan: LevelScan, f: SampledFunction) -> np.ndarray:
    """Integral of f over each enumerated cube (zero extension outside)."""
    return cube_cell_sums(scan, f.prefix) * float(f.cell_volume)


def inside_window_mask(scan: LevelScan) -> np.ndarray:
    """Boolean array over cubes: True when the cube lies fully inside the
    window (no zero-extension region intersects it)."""
    per_axis = []
    n_cells = len(scan.owners[0])
    for ax in range(scan.dim):
        raw = scan.raw_edges[ax]
        per_axis.append((raw[:-1] >= 0) & (raw[1:] <= n_cells))
    if scan.dim == 1:
        return per_axis[0]
    return np.logical_and.outer(per_axis[0], per_axis[1])


def map_to_cells(scan: LevelScan, per_cube: np.ndarray) -> np.ndarray:
    """Spread a per-cube array onto the cell mesh via owner lookup."""
    if scan.dim == 1:
        return per_cube[scan.owners[0]]
    o0, o1 = scan.owners
    return per_cube[o0[:, None], o1[None, :]]


def parent_positions(scan: LevelScan, parent_scan: LevelScan) -> Tuple[np.ndarray, ...]:
    """Per-axis map from cube position at scan.level to the position of its
    parent cube at scan.level - 1."""
    if parent_scan.grid.shift != scan.grid.shift or parent_scan.level != scan.level - 1:
        raise GridError("parent scan must be one level coarser, same grid")
    e = 1 if scan.level % 2 == 0 else -1
    out = []
    for ax in range(scan.dim):
        tau = scan.grid.shift[ax]
        m = scan.m_lo[ax] + np.arange(scan.shape[ax], dtype=np.int64)
        parent_idx = np.floor_divide(m + e * tau, 2)
        pos = parent_idx - parent_scan.m_lo[ax]
        if np.any(pos < 0) or np.any(pos >= parent_scan.shape[ax]):
            raise GridError("parent cube not enumerated at coarser level")
        out.append(pos)
    return tuple(out)


def cell_block(scan: LevelScan, values: np.ndarray, pos: Tuple[int, ...]) -> np.ndarray:
    """View of the cell values covered by one cube's window part."""
    sl = tuple(
        slice(int(scan.edges[ax][pos[ax]]), int(scan.edges[ax][pos[ax] + 1]))
        for ax in range(scan.dim)
    )
    return values[sl]


def iter_scans(f: SampledFunction, grid: GridFamily):
    for level in grid.levels:
        yield level_scan(f, grid, level)
