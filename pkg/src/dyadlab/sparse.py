"""Stopping-time sparse families and Carleson sequences on dyadic grids.

The construction runs top-down on one grid.  Every coarsest-level cube with
positive mass is a root; below a stopping cube Q, the next stopping cubes
are the maximal descendants Q' with u(Q') > a * u(Q), where

    u(Q) = |Q|^{alpha/n} * (average of f over Q)

is the fractional-average functional.  Two facts make the family useful and
are certified numerically:

  * thickness: the direct children of Q occupy at most |Q| / a^{n/(n-alpha)},
    so the part of Q not covered by deeper stopping cubes has volume at
    least (1 - a^{-n/(n-alpha)}) |Q|;
  * domination: for any cube P in the scanned range, the deepest stopping
    cube Q containing P satisfies u(P) <= a * u(Q), hence the fractional
    maximal function is bounded by a times the sparse sum at every cell.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Dict, List, Optional, Tuple

import numpy as np

from .grid import DyadicCube, GridFamily, cube_to_obj, realize
from .sampled import MeshError, SampledFunction, integrate
from .scan import (
    LevelScan,
    cube_cell_sums,
    iter_scans,
    level_scan,
    map_to_cells,
    parent_positions,
)
from .operators import default_levels


class SparseError(ValueError):
    pass


@dataclass(frozen=True)
class StoppingCube:
    cube: DyadicCube
    u_value: float
    parent: int          # index of the deepest stopping strict ancestor, -1 at roots
    generation: int
    e_volume_full: float  # |Q| minus direct children volumes (full measure)
    e_cells: int          # cells owned by Q and no deeper stopping cube


class SparseFamily:
    """Stopping cubes of one grid together with ownership geometry."""

    def __init__(self, source: SampledFunction, grid: GridFamily, alpha: float,
                 ratio: float, cubes: List[StoppingCube],
                 owner: np.ndarray, level_members: Dict[int, Tuple[np.ndarray, np.ndarray]]):
        self.source = source
        self.grid = grid
        self.alpha = float(alpha)
        self.ratio = float(ratio)
        self.cubes = cubes
        self.owner = owner
        # per level: (flat positions of stopping cubes, their ids)
        self._level_members = level_members

    def __len__(self) -> int:
        return len(self.cubes)

    @property
    def theta(self) -> float:
        n = self.source.dim
        return n / (n - self.alpha)

    @property
    def guaranteed_thickness(self) -> float:
        return 1.0 - self.ratio ** (-self.theta)

    def thickness(self) -> float:
        """Worst realized |E_Q| / |Q| over the family (full measure)."""
        if not self.cubes:
            return 1.0
        n = self.source.dim
        worst = 1.0
        for sc in self.cubes:
            vol = float(realize(sc.cube).volume())
            worst = min(worst, sc.e_volume_full / vol)
        return worst

    def to_obj(self) -> dict:
        runs = []
        flat = self.owner.ravel()
        start = 0
        for i in range(1, flat.size + 1):
            if i == flat.size or flat[i] != flat[start]:
                runs.append([int(flat[start]), i - start])
                start = i
        return {
            "alpha": self.alpha,
            "ratio": self.ratio,
            "cubes": [
                {
                    "cube": cube_to_obj(sc.cube),
                    "u": sc.u_value,
                    "parent": sc.parent,
                    "generation": sc.generation,
                    "e_volume_full": sc.e_volume_full,
                    "e_cells": sc.e_cells,
                }
                for sc in self.cubes
            ],
            "owner_rle": runs,
        }


def _map_parent(arr: np.ndarray, pmaps: Tuple[np.ndarray, ...]) -> np.ndarray:
    if len(pmaps) == 1:
        return arr[pmaps[0]]
    return arr[pmaps[0][:, None], pmaps[1][None, :]]


def build_sparse(
    f: SampledFunction,
    alpha=0,
    ratio: float = None,
    shift: Optional[Tuple[int, ...]] = None,
    min_level: Optional[int] = None,
    max_level: Optional[int] = None,
) -> SparseFamily:
    """Stopping-time sparse family for the fractional-average functional."""
    n = f.dim
    a = float(alpha)
    if not 0 <= a < n:
        raise SparseError(f"alpha must lie in [0, n), got {alpha}")
    r = float(2 ** (n + 1)) if ratio is None else float(ratio)
    if r <= 1.0:
        raise SparseError("threshold ratio must exceed 1")
    sh = (0,) * n if shift is None else tuple(shift)
    lo, hi = default_levels(f, min_level, max_level)
    grid = GridFamily(n, sh, lo, hi, f.window)
    scans = [level_scan(f, grid, level) for level in grid.levels]
    cellvol = float(f.cell_volume)
    pre = f.prefix

    cubes: List[DyadicCube] = []
    gens: List[int] = []
    parents: List[int] = []
    u_of: List[float] = []
    level_members: Dict[int, Tuple[np.ndarray, np.ndarray]] = {}
    deep_u = None
    deep_id = None
    next_id = 0
    for idx, scan in enumerate(scans):
        k = scan.level
        u = cube_cell_sums(scan, pre) * (2.0 ** (k * (n - a)) * cellvol)
        if idx == 0:
            inherited_u = np.zeros_like(u)
            inherited_id = np.full(u.shape, -1, dtype=np.int64)
            is_stop = u > 0
        else:
            pmaps = parent_positions(scan, scans[idx - 1])
            inherited_u = _map_parent(deep_u, pmaps)
            inherited_id = _map_parent(deep_id, pmaps)
            is_stop = u > r * inherited_u
        ids_here = np.full(u.shape, -1, dtype=np.int64)
        count = int(np.count_nonzero(is_stop))
        if count:
            ids_here[is_stop] = np.arange(next_id, next_id + count, dtype=np.int64)
            stop_positions = np.argwhere(is_stop)
            stop_parents = inherited_id[is_stop]
            stop_u = u[is_stop]
            for row, pid, uval in zip(stop_positions, stop_parents, stop_u):
                pid = int(pid)
                parents.append(pid)
                gens.append(0 if pid < 0 else gens[pid] + 1)
                u_of.append(float(uval))
                cubes.append(scan.cube_at(tuple(int(x) for x in row)))
            level_members[k] = (stop_positions, np.arange(next_id, next_id + count))
            next_id += count
        deep_u = np.where(is_stop, u, inherited_u)
        deep_id = np.where(is_stop, ids_here, inherited_id)

    owner = map_to_cells(scans[-1], deep_id) if scans else np.full(f.values.shape, -1, np.int64)

    # E measures: full-volume by direct-children subtraction, cell counts by
    # ownership
    vol_of = [float(realize(c).volume()) for c in cubes]
    e_full = list(vol_of)
    for cid, pid in enumerate(parents):
        if pid >= 0:
            e_full[pid] -= vol_of[cid]
    counts = np.bincount(owner.ravel()[owner.ravel() >= 0], minlength=next_id) if next_id else np.zeros(0, int)

    stopping = [
        StoppingCube(
            cube=cubes[i],
            u_value=u_of[i],
            parent=parents[i],
            generation=gens[i],
            e_volume_full=e_full[i],
            e_cells=int(counts[i]) if next_id else 0,
        )
        for i in range(next_id)
    ]
    return SparseFamily(f, grid, a, r, stopping, owner, level_members)


def sparse_operator(
    family: SparseFamily,
    g: Optional[SampledFunction] = None,
    form: str = "chi",
) -> SampledFunction:
    """Sparse fractional sum over the family, applied to g (default: the
    function the family was built from).

    form="chi": sum over stopping cubes containing x of |Q|^{alpha/n} avg_Q g;
    form="disjoint": only the deepest stopping cube containing x contributes.
    """
    f = family.source
    if g is None:
        g = f
    f.require_same_mesh(g)
    n = f.dim
    a = family.alpha
    cellvol = float(f.cell_volume)
    pre = g.prefix
    if form == "disjoint":
        u_by_id = np.zeros(len(family.cubes) + 1)
        for sc_id, sc in enumerate(family.cubes):
            u_by_id[sc_id] = float(realize(sc.cube).volume()) ** (a / n - 1.0) * integrate(g, sc.cube)
        out = np.where(family.owner >= 0, u_by_id[family.owner], 0.0)
        return SampledFunction(f.dim, f.lower, f.side, out, meta={"operator": "sparse_disjoint"})
    if form != "chi":
        raise SparseError(f"unknown form {form!r}")
    out = np.zeros_like(f.values)
    for level, (positions, ids) in sorted(family._level_members.items()):
        scan = level_scan(f, family.grid, level)
        u = cube_cell_sums(scan, pre) * (2.0 ** (level * (n - a)) * cellvol)
        vals = np.zeros_like(u)
        sel = tuple(positions[:, ax] for ax in range(f.dim))
        vals[sel] = u[sel]
        out += map_to_cells(scan, vals)
    return SampledFunction(f.dim, f.lower, f.side, out, meta={"operator": "sparse_chi"})


# === Carleson sequences =======================================================

class CarlesonSequence:
    """Nonnegative coefficients c_Q over the cubes of one grid range."""

    def __init__(self, mesh: SampledFunction, grid: GridFamily, values: Dict[int, np.ndarray]):
        self.mesh = mesh
        self.grid = grid
        vals = {}
        for level in grid.levels:
            scan = level_scan(mesh, grid, level)
            arr = np.asarray(values[level], dtype=np.float64)
            if arr.shape != scan.shape:
                raise SparseError(f"level {level} coefficient shape {arr.shape} != {scan.shape}")
            if np.any(arr < 0) or not np.all(np.isfinite(arr)):
                raise SparseError("coefficients must be finite and nonnegative")
            vals[level] = arr
        self.values = vals

    @classmethod
    def from_function(cls, mesh: SampledFunction, grid: GridFamily, fn) -> "CarlesonSequence":
        """fn(scan, level) -> per-cube array."""
        vals = {}
        for level in grid.levels:
            scan = level_scan(mesh, grid, level)
            vals[level] = np.asarray(fn(scan, level), dtype=np.float64)
        return cls(mesh, grid, vals)


def _scatter_add(parent_arr: np.ndarray, pmaps, child_arr: np.ndarray):
    if len(pmaps) == 1:
        np.add.at(parent_arr, pmaps[0], child_arr)
    else:
        flat = parent_arr.ravel()
        idx = (pmaps[0][:, None] * parent_arr.shape[1] + pmaps[1][None, :]).ravel()
        np.add.at(flat, idx, child_arr.ravel())
        parent_arr[...] = flat.reshape(parent_arr.shape)


def subtree_sums(seq: CarlesonSequence) -> Dict[int, np.ndarray]:
    """For every cube, the sum of coefficients over its descendants within
    the level range (itself included), via a bottom-up sweep."""
    grid = seq.grid
    scans = {level: level_scan(seq.mesh, grid, level) for level in grid.levels}
    totals = {level: seq.values[level].copy() for level in grid.levels}
    for level in sorted(grid.levels, reverse=True):
        if level == grid.min_level:
            continue
        pmaps = parent_positions(scans[level], scans[level - 1])
        _scatter_add(totals[level - 1], pmaps, totals[level])
    return totals


def certify_carleson(seq: CarlesonSequence, mu: SampledFunction) -> dict:
    """Least A with sum_{Q subset Q0} c_Q <= A mu(Q0) over enumerated Q0."""
    seq.mesh.require_same_mesh(mu)
    totals = subtree_sums(seq)
    best = 0.0
    best_cube = None
    infinite = False
    for level in seq.grid.levels:
        scan = level_scan(seq.mesh, seq.grid, level)
        mu_q = cube_cell_sums(scan, mu.prefix) * float(mu.cell_volume)
        tot = totals[level]
        pos = mu_q > 0
        with np.errstate(divide="ignore", invalid="ignore"):
            ratio = np.where(pos, tot / np.where(pos, mu_q, 1.0), 0.0)
        if np.any(~pos & (tot > 0)):
            infinite = True
        flat = int(np.argmax(ratio))
        if ratio.ravel()[flat] > best:
            best = float(ratio.ravel()[flat])
            best_cube = scan.cube_at(np.unravel_index(flat, scan.shape))
    return {
        "constant": math.inf if infinite else best,
        "argmax_cube": cube_to_obj(best_cube) if best_cube is not None else None,
    }


def carleson_embed_check(seq: CarlesonSequence, a_values: Dict[int, np.ndarray], mu: SampledFunction) -> dict:
    """Test sum_Q c_Q a_Q <= A * integral of sup_{Q owning x} a_Q d mu,
    with A the certified Carleson constant of the sequence."""
    seq.mesh.require_same_mesh(mu)
    lhs = 0.0
    sup_cells = np.zeros_like(seq.mesh.values)
    for level in seq.grid.levels:
        scan = level_scan(seq.mesh, seq.grid, level)
        a_arr = np.asarray(a_values[level], dtype=np.float64)
        if a_arr.shape != scan.shape:
            raise SparseError("a_Q shape mismatch")
        if np.any(a_arr < 0):
            raise SparseError("a_Q must be nonnegative")
        lhs += float(np.sum(seq.values[level] * a_arr))
        np.maximum(sup_cells, map_to_cells(scan, a_arr), out=sup_cells)
    rhs_integral = float(np.sum(sup_cells * mu.values)) * float(mu.cell_volume)
    constant = certify_carleson(seq, mu)["constant"]
    return {
        "lhs": lhs,
        "sup_integral": rhs_integral,
        "constant": constant,
        "rhs": constant * rhs_integral,
    }
