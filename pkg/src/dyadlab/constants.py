"""Weight constants and testing constants over enumerated cube families.

Every value reported here is the exact maximum of a per-cube functional
over the shifted-dyadic cubes that fit fully inside the sampling window,
between two levels.  That makes it an honest lower bound for the true
supremum, and the realizing cube is recorded alongside the value.  Cubes
on which a denominator measure vanishes are skipped and counted.

The scan order is deterministic: levels ascend, the unshifted grid comes
first, and within a level cubes run in row-major index order.  Ties keep
the earliest cube, so the argmax is reproducible across runs.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Optional, Sequence, Tuple

import numpy as np

from .grid import Box, DyadicCube, GridFamily, cube_to_obj, realize
from .operators import (
    ancestor_chain,
    default_levels,
    dyadic_frac_maximal,
    frac_maximal,
    _grids,
)
from .orlicz import YoungFunction, luxemburg
from .sampled import (
    ExponentTuple,
    SampledFunction,
    average,
    integrate,
    parse_rational,
)
from .scan import (
    LevelScan,
    cell_block,
    cube_cell_sums,
    cube_integrals,
    inside_window_mask,
    level_scan,
    prefix_sum,
)


class ConstantError(ValueError):
    pass


# === weight pairs ============================================================


class WeightPair:
    """Two nonnegative weights on a shared mesh.

    The first weight scores the target side of an inequality, the second
    is the density the operator acts on.  ``provenance`` is a free-form
    tag ("classical", "factored", ...) carried into reports.
    """

    __slots__ = ("u", "sigma", "provenance")

    def __init__(self, u: SampledFunction, sigma: SampledFunction, provenance: str = ""):
        u.require_same_mesh(sigma)
        self.u = u
        self.sigma = sigma
        self.provenance = str(provenance)

    @classmethod
    def classical(cls, w: SampledFunction, e: ExponentTuple) -> "WeightPair":
        """u = w^q, sigma = w^{-p'} from a single strictly positive weight."""
        if float(np.min(w.values)) <= 0.0:
            raise ConstantError("classical pairs need a strictly positive weight")
        return cls(w.power(float(e.q)), w.power(-float(e.pprime)), provenance="classical")

    def swapped(self) -> "WeightPair":
        return WeightPair(self.sigma, self.u, provenance=self.provenance)

    def to_obj(self) -> dict:
        return {
            "u": self.u.to_obj(),
            "sigma": self.sigma.to_obj(),
            "provenance": self.provenance,
        }

    @classmethod
    def from_obj(cls, obj: dict) -> "WeightPair":
        return cls(
            SampledFunction.from_obj(obj["u"]),
            SampledFunction.from_obj(obj["sigma"]),
            provenance=obj.get("provenance", ""),
        )


# === reports =================================================================


@dataclass(frozen=True)
class ConstantReport:
    """Maximum of a per-cube functional over an enumerated cube family.

    ``value`` is a lower bound for the supremum over all cubes; ``argmax``
    is the first cube attaining it (lowest level, unshifted grid first,
    then row-major index order).  ``n_skipped`` counts cubes dropped
    because a denominator measure vanished.
    """

    name: str
    value: float
    argmax: Optional[DyadicCube]
    n_scored: int
    n_skipped: int
    min_level: int
    max_level: int
    shifts: Tuple[Tuple[Fraction, ...], ...]

    def to_obj(self) -> dict:
        return {
            "name": self.name,
            "value": self.value if math.isfinite(self.value) else None,
            "infinite": bool(math.isinf(self.value)),
            "argmax": cube_to_obj(self.argmax) if self.argmax is not None else None,
            "n_scored": self.n_scored,
            "n_skipped": self.n_skipped,
            "min_level": self.min_level,
            "max_level": self.max_level,
            "shifts": [[str(c) for c in s] for s in self.shifts],
        }


def _sup_scan(
    name: str,
    mesh: SampledFunction,
    shifts,
    min_level: Optional[int],
    max_level: Optional[int],
    level_values: Callable[[LevelScan], Tuple[np.ndarray, np.ndarray]],
) -> ConstantReport:
    """Run a per-cube functional over every enumerated cube and take the max.

    ``level_values(scan)`` returns (values, skip) arrays over scan.shape;
    only cubes fully inside the window and not skipped are scored.
    """
    grids = _grids(mesh, shifts, min_level, max_level)
    lo, hi = grids[0].min_level, grids[0].max_level
    best = -math.inf
    best_cube: Optional[DyadicCube] = None
    scored = 0
    skipped = 0
    for level in range(lo, hi + 1):
        for grid in grids:
            scan = level_scan(mesh, grid, level)
            inside = inside_window_mask(scan)
            if not bool(inside.any()):
                continue
            vals, skip = level_values(scan)
            skip = skip | np.isnan(vals)
            ok = inside & ~skip
            skipped += int(np.count_nonzero(inside & skip))
            n_ok = int(np.count_nonzero(ok))
            scored += n_ok
            if n_ok == 0:
                continue
            masked = np.where(ok, vals, -math.inf)
            flat = int(np.argmax(masked))
            v = float(masked.reshape(-1)[flat])
            if v > best:
                best = v
                pos = np.unravel_index(flat, scan.shape)
                best_cube = scan.cube_at(tuple(int(t) for t in pos))
    return ConstantReport(
        name=name,
        value=best if best_cube is not None else 0.0,
        argmax=best_cube,
        n_scored=scored,
        n_skipped=skipped,
        min_level=lo,
        max_level=hi,
        shifts=tuple(g.shift for g in grids),
    )


def _cube_loop(per_cube: Callable[[LevelScan, Tuple[int, ...]], Optional[float]]):
    """Adapt a scalar per-cube functional (None = skip) to _sup_scan form."""

    def fn(scan: LevelScan) -> Tuple[np.ndarray, np.ndarray]:
        vals = np.zeros(scan.shape, dtype=float)
        skip = np.zeros(scan.shape, dtype=bool)
        inside = inside_window_mask(scan)
        for pos in np.ndindex(scan.shape):
            if not inside[pos]:
                continue
            out = per_cube(scan, pos)
            if out is None:
                skip[pos] = True
            else:
                vals[pos] = out
        return vals, skip

    return fn


# === the two-weight fractional constant =====================================


def _apq_exponents(e: ExponentTuple) -> Tuple[float, float, float]:
    au = float(1 / e.q)
    asig = float(1 / e.pprime)
    ex = float(e.alpha / e.n + 1 / e.q - 1 / e.p)
    return au, asig, ex


def apq_alpha(pair: WeightPair, e: ExponentTuple, cube: DyadicCube) -> float:
    """Per-cube two-weight fractional constant

        |Q|^{alpha/n + 1/q - 1/p} (avg_Q u)^{1/q} (avg_Q sigma)^{1/p'}.

    Symmetric under (u, sigma, p, q) -> (sigma, u, q', p') exactly, down
    to the last bit: the dual call multiplies the same two floats.
    """
    if cube.dim != pair.u.dim:
        raise ConstantError("cube dimension does not match the weights")
    au, asig, ex = _apq_exponents(e)
    box = realize(cube)
    mu = average(pair.u, box)
    ms = average(pair.sigma, box)
    return float(box.volume()) ** ex * ((mu ** au) * (ms ** asig))


def apq_alpha_constant(
    pair: WeightPair,
    e: ExponentTuple,
    shifts=None,
    min_level: Optional[int] = None,
    max_level: Optional[int] = None,
) -> ConstantReport:
    au, asig, ex = _apq_exponents(e)

    def fn(scan: LevelScan) -> Tuple[np.ndarray, np.ndarray]:
        vol = scan.cube_volume()
        mu = cube_integrals(scan, pair.u) / vol
        ms = cube_integrals(scan, pair.sigma) / vol
        vals = vol ** ex * ((mu ** au) * (ms ** asig))
        return vals, np.zeros(scan.shape, dtype=bool)

    return _sup_scan("apq_alpha", pair.u, shifts, min_level, max_level, fn)


# === A_infty flavors =========================================================


def ainfty_exp(
    w: SampledFunction,
    shifts=None,
    min_level: Optional[int] = None,
    max_level: Optional[int] = None,
) -> ConstantReport:
    """Exponential-mean flavor: sup_Q (avg_Q w) exp(-avg_Q log w).

    Cubes where w has a zero cell but positive mass score +inf (the log
    average diverges); cubes with zero mass are skipped.
    """
    pos = w.values > 0
    logs = np.where(pos, np.log(np.where(pos, w.values, 1.0)), 0.0)
    lpre = prefix_sum(logs)
    zpre = prefix_sum((~pos).astype(float))
    cellvol = float(w.cell_volume)

    def fn(scan: LevelScan) -> Tuple[np.ndarray, np.ndarray]:
        vol = scan.cube_volume()
        cells = max(1, round(vol / cellvol))
        mw = cube_integrals(scan, w) / vol
        nzero = np.rint(cube_cell_sums(scan, zpre))
        lsum = cube_cell_sums(scan, lpre)
        skip = mw <= 0.0
        with np.errstate(over="ignore"):
            vals = mw * np.exp(-lsum / cells)
        vals = np.where(nzero > 0, math.inf, vals)
        return vals, skip

    return _sup_scan("ainfty_exp", w, shifts, min_level, max_level, fn)


def _fujii_value(
    w: SampledFunction,
    box: Box,
    inner_shifts,
    inner_min: Optional[int],
    inner_max: Optional[int],
) -> Optional[float]:
    mass = integrate(w, box)
    if mass <= 0.0:
        return None
    m = frac_maximal(w.restrict_to(box), 0.0, shifts=inner_shifts,
                     min_level=inner_min, max_level=inner_max)
    return integrate(m, box) / mass


def ainfty_m(
    w: SampledFunction,
    shifts=None,
    min_level: Optional[int] = None,
    max_level: Optional[int] = None,
    inner_shifts=None,
) -> ConstantReport:
    """Maximal-function flavor: sup_Q w(Q)^{-1} int_Q M(w chi_Q).

    The inner M is the shifted-grid surrogate of the uncentered maximal
    (every shift by default), evaluated on w cut off outside Q.
    """

    def per_cube(scan: LevelScan, pos) -> Optional[float]:
        box = realize(scan.cube_at(pos))
        return _fujii_value(w, box, inner_shifts, min_level, max_level)

    return _sup_scan("ainfty_m", w, shifts, min_level, max_level, _cube_loop(per_cube))


def ap_constant(
    w: SampledFunction,
    p,
    shifts=None,
    min_level: Optional[int] = None,
    max_level: Optional[int] = None,
) -> ConstantReport:
    """Muckenhoupt constant sup_Q (avg_Q w)(avg_Q w^{1-p'})^{p-1}."""
    pf = parse_rational(p)
    if pf <= 1:
        raise ConstantError(f"the exponent must exceed 1, got {p}")
    if float(np.min(w.values)) <= 0.0:
        raise ConstantError("the Muckenhoupt functional needs a strictly positive weight")
    pprime = pf / (pf - 1)
    dual_pow = w.power(float(1 - pprime))
    pm1 = float(pf - 1)

    def fn(scan: LevelScan) -> Tuple[np.ndarray, np.ndarray]:
        vol = scan.cube_volume()
        mv = cube_integrals(scan, w) / vol
        ms = cube_integrals(scan, dual_pow) / vol
        vals = mv * ms ** pm1
        return vals, np.zeros(scan.shape, dtype=bool)

    return _sup_scan("ap_constant", w, shifts, min_level, max_level, fn)


# === one-supremum mixed constants ===========================================


def mixed_one_sup(
    pair: WeightPair,
    e: ExponentTuple,
    shifts=None,
    min_level: Optional[int] = None,
    max_level: Optional[int] = None,
    flavor: str = "apq_exp",
) -> ConstantReport:
    """Single supremum of a product of per-cube functionals.

    flavor="apq_exp":  sup_Q  Apq(u, sigma, Q) * AexpInf(sigma, Q)^{1/q}
    flavor="ap_m":     sup_Q  A_{s(q')}(sigma, Q)^{1/p'} * Fujii(sigma, Q)^{1/q}

    Both put the whole product under one sup, which is never larger than
    the product of the separate suprema.
    """
    if flavor == "apq_exp":
        au, asig, ex = _apq_exponents(e)
        sigma = pair.sigma
        pos = sigma.values > 0
        logs = np.where(pos, np.log(np.where(pos, sigma.values, 1.0)), 0.0)
        lpre = prefix_sum(logs)
        zpre = prefix_sum((~pos).astype(float))
        cellvol = float(sigma.cell_volume)
        gq = float(1 / e.q)

        def fn(scan: LevelScan) -> Tuple[np.ndarray, np.ndarray]:
            vol = scan.cube_volume()
            cells = max(1, round(vol / cellvol))
            mu = cube_integrals(scan, pair.u) / vol
            ms = cube_integrals(scan, sigma) / vol
            apq = vol ** ex * ((mu ** au) * (ms ** asig))
            nzero = np.rint(cube_cell_sums(scan, zpre))
            lsum = cube_cell_sums(scan, lpre)
            skip = ms <= 0.0
            with np.errstate(over="ignore"):
                aexp = ms * np.exp(-lsum / cells)
            aexp = np.where(nzero > 0, math.inf, aexp)
            with np.errstate(invalid="ignore"):
                vals = apq * aexp ** gq
            return vals, skip

        return _sup_scan("mixed_apq_exp", pair.u, shifts, min_level, max_level, fn)

    if flavor == "ap_m":
        w = pair.sigma
        if float(np.min(w.values)) <= 0.0:
            raise ConstantError("the ap_m flavor needs a strictly positive second weight")
        r = e.s_dual
        rprime = r / (r - 1)
        dual_pow = w.power(float(1 - rprime))
        rm1 = float(r - 1)
        beta = float(1 / e.pprime)
        gamma = float(1 / e.q)

        def per_cube(scan: LevelScan, pos) -> Optional[float]:
            box = realize(scan.cube_at(pos))
            vol = float(box.volume())
            mv = integrate(w, box) / vol
            ms = integrate(dual_pow, box) / vol
            fujii = _fujii_value(w, box, None, min_level, max_level)
            if fujii is None:
                return None
            return (mv * ms ** rm1) ** beta * fujii ** gamma

        return _sup_scan("mixed_ap_m", w, shifts, min_level, max_level,
                         _cube_loop(per_cube))

    raise ConstantError(f"unknown mixed flavor {flavor!r}")


# === Orlicz-bumped constants =================================================


def apq_bump(
    pair: WeightPair,
    e: ExponentTuple,
    phi: YoungFunction,
    shifts=None,
    min_level: Optional[int] = None,
    max_level: Optional[int] = None,
    side: str = "second",
    psi: Optional[YoungFunction] = None,
) -> ConstantReport:
    """Bumped two-weight constant with the sigma average replaced by a
    Luxemburg average:

        side="second":  |Q|^{alpha/n+1/q-1/p} (avg_Q u)^{1/q} ||sigma^{1/p'}||_{phi,Q}
        side="both":    |Q|^{alpha/n+1/q-1/p} ||u^{1/q}||_{psi,Q} ||sigma^{1/p'}||_{phi,Q}

    With phi(t) = t^{p'} the second-side form reduces to the plain
    constant exactly (the Luxemburg average of sigma^{1/p'} is then the
    p'-mean, i.e. (avg_Q sigma)^{1/p'}).
    """
    au, asig, ex = _apq_exponents(e)
    if side not in ("second", "both"):
        raise ConstantError(f"unknown bump side {side!r}")
    if side == "both" and psi is None:
        raise ConstantError("side='both' needs a Young function for the u side")
    cellvol = float(pair.u.cell_volume)

    def lux_column(scan: LevelScan, f: SampledFunction, root: float,
                   fn_phi: YoungFunction) -> np.ndarray:
        # power-family fast path: || f^{1/root} ||_{t^r, Q} is an L^r mean
        if getattr(fn_phi, "is_power", False):
            r = float(fn_phi.r)
            if r == root:
                g = f
            else:
                g = f.power(r / root)
            vol = scan.cube_volume()
            return (cube_integrals(scan, g) / vol) ** (1.0 / r)
        fpow = f.power(1.0 / root)
        vol = scan.cube_volume()
        out = np.zeros(scan.shape, dtype=float)
        inside = inside_window_mask(scan)
        for pos in np.ndindex(scan.shape):
            if not inside[pos]:
                continue
            block = cell_block(scan, fpow.values, pos)
            out[pos] = luxemburg(block.ravel(), cellvol, vol, fn_phi)
        return out

    def fn(scan: LevelScan) -> Tuple[np.ndarray, np.ndarray]:
        vol = scan.cube_volume()
        lux_s = lux_column(scan, pair.sigma, float(e.pprime), phi)
        if side == "second":
            mu = (cube_integrals(scan, pair.u) / vol) ** au
        else:
            mu = lux_column(scan, pair.u, float(e.q), psi)
        vals = vol ** ex * (mu * lux_s)
        return vals, np.zeros(scan.shape, dtype=bool)

    name = "apq_bump_second" if side == "second" else "apq_bump_both"
    return _sup_scan(name, pair.u, shifts, min_level, max_level, fn)


# === testing constants =======================================================


def outer_testing_constant(
    pair: WeightPair,
    e: ExponentTuple,
    shifts=None,
    min_level: Optional[int] = None,
    max_level: Optional[int] = None,
) -> ConstantReport:
    """Testing constant for the outer shell potential:

        sup_{Q0} ( int I^{Q0}(sigma chi_{Q0})^q u dx )^{1/q} sigma(Q0)^{-1/p}.

    The potential is constant on the shells between consecutive ancestors
    of Q0, so the integral collapses to an exact finite sum over the
    ancestor chain; the tail beyond the window carries no u mass.
    """
    n = e.n
    alpha = float(e.alpha)
    if not 0.0 < alpha < n:
        raise ConstantError("the shell potential needs 0 < alpha < n")
    if pair.u.dim != n:
        raise ConstantError("exponent dimension does not match the weights")
    coeff = 1.0 / (1.0 - 2.0 ** (alpha - n))
    shell_pow = float((e.alpha / n - 1) * e.q)
    inv_q = float(1 / e.q)
    inv_pprime = float(1 / e.pprime)
    window = pair.u.window

    def per_cube(scan: LevelScan, pos) -> Optional[float]:
        cube = scan.cube_at(pos)
        mass = integrate(pair.sigma, realize(cube))
        if mass <= 0.0:
            return None
        total = 0.0
        prev = 0.0
        for anc in ancestor_chain(cube, window):
            b = realize(anc)
            here = integrate(pair.u, b)
            total += float(b.volume()) ** shell_pow * (here - prev)
            prev = here
        return coeff * mass ** inv_pprime * total ** inv_q

    return _sup_scan("outer_testing", pair.u, shifts, min_level, max_level,
                     _cube_loop(per_cube))


def sawyer_maximal_testing(
    pair: WeightPair,
    e: ExponentTuple,
    shifts=None,
    min_level: Optional[int] = None,
    max_level: Optional[int] = None,
    which: str = "forward",
    inner_shifts=None,
) -> ConstantReport:
    """Maximal-operator testing constants on cut-off weights.

    which="forward":  sup_Q ( int_Q M_alpha(u chi_Q)^{p'} sigma )^{1/p'} u(Q)^{-1/q'}
    which="dual":     sup_Q ( int_Q M_alpha(sigma chi_Q)^q u )^{1/q} sigma(Q)^{-1/p}
    """
    alpha = float(e.alpha)
    if which == "forward":
        inner, outer = pair.u, pair.sigma
        p_in = float(e.pprime)
        p_norm = float(1 / e.qprime)
    elif which == "dual":
        inner, outer = pair.sigma, pair.u
        p_in = float(e.q)
        p_norm = float(1 / e.p)
    else:
        raise ConstantError(f"unknown testing side {which!r}")

    def per_cube(scan: LevelScan, pos) -> Optional[float]:
        box = realize(scan.cube_at(pos))
        mass = integrate(inner, box)
        if mass <= 0.0:
            return None
        m = frac_maximal(inner.restrict_to(box), alpha, shifts=inner_shifts,
                         min_level=min_level, max_level=max_level)
        num = integrate(m.power(p_in) * outer, box)
        return num ** (1.0 / p_in) * mass ** (-p_norm)

    name = f"sawyer_{which}"
    return _sup_scan(name, pair.u, shifts, min_level, max_level, _cube_loop(per_cube))


def md_sp_testing(
    pair: WeightPair,
    e: ExponentTuple,
    shifts=None,
    min_level: Optional[int] = None,
    max_level: Optional[int] = None,
) -> ConstantReport:
    """Plain-maximal testing constant at the Sobolev-linked exponent:

        sup_R ( int_R M^D(sigma chi_R)^{s} u )^{1/q} sigma(R)^{-1/q},

    s = 1 + q/p'.  Requires Sobolev-scaling exponents; the inner maximal
    runs on the same grid that R came from.
    """
    if not e.is_sobolev:
        raise ConstantError("this testing constant needs Sobolev-scaling exponents")
    s = float(e.s_p)
    inv_q = float(1 / e.q)

    def per_cube(scan: LevelScan, pos) -> Optional[float]:
        box = realize(scan.cube_at(pos))
        mass = integrate(pair.sigma, box)
        if mass <= 0.0:
            return None
        m = dyadic_frac_maximal(pair.sigma.restrict_to(box), 0.0,
                                shift=scan.grid.shift,
                                min_level=min_level, max_level=max_level)
        num = integrate(m.power(s) * pair.u, box)
        return num ** inv_q * mass ** (-inv_q)

    return _sup_scan("md_sp_testing", pair.u, shifts, min_level, max_level,
                     _cube_loop(per_cube))
