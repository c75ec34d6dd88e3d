"""Lower bounds for weighted operator norms, and the reports that set
them against constant-based upper bounds.

Every norm produced here is a best Rayleigh quotient over a finite,
reproducible family of nonnegative test functions, so it is a certified
lower bound for the corresponding operator norm at the chosen
truncation.  Upper-bound partners (Muckenhoupt-type products, testing
constants, tail-integral quadrature bounds) come from the constants and
orlicz modules.  The report builders place the two sides next to each
other and record the observed gap; they assert nothing beyond the
inequalities that hold exactly at the discrete level.

Test families combine three sources:

  * indicators of every grid cube inside the window that carries
    positive source mass;
  * seeded random step functions on a fixed coarse partition, so the
    family is reproducible and mesh-independent;
  * duality-optimal functions T(w chi_Q)^{e-1} chi_Q built from the
    operator itself, the choice that saturates the weak-type pairing.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterator, Optional, Tuple

import numpy as np

from .sampled import (
    SampledFunction,
    ExponentTuple,
    lp_norm,
    weak_lq_norm,
    parse_rational,
)
from .scan import cube_integrals, inside_window_mask, iter_scans
from .operators import (
    frac_maximal,
    dyadic_frac_maximal,
    dyadic_riesz,
    riesz_potential_1d,
    orlicz_maximal,
    outer_riesz,
    weighted_dyadic_maximal,
    _grids,
)
from .orlicz import PowerLog, YoungFunction, BpReport, bp_classify, CONVERGENT
from .constants import (
    WeightPair,
    apq_bump,
    ap_constant,
    ainfty_m,
    mixed_one_sup,
    sawyer_maximal_testing,
    md_sp_testing,
)


class NormError(ValueError):
    pass


OPERATOR_IDS = (
    "identity",
    "frac_maximal",
    "dyadic_frac_maximal",
    "dyadic_riesz",
    "riesz_1d",
    "orlicz_maximal",
    "weighted_dyadic_maximal",
)


# --- test families ----------------------------------------------------------


@dataclass(frozen=True)
class TestFamily:
    """Recipe for a reproducible family of nonnegative test functions."""

    __test__ = False  # not a pytest collection target

    indicators: bool = True
    random_steps: int = 6
    seed: int = 715
    duality: bool = True

    def __post_init__(self):
        if self.random_steps < 0:
            raise NormError("random_steps must be nonnegative")

    def describe(self) -> dict:
        return {
            "indicators": self.indicators,
            "random_steps": self.random_steps,
            "seed": self.seed,
            "duality": self.duality,
        }


@dataclass(frozen=True)
class NormEstimate:
    """Best Rayleigh quotient over a test family: a lower bound for the
    operator norm between the named weighted spaces."""

    operator: str
    source: str
    target: str
    value: float
    argmax: Optional[str]
    family_size: int

    def to_obj(self) -> dict:
        return {
            "operator": self.operator,
            "source": self.source,
            "target": self.target,
            "value": self.value,
            "argmax": self.argmax,
            "family_size": self.family_size,
        }


def unit_pair(like: SampledFunction) -> WeightPair:
    """Lebesgue measure on both slots, on the mesh of the given function."""
    one = SampledFunction.constant(1.0, like.dim, like.lower, like.side, like.ncells)
    return WeightPair(one, one, provenance="lebesgue")


def _blocks_for(ncells: int) -> int:
    for b in (12, 6, 3):
        if ncells % b == 0:
            return b
    return 1


def _inside_cubes(mesh: SampledFunction, dens: SampledFunction, shifts, min_level, max_level):
    """Yield (name, box, mass) over grid cubes fully inside the window
    whose dens-mass is positive.  Deterministic order: shifts as listed
    (zero first), levels ascending, positions row-major."""
    for grid in _grids(mesh, shifts, min_level, max_level):
        for scan in iter_scans(mesh, grid):
            inside = inside_window_mask(scan)
            if not np.any(inside):
                continue
            masses = cube_integrals(scan, dens)
            for idx in np.argwhere(inside & (masses > 0)):
                pos = tuple(int(i) for i in idx)
                name = f"chi[s={grid.shift},l={scan.level},pos={pos}]"
                yield name, scan.cube_at(pos).box(), float(masses[tuple(idx)])


def _cutoff(w: SampledFunction, box) -> SampledFunction:
    """w restricted to a cell-aligned box, zero elsewhere, same mesh."""
    sl = w.cell_slices(box, require_aligned=True)
    arr = np.zeros_like(w.values)
    arr[sl] = w.values[sl]
    return w.with_values(arr)


def _apply_operator(op, f, dens, alpha, min_level, max_level, phi):
    """Apply the named operator to the measure f d(dens)."""
    if op == "identity":
        return f * dens
    if op == "frac_maximal":
        return frac_maximal(f * dens, alpha, min_level=min_level, max_level=max_level)
    if op == "dyadic_frac_maximal":
        return dyadic_frac_maximal(f * dens, alpha, min_level=min_level, max_level=max_level)
    if op == "dyadic_riesz":
        return dyadic_riesz(f * dens, alpha, min_level=min_level, max_level=max_level)
    if op == "riesz_1d":
        return riesz_potential_1d(f * dens, alpha)
    if op == "orlicz_maximal":
        if phi is None:
            raise NormError("orlicz_maximal needs a Young function")
        return orlicz_maximal(f * dens, phi, beta=alpha, min_level=min_level, max_level=max_level)
    if op == "weighted_dyadic_maximal":
        return weighted_dyadic_maximal(f, dens, beta=alpha, min_level=min_level, max_level=max_level)
    raise NormError(f"unknown operator id {op!r}")


def _iter_family(
    op: str,
    pair: WeightPair,
    e: ExponentTuple,
    family: TestFamily,
    side: str,
    alpha,
    min_level,
    max_level,
    phi,
) -> Iterator[Tuple[str, SampledFunction]]:
    mesh = pair.u
    source = pair.sigma if side == "forward" else pair.u

    if family.indicators:
        for name, box, _mass in _inside_cubes(mesh, source, None, min_level, max_level):
            yield name, SampledFunction.indicator(box, mesh.dim, mesh.lower, mesh.side, mesh.ncells)

    if family.random_steps > 0:
        rng = np.random.default_rng(family.seed)
        blocks = _blocks_for(mesh.ncells)
        reps = mesh.ncells // blocks
        for k in range(family.random_steps):
            coarse = rng.exponential(1.0, size=(blocks,) * mesh.dim)
            vals = coarse
            for ax in range(mesh.dim):
                vals = np.repeat(vals, reps, axis=ax)
            yield f"step[{k}]", mesh.with_values(vals)

    if family.duality:
        # Saturating functions for the weak-type pairing: cut the other
        # weight to a cube, push it through the operator, and raise to
        # the conjugate-exponent power on the cube itself.
        other = pair.u if side == "forward" else pair.sigma
        expo = float(e.pprime - 1) if side == "forward" else float(e.q - 1)
        zero_shift = [(0,) * mesh.dim]
        for name, box, _mass in _inside_cubes(mesh, other, zero_shift, min_level, max_level):
            seed = _apply_operator(op, SampledFunction.indicator(box, mesh.dim, mesh.lower, mesh.side, mesh.ncells), other, alpha, min_level, max_level, phi)
            sl = other.cell_slices(box, require_aligned=True)
            on_cube = np.zeros_like(seed.values, dtype=bool)
            on_cube[sl] = True
            pos = on_cube & (seed.values > 0)
            if not np.any(pos):
                continue
            arr = np.zeros_like(seed.values)
            with np.errstate(over="ignore"):
                arr[pos] = seed.values[pos] ** expo
            if not np.all(np.isfinite(arr)):
                continue
            yield f"dual[{name}]", mesh.with_values(arr)


# --- norm estimation --------------------------------------------------------


def estimate_norm(
    op: str,
    pair: WeightPair,
    e: ExponentTuple,
    family: Optional[TestFamily] = None,
    side: str = "forward",
    weak: bool = False,
    alpha=None,
    phi: Optional[YoungFunction] = None,
    min_level: Optional[int] = None,
    max_level: Optional[int] = None,
) -> NormEstimate:
    """Best ratio of target norm to source norm over the test family.

    side="forward" estimates the norm of f -> T(f sigma) from L^p(sigma)
    to L^q(u); side="dual" estimates f -> T(f u) from L^{q'}(u) to
    L^{p'}(sigma).  With weak=True the target norm is the weak
    (Lorentz) quasinorm instead.  The value is a lower bound for the
    operator norm and never decreases as the family grows.
    """
    if op not in OPERATOR_IDS:
        raise NormError(f"unknown operator id {op!r}")
    if pair.u.dim != e.n:
        raise NormError("exponent dimension does not match the weights")
    fam = family if family is not None else TestFamily()

    if side == "forward":
        dens, src_w, src_p = pair.sigma, pair.sigma, float(e.p)
        tgt_w, tgt_q = pair.u, float(e.q)
        source = f"L^{e.p}(sigma)"
        target = f"L^{e.q}(u)"
    elif side == "dual":
        dens, src_w, src_p = pair.u, pair.u, float(e.qprime)
        tgt_w, tgt_q = pair.sigma, float(e.pprime)
        source = f"L^{e.qprime}(u)"
        target = f"L^{e.pprime}(sigma)"
    else:
        raise NormError(f"unknown side {side!r}")
    if weak:
        target = "weak-" + target

    a = float(e.alpha) if alpha is None else float(parse_rational(alpha))

    best = -math.inf
    arg = None
    count = 0
    for name, f in _iter_family(op, pair, e, fam, side, a, min_level, max_level, phi):
        den = lp_norm(f, src_p, weight=src_w)
        if not den > 0:
            continue
        g = _apply_operator(op, f, dens, a, min_level, max_level, phi)
        if weak:
            num = weak_lq_norm(g, tgt_q, weight=tgt_w)
        else:
            num = lp_norm(g, tgt_q, weight=tgt_w)
        count += 1
        ratio = num / den
        if ratio > best:
            best, arg = ratio, name
    if count == 0:
        raise NormError("every test function had zero source norm")
    return NormEstimate(op, source, target, best, arg, count)


# --- quadrature bound for the Orlicz maximal norm ---------------------------


@dataclass(frozen=True)
class _PoweredIntegrand(YoungFunction):
    """phi^s as a quadrature integrand; not itself a Young function."""

    base: YoungFunction
    s: float

    @property
    def label(self) -> str:
        return f"{self.base.label}^{self.s:g}"

    def eval(self, t):
        with np.errstate(over="ignore"):
            return np.asarray(self.base.eval(t), dtype=float) ** self.s

    def log_eval(self, x):
        return self.s * np.asarray(self.base.log_eval(x), dtype=float)


def orlicz_norm_quadrature(
    phibar: YoungFunction,
    p,
    q=None,
    octaves: int = 14,
    points_per_octave: int = 512,
) -> Tuple[float, BpReport]:
    """Tail-integral upper bound for the Orlicz maximal operator norm.

    Returns ( int_1^inf phibar(t)^{q/p} t^{-q} dt/t )^{1/q} together with
    the underlying quadrature report; q defaults to p (the classical
    same-exponent bound).  A divergent or undecided tail yields +inf.
    """
    pf = float(p)
    qf = pf if q is None else float(q)
    if not 1.0 < pf <= qf:
        raise NormError("the quadrature bound needs 1 < p <= q")
    s = qf / pf
    if s == 1.0:
        powered: YoungFunction = phibar
    elif isinstance(phibar, PowerLog) and phibar.r * s >= 1.0:
        powered = PowerLog(phibar.r * s, phibar.a * s, label=f"{phibar.label}^{s:g}")
    else:
        powered = _PoweredIntegrand(phibar, s)
    rep = bp_classify(powered, qf, octaves=octaves, points_per_octave=points_per_octave)
    if rep.verdict == CONVERGENT and rep.constant_estimate is not None and rep.constant_estimate > 0:
        value = rep.constant_estimate ** (1.0 / qf)
    else:
        value = math.inf
    return value, rep


def _associate(phi: YoungFunction) -> YoungFunction:
    """Conjugate partner; for genuine power-log functions prefer the
    same-family comparable associate, which quadrature handles exactly."""
    if isinstance(phi, PowerLog) and not phi.is_power:
        return phi.comparable_associate()
    return phi.associate()


# --- equivalence of weak Riesz and dual maximal bounds ----------------------


def _zeroed_estimate(op: str, source: str, target: str) -> dict:
    return NormEstimate(op, source, target, 0.0, None, 0).to_obj()


def equivalence_report(
    pair: WeightPair,
    e: ExponentTuple,
    family: Optional[TestFamily] = None,
    min_level: Optional[int] = None,
    max_level: Optional[int] = None,
) -> dict:
    """Norm estimates on both sides of the weak-strong equivalence, the
    per-cube testing chain for the shell potential, and the duality
    chain tying maximal testing to the weak Riesz estimate.

    Requires p < q: at p = q the equivalence between the weak Riesz
    bound and the dual maximal bound genuinely fails, so the report
    refuses to run there.
    """
    if not e.p < e.q:
        raise NormError("the weak-strong equivalence needs p < q; it fails at p = q")
    a = float(e.alpha)
    n = e.n
    if not 0.0 < a < n:
        raise NormError("the potential needs 0 < alpha < n")
    coeff = 1.0 / (1.0 - 2.0 ** (a - n))

    config = {
        "exponents": e.to_obj(),
        "coefficient": coeff,
        "family": (family if family is not None else TestFamily()).describe(),
    }

    if float(np.max(pair.sigma.values)) == 0.0 or float(np.max(pair.u.values)) == 0.0:
        zero = {
            "weak_riesz": _zeroed_estimate("dyadic_riesz", f"L^{e.p}(sigma)", f"weak-L^{e.q}(u)"),
            "strong_riesz": _zeroed_estimate("dyadic_riesz", f"L^{e.p}(sigma)", f"L^{e.q}(u)"),
            "maximal_forward": _zeroed_estimate("frac_maximal", f"L^{e.p}(sigma)", f"L^{e.q}(u)"),
            "maximal_dual": _zeroed_estimate("frac_maximal", f"L^{e.qprime}(u)", f"L^{e.pprime}(sigma)"),
            "dyadic_maximal_forward": _zeroed_estimate("dyadic_frac_maximal", f"L^{e.p}(sigma)", f"L^{e.q}(u)"),
        }
        return {
            "degenerate": True,
            "estimates": zero,
            "ratios": {},
            "testing_chain": {"cubes": 0, "max_ratio": None, "holds": True, "testing_constant": 0.0},
            "duality_chain": {"testing": 0.0, "bound": 0.0, "ratio": None, "holds": True},
            "config": config,
        }

    ests = {
        "weak_riesz": estimate_norm("dyadic_riesz", pair, e, family, weak=True, min_level=min_level, max_level=max_level),
        "strong_riesz": estimate_norm("dyadic_riesz", pair, e, family, min_level=min_level, max_level=max_level),
        "maximal_forward": estimate_norm("frac_maximal", pair, e, family, min_level=min_level, max_level=max_level),
        "maximal_dual": estimate_norm("frac_maximal", pair, e, family, side="dual", min_level=min_level, max_level=max_level),
        "dyadic_maximal_forward": estimate_norm("dyadic_frac_maximal", pair, e, family, min_level=min_level, max_level=max_level),
    }

    def _ratio(num: float, den: float) -> Optional[float]:
        return num / den if den > 0 else None

    ratios = {
        "weak_vs_dual_maximal": _ratio(ests["weak_riesz"].value, coeff * ests["maximal_dual"].value),
        "maximal_forward_vs_strong": _ratio(ests["maximal_forward"].value, ests["strong_riesz"].value),
        "maximal_dual_vs_strong": _ratio(ests["maximal_dual"].value, ests["strong_riesz"].value),
        "dyadic_maximal_vs_strong": _ratio(ests["dyadic_maximal_forward"].value, ests["strong_riesz"].value),
    }

    testing = potential_testing_chain(pair, e, min_level=min_level, max_level=max_level)

    # Duality chain: forward maximal testing on the zero-shift grid is
    # controlled by q' times the weak Riesz estimate, provided the
    # family contains the saturating functions (it does by default).
    zero_shift = [(0,) * n]
    sawyer = sawyer_maximal_testing(
        pair, e, shifts=zero_shift, min_level=min_level, max_level=max_level,
        which="forward", inner_shifts=zero_shift,
    )
    bound = float(e.qprime) * ests["weak_riesz"].value
    duality = {
        "testing": sawyer.value,
        "bound": bound,
        "ratio": _ratio(sawyer.value, bound),
        "holds": sawyer.value <= bound * (1.0 + 1e-9),
    }

    return {
        "degenerate": False,
        "estimates": {k: v.to_obj() for k, v in ests.items()},
        "ratios": ratios,
        "testing_chain": testing,
        "duality_chain": duality,
        "config": config,
    }


def potential_testing_chain(
    pair: WeightPair,
    e: ExponentTuple,
    min_level: Optional[int] = None,
    max_level: Optional[int] = None,
) -> dict:
    """Per-cube comparison of the shell-potential testing quotient with
    the maximal-function testing quotient.

    For every zero-shift cube Q0 inside the window with positive sigma
    mass, the L^q(u) norm of the shell potential of sigma chi_Q0 is at
    most (1 - 2^{alpha-n})^{-1} times the L^q(u) norm of the fractional
    maximal function of sigma chi_Q0; both integrals run over the whole
    window.  The report records the worst observed quotient ratio."""
    a = float(e.alpha)
    n = e.n
    if not 0.0 < a < n:
        raise NormError("the shell potential needs 0 < alpha < n")
    coeff = 1.0 / (1.0 - 2.0 ** (a - n))
    qf = float(e.q)
    inv_p = float(1 / e.p)
    mesh = pair.u
    zero_shift = [(0,) * n]

    worst = -math.inf
    worst_cube = None
    testing_value = 0.0
    testing_arg = None
    count = 0
    for grid in _grids(mesh, zero_shift, min_level, max_level):
        for scan in iter_scans(mesh, grid):
            inside = inside_window_mask(scan)
            if not np.any(inside):
                continue
            masses = cube_integrals(scan, pair.sigma)
            for idx in np.argwhere(inside & (masses > 0)):
                pos = tuple(int(i) for i in idx)
                cube = scan.cube_at(pos)
                mass = float(masses[pos])
                pot = outer_riesz(pair.sigma, cube, e.alpha)
                lhs = lp_norm(pot, qf, weight=pair.u)
                cut = _cutoff(pair.sigma, cube.box())
                rhs = coeff * lp_norm(
                    frac_maximal(cut, e.alpha, min_level=min_level, max_level=max_level),
                    qf, weight=pair.u,
                )
                count += 1
                quotient = lhs * mass ** (-inv_p)
                if quotient > testing_value:
                    testing_value = quotient
                    testing_arg = f"s={grid.shift},l={scan.level},pos={pos}"
                if rhs > 0:
                    r = lhs / rhs
                    if r > worst:
                        worst = r
                        worst_cube = f"s={grid.shift},l={scan.level},pos={pos}"
    return {
        "cubes": count,
        "max_ratio": None if count == 0 else worst,
        "worst_cube": worst_cube,
        "holds": count == 0 or worst <= 1.0 + 1e-9,
        "testing_constant": testing_value,
        "testing_argmax": testing_arg,
        "coefficient": coeff,
    }


# --- bump upper bounds vs norm lower bounds ---------------------------------


def bump_bound_check(
    pair: WeightPair,
    e: ExponentTuple,
    phi: YoungFunction,
    psi: YoungFunction,
    family: Optional[TestFamily] = None,
    min_level: Optional[int] = None,
    max_level: Optional[int] = None,
    octaves: int = 14,
) -> dict:
    """Each bumped upper bound next to the matching norm lower bound.

    The right-hand sides combine the bumped joint constants with the
    Lebesgue Orlicz-maximal norm estimated two ways: the tail-integral
    quadrature bound, and a direct norm lower bound on the same mesh.
    Entries record the observed constant lhs/rhs for each route; the
    quadrature route is a genuine upper-bound partner, the direct route
    a lower-bound one, so their constants bracket the truth.
    """
    if e.p > e.q:
        raise NormError("bump bounds need p <= q (nonnegative exponent gap)")
    beta = e.beta
    fam = family if family is not None else TestFamily()
    phibar = _associate(phi)
    psibar = _associate(psi)
    lebesgue = unit_pair(pair.u)

    def _entry(lhs: NormEstimate, bump_value: float, bar: YoungFunction,
               src, tgt, direct_e: ExponentTuple) -> dict:
        quad_val, quad_rep = orlicz_norm_quadrature(bar, src, tgt, octaves=octaves)
        direct = estimate_norm(
            "orlicz_maximal", lebesgue, direct_e, fam,
            alpha=beta, phi=bar, min_level=min_level, max_level=max_level,
        )
        rhs_quad = bump_value * quad_val
        rhs_direct = bump_value * direct.value
        return {
            "lhs": lhs.to_obj(),
            "bump_constant": bump_value,
            "maximal_norm_quadrature": quad_val,
            "maximal_norm_direct": direct.to_obj(),
            "quadrature_report": quad_rep.to_obj(),
            "rhs_quadrature": rhs_quad,
            "rhs_direct": rhs_direct,
            "constant_quadrature": lhs.value / rhs_quad if rhs_quad > 0 and math.isfinite(rhs_quad) else None,
            "constant_direct": lhs.value / rhs_direct if rhs_direct > 0 else None,
        }

    report: dict = {
        "config": {
            "exponents": e.to_obj(),
            "beta": str(beta),
            "phi": phi.label,
            "psi": psi.label,
            "phibar": phibar.label,
            "psibar": psibar.label,
            "family": fam.describe(),
        },
        "entries": {},
    }

    # Maximal operator against the second-weight bump.
    lhs_max = estimate_norm("frac_maximal", pair, e, fam, min_level=min_level, max_level=max_level)
    bump_f = apq_bump(pair, e, phi, min_level=min_level, max_level=max_level)
    report["entries"]["maximal"] = _entry(lhs_max, bump_f.value, phibar, e.p, e.q, e)

    riesz_ok = 0 < float(e.alpha) < e.n and e.p < e.q
    if riesz_ok:
        # Weak Riesz against the dual-pair bump with psi on the u slot.
        lhs_weak = estimate_norm("dyadic_riesz", pair, e, fam, weak=True, min_level=min_level, max_level=max_level)
        bump_d = apq_bump(pair.swapped(), e.dual(), psi, min_level=min_level, max_level=max_level)
        report["entries"]["weak_riesz"] = _entry(lhs_weak, bump_d.value, psibar, e.qprime, e.pprime, e.dual())

        # Strong Riesz against the sum of the two separated bumps.
        lhs_strong = estimate_norm("dyadic_riesz", pair, e, fam, min_level=min_level, max_level=max_level)
        m = report["entries"]["maximal"]
        wk = report["entries"]["weak_riesz"]
        rhs_quad = m["rhs_quadrature"] + wk["rhs_quadrature"]
        rhs_direct = m["rhs_direct"] + wk["rhs_direct"]
        report["entries"]["strong_riesz"] = {
            "lhs": lhs_strong.to_obj(),
            "rhs_quadrature": rhs_quad,
            "rhs_direct": rhs_direct,
            "constant_quadrature": lhs_strong.value / rhs_quad if rhs_quad > 0 and math.isfinite(rhs_quad) else None,
            "constant_direct": lhs_strong.value / rhs_direct if rhs_direct > 0 else None,
        }

        # Classical double bump: both slots bumped, same-exponent
        # Lebesgue maximal norms.
        bump2 = apq_bump(pair, e, phi, min_level=min_level, max_level=max_level, side="both", psi=psi)
        qp = float(e.qprime)
        pp = float(e.p)
        quad_psi, rep_psi = orlicz_norm_quadrature(psibar, qp, octaves=octaves)
        quad_phi, rep_phi = orlicz_norm_quadrature(phibar, pp, octaves=octaves)
        e_psi = ExponentTuple(e.n, 0, e.qprime, e.qprime)
        e_phi = ExponentTuple(e.n, 0, e.p, e.p)
        direct_psi = estimate_norm("orlicz_maximal", lebesgue, e_psi, fam, alpha=0, phi=psibar,
                                   min_level=min_level, max_level=max_level)
        direct_phi = estimate_norm("orlicz_maximal", lebesgue, e_phi, fam, alpha=0, phi=phibar,
                                   min_level=min_level, max_level=max_level)
        rhs_quad2 = bump2.value * quad_psi * quad_phi
        rhs_direct2 = bump2.value * direct_psi.value * direct_phi.value
        report["entries"]["double_bump"] = {
            "lhs": lhs_strong.to_obj(),
            "bump_constant": bump2.value,
            "maximal_norms_quadrature": [quad_psi, quad_phi],
            "maximal_norms_direct": [direct_psi.to_obj(), direct_phi.to_obj()],
            "quadrature_reports": [rep_psi.to_obj(), rep_phi.to_obj()],
            "rhs_quadrature": rhs_quad2,
            "rhs_direct": rhs_direct2,
            "constant_quadrature": lhs_strong.value / rhs_quad2 if rhs_quad2 > 0 and math.isfinite(rhs_quad2) else None,
            "constant_direct": lhs_strong.value / rhs_direct2 if rhs_direct2 > 0 else None,
        }

        # Strong norm split into the two weak-type norms.
        weak_dual = estimate_norm("dyadic_riesz", pair, e, fam, side="dual", weak=True,
                                  min_level=min_level, max_level=max_level)
        split = lhs_weak.value + weak_dual.value
        report["entries"]["strong_weak_split"] = {
            "strong": lhs_strong.to_obj(),
            "weak_forward": lhs_weak.to_obj(),
            "weak_dual": weak_dual.to_obj(),
            "sum_of_weak": split,
            "ratio": lhs_strong.value / split if split > 0 else None,
        }
    else:
        report["entries"]["riesz_skipped"] = "needs 0 < alpha < n and p < q"

    return report


# --- logarithmic A-infinity refinements --------------------------------------


def log_ainfty_check(
    w: SampledFunction,
    e: ExponentTuple,
    family: Optional[TestFamily] = None,
    min_level: Optional[int] = None,
    max_level: Optional[int] = None,
    ar_index=None,
) -> dict:
    """One-weight logarithmic refinements for the classical pair of w.

    Builds u = w^q, sigma = w^{-p'}, estimates the maximal and Riesz
    norms from below, and compares each against the product of the
    plain Muckenhoupt constant's logarithm and the mixed one-supremum
    constant.  Also records the interpolation-route upper bound through
    an A_r constant at an index strictly inside the admissible range,
    and the dyadic testing constant that drives the maximal bound.
    """
    if not e.is_sobolev:
        raise NormError("the logarithmic refinements need Sobolev-scaling exponents")
    pair = WeightPair.classical(w, e)
    fam = family if family is not None else TestFamily()
    inv_q = float(1 / e.q)
    inv_pp = float(1 / e.pprime)

    # Sigma-side constants drive the maximal bound.
    ap_sigma = ap_constant(pair.sigma, e.s_dual, min_level=min_level, max_level=max_level)
    mixed_sigma = mixed_one_sup(pair, e, min_level=min_level, max_level=max_level, flavor="ap_m")
    rhs_maximal = (1.0 + math.log(ap_sigma.value)) ** inv_q * mixed_sigma.value
    lhs_maximal = estimate_norm("frac_maximal", pair, e, fam, min_level=min_level, max_level=max_level)

    # U-side constants drive the weak Riesz bound.
    ap_u = ap_constant(pair.u, e.s_p, min_level=min_level, max_level=max_level)
    mixed_u = mixed_one_sup(pair.swapped(), e.dual(), min_level=min_level, max_level=max_level, flavor="ap_m")
    rhs_weak = (1.0 + math.log(ap_u.value)) ** inv_pp * mixed_u.value
    lhs_weak = estimate_norm("dyadic_riesz", pair, e, fam, weak=True, min_level=min_level, max_level=max_level)

    lhs_strong = estimate_norm("dyadic_riesz", pair, e, fam, min_level=min_level, max_level=max_level)
    rhs_strong = rhs_weak + rhs_maximal

    # Interpolation route: any A_r entry with r strictly below s(p).
    r = (1 + e.s_p) / 2 if ar_index is None else parse_rational(ar_index)
    if not 1 < r < e.s_p:
        raise NormError(f"the interpolation index must lie in (1, {e.s_p}), got {r}")
    ap_r = ap_constant(pair.u, r, min_level=min_level, max_level=max_level)
    fujii_u = ainfty_m(pair.u, min_level=min_level, max_level=max_level)
    rhs_red = ap_r.value ** inv_q * fujii_u.value ** inv_pp

    # Dyadic testing constant that feeds the maximal bound.
    md = md_sp_testing(pair, e, min_level=min_level, max_level=max_level)

    def _block(lhs: float, rhs: float) -> dict:
        return {"lhs": lhs, "rhs": rhs, "ratio": lhs / rhs if rhs > 0 else None}

    return {
        "config": {
            "exponents": e.to_obj(),
            "s_p": str(e.s_p),
            "s_dual": str(e.s_dual),
            "family": fam.describe(),
        },
        "constants": {
            "ap_sigma": ap_sigma.value,
            "mixed_sigma": mixed_sigma.value,
            "ap_u": ap_u.value,
            "mixed_u": mixed_u.value,
        },
        "maximal": {**_block(lhs_maximal.value, rhs_maximal), "estimate": lhs_maximal.to_obj()},
        "riesz_weak": {**_block(lhs_weak.value, rhs_weak), "estimate": lhs_weak.to_obj()},
        "riesz_strong": {**_block(lhs_strong.value, rhs_strong), "estimate": lhs_strong.to_obj()},
        "reduction": {"r": str(r), **_block(lhs_strong.value, rhs_red)},
        "md_testing": _block(md.value, rhs_maximal),
    }
