"""Experiment runner and one-shot command-line tools.

Subcommands
-----------
run        execute named verification suites from a JSON config into an
           artifact directory (report.json, per-suite JSON, tables/*.csv,
           schema.txt); exit status is nonzero iff a hard check fails
ops        apply one cube operator to a sampled function (JSON in/out)
sparse     build | verify | apply stopping-time sparse families
constants  compute one weight constant, or a batch of them to CSV
norms      estimate | equiv | bumps | logcheck
examples   case1 | case2 | factored | classical constructive pairs

Determinism contract: reports carry no timestamps or absolute paths, JSON
is emitted with sorted keys, and every random draw is seeded from the
configuration, so identical config and seed give byte-identical artifacts
regardless of worker count.
"""
from __future__ import annotations

import argparse
import csv
import json
import math
import sys
from concurrent.futures import ThreadPoolExecutor
from fractions import Fraction
from pathlib import Path
from typing import Optional

import numpy as np

from .constants import (
    WeightPair,
    ainfty_exp,
    ainfty_m,
    ap_constant,
    apq_alpha_constant,
    mixed_one_sup,
)
from .grid import (
    Box,
    DyadicCube,
    GridFamily,
    all_shifts,
    box_from_obj,
    box_to_obj,
    cube_from_obj,
    cube_to_obj,
    parent,
    realize,
)
from .normest import (
    OPERATOR_IDS,
    TestFamily,
    bump_bound_check,
    equivalence_report,
    estimate_norm,
    log_ainfty_check,
)
from .operators import (
    dyadic_frac_maximal,
    dyadic_riesz,
    frac_maximal,
    geometric_maximal,
    orlicz_maximal,
    outer_riesz,
    riesz_potential_1d,
    weighted_dyadic_maximal,
)
from .orlicz import (
    YoungFunction,
    borderline,
    bp_classify,
    log_bump,
    orlicz_holder_check,
    power,
    power_log,
    rescale_identity_check,
)
from .pairs import (
    build_E,
    case1_pair,
    case2_divergence,
    classical_pair,
    factored_pair,
    verify_E_maximal,
)
from .sampled import ExponentTuple, SampledFunction, integrate, lp_norm, parse_rational
from .sparse import build_sparse, sparse_operator

SUITES = (
    "geometry",
    "operators",
    "sparse",
    "orlicz",
    "constants",
    "equivalence",
    "counterexample",
)

DEFAULT_CONFIG = {
    "suites": list(SUITES),
    "exponents": {"n": 1, "alpha": "1/2", "p": "4/3", "q": "4"},
    "mesh": {"window": 1, "cells_per_axis": 48},
    "grids": {"min_level": None, "max_level": None},
    "seed": 715,
    "young": [
        {"family": "power", "params": {"r": 2.0}},
        {"family": "log-bump", "params": {"p": 2.0, "delta": 0.5}},
        {"family": "borderline", "params": {"p": 2.0, "q": 4.0, "eps": 0.5}},
    ],
    "pairs": [{"kind": "classical-smooth"}, {"kind": "random", "params": {"seed": 11}}],
    "counterexample": {"gamma": "1/2", "window": 65536},
}


class CLIError(ValueError):
    pass


# === serialization helpers ===================================================


def _dumps(obj) -> str:
    return json.dumps(obj, sort_keys=True, indent=2) + "\n"


def _write_json(path: Path, obj):
    path.write_text(_dumps(obj))


def _write_csv(path: Path, header, rows):
    with path.open("w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([repr(x) if isinstance(x, float) else x for x in row])


def _load_json(path: str) -> dict:
    p = Path(path)
    if not p.exists():
        raise CLIError(f"missing input file: {path}")
    with p.open() as fh:
        return json.load(fh)


def _load_function(path: str) -> SampledFunction:
    return SampledFunction.from_obj(_load_json(path))


def _load_pair(path: str) -> WeightPair:
    return WeightPair.from_obj(_load_json(path))


def _parse_exponents(text: str) -> ExponentTuple:
    parts = [t.strip() for t in text.split(",")]
    if len(parts) != 4:
        raise CLIError(f"exponents must be 'n,alpha,p,q', got {text!r}")
    return ExponentTuple(int(parts[0]), *(parse_rational(t) for t in parts[1:]))


def _parse_levels(text: Optional[str]):
    if text is None:
        return None, None
    lo, sep, hi = text.partition("..")
    if not sep:
        raise CLIError(f"levels must be 'lo..hi', got {text!r}")
    return int(lo), int(hi)


def _parse_shifts(text: Optional[str], dim: int):
    if text is None:
        return None
    flags = tuple(int(t) for t in text.split(","))
    if len(flags) != dim or any(f not in (0, 1) for f in flags):
        raise CLIError(f"shift must be {dim} comma-separated 0/1 flags, got {text!r}")
    return flags


_YOUNG_FAMILIES = {
    "power": (power, ("r",)),
    "power-log": (power_log, ("r", "a")),
    "log-bump": (log_bump, ("p", "delta")),
    "borderline": (borderline, ("p", "q", "eps")),
}


def young_from_spec(spec) -> YoungFunction:
    """Build a Young function from 'family:key=val,...' or a config dict."""
    if isinstance(spec, dict):
        family, params = spec.get("family"), dict(spec.get("params", {}))
    else:
        family, _, rest = str(spec).partition(":")
        params = {}
        for item in filter(None, rest.split(",")):
            k, sep, v = item.partition("=")
            if not sep:
                raise CLIError(f"malformed young parameter {item!r}")
            params[k.strip()] = float(v)
    if family not in _YOUNG_FAMILIES:
        raise CLIError(
            f"unknown young family {family!r}; choose from {sorted(_YOUNG_FAMILIES)}"
        )
    ctor, keys = _YOUNG_FAMILIES[family]
    if set(params) != set(keys):
        raise CLIError(f"family {family!r} takes parameters {keys}, got {sorted(params)}")
    return ctor(*(float(params[k]) for k in keys))


# === config ==================================================================


def _merge_config(base: dict, override: dict) -> dict:
    out = dict(base)
    for k, v in override.items():
        if isinstance(v, dict) and isinstance(out.get(k), dict):
            out[k] = _merge_config(out[k], v)
        else:
            out[k] = v
    return out


def validate_config(cfg: dict) -> dict:
    unknown = set(cfg) - set(DEFAULT_CONFIG)
    if unknown:
        raise CLIError(f"unknown config fields: {sorted(unknown)}")
    for s in cfg["suites"]:
        if s not in SUITES:
            raise CLIError(f"unknown suite {s!r}; choose from {list(SUITES)}")
    ex = cfg["exponents"]
    e = ExponentTuple(
        int(ex["n"]), parse_rational(ex["alpha"]), parse_rational(ex["p"]), parse_rational(ex["q"])
    )
    mesh = cfg["mesh"]
    side = parse_rational(mesh["window"])
    if side < 1 or (side.numerator & (side.numerator - 1)) or side.denominator != 1:
        raise CLIError("mesh.window must be a positive power of two")
    ncells = int(mesh["cells_per_axis"])
    if ncells % 3 or (ncells // 3) & (ncells // 3 - 1):
        raise CLIError("mesh.cells_per_axis must be 3 * 2^L")
    if "equivalence" in cfg["suites"] and not (e.p < e.q and 0 < e.alpha):
        raise CLIError("the equivalence suite needs exponents with p < q and alpha > 0")
    cx = cfg["counterexample"]
    g = parse_rational(cx["gamma"])
    if not 0 < g < 1:
        raise CLIError("counterexample.gamma must lie in (0, 1)")
    w = int(cx["window"])
    if w < 8 or w & (w - 1):
        raise CLIError("counterexample.window must be a power of two, at least 8")
    int(cfg["seed"])
    for y in cfg["young"]:
        young_from_spec(y)
    return cfg


def _config_exponents(cfg: dict) -> ExponentTuple:
    ex = cfg["exponents"]
    return ExponentTuple(
        int(ex["n"]), parse_rational(ex["alpha"]), parse_rational(ex["p"]), parse_rational(ex["q"])
    )


def _config_mesh(cfg: dict, dim: int):
    side = parse_rational(cfg["mesh"]["window"])
    ncells = int(cfg["mesh"]["cells_per_axis"])
    return (0,) * dim, side, ncells


def _rand_weight(cfg: dict, dim: int, seed: int, lo=0.2, hi=3.0) -> SampledFunction:
    lower, side, ncells = _config_mesh(cfg, dim)
    rng = np.random.default_rng(seed)
    return SampledFunction(dim, lower, side, rng.uniform(lo, hi, (ncells,) * dim))


def _smooth_weight(cfg: dict, dim: int) -> SampledFunction:
    """Slowly varying strictly positive profile (no randomness)."""
    lower, side, ncells = _config_mesh(cfg, dim)
    x = (np.arange(ncells) + 0.5) / ncells
    prof = 1.0 + 0.75 * x * (1.0 - x) + 0.25 * x
    vals = prof if dim == 1 else np.multiply.outer(prof, prof)
    return SampledFunction(dim, lower, side, vals)


def _pair_from_spec(cfg: dict, spec: dict, e: ExponentTuple) -> WeightPair:
    kind = spec.get("kind")
    if kind == "classical-smooth":
        return classical_pair(_smooth_weight(cfg, e.n), e) if e.is_sobolev else WeightPair(
            _smooth_weight(cfg, e.n), _smooth_weight(cfg, e.n), provenance="smooth"
        )
    if kind == "random":
        seed = int(spec.get("params", {}).get("seed", 0))
        return WeightPair(
            _rand_weight(cfg, e.n, seed), _rand_weight(cfg, e.n, seed + 1000), provenance="random"
        )
    if kind == "file":
        return _load_pair(spec["params"]["path"])
    raise CLIError(f"unknown pair kind {kind!r}")


# === suites ==================================================================


def _check(name: str, passed: bool, **detail) -> dict:
    out = {"name": name, "passed": bool(passed)}
    out.update(detail)
    return out


def _suite_geometry(cfg: dict) -> dict:
    rng = np.random.default_rng(int(cfg["seed"]) + 1)
    checks, rows = [], []

    ok_round = True
    for _ in range(50):
        dim = int(rng.integers(1, 3))
        cube = DyadicCube(
            dim,
            int(rng.integers(-6, 7)),
            tuple(int(rng.integers(-512, 512)) for _ in range(dim)),
            tuple(int(rng.integers(0, 2)) for _ in range(dim)),
        )
        ok_round &= cube_from_obj(cube_to_obj(cube)) == cube
        box = realize(cube)
        ok_round &= box_from_obj(box_to_obj(box)) == box
    checks.append(_check("serialization_roundtrip", ok_round, cases=50))

    ok_parent = True
    for _ in range(50):
        dim = int(rng.integers(1, 3))
        cube = DyadicCube(
            dim,
            int(rng.integers(-4, 7)),
            tuple(int(rng.integers(-64, 64)) for _ in range(dim)),
            tuple(int(rng.integers(0, 2)) for _ in range(dim)),
        )
        ok_parent &= realize(parent(cube)).contains_box(realize(cube))
    checks.append(_check("parent_contains_child", ok_parent, cases=50))

    # one-third trick: some shifted cube of comparable side contains any box
    dominated = 0
    trials = 40
    for _ in range(trials):
        dim = int(rng.integers(1, 3))
        lo = tuple(Fraction(int(rng.integers(-256, 256)), 64) for _ in range(dim))
        side = Fraction(int(rng.integers(1, 129)), 64)
        box = Box(lo, side)
        level = -math.ceil(math.log2(float(4 * side)))  # cube side in [4s, 8s)
        hit = False
        for sh in all_shifts(dim):
            fam = GridFamily(dim, sh, level, level, box)
            for cand in fam.cubes_at_level(level):
                if realize(cand).contains_box(box):
                    hit = True
                    break
            if hit:
                break
        dominated += hit
        rows.append([dim, str(side), level, int(hit)])
    checks.append(_check("shift_family_dominates_boxes", dominated == trials, cases=trials))

    return {
        "checks": checks,
        "tables": {"geometry_domination": {"header": ["dim", "side", "level", "dominated"], "rows": rows}},
    }


def _suite_operators(cfg: dict) -> dict:
    e = _config_exponents(cfg)
    checks, rows = [], []
    worst = {"3/2": 0.0, "2": 0.0, "3": 0.0}
    ok_exp = True
    for i in range(30):
        f = _rand_weight(cfg, e.n, int(cfg["seed"]) + 100 + i, lo=0.0, hi=4.0)
        for plabel, p in (("3/2", Fraction(3, 2)), ("2", 2), ("3", 3)):
            lhs = lp_norm(geometric_maximal(f, shift=(0,) * e.n), p)
            rhs = lp_norm(f, p)
            ratio = lhs / rhs if rhs > 0 else 0.0
            worst[plabel] = max(worst[plabel], ratio)
            ok_exp &= ratio <= math.e + 1e-9
    for plabel, r in worst.items():
        rows.append([plabel, r, math.e])
    checks.append(_check("geometric_maximal_e_bound", ok_exp, worst=worst))

    # shell potential sits below the scaled maximal function, cell by cell
    coeff = 1.0 / (1.0 - 2.0 ** (float(e.alpha) - e.n))
    ok_shell = True
    worst_shell = 0.0
    lower, side, ncells = _config_mesh(cfg, e.n)
    for i in range(5):
        sig = _rand_weight(cfg, e.n, int(cfg["seed"]) + 300 + i)
        fam = GridFamily(e.n, (0,) * e.n, 1, 1, sig.window)
        for cube in fam.cubes_at_level(1):
            cut = sig.restrict_to(cube)
            if integrate(cut) <= 0:
                continue
            lhs = outer_riesz(sig, cube, float(e.alpha))
            rhs = frac_maximal(cut, float(e.alpha))
            mask = rhs.values > 0
            ratio = float(np.max(lhs.values[mask] / (coeff * rhs.values[mask])))
            worst_shell = max(worst_shell, ratio)
            ok_shell &= ratio <= 1.0 + 1e-9
    checks.append(
        _check("shell_potential_below_scaled_maximal", ok_shell, worst_ratio=worst_shell, coeff=coeff)
    )

    # discrete potential is self-adjoint
    ok_adj = True
    for i in range(5):
        f = _rand_weight(cfg, e.n, int(cfg["seed"]) + 400 + i)
        g = _rand_weight(cfg, e.n, int(cfg["seed"]) + 500 + i)
        lhs = integrate(dyadic_riesz(f, float(e.alpha), shift=(0,) * e.n) * g)
        rhs = integrate(dyadic_riesz(g, float(e.alpha), shift=(0,) * e.n) * f)
        ok_adj &= abs(lhs - rhs) <= 1e-12 * max(abs(lhs), abs(rhs))
    checks.append(_check("dyadic_potential_self_adjoint", ok_adj, cases=5))

    return {
        "checks": checks,
        "tables": {"operators_maximal_bound": {"header": ["p", "worst_ratio", "bound"], "rows": rows}},
    }


def _suite_sparse(cfg: dict) -> dict:
    e = _config_exponents(cfg)
    checks, rows = [], []
    ok_thick, ok_dom = True, True
    for i in range(20):
        f = _rand_weight(cfg, e.n, int(cfg["seed"]) + 600 + i, lo=0.0, hi=3.0)
        for a in (0, e.alpha):
            fam = build_sparse(f, a, shift=(0,) * e.n)
            thick = fam.thickness()
            ok_thick &= thick >= 0.5
            lhs = dyadic_frac_maximal(f, float(a), shift=(0,) * e.n)
            rhs = sparse_operator(fam, form="chi")
            mask = rhs.values > 0
            dom = float(np.max(lhs.values[mask] / rhs.values[mask])) if mask.any() else 0.0
            ok_dom &= dom <= fam.ratio + 1e-9 and not np.any((rhs.values == 0) & (lhs.values > 0))
            rows.append([i, str(a), len(fam), thick, dom, fam.ratio])
    checks.append(_check("sparse_thickness_half", ok_thick, cases=40))
    checks.append(_check("sparse_domination_with_fixed_constant", ok_dom, cases=40))
    return {
        "checks": checks,
        "tables": {
            "sparse_families": {
                "header": ["trial", "alpha", "cubes", "thickness", "domination_ratio", "C_a"],
                "rows": rows,
            }
        },
    }


def _suite_orlicz(cfg: dict) -> dict:
    rng = np.random.default_rng(int(cfg["seed"]) + 2)
    checks, rows = [], []
    probe = np.geomspace(0.05, 40.0, 120)

    ok_inv, worst_inv = True, 0.0
    for spec in cfg["young"]:
        phi = young_from_spec(spec)
        twice = phi.associate().associate()
        rel = float(np.max(np.abs(twice.eval(probe) - phi.eval(probe)) / phi.eval(probe)))
        worst_inv = max(worst_inv, rel)
        ok_inv &= rel <= 1e-6
    checks.append(_check("conjugate_involution", ok_inv, worst_rel=worst_inv))

    ok_res, worst_res = True, 0.0
    for i in range(20):
        v = rng.uniform(0.05, 3.0, 48)
        out = rescale_identity_check(power_log(1.5, 0.6), 2.0, v, 1.0 / 48, 1.0)
        rel = abs(out["scaled_norm"] - out["power_norm"]) / out["power_norm"]
        worst_res = max(worst_res, rel)
        ok_res &= rel <= 1e-8
    checks.append(_check("rescaling_identity", ok_res, worst_rel=worst_res))

    ok_hold = True
    for i in range(100):
        fv = rng.uniform(0.0, 2.0, 48)
        gv = rng.uniform(0.0, 2.0, 48)
        out = orlicz_holder_check(log_bump(2.0, 0.5), fv, gv, 1.0 / 48, 1.0)
        ok_hold &= out["mean_fg"] <= out["bound"] * (1 + 1e-12)
    checks.append(_check("orlicz_holder_factor_two", ok_hold, trials=100))

    ok_power = True
    with np.errstate(over="ignore"):
        for m, expect in ((1.5, "convergent"), (2.5, "divergent")):
            rep = bp_classify(power(m), 2.0)
            ok_power &= rep.verdict == expect
            rows.append([rep.phi_label, rep.p, rep.verdict, rep.rho if math.isfinite(rep.rho) else ""])
        checks.append(_check("power_tail_verdicts", ok_power))

        for spec in cfg["young"]:
            phi = young_from_spec(spec)
            p = float(spec.get("params", {}).get("p", getattr(phi, "r", 2.0)))
            rep = bp_classify(phi, p)
            rows.append([rep.phi_label, rep.p, rep.verdict, rep.rho if math.isfinite(rep.rho) else ""])

    return {
        "checks": checks,
        "tables": {
            "orlicz_tail_classification": {
                "header": ["phi", "p", "verdict", "rho"],
                "rows": rows,
            }
        },
    }


def _suite_constants(cfg: dict) -> dict:
    e = _config_exponents(cfg)
    checks, rows = [], []

    w = _smooth_weight(cfg, e.n)
    if e.is_sobolev:
        pair = classical_pair(w, e)
    else:
        pair = WeightPair(w.power(float(e.q)), w.power(-float(e.pprime)), provenance="powers")

    apq = apq_alpha_constant(pair, e)
    apq_dual = apq_alpha_constant(pair.swapped(), e.dual())
    rel_sym = abs(apq.value - apq_dual.value) / apq.value
    checks.append(_check("joint_constant_swap_symmetry", rel_sym <= 1e-12, rel=rel_sym))

    if e.is_sobolev:
        link = ap_constant(pair.u, e.s_p).value ** (1.0 / float(e.q))
        rel_link = abs(apq.value - link) / link
        checks.append(_check("classical_link_identity", rel_link <= 1e-12, rel=rel_link))

    fine = WeightPair(pair.u.refine(), pair.sigma.refine(), provenance=pair.provenance)
    apq_fine = apq_alpha_constant(fine, e)
    checks.append(
        _check(
            "lower_bound_nondecreasing_under_refinement",
            apq_fine.value >= apq.value * (1 - 1e-12),
            coarse=apq.value,
            fine=apq_fine.value,
        )
    )

    entries = [
        ("apq_alpha", apq),
        ("apq_alpha_dual", apq_dual),
        ("ap_u_sp", ap_constant(pair.u, e.s_p)),
        ("ap_sigma_sdual", ap_constant(pair.sigma, e.s_dual)),
        ("ainfty_exp_u", ainfty_exp(pair.u)),
        ("ainfty_m_u", ainfty_m(pair.u)),
        ("mixed_ap_m_sigma", mixed_one_sup(pair, e, flavor="ap_m")),
    ]
    for name, rep in entries:
        arg = rep.argmax
        rows.append([name, rep.value, "" if arg is None else json.dumps(cube_to_obj(arg), sort_keys=True)])

    return {
        "checks": checks,
        "tables": {"constants_values": {"header": ["name", "value", "argmax"], "rows": rows}},
    }


def _suite_equivalence(cfg: dict) -> dict:
    e = _config_exponents(cfg)
    checks, rows = [], []
    family = TestFamily(random_steps=2, seed=int(cfg["seed"]))

    for spec in cfg["pairs"]:
        pair = _pair_from_spec(cfg, spec, e)
        rep = equivalence_report(pair, e, family=family)
        label = spec.get("kind", "pair")
        checks.append(
            _check(f"testing_chain[{label}]", rep["testing_chain"]["holds"],
                   max_ratio=rep["testing_chain"]["max_ratio"])
        )
        checks.append(
            _check(f"duality_chain[{label}]", rep["duality_chain"]["holds"],
                   ratio=rep["duality_chain"]["ratio"])
        )
        checks.append(
            _check(f"dyadic_maximal_below_strong[{label}]",
                   rep["ratios"]["dyadic_maximal_vs_strong"] <= 1 + 1e-9,
                   ratio=rep["ratios"]["dyadic_maximal_vs_strong"])
        )
        for key, est in rep["estimates"].items():
            rows.append([label, key, est["value"], est["source"], est["target"]])

    # indicator-family norm estimates only grow when the mesh refines
    pair = _pair_from_spec(cfg, cfg["pairs"][0], e)
    ind = TestFamily(indicators=True, random_steps=0, duality=False)
    coarse = estimate_norm("frac_maximal", pair, e, family=ind, alpha=e.alpha).value
    fine_pair = WeightPair(pair.u.refine(), pair.sigma.refine(), provenance=pair.provenance)
    fine = estimate_norm("frac_maximal", fine_pair, e, family=ind, alpha=e.alpha).value
    checks.append(
        _check("estimate_nondecreasing_under_refinement", fine >= coarse * (1 - 1e-12),
               coarse=coarse, fine=fine)
    )

    return {
        "checks": checks,
        "tables": {
            "equivalence_estimates": {
                "header": ["pair", "estimate", "value", "source", "target"],
                "rows": rows,
            }
        },
    }


def _suite_counterexample(cfg: dict) -> dict:
    checks = []
    g = parse_rational(cfg["counterexample"]["gamma"])
    window = int(cfg["counterexample"]["window"])
    max_exp = window.bit_length() - 1

    e1 = ExponentTuple(1, Fraction(1, 4), Fraction(5, 4), 2)
    apqs = []
    rows1 = []
    for wexp in (5, 6):
        _, _, rep1 = case1_pair(e1, window_exp=wexp)
        apqs.append(rep1["apq"]["value"])
        if wexp == 6:
            rows1 = [[r["X"], r["integral"], r["log_X"], r["ratio"]] for r in rep1["rows"]]
    checks.append(
        _check("case1_constant_window_independent",
               abs(apqs[1] - apqs[0]) <= 1e-9 * apqs[0] and apqs[0] > 0,
               values=apqs)
    )
    checks.append(_check("case1_minorant_exponents", rep1["minorant_exponent_sum"] == "-1"))

    e2 = ExponentTuple(1, g, 2, 2)  # with p = q the factored order equals alpha
    rep2 = case2_divergence(e2, max_exp=max_exp)
    rows2 = [[r["X"], r["S"], r["H"], r["ratio"]] for r in rep2["rows"]]
    checks.append(_check("case2_exponent_identity", rep2["identity"]["holds"], **rep2["identity"]))
    checks.append(
        _check("case2_termwise_minorant",
               rep2["minorant"]["integral_ge_pointwise"] and rep2["minorant"]["pointwise_ge_harmonic"],
               terms=rep2["minorant"]["terms"])
    )
    checks.append(_check("case2_dominates_harmonic", rep2["dominates"]))
    checks.append(_check("case2_mesh_check_one_sided", rep2["mesh_check"]["one_sided"],
                         rel_gap=rep2["mesh_check"]["rel_gap"]))
    if g == Fraction(1, 2) and window >= 2**16:
        checks.append(
            _check("case2_partial_integral_clears_five", rows2[-1][1] > 5.0, S=rows2[-1][1])
        )

    ver = verify_E_maximal(g, 64)
    checks.append(
        _check("interval_train_maximal_pinched", ver["holds"],
               floor=ver["unit_floor"]["bound"], observed_min=ver["overall"]["min"],
               observed_max=ver["overall"]["max"])
    )

    X = 64
    chi = build_E(g, X)
    w2 = SampledFunction.indicator(Box((0,), 1), 1, (0,), X, chi.ncells)
    fpair = factored_pair(chi, w2, e2)
    fap = apq_alpha_constant(fpair, e2)
    checks.append(_check("factored_constant_at_most_one", fap.value <= 1.0 + 1e-12, value=fap.value))

    return {
        "checks": checks,
        "tables": {
            "counterexample_case1": {
                "header": ["X", "integral", "log_X", "ratio"],
                "rows": rows1,
            },
            "counterexample_case2": {"header": ["X", "S", "H", "ratio"], "rows": rows2},
        },
    }


_SUITE_FN = {
    "geometry": _suite_geometry,
    "operators": _suite_operators,
    "sparse": _suite_sparse,
    "orlicz": _suite_orlicz,
    "constants": _suite_constants,
    "equivalence": _suite_equivalence,
    "counterexample": _suite_counterexample,
}

_TABLE_DOCS = {
    "geometry_domination": "dim, box side (rational), cube level used, 1 if some shifted cube of side in (2s,4s] contains the box",
    "operators_maximal_bound": "exponent p, worst ratio ||M f||_p / ||f||_p over trials, the bound e",
    "sparse_families": "trial index, order alpha, number of stopping cubes, worst |E_Q|/|Q|, worst pointwise M/L ratio, the constant C_a",
    "orlicz_tail_classification": "young function label, exponent p, tail verdict, fitted per-doubling decay rho",
    "constants_values": "constant name, scanned supremum, argmax cube as JSON",
    "equivalence_estimates": "pair kind, estimate name, norm lower bound, source space, target space",
    "counterexample_case1": "cutoff X, int_1^X M(f sigma)^q u dx, log X, their ratio",
    "counterexample_case2": "cutoff X, S(X) = int_2^X x^(gamma-1) chi_E dx, harmonic minorant H(X), S/H",
    "summary": "suite name, check name, 1 if passed",
}


def run_suite(cfg: dict, out_dir: Path, workers: int = 1) -> int:
    """Execute the configured suites and write the artifact directory."""
    cfg = validate_config(_merge_config(DEFAULT_CONFIG, cfg))
    out_dir.mkdir(parents=True, exist_ok=True)
    (out_dir / "tables").mkdir(exist_ok=True)

    names = list(cfg["suites"])
    if workers > 1 and len(names) > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(lambda s: _SUITE_FN[s](cfg), names))
    else:
        results = [_SUITE_FN[s](cfg) for s in names]

    summary_rows = []
    used_tables = ["summary"]
    report = {"config": cfg, "suites": {}}
    all_passed = True
    for name, res in zip(names, results):
        passed = all(c["passed"] for c in res["checks"])
        all_passed &= passed
        report["suites"][name] = {"passed": passed, "checks": res["checks"]}
        _write_json(out_dir / f"{name}.json", report["suites"][name])
        for tname, table in res.get("tables", {}).items():
            _write_csv(out_dir / "tables" / f"{tname}.csv", table["header"], table["rows"])
            used_tables.append(tname)
        for c in res["checks"]:
            summary_rows.append([name, c["name"], int(c["passed"])])

    report["passed"] = all_passed
    _write_json(out_dir / "report.json", report)
    _write_csv(out_dir / "summary.csv", ["suite", "check", "passed"], summary_rows)
    schema = ["CSV column documentation, one table per line.", ""]
    for t in sorted(set(used_tables)):
        schema.append(f"{t}.csv: {_TABLE_DOCS[t]}")
    (out_dir / "schema.txt").write_text("\n".join(schema) + "\n")
    return 0 if all_passed else 1


# === one-shot subcommands ====================================================


def _cmd_run(args) -> int:
    cfg = dict(_load_json(args.config)) if args.config else {}
    if args.suite:
        cfg["suites"] = args.suite
    if args.seed is not None:
        cfg["seed"] = args.seed
    if args.gamma or args.window:
        cx = dict(_merge_config(DEFAULT_CONFIG, cfg).get("counterexample", {}))
        if args.gamma:
            cx["gamma"] = args.gamma
        if args.window:
            cx["window"] = args.window
        cfg["counterexample"] = cx
    return run_suite(cfg, Path(args.out), workers=args.workers)


def _emit(obj, out: Optional[str]):
    text = _dumps(obj)
    if out:
        Path(out).write_text(text)
    else:
        sys.stdout.write(text)


def _cmd_ops(args) -> int:
    f = _load_function(args.input)
    lo, hi = _parse_levels(args.levels)
    shift = _parse_shifts(args.shift, f.dim)
    alpha = float(parse_rational(args.alpha)) if args.alpha is not None else 0.0
    name = args.name
    if name == "frac_maximal":
        out = frac_maximal(f, alpha, shifts=shift, min_level=lo, max_level=hi)
    elif name == "dyadic_frac_maximal":
        out = dyadic_frac_maximal(f, alpha, shift=shift, min_level=lo, max_level=hi)
    elif name == "dyadic_riesz":
        out = dyadic_riesz(f, alpha, shift=shift, min_level=lo, max_level=hi)
    elif name == "riesz_1d":
        out = riesz_potential_1d(f, alpha)
    elif name == "orlicz_maximal":
        if not args.young:
            raise CLIError("orlicz_maximal needs --young")
        out = orlicz_maximal(f, young_from_spec(args.young), beta=alpha,
                             shift=shift, min_level=lo, max_level=hi)
    elif name == "weighted_dyadic_maximal":
        if not args.mu:
            raise CLIError("weighted_dyadic_maximal needs --mu")
        out = weighted_dyadic_maximal(f, _load_function(args.mu), beta=alpha,
                                      shift=shift, min_level=lo, max_level=hi)
    elif name == "outer_riesz":
        if not args.cube:
            raise CLIError("outer_riesz needs --cube")
        out = outer_riesz(f, cube_from_obj(json.loads(args.cube)), alpha)
    else:
        raise CLIError(f"unknown operator {name!r}")
    obj = {
        "function": out.to_obj(),
        "metadata": {
            "operator": name,
            "alpha": str(parse_rational(args.alpha)) if args.alpha is not None else "0",
            "shift": list(shift) if shift else "all",
            "min_level": lo,
            "max_level": hi,
        },
    }
    _emit(obj, args.out)
    if args.csv:
        _write_csv(Path(args.csv), ["index", "value"],
                   [[i, float(v)] for i, v in enumerate(out.values.ravel())])
    return 0


def _cmd_sparse(args) -> int:
    f = _load_function(args.input)
    lo, hi = _parse_levels(args.levels)
    shift = _parse_shifts(args.shift, f.dim) or (0,) * f.dim
    alpha = parse_rational(args.alpha) if args.alpha is not None else 0
    fam = build_sparse(f, alpha, ratio=args.ratio, shift=shift, min_level=lo, max_level=hi)
    if args.action == "build":
        _emit(fam.to_obj(), args.out)
        return 0
    if args.action == "verify":
        lhs = dyadic_frac_maximal(f, float(alpha), shift=shift, min_level=lo, max_level=hi)
        rhs = sparse_operator(fam, form="chi")
        mask = rhs.values > 0
        dom = float(np.max(lhs.values[mask] / rhs.values[mask])) if mask.any() else 0.0
        ok = fam.thickness() >= 0.5 and dom <= fam.ratio + 1e-9
        _emit(
            {
                "cubes": len(fam),
                "thickness": fam.thickness(),
                "guaranteed_thickness": fam.guaranteed_thickness,
                "domination_ratio": dom,
                "C_a": fam.ratio,
                "passed": bool(ok),
            },
            args.out,
        )
        return 0 if ok else 1
    g = _load_function(args.apply_to) if args.apply_to else None
    out = sparse_operator(fam, g=g, form=args.form)
    _emit({"function": out.to_obj(), "metadata": {"cubes": len(fam), "form": args.form}}, args.out)
    return 0


def _cmd_constants(args) -> int:
    pair = _load_pair(args.pair)
    e = _parse_exponents(args.exponents)
    lo, hi = _parse_levels(args.levels)
    reg = {
        "apq_alpha": lambda: apq_alpha_constant(pair, e, min_level=lo, max_level=hi),
        "ap_u": lambda: ap_constant(pair.u, e.s_p, min_level=lo, max_level=hi),
        "ap_sigma": lambda: ap_constant(pair.sigma, e.s_dual, min_level=lo, max_level=hi),
        "ainfty_exp_u": lambda: ainfty_exp(pair.u, min_level=lo, max_level=hi),
        "ainfty_exp_sigma": lambda: ainfty_exp(pair.sigma, min_level=lo, max_level=hi),
        "ainfty_m_u": lambda: ainfty_m(pair.u, min_level=lo, max_level=hi),
        "ainfty_m_sigma": lambda: ainfty_m(pair.sigma, min_level=lo, max_level=hi),
    }
    if args.which == "all":
        rows = []
        for name in sorted(reg):
            rep = reg[name]()
            arg = "" if rep.argmax is None else json.dumps(cube_to_obj(rep.argmax), sort_keys=True)
            rows.append([name, rep.value, arg])
        if args.out:
            _write_csv(Path(args.out), ["name", "value", "argmax"], rows)
        else:
            w = csv.writer(sys.stdout, lineterminator="\n")
            w.writerow(["name", "value", "argmax"])
            for row in rows:
                w.writerow([repr(x) if isinstance(x, float) else x for x in row])
        return 0
    if args.which not in reg:
        raise CLIError(f"unknown constant {args.which!r}; choose from {sorted(reg)} or 'all'")
    _emit(reg[args.which]().to_obj(), args.out)
    return 0


def _cmd_norms(args) -> int:
    e = _parse_exponents(args.exponents)
    lo, hi = _parse_levels(args.levels)
    family = TestFamily(random_steps=args.family_steps, seed=args.seed)
    if args.action == "estimate":
        pair = _load_pair(args.pair)
        alpha = parse_rational(args.alpha) if args.alpha is not None else None
        phi = young_from_spec(args.young) if args.young else None
        est = estimate_norm(args.op, pair, e, family=family, side=args.side, weak=args.weak,
                            alpha=alpha, phi=phi, min_level=lo, max_level=hi)
        _emit({"estimate": est.to_obj(), "family": family.describe()}, args.out)
        return 0
    if args.action == "equiv":
        pair = _load_pair(args.pair)
        _emit(equivalence_report(pair, e, family=family, min_level=lo, max_level=hi), args.out)
        return 0
    if args.action == "bumps":
        pair = _load_pair(args.pair)
        if not (args.young and args.young2):
            raise CLIError("bumps needs --young (u-side) and --young2 (sigma-side)")
        rep = bump_bound_check(pair, e, young_from_spec(args.young), young_from_spec(args.young2),
                               family=family, min_level=lo, max_level=hi)
        _emit(rep, args.out)
        return 0
    if not args.weight:
        raise CLIError("logcheck needs --weight")
    ar = parse_rational(args.ar_index) if args.ar_index else None
    rep = log_ainfty_check(_load_function(args.weight), e, family=family,
                           min_level=lo, max_level=hi, ar_index=ar)
    _emit(rep, args.out)
    return 0


def _cmd_examples(args) -> int:
    if args.action == "case1":
        e = _parse_exponents(args.exponents or "1,1/4,5/4,2")
        pair, f, rep = case1_pair(e, window_exp=args.window_exp, cells_per_unit=args.cells_per_unit)
        _emit({"pair": pair.to_obj(), "f": f.to_obj(), "report": rep}, args.out)
        if args.csv:
            _write_csv(Path(args.csv), ["X", "integral", "log_X", "ratio"],
                       [[r["X"], r["integral"], r["log_X"], r["ratio"]] for r in rep["rows"]])
        return 0
    if args.action == "case2":
        e = _parse_exponents(args.exponents or "1,1/2,2,2")
        rep = case2_divergence(e, gamma=args.gamma, max_exp=args.max_exp)
        _emit(rep, args.out)
        if args.csv:
            _write_csv(Path(args.csv), ["X", "S", "H", "ratio"],
                       [[r["X"], r["S"], r["H"], r["ratio"]] for r in rep["rows"]])
        return 0
    if args.action == "factored":
        e = _parse_exponents(args.exponents or "1,3/4,4/3,4")
        if args.train:
            X = args.window or 64
            w1 = build_E(e.gamma, X)
            w2 = SampledFunction.indicator(Box((0,), 1), 1, (0,), X, w1.ncells)
        elif args.w1 and args.w2:
            w1, w2 = _load_function(args.w1), _load_function(args.w2)
        else:
            raise CLIError("factored needs --train or both --w1 and --w2")
        pair = factored_pair(w1, w2, e)
        rep = apq_alpha_constant(pair, e)
        _emit({"pair": pair.to_obj(), "constant": rep.to_obj(), "gamma": str(e.gamma)}, args.out)
        if args.csv:
            _write_csv(Path(args.csv), ["name", "value"],
                       [["apq_alpha", rep.value], ["gamma", float(e.gamma)]])
        return 0
    e = _parse_exponents(args.exponents or "1,1/2,4/3,4")
    if not args.weight:
        raise CLIError("classical needs --weight")
    pair = classical_pair(_load_function(args.weight), e)
    rep = apq_alpha_constant(pair, e)
    _emit({"pair": pair.to_obj(), "constant": rep.to_obj()}, args.out)
    return 0


# === argument parsing ========================================================


def _build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="dyadlab",
        description="Dyadic-grid verification laboratory: suites, operators, constants, pairs.",
    )
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("run", help="execute verification suites into an artifact directory")
    p.add_argument("--config", help="JSON config; defaults merged underneath")
    p.add_argument("--suite", action="append", choices=SUITES, help="override the suite list")
    p.add_argument("--out", default="dyadlab-run", help="artifact directory")
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--seed", type=int)
    p.add_argument("--gamma", help="counterexample suite: interval-train exponent")
    p.add_argument("--window", type=int, help="counterexample suite: divergence cutoff (power of two)")
    p.set_defaults(fn=_cmd_run)

    p = sub.add_parser("ops", help="apply one operator to a sampled function")
    p.add_argument("name", choices=[o for o in OPERATOR_IDS if o != "identity"] + ["outer_riesz"])
    p.add_argument("-i", "--input", required=True, help="SampledFunction JSON")
    p.add_argument("-o", "--out", help="output JSON path (default stdout)")
    p.add_argument("--csv", help="also write (index, value) rows")
    p.add_argument("--alpha", help="order, rational string")
    p.add_argument("--shift", help="grid shift flags, e.g. 0,1")
    p.add_argument("--levels", help="level range lo..hi")
    p.add_argument("--young", help="young function family:key=val,...")
    p.add_argument("--mu", help="measure JSON for weighted_dyadic_maximal")
    p.add_argument("--cube", help="cube JSON for outer_riesz")
    p.set_defaults(fn=_cmd_ops)

    p = sub.add_parser("sparse", help="stopping-time sparse families")
    p.add_argument("action", choices=["build", "verify", "apply"])
    p.add_argument("-i", "--input", required=True, help="source SampledFunction JSON")
    p.add_argument("-o", "--out", help="output path (default stdout)")
    p.add_argument("--alpha", help="order, rational string")
    p.add_argument("--ratio", type=float, help="stopping ratio a (default 2^(n+1))")
    p.add_argument("--shift", help="grid shift flags")
    p.add_argument("--levels", help="level range lo..hi")
    p.add_argument("--apply-to", help="function JSON for apply (default: the source)")
    p.add_argument("--form", choices=["chi", "disjoint"], default="chi")
    p.set_defaults(fn=_cmd_sparse)

    p = sub.add_parser("constants", help="weight-constant scans")
    p.add_argument("action", choices=["compute"])
    p.add_argument("--which", required=True, help="constant name, or 'all' for CSV batch")
    p.add_argument("--pair", required=True, help="WeightPair JSON")
    p.add_argument("--exponents", required=True, help="n,alpha,p,q")
    p.add_argument("--levels", help="level range lo..hi")
    p.add_argument("-o", "--out", help="output path (default stdout)")
    p.set_defaults(fn=_cmd_constants)

    p = sub.add_parser("norms", help="norm estimates and composite diagnostics")
    p.add_argument("action", choices=["estimate", "equiv", "bumps", "logcheck"])
    p.add_argument("--pair", help="WeightPair JSON")
    p.add_argument("--weight", help="single weight JSON (logcheck)")
    p.add_argument("--exponents", required=True, help="n,alpha,p,q")
    p.add_argument("--op", default="frac_maximal", choices=list(OPERATOR_IDS))
    p.add_argument("--side", default="forward", choices=["forward", "dual"])
    p.add_argument("--weak", action="store_true")
    p.add_argument("--alpha", help="operator order override")
    p.add_argument("--young", help="young function (bumps: u-side; estimate: orlicz)")
    p.add_argument("--young2", help="young function, sigma-side (bumps)")
    p.add_argument("--ar-index", help="reduction index r (logcheck)")
    p.add_argument("--levels", help="level range lo..hi")
    p.add_argument("--family-steps", type=int, default=4)
    p.add_argument("--seed", type=int, default=715)
    p.add_argument("-o", "--out", help="output path (default stdout)")
    p.set_defaults(fn=_cmd_norms)

    p = sub.add_parser("examples", help="constructive weight pairs")
    p.add_argument("action", choices=["case1", "case2", "factored", "classical"])
    p.add_argument("--exponents", help="n,alpha,p,q (defaults fit the chosen construction)")
    p.add_argument("--gamma", help="interval-train exponent override (case2)")
    p.add_argument("--window-exp", type=int, default=5, help="case1 window is [-2^(k-1), 2^(k-1))")
    p.add_argument("--cells-per-unit", type=int, default=12)
    p.add_argument("--max-exp", type=int, default=16, help="case2 cutoff 2^k")
    p.add_argument("--window", type=int, help="factored: interval-train window X")
    p.add_argument("--train", action="store_true", help="factored: use the interval train inputs")
    p.add_argument("--w1", help="factored: first weight JSON")
    p.add_argument("--w2", help="factored: second weight JSON")
    p.add_argument("--weight", help="classical: weight JSON")
    p.add_argument("--csv", help="also write the diagnostic table")
    p.add_argument("-o", "--out", help="output path (default stdout)")
    p.set_defaults(fn=_cmd_examples)

    return ap


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        with np.errstate(over="ignore"):
            return args.fn(args)
    except (CLIError, ValueError, OSError, json.JSONDecodeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    raise SystemExit(main())
