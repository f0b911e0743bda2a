"""Seeded invariant suite run by the `selftest` command, plus random input generators."""
from __future__ import annotations

import numpy as np

from . import io
from .bilinear import bilinear_a2_check, bilinear_maximal, bilinear_rh_check
from .czsparse import cf_check, cz_decompose, cz_ladder, ladder_violations, sparse_from_ladder
from .grid import GridSpec, StepFunction, Weight
from .maximal import MaximalKind, apply_maximal, lp_ratio, norm_estimate, random_step
from .rdf import extrapolation_weight, jones_factorize, rdf_majorant
from .reports import SLACK
from .weights import (a1_constant, ainfty_rj_constant, ap_constant, check_ap_rh_product, conj,
                      dual_weight, reverse_factor, rh_exponent_search, rh_constant)

__all__ = ["random_weight", "random_a1_weight", "random_ap_weight", "run_selftest", "F1"]


def F1():
    """The 4-cell fixture: w = (1,1,1,4), f = (0,0,0,4)."""
    g = GridSpec(1, 2)
    return Weight(np.array([1.0, 1.0, 1.0, 4.0]), g), StepFunction(np.array([0.0, 0.0, 0.0, 4.0]), g)


def random_weight(g: GridSpec, rng: np.random.Generator, spread: float = 1.0) -> Weight:
    """exp of independent normal cell values with the given standard deviation."""
    x = rng.normal(0.0, spread, g.shape)
    return Weight(np.exp(x), g)


def random_a1_weight(g: GridSpec, rng: np.random.Generator, delta: float = 0.5) -> Weight:
    """(M^d f)^delta for a random step f: a dyadic A_1 weight with constant depending on delta."""
    f = StepFunction(random_step(g, rng), g)
    Mf = apply_maximal(MaximalKind.dyadic(), f).values
    return Weight(Mf ** delta, g)


def random_ap_weight(g: GridSpec, p: float, rng: np.random.Generator) -> Weight:
    """w1 w2^{1-p} with w1, w2 random A_1 weights."""
    d1, d2 = rng.uniform(0.2, 0.8, 2)
    return reverse_factor(random_a1_weight(g, rng, d1), random_a1_weight(g, rng, d2), p)


def _close(a, b, tol=1e-12):
    return abs(a - b) <= tol * max(1.0, abs(b))


def _goldens(rng):
    w, f = F1()
    ok = _close(ap_constant(w, 2).value, 1.5625) and _close(a1_constant(w).value, 2.5)
    ok &= _close(ainfty_rj_constant(w).value, 1.25)
    ok &= np.allclose(apply_maximal(MaximalKind.dyadic(), f).values, [1, 1, 2, 4], rtol=1e-12, atol=0)
    ok &= np.allclose(apply_maximal(MaximalKind.full(), f).values, [1, 4 / 3, 2, 4], rtol=1e-12, atol=0)
    ok &= [Q.label(w.grid) for Q in cz_decompose(f, 1.0)] == ["[1/2,1)"]
    return bool(ok), "F1 constants, maximal functions and CZ cubes"


def _duality(rng):
    worst = 0.0
    for dim, L in [(1, 6), (2, 3)]:
        g = GridSpec(dim, L)
        for p in (1.5, 2.0, 4.0):
            w = random_weight(g, rng)
            a = ap_constant(w, p).value ** (conj(p) - 1.0)
            b = ap_constant(dual_weight(w, p), conj(p)).value
            worst = max(worst, abs(a - b) / b)
    return worst <= 1e-9, f"max relative error {worst:.3g}"


def _nesting(rng):
    g = GridSpec(1, 7)
    for _ in range(5):
        w = random_weight(g, rng)
        a3, a2, a1 = ap_constant(w, 3).value, ap_constant(w, 2).value, a1_constant(w).value
        if not (a3 <= a2 <= a1 and min(a3, ainfty_rj_constant(w).value, rh_constant(w, 2).value) >= 1 - 1e-12):
            return False, "nesting or floor broken"
    return True, "A_3 <= A_2 <= A_1, all constants >= 1"


def _maximal(rng):
    for dim, L in [(1, 8), (2, 4)]:
        g = GridSpec(dim, L)
        f = StepFunction(random_step(g, rng), g)
        h = StepFunction(random_step(g, rng), g)
        Md, Mf = apply_maximal(MaximalKind.dyadic(), f).values, apply_maximal(MaximalKind.full(), f).values
        Ms = apply_maximal(MaximalKind.dyadic(), StepFunction(f.values + h.values, g)).values
        if not (np.all(Md <= Mf) and np.all(Ms <= Md + apply_maximal(MaximalKind.dyadic(), h).values
                                             * (1 + 1e-12))):
            return False, "domination or sublinearity broken"
        w = random_weight(g, rng)
        est = norm_estimate(MaximalKind.dyadic(), 2.0, w, trials=4)
        if lp_ratio(MaximalKind.dyadic(), f, 2.0, w) > est.upper * (1 + SLACK):
            return False, "certified upper bound exceeded"
    return True, "dyadic <= full, sublinear, certified bound holds"


def _rh(rng):
    g = GridSpec(1, 8)
    for _ in range(5):
        w = random_weight(g, rng)
        s = rh_exponent_search(w)
        if not (s > 1 and rh_constant(w, s).value <= 2 * (1 + SLACK)):
            return False, f"s_max = {s}"
        if not check_ap_rh_product(w, 2.0, 2.0).passed:
            return False, "A_p / RH_s product inequalities"
    return True, "s_max > 1 with factor-2 inequality; product inequalities hold"


def _cz(rng):
    for dim, L in [(1, 8), (2, 4)]:
        g = GridSpec(dim, L)
        for shift in (0, 3):
            f = StepFunction(random_step(g, rng), g)
            lad = cz_ladder(f, shift=shift, validate=False)
            bad = ladder_violations(lad, f)
            if bad:
                return False, bad[0]
            if sparse_from_ladder(lad).violations():
                return False, "sparse family"
    return True, "ladder coverage, disjointness, averages, E-set sizes"


def _cf(rng):
    g = GridSpec(1, 8)
    for _ in range(5):
        rep = cf_check(StepFunction(random_step(g, rng), g), random_weight(g, rng), 2.0)
        if not rep.passed:
            return False, rep.checks.violations()[0]["inequality"]
    return True, "sparse bound by dyadic maximal function"


def _rdf(rng):
    g = GridSpec(1, 8)
    for _ in range(3):
        w = random_weight(g, rng, 0.7)
        h = StepFunction(random_step(g, rng), g)
        for rep in (rdf_majorant(h, 2.0, w), jones_factorize(w, 2.0)):
            if not rep.passed:
                return False, rep.checks.violations()[0]["inequality"]
        h2 = StepFunction(random_step(g, rng), g)
        _, ex = extrapolation_weight(h, h2, w, 2.0, 3.0)
        if not ex.passed:
            return False, ex.checks.violations()[0]["inequality"]
    return True, "majorant, factorization, extrapolation weight"


def _bilinear(rng):
    g = GridSpec(1, 8)
    for _ in range(3):
        w1, w2 = random_weight(g, rng, 0.5), random_weight(g, rng, 0.5)
        f, h = StepFunction(random_step(g, rng), g), StepFunction(random_step(g, rng), g)
        S = sparse_from_ladder(cz_ladder(f))
        if not bilinear_a2_check(S, f, h, w1, w2).passed or not bilinear_rh_check(w1, w2, 2.0).passed:
            return False, "bilinear inequality violated"
        if not np.array_equal(bilinear_maximal(f, h).values, bilinear_maximal(h, f).values):
            return False, "bilinear maximal not symmetric"
    return True, "sparse A_2 chain, reverse Hölder chain, symmetry"


def _io(rng):
    g = GridSpec(2, 3)
    w = random_weight(g, rng)
    text = io.format_wgt1(w)
    js = io.convert_text(text)
    ok = io.convert_text(js) == text and io.convert_text(io.convert_text(js)) == js
    S = sparse_from_ladder(cz_ladder(w))
    ok &= io.sparse_to_json(io.sparse_from_json(io.sparse_to_json(S))) == io.sparse_to_json(S)
    return bool(ok), "WGT1 <-> JSON and sparse family round trips"


CHECKS: list = [
    ("goldens", _goldens), ("duality", _duality), ("nesting", _nesting), ("maximal", _maximal),
    ("reverse-holder", _rh), ("cz-ladder", _cz), ("coifman-fefferman", _cf),
    ("rubio-de-francia", _rdf), ("bilinear", _bilinear), ("io", _io),
]


def run_selftest(seed: int = 0, checks=None) -> list:
    """Run every check with its own seeded generator; returns result rows."""
    rows = []
    for i, (name, fn) in enumerate(checks or CHECKS):
        rng = np.random.default_rng(np.random.SeedSequence([seed, i]))
        try:
            ok, detail = fn(rng)
        except Exception as e:  # a crash is a failed check, reported like any other
            ok, detail = False, f"{type(e).__name__}: {e}"
        rows.append({"check": name, "passed": bool(ok), "detail": detail})
    return rows
