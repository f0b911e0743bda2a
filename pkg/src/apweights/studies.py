"""Batch experiments over power-weight families: growth slopes, exponents, vector-valued ratios."""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .czsparse import SparseFamily, cz_ladder, sparse_from_ladder, sparse_norm_lower
from .grid import CubeFamily, GridSpec, StepFunction, Weight
from .maximal import MaximalKind, apply_maximal, norm_estimate, random_step
from .parallel import pmap
from .weights import (PowerWeightSpec, ap_constant, fw_ainfty_constant, refinement_study,
                      rh_exponent_search)

__all__ = [
    "Study", "loglog_slope", "chain_family", "buckley_study", "a2_growth_study",
    "rh_exponent_study", "vv_maximal_study", "norm_growth_study", "power_refinement_study",
]


@dataclass
class Study:
    """Rows for CSV output plus a small summary (slopes, classifications)."""
    name: str
    rows: list
    summary: dict = field(default_factory=dict)

    def to_dict(self):
        return {"study": self.name, "summary": self.summary, "rows": self.rows}


def loglog_slope(x: Sequence[float], y: Sequence[float]) -> float:
    """Least-squares slope of log y against log x."""
    lx, ly = np.log(np.asarray(x, float)), np.log(np.asarray(y, float))
    return float(np.polyfit(lx, ly, 1)[0])


def chain_family(g: GridSpec, corner_cell: int = 0) -> SparseFamily:
    """Dyadic ancestors of one cell: every level's cube containing it (eta = 1/2)."""
    coords = np.unravel_index(corner_cell, g.shape)
    cubes = []
    for level in range(g.depth + 1):
        s = 1 << (g.depth - level)
        cubes.append(g.cube(level, tuple(int(c) // s * s for c in coords)))
    return SparseFamily.from_cubes(g, cubes)


def _sparse_for(kind: str, w: Weight) -> SparseFamily:
    if kind == "chain":
        return chain_family(w.grid)
    if kind == "ladder":
        sigma = StepFunction(1.0 / w.values, w.grid)
        return sparse_from_ladder(cz_ladder(sigma))
    raise ValueError(f"unknown sparse family kind {kind!r}; use chain or ladder")


def buckley_study(a_values=(0.5, 0.7, 0.8, 0.9), p: float = 2.0, depth: int = 12, dim: int = 1,
                  trials: int = 8, seed: int = 0) -> Study:
    """Lower bound for the dyadic maximal norm on L^p(|x|^a) against [w]_{A_p}."""
    def one(a):
        w = PowerWeightSpec(a, dim).build(depth)
        A = ap_constant(w, p).value
        est = norm_estimate(MaximalKind.dyadic(), p, w, trials=trials, seed=seed)
        return {"a": float(a), "Ap": A, "lower": est.lower, "upper": est.upper}
    rows = pmap(one, list(a_values))
    slope = loglog_slope([r["Ap"] for r in rows], [r["lower"] for r in rows])
    pred = max(1.0, 1.0 / (p - 1.0))
    return Study("buckley", rows, {"slope": slope, "predicted_exponent": 1.0 / (p - 1.0),
                                   "p": p, "depth": depth, "sparse_exponent": pred})


def a2_growth_study(a_values=tuple(np.round(np.arange(0.2, 0.95, 0.1), 10).tolist()), depth: int = 12,
                    dim: int = 1, family: str = "chain", trials: int = 8, seed: int = 0) -> Study:
    """Lower bound for a sparse operator norm on L^2(|x|^a) against [w]_{A_2}."""
    def one(a):
        w = PowerWeightSpec(a, dim).build(depth)
        S = _sparse_for(family, w)
        A = ap_constant(w, 2.0, CubeFamily.dyadic(S.shift)).value
        est = sparse_norm_lower(S, 2.0, w, trials=trials, seed=seed)
        return {"a": float(a), "A2": A, "lower": est.lower, "upper": est.upper, "cubes": len(S)}
    rows = pmap(one, list(a_values))
    slope = loglog_slope([r["A2"] for r in rows], [r["lower"] for r in rows])
    return Study("a2-growth", rows, {"slope": slope, "family": family, "depth": depth})


def rh_exponent_study(a_values=tuple(np.round(np.arange(-0.2, -0.95, -0.1), 10).tolist()), depth: int = 12,
                      dim: int = 1, s_cap: float = 64.0) -> Study:
    """Largest factor-2 reverse Hölder exponent against the Fujii-Wilson constant."""
    def one(a):
        w = PowerWeightSpec(a, dim).build(depth)
        s = rh_exponent_search(w, s_cap=s_cap)
        fw = fw_ainfty_constant(w).value
        return {"a": float(a), "s_max": s, "fw": fw, "capped": s >= s_cap, "(s_max-1)*fw": (s - 1.0) * fw}
    rows = pmap(one, list(a_values))
    order = sorted(rows, key=lambda r: r["fw"])
    mono = all(x["s_max"] >= y["s_max"] for x, y in zip(order, order[1:]))
    prods = [r["(s_max-1)*fw"] for r in rows]
    return Study("rh-exponent", rows, {"monotone": mono, "min_product": min(prods),
                                       "max_product": max(prods)})


def _lq(stack: np.ndarray, q: float) -> np.ndarray:
    m = stack.max(axis=0)
    safe = np.where(m > 0, m, 1.0)
    return np.where(m > 0, safe * np.sum((stack / safe) ** q, axis=0) ** (1.0 / q), 0.0)


def vv_maximal_study(q_values=(1.5, 2.0, 4.0), p: float = 2.0, a: float = 0.5, depth: int = 8,
                     dim: int = 1, members: int = 4, trials: int = 16, seed: int = 0) -> Study:
    """Best ratio ||(sum (M f_j)^q)^(1/q)||_{L^p(w)} / ||(sum |f_j|^q)^(1/q)||_{L^p(w)}."""
    w = PowerWeightSpec(a, dim).build(depth)
    g = w.grid
    kind = MaximalKind.dyadic()
    A = ap_constant(w, p).value

    def trial(i):
        rng = np.random.default_rng(np.random.SeedSequence([seed, i]))
        Fs = np.stack([random_step(g, rng) for _ in range(members)])
        Ms = np.stack([apply_maximal(kind, StepFunction(f, g)).values for f in Fs])
        out = {}
        for q in q_values:
            num = StepFunction(_lq(Ms, q), g).lp_norm(p, w)
            den = StepFunction(_lq(Fs, q), g).lp_norm(p, w)
            out[q] = num / den
        return out

    res = pmap(trial, range(trials))
    rows = [{"q": q, "p": p, "a": a, "Ap": A, "best_ratio": max(r[q] for r in res),
             "mean_ratio": math.fsum(r[q] for r in res) / len(res)} for q in q_values]
    return Study("vv-maximal", rows, {"trials": trials, "members": members, "depth": depth})


def norm_growth_study(p_values=(1.5, 2.0, 3.0, 4.0, 6.0, 8.0), a: float = 0.0, depth: int = 10,
                      dim: int = 1, family: str = "chain", trials: int = 8, seed: int = 0) -> Study:
    """Sparse operator norm lower bound as p grows, with the large-p log-log slope."""
    w = PowerWeightSpec(a, dim).build(depth)
    S = _sparse_for(family, w)

    def one(p):
        est = sparse_norm_lower(S, p, w, trials=trials, seed=seed)
        return {"p": p, "lower": est.lower, "Ap": ap_constant(w, p, CubeFamily.dyadic(S.shift)).value}
    rows = pmap(one, list(p_values))
    big = [r for r in rows if r["p"] >= 2] or rows
    slope = loglog_slope([r["p"] for r in big], [r["lower"] for r in big]) if len(big) > 1 else float("nan")
    return Study("norm-growth", rows, {"slope_large_p": slope, "a": a, "family": family})


def power_refinement_study(a: float, p: float = 2.0, depths=range(6, 13), dim: int = 1,
                           fam: Optional[CubeFamily] = None, **thresholds) -> Study:
    """refinement_study for |x|^a, as a Study."""
    st = refinement_study(PowerWeightSpec(a, dim), p, list(depths), fam, **thresholds)
    rows = [dict(a=a, p=p, **r) for r in st.to_rows()]
    return Study("refinement", rows, {"classification": st.classification,
                                      "sampling": st.sampling, **st.thresholds})
