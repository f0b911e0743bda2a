"""Bilinear maximal and sparse operators and multilinear weight constants."""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .czsparse import SparseFamily, _group, _scatter_add
from .errors import DomainError, ParameterError
from .grid import (CubeFamily, Reducer, StepFunction, Weight, as_step, as_weight,
                   family_blocks, scatter_max)
from .maximal import MaximalKind, apply_maximal
from .reports import CheckList
from .weights import _Means, ap_constant, conj, rh_constant

__all__ = [
    "BilinearParams", "multi_ap_constant", "bilinear_maximal", "bilinear_rh_check",
    "bilinear_sparse_apply", "bilinear_a2_check", "BilinearRHReport", "BilinearA2Report",
]


@dataclass(frozen=True)
class BilinearParams:
    """Exponents p1, p2 > 1 with 1/p = 1/p1 + 1/p2, weights w1, w2 and w = w1 w2."""
    p1: float
    p2: float
    w1: Weight = field(compare=False)
    w2: Weight = field(compare=False)

    def __post_init__(self):
        if not (self.p1 > 1 and self.p2 > 1):
            raise ParameterError(f"need p1, p2 > 1, got {self.p1}, {self.p2}")
        object.__setattr__(self, "w1", as_weight(self.w1))
        object.__setattr__(self, "w2", as_weight(self.w2))
        if self.w1.grid != self.w2.grid:
            raise DomainError("w1 and w2 live on different grids")

    @property
    def p(self) -> float:
        return 1.0 / (1.0 / self.p1 + 1.0 / self.p2)

    @property
    def w(self) -> Weight:
        return Weight(self.w1.values * self.w2.values, self.w1.grid)


def multi_ap_constant(bp: BilinearParams, fam: Optional[CubeFamily] = None):
    """max over Q of (avg w^p)^{1/p} (avg w1^{-p1'})^{1/p1'} (avg w2^{-p2'})^{1/p2'}."""
    fam = fam or CubeFamily.dyadic()
    p, q1, q2 = bp.p, conj(bp.p1), conj(bp.p2)
    m, m1, m2 = _Means(bp.w, fam), _Means(bp.w1, fam), _Means(bp.w2, fam)
    F = m.log_mean(p) / p + m1.log_mean(-q1) / q1 + m2.log_mean(-q2) / q2
    rep = m.report("MultiAp", F, p1=bp.p1, p2=bp.p2)
    return rep


def bilinear_maximal(f: StepFunction, g: StepFunction, fam: Optional[CubeFamily] = None) -> StepFunction:
    """Cell value = max over cubes containing it of avg|f| avg|g|."""
    f, g = as_step(f), as_step(g)
    if f.grid != g.grid:
        raise DomainError("f and g live on different grids")
    fam = fam or CubeFamily.dyadic()
    G = f.grid
    rf, rg = Reducer(np.abs(f.values)), Reducer(np.abs(g.values))
    out = np.full(G.shape, -np.inf)
    for b in family_blocks(G, fam):
        n = b.side ** G.dim
        scatter_max(G, b, (rf.at(b) / n) * (rg.at(b) / n), out)
    out[~np.isfinite(out)] = 0.0
    return StepFunction(out, G)


@dataclass
class BilinearRHReport:
    C_star: float
    cube: object
    rh_w1: float
    rh_w2: float
    s: float
    r: Optional[float]
    chain_constant: Optional[float]
    checks: CheckList

    @property
    def passed(self):
        return self.checks.passed

    def to_dict(self):
        return {"C_star": self.C_star, "rh_w1": self.rh_w1, "rh_w2": self.rh_w2, "s": self.s,
                "r": self.r, "chain_constant": self.chain_constant, "passed": self.passed,
                "checks": self.checks.to_list()}


def _chain(w1, w2, s, r, fam):
    """Per-cube logs of the six quantities in the reverse Hölder chain at exponent r."""
    sp = conj(s)
    a, b = r * s, r * sp
    m1, m2 = _Means(w1, fam), _Means(w2, fam)
    prod = Weight(w1.values * w2.values, w1.grid)
    mp = _Means(prod, fam)
    q = [
        m1.log_mean(s) / s + m2.log_mean(sp) / sp,
        m1.log_mean(a) / a + m2.log_mean(b) / b,
        -m1.log_mean(-a) / a - m2.log_mean(-b) / b,
        -mp.log_mean(-r) / r,
        mp.log_mean(r) / r,
        mp.log_mean(1.0),
    ]
    u1, u2 = w1.power(a), w2.power(b)
    c_rh = rh_constant(u1, 1.0 / r, fam).value ** (1.0 / a) * rh_constant(u2, 1.0 / r, fam).value ** (1.0 / b)
    c_a2 = ap_constant(u1, 2.0, fam).value ** (1.0 / a) * ap_constant(u2, 2.0, fam).value ** (1.0 / b)
    return q, c_rh, c_a2, m1


def bilinear_rh_check(w1: Weight, w2: Weight, s: float, fam: Optional[CubeFamily] = None,
                      rs=tuple(np.round(np.arange(0.1, 1.0, 0.1), 10).tolist())) -> BilinearRHReport:
    """Smallest C with (avg w1^s)^{1/s}(avg w2^{s'})^{1/s'} <= C avg(w1 w2), plus the
    proof chain through w1^{rs}, w2^{rs'} in A_2 and RH_{1/r}, with r chosen from `rs`
    to minimize the chain constant."""
    if not s > 1:
        raise ParameterError(f"s must be > 1, got {s}")
    w1, w2 = as_weight(w1), as_weight(w2)
    fam = fam or CubeFamily.dyadic()
    best = None
    for r in rs:
        q, c_rh, c_a2, m1 = _chain(w1, w2, s, r, fam)
        C = c_rh * c_a2
        if best is None or C < best[0]:
            best = (C, r, q, c_rh, c_a2, m1)
    C, r, q, c_rh, c_a2, m1 = best
    F = q[0] - q[5]
    i = int(np.argmax(F))
    cs = float(math.exp(F[i]))
    cl = CheckList()
    names = [
        "(avg w1^s)^(1/s)(avg w2^s')^(1/s') <= [RH] (avg w1^rs)^(1/rs)(avg w2^rs')^(1/rs')",
        "(avg w1^rs)^(1/rs)(avg w2^rs')^(1/rs') <= [A2] (avg w1^-rs)^(-1/rs)(avg w2^-rs')^(-1/rs')",
        "(avg w1^-rs)^(-1/rs)(avg w2^-rs')^(-1/rs') <= (avg (w1w2)^-r)^(-1/r)",
        "(avg (w1w2)^-r)^(-1/r) <= (avg (w1w2)^r)^(1/r)",
        "(avg (w1w2)^r)^(1/r) <= avg w1w2",
    ]
    consts = [math.log(c_rh), math.log(c_a2), 0.0, 0.0, 0.0]
    for k, name in enumerate(names):
        gap = q[k] - q[k + 1] - consts[k]
        j = int(np.argmax(gap))
        cl.add("per cube: " + name, math.exp(q[k][j]), math.exp(q[k + 1][j] + consts[k]),
               witness={"cube": m1.cube(j).to_dict(w1.grid), "r": r})
    cl.add("C* <= chain constant", cs, C)
    cl.add("C* >= 1", 1.0, cs, slack=1e-12)
    return BilinearRHReport(cs, m1.cube(i), rh_constant(w1, s, fam).value,
                            rh_constant(w2, conj(s), fam).value, s, r, C, cl)


def bilinear_sparse_apply(S: SparseFamily, f: StepFunction, g: StepFunction) -> StepFunction:
    """T_S(f, g) = sum over Q in S of (avg_Q f)(avg_Q g) chi_Q."""
    f, g = as_step(f), as_step(g)
    if not (f.grid == g.grid == S.grid):
        raise DomainError("sparse family, f and g must share a grid")
    G = S.grid
    rf, rg = Reducer(f.values), Reducer(g.values)
    out = np.zeros(G.shape)
    for _, b in _group(S):
        n = b.side ** G.dim
        _scatter_add(G, b, (rf.at(b) / n) * (rg.at(b) / n), out)
    return StepFunction(out, G)


@dataclass
class BilinearA2Report:
    lhs: float
    rhs: float
    C: float
    a2_sigma1: float
    a2_sigma2: float
    C_star: float
    kappa: float
    maximal_norm1: float
    maximal_norm2: float
    f_norm: float
    g_norm: float
    checks: CheckList

    @property
    def passed(self):
        return self.checks.passed

    def to_dict(self):
        return {"lhs": self.lhs, "rhs": self.rhs, "C": self.C, "[sigma1]_A2": self.a2_sigma1,
                "[sigma2]_A2": self.a2_sigma2, "C_star": self.C_star, "kappa": self.kappa,
                "||M_sigma1(f w1^2)||": self.maximal_norm1, "||M_sigma2(g w2^2)||": self.maximal_norm2,
                "||f||_L2(w1^2)": self.f_norm, "||g||_L2(w2^2)": self.g_norm,
                "passed": self.passed, "checks": self.checks.to_list()}


def bilinear_a2_check(S: SparseFamily, f: StepFunction, g: StepFunction, w1: Weight,
                      w2: Weight) -> BilinearA2Report:
    """||T_S(f,g)||_{L^1(w1 w2)} <= C ||f||_{L^2(w1^2)} ||g||_{L^2(w2^2)} at p1 = p2 = 2.

    With sigma_i = w_i^{-2} and v = w1^{-1} w2^{-1}, each cube term satisfies
    avg f avg g w(Q) <= [sigma1]^{1/2}[sigma2]^{1/2} C* <fw1^2>_sigma1 <gw2^2>_sigma2 v(Q),
    v(Q) <= kappa v(E_Q), and Cauchy-Schwarz with Doob (norm 2 for each weighted
    dyadic maximal operator) finishes, so C = [s1]^{1/2}[s2]^{1/2} C* kappa 2 2.
    """
    f, g = as_step(f), as_step(g)
    w1, w2 = as_weight(w1), as_weight(w2)
    G = S.grid
    if not (f.grid == g.grid == w1.grid == w2.grid == G):
        raise DomainError("all inputs must share the sparse family's grid")
    if np.any(f.values < 0) or np.any(g.values < 0):
        raise DomainError("f and g must be nonnegative")
    fam = CubeFamily.dyadic(S.shift)
    w = w1.values * w2.values
    cm = G.cell_measure
    T = bilinear_sparse_apply(S, f, g).values
    lhs = float(np.sum(T * w)) * cm
    s1, s2 = w1.power(-2.0), w2.power(-2.0)
    a21, a22 = ap_constant(s1, 2.0, fam).value, ap_constant(s2, 2.0, fam).value
    cstar = bilinear_rh_check(w1.power(-1.0), w2.power(-1.0), 2.0, fam, rs=(0.5,)).C_star
    v = 1.0 / w
    kappa = 1.0
    for Q, E in zip(S.cubes, S.esets):
        vQ = float(np.sum(v[Q.slices()]))
        vE = float(np.sum(v.ravel()[np.asarray(E)]))
        kappa = max(kappa, vQ / vE if vE > 0 else math.inf)
    F1 = StepFunction(f.values * w1.values ** 2, G)
    G1 = StepFunction(g.values * w2.values ** 2, G)
    M1 = apply_maximal(MaximalKind.weighted(s1, S.shift), F1)
    M2 = apply_maximal(MaximalKind.weighted(s2, S.shift), G1)
    n1, n2 = M1.lp_norm(2.0, s1), M2.lp_norm(2.0, s2)
    fn = f.lp_norm(2.0, StepFunction(w1.values ** 2, G))
    gn = g.lp_norm(2.0, StepFunction(w2.values ** 2, G))
    C = math.sqrt(a21 * a22) * cstar * kappa * 2.0 * 2.0
    cl = CheckList()
    cl.add("||T_S(f,g)||_L1(w) <= C ||f||_L2(w1^2) ||g||_L2(w2^2)", lhs, C * fn * gn)
    cl.add("||T_S(f,g)||_L1(w) <= [s1]^1/2 [s2]^1/2 C* kappa ||M_s1(f w1^2)||_L2(s1) ||M_s2(g w2^2)||_L2(s2)",
           lhs, math.sqrt(a21 * a22) * cstar * kappa * n1 * n2)
    cl.add("||M_s1(f w1^2)||_L2(s1) <= 2 ||f||_L2(w1^2)", n1, 2.0 * fn)
    cl.add("||M_s2(g w2^2)||_L2(s2) <= 2 ||g||_L2(w2^2)", n2, 2.0 * gn)
    return BilinearA2Report(lhs, C * fn * gn, C, a21, a22, cstar, kappa, n1, n2, fn, gn, cl)
