"""Rubio de Francia iteration, Jones factorization and the extrapolation weight."""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from .errors import DomainError, ParameterError, SeriesError
from .grid import CubeFamily, StepFunction, Weight, as_step, as_weight
from .maximal import MaximalKind, apply_maximal, certified_upper
from .reports import CheckList
from .weights import (a1_constant, ap_constant, conj, dual_weight, reverse_factor,
                      rh_constant, rhinf_constant)

__all__ = [
    "MajorantReport", "Factorization", "SharpConstantPrediction", "rdf_majorant",
    "iterate_series", "jones_factorize", "factorize_ap_rh", "extrapolation_weight",
    "sharp_constant_predict", "ApRhFactorization", "ExtrapolationReport",
]

TAIL_TOL = 1e-12
K_MAX = 200


def _kind_family(kind: MaximalKind) -> CubeFamily:
    return CubeFamily.aligned() if kind.variant == "full" else CubeFamily.dyadic(kind.shift)


@dataclass
class _Series:
    partial: np.ndarray
    next_partial: np.ndarray
    terms: int
    tail_bound: float


def iterate_series(op: Callable[[np.ndarray], np.ndarray], h: np.ndarray, B: float,
                   tol: float = TAIL_TOL, k_max: int = K_MAX) -> _Series:
    """sum_k op^k h / (2B)^k, stopped once the next term's sup is below
    tol times the smallest positive value of the partial sum.

    Returns the partial sum R_K and R_{K+1} (one more term, needed for the
    truncation-corrected A_1 check).  With op of sup-norm at most 1 and
    B >= 1 the discarded tail is at most 2 sup(next term).
    """
    term = np.array(h, dtype=float)
    total = term.copy()
    for K in range(k_max + 1):
        nxt = op(term) / (2.0 * B)
        pos = total[total > 0]
        floor = float(pos.min()) if pos.size else 0.0
        sup = float(nxt.max())
        if sup < tol * floor or sup == 0:
            return _Series(total, total + nxt, K, 2.0 * sup)
        total = total + nxt
        term = nxt
    raise SeriesError(f"iteration series did not converge within {k_max} terms")


@dataclass
class MajorantReport:
    majorant: Weight
    B: float
    terms: int
    a1: float
    tail_bound: float
    h_norm: float
    majorant_norm: float
    checks: CheckList

    @property
    def passed(self):
        return self.checks.passed

    def to_dict(self):
        return {"B": self.B, "terms": self.terms, "a1": self.a1, "tail_bound": self.tail_bound,
                "h_norm": self.h_norm, "majorant_norm": self.majorant_norm,
                "passed": self.passed, "checks": self.checks.to_list()}


def rdf_majorant(h: StepFunction, p: float, w: Weight, B: Optional[float] = None,
                 kind: Optional[MaximalKind] = None) -> MajorantReport:
    """R h = sum_k M^k h / (2B)^k and the three properties of the iteration algorithm.

    B defaults to max(1, certified bound for M on L^p(w)).  A user-supplied B
    smaller than the true norm shows up as failed checks, not as an error.
    """
    h, w = as_step(h), as_weight(w)
    if h.grid != w.grid:
        raise DomainError("h and w live on different grids")
    if not p > 1:
        raise ParameterError(f"p must be > 1, got {p}")
    if not np.any(h.values > 0):
        raise DomainError("h is identically zero")
    kind = kind or MaximalKind.dyadic()
    if B is None:
        B = max(1.0, certified_upper(kind, p, w))
    elif B < 1:
        raise ParameterError(f"B must be >= 1, got {B}")
    g = h.grid

    def M(a):
        return apply_maximal(kind, StepFunction(a, g)).values

    ser = iterate_series(M, h.values, B)
    R = ser.partial
    cl = CheckList()
    diff = h.values - R
    i = int(np.argmax(diff))
    cl.add("h <= R h", float(h.values.flat[i]), float(R.flat[i]), slack=0.0,
           witness={"cell": i})
    hn = h.lp_norm(p, w)
    Rn = StepFunction(R, g).lp_norm(p, w)
    cl.add("||R h||_Lp(w) <= 2 ||h||_Lp(w)", Rn, 2.0 * hn)
    MR = M(R)
    ratio = MR / (2.0 * B * ser.next_partial)
    i = int(np.argmax(ratio))
    cl.add("M(R_K h) <= 2B R_(K+1) h", float(MR.flat[i]), float(2.0 * B * ser.next_partial.flat[i]),
           witness={"cell": i})
    maj = Weight(R, g) if np.all(R > 0) else None
    a1 = math.inf
    if maj is not None:
        a1 = a1_constant(maj, _kind_family(kind)).value
        cl.add("[R h]_A1 <= 2B", a1, 2.0 * B * (1.0 + ser.tail_bound / float(R.min())))
    else:
        cl.add("R h > 0 everywhere", 0.0, -1.0)
        maj = Weight(np.where(R > 0, R, np.finfo(float).tiny), g)
    return MajorantReport(maj, float(B), ser.terms, a1, ser.tail_bound, hn, Rn, cl)


@dataclass
class Factorization:
    w1: Weight
    w2: Weight
    p: float
    h_used: StepFunction
    a1_w1: float
    a1_w2: float
    bound_w1: float
    bound_w2: float
    B1: float
    B2: float
    terms: int
    checks: CheckList

    @property
    def BS(self):
        return self.B1 + self.B2

    @property
    def passed(self):
        return self.checks.passed

    def to_dict(self):
        return {"p": self.p, "B1": self.B1, "B2": self.B2, "BS": self.BS,
                "a1_w1": self.a1_w1, "a1_w2": self.a1_w2, "bound_w1": self.bound_w1,
                "bound_w2": self.bound_w2, "terms": self.terms, "passed": self.passed,
                "checks": self.checks.to_list()}


def jones_factorize(w: Weight, p: float, h: Optional[StepFunction] = None,
                    kind: Optional[MaximalKind] = None, fam: Optional[CubeFamily] = None) -> Factorization:
    """w = w1 w2^{1-p} with w1, w2 in A_1, built by iterating S = S1 + S2 on L^q, q = pp'.

    S1 f = w^{1/q} M(f^{p'} w^{-1/p})^{1/p'},  S2 f = sigma^{1/q} M(f^p sigma^{-1/p'})^{1/p}.
    Their norms are bounded by B1 = B_M(p, w)^{1/p'} and B2 = B_M(p', sigma)^{1/p};
    w2 = (Rh)^{p'} w^{-1/p}, w1 = (Rh)^p sigma^{-1/p'}, and the A_1 constants obey
    [w1] <= (2 B_S)^p, [w2] <= (2 B_S)^{p'} up to truncation.
    """
    w = as_weight(w)
    if not p > 1:
        raise ParameterError(f"p must be > 1, got {p}")
    g = w.grid
    kind = kind or MaximalKind.dyadic()
    fam = fam or _kind_family(kind)
    h = as_step(np.ones(g.shape), g) if h is None else as_step(h)
    if not np.any(h.values > 0):
        raise DomainError("h is identically zero")
    pp = conj(p)
    q = p * pp
    sigma = dual_weight(w, p)
    lw, ls = np.log(w.values), np.log(sigma.values)
    B1 = certified_upper(kind, p, w) ** (1.0 / pp)
    B2 = certified_upper(kind, pp, sigma) ** (1.0 / p)
    BS = B1 + B2
    wq, sq = np.exp(lw / q), np.exp(ls / q)
    wm, sm = np.exp(-lw / p), np.exp(-ls / pp)

    def M(a):
        return apply_maximal(kind, StepFunction(a, g)).values

    def S(f):
        return wq * M(f ** pp * wm) ** (1.0 / pp) + sq * M(f ** p * sm) ** (1.0 / p)

    ser = iterate_series(S, h.values, max(BS, 1.0))
    R = ser.partial
    if not np.all(R > 0):
        raise DomainError("the majorant vanishes somewhere; choose h with wider support")
    lR = np.log(R)
    w2 = Weight(np.exp(pp * lR - lw / p), g)
    w1 = Weight(np.exp(p * lR - ls / pp), g)
    cl = CheckList()
    prod = reverse_factor(w1, w2, p).values
    rel = np.abs(prod / w.values - 1.0)
    i = int(np.argmax(rel))
    cl.add("w1 w2^(1-p) = w (relative error <= 1e-10)", float(rel.flat[i]), 1e-10, slack=0.0,
           witness={"cell": i})
    SR = S(R)
    i = int(np.argmax(SR / (2.0 * BS * ser.next_partial)))
    cl.add("S(R_K h) <= 2 B_S R_(K+1) h", float(SR.flat[i]), float(2.0 * BS * ser.next_partial.flat[i]),
           witness={"cell": i})
    a1w1, a1w2 = a1_constant(w1, fam).value, a1_constant(w2, fam).value
    corr = 1.0 + ser.tail_bound / float(R.min())
    b1, b2 = (2.0 * BS * corr) ** p, (2.0 * BS * corr) ** pp
    cl.add("[w1]_A1 <= (2 B_S)^p", a1w1, b1)
    cl.add("[w2]_A1 <= (2 B_S)^p'", a1w2, b2)
    ap = ap_constant(w, p, fam).value
    cl.add("[w]_Ap <= [w1]_A1 [w2]_A1^(p-1)", ap, a1w1 * a1w2 ** (p - 1.0))
    return Factorization(w1, w2, p, h, a1w1, a1w2, b1, b2, B1, B2, ser.terms, cl)


@dataclass
class ApRhFactorization:
    v1: Weight
    v2: Weight
    p: float
    s: float
    q: float
    a1_v1: float
    rh_v1: float
    ap_v2: float
    rhinf_v2: float
    inner: Factorization
    checks: CheckList

    @property
    def passed(self):
        return self.checks.passed

    def to_dict(self):
        return {"p": self.p, "s": self.s, "q": self.q, "a1_v1": self.a1_v1, "rhs_v1": self.rh_v1,
                "ap_v2": self.ap_v2, "rhinf_v2": self.rhinf_v2, "passed": self.passed,
                "checks": self.checks.to_list()}


def factorize_ap_rh(w: Weight, p: float, s: float, h: Optional[StepFunction] = None,
                    kind: Optional[MaximalKind] = None) -> ApRhFactorization:
    """w = v1 v2 with v1 = w1^{1/s}, v2 = w2^{1-p}, where w^s = w1 w2^{1-q}, q = s(p-1)+1."""
    w = as_weight(w)
    if not (p > 1 and s > 1):
        raise ParameterError(f"need p > 1 and s > 1, got p={p}, s={s}")
    kind = kind or MaximalKind.dyadic()
    fam = _kind_family(kind)
    q = s * (p - 1.0) + 1.0
    fz = jones_factorize(w.power(s), q, h, kind)
    v1 = fz.w1.power(1.0 / s)
    v2 = fz.w2.power(1.0 - p)
    cl = CheckList()
    cl.checks.extend(fz.checks.checks)
    rel = np.abs(v1.values * v2.values / w.values - 1.0)
    i = int(np.argmax(rel))
    cl.add("v1 v2 = w (relative error <= 1e-10)", float(rel.flat[i]), 1e-10, slack=0.0,
           witness={"cell": i})
    return ApRhFactorization(v1, v2, p, s, q, a1_constant(v1, fam).value, rh_constant(v1, s, fam).value,
                             ap_constant(v2, p, fam).value, rhinf_constant(v2, fam).value, fz, cl)


@dataclass
class ExtrapolationReport:
    w0: Weight
    p: float
    p0: float
    B1: float
    B2: float
    ap0: float
    bound: float
    a1_R1: float
    a1_R2: float
    R1: MajorantReport
    R2: MajorantReport
    checks: CheckList

    @property
    def passed(self):
        return self.checks.passed

    def to_dict(self):
        return {"p": self.p, "p0": self.p0, "B1": self.B1, "B2": self.B2, "Ap0(w0)": self.ap0,
                "bound": self.bound, "a1_R1": self.a1_R1, "a1_R2": self.a1_R2,
                "passed": self.passed, "checks": self.checks.to_list()}


def extrapolation_weight(h1: StepFunction, h2: StepFunction, w: Weight, p: float, p0: float,
                         kind: Optional[MaximalKind] = None):
    """w0 = (R1 h1)^{1-p0} R2(h2 w) with R1 on L^p(w), R2 on L^{p'}(sigma).

    Returns (w0, report); the report carries [w0]_{A_p0} <= (2B2)(2B1)^{p0-1}.
    """
    w = as_weight(w)
    h1, h2 = as_step(h1), as_step(h2)
    if not (p > 1 and p0 > 1):
        raise ParameterError(f"need p > 1 and p0 > 1, got p={p}, p0={p0}")
    kind = kind or MaximalKind.dyadic()
    fam = _kind_family(kind)
    g = w.grid
    sigma = dual_weight(w, p)
    r1 = rdf_majorant(h1, p, w, kind=kind)
    r2 = rdf_majorant(StepFunction(h2.values * w.values, g), conj(p), sigma, kind=kind)
    R1, R2 = r1.majorant, r2.majorant
    w0 = reverse_factor(R2, R1, p0)
    ap0 = ap_constant(w0, p0, fam).value
    bound = (2.0 * r2.B) * (2.0 * r1.B) ** (p0 - 1.0)
    cl = CheckList()
    cl.checks.extend(r1.checks.checks)
    cl.checks.extend(r2.checks.checks)
    cl.add("[w0]_Ap0 <= (2 B2)(2 B1)^(p0-1)", ap0, bound)
    cl.add("[w0]_Ap0 <= [R2]_A1 [R1]_A1^(p0-1)", ap0, r2.a1 * r1.a1 ** (p0 - 1.0))
    rep = ExtrapolationReport(w0, p, p0, r1.B, r2.B, ap0, bound, r1.a1, r2.a1, r1, r2, cl)
    return w0, rep


@dataclass(frozen=True)
class SharpConstantPrediction:
    p0: float
    p: float
    naive_exponent: float
    sharp_exponent: float

    def to_dict(self):
        return {"p0": self.p0, "p": self.p, "naive_exponent": self.naive_exponent,
                "sharp_exponent": self.sharp_exponent}


def sharp_constant_predict(p0: float, p: float) -> SharpConstantPrediction:
    """Exponent of [w]_{A_p} after extrapolating from p0: naive 1 + (p0-1)/(p-1), sharp max(1, (p0-1)/(p-1))."""
    if not (p0 > 1 and p > 1):
        raise ParameterError(f"need p0 > 1 and p > 1, got {p0}, {p}")
    r = (p0 - 1.0) / (p - 1.0)
    return SharpConstantPrediction(p0, p, 1.0 + r, max(1.0, r))
