"""Weight-class constants, class arithmetic and weight generators.

Every constant is a maximum over a CubeFamily of a per-cube functional.  The
functionals are evaluated in log space, log avg_Q w^e, so that exponents
such as 1 - p' with p close to 1 neither overflow nor underflow.  While
|e log w| stays moderate the power means are plain window sums of w^e; past
that they switch to log-sum-exp window reductions.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np
from scipy import integrate

from .errors import DomainError, NonIntegrableError, ParameterError
from .grid import (Cube, CubeFamily, GridSpec, Reducer, StepFunction, Weight,
                   as_weight, family_blocks, scatter_max, tree_sum)
from .reports import SLACK, CheckList

__all__ = [
    "ConstantReport", "conj", "ap_constant", "a1_constant", "rh_constant",
    "rhinf_constant", "ainfty_rj_constant", "fw_ainfty_constant",
    "apq_constant", "dual_weight", "power_weight", "PowerWeightSpec",
    "ReverseFactorSpec", "reverse_factor", "reverse_factor_check",
    "rh_exponent_search", "p_epsilon_search", "check_ap_rh_product",
    "truncate_weight", "truncate_check", "LimitedRangeParams",
    "limited_range_check", "RefinementStudy", "refinement_study",
    "cube_functional",
]

_LOG_SWITCH = 600.0


def conj(p: float) -> float:
    """Hölder conjugate p' = p/(p-1); conj(inf) = 1, conj(1) = inf."""
    if p == math.inf:
        return 1.0
    if p == 1:
        return math.inf
    return p / (p - 1.0)


def _default(fam):
    return CubeFamily.dyadic() if fam is None else fam


@dataclass(frozen=True)
class ConstantReport:
    kind: str
    value: float
    cube: Cube
    family: CubeFamily
    grid: GridSpec
    params: dict = field(default_factory=dict)

    def __float__(self):
        return float(self.value)

    def to_dict(self) -> dict:
        d = {"kind": self.kind, "value": self.value,
             "cube": self.cube.to_dict(self.grid), "family": self.family.to_dict()}
        if self.params:
            d["params"] = dict(self.params)
        return d


class _Means:
    """Per-cube power means of one weight over one family, in log form."""

    def __init__(self, w: StepFunction, fam: CubeFamily):
        self.w = w
        self.g = w.grid
        self.fam = fam
        self.blocks = family_blocks(self.g, fam)
        if not self.blocks:
            raise DomainError(f"family {fam.describe()} has no cubes on {self.g}")
        with np.errstate(divide="ignore"):
            self.logw = np.log(w.values)
        self.logcount = np.concatenate(
            [np.full(len(b), self.g.dim * math.log(b.side)) for b in self.blocks])

    def _family(self, arr, op="sum"):
        return Reducer(arr, op).family(self.g, self.fam)

    def log_mean(self, e: float) -> np.ndarray:
        """log avg_Q w^e for every cube."""
        if e == 1:
            x, arr = self.logw, self.w.values
        else:
            x = e * self.logw
            arr = None
        big = np.max(np.abs(x[np.isfinite(x)])) if np.any(np.isfinite(x)) else 0.0
        if big < _LOG_SWITCH:
            if arr is None:
                arr = np.exp(x)
            with np.errstate(divide="ignore"):
                return np.log(self._family(arr)) - self.logcount
        return self._family(x, "lse") - self.logcount

    def log_max(self) -> np.ndarray:
        return self._family(self.logw, "max")

    def log_min(self) -> np.ndarray:
        return self._family(self.logw, "min")

    def mean_log(self) -> np.ndarray:
        return self._family(self.logw) / np.exp(self.logcount)

    def cube(self, i: int) -> Cube:
        for b in self.blocks:
            if i < len(b):
                return b.cube(i)
            i -= len(b)
        raise IndexError(i)

    def report(self, kind: str, F: np.ndarray, **params) -> ConstantReport:
        i = int(np.argmax(F))
        return ConstantReport(kind, float(math.exp(F[i])), self.cube(i), self.fam, self.g, params)


def _ap_log(m: _Means, p: float) -> np.ndarray:
    return m.log_mean(1.0) + (p - 1.0) * m.log_mean(1.0 - conj(p))


def _rh_log(m: _Means, s: float) -> np.ndarray:
    return m.log_mean(s) / s - m.log_mean(1.0)


def ap_constant(w: Weight, p: float, fam: Optional[CubeFamily] = None) -> ConstantReport:
    """[w]_{A_p}: max over cubes of (avg w)(avg w^{1-p'})^{p-1}."""
    if not p > 1:
        raise ParameterError(f"A_p needs p > 1, got {p}; use a1_constant for p = 1")
    w = as_weight(w)
    m = _Means(w, _default(fam))
    if p == math.inf:
        raise ParameterError("p = inf is not supported; use ainfty_rj_constant")
    return m.report("Ap", _ap_log(m, p), p=p)


def a1_constant(w: Weight, fam: Optional[CubeFamily] = None) -> ConstantReport:
    """[w]_{A_1}: max over cubes of avg w / min w."""
    w = as_weight(w)
    m = _Means(w, _default(fam))
    return m.report("A1", m.log_mean(1.0) - m.log_min())


def rh_constant(w: StepFunction, s: float, fam: Optional[CubeFamily] = None) -> ConstantReport:
    """[w]_{RH_s}: max over cubes of (avg w^s)^{1/s} / avg w."""
    if not s > 1:
        raise ParameterError(f"RH_s needs s > 1, got {s}")
    w = as_weight(w)
    m = _Means(w, _default(fam))
    return m.report("RHs", _rh_log(m, s), s=s)


def rhinf_constant(w: StepFunction, fam: Optional[CubeFamily] = None) -> ConstantReport:
    """[w]_{RH_inf}: max over cubes of max w / avg w."""
    w = as_weight(w)
    m = _Means(w, _default(fam))
    return m.report("RHinf", m.log_max() - m.log_mean(1.0))


def ainfty_rj_constant(w: StepFunction, fam: Optional[CubeFamily] = None) -> ConstantReport:
    """Reverse Jensen constant: max over cubes of avg w / exp(avg log w)."""
    if isinstance(w, StepFunction) and np.any(w.values <= 0):
        raise DomainError("reverse Jensen constant needs w > 0 (log w undefined)")
    w = as_weight(w)
    m = _Means(w, _default(fam))
    return m.report("AinfRJ", m.log_mean(1.0) - m.mean_log())


def apq_constant(w: Weight, p: float, q: float, fam: Optional[CubeFamily] = None) -> ConstantReport:
    """[w]_{A_{p,q}}: max over cubes of (avg w^q)^{1/q} (avg w^{-p'})^{1/p'}."""
    if not p > 1:
        raise ParameterError(f"A_(p,q) needs p > 1, got {p}")
    if not q > 0:
        raise ParameterError(f"A_(p,q) needs q > 0, got {q}")
    w = as_weight(w)
    m = _Means(w, _default(fam))
    pp = conj(p)
    return m.report("Apq", m.log_mean(q) / q + m.log_mean(-pp) / pp, p=p, q=q)


def _local_dyadic_integrals(w: StepFunction, g: GridSpec, fam: CubeFamily) -> np.ndarray:
    """For each cube Q of a dyadic family: integral over Q of the family's
    maximal function of w restricted to subcubes of Q (in cell units)."""
    blocks = family_blocks(g, fam)
    avgs = []
    rw = Reducer(w.values)
    for b in blocks:
        A = np.full(g.shape, -np.inf)
        scatter_max(g, b, rw.at(b) / b.side ** g.dim, A)
        avgs.append(A)
    out = [None] * len(blocks)
    M = None
    for i in reversed(range(len(blocks))):
        M = avgs[i] if M is None else np.maximum(avgs[i], M)
        out[i] = Reducer(np.where(np.isfinite(M), M, 0.0)).at(blocks[i])
    return np.concatenate(out)


def _restricted_blocks(blocks, Q: Cube):
    lo = np.array(Q.corner)
    for b in blocks:
        keep = np.all((b.corners >= lo) & (b.corners + b.side <= lo + Q.side), axis=1)
        if np.any(keep):
            yield b, keep


def fw_ainfty_constant(w: Weight, fam: Optional[CubeFamily] = None) -> ConstantReport:
    """Fujii-Wilson constant: max over Q of w(Q)^{-1} times the integral over Q
    of the family's maximal function of w chi_Q (cubes of fam inside Q only)."""
    w = as_weight(w)
    fam = _default(fam)
    g = w.grid
    m = _Means(w, fam)
    wsum = Reducer(w.values).family(g, fam)
    if fam.kind == "dyadic" and fam.within is None:
        num = _local_dyadic_integrals(w, g, fam)
    else:
        rw = Reducer(w.values)
        vals = []
        for b in m.blocks:
            for i in range(len(b)):
                Q = b.cube(i)
                M = np.full(g.shape, -np.inf)
                for sb, keep in _restricted_blocks(m.blocks, Q):
                    sub = type(sb)(sb.side, sb.corners[keep], sb.shifts[keep], sb.stride_aligned)
                    scatter_max(g, sub, rw.at(sub) / sb.side ** g.dim, M)
                vals.append(float(np.sum(M[Q.slices()])))
        num = np.array(vals)
    return m.report("AinfFW", np.log(num) - np.log(wsum))


def dual_weight(w: Weight, p: float) -> Weight:
    """sigma = w^{1-p'}."""
    if not p > 1:
        raise ParameterError(f"dual weight needs p > 1, got {p}")
    return as_weight(w).power(1.0 - conj(p))


def cube_functional(kind: str, w: StepFunction, Q: Cube, **params) -> float:
    """Evaluate one per-cube functional directly from the cells of Q."""
    Q.check(w.grid)
    v = w.values[Q.slices()]
    n = Q.cells()

    def mean(e):
        return tree_sum(np.exp(e * np.log(v)) if e != 1 else v) / n

    if kind == "Ap":
        p = params["p"]
        return mean(1.0) * mean(1.0 - conj(p)) ** (p - 1.0)
    if kind == "A1":
        return mean(1.0) / float(v.min())
    if kind == "RHs":
        s = params["s"]
        return mean(s) ** (1.0 / s) / mean(1.0)
    if kind == "RHinf":
        return float(v.max()) / mean(1.0)
    if kind == "AinfRJ":
        return mean(1.0) / math.exp(tree_sum(np.log(v)) / n)
    if kind == "Apq":
        p, q = params["p"], params["q"]
        return mean(q) ** (1.0 / q) * mean(-conj(p)) ** (1.0 / conj(p))
    raise ParameterError(f"unknown functional {kind!r}")


# generators

def _unit_square_mean(a: float) -> float:
    """Mean of |x|^a over [0,1]^2 (exact polar form)."""
    val, _ = integrate.quad(lambda t: math.cos(t) ** (-(a + 2.0)), 0.0, math.pi / 4,
                            epsabs=0.0, epsrel=1e-13, limit=200)
    return 2.0 * val / (a + 2.0)


def _interval_mean(d0: np.ndarray, a: float) -> np.ndarray:
    """Mean of |x|^a over [d0, d0+1] for d0 >= 0 (cell units)."""
    d1 = d0 + 1.0
    out = np.empty_like(d0, dtype=float)
    touch = d0 == 0
    if a <= -1 and np.any(touch):
        raise NonIntegrableError(f"|x|^{a} is not integrable near the center in dim 1")
    out[touch] = 1.0 / (a + 1.0)
    far = ~touch
    x0, x1 = d0[far], d1[far]
    if a == -1:
        out[far] = np.log1p(1.0 / x0)
    else:
        out[far] = -np.power(x1, a + 1.0) * np.expm1((a + 1.0) * np.log(x0 / x1)) / (a + 1.0)
    return out


_GL_NEAR = np.polynomial.legendre.leggauss(24)
_GL_FAR = np.polynomial.legendre.leggauss(8)


def _square_mean_far(dx: np.ndarray, dy: np.ndarray, a: float, rule) -> np.ndarray:
    t, wt = rule
    t = 0.5 * (t + 1.0)
    wt = 0.5 * wt
    X = dx[:, None, None] + t[None, :, None]
    Y = dy[:, None, None] + t[None, None, :]
    vals = np.power(X * X + Y * Y, 0.5 * a)
    return np.einsum("kij,i,j->k", vals, wt, wt)


def power_weight(a: float, center=None, g: Optional[GridSpec] = None,
                 sampling: str = "average") -> Weight:
    """|x - center|^a on g, as exact cell averages (or cell-midpoint samples)."""
    if g is None:
        raise ParameterError("power_weight needs a grid")
    N, dim = g.N, g.dim
    if center is None:
        center = (0.0,) * dim
    center = np.atleast_1d(np.asarray(center, dtype=float))
    if center.shape != (dim,):
        raise ParameterError(f"center must have {dim} coordinates")
    cN = center * N
    if np.any(np.abs(cN - np.round(cN)) > 1e-9) or np.any(cN < 0) or np.any(cN > N):
        raise ParameterError("center must be a grid lattice point in [0,1]^dim")
    cN = np.round(cN).astype(np.int64)
    h = 1.0 / N
    if a == 0:
        return Weight(np.ones(g.shape), g)
    idx = [np.arange(N) - c for c in cN]
    if sampling == "midpoint":
        mids = np.meshgrid(*[(i + 0.5) * h for i in idx], indexing="ij")
        r2 = sum(m * m for m in mids)
        return Weight(np.power(r2, 0.5 * a), g)
    if sampling != "average":
        raise ParameterError(f"unknown sampling {sampling!r}")
    if a <= -dim:
        raise NonIntegrableError(f"|x|^{a} is not locally integrable in dim {dim}")
    if dim == 1:
        d = idx[0].astype(float)
        d0 = np.where(d >= 0, d, -d - 1.0)
        return Weight(_interval_mean(d0, a) * h ** a, g)
    DX, DY = np.meshgrid(idx[0].astype(float), idx[1].astype(float), indexing="ij")
    ax = np.where(DX >= 0, DX, -DX - 1.0).ravel()
    ay = np.where(DY >= 0, DY, -DY - 1.0).ravel()
    out = np.empty(ax.size)
    touch = (ax == 0) & (ay == 0)
    dist = np.hypot(ax, ay)
    near = ~touch & (dist < 4)
    far = ~touch & ~near
    out[touch] = _unit_square_mean(a)
    if np.any(near):
        out[near] = _square_mean_far(ax[near], ay[near], a, _GL_NEAR)
    if np.any(far):
        out[far] = _square_mean_far(ax[far], ay[far], a, _GL_FAR)
    return Weight(out.reshape(g.shape) * h ** a, g)


@dataclass(frozen=True)
class PowerWeightSpec:
    """Symbolic |x - center|^a, evaluable at any depth."""
    a: float
    dim: int = 1
    center: Optional[tuple] = None
    sampling: str = "average"

    def build(self, depth: int, sampling: Optional[str] = None) -> Weight:
        return power_weight(self.a, self.center, GridSpec(self.dim, depth),
                            sampling or self.sampling)

    def dual(self, p: float) -> "PowerWeightSpec":
        return PowerWeightSpec(self.a * (1.0 - conj(p)), self.dim, self.center, self.sampling)

    def integrable(self) -> bool:
        return self.a > -self.dim

    def describe(self) -> str:
        return f"|x-{self.center or 0}|^{self.a:g} (dim {self.dim})"


@dataclass(frozen=True)
class ReverseFactorSpec:
    """Symbolic w1 * w2^{1-p} from two specs."""
    w1: object
    w2: object
    p: float

    @property
    def dim(self):
        return self.w1.dim

    def build(self, depth: int, sampling: Optional[str] = None) -> Weight:
        return reverse_factor(self.w1.build(depth, sampling), self.w2.build(depth, sampling), self.p)

    def integrable(self) -> bool:
        return self.w1.integrable() and self.w2.integrable()

    def describe(self) -> str:
        return f"({self.w1.describe()})*({self.w2.describe()})^(1-{self.p:g})"


def reverse_factor(w1: Weight, w2: Weight, p: float) -> Weight:
    """w = w1 w2^{1-p}."""
    w1, w2 = as_weight(w1), as_weight(w2)
    if w1.grid != w2.grid:
        raise DomainError("w1 and w2 live on different grids")
    if not p > 1:
        raise ParameterError(f"reverse factorization needs p > 1, got {p}")
    return Weight(np.exp(np.log(w1.values) + (1.0 - p) * np.log(w2.values)), w1.grid)


@dataclass
class ReverseFactorReport:
    weight: Weight
    ap: ConstantReport
    a1_w1: ConstantReport
    a1_w2: ConstantReport
    bound: float
    checks: CheckList

    @property
    def passed(self):
        return self.checks.passed


def reverse_factor_check(w1: Weight, w2: Weight, p: float,
                         fam: Optional[CubeFamily] = None) -> ReverseFactorReport:
    """[w1 w2^{1-p}]_{A_p} <= [w1]_{A_1} [w2]_{A_1}^{p-1}."""
    w = reverse_factor(w1, w2, p)
    ap = ap_constant(w, p, fam)
    a1, a2 = a1_constant(w1, fam), a1_constant(w2, fam)
    bound = a1.value * a2.value ** (p - 1.0)
    cl = CheckList()
    cl.add("[w1 w2^(1-p)]_Ap <= [w1]_A1 [w2]_A1^(p-1)", ap.value, bound,
           witness={"cube": ap.cube.to_dict(w.grid)})
    return ReverseFactorReport(w, ap, a1, a2, bound, cl)


# searches and class arithmetic

def rh_exponent_search(w: Weight, fam: Optional[CubeFamily] = None, s_cap: float = 64.0,
                       tol: float = 1e-6, factor: float = 2.0) -> float:
    """Largest s in (1, s_cap] with (avg_Q w^s)^{1/s} <= factor * avg_Q w on every cube.

    The per-cube ratio is nondecreasing in s, so bisection is valid; the
    returned s always satisfies the inequality.  Returns s_cap when the
    cap itself is admissible.
    """
    w = as_weight(w)
    m = _Means(w, _default(fam))
    lim = math.log(factor)
    base = m.log_mean(1.0)

    def ok(s):
        return float(np.max(m.log_mean(s) / s - base)) <= lim

    if ok(s_cap):
        return float(s_cap)
    lo, hi = 1.0, float(s_cap)
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if ok(mid):
            lo = mid
        else:
            hi = mid
    return lo


def p_epsilon_search(w: Weight, p: float, budget: float, fam: Optional[CubeFamily] = None,
                     tol: float = 1e-6) -> float:
    """Smallest q in (1, p] with [w]_{A_q} <= budget (q clamped at 1 + tol)."""
    w = as_weight(w)
    fam = _default(fam)
    m = _Means(w, fam)
    at_p = math.exp(float(np.max(_ap_log(m, p))))
    lb = math.log(budget)
    if at_p > budget * (1 + SLACK):
        raise ParameterError(f"budget {budget} is below [w]_A{p} = {at_p}")

    def ok(q):
        return float(np.max(_ap_log(m, q))) <= lb

    lo, hi = 1.0 + tol, float(p)
    if ok(lo):
        return lo
    if not ok(hi):
        return hi
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if ok(mid):
            hi = mid
        else:
            lo = mid
    return hi


@dataclass
class ProductReport:
    p: float
    s: float
    q: float
    ap: float
    rh: float
    aq_ws: float
    checks: CheckList

    @property
    def passed(self):
        return self.checks.passed

    def to_dict(self):
        return {"p": self.p, "s": self.s, "q": self.q, "Ap": self.ap, "RHs": self.rh,
                "Aq(w^s)": self.aq_ws, "passed": self.passed, "checks": self.checks.to_list()}


def check_ap_rh_product(w: Weight, p: float, s: float, fam: Optional[CubeFamily] = None) -> ProductReport:
    """Check [w^s]_{A_q} against [w]_{A_p} and [w]_{RH_s}, q = s(p-1)+1, per cube and globally."""
    if not (p > 1 and s >= 1):
        raise ParameterError(f"need p > 1 and s >= 1, got p={p}, s={s}")
    w = as_weight(w)
    fam = _default(fam)
    q = s * (p - 1.0) + 1.0
    m = _Means(w, fam)
    A = _ap_log(m, p)
    R = _rh_log(m, s) if s > 1 else np.zeros_like(A)
    ms = _Means(w.power(s), fam)
    Aq = _ap_log(ms, q)
    cl = CheckList()
    up = Aq - s * (R + A)
    i = int(np.argmax(up))
    cl.add("per cube: [w^s]_Aq,Q <= ([w]_RHs,Q [w]_Ap,Q)^s", math.exp(Aq[i]),
           math.exp(s * (R[i] + A[i])), witness={"cube": m.cube(i).to_dict(w.grid)})
    low = np.maximum(A, s * R) - Aq
    i = int(np.argmax(low))
    cl.add("per cube: max([w]_Ap,Q, [w]_RHs,Q^s) <= [w^s]_Aq,Q",
           math.exp(max(A[i], s * R[i])), math.exp(Aq[i]),
           witness={"cube": m.cube(i).to_dict(w.grid)})
    ap, rh, aq = (math.exp(float(np.max(x))) for x in (A, R, Aq))
    cl.add("[w^s]_Aq <= ([w]_RHs [w]_Ap)^s", aq, (rh * ap) ** s)
    cl.add("max([w]_Ap, [w]_RHs^s) <= [w^s]_Aq", max(ap, rh ** s), aq)
    return ProductReport(p, s, q, ap, rh, aq, cl)


def truncate_weight(w: Weight, Ncap: float) -> Weight:
    """min(w, Ncap) pointwise."""
    if not Ncap > 0:
        raise ParameterError(f"truncation level must be > 0, got {Ncap}")
    w = as_weight(w)
    return Weight(np.minimum(w.values, Ncap), w.grid)


def truncate_check(w: Weight, Ncap: float, p: float, fam: Optional[CubeFamily] = None):
    """[min(w,N)]_{A_p} <= 2^p [w]_{A_p}; returns (weight, CheckList)."""
    t = truncate_weight(w, Ncap)
    before, after = ap_constant(w, p, fam), ap_constant(t, p, fam)
    cl = CheckList()
    cl.add("[min(w,N)]_Ap <= 2^p [w]_Ap", after.value, 2.0 ** p * before.value,
           witness={"cube": after.cube.to_dict(t.grid)})
    return t, cl


@dataclass(frozen=True)
class LimitedRangeParams:
    p_minus: float
    p_plus: float
    p: float

    def __post_init__(self):
        if not (0 <= self.p_minus < self.p < self.p_plus):
            raise ParameterError(
                f"need 0 <= p_minus < p < p_plus, got {self.p_minus}, {self.p}, {self.p_plus}")

    @property
    def tau(self) -> float:
        inv_minus = math.inf if self.p_minus == 0 else 1.0 / self.p_minus
        inv_plus = 0.0 if self.p_plus == math.inf else 1.0 / self.p_plus
        num = inv_minus - 1.0 / self.p
        den = 1.0 / self.p - inv_plus
        return num / den + 1.0

    @property
    def s(self) -> float:
        """(p_plus/p)', the reverse Hölder exponent."""
        return conj(self.p_plus / self.p)


@dataclass
class LimitedRangeReport:
    tau: float
    s: float
    u_constant: float
    ap_constant: float
    rh_constant: float
    checks: CheckList

    @property
    def passed(self):
        return self.checks.passed

    def to_dict(self):
        return {"tau": self.tau, "s": self.s, "[u]_Atau": self.u_constant,
                "[w]_A(p/p-)": self.ap_constant, "[w]_RHs": self.rh_constant,
                "passed": self.passed, "checks": self.checks.to_list()}


def limited_range_check(w: Weight, p: float, lr: LimitedRangeParams,
                        fam: Optional[CubeFamily] = None) -> LimitedRangeReport:
    """[u]_{A_tau} for u = w^{(p_+/p)'} against [w]_{A_{p/p_-}} and [w]_{RH_{(p_+/p)'}}."""
    if lr.p != p:
        lr = LimitedRangeParams(lr.p_minus, lr.p_plus, p)
    tau = lr.tau
    if not (tau > 1 and math.isfinite(tau)):
        raise ParameterError(f"tau must be a finite number > 1, got {tau}")
    if lr.p_minus < 1:
        raise ParameterError("the A_(p/p_-) side needs p_minus >= 1")
    p0 = p / lr.p_minus
    s = lr.s
    if p0 == 1:
        raise ParameterError("p/p_minus must exceed 1")
    rep = check_ap_rh_product(w, p0, s, fam)
    return LimitedRangeReport(tau, s, rep.aq_ws, rep.ap, rep.rh, rep.checks)


# refinement studies

@dataclass
class RefinementStudy:
    weight_spec: object
    p: float
    depths: list
    constants: list
    ratios: list
    classification: str
    sampling: str
    family: CubeFamily
    thresholds: dict

    def to_rows(self):
        rows = []
        for i, (L, c) in enumerate(zip(self.depths, self.constants)):
            rows.append({"depth": L, "constant": c,
                         "ratio": self.ratios[i - 1] if i else None,
                         "classification": self.classification})
        return rows


def refinement_study(spec, p: float, depths: Sequence[int], fam: Optional[CubeFamily] = None,
                     bounded_ratio: float = 1.05, growth_ratio: float = 1.05,
                     growth_steps: int = 3) -> RefinementStudy:
    """[w]_{A_p} of a symbolic weight across depths, classified bounded / divergent.

    bounded: the last two constants differ by a factor < bounded_ratio.
    divergent: each of the last growth_steps step ratios is >= growth_ratio.
    Anything else is reported as indeterminate.  Specs that are not locally
    integrable are sampled at cell midpoints instead of averaged.
    """
    fam = _default(fam)
    depths = list(depths)
    sampling = getattr(spec, "sampling", "average")
    if not spec.integrable():
        sampling = "midpoint"
    consts = []
    for L in depths:
        w = spec.build(L, sampling)
        consts.append(ap_constant(w, p, fam).value)
    ratios = [b / a for a, b in zip(consts, consts[1:])]
    cls = "indeterminate"
    if len(consts) >= 2:
        last = max(consts[-2:]) / min(consts[-2:])
        tail = ratios[-growth_steps:]
        if last < bounded_ratio:
            cls = "bounded"
        elif len(tail) == growth_steps and all(r >= growth_ratio for r in tail):
            cls = "divergent"
    return RefinementStudy(spec, p, depths, consts, ratios, cls, sampling, fam,
                           {"bounded_ratio": bounded_ratio, "growth_ratio": growth_ratio,
                            "growth_steps": growth_steps})
