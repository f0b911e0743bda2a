"""Calderón-Zygmund stopping cubes, sparse families and sparse operators."""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .errors import DomainError, InvariantError, ParameterError
from .grid import (Cube, CubeFamily, FamilyBlock, GridSpec, Reducer, StepFunction,
                   Weight, as_step, as_weight, family_blocks)
from .maximal import (MaximalKind, NormEstimate, apply_maximal, random_step)
from .parallel import pmap
from .reports import CheckList
from .weights import ap_constant, conj

__all__ = [
    "CZLadder", "SparseFamily", "cz_decompose", "cz_ladder", "has_parent",
    "sparse_from_ladder", "sparse_apply", "sparse_bilinear_form", "cf_check",
    "CFReport", "sparse_norm_lower", "sparse_upper_p2",
]


def has_parent(Q: Cube, g: GridSpec) -> bool:
    """True when the next coarser cube of Q's lattice lies inside the domain."""
    s = 2 * Q.side
    if s > g.N:
        return False
    for c, t in zip(Q.corner, Q.shift):
        r = t % s
        pc = c - ((c - r) % s)
        if pc < 0 or pc + s > g.N:
            return False
    return True


def _level_blocks(g: GridSpec, shift):
    return family_blocks(g, CubeFamily.dyadic(shift))


def cz_decompose(f: StepFunction, lam: float, shift=0) -> list:
    """Maximal dyadic cubes (of the given lattice) with avg |f| > lam.

    Their union is {M^d f > lam}.  When a selected cube has no parent in the
    lattice (the root, or a clipped shifted cube), nothing certifies
    avg <= 2^dim lam; see has_parent.
    """
    if not lam > 0:
        raise ParameterError(f"lambda must be > 0, got {lam}")
    f = as_step(f)
    if not np.any(f.values != 0):
        raise DomainError("f is identically zero")
    return _select(f, lam, shift)[0]


def _select(f: StepFunction, lam: float, shift):
    g = f.grid
    covered = np.zeros(g.shape, dtype=bool)
    r = Reducer(np.abs(f.values))
    out, avgs = [], []
    for b in _level_blocks(g, shift):
        a = r.at(b) / b.side ** g.dim
        for i in np.flatnonzero(a > lam):
            Q = b.cube(int(i))
            sl = Q.slices()
            if covered[sl].any():
                continue
            covered[sl] = True
            out.append(Q)
            avgs.append(float(a[i]))
    return out, avgs, covered


@dataclass
class CZLadder:
    """Stopping cubes Q_j^k of {M^d f > a^k} with disjoint portions E_j^k (flat cell indices)."""
    grid: GridSpec
    base: float
    shift: object
    levels: dict
    averages: dict
    esets: dict
    parentless: set = field(default_factory=set)

    @property
    def ks(self) -> list:
        return sorted(self.levels)

    def cubes(self):
        for k in self.ks:
            for j, Q in enumerate(self.levels[k]):
                yield k, j, Q

    def __len__(self):
        return sum(len(v) for v in self.levels.values())


def _ladder_range(Mf: np.ndarray, a: float):
    pos = Mf[Mf > 0]
    lo_v, hi_v = float(pos.min()), float(pos.max())
    k_lo = math.ceil(math.log(lo_v, a)) - 1
    while a ** (k_lo + 1) < lo_v:
        k_lo += 1
    while a ** k_lo >= lo_v:
        k_lo -= 1
    k_hi = math.ceil(math.log(hi_v, a)) - 1
    while a ** (k_hi + 1) < hi_v:
        k_hi += 1
    while a ** k_hi >= hi_v:
        k_hi -= 1
    return k_lo, k_hi


def cz_ladder(f: StepFunction, a: Optional[float] = None, shift=0, validate: bool = True) -> CZLadder:
    """Run cz_decompose at lambda = a^k for k from k_lo to k_hi.

    k_lo is the largest k with a^k below the smallest positive value of M^d f,
    so Omega_{k_lo} is all of {M^d f > 0}; k_hi is the largest k with a^k below
    max M^d f, so Omega_{k_hi + 1} is empty.
    """
    f = as_step(f)
    g = f.grid
    if a is None:
        a = float(2 ** (g.dim + 1))
    if a < 2 ** (g.dim + 1):
        raise ParameterError(f"base a must be >= 2^(dim+1) = {2 ** (g.dim + 1)}, got {a}")
    if not np.any(f.values != 0):
        raise DomainError("f is identically zero")
    Mf = apply_maximal(MaximalKind.dyadic(shift), f).values
    k_lo, k_hi = _ladder_range(Mf, a)
    levels, avgs, covers = {}, {}, {}
    for k in range(k_lo, k_hi + 1):
        cubes, av, cov = _select(f, a ** k, shift)
        levels[k], avgs[k], covers[k] = cubes, av, cov
    idx = np.arange(g.size).reshape(g.shape)
    esets, parentless = {}, set()
    for k in range(k_lo, k_hi + 1):
        nxt = covers.get(k + 1)
        for j, Q in enumerate(levels[k]):
            sl = Q.slices()
            keep = ~nxt[sl] if nxt is not None else np.ones(Q.side ** g.dim, bool).reshape((Q.side,) * g.dim)
            esets[(k, j)] = idx[sl][keep].ravel()
            if not has_parent(Q, g):
                parentless.add((k, j))
    lad = CZLadder(g, float(a), shift, levels, avgs, esets, parentless)
    if validate:
        problems = ladder_violations(lad, f, Mf)
        if problems:
            raise InvariantError("; ".join(problems[:5]))
    return lad


def ladder_violations(lad: CZLadder, f: StepFunction, Mf: Optional[np.ndarray] = None) -> list:
    """Every failed ladder invariant, as readable strings (empty when valid).

    Parentless cubes are exempt from the upper average bound and from the
    |E| >= |Q|/2 requirement.
    """
    g = lad.grid
    if Mf is None:
        Mf = apply_maximal(MaximalKind.dyadic(lad.shift), f).values
    bad = []
    owner = np.full(g.size, -1)
    for n, (k, j, Q) in enumerate(lad.cubes()):
        lam = lad.base ** k
        av = lad.averages[k][j]
        if not av > lam:
            bad.append(f"k={k} {Q.label(g)}: avg {av} <= a^k {lam}")
        if (k, j) not in lad.parentless and av > 2 ** g.dim * lam * (1 + 1e-12):
            bad.append(f"k={k} {Q.label(g)}: avg {av} > 2^dim a^k")
        E = lad.esets[(k, j)]
        if (k, j) not in lad.parentless and 2 * len(E) < Q.cells():
            bad.append(f"k={k} {Q.label(g)}: |E| = {len(E)} < |Q|/2")
        if np.any(owner[E] >= 0):
            bad.append(f"k={k} {Q.label(g)}: E overlaps an earlier E")
        owner[E] = n
        if not np.all(np.isin(E, Q.flat_cells(g))):
            bad.append(f"k={k} {Q.label(g)}: E not inside Q")
    for k in lad.ks:
        cov = np.zeros(g.shape, dtype=int)
        for Q in lad.levels[k]:
            cov[Q.slices()] += 1
        if cov.max(initial=0) > 1:
            bad.append(f"k={k}: cubes overlap")
        if not np.array_equal(cov > 0, Mf > lad.base ** k):
            bad.append(f"k={k}: union differs from {{M^d f > a^k}}")
    return bad


@dataclass
class SparseFamily:
    """Cubes with pairwise disjoint owned cell sets E_Q, |E_Q| >= eta |Q|."""
    grid: GridSpec
    cubes: list
    esets: list
    eta: float = 0.5
    shift: object = 0
    dropped: list = field(default_factory=list)

    def __len__(self):
        return len(self.cubes)

    def violations(self) -> list:
        g = self.grid
        bad = []
        seen = np.zeros(g.size, dtype=bool)
        for Q, E in zip(self.cubes, self.esets):
            E = np.asarray(E)
            if len(E) < self.eta * Q.cells() - 1e-12:
                bad.append(f"{Q.label(g)}: |E| < eta |Q|")
            if seen[E].any():
                bad.append(f"{Q.label(g)}: E overlaps")
            seen[E] = True
            if not np.all(np.isin(E, Q.flat_cells(g))):
                bad.append(f"{Q.label(g)}: E not inside Q")
        return bad

    @classmethod
    def from_cubes(cls, g: GridSpec, cubes, eta: float = 0.5, shift=0) -> "SparseFamily":
        """Assign E_Q greedily from the finest cubes up (each takes what is still free)."""
        cubes = [Q.check(g) for Q in cubes]
        order = sorted(range(len(cubes)), key=lambda i: (cubes[i].side, cubes[i].corner))
        free = np.ones(g.size, dtype=bool)
        esets = [None] * len(cubes)
        for i in order:
            cells = cubes[i].flat_cells(g)
            mine = cells[free[cells]]
            free[mine] = False
            esets[i] = mine
        return cls(g, cubes, esets, eta, shift)


def sparse_from_ladder(lad: CZLadder, eta: float = 0.5) -> SparseFamily:
    """Flatten a ladder; parentless cubes whose E is too small are dropped (and listed)."""
    cubes, esets, dropped = [], [], []
    for k, j, Q in lad.cubes():
        E = lad.esets[(k, j)]
        if len(E) < eta * Q.cells():
            if (k, j) in lad.parentless:
                dropped.append(Q)
                continue
            raise InvariantError(f"ladder cube {Q.label(lad.grid)} has |E| < eta|Q|")
        cubes.append(Q)
        esets.append(E)
    return SparseFamily(lad.grid, cubes, esets, eta, lad.shift, dropped)


def _group(S: SparseFamily):
    """Cubes grouped by side as FamilyBlocks (order preserved within a side)."""
    by = {}
    for n, Q in enumerate(S.cubes):
        by.setdefault(Q.side, []).append(n)
    for s in sorted(by, reverse=True):
        ids = by[s]
        corners = np.array([S.cubes[n].corner for n in ids], dtype=np.int64).reshape(-1, S.grid.dim)
        r = corners[0] % s
        aligned = bool(np.all(corners % s == r))
        yield ids, FamilyBlock(s, corners, np.zeros_like(corners), aligned)


def _scatter_add(g: GridSpec, block: FamilyBlock, vals: np.ndarray, out: np.ndarray):
    s = block.side
    if block.stride_aligned:
        r = block.corners[0] % s
        shape = tuple((g.N - ri) // s for ri in r)
        coarse = np.zeros(shape)
        np.add.at(coarse, tuple(((block.corners - r) // s).T), vals)
        fine = coarse
        for axis in range(g.dim):
            fine = np.repeat(fine, s, axis=axis)
        region = tuple(slice(ri, ri + n * s) for ri, n in zip(r, shape))
        out[region] += fine
    else:
        for c, v in zip(block.corners, vals):
            out[tuple(slice(ci, ci + s) for ci in c)] += v
    return out


def _cube_averages(S: SparseFamily, arr: np.ndarray):
    r = Reducer(arr)
    for ids, b in _group(S):
        yield ids, b, r.at(b) / b.side ** S.grid.dim


def sparse_apply(S: SparseFamily, f: StepFunction) -> StepFunction:
    """T_S f = sum over Q in S of (avg_Q f) chi_Q."""
    f = as_step(f)
    if f.grid != S.grid:
        raise DomainError("sparse family and f live on different grids")
    return StepFunction(_apply_signed(S, f.values), S.grid)


def _apply_signed(S: SparseFamily, arr: np.ndarray) -> np.ndarray:
    out = np.zeros(S.grid.shape)
    for _, b, av in _cube_averages(S, arr):
        _scatter_add(S.grid, b, av, out)
    return out


def sparse_bilinear_form(S: SparseFamily, f: np.ndarray, h: np.ndarray) -> float:
    """sum over Q of avg_Q f avg_Q h |Q| (cell units times cell measure)."""
    g = S.grid
    total = 0.0
    rf, rh = Reducer(f), Reducer(h)
    for _, b in _group(S):
        n = b.side ** g.dim
        total += float(np.sum(rf.at(b) * rh.at(b) / n))
    return total * g.cell_measure


@dataclass
class CFReport:
    lhs: float
    rhs: float
    bound: float
    ap: float
    family_size: int
    dropped: int
    checks: CheckList

    @property
    def passed(self):
        return self.checks.passed

    def to_dict(self):
        return {"lhs": self.lhs, "rhs": self.rhs, "bound": self.bound, "Ap": self.ap,
                "family_size": self.family_size, "dropped": self.dropped,
                "passed": self.passed, "checks": self.checks.to_list()}


def cf_check(f: StepFunction, w: Weight, p: float, a: Optional[float] = None, shift=0) -> CFReport:
    """int T_S f w <= 2^p [w]_{A_p} int M^d f w, with S built from the ladder of f."""
    f, w = as_step(f), as_weight(w)
    if not p > 1:
        raise ParameterError(f"p must be > 1, got {p}")
    lad = cz_ladder(f, a, shift)
    S = sparse_from_ladder(lad)
    g = f.grid
    fam = CubeFamily.dyadic(shift)
    ap = ap_constant(w, p, fam).value
    Tf = sparse_apply(S, f).values
    Mf = apply_maximal(MaximalKind.dyadic(shift), f).values
    lhs = float(np.sum(Tf * w.values)) * g.cell_measure
    rhs = float(np.sum(Mf * w.values)) * g.cell_measure
    bound = 2.0 ** p * ap
    cl = CheckList()
    cl.add("int T_S f w <= 2^p [w]_Ap int M^d f w", lhs, bound * rhs)
    worst, wit = 0.0, None
    for Q, E in zip(S.cubes, S.esets):
        wQ = float(np.sum(w.values[Q.slices()]))
        wE = float(np.sum(w.flat[E]))
        r = wQ / (bound * wE)
        if r > worst:
            worst, wit = r, Q
    if wit is not None:
        Q, E = wit, S.esets[S.cubes.index(wit)]
        cl.add("w(Q) <= 2^p [w]_Ap w(E_Q)", float(np.sum(w.values[Q.slices()])),
               bound * float(np.sum(w.flat[E])), witness={"cube": Q.to_dict(g)})
    return CFReport(lhs, rhs, bound, ap, len(S), len(S.dropped), cl)


def sparse_upper_p2(S: SparseFamily, w: Weight) -> float:
    """Certified L^2(w) bound (1/eta) [w]_{A_2} * 2 * 2 (Doob for both weighted maximal operators)."""
    if len(S) == 0:
        return 0.0
    a2 = ap_constant(w, 2.0, CubeFamily.dyadic(S.shift)).value
    return 4.0 * a2 / S.eta


def sparse_norm_lower(S: SparseFamily, p: float, w: Weight, trials: int = 16, seed: int = 0,
                      iterations: int = 30) -> NormEstimate:
    """Lower bound for ||T_S||_{L^p(w)} from random functions, witnesses sigma chi_Q
    (Q in S) and a power iteration using that T_S is symmetric."""
    w = as_weight(w)
    g = w.grid
    upper = sparse_upper_p2(S, w) if p == 2 else math.inf
    if len(S) == 0:
        return NormEstimate(0.0, 0.0 if p == 2 else math.inf, "empty family", trials)
    sigma = w.power(1.0 - conj(p)).values

    def ratio(f):
        den = StepFunction(f, g).lp_norm(p, w)
        if den == 0:
            return 0.0
        return StepFunction(_apply_signed(S, f), g).lp_norm(p, w) / den

    def power(f, iters):
        best = 0.0
        for _ in range(iters):
            Tf = _apply_signed(S, f)
            den = StepFunction(f, g).lp_norm(p, w)
            best = max(best, StepFunction(Tf, g).lp_norm(p, w) / den)
            m = Tf.max()
            adj = _apply_signed(S, w.values * (Tf / m) ** (p - 1.0))
            nf = np.power(adj / w.values, conj(p) - 1.0)
            if not np.any(nf > 0):
                break
            f = nf / nf.max()
        return best

    best, label = ratio(np.ones(g.shape)), "constant"
    for Q in S.cubes:
        f = np.zeros(g.shape)
        f[Q.slices()] = sigma[Q.slices()]
        r = ratio(f)
        if r > best:
            best, label = r, f"sigma chi_Q on {Q.label(g)}"
    r = power(np.ones(g.shape), iterations)
    if r > best:
        best, label = r, "power iteration from 1"

    def trial(i):
        rng = np.random.default_rng(np.random.SeedSequence([seed, i]))
        f = random_step(g, rng)
        return max(ratio(f), power(f, iterations))

    for i, r in enumerate(pmap(trial, range(trials))):
        if r > best:
            best, label = r, f"random trial {i}"
    return NormEstimate(float(best), float(max(upper, best)) if p == 2 else math.inf,
                        "witnesses+random+power-iteration", trials, label)
