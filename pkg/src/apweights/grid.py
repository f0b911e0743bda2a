"""Dyadic geometry on [0,1)^dim and step-function arithmetic.

Everything is measured in cell units: a grid of depth L has N = 2**L cells
per axis, a cube is an integer corner plus an integer side.  Window sums
are built from binary doubling tables, T_j[i] = T_{j-1}[i] + T_{j-1}[i+2^(j-1)],
so every sum is a fixed tree of positive additions.  The sum over a dyadic
cube is the same tree no matter which family asked for it, and a window of
non power-of-two side is a fixed left-to-right sum of its binary pieces.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from typing import Iterator, Optional, Sequence

import numpy as np

from .errors import DegenerateMeasureError, DomainError, ParameterError

__all__ = [
    "GridSpec", "Cube", "CubeFamily", "FamilyBlock", "StepFunction", "Weight",
    "family_blocks", "enumerate_cubes", "family_size", "one_third_shifts",
    "average", "weighted_average", "integral", "Reducer", "window_reduce",
    "scatter_max", "tree_sum", "as_step", "as_weight",
]

_OPS = {
    "sum": np.add,
    "max": np.maximum,
    "min": np.minimum,
    "lse": np.logaddexp,
}


@dataclass(frozen=True)
class GridSpec:
    """Uniform mesh of N = 2**depth cells per axis on [0,1)^dim."""
    dim: int
    depth: int

    def __post_init__(self):
        if self.dim not in (1, 2):
            raise ParameterError(f"dim must be 1 or 2, got {self.dim}")
        if int(self.depth) != self.depth or self.depth < 1:
            raise ParameterError(f"depth must be an integer >= 1, got {self.depth}")

    @property
    def N(self) -> int:
        return 1 << self.depth

    @property
    def shape(self) -> tuple:
        return (self.N,) * self.dim

    @property
    def size(self) -> int:
        return self.N ** self.dim

    @property
    def cell_measure(self) -> float:
        return float(self.N) ** (-self.dim)

    def root(self) -> "Cube":
        return Cube((0,) * self.dim, self.N)

    def cube(self, level: int, coords: Sequence[int], shift=0) -> "Cube":
        """Cube of the given level whose corner sits at cell coords."""
        if not 0 <= level <= self.depth:
            raise DomainError(f"level {level} outside 0..{self.depth}")
        return Cube(tuple(int(c) for c in coords), 1 << (self.depth - level),
                    _shift_vec(shift, self.dim))

    @classmethod
    def from_shape(cls, shape: Sequence[int]) -> "GridSpec":
        shape = tuple(shape)
        if len(shape) not in (1, 2) or len(set(shape)) != 1:
            raise ParameterError(f"values must be a 1-d or square 2-d array, got shape {shape}")
        n = shape[0]
        if n < 2 or n & (n - 1):
            raise ParameterError(f"cells per axis must be a power of two >= 2, got {n}")
        return cls(len(shape), n.bit_length() - 1)


def _shift_vec(shift, dim: int) -> tuple:
    if np.ndim(shift) == 0:
        return (int(shift),) * dim
    shift = tuple(int(s) for s in shift)
    if len(shift) != dim:
        raise ParameterError(f"shift {shift} does not match dim={dim}")
    return shift


@dataclass(frozen=True, order=True)
class Cube:
    """Axis-parallel cube: integer cell corner, integer cell side.

    `shift` names the lattice the cube was taken from; it does not move the
    cube, the corner is already absolute.
    """
    corner: tuple
    side: int
    shift: tuple = field(default=(), compare=False)

    def __post_init__(self):
        object.__setattr__(self, "corner", tuple(int(c) for c in self.corner))
        object.__setattr__(self, "side", int(self.side))
        if not self.shift:
            object.__setattr__(self, "shift", (0,) * len(self.corner))
        else:
            object.__setattr__(self, "shift", tuple(int(t) for t in self.shift))
        if self.side < 1:
            raise DomainError(f"cube side must be >= 1 cell, got {self.side}")

    @property
    def dim(self) -> int:
        return len(self.corner)

    def level(self, g: GridSpec) -> Optional[int]:
        """Dyadic level (side 2**-level), or None when the side is not a power of two."""
        s = self.side
        if s & (s - 1):
            return None
        return g.depth - (s.bit_length() - 1)

    def check(self, g: GridSpec) -> "Cube":
        if self.dim != g.dim:
            raise DomainError(f"cube of dim {self.dim} on a grid of dim {g.dim}")
        if any(c < 0 or c + self.side > g.N for c in self.corner):
            raise DomainError(f"cube {self.label(g)} is not inside [0,1)^{g.dim}")
        return self

    def slices(self) -> tuple:
        return tuple(slice(c, c + self.side) for c in self.corner)

    def cells(self) -> int:
        return self.side ** self.dim

    def measure(self, g: GridSpec) -> float:
        return self.cells() * g.cell_measure

    def contains(self, other: "Cube") -> bool:
        return all(c <= o and o + other.side <= c + self.side
                   for c, o in zip(self.corner, other.corner))

    def flat_cells(self, g: GridSpec) -> np.ndarray:
        """Row-major indices of the cells of this cube."""
        idx = np.arange(g.size).reshape(g.shape)
        return idx[self.slices()].ravel()

    def label(self, g: GridSpec) -> str:
        parts = []
        for c in self.corner:
            a, b = Fraction(c, g.N), Fraction(c + self.side, g.N)
            parts.append(f"[{a},{b})")
        return "x".join(parts)

    def to_dict(self, g: GridSpec) -> dict:
        return {"shift": list(self.shift), "level": self.level(g),
                "side": self.side, "coords": list(self.corner)}

    @classmethod
    def from_dict(cls, d: dict, g: GridSpec) -> "Cube":
        coords = tuple(d["coords"])
        if "side" in d and d["side"] is not None:
            side = int(d["side"])
        else:
            side = 1 << (g.depth - int(d["level"]))
        return cls(coords, side, tuple(d.get("shift") or (0,) * len(coords))).check(g)


def one_third_shifts(g: GridSpec) -> list:
    """Shift vectors 0, +floor(N/3), -floor(N/3) (same offset on every axis)."""
    t = g.N // 3
    return [(0,) * g.dim, (t,) * g.dim, (-t,) * g.dim]


@dataclass(frozen=True)
class CubeFamily:
    """Which cubes a supremum runs over.

    kind is "dyadic" (one possibly shifted lattice), "aligned" (every
    grid-aligned cube of integer side) or "union" (the dyadic lattices of
    one_third_shifts).  `levels` keeps only levels lo..hi (sides
    2**(L-hi)..2**(L-lo)); `within` keeps only cubes inside a given cube.
    """
    kind: str = "dyadic"
    shift: object = 0
    levels: Optional[tuple] = None
    within: Optional[Cube] = None

    def __post_init__(self):
        if self.kind not in ("dyadic", "aligned", "union"):
            raise ParameterError(f"unknown family kind {self.kind!r}")
        if np.ndim(self.shift) != 0:
            object.__setattr__(self, "shift", tuple(int(s) for s in self.shift))
        else:
            object.__setattr__(self, "shift", int(self.shift))
        if self.levels is not None:
            lo, hi = self.levels
            if lo > hi:
                raise ParameterError(f"empty level range {self.levels}")
            object.__setattr__(self, "levels", (int(lo), int(hi)))

    @classmethod
    def dyadic(cls, shift=0, levels=None, within=None) -> "CubeFamily":
        return cls("dyadic", shift, levels, within)

    @classmethod
    def aligned(cls, levels=None, within=None) -> "CubeFamily":
        return cls("aligned", 0, levels, within)

    @classmethod
    def union(cls, levels=None, within=None) -> "CubeFamily":
        return cls("union", 0, levels, within)

    @classmethod
    def parse(cls, text: str) -> "CubeFamily":
        """'dyadic', 'dyadic:3', 'aligned', 'all-aligned', 'union'."""
        name, _, arg = text.partition(":")
        name = name.strip().lower()
        if name in ("aligned", "all-aligned", "full"):
            return cls.aligned()
        if name in ("union", "union-of-shifts", "shifts"):
            return cls.union()
        if name == "dyadic":
            return cls.dyadic(int(arg) if arg else 0)
        raise ParameterError(f"unknown family {text!r}")

    def restrict(self, within: Cube) -> "CubeFamily":
        return CubeFamily(self.kind, self.shift, self.levels, within)

    def describe(self) -> str:
        s = self.kind
        if self.kind == "dyadic":
            s += f"({self.shift})"
        if self.levels is not None:
            s += f"[levels {self.levels[0]}..{self.levels[1]}]"
        if self.within is not None:
            s += f"[within {self.within.corner}+{self.within.side}]"
        return s

    def to_dict(self) -> dict:
        d = {"kind": self.kind, "shift": self.shift}
        if self.levels is not None:
            d["levels"] = list(self.levels)
        return d

    def sides(self, g: GridSpec) -> list:
        lo, hi = self.levels if self.levels is not None else (0, g.depth)
        lo, hi = max(lo, 0), min(hi, g.depth)
        if self.kind == "aligned":
            smin, smax = 1 << (g.depth - hi), 1 << (g.depth - lo)
            return list(range(smax, smin - 1, -1))
        return [1 << (g.depth - l) for l in range(lo, hi + 1)]


@dataclass(frozen=True)
class FamilyBlock:
    """All cubes of one side in a family: corners (m, dim) in lexicographic order."""
    side: int
    corners: np.ndarray
    shifts: np.ndarray
    stride_aligned: bool

    def __len__(self):
        return len(self.corners)

    def cube(self, i: int) -> Cube:
        return Cube(tuple(self.corners[i]), self.side, tuple(self.shifts[i]))


def _lattice_corners(N: int, s: int, t: int) -> np.ndarray:
    r = t % s
    c = np.arange(r, N - s + 1, s)
    return c


def _product(axes: list) -> np.ndarray:
    mesh = np.meshgrid(*axes, indexing="ij")
    return np.stack([m.ravel() for m in mesh], axis=1).astype(np.int64)


@lru_cache(maxsize=256)
def family_blocks(g: GridSpec, fam: CubeFamily) -> tuple:
    """Blocks of fam on g, coarse to fine; concatenated they give enumeration order."""
    N = g.N
    if fam.kind == "dyadic":
        shifts = [_shift_vec(fam.shift, g.dim)]
    elif fam.kind == "union":
        shifts = one_third_shifts(g)
    else:
        shifts = None
    blocks = []
    for s in fam.sides(g):
        if shifts is None:
            corners = _product([np.arange(N - s + 1)] * g.dim)
            owner = np.zeros_like(corners)
            aligned = s == 1
        else:
            parts, owners = [], []
            for sv in shifts:
                c = _product([_lattice_corners(N, s, t) for t in sv])
                parts.append(c)
                owners.append(np.tile(np.array(sv, dtype=np.int64), (len(c), 1)))
            corners = np.concatenate(parts)
            owner = np.concatenate(owners)
            if len(shifts) > 1:
                corners, first = np.unique(corners, axis=0, return_index=True)
                owner = owner[first]
            aligned = len(shifts) == 1 or len({tuple(sv_i % s for sv_i in sv) for sv in shifts}) == 1
        if fam.within is not None:
            q = fam.within
            lo = np.array(q.corner)
            keep = np.all((corners >= lo) & (corners + s <= lo + q.side), axis=1)
            corners, owner = corners[keep], owner[keep]
        if len(corners) == 0:
            continue
        corners = corners.reshape(-1, g.dim)
        corners.setflags(write=False)
        owner.setflags(write=False)
        blocks.append(FamilyBlock(s, corners, owner, aligned))
    return tuple(blocks)


def family_size(g: GridSpec, fam: CubeFamily) -> int:
    return sum(len(b) for b in family_blocks(g, fam))


def enumerate_cubes(g: GridSpec, fam: CubeFamily) -> Iterator[Cube]:
    """Each cube of fam once: coarse levels first, then corners lexicographically."""
    for b in family_blocks(g, fam):
        for i in range(len(b)):
            yield b.cube(i)


# window reductions

def _sl(ndim: int, axis: int, start: int, stop: int) -> tuple:
    s = [slice(None)] * ndim
    s[axis] = slice(start, stop)
    return tuple(s)


def _doubling(a: np.ndarray, axis: int, jmax: int, op) -> list:
    tabs = [a]
    for j in range(jmax):
        t, h = tabs[-1], 1 << j
        n = t.shape[axis] - h
        if n <= 0:
            break
        tabs.append(op(t[_sl(t.ndim, axis, 0, n)], t[_sl(t.ndim, axis, h, h + n)]))
    return tabs


def _combine(tabs: list, s: int, axis: int, op) -> np.ndarray:
    length = tabs[0].shape[axis]
    n = length - s + 1
    out, off = None, 0
    for j in reversed(range(s.bit_length())):
        if not (s >> j) & 1:
            continue
        piece = tabs[j][_sl(tabs[j].ndim, axis, off, off + n)]
        out = piece if out is None else op(out, piece)
        off += 1 << j
    return out


def window_reduce(a: np.ndarray, s: int, op: str = "sum") -> np.ndarray:
    """Reduce every s-wide window (s**dim square): output shape (n-s+1,)*ndim."""
    f = _OPS[op]
    out = np.asarray(a, dtype=float)
    for axis in range(out.ndim):
        tabs = _doubling(out, axis, s.bit_length() - 1, f)
        out = _combine(tabs, s, axis, f)
    return out


def tree_sum(a: np.ndarray) -> float:
    """Sum of a square array by the same tree used for cube sums."""
    a = np.asarray(a, dtype=float)
    return float(window_reduce(a, a.shape[0], "sum").ravel()[0])


class Reducer:
    """Window reductions of one array, sharing the first-axis doubling tables."""

    def __init__(self, a: np.ndarray, op: str = "sum"):
        self.a = np.asarray(a, dtype=float)
        self.op = _OPS[op]
        self._tabs0 = _doubling(self.a, 0, self.a.shape[0].bit_length() - 1, self.op)
        self._cache = {}

    def window(self, s: int) -> np.ndarray:
        w = self._cache.get(s)
        if w is None:
            w = _combine(self._tabs0, s, 0, self.op)
            for axis in range(1, self.a.ndim):
                w = _combine(_doubling(w, axis, s.bit_length() - 1, self.op), s, axis, self.op)
            self._cache[s] = w
        return w

    def at(self, block: FamilyBlock) -> np.ndarray:
        w = self.window(block.side)
        return w[tuple(block.corners.T)]

    def family(self, g: GridSpec, fam: CubeFamily) -> np.ndarray:
        blocks = family_blocks(g, fam)
        if not blocks:
            return np.empty(0)
        return np.concatenate([self.at(b) for b in blocks])


def scatter_max(g: GridSpec, block: FamilyBlock, vals: np.ndarray, out: Optional[np.ndarray] = None) -> np.ndarray:
    """out[x] = max(out[x], max of vals over the block's cubes containing x)."""
    if out is None:
        out = np.full(g.shape, -np.inf)
    s, N = block.side, g.N
    corners = block.corners
    if len(corners) == 0:
        return out
    if block.stride_aligned and len(corners) > 0:
        r = corners[0] % s
        coarse_shape = tuple((N - ri) // s for ri in r)
        coarse = np.full(coarse_shape, -np.inf)
        idx = tuple(((corners - r) // s).T)
        np.maximum.at(coarse, idx, vals)
        fine = coarse
        for axis in range(g.dim):
            fine = np.repeat(fine, s, axis=axis)
        region = tuple(slice(ri, ri + n * s) for ri, n in zip(r, coarse_shape))
        np.maximum(out[region], fine, out=out[region])
        return out
    G = np.full((N - s + 1,) * g.dim, -np.inf)
    np.maximum.at(G, tuple(corners.T), vals)
    G = np.pad(G, s - 1, constant_values=-np.inf)
    np.maximum(out, window_reduce(G, s, "max"), out=out)
    return out


# step functions

class StepFunction:
    """Nonnegative cell values on a GridSpec, stored as a read-only (N,)*dim array."""

    strict = False

    def __init__(self, values, grid: Optional[GridSpec] = None):
        v = np.array(values, dtype=float)
        if grid is None:
            grid = GridSpec.from_shape(v.shape)
        elif v.size != grid.size:
            raise DomainError(f"expected {grid.size} values for {grid}, got {v.size}")
        v = v.reshape(grid.shape)
        if not np.all(np.isfinite(v)):
            raise DomainError("step function values must be finite")
        if self.strict:
            if np.any(v <= 0):
                raise DomainError("weight values must be strictly positive")
        elif np.any(v < 0):
            raise DomainError("step function values must be >= 0")
        v.setflags(write=False)
        self.grid = grid
        self.values = v

    def __repr__(self):
        return f"{type(self).__name__}(dim={self.grid.dim}, depth={self.grid.depth})"

    def __eq__(self, other):
        return (isinstance(other, StepFunction) and self.grid == other.grid
                and np.array_equal(self.values, other.values))

    __hash__ = None

    @property
    def flat(self) -> np.ndarray:
        return self.values.ravel()

    def integral(self) -> float:
        return integral(self)

    def average(self, Q: Cube) -> float:
        return average(self, Q)

    def lp_norm(self, p: float, w: Optional["StepFunction"] = None) -> float:
        """(integral of f^p w)^(1/p), scaled by max f to avoid overflow."""
        f = self.values
        m = f.max()
        if m == 0:
            return 0.0
        terms = (f / m) ** p
        if w is not None:
            terms = terms * w.values
        return float(m * (terms.sum() * self.grid.cell_measure) ** (1.0 / p))

    def log(self) -> np.ndarray:
        with np.errstate(divide="ignore"):
            return np.log(self.values)

    def power(self, e: float) -> "StepFunction":
        """Pointwise f**e, computed as exp(e log f) for weights."""
        if self.strict:
            return Weight(np.exp(e * np.log(self.values)), self.grid)
        return StepFunction(np.power(self.values, e), self.grid)

    def scaled(self, c: float) -> "StepFunction":
        return type(self)(self.values * c, self.grid)

    def with_values(self, v) -> "StepFunction":
        return type(self)(v, self.grid)


class Weight(StepFunction):
    """Strictly positive step function."""
    strict = True


def as_step(f, grid: Optional[GridSpec] = None) -> StepFunction:
    if isinstance(f, StepFunction):
        return f
    return StepFunction(f, grid)


def as_weight(w, grid: Optional[GridSpec] = None) -> Weight:
    if isinstance(w, Weight):
        return w
    if isinstance(w, StepFunction):
        return Weight(w.values, w.grid)
    return Weight(w, grid)


def integral(f: StepFunction) -> float:
    return tree_sum(f.values) * f.grid.cell_measure


def average(f: StepFunction, Q: Cube) -> float:
    Q.check(f.grid)
    return tree_sum(f.values[Q.slices()]) / Q.cells()


def weighted_average(f: StepFunction, sigma: StepFunction, Q: Cube) -> float:
    """sigma(Q)^-1 times the integral of f sigma over Q."""
    Q.check(f.grid)
    if sigma.grid != f.grid:
        raise DomainError("f and sigma live on different grids")
    sl = Q.slices()
    den = tree_sum(sigma.values[sl])
    if den <= 0:
        raise DegenerateMeasureError(f"sigma({Q.label(f.grid)}) = 0")
    return tree_sum(f.values[sl] * sigma.values[sl]) / den
