import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

import oracles
from apweights import (Cube, CubeFamily, DegenerateMeasureError, DomainError, GridSpec, Reducer,
                       StepFunction, Weight, enumerate_cubes, family_size, one_third_shifts,
                       tree_sum, weighted_average, window_reduce)
from conftest import rand_func


def test_gridspec_basics():
    g = GridSpec(2, 3)
    assert g.N == 8 and g.shape == (8, 8) and g.size == 64
    assert g.cell_measure == 1 / 64
    assert g.root() == Cube((0, 0), 8)
    with pytest.raises(Exception):
        GridSpec(3, 2)


def test_cube_labels_and_levels():
    g = GridSpec(1, 2)
    assert g.cube(1, (2,)).label(g) == "[1/2,1)"
    assert g.cube(2, (3,)).label(g) == "[3/4,1)"
    assert g.root().level(g) == 0
    assert Cube((0,), 3).level(g) is None
    with pytest.raises(DomainError):
        Cube((3,), 2).check(g)


def test_cube_dict_round_trip():
    g = GridSpec(2, 4)
    Q = Cube((4, 8), 4, (1, 1))
    assert Cube.from_dict(Q.to_dict(g), g) == Q
    assert Q.to_dict(g) == {"shift": [1, 1], "level": 2, "side": 4, "coords": [4, 8]}


@pytest.mark.parametrize("dim,L", [(1, 1), (1, 3), (1, 5), (2, 1), (2, 2), (2, 3)])
@pytest.mark.parametrize("kind,shift", [("dyadic", 0), ("dyadic", 1), ("dyadic", -3),
                                        ("aligned", 0), ("union", 0)])
def test_enumeration_matches_oracle(dim, L, kind, shift):
    g = GridSpec(dim, L)
    fam = CubeFamily(kind, shift)
    got = [(Q.corner, Q.side) for Q in enumerate_cubes(g, fam)]
    assert got == oracles.cubes(dim, L, kind, shift)
    assert family_size(g, fam) == len(got)


def test_family_counts():
    g = GridSpec(1, 2)
    assert family_size(g, CubeFamily.dyadic()) == 7
    assert family_size(g, CubeFamily.aligned()) == 10


def test_shifted_family_is_clipped():
    g = GridSpec(1, 2)
    level1 = [Q.label(g) for Q in enumerate_cubes(g, CubeFamily.dyadic(1)) if Q.side == 2]
    assert level1 == ["[1/4,3/4)"]


def test_one_third_shifts():
    assert one_third_shifts(GridSpec(2, 4)) == [(0, 0), (5, 5), (-5, -5)]


def test_levels_and_within():
    g = GridSpec(1, 4)
    fam = CubeFamily.dyadic(levels=(1, 2))
    assert {Q.side for Q in enumerate_cubes(g, fam)} == {8, 4}
    Q = g.cube(1, (8,))
    inner = list(enumerate_cubes(g, CubeFamily.dyadic().restrict(Q)))
    assert all(R.corner[0] >= 8 for R in inner) and len(inner) == 15


def test_parse_family():
    assert CubeFamily.parse("dyadic:3") == CubeFamily.dyadic(3)
    assert CubeFamily.parse("all-aligned").kind == "aligned"
    with pytest.raises(ValueError):
        CubeFamily.parse("hexagonal")


@given(st.integers(1, 2), st.integers(0, 4), st.sampled_from(["sum", "max", "min"]),
       st.integers(0, 2 ** 31))
def test_window_reduce_matches_naive(dim, L, op, seed):
    if dim == 2:
        L = min(L, 3)
    rng = np.random.default_rng(seed)
    N = 2 ** L
    a = rng.normal(size=(N,) * dim)
    s = int(rng.integers(1, N + 1))
    got = window_reduce(a, s, op)
    red = {"sum": math.fsum, "max": max, "min": min}[op]
    for c in np.ndindex(*got.shape):
        vals = [a[x] for x in oracles.cells_of(c, s)]
        assert got[c] == pytest.approx(red(vals), rel=1e-12, abs=1e-12)


def test_window_lse():
    a = np.log(np.arange(1.0, 9.0))
    got = window_reduce(a, 3, "lse")
    want = [math.log(sum(range(k + 1, k + 4))) for k in range(6)]
    assert np.allclose(got, want, rtol=1e-14)


def test_dyadic_sums_bitwise_identical_across_families(rng):
    g = GridSpec(2, 4)
    a = rng.random(g.shape)
    r = Reducer(a)
    for fam in (CubeFamily.dyadic(), CubeFamily.aligned(), CubeFamily.union()):
        sums = r.family(g, fam)
        for Q, v in zip(enumerate_cubes(g, fam), sums):
            if Q.side & (Q.side - 1) == 0 and all(c % Q.side == 0 for c in Q.corner):
                assert v == tree_sum(a[Q.slices()])


def test_prefix_consistency_random_cubes(rng):
    g = GridSpec(2, 5)
    a = rng.random(g.shape)
    r = Reducer(a)
    for _ in range(1000):
        s = int(rng.integers(1, g.N + 1))
        c = tuple(int(x) for x in rng.integers(0, g.N - s + 1, 2))
        got = r.window(s)[c]
        want = math.fsum(a[c[0]:c[0] + s, c[1]:c[1] + s].ravel())
        assert abs(got - want) <= 1e-12 * want


def test_stepfunction_validation():
    g = GridSpec(1, 2)
    with pytest.raises(ValueError):
        StepFunction(np.array([1.0, np.nan, 1.0, 1.0]), g)
    with pytest.raises(ValueError):
        StepFunction(np.array([1.0, -1.0, 1.0, 1.0]), g)
    with pytest.raises(ValueError):
        Weight(np.array([1.0, 0.0, 1.0, 1.0]), g)
    f = StepFunction(np.array([1.0, 2.0, 3.0, 4.0]), g)
    assert not f.values.flags.writeable
    assert f.integral() == 2.5
    assert f.average(g.cube(1, (2,))) == 3.5


def test_weighted_average_degenerate():
    g = GridSpec(1, 2)
    f = StepFunction(np.ones(4), g)
    sigma = StepFunction(np.array([0.0, 0.0, 1.0, 1.0]), g)
    assert weighted_average(f, sigma, g.cube(1, (2,))) == 1.0
    with pytest.raises(DegenerateMeasureError):
        weighted_average(f, sigma, g.cube(1, (0,)))


def test_lp_norm_scaling(rng):
    g = GridSpec(1, 6)
    f = rand_func(g, rng)
    w = Weight(np.exp(rng.normal(size=g.shape)), g)
    want = math.fsum(f.values ** 3 * w.values / g.size) ** (1 / 3)
    assert f.lp_norm(3.0, w) == pytest.approx(want, rel=1e-13)
    assert f.scaled(1e200).lp_norm(3.0, w) == pytest.approx(1e200 * want, rel=1e-13)
