import numpy as np
import pytest
from hypothesis import given, strategies as st

import oracles
from apweights import (CubeFamily, DomainError, GridSpec, InvariantError, MaximalKind, ParameterError,
                       SparseFamily, StepFunction, Weight, apply_maximal, cf_check, cz_decompose,
                       cz_ladder, enumerate_cubes, has_parent, random_step, sparse_apply,
                       sparse_bilinear_form, sparse_from_ladder, sparse_norm_lower, sparse_upper_p2)
from apweights import io
from apweights.czsparse import ladder_violations
from conftest import rand_func, rand_weight


def labels(cubes, g):
    return [Q.label(g) for Q in cubes]


def test_cz_goldens(f1):
    _, f = f1
    g = f.grid
    assert labels(cz_decompose(f, 1.0), g) == ["[1/2,1)"]
    assert labels(cz_decompose(f, 2.0), g) == ["[3/4,1)"]
    assert labels(cz_decompose(f, 3.0), g) == ["[3/4,1)"]
    assert cz_decompose(StepFunction(np.ones(4), g), 2.0) == []
    with pytest.raises(ParameterError):
        cz_decompose(f, 0.0)
    with pytest.raises(DomainError):
        cz_decompose(StepFunction(np.zeros(4), g), 1.0)


def test_f1_ladder(f1):
    _, f = f1
    g = f.grid
    lad = cz_ladder(f)
    assert lad.base == 4.0 and lad.ks == [-1, 0]
    assert labels(lad.levels[-1], g) == ["[0,1)"] and labels(lad.levels[0], g) == ["[1/2,1)"]
    assert lad.esets[(-1, 0)].tolist() == [0, 1] and lad.esets[(0, 0)].tolist() == [2, 3]
    assert lad.parentless == {(-1, 0)}
    with pytest.raises(ParameterError):
        cz_ladder(f, a=3.0)


@pytest.mark.parametrize("dim,L", [(1, 3), (1, 5), (2, 2), (2, 3)])
def test_cz_matches_oracle(dim, L, rng):
    g = GridSpec(dim, L)
    for shift in (0, 1, -2):
        f = rand_func(g, rng, zeros=True)
        for lam in (0.5, 10.0, 200.0):
            want = oracles.cz(f.values, lam, oracles.cubes(dim, L, "dyadic", shift))
            got = [(Q.corner, Q.side) for Q in cz_decompose(f, lam, shift)]
            assert sorted(got) == sorted(want)


def test_cz_union_is_level_set(rng):
    g = GridSpec(2, 4)
    f = rand_func(g, rng)
    Mf = apply_maximal(MaximalKind.dyadic(), f).values
    for lam in (1.0, 50.0):
        cov = np.zeros(g.shape, bool)
        for Q in cz_decompose(f, lam):
            cov[Q.slices()] = True
        assert np.array_equal(cov, Mf > lam)


@given(st.integers(0, 2 ** 31), st.sampled_from([(1, 8), (2, 4)]), st.sampled_from([0, 3, -5]))
def test_ladder_invariants(seed, grid, shift):
    rng = np.random.default_rng(seed)
    g = GridSpec(*grid)
    f = StepFunction(random_step(g, rng), g)
    lad = cz_ladder(f, shift=shift, validate=False)
    assert ladder_violations(lad, f) == []
    assert sparse_from_ladder(lad).violations() == []


def test_parentless_only_where_no_parent():
    g = GridSpec(1, 3)
    assert not has_parent(g.root(), g)
    assert has_parent(g.cube(1, (0,)), g)
    shifted = [Q for Q in enumerate_cubes(g, CubeFamily.dyadic(1)) if Q.side == 4]
    assert [has_parent(Q, g) for Q in shifted] == [False]


def test_sparse_apply_golden(f1):
    _, f = f1
    g = f.grid
    S = SparseFamily.from_cubes(g, [g.root(), g.cube(1, (2,)), g.cube(2, (3,))], eta=0.25)
    assert S.violations() == []
    assert np.allclose(sparse_apply(S, f).values, [1, 1, 3, 7], rtol=1e-14)
    S2 = sparse_from_ladder(cz_ladder(f))
    assert np.allclose(sparse_apply(S2, f).values, [1, 1, 3, 3], rtol=1e-14)


def test_sparse_matches_oracle_and_is_linear(rng):
    for dim, L in [(1, 5), (2, 3)]:
        g = GridSpec(dim, L)
        f, h = rand_func(g, rng), rand_func(g, rng)
        S = sparse_from_ladder(cz_ladder(f))
        cl = [(Q.corner, Q.side) for Q in S.cubes]
        want = oracles.as_array(oracles.sparse(f.values, cl), g.shape)
        assert np.allclose(sparse_apply(S, f).values, want, rtol=1e-12)
        lhs = sparse_apply(S, StepFunction(2 * f.values + h.values, g)).values
        rhs = 2 * sparse_apply(S, f).values + sparse_apply(S, h).values
        assert np.allclose(lhs, rhs, rtol=1e-12)
        form = sparse_bilinear_form(S, f.values, h.values)
        assert form == pytest.approx(np.sum(sparse_apply(S, f).values * h.values) * g.cell_measure, rel=1e-12)


def test_sparse_family_violations():
    g = GridSpec(1, 2)
    S = SparseFamily(g, [g.root(), g.cube(1, (2,))], [np.array([0, 1, 2]), np.array([2, 3])])
    bad = S.violations()
    assert any("overlaps" in b for b in bad)
    S = SparseFamily(g, [g.root()], [np.array([0])])
    assert any("eta" in b for b in S.violations())


def test_cf_f1(f1):
    w, f = f1
    r = cf_check(f, w, 2.0)
    assert r.lhs == pytest.approx(4.25, rel=1e-12)
    assert r.rhs == pytest.approx(5.0, rel=1e-12)
    assert r.bound == pytest.approx(6.25, rel=1e-12)
    assert r.passed and r.family_size == 2


def test_cf_random(rng):
    for i in range(60):
        g = GridSpec(1, 8) if i % 2 else GridSpec(2, 4)
        f = StepFunction(random_step(g, rng), g)
        w = rand_weight(g, rng, 1.0)
        p = float(rng.uniform(1.2, 4))
        assert cf_check(f, w, p, shift=int(rng.integers(-2, 3))).passed


def test_sparse_norm_bounds(rng):
    g = GridSpec(1, 6)
    for _ in range(10):
        w = rand_weight(g, rng)
        f = StepFunction(random_step(g, rng), g)
        S = sparse_from_ladder(cz_ladder(f))
        est = sparse_norm_lower(S, 2.0, w, trials=4)
        assert 0 < est.lower <= est.upper == pytest.approx(sparse_upper_p2(S, w))


def test_sparse_norm_edge_cases():
    g = GridSpec(1, 4)
    S = SparseFamily(g, [], [])
    assert sparse_norm_lower(S, 2.0, Weight(np.ones(16), g)).lower == 0.0
    chain = SparseFamily.from_cubes(g, [g.cube(k, (0,)) for k in range(5)])
    assert sparse_norm_lower(chain, 2.0, Weight(np.ones(16), g)).lower >= 1.0


def test_sparse_json_round_trip(rng):
    g = GridSpec(2, 3)
    S = sparse_from_ladder(cz_ladder(rand_func(g, rng), shift=1))
    text = io.sparse_to_json(S)
    S2 = io.sparse_from_json(text)
    assert io.sparse_to_json(S2) == text
    assert S2.cubes == S.cubes and all(np.array_equal(a, b) for a, b in zip(S.esets, S2.esets))


def test_ladder_invalid_raises_only_when_validating(rng, monkeypatch):
    import apweights.czsparse as cz
    g = GridSpec(1, 5)
    f = rand_func(g, rng)
    monkeypatch.setattr(cz, "ladder_violations", lambda *a, **k: ["forced"])
    with pytest.raises(InvariantError):
        cz.cz_ladder(f)
    cz.cz_ladder(f, validate=False)
