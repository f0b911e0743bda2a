import numpy as np
import pytest
from hypothesis import given, strategies as st

import oracles
from apweights import (BilinearParams, CubeFamily, DomainError, GridSpec, MaximalKind, ParameterError,
                       SparseFamily, StepFunction, Weight, apply_maximal, apq_constant,
                       bilinear_a2_check, bilinear_maximal, bilinear_rh_check, bilinear_sparse_apply,
                       cz_ladder, multi_ap_constant, random_step, rh_constant, sparse_apply,
                       sparse_from_ladder, PowerWeightSpec)
from conftest import rand_func, rand_weight


def test_f1_goldens(f1):
    w, f = f1
    g = f.grid
    one = StepFunction(np.ones(4), g)
    assert np.allclose(bilinear_maximal(f, one).values, [1, 1, 2, 4], rtol=1e-14)
    assert np.allclose(bilinear_maximal(f, f).values, [1, 1, 4, 16], rtol=1e-14)
    bp = BilinearParams(4.0, 4.0, w, Weight(np.ones(4), g))
    assert bp.p == 2.0
    r = multi_ap_constant(bp)
    assert r.value == pytest.approx(1.9345276382620005, rel=1e-12)
    assert r.cube.label(g) == "[1/2,1)"


def test_reduces_to_linear_when_g_is_one(rng):
    g = GridSpec(1, 6)
    f = rand_func(g, rng)
    one = StepFunction(np.ones(g.shape), g)
    assert np.allclose(bilinear_maximal(f, one).values, apply_maximal(MaximalKind.dyadic(), f).values, rtol=1e-13)
    S = sparse_from_ladder(cz_ladder(f))
    assert np.allclose(bilinear_sparse_apply(S, f, one).values, sparse_apply(S, f).values, rtol=1e-13)


@given(st.integers(0, 2 ** 31), st.sampled_from([(1, 7), (2, 3)]))
def test_symmetry_and_product_bound(seed, grid):
    rng = np.random.default_rng(seed)
    G = GridSpec(*grid)
    f, h = StepFunction(random_step(G, rng), G), StepFunction(random_step(G, rng), G)
    M = bilinear_maximal(f, h).values
    assert np.array_equal(M, bilinear_maximal(h, f).values)
    Mf, Mh = apply_maximal(MaximalKind.dyadic(), f).values, apply_maximal(MaximalKind.dyadic(), h).values
    assert np.all(M <= Mf * Mh * (1 + 1e-14))


@pytest.mark.parametrize("dim,L", [(1, 4), (2, 2)])
def test_matches_oracle(dim, L, rng):
    G = GridSpec(dim, L)
    for kind in ("dyadic", "aligned"):
        cl = oracles.cubes(dim, L, kind)
        fam = CubeFamily(kind)
        f, h = rand_func(G, rng), rand_func(G, rng)
        want = oracles.as_array(oracles.bilinear_maximal(f.values, h.values, cl), G.shape)
        assert np.allclose(bilinear_maximal(f, h, fam).values, want, rtol=1e-12)
        w1, w2 = rand_weight(G, rng), rand_weight(G, rng)
        p1, p2 = float(rng.uniform(1.3, 5)), float(rng.uniform(1.3, 5))
        v, Q = oracles.multi_ap(w1.values, w2.values, p1, p2, cl)
        r = multi_ap_constant(BilinearParams(p1, p2, w1, w2), fam)
        assert r.value == pytest.approx(v, rel=1e-12) and (r.cube.corner, r.cube.side) == Q
        S = sparse_from_ladder(cz_ladder(f))
        want = oracles.as_array(oracles.sparse(f.values, [(c.corner, c.side) for c in S.cubes], h.values), G.shape)
        assert np.allclose(bilinear_sparse_apply(S, f, h).values, want, rtol=1e-12)


def test_multi_ap_large_p2_limit(rng):
    G = GridSpec(1, 5)
    w1 = rand_weight(G, rng, 0.5)
    one = Weight(np.ones(G.shape), G)
    p1 = 2.5
    r = multi_ap_constant(BilinearParams(p1, 1e3, w1, one)).value
    assert r == pytest.approx(apq_constant(w1, p1, p1).value, rel=1e-2)


def test_params_validation(f1):
    w, _ = f1
    with pytest.raises(ParameterError):
        BilinearParams(1.0, 2.0, w, w)
    with pytest.raises(DomainError):
        BilinearParams(2.0, 2.0, w, Weight(np.ones(8), GridSpec(1, 3)))


def test_rh_reduces_to_linear(rng):
    G = GridSpec(1, 6)
    one = Weight(np.ones(G.shape), G)
    for _ in range(5):
        w1 = rand_weight(G, rng)
        s = float(rng.uniform(1.2, 4))
        r = bilinear_rh_check(w1, one, s)
        assert r.C_star == pytest.approx(rh_constant(w1, s).value, rel=1e-12)
        assert r.passed


def test_rh_random(rng):
    for i in range(20):
        G = GridSpec(1, 7) if i % 2 else GridSpec(2, 3)
        w1, w2 = rand_weight(G, rng, 0.6), rand_weight(G, rng, 0.6)
        r = bilinear_rh_check(w1, w2, float(rng.uniform(1.2, 4)))
        assert r.passed, r.checks.violations()
        assert 1 - 1e-12 <= r.C_star <= r.chain_constant * (1 + 1e-12)
    with pytest.raises(ParameterError):
        bilinear_rh_check(w1, w2, 1.0)


def test_a2_trivial_case():
    G = GridSpec(1, 4)
    one = StepFunction(np.ones(G.shape), G)
    S = SparseFamily.from_cubes(G, [G.root()])
    rep = bilinear_a2_check(S, one, one, Weight(np.ones(G.shape), G), Weight(np.ones(G.shape), G))
    assert rep.lhs == pytest.approx(1.0) and rep.C == pytest.approx(4.0)
    assert rep.kappa == 1.0 and rep.passed


def test_a2_random(rng):
    for i in range(40):
        G = GridSpec(1, 8) if i % 2 else GridSpec(2, 4)
        w1, w2 = rand_weight(G, rng, 0.5), rand_weight(G, rng, 0.5)
        f, h = StepFunction(random_step(G, rng), G), StepFunction(random_step(G, rng), G)
        S = sparse_from_ladder(cz_ladder(f))
        rep = bilinear_a2_check(S, f, h, w1, w2)
        assert rep.passed, rep.checks.violations()
        assert rep.lhs <= rep.rhs * (1 + 1e-12)
        assert 1 <= rep.kappa < np.inf


@pytest.mark.parametrize("a", [-0.3, 0.3])
def test_a2_power_weights(a, rng):
    G = GridSpec(1, 8)
    w1 = PowerWeightSpec(a).build(8)
    w2 = PowerWeightSpec(-a / 2).build(8)
    f, h = StepFunction(random_step(G, rng), G), StepFunction(random_step(G, rng), G)
    S = sparse_from_ladder(cz_ladder(h))
    assert bilinear_a2_check(S, f, h, w1, w2).passed


def test_a2_rejects_negative(f1):
    w, f = f1
    S = SparseFamily.from_cubes(f.grid, [f.grid.root()])
    with pytest.raises(DomainError):
        bilinear_a2_check(S, StepFunction(-f.values, f.grid), f, w, w)
