import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from anisonet.errors import InvalidArgumentError
from anisonet.grid import Grid1D, build_sat, Grid2D, make_indicator_1d, make_indicator_2d, random_grid, tensor
from anisonet.netavg import (build_net_average_profile_1d, build_net_average_table,
                             morrey_average, net_average_1d, net_average_query)

from oracles import brute_force_1d, brute_force_best, brute_force_query

EXAMPLE = Grid2D((0.0, 0.0), (1.0, 1.0), [[1, 3], [5, 7]])


def dyadic_lattice(f, factor=8):
    (h1, h2), (L1, L2) = f.cells, f.extents
    t1 = h1 * 2.0 ** np.arange(int(np.ceil(np.log2(factor * L1 / h1))) + 1)
    t2 = h2 * 2.0 ** np.arange(int(np.ceil(np.log2(factor * L2 / h2))) + 1)
    return t1[:, None], t2[None, :]


def test_examples_2d():
    tbl = build_net_average_table(EXAMPLE)
    assert tbl(1, 1) == 7
    assert tbl(2, 2) == 4
    assert tbl(1, 2) == 6


def test_indicator_examples():
    tbl = build_net_average_table(make_indicator_2d(1, 1, 8, 8))
    assert tbl(0.25, 0.25) == 1
    assert tbl(2, 4) == 0.125


def test_examples_1d():
    for n in (1, 3, 16):
        g = make_indicator_1d(1, n)
        assert net_average_1d(g, 0.5) == 1
        assert net_average_1d(g, 2) == 0.5
    assert net_average_1d(Grid1D(0, 1, [0, 0, 0]), 0.7) == 0


def test_morrey_examples():
    f = Grid2D((0, 0), (1, 1), [[1, -1], [-1, 1]])
    # the support square itself averages to zero, but a 2x2 window shifted
    # one cell off the support still catches a single +1 cell
    assert build_sat(f).rect_integral(0, 2, 0, 2) == 0
    assert build_net_average_table(f)(2, 2) == 0.25
    assert morrey_average(f, 2, 2) == 1
    g = random_grid(3, 6, 5, (0.5, 0.5), "uniform")
    t1, t2 = dyadic_lattice(g)
    assert np.array_equal(morrey_average(g, t1, t2), build_net_average_table(g)(t1, t2))
    assert morrey_average(Grid2D((0, 0), (1, 1), np.zeros((2, 2))), 1, 1) == 0


@given(st.integers(0, 10_000))
def test_morrey_dominates_signed_average(seed):
    f = random_grid(seed, 5, 7, (0.25, 0.5), "signed")
    t1, t2 = dyadic_lattice(f)
    # ties on an all-positive window differ only by summation order
    signed = build_net_average_table(f)(t1, t2)
    assert np.all(morrey_average(f, t1, t2) >= signed * (1 - 1e-14))


@pytest.mark.parametrize("bad", [0.0, -1.0, np.inf, np.nan])
def test_non_positive_thresholds_rejected(bad):
    tbl = build_net_average_table(EXAMPLE)
    with pytest.raises(InvalidArgumentError):
        net_average_query(tbl, bad, 1.0)
    with pytest.raises(InvalidArgumentError):
        net_average_query(tbl, 1.0, bad)
    with pytest.raises(InvalidArgumentError):
        net_average_1d(make_indicator_1d(1, 4), bad)


def test_table_invariants():
    f = random_grid(11, 9, 6, (1, 1), "signed")
    tbl = build_net_average_table(f)
    assert np.all(np.diff(tbl.suffix, axis=0) <= 0)
    assert np.all(np.diff(tbl.suffix, axis=1) <= 0)
    assert tbl.suffix[0, 0] == tbl.best.max()


@pytest.mark.parametrize("cells", [(1.0, 1.0), (0.5, 0.25), (2.0, 0.125)])
@pytest.mark.parametrize("seed", range(20))
def test_matches_brute_force(seed, cells):
    rng = np.random.default_rng([seed, 17])
    n1, n2 = (int(x) for x in rng.integers(1, 9, size=2))
    v = rng.integers(-3, 4, size=(n1, n2))
    f = Grid2D((0.0, 0.0), cells, v)
    tbl = build_net_average_table(f)
    pad = 2 * max(n1, n2) + 1
    best = brute_force_best(v, pad)
    for k1 in range(1, 2 * n1 + 2):
        for k2 in range(1, 2 * n2 + 2):
            assert tbl(k1 * cells[0], k2 * cells[1]) == brute_force_query(best, k1, k2)
    # off-node thresholds inside the support snap upward
    for _ in range(20):
        t1 = rng.uniform(0.01, n1) * cells[0]
        t2 = rng.uniform(0.01, n2) * cells[1]
        k1, k2 = int(np.ceil(t1 / cells[0])), int(np.ceil(t2 / cells[1]))
        assert tbl(t1, t2) == brute_force_query(best, k1, k2)


@pytest.mark.parametrize("seed", range(30))
def test_1d_matches_brute_force(seed):
    rng = np.random.default_rng([seed, 5])
    n = int(rng.integers(1, 13))
    v = rng.integers(-3, 4, size=n)
    profile = build_net_average_profile_1d(Grid1D(0.0, 0.5, v))
    for k in range(1, 2 * n + 2):
        assert profile(0.5 * k) == brute_force_1d(v, k, 2 * n + 1)


def test_tail_beyond_support_is_exact_power_law():
    f = random_grid(4, 6, 5, (1, 1), "signed")
    tbl = build_net_average_table(f)
    L1, L2 = f.extents
    corner = tbl(L1, L2) * L1 * L2
    for t1, t2 in [(7.0, 9.0), (30.0, 5.5), (6.5, 100.0)]:
        assert tbl(t1, t2) == pytest.approx(corner / (t1 * t2), rel=1e-14)
    for t2 in (1.0, 2.0, 3.0, 4.0):
        assert tbl(12.0, t2) == pytest.approx(tbl(6.0, t2) / 2, rel=1e-14)


@given(st.one_of(st.just(0.0), st.floats(1e-100, 50), st.floats(-50, -1e-100)), st.integers(0, 10_000))
def test_homogeneity(alpha, seed):
    f = random_grid(seed, 5, 4, (0.5, 0.5), "signed")
    t1, t2 = dyadic_lattice(f)
    base = build_net_average_table(f)(t1, t2)
    scaled = build_net_average_table(f.with_values(alpha * f.values))(t1, t2)
    assert np.allclose(scaled, abs(alpha) * base, rtol=1e-13, atol=0)


@given(st.integers(0, 10_000), st.sampled_from(["uniform", "signed", "block-constant"]))
def test_monotone_in_each_threshold(seed, family):
    f = random_grid(seed, 7, 6, (0.3, 0.7), family)
    t1 = np.geomspace(0.05, 20, 40)[:, None]
    t2 = np.geomspace(0.05, 20, 37)[None, :]
    m = build_net_average_table(f)(t1, t2)
    assert np.all(np.diff(m, axis=0) <= 0)
    assert np.all(np.diff(m, axis=1) <= 0)


@given(st.integers(0, 10_000))
def test_tensor_factorization(seed):
    rng = np.random.default_rng(seed)
    g = Grid1D(0.0, 0.25, rng.normal(size=int(rng.integers(1, 9))))
    h = Grid1D(1.0, 0.5, rng.normal(size=int(rng.integers(1, 9))))
    tbl = build_net_average_table(tensor(g, h))
    t1 = np.geomspace(0.1, 8, 17)
    t2 = np.geomspace(0.1, 12, 19)
    expected = net_average_1d(g, t1)[:, None] * net_average_1d(h, t2)[None, :]
    assert np.allclose(tbl(t1[:, None], t2[None, :]), expected, rtol=1e-12, atol=0)


@given(st.integers(0, 10_000))
def test_refinement_never_decreases(seed):
    f = random_grid(seed, 5, 4, (0.5, 0.5), "signed")
    fine = Grid2D(f.origin, (0.25, 0.25), np.repeat(np.repeat(f.values, 2, 0), 2, 1))
    t1 = np.geomspace(0.1, 10, 23)[:, None]
    t2 = np.geomspace(0.1, 10, 21)[None, :]
    coarse_m = build_net_average_table(f)(t1, t2)
    fine_m = build_net_average_table(fine)(t1, t2)
    assert np.all(fine_m >= coarse_m * (1 - 1e-14))


@given(st.integers(-20, 20), st.integers(-20, 20), st.integers(0, 10_000))
def test_translation_invariance(s1, s2, seed):
    f = random_grid(seed, 6, 5, (0.5, 0.25), "signed")
    g = Grid2D((s1 * 0.5, s2 * 0.25), f.cells, f.values)
    t1, t2 = dyadic_lattice(f)
    assert np.array_equal(build_net_average_table(f)(t1, t2),
                          build_net_average_table(g)(t1, t2))


@pytest.mark.parametrize("workers", [1, 2, 3, 8])
def test_result_does_not_depend_on_worker_count(workers):
    f = random_grid(9, 23, 17, (1, 1), "signed")
    ref = build_net_average_table(f, workers=1)
    got = build_net_average_table(f, workers=workers)
    assert np.array_equal(ref.best, got.best)
    assert np.array_equal(ref.suffix, got.suffix)
    assert np.array_equal(ref.tail.g1_num, got.tail.g1_num)


def test_query_shapes():
    tbl = build_net_average_table(EXAMPLE)
    assert isinstance(tbl(1, 1), float)
    assert tbl(np.ones(3), 1.0).shape == (3,)
    assert tbl(np.ones((2, 1)), np.ones((1, 4))).shape == (2, 4)
