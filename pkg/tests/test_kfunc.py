import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from anisonet.decomp import Tau, decompose
from anisonet.errors import InvalidArgumentError, UndefinedRatioError
from anisonet.grid import Grid2D, make_indicator_1d, make_indicator_2d, random_grid
from anisonet.kfunc import (ComponentNorms, InterpParams, KCurve, KEvaluator, component_norms,
                            embedding_ratio, embedding_report, indicator_norm,
                            interpolation_functional, k_curve, k_upper, snap_block,
                            stable_interpolation_functional, substitute_tau)
from anisonet.norms import Exponents1D, QuadratureSpec, net_norm_1d

INF = math.inf
PARAMS = InterpParams((2, 2), (4, 4))
ADDITIVE = Grid2D((0.0, 0.0), (1.0, 1.0), [[1, 3], [5, 7]])


def test_params_derived_quantities():
    assert PARAMS.p == pytest.approx((8 / 3, 8 / 3))
    assert PARAMS.tau_exponents == (4.0, 4.0)
    mixed = InterpParams((1.5, 2), (3, 6), (0.25, 0.75), (1, INF))
    e00, e10, e01, e11 = mixed.component_exponents()
    assert e00.p == (1.5, 2) and e10.p == (3, 2) and e01.p == (1.5, 6) and e11.p == (3, 6)
    assert mixed.target().q == (1, INF)


@pytest.mark.parametrize("kw", [
    dict(p0=(2, 2), p1=(2, 4)), dict(p0=(1, 2), p1=(4, 4)), dict(p0=(2, 2), p1=(4, INF)),
    dict(p0=(2, 2), p1=(4, 4), theta=(0, 0.5)), dict(p0=(2, 2), p1=(4, 4), theta=(0.5, 1)),
    dict(p0=(2, 2), p1=(4, 4), q=(0.5, 1)), dict(p0=(2,), p1=(4, 4)),
])
def test_params_validation(kw):
    with pytest.raises(InvalidArgumentError):
        InterpParams(**kw)


def test_substitution_example():
    assert substitute_tau(0.5, 0.5, PARAMS) == (0.0625, 0.0625)
    for bad in (0.0, -1.0, INF, math.nan):
        with pytest.raises(InvalidArgumentError):
            substitute_tau(bad, 1.0, PARAMS)


def test_snapping_rule():
    assert snap_block(0.0625, 0.25) == 1
    assert snap_block(0.375, 0.25) == 1  # tie goes to fewer cells
    assert snap_block(0.376, 0.25) == 2
    assert snap_block(1000.0, 0.25) == 4000  # not capped at the support


def test_indicator_norm_matches_quadrature():
    g = make_indicator_1d(3.0, 256)
    got = net_norm_1d(g, Exponents1D(2.5, 1), QuadratureSpec(16))
    assert got == pytest.approx(indicator_norm(2.5, 3.0), rel=0.01)


def test_zero_function():
    z = Grid2D((0, 0), (0.5, 0.5), np.zeros((4, 4)))
    for t in (0.1, 1.0, 7.0):
        assert k_upper(z, t, t, PARAMS) == 0
    d = decompose(z, Tau(2, 2))
    assert component_norms(d, PARAMS).as_tuple() == (0, 0, 0, 0)
    assert stable_interpolation_functional(z, PARAMS).value == 0
    with pytest.raises(UndefinedRatioError):
        embedding_ratio(z, PARAMS)


def test_component_norms_examples():
    n = component_norms(decompose(ADDITIVE, Tau(2, 2)), PARAMS)
    assert n.n00 == 0 and min(n.n10, n.n01, n.n11) > 0
    block = Grid2D((0, 0), (1, 1), np.full((3, 2), -1.5))
    m = component_norms(decompose(block, Tau(3, 2)), PARAMS)
    assert m.n00 == m.n10 == m.n01 == 0 and m.n11 > 0


def test_evaluator_agrees_with_direct_component_norms():
    f = random_grid(3, 8, 6, (0.25, 0.5), "signed")
    ev = KEvaluator(f, PARAMS)
    for c1, c2 in [(1, 1), (2, 3), (8, 6), (3, 4)]:
        direct = component_norms(decompose(f, Tau(c1, c2)), PARAMS)
        assert ev.component_norms(c1, c2).as_tuple() == pytest.approx(direct.as_tuple(), rel=1e-12)


@pytest.mark.parametrize("blocks", [(12, 3), (2, 10), (11, 9)])
def test_closed_form_beyond_support_bounds_the_padded_split(blocks):
    # decomposing an explicitly zero-padded grid gives the exact component norms
    f = random_grid(7, 6, 5, (0.5, 0.5), "signed")
    c1, c2 = blocks
    exact = component_norms(decompose(f.padded(max(6, c1), max(5, c2)), Tau(c1, c2)),
                            PARAMS, QuadratureSpec(16))
    bound = KEvaluator(f, PARAMS, QuadratureSpec(16)).component_norms(c1, c2)
    for b, e in zip(bound.as_tuple(), exact.as_tuple()):
        assert b >= e * (1 - 0.02)
    # the pure tensor component is computed exactly
    assert bound.n11 == pytest.approx(exact.n11, rel=0.02)


@settings(max_examples=25)
@given(st.integers(0, 10_000), st.floats(0.05, 20), st.floats(0.05, 20))
def test_k_upper_homogeneity(seed, t1, t2):
    f = random_grid(seed, 6, 6, (1 / 6, 1 / 6), "signed")
    base = k_upper(f, t1, t2, PARAMS)
    assert k_upper(f.with_values(2 * f.values), t1, t2, PARAMS) == 2 * base
    assert k_upper(f.with_values(-0.3 * f.values), t1, t2, PARAMS) == pytest.approx(0.3 * base,
                                                                                      rel=1e-12)


@pytest.mark.parametrize("seed", range(4))
def test_curve_invariants(seed):
    f = random_grid(seed, 8, 8, (1 / 8, 1 / 8), ["uniform", "signed", "additive",
                                                  "block-constant"][seed])
    curve = k_curve(f, PARAMS)
    assert np.all(curve.values >= 0)
    assert np.all(np.diff(curve.values, axis=0) >= 0)
    assert np.all(np.diff(curve.values, axis=1) >= 0)
    assert np.all(curve.values <= curve.raw)
    ev = KEvaluator(f, PARAMS)
    for t1, t2, b1, b2, k, raw in curve.rows():
        n = ev.component_norms(b1, b2)
        assert raw == pytest.approx(ev.k_upper(t1, t2), rel=1e-12)
        assert raw <= (1 + t1 + t2 + t1 * t2) * max(n.as_tuple()) * (1 + 1e-12)
    # the lattice runs from a quarter cell to beyond sixteen extents
    assert curve.blocks1[0] == 1 and curve.blocks1[-1] * f.cells[0] >= 16 * f.extents[0]


def _formula_curve(fn, params, lo=-30, hi=30, ppo=32):
    t = 2.0 ** (np.arange(lo * ppo, hi * ppo + 1) / ppo)
    return KCurve(t, t, fn(t[None, :], t[:, None]), params)


def test_functional_of_bilinear_min():
    sup = InterpParams((2, 2), (4, 4), (0.5, 0.5), (INF, INF))
    k = lambda a, b: np.minimum(1, a) * np.minimum(1, b)
    assert interpolation_functional(_formula_curve(k, sup)) == pytest.approx(1.0, rel=1e-12)
    # with fine index 1 each axis contributes 2 + 2
    assert interpolation_functional(_formula_curve(k, PARAMS)) == pytest.approx(16.0, rel=1e-3)
    zero = _formula_curve(lambda a, b: 0 * a * b, PARAMS)
    assert interpolation_functional(zero) == 0


@given(st.floats(1e-3, 1e3))
def test_functional_homogeneity(alpha):
    k = lambda a, b: np.minimum(1, a) * np.minimum(a, b) ** 0.3
    base = interpolation_functional(_formula_curve(k, PARAMS, ppo=4))
    scaled = interpolation_functional(_formula_curve(lambda a, b: alpha * k(a, b), PARAMS, ppo=4))
    assert scaled == pytest.approx(alpha * base, rel=1e-12)


def test_embedding_ratio_is_scale_free():
    f = random_grid(2, 8, 8, (1 / 8, 1 / 8), "signed")
    r = embedding_report(f, PARAMS)
    assert math.isfinite(r.functional) and r.functional > 0
    assert r.functional <= r.functional_raw * (1 + 1e-12)
    assert r.ratio == pytest.approx(r.functional / r.norm, rel=1e-15)
    assert embedding_ratio(f.with_values(4 * f.values), PARAMS) == r.ratio
    assert embedding_ratio(f.with_values(-0.7 * f.values), PARAMS) == pytest.approx(r.ratio,
                                                                                     rel=1e-12)


def test_indicator_ratio_is_stable_under_refinement():
    r16 = embedding_ratio(make_indicator_2d(1, 1, 16, 16), PARAMS)
    r32 = embedding_ratio(make_indicator_2d(1, 1, 32, 32), PARAMS)
    assert 0 < r16 < INF
    assert abs(r32 / r16 - 1) <= 0.25


def test_widening_history_settles():
    f = random_grid(4, 8, 8, (1 / 8, 1 / 8), "uniform")
    res = stable_interpolation_functional(f, PARAMS)
    assert len(res.history) >= 2
    assert abs(res.history[-1] - res.history[-2]) <= 0.01 * res.value
    assert res.value == res.history[-1]


def test_component_norm_weights():
    n = ComponentNorms(1.0, 2.0, 3.0, 4.0)
    assert n.weighted(0.5, 2.0) == 1 + 1 + 6 + 4
