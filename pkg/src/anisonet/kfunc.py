"""Constructive upper bound for the anisotropic K-functional.

For weights ``(t1, t2)`` the block sides are ``tau_i = t_i ** e_i`` with
``e_i = 1 / (1/p0_i - 1/p1_i)``, snapped to the nearest whole number of
cells.  The function is split by :func:`anisonet.decomp.decompose` and

    K(t1, t2) <= |f00| + t1 |f10| + t2 |f01| + t1 t2 |f11|

with each component measured in its own net norm (all fine indices 1).

Once a block side exceeds the support along an axis, the block average in
that direction is a scaled indicator of the whole block, so the components
become tensor products (or differences of them) with a 1-D indicator whose
norm is known in closed form.  The differences are bounded with the
triangle inequality, which keeps the result an upper bound and lets ``tau``
grow without building ever larger tables.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .decomp import Decomposition, Tau, decompose
from .errors import DivergenceError, InvalidArgumentError, UndefinedRatioError
from .grid import Grid1D, Grid2D
from .netavg import build_net_average_table
from .norms import (Exponents1D, Exponents2D, QuadratureSpec, net_norm_1d,
                    norm_from_table, power_mean)


def _pair(v, name):
    try:
        a, b = (float(x) for x in v)
    except (TypeError, ValueError):
        raise InvalidArgumentError(f"{name} must be a pair of numbers") from None
    return (a, b)


@dataclass(frozen=True)
class InterpParams:
    p0: tuple
    p1: tuple
    theta: tuple = (0.5, 0.5)
    q: tuple = (1.0, 1.0)

    def __post_init__(self):
        for name in ("p0", "p1", "theta", "q"):
            object.__setattr__(self, name, _pair(getattr(self, name), name))
        for a, b in zip(self.p0, self.p1):
            if not (1.0 < a < b < math.inf):
                raise InvalidArgumentError("need 1 < p0_i < p1_i < inf on both axes")
        if not all(0.0 < th < 1.0 for th in self.theta):
            raise InvalidArgumentError("theta components must lie strictly between 0 and 1")
        if not all(qq >= 1.0 for qq in self.q):
            raise InvalidArgumentError("q components must be >= 1")

    @property
    def p(self):
        """Exponent pair of the intermediate net space."""
        return tuple(1.0 / ((1.0 - th) / a + th / b)
                     for a, b, th in zip(self.p0, self.p1, self.theta))

    @property
    def tau_exponents(self):
        return tuple(1.0 / (1.0 / a - 1.0 / b) for a, b in zip(self.p0, self.p1))

    def target(self) -> Exponents2D:
        return Exponents2D(self.p, self.q)

    def component_exponents(self):
        """Exponents for (f00, f10, f01, f11), in that order."""
        (a1, a2), (b1, b2) = self.p0, self.p1
        return (Exponents2D((a1, a2)), Exponents2D((b1, a2)),
                Exponents2D((a1, b2)), Exponents2D((b1, b2)))


def substitute_tau(t1, t2, params: InterpParams):
    """Block sides paired with the weights ``(t1, t2)``, before snapping."""
    for t in (t1, t2):
        if not (math.isfinite(t) and t > 0):
            raise InvalidArgumentError(f"weights must be finite and positive, got {t!r}")
    e1, e2 = params.tau_exponents
    return (t1 ** e1, t2 ** e2)


def snap_block(tau, h):
    """Nearest whole number of cells (ties toward fewer), at least one."""
    return max(1, math.ceil(tau / h - 0.5))


def indicator_norm(p, length):
    """Net norm (fine index 1) of the indicator of an interval of ``length``."""
    return length ** (1.0 / p) * p * p / (p - 1.0)


def _averaged_indicator_norm(p, length):
    # indicator of the block divided by its length
    return indicator_norm(p, length) / length


@dataclass(frozen=True)
class ComponentNorms:
    n00: float
    n10: float
    n01: float
    n11: float

    def as_tuple(self):
        return (self.n00, self.n10, self.n01, self.n11)

    def weighted(self, t1, t2):
        return math.fsum((self.n00, t1 * self.n10, t2 * self.n01, t1 * t2 * self.n11))


def _block_average(values, c, axis):
    """Mean over consecutive runs of ``c`` cells along ``axis`` (zero padded)."""
    v = np.moveaxis(np.asarray(values, dtype=np.float64), axis, 0)
    n = v.shape[0]
    m = -(-n // c) * c
    if m != n:
        v = np.concatenate([v, np.zeros((m - n, *v.shape[1:]))])
    means = v.reshape(m // c, c, *v.shape[1:]).mean(axis=1)
    return np.moveaxis(np.repeat(means, c, axis=0), 0, axis)


class KEvaluator:
    """Evaluates the bound for one function, caching net-average tables.

    Many lattice points share components (every point with one-cell blocks
    yields the same split, and beyond the support only the other axis
    matters), so tables are keyed by grid content.
    """

    def __init__(self, f: Grid2D, params: InterpParams, spec=QuadratureSpec(), workers=None):
        self.f, self.params, self.spec, self.workers = f, params, spec, workers
        self._tables = {}
        self._norm_cache = {}
        self._norms = {}
        h1, h2 = f.cells
        self.v1 = Grid1D(f.origin[1], h2, f.values.sum(axis=0) * h1)  # integral over x1
        self.v2 = Grid1D(f.origin[0], h1, f.values.sum(axis=1) * h2)  # integral over x2
        self.total = f.integral()

    def norm2d(self, g: Grid2D, e: Exponents2D):
        if g.is_zero():
            return 0.0
        key = g.checksum()
        if (key, e) not in self._norm_cache:
            tbl = self._tables.get(key)
            if tbl is None:
                tbl = self._tables[key] = build_net_average_table(g, self.workers)
            self._norm_cache[key, e] = norm_from_table(tbl, e, self.spec)
        return self._norm_cache[key, e]

    def norm1d(self, values, cell, origin, p):
        if not np.any(values):
            return 0.0
        key = (np.asarray(values).tobytes(), cell, origin, p)
        if key not in self._norm_cache:
            g = Grid1D(origin, cell, values)
            self._norm_cache[key] = net_norm_1d(g, Exponents1D(p, 1.0), self.spec)
        return self._norm_cache[key]

    def component_norms(self, c1, c2) -> ComponentNorms:
        key = (c1, c2)
        if key not in self._norms:
            self._norms[key] = self._compute(c1, c2)
        return self._norms[key]

    def _compute(self, c1, c2):
        f, (n1, n2) = self.f, self.f.shape
        (h1, h2), (o1, o2) = f.cells, f.origin
        (a1, a2), (b1, b2) = self.params.p0, self.params.p1
        e00, e10, e01, e11 = self.params.component_exponents()
        beyond1, beyond2 = c1 > n1, c2 > n2
        if not (beyond1 or beyond2):
            d = decompose(f, Tau(c1, c2))
            return ComponentNorms(self.norm2d(d.f00, e00), self.norm2d(d.f10, e10),
                                  self.norm2d(d.f01, e01), self.norm2d(d.f11, e11))
        T1, T2 = c1 * h1, c2 * h2
        if beyond1 and beyond2:
            U = abs(self.total)
            nv1 = self.norm1d(self.v1.values, h2, o2, a2)
            nv2 = self.norm1d(self.v2.values, h1, o1, a1)
            return ComponentNorms(
                self.norm2d(f, e00)
                + _averaged_indicator_norm(a1, T1) * nv1
                + _averaged_indicator_norm(a2, T2) * nv2
                + U * _averaged_indicator_norm(a1, T1) * _averaged_indicator_norm(a2, T2),
                _averaged_indicator_norm(b1, T1) * (nv1 + U * _averaged_indicator_norm(a2, T2)),
                _averaged_indicator_norm(b2, T2) * (nv2 + U * _averaged_indicator_norm(a1, T1)),
                U * _averaged_indicator_norm(b1, T1) * _averaged_indicator_norm(b2, T2),
            )
        if beyond1:
            avg = _block_average(f.values, c2, 1)[:, :n2]
            w_avg = _block_average(self.v1.values, c2, 0)[:n2]
            w_rest = self.v1.values - w_avg
            nw_avg_hi = self.norm1d(w_avg, h2, o2, b2)
            nw_rest_lo = self.norm1d(w_rest, h2, o2, a2)
            return ComponentNorms(
                self.norm2d(f.with_values(f.values - avg), e00)
                + _averaged_indicator_norm(a1, T1) * nw_rest_lo,
                _averaged_indicator_norm(b1, T1) * nw_rest_lo,
                self.norm2d(f.with_values(avg), e01) + _averaged_indicator_norm(a1, T1) * nw_avg_hi,
                _averaged_indicator_norm(b1, T1) * nw_avg_hi,
            )
        avg = _block_average(f.values, c1, 0)[:n1, :]
        w_avg = _block_average(self.v2.values, c1, 0)[:n1]
        w_rest = self.v2.values - w_avg
        nw_avg_hi = self.norm1d(w_avg, h1, o1, b1)
        nw_rest_lo = self.norm1d(w_rest, h1, o1, a1)
        return ComponentNorms(
            self.norm2d(f.with_values(f.values - avg), e00)
            + _averaged_indicator_norm(a2, T2) * nw_rest_lo,
            self.norm2d(f.with_values(avg), e10) + _averaged_indicator_norm(a2, T2) * nw_avg_hi,
            _averaged_indicator_norm(b2, T2) * nw_rest_lo,
            _averaged_indicator_norm(b2, T2) * nw_avg_hi,
        )

    def blocks(self, t1, t2):
        tau1, tau2 = substitute_tau(t1, t2, self.params)
        return snap_block(tau1, self.f.cells[0]), snap_block(tau2, self.f.cells[1])

    def k_upper(self, t1, t2):
        c1, c2 = self.blocks(t1, t2)
        return self.component_norms(c1, c2).weighted(t1, t2)


def component_norms(d: Decomposition, params: InterpParams, spec=QuadratureSpec(),
                    workers=None) -> ComponentNorms:
    """Norms of (f00, f10, f01, f11) in their paired net spaces."""
    exps = params.component_exponents()
    comps = (d.f00, d.f10, d.f01, d.f11)
    out = []
    for g, e in zip(comps, exps):
        if g.is_zero():
            out.append(0.0)
        else:
            out.append(norm_from_table(build_net_average_table(g, workers), e, spec))
    return ComponentNorms(*out)


def k_upper(f: Grid2D, t1, t2, params: InterpParams, spec=QuadratureSpec(), workers=None):
    return KEvaluator(f, params, spec, workers).k_upper(float(t1), float(t2))


# ------------------------------------------------------------------ K curves

@dataclass(frozen=True, eq=False)
class KCurve:
    """``values[j, i]`` is the bound at ``(t1[i], t2[j])``.

    ``raw`` holds the bound from the decomposition paired with each weight
    alone; ``values`` is the smallest weighted sum over every decomposition
    on the lattice, which is still an upper bound and is monotone in both
    weights.  ``blocks1`` / ``blocks2`` record the paired block sides in
    cells; they are empty for curves built from a formula.
    """

    t1: np.ndarray
    t2: np.ndarray
    values: np.ndarray
    params: InterpParams
    blocks1: tuple = ()
    blocks2: tuple = ()
    raw: np.ndarray = None

    def rows(self):
        """(t1, t2, block1, block2, K, K_raw) tuples in lattice order."""
        b1 = self.blocks1 or (None,) * len(self.t1)
        b2 = self.blocks2 or (None,) * len(self.t2)
        raw = self.values if self.raw is None else self.raw
        for j, t2 in enumerate(self.t2):
            for i, t1 in enumerate(self.t1):
                yield (float(t1), float(t2), b1[i], b2[j],
                       float(self.values[j, i]), float(raw[j, i]))

    def with_raw_values(self):
        """The curve made of the per-weight bounds alone."""
        return KCurve(self.t1, self.t2, self.raw, self.params, self.blocks1, self.blocks2,
                      self.raw)


def interpolation_functional(curve: KCurve, spec=QuadratureSpec()) -> float:
    """Weighted mixed power mean of a K curve.

    Outside the sampled range the curve is continued linearly toward zero
    weight and flat toward infinite weight, matching the small- and
    large-weight behaviour of the bound.
    """
    del spec  # the lattice is fixed by the curve
    (th1, th2), (q1, q2) = curve.params.theta, curve.params.q
    vals = np.asarray(curve.values, dtype=np.float64)
    if not np.any(vals):
        return 0.0
    inner = np.array([
        power_mean(curve.t1, row, -th1, q1, head_slope=1.0, tail_slope=0.0).value
        for row in vals
    ])
    return power_mean(curve.t2, inner, -th2, q2, head_slope=1.0, tail_slope=0.0).value


def _exponent_range(h, extent):
    # block sides from a quarter cell to sixteen support extents
    return -2, math.ceil(math.log2(16.0 * extent / h))


def k_curve(f: Grid2D, params: InterpParams, spec=QuadratureSpec(), workers=None,
            span=None, evaluator=None) -> KCurve:
    """Sample the bound where block sides run through ``cell * 2**j``.

    ``span`` is ``((j1_lo, j1_hi), (j2_lo, j2_hi))``; by default the range
    reaches from a quarter cell to sixteen times the support extent.
    """
    ev = evaluator or KEvaluator(f, params, spec, workers)
    (h1, h2), (L1, L2) = f.cells, f.extents
    if span is None:
        span = (_exponent_range(h1, L1), _exponent_range(h2, L2))
    e1, e2 = params.tau_exponents
    axes = []
    for (lo, hi), h, e in zip(span, (h1, h2), (e1, e2)):
        j = np.arange(lo, hi + 1)
        tau = h * np.exp2(j.astype(np.float64))
        axes.append((tau ** (1.0 / e), tuple(snap_block(x, h) for x in tau)))
    (t1, b1), (t2, b2) = axes
    norms = np.empty((4, len(t2), len(t1)))
    for j, c2 in enumerate(b2):
        for i, c1 in enumerate(b1):
            norms[:, j, i] = ev.component_norms(c1, c2).as_tuple()
    n00, n10, n01, n11 = norms
    w1, w2 = t1[None, :], t2[:, None]
    raw = n00 + w1 * n10 + w2 * n01 + (w1 * w2) * n11
    # every sampled split at every weight: axes (t2, t1, split2, split1)
    W1, W2 = t1[None, :, None, None], t2[:, None, None, None]
    family = n00[None, None] + W1 * n10[None, None] + W2 * n01[None, None] \
        + (W1 * W2) * n11[None, None]
    vals = np.minimum(family.min(axis=(2, 3)), raw)
    return KCurve(t1, t2, vals, params, b1, b2, raw)


@dataclass(frozen=True, eq=False)
class InterpolationResult:
    value: float
    curve: KCurve
    history: tuple


def stable_interpolation_functional(f: Grid2D, params: InterpParams, spec=QuadratureSpec(),
                                    workers=None, rtol=0.01, widen=4, max_rounds=8):
    """F(K) on a lattice widened by ``widen`` octaves per side until two
    successive values agree within ``rtol``."""
    ev = KEvaluator(f, params, spec, workers)
    (h1, h2), (L1, L2) = f.cells, f.extents
    span = [list(_exponent_range(h1, L1)), list(_exponent_range(h2, L2))]
    history = []
    for _ in range(max_rounds):
        curve = k_curve(f, params, spec, span=span, evaluator=ev)
        history.append(interpolation_functional(curve, spec))
        if len(history) >= 2:
            prev, cur = history[-2], history[-1]
            if math.isfinite(cur) and abs(cur - prev) <= rtol * abs(cur):
                return InterpolationResult(cur, curve, tuple(history))
        for s in span:
            s[0] -= widen
            s[1] += widen
    raise DivergenceError(
        f"interpolation functional did not settle within {rtol:.0%} "
        f"after {max_rounds} lattice widenings", history)


@dataclass(frozen=True, eq=False)
class EmbeddingReport:
    functional: float
    functional_raw: float
    norm: float
    ratio: float
    curve: KCurve


def embedding_report(f: Grid2D, params: InterpParams, spec=QuadratureSpec(), workers=None):
    """F(K), F of the per-weight bound, the intermediate norm and their ratio."""
    if f.is_zero():
        raise UndefinedRatioError("embedding ratio is undefined for the zero function")
    res = stable_interpolation_functional(f, params, spec, workers)
    raw = interpolation_functional(res.curve.with_raw_values(), spec)
    norm = norm_from_table(build_net_average_table(f, workers), params.target(), spec)
    return EmbeddingReport(res.value, raw, norm, res.value / norm, res.curve)


def embedding_ratio(f: Grid2D, params: InterpParams, spec=QuadratureSpec(), workers=None):
    """F(K) divided by the norm of ``f`` in the intermediate net space."""
    return embedding_report(f, params, spec, workers).ratio
