"""Net averages over node-aligned segments and rectangles.

The net is the family of all segments (1-D) or axis-parallel rectangles
(2-D) whose endpoints lie on grid nodes, anywhere on the line or plane.
For a threshold ``t`` the net average is the largest ``|mean of f over Q|``
among net members whose side lengths are at least ``t``.

Below the support extent a threshold is snapped up to the next multiple of
the cell size and read from a suffix-maximum table.  Beyond the extent every
admissible window meets the support in a prefix, a suffix or the whole
axis, so the value decays exactly like ``1/t`` and is served by
:class:`TailModel`.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from . import _kernels
from ._workers import resolve_workers
from .errors import InvalidArgumentError
from .grid import Grid1D, Grid2D, build_sat, prefix_integrals_1d

# thresholds within this relative distance of a node multiple snap onto it
_SNAP_RTOL = 1e-9


def snap_cells(t, h):
    """Number of cells a threshold ``t`` occupies once snapped upward (>= 1)."""
    k = np.ceil(np.asarray(t, dtype=np.float64) / h - _SNAP_RTOL).astype(np.int64)
    return np.maximum(k, 1)


def _thresholds(*ts):
    arrs = np.broadcast_arrays(*(np.asarray(t, dtype=np.float64) for t in ts))
    for a in arrs:
        if not np.all(np.isfinite(a) & (a > 0)):
            raise InvalidArgumentError("thresholds must be finite and positive")
    return arrs


def _exclusive_cummax(a, axis):
    out = np.zeros_like(a)
    acc = np.maximum.accumulate(a, axis=axis)
    if axis == 0:
        out[1:] = acc[:-1]
    else:
        out[:, 1:] = acc[:, :-1]
    return out


def _reverse_cummax(a, axis):
    return np.flip(np.maximum.accumulate(np.flip(a, axis), axis=axis), axis)


# ----------------------------------------------------------------------- 1-D

@dataclass(frozen=True, eq=False)
class NetAverageProfile1D:
    """Net average of a 1-D grid for every snapped threshold."""

    best: np.ndarray
    suffix: np.ndarray
    b_corner: float
    cell: float

    @property
    def n(self):
        return self.best.shape[0]

    def __call__(self, t):
        (t,) = _thresholds(t)
        t1 = np.atleast_1d(t)
        k = snap_cells(t1, self.cell)
        inside = k <= self.n
        out = np.empty(t1.shape)
        out[inside] = self.suffix[k[inside] - 1]
        out[~inside] = self.b_corner / t1[~inside]
        return float(out[0]) if t.ndim == 0 else out.reshape(t.shape)


def build_net_average_profile_1d(g: Grid1D) -> NetAverageProfile1D:
    # window sums are kept in units of cell values, so means are sum / count
    n, h = g.n, g.cell
    P = prefix_integrals_1d(g.with_cell(1.0))
    inside = np.array([np.max(np.abs(P[w:] - P[:-w])) for w in range(1, n + 1)])
    lengths = np.arange(1, n + 1)
    anchored = np.maximum(np.abs(P[lengths]), np.abs(P[n] - P[n - lengths]))
    num = np.maximum(inside, _exclusive_cummax(anchored, 0))
    best = num / lengths
    return NetAverageProfile1D(best, _reverse_cummax(best, 0), float(anchored.max()) * h, h)


def net_average_1d(g: Grid1D, t):
    """Net average of ``g`` at threshold(s) ``t`` (scalar or array)."""
    return build_net_average_profile_1d(g)(t)


# ----------------------------------------------------------------------- 2-D

@dataclass(frozen=True, eq=False)
class TailModel:
    """Closed-form net average when a threshold exceeds the support extent.

    ``g1_num[k - 1] / (g1_len[k - 1] * t1)`` is the value for ``t1 > L1`` and
    ``t2`` snapped to ``k`` cells (``g1_num`` is integrated along x1,
    ``g1_len`` counts x2 cells); ``g2_*`` is the mirror image and
    ``b_corner / (t1 * t2)`` covers both thresholds beyond the support.
    """

    b_corner: float
    g1_num: np.ndarray
    g1_len: np.ndarray
    g2_num: np.ndarray
    g2_len: np.ndarray


@dataclass(frozen=True, eq=False)
class NetAverageTable:
    best: np.ndarray
    suffix: np.ndarray
    tail: TailModel
    origin: tuple
    cells: tuple
    shape: tuple

    @property
    def extents(self):
        return (self.shape[0] * self.cells[0], self.shape[1] * self.cells[1])

    def __call__(self, t1, t2):
        return net_average_query(self, t1, t2)


def _tail_side(e_anchor_inside, e12_axis, h_other):
    # candidates for a window of k cells on the free axis while the other
    # axis is anchored: an inside window of length k, or a shorter anchored
    # range on the free axis padded out to k
    inside = e_anchor_inside.max(axis=0)
    anchored = np.maximum.accumulate(e12_axis.max(axis=0))
    num = inside.copy()
    num[1:] = np.maximum(num[1:], anchored[:-1])
    length = np.arange(1, num.shape[0] + 1, dtype=np.float64)
    idx = _kernels.suffix_argmax_ratio(num, length)
    # numerator as an integral along the anchored axis, length in cells
    return num[idx] * h_other, length[idx]


def build_net_average_table(f: Grid2D, workers=None) -> NetAverageTable:
    """Enumerate every node-aligned rectangle of ``f`` through its SAT.

    The O(n1^2 n2^2) inside-support enumeration is split across ``workers``
    threads by x1-width; the reduction is a maximum, so the table does not
    depend on the worker count.
    """
    n1, n2 = f.shape
    h1, h2 = f.cells
    # sums of cell values (unit cells): means become sum / cell count
    S = np.ascontiguousarray(build_sat(f.with_cells(1.0, 1.0)).sums)
    workers = min(resolve_workers(workers), n1)

    inside = np.zeros((n1, n2))
    widths = np.arange(1, n1 + 1, dtype=np.int64)
    if workers == 1:
        _kernels.inside_best(S, widths, inside)
    else:
        # interleaved strata keep per-thread work roughly equal
        chunks = [widths[r::workers] for r in range(workers)]
        with ThreadPoolExecutor(workers) as pool:
            list(pool.map(lambda ws: _kernels.inside_best(S, ws, inside), chunks))

    e1, e2, e12 = _kernels.anchored_tables(S)
    num = np.maximum.reduce([
        inside,
        _exclusive_cummax(e1, 0),
        _exclusive_cummax(e2, 1),
        _exclusive_cummax(_exclusive_cummax(np.maximum.accumulate(
            np.maximum.accumulate(e12, 0), 1), 0), 1),
    ])
    den = np.arange(1, n1 + 1, dtype=np.float64)[:, None] * np.arange(1, n2 + 1)[None, :]
    best = num / den
    suffix = _reverse_cummax(_reverse_cummax(best, 0), 1)

    g1_num, g1_len = _tail_side(e1, e12, h1)
    g2_num, g2_len = _tail_side(e2.T, e12.T, h2)
    tail = TailModel(float(e12.max()) * (h1 * h2), g1_num, g1_len, g2_num, g2_len)
    for a in (best, suffix, g1_num, g1_len, g2_num, g2_len):
        a.setflags(write=False)
    return NetAverageTable(best, suffix, tail, f.origin, f.cells, f.shape)


def net_average_query(tbl: NetAverageTable, t1, t2):
    """Net average at thresholds ``(t1, t2)``; arrays broadcast."""
    t1, t2 = _thresholds(t1, t2)
    shape = t1.shape
    a1, a2 = np.atleast_1d(t1).ravel(), np.atleast_1d(t2).ravel()
    (n1, n2), (h1, h2), tail = tbl.shape, tbl.cells, tbl.tail
    k1, k2 = snap_cells(a1, h1), snap_cells(a2, h2)
    in1, in2 = k1 <= n1, k2 <= n2
    out = np.empty(a1.shape)

    m = in1 & in2
    out[m] = tbl.suffix[k1[m] - 1, k2[m] - 1]
    m = ~in1 & in2
    out[m] = tail.g1_num[k2[m] - 1] / (tail.g1_len[k2[m] - 1] * a1[m])
    m = in1 & ~in2
    out[m] = tail.g2_num[k1[m] - 1] / (tail.g2_len[k1[m] - 1] * a2[m])
    m = ~in1 & ~in2
    out[m] = tail.b_corner / (a1[m] * a2[m])
    return float(out[0]) if len(shape) == 0 else out.reshape(shape)


def morrey_average(f: Grid2D, t1, t2, workers=None):
    """Net average of ``|f|``: the same sup with the modulus inside the integral."""
    tbl = build_net_average_table(f.with_values(np.abs(f.values)), workers)
    return net_average_query(tbl, t1, t2)
