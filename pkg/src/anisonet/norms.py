"""Net-space quasi-norms by log-spaced quadrature.

The norm integrand ``(t**(1/p) * avg(t))**q dt/t`` is integrated with the
trapezoid rule in ``log t`` between one cell and ``t_max_factor`` times the
support extent.  Below one cell the net average is constant and beyond the
extent it decays like ``1/t``, so both ends are added in closed form.  The
2-D norm nests the same rule: inner integral over ``t1``, outer over ``t2``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import InvalidArgumentError, UnsupportedExponentError
from .grid import Grid1D, Grid2D
from .netavg import NetAverageTable, build_net_average_profile_1d, build_net_average_table

INF = math.inf


def _check_p(p):
    p = float(p)
    if not (1.0 < p < INF):
        raise UnsupportedExponentError(f"p must satisfy 1 < p < inf, got {p!r}")
    return p


def _check_q(q):
    q = float(q)
    if math.isnan(q) or q < 1.0:
        raise UnsupportedExponentError(f"q must satisfy 1 <= q <= inf, got {q!r}")
    return q


@dataclass(frozen=True)
class Exponents1D:
    p: float
    q: float = 1.0

    def __post_init__(self):
        object.__setattr__(self, "p", _check_p(self.p))
        object.__setattr__(self, "q", _check_q(self.q))


@dataclass(frozen=True)
class Exponents2D:
    p: tuple
    q: tuple = (1.0, 1.0)

    def __post_init__(self):
        if len(self.p) != 2 or len(self.q) != 2:
            raise InvalidArgumentError("anisotropic exponents need two components each")
        object.__setattr__(self, "p", tuple(_check_p(v) for v in self.p))
        object.__setattr__(self, "q", tuple(_check_q(v) for v in self.q))

    def axis(self, i):
        return Exponents1D(self.p[i], self.q[i])


@dataclass(frozen=True)
class QuadratureSpec:
    """Log-quadrature controls.

    ``t_min_cells`` (in cells, at most 1) is the first node; ``t_max_factor``
    times the support extent is the last one.
    """

    points_per_octave: int = 8
    t_min_cells: float = 1.0
    t_max_factor: float = 4.0

    def __post_init__(self):
        ppo = self.points_per_octave
        if isinstance(ppo, bool) or int(ppo) != ppo or ppo < 2:
            raise InvalidArgumentError("points_per_octave must be an integer >= 2")
        object.__setattr__(self, "points_per_octave", int(ppo))
        if not (0.0 < self.t_min_cells <= 1.0):
            raise InvalidArgumentError("t_min_cells must lie in (0, 1]")
        if not (1.0 <= self.t_max_factor < INF):
            raise InvalidArgumentError("t_max_factor must be finite and >= 1")

    def nodes(self, cell, extent):
        return log_nodes(self.t_min_cells * cell, self.t_max_factor * extent,
                         self.points_per_octave)


def log_nodes(t_lo, t_hi, points_per_octave):
    """Geometric nodes from ``t_lo`` to ``t_hi`` (both included), at least
    ``points_per_octave`` per factor of two."""
    if not (0 < t_lo <= t_hi):
        raise InvalidArgumentError("need 0 < t_lo <= t_hi")
    m = max(1, math.ceil(math.log2(t_hi / t_lo) * points_per_octave - 1e-9))
    nodes = t_lo * (t_hi / t_lo) ** (np.arange(m + 1) / m)
    nodes[0], nodes[-1] = t_lo, t_hi
    return nodes


@dataclass(frozen=True)
class PowerMean:
    """``value`` plus the pieces it was assembled from.

    For finite ``q`` the pieces are contributions to the integral before the
    final ``1/q`` power; for ``q = inf`` they are the suprema of each piece.
    """

    value: float
    head: float
    body: float
    tail: float


def power_mean(nodes, values, weight, q, head_slope=0.0, tail_slope=-1.0):
    """``(int_0^inf (t**weight * v(t))**q dt/t)**(1/q)`` for sampled ``v``.

    ``v`` is known at ``nodes`` and is extended as ``v0 * (t/t0)**head_slope``
    below the first node and ``vN * (t/tN)**tail_slope`` above the last.
    """
    nodes = np.asarray(nodes, dtype=np.float64)
    values = np.asarray(values, dtype=np.float64)
    lo, hi = weight + head_slope, weight + tail_slope
    if not (lo > 0 and hi < 0):
        raise InvalidArgumentError(
            f"integrand does not decay at both ends (exponents {lo:g}, {hi:g})")
    psi = nodes ** weight * values
    if q == INF:
        head, tail = float(psi[0]), float(psi[-1])
        body = float(psi.max())
        return PowerMean(max(head, body, tail), head, body, tail)
    phi = psi ** q
    head = float(phi[0] / (q * lo))
    tail = float(phi[-1] / (-q * hi))
    du = np.diff(np.log(nodes))
    body = math.fsum(0.5 * (phi[:-1] + phi[1:]) * du)
    total = math.fsum((head, body, tail))
    return PowerMean(total ** (1.0 / q), head, body, tail)


# ----------------------------------------------------------------------- 1-D

def norm_breakdown_1d(g: Grid1D, e: Exponents1D, spec=QuadratureSpec()) -> PowerMean:
    profile = build_net_average_profile_1d(g)
    nodes = spec.nodes(g.cell, g.length)
    return power_mean(nodes, profile(nodes), 1.0 / e.p, e.q)


def net_norm_1d(g: Grid1D, e: Exponents1D, spec=QuadratureSpec()) -> float:
    return norm_breakdown_1d(g, e, spec).value


# ----------------------------------------------------------------------- 2-D

def norm_breakdown(tbl: NetAverageTable, e: Exponents2D, spec=QuadratureSpec()) -> PowerMean:
    """Outer-integral pieces of the anisotropic norm read from a built table."""
    (h1, h2), (L1, L2) = tbl.cells, tbl.extents
    t1 = spec.nodes(h1, L1)
    t2 = spec.nodes(h2, L2)
    avg = tbl(t1[None, :], t2[:, None])  # rows follow t2
    inner = np.array([power_mean(t1, row, 1.0 / e.p[0], e.q[0]).value for row in avg])
    return power_mean(t2, inner, 1.0 / e.p[1], e.q[1])


def norm_from_table(tbl: NetAverageTable, e: Exponents2D, spec=QuadratureSpec()) -> float:
    return norm_breakdown(tbl, e, spec).value


def net_norm_2d(f: Grid2D, e: Exponents2D, spec=QuadratureSpec(), workers=None) -> float:
    if f.is_zero():
        return 0.0
    return norm_from_table(build_net_average_table(f, workers), e, spec)
