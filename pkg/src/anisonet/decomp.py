"""Four-part block decomposition of a grid function.

Blocks are ``c1 x c2`` cell rectangles anchored at the grid origin.  With
``A1`` averaging over the x1-extent of a block and ``A2`` over its x2-extent:

* ``f11 = A1 A2 f`` (block means);
* ``f01 = (I - A1) A2 f`` (x2-block average minus the block mean);
* ``f10 = A1 (I - A2) f``;
* ``f00`` the residual, which has zero mean along both axes inside each block.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import InvalidArgumentError
from .grid import Grid2D

_MULTIPLE_RTOL = 1e-9


@dataclass(frozen=True)
class Tau:
    """Block side lengths, stored as whole cell counts per axis."""

    c1: int
    c2: int

    def __post_init__(self):
        for name in ("c1", "c2"):
            v = getattr(self, name)
            if isinstance(v, bool) or int(v) != v or v < 1:
                raise InvalidArgumentError(f"{name} must be a positive integer, got {v!r}")
            object.__setattr__(self, name, int(v))

    @classmethod
    def from_lengths(cls, tau1, tau2, cells):
        """Tau from side lengths, which must be whole multiples of ``cells``."""
        counts = []
        for t, h in zip((tau1, tau2), cells):
            t = float(t)
            if not (math.isfinite(t) and t > 0):
                raise InvalidArgumentError(f"block side must be positive, got {t!r}")
            c = round(t / h)
            if c < 1 or abs(c * h - t) > _MULTIPLE_RTOL * t:
                raise InvalidArgumentError(f"block side {t!r} is not a multiple of cell size {h!r}")
            counts.append(c)
        return cls(*counts)

    def lengths(self, cells):
        return (self.c1 * cells[0], self.c2 * cells[1])


@dataclass(frozen=True, eq=False)
class Decomposition:
    f00: Grid2D
    f01: Grid2D
    f10: Grid2D
    f11: Grid2D
    tau: Tau
    source_checksum: str

    @property
    def components(self):
        return (self.f00, self.f01, self.f10, self.f11)

    def reconstruct(self) -> Grid2D:
        return self.f00.with_values(
            self.f00.values + self.f01.values + self.f10.values + self.f11.values)


def block_padded(f: Grid2D, tau: Tau) -> Grid2D:
    """``f`` zero-extended to a whole number of blocks along each axis."""
    n1, n2 = f.shape
    return f.padded(-(-n1 // tau.c1) * tau.c1, -(-n2 // tau.c2) * tau.c2)


def _average_axis(v, c, axis):
    # mean over consecutive runs of c cells along `axis`, broadcast back
    moved = np.moveaxis(v, axis, 0)
    n = moved.shape[0]
    means = moved.reshape(n // c, c, *moved.shape[1:]).mean(axis=1)
    return np.moveaxis(np.repeat(means, c, axis=0), 0, axis)


def decompose(f: Grid2D, tau: Tau) -> Decomposition:
    g = block_padded(f, tau)
    v = g.values
    a2 = _average_axis(v, tau.c2, 1)
    a1 = _average_axis(v, tau.c1, 0)
    v11 = _average_axis(a2, tau.c1, 0)
    v01 = a2 - v11
    v10 = a1 - v11
    v00 = ((v - v01) - v10) - v11
    return Decomposition(g.with_values(v00), g.with_values(v01), g.with_values(v10),
                         g.with_values(v11), tau, f.checksum())


@dataclass(frozen=True)
class ZeroMeanReport:
    """Largest |integral| over a block side, per component and axis."""

    f00_x1: float
    f01_x1: float
    f00_x2: float
    f10_x2: float

    @property
    def max_violation(self):
        return max(self.f00_x1, self.f01_x1, self.f00_x2, self.f10_x2)


def _max_block_integral(g: Grid2D, c, axis):
    v = np.moveaxis(g.values, axis, 0)
    sums = v.reshape(v.shape[0] // c, c, *v.shape[1:]).sum(axis=1)
    return float(np.max(np.abs(sums))) * g.cells[axis]


def check_zero_means(d: Decomposition) -> ZeroMeanReport:
    c1, c2 = d.tau.c1, d.tau.c2
    return ZeroMeanReport(
        _max_block_integral(d.f00, c1, 0),
        _max_block_integral(d.f01, c1, 0),
        _max_block_integral(d.f00, c2, 1),
        _max_block_integral(d.f10, c2, 1),
    )
