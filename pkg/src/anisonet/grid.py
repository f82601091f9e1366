"""Piecewise-constant grid functions, prefix sums and the CSV grid format.

A grid function is compactly supported: it takes the stored cell value on
each cell of a uniform lattice and vanishes outside the support box.
Values are function values, not cell integrals; the cell area enters only
when a :class:`SummedAreaTable` is built.
"""

from __future__ import annotations

import hashlib
import math
import re
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import InvalidArgumentError, ParseError

FAMILIES = ("uniform", "signed", "block-constant", "additive", "zero")


def _frozen_array(values, ndim):
    arr = np.array(values, dtype=np.float64, copy=True)
    if arr.ndim != ndim:
        raise InvalidArgumentError(f"expected a {ndim}-d value array, got shape {arr.shape}")
    if arr.size == 0 or min(arr.shape) < 1:
        raise InvalidArgumentError("a grid needs at least one cell per axis")
    if not np.all(np.isfinite(arr)):
        raise InvalidArgumentError("grid values must be finite")
    arr.setflags(write=False)
    return arr


def _positive(x, name):
    x = float(x)
    if not (math.isfinite(x) and x > 0):
        raise InvalidArgumentError(f"{name} must be a finite positive number, got {x!r}")
    return x


@dataclass(frozen=True, eq=False)
class Grid1D:
    origin: float
    cell: float
    values: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "origin", float(self.origin))
        object.__setattr__(self, "cell", _positive(self.cell, "cell"))
        object.__setattr__(self, "values", _frozen_array(self.values, 1))
        if not math.isfinite(self.origin):
            raise InvalidArgumentError("origin must be finite")

    @property
    def n(self):
        return self.values.shape[0]

    @property
    def length(self):
        return self.n * self.cell

    def integral(self):
        return math.fsum(self.values) * self.cell

    def with_values(self, values):
        return Grid1D(self.origin, self.cell, values)

    def with_cell(self, cell):
        return Grid1D(self.origin, cell, self.values)


@dataclass(frozen=True, eq=False)
class Grid2D:
    """Function equal to ``values[i, j]`` on cell (i, j); ``i`` runs along x1."""

    origin: tuple
    cells: tuple
    values: np.ndarray

    def __post_init__(self):
        o1, o2 = (float(v) for v in self.origin)
        if not (math.isfinite(o1) and math.isfinite(o2)):
            raise InvalidArgumentError("origin must be finite")
        h1, h2 = self.cells
        object.__setattr__(self, "origin", (o1, o2))
        object.__setattr__(self, "cells", (_positive(h1, "h1"), _positive(h2, "h2")))
        object.__setattr__(self, "values", _frozen_array(self.values, 2))

    @property
    def shape(self):
        return self.values.shape

    @property
    def extents(self):
        (n1, n2), (h1, h2) = self.shape, self.cells
        return (n1 * h1, n2 * h2)

    @property
    def cell_area(self):
        return self.cells[0] * self.cells[1]

    def integral(self):
        return math.fsum(self.values.ravel()) * self.cell_area

    def sup_norm(self):
        return float(np.max(np.abs(self.values)))

    def is_zero(self):
        return not np.any(self.values)

    def with_values(self, values):
        """New grid on the same lattice (origin and cells kept)."""
        return Grid2D(self.origin, self.cells, values)

    def with_cells(self, h1, h2):
        return Grid2D(self.origin, (h1, h2), self.values)

    def padded(self, n1, n2):
        """Zero-extend the support to ``n1 x n2`` cells from the origin."""
        m1, m2 = self.shape
        if n1 < m1 or n2 < m2:
            raise InvalidArgumentError("padding cannot shrink a grid")
        if (n1, n2) == (m1, m2):
            return self
        out = np.zeros((n1, n2))
        out[:m1, :m2] = self.values
        return self.with_values(out)

    def checksum(self):
        h = hashlib.sha256()
        h.update(repr((self.origin, self.cells, self.shape)).encode())
        h.update(np.ascontiguousarray(self.values).tobytes())
        return h.hexdigest()


@dataclass(frozen=True, eq=False)
class SummedAreaTable:
    """``sums[i, j]`` is the integral over the first i x1-cells and j x2-cells."""

    sums: np.ndarray
    origin: tuple
    cells: tuple
    shape: tuple

    def rect_integral(self, i0, i1, j0, j1):
        """Integral over cells ``i0 <= i < i1``, ``j0 <= j < j1`` (support clipped)."""
        n1, n2 = self.shape
        i0, i1 = max(i0, 0), min(i1, n1)
        j0, j1 = max(j0, 0), min(j1, n2)
        if i0 >= i1 or j0 >= j1:
            return 0.0
        s = self.sums
        return float((s[i1, j1] - s[i0, j1]) - (s[i1, j0] - s[i0, j0]))


def _compensated_cumsum(a, axis):
    # Neumaier summation carried along `axis`, vectorised over the other one.
    a = np.moveaxis(np.asarray(a, dtype=np.float64), axis, 0)
    out = np.empty_like(a)
    s = np.zeros(a.shape[1:])
    c = np.zeros(a.shape[1:])
    for k in range(a.shape[0]):
        x = a[k]
        t = s + x
        c += np.where(np.abs(s) >= np.abs(x), (s - t) + x, (x - t) + s)
        s = t
        out[k] = s + c
    return np.moveaxis(out, 0, axis)


def build_sat(f: Grid2D) -> SummedAreaTable:
    n1, n2 = f.shape
    sums = np.zeros((n1 + 1, n2 + 1))
    cell_integrals = f.values * f.cell_area
    sums[1:, 1:] = _compensated_cumsum(_compensated_cumsum(cell_integrals, 1), 0)
    sums.setflags(write=False)
    return SummedAreaTable(sums, f.origin, f.cells, f.shape)


def prefix_integrals_1d(g: Grid1D):
    """Length ``n + 1`` prefix integrals of a 1-D grid, compensated."""
    out = np.zeros(g.n + 1)
    out[1:] = _compensated_cumsum(g.values * g.cell, 0)
    return out


# ---------------------------------------------------------------- generators

def _count(n, name):
    if isinstance(n, bool) or int(n) != n or n < 1:
        raise InvalidArgumentError(f"{name} must be a positive integer, got {n!r}")
    return int(n)


def make_indicator_1d(a, n) -> Grid1D:
    a = _positive(a, "a")
    n = _count(n, "n")
    return Grid1D(0.0, a / n, np.ones(n))


def make_indicator_2d(a, b, n1, n2) -> Grid2D:
    """Indicator of ``[0, a] x [0, b]`` on an ``n1 x n2`` grid."""
    a, b = _positive(a, "a"), _positive(b, "b")
    n1, n2 = _count(n1, "n1"), _count(n2, "n2")
    return Grid2D((0.0, 0.0), (a / n1, b / n2), np.ones((n1, n2)))


def tensor(g: Grid1D, h: Grid1D) -> Grid2D:
    return Grid2D((g.origin, h.origin), (g.cell, h.cell), np.outer(g.values, h.values))


def random_grid(seed, n1, n2, cells, family="uniform") -> Grid2D:
    """Deterministic random grid on ``n1 x n2`` cells of size ``cells``.

    Families
    --------
    uniform
        i.i.d. values in [0, 1).
    signed
        i.i.d. values in [-1, 1).
    block-constant
        values in [-1, 1) constant on rectangular blocks whose side (in
        cells) is drawn uniformly from 1..max(1, n//4) per axis.
    additive
        ``a_i + b_j`` with ``a``, ``b`` i.i.d. in [-1, 1); the doubly
        mean-zero part of any block decomposition vanishes on whole blocks.
    zero
        identically zero.
    """
    if family not in FAMILIES:
        raise InvalidArgumentError(f"unknown family {family!r}; expected one of {FAMILIES}")
    n1, n2 = _count(n1, "n1"), _count(n2, "n2")
    if isinstance(seed, bool) or int(seed) != seed or seed < 0:
        raise InvalidArgumentError(f"seed must be a non-negative integer, got {seed!r}")
    h1, h2 = (_positive(c, "cell") for c in cells)
    rng = np.random.default_rng([int(seed), n1, n2, FAMILIES.index(family)])
    if family == "uniform":
        v = rng.random((n1, n2))
    elif family == "signed":
        v = rng.uniform(-1.0, 1.0, (n1, n2))
    elif family == "block-constant":
        b1 = int(rng.integers(1, max(1, n1 // 4) + 1))
        b2 = int(rng.integers(1, max(1, n2 // 4) + 1))
        coarse = rng.uniform(-1.0, 1.0, (-(-n1 // b1), -(-n2 // b2)))
        v = np.repeat(np.repeat(coarse, b1, axis=0), b2, axis=1)[:n1, :n2]
    elif family == "additive":
        v = rng.uniform(-1.0, 1.0, n1)[:, None] + rng.uniform(-1.0, 1.0, n2)[None, :]
    else:
        v = np.zeros((n1, n2))
    return Grid2D((0.0, 0.0), (h1, h2), v)


# ----------------------------------------------------------------- CSV format

_HEADER = re.compile(
    r"^#\s*origin=(?P<o1>[^,\s]+),(?P<o2>[^,\s]+)\s+"
    r"cells=(?P<h1>[^,\s]+),(?P<h2>[^,\s]+)\s+"
    r"dims=(?P<n1>\d+),(?P<n2>\d+)\s*$"
)


def format_grid_csv(f: Grid2D, comments=()) -> str:
    (o1, o2), (h1, h2), (n1, n2) = f.origin, f.cells, f.shape
    lines = [f"# origin={o1!r},{o2!r} cells={h1!r},{h2!r} dims={n1},{n2}"]
    lines += [f"# {c}" for c in comments]
    lines += [",".join(repr(float(v)) for v in row) for row in f.values]
    return "\n".join(lines) + "\n"


def save_grid_csv(f: Grid2D, path, comments=()):
    Path(path).write_text(format_grid_csv(f, comments))


def parse_grid_csv(text: str) -> Grid2D:
    lines = text.splitlines()
    if not lines or not lines[0].strip():
        raise ParseError(1, "missing '# origin=... cells=... dims=...' header")
    m = _HEADER.match(lines[0].strip())
    if m is None:
        raise ParseError(1, f"malformed header {lines[0]!r}")
    try:
        origin = (float(m["o1"]), float(m["o2"]))
        cells = (float(m["h1"]), float(m["h2"]))
    except ValueError as exc:
        raise ParseError(1, str(exc)) from None
    n1, n2 = int(m["n1"]), int(m["n2"])
    rows = []
    for lineno, line in enumerate(lines[1:], start=2):
        s = line.strip()
        if not s or s.startswith("#"):
            continue
        if len(rows) == n1:
            raise ParseError(lineno, f"more than {n1} data rows")
        parts = s.split(",")
        if len(parts) != n2:
            raise ParseError(lineno, f"expected {n2} values, found {len(parts)}")
        try:
            rows.append([float(p) for p in parts])
        except ValueError as exc:
            raise ParseError(lineno, str(exc)) from None
    if len(rows) != n1:
        raise ParseError(len(lines) + 1, f"expected {n1} data rows, found {len(rows)}")
    try:
        return Grid2D(origin, cells, np.array(rows).reshape(n1, n2))
    except InvalidArgumentError as exc:
        raise ParseError(1, str(exc)) from None


def load_grid_csv(path) -> Grid2D:
    return parse_grid_csv(Path(path).read_text())
