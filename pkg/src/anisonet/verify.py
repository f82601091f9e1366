"""Randomized campaigns certifying the block-decomposition inequalities.

Every check compares a left-hand side with a right-hand side computed
without its constant; the worst ratio over all samples is reported next to
the constant it must respect.  Samples with both sides zero count as ratio
0; a zero right-hand side under a positive left-hand side gives an infinite
ratio, which fails and keeps its witness.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from . import __version__
from ._workers import resolve_workers
from .decomp import Tau, block_padded, check_zero_means, decompose
from .errors import InvalidArgumentError
from .grid import FAMILIES, Grid1D, random_grid
from .netavg import build_net_average_table
from .norms import QuadratureSpec

PASS_RTOL = 1e-9
IDENTITY_TOL = 1e-12

REGIMES = ("t1>tau1,t2>tau2", "t1>tau1,t2<=tau2", "t1<=tau1,t2>tau2", "t1<=tau1,t2<=tau2")
DEFAULT_FAMILIES = ("uniform", "signed", "block-constant", "additive")


@dataclass(frozen=True)
class LemmaCheckConfig:
    """Campaign definition.

    ``tau_choices`` are block sides in cells; grids cover the unit square, so
    a resolution ``n`` means ``n x n`` cells of side ``1/n``.  The query
    lattice runs to ``lattice_max_factor`` support extents.
    """

    seeds: tuple = tuple(range(100))
    resolutions: tuple = (32, 64)
    tau_choices: tuple = ((4, 4), (8, 16), (12, 5))
    families: tuple = DEFAULT_FAMILIES
    lattice_max_factor: int = 4
    min_regime_samples: int = 10
    max_resolution: int = 64
    hardy_alphas: tuple = (0.5, 1.0, 2.0)
    hardy_qs: tuple = (1.0, 2.0)
    quadrature: QuadratureSpec = field(default_factory=QuadratureSpec)

    def __post_init__(self):
        object.__setattr__(self, "seeds", tuple(int(s) for s in self.seeds))
        object.__setattr__(self, "resolutions", tuple(int(n) for n in self.resolutions))
        object.__setattr__(self, "tau_choices",
                           tuple(Tau(*t) if not isinstance(t, Tau) else t for t in self.tau_choices))
        object.__setattr__(self, "families", tuple(self.families))
        for name in ("seeds", "resolutions", "tau_choices", "families"):
            if not getattr(self, name):
                raise InvalidArgumentError(f"{name} must not be empty")
        if any(s < 0 for s in self.seeds):
            raise InvalidArgumentError("seeds must be non-negative")
        for fam in self.families:
            if fam not in FAMILIES:
                raise InvalidArgumentError(f"unknown family {fam!r}")
        lo, hi = min(self.resolutions), max(self.resolutions)
        if lo < 1 or hi > self.max_resolution:
            raise InvalidArgumentError(f"resolutions must lie in 1..{self.max_resolution}")
        for tau in self.tau_choices:
            if max(tau.c1, tau.c2) > lo:
                raise InvalidArgumentError(
                    f"block {tau.c1}x{tau.c2} exceeds the smallest resolution {lo}")
        if self.lattice_max_factor < 2:
            raise InvalidArgumentError("lattice_max_factor must be at least 2")
        if any(a <= 0 for a in self.hardy_alphas) or any(q < 1 for q in self.hardy_qs):
            raise InvalidArgumentError("Hardy checks need alpha > 0 and q >= 1")


@dataclass(frozen=True)
class CheckRecord:
    check_id: str
    regime: str
    constant: float
    worst_ratio: float
    witness: str
    samples: int

    @property
    def passed(self):
        return self.worst_ratio <= self.constant * (1.0 + PASS_RTOL)


@dataclass(frozen=True)
class VerificationReport:
    records: tuple
    header: tuple = ()

    @property
    def passed(self):
        return all(r.passed for r in self.records)

    def failures(self):
        return [r for r in self.records if not r.passed]

    def get(self, check_id, regime="-"):
        for r in self.records:
            if r.check_id == check_id and r.regime == regime:
                return r
        raise KeyError((check_id, regime))

    def to_text(self):
        lines = [f"# {h}" for h in self.header]
        for r in self.records:
            lines += [
                f"[{r.check_id} {r.regime}]",
                f"constant = {r.constant!r}",
                f"worst_ratio = {r.worst_ratio!r}",
                f"witness = {r.witness}",
                f"samples = {r.samples}",
                f"status = {'pass' if r.passed else 'FAIL'}",
                "",
            ]
        lines.append(f"overall = {'pass' if self.passed else 'FAIL'}")
        return "\n".join(lines) + "\n"


# ------------------------------------------------------------ accumulation

class _Worst:
    """Running maximum ratio with the witness of its first occurrence."""

    __slots__ = ("constant", "worst", "witness", "samples")

    def __init__(self, constant):
        self.constant, self.worst, self.witness, self.samples = constant, 0.0, "none", 0

    def offer(self, ratio, witness, samples=1):
        # `ratio` is the largest of `samples` new observations
        self.samples += samples
        if ratio > self.worst:
            self.worst, self.witness = ratio, witness

    def merge(self, other):
        self.samples += other.samples
        if other.worst > self.worst:
            self.worst, self.witness = other.worst, other.witness


def _ratios(lhs, rhs):
    lhs, rhs = np.broadcast_arrays(np.asarray(lhs, dtype=np.float64),
                                   np.asarray(rhs, dtype=np.float64))
    out = np.zeros(lhs.shape)
    pos = rhs > 0
    out[pos] = lhs[pos] / rhs[pos]
    out[~pos & (lhs > 0)] = math.inf
    return out


# ------------------------------------------------------------------ lattice

def axis_lattice(n, c, max_factor=4):
    """Query thresholds (in cells) for one axis with blocks of ``c`` cells.

    Below the block side the lattice is dense (quarter cells when the block
    is short, so every regime keeps enough samples); above it mixes small
    offsets, multiples of the block and powers of two out to ``max_factor``
    support extents.
    """
    if c < 10:
        below = [j / 4 for j in range(1, 4 * c + 1)]
    else:
        below = list(range(1, c + 1))
    top = max_factor * n
    above = {c + 1, c + 2, 2 * c, 2 * c + 1, 3 * c, n, n + 1, 2 * n, top}
    p = 1
    while p <= top:
        above.add(p)
        p *= 2
    return np.array(below + sorted(k for k in above if c < k <= top), dtype=np.float64)


def _regime_masks(k1, k2, tau):
    g1 = (k1 > tau.c1)[None, :]
    g2 = (k2 > tau.c2)[:, None]
    return {REGIMES[0]: g1 & g2, REGIMES[1]: g1 & ~g2,
            REGIMES[2]: ~g1 & g2, REGIMES[3]: ~g1 & ~g2}


LEMMA_CONSTANTS = {
    "bound.f00": dict.fromkeys(REGIMES, 64.0),
    "bound.f01": {REGIMES[0]: 8.0, REGIMES[1]: 56.0, REGIMES[2]: 8.0, REGIMES[3]: 56.0},
    "bound.f10": {REGIMES[0]: 8.0, REGIMES[1]: 8.0, REGIMES[2]: 56.0, REGIMES[3]: 56.0},
    "bound.f11": dict.fromkeys(REGIMES, 4.0),
}


def _right_hand_sides(avg, t1, t2, s1, s2):
    """Constant-free bounds for every check, keyed like LEMMA_CONSTANTS.

    ``avg(a, b)`` is the net average of the source; ``t*`` are the mesh
    thresholds and ``s*`` the block sides.
    """
    r1, r2 = s1 / t1, s2 / t2
    f_tt = avg(t1, t2)
    f_st = avg(s1 + 0 * t1, t2)
    f_ts = avg(t1, s2 + 0 * t2)
    f_ss = avg(s1, s2)
    return {
        "bound.f00": {REGIMES[0]: r1 * r2 * f_ss, REGIMES[1]: r1 * f_st,
                       REGIMES[2]: r2 * f_ts, REGIMES[3]: f_tt},
        "bound.f01": {REGIMES[0]: r1 * (3 * f_st + 4 * r2 * f_ss), REGIMES[1]: r1 * f_ss,
                       REGIMES[2]: 3 * f_tt + 4 * r2 * f_ts, REGIMES[3]: f_ts},
        "bound.f10": {REGIMES[0]: r2 * (3 * f_ts + 4 * r1 * f_ss),
                       REGIMES[1]: 3 * f_tt + 4 * r1 * f_st,
                       REGIMES[2]: r2 * f_ss, REGIMES[3]: f_st},
        "bound.f11": dict.fromkeys(REGIMES, avg(np.maximum(t1, s1), np.maximum(t2, s2))),
    }


def _empty_lemma_accumulators():
    return {(cid, reg): _Worst(const)
            for cid, table in LEMMA_CONSTANTS.items() for reg, const in table.items()}


def _check_unit(n, family, seed, cfg: LemmaCheckConfig, checks):
    """All lemma, identity and reconstruction samples for one random grid."""
    f = random_grid(seed, n, n, (1.0 / n, 1.0 / n), family)
    h1, h2 = f.cells
    acc = {key: _Worst(LEMMA_CONSTANTS[key[0]][key[1]])
           for key in _empty_lemma_accumulators() if key[0] in checks}
    acc[("decomp.reconstruction", "-")] = _Worst(IDENTITY_TOL)
    acc[("decomp.zero_means", "-")] = _Worst(IDENTITY_TOL)
    scale = f.sup_norm()
    base = build_net_average_table(f, workers=1)
    tag = f"seed={seed} family={family} n={n}"

    for tau in cfg.tau_choices:
        d = decompose(f, tau)
        where = f"{tag} tau={tau.c1}x{tau.c2}"
        padded = block_padded(f, tau).values
        err = float(np.max(np.abs(d.reconstruct().values - padded)))
        acc[("decomp.reconstruction", "-")].offer(err / scale if scale else err, where)
        zm = check_zero_means(d).max_violation
        acc[("decomp.zero_means", "-")].offer(zm / scale if scale else zm, where)

        k1 = axis_lattice(n, tau.c1, cfg.lattice_max_factor)
        k2 = axis_lattice(n, tau.c2, cfg.lattice_max_factor)
        t1, t2 = (k1 * h1)[None, :], (k2 * h2)[:, None]
        s1, s2 = tau.c1 * h1, tau.c2 * h2
        masks = _regime_masks(k1, k2, tau)
        for reg, m in masks.items():
            if m.sum() < cfg.min_regime_samples:
                raise InvalidArgumentError(
                    f"lattice gives only {int(m.sum())} samples in regime {reg} for {where}")
        rhs = _right_hand_sides(base, t1, t2, s1, s2)
        components = {"bound.f00": d.f00, "bound.f01": d.f01,
                      "bound.f10": d.f10, "bound.f11": d.f11}
        for cid, comp in components.items():
            if cid not in checks:
                continue
            if comp.is_zero():
                lhs = np.zeros((k2.size, k1.size))
            else:
                lhs = build_net_average_table(comp, workers=1)(t1, t2)
            for reg, m in masks.items():
                r = np.where(m, _ratios(lhs, rhs[cid][reg]), -1.0)
                j, i = np.unravel_index(int(np.argmax(r)), r.shape)
                acc[(cid, reg)].offer(
                    float(r[j, i]), f"{where} t=({float(t1[0, i])!r},{float(t2[j, 0])!r})",
                    int(m.sum()))
    return acc


# -------------------------------------------------------------------- Hardy

@dataclass(frozen=True)
class HardyResult:
    kind: str
    alpha: float
    q: float
    lhs: float
    rhs: float

    @property
    def ratio(self):
        if self.rhs > 0:
            return self.lhs / self.rhs
        return 0.0 if self.lhs == 0 else math.inf


def _log_gauss(order):
    x, w = np.polynomial.legendre.leggauss(order)
    return x, w


def _hardy_body(phi: Grid1D, weight, tail_integral, q, order):
    """Sum over cells of the integral of ``(t**weight * G(t))**q dt/t`` where
    ``G`` is the running integral of ``phi`` from the left (``tail_integral``
    False) or from the right (True); ``G`` is linear on each cell."""
    x, w = _log_gauss(order)
    h, a = phi.cell, phi.origin
    cum = np.concatenate([[0.0], np.cumsum(phi.values) * h])
    total = cum[-1]
    pieces = []
    for i, v in enumerate(phi.values):
        lo, hi = a + i * h, a + (i + 1) * h
        ulo, uhi = math.log(lo), math.log(hi)
        u = 0.5 * (uhi - ulo) * x + 0.5 * (uhi + ulo)
        t = np.exp(u)
        left = cum[i] + v * (t - lo)
        g = total - left if tail_integral else left
        pieces.append(0.5 * (uhi - ulo) * float(np.dot(w, (t ** weight * np.maximum(g, 0.0)) ** q)))
    return math.fsum(pieces), total


def _hardy_rhs(phi: Grid1D, gamma, q, alpha):
    h, a = phi.cell, phi.origin
    pieces = []
    for i, v in enumerate(phi.values):
        if v == 0:
            continue
        lo, hi = a + i * h, a + (i + 1) * h
        span = math.log(hi / lo) if gamma == 0 else (hi ** gamma - lo ** gamma) / gamma
        pieces.append(v ** q * span)
    return math.fsum(pieces) ** (1.0 / q) / alpha


def verify_hardy(alpha, q, phi: Grid1D, spec=QuadratureSpec()):
    """Both weighted Hardy inequalities for a nonnegative step function.

    Returns ``(upper, lower)``: ``upper`` integrates the tail integral of
    ``phi`` against ``t**alpha``, ``lower`` the running integral against
    ``t**-alpha``.  Each cell is integrated by Gauss-Legendre in ``log t``;
    left and right of the support the inner integral is constant or zero and
    is handled in closed form.
    """
    alpha, q = float(alpha), float(q)
    if not (alpha > 0 and math.isfinite(alpha)):
        raise InvalidArgumentError("alpha must be positive")
    if not (1.0 <= q < math.inf):
        raise InvalidArgumentError("q must satisfy 1 <= q < inf")
    if phi.origin <= 0:
        raise InvalidArgumentError("the step function must be supported in t > 0")
    if np.any(phi.values < 0):
        raise InvalidArgumentError("the step function must be nonnegative")
    order = max(16, 2 * spec.points_per_octave)
    a, b = phi.origin, phi.origin + phi.length

    body, total = _hardy_body(phi, alpha, True, q, order)
    head = (a ** alpha * total) ** q / (alpha * q)
    upper_lhs = math.fsum((head, body)) ** (1.0 / q)
    upper_rhs = _hardy_rhs(phi, (1.0 + alpha) * q, q, alpha)

    body, total = _hardy_body(phi, -alpha, False, q, order)
    tail = (b ** -alpha * total) ** q / (alpha * q)
    lower_lhs = math.fsum((body, tail)) ** (1.0 / q)
    lower_rhs = _hardy_rhs(phi, (1.0 - alpha) * q, q, alpha)
    return (HardyResult("upper", alpha, q, upper_lhs, upper_rhs),
            HardyResult("lower", alpha, q, lower_lhs, lower_rhs))


def random_step_function(seed) -> Grid1D:
    """Nonnegative step function with 1..16 cells, some of them empty."""
    rng = np.random.default_rng([int(seed), 0x4A7D])
    n = int(rng.integers(1, 17))
    values = rng.random(n) * (rng.random(n) > 0.2)
    return Grid1D(float(rng.uniform(0.05, 2.0)), float(rng.uniform(0.05, 1.0)), values)


def _hardy_unit(seed, cfg: LemmaCheckConfig):
    phi = random_step_function(seed)
    acc = {("hardy.upper", "-"): _Worst(1.0), ("hardy.lower", "-"): _Worst(1.0)}
    for alpha in cfg.hardy_alphas:
        for q in cfg.hardy_qs:
            for res in verify_hardy(alpha, q, phi, cfg.quadrature):
                acc[(f"hardy.{res.kind}", "-")].offer(
                    res.ratio, f"seed={seed} alpha={alpha!r} q={q!r}")
    return acc


# ---------------------------------------------------------------- campaigns

def _run_units(cfg, checks, workers):
    units = [(n, fam, s) for n in cfg.resolutions for fam in cfg.families for s in cfg.seeds]
    workers = min(resolve_workers(workers), len(units))
    if workers == 1:
        parts = [_check_unit(n, fam, s, cfg, checks) for n, fam, s in units]
    else:
        with ThreadPoolExecutor(workers) as pool:
            parts = list(pool.map(lambda u: _check_unit(*u, cfg, checks), units))
    merged = {}
    for part in parts:  # canonical unit order keeps witnesses deterministic
        for key, w in part.items():
            if key not in merged:
                merged[key] = _Worst(w.constant)
            merged[key].merge(w)
    return merged


def _records(acc, keys=None):
    out = []
    for (cid, reg), w in acc.items():
        if keys is None or cid in keys:
            out.append(CheckRecord(cid, reg, w.constant, w.worst, w.witness, w.samples))
    return tuple(sorted(out, key=lambda r: (r.check_id, r.regime)))


def config_summary(cfg: LemmaCheckConfig):
    taus = ",".join(f"{t.c1}x{t.c2}" for t in cfg.tau_choices)
    seeds = cfg.seeds
    if seeds == tuple(range(seeds[0], seeds[0] + len(seeds))):
        seed_text = f"{seeds[0]}..{seeds[-1]}"
    else:
        seed_text = ",".join(map(str, seeds))
    q = cfg.quadrature
    return (f"seeds={seed_text} resolutions={','.join(map(str, cfg.resolutions))} "
            f"taus={taus} families={','.join(cfg.families)} "
            f"lattice_max_factor={cfg.lattice_max_factor} "
            f"hardy_alphas={','.join(map(repr, cfg.hardy_alphas))} "
            f"hardy_qs={','.join(map(repr, cfg.hardy_qs))} "
            f"points_per_octave={q.points_per_octave}")


def _report(acc, cfg, keys=None):
    header = (f"anisonet {__version__} verification report", config_summary(cfg))
    return VerificationReport(_records(acc, keys), header)


def verify_lemma_f00(cfg: LemmaCheckConfig, workers=None) -> VerificationReport:
    return _report(_run_units(cfg, {"bound.f00"}, workers), cfg, {"bound.f00"})


def verify_lemma_f01_f10(cfg: LemmaCheckConfig, workers=None) -> VerificationReport:
    keys = {"bound.f01", "bound.f10"}
    return _report(_run_units(cfg, keys, workers), cfg, keys)


def verify_lemma_f11(cfg: LemmaCheckConfig, workers=None) -> VerificationReport:
    return _report(_run_units(cfg, {"bound.f11"}, workers), cfg, {"bound.f11"})


def run_campaign(cfg: LemmaCheckConfig = None, workers=None) -> VerificationReport:
    """Every check over every (resolution, family, seed) unit, plus Hardy
    checks on one random step function per seed."""
    cfg = cfg or LemmaCheckConfig()
    acc = _run_units(cfg, set(LEMMA_CONSTANTS), workers)
    for seed in cfg.seeds:
        for key, w in _hardy_unit(seed, cfg).items():
            acc.setdefault(key, _Worst(w.constant)).merge(w)
    return _report(acc, cfg)
