"""Command-line front end: ``anisonet {avg,norm,decompose,kfunc,verify}``.

Every option can also come from a ``--config`` file of ``key = value``
lines (``#`` starts a comment; keys are option names with or without the
leading dashes, ``-`` and ``_`` interchangeable).  Flags given on the command
line win over the file.  Each output starts with a provenance line that
records the version and the full resolved parameter set.
"""

from __future__ import annotations

import argparse
import math
import sys
from pathlib import Path

import numpy as np

from . import __version__
from ._workers import WORKERS_ENV
from .decomp import Tau, check_zero_means, decompose
from .errors import (AnisonetError, DivergenceError, InvalidArgumentError, ParseError,
                     UndefinedRatioError, UnsupportedExponentError)
from .grid import FAMILIES, format_grid_csv, load_grid_csv
from .kfunc import InterpParams, embedding_report
from .netavg import build_net_average_table, net_average_query
from .norms import Exponents2D, QuadratureSpec, norm_breakdown
from .verify import DEFAULT_FAMILIES, LemmaCheckConfig, run_campaign

EXIT_OK = 0
EXIT_CHECK_FAILED = 1
EXIT_USAGE = 2
EXIT_PARSE = 3
EXIT_INVALID = 4
EXIT_EXPONENT = 5
EXIT_DIVERGENCE = 6
EXIT_UNDEFINED = 7
EXIT_IO = 8

EXIT_CODES_HELP = f"""exit codes:
  {EXIT_OK}  success
  {EXIT_CHECK_FAILED}  verification ran but at least one check failed
  {EXIT_USAGE}  usage error (unknown flag, bad config key, malformed option value)
  {EXIT_PARSE}  malformed grid CSV (message carries the line number)
  {EXIT_INVALID}  argument outside its domain (e.g. block side not a cell multiple)
  {EXIT_EXPONENT}  exponent outside 1 < p < inf, 1 <= q <= inf
  {EXIT_DIVERGENCE}  interpolation functional did not settle
  {EXIT_UNDEFINED}  undefined ratio (zero function)
  {EXIT_IO}  input or output file could not be read or written

worker count: --workers, else ${WORKERS_ENV}, else all cores (results do not depend on it)"""


class UsageError(Exception):
    pass


# ------------------------------------------------------------ value parsers

def _float(text):
    try:
        v = float(text)
    except ValueError:
        raise UsageError(f"not a number: {text!r}") from None
    return v


def _int(text):
    try:
        return int(text)
    except ValueError:
        raise UsageError(f"not an integer: {text!r}") from None


def _pair(text):
    parts = [p.strip() for p in str(text).split(",")]
    if len(parts) != 2:
        raise UsageError(f"expected two comma-separated values, got {text!r}")
    return (_float(parts[0]), _float(parts[1]))


def _int_pair(text):
    a, b = _pair(text)
    if a != int(a) or b != int(b):
        raise UsageError(f"expected two integers, got {text!r}")
    return (int(a), int(b))


def _float_list(text):
    return tuple(_float(p) for p in str(text).split(",") if p.strip())


def _int_list(text):
    """``0..99`` ranges and comma lists, mixed freely."""
    out = []
    for part in str(text).split(","):
        part = part.strip()
        if not part:
            continue
        if ".." in part:
            lo, hi = part.split("..", 1)
            out.extend(range(_int(lo), _int(hi) + 1))
        else:
            out.append(_int(part))
    if not out:
        raise UsageError(f"empty list: {text!r}")
    return tuple(out)


def _families(text):
    fams = tuple(p.strip() for p in str(text).split(",") if p.strip())
    for f in fams:
        if f not in FAMILIES:
            raise UsageError(f"unknown family {f!r}; choose from {', '.join(FAMILIES)}")
    return fams


def _taus(text):
    out = []
    for part in str(text).split(","):
        part = part.strip().lower()
        if "x" not in part:
            raise UsageError(f"block sizes look like 4x4, got {part!r}")
        a, b = part.split("x", 1)
        out.append((_int(a), _int(b)))
    return tuple(out)


def _bool(text):
    t = str(text).strip().lower()
    if t in ("1", "true", "yes", "on"):
        return True
    if t in ("0", "false", "no", "off"):
        return False
    raise UsageError(f"not a boolean: {text!r}")


def _fmt(v):
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, float):
        return repr(v)
    if isinstance(v, (tuple, list)):
        return ",".join(_fmt(x) for x in v)
    return str(v)


# ------------------------------------------------------------ option tables

QUADRATURE_OPTS = [
    ("points-per-octave", _int, 16, "log-quadrature nodes per factor of two"),
    ("t-min-cells", _float, 1.0, "first quadrature node, in cells (0 < x <= 1)"),
    ("t-max-factor", _float, 4.0, "last quadrature node, in support extents"),
]

OPTIONS = {
    "avg": [
        ("t-min-cells", _float, 1.0, "smallest threshold, in cells"),
        ("t-max-factor", _float, 4.0, "thresholds reach this many support extents"),
        ("modulus", _bool, False, "average |f| instead of f (Morrey-type variant)"),
    ],
    "norm": [
        ("p", _pair, (2.0, 2.0), "size exponents p1,p2 (1 < p < inf)"),
        ("q", _pair, (1.0, 1.0), "fine exponents q1,q2 (1 <= q <= inf; 'inf' allowed)"),
    ] + QUADRATURE_OPTS,
    "decompose": [
        ("tau", _int_pair, None, "block sides in cells, c1,c2"),
        ("tau-length", _pair, None, "block sides as lengths (must be cell multiples)"),
        ("out-prefix", str, None, "write <prefix>_00.csv .. <prefix>_11.csv and <prefix>_zero_means.txt"),
    ],
    "kfunc": [
        ("p0", _pair, (2.0, 2.0), "endpoint exponents p0 (per axis)"),
        ("p1", _pair, (4.0, 4.0), "endpoint exponents p1 (per axis, > p0)"),
        ("theta", _pair, (0.5, 0.5), "interpolation parameters in (0,1)"),
        ("q", _pair, (1.0, 1.0), "fine exponents of the interpolation functional"),
        ("curve-out", str, None, "write the sampled K curve as CSV here"),
    ] + QUADRATURE_OPTS,
    "verify": [
        ("seeds", _int_list, tuple(range(100)), "seed list, e.g. 0..99 or 1,5,9"),
        ("resolutions", _int_list, (32, 64), "grid sizes n (n x n cells on the unit square)"),
        ("families", _families, DEFAULT_FAMILIES, "random grid families"),
        ("taus", _taus, ((4, 4), (8, 16), (12, 5)), "block sizes in cells, e.g. 4x4,8x16"),
        ("hardy-alphas", _float_list, (0.5, 1.0, 2.0), "alpha values for the Hardy checks"),
        ("hardy-qs", _float_list, (1.0, 2.0), "q values for the Hardy checks"),
        ("points-per-octave", _int, 16, "Gauss order parameter for the Hardy checks"),
    ],
}

NEEDS_INPUT = {"avg", "norm", "decompose", "kfunc"}


def _dest(name):
    return name.replace("-", "_")


def build_parser():
    parser = argparse.ArgumentParser(
        prog="anisonet",
        description="Net averages, anisotropic net norms, block decompositions, "
                    "K-functional bounds and verification campaigns on grid functions.",
        epilog=EXIT_CODES_HELP,
        formatter_class=argparse.RawDescriptionHelpFormatter,
    )
    parser.add_argument("--version", action="version", version=f"anisonet {__version__}")
    sub = parser.add_subparsers(dest="command", required=True, metavar="COMMAND")
    helps = {
        "avg": "net-average matrix over a dyadic threshold lattice (CSV)",
        "norm": "anisotropic net norm with head/body/tail contributions",
        "decompose": "four-part block decomposition plus zero-mean check",
        "kfunc": "K-functional bound curve, interpolation functional and embedding ratio",
        "verify": "randomized certification campaign for the lemma constants",
    }
    for cmd, opts in OPTIONS.items():
        p = sub.add_parser(cmd, help=helps[cmd], description=helps[cmd], epilog=EXIT_CODES_HELP,
                           formatter_class=argparse.RawDescriptionHelpFormatter)
        if cmd in NEEDS_INPUT:
            p.add_argument("input", help="grid CSV file")
        p.add_argument("--config", help="key = value file; command-line flags win")
        p.add_argument("--out", help="write the main output here instead of stdout")
        p.add_argument("--workers", type=int, default=None,
                       help=f"worker threads (default ${WORKERS_ENV} or all cores)")
        for name, _, default, text in opts:
            shown = "none" if default is None else _fmt(default)
            p.add_argument(f"--{name}", dest=_dest(name), default=None, metavar="VALUE",
                           help=f"{text} [default: {shown}]")
    return parser


def read_config(path, allowed):
    """``key = value`` pairs; unknown keys are a usage error."""
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise OSError(f"cannot read config {path}: {exc.strerror}") from None
    out = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise UsageError(f"{path}:{lineno}: expected 'key = value'")
        key, value = (s.strip() for s in line.split("=", 1))
        key = _dest(key.lstrip("-"))
        if key not in allowed:
            raise UsageError(f"{path}:{lineno}: unknown key {key!r}")
        out[key] = value
    return out


def resolve_options(cmd, args):
    """Flags over config over defaults, every value passed through its parser."""
    opts = OPTIONS[cmd]
    allowed = {_dest(n) for n, *_ in opts} | {"out", "workers"}
    if cmd in NEEDS_INPUT:
        allowed.add("input")
    config = read_config(args.config, allowed) if args.config else {}
    resolved = {}
    for name, conv, default, _ in opts:
        key = _dest(name)
        flag = getattr(args, key)
        if flag is not None:
            resolved[key] = conv(flag)
        elif key in config:
            resolved[key] = conv(config[key])
        else:
            resolved[key] = default
    resolved["out"] = args.out if args.out is not None else config.get("out")
    workers = args.workers if args.workers is not None else (
        _int(config["workers"]) if "workers" in config else None)
    resolved["workers"] = workers
    if cmd in NEEDS_INPUT:
        resolved["input"] = args.input or config.get("input")
    return resolved


def provenance(cmd, opts, extra=()):
    skip = {"workers", "out", "curve_out", "out_prefix"}
    parts = [f"anisonet {__version__}", cmd]
    parts += [f"{k}={_fmt(v)}" for k, v in sorted(opts.items()) if k not in skip and v is not None]
    parts += list(extra)
    return "# " + " ".join(parts)


def _emit(text, out):
    if out:
        Path(out).write_text(text)
    else:
        sys.stdout.write(text)


def _record(name, fields):
    lines = [f"[{name}]"] + [f"{k} = {_fmt(v)}" for k, v in fields]
    return "\n".join(lines) + "\n"


def _quadrature(opts):
    return QuadratureSpec(opts["points_per_octave"], opts["t_min_cells"], opts["t_max_factor"])


def _load(opts):
    path = opts["input"]
    f = load_grid_csv(path)
    return f, f"sha256={f.checksum()}"


def dyadic_thresholds(cell, extent, t_min_cells, t_max_factor):
    if not (t_min_cells > 0 and t_max_factor > 0):
        raise InvalidArgumentError("threshold lattice bounds must be positive")
    lo, hi = t_min_cells * cell, t_max_factor * extent
    k = max(0, math.ceil(math.log2(hi / lo) - 1e-9))
    return lo * np.exp2(np.arange(k + 1))


# ----------------------------------------------------------------- commands

def cmd_avg(opts):
    f, digest = _load(opts)
    g = f.with_values(np.abs(f.values)) if opts["modulus"] else f
    tbl = build_net_average_table(g, opts["workers"])
    t1 = dyadic_thresholds(f.cells[0], f.extents[0], opts["t_min_cells"], opts["t_max_factor"])
    t2 = dyadic_thresholds(f.cells[1], f.extents[1], opts["t_min_cells"], opts["t_max_factor"])
    m = net_average_query(tbl, t1[:, None], t2[None, :])
    lines = [provenance("avg", opts, [digest]),
             "t1\\t2," + ",".join(repr(float(v)) for v in t2)]
    for a, row in zip(t1, m):
        lines.append(repr(float(a)) + "," + ",".join(repr(float(v)) for v in row))
    _emit("\n".join(lines) + "\n", opts["out"])
    return EXIT_OK


def cmd_norm(opts):
    f, digest = _load(opts)
    e = Exponents2D(opts["p"], opts["q"])
    spec = _quadrature(opts)
    if f.is_zero():
        fields = [("value", 0.0), ("head", 0.0), ("body", 0.0), ("tail", 0.0)]
    else:
        pm = norm_breakdown(build_net_average_table(f, opts["workers"]), e, spec)
        fields = [("value", pm.value), ("head", pm.head), ("body", pm.body), ("tail", pm.tail)]
    fields.append(("pieces", "integral terms before the 1/q power" if e.q[1] != math.inf
                   else "suprema of each piece"))
    _emit(provenance("norm", opts, [digest]) + "\n" + _record("norm", fields), opts["out"])
    return EXIT_OK


def cmd_decompose(opts):
    f, digest = _load(opts)
    if (opts["tau"] is None) == (opts["tau_length"] is None):
        raise UsageError("give exactly one of --tau or --tau-length")
    tau = Tau(*opts["tau"]) if opts["tau"] else Tau.from_lengths(*opts["tau_length"], f.cells)
    d = decompose(f, tau)
    zm = check_zero_means(d)
    head = provenance("decompose", opts, [digest])
    fields = [("tau_cells", (tau.c1, tau.c2)), ("tau_lengths", tau.lengths(f.cells)),
              ("padded_dims", d.f00.shape),
              ("f00_x1", zm.f00_x1), ("f01_x1", zm.f01_x1),
              ("f00_x2", zm.f00_x2), ("f10_x2", zm.f10_x2),
              ("max_violation", zm.max_violation)]
    record = head + "\n" + _record("zero_means", fields)
    prefix = opts["out_prefix"]
    if prefix:
        for suffix, comp in zip(("00", "01", "10", "11"), d.components):
            Path(f"{prefix}_{suffix}.csv").write_text(
                format_grid_csv(comp, [head[2:], f"component={suffix}"]))
        Path(f"{prefix}_zero_means.txt").write_text(record)
    _emit(record, opts["out"])
    return EXIT_OK


def cmd_kfunc(opts):
    f, digest = _load(opts)
    params = InterpParams(opts["p0"], opts["p1"], opts["theta"], opts["q"])
    spec = _quadrature(opts)
    rep = embedding_report(f, params, spec, opts["workers"])
    head = provenance("kfunc", opts, [digest])
    if opts["curve_out"]:
        rows = [head, "t1,t2,block1_cells,block2_cells,k_upper,k_substitution"]
        for t1, t2, b1, b2, k, raw in rep.curve.rows():
            rows.append(f"{t1!r},{t2!r},{b1},{b2},{k!r},{raw!r}")
        Path(opts["curve_out"]).write_text("\n".join(rows) + "\n")
    fields = [("derived_p", params.p), ("functional", rep.functional),
              ("functional_substitution", rep.functional_raw),
              ("norm", rep.norm), ("ratio", rep.ratio),
              ("lattice_points", rep.curve.values.size)]
    _emit(head + "\n" + _record("kfunc", fields), opts["out"])
    return EXIT_OK


def cmd_verify(opts):
    cfg = LemmaCheckConfig(
        seeds=opts["seeds"], resolutions=opts["resolutions"], tau_choices=opts["taus"],
        families=opts["families"], hardy_alphas=opts["hardy_alphas"], hardy_qs=opts["hardy_qs"],
        quadrature=QuadratureSpec(opts["points_per_octave"]))
    report = run_campaign(cfg, opts["workers"])
    _emit(report.to_text(), opts["out"])
    if opts["out"]:
        sys.stdout.write(f"overall = {'pass' if report.passed else 'FAIL'}\n")
    return EXIT_OK if report.passed else EXIT_CHECK_FAILED


COMMANDS = {"avg": cmd_avg, "norm": cmd_norm, "decompose": cmd_decompose,
            "kfunc": cmd_kfunc, "verify": cmd_verify}


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)  # exits with status 2 on unknown flags
    try:
        opts = resolve_options(args.command, args)
        if args.command in NEEDS_INPUT and not opts.get("input"):
            raise UsageError("an input grid is required")
        return COMMANDS[args.command](opts)
    except UsageError as exc:
        parser.print_usage(sys.stderr)
        print(f"anisonet: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except ParseError as exc:
        print(f"anisonet: parse error: {exc}", file=sys.stderr)
        return EXIT_PARSE
    except UnsupportedExponentError as exc:
        print(f"anisonet: unsupported exponent: {exc}", file=sys.stderr)
        return EXIT_EXPONENT
    except InvalidArgumentError as exc:
        print(f"anisonet: invalid argument: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except DivergenceError as exc:
        print(f"anisonet: divergence: {exc}; estimates: {_fmt(exc.history)}", file=sys.stderr)
        return EXIT_DIVERGENCE
    except UndefinedRatioError as exc:
        print(f"anisonet: undefined ratio: {exc}", file=sys.stderr)
        return EXIT_UNDEFINED
    except AnisonetError as exc:  # pragma: no cover - every subclass is mapped above
        print(f"anisonet: error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except OSError as exc:
        print(f"anisonet: I/O error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
