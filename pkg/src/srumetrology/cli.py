"""Command-line front end: ``srumetrology <subcommand> [options]``.

Angles accept a ``pi`` suffix (``0.5pi``). Swept axes take ``start:stop:count``
(endpoints included) or a comma list. A ``--config`` file holds flat
``key = value`` lines using the long option names; explicit flags win over it.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
from fractions import Fraction
from typing import Sequence

import numpy as np

from . import sweeps
from .errors import RangeError
from .spin import SpinLabel

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2


# --- value parsers -----------------------------------------------------------------

def parse_angle(text: str) -> float:
    t = str(text).strip().lower().replace(" ", "")
    if t.endswith("pi"):
        coef = t[:-2].rstrip("*")
        if coef in ("", "+"):
            return math.pi
        if coef == "-":
            return -math.pi
        return float(Fraction(coef)) * math.pi
    v = float(t)
    if not math.isfinite(v):
        raise ValueError(f"angle {text!r} is not finite")
    return v


def parse_axis(text: str) -> np.ndarray:
    """``start:stop:count`` with count >= 2, a comma list, or a single value."""
    t = str(text).strip()
    if ":" in t:
        parts = t.split(":")
        if len(parts) != 3:
            raise ValueError(f"range {text!r} must be start:stop:count")
        count = int(parts[2])
        if count < 2:
            raise ValueError(f"range {text!r} needs count >= 2")
        return np.linspace(parse_angle(parts[0]), parse_angle(parts[1]), count)
    return np.array([parse_angle(p) for p in t.split(",") if p.strip()])


def parse_spin(text: str) -> float:
    return SpinLabel.of(str(text).strip()).value


def parse_list(kind):
    def parse(text: str):
        return [kind(p) for p in str(text).split(",") if p.strip()]
    return parse


def _argtype(fn, what):
    def wrapped(text):
        try:
            return fn(text)
        except (ValueError, ZeroDivisionError, RangeError) as exc:
            raise argparse.ArgumentTypeError(f"invalid {what} {text!r}: {exc}")
    wrapped.__name__ = what
    return wrapped


ANGLE = _argtype(parse_angle, "angle")
AXIS = _argtype(parse_axis, "range")
SPIN = _argtype(parse_spin, "spin")
FLOATS = _argtype(parse_list(float), "number list")
INTS = _argtype(parse_list(int), "integer list")


# --- command table ---------------------------------------------------------------------
# option -> (type, default as text, help)

COMMANDS = {
    "qfi-surface": ("two-spin I_gamma over (mu, phi)", {
        "s-m": (SPIN, "5", "main spin"),
        "s-p": (SPIN, "2", "probe spin"),
        "mu": (AXIS, "0:2pi:41", "squeezing strengths"),
        "phi": (AXIS, "0:1pi:9", "rotation axis angles"),
        "gamma": (ANGLE, "0.3", "rotation angle for the numeric oracle"),
    }),
    "qfi-single": ("single-spin I_gamma over (mu, phi)", {
        "s": (SPIN, "2", "spin"),
        "mu": (AXIS, "0:2pi:41", "squeezing strengths"),
        "phi": (AXIS, "0:1pi:9", "rotation axis angles (generator convention)"),
        "gamma": (ANGLE, "0.3", "rotation angle for the numeric oracle"),
    }),
    "multiparam": ("two-rotation QFI matrix and variance bounds", {
        "s": (SPIN, "1", "spin of both parties"),
        "mu": (AXIS, "0:2pi:21", "squeezing strengths"),
        "phi1": (AXIS, "0:1pi:5", "first rotation axis"),
        "phi2": (AXIS, "0:1pi:5", "second rotation axis"),
    }),
    "rot-diff": ("rotation-difference bounds for equal axes", {
        "s1": (SPIN, "1", "first spin"),
        "s2": (SPIN, "1", "second spin"),
        "mu": (AXIS, "0:2pi:41", "squeezing strengths"),
        "phi": (AXIS, "0:1pi:5", "shared rotation axis"),
    }),
    "sld-map": ("mean SLD commutator for (gamma, phi)", {
        "j": (SPIN, "1", "spin of both parties"),
        "mu": (ANGLE, "0.5pi", "squeezing strength"),
        "gamma": (AXIS, "0.05pi:2pi:24", "rotation angles"),
        "phi": (AXIS, "0:2pi:24", "rotation axis angles (generator convention)"),
    }),
    "two-axis": ("two-axis-squeezing SRU, numeric QFI", {
        "s": (SPIN, "4", "spin"),
        "mu": (AXIS, "0:1pi:101", "squeezing strengths"),
        "phi": (AXIS, "0,0.25pi,0.5pi", "rotation axis angles"),
        "gamma": (ANGLE, "0.3", "rotation angle for the numeric QFI"),
    }),
    "wigner": ("spherical Wigner function on a grid", {
        "s": (SPIN, "40", "spin"),
        "mu": (ANGLE, "0.5pi", "one-axis squeezing of the X coherent state"),
        "gamma": (ANGLE, "0", "optional SRU rotation angle"),
        "phi": (ANGLE, "0", "SRU rotation axis"),
        "n-theta": (int, "181", "Gauss-Legendre nodes in cos(theta)"),
        "n-phi": (int, "360", "equispaced phi nodes"),
    }),
    "sdu-check": ("squeeze-displace-unsqueeze QFI anchors", {
        "r": (FLOATS, "0.25,0.5,1", "squeezing parameters"),
        "alpha": (float, "0.1", "displacement real part"),
        "beta": (float, "0.1", "displacement imaginary part"),
    }),
    "superchannel": ("superchannel QFI: Ansatz and random-restart search", {
        "n": (INTS, "2,4,6", "spin sizes N"),
        "restarts": (int, "8", "random restarts per N"),
    }),
    "validate": ("run the invariant suite", {}),
}

COMMON = {
    "out": (str, None, "output path (default stdout)"),
    "format": (str, "csv", "csv or json"),
    "jobs": (int, "1", "worker processes"),
    "seed": (int, "0", "seed for randomized checks"),
    "axis-convention": (str, "formula", "angle convention of phi columns: formula or generator"),
}

TOLERANCES = {"oracle": 1e-7, "sld": 1e-6, "wigner_integral": 1e-8}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="srumetrology", description="Squeezing-rotation-unsqueezing metrology sweeps.")
    sub = parser.add_subparsers(dest="command", required=True, metavar="COMMAND")
    for name, (help_text, opts) in COMMANDS.items():
        p = sub.add_parser(name, help=help_text, description=help_text)
        for opt, (kind, default, h) in opts.items():
            p.add_argument(f"--{opt}", type=kind, default=None, help=f"{h} (default {default})")
        p.add_argument("--out", default=None, help="output path (default stdout)")
        p.add_argument("--format", choices=("csv", "json"), default=None)
        p.add_argument("--jobs", type=int, default=None)
        p.add_argument("--seed", type=int, default=None)
        p.add_argument("--strict", action="store_true", default=None,
                       help="exit 1 if any oracle or anchor check fails")
        p.add_argument("--no-oracle", action="store_true", default=None, help="skip numeric columns")
        p.add_argument("--config", default=None, help="flat key = value file")
        p.add_argument("--axis-convention", choices=("formula", "generator"), default=None)
        if name == "validate":
            p.add_argument("--inject-fault", choices=("convention",), default=None, help=argparse.SUPPRESS)
    return parser


def read_config(path: str) -> dict:
    out = {}
    with open(path, encoding="utf-8") as fh:
        for n, line in enumerate(fh, 1):
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            key, sep, value = line.partition("=")
            if not sep:
                key, sep, value = line.partition(":")
            if not sep:
                raise ValueError(f"{path}:{n}: expected key = value")
            out[key.strip().lstrip("-").replace("_", "-")] = value.strip()
    return out


_FLAGS = {"strict", "no-oracle"}


def resolve(args: argparse.Namespace, parser: argparse.ArgumentParser) -> dict:
    """Merge flags > config file > defaults into a dict keyed by option name."""
    opts = dict(COMMANDS[args.command][1])
    opts.update({k: v for k, v in COMMON.items() if k not in opts})
    config = {}
    if args.config:
        try:
            config = read_config(args.config)
        except (OSError, ValueError) as exc:
            parser.error(f"config: {exc}")
    known = set(opts) | _FLAGS
    unknown = sorted(set(config) - known)
    if unknown:
        parser.error(f"config: unknown keys {', '.join(unknown)} for {args.command}")
    cfg = {}
    for key in known:
        flag = getattr(args, key.replace("-", "_"), None)
        if flag is not None:
            cfg[key] = flag
            continue
        if key in _FLAGS:
            cfg[key] = str(config.get(key, "false")).lower() in ("1", "true", "yes", "on")
            continue
        kind, default, _ = opts[key]
        raw = config.get(key, default)
        if raw is None:
            cfg[key] = None
            continue
        try:
            cfg[key] = kind(raw)
        except (argparse.ArgumentTypeError, ValueError) as exc:
            parser.error(f"{key}: {exc}")
    if cfg["format"] not in ("csv", "json"):
        parser.error(f"format must be csv or json, got {cfg['format']!r}")
    if cfg["axis-convention"] not in ("formula", "generator"):
        parser.error(f"axis-convention must be formula or generator, got {cfg['axis-convention']!r}")
    if cfg["jobs"] < 1:
        parser.error("jobs must be >= 1")
    cfg["inject-fault"] = getattr(args, "inject_fault", None)
    return cfg


# --- output ----------------------------------------------------------------------------

def _cell(v):
    if isinstance(v, (bool, np.bool_)):
        return "PASS" if v else "FAIL"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        return "" if math.isnan(v) else "%.17g" % v
    return str(v)


def _jsonable(v):
    if isinstance(v, (bool, np.bool_)):
        return "PASS" if v else "FAIL"
    if isinstance(v, (int, np.integer)):
        return int(v)
    if isinstance(v, (float, np.floating)):
        return None if math.isnan(v) else float(v)
    return v


def render(header: Sequence[str], rows, fmt: str) -> str:
    if fmt == "json":
        objs = [{h: _jsonable(v) for h, v in zip(header, row)} for row in rows]
        return json.dumps(objs, indent=1, allow_nan=False) + "\n"
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([_cell(v) for v in row])
    return buf.getvalue()


def emit(text: str, out: str | None):
    if out:
        with open(out, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


# --- commands ------------------------------------------------------------------------

def _bad_rows(header, rows, check) -> int:
    idx = {h: i for i, h in enumerate(header)}
    return sum(1 for r in rows if not check(r, idx))


def _close(a, b, tol):
    if math.isnan(a) and math.isnan(b):
        return True
    return abs(a - b) <= tol * max(1.0, abs(a))


def run_sweep(cmd: str, c: dict):
    oracle = not c["no-oracle"]
    conv, jobs = c["axis-convention"], c["jobs"]
    tol = TOLERANCES["oracle"]
    if cmd == "qfi-surface":
        h, rows = sweeps.qfi_surface_rows(c["s-m"], c["s-p"], c["mu"], c["phi"], c["gamma"], conv, oracle, jobs)
        bad = (lambda r, i: r[i["abs_diff"]] <= tol * max(1.0, abs(r[i["qfi_closed"]]))) if oracle else None
    elif cmd == "qfi-single":
        h, rows = sweeps.qfi_single_rows(c["s"], c["mu"], c["phi"], c["gamma"], oracle, jobs)
        bad = (lambda r, i: r[i["abs_diff"]] <= tol * max(1.0, abs(r[i["qfi_closed"]]))) if oracle else None
    elif cmd == "multiparam":
        h, rows = sweeps.multiparam_rows(c["s"], c["mu"], c["phi1"], c["phi2"], conv, oracle, jobs)
        bad = (lambda r, i: r[i["oracle_max_diff"]] <= 1e-6 * max(1.0, abs(r[i["i11"]]), abs(r[i["i22"]]))) if oracle else None
    elif cmd == "rot-diff":
        h, rows = sweeps.rot_diff_rows(c["s1"], c["s2"], c["mu"], c["phi"], conv, oracle, jobs)
        bad = (lambda r, i: _close(r[i["i_tilde"]], r[i["i_tilde_numeric"]], 1e-6)
               and _close(r[i["i_tilde_corr"]], r[i["i_tilde_corr_numeric"]], 1e-6)) if oracle else None
    elif cmd == "sld-map":
        h, rows = sweeps.sld_map_rows(c["j"], c["mu"], c["gamma"], c["phi"], oracle, jobs)
        bad = (lambda r, i: abs(r[i["comm_closed"]] - r[i["comm_numeric"]]) <= TOLERANCES["sld"]) if oracle else None
    elif cmd == "two-axis":
        h, rows = sweeps.two_axis_rows(c["s"], c["mu"], c["phi"], c["gamma"], jobs)
        bad = lambda r, i: r[i["qfi_numeric"]] <= r[i["heisenberg"]] + 1e-6
    else:
        raise KeyError(cmd)
    failures = _bad_rows(h, rows, bad) if bad else 0
    return h, rows, failures


def run_wigner(c: dict):
    from .wigner import SphericalGrid, wigner_function

    grid = SphericalGrid(c["n-theta"], c["n-phi"])
    th, ph, w, raw = wigner_function(sweeps.wigner_state(c["s"], c["mu"], c["gamma"], c["phi"]), c["s"], grid)
    failures = int(abs(grid.integrate(w) - 1) > TOLERANCES["wigner_integral"])
    return ["theta", "phi", "w_normalized", "w_raw"], list(sweeps.wigner_rows(th, ph, w, raw)), failures


def run_report(cmd: str, c: dict):
    if cmd == "sdu-check":
        rows = sweeps.sdu_report(c["r"], c["alpha"], c["beta"])
    else:
        rows = sweeps.superchannel_report(c["n"], c["restarts"], c["seed"])
    header = ["check", "expected", "measured", "deviation", "status"]
    return header, rows, sum(1 for r in rows if not r[-1])


def validate_text(checks) -> tuple[str, list]:
    width = max(len(ch.name) for ch in checks)
    lines = [f"{'check':<{width}}  {'tolerance':>10}  {'measured':>12}  status"]
    counted = [ch for ch in checks if ch.counted]
    for ch in counted:
        lines.append(f"{ch.name:<{width}}  {ch.tol:>10.3g}  {ch.measured:>12.4g}  {'PASS' if ch.passed else 'FAIL'}")
    notes = [ch for ch in checks if not ch.counted]
    if notes:
        lines.append("")
        lines.append("errata (informational, not counted)")
        for ch in notes:
            lines.append(f"{ch.name:<{width}}  {'':>10}  {ch.measured:>12.4g}  INFO")
    failed = [ch for ch in counted if not ch.passed]
    lines.append("")
    lines.append(f"{len(counted) - len(failed)}/{len(counted)} checks passed")
    if failed:
        lines.append("failures:")
        lines.extend(f"  {ch.name} (measured {ch.measured:.4g}, tolerance {ch.tol:.3g})" for ch in failed[:20])
    return "\n".join(lines) + "\n", failed


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    c = resolve(args, parser)
    cmd = args.command
    try:
        if cmd == "validate":
            from .validate import run_checks

            text, failed = validate_text(run_checks(c["seed"], c["inject-fault"]))
            emit(text, c["out"])
            return EXIT_FAIL if failed else EXIT_OK
        if cmd == "wigner":
            header, rows, failures = run_wigner(c)
        elif cmd in ("sdu-check", "superchannel"):
            header, rows, failures = run_report(cmd, c)
        else:
            header, rows, failures = run_sweep(cmd, c)
    except (ValueError, RangeError) as exc:
        print(f"srumetrology {cmd}: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    emit(render(header, rows, c["format"]), c["out"])
    if failures:
        print(f"srumetrology {cmd}: {failures} check(s) failed", file=sys.stderr)
        if c["strict"]:
            return EXIT_FAIL
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
