"""Command line entry point: ``sweep``, ``paper-figures`` and ``selftest``.

A ``--config`` file holds ``key = value`` lines named like the long options
(``snr = -5:5:20``, ``trials = 50``); flags given on the command line win.
"""
from __future__ import annotations

import argparse
import configparser
import sys
from pathlib import Path

import numpy as np

from .experiments import METHODS, SweepSpec, UsageError, run_figures, run_sweep, write_csv

EXIT_USAGE = 2
EXIT_IO = 3

# option name -> (converter, default); defaults are applied after the config file
SWEEP_OPTIONS = {
    "method": (str, "tlais"),
    "nt": (int, 32),
    "k": (int, 4),
    "l": (int, 12),
    "snr": ("floats", "-5:5:20"),
    "bdac": ("ints", "8"),
    "bps": ("ints", "4"),
    "trials": (int, 100),
    "mc_samples": (int, 10_000),
    "seed": (int, 42),
    "out": (str, None),
    "workers": (int, 1),
    "record_timing": ("bool", False),
}
FIGURE_OPTIONS = {
    "out_dir": (str, None),
    "nt": (int, 32),
    "k": (int, 4),
    "l": (int, 12),
    "trials": (int, 20),
    "mc_samples": (int, 10_000),
    "seed": (int, 42),
    "workers": (int, 1),
}


def parse_grid(text, kind=float):
    """``"a:step:b"`` (inclusive) or a comma-separated list."""
    text = str(text).strip()
    if ":" in text:
        parts = text.split(":")
        if len(parts) != 3:
            raise UsageError(f"range {text!r} must look like start:step:stop")
        start, step, stop = (float(p) for p in parts)
        if step <= 0 or stop < start:
            raise UsageError(f"range {text!r} needs step > 0 and stop >= start")
        n = int(np.floor((stop - start) / step + 1e-9)) + 1
        vals = [start + i * step for i in range(n)]
    else:
        vals = [float(v) for v in text.split(",") if v.strip()]
    if not vals:
        raise UsageError("empty grid")
    if kind is int:
        if any(v != int(v) for v in vals):
            raise UsageError(f"{text!r} must contain integers")
        return tuple(int(v) for v in vals)
    return tuple(round(v, 12) for v in vals)


def _convert(name, conv, value):
    if value is None:
        return None
    try:
        if conv == "floats":
            return parse_grid(value, float)
        if conv == "ints":
            return parse_grid(value, int)
        if conv == "bool":
            if isinstance(value, bool):
                return value
            low = str(value).strip().lower()
            if low not in ("1", "0", "true", "false", "yes", "no", "on", "off"):
                raise ValueError(value)
            return low in ("1", "true", "yes", "on")
        return conv(value)
    except ValueError as exc:
        raise UsageError(f"bad value for {name}: {value!r}") from exc


def read_config(path) -> dict:
    """``key = value`` pairs; keys are normalized to option names (dashes to underscores)."""
    parser = configparser.ConfigParser()
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise OSError(f"cannot read config {path}: {exc.strerror or exc}") from exc
    try:
        parser.read_string("[config]\n" + text)
    except configparser.Error as exc:
        raise UsageError(f"malformed config {path}: {exc}") from exc
    return {k.replace("-", "_"): v for k, v in parser["config"].items()}


def resolve(options, args, config) -> dict:
    """Merge defaults, config file and explicit flags, in increasing priority."""
    unknown = set(config) - set(options)
    if unknown:
        raise UsageError(f"unknown config keys: {', '.join(sorted(unknown))}")
    out = {}
    for name, (conv, default) in options.items():
        flag = getattr(args, name, None)
        value = flag if flag is not None else config.get(name, default)
        out[name] = _convert(name, conv, value)
    return out


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="hybrid-secrecy",
                                description="Secure hybrid precoding sweeps with low-resolution DACs.")
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("sweep", help="run one method over an SNR / bit-width grid")
    s.add_argument("--config")
    s.add_argument("--method", choices=METHODS)
    s.add_argument("--nt", type=int)
    s.add_argument("--k", type=int)
    s.add_argument("--l", type=int)
    s.add_argument("--snr", help="start:step:stop or comma list, in dB")
    s.add_argument("--bdac")
    s.add_argument("--bps")
    s.add_argument("--trials", type=int)
    s.add_argument("--mc-samples", dest="mc_samples", type=int)
    s.add_argument("--seed", type=int)
    s.add_argument("--out")
    s.add_argument("--workers", type=int)
    s.add_argument("--record-timing", dest="record_timing", action="store_const", const=True,
                   help="fill wall_ms (makes the CSV non-reproducible)")

    f = sub.add_parser("paper-figures", help="run the four figure sweeps at desk scale")
    f.add_argument("--config")
    f.add_argument("--out-dir", dest="out_dir")
    f.add_argument("--nt", type=int)
    f.add_argument("--k", type=int)
    f.add_argument("--l", type=int)
    f.add_argument("--trials", type=int)
    f.add_argument("--mc-samples", dest="mc_samples", type=int)
    f.add_argument("--seed", type=int)
    f.add_argument("--workers", type=int)

    t = sub.add_parser("selftest", help="run the property and oracle test suites")
    t.add_argument("--full", action="store_true", help="include the slow acceptance suite")
    return p


def _fix_negative_values(argv):
    # "--snr -5:5:20" would otherwise be read as an unknown option
    out = list(argv)
    for i, a in enumerate(out[:-1]):
        if a in ("--snr", "--bdac", "--bps") and out[i + 1].startswith("-"):
            out[i] = f"{a}={out[i + 1]}"
            out[i + 1] = None
    return [a for a in out if a is not None]


def _progress(done, total):
    if done == total or done % max(1, total // 20) == 0:
        print(f"  {done}/{total}", file=sys.stderr, flush=True)


def cmd_sweep(args) -> int:
    config = read_config(args.config) if args.config else {}
    o = resolve(SWEEP_OPTIONS, args, config)
    spec = SweepSpec(o["method"], o["snr"], o["bdac"], o["bps"], o["trials"], o["seed"],
                     o["mc_samples"], o["out"], o["nt"], o["k"], o["l"], o["workers"],
                     o["record_timing"])
    rows = run_sweep(spec, _progress)
    if spec.out is None:
        write_csv(rows, sys.stdout)
    return 0


def cmd_figures(args) -> int:
    config = read_config(args.config) if args.config else {}
    o = resolve(FIGURE_OPTIONS, args, config)
    if not o["out_dir"]:
        raise UsageError("--out-dir is required")
    for path in run_figures(o["out_dir"], o["trials"], o["seed"], o["mc_samples"], o["workers"],
                            o["nt"], o["k"], o["l"], progress=_progress):
        print(path)
    return 0


def cmd_selftest(args) -> int:
    tests = Path(__file__).resolve().parents[2] / "tests"
    if not tests.is_dir():
        print(f"error: test suite not found at {tests}", file=sys.stderr)
        return EXIT_IO
    import pytest
    extra = [] if args.full else ["-m", "not slow"]
    return int(pytest.main([str(tests), "-q", *extra]))


def main(argv=None) -> int:
    argv = sys.argv[1:] if argv is None else argv
    parser = build_parser()
    try:
        args = parser.parse_args(_fix_negative_values(argv))
    except SystemExit as exc:
        return int(exc.code) if exc.code else 0
    handler = {"sweep": cmd_sweep, "paper-figures": cmd_figures, "selftest": cmd_selftest}
    try:
        return handler[args.command](args)
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except OSError as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
