"""Command-line interface: ``mfxwl analyze | synth | validate``.

Exit codes: 0 ok, 2 I/O, 3 config, 4 numerical, 5 validation failure.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from . import __version__, _accel
from .errors import ConfigError, InputError, MfxwlError
from .pipeline import AnalysisConfig, read_manifest, run_files
from .signal_io import write_columns

EXIT_VALIDATION = 5


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise ConfigError(f"{self.prog}: {message}")


def _pair(text: str) -> tuple[float, float]:
    parts = text.replace(":", ",").split(",")
    if len(parts) != 2:
        raise argparse.ArgumentTypeError(f"expected LO,HI, got {text!r}")
    try:
        return float(parts[0]), float(parts[1])
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected numbers, got {text!r}") from None


def _int_pair(text: str) -> tuple[int, int]:
    lo, hi = _pair(text)
    if lo != int(lo) or hi != int(hi):
        raise argparse.ArgumentTypeError(f"fit range must be integers, got {text!r}")
    return int(lo), int(hi)


def _column(text: str):
    return int(text) if text.lstrip("-").isdigit() else text


def build_parser() -> argparse.ArgumentParser:
    ap = _Parser(prog="mfxwl", description="Joint multifractal analysis based on wavelet leaders.")
    ap.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = ap.add_subparsers(dest="command", required=True, parser_class=_Parser)

    an = sub.add_parser("analyze", help="analyze a pair of series stored as CSV")
    an.add_argument("x_path", nargs="?")
    an.add_argument("y_path", nargs="?")
    an.add_argument("--manifest", help="re-run the analysis recorded in a manifest.json")
    an.add_argument("--column", type=_column, help="column (index or name) for both inputs")
    an.add_argument("--x-column", type=_column)
    an.add_argument("--y-column", type=_column)
    an.add_argument("--header", action="store_true", default=None, help="first row is a header")
    an.add_argument("--delimiter", default=None)
    an.add_argument("--p-range", type=_pair, help="LO,HI (default -4,4)")
    an.add_argument("--q-range", type=_pair, help="LO,HI (default -4,4)")
    an.add_argument("--step", type=float)
    an.add_argument("--fit-range", type=_int_pair, help="J_LO,J_HI (default 3,J-3)")
    an.add_argument("--boundary", choices=["clamp", "discard"])
    an.add_argument("--fd-scheme", choices=["central", "forward"])
    an.add_argument("--epsilon", type=float, help="floor leaders at this value")
    an.add_argument("--transform", choices=["none", "returns", "volatility"])
    an.add_argument("--no-integrate", action="store_true", default=None,
                    help="analyze the inputs as paths instead of integrating them first")
    an.add_argument("--align", choices=["truncate_head", "truncate_tail"])
    an.add_argument("--out", required=True, help="output directory")

    sy = sub.add_parser("synth", help="generate a synthetic pair")
    sy.add_argument("kind", choices=["cascade", "bfbm"])
    sy.add_argument("--p-x", type=float, default=0.3)
    sy.add_argument("--p-y", type=float, default=None, help="defaults to --p-x")
    sy.add_argument("--iterations", type=int, default=16)
    sy.add_argument("--hxx", type=float, default=0.5)
    sy.add_argument("--hyy", type=float, default=0.8)
    sy.add_argument("--rho", type=float, default=0.3)
    sy.add_argument("--n", type=int, default=1 << 16)
    sy.add_argument("--seed", type=int, default=0)
    sy.add_argument("--series", choices=["increments", "path"], default="increments",
                    help="bfbm output: increments (default, analyze as-is) or paths (analyze with --no-integrate)")
    sy.add_argument("--header", action="store_true", help="write an x,y header row")
    sy.add_argument("--out", required=True, help="output CSV path; a .json sidecar is written next to it")

    va = sub.add_parser("validate", help="reproduce the synthetic benchmarks and report pass/fail")
    va.add_argument("--quick", action="store_true", help="fewer bFBM realizations and leader trials")
    va.add_argument("--normalization", choices=["l1", "l2"], default="l1",
                    help="wavelet normalization; l2 is a negative control that must fail")
    va.add_argument("--json", dest="json_path", help="also write the report as JSON")
    return ap


def _config_from_args(args) -> AnalysisConfig:
    kw = {}
    for name in ("p_range", "q_range", "step", "fit_range", "boundary", "fd_scheme", "epsilon",
                 "transform", "align", "header", "delimiter"):
        v = getattr(args, name)
        if v is not None:
            kw[name] = v
    if args.no_integrate:
        kw["integrate"] = False
    if args.column is not None:
        kw["x_column"] = kw["y_column"] = args.column
    if args.x_column is not None:
        kw["x_column"] = args.x_column
    if args.y_column is not None:
        kw["y_column"] = args.y_column
    kw["out"] = args.out
    return AnalysisConfig(**kw)


def cmd_analyze(args) -> int:
    if args.manifest:
        cfg, xp, yp = read_manifest(args.manifest)
        cfg.out = args.out
    else:
        if not args.x_path or not args.y_path:
            raise ConfigError("analyze needs X_PATH and Y_PATH (or --manifest)")
        cfg, xp, yp = _config_from_args(args), args.x_path, args.y_path
    an = run_files(xp, yp, cfg, args.out)
    d = an.diagonal
    print(f"analyzed N={an.pair.length} scales={list(map(int, an.table.scales))} fit_range={an.fit_range}")
    if "a" in an.plane:
        p = an.plane
        print(f"plane fit: zeta = {p['a']:.4f} p + {p['b']:.4f} q + {p['c']:.4f}  (r2={p['r2']:.4f})")
    i2 = np.flatnonzero(np.isclose(d.q_values, 2.0))
    if i2.size:
        print(f"zeta(2,2) = {d.zeta[i2[0]]:.4f}")
    print(f"artifacts written to {args.out}")
    return 0


def cmd_synth(args) -> int:
    from .synth import BfbmSpec, CascadeSpec, bfbm, bfgn, binomial_measure

    out = Path(args.out)
    out.parent.mkdir(parents=True, exist_ok=True)
    if args.kind == "cascade":
        p_y = args.p_x if args.p_y is None else args.p_y
        x = binomial_measure(CascadeSpec(args.p_x, args.iterations)).values
        y = binomial_measure(CascadeSpec(p_y, args.iterations)).values
        meta = {"kind": "cascade", "p_x": args.p_x, "p_y": p_y, "iterations": args.iterations,
                "series": "measure", "analyze_hint": "default (inputs are integrated)"}
    else:
        spec = BfbmSpec(args.hxx, args.hyy, args.rho, args.n, args.seed)
        if args.series == "path":
            pair = bfbm(spec)
            x, y = pair.x.values, pair.y.values
            hint = "--no-integrate"
        else:
            x, y = bfgn(spec)
            hint = "default (inputs are integrated)"
        meta = {"kind": "bfbm", "H_xx": spec.H_xx, "H_yy": spec.H_yy, "rho": spec.rho, "n": spec.n,
                "seed": spec.seed, "series": args.series, "method": "circulant embedding",
                "analyze_hint": hint}
    if args.header:
        write_columns(out, [x, y], ["x", "y"])
    else:
        with out.open("w", encoding="utf-8") as fh:
            for a, b in zip(x, y):
                fh.write(f"{float(a)!r},{float(b)!r}\n")
    meta.update(columns=["x", "y"], header=bool(args.header), rows=int(len(x)), tool_version=__version__)
    out.with_suffix(".json").write_text(json.dumps(meta, indent=2, sort_keys=True) + "\n", encoding="utf-8")
    print(f"wrote {len(x)} rows to {out}")
    return 0


def cmd_validate(args) -> int:
    from .validation import format_report, run_all

    checks = run_all(args.normalization, quick=args.quick)
    print(format_report(checks))
    if args.json_path:
        Path(args.json_path).write_text(
            json.dumps([c.__dict__ for c in checks], indent=2) + "\n", encoding="utf-8"
        )
    return 0 if all(c.passed for c in checks) else EXIT_VALIDATION


def main(argv=None) -> int:
    _accel.configure_threads()
    try:
        args = build_parser().parse_args(argv)
        handler = {"analyze": cmd_analyze, "synth": cmd_synth, "validate": cmd_validate}[args.command]
        return handler(args)
    except MfxwlError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.exit_code
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return InputError.exit_code


if __name__ == "__main__":
    sys.exit(main())
