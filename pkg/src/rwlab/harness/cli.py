"""``lab`` command line: run experiments, evaluate weight constants and operators."""
from __future__ import annotations

import argparse
import csv
import io
import sys
from pathlib import Path

import numpy as np

from ..grid import Grid, SampledFunction
from ..operators import Backend, Op, hilbert, modulated_hilbert
from ..weights import CONSTANTS, build_weight
from .dsl import EXPERIMENTS, ParseError, parse_spec, parse_weight
from .experiments import TITLES, run
from .report import EXIT_OK, EXIT_PARSE


def _parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="lab", description=__doc__)
    sub = ap.add_subparsers(dest="cmd", required=True)

    r = sub.add_parser("run", help="run one experiment and write rows.csv / summary.json")
    r.add_argument("experiment", help="experiment id (e1..e7)")
    r.add_argument("--config", help="config file; defaults apply when omitted")
    r.add_argument("--out", required=True, help="output directory")
    r.add_argument("--grid-N", type=int, dest="grid_n", help="override grid size")
    r.add_argument("--seed", type=int, help="override seed")
    r.add_argument("--plots", action="store_true", help="write plots/*.svg (needs matplotlib)")
    r.add_argument("--no-doubling", action="store_true", help="skip the refined-grid trace")

    w = sub.add_parser("weights", help="weight utilities")
    wsub = w.add_subparsers(dest="wcmd", required=True)
    c = wsub.add_parser("constant", help="evaluate a weight constant")
    c.add_argument("name", choices=sorted(CONSTANTS))
    c.add_argument("--weight", required=True, help='weight expression, e.g. "power(0.5)"')
    c.add_argument("--q", type=float, default=2.0)
    c.add_argument("--grid-N", type=int, dest="grid_n", default=4096)
    c.add_argument("--L", type=float, default=8.0)
    c.add_argument("--stride", type=int)

    o = sub.add_parser("ops", help="apply an operator to sampled data")
    o.add_argument("op", help=f"one of {', '.join(x.value for x in Op)}, Hr")
    o.add_argument("--input", required=True, help="CSV with column f (and optionally x)")
    o.add_argument("--output", help="output CSV (stdout if omitted)")
    o.add_argument("--L", type=float, help="half length when the input has no x column")
    o.add_argument("--backend", choices=[b.value for b in Backend])
    o.add_argument("--r", type=float, default=0.0, help="modulation for Hr")

    sub.add_parser("list", help="list experiments")
    return ap


def _run(args) -> int:
    try:
        text = Path(args.config).read_text(encoding="utf-8") if args.config else \
            f"{args.experiment} {{ }}"
        spec = parse_spec(text, args.experiment)
    except ParseError as e:
        where = args.config or "<defaults>"
        print(f"{where}:{e.line}:{e.col}: {e.message}", file=sys.stderr)
        return EXIT_PARSE
    if args.grid_n is not None:
        n = args.grid_n
        if n < 2 or n & (n - 1):
            print(f"--grid-N must be a power of two, got {n}", file=sys.stderr)
            return EXIT_PARSE
    spec = spec.with_overrides(N=args.grid_n, seed=args.seed)
    report = run(spec, doubling=not args.no_doubling)
    report.write(args.out, plots=args.plots)
    s = report.summary_dict()
    print(f"{spec.experiment}: {s['cases']} cases ({s['vacuous_cases']} vacuous), "
          f"max ratio {s['max_ratio']:.6g}, max drift {s['max_drift']:.3g}")
    for v in report.violations:
        print(f"  violation: {v}")
    return report.exit_code


def _constant(args) -> int:
    try:
        node = parse_weight(args.weight)
    except ParseError as e:
        print(f"--weight:{e.line}:{e.col}: {e.message}", file=sys.stderr)
        return EXIT_PARSE
    w = build_weight(node, Grid(args.L, args.grid_n))
    val = CONSTANTS[args.name](w, args.q, args.stride)
    print(format(val, ".17g"))
    return EXIT_OK


def read_samples(path: str, L: float | None = None) -> SampledFunction:
    """Samples from a CSV with an ``f`` column and optionally ``x``.

    The grid is ``[-L, L)`` with ``L`` from ``--L`` or from ``x[0] = -L``.
    """
    with open(path, newline="") as fh:
        rows = list(csv.DictReader(fh))
    if not rows or "f" not in rows[0]:
        raise ValueError("input CSV needs a header with an 'f' column")
    f = np.array([complex(r["f"].replace(" ", "")) for r in rows])
    if not np.any(f.imag):
        f = f.real
    if L is None:
        if "x" not in rows[0]:
            raise ValueError("pass --L or include an x column")
        L = -float(rows[0]["x"])
    grid = Grid(L, len(f))
    if "x" in rows[0]:
        x = np.array([float(r["x"]) for r in rows])
        if not np.allclose(x, grid.x, rtol=0, atol=1e-9 * L):
            raise ValueError("x column is not the uniform grid on [-L, L)")
    return SampledFunction(grid, f)


def _ops(args) -> int:
    f = read_samples(args.input, args.L)
    if args.op.lower() == "hr":
        out = modulated_hilbert(f, args.r, args.backend)
    elif args.op.upper() == "H" and args.backend:
        out = hilbert(f, args.backend)
    else:
        out = Op.parse(args.op)(f)
    buf = io.StringIO()
    wr = csv.writer(buf, lineterminator="\n")
    if out.is_complex:
        wr.writerow(["x", "re", "im"])
        for x, v in zip(out.grid.x, out.samples):
            wr.writerow([format(x, ".17g"), format(v.real, ".17g"), format(v.imag, ".17g")])
    else:
        wr.writerow(["x", "value"])
        for x, v in zip(out.grid.x, out.samples):
            wr.writerow([format(x, ".17g"), format(v, ".17g")])
    if args.output:
        Path(args.output).write_text(buf.getvalue())
    else:
        sys.stdout.write(buf.getvalue())
    return EXIT_OK


def main(argv=None) -> int:
    args = _parser().parse_args(argv)
    if args.cmd == "run":
        if args.experiment not in EXPERIMENTS:
            print(f"unknown experiment {args.experiment!r}; see `lab list`", file=sys.stderr)
            return EXIT_PARSE
        return _run(args)
    if args.cmd == "weights":
        return _constant(args)
    if args.cmd == "ops":
        try:
            return _ops(args)
        except ValueError as e:
            print(f"lab ops: {e}", file=sys.stderr)
            return 1
    for e in EXPERIMENTS:
        print(f"{e}  {TITLES[e]}")
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
