"""Command-line entry point: ``swflood run|validate|bench|info``.

Exit status: 0 success, 1 configuration or usage error, 2 numerical abort,
3 when a validation case runs but misses its threshold.
"""

from __future__ import annotations

import argparse
import sys

from .errors import ConfigError, NumericalAbort
from .stepper import KERNEL_IDS, STAGES

EXIT_OK, EXIT_CONFIG, EXIT_ABORT, EXIT_FAILED = 0, 1, 2, 3


class _Parser(argparse.ArgumentParser):
    """argparse exits with 2 on usage errors; 2 is reserved for numerical aborts here."""

    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_CONFIG, f"{self.prog}: error: {message}\n")


def _positive_int(s):
    try:
        v = int(s)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected an integer, got {s!r}") from None
    if v < 1:
        raise argparse.ArgumentTypeError(f"must be at least 1, got {v}")
    return v


def _engine_flags(p, *, seed=True):
    p.add_argument("--workers", type=_positive_int, help="threads for the compiled kernels")
    p.add_argument("--no-skip", action="store_true", help="compute every block, wet or dry")
    p.add_argument("--block-size", type=_positive_int, metavar="B", help="block edge length in cells")
    if seed:
        p.add_argument("--seed", type=int, help="seed for generated terrains")


def build_parser() -> argparse.ArgumentParser:
    from .validation.cases import CASES

    ap = _Parser(prog="swflood", description="Shallow-water flood simulation with wet-block skipping.")
    sub = ap.add_subparsers(dest="command", metavar="COMMAND", parser_class=_Parser)
    sub.required = True

    p = sub.add_parser("run", help="simulate a scenario, writing snapshots and a report")
    p.add_argument("scenario", help="scenario TOML file")
    p.add_argument("--out", default="out", metavar="DIR", help="output directory (default: out)")
    p.add_argument("--quiet", action="store_true", help="no per-snapshot progress lines")
    _engine_flags(p)

    p = sub.add_parser("validate", help="run a named validation case")
    p.add_argument("case", choices=sorted(CASES), metavar="CASE", help=", ".join(sorted(CASES)))
    p.add_argument("--resolution", type=_positive_int, metavar="N", help="grid size override")
    p.add_argument("--steps", type=_positive_int, help="step count override")
    p.add_argument("--out", metavar="DIR", help="write the report as text and CSV into DIR")
    _engine_flags(p)

    p = sub.add_parser("bench", help="time a scenario with block skipping off and on")
    p.add_argument("scenario", help="scenario TOML file")
    p.add_argument("--steps", type=_positive_int, default=20, help="steps per mode (default: 20)")
    p.add_argument("--out", metavar="DIR", help="write the timings as JSON into DIR")
    _engine_flags(p)

    p = sub.add_parser("info", help="print grid statistics of an ESRI ASCII terrain")
    p.add_argument("terrain")
    return ap


def _cmd_run(args) -> int:
    from .scenario import load_scenario, run_scenario

    cfg = load_scenario(args.scenario, seed=args.seed)
    cfg = cfg.with_overrides(workers=args.workers, skip=False if args.no_skip else None,
                             block_size=args.block_size)
    log = None if args.quiet else print
    res = run_scenario(cfg, args.out, log=log)
    led = res.ledger
    print(f"steps {res.steps}, wall {res.wall_seconds:.2f} s, final max|U| {res.max_speed:.3e} m/s")
    print(f"mass ledger: residual {led.residual:.3e} m3 (relative {led.relative:.2e}) "
          f"{'balanced' if led.balanced else 'NOT balanced'}")
    print(res.timings.table())
    print(f"snapshots and report written to {res.out_dir}")
    return EXIT_OK


def _cmd_validate(args) -> int:
    from .validation.cases import run_case

    kw = {}
    if args.steps:
        kw["steps"] = args.steps
    if args.workers:
        kw["workers"] = args.workers
    if args.no_skip:
        kw["skip"] = False
    if args.block_size:
        kw["block_size"] = args.block_size
    rep = run_case(args.case, args.resolution, seed=args.seed, **kw)
    print(rep.format())
    if args.out:
        from pathlib import Path

        out = Path(args.out)
        out.mkdir(parents=True, exist_ok=True)
        (out / f"{rep.name}.txt").write_text(rep.format() + "\n")
        (out / f"{rep.name}.csv").write_text(rep.to_csv())
    return EXIT_OK if rep.passed else EXIT_FAILED


def _cmd_bench(args) -> int:
    from .scenario import bench_scenario, load_scenario

    cfg = load_scenario(args.scenario, seed=args.seed)
    cfg = cfg.with_overrides(workers=args.workers, block_size=args.block_size)
    res = bench_scenario(cfg, args.steps)
    a, b = res["noskip"], res["skip"]
    print(f"{cfg.terrain.nx}x{cfg.terrain.ny} cells, block {cfg.block_size}, {args.steps} steps, "
          f"workers {cfg.workers}")
    print(f"no skip   {a['wall']:9.3f} s")
    print(f"skip      {b['wall']:9.3f} s")
    print(f"speedup   {res['speedup']:9.2f}x   results identical: {res['identical']}")
    sa, sb = a["timings"].shares(), b["timings"].shares()
    print(f"{'stage':<12} {'kernel':<6} {'noskip %':>9} {'skip %':>8}")
    for k in STAGES:
        print(f"{k:<12} {KERNEL_IDS[k]:<6} {100 * sa[k]:>9.1f} {100 * sb[k]:>8.1f}")
    if args.out:
        import json
        from pathlib import Path

        out = Path(args.out)
        out.mkdir(parents=True, exist_ok=True)
        doc = {"steps": args.steps, "speedup": res["speedup"], "identical": res["identical"],
               "noskip_seconds": a["wall"], "skip_seconds": b["wall"],
               "noskip_percent": {k: 100 * v for k, v in sa.items()},
               "skip_percent": {k: 100 * v for k, v in sb.items()}}
        (out / "bench.json").write_text(json.dumps(doc, indent=2) + "\n")
    return EXIT_OK


def _cmd_info(args) -> int:
    from .raster import NODATA_BED, load_terrain

    ter = load_terrain(args.terrain)
    b = ter.b
    nodata = b == NODATA_BED
    land = b[~nodata]
    x0, y0 = ter.origin
    print(f"grid        {ter.nx} x {ter.ny} cells, cellsize {ter.h:g} m")
    print(f"extent      x [{x0:g}, {x0 + ter.nx * ter.h:g}]  y [{y0:g}, {y0 + ter.ny * ter.h:g}]")
    print(f"area        {ter.nx * ter.ny * ter.h ** 2:.6e} m2")
    if land.size:
        print(f"elevation   min {land.min():.3f}  max {land.max():.3f}  mean {land.mean():.3f} m")
    print(f"nodata      {int(nodata.sum())} cells")
    print(f"blocks(16)  {-(-ter.nx // 16)} x {-(-ter.ny // 16)}")
    return EXIT_OK


_COMMANDS = {"run": _cmd_run, "validate": _cmd_validate, "bench": _cmd_bench, "info": _cmd_info}


def main(argv=None) -> int:
    try:
        args = build_parser().parse_args(argv)
    except SystemExit as exc:
        return exc.code if isinstance(exc.code, int) else EXIT_CONFIG
    try:
        return _COMMANDS[args.command](args)
    except NumericalAbort as exc:
        print(f"swflood: numerical abort: {exc}", file=sys.stderr)
        return EXIT_ABORT
    except (ConfigError, OSError) as exc:
        print(f"swflood: error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except FloatingPointError as exc:
        print(f"swflood: numerical abort: {exc}", file=sys.stderr)
        return EXIT_ABORT


if __name__ == "__main__":
    sys.exit(main())
