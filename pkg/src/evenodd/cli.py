"""Command-line entry point.

Exit codes: 0 success, 1 configuration or I/O error, 2 numerical failure,
3 partial result (some sweep points refused near a critical point).
"""
from __future__ import annotations

import argparse
import logging
import sys

from .config import load_config
from .exceptions import ConfigError, EvenOddError

EXIT_OK, EXIT_CONFIG, EXIT_NUMERIC, EXIT_PARTIAL = 0, 1, 2, 3

log = logging.getLogger("evenodd")


def _cmd_sweep(args) -> int:
    from .sweep import emit_outputs, run_sweep

    cfg = load_config(args.config)
    if args.workers is not None:
        cfg["output"]["workers"] = args.workers
    table = run_sweep(cfg)
    paths = emit_outputs(table, args.out)
    for path in paths:
        print(path)
    counts = {}
    for row in table.rows:
        counts[row.status] = counts.get(row.status, 0) + 1
    summary = ", ".join(f"{k}={v}" for k, v in sorted(counts.items())) or "no rows"
    print(f"{len(table.rows)} rows ({summary})", file=sys.stderr)
    return table.exit_code


def _cmd_oracle(args) -> int:
    from .sweep import run_oracle

    code, text = run_oracle(load_config(args.config), args.out)
    sys.stdout.write(text)
    return code


def _cmd_check(args) -> int:
    from .acceptance import CRITERIA, run_criterion

    wanted = None
    if args.only:
        try:
            wanted = {int(v) for v in args.only.split(",")}
        except ValueError as exc:
            raise ConfigError(f"--only expects comma-separated integers, got {args.only!r}") from exc
    failed = 0
    for number in sorted(CRITERIA):
        if wanted is not None and number not in wanted:
            continue
        result = run_criterion(number)
        print(result.line())
        if args.verbose:
            for item in result.checks:
                print(f"    {item.line()}")
        failed += not result.passed
    return EXIT_OK if failed == 0 else EXIT_NUMERIC


def _cmd_alpha(args) -> int:
    from .asymptotics import geometric_alpha, lattice_alpha

    dims = range(1, args.d + 1) if args.all else [args.d]
    for d in dims:
        value = geometric_alpha(d=d, resolution=args.resolution)
        line = f"d={d} alpha={value:.10f}"
        if args.size:
            line += f" alpha_lattice(L={args.size})={lattice_alpha([1.0] * d, [args.size] * d):.10f}"
        print(line)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="evenodd", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    sub = parser.add_subparsers(dest="verb", required=True)

    p = sub.add_parser("sweep", help="run a configured sweep and write CSV plus a plot script")
    p.add_argument("config")
    p.add_argument("--out", help="output directory (overrides [output] dir)")
    p.add_argument("--workers", type=int, help="worker processes (overrides [output] workers)")
    p.set_defaults(func=_cmd_sweep)

    p = sub.add_parser("oracle", help="compare Gaussian and truncated-Fock entropies")
    p.add_argument("config")
    p.add_argument("--out", help="also write oracle.csv here")
    p.set_defaults(func=_cmd_oracle)

    p = sub.add_parser("check", help="run the acceptance criteria")
    p.add_argument("--only", help="comma-separated criterion numbers")
    p.set_defaults(func=_cmd_check)

    p = sub.add_parser("alpha", help="print geometric entropy factors")
    p.add_argument("--d", type=int, required=True, help="lattice dimension")
    p.add_argument("--all", action="store_true", help="print every dimension up to d")
    p.add_argument("--resolution", type=int, default=1024)
    p.add_argument("--size", type=int, help="also print the k-sum on an L^d array")
    p.set_defaults(func=_cmd_alpha)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(
        level=logging.INFO if args.verbose else logging.WARNING,
        format="%(levelname)s %(name)s: %(message)s",
    )
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except OSError as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except EvenOddError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
