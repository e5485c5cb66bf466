"""``bargmann <suite> [--config FILE] [--seed N] [--out DIR] [--tolerance-scale X]``.

Exit codes: 0 when every check passes, 1 when any check fails (the report is
still written), 2 for usage or configuration errors.
"""

from __future__ import annotations

import argparse
import sys

from .config import SUITES, ConfigError, build_config, load_config_file
from .suites import run_suite

EXIT_PASS, EXIT_FAIL, EXIT_USAGE = 0, 1, 2


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="bargmann", description="Run a symmetry invariant suite and write a JSON report.")
    p.add_argument("suite", choices=SUITES)
    p.add_argument("--config", help="JSON scenario file; missing keys take the documented defaults")
    p.add_argument("--seed", type=int, help="overrides the config seed")
    p.add_argument("--out", help="output directory (overrides the config 'out')")
    p.add_argument("--tolerance-scale", type=float, default=1.0, help="multiplies every tolerance")
    p.add_argument("--quiet", action="store_true", help="suppress the per-check summary")
    return p


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        raw = load_config_file(args.config) if args.config else {}
        cfg = build_config(args.suite, raw, seed=args.seed, out=args.out, tolerance_scale=args.tolerance_scale)
    except ConfigError as exc:
        print(f"bargmann: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    report = run_suite(cfg)
    if not args.quiet:
        for c in report.checks:
            status = "PASS" if c.passed else "FAIL"
            print(f"{status}  {c.name:<30s} measured={c.measured:.3e} predicted={c.predicted:.3e} tol={c.tolerance:.1e}")
        for flag in report.flags:
            print(f"note: {flag}")
        print(f"{report.suite}: {'pass' if report.passed else 'fail'} ({report.wall_clock_s:.1f} s) -> {cfg['out']}")
    return EXIT_PASS if report.passed else EXIT_FAIL


if __name__ == "__main__":
    sys.exit(main())
