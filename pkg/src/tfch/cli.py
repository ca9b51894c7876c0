"""Command line: ``tfch run``, ``tfch study``, ``tfch verify-kernels``."""
from __future__ import annotations

import argparse
import logging
import sys

from . import _accel
from .sim.config import ConfigError, load_config
from .sim.driver import format_study, run_convergence_study, run_simulation
from .stepper import StepFailure, Variant


def _common(p: argparse.ArgumentParser):
    p.add_argument("--seed", type=int, help="override the config seed")
    p.add_argument("--out-dir", help="override the config output directory")
    p.add_argument("--variant", choices=[v.value for v in Variant], help="extrapolation variant")


def _load(args):
    cfg = load_config(args.config)
    return cfg.with_overrides(seed=args.seed, out_dir=args.out_dir,
                              variant=Variant.parse(args.variant) if args.variant else None)


def cmd_run(args) -> int:
    cfg = _load(args)

    def progress(rec):
        if args.verbose and rec.n % 50 == 0:
            print(f"n={rec.n:6d} t={rec.t:.6g} dt={rec.dt:.3e} E={rec.energy:.10g} "
                  f"drift={rec.mass_drift:.1e} iters={rec.picard_iters}", file=sys.stderr)

    res = run_simulation(cfg, progress=progress)
    last = res.records[-1]
    print(f"{'completed' if res.ok else 'FAILED'}: {res.state.n} steps to t={res.state.time:.6g}, "
          f"E={last.energy:.10g}, max mass drift={max(r.mass_drift for r in res.records):.2e}, "
          f"outputs in {res.out_dir}")
    if not res.ok:
        print(res.message, file=sys.stderr)
    return res.status


def cmd_study(args) -> int:
    cfg = _load(args)
    try:
        rows = run_convergence_study(cfg, args.levels, workers=args.workers)
    except StepFailure as exc:
        print(f"study failed: {exc}", file=sys.stderr)
        return 1
    print(format_study(rows))
    return 0


def cmd_verify(args) -> int:
    from .kernel_checks import run_all

    results = run_all(samples=args.samples, seed=args.seed or 0)
    for r in results:
        print(r.line())
    return 0 if all(r.passed for r in results) else 1


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="tfch", description=__doc__)
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("run", help="run one simulation")
    p.add_argument("config")
    _common(p)
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("study", help="temporal convergence study by step halving")
    p.add_argument("config")
    p.add_argument("--levels", type=int, default=5)
    p.add_argument("--workers", type=int, default=1)
    _common(p)
    p.set_defaults(func=cmd_study)

    p = sub.add_parser("verify-kernels", help="check kernel weights against quadrature oracles")
    p.add_argument("--samples", type=int, default=100)
    p.add_argument("--seed", type=int)
    p.set_defaults(func=cmd_verify)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    logging.getLogger(__name__).debug("kernel backend: %s", _accel.BACKEND)
    try:
        return args.func(args)
    except (ConfigError, OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
