"""Command line: one subcommand per experiment.

Exit codes: 0 when every check passes, 1 when a check fails, 2 for configuration
or precision/quadrature budget errors.
"""
from __future__ import annotations

import argparse
import logging
import sys
from typing import Optional, Sequence

from .experiments import EXPERIMENTS, make_config, run_experiment
from .quadrature import QuadratureBudgetError
from .reporting import PRECISIONS, ConfigError, ReportError, emit_report, parse_config_text
from .wavepacket import PhasePrecisionError

log = logging.getLogger("boussinesq_lab")


def _u64(text: str) -> int:
    v = int(text, 0)
    if not (0 <= v < 2 ** 64):
        raise argparse.ArgumentTypeError("seed must be an unsigned 64-bit integer")
    return v


def _positive_int(text: str) -> int:
    v = int(text)
    if v < 1:
        raise argparse.ArgumentTypeError("must be >= 1")
    return v


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="boussinesq-lab", description=__doc__,
                                     formatter_class=argparse.RawDescriptionHelpFormatter)
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="experiment", required=True, metavar="EXPERIMENT")
    for name, exp in EXPERIMENTS.items():
        params = ", ".join(f"{k}={v.default!r}" if not isinstance(v.default, tuple)
                           else f"{k}={','.join(map(str, v.default))}" for k, v in exp.schema.items())
        p = sub.add_parser(name, help=exp.description, description=f"{exp.description}.\n\nparameters: {params}")
        p.add_argument("--config", metavar="PATH", help="key=value parameter file")
        p.add_argument("--set", metavar="KEY=VALUE", action="append", default=[],
                       help="override one parameter (repeatable)")
        p.add_argument("--out", metavar="DIR", default="results", help="output directory (default: results)")
        p.add_argument("--seed", type=_u64, default=None, metavar="U64")
        p.add_argument("--threads", type=_positive_int, default=1, metavar="K")
        p.add_argument("--precision", choices=PRECISIONS, default=None)
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(message)s")
    try:
        raw = {}
        if args.config:
            try:
                with open(args.config, encoding="utf-8") as fh:
                    raw.update(parse_config_text(fh.read()))
            except OSError as exc:
                raise ConfigError(f"cannot read config: {exc}", "config") from None
        for item in args.set:
            if "=" not in item:
                raise ConfigError(f"expected KEY=VALUE, got {item!r}", "set")
            k, v = item.split("=", 1)
            raw[k.strip()] = v.strip()
        cfg = make_config(args.experiment, raw, seed=args.seed, precision=args.precision,
                          out_dir=args.out, threads=args.threads)
        log.info("running %s (%s)", cfg.name, cfg.digest)
        result = run_experiment(cfg)
        paths = emit_report(result)
    except ConfigError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return 2
    except (PhasePrecisionError, QuadratureBudgetError) as exc:
        print(f"budget error: {exc}", file=sys.stderr)
        return 2
    except ReportError as exc:
        print(f"report error: {exc}", file=sys.stderr)
        return 2
    with open(paths[-1], encoding="utf-8") as fh:  # the .txt summary sorts last
        sys.stdout.write(fh.read())
    return 0 if result.passed else 1


if __name__ == "__main__":
    raise SystemExit(main())
