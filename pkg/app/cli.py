# app/cli.py - isac-sim command line
"""
Command line entry point

    isac-sim run --config FILE --scheme gap-opc --drops 50 --seed 0 --out results/
    isac-sim verify --config FILE --trials 20000
    isac-sim sweep-kappa --values 5,10,15,20 --out results/
    isac-sim serve

Exit codes: 0 success, 1 usage / configuration / I/O error, 2 solver-failure
rate above 10% or a failed oracle verification.
"""

import argparse
import logging
import sys
from pathlib import Path
from typing import List, Optional, Sequence

from app.exceptions import ConfigError
from app.models.config import PAPER_SCALE, SystemConfig, load_config_file
from app.models.models import Scheme
from app.services import harness
from app.services.oracle import verify_drops
from app.services.streams import RandomStreams
from app.utils.logging import log_operation, setup_logging
from config.settings import settings

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_FAILURE = 2

MAX_FAILURE_RATE = 0.10


def _float_list(text: str) -> List[float]:
    try:
        return [float(item) for item in text.split(",") if item.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}")


def _int_list(text: str) -> List[int]:
    try:
        return [int(item) for item in text.split(",") if item.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}")


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", type=Path, help="key = value configuration file")
    common.add_argument("--seed", type=int, help="master seed (overrides the config file)")
    common.add_argument("--log-level", default=None, help="DEBUG, INFO, WARNING, ERROR")
    common.add_argument("--log-json", action="store_true", help="JSON log lines on stderr")
    common.add_argument("--paper-scale", action="store_true", help="M=80, N=3, K_d=5 layout (long-running)")

    parser = argparse.ArgumentParser(prog="isac-sim", description="Cell-free massive MIMO ISAC simulator")
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", parents=[common], help="Monte Carlo drops of one pipeline")
    run.add_argument("--scheme", required=True, choices=[s.value for s in Scheme])
    run.add_argument("--drops", type=int, help="number of drops")
    run.add_argument("--out", type=Path, default=None, help="output directory for CSV files")

    verify = sub.add_parser("verify", parents=[common], help="closed forms against Monte Carlo")
    verify.add_argument("--trials", type=int, default=20_000)
    verify.add_argument("--instances", type=int, default=3)
    verify.add_argument("--tolerance", type=float, default=0.03)

    sweep = sub.add_parser("sweep-kappa", parents=[common], help="mean min-SE against the MASR target")
    sweep.add_argument("--values", type=_float_list, required=True, help="comma-separated kappa values")
    sweep.add_argument("--schemes", default="gap-opc,gap-npc", help="comma-separated schemes")
    sweep.add_argument("--antennas", type=_int_list, default=None, help="comma-separated N values")
    sweep.add_argument("--mn", type=int, default=None, help="total antenna count M*N for --antennas")
    sweep.add_argument("--drops", type=int, help="number of drops per point")
    sweep.add_argument("--out", type=Path, default=None)

    serve = sub.add_parser("serve", parents=[common], help="start the evaluation service")
    serve.add_argument("--host", default=None)
    serve.add_argument("--port", type=int, default=None)

    return parser


def load_config(args: argparse.Namespace) -> SystemConfig:
    overrides = {}
    if args.seed is not None:
        overrides["seed"] = args.seed
    if args.paper_scale:
        overrides.update(PAPER_SCALE)
    if args.config is not None:
        return load_config_file(args.config, **overrides)
    return SystemConfig(**overrides)


def _check_failures(results) -> int:
    rate = harness.failure_rate(results)
    if rate > MAX_FAILURE_RATE:
        logger.error(f"Solver failure rate {rate:.1%} exceeds {MAX_FAILURE_RATE:.0%}")
        return EXIT_FAILURE
    return EXIT_OK


def cmd_run(args: argparse.Namespace, config: SystemConfig) -> int:
    if args.drops is not None and args.drops < 1:
        raise ConfigError("drops must be >= 1", field="drops")
    out = args.out or Path(settings.output_dir)

    with log_operation("run", logger, scheme=args.scheme, kappa=config.kappa):
        result = harness.run_experiment(config, args.scheme, drops=args.drops, threads=settings.threads)
        harness.emit_csv(result, out)

    if result.drops:
        summary = harness.summarize(result)
        print(
            f"{summary['scheme']}: mean min-SE {summary['mean_min_se']:.4f}, "
            f"95%-likely {summary['p95_likely_se']:.4f} bits/s/Hz "
            f"({summary['infeasible_drops']} infeasible of {summary['drops']})"
        )
    print(f"Results written to {out}")
    return _check_failures([result])


def cmd_verify(args: argparse.Namespace, config: SystemConfig) -> int:
    if args.trials < 1 or args.instances < 1:
        raise ConfigError("trials and instances must be >= 1")
    rng = RandomStreams(config.seed).generator("oracle")

    with log_operation("verify", logger, trials=args.trials):
        reports = verify_drops(config, args.instances, args.trials, rng, args.tolerance, workers=settings.threads)

    failed = 0
    for index, report in enumerate(reports):
        name, worst = report.worst
        mark = "✅" if report.passed else "❌"
        print(f"{mark} instance {index}: worst relative error {worst:.4f} ({name})")
        failed += not report.passed
    if failed:
        print(f"⚠️  {failed} of {len(reports)} instances exceed the {args.tolerance:.1%} tolerance")
        return EXIT_FAILURE
    print("🎉 All closed forms match the Monte Carlo estimates")
    return EXIT_OK


def cmd_sweep(args: argparse.Namespace, config: SystemConfig) -> int:
    schemes = [Scheme(name.strip()) for name in args.schemes.split(",") if name.strip()]
    out = args.out or Path(settings.output_dir)

    with log_operation("sweep-kappa", logger):
        results = harness.sweep_kappa(
            config,
            args.values,
            schemes=schemes,
            drops=args.drops,
            antennas=args.antennas,
            mn=args.mn,
            threads=settings.threads,
        )
        harness.emit_csv(results, out)

    for result in results:
        if result.drops:
            summary = harness.summarize(result)
            print(
                f"{summary['scheme']:8s} kappa={summary['kappa']:g} M={summary['M']} N={summary['N']}: "
                f"mean min-SE {summary['mean_min_se']:.4f}"
            )
    print(f"Results written to {out}")
    return _check_failures(results)


def cmd_serve(args: argparse.Namespace, config: SystemConfig) -> int:
    import uvicorn

    uvicorn.run(
        "app.main:app",
        host=args.host or settings.host,
        port=args.port or settings.port,
        log_config=None,
    )
    return EXIT_OK


COMMANDS = {
    "run": cmd_run,
    "verify": cmd_verify,
    "sweep-kappa": cmd_sweep,
    "serve": cmd_serve,
}


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        # argparse exits 2 on usage errors; 2 is reserved for solver failures
        return EXIT_OK if e.code == 0 else EXIT_USAGE

    setup_logging(
        level=args.log_level or settings.log_level,
        use_json=args.log_json or settings.log_json,
        log_file=settings.log_file,
    )

    try:
        config = load_config(args)
        return COMMANDS[args.command](args, config)
    except (ConfigError, ValueError) as e:
        print(f"❌ {e}", file=sys.stderr)
        return EXIT_USAGE
    except OSError as e:
        print(f"❌ I/O error: {e}", file=sys.stderr)
        return EXIT_USAGE
    except KeyboardInterrupt:
        print("\n👋 Interrupted", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
