"""
Main script for Overshoot Lab.

This script provides a simple interface to:
1. Run a configured experiment and write its report
2. List the experiment kinds and the claims they verify
3. Dump closed-form densities on a grid
4. Run the exact finite-chain suite

Exit codes: 0 when every verdict passes, 1 when a verdict fails, 2 on
configuration or capability errors.
"""

import argparse
import logging
import sys
from typing import Dict, Optional

from config import LOG_LEVEL, OUTPUT_DIR
from evals.runner import ExperimentRunner, dump_density, list_experiments, output_paths
from utils.errors import CapabilityError, ConfigurationError, DomainError, OvershootLabError
from utils.experiment_config import ExperimentConfig, ExperimentKind, load_config, parse_config
from utils.reports import write_csv, write_report

EXIT_OK = 0
EXIT_FAILED = 1
EXIT_CONFIG = 2

DUMP_FRAMES = ("path", "events", "entrances")


def _banner(title: str):
    print(f"\n{'='*60}")
    print(title)
    print(f"{'='*60}\n")


def _apply_output(config: ExperimentConfig, out: Optional[str], dump: bool) -> ExperimentConfig:
    if out:
        config.output.dir = out
    if dump:
        config.output.dump = True
    return config


def _print_verdicts(report: Dict):
    for verdict in report["verdicts"]:
        mark = "✓" if verdict["passed"] else "✗"
        note = "" if verdict["asserted"] else " (reported only)"
        if verdict["partial"]:
            note += " [partial]"
        print(f"  {mark} {verdict['name']}: {verdict['statistic']} = {verdict['value']} "
              f"(threshold {verdict['threshold']}){note}")


def execute(config: ExperimentConfig) -> int:
    """
    Run one experiment, write its report and CSVs, and return the exit code.

    Args:
        config: Validated experiment configuration

    Returns:
        EXIT_OK if every verdict passes, EXIT_FAILED otherwise
    """
    _banner(f"RUNNING EXPERIMENT: {config.label}")
    print(f"🎲 Seed: {config.seed}   🧵 Threads: {config.threads}   📦 Replicas: {config.replicas}\n")

    outcome = ExperimentRunner(config).run()
    report = outcome.report

    print("📊 Verdicts:")
    _print_verdicts(report)

    path = write_report(report, config.output.dir, config.label)
    print(f"\n📝 Report: {path}")
    for key, csv_path in output_paths(config, outcome.frames).items():
        if config.output.csv or key in DUMP_FRAMES:
            write_csv(outcome.frames[key], csv_path)
            print(f"📈 CSV: {csv_path}")

    print(f"\n⏱️  Runtime: {report['runtime_ms']:.1f} ms")
    if outcome.passed:
        print("✅ All verdicts passed")
        return EXIT_OK
    print(f"❌ Failed verdicts: {', '.join(outcome.failed)}")
    return EXIT_FAILED


def run_experiment(config_path: str, seed: Optional[int] = None, threads: Optional[int] = None,
                   out: Optional[str] = None, dump: bool = False) -> int:
    """
    Run the experiment declared in a JSON configuration file.

    Args:
        config_path: Path to the configuration
        seed: Overrides the configured seed
        threads: Overrides the configured worker count
        out: Overrides the output directory
        dump: Also write path and event CSVs

    Returns:
        Process exit code
    """
    config = load_config(config_path, {"seed": seed, "threads": threads})
    return execute(_apply_output(config, out, dump))


def list_command():
    """Print the experiment catalog."""
    _banner("EXPERIMENTS")
    rows = list_experiments()
    width = max(len(row["experiment"]) for row in rows)
    for row in rows:
        print(f"  {row['experiment']:<{width}} ↦ {row['claim']}")
    print(f"\n{len(rows)} experiment kinds")


def dump_density_command(config_path: str, density: Optional[str] = None, grid=None,
                         out: Optional[str] = None) -> int:
    """
    Write the (x, density) table of a closed-form density.

    Args:
        config_path: Configuration holding the law (and A for entrance/exit densities)
        density: pi_plus, pi_minus, pi, entrance or exit; overrides the configured one
        grid: (start, stop, num); overrides the configured grid
        out: Overrides the output directory
    """
    overrides = {"density": density}
    if grid is not None:
        overrides["grid"] = {"start": grid[0], "stop": grid[1], "num": int(grid[2])}
    config = _apply_output(load_config(config_path, overrides), out, False)

    _banner(f"DENSITY DUMP: {config.density}")
    frame = dump_density(config)
    path = write_csv(frame, f"{config.output.dir}/{config.label}_density_{config.density}.csv")
    print(f"📈 {len(frame)} grid points written to {path}")
    return EXIT_OK


def finite_suite_command(config_path: Optional[str] = None, seed: Optional[int] = None,
                         threads: Optional[int] = None, count: Optional[int] = None,
                         out: Optional[str] = None) -> int:
    """Run the randomized exact finite-chain suite, from a config file or the defaults."""
    overrides = {"seed": seed, "threads": threads}
    if config_path:
        config = load_config(config_path, overrides)
    else:
        config = parse_config({"experiment": ExperimentKind.FINITE_SUITE.value}, overrides)
    if config.experiment is not ExperimentKind.FINITE_SUITE:
        raise ConfigurationError("finite-suite needs a finite_suite configuration", field="experiment")
    if count is not None:
        if count < 1:
            raise ConfigurationError("suite needs at least one chain", field="suite.count")
        config.suite.count = count
    return execute(_apply_output(config, out, False))


def main(argv=None) -> int:
    """Main entry point."""
    parser = argparse.ArgumentParser(
        description="Overshoot Lab - verify entrance/exit chain identities and random-walk crossing limits"
    )

    subparsers = parser.add_subparsers(dest="command", help="Command to run")

    # Run command
    run_parser = subparsers.add_parser("run", help="Run a configured experiment")
    run_parser.add_argument("--config", required=True, help="Path to the JSON experiment configuration")
    run_parser.add_argument("--seed", type=int, help="Root seed (overrides the configuration)")
    run_parser.add_argument("--threads", type=int, help="Worker threads (overrides the configuration)")
    run_parser.add_argument("--out", help=f"Output directory (default {OUTPUT_DIR})")
    run_parser.add_argument("--dump", action="store_true", help="Also write path and event CSVs")

    # List command
    subparsers.add_parser("list", help="List experiment kinds and their claims")

    # Dump-density command
    density_parser = subparsers.add_parser("dump-density", help="Write a closed-form density on a grid")
    density_parser.add_argument("--config", required=True, help="Configuration with the law (and A)")
    density_parser.add_argument("--density", choices=["pi_plus", "pi_minus", "pi", "entrance", "exit"],
                                help="Density to dump")
    density_parser.add_argument("--grid", nargs=3, type=float, metavar=("START", "STOP", "NUM"),
                                help="Evaluation grid")
    density_parser.add_argument("--out", help=f"Output directory (default {OUTPUT_DIR})")

    # Finite-suite command
    suite_parser = subparsers.add_parser("finite-suite", help="Run the exact finite-chain suite")
    suite_parser.add_argument("--config", help="Optional finite_suite configuration")
    suite_parser.add_argument("--seed", type=int, help="Root seed")
    suite_parser.add_argument("--threads", type=int, help="Worker threads")
    suite_parser.add_argument("--count", type=int, help="Number of random chains")
    suite_parser.add_argument("--out", help=f"Output directory (default {OUTPUT_DIR})")

    args = parser.parse_args(argv)
    logging.basicConfig(level=LOG_LEVEL, format="%(asctime)s %(levelname)s %(name)s: %(message)s")

    try:
        if args.command == "run":
            return run_experiment(args.config, args.seed, args.threads, args.out, args.dump)

        elif args.command == "list":
            list_command()
            return EXIT_OK

        elif args.command == "dump-density":
            return dump_density_command(args.config, args.density, args.grid, args.out)

        elif args.command == "finite-suite":
            return finite_suite_command(args.config, args.seed, args.threads, args.count, args.out)

        else:
            parser.print_help()
            return EXIT_OK

    except ConfigurationError as e:
        print(f"\n❌ Configuration error: {e}", file=sys.stderr)
        return EXIT_CONFIG
    except (CapabilityError, DomainError) as e:
        print(f"\n❌ {type(e).__name__}: {e}", file=sys.stderr)
        return EXIT_CONFIG
    except OSError as e:
        print(f"\n❌ Configuration error: config: {e}", file=sys.stderr)
        return EXIT_CONFIG
    except OvershootLabError as e:
        print(f"\n❌ {type(e).__name__}: {e}", file=sys.stderr)
        return EXIT_FAILED


if __name__ == "__main__":
    sys.exit(main())
