"""
ABOUTME: Command-line interface for the Koopman forecaster
ABOUTME: Handles argument parsing, logging setup, output files and exit codes
"""

import argparse
import json
import logging
import sys
from pathlib import Path

from dotenv import load_dotenv
from rich.console import Console
from rich.logging import RichHandler
from rich.table import Table

from . import __version__
from .config import default_epsilon, default_log_level, resolve_threads
from .exceptions import ConfigError, DataError, NumericalError
from .forecast import (
    GkpConfig,
    GlobalForecaster,
    LkpConfig,
    analyze_windows,
    local_predict,
    window_positions,
)
from .generators import GeneratorManager, inject_disturbance, parse_disturbance
from .manifest import MANIFEST_NAME, RunManifest
from .report import (
    render_summary,
    summary_dict,
    write_errors,
    write_flags,
    write_hankel_log,
    write_predictions,
    write_spectrum,
)
from .timeseries import IngestConfig, load_csv, write_csv

EXIT_OK = 0
EXIT_CONFIG = 1
EXIT_DATA = 2
EXIT_NUMERICAL = 3
SPECTRUM_TABLE_ROWS = 40

console = Console()


class UsageError(Exception):
    """Raised instead of exiting when argument parsing fails."""

    pass


class ArgumentParser(argparse.ArgumentParser):
    """ArgumentParser that reports errors with usage text and exit code 1."""

    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise UsageError(message)


def load_environment():
    """Load a .env file from the working directory when present."""
    env_path = Path(".env")
    if env_path.exists():
        load_dotenv(env_path)
        # Only print if not in test mode
        if "pytest" not in sys.modules:
            console.print(f"✅ Loaded environment from {env_path}")


def setup_logging(level: str) -> None:
    logging.basicConfig(
        level=getattr(logging, level),
        format="%(message)s",
        datefmt="[%X]",
        handlers=[RichHandler(console=console, rich_tracebacks=True)],
    )


def parse_hankel(text: str) -> tuple[int, int]:
    """Parse ``NxM`` as (n_H, m_H)."""
    try:
        n, m = (int(part) for part in text.lower().split("x"))
    except ValueError as e:
        raise argparse.ArgumentTypeError(f"Hankel size must look like NxM, got {text!r}") from e
    if n < 1 or m < 1:
        raise argparse.ArgumentTypeError(f"Hankel size must be positive, got {text!r}")
    return n, m


def parse_interval(text: str) -> tuple[float, float]:
    """Parse ``lo,hi``."""
    try:
        lo, hi = (float(part) for part in text.split(","))
    except ValueError as e:
        raise argparse.ArgumentTypeError(f"Interval must look like lo,hi, got {text!r}") from e
    return lo, hi


def _common_parser() -> argparse.ArgumentParser:
    common = ArgumentParser(add_help=False)
    common.add_argument(
        "--output-dir", type=Path, default=Path("out"), help="Directory for output files"
    )
    common.add_argument(
        "--json",
        action="store_true",
        help="Output the run summary as JSON instead of rich console tables",
    )
    common.add_argument(
        "--log-level", default=None, choices=["DEBUG", "INFO", "WARNING", "ERROR"]
    )
    return common


def _ingest_parser() -> argparse.ArgumentParser:
    ingest = ArgumentParser(add_help=False)
    ingest.add_argument("input", type=Path, help="Input CSV file")
    ingest.add_argument("--delimiter", default=",")
    ingest.add_argument("--no-header", action="store_true", help="CSV has no header row")
    ingest.add_argument(
        "--orientation", default="rows_time", choices=["rows_time", "rows_observables"]
    )
    ingest.add_argument(
        "--nan-policy", default="forward_fill", choices=["forward_fill", "reject"]
    )
    ingest.add_argument(
        "--index-column", action="store_true", help="First column holds time labels"
    )
    ingest.add_argument("--dt", type=float, default=None, help="Uniform time step")
    ingest.add_argument(
        "--epsilon", type=float, default=None, help="SVD rank tolerance (KF_EPSILON)"
    )
    ingest.add_argument(
        "--clamp-nonnegative",
        action="store_true",
        help="Write negative predicted values as zero",
    )
    return ingest


def _add_local_arguments(parser: argparse.ArgumentParser, lead_flag: str) -> None:
    defaults = LkpConfig()
    parser.add_argument(
        "--min-hankel",
        type=parse_hankel,
        default=(defaults.n_h_min, defaults.m_h_min),
        help="Minimal local Hankel size NxM (default 3x2)",
    )
    parser.add_argument("--eps-ref", type=float, default=defaults.eps_ref)
    parser.add_argument(lead_flag, type=int, default=defaults.tau_l, dest="tau_l")
    parser.add_argument(
        "--grow-axis", default=defaults.grow_axis, choices=["alternate", "rows", "columns"]
    )


def _add_global_arguments(parser: argparse.ArgumentParser) -> None:
    defaults = GkpConfig(w=3, n_h=2, m_h=1)
    parser.add_argument("--window", type=int, default=None, help="Window size w")
    parser.add_argument(
        "--hankel", type=parse_hankel, required=True, help="Hankel split n_HxM_H"
    )
    parser.add_argument("--eta", type=float, default=defaults.eta)
    parser.add_argument("--dp", type=int, default=defaults.dp, help="Window step")
    parser.add_argument("--n-rep", type=int, default=defaults.n_rep)
    parser.add_argument(
        "--l-bs", type=int, default=None, help="Max retouch length (default m_H)"
    )
    parser.add_argument(
        "--interval",
        type=parse_interval,
        default=defaults.interval,
        help="Reference interval lo,hi for the spectral radius",
    )
    parser.add_argument("--lead", type=int, default=defaults.tau_g, dest="tau_g")
    parser.add_argument("--weighting", default="uniform", choices=["uniform", "recent"])
    parser.add_argument("--threads", type=int, default=None, help="Window threads")
    _add_local_arguments(parser, "--local-lead")


def build_parser(manager: GeneratorManager) -> ArgumentParser:
    common = _common_parser()
    ingest = _ingest_parser()

    parser = ArgumentParser(
        prog="koopman-forecaster",
        description="Koopman mode decomposition forecasting with Black Swan detection",
    )
    parser.add_argument(
        "--version", action="version", version=f"koopman-forecaster {__version__}"
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser(
        "forecast-global", parents=[common, ingest], help="Global prediction with retouching"
    )
    _add_global_arguments(p)

    p = sub.add_parser(
        "forecast-local", parents=[common, ingest], help="Local prediction with Hankel resizing"
    )
    _add_local_arguments(p, "--lead")
    p.add_argument("--k0", type=int, default=None, help="First step (default n+m minimum)")
    p.add_argument("--kf", type=int, default=None, help="Last step (default T)")
    p.add_argument("--eta", type=float, default=None, help="Residual filter for local modes")

    p = sub.add_parser("spectrum", parents=[common, ingest], help="Per-window Ritz spectra")
    _add_global_arguments(p)

    p = sub.add_parser(
        "retouch", parents=[common, ingest], help="Detect and replace Black Swan data"
    )
    _add_global_arguments(p)

    p = sub.add_parser("generate", help="Write a synthetic signal as CSV")
    generators = p.add_subparsers(dest="generator", required=True)
    for name in manager.list_generators():
        generator = manager.get_generator(name)
        if generator is None:
            continue
        g = generators.add_parser(name, parents=[common], help=generator.description)
        g.add_argument(
            "--disturbance",
            action="append",
            default=[],
            help="Inject kind:start:length:magnitude (step, spike or ramp); repeatable",
        )
        generator.add_arguments(g)

    p = sub.add_parser("replay", help="Re-run a stored manifest")
    p.add_argument("manifest", type=Path)
    p.add_argument("--output-dir", type=Path, default=None)
    p.add_argument("--log-level", default=None, choices=["DEBUG", "INFO", "WARNING", "ERROR"])
    p.add_argument("--json", action="store_true")
    return parser


def _strip_output_dir(argv: list[str]) -> list[str]:
    stripped = []
    skip = False
    for arg in argv:
        if skip:
            skip = False
            continue
        if arg == "--output-dir":
            skip = True
            continue
        if arg.startswith("--output-dir="):
            continue
        stripped.append(arg)
    return stripped


def _ingest_config(args) -> IngestConfig:
    return IngestConfig(
        delimiter=args.delimiter,
        header=not args.no_header,
        orientation=args.orientation,
        nan_policy=args.nan_policy,
        index_column=args.index_column,
        dt=args.dt,
    )


def _epsilon(args) -> float:
    return args.epsilon if args.epsilon is not None else default_epsilon()


def _lkp_config(args, eta=None) -> LkpConfig:
    n_min, m_min = args.min_hankel
    return LkpConfig(
        n_h_min=n_min,
        m_h_min=m_min,
        eps_ref=args.eps_ref,
        tau_l=args.tau_l,
        grow_axis=args.grow_axis,
        epsilon=_epsilon(args),
        eta=eta,
    )


def _gkp_config(args) -> GkpConfig:
    n_h, m_h = args.hankel
    w = args.window if args.window is not None else n_h + m_h
    return GkpConfig(
        w=w,
        n_h=n_h,
        m_h=m_h,
        eta=args.eta,
        dp=args.dp,
        n_rep=args.n_rep,
        l_bs=args.l_bs,
        interval=args.interval,
        tau_g=args.tau_g,
        epsilon=_epsilon(args),
        threads=resolve_threads(args.threads),
        weighting=args.weighting,
        lkp=_lkp_config(args),
    )


def _finish(args, manifest: RunManifest, outputs: list[Path], summary: dict, report=None):
    manifest.outputs = sorted(path.name for path in outputs)
    manifest.save(args.output_dir)
    if args.json:
        print(json.dumps(summary, indent=2, sort_keys=True))
        return
    if report is not None:
        render_summary(console, report, f"📈 {manifest.subcommand}")
    console.print(f"✅ Wrote {len(outputs)} files and {MANIFEST_NAME} to {args.output_dir}")


def cmd_forecast_global(args, argv) -> None:
    ingest = _ingest_config(args)
    cfg = _gkp_config(args)
    s = load_csv(args.input, ingest)
    report = GlobalForecaster(cfg).run(s, full_fit=True)

    out = args.output_dir
    outputs = [
        write_predictions(report, out / "predictions.csv", s.d, s.labels, args.clamp_nonnegative),
        write_errors(report, out / "errors.csv", s.d, s.labels),
        write_spectrum(report.spectrum_log, out / "spectrum.csv"),
        write_flags(report.flagged_intervals, out / "flags.json"),
    ]
    manifest = RunManifest.for_input(args.command, argv, __version__, args.input)
    manifest.config = {
        "ingest": ingest.to_dict(),
        "gkp": cfg.to_dict(),
        "lifted_rows": s.d * cfg.n_h,
        "clamp_nonnegative": args.clamp_nonnegative,
    }
    _finish(args, manifest, outputs, summary_dict(report), report)


def cmd_forecast_local(args, argv) -> None:
    ingest = _ingest_config(args)
    cfg = _lkp_config(args, eta=args.eta)
    s = load_csv(args.input, ingest)
    k0 = args.k0 if args.k0 is not None else cfg.min_total
    kf = args.kf if args.kf is not None else s.T
    report = local_predict(s, cfg, k0, kf)

    out = args.output_dir
    outputs = [
        write_predictions(report, out / "predictions.csv", s.d, s.labels, args.clamp_nonnegative),
        write_errors(report, out / "errors.csv", s.d, s.labels),
        write_hankel_log(report.hankel_log, out / "hankel.csv"),
    ]
    manifest = RunManifest.for_input(args.command, argv, __version__, args.input)
    manifest.config = {
        "ingest": ingest.to_dict(),
        "lkp": cfg.to_dict(),
        "k0": k0,
        "kf": kf,
        "clamp_nonnegative": args.clamp_nonnegative,
    }
    _finish(args, manifest, outputs, summary_dict(report), report)


def _spectrum_table(entries, cfg: GkpConfig) -> Table:
    table = Table(title="🔎 Window Spectra", show_header=True, header_style="bold magenta")
    table.add_column("Window start", justify="right", style="cyan")
    table.add_column("Pairs", justify="right")
    table.add_column("Accepted", justify="right")
    table.add_column("Spectral radius", justify="right")
    shown = entries
    if len(entries) > SPECTRUM_TABLE_ROWS:
        shown = [e for e in entries if not cfg.in_interval(e.radius)][:SPECTRUM_TABLE_ROWS]
    for entry in shown:
        radius = "∞" if entry.radius is None else f"{entry.radius:.4f}"
        if not cfg.in_interval(entry.radius):
            radius = f"[red]{radius}[/red]"
        table.add_row(
            str(entry.window_start),
            str(len(entry.eigenvalues)),
            str(entry.n_accepted),
            radius,
        )
    return table


def cmd_spectrum(args, argv) -> None:
    ingest = _ingest_config(args)
    cfg = _gkp_config(args)
    s = load_csv(args.input, ingest)
    if s.T < cfg.w:
        raise ConfigError(f"Window size {cfg.w} exceeds T={s.T}")
    results = analyze_windows(s, window_positions(s.T, cfg), cfg, full_fit=True)
    entries = [result.spectrum_entry(0) for result in results]
    for result in results:
        if result.error is not None:
            logging.warning(f"Window p={result.p}: {result.error}")

    outputs = [write_spectrum(entries, args.output_dir / "spectrum.csv")]
    manifest = RunManifest.for_input(args.command, argv, __version__, args.input)
    manifest.config = {"ingest": ingest.to_dict(), "gkp": cfg.to_dict()}
    summary = {
        "windows": len(entries),
        "flagged_windows": sum(1 for e in entries if not cfg.in_interval(e.radius)),
        "empty_spectrum_windows": sum(1 for e in entries if e.radius is None),
    }
    if not args.json:
        console.print(_spectrum_table(entries, cfg))
    _finish(args, manifest, outputs, summary)


def cmd_retouch(args, argv) -> None:
    ingest = _ingest_config(args)
    cfg = _gkp_config(args)
    s = load_csv(args.input, ingest)
    report = GlobalForecaster(cfg).run(s)

    out = args.output_dir
    outputs = [
        write_csv(report.retouched, out / "retouched.csv", ingest),
        write_flags(report.flagged_intervals, out / "flags.json"),
    ]
    manifest = RunManifest.for_input(args.command, argv, __version__, args.input)
    manifest.config = {"ingest": ingest.to_dict(), "gkp": cfg.to_dict()}
    summary = {
        "sweeps": report.sweeps,
        "flagged_intervals": [i.to_dict() for i in report.flagged_intervals],
    }
    _finish(args, manifest, outputs, summary, report)


def _jsonable(value):
    if isinstance(value, complex):
        return str(value)
    if isinstance(value, (list, tuple)):
        return [_jsonable(item) for item in value]
    if isinstance(value, Path):
        return str(value)
    return value


def cmd_generate(args, argv, manager: GeneratorManager) -> None:
    generator = manager.get_generator(args.generator)
    if generator is None:
        raise ConfigError(f"Unknown generator {args.generator!r}")
    s = generator.generate(args)
    disturbances = [parse_disturbance(text) for text in args.disturbance]
    for kind, start, length, magnitude in disturbances:
        s = inject_disturbance(s, start, length, kind, magnitude)

    outputs = [write_csv(s, args.output_dir / f"{generator.name}.csv")]
    manifest = RunManifest.for_input(f"generate {generator.name}", argv, __version__, None)
    manifest.config = {
        key: _jsonable(value)
        for key, value in sorted(vars(args).items())
        if key not in ("output_dir", "json", "log_level", "command", "generator")
    }
    summary = {"generator": generator.name, "d": s.d, "T": s.T, "output": str(outputs[0])}
    _finish(args, manifest, outputs, summary)


def cmd_replay(args) -> int:
    manifest = RunManifest.load(args.manifest)
    manifest.verify_input()
    output_dir = args.output_dir or args.manifest.parent
    logging.info(f"Replaying {manifest.subcommand} into {output_dir}")
    return run([*manifest.argv, "--output-dir", str(output_dir)])


def run(argv: list[str] | None = None) -> int:
    """
    Execute one CLI invocation and return its exit code.

    0 on success, 1 on configuration or usage errors, 2 on data errors and
    3 on numerical failures.
    """
    argv = list(sys.argv[1:] if argv is None else argv)
    manager = GeneratorManager(console)
    parser = build_parser(manager)
    try:
        args = parser.parse_args(argv)
    except UsageError:
        return EXIT_CONFIG
    except SystemExit as e:
        return int(e.code or 0)

    load_environment()

    try:
        setup_logging(args.log_level or default_log_level())
        recorded = _strip_output_dir(argv)
        if args.command == "forecast-global":
            cmd_forecast_global(args, recorded)
        elif args.command == "forecast-local":
            cmd_forecast_local(args, recorded)
        elif args.command == "spectrum":
            cmd_spectrum(args, recorded)
        elif args.command == "retouch":
            cmd_retouch(args, recorded)
        elif args.command == "generate":
            cmd_generate(args, recorded, manager)
        elif args.command == "replay":
            return cmd_replay(args)
    except ConfigError as e:
        console.print(f"❌ Configuration error: {e}")
        return EXIT_CONFIG
    except DataError as e:
        console.print(f"❌ Data error: {e}")
        return EXIT_DATA
    except NumericalError as e:
        console.print(f"❌ Numerical error: {e}")
        logging.debug("Numerical failure", exc_info=True)
        return EXIT_NUMERICAL
    return EXIT_OK


def main():
    """Console script entry point."""
    try:
        sys.exit(run())
    except KeyboardInterrupt:
        console.print("\n❌ Interrupted by user")
        sys.exit(1)


if __name__ == "__main__":
    main()
