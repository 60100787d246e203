"""acs-sim: batch command line for populations, samples and experiments.

Usage:
    acs-sim generate --grid 20x20 --centers 5 --points 50 --sd 1 --seed 42 --svg
    acs-sim generate --sd-sweep 2/3,1,3/2,2,3 --share-centers --svg
    acs-sim generate --field negative-binomial --mean 2 --vmr 4 --layout clustered
    acs-sim sample population.json --design acs --size 10 -C 0
    acs-sim estimate population.json --design cluster --size 10 --block 2x2
    acs-sim efficiency population.json --n1 10 --equal-sizes --svg
    acs-sim experiment configs/reference_layout.yaml

Exit codes: 0 ok, 2 usage or configuration error, 3 degenerate input, 4 I/O error,
5 failed internal consistency check.
"""

import argparse
import logging
import re
import sys
from fractions import Fraction
from pathlib import Path
from typing import Optional, Sequence

from pydantic import BaseModel

from .config import Config
from .designs import partition_into_networks
from .efficiency import analyze_efficiency, population_feasible_region
from .errors import (
    DegeneratePopulationError,
    DegreesOfFreedomError,
    InternalConsistencyError,
    UndefinedVMRError,
)
from .estimators import draw_and_estimate
from .experiment import run_experiment
from .exporters import ResultExporter
from .models import (
    ClusterSpec,
    CountFieldSpec,
    Design,
    DistributionFamily,
    EstimateReport,
    FieldLayout,
    GridFrame,
    OutputFormat,
    RngSeed,
    RunConfig,
)
from .persistence import load_experiment_config, load_population, write_files
from .population import (
    draw_centers,
    generate_cluster_population,
    generate_count_field,
)

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_DEGENERATE = 3
EXIT_IO = 4
EXIT_INTERNAL = 5

GRID_PATTERN = re.compile(r"^\s*(\d+)\s*[xX]\s*(\d+)\s*$")


# ============================================================================
# Argument types
# ============================================================================


def parse_grid(text: str) -> tuple[int, int]:
    """'20x20' -> (20, 20)."""
    match = GRID_PATTERN.match(text)
    if not match or int(match.group(1)) < 1 or int(match.group(2)) < 1:
        raise argparse.ArgumentTypeError(f"Grid must look like WIDTHxHEIGHT, got {text!r}")
    return int(match.group(1)), int(match.group(2))


def parse_real(text: str) -> float:
    """Decimal or fraction ('2/3')."""
    try:
        return float(Fraction(text.strip()))
    except (ValueError, ZeroDivisionError) as exc:
        raise argparse.ArgumentTypeError(f"Not a number: {text!r}") from exc


def parse_real_list(text: str) -> list[float]:
    values = [parse_real(part) for part in text.split(",") if part.strip()]
    if not values:
        raise argparse.ArgumentTypeError(f"Expected a comma separated list, got {text!r}")
    return values


def parse_formats(text: str) -> frozenset[OutputFormat]:
    try:
        return frozenset(OutputFormat(part.strip()) for part in text.split(",") if part.strip())
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"Formats are csv, json, svg; got {text!r}") from exc


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="acs-sim", description="Adaptive cluster sampling vs simple random sampling"
    )
    parser.add_argument("-v", "--verbose", action="count", default=0, help="-v info, -vv debug")
    parser.add_argument(
        "--output-dir", type=Path, default=None, help="Output directory (env ACS_OUTPUT_DIR)"
    )
    parser.add_argument(
        "--threads", type=int, default=None, help="Worker threads (env ACS_THREADS)"
    )
    parser.add_argument(
        "--formats",
        type=parse_formats,
        default=frozenset({OutputFormat.CSV, OutputFormat.JSON}),
        help="Comma separated output formats: csv,json,svg (default csv,json)",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    gen = sub.add_parser("generate", help="Generate a population")
    gen.add_argument("--grid", type=parse_grid, default=(20, 20), help="Frame size, e.g. 20x20")
    gen.add_argument("--centers", type=int, default=5)
    gen.add_argument("--points", type=int, default=50, help="Points per centre")
    gen.add_argument("--sd", type=parse_real, default=1.0, help="Cluster spread (grid units)")
    gen.add_argument("--sd-sweep", type=parse_real_list, default=None, help="e.g. 2/3,1,3/2,2,3")
    gen.add_argument("--share-centers", action="store_true", help="Reuse centres across a sweep")
    gen.add_argument(
        "--field",
        choices=[f.value for f in DistributionFamily],
        default=None,
        help="Generate a count field of this family instead of clusters",
    )
    gen.add_argument("--mean", type=parse_real, default=1.0, help="Target mean (count field)")
    gen.add_argument("--vmr", type=parse_real, default=1.0, help="Target VMR (count field)")
    gen.add_argument(
        "--layout",
        choices=[layout.value for layout in FieldLayout],
        default=FieldLayout.INDEPENDENT.value,
    )
    gen.add_argument("--cluster-sd", type=parse_real, default=1.0)
    gen.add_argument("--seed", type=int, default=42)
    gen.add_argument("--name", default="population", help="Output file stem")
    gen.add_argument("--svg", action="store_true", help="Also write SVG figures")

    for name, help_text in (
        ("sample", "Draw one sample and write its audit JSON"),
        ("estimate", "Draw one sample and write its estimate CSV row"),
    ):
        cmd = sub.add_parser(name, help=help_text)
        cmd.add_argument("population", type=Path, help="Population JSON or CSV")
        cmd.add_argument("--design", choices=[d.value for d in Design], default=Design.ACS.value)
        cmd.add_argument("--size", type=int, default=10, help="m, n1 or clusters to sample")
        cmd.add_argument("-C", "--condition", type=parse_real, default=0.0)
        cmd.add_argument("--neighborhood", type=int, choices=[4, 8], default=4)
        cmd.add_argument("--block", type=parse_grid, default=(2, 2), help="Cluster block size")
        cmd.add_argument("--seed", type=int, default=42)

    eff = sub.add_parser("efficiency", help="Population-level ACS vs SRS efficiency")
    eff.add_argument("population", type=Path, help="Population JSON or CSV")
    eff.add_argument("--n1", type=int, default=10)
    eff.add_argument("--m", type=int, default=None)
    eff.add_argument("--equal-sizes", action="store_true", help="Compare at m = n1")
    eff.add_argument("-C", "--condition", type=parse_real, default=0.0)
    eff.add_argument("--neighborhood", type=int, choices=[4, 8], default=4)
    eff.add_argument("--svg", action="store_true", help="Also write the feasible-region SVG")

    exp = sub.add_parser("experiment", help="Run a YAML experiment configuration")
    exp.add_argument("config", type=Path, help="Experiment YAML file")

    return parser


def _run_config(args: argparse.Namespace) -> RunConfig:
    formats = set(args.formats)
    if getattr(args, "svg", False):
        formats.add(OutputFormat.SVG)
    return RunConfig(
        output_dir=args.output_dir or Config.get_output_dir(),
        formats=frozenset(formats),
        verbosity=args.verbose,
        threads=args.threads,
    )


def _configure_logging(verbosity: int) -> None:
    if verbosity >= 2:
        level = logging.DEBUG
    elif verbosity == 1:
        level = logging.INFO
    else:
        level = getattr(logging, Config.get_log_level(), logging.WARNING)
    logging.basicConfig(
        level=level, format="%(levelname)s:%(name)s:%(message)s", stream=sys.stderr
    )
    logging.getLogger("chuk_mcp_acs").setLevel(level)


# ============================================================================
# Subcommands
# ============================================================================


def _population_files(
    run: RunConfig, stem: str, frame: GridFrame, points=None
) -> dict[str, str]:
    files: dict[str, str] = {}
    if run.wants(OutputFormat.CSV):
        files[f"{stem}.csv"] = ResultExporter.frame_csv(frame)
    if run.wants(OutputFormat.JSON):
        files[f"{stem}.json"] = ResultExporter.model_json(frame)
    if run.wants(OutputFormat.SVG):
        if points is not None:
            files[f"{stem}.svg"] = ResultExporter.cluster_scatter_svg(points, title=stem)
        files[f"{stem}_heatmap.svg"] = ResultExporter.heatmap_svg(frame, title=stem)
    return files


def cmd_generate(args: argparse.Namespace, run: RunConfig) -> list[Path]:
    width, height = args.grid
    files: dict[str, str] = {}

    if args.field is not None:
        spec = CountFieldSpec(
            family=args.field,
            target_mean=args.mean,
            target_vmr=args.vmr,
            layout=args.layout,
            cluster_sd=args.cluster_sd,
            width=width,
            height=height,
        )
        frame = generate_count_field(spec, width, height, RngSeed(seed=args.seed))
        files.update(_population_files(run, args.name, frame))
        return write_files(run.output_dir, files)

    spreads = args.sd_sweep if args.sd_sweep is not None else [args.sd]
    base = ClusterSpec(
        n_centers=args.centers,
        points_per_center=args.points,
        spread_sd=spreads[0],
        width=width,
        height=height,
    )
    centers = None
    if args.share_centers:
        centers = draw_centers(base, RngSeed(seed=args.seed, stream_id=0).generator(1))

    for point, sd in enumerate(spreads):
        spec = ClusterSpec.model_validate({**base.model_dump(), "spread_sd": sd})
        frame, points = generate_cluster_population(
            spec, RngSeed(seed=args.seed, stream_id=point), centers=centers
        )
        stem = args.name if args.sd_sweep is None else f"{args.name}_sd{point}"
        files.update(_population_files(run, stem, frame, points))
    return write_files(run.output_dir, files)


def _draw_and_estimate(
    args: argparse.Namespace, frame: GridFrame
) -> tuple[BaseModel, EstimateReport]:
    return draw_and_estimate(
        frame,
        Design(args.design),
        args.size,
        RngSeed(seed=args.seed),
        condition=args.condition,
        neighborhood=args.neighborhood,
        block=args.block,
    )


def cmd_sample(args: argparse.Namespace, run: RunConfig) -> list[Path]:
    frame = load_population(args.population)
    sample, _ = _draw_and_estimate(args, frame)
    files = {f"sample_{args.design}.json": ResultExporter.model_json(sample)}
    return write_files(run.output_dir, files)


def cmd_estimate(args: argparse.Namespace, run: RunConfig) -> list[Path]:
    frame = load_population(args.population)
    sample, report = _draw_and_estimate(args, frame)
    files: dict[str, str] = {}
    if run.wants(OutputFormat.CSV):
        files[f"estimate_{args.design}.csv"] = ResultExporter.estimates_csv([report])
    if run.wants(OutputFormat.JSON):
        files[f"sample_{args.design}.json"] = ResultExporter.model_json(sample)
        files[f"estimate_{args.design}.json"] = ResultExporter.model_json(report)
    return write_files(run.output_dir, files)


def cmd_efficiency(args: argparse.Namespace, run: RunConfig) -> list[Path]:
    frame = load_population(args.population)
    m = args.n1 if args.equal_sizes or args.m is None else args.m
    partition = partition_into_networks(frame, args.condition, args.neighborhood)
    report = analyze_efficiency(frame, partition, args.n1, m)
    region = population_feasible_region(frame, partition, args.n1, m)

    files: dict[str, str] = {}
    if run.wants(OutputFormat.JSON):
        files["efficiency.json"] = ResultExporter.model_json(report)
    if run.wants(OutputFormat.CSV):
        files["efficiency.csv"] = ResultExporter.efficiency_csv(report)
    if run.wants(OutputFormat.SVG):
        files["feasible_region.svg"] = ResultExporter.feasible_region_svg(region, report)
    return write_files(run.output_dir, files)


def cmd_experiment(args: argparse.Namespace, run: RunConfig) -> list[Path]:
    config = load_experiment_config(args.config)
    result = run_experiment(config, max_workers=run.threads)

    files: dict[str, str] = {}
    if run.wants(OutputFormat.CSV):
        points = [point for sweep in result.sweeps for point in sweep.points]
        files["replicates.csv"] = ResultExporter.replicates_csv(points)
        files["summary.csv"] = ResultExporter.summary_csv(result.summary_rows())
    if run.wants(OutputFormat.JSON):
        trends = [sweep.trend for sweep in result.sweeps if sweep.trend is not None]
        files["trends.json"] = ResultExporter.trends_json(trends)
    return write_files(run.output_dir, files)


COMMANDS = {
    "generate": cmd_generate,
    "sample": cmd_sample,
    "estimate": cmd_estimate,
    "efficiency": cmd_efficiency,
    "experiment": cmd_experiment,
}


def main(argv: Optional[Sequence[str]] = None) -> int:
    """Run acs-sim and return the process exit code."""
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code == 0 else EXIT_USAGE

    _configure_logging(args.verbose)
    try:
        run = _run_config(args)
        written = COMMANDS[args.command](args, run)
    except (DegeneratePopulationError, UndefinedVMRError, DegreesOfFreedomError) as exc:
        logger.error(f"Degenerate input: {exc}")
        return EXIT_DEGENERATE
    except ValueError as exc:
        logger.error(str(exc))
        return EXIT_USAGE
    except OSError as exc:
        logger.error(str(exc))
        return EXIT_IO
    except InternalConsistencyError as exc:
        logger.error(f"Internal consistency check failed: {exc}")
        return EXIT_INTERNAL

    for path in written:
        print(path)
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
