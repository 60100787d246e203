"""ACS MCP Server.

Adaptive cluster sampling (ACS) versus simple random sampling (SRS) on
simulated spatial populations.

Features:
- Clustered point populations binned to a grid, and count fields with a
  target mean and variance-to-mean ratio
- SRS, ACS and block cluster sampling with their unbiased estimators
- Population-level efficiency analysis (when does ACS beat SRS)
- Replicated Monte Carlo experiments and parameter sweeps

Populations are stored via chuk-artifacts for persistence and sharing.
"""

import asyncio
import logging
import sys
import uuid
from typing import Any, Optional

from chuk_artifacts import StorageScope
from chuk_mcp_server import get_user_id, run, tool  # type: ignore[attr-defined]

from .designs import partition_into_networks
from .efficiency import analyze_efficiency, population_feasible_region
from .errors import UndefinedVMRError
from .estimators import draw_and_estimate
from .experiment import run_experiment
from .exporters import ResultExporter
from .models import (
    AcsSample,
    ClusterSample,
    ClusterSpec,
    CountFieldSpec,
    Design,
    DrawSampleResponse,
    EfficiencyResponse,
    EstimateResponse,
    ExperimentResponse,
    ExportPopulationResponse,
    GeneratePopulationResponse,
    GetPopulationResponse,
    GridFrame,
    OutputFormat,
    RngSeed,
    SrsSample,
)
from .persistence import parse_experiment_config
from .population import generate_cluster_population, generate_count_field, variance_to_mean_ratio
from .population_manager import PopulationManager

# Configure logging
logging.basicConfig(
    level=logging.WARNING, format="%(levelname)s:%(name)s:%(message)s", stream=sys.stderr
)
logger = logging.getLogger(__name__)

# Global population manager instance
_population_manager: Optional[PopulationManager] = None


def get_population_manager() -> PopulationManager:
    """Get or create the global population manager."""
    global _population_manager
    if _population_manager is None:
        _population_manager = PopulationManager()
    return _population_manager


def _storage_scope() -> tuple[StorageScope, Optional[str]]:
    user_id = get_user_id()
    if user_id:
        logger.info(f"Storing population in USER scope for user {user_id}")
        return StorageScope.USER, user_id
    return StorageScope.SESSION, None


def _vmr(frame: GridFrame) -> Optional[float]:
    try:
        return variance_to_mean_ratio(frame)
    except UndefinedVMRError:
        return None


async def _store(frame: GridFrame, points=None) -> GeneratePopulationResponse:
    population_id = f"population-{uuid.uuid4().hex[:8]}"
    scope, user_id = _storage_scope()
    await get_population_manager().save_population(
        population_id, frame, points=points, scope=scope, user_id=user_id
    )
    return GeneratePopulationResponse(
        population_id=population_id,
        width=frame.width,
        height=frame.height,
        total=frame.total,
        vmr=_vmr(frame),
    )


# ============================================================================
# Population Tools
# ============================================================================


@tool  # type: ignore[arg-type]
async def acs_generate_cluster_population(
    width: int = 20,
    height: int = 20,
    n_centers: int = 5,
    points_per_center: int = 50,
    spread_sd: float = 1.0,
    seed: int = 42,
) -> GeneratePopulationResponse:
    """Generate a clustered population and bin it to a grid of unit cells.

    Cluster centres are uniform on [1, width - 1] x [1, height - 1]; each
    centre gets points_per_center bivariate-normal points with standard
    deviation spread_sd. Points outside the frame are discarded when binning.

    Args:
        width: Frame width in cells
        height: Frame height in cells
        n_centers: Number of cluster centres
        points_per_center: Points simulated around each centre
        spread_sd: Cluster spread in grid units (> 0)
        seed: Random seed; equal seeds reproduce the population

    Returns:
        GeneratePopulationResponse with population_id, total and VMR

    Tips for LLMs:
        - The reference layout is 20x20, 5 centres, 50 points each
        - Spreads 2/3, 1, 1.5, 2, 3 range from tightly clustered to diffuse
        - Smaller spread means higher VMR and bigger ACS gains
        - Use the population_id with acs_draw_sample / acs_estimate / acs_efficiency

    Example:
        pop = await acs_generate_cluster_population(spread_sd=0.667, seed=1)
        report = await acs_efficiency(population_id=pop.population_id, n1=10)
    """
    spec = ClusterSpec(
        n_centers=n_centers,
        points_per_center=points_per_center,
        spread_sd=spread_sd,
        width=width,
        height=height,
    )
    frame, points = generate_cluster_population(spec, RngSeed(seed=seed))
    return await _store(frame, points)


@tool  # type: ignore[arg-type]
async def acs_generate_count_field(
    family: str,
    target_mean: float,
    target_vmr: float,
    width: int = 20,
    height: int = 20,
    layout: str = "independent",
    cluster_sd: float = 1.0,
    seed: int = 42,
) -> GeneratePopulationResponse:
    """Generate a count field with a target mean and variance-to-mean ratio.

    Args:
        family: "uniform-constant" (VMR 0), "binomial" (0 < VMR < 1),
            "poisson" (VMR 1) or "negative-binomial" (VMR > 1)
        target_mean: Mean count per cell
        target_vmr: Target variance-to-mean ratio
        width: Frame width in cells
        height: Frame height in cells
        layout: "independent" cells, or "clustered" (aggregated, same mean and VMR)
        cluster_sd: Offspring spread for the clustered layout
        seed: Random seed

    Returns:
        GeneratePopulationResponse with population_id, total and VMR

    Tips for LLMs:
        - Binomial needs target_mean / (1 - target_vmr) to be a whole number
        - Use layout="clustered" for patchy populations where ACS helps
    """
    spec = CountFieldSpec(
        family=family,
        target_mean=target_mean,
        target_vmr=target_vmr,
        layout=layout,
        cluster_sd=cluster_sd,
        width=width,
        height=height,
    )
    frame = generate_count_field(spec, width, height, RngSeed(seed=seed))
    return await _store(frame)


@tool  # type: ignore[arg-type]
async def acs_get_population(population_id: str) -> GetPopulationResponse:
    """Get a stored population (counts in row-major order, spec and seed).

    Args:
        population_id: Population identifier

    Returns:
        GetPopulationResponse with the GridFrame
    """
    frame = await get_population_manager().get_population(population_id)
    return GetPopulationResponse(population_id=population_id, population=frame)


# ============================================================================
# Sampling Tools
# ============================================================================


@tool  # type: ignore[arg-type]
async def acs_draw_sample(
    population_id: str,
    design: str = "acs",
    size: int = 10,
    condition: float = 0.0,
    neighborhood: int = 4,
    block_width: int = 2,
    block_height: int = 2,
    seed: int = 42,
) -> DrawSampleResponse:
    """Draw one sample from a population.

    Args:
        population_id: Population identifier
        design: "srs", "acs" or "cluster"
        size: SRS size m, ACS initial size n1, or number of clusters
        condition: ACS condition to adapt; units with count > condition trigger expansion
        neighborhood: ACS neighbourhood, 4 (rook) or 8 (queen)
        block_width: Cluster block width (cluster design)
        block_height: Cluster block height (cluster design)
        seed: Random seed

    Returns:
        DrawSampleResponse with the sample under its design key

    Tips for LLMs:
        - ACS samples list every network and its edge units
        - final_effort counts every distinct unit visited
    """
    frame = await get_population_manager().get_population(population_id)
    sample, _ = draw_and_estimate(
        frame,
        Design(design),
        size,
        RngSeed(seed=seed),
        condition=condition,
        neighborhood=neighborhood,
        block=(block_width, block_height),
    )
    fields: dict[str, Any] = {}
    if isinstance(sample, SrsSample):
        fields["srs"] = sample
    elif isinstance(sample, AcsSample):
        fields["acs"] = sample
    elif isinstance(sample, ClusterSample):
        fields["cluster"] = sample
    return DrawSampleResponse(population_id=population_id, design=Design(design), **fields)


@tool  # type: ignore[arg-type]
async def acs_estimate(
    population_id: str,
    design: str = "acs",
    size: int = 10,
    condition: float = 0.0,
    neighborhood: int = 4,
    block_width: int = 2,
    block_height: int = 2,
    seed: int = 42,
) -> EstimateResponse:
    """Draw one sample and estimate the population mean and total.

    Takes the same arguments as acs_draw_sample.

    Returns:
        EstimateResponse with mean, total and their variance estimates
    """
    frame = await get_population_manager().get_population(population_id)
    _, report = draw_and_estimate(
        frame,
        Design(design),
        size,
        RngSeed(seed=seed),
        condition=condition,
        neighborhood=neighborhood,
        block=(block_width, block_height),
    )
    return EstimateResponse(population_id=population_id, report=report)


# ============================================================================
# Analysis Tools
# ============================================================================


@tool  # type: ignore[arg-type]
async def acs_efficiency(
    population_id: str,
    n1: int = 10,
    m: Optional[int] = None,
    condition: float = 0.0,
    neighborhood: int = 4,
) -> EfficiencyResponse:
    """Compare ACS (initial size n1) with SRS (size m) on a whole population.

    Args:
        population_id: Population identifier
        n1: ACS initial sample size
        m: SRS sample size (defaults to n1)
        condition: Condition to adapt
        neighborhood: 4 or 8

    Returns:
        EfficiencyResponse with the sums-of-squares decomposition, variance
        ratio, kappa values and the SRS sizes for which ACS wins

    Tips for LLMs:
        - variance_ratio < 1 means ACS is more efficient
        - With m = n1, ACS wins whenever any network has within-network variation
        - expected_final_effort tells how many units ACS visits on average
    """
    frame = await get_population_manager().get_population(population_id)
    partition = partition_into_networks(frame, condition, neighborhood)
    m = n1 if m is None else m
    report = analyze_efficiency(frame, partition, n1, m)
    return EfficiencyResponse(
        population_id=population_id,
        report=report,
        feasible_region=population_feasible_region(frame, partition, n1, m),
    )


@tool  # type: ignore[arg-type]
async def acs_run_experiment(config: dict[str, Any]) -> ExperimentResponse:
    """Run a replicated ACS vs SRS experiment.

    Args:
        config: Experiment configuration, the same document as the YAML
            config files (schema_version, population, design, replicates,
            seed, sweep, ...)

    Returns:
        ExperimentResponse with one summary row per sweep point and the trends

    Tips for LLMs:
        - Minimal config: {"schema_version": 1}
        - Spread sweep: {"schema_version": 1, "sweep": {"spread_sd": ["2/3", 1, 3]}}
        - Keep replicates modest (100 is the reference) to stay responsive

    Example:
        result = await acs_run_experiment(
            config={"schema_version": 1, "replicates": 100,
                    "sweep": {"spread_sd": ["2/3", 1, 1.5, 2, 3]}}
        )
    """
    experiment = parse_experiment_config(config)
    result = await asyncio.to_thread(run_experiment, experiment)
    return ExperimentResponse(
        summary=result.summary_rows(),
        trends=[sweep.trend for sweep in result.sweeps if sweep.trend is not None],
    )


# ============================================================================
# Export Tools
# ============================================================================


@tool  # type: ignore[arg-type]
async def acs_export_population(
    population_id: str, format: str = "json", output_path: Optional[str] = None
) -> ExportPopulationResponse:
    """Export a population into its workspace VFS.

    Args:
        population_id: Population identifier
        format: "csv" (x,y,count rows), "json" (full GridFrame) or "svg"
            (count heatmap, plus the point scatter for cluster populations)
        output_path: Optional VFS directory (default /export)

    Returns:
        ExportPopulationResponse with artifact paths
    """
    manager = get_population_manager()
    frame = await manager.get_population(population_id)
    export_format = OutputFormat(format)
    points = await manager.get_points(population_id) if export_format == OutputFormat.SVG else None
    vfs = await manager.get_population_vfs(population_id)

    artifacts = await ResultExporter.export_population(
        frame, export_format, vfs, output_path, points=points
    )
    return ExportPopulationResponse(
        population_id=population_id, format=export_format, artifacts=artifacts
    )


# ============================================================================
# Main Entry Point
# ============================================================================


def main() -> None:
    """Run the ACS MCP server.

    Supports three transport modes:
    - stdio: Standard MCP protocol via stdin/stdout (default for Claude Desktop)
    - http: HTTP REST API server on port 8000
    - streamable: SSE (Server-Sent Events) transport for streaming responses

    Usage:
        uv run chuk-mcp-acs           # stdio mode (default)
        uv run chuk-mcp-acs http      # HTTP mode
        uv run chuk-mcp-acs streamable # SSE mode
    """
    transport = "stdio"

    if len(sys.argv) > 1:
        arg = sys.argv[1].lower()
        if arg in ["http", "--http"]:
            transport = "http"
            logger.warning("Starting ACS MCP Server in HTTP mode on port 8000")
        elif arg in ["streamable", "--streamable", "sse", "--sse"]:
            transport = "streamable"
            logger.warning("Starting ACS MCP Server in Streamable (SSE) mode")

    # Keep the JSON-RPC stream on stdout clean
    if transport == "stdio":
        logging.getLogger("chuk_mcp_server").setLevel(logging.ERROR)
        logging.getLogger("chuk_mcp_server.core").setLevel(logging.ERROR)
        logging.getLogger("chuk_mcp_server.stdio_transport").setLevel(logging.ERROR)

    if transport == "http":
        run(transport=transport, host="0.0.0.0", port=8000)  # nosec B104
    else:
        run(transport=transport)


if __name__ == "__main__":
    main()
