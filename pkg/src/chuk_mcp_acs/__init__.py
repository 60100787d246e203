"""chuk-mcp-acs - Adaptive Cluster Sampling MCP Server and simulation toolkit.

Compares adaptive cluster sampling (ACS) with simple random sampling (SRS)
on simulated spatial populations.

Key exports:
- Models: GridFrame, ClusterSpec, CountFieldSpec, ExperimentConfig
- Designs: draw_srs, draw_acs, partition_into_networks
- Estimators: estimate_srs, estimate_acs, estimate_cluster
- Efficiency: analyze_efficiency, feasible_region
- Experiments: run_experiment and the sweeps
- PopulationManager: chuk-artifacts storage

Example:
    from chuk_mcp_acs import ClusterSpec, RngSeed, generate_population
    from chuk_mcp_acs import partition_into_networks, analyze_efficiency

    frame = generate_population(ClusterSpec(spread_sd=1.0), RngSeed(seed=42))
    partition = partition_into_networks(frame, condition=0)
    report = analyze_efficiency(frame, partition, n1=10, m=10)
"""

from .designs import (
    build_acs_sample,
    draw_acs,
    draw_cluster_sample,
    draw_srs,
    expand_network,
    partition_into_networks,
)
from .efficiency import (
    analyze_efficiency,
    check_superiority,
    decompose_sum_of_squares,
    expected_final_effort,
    feasible_region,
    kappa_values,
    population_feasible_region,
    var_mu_tilde,
    variance_ratio,
)
from .errors import (
    AcsError,
    ConfigError,
    DegeneratePopulationError,
    DegreesOfFreedomError,
    SampleSizeError,
    SpecificationError,
    UndefinedVMRError,
)
from .estimators import estimate_acs, estimate_cluster, estimate_srs
from .experiment import (
    run_experiment,
    run_replicated_comparison,
    sweep_condition_to_adapt,
    sweep_dispersion,
    sweep_hit_level,
    sweep_spread,
)
from .exporters import ResultExporter
from .models import (
    AcsSample,
    ClusterSpec,
    CountFieldSpec,
    DispersionSpec,
    DistributionFamily,
    EfficiencyReport,
    EstimateReport,
    ExperimentConfig,
    ExperimentResult,
    GridFrame,
    Network,
    NetworkPartition,
    RngSeed,
    SrsSample,
    TrendReport,
)
from .population import (
    bin_points_to_frame,
    generate_cluster_points,
    generate_count_field,
    generate_population,
    variance_to_mean_ratio,
)
from .population_manager import PopulationManager

__version__ = "0.1.0"

__all__ = [
    # Core
    "PopulationManager",
    "ResultExporter",
    # Populations
    "GridFrame",
    "ClusterSpec",
    "CountFieldSpec",
    "DispersionSpec",
    "DistributionFamily",
    "RngSeed",
    "generate_cluster_points",
    "bin_points_to_frame",
    "generate_count_field",
    "generate_population",
    "variance_to_mean_ratio",
    # Designs
    "SrsSample",
    "AcsSample",
    "Network",
    "NetworkPartition",
    "draw_srs",
    "draw_acs",
    "build_acs_sample",
    "draw_cluster_sample",
    "expand_network",
    "partition_into_networks",
    # Estimators
    "EstimateReport",
    "estimate_srs",
    "estimate_acs",
    "estimate_cluster",
    # Efficiency
    "EfficiencyReport",
    "decompose_sum_of_squares",
    "variance_ratio",
    "var_mu_tilde",
    "check_superiority",
    "kappa_values",
    "feasible_region",
    "population_feasible_region",
    "expected_final_effort",
    "analyze_efficiency",
    # Experiments
    "ExperimentConfig",
    "ExperimentResult",
    "TrendReport",
    "run_replicated_comparison",
    "sweep_spread",
    "sweep_condition_to_adapt",
    "sweep_dispersion",
    "sweep_hit_level",
    "run_experiment",
    # Errors
    "AcsError",
    "ConfigError",
    "DegeneratePopulationError",
    "DegreesOfFreedomError",
    "SampleSizeError",
    "SpecificationError",
    "UndefinedVMRError",
]
