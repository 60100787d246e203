"""Data models for chuk-mcp-acs.

Strongly typed models for sampling frames, samples, estimates, efficiency
reports and Monte Carlo experiments. Everything is Pydantic with enums and
validation; value types are frozen so they can be shared across threads.
"""

import math
from enum import Enum
from fractions import Fraction
from pathlib import Path
from typing import Annotated, Any, ClassVar, Literal, Optional, Union

import numpy as np
from pydantic import (
    BaseModel,
    BeforeValidator,
    ConfigDict,
    Field,
    computed_field,
    field_validator,
    model_validator,
)

from .errors import SpecificationError


def _parse_real(value: Any) -> Any:
    """Accept fractions written as strings ("2/3") wherever a real is expected."""
    if isinstance(value, str):
        try:
            return float(Fraction(value.strip()))
        except (ValueError, ZeroDivisionError):
            return value
    return value


Real = Annotated[float, BeforeValidator(_parse_real)]
Neighborhood = Literal[4, 8]


# ============================================================================
# Enums and Constants
# ============================================================================


class DistributionFamily(str, Enum):
    """Count distributions and the spatial pattern their VMR describes."""

    UNIFORM_CONSTANT = "uniform-constant"  # VMR = 0, not dispersed
    BINOMIAL = "binomial"  # 0 < VMR < 1, under dispersed
    POISSON = "poisson"  # VMR = 1, random
    NEGATIVE_BINOMIAL = "negative-binomial"  # VMR > 1, over dispersed


class FieldLayout(str, Enum):
    """How cell counts of a count field relate to their neighbours."""

    INDEPENDENT = "independent"  # every cell drawn independently
    CLUSTERED = "clustered"  # binned Neyman-Scott process, same mean/VMR


class Design(str, Enum):
    """Sampling designs."""

    SRS = "srs"
    ACS = "acs"
    CLUSTER = "cluster"


class SrsSizeMode(str, Enum):
    """How the SRS comparison size m is chosen in experiments."""

    INITIAL = "initial"  # m = n1 unless given explicitly
    EFFORT = "effort"  # m = expected ACS final effort


class SweepAxis(str, Enum):
    """Experiment sweep axes."""

    NONE = "none"
    SPREAD = "spread_sd"
    CONDITION = "condition"
    DISPERSION = "target_vmr"
    HIT_LEVEL = "target_mean"


class TrendDirection(str, Enum):
    """Expected direction of a relative-precision trend."""

    NONDECREASING = "nondecreasing"
    NONINCREASING = "nonincreasing"


class OutputFormat(str, Enum):
    """File formats written by the command line tool."""

    CSV = "csv"
    JSON = "json"
    SVG = "svg"


class RegionClass(str, Enum):
    """Where an SRS size m falls relative to the m = N(1 - kappa1) line."""

    FEASIBLE = "feasible"
    INFEASIBLE = "infeasible"
    TOTAL_ENUMERATION = "total-enumeration"
    IMPOSSIBLE = "impossible"


# ============================================================================
# Randomness
# ============================================================================


class RngSeed(BaseModel):
    """Seed plus stream id; equal values reproduce identical draws."""

    model_config = ConfigDict(frozen=True)

    seed: int = Field(ge=0, lt=2**64)
    stream_id: int = Field(default=0, ge=0)

    def generator(self, *keys: int) -> np.random.Generator:
        """Create the numpy generator for this stream (optionally a sub-stream)."""
        sequence = np.random.SeedSequence(self.seed, spawn_key=(self.stream_id, *keys))
        return np.random.default_rng(sequence)


# ============================================================================
# Population Specifications
# ============================================================================


class ClusterSpec(BaseModel):
    """Bivariate-normal clusters around uniformly placed centres."""

    model_config = ConfigDict(frozen=True, extra="forbid")

    kind: Literal["cluster"] = "cluster"
    n_centers: int = Field(default=5, ge=1)
    points_per_center: int = Field(default=50, ge=1)
    spread_sd: Real = Field(default=1.0, gt=0.0, description="Standard deviation in grid units")
    width: int = Field(default=20, ge=2)
    height: int = Field(default=20, ge=2)


class DispersionSpec(BaseModel):
    """Count distribution parameterised by mean and variance-to-mean ratio."""

    model_config = ConfigDict(frozen=True, extra="forbid")

    family: DistributionFamily
    target_mean: Real = Field(ge=0.0)
    target_vmr: Real = Field(ge=0.0)
    layout: FieldLayout = FieldLayout.INDEPENDENT
    cluster_sd: Real = Field(default=1.0, gt=0.0, description="Offspring spread (clustered)")

    @model_validator(mode="after")
    def _check_family(self) -> "DispersionSpec":
        family, vmr, mean = self.family, self.target_vmr, self.target_mean
        if family == DistributionFamily.UNIFORM_CONSTANT:
            if vmr != 0.0:
                raise ValueError(f"uniform-constant requires target_vmr = 0, got {vmr}")
            if mean != int(mean):
                raise ValueError(f"uniform-constant requires an integral mean, got {mean}")
        elif family == DistributionFamily.BINOMIAL:
            if not 0.0 < vmr < 1.0:
                raise ValueError(f"binomial requires 0 < target_vmr < 1, got {vmr}")
            trials = mean / (1.0 - vmr)
            if not math.isclose(trials, round(trials), rel_tol=0.0, abs_tol=1e-9):
                raise ValueError(
                    f"binomial needs target_mean / (1 - target_vmr) integral, got {trials}"
                )
        elif family == DistributionFamily.POISSON:
            if vmr != 1.0:
                raise ValueError(f"poisson requires target_vmr = 1, got {vmr}")
        elif vmr <= 1.0:
            raise ValueError(f"negative-binomial requires target_vmr > 1, got {vmr}")
        return self


class CountFieldSpec(DispersionSpec):
    """A dispersion spec bound to a frame size (used in experiment configs)."""

    kind: Literal["count-field"] = "count-field"
    width: int = Field(default=20, ge=1)
    height: int = Field(default=20, ge=1)


PopulationSpec = Annotated[Union[ClusterSpec, CountFieldSpec], Field(discriminator="kind")]


# ============================================================================
# Frames and Point Fields
# ============================================================================


class GridFrame(BaseModel):
    """Rectangular sampling frame of unit cells holding nonnegative counts.

    Cell (x, y) covers [x, x + 1) x [y, y + 1) and has index y * width + x
    (row-major, zero-based).
    """

    model_config = ConfigDict(frozen=True)

    width: int = Field(ge=1)
    height: int = Field(ge=1)
    counts: tuple[int, ...]
    seed: Optional[RngSeed] = None
    spec: Optional[PopulationSpec] = None

    @model_validator(mode="after")
    def _check_counts(self) -> "GridFrame":
        if len(self.counts) != self.width * self.height:
            raise ValueError(
                f"Expected {self.width * self.height} counts for a "
                f"{self.width}x{self.height} frame, got {len(self.counts)}"
            )
        if self.counts and min(self.counts) < 0:
            raise ValueError("Counts must be nonnegative")
        return self

    @property
    def N(self) -> int:
        """Population size in sampling units."""
        return self.width * self.height

    @property
    def total(self) -> int:
        """Sum of all cell counts."""
        return sum(self.counts)

    def index(self, x: int, y: int) -> int:
        """Cell index of column x, row y."""
        return y * self.width + x

    def cell(self, index: int) -> tuple[int, int]:
        """(x, y) of a cell index."""
        return index % self.width, index // self.width

    def count_at(self, x: int, y: int) -> int:
        return self.counts[self.index(x, y)]

    def to_array(self) -> np.ndarray:
        """Counts as a (height, width) int64 array, indexed [y, x]."""
        return np.asarray(self.counts, dtype=np.int64).reshape(self.height, self.width)

    @classmethod
    def from_array(
        cls,
        array: np.ndarray,
        seed: Optional[RngSeed] = None,
        spec: Optional[Union[ClusterSpec, CountFieldSpec]] = None,
    ) -> "GridFrame":
        """Build a frame from a (height, width) array of counts."""
        grid = np.asarray(array)
        if grid.ndim != 2:
            raise ValueError(f"Expected a 2-D count array, got shape {grid.shape}")
        whole = np.equal(np.mod(grid, 1), 0)
        if not np.all(whole):
            bad = grid[~whole].ravel()[0]
            raise SpecificationError(f"Counts must be whole numbers, got {bad!r}")
        height, width = grid.shape
        return cls(
            width=width,
            height=height,
            counts=tuple(int(v) for v in grid.ravel().tolist()),
            seed=seed,
            spec=spec,
        )


class ClusterPoints(BaseModel):
    """Simulated cluster points, kept with their cluster label and frame flag."""

    model_config = ConfigDict(frozen=True)

    width: int
    height: int
    centers: tuple[tuple[float, float], ...]
    points: tuple[tuple[float, float], ...]
    labels: tuple[int, ...]
    in_frame: tuple[bool, ...]

    @model_validator(mode="after")
    def _check_lengths(self) -> "ClusterPoints":
        if not len(self.points) == len(self.labels) == len(self.in_frame):
            raise ValueError("points, labels and in_frame must have equal lengths")
        return self

    @computed_field  # type: ignore[prop-decorator]
    @property
    def in_frame_count(self) -> int:
        return sum(self.in_frame)

    def in_frame_points(self) -> list[tuple[float, float]]:
        return [p for p, keep in zip(self.points, self.in_frame) if keep]


# ============================================================================
# Samples and Networks
# ============================================================================


class SrsSample(BaseModel):
    """Simple random sample without replacement, in draw order."""

    model_config = ConfigDict(frozen=True)

    unit_indices: tuple[int, ...]
    y_values: tuple[int, ...]

    @model_validator(mode="after")
    def _check_sample(self) -> "SrsSample":
        if len(set(self.unit_indices)) != len(self.unit_indices):
            raise ValueError("Sample unit indices must be distinct")
        if len(self.unit_indices) != len(self.y_values):
            raise ValueError("Every sampled unit needs exactly one y-value")
        return self

    @computed_field  # type: ignore[prop-decorator]
    @property
    def m(self) -> int:
        return len(self.unit_indices)


class Network(BaseModel):
    """Set B_k of units that enter the sample together."""

    model_config = ConfigDict(frozen=True)

    unit_indices: tuple[int, ...] = Field(min_length=1)
    y_total: int = Field(ge=0)

    @field_validator("unit_indices")
    @classmethod
    def _sorted_distinct(cls, v: tuple[int, ...]) -> tuple[int, ...]:
        if any(a >= b for a, b in zip(v, v[1:])):
            raise ValueError("Network unit indices must be sorted and distinct")
        return v

    @computed_field  # type: ignore[prop-decorator]
    @property
    def m_k(self) -> int:
        return len(self.unit_indices)

    @computed_field  # type: ignore[prop-decorator]
    @property
    def w_k(self) -> float:
        return self.y_total / len(self.unit_indices)


class NetworkExpansion(BaseModel):
    """Result of expanding one unit: its network plus the edge units seen."""

    model_config = ConfigDict(frozen=True)

    network: Network
    edge_units: tuple[int, ...] = ()


class AcsSample(BaseModel):
    """Initial SRS draw plus the network (and edge units) of every initial unit."""

    model_config = ConfigDict(frozen=True)

    initial_indices: tuple[int, ...] = Field(min_length=1)
    networks: tuple[Network, ...]
    edge_units: tuple[tuple[int, ...], ...]
    edge_values: tuple[tuple[int, ...], ...]
    condition: float
    neighborhood: Neighborhood = 4

    @model_validator(mode="after")
    def _check_sample(self) -> "AcsSample":
        n1 = len(self.initial_indices)
        if len(set(self.initial_indices)) != n1:
            raise ValueError("Initial unit indices must be distinct")
        if not len(self.networks) == len(self.edge_units) == len(self.edge_values) == n1:
            raise ValueError("Need one network, edge set and edge value set per initial unit")
        # Edge units may be drawn as initial units themselves (singletons), but
        # never belong to an expanded network.
        expanded: set[int] = set()
        for unit, network, edges, values in zip(
            self.initial_indices, self.networks, self.edge_units, self.edge_values
        ):
            if unit not in network.unit_indices:
                raise ValueError(f"Initial unit {unit} is missing from its own network")
            if len(edges) != len(values):
                raise ValueError("Every edge unit needs exactly one y-value")
            if edges:
                expanded.update(network.unit_indices)
        if any(unit in expanded for edges in self.edge_units for unit in edges):
            raise ValueError("Edge units must not belong to an expanded network")
        return self

    @computed_field  # type: ignore[prop-decorator]
    @property
    def n1(self) -> int:
        return len(self.initial_indices)

    @computed_field  # type: ignore[prop-decorator]
    @property
    def final_effort(self) -> int:
        """Distinct units visited: networks plus edge units."""
        visited: set[int] = set()
        for network, edges in zip(self.networks, self.edge_units):
            visited.update(network.unit_indices)
            visited.update(edges)
        return len(visited)


class NetworkPartition(BaseModel):
    """Exhaustive partition of the N frame units into K networks."""

    model_config = ConfigDict(frozen=True)

    condition: float
    neighborhood: Neighborhood = 4
    networks: tuple[Network, ...]
    unit_to_network: tuple[int, ...]

    @model_validator(mode="after")
    def _check_partition(self) -> "NetworkPartition":
        if sum(n.m_k for n in self.networks) != len(self.unit_to_network):
            raise ValueError("Network sizes must add up to the number of units")
        for label, network in enumerate(self.networks):
            for unit in network.unit_indices:
                if self.unit_to_network[unit] != label:
                    raise ValueError(f"Unit {unit} is not labelled with network {label}")
        return self

    @computed_field  # type: ignore[prop-decorator]
    @property
    def K(self) -> int:
        return len(self.networks)

    @property
    def N(self) -> int:
        return len(self.unit_to_network)

    def network_of(self, index: int) -> Network:
        """Network B_k(i) containing unit i."""
        return self.networks[self.unit_to_network[index]]


class ClusterPartitionSpec(BaseModel):
    """Predefined clusters for traditional cluster sampling.

    cluster_assignment[i] is the cluster id of cell i. Cluster ids are
    arbitrary nonnegative integers; N_cl is the number of distinct ids.
    """

    model_config = ConfigDict(frozen=True)

    cluster_assignment: tuple[int, ...] = Field(min_length=1)
    n_cl: int = Field(ge=1, description="Number of clusters to sample")

    @field_validator("cluster_assignment")
    @classmethod
    def _nonnegative_ids(cls, v: tuple[int, ...]) -> tuple[int, ...]:
        if min(v) < 0:
            raise ValueError("Cluster ids must be nonnegative")
        return v

    @computed_field  # type: ignore[prop-decorator]
    @property
    def N_cl(self) -> int:
        return len(set(self.cluster_assignment))

    @property
    def M_0(self) -> int:
        return len(self.cluster_assignment)

    def members(self) -> dict[int, tuple[int, ...]]:
        """Cell indices of every cluster, keyed by cluster id in ascending order."""
        grouped: dict[int, list[int]] = {}
        for cell, cluster_id in enumerate(self.cluster_assignment):
            grouped.setdefault(cluster_id, []).append(cell)
        return {cid: tuple(grouped[cid]) for cid in sorted(grouped)}


class ClusterData(BaseModel):
    """Unit values grouped by cluster, with the derived cluster-level quantities.

    Symbols: N_cl clusters, M_i units in cluster i, Y_i = sum of cluster i,
    Ybar_i = Y_i / M_i, M_0 = sum M_i, Mbar = M_0 / N_cl, Y = sum Y_i,
    Ybar = Y / N_cl (per cluster) and Ybarbar = Y / M_0 (per unit).
    """

    model_config = ConfigDict(frozen=True)

    cluster_values: tuple[tuple[int, ...], ...] = Field(min_length=1)

    @field_validator("cluster_values")
    @classmethod
    def _nonempty_clusters(cls, v: tuple[tuple[int, ...], ...]) -> tuple[tuple[int, ...], ...]:
        if any(len(values) == 0 for values in v):
            raise ValueError("Every cluster needs at least one unit")
        return v

    @computed_field  # type: ignore[prop-decorator]
    @property
    def N_cl(self) -> int:
        return len(self.cluster_values)

    @computed_field  # type: ignore[prop-decorator]
    @property
    def M_i(self) -> tuple[int, ...]:
        return tuple(len(values) for values in self.cluster_values)

    @computed_field  # type: ignore[prop-decorator]
    @property
    def M_0(self) -> int:
        return sum(self.M_i)

    @computed_field  # type: ignore[prop-decorator]
    @property
    def M_bar(self) -> float:
        return self.M_0 / self.N_cl

    @computed_field  # type: ignore[prop-decorator]
    @property
    def Y_i(self) -> tuple[int, ...]:
        return tuple(sum(values) for values in self.cluster_values)

    @computed_field  # type: ignore[prop-decorator]
    @property
    def Ybar_i(self) -> tuple[float, ...]:
        return tuple(total / size for total, size in zip(self.Y_i, self.M_i))

    @computed_field  # type: ignore[prop-decorator]
    @property
    def Y(self) -> int:
        return sum(self.Y_i)

    @computed_field  # type: ignore[prop-decorator]
    @property
    def Ybar(self) -> float:
        return self.Y / self.N_cl

    @computed_field  # type: ignore[prop-decorator]
    @property
    def Ybarbar(self) -> float:
        return self.Y / self.M_0


class ClusterSample(BaseModel):
    """Clusters drawn by SRS without replacement over cluster ids."""

    model_config = ConfigDict(frozen=True)

    cluster_ids: tuple[int, ...] = Field(min_length=1)
    unit_indices: tuple[tuple[int, ...], ...]
    y_values: tuple[tuple[int, ...], ...]
    M_0: int = Field(ge=1)
    N_cl: int = Field(ge=1)

    @computed_field  # type: ignore[prop-decorator]
    @property
    def n_cl(self) -> int:
        return len(self.cluster_ids)

    def to_cluster_data(self) -> ClusterData:
        return ClusterData(cluster_values=self.y_values)


# ============================================================================
# Estimates
# ============================================================================


class EstimateReport(BaseModel):
    """Point and variance estimates on the per-unit and population-total scales."""

    model_config = ConfigDict(frozen=True)

    CSV_HEADER: ClassVar[tuple[str, ...]] = (
        "design",
        "n_or_n1",
        "final_effort",
        "mean",
        "total",
        "var_mean",
        "var_total",
        "seed",
    )

    design: Design
    mean_estimate: float
    total_estimate: float
    variance_of_mean: float = Field(ge=0.0)
    variance_of_total: float = Field(ge=0.0)
    sample_size: int = Field(ge=1, description="m, n1 or number of sampled clusters")
    final_effort: Optional[int] = None
    seed: Optional[int] = None

    def csv_row(self) -> list[Any]:
        return [
            self.design.value,
            self.sample_size,
            "" if self.final_effort is None else self.final_effort,
            repr(self.mean_estimate),
            repr(self.total_estimate),
            repr(self.variance_of_mean),
            repr(self.variance_of_total),
            "" if self.seed is None else self.seed,
        ]


# ============================================================================
# Efficiency Analysis
# ============================================================================


class DecompositionReport(BaseModel):
    """Within/between network split of the population sum of squares."""

    model_config = ConfigDict(frozen=True)

    N: int
    K: int
    mu: float
    sigma2: float = Field(ge=0.0, description="Population variance, divisor N - 1")
    total_ss: float = Field(ge=0.0)
    within_ss: float = Field(ge=0.0)
    between_ss: float = Field(ge=0.0)


class SuperiorityCheck(BaseModel):
    """Both sides of (1/n1 - 1/m) sigma^2 < (N - n1)/(n1 N) * within_ss/(N - 1)."""

    model_config = ConfigDict(frozen=True)

    lhs: float
    rhs: float
    holds: bool


class SuperiorityPredicates(BaseModel):
    """The ACS-beats-SRS condition in its four equivalent forms, evaluated exactly."""

    model_config = ConfigDict(frozen=True)

    ratio_below_one: bool  # Var(ACS)/Var(SRS) < 1
    network_inequality: bool  # (1/n1 - 1/m) sigma^2 < ... within_ss
    variance_inequality: bool  # (1/m - 1/N) sigma^2 > Var(mu~)
    linear_inequality: bool  # m < N (1 - kappa1)

    @computed_field  # type: ignore[prop-decorator]
    @property
    def agree(self) -> bool:
        return (
            self.ratio_below_one
            == self.network_inequality
            == self.variance_inequality
            == self.linear_inequality
        )


class KappaValues(BaseModel):
    """kappa = Var(mu~)/sigma^2 and kappa1 = Var(mu~)/Var(ybar_m) = m kappa."""

    model_config = ConfigDict(frozen=True)

    kappa: float
    kappa1: float


class FeasibleRegion(BaseModel):
    """SRS sizes below the line m = N (1 - kappa1) where ACS is superior."""

    model_config = ConfigDict(frozen=True)

    N: int = Field(ge=1)
    kappa1: float = Field(ge=0.0)
    m_bound: float
    m_min: int = 1
    m_max: Optional[int] = None

    @computed_field  # type: ignore[prop-decorator]
    @property
    def is_empty(self) -> bool:
        return self.m_max is None

    def contains(self, m: int) -> bool:
        return self.m_max is not None and self.m_min <= m <= self.m_max

    def classify(self, m: int) -> RegionClass:
        if m > self.N:
            return RegionClass.IMPOSSIBLE
        if m == self.N:
            return RegionClass.TOTAL_ENUMERATION
        return RegionClass.FEASIBLE if self.contains(m) else RegionClass.INFEASIBLE


class EfficiencyReport(BaseModel):
    """Population-level comparison of ACS (initial size n1) against SRS (size m)."""

    model_config = ConfigDict(frozen=True)

    CSV_HEADER: ClassVar[tuple[str, ...]] = (
        "N",
        "n1",
        "m",
        "condition",
        "K",
        "total_ss",
        "within_ss",
        "between_ss",
        "sigma2",
        "variance_ratio",
        "var_mu_tilde",
        "var_ybar_m",
        "var_ybar_m_fpc",
        "kappa",
        "kappa1",
        "feasible_m_bound",
        "superiority_lhs",
        "superiority_rhs",
        "acs_superior",
        "expected_final_effort",
    )

    N: int
    n1: int
    m: int
    condition: float
    neighborhood: Neighborhood = 4
    decomposition: DecompositionReport
    variance_ratio: float
    var_mu_tilde: float = Field(ge=0.0)
    var_ybar_m: float = Field(ge=0.0, description="sigma^2 / m, no finite population correction")
    var_ybar_m_fpc: float = Field(ge=0.0, description="(1/m - 1/N) sigma^2")
    kappa: float
    kappa1: float
    feasible_m_bound: float
    superiority_lhs: float
    superiority_rhs: float
    acs_superior: bool
    predicates: SuperiorityPredicates
    expected_final_effort: float

    def csv_row(self) -> list[Any]:
        d = self.decomposition
        return [
            self.N,
            self.n1,
            self.m,
            repr(self.condition),
            d.K,
            repr(d.total_ss),
            repr(d.within_ss),
            repr(d.between_ss),
            repr(d.sigma2),
            repr(self.variance_ratio),
            repr(self.var_mu_tilde),
            repr(self.var_ybar_m),
            repr(self.var_ybar_m_fpc),
            repr(self.kappa),
            repr(self.kappa1),
            repr(self.feasible_m_bound),
            repr(self.superiority_lhs),
            repr(self.superiority_rhs),
            str(self.acs_superior).lower(),
            repr(self.expected_final_effort),
        ]


# ============================================================================
# Experiment Configuration
# ============================================================================


class DesignConfig(BaseModel):
    """Sampling design settings shared by every sweep point."""

    model_config = ConfigDict(frozen=True, extra="forbid")

    n1: int = Field(default=10, ge=2)
    m: Optional[int] = Field(default=None, ge=2)
    condition: Real = Field(default=0.0, ge=0.0)
    neighborhood: Neighborhood = 4
    srs_size: SrsSizeMode = SrsSizeMode.INITIAL

    @model_validator(mode="after")
    def _check_sizes(self) -> "DesignConfig":
        if self.srs_size == SrsSizeMode.EFFORT and self.m is not None:
            raise ValueError("m cannot be given when srs_size is 'effort'")
        return self


class SweepConfig(BaseModel):
    """Sweep axes; empty lists are skipped."""

    model_config = ConfigDict(frozen=True, extra="forbid")

    spread_sd: list[Real] = Field(default_factory=list)
    condition: list[Real] = Field(default_factory=list)
    target_vmr: list[Real] = Field(default_factory=list)
    target_mean: list[Real] = Field(default_factory=list)

    def axes(self) -> list[tuple[SweepAxis, list[float]]]:
        pairs = [
            (SweepAxis.SPREAD, self.spread_sd),
            (SweepAxis.CONDITION, self.condition),
            (SweepAxis.DISPERSION, self.target_vmr),
            (SweepAxis.HIT_LEVEL, self.target_mean),
        ]
        return [(axis, list(values)) for axis, values in pairs if values]


class ExperimentConfig(BaseModel):
    """Monte Carlo comparison of ACS against SRS."""

    model_config = ConfigDict(frozen=True, extra="forbid")

    schema_version: Literal[1] = 1
    population: PopulationSpec = Field(default_factory=ClusterSpec)
    design: DesignConfig = Field(default_factory=DesignConfig)
    replicates: int = Field(default=100, ge=1)
    seed: int = Field(default=42, ge=0, lt=2**64)
    regenerate_population: bool = False
    share_centers: bool = False
    trend_tolerance: Real = Field(
        default=0.0, ge=0.0, description="Relative slack for trend verdicts"
    )
    sweep: SweepConfig = Field(default_factory=SweepConfig)

    @property
    def width(self) -> int:
        return self.population.width

    @property
    def height(self) -> int:
        return self.population.height


class RunConfig(BaseModel):
    """Command line run settings."""

    model_config = ConfigDict(frozen=True)

    output_dir: Path
    formats: frozenset[OutputFormat] = Field(
        default=frozenset({OutputFormat.CSV, OutputFormat.JSON}), min_length=1
    )
    verbosity: int = Field(default=0, ge=0)
    threads: Optional[int] = Field(default=None, ge=1)

    def wants(self, fmt: OutputFormat) -> bool:
        return fmt in self.formats


# ============================================================================
# Experiment Results
# ============================================================================


class ReplicateRecord(BaseModel):
    """ACS and SRS estimates (total scale) from one replicate."""

    model_config = ConfigDict(frozen=True)

    replicate: int
    population_total: int
    acs: EstimateReport
    srs: EstimateReport

    @computed_field  # type: ignore[prop-decorator]
    @property
    def degenerate(self) -> bool:
        """Either design estimated a zero variance."""
        return self.acs.variance_of_total == 0.0 or self.srs.variance_of_total == 0.0


class SummaryStats(BaseModel):
    """Across-replicate averages and spreads (divisor = replicate count)."""

    model_config = ConfigDict(frozen=True)

    mu_acs_avg: float
    mu_acs_spread: float
    var_acs_avg: float
    var_acs_spread: float
    mu_srs_avg: float
    mu_srs_spread: float
    var_srs_avg: float
    var_srs_spread: float


class SummaryRow(BaseModel):
    """One Table-2-shaped row of the summary CSV."""

    model_config = ConfigDict(frozen=True)

    CSV_HEADER: ClassVar[tuple[str, ...]] = (
        "axis",
        "axis_value",
        "realized_total",
        "n1",
        "m",
        "condition",
        "replicates",
        "mu_acs_avg",
        "mu_acs_spread",
        "var_acs_avg",
        "var_acs_spread",
        "mu_srs_avg",
        "mu_srs_spread",
        "var_srs_avg",
        "var_srs_spread",
        "relative_efficiency",
        "mean_of_ratios",
        "theoretical_relative_efficiency",
        "mean_final_effort",
        "included",
        "excluded",
    )

    axis: SweepAxis
    axis_value: Optional[float]
    realized_total: float
    n1: int
    m: int
    condition: float
    replicates: int
    summary: SummaryStats
    relative_efficiency: Optional[float]
    mean_of_ratios: Optional[float]
    theoretical_relative_efficiency: Optional[float]
    mean_final_effort: float
    included: int
    excluded: int

    def csv_row(self) -> list[Any]:
        def num(value: Optional[float]) -> str:
            return "" if value is None else repr(float(value))

        s = self.summary
        return [
            self.axis.value,
            num(self.axis_value),
            num(self.realized_total),
            self.n1,
            self.m,
            num(self.condition),
            self.replicates,
            num(s.mu_acs_avg),
            num(s.mu_acs_spread),
            num(s.var_acs_avg),
            num(s.var_acs_spread),
            num(s.mu_srs_avg),
            num(s.mu_srs_spread),
            num(s.var_srs_avg),
            num(s.var_srs_spread),
            num(self.relative_efficiency),
            num(self.mean_of_ratios),
            num(self.theoretical_relative_efficiency),
            num(self.mean_final_effort),
            self.included,
            self.excluded,
        ]


class ExperimentResult(BaseModel):
    """Replicated ACS vs SRS comparison at one sweep point."""

    model_config = ConfigDict(frozen=True)

    axis: SweepAxis = SweepAxis.NONE
    axis_value: Optional[float] = None
    n1: int
    m: int
    condition: float
    population_total: float
    records: tuple[ReplicateRecord, ...]
    summary: SummaryStats
    relative_precision: Optional[float]
    mean_of_ratios: Optional[float]
    included: int = Field(ge=0)
    excluded: int = Field(ge=0)
    degenerate_population: bool = False
    theoretical_relative_efficiency: Optional[float] = None
    mean_final_effort: float

    @model_validator(mode="after")
    def _check_accounting(self) -> "ExperimentResult":
        if self.included + self.excluded != len(self.records):
            raise ValueError("included + excluded must equal the number of replicates")
        return self

    @computed_field  # type: ignore[prop-decorator]
    @property
    def replicates(self) -> int:
        return len(self.records)

    def summary_row(self) -> SummaryRow:
        return SummaryRow(
            axis=self.axis,
            axis_value=self.axis_value,
            realized_total=self.population_total,
            n1=self.n1,
            m=self.m,
            condition=self.condition,
            replicates=self.replicates,
            summary=self.summary,
            relative_efficiency=self.relative_precision,
            mean_of_ratios=self.mean_of_ratios,
            theoretical_relative_efficiency=self.theoretical_relative_efficiency,
            mean_final_effort=self.mean_final_effort,
            included=self.included,
            excluded=self.excluded,
        )


class TrendReport(BaseModel):
    """Relative precision along one sweep axis and its monotonicity verdict."""

    model_config = ConfigDict(frozen=True)

    axis: SweepAxis
    values: tuple[float, ...]
    relative_precision: tuple[Optional[float], ...]
    theoretical_relative_efficiency: tuple[Optional[float], ...] = ()
    included: tuple[int, ...]
    excluded: tuple[int, ...]
    direction: TrendDirection
    tolerance: float = Field(default=0.0, ge=0.0, description="Relative slack per step")

    @model_validator(mode="after")
    def _check_lengths(self) -> "TrendReport":
        n = len(self.values)
        if not len(self.relative_precision) == len(self.included) == len(self.excluded) == n:
            raise ValueError("Trend series must all have one entry per axis value")
        return self

    @computed_field  # type: ignore[prop-decorator]
    @property
    def monotone(self) -> bool:
        """Defined points follow the expected direction within the tolerance."""
        series = [v for v in self.relative_precision if v is not None]
        for previous, current in zip(series, series[1:]):
            if self.direction == TrendDirection.NONDECREASING:
                if current < previous * (1.0 - self.tolerance):
                    return False
            elif current > previous * (1.0 + self.tolerance):
                return False
        return True


class SweepResult(BaseModel):
    """All sweep points along one axis plus the trend they form."""

    model_config = ConfigDict(frozen=True)

    axis: SweepAxis
    points: tuple[ExperimentResult, ...]
    trend: Optional[TrendReport] = None


class ExperimentRun(BaseModel):
    """Every sweep configured in an ExperimentConfig."""

    model_config = ConfigDict(frozen=True)

    config: ExperimentConfig
    sweeps: tuple[SweepResult, ...]

    def summary_rows(self) -> list[SummaryRow]:
        return [point.summary_row() for sweep in self.sweeps for point in sweep.points]


# ============================================================================
# API Request/Response Models
# ============================================================================


class GeneratePopulationResponse(BaseModel):
    """Response from generating a population."""

    population_id: str
    width: int
    height: int
    total: int
    vmr: Optional[float] = None
    message: str = "Population generated successfully"


class GetPopulationResponse(BaseModel):
    """Response containing a stored population."""

    population_id: str
    population: GridFrame


class DrawSampleResponse(BaseModel):
    """Response from drawing a sample."""

    population_id: str
    design: Design
    srs: Optional[SrsSample] = None
    acs: Optional[AcsSample] = None
    cluster: Optional[ClusterSample] = None


class EstimateResponse(BaseModel):
    """Response containing an estimate."""

    population_id: str
    report: EstimateReport


class EfficiencyResponse(BaseModel):
    """Response containing an efficiency report."""

    population_id: str
    report: EfficiencyReport
    feasible_region: FeasibleRegion


class ExperimentResponse(BaseModel):
    """Response from running an experiment configuration."""

    summary: list[SummaryRow]
    trends: list[TrendReport]
    message: str = "Experiment completed successfully"


class ExportPopulationResponse(BaseModel):
    """Response from exporting a population."""

    population_id: str
    format: OutputFormat
    artifacts: dict[str, str] = Field(default_factory=dict)
    message: str = "Population exported successfully"
