"""Monte Carlo comparison of ACS against SRS.

Each sweep point draws one population (or one per replicate when
``regenerate_population`` is set) and runs replicated designs on it. Within a
replicate ACS and SRS share a single ordered SRS draw: the first n1 units
seed ACS and the first m units form the SRS sample.

Random streams:

- replicate r draws its sample from ``RngSeed(seed, r).generator()``
- sweep point p builds its population from ``RngSeed(seed, p).generator(0)``,
  or ``.generator(0, r + 1)`` for replicate r when populations are regenerated
- shared cluster centres come from ``RngSeed(seed, 0).generator(1)``
"""

import logging
import math
from concurrent.futures import ThreadPoolExecutor
from typing import Any, Optional, Sequence, TypeVar

import numpy as np
from pydantic import BaseModel

from .config import Config
from .designs import build_acs_sample, draw_srs, partition_into_networks
from .efficiency import decompose_sum_of_squares, expected_final_effort, variance_ratio
from .errors import SampleSizeError, SpecificationError
from .estimators import estimate_acs, estimate_srs
from .models import (
    ClusterSpec,
    CountFieldSpec,
    DesignConfig,
    ExperimentConfig,
    ExperimentResult,
    ExperimentRun,
    GridFrame,
    NetworkPartition,
    ReplicateRecord,
    RngSeed,
    SrsSample,
    SrsSizeMode,
    SummaryStats,
    SweepAxis,
    SweepResult,
    TrendDirection,
    TrendReport,
)
from .population import DEFAULT_SPREADS, dispersion_family_for, draw_centers, generate_population

logger = logging.getLogger(__name__)

M = TypeVar("M", bound=BaseModel)

TREND_DIRECTIONS: dict[SweepAxis, TrendDirection] = {
    SweepAxis.SPREAD: TrendDirection.NONINCREASING,
    SweepAxis.CONDITION: TrendDirection.NONINCREASING,
    SweepAxis.DISPERSION: TrendDirection.NONDECREASING,
    SweepAxis.HIT_LEVEL: TrendDirection.NONINCREASING,
}


def _with(model: M, **changes: Any) -> M:
    """Validated copy of a frozen model with some fields replaced."""
    return type(model).model_validate({**model.model_dump(), **changes})


def _population_stream(config: ExperimentConfig, point: int, replicate: Optional[int] = None):
    seed = RngSeed(seed=config.seed, stream_id=point)
    return seed.generator(0) if replicate is None else seed.generator(0, replicate + 1)


def resolve_srs_size(
    design: DesignConfig, frame: GridFrame, partition: NetworkPartition
) -> int:
    """SRS size m for a population: explicit, equal to n1, or the expected ACS effort."""
    if design.srs_size == SrsSizeMode.EFFORT:
        effort = expected_final_effort(frame, partition, design.n1)
        if frame.N - 1 < 2:
            raise SampleSizeError(f"Equal-effort SRS needs N >= 3, got {frame.N}")
        return min(max(int(round(effort)), 2), frame.N - 1)
    return design.m if design.m is not None else design.n1


def _check_design(design: DesignConfig, frame: GridFrame, m: int) -> None:
    if design.n1 > frame.N:
        raise SampleSizeError(f"Initial sample size {design.n1} exceeds population size {frame.N}")
    if m > frame.N:
        raise SampleSizeError(f"SRS sample size {m} exceeds population size {frame.N}")


def _average(values: Sequence[float]) -> float:
    return math.fsum(values) / len(values)


def _spread(values: Sequence[float]) -> float:
    mean = _average(values)
    return math.fsum((v - mean) ** 2 for v in values) / len(values)


def summarize(records: Sequence[ReplicateRecord]) -> SummaryStats:
    """Across-replicate averages and spreads of the total-scale estimates."""
    mu_acs = [r.acs.total_estimate for r in records]
    var_acs = [r.acs.variance_of_total for r in records]
    mu_srs = [r.srs.total_estimate for r in records]
    var_srs = [r.srs.variance_of_total for r in records]
    return SummaryStats(
        mu_acs_avg=_average(mu_acs),
        mu_acs_spread=_spread(mu_acs),
        var_acs_avg=_average(var_acs),
        var_acs_spread=_spread(var_acs),
        mu_srs_avg=_average(mu_srs),
        mu_srs_spread=_spread(mu_srs),
        var_srs_avg=_average(var_srs),
        var_srs_spread=_spread(var_srs),
    )


def _theoretical_relative_efficiency(
    frame: GridFrame, partition: NetworkPartition, n1: int, m: int
) -> Optional[float]:
    if m >= frame.N or n1 >= frame.N:
        return None
    if decompose_sum_of_squares(frame, partition).total_ss == 0.0:
        return None
    ratio = variance_ratio(frame, partition, n1, m)
    return 1.0 / ratio if ratio > 0.0 else None


# ============================================================================
# Replicated comparison
# ============================================================================


def run_replicated_comparison(
    config: ExperimentConfig,
    population: Optional[GridFrame] = None,
    axis: SweepAxis = SweepAxis.NONE,
    axis_value: Optional[float] = None,
    point: int = 0,
    centers: Optional[np.ndarray] = None,
    max_workers: Optional[int] = None,
) -> ExperimentResult:
    """Run config.replicates paired ACS/SRS draws and summarise them.

    Args:
        config: Experiment configuration (population spec and design)
        population: Fixed population to sample; generated from the point's
            stream when omitted (ignored when populations are regenerated)
        axis: Sweep axis this point belongs to
        axis_value: Value of the swept parameter
        point: Sweep point index, selects the population stream
        centers: Optional shared cluster centres
        max_workers: Worker threads (defaults to Config.get_thread_count())

    Returns:
        ExperimentResult with per-replicate records in replicate order
    """
    design = config.design
    spec = config.population
    regenerate = config.regenerate_population

    fixed_frame: Optional[GridFrame] = None
    fixed_partition: Optional[NetworkPartition] = None
    fixed_m: Optional[int] = None
    if not regenerate:
        fixed_frame = (
            population
            if population is not None
            else generate_population(spec, _population_stream(config, point), centers=centers)
        )
        fixed_partition = partition_into_networks(
            fixed_frame, design.condition, design.neighborhood
        )
        fixed_m = resolve_srs_size(design, fixed_frame, fixed_partition)
        _check_design(design, fixed_frame, fixed_m)

    def replicate(r: int) -> tuple[ReplicateRecord, int]:
        if fixed_frame is not None and fixed_partition is not None and fixed_m is not None:
            frame, partition, m = fixed_frame, fixed_partition, fixed_m
        else:
            frame = generate_population(
                spec, _population_stream(config, point, r), centers=centers
            )
            partition = partition_into_networks(frame, design.condition, design.neighborhood)
            m = resolve_srs_size(design, frame, partition)
            _check_design(design, frame, m)

        draw = draw_srs(frame, max(design.n1, m), RngSeed(seed=config.seed, stream_id=r))
        acs_sample = build_acs_sample(
            frame,
            draw.unit_indices[: design.n1],
            design.condition,
            neighborhood=design.neighborhood,
            partition=partition,
        )
        srs_sample = SrsSample(unit_indices=draw.unit_indices[:m], y_values=draw.y_values[:m])
        record = ReplicateRecord(
            replicate=r,
            population_total=frame.total,
            acs=estimate_acs(acs_sample, frame.N, seed=config.seed),
            srs=estimate_srs(srs_sample, frame.N, seed=config.seed),
        )
        logger.debug(
            f"Replicate {r}: ACS var {record.acs.variance_of_total:.4g}, "
            f"SRS var {record.srs.variance_of_total:.4g}"
        )
        return record, m

    workers = max_workers or Config.get_thread_count()
    with ThreadPoolExecutor(max_workers=workers) as executor:
        outcomes = list(executor.map(replicate, range(config.replicates)))

    records = tuple(record for record, _ in outcomes)
    m_used = fixed_m if fixed_m is not None else int(round(_average([m for _, m in outcomes])))
    included = [r for r in records if not r.degenerate]
    excluded = len(records) - len(included)

    relative_precision: Optional[float] = None
    mean_of_ratios: Optional[float] = None
    if included:
        relative_precision = _average([r.srs.variance_of_total for r in included]) / _average(
            [r.acs.variance_of_total for r in included]
        )
        mean_of_ratios = _average(
            [r.srs.variance_of_total / r.acs.variance_of_total for r in included]
        )

    if fixed_frame is not None and fixed_partition is not None:
        population_total = float(fixed_frame.total)
        degenerate_population = (
            decompose_sum_of_squares(fixed_frame, fixed_partition).total_ss == 0.0
        )
        theoretical = (
            None
            if degenerate_population
            else _theoretical_relative_efficiency(
                fixed_frame, fixed_partition, design.n1, m_used
            )
        )
    else:
        population_total = _average([r.population_total for r in records])
        degenerate_population = all(r.population_total == 0 for r in records)
        theoretical = None

    if degenerate_population:
        logger.warning(f"Degenerate population at {axis.value}={axis_value}: no variation")
    elif excluded:
        logger.warning(
            f"{excluded}/{len(records)} degenerate replicates excluded at "
            f"{axis.value}={axis_value}"
        )

    result = ExperimentResult(
        axis=axis,
        axis_value=axis_value,
        n1=design.n1,
        m=m_used,
        condition=design.condition,
        population_total=population_total,
        records=records,
        summary=summarize(records),
        relative_precision=relative_precision,
        mean_of_ratios=mean_of_ratios,
        included=len(included),
        excluded=excluded,
        degenerate_population=degenerate_population,
        theoretical_relative_efficiency=theoretical,
        mean_final_effort=_average([float(r.acs.final_effort or 0) for r in records]),
    )
    rp = "undefined" if relative_precision is None else f"{relative_precision:.4f}"
    logger.info(
        f"Sweep point {axis.value}={axis_value}: relative precision {rp} "
        f"({len(included)} included, {excluded} excluded)"
    )
    return result


# ============================================================================
# Trends
# ============================================================================


def build_trend(
    axis: SweepAxis,
    values: Sequence[float],
    results: Sequence[ExperimentResult],
    tolerance: float = 0.0,
) -> TrendReport:
    """TrendReport of relative precision along a sweep axis."""
    return TrendReport(
        axis=axis,
        values=tuple(float(v) for v in values),
        relative_precision=tuple(r.relative_precision for r in results),
        theoretical_relative_efficiency=tuple(
            r.theoretical_relative_efficiency for r in results
        ),
        included=tuple(r.included for r in results),
        excluded=tuple(r.excluded for r in results),
        direction=TREND_DIRECTIONS[axis],
        tolerance=tolerance,
    )


def _mean_defined(values: Sequence[Optional[float]]) -> Optional[float]:
    defined = [v for v in values if v is not None]
    return _average(defined) if defined else None


def merge_trend_reports(
    reports: Sequence[TrendReport], tolerance: Optional[float] = None
) -> TrendReport:
    """Average trend reports of the same sweep run under different seeds.

    Relative precision is averaged over the reports where it is defined;
    included and excluded counts are summed.
    """
    if not reports:
        raise ValueError("Need at least one trend report to merge")
    first = reports[0]
    for report in reports[1:]:
        if report.axis != first.axis or report.values != first.values:
            raise ValueError(
                f"Cannot merge trends over {report.axis.value}={report.values} "
                f"with {first.axis.value}={first.values}"
            )

    columns = range(len(first.values))
    has_theory = all(len(r.theoretical_relative_efficiency) == len(first.values) for r in reports)
    return TrendReport(
        axis=first.axis,
        values=first.values,
        relative_precision=tuple(
            _mean_defined([r.relative_precision[i] for r in reports]) for i in columns
        ),
        theoretical_relative_efficiency=(
            tuple(
                _mean_defined([r.theoretical_relative_efficiency[i] for r in reports])
                for i in columns
            )
            if has_theory
            else ()
        ),
        included=tuple(sum(r.included[i] for r in reports) for i in columns),
        excluded=tuple(sum(r.excluded[i] for r in reports) for i in columns),
        direction=first.direction,
        tolerance=first.tolerance if tolerance is None else tolerance,
    )


# ============================================================================
# Sweeps
# ============================================================================


def _check_ascending(name: str, values: Sequence[float], minimum: float, strict_min: bool) -> None:
    if not values:
        raise ValueError(f"{name} sweep needs at least one value")
    for value in values:
        if value < minimum or (strict_min and value == minimum):
            bound = ">" if strict_min else ">="
            raise SpecificationError(f"{name} values must be {bound} {minimum}, got {value}")
    if any(b <= a for a, b in zip(values, values[1:])):
        raise ValueError(f"{name} values must be strictly ascending, got {list(values)}")


def _count_field_spec(config: ExperimentConfig, axis: SweepAxis) -> CountFieldSpec:
    if not isinstance(config.population, CountFieldSpec):
        raise SpecificationError(f"{axis.value} sweeps need a count-field population")
    return config.population


def sweep_spread(
    config: ExperimentConfig,
    spreads: Sequence[float] = DEFAULT_SPREADS,
    max_workers: Optional[int] = None,
) -> SweepResult:
    """Compare ACS and SRS on cluster populations of increasing spread."""
    spec = config.population
    if not isinstance(spec, ClusterSpec):
        raise SpecificationError("Spread sweeps need a cluster population")
    if not spreads or any(sd <= 0 for sd in spreads):
        raise SpecificationError(f"Spreads must be positive, got {list(spreads)}")

    centers = None
    if config.share_centers:
        centers = draw_centers(spec, RngSeed(seed=config.seed, stream_id=0).generator(1))

    points = []
    for point, sd in enumerate(spreads):
        point_config = _with(config, population=_with(spec, spread_sd=sd))
        points.append(
            run_replicated_comparison(
                point_config,
                axis=SweepAxis.SPREAD,
                axis_value=float(sd),
                point=point,
                centers=centers,
                max_workers=max_workers,
            )
        )
    trend = build_trend(SweepAxis.SPREAD, spreads, points, config.trend_tolerance)
    return SweepResult(axis=SweepAxis.SPREAD, points=tuple(points), trend=trend)


def sweep_condition_to_adapt(
    config: ExperimentConfig, values: Sequence[float], max_workers: Optional[int] = None
) -> SweepResult:
    """Compare designs over condition values on one population."""
    _check_ascending("Condition", values, 0.0, strict_min=False)
    population = None
    if not config.regenerate_population:
        population = generate_population(config.population, _population_stream(config, 0))

    points = [
        run_replicated_comparison(
            _with(config, design=_with(config.design, condition=c)),
            population=population,
            axis=SweepAxis.CONDITION,
            axis_value=float(c),
            point=0,
            max_workers=max_workers,
        )
        for c in values
    ]
    trend = build_trend(SweepAxis.CONDITION, values, points, config.trend_tolerance)
    return SweepResult(axis=SweepAxis.CONDITION, points=tuple(points), trend=trend)


def sweep_dispersion(
    config: ExperimentConfig, vmr_values: Sequence[float], max_workers: Optional[int] = None
) -> SweepResult:
    """Compare designs over target VMR at the spec's mean (Poisson up through NegBin)."""
    spec = _count_field_spec(config, SweepAxis.DISPERSION)
    _check_ascending("VMR", vmr_values, 1.0, strict_min=False)

    points = []
    for point, vmr in enumerate(vmr_values):
        point_spec = _with(spec, target_vmr=vmr, family=dispersion_family_for(vmr))
        points.append(
            run_replicated_comparison(
                _with(config, population=point_spec),
                axis=SweepAxis.DISPERSION,
                axis_value=float(vmr),
                point=point,
                max_workers=max_workers,
            )
        )
    trend = build_trend(SweepAxis.DISPERSION, vmr_values, points, config.trend_tolerance)
    return SweepResult(axis=SweepAxis.DISPERSION, points=tuple(points), trend=trend)


def sweep_hit_level(
    config: ExperimentConfig, mean_values: Sequence[float], max_workers: Optional[int] = None
) -> SweepResult:
    """Compare designs over target mean ("hit level") at the spec's VMR."""
    spec = _count_field_spec(config, SweepAxis.HIT_LEVEL)
    _check_ascending("Mean", mean_values, 0.0, strict_min=True)

    points = []
    for point, mean in enumerate(mean_values):
        point_spec = _with(spec, target_mean=mean)
        points.append(
            run_replicated_comparison(
                _with(config, population=point_spec),
                axis=SweepAxis.HIT_LEVEL,
                axis_value=float(mean),
                point=point,
                max_workers=max_workers,
            )
        )
    trend = build_trend(SweepAxis.HIT_LEVEL, mean_values, points, config.trend_tolerance)
    return SweepResult(axis=SweepAxis.HIT_LEVEL, points=tuple(points), trend=trend)


def run_experiment(config: ExperimentConfig, max_workers: Optional[int] = None) -> ExperimentRun:
    """Run every configured sweep, or a single comparison when none is set."""
    sweeps: list[SweepResult] = []
    for axis, values in config.sweep.axes():
        logger.info(f"Running {axis.value} sweep over {values}")
        if axis == SweepAxis.SPREAD:
            sweeps.append(sweep_spread(config, values, max_workers))
        elif axis == SweepAxis.CONDITION:
            sweeps.append(sweep_condition_to_adapt(config, values, max_workers))
        elif axis == SweepAxis.DISPERSION:
            sweeps.append(sweep_dispersion(config, values, max_workers))
        else:
            sweeps.append(sweep_hit_level(config, values, max_workers))

    if not sweeps:
        result = run_replicated_comparison(config, max_workers=max_workers)
        sweeps.append(SweepResult(axis=SweepAxis.NONE, points=(result,)))

    return ExperimentRun(config=config, sweeps=tuple(sweeps))
