"""Tests for the Monte Carlo experiment harness."""

import pytest
from pydantic import ValidationError

from chuk_mcp_acs.designs import draw_srs, partition_into_networks
from chuk_mcp_acs.efficiency import expected_final_effort
from chuk_mcp_acs.errors import SampleSizeError, SpecificationError
from chuk_mcp_acs.experiment import (
    build_trend,
    merge_trend_reports,
    resolve_srs_size,
    run_experiment,
    run_replicated_comparison,
    summarize,
    sweep_condition_to_adapt,
    sweep_dispersion,
    sweep_hit_level,
    sweep_spread,
)
from chuk_mcp_acs.models import (
    ClusterSpec,
    CountFieldSpec,
    DesignConfig,
    DistributionFamily,
    ExperimentConfig,
    FieldLayout,
    RngSeed,
    SrsSizeMode,
    SweepAxis,
    SweepConfig,
    TrendDirection,
    TrendReport,
)
from chuk_mcp_acs.population import generate_population


def small_config(**changes) -> ExperimentConfig:
    base = {"replicates": 20, "seed": 7}
    base.update(changes)
    return ExperimentConfig.model_validate(base)


def nb_field(mean: float = 1.0, vmr: float = 4.0, size: int = 20) -> CountFieldSpec:
    return CountFieldSpec(
        family=DistributionFamily.NEGATIVE_BINOMIAL,
        target_mean=mean,
        target_vmr=vmr,
        layout=FieldLayout.CLUSTERED,
        width=size,
        height=size,
    )


# ============================================================================
# Replicated comparison
# ============================================================================


def test_comparison_bookkeeping():
    """Test replicate accounting on the default cluster population."""
    result = run_replicated_comparison(small_config(), max_workers=2)

    assert result.replicates == 20
    assert [r.replicate for r in result.records] == list(range(20))
    assert result.included + result.excluded == 20
    assert result.n1 == result.m == 10
    assert all(r.acs.sample_size == r.srs.sample_size == 10 for r in result.records)
    assert all(r.population_total == result.population_total for r in result.records)
    assert result.mean_final_effort >= 10
    assert result.theoretical_relative_efficiency is not None


def test_comparison_uses_shared_draw():
    """Test that ACS and SRS estimates coincide when nothing qualifies."""
    config = small_config(design={"condition": 1000})
    result = run_replicated_comparison(config, max_workers=2)

    for record in result.records:
        assert record.acs.total_estimate == record.srs.total_estimate
        assert record.acs.variance_of_total == record.srs.variance_of_total
    assert result.relative_precision == pytest.approx(1.0)
    assert result.theoretical_relative_efficiency == pytest.approx(1.0)


def test_comparison_srs_units_are_replicate_stream():
    """Test that replicate r samples from the replicate's own stream."""
    config = small_config(replicates=3)
    frame = generate_population(config.population, RngSeed(seed=7, stream_id=0).generator(0))
    result = run_replicated_comparison(config, population=frame, max_workers=1)

    for record in result.records:
        draw = draw_srs(frame, 10, RngSeed(seed=7, stream_id=record.replicate))
        assert record.srs.mean_estimate == pytest.approx(sum(draw.y_values) / 10)


def test_comparison_is_reproducible():
    """Test that equal configs give identical results regardless of thread count."""
    config = small_config(replicates=15)
    assert run_replicated_comparison(config, max_workers=1) == run_replicated_comparison(
        config, max_workers=4
    )


def test_summary_is_order_independent():
    """Test that permuting replicates leaves the summary unchanged."""
    result = run_replicated_comparison(small_config(replicates=30), max_workers=2)
    assert summarize(tuple(reversed(result.records))) == result.summary


def test_single_replicate_spreads_are_zero():
    """Test that a single replicate reports zero spreads."""
    result = run_replicated_comparison(small_config(replicates=1), max_workers=1)
    summary = result.summary

    assert summary.mu_acs_spread == 0.0
    assert summary.var_acs_spread == 0.0
    assert summary.mu_srs_spread == 0.0
    assert summary.var_srs_spread == 0.0


def test_all_zero_population_is_degenerate():
    """Test that an all-zero population has no relative precision."""
    config = small_config(
        population={
            "kind": "count-field",
            "family": "uniform-constant",
            "target_mean": 0,
            "target_vmr": 0,
        }
    )
    result = run_replicated_comparison(config, max_workers=2)

    assert result.degenerate_population
    assert result.relative_precision is None
    assert result.excluded == 20
    assert result.included == 0
    assert result.theoretical_relative_efficiency is None


def test_explicit_srs_size():
    """Test comparing n1 = 10 against m = 25."""
    result = run_replicated_comparison(small_config(design={"n1": 10, "m": 25}), max_workers=2)

    assert result.m == 25
    assert all(r.srs.sample_size == 25 for r in result.records)
    assert all(r.acs.sample_size == 10 for r in result.records)


def test_effort_srs_size():
    """Test that effort mode matches SRS to the expected ACS effort."""
    config = small_config(design={"srs_size": "effort"})
    frame = generate_population(config.population, RngSeed(seed=7, stream_id=0).generator(0))
    partition = partition_into_networks(frame, 0)
    expected = round(expected_final_effort(frame, partition, 10))

    result = run_replicated_comparison(config, max_workers=2)
    assert result.m == max(expected, 2)
    assert resolve_srs_size(config.design, frame, partition) == result.m


def test_effort_mode_rejects_explicit_m():
    """Test that m cannot be combined with effort mode."""
    with pytest.raises(ValidationError):
        DesignConfig(m=12, srs_size=SrsSizeMode.EFFORT)


def test_design_larger_than_frame():
    """Test that n1 above N is rejected."""
    config = small_config(population={"kind": "cluster", "width": 3, "height": 3})
    with pytest.raises(SampleSizeError):
        run_replicated_comparison(config, max_workers=1)


def test_regenerated_populations_vary():
    """Test that regenerated populations differ between replicates."""
    result = run_replicated_comparison(
        small_config(regenerate_population=True, replicates=10), max_workers=2
    )
    totals = {r.population_total for r in result.records}

    assert len(totals) > 1
    assert result.theoretical_relative_efficiency is None
    assert result.population_total == pytest.approx(
        sum(r.population_total for r in result.records) / 10
    )


# ============================================================================
# Trends
# ============================================================================


def trend(series, direction=TrendDirection.NONINCREASING, tolerance=0.0) -> TrendReport:
    n = len(series)
    return TrendReport(
        axis=SweepAxis.CONDITION,
        values=tuple(float(i) for i in range(n)),
        relative_precision=tuple(series),
        included=(10,) * n,
        excluded=(0,) * n,
        direction=direction,
        tolerance=tolerance,
    )


def test_trend_verdicts():
    """Test monotonicity verdicts with and without tolerance."""
    assert trend([2.0, 1.5, 1.5, 1.0]).monotone
    assert not trend([2.0, 1.5, 1.6]).monotone
    assert trend([2.0, 1.5, 1.55], tolerance=0.05).monotone
    assert trend([1.0, 1.2, 1.9], direction=TrendDirection.NONDECREASING).monotone
    assert not trend([1.0, 0.8], direction=TrendDirection.NONDECREASING).monotone
    assert trend([2.0, None, 1.0]).monotone
    assert trend([1.0]).monotone


def test_trend_series_lengths_checked():
    """Test that trend series must line up with the axis values."""
    with pytest.raises(ValidationError):
        TrendReport(
            axis=SweepAxis.SPREAD,
            values=(1.0, 2.0),
            relative_precision=(1.0,),
            included=(1, 1),
            excluded=(0, 0),
            direction=TrendDirection.NONINCREASING,
        )


def test_merge_trend_reports():
    """Test averaging trend reports across seeds."""
    merged = merge_trend_reports([trend([2.0, 1.0]), trend([4.0, None]), trend([3.0, 2.0])])

    assert merged.relative_precision == (3.0, 1.5)
    assert merged.included == (30, 30)
    assert merged.monotone


def test_merge_rejects_different_axes():
    """Test that only trends over the same values merge."""
    other = trend([1.0, 2.0, 3.0])
    with pytest.raises(ValueError):
        merge_trend_reports([trend([1.0, 2.0]), other])
    with pytest.raises(ValueError):
        merge_trend_reports([])


# ============================================================================
# Sweeps
# ============================================================================


def test_spread_sweep_shape():
    """Test one result per spread and the trend direction."""
    result = sweep_spread(small_config(replicates=10), max_workers=2)

    assert result.axis == SweepAxis.SPREAD
    assert [p.axis_value for p in result.points] == pytest.approx([2 / 3, 1.0, 1.5, 2.0, 3.0])
    assert result.trend is not None
    assert result.trend.direction == TrendDirection.NONINCREASING
    assert len(result.trend.relative_precision) == 5


def test_single_spread_reduces_to_comparison():
    """Test that a one-value sweep is one replicated comparison."""
    config = small_config(replicates=10)
    swept = sweep_spread(config, [1.5], max_workers=2).points[0]
    direct = run_replicated_comparison(
        small_config(replicates=10, population={"kind": "cluster", "spread_sd": 1.5}),
        axis=SweepAxis.SPREAD,
        axis_value=1.5,
        max_workers=2,
    )
    assert swept == direct


def test_spread_sweep_share_centers_changes_populations():
    """Test that shared centres give different populations from independent ones."""
    independent = sweep_spread(small_config(replicates=2), [1.0, 2.0], max_workers=1)
    shared = sweep_spread(small_config(replicates=2, share_centers=True), [1.0, 2.0], max_workers=1)

    assert independent.points[0] != shared.points[0]


def test_spread_sweep_needs_cluster_population():
    """Test that spread sweeps reject count fields."""
    with pytest.raises(SpecificationError):
        sweep_spread(small_config(population=nb_field()), [1.0])


def test_condition_sweep_reaches_srs():
    """Test that a condition above every count makes ACS equal SRS."""
    config = small_config(population=nb_field(mean=2.0), replicates=15)
    result = sweep_condition_to_adapt(config, [0, 1000], max_workers=2)

    assert result.points[-1].relative_precision == pytest.approx(1.0)
    assert result.points[0].population_total == result.points[1].population_total


def test_condition_sweep_validation():
    """Test that condition values must be nonnegative and ascending."""
    config = small_config(population=nb_field())
    with pytest.raises(ValueError):
        sweep_condition_to_adapt(config, [2, 1])
    with pytest.raises(SpecificationError):
        sweep_condition_to_adapt(config, [-1, 1])


def test_dispersion_sweep_families():
    """Test that the VMR sweep switches from Poisson to negative binomial."""
    config = small_config(population=nb_field(mean=0.5), replicates=5)
    result = sweep_dispersion(config, [1, 4], max_workers=2)

    assert result.trend is not None
    assert result.trend.direction == TrendDirection.NONDECREASING
    assert [p.axis_value for p in result.points] == [1.0, 4.0]


def test_dispersion_sweep_rejects_constant_field():
    """Test that VMR values below 1 are outside the sweep."""
    with pytest.raises(SpecificationError):
        sweep_dispersion(small_config(population=nb_field()), [0, 1])
    with pytest.raises(SpecificationError):
        sweep_dispersion(small_config(), [1, 2])


def test_hit_level_sweep_counts_degenerate_replicates():
    """Test that near-empty fields exclude and count degenerate replicates."""
    config = small_config(population=nb_field(), replicates=20)
    result = sweep_hit_level(config, [0.005, 0.5], max_workers=2)
    sparse = result.points[0]

    assert sparse.excluded > 0
    assert sparse.included + sparse.excluded == 20
    assert result.trend is not None
    assert result.trend.excluded[0] == sparse.excluded


def test_hit_level_sweep_rejects_zero_mean():
    """Test that hit levels must be positive."""
    with pytest.raises(SpecificationError):
        sweep_hit_level(small_config(population=nb_field()), [0.0, 1.0])


def test_run_experiment_without_sweeps():
    """Test that an experiment with no sweep runs one comparison."""
    run = run_experiment(small_config(replicates=5), max_workers=2)

    assert len(run.sweeps) == 1
    assert run.sweeps[0].axis == SweepAxis.NONE
    assert run.sweeps[0].trend is None
    assert len(run.summary_rows()) == 1


def test_run_experiment_all_axes():
    """Test that every configured axis produces a sweep."""
    config = small_config(
        population=nb_field(mean=0.5),
        replicates=3,
        sweep=SweepConfig(condition=[0, 1], target_vmr=[1, 2], target_mean=[0.5, 1.0]),
    )
    run = run_experiment(config, max_workers=2)

    assert [s.axis for s in run.sweeps] == [
        SweepAxis.CONDITION,
        SweepAxis.DISPERSION,
        SweepAxis.HIT_LEVEL,
    ]
    assert len(run.summary_rows()) == 6


def test_build_trend_uses_results():
    """Test that a trend carries each point's precision and counts."""
    config = small_config(replicates=5)
    points = [run_replicated_comparison(config, max_workers=1)]
    report = build_trend(SweepAxis.SPREAD, [1.0], points, tolerance=0.1)

    assert report.relative_precision == (points[0].relative_precision,)
    assert report.tolerance == 0.1
    assert report.included == (points[0].included,)


def test_experiment_config_rejects_unknown_keys():
    """Test that configs are strict about keys."""
    with pytest.raises(ValidationError):
        ExperimentConfig.model_validate({"replicates": 5, "replicate": 5})
    with pytest.raises(ValidationError):
        ExperimentConfig.model_validate({"population": {"kind": "cluster", "spread": 1}})


def test_cluster_spec_default_matches_reference_layout():
    """Test the default population: 20x20 frame, 5 centres of 50 points."""
    spec = ExperimentConfig().population
    assert isinstance(spec, ClusterSpec)
    assert (spec.width, spec.height, spec.n_centers, spec.points_per_center) == (20, 20, 5, 50)
