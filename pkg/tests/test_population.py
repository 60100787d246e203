"""Tests for population generation."""

import numpy as np
import pytest
from pydantic import ValidationError

from chuk_mcp_acs.errors import SpecificationError, UndefinedVMRError
from chuk_mcp_acs.models import (
    ClusterSpec,
    CountFieldSpec,
    DispersionSpec,
    DistributionFamily,
    FieldLayout,
    GridFrame,
    RngSeed,
)
from chuk_mcp_acs.population import (
    DEFAULT_SPREADS,
    bin_points_to_frame,
    dispersion_family_for,
    generate_cluster_points,
    generate_cluster_population,
    generate_count_field,
    generate_population,
    thomas_cell_overlap,
    variance_to_mean_ratio,
)


def test_zero_spread_rejected():
    """Test that a zero spread is not a valid cluster spec."""
    with pytest.raises(ValidationError):
        ClusterSpec(spread_sd=0.0)


def test_fraction_spread_accepted():
    """Test that spreads written as fractions are parsed."""
    spec = ClusterSpec(spread_sd="2/3")
    assert spec.spread_sd == pytest.approx(2 / 3)


def test_cluster_points_shape_and_flags():
    """Test that every centre gets points_per_center labelled points."""
    spec = ClusterSpec(n_centers=5, points_per_center=50, spread_sd=1.0)
    points = generate_cluster_points(spec, RngSeed(seed=7))

    assert len(points.points) == 250
    assert len(points.centers) == 5
    assert points.labels.count(3) == 50
    for (x, y), inside in zip(points.points, points.in_frame):
        assert inside == (0 <= x < 20 and 0 <= y < 20)


def test_centers_inside_margin():
    """Test that centres are drawn on [1, width - 1] x [1, height - 1]."""
    spec = ClusterSpec()
    for seed in range(20):
        points = generate_cluster_points(spec, RngSeed(seed=seed))
        for cx, cy in points.centers:
            assert 1.0 <= cx <= 19.0
            assert 1.0 <= cy <= 19.0


def test_in_frame_totals_match_reference_range():
    """Test that 5 x 50 points at sd 1 keep 200..250 points in a 20x20 frame."""
    spec = ClusterSpec(spread_sd=1.0)
    for seed in range(30):
        frame, points = generate_cluster_population(spec, RngSeed(seed=seed))
        assert frame.total == points.in_frame_count
        assert len(points.in_frame_points()) == frame.total
        assert 200 <= frame.total <= 250


def test_tight_cluster_lands_in_one_cell():
    """Test that a very tight cluster bins into the cell holding its centre."""
    spec = ClusterSpec(n_centers=1, points_per_center=10, spread_sd=0.01)
    frame, _ = generate_cluster_population(spec, RngSeed(seed=3), centers=[(10.5, 10.5)])

    assert frame.count_at(10, 10) == 10
    assert frame.total == 10


def test_explicit_center_count_must_match():
    """Test that the number of explicit centres must equal n_centers."""
    spec = ClusterSpec(n_centers=2)
    with pytest.raises(SpecificationError):
        generate_cluster_points(spec, RngSeed(seed=1), centers=[(5.0, 5.0)])


def test_cluster_population_is_deterministic():
    """Test that equal spec and seed reproduce the same frame."""
    spec = ClusterSpec(spread_sd=1.5)
    first, _ = generate_cluster_population(spec, RngSeed(seed=11, stream_id=2))
    second, _ = generate_cluster_population(spec, RngSeed(seed=11, stream_id=2))
    other, _ = generate_cluster_population(spec, RngSeed(seed=11, stream_id=3))

    assert first == second
    assert first.counts != other.counts
    assert first.seed == RngSeed(seed=11, stream_id=2)
    assert first.spec == spec


def test_bin_empty_points():
    """Test binning an empty point list."""
    frame = bin_points_to_frame([], 3, 2)
    assert frame.total == 0
    assert frame.counts == (0,) * 6


def test_bin_half_open_cells():
    """Test that cells are half-open on the upper edge."""
    frame = bin_points_to_frame([(0.5, 0.5), (0.9, 0.1), (1.0, 0.0)], 2, 2)

    assert frame.count_at(0, 0) == 2
    assert frame.count_at(1, 0) == 1
    assert frame.count_at(0, 1) == 0
    assert frame.total == 3


def test_bin_drops_out_of_frame_points():
    """Test that points on or beyond the far edges are not counted."""
    frame = bin_points_to_frame([(2.0, 0.5), (-0.1, 0.5), (0.5, 2.0), (1.99, 1.99)], 2, 2)
    assert frame.total == 1
    assert frame.count_at(1, 1) == 1


def test_bin_rejects_empty_frame():
    """Test that frame dimensions must be positive."""
    with pytest.raises(SpecificationError):
        bin_points_to_frame([], 0, 5)


def test_uniform_constant_field():
    """Test the constant field."""
    spec = DispersionSpec(family=DistributionFamily.UNIFORM_CONSTANT, target_mean=3, target_vmr=0)
    frame = generate_count_field(spec, 20, 20, RngSeed(seed=1))

    assert set(frame.counts) == {3}
    assert variance_to_mean_ratio(frame) == 0.0
    assert isinstance(frame.spec, CountFieldSpec)
    assert frame.spec.width == 20


@pytest.mark.parametrize(
    "family, vmr",
    [
        (DistributionFamily.POISSON, 0.5),
        (DistributionFamily.NEGATIVE_BINOMIAL, 1.0),
        (DistributionFamily.BINOMIAL, 1.0),
        (DistributionFamily.UNIFORM_CONSTANT, 1.0),
    ],
)
def test_family_vmr_mismatch_rejected(family, vmr):
    """Test that each family only accepts its own VMR range."""
    with pytest.raises(ValidationError):
        DispersionSpec(family=family, target_mean=2, target_vmr=vmr)


def test_binomial_needs_integral_trials():
    """Test that the binomial parameterisation needs whole trials."""
    with pytest.raises(ValidationError):
        DispersionSpec(family=DistributionFamily.BINOMIAL, target_mean=1.0, target_vmr=0.3)


def test_poisson_calibration():
    """Test that a large Poisson field has VMR close to 1."""
    spec = DispersionSpec(family=DistributionFamily.POISSON, target_mean=2, target_vmr=1)
    frame = generate_count_field(spec, 1000, 1000, RngSeed(seed=5))
    assert variance_to_mean_ratio(frame) == pytest.approx(1.0, rel=0.05)


def test_negative_binomial_calibration():
    """Test that a large negative-binomial field hits the target VMR."""
    spec = DispersionSpec(
        family=DistributionFamily.NEGATIVE_BINOMIAL, target_mean=2, target_vmr=4
    )
    frame = generate_count_field(spec, 1000, 1000, RngSeed(seed=6))
    counts = frame.to_array()

    assert counts.mean() == pytest.approx(2.0, rel=0.02)
    assert variance_to_mean_ratio(frame) == pytest.approx(4.0, rel=0.05)


def test_binomial_calibration():
    """Test that the binomial field is under dispersed at the target VMR."""
    spec = DispersionSpec(family=DistributionFamily.BINOMIAL, target_mean=2, target_vmr=0.5)
    frame = generate_count_field(spec, 500, 500, RngSeed(seed=8))
    assert variance_to_mean_ratio(frame) == pytest.approx(0.5, rel=0.05)
    assert max(frame.counts) <= 4


def test_thomas_overlap_value():
    """Test the cell overlap term for unit offspring spread."""
    assert thomas_cell_overlap(1.0) == pytest.approx(0.2705, abs=5e-4)


def test_clustered_layout_calibration():
    """Test that the clustered layout keeps the target mean and VMR."""
    spec = DispersionSpec(
        family=DistributionFamily.NEGATIVE_BINOMIAL,
        target_mean=2,
        target_vmr=4,
        layout=FieldLayout.CLUSTERED,
    )
    frame = generate_count_field(spec, 400, 400, RngSeed(seed=9))
    counts = frame.to_array()

    assert counts.mean() == pytest.approx(2.0, rel=0.1)
    assert variance_to_mean_ratio(frame) == pytest.approx(4.0, rel=0.1)


def test_clustered_layout_is_aggregated():
    """Test that clustered counts are correlated with their neighbours."""
    spec = DispersionSpec(
        family=DistributionFamily.NEGATIVE_BINOMIAL,
        target_mean=1,
        target_vmr=4,
        layout=FieldLayout.CLUSTERED,
    )
    counts = generate_count_field(spec, 200, 200, RngSeed(seed=10)).to_array().astype(float)
    left, right = counts[:, :-1].ravel(), counts[:, 1:].ravel()
    assert np.corrcoef(left, right)[0, 1] > 0.2


def test_count_field_zero_mean():
    """Test that a zero mean gives an all-zero field."""
    spec = DispersionSpec(
        family=DistributionFamily.NEGATIVE_BINOMIAL, target_mean=0, target_vmr=4
    )
    frame = generate_count_field(spec, 5, 5, RngSeed(seed=1))
    assert frame.total == 0


def test_generate_population_dispatch():
    """Test that both population specs can be generated."""
    cluster = generate_population(ClusterSpec(width=10, height=10), RngSeed(seed=1))
    field = generate_population(
        CountFieldSpec(
            family=DistributionFamily.POISSON, target_mean=1, target_vmr=1, width=6, height=4
        ),
        RngSeed(seed=1),
    )
    assert cluster.N == 100
    assert (field.width, field.height) == (6, 4)


def test_vmr_hand_example():
    """Test VMR of counts {0, 2}."""
    frame = GridFrame(width=2, height=1, counts=(0, 2))
    assert variance_to_mean_ratio(frame) == pytest.approx(1.0)


def test_vmr_undefined_for_zero_frame():
    """Test that an all-zero frame has no VMR."""
    with pytest.raises(UndefinedVMRError):
        variance_to_mean_ratio(GridFrame(width=2, height=2, counts=(0, 0, 0, 0)))


@pytest.mark.parametrize(
    "vmr, family",
    [
        (0.0, DistributionFamily.UNIFORM_CONSTANT),
        (0.5, DistributionFamily.BINOMIAL),
        (1.0, DistributionFamily.POISSON),
        (3.0, DistributionFamily.NEGATIVE_BINOMIAL),
    ],
)
def test_dispersion_family_for(vmr, family):
    """Test choosing the family from a VMR."""
    assert dispersion_family_for(vmr) == family


def test_vmr_decreases_with_spread():
    """Test that tighter clusters are more over dispersed, averaged over seeds."""
    averages = []
    for spread in DEFAULT_SPREADS:
        spec = ClusterSpec(spread_sd=spread)
        ratios = [
            variance_to_mean_ratio(generate_cluster_population(spec, RngSeed(seed=s))[0])
            for s in range(50)
        ]
        averages.append(sum(ratios) / len(ratios))

    assert all(a > b for a, b in zip(averages, averages[1:]))


def test_grid_frame_validation():
    """Test GridFrame shape and sign checks."""
    with pytest.raises(ValidationError):
        GridFrame(width=2, height=2, counts=(1, 2, 3))
    with pytest.raises(ValidationError):
        GridFrame(width=1, height=2, counts=(1, -1))


def test_grid_frame_indexing():
    """Test row-major cell indexing."""
    frame = GridFrame.from_array(np.arange(6).reshape(2, 3))

    assert frame.width == 3
    assert frame.height == 2
    assert frame.index(2, 1) == 5
    assert frame.cell(4) == (1, 1)
    assert frame.count_at(1, 0) == 1
    assert frame.to_array()[1, 2] == 5


def test_grid_frame_from_array_rejects_fractional_counts():
    """Test that fractional counts are refused rather than truncated."""
    with pytest.raises(SpecificationError, match="whole numbers"):
        GridFrame.from_array(np.array([[1.0, 2.7], [0.0, 3.0]]))
    with pytest.raises(SpecificationError):
        GridFrame.from_array(np.array([[np.nan, 1.0]]))

    frame = GridFrame.from_array(np.array([[1.0, 2.0], [0.0, 3.0]]))
    assert frame.counts == (1, 2, 0, 3)
