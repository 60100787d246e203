"""Tests for chuk-mcp-acs server tools."""

import sys
from unittest.mock import patch

import pytest

from chuk_mcp_acs import server
from chuk_mcp_acs.errors import ConfigError
from chuk_mcp_acs.models import Design, GridFrame, OutputFormat


def unwrap(tool_fn):
    # The @tool decorator wraps async functions
    return getattr(tool_fn, "__wrapped__", tool_fn)


acs_generate_cluster_population = unwrap(server.acs_generate_cluster_population)
acs_generate_count_field = unwrap(server.acs_generate_count_field)
acs_get_population = unwrap(server.acs_get_population)
acs_draw_sample = unwrap(server.acs_draw_sample)
acs_estimate = unwrap(server.acs_estimate)
acs_efficiency = unwrap(server.acs_efficiency)
acs_run_experiment = unwrap(server.acs_run_experiment)
acs_export_population = unwrap(server.acs_export_population)


@pytest.fixture(autouse=True)
def fresh_manager(monkeypatch):
    """Give every test its own in-memory population manager."""
    monkeypatch.setattr(server, "_population_manager", None)


@pytest.mark.asyncio
async def test_generate_cluster_population():
    """Test generating the reference cluster layout."""
    result = await acs_generate_cluster_population(spread_sd=0.667, seed=1)

    assert result.population_id.startswith("population-")
    assert (result.width, result.height) == (20, 20)
    assert 0 < result.total <= 250
    assert result.vmr is not None and result.vmr > 1.0


@pytest.mark.asyncio
async def test_generate_count_field():
    """Test generating a negative binomial field."""
    result = await acs_generate_count_field(
        family="negative-binomial", target_mean=2.0, target_vmr=4.0, width=30, height=30
    )
    assert (result.width, result.height) == (30, 30)
    assert result.total > 0


@pytest.mark.asyncio
async def test_generate_count_field_bad_family():
    """Test that an unknown family is rejected."""
    with pytest.raises(ValueError):
        await acs_generate_count_field(family="gamma", target_mean=1.0, target_vmr=2.0)


@pytest.mark.asyncio
async def test_get_population():
    """Test reading back a generated population."""
    created = await acs_generate_cluster_population(seed=9)
    result = await acs_get_population(population_id=created.population_id)

    assert isinstance(result.population, GridFrame)
    assert result.population.total == created.total
    assert result.population.spec.kind == "cluster"


@pytest.mark.asyncio
async def test_get_population_not_found():
    """Test an unknown population ID."""
    with pytest.raises(ValueError, match="Population not found"):
        await acs_get_population(population_id="population-missing")


@pytest.mark.asyncio
async def test_draw_sample_each_design():
    """Test that each design fills its own field of the response."""
    created = await acs_generate_cluster_population(seed=2)

    srs = await acs_draw_sample(population_id=created.population_id, design="srs", size=10)
    assert srs.design == Design.SRS
    assert len(srs.srs.unit_indices) == 10
    assert srs.acs is None

    acs = await acs_draw_sample(population_id=created.population_id, design="acs", size=10)
    assert len(acs.acs.initial_indices) == 10
    assert acs.acs.condition == 0.0

    cluster = await acs_draw_sample(
        population_id=created.population_id, design="cluster", size=4
    )
    assert cluster.cluster.n_cl == 4
    assert cluster.cluster.M_0 == 4


@pytest.mark.asyncio
async def test_draw_sample_is_reproducible():
    """Test that equal seeds draw the same sample."""
    created = await acs_generate_cluster_population(seed=2)
    first = await acs_draw_sample(population_id=created.population_id, seed=11)
    second = await acs_draw_sample(population_id=created.population_id, seed=11)
    assert first.acs == second.acs


@pytest.mark.asyncio
async def test_estimate():
    """Test ACS and SRS estimates on one population."""
    created = await acs_generate_cluster_population(seed=4)

    acs = await acs_estimate(population_id=created.population_id, design="acs", size=10)
    assert acs.report.design == Design.ACS
    assert acs.report.final_effort >= 10
    assert acs.report.total_estimate == pytest.approx(acs.report.mean_estimate * 400)

    srs = await acs_estimate(population_id=created.population_id, design="srs", size=10)
    assert srs.report.final_effort is None
    assert srs.report.variance_of_mean >= 0.0


@pytest.mark.asyncio
async def test_estimate_too_large():
    """Test a sample bigger than the frame."""
    created = await acs_generate_count_field(
        family="poisson", target_mean=1.0, target_vmr=1.0, width=3, height=3
    )
    with pytest.raises(ValueError):
        await acs_estimate(population_id=created.population_id, design="srs", size=10)


@pytest.mark.asyncio
async def test_efficiency_equal_sizes():
    """Test efficiency with m defaulting to n1."""
    created = await acs_generate_cluster_population(spread_sd=0.667, seed=1)
    result = await acs_efficiency(population_id=created.population_id, n1=10)

    assert result.report.superiority_lhs == 0.0
    assert result.feasible_region.N == 400
    assert result.feasible_region.kappa1 == result.report.kappa1


@pytest.mark.asyncio
async def test_run_experiment_spread_sweep():
    """Test a small spread sweep through the tool."""
    result = await acs_run_experiment(
        config={"schema_version": 1, "replicates": 5, "sweep": {"spread_sd": ["2/3", 2]}}
    )

    assert len(result.summary) == 2
    assert [row.axis_value for row in result.summary] == pytest.approx([2 / 3, 2.0])
    assert len(result.trends) == 1
    assert all(row.replicates == 5 for row in result.summary)


@pytest.mark.asyncio
async def test_run_experiment_single_point():
    """Test a config without sweeps runs one comparison."""
    result = await acs_run_experiment(config={"schema_version": 1, "replicates": 3})
    assert len(result.summary) == 1
    assert result.trends == []


@pytest.mark.asyncio
async def test_run_experiment_bad_config():
    """Test that config errors name the offending key."""
    with pytest.raises(ConfigError) as info:
        await acs_run_experiment(config={"schema_version": 1, "replicates": -1})
    assert info.value.key == "replicates"


@pytest.mark.asyncio
async def test_export_population_formats():
    """Test exporting in every format."""
    created = await acs_generate_cluster_population(seed=5)
    population_id = created.population_id

    as_json = await acs_export_population(population_id=population_id, format="json")
    assert as_json.format == OutputFormat.JSON
    assert as_json.artifacts == {"population": "/export/population.json"}

    as_csv = await acs_export_population(
        population_id=population_id, format="csv", output_path="/results"
    )
    assert as_csv.artifacts == {"population": "/results/population.csv"}

    as_svg = await acs_export_population(population_id=population_id, format="svg")
    assert set(as_svg.artifacts) == {"heatmap", "scatter"}


@pytest.mark.asyncio
async def test_export_count_field_svg_has_no_scatter():
    """Test that a count field exports only the heatmap."""
    created = await acs_generate_count_field(family="poisson", target_mean=1.0, target_vmr=1.0)
    result = await acs_export_population(population_id=created.population_id, format="svg")
    assert set(result.artifacts) == {"heatmap"}


def test_main_default_stdio():
    """Test main function defaults to stdio mode."""
    with patch("chuk_mcp_acs.server.run") as mock_run:
        with patch.object(sys, "argv", ["chuk-mcp-acs"]):
            server.main()
            mock_run.assert_called_once_with(transport="stdio")


def test_main_http_mode():
    """Test main function with http mode."""
    for flag in ("http", "--http"):
        with patch("chuk_mcp_acs.server.run") as mock_run:
            with patch.object(sys, "argv", ["chuk-mcp-acs", flag]):
                server.main()
                mock_run.assert_called_once_with(transport="http", host="0.0.0.0", port=8000)


def test_main_streamable_mode():
    """Test main function with streamable mode and its aliases."""
    for flag in ("streamable", "--streamable", "sse", "--sse"):
        with patch("chuk_mcp_acs.server.run") as mock_run:
            with patch.object(sys, "argv", ["chuk-mcp-acs", flag]):
                server.main()
                mock_run.assert_called_once_with(transport="streamable")
