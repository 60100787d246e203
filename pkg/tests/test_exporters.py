"""Tests for result exporters."""

import csv
import io
import json

import pytest
from chuk_artifacts import ArtifactStore, NamespaceType, StorageScope

from chuk_mcp_acs.designs import partition_into_networks
from chuk_mcp_acs.efficiency import analyze_efficiency, feasible_region
from chuk_mcp_acs.experiment import run_replicated_comparison
from chuk_mcp_acs.exporters import REPLICATE_CSV_HEADER, ResultExporter
from chuk_mcp_acs.models import (
    ClusterSpec,
    EstimateReport,
    ExperimentConfig,
    GridFrame,
    OutputFormat,
    RngSeed,
)
from chuk_mcp_acs.population import generate_cluster_population


@pytest.fixture
async def vfs():
    """Create test VFS for export tests."""
    store = ArtifactStore(storage_provider="vfs-memory", session_provider="memory")
    ns = await store.create_namespace(
        type=NamespaceType.WORKSPACE,
        name="test-export",
        scope=StorageScope.SESSION,
    )
    yield store.get_namespace_vfs(ns.namespace_id)
    await store.close()


@pytest.fixture
def cluster_population():
    return generate_cluster_population(ClusterSpec(spread_sd=1.0), RngSeed(seed=5))


def read_csv(text: str) -> list[list[str]]:
    return list(csv.reader(io.StringIO(text)))


def test_frame_csv_row_major(patch_frame):
    """Test one x,y,count row per cell in row-major order."""
    rows = read_csv(ResultExporter.frame_csv(patch_frame))

    assert rows[0] == ["x", "y", "count"]
    assert len(rows) == 26
    assert rows[1] == ["0", "0", "0"]
    assert rows[1 + 2 * 5 + 2] == ["2", "2", "5"]
    assert rows[-1] == ["4", "4", "0"]


def test_frame_json_round_trip(cluster_population):
    """Test that the JSON form reloads to an equal frame."""
    frame, _ = cluster_population
    assert GridFrame.model_validate_json(ResultExporter.model_json(frame)) == frame


def test_estimates_csv():
    """Test the estimate CSV header and full-precision values."""
    report = EstimateReport(
        design="srs",
        mean_estimate=1 / 3,
        total_estimate=400 / 3,
        variance_of_mean=0.1,
        variance_of_total=16000.000000000002,
        sample_size=10,
        seed=3,
    )
    rows = read_csv(ResultExporter.estimates_csv([report]))

    assert rows[0] == list(EstimateReport.CSV_HEADER)
    assert rows[1][0] == "srs"
    assert rows[1][2] == ""
    assert float(rows[1][3]) == 1 / 3
    assert float(rows[1][6]) == 16000.000000000002


def test_replicates_and_summary_csv():
    """Test two replicate rows per replicate and one summary row per point."""
    result = run_replicated_comparison(ExperimentConfig(replicates=4, seed=1), max_workers=1)

    replicate_rows = read_csv(ResultExporter.replicates_csv([result]))
    assert tuple(replicate_rows[0]) == REPLICATE_CSV_HEADER
    assert len(replicate_rows) == 1 + 2 * 4
    assert [row[4] for row in replicate_rows[1:3]] == ["acs", "srs"]
    assert replicate_rows[1][2] == replicate_rows[2][2] == "0"

    summary_rows = read_csv(ResultExporter.summary_csv([result.summary_row()]))
    assert len(summary_rows) == 2
    assert summary_rows[1][summary_rows[0].index("replicates")] == "4"


def test_efficiency_csv(patch_frame):
    """Test the efficiency CSV columns line up with the header."""
    partition = partition_into_networks(patch_frame, 0)
    report = analyze_efficiency(patch_frame, partition, 5, 5)
    header, row = read_csv(ResultExporter.efficiency_csv(report))

    assert len(header) == len(row)
    assert row[header.index("acs_superior")] == "true"


def test_trends_json():
    """Test trends serialise with their monotone verdict."""
    from chuk_mcp_acs.experiment import sweep_spread

    trend = sweep_spread(ExperimentConfig(replicates=3), [1.0, 2.0], max_workers=1).trend
    payload = json.loads(ResultExporter.trends_json([trend]))

    assert payload[0]["axis"] == "spread_sd"
    assert payload[0]["values"] == [1.0, 2.0]
    assert "monotone" in payload[0]


def test_cluster_scatter_svg(cluster_population):
    """Test one circle per in-frame point and one cross per centre."""
    _, points = cluster_population
    svg = ResultExporter.cluster_scatter_svg(points, title="sd 1")

    assert svg.startswith("<svg")
    assert svg.count("<circle") == points.in_frame_count
    assert svg.count("<path") == len(points.centers)
    assert "<title>sd 1</title>" in svg


def test_heatmap_svg(patch_frame):
    """Test one rectangle per cell, darkest at the peak."""
    svg = ResultExporter.heatmap_svg(patch_frame)

    assert svg.count("<rect") == 25
    assert "rgb(0,0,0)" in svg
    assert "<title>(2,2): 5</title>" in svg


def test_heatmap_svg_all_zero():
    """Test that an all-zero frame renders white."""
    svg = ResultExporter.heatmap_svg(GridFrame(width=2, height=1, counts=(0, 0)))
    assert svg.count("rgb(255,255,255)") == 2


def test_feasible_region_svg(patch_frame):
    """Test the region plot has the line, the triangle, the band and the point."""
    partition = partition_into_networks(patch_frame, 0)
    report = analyze_efficiency(patch_frame, partition, 5, 5)
    svg = ResultExporter.feasible_region_svg(feasible_region(25, report.kappa1), report)

    assert "<polygon" in svg
    assert "impossible (m &gt; N)" in svg
    assert "m = N(1 - kappa1)" in svg
    assert svg.count("<circle") == 1


def test_feasible_region_svg_without_report():
    """Test the region plot without a report point."""
    svg = ResultExporter.feasible_region_svg(feasible_region(400, 0.5))
    assert "<circle" not in svg


async def test_export_population_json(vfs, patch_frame):
    """Test JSON export into the VFS."""
    artifacts = await ResultExporter.export_population(patch_frame, OutputFormat.JSON, vfs)

    assert artifacts == {"population": "/export/population.json"}
    text = await vfs.read_text("/export/population.json")
    assert GridFrame.model_validate_json(text) == patch_frame


async def test_export_population_csv_custom_path(vfs, patch_frame):
    """Test CSV export to a custom directory."""
    artifacts = await ResultExporter.export_population(
        patch_frame, OutputFormat.CSV, vfs, output_path="/results/run1"
    )
    assert artifacts["population"] == "/results/run1/population.csv"


async def test_export_population_svg_with_points(vfs, cluster_population):
    """Test SVG export writes the heatmap and the scatter."""
    frame, points = cluster_population
    artifacts = await ResultExporter.export_population(
        frame, OutputFormat.SVG, vfs, points=points
    )
    assert set(artifacts) == {"heatmap", "scatter"}
