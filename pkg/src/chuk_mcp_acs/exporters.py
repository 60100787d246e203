"""Export modules for chuk-mcp-acs.

Render populations, samples and experiment results as CSV, JSON and SVG, and
write them into a chuk-artifacts namespace VFS.
"""

import csv
import io
import json
import logging
from typing import Any, Iterable, Optional, Sequence

from .models import (
    ClusterPoints,
    EfficiencyReport,
    EstimateReport,
    ExperimentResult,
    FeasibleRegion,
    GridFrame,
    OutputFormat,
    SummaryRow,
    TrendReport,
)

logger = logging.getLogger(__name__)

FRAME_CSV_HEADER = ("x", "y", "count")
REPLICATE_CSV_HEADER = ("axis", "axis_value", "replicate", "population_total") + tuple(
    EstimateReport.CSV_HEADER
)

# Cluster colours, cycled by cluster label
PALETTE = (
    "#1f77b4",
    "#d62728",
    "#2ca02c",
    "#ff7f0e",
    "#9467bd",
    "#8c564b",
    "#e377c2",
    "#17becf",
)

CELL_PX = 20
PLOT_W = 480
PLOT_H = 360
MARGIN = 50
KAPPA1_MAX = 1.25
M_HEADROOM = 1.1


def _csv_text(header: Sequence[str], rows: Iterable[Sequence[Any]]) -> str:
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(header)
    writer.writerows(rows)
    return buffer.getvalue()


def _fmt(value: float) -> str:
    return f"{value:.2f}"


class ResultExporter:
    """Renders domain models to text formats."""

    # ========================================================================
    # CSV / JSON
    # ========================================================================

    @staticmethod
    def frame_csv(frame: GridFrame) -> str:
        """One row per cell in row-major order, header x,y,count."""
        rows = (
            (*frame.cell(i), count) for i, count in enumerate(frame.counts)
        )
        return _csv_text(FRAME_CSV_HEADER, rows)

    @staticmethod
    def model_json(model: Any) -> str:
        return model.model_dump_json(indent=2) + "\n"

    @staticmethod
    def estimates_csv(reports: Sequence[EstimateReport]) -> str:
        return _csv_text(EstimateReport.CSV_HEADER, (r.csv_row() for r in reports))

    @staticmethod
    def efficiency_csv(report: EfficiencyReport) -> str:
        return _csv_text(EfficiencyReport.CSV_HEADER, [report.csv_row()])

    @staticmethod
    def replicates_csv(results: Sequence[ExperimentResult]) -> str:
        """One row per replicate per design (ACS row, then SRS row)."""
        rows = []
        for result in results:
            axis_value = "" if result.axis_value is None else repr(result.axis_value)
            for record in result.records:
                prefix = [result.axis.value, axis_value, record.replicate, record.population_total]
                rows.append(prefix + record.acs.csv_row())
                rows.append(prefix + record.srs.csv_row())
        return _csv_text(REPLICATE_CSV_HEADER, rows)

    @staticmethod
    def summary_csv(rows: Sequence[SummaryRow]) -> str:
        return _csv_text(SummaryRow.CSV_HEADER, (row.csv_row() for row in rows))

    @staticmethod
    def trends_json(trends: Sequence[TrendReport]) -> str:
        payload = [trend.model_dump(mode="json") for trend in trends]
        return json.dumps(payload, indent=2) + "\n"

    # ========================================================================
    # SVG
    # ========================================================================

    @staticmethod
    def cluster_scatter_svg(points: ClusterPoints, title: Optional[str] = None) -> str:
        """Scatter of in-frame points coloured by cluster, centres as crosses.

        The y axis points up, so row 0 of the frame is drawn at the bottom.
        """
        width, height = points.width * CELL_PX, points.height * CELL_PX
        lines = [
            f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" '
            f'height="{height}" viewBox="0 0 {width} {height}">',
            f'<rect width="{width}" height="{height}" fill="white" stroke="black"/>',
        ]
        if title:
            lines.append(f"<title>{title}</title>")
        for x in range(1, points.width):
            lines.append(
                f'<line x1="{x * CELL_PX}" y1="0" x2="{x * CELL_PX}" y2="{height}" '
                'stroke="#eeeeee"/>'
            )
        for y in range(1, points.height):
            lines.append(
                f'<line x1="0" y1="{y * CELL_PX}" x2="{width}" y2="{y * CELL_PX}" '
                'stroke="#eeeeee"/>'
            )
        for (px, py), label, keep in zip(points.points, points.labels, points.in_frame):
            if not keep:
                continue
            colour = PALETTE[label % len(PALETTE)]
            lines.append(
                f'<circle cx="{_fmt(px * CELL_PX)}" cy="{_fmt(height - py * CELL_PX)}" '
                f'r="2.5" fill="{colour}"/>'
            )
        for label, (cx, cy) in enumerate(points.centers):
            sx, sy = cx * CELL_PX, height - cy * CELL_PX
            colour = PALETTE[label % len(PALETTE)]
            lines.append(
                f'<path d="M{_fmt(sx - 5)},{_fmt(sy)} L{_fmt(sx + 5)},{_fmt(sy)} '
                f'M{_fmt(sx)},{_fmt(sy - 5)} L{_fmt(sx)},{_fmt(sy + 5)}" '
                f'stroke="{colour}" stroke-width="2"/>'
            )
        lines.append("</svg>")
        return "\n".join(lines) + "\n"

    @staticmethod
    def heatmap_svg(frame: GridFrame, title: Optional[str] = None) -> str:
        """Grey-scale count map; darker cells hold more individuals."""
        width, height = frame.width * CELL_PX, frame.height * CELL_PX
        peak = max(frame.counts) if frame.counts else 0
        lines = [
            f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" '
            f'height="{height}" viewBox="0 0 {width} {height}">',
        ]
        if title:
            lines.append(f"<title>{title}</title>")
        for index, count in enumerate(frame.counts):
            x, y = frame.cell(index)
            shade = 255 if peak == 0 else int(round(255 * (1 - count / peak)))
            lines.append(
                f'<rect x="{x * CELL_PX}" y="{height - (y + 1) * CELL_PX}" '
                f'width="{CELL_PX}" height="{CELL_PX}" '
                f'fill="rgb({shade},{shade},{shade})" stroke="#cccccc">'
                f"<title>({x},{y}): {count}</title></rect>"
            )
        lines.append("</svg>")
        return "\n".join(lines) + "\n"

    @staticmethod
    def feasible_region_svg(
        region: FeasibleRegion, report: Optional[EfficiencyReport] = None
    ) -> str:
        """The (kappa1, m) half-plane with the line m = N (1 - kappa1).

        The feasible triangle below the line is shaded, the band m > N is marked
        impossible, and the report's (kappa1, m) point is drawn when given.
        """
        N = region.N
        m_top = M_HEADROOM * N

        def sx(kappa1: float) -> float:
            return MARGIN + min(max(kappa1, 0.0), KAPPA1_MAX) / KAPPA1_MAX * PLOT_W

        def sy(m: float) -> float:
            return MARGIN + PLOT_H - min(max(m, 0.0), m_top) / m_top * PLOT_H

        total_w, total_h = PLOT_W + 2 * MARGIN, PLOT_H + 2 * MARGIN
        lines = [
            f'<svg xmlns="http://www.w3.org/2000/svg" width="{total_w}" '
            f'height="{total_h}" viewBox="0 0 {total_w} {total_h}">',
            f'<rect width="{total_w}" height="{total_h}" fill="white"/>',
            # m > N cannot be drawn without replacement
            f'<rect x="{_fmt(sx(0))}" y="{_fmt(sy(m_top))}" width="{PLOT_W}" '
            f'height="{_fmt(sy(N) - sy(m_top))}" fill="#dddddd"/>',
            f'<text x="{_fmt(sx(0.05))}" y="{_fmt((sy(N) + sy(m_top)) / 2 + 4)}" '
            'font-size="12">impossible (m &gt; N)</text>',
            f'<polygon points="{_fmt(sx(0))},{_fmt(sy(0))} {_fmt(sx(0))},{_fmt(sy(N))} '
            f'{_fmt(sx(1))},{_fmt(sy(0))}" fill="#9ecae1" fill-opacity="0.6"/>',
            f'<line x1="{_fmt(sx(0))}" y1="{_fmt(sy(N))}" x2="{_fmt(sx(1))}" '
            f'y2="{_fmt(sy(0))}" stroke="#08519c" stroke-width="2"/>',
            f'<text x="{_fmt(sx(0.55))}" y="{_fmt(sy(0.5 * N))}" font-size="12" '
            'fill="#08519c">m = N(1 - kappa1)</text>',
            f'<line x1="{MARGIN}" y1="{_fmt(sy(0))}" x2="{MARGIN + PLOT_W}" '
            f'y2="{_fmt(sy(0))}" stroke="black"/>',
            f'<line x1="{MARGIN}" y1="{_fmt(sy(0))}" x2="{MARGIN}" '
            f'y2="{_fmt(sy(m_top))}" stroke="black"/>',
        ]
        for tick in (0.0, 0.25, 0.5, 0.75, 1.0, 1.25):
            lines.append(
                f'<text x="{_fmt(sx(tick))}" y="{_fmt(sy(0) + 16)}" font-size="10" '
                f'text-anchor="middle">{tick:g}</text>'
            )
        for tick in (0, N // 2, N):
            lines.append(
                f'<text x="{MARGIN - 6}" y="{_fmt(sy(tick) + 4)}" font-size="10" '
                f'text-anchor="end">{tick}</text>'
            )
        lines.append(
            f'<text x="{_fmt(sx(KAPPA1_MAX / 2))}" y="{total_h - 10}" font-size="12" '
            'text-anchor="middle">kappa1</text>'
        )
        lines.append(
            f'<text x="14" y="{_fmt(sy(m_top / 2))}" font-size="12" '
            f'transform="rotate(-90 14 {_fmt(sy(m_top / 2))})" text-anchor="middle">m</text>'
        )
        if report is not None:
            colour = "#238b45" if report.acs_superior else "#cb181d"
            lines.append(
                f'<circle cx="{_fmt(sx(report.kappa1))}" cy="{_fmt(sy(report.m))}" r="5" '
                f'fill="{colour}"><title>kappa1={report.kappa1:.4g}, m={report.m}'
                "</title></circle>"
            )
        lines.append("</svg>")
        return "\n".join(lines) + "\n"

    # ========================================================================
    # VFS export
    # ========================================================================

    @staticmethod
    async def _ensure_directory(vfs, path: str) -> None:
        """Create path and its parents in the VFS."""
        if path == "/" or not path:
            return
        current = ""
        for part in (p for p in path.split("/") if p):
            current = f"{current}/{part}"
            await vfs.mkdir(current)

    @staticmethod
    async def export_population(
        frame: GridFrame,
        format: OutputFormat,
        vfs,
        output_path: Optional[str] = None,
        points: Optional[ClusterPoints] = None,
    ) -> dict[str, str]:
        """Write a population to a namespace VFS.

        Args:
            frame: Population to export
            format: csv, json or svg (svg writes the heatmap, plus the
                cluster scatter when points are given)
            vfs: VFS instance for writing files
            output_path: Optional directory override (default /export)

        Returns:
            Dict of generated file paths
        """
        base = (output_path or "/export").rstrip("/") or "/"
        await ResultExporter._ensure_directory(vfs, base)
        prefix = "" if base == "/" else base

        files: dict[str, str] = {}
        if format == OutputFormat.CSV:
            files["population"] = ResultExporter.frame_csv(frame)
        elif format == OutputFormat.JSON:
            files["population"] = ResultExporter.model_json(frame)
        elif format == OutputFormat.SVG:
            files["heatmap"] = ResultExporter.heatmap_svg(frame)
            if points is not None:
                files["scatter"] = ResultExporter.cluster_scatter_svg(points)
        else:
            raise ValueError(f"Unsupported export format: {format}")

        artifacts: dict[str, str] = {}
        for name, text in files.items():
            path = f"{prefix}/{name}.{format.value}"
            await vfs.write_text(path, text)
            artifacts[name] = path
        logger.info(f"Exported population as {format.value} to {base}")
        return artifacts
