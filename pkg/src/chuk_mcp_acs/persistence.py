"""Local file persistence: atomic writes and loaders for populations and configs."""

import csv
import io
import logging
import os
import tempfile
from pathlib import Path
from typing import Any, Mapping, Union

import yaml
from pydantic import ValidationError

from .errors import ConfigError, SpecificationError
from .exporters import FRAME_CSV_HEADER
from .models import ExperimentConfig, GridFrame

logger = logging.getLogger(__name__)

PathLike = Union[str, Path]


def atomic_write_text(path: PathLike, text: str) -> Path:
    """Write text to path via a temporary file and rename.

    Raises:
        OSError: If the directory or file cannot be written (message names the path)
    """
    target = Path(path)
    try:
        target.parent.mkdir(parents=True, exist_ok=True)
        fd, tmp_name = tempfile.mkstemp(
            dir=target.parent, prefix=f".{target.name}.", suffix=".tmp"
        )
    except OSError as exc:
        raise OSError(f"Cannot write {target}: {exc}") from exc

    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as handle:
            handle.write(text)
            handle.flush()
            os.fsync(handle.fileno())
        os.replace(tmp_name, target)
    except OSError as exc:
        Path(tmp_name).unlink(missing_ok=True)
        raise OSError(f"Cannot write {target}: {exc}") from exc

    logger.info(f"Wrote {target}")
    return target


def write_files(directory: PathLike, files: Mapping[str, str]) -> list[Path]:
    """Atomically write {file name: text} into a directory."""
    base = Path(directory)
    return [atomic_write_text(base / name, text) for name, text in files.items()]


# ============================================================================
# Populations
# ============================================================================


def _frame_from_csv(text: str, source: str) -> GridFrame:
    reader = csv.reader(io.StringIO(text))
    header = next(reader, None)
    if header is None or tuple(h.strip() for h in header) != FRAME_CSV_HEADER:
        raise SpecificationError(f"{source}: expected header {','.join(FRAME_CSV_HEADER)}")

    cells: dict[tuple[int, int], int] = {}
    for line_no, row in enumerate(reader, start=2):
        if not row:
            continue
        try:
            x, y, count = (int(v) for v in row)
        except ValueError as exc:
            raise SpecificationError(f"{source}:{line_no}: bad row {row}") from exc
        if (x, y) in cells:
            raise SpecificationError(f"{source}:{line_no}: duplicate cell ({x},{y})")
        cells[(x, y)] = count

    if not cells:
        raise SpecificationError(f"{source}: no cells")
    width = max(x for x, _ in cells) + 1
    height = max(y for _, y in cells) + 1
    if len(cells) != width * height or min(min(xy) for xy in cells) < 0:
        raise SpecificationError(f"{source}: cells do not cover a {width}x{height} frame")
    counts = tuple(cells[(i % width, i // width)] for i in range(width * height))
    try:
        return GridFrame(width=width, height=height, counts=counts)
    except ValidationError as exc:
        raise SpecificationError(f"{source}: {exc.errors()[0]['msg']}") from exc


def load_population(path: PathLike) -> GridFrame:
    """Load a population from JSON (full GridFrame) or CSV (x,y,count).

    Raises:
        OSError: If the file cannot be read
        SpecificationError: If the contents do not describe a frame
    """
    source = Path(path)
    text = source.read_text(encoding="utf-8")
    if source.suffix.lower() == ".csv":
        frame = _frame_from_csv(text, str(source))
    else:
        try:
            frame = GridFrame.model_validate_json(text)
        except ValidationError as exc:
            raise SpecificationError(f"{source}: {exc.errors()[0]['msg']}") from exc
    logger.info(f"Loaded {frame.width}x{frame.height} population from {source}")
    return frame


# ============================================================================
# Experiment configs
# ============================================================================


def _dotted(loc: tuple[Any, ...]) -> str:
    return ".".join(str(part) for part in loc)


def parse_experiment_config(document: Any, source: str = "<config>") -> ExperimentConfig:
    """Validate a parsed YAML document into an ExperimentConfig.

    Raises:
        ConfigError: Naming the first offending key
    """
    if not isinstance(document, dict):
        raise ConfigError(f"{source}: expected a mapping at the top level")
    if "schema_version" not in document:
        raise ConfigError(f"{source}: missing required key schema_version", key="schema_version")
    try:
        return ExperimentConfig.model_validate(document)
    except ValidationError as exc:
        error = exc.errors()[0]
        key = _dotted(error["loc"])
        raise ConfigError(f"{source}: {key}: {error['msg']}", key=key) from exc


def load_experiment_config(path: PathLike) -> ExperimentConfig:
    """Read and validate a YAML experiment configuration file."""
    source = Path(path)
    try:
        document = yaml.safe_load(source.read_text(encoding="utf-8"))
    except yaml.YAMLError as exc:
        raise ConfigError(f"{source}: not valid YAML: {exc}") from exc
    config = parse_experiment_config(document, str(source))
    logger.info(f"Loaded experiment config from {source}")
    return config
