import csv
import datetime
import json
import logging
import math
import subprocess
from importlib import metadata
from pathlib import Path
from typing import Any, Dict, Optional, Union

from app.core.exceptions import ResultWriteError
from app.models.config import ExperimentConfig
from app.models.results import Cell, ResultTable

# Configure logging
logger = logging.getLogger(__name__)

PathLike = Union[str, Path]


def format_cell(value: Cell) -> str:
    """Locale-independent text for one cell; floats keep 9 significant digits."""
    if isinstance(value, str):
        return value
    if isinstance(value, bool):
        return str(int(value))
    if isinstance(value, int):
        return str(value)
    if math.isnan(value):
        return "nan"
    return format(float(value), ".9g")


def _parse_cell(text: str) -> Cell:
    try:
        number = float(text)
    except ValueError:
        return text
    return number


def emit_csv(table: ResultTable, path: PathLike) -> Path:
    """Write ``table`` as UTF-8 CSV with a header row.

    Rows go to a hidden sibling file that replaces ``path`` only once it is complete.
    """
    target = Path(path)
    partial = target.with_name(f".{target.name}.partial")
    try:
        target.parent.mkdir(parents=True, exist_ok=True)
        with partial.open("w", encoding="utf-8", newline="") as handle:
            writer = csv.writer(handle, lineterminator="\n")
            writer.writerow(table.columns)
            for row in table.rows:
                writer.writerow([format_cell(cell) for cell in row])
        partial.replace(target)
    except OSError as e:
        logger.error(f"Error writing results to {target}: {str(e)}")
        raise ResultWriteError(
            f"Could not write results to {target}: {e}", path=str(target)
        ) from e
    finally:
        partial.unlink(missing_ok=True)
    logger.info(f"Wrote {len(table.rows)} rows to {target}")
    return target


def read_csv(path: PathLike) -> ResultTable:
    """Parse a file written by ``emit_csv``; numeric cells come back as floats."""
    with Path(path).open("r", encoding="utf-8", newline="") as handle:
        reader = csv.reader(handle)
        columns = next(reader)
        rows = [[_parse_cell(cell) for cell in row] for row in reader]
    return ResultTable(columns=columns, rows=rows)


def version_string() -> str:
    """`git describe` of the source tree, or the installed package version outside a checkout."""
    try:
        completed = subprocess.run(
            ["git", "describe", "--tags", "--always", "--dirty"],
            cwd=Path(__file__).resolve().parent,
            capture_output=True,
            text=True,
            timeout=5,
            check=True,
        )
        described = completed.stdout.strip()
        if described:
            return described
    except (OSError, subprocess.SubprocessError):
        pass
    try:
        return metadata.version("cogpilot")
    except metadata.PackageNotFoundError:
        return "unknown"


def sidecar_path(path: PathLike) -> Path:
    return Path(path).with_suffix(".json")


def write_sidecar(
    config: ExperimentConfig,
    path: PathLike,
    command: str,
    extra: Optional[Dict[str, Any]] = None,
) -> Path:
    """Provenance record next to a CSV: resolved config, version and command."""
    target = sidecar_path(path)
    document: Dict[str, Any] = {
        "command": command,
        "version": version_string(),
        "created_at": datetime.datetime.now(datetime.timezone.utc).isoformat(),
        "results": Path(path).name,
        "config": config.model_dump(mode="json", by_alias=True),
    }
    if extra:
        document.update(extra)
    try:
        target.write_text(json.dumps(document, indent=2, sort_keys=True) + "\n", encoding="utf-8")
    except OSError as e:
        raise ResultWriteError(f"Could not write sidecar {target}: {e}", path=str(target)) from e
    return target
