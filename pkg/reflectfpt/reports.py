"""
Report writers for CLI runs.

CSV tables carry a `# config: <json>` first line with the resolved experiment
config; numbers use 17 significant digits. JSON summaries are written with
sorted keys and no timestamps, so repeated runs are byte-identical.
"""

import csv
import json
import logging
import math
from pathlib import Path
from typing import Any, Iterable, Sequence

import numpy as np

logger = logging.getLogger(__name__)


def format_value(value: Any) -> str:
    if value is None:
        return ''
    if isinstance(value, (bool, np.bool_)):
        return 'true' if value else 'false'
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        value = float(value)
        if math.isnan(value):
            return 'nan'
        if math.isinf(value):
            return 'inf' if value > 0 else '-inf'
        return f"{value:.17g}"
    return str(value)


def _jsonable(value: Any) -> Any:
    if isinstance(value, dict):
        return {str(k): _jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_jsonable(v) for v in value]
    if isinstance(value, np.ndarray):
        return [_jsonable(v) for v in value.tolist()]
    if isinstance(value, (np.bool_,)):
        return bool(value)
    if isinstance(value, (np.integer,)):
        return int(value)
    if isinstance(value, (float, np.floating)):
        value = float(value)
        # JSON has no inf/nan
        return value if math.isfinite(value) else str(value)
    return value


def config_line(config: dict) -> str:
    return json.dumps(_jsonable(config), sort_keys=True, separators=(',', ':'))


def write_csv(path: Path, columns: Sequence[str], rows: Iterable[Sequence[Any]], config: dict) -> Path:
    """
    Write a CSV table with the config header line.

    Args:
        path: Output file.
        columns: Header row.
        rows: Row values (floats formatted with 17 significant digits).
        config: Resolved experiment config (embedded as JSON).

    Returns:
        The written path.
    """
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, 'w', newline='') as f:
        f.write(f"# config: {config_line(config)}\n")
        writer = csv.writer(f, lineterminator='\n')
        writer.writerow(columns)
        for row in rows:
            writer.writerow([format_value(v) for v in row])
    logger.info(f"wrote {path}")
    return path


def write_json(path: Path, data: dict) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, 'w') as f:
        json.dump(_jsonable(data), f, indent=2, sort_keys=True)
        f.write('\n')
    logger.info(f"wrote {path}")
    return path
