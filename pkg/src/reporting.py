"""CSV output with a `#key=value` metadata block ahead of the header row."""
from __future__ import annotations

import logging
from pathlib import Path
from typing import Dict, Mapping, Tuple, Union

import numpy as np
import pandas as pd

from errors import ValidationError

logger = logging.getLogger(__name__)

FLOAT_FORMAT = "%.17g"
METADATA_PREFIX = "#"

PathLike = Union[str, Path]


def format_value(value) -> str:
    if isinstance(value, (float, np.floating)):
        return FLOAT_FORMAT % value
    if isinstance(value, (list, tuple)):
        return ",".join(format_value(v) for v in value)
    return str(value)


def metadata_lines(metadata: Mapping[str, object]) -> list:
    lines = []
    for key, value in metadata.items():
        text = format_value(value)
        if "\n" in text or "=" in key:
            raise ValidationError("metadata", f"entry {key!r} cannot be written on one line")
        lines.append(f"{METADATA_PREFIX}{key}={text}\n")
    return lines


def write_csv(frame: pd.DataFrame, path: PathLike, metadata: Mapping[str, object]) -> Path:
    """Write metadata lines, then the frame with 17 significant digits; identical inputs give identical bytes."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="") as handle:
        handle.writelines(metadata_lines(metadata))
        frame.to_csv(handle, index=False, float_format=FLOAT_FORMAT, lineterminator="\n")
    logger.info(f"Wrote {len(frame)} rows to {path}")
    return path


def read_metadata(path: PathLike) -> Dict[str, str]:
    metadata: Dict[str, str] = {}
    with open(path, "r", encoding="utf-8") as handle:
        for line in handle:
            if not line.startswith(METADATA_PREFIX):
                break
            key, _, value = line[len(METADATA_PREFIX):].rstrip("\n").partition("=")
            metadata[key] = value
    return metadata


def read_csv(path: PathLike) -> pd.DataFrame:
    return pd.read_csv(path, comment=METADATA_PREFIX)


def clamp_probabilities(values, label: str = "probability") -> Tuple[np.ndarray, int]:
    """Clip to [0, 1] and report how many samples needed it."""
    values = np.asarray(values, dtype=float)
    clamped = np.clip(values, 0.0, 1.0)
    count = int(np.count_nonzero(clamped != values))
    if count:
        logger.warning(f"Clamped {count} {label} values into [0, 1]")
    return clamped, count
