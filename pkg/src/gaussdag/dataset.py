"""Dataset CSV ingestion and serialization.

Format: UTF-8, a comma-separated header of identifiers, then one row of
decimal numbers per line. No quoting; lines starting with ``#`` and blank
lines are ignored.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

import numpy as np

from .errors import MissingValue, NonFinite, ParseError

NAME_RE = re.compile(r"[A-Za-z_][A-Za-z0-9_]*\Z")


@dataclass(frozen=True, eq=False)
class Dataset:
    names: tuple[str, ...]
    values: np.ndarray

    @property
    def m(self) -> int:
        return self.values.shape[0]

    @property
    def n(self) -> int:
        return len(self.names)


def parse_dataset(text: str) -> Dataset:
    names: tuple[str, ...] | None = None
    rows: list[list[float]] = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        cells = [c.strip() for c in line.split(",")]
        if names is None:
            for col, name in enumerate(cells, start=1):
                if not NAME_RE.match(name):
                    raise ParseError(f"invalid variable name {name!r}", lineno, col)
            if len(set(cells)) != len(cells):
                raise ParseError("duplicate variable names in header", lineno)
            names = tuple(cells)
            continue
        if len(cells) < len(names):
            cells += [""] * (len(names) - len(cells))
        if len(cells) > len(names):
            raise ParseError(f"expected {len(names)} values, got {len(cells)}", lineno, len(names) + 1)
        row = []
        for col, cell in enumerate(cells, start=1):
            if cell == "":
                raise MissingValue(f"missing value (data row {len(rows) + 1})", lineno, col)
            try:
                x = float(cell)
            except ValueError:
                raise ParseError(f"not a number: {cell!r}", lineno, col) from None
            if not math.isfinite(x):
                raise NonFinite(f"non-finite value {cell!r}", lineno, col)
            row.append(x)
        rows.append(row)
    if names is None:
        raise ParseError("missing header line")
    values = np.array(rows, dtype=float).reshape(len(rows), len(names))
    return Dataset(names, values)


def ingest_dataset(path) -> Dataset:
    return parse_dataset(Path(path).read_text(encoding="utf-8"))


def format_dataset(names: Sequence[str], values) -> str:
    """CSV text with 17 significant digits, enough to round-trip every double."""
    lines = [",".join(names)]
    for row in np.asarray(values, dtype=float):
        lines.append(",".join(f"{x:.17g}" for x in row))
    return "\n".join(lines) + "\n"
