"""Schema-checked CSV tables with round-trippable float text."""

from __future__ import annotations

import csv
import math
from pathlib import Path


class SchemaError(ValueError):
    pass


def _cell(value, column: str, lineno: int) -> str:
    if value is None:
        return ""
    if isinstance(value, bool):
        raise SchemaError(f"row {lineno}, column {column}: booleans are not allowed")
    if isinstance(value, int):
        return str(value)
    v = float(value)
    if not math.isfinite(v):
        raise SchemaError(f"row {lineno}, column {column}: non-finite value {v!r}")
    return repr(v)


def write_csv(path, header: list[str], rows, schema: list[str] | None = None):
    """Validate ``rows`` against ``header`` (and ``schema`` if given), then write.

    Cells may be ints, finite floats, or ``None`` (written empty). Floats use
    ``repr`` so that reading them back gives the identical double.
    """
    if schema is not None and list(header) != list(schema):
        raise SchemaError(f"header {header!r} does not match schema {schema!r}")
    if len(set(header)) != len(header):
        raise SchemaError(f"duplicate column in header {header!r}")
    lines = []
    for lineno, row in enumerate(rows, start=2):
        row = list(row)
        if len(row) != len(header):
            raise SchemaError(f"row {lineno}: {len(row)} cells for {len(header)} columns")
        lines.append([_cell(v, c, lineno) for v, c in zip(row, header)])
    Path(path).parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        writer.writerows(lines)


def read_csv(path) -> tuple[list[str], list[list]]:
    """Inverse of :func:`write_csv`: returns ``(header, rows)``.

    Integer-looking cells come back as ``int``, empty cells as ``None``, the
    rest as ``float``.
    """
    path = Path(path)
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None:
            raise SchemaError(f"{path}: empty file")
        rows = []
        for lineno, raw in enumerate(reader, start=2):
            if len(raw) != len(header):
                raise SchemaError(f"{path}:{lineno}: {len(raw)} cells for {len(header)} columns")
            row = []
            for cell in raw:
                if cell == "":
                    row.append(None)
                    continue
                try:
                    row.append(int(cell))
                except ValueError:
                    try:
                        row.append(float(cell))
                    except ValueError:
                        raise SchemaError(f"{path}:{lineno}: not a number: {cell!r}") from None
            rows.append(row)
    return header, rows
