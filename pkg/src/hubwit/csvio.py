"""CSV files with a '#'-prefixed metadata preamble.

The audience is people diffing runs, so everything is plain text and every
float is written as its shortest round-trip decimal: read_table(write_table(x))
reproduces numeric fields exactly.  Empty cells read back as None.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping, Sequence


def format_value(value) -> str:
    if value is None:
        return ""
    if isinstance(value, float):
        return repr(value)  # shortest decimal that round-trips
    return str(value)


def _parse_cell(cell: str):
    if cell == "":
        return None
    try:
        return int(cell)
    except ValueError:
        pass
    try:
        return float(cell)
    except ValueError:
        return cell


@dataclass
class Table:
    metadata: dict[str, str]
    columns: list[str]
    rows: list[list]


def write_table(path, metadata: Mapping[str, str], columns: Sequence[str], rows) -> None:
    with open(path, "w") as fh:
        for key, value in metadata.items():
            fh.write(f"# {key} = {value}\n")
        fh.write(",".join(columns) + "\n")
        for row in rows:
            fh.write(",".join(format_value(cell) for cell in row) + "\n")


def read_table(path) -> Table:
    metadata: dict[str, str] = {}
    columns: list[str] = []
    rows: list[list] = []
    with open(path) as fh:
        for line in fh:
            line = line.rstrip("\n")
            if not line:
                continue
            if line.startswith("#"):
                key, _, value = line[1:].partition("=")
                metadata[key.strip()] = value.strip()
            elif not columns:
                columns = line.split(",")
            else:
                rows.append([_parse_cell(cell) for cell in line.split(",")])
    return Table(metadata=metadata, columns=columns, rows=rows)
