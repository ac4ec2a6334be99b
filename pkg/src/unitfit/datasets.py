"""Embedded reference datasets and validated loading of user data."""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import DataError
from .mbur import Y_MAX, Y_MIN
from .sample import Sample


@dataclass(frozen=True)
class NamedDataset:
    name: str
    values: tuple
    source: str = ""

    @property
    def n(self) -> int:
        return len(self.values)

    def sample(self) -> Sample:
        return Sample.from_values(self.values)

    def to_dict(self) -> dict:
        return {"name": self.name, "n": self.n, "source": self.source, "values": list(self.values)}


_BUILTIN = {
    "dwellings": (
        "OECD: dwellings without basic facilities (share)",
        (0.008, 0.007, 0.002, 0.094, 0.123, 0.023, 0.005, 0.005, 0.057, 0.004, 0.005,
         0.001, 0.004, 0.035, 0.002, 0.006, 0.064, 0.025, 0.112, 0.118, 0.001, 0.259,
         0.001, 0.023, 0.009, 0.015, 0.002, 0.003, 0.049, 0.005, 0.001),
    ),
    "quality": (
        "OECD: quality of support network (share)",
        (0.98, 0.96, 0.95, 0.94, 0.93, 0.8, 0.82, 0.85, 0.88, 0.89, 0.78, 0.92, 0.92,
         0.9, 0.96, 0.96, 0.94, 0.77, 0.95, 0.91),
    ),
    "education": (
        "OECD: educational attainment (share)",
        (0.84, 0.86, 0.8, 0.92, 0.67, 0.59, 0.43, 0.94, 0.82, 0.91, 0.91, 0.81, 0.86,
         0.76, 0.86, 0.76, 0.85, 0.88, 0.63, 0.89, 0.89, 0.94, 0.74, 0.42, 0.81, 0.81,
         0.93, 0.55, 0.92, 0.9, 0.63, 0.84, 0.89, 0.42, 0.82, 0.92),
    ),
    "flood": (
        "Maximum flood levels, Susquehanna River at Harrisburg",
        (0.26, 0.27, 0.3, 0.32, 0.32, 0.34, 0.38, 0.38, 0.39, 0.4, 0.41, 0.42, 0.42,
         0.42, 0.45, 0.48, 0.49, 0.61, 0.65, 0.74),
    ),
    "pumps": (
        "Times between failures of secondary reactor pumps",
        (0.216, 0.015, 0.4082, 0.0746, 0.0358, 0.0199, 0.0402, 0.0101, 0.0605, 0.0954,
         0.1359, 0.0273, 0.0491, 0.3465, 0.007, 0.656, 0.106, 0.0062, 0.4992, 0.0614,
         0.532, 0.0347, 0.1921),
    ),
}

NAMES = tuple(_BUILTIN)


def builtin(name: str) -> NamedDataset:
    """One of the embedded datasets, values in their published order."""
    try:
        source, values = _BUILTIN[name]
    except KeyError:
        raise DataError(f"unknown dataset {name!r}; valid names: {', '.join(NAMES)}") from None
    return NamedDataset(name, values, source)


def list_builtin() -> list:
    return [(name, len(v[1])) for name, v in _BUILTIN.items()]


def parse_values(text: str, column: int | None = None, delimiter: str | None = None,
                 name: str = "<text>") -> NamedDataset:
    """Parse one value per record; ``column`` selects a field of delimited rows.

    Blank lines and lines starting with ``#`` are skipped. A single
    non-numeric first record is treated as a header when ``column`` is set.
    """
    if delimiter is not None and len(delimiter) != 1:
        raise DataError("delimiter must be a single character")
    values = []
    first_data = True
    for lineno, line in enumerate(io.StringIO(text), start=1):
        stripped = line.strip()
        if not stripped or stripped.startswith("#"):
            continue
        if delimiter is not None or column is not None:
            fields = next(csv.reader([stripped], delimiter=delimiter or ","))
            idx = 0 if column is None else column
            if idx < 0 or idx >= len(fields):
                raise DataError(f"column {idx} not present ({len(fields)} field(s))", line=lineno)
            token = fields[idx].strip()
        else:
            token = stripped
        try:
            v = float(token)
        except ValueError:
            if first_data and column is not None:
                first_data = False
                continue
            raise DataError(f"cannot parse {token!r} as a number", line=lineno) from None
        first_data = False
        if not (Y_MIN <= v <= Y_MAX):
            raise DataError(f"value {token} is outside the open interval (0, 1)", line=lineno)
        values.append(v)
    if not values:
        raise DataError(f"{name}: no data values found")
    return NamedDataset(name, tuple(np.sort(values).tolist()), f"file {name}")


def load_csv(path, column: int | None = None, delimiter: str | None = None) -> NamedDataset:
    """Read a UTF-8 text file of values strictly inside (0, 1)."""
    p = Path(path)
    try:
        text = p.read_text(encoding="utf-8")
    except (OSError, UnicodeDecodeError) as exc:
        raise DataError(f"cannot read {p}: {exc}") from None
    return parse_values(text, column, delimiter, name=str(p))


def resolve(spec: str, column: int | None = None, delimiter: str | None = None) -> NamedDataset:
    """A builtin name, or otherwise a file path."""
    if spec in _BUILTIN:
        return builtin(spec)
    if not Path(spec).exists():
        raise DataError(f"{spec!r} is neither a builtin dataset ({', '.join(NAMES)}) nor an existing file")
    return load_csv(spec, column, delimiter)
