"""Data model for insurer solvency grading.

Defines the four ordered solvency classes with their CAR brackets and
regulatory action levels, an immutable in-memory dataset of numeric ratio
attributes, CSV ingestion with three labeling modes, and a synthetic
generator that reproduces a configurable class skew from a latent CAR.
"""
from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass
from enum import IntEnum
from pathlib import Path
from typing import Iterable, Sequence, TextIO

import numpy as np

from . import rng as rngmod


class DataError(ValueError):
    """Malformed or inconsistent input data (bad CSV cell, impossible CAR, ...)."""


class SolvencyClass(IntEnum):
    """Ordered solvency grades; a higher value means financially stronger."""

    INSOLVENCY = 0
    WEAK = 1
    MODERATE = 2
    STRONG = 3

    @property
    def label(self) -> str:
        return self.name.capitalize()


# CAR brackets, half-open with inclusive lower bounds. CAR is a ratio:
# 1.5 here means the 150% supervisory threshold.
WEAK_MIN = 1.0
MODERATE_MIN = 1.2
STRONG_MIN = 1.5

ACTION_LEVELS = {
    "Strong": "No action level",
    "Moderate": "Company action level",
    "Weak": "Regulatory action level",
    "Insolvency": "Authorized control & Mandatory control level",
}

# action_level is reserved so a labeled file can be re-read: it carries
# text, never a financial ratio
RESERVED_COLUMNS = ("company_id", "year", "car", "tca", "tcr", "class", "action_level")


def label_from_car(car: float) -> SolvencyClass:
    """Grade a capital adequacy ratio.

    Brackets: [1.5, inf) Strong, [1.2, 1.5) Moderate, [1.0, 1.2) Weak,
    [0, 1.0) Insolvency.
    """
    if not math.isfinite(car) or car < 0:
        raise DataError(f"CAR must be finite and non-negative, got {car!r}")
    if car >= STRONG_MIN:
        return SolvencyClass.STRONG
    if car >= MODERATE_MIN:
        return SolvencyClass.MODERATE
    if car >= WEAK_MIN:
        return SolvencyClass.WEAK
    return SolvencyClass.INSOLVENCY


def action_level(label: str) -> str:
    """Supervisory action level for a canonical class label ('' if unknown)."""
    return ACTION_LEVELS.get(label, "")


@dataclass(frozen=True)
class ClassOrdering:
    """Class labels listed from lowest to highest grade."""

    labels: tuple[str, ...]

    def __post_init__(self) -> None:
        if len(self.labels) < 2:
            raise ValueError("an ordering needs at least two classes")
        lowered = [s.lower() for s in self.labels]
        if len(set(lowered)) != len(lowered):
            raise ValueError("class labels must be distinct (case-insensitively)")

    @property
    def size(self) -> int:
        return len(self.labels)

    def index(self, label: str) -> int:
        """Resolve a label case-insensitively to its ordinal index."""
        want = label.strip().lower()
        for i, name in enumerate(self.labels):
            if name.lower() == want:
                return i
        raise DataError(f"unknown class label {label!r}; expected one of {list(self.labels)}")


CANONICAL_ORDERING = ClassOrdering(tuple(c.label for c in SolvencyClass))


@dataclass(frozen=True)
class AttributeSchema:
    """Names of the numeric ratio attributes, in column order."""

    names: tuple[str, ...]

    def __post_init__(self) -> None:
        if len(set(self.names)) != len(self.names):
            raise ValueError("attribute names must be distinct")

    @property
    def size(self) -> int:
        return len(self.names)

    def index(self, name: str) -> int:
        try:
            return self.names.index(name)
        except ValueError:
            raise KeyError(f"unknown attribute {name!r}") from None


DEFAULT_SCHEMA = AttributeSchema(tuple(f"V{i}" for i in range(1, 14)))


@dataclass
class CompanyRecord:
    """One CSV row: identity, optional capital figures, ratios, optional label."""

    ratios: tuple[float, ...]
    company_id: str | None = None
    year: int | None = None
    car: float | None = None
    tca: float | None = None
    tcr: float | None = None
    label: str | None = None


@dataclass(frozen=True)
class Dataset:
    """Immutable labeled dataset: float64 attribute matrix plus class indices."""

    schema: AttributeSchema
    ordering: ClassOrdering
    x: np.ndarray
    y: np.ndarray

    def __post_init__(self) -> None:
        x = np.ascontiguousarray(np.asarray(self.x, dtype=np.float64))
        y = np.ascontiguousarray(np.asarray(self.y, dtype=np.int64))
        if x.ndim != 2 or y.ndim != 1 or x.shape[0] != y.shape[0]:
            raise ValueError("x must be (n, m) and y must be (n,)")
        if x.shape[1] != self.schema.size:
            raise ValueError("attribute matrix width does not match the schema")
        if y.size and (y.min() < 0 or y.max() >= self.ordering.size):
            raise ValueError("class index out of range for the ordering")
        if not np.isfinite(x).all():
            raise ValueError("attribute values must be finite")
        x.setflags(write=False)
        y.setflags(write=False)
        object.__setattr__(self, "x", x)
        object.__setattr__(self, "y", y)

    @property
    def n(self) -> int:
        return int(self.y.shape[0])

    def class_counts(self) -> np.ndarray:
        return np.bincount(self.y, minlength=self.ordering.size)

    def subset(self, indices: Sequence[int] | np.ndarray) -> "Dataset":
        idx = np.asarray(indices, dtype=np.int64)
        return Dataset(self.schema, self.ordering, self.x[idx], self.y[idx])

    def project(self, attributes: Sequence[int]) -> "Dataset":
        """Keep only the given attribute columns, in the given order."""
        cols = [int(a) for a in attributes]
        names = tuple(self.schema.names[a] for a in cols)
        x = self.x[:, cols] if cols else np.empty((self.n, 0), dtype=np.float64)
        return Dataset(AttributeSchema(names), self.ordering, x, self.y)


@dataclass
class CsvTable:
    """A raw CSV file: header names plus unparsed row cells."""

    header: list[str]
    rows: list[list[str]]


def _open_text(source: str | Path | TextIO | io.IOBase) -> str:
    if hasattr(source, "read"):
        text = source.read()
        if isinstance(text, bytes):
            text = text.decode("utf-8")
        return text
    return Path(source).read_text(encoding="utf-8")


def read_table(source: str | Path | TextIO) -> CsvTable:
    """Read a CSV file into header + raw rows (UTF-8, comma separated)."""
    text = _open_text(source)
    if text.startswith("﻿"):
        text = text[1:]
    rows = [row for row in csv.reader(io.StringIO(text))]
    if not rows or not any(cell.strip() for cell in rows[0]):
        raise DataError("empty file: expected a header row")
    header = [h.strip() for h in rows[0]]
    if len(set(header)) != len(header):
        raise DataError("duplicate column names in header")
    return CsvTable(header, rows[1:])


def _parse_float(cell: str, row: int, column: str) -> float:
    try:
        value = float(cell)
    except ValueError:
        raise DataError(f"row {row}, column {column!r}: cannot parse {cell!r} as a number") from None
    if not math.isfinite(value):
        raise DataError(f"row {row}, column {column!r}: value must be finite, got {cell!r}")
    return value


def parse_records(table: CsvTable) -> tuple[AttributeSchema, list[CompanyRecord]]:
    """Turn raw CSV cells into typed records.

    Non-reserved columns become numeric attributes in header order. When car,
    tca, and tcr are all present with tcr > 0, car must equal tca / tcr.
    """
    positions = {name: i for i, name in enumerate(table.header)}
    attr_names = [h for h in table.header if h not in RESERVED_COLUMNS]
    if not attr_names:
        raise DataError("no attribute columns: every column is reserved")
    schema = AttributeSchema(tuple(attr_names))

    def cell(row: list[str], name: str) -> str:
        pos = positions.get(name)
        return row[pos].strip() if pos is not None and pos < len(row) else ""

    records = []
    for r, row in enumerate(table.rows, start=1):
        if len(row) != len(table.header):
            raise DataError(f"row {r}: expected {len(table.header)} cells, found {len(row)}")
        ratios = tuple(_parse_float(cell(row, a), r, a) for a in attr_names)
        rec = CompanyRecord(
            ratios=ratios,
            company_id=cell(row, "company_id") or None,
            year=int(_parse_float(cell(row, "year"), r, "year")) if cell(row, "year") else None,
            car=_parse_float(cell(row, "car"), r, "car") if cell(row, "car") else None,
            tca=_parse_float(cell(row, "tca"), r, "tca") if cell(row, "tca") else None,
            tcr=_parse_float(cell(row, "tcr"), r, "tcr") if cell(row, "tcr") else None,
            label=cell(row, "class") or None,
        )
        if rec.car is not None and rec.tca is not None and rec.tcr is not None and rec.tcr > 0:
            implied = rec.tca / rec.tcr
            if abs(rec.car - implied) > 1e-9 * max(1.0, abs(rec.car)):
                raise DataError(
                    f"row {r}: car={rec.car!r} disagrees with tca/tcr={implied!r}"
                )
        records.append(rec)
    return schema, records


LABEL_MODES = ("class", "car", "tca-tcr")


def record_car(rec: CompanyRecord, mode: str, row: int) -> float:
    """The CAR a labeling mode would use for this record."""
    if mode == "car":
        if rec.car is None:
            raise DataError(f"row {row}, column 'car': value required for car labeling")
        return rec.car
    if mode == "tca-tcr":
        if rec.tca is None or rec.tcr is None:
            raise DataError(f"row {row}: columns 'tca' and 'tcr' required for tca-tcr labeling")
        if rec.tcr == 0:
            raise DataError(f"row {row}, column 'tcr': zero required capital, CAR undefined")
        return rec.tca / rec.tcr
    raise ValueError(f"mode {mode!r} does not define a CAR")


def resolve_label(rec: CompanyRecord, mode: str, ordering: ClassOrdering, row: int) -> int:
    """Class index for a record under a labeling mode."""
    if mode == "class":
        if rec.label is None:
            raise DataError(f"row {row}, column 'class': label required")
        try:
            return ordering.index(rec.label)
        except DataError as exc:
            raise DataError(f"row {row}, column 'class': {exc}") from None
    if mode in ("car", "tca-tcr"):
        if ordering != CANONICAL_ORDERING:
            raise DataError("CAR-based labeling requires the canonical class ordering")
        try:
            return int(label_from_car(record_car(rec, mode, row)))
        except DataError as exc:
            raise DataError(f"row {row}: {exc}") from None
    raise ValueError(f"unknown label mode {mode!r}; expected one of {LABEL_MODES}")


def load_csv(
    source: str | Path | TextIO,
    label_mode: str = "class",
    ordering: ClassOrdering = CANONICAL_ORDERING,
) -> Dataset:
    """Load a labeled dataset from CSV, preserving row order."""
    if label_mode not in LABEL_MODES:
        raise ValueError(f"unknown label mode {label_mode!r}; expected one of {LABEL_MODES}")
    schema, records = parse_records(read_table(source))
    if not records:
        raise DataError("no data rows")
    y = [resolve_label(rec, label_mode, ordering, row) for row, rec in enumerate(records, start=1)]
    x = np.array([rec.ratios for rec in records], dtype=np.float64)
    return Dataset(schema, ordering, x, np.array(y, dtype=np.int64))


def format_value(value: float) -> str:
    """Shortest decimal string that round-trips the float exactly."""
    return repr(float(value))


def write_table(table: CsvTable, stream: TextIO) -> None:
    writer = csv.writer(stream, lineterminator="\n")
    writer.writerow(table.header)
    writer.writerows(table.rows)


def dataset_to_csv(dataset: Dataset) -> str:
    """Serialize attributes plus class labels; ratio values round-trip exactly."""
    out = io.StringIO()
    header = list(dataset.schema.names) + ["class"]
    rows = [
        [format_value(v) for v in dataset.x[i]] + [dataset.ordering.labels[dataset.y[i]]]
        for i in range(dataset.n)
    ]
    write_table(CsvTable(header, rows), out)
    return out.getvalue()


# --- synthetic generation -------------------------------------------------

# Latent CAR is drawn uniformly inside each class bracket; the open-ended
# brackets are clipped to keep the latent variable bounded.
CAR_RANGES = ((0.2, 1.0), (1.0, 1.2), (1.2, 1.5), (1.5, 3.0))

# Fixed affine ratio map: ratio_j = slope_j * car + intercept_j + N(0, noise).
# Several steep slopes keep the narrow Weak bracket separable at noise 0.1.
SYNTH_SLOPES = np.array(
    [3.5, -2.0, 1.5, -1.0, 2.5, -3.0, 1.2, 0.8, -1.5, 2.0, -0.6, 1.0, -2.5]
)
SYNTH_INTERCEPTS = np.array(
    [0.1, 3.2, -0.4, 1.8, 0.5, -1.1, 2.4, 0.2, -0.3, 1.5, -0.8, 1.0, 0.0]
)

TABLE2_COUNTS = (45, 13, 17, 541)


@dataclass(frozen=True)
class SynthSpec:
    """Class counts (lowest grade first), seed, and ratio noise level."""

    counts: tuple[int, int, int, int]
    seed: int = rngmod.DEFAULT_SEED
    noise: float = 0.1

    def __post_init__(self) -> None:
        if len(self.counts) != len(CAR_RANGES):
            raise ValueError(f"expected {len(CAR_RANGES)} class counts")
        if any(c < 0 for c in self.counts) or sum(self.counts) < 1:
            raise ValueError("class counts must be non-negative and sum to at least 1")
        if self.noise < 0 or not math.isfinite(self.noise):
            raise ValueError("noise must be finite and non-negative")


def _synth_arrays(spec: SynthSpec) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    rng = rngmod.make_rng(spec.seed, rngmod.SYNTH)
    cars, xs, ys = [], [], []
    for c, count in enumerate(spec.counts):
        if count == 0:
            continue
        lo, hi = CAR_RANGES[c]
        car = rng.uniform(lo, hi, size=count)
        noise = rng.normal(0.0, spec.noise, size=(count, len(SYNTH_SLOPES)))
        cars.append(car)
        xs.append(car[:, None] * SYNTH_SLOPES + SYNTH_INTERCEPTS + noise)
        ys.append(np.full(count, c, dtype=np.int64))
    return np.concatenate(cars), np.vstack(xs), np.concatenate(ys)


def synth_generate(spec: SynthSpec) -> Dataset:
    """Generate a labeled dataset with exactly the requested class counts."""
    _, x, y = _synth_arrays(spec)
    return Dataset(DEFAULT_SCHEMA, CANONICAL_ORDERING, x, y)


def synth_table(spec: SynthSpec) -> CsvTable:
    """Full synthetic CSV: company ids, the latent CAR, ratios, class label."""
    cars, x, y = _synth_arrays(spec)
    header = ["company_id", "car"] + list(DEFAULT_SCHEMA.names) + ["class"]
    rows = []
    for i in range(len(y)):
        rows.append(
            [f"synth-{i + 1:04d}", format_value(cars[i])]
            + [format_value(v) for v in x[i]]
            + [CANONICAL_ORDERING.labels[y[i]]]
        )
    return CsvTable(header, rows)
