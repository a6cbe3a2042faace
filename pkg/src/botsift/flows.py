"""Flow records, schemas, datasets, and CSV input/output.

A flow record is one network flow summary (the BoT-IoT column vocabulary:
packet/byte counts, duration, per-direction rates, proto/state tokens, and
a binary attack label). Records are loaded from CSV against a schema that
assigns each column a role; cleaned, encoded records are then assembled
into a dense numeric Dataset for the learning stages.
"""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass, field
from importlib import resources
from typing import Iterable, Sequence

import numpy as np

from .errors import LoadError, SchemaError

ROLES = ("numeric", "categorical", "label", "ignore")

# Canonical column order for the named record fields.
NAMED_FIELDS = (
    "pkts", "bytes", "dur", "proto", "state",
    "spkts", "dpkts", "sbytes", "dbytes",
    "rate", "srate", "drate",
)
COUNT_FIELDS = ("pkts", "bytes", "spkts", "dpkts", "sbytes", "dbytes")
NONNEGATIVE_FIELDS = COUNT_FIELDS + ("dur", "rate", "srate", "drate")
CATEGORICAL_FIELDS = ("proto", "state")
LABEL_FIELD = "attack"


@dataclass
class Schema:
    """Maps CSV column names to roles.

    roles: explicit column -> role assignments; exactly one column must
        carry the "label" role.
    default_role: role given to columns that appear in a file but are not
        listed in `roles`.
    """

    roles: dict[str, str]
    default_role: str = "ignore"

    def __post_init__(self) -> None:
        for col, role in self.roles.items():
            if role not in ROLES:
                raise SchemaError(f"column {col!r} has unknown role {role!r}")
        if self.default_role not in ROLES or self.default_role == "label":
            raise SchemaError(f"invalid default role {self.default_role!r}")
        labels = [c for c, r in self.roles.items() if r == "label"]
        if len(labels) != 1:
            raise SchemaError(f"schema must declare exactly one label column, found {labels}")

    @property
    def label_column(self) -> str:
        return next(c for c, r in self.roles.items() if r == "label")

    def role_of(self, column: str) -> str:
        return self.roles.get(column, self.default_role)

    def feature_columns(self) -> list[str]:
        return [c for c, r in self.roles.items() if r in ("numeric", "categorical")]

    @classmethod
    def from_json(cls, path: str) -> "Schema":
        try:
            with open(path, "r", encoding="utf-8") as fh:
                raw = json.load(fh)
        except FileNotFoundError:
            raise SchemaError(f"schema file not found: {path}")
        except json.JSONDecodeError as exc:
            raise SchemaError(f"schema file {path} is not valid JSON: {exc}")
        if not isinstance(raw, dict) or "roles" not in raw:
            raise SchemaError(f"schema file {path} must contain a 'roles' object")
        return cls(roles=dict(raw["roles"]), default_role=raw.get("default_role", "ignore"))

    def to_json(self, path: str) -> None:
        with open(path, "w", encoding="utf-8") as fh:
            json.dump({"roles": self.roles, "default_role": self.default_role},
                      fh, indent=2, sort_keys=True)
            fh.write("\n")


def default_schema() -> Schema:
    """The bundled schema for the standard flow column vocabulary."""
    text = resources.files("botsift").joinpath("schemas/flow-default.json").read_text("utf-8")
    raw = json.loads(text)
    return Schema(roles=dict(raw["roles"]), default_role=raw.get("default_role", "ignore"))


@dataclass
class FlowRecord:
    """One flow summary row.

    Numeric fields are None when the source cell was missing or failed to
    parse; proto/state hold raw tokens after loading and numeric codes
    after encoding. `extra` carries additional schema-declared feature
    columns in file order.
    """

    pkts: float | None = None
    bytes: float | None = None
    dur: float | None = None
    proto: str | float | None = None
    state: str | float | None = None
    spkts: float | None = None
    dpkts: float | None = None
    sbytes: float | None = None
    dbytes: float | None = None
    rate: float | None = None
    srate: float | None = None
    drate: float | None = None
    attack: int = 0
    extra: dict[str, float | str | None] = field(default_factory=dict)

    def validate(self, where: str = "record") -> None:
        for name in NONNEGATIVE_FIELDS:
            value = getattr(self, name)
            if value is not None and value < 0:
                raise LoadError(f"{where}: field {name!r} is negative ({value!r})")
        if self.attack not in (0, 1):
            raise LoadError(f"{where}: label must be 0 or 1, got {self.attack!r}")

    def get(self, column: str):
        if column in NAMED_FIELDS or column == LABEL_FIELD:
            return getattr(self, column)
        return self.extra.get(column)


def _parse_numeric(cell: str) -> float | None:
    cell = cell.strip()
    if not cell:
        return None
    try:
        value = float(cell)
    except ValueError:
        return None
    if not np.isfinite(value):
        return None
    return value


def load_csv(path: str, schema: Schema | None = None) -> list[FlowRecord]:
    """Load flow records from a CSV file.

    Columns are interpreted per the schema role map (bundled default when
    schema is None). Missing or unparseable numeric cells become None and
    are left for cleansing; the label column must parse to 0 or 1 in every
    row. Row order is preserved.
    """
    if schema is None:
        schema = default_schema()
    try:
        fh = open(path, "r", encoding="utf-8", newline="")
    except FileNotFoundError:
        raise LoadError(f"input file not found: {path}")
    with fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise LoadError(f"{path}: file is empty")
        header = [h.strip() for h in header]
        if schema.label_column not in header:
            raise LoadError(
                f"{path}: header has no column {schema.label_column!r} "
                f"(declared label column)")
        column_roles = [(name, schema.role_of(name)) for name in header]

        records: list[FlowRecord] = []
        for line_no, row in enumerate(reader, start=2):
            if not row:
                continue
            rec = FlowRecord()
            for (name, role), cell in zip(column_roles, row):
                if role == "ignore":
                    continue
                if role == "label":
                    token = cell.strip()
                    if token not in ("0", "1"):
                        raise LoadError(
                            f"{path}:{line_no}: label column {name!r} has value "
                            f"{cell!r}, expected 0 or 1")
                    rec.attack = int(token)
                elif role == "categorical":
                    token = cell.strip()
                    value = token if token else None
                    if name in NAMED_FIELDS:
                        setattr(rec, name, value)
                    else:
                        rec.extra[name] = value
                else:  # numeric
                    value = _parse_numeric(cell)
                    if name in NAMED_FIELDS:
                        setattr(rec, name, value)
                    else:
                        rec.extra[name] = value
            rec.validate(where=f"{path}:{line_no}")
            records.append(rec)
    return records


@dataclass(frozen=True)
class ClassSummary:
    """Per-class row counts and per-feature means.

    counts is (normal_count, botnet_count). means maps a class label that
    has at least one row to {feature: mean over rows where the value is
    present and numeric}; a class with no rows is absent from the map.
    """

    counts: tuple[int, int]
    means: dict[int, dict[str, float]]

    @property
    def total(self) -> int:
        return self.counts[0] + self.counts[1]


def class_summary(records: Sequence[FlowRecord]) -> ClassSummary:
    counts = [0, 0]
    sums: dict[int, dict[str, float]] = {}
    ns: dict[int, dict[str, int]] = {}
    columns = _observed_columns(records)
    for rec in records:
        label = rec.attack
        counts[label] += 1
        csums = sums.setdefault(label, {})
        cns = ns.setdefault(label, {})
        for name in columns:
            value = rec.get(name)
            if isinstance(value, (int, float)):
                csums[name] = csums.get(name, 0.0) + float(value)
                cns[name] = cns.get(name, 0) + 1
    means = {
        label: {name: csums[name] / ns[label][name] for name in csums}
        for label, csums in sums.items()
    }
    return ClassSummary(counts=(counts[0], counts[1]), means=means)


def _observed_columns(records: Sequence[FlowRecord]) -> list[str]:
    """Feature columns that carry at least one value, in canonical order."""
    named = [f for f in NAMED_FIELDS
             if any(r.get(f) is not None for r in records)]
    extras: list[str] = []
    for rec in records:
        for key in rec.extra:
            if key not in extras:
                extras.append(key)
    return named + extras


@dataclass(frozen=True)
class Dataset:
    """Dense numeric design matrix with binary labels.

    Rows align between features and labels. Arrays are frozen after
    construction so a Dataset can be shared across threads safely.
    """

    features: np.ndarray
    labels: np.ndarray
    feature_names: tuple[str, ...]

    def __post_init__(self) -> None:
        feats = np.ascontiguousarray(np.asarray(self.features, dtype=np.float64))
        labels = np.asarray(self.labels, dtype=np.int64)
        if feats.ndim != 2:
            raise LoadError("features must be a 2-d array")
        if labels.ndim != 1 or labels.shape[0] != feats.shape[0]:
            raise LoadError(
                f"labels length {labels.shape} does not match {feats.shape[0]} rows")
        if len(self.feature_names) != feats.shape[1]:
            raise LoadError(
                f"{len(self.feature_names)} feature names for {feats.shape[1]} columns")
        if len(set(self.feature_names)) != len(self.feature_names):
            raise LoadError("feature names must be unique")
        if feats.size and not np.isfinite(feats).all():
            raise LoadError("features contain NaN or infinite values; cleanse first")
        if labels.size and not np.isin(labels, (0, 1)).all():
            raise LoadError("labels must be 0 or 1")
        feats.setflags(write=False)
        labels.setflags(write=False)
        object.__setattr__(self, "features", feats)
        object.__setattr__(self, "labels", labels)
        object.__setattr__(self, "feature_names", tuple(self.feature_names))

    @property
    def n_rows(self) -> int:
        return self.features.shape[0]

    @property
    def n_features(self) -> int:
        return self.features.shape[1]

    @property
    def class_counts(self) -> tuple[int, int]:
        """(normal_count, botnet_count)."""
        botnet = int(np.count_nonzero(self.labels))
        return (self.n_rows - botnet, botnet)

    def take(self, indices: np.ndarray) -> "Dataset":
        return Dataset(self.features[indices], self.labels[indices], self.feature_names)

    def with_columns(self, names: Sequence[str]) -> "Dataset":
        index = {n: i for i, n in enumerate(self.feature_names)}
        missing = [n for n in names if n not in index]
        if missing:
            raise LoadError(f"unknown feature columns: {missing}")
        cols = [index[n] for n in names]
        return Dataset(self.features[:, cols], self.labels, tuple(names))


def to_dataset(records: Sequence[FlowRecord],
               features: Sequence[str] | None = None) -> Dataset:
    """Assemble cleansed, encoded records into a Dataset.

    With features=None every column that is numeric and present in all
    records is used, named fields first in canonical order. Token-valued
    proto/state columns are skipped (encode first to include them).
    """
    if not records:
        raise LoadError("cannot build a dataset from zero records")
    if features is None:
        features = [
            name for name in _observed_columns(records)
            if all(isinstance(r.get(name), (int, float)) for r in records)
        ]
    else:
        for name in features:
            bad = [i for i, r in enumerate(records)
                   if not isinstance(r.get(name), (int, float))]
            if bad:
                raise LoadError(
                    f"feature {name!r} is missing or non-numeric in "
                    f"{len(bad)} records (first at index {bad[0]})")
    if not features:
        raise LoadError("no fully-populated numeric feature columns found")
    matrix = np.empty((len(records), len(features)), dtype=np.float64)
    for i, rec in enumerate(records):
        for j, name in enumerate(features):
            matrix[i, j] = float(rec.get(name))
    labels = np.fromiter((r.attack for r in records), dtype=np.int64, count=len(records))
    return Dataset(matrix, labels, tuple(features))


def _format_cell(value) -> str:
    if value is None:
        return ""
    if isinstance(value, str):
        return value
    as_float = float(value)
    if as_float.is_integer() and abs(as_float) < 1e16:
        return str(int(as_float))
    return repr(as_float)


def write_records_csv(records: Sequence[FlowRecord], path: str) -> None:
    """Write records to CSV. Values round-trip exactly through load_csv."""
    columns = _observed_columns(records)
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(columns + [LABEL_FIELD])
        for rec in records:
            writer.writerow([_format_cell(rec.get(c)) for c in columns]
                            + [str(rec.attack)])


def write_dataset_csv(dataset: Dataset, path: str,
                      synthetic: np.ndarray | None = None) -> None:
    """Write a numeric dataset to CSV.

    synthetic, when given, is a 0/1 row flag column marking rows that were
    generated by resampling rather than observed.
    """
    if synthetic is not None and len(synthetic) != dataset.n_rows:
        raise LoadError("synthetic flag length does not match row count")
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        header = list(dataset.feature_names) + [LABEL_FIELD]
        if synthetic is not None:
            header.append("synthetic")
        writer.writerow(header)
        for i in range(dataset.n_rows):
            row = [_format_cell(v) for v in dataset.features[i]]
            row.append(str(int(dataset.labels[i])))
            if synthetic is not None:
                row.append(str(int(synthetic[i])))
            writer.writerow(row)


def read_dataset_csv(path: str) -> tuple[Dataset, np.ndarray | None]:
    """Read a CSV written by write_dataset_csv.

    Returns (dataset, synthetic_flags_or_None). The column named `attack`
    is the label, `synthetic` is the optional provenance flag, and every
    other column must be fully numeric.
    """
    try:
        fh = open(path, "r", encoding="utf-8", newline="")
    except FileNotFoundError:
        raise LoadError(f"input file not found: {path}")
    with fh:
        reader = csv.reader(fh)
        try:
            header = [h.strip() for h in next(reader)]
        except StopIteration:
            raise LoadError(f"{path}: file is empty")
        if LABEL_FIELD not in header:
            raise LoadError(f"{path}: header has no {LABEL_FIELD!r} column")
        label_idx = header.index(LABEL_FIELD)
        synth_idx = header.index("synthetic") if "synthetic" in header else None
        feat_idx = [i for i in range(len(header))
                    if i not in (label_idx, synth_idx)]
        rows: list[list[float]] = []
        labels: list[int] = []
        flags: list[int] = []
        for line_no, row in enumerate(reader, start=2):
            if not row:
                continue
            token = row[label_idx].strip()
            if token not in ("0", "1"):
                raise LoadError(f"{path}:{line_no}: label value {token!r}")
            labels.append(int(token))
            try:
                rows.append([float(row[i]) for i in feat_idx])
            except ValueError:
                raise LoadError(f"{path}:{line_no}: non-numeric feature cell")
            if synth_idx is not None:
                flags.append(int(row[synth_idx]))
    names = tuple(header[i] for i in feat_idx)
    matrix = np.asarray(rows, dtype=np.float64).reshape(len(rows), len(names))
    dataset = Dataset(matrix, np.asarray(labels, dtype=np.int64), names)
    return dataset, (np.asarray(flags, dtype=np.int64) if synth_idx is not None else None)
