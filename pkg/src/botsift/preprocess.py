"""Cleansing, categorical encoding, and min-max normalization.

The three stages run in that order: drop rows with missing values, map
proto/state tokens to integer codes, then scale every feature column to
[0, 1]. Encoding and scaling are fit/apply pairs whose fitted parameters
serialize to JSON so a pipeline can be re-applied to new data.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .errors import CleanseError, EncodingError, SchemaError
from .flows import CATEGORICAL_FIELDS, Dataset, FlowRecord, Schema, _observed_columns

# First code assigned per categorical column. proto codes count up from 1,
# state codes from 10, so the two code ranges cannot be confused in output.
_CODE_START = {"proto": 1, "state": 10}


def cleanse(records: Sequence[FlowRecord],
            schema: Schema | None = None,
            columns: Sequence[str] | None = None) -> list[FlowRecord]:
    """Drop records with a missing value in any enforced column.

    Enforced columns are `columns` when given, otherwise all schema-declared
    feature columns that carry at least one value somewhere in the data
    (a column absent from the file is not enforced). Relative record order
    is preserved. Labels are validated at load time and are always present.
    """
    if columns is None:
        observed = set(_observed_columns(records))
        if schema is not None:
            enforced = [c for c in schema.feature_columns() if c in observed]
        else:
            enforced = sorted(observed)
    else:
        enforced = list(columns)
    kept = [rec for rec in records
            if all(rec.get(c) is not None for c in enforced)]
    if records and not kept:
        raise CleanseError(
            f"cleansing removed all {len(records)} records "
            f"(enforced columns: {enforced})")
    return kept


@dataclass
class EncodingMap:
    """Token -> integer code tables for categorical columns.

    Codes are assigned in order of first appearance; proto codes start at
    1 and state codes at 10.
    """

    proto_codes: dict[str, int] = field(default_factory=dict)
    state_codes: dict[str, int] = field(default_factory=dict)
    extra_codes: dict[str, dict[str, int]] = field(default_factory=dict)

    def codes_for(self, column: str) -> dict[str, int]:
        if column == "proto":
            return self.proto_codes
        if column == "state":
            return self.state_codes
        return self.extra_codes.setdefault(column, {})

    def to_json(self, path: str) -> None:
        payload = {"proto": self.proto_codes, "state": self.state_codes}
        payload.update(self.extra_codes)
        with open(path, "w", encoding="utf-8") as fh:
            json.dump(payload, fh, indent=2, sort_keys=True)
            fh.write("\n")

    @classmethod
    def from_json(cls, path: str) -> "EncodingMap":
        with open(path, "r", encoding="utf-8") as fh:
            payload = json.load(fh)
        proto = {str(k): int(v) for k, v in payload.pop("proto", {}).items()}
        state = {str(k): int(v) for k, v in payload.pop("state", {}).items()}
        extra = {col: {str(k): int(v) for k, v in codes.items()}
                 for col, codes in payload.items()}
        return cls(proto_codes=proto, state_codes=state, extra_codes=extra)


def _categorical_columns(records: Sequence[FlowRecord],
                         schema: Schema | None) -> list[str]:
    observed = _observed_columns(records)
    if schema is not None:
        declared = {c for c, r in schema.roles.items() if r == "categorical"}
        return [c for c in observed if c in declared]
    return [c for c in observed
            if c in CATEGORICAL_FIELDS
            or any(isinstance(r.get(c), str) for r in records)]


def fit_encoding(records: Sequence[FlowRecord],
                 schema: Schema | None = None) -> EncodingMap:
    """Assign integer codes to categorical tokens by first appearance."""
    mapping = EncodingMap()
    for column in _categorical_columns(records, schema):
        codes = mapping.codes_for(column)
        next_code = _CODE_START.get(column, 1)
        for rec in records:
            token = rec.get(column)
            if token is None or not isinstance(token, str):
                continue
            if token not in codes:
                codes[token] = next_code
                next_code += 1
    return mapping


def apply_encoding(records: Sequence[FlowRecord],
                   mapping: EncodingMap) -> list[FlowRecord]:
    """Replace categorical tokens with their codes; returns new records.

    A token with no code in the map is an error naming the column and
    token, so encodings fitted on one split never silently mislabel
    another.
    """
    known = dict(mapping.extra_codes)
    known["proto"] = mapping.proto_codes
    known["state"] = mapping.state_codes
    out: list[FlowRecord] = []
    for i, rec in enumerate(records):
        new = FlowRecord(**{f: getattr(rec, f) for f in rec.__dataclass_fields__
                            if f != "extra"}, extra=dict(rec.extra))
        for column, codes in known.items():
            token = new.get(column)
            if token is None or not isinstance(token, str):
                continue
            if token not in codes:
                raise EncodingError(
                    f"record {i}: column {column!r} has unknown token {token!r}")
            code = float(codes[token])
            if column in new.__dataclass_fields__:
                setattr(new, column, code)
            else:
                new.extra[column] = code
        out.append(new)
    return out


@dataclass
class ScalerParams:
    """Per-feature min/max fitted on one dataset."""

    feature_names: tuple[str, ...]
    minima: np.ndarray
    maxima: np.ndarray

    def to_json(self, path: str) -> None:
        payload = {
            "features": list(self.feature_names),
            "min": [float(v) for v in self.minima],
            "max": [float(v) for v in self.maxima],
        }
        with open(path, "w", encoding="utf-8") as fh:
            json.dump(payload, fh, indent=2)
            fh.write("\n")

    @classmethod
    def from_json(cls, path: str) -> "ScalerParams":
        with open(path, "r", encoding="utf-8") as fh:
            payload = json.load(fh)
        return cls(feature_names=tuple(payload["features"]),
                   minima=np.asarray(payload["min"], dtype=np.float64),
                   maxima=np.asarray(payload["max"], dtype=np.float64))


def fit_scaler(dataset: Dataset) -> ScalerParams:
    if dataset.n_rows == 0:
        raise SchemaError("cannot fit a scaler on an empty dataset")
    return ScalerParams(
        feature_names=dataset.feature_names,
        minima=dataset.features.min(axis=0),
        maxima=dataset.features.max(axis=0),
    )


def apply_scaler(dataset: Dataset, params: ScalerParams) -> Dataset:
    """Scale each feature to [0, 1] as (x - min) / (max - min).

    A constant fitted column maps to 0. Values outside the fitted range
    (possible when applying train-fitted params to test data) are clamped
    into [0, 1].
    """
    if params.feature_names != dataset.feature_names:
        raise SchemaError(
            f"scaler was fitted on columns {params.feature_names}, "
            f"dataset has {dataset.feature_names}")
    span = params.maxima - params.minima
    constant = span == 0
    safe_span = np.where(constant, 1.0, span)
    scaled = (dataset.features - params.minima) / safe_span
    scaled[:, constant] = 0.0
    np.clip(scaled, 0.0, 1.0, out=scaled)
    return Dataset(scaled, dataset.labels, dataset.feature_names)
