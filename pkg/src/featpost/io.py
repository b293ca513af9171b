"""Bit-exact file formats plus CSV ingestion and report rendering.

Feature file: magic ``FPF1`` | version u32 | n u32 | d u32 | dtype u8 (0 =
8-byte IEEE-754) | n*d little-endian float64, row-major. Model file: magic
``FPPM`` | version u32 | D u32 | T u32 | N u32 | mean (D f64) | eigenvalues
(T f64) | directions (T x D f64, row-major). Everything little-endian, no
padding, so a write/read round trip is byte identical on any host. Labels
travel as plain text, one integer per line.
"""

from __future__ import annotations

import csv
import dataclasses
import json
import struct

import numpy as np

from .errors import (BadMagicError, InvalidModelError, MalformedTextError,
                     NonFiniteDataError, TruncatedPayloadError,
                     UnsupportedVersionError, ValidationError)
from .postprocess import FeaturePostprocessor
from .validation import check_feature_matrix, check_labels

FEATURE_MAGIC = b"FPF1"
MODEL_MAGIC = b"FPPM"
FORMAT_VERSION = 1
_DTYPE_F64 = 0
_FEATURE_HEADER = struct.Struct("<4sIIIB")
_MODEL_HEADER = struct.Struct("<4sIIII")
_MODEL_READ_TOL = 1e-6


def write_features(path, F) -> None:
    F = _checked_payload(np.asarray(F, dtype=np.float64), "feature matrix")
    n, d = F.shape
    with open(path, "wb") as fh:
        fh.write(_FEATURE_HEADER.pack(FEATURE_MAGIC, FORMAT_VERSION, n, d, _DTYPE_F64))
        fh.write(np.ascontiguousarray(F, dtype="<f8").tobytes())


def read_features(path) -> np.ndarray:
    with open(path, "rb") as fh:
        blob = fh.read()
    if len(blob) < _FEATURE_HEADER.size:
        raise TruncatedPayloadError(
            f"file too short for a feature header ({len(blob)} bytes)")
    magic, version, n, d, dtype = _FEATURE_HEADER.unpack_from(blob)
    if magic != FEATURE_MAGIC:
        raise BadMagicError(f"expected magic {FEATURE_MAGIC!r}, found {magic!r}")
    if version != FORMAT_VERSION:
        raise UnsupportedVersionError(f"unsupported feature format version {version}")
    if dtype != _DTYPE_F64:
        raise UnsupportedVersionError(f"unsupported dtype code {dtype}")
    expected = n * d * 8
    payload = blob[_FEATURE_HEADER.size:]
    if len(payload) != expected:
        raise TruncatedPayloadError(
            f"payload declares {expected} bytes ({n}x{d} float64), found {len(payload)}")
    F = np.frombuffer(payload, dtype="<f8").reshape(n, d).astype(np.float64)
    return _checked_payload(F, "feature matrix")


def write_labels(path, labels) -> None:
    y = check_labels(labels, np.asarray(labels).shape[0])
    with open(path, "w", encoding="ascii") as fh:
        for value in y:
            fh.write(f"{int(value)}\n")


def read_labels(path) -> np.ndarray:
    out = []
    with open(path, "r", encoding="ascii") as fh:
        for lineno, line in enumerate(fh, start=1):
            text = line.strip()
            if not text:
                continue
            try:
                out.append(int(text))
            except ValueError as exc:
                raise MalformedTextError(
                    f"line {lineno}: expected an integer label, got {text!r}") from exc
    if not out:
        raise MalformedTextError("label file contains no labels")
    return np.asarray(out, dtype=np.int64)


def read_csv(path, has_header: bool = False, label_column=None):
    """Numeric CSV to (features, labels-or-None).

    ``label_column`` may be a 0-based index or, when a header is present, a
    column name. Label cells are opaque strings mapped to dense integer ids
    in first-appearance order.
    """
    with open(path, "r", encoding="utf-8", newline="") as fh:
        reader = csv.reader(fh)
        rows = [row for row in reader]
    start = 0
    header = None
    if has_header:
        if not rows:
            raise MalformedTextError("CSV is empty, expected a header row")
        header = rows[0]
        start = 1
    data_rows = rows[start:]
    if not data_rows:
        raise MalformedTextError("CSV contains no data rows")
    width = len(data_rows[0])
    label_idx = _resolve_label_column(label_column, header, width)
    features, label_names, label_ids = [], {}, []
    for offset, row in enumerate(data_rows):
        lineno = start + offset + 1
        if len(row) != width:
            raise MalformedTextError(
                f"line {lineno}: expected {width} fields, got {len(row)}")
        values = []
        for j, cell in enumerate(row):
            if j == label_idx:
                label_ids.append(label_names.setdefault(cell, len(label_names)))
                continue
            try:
                values.append(float(cell))
            except ValueError as exc:
                raise MalformedTextError(
                    f"line {lineno}, column {j}: not a number: {cell!r}") from exc
        features.append(values)
    F = _checked_payload(np.asarray(features, dtype=np.float64), "CSV features")
    labels = np.asarray(label_ids, dtype=np.int64) if label_idx is not None else None
    return F, labels


def _resolve_label_column(label_column, header, width) -> int | None:
    if label_column is None:
        return None
    if isinstance(label_column, str):
        if header is None:
            raise MalformedTextError(
                "label_column given by name requires has_header=True")
        try:
            return header.index(label_column)
        except ValueError as exc:
            raise MalformedTextError(
                f"label column {label_column!r} not found in header {header}") from exc
    idx = int(label_column)
    if not 0 <= idx < width:
        raise MalformedTextError(f"label column index {idx} out of range for width {width}")
    return idx


def write_model(path, model: FeaturePostprocessor) -> None:
    if not hasattr(model, "mean_"):
        raise ValidationError("model must be fitted before it can be written")
    d = int(model.n_features_in_)
    t = int(model.t_)
    n = int(model.n_samples_)
    with open(path, "wb") as fh:
        fh.write(_MODEL_HEADER.pack(MODEL_MAGIC, FORMAT_VERSION, d, t, n))
        fh.write(np.ascontiguousarray(model.mean_, dtype="<f8").tobytes())
        fh.write(np.ascontiguousarray(model.eigenvalues_, dtype="<f8").tobytes())
        fh.write(np.ascontiguousarray(model.directions_, dtype="<f8").tobytes())


def read_model(path) -> FeaturePostprocessor:
    with open(path, "rb") as fh:
        blob = fh.read()
    if len(blob) < _MODEL_HEADER.size:
        raise TruncatedPayloadError(f"file too short for a model header ({len(blob)} bytes)")
    magic, version, d, t, n = _MODEL_HEADER.unpack_from(blob)
    if magic != MODEL_MAGIC:
        raise BadMagicError(f"expected magic {MODEL_MAGIC!r}, found {magic!r}")
    if version != FORMAT_VERSION:
        raise UnsupportedVersionError(f"unsupported model format version {version}")
    expected = (d + t + t * d) * 8
    payload = blob[_MODEL_HEADER.size:]
    if len(payload) != expected:
        raise TruncatedPayloadError(
            f"payload declares {expected} bytes, found {len(payload)}")
    values = np.frombuffer(payload, dtype="<f8")
    mean = values[:d].astype(np.float64)
    eigenvalues = values[d:d + t].astype(np.float64)
    directions = values[d + t:].reshape(t, d).astype(np.float64)
    _validate_model_payload(d, t, mean, eigenvalues, directions)
    model = FeaturePostprocessor(t=t)
    model.mean_ = mean
    model.directions_ = directions
    model.eigenvalues_ = eigenvalues
    model.n_features_in_ = d
    model.n_samples_ = n
    model.t_ = t
    model.pca_dim_ = d
    return model


def _validate_model_payload(d, t, mean, eigenvalues, directions) -> None:
    if t > d:
        raise InvalidModelError(f"model removes t={t} directions but dim is {d}")
    if not np.all(np.isfinite(mean)):
        raise InvalidModelError("model mean contains non-finite values")
    if not np.all(np.isfinite(eigenvalues)) or not np.all(np.isfinite(directions)):
        raise InvalidModelError("model spectrum contains non-finite values")
    if np.any(eigenvalues < -_MODEL_READ_TOL):
        raise InvalidModelError("model eigenvalues must be non-negative")
    diffs = np.diff(eigenvalues)
    if diffs.size and float(diffs.max()) > _MODEL_READ_TOL:
        raise InvalidModelError("model eigenvalues are not in descending order")
    if t > 0:
        gram = directions @ directions.T
        err = float(np.max(np.abs(gram - np.eye(t))))
        if err > _MODEL_READ_TOL:
            raise InvalidModelError(
                f"model directions are not orthonormal (deviation {err!r})")


def format_report(report, fmt: str = "text") -> str:
    """Render a report dataclass as `key = value` lines or as JSON."""
    if dataclasses.is_dataclass(report):
        payload = dataclasses.asdict(report)
    elif isinstance(report, dict):
        payload = dict(report)
    else:
        raise ValidationError(f"cannot format object of type {type(report).__name__}")
    if fmt == "machine":
        return json.dumps(payload, sort_keys=False, default=_json_fallback)
    if fmt != "text":
        raise ValidationError(f"unknown report format {fmt!r}")
    lines = []
    for key, value in payload.items():
        lines.append(f"{key} = {_scalar_text(value)}")
    return "\n".join(lines) + "\n"


def _scalar_text(value) -> str:
    if isinstance(value, float):
        return repr(value)
    if isinstance(value, (int, str)) or value is None:
        return str(value)
    return json.dumps(value, sort_keys=True, default=_json_fallback)


def _json_fallback(value):
    if isinstance(value, (np.integer,)):
        return int(value)
    if isinstance(value, (np.floating,)):
        return float(value)
    if isinstance(value, np.ndarray):
        return value.tolist()
    raise TypeError(f"cannot serialize {type(value).__name__}")


def _checked_payload(F: np.ndarray, what: str) -> np.ndarray:
    if F.ndim != 2:
        raise ValidationError(f"{what} must be 2-dimensional")
    finite = np.isfinite(F)
    if not finite.all():
        pos = np.argwhere(~finite)[0]
        raise NonFiniteDataError(
            f"{what} has a non-finite value at row {pos[0]}, column {pos[1]}")
    return check_feature_matrix(F, name=what)
