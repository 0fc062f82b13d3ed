"""Prediction-file ingestion and deterministic report serialization.

CSV layout::

    sample_id,label,pred_<name_1>,...,pred_<name_m>

JSON layout::

    {"labels": [...], "predictions": {"<name_1>": [...], ...}}

Column (or key) order fixes the augmentation index order.  Floats are written
with 17 significant digits, which round-trips every finite double.
"""

from __future__ import annotations

import csv
import io
import json
import math
from pathlib import Path
from typing import Any, Iterable

import numpy as np

from .core import PredictionSet
from .errors import (
    EmptyFile,
    InvalidInput,
    MissingColumn,
    NonNumericCell,
    RaggedRows,
    UnexpectedColumn,
)

PRED_PREFIX = "pred_"


def format_float(x: float) -> str:
    x = float(x)
    if not math.isfinite(x):
        return "nan" if math.isnan(x) else ("inf" if x > 0 else "-inf")
    return format(x, ".17g")


def infer_format(path: str | Path) -> str:
    suffix = Path(path).suffix.lower()
    if suffix in (".csv", ".json"):
        return suffix[1:]
    raise InvalidInput(f"cannot infer file format from {str(path)!r}; pass format='csv' or 'json'")


def _number(text: Any, row, column) -> float:
    if isinstance(text, bool) or text is None:
        raise NonNumericCell(f"non-numeric value {text!r}", row=row, column=column)
    try:
        value = float(text)
    except (TypeError, ValueError):
        raise NonNumericCell(f"non-numeric value {text!r}", row=row, column=column) from None
    if not math.isfinite(value):
        raise NonNumericCell(f"non-finite value {text!r}", row=row, column=column)
    return value


def _parse_csv(text: str) -> PredictionSet:
    rows = list(csv.reader(io.StringIO(text)))
    rows = [r for r in rows if r]
    if not rows:
        raise EmptyFile("no header")
    header = [h.strip() for h in rows[0]]
    for required in ("sample_id", "label"):
        if required not in header:
            raise MissingColumn("required column absent", column=required)
    if header[:2] != ["sample_id", "label"]:
        raise UnexpectedColumn("header must start with sample_id,label", column=header[0])
    names = []
    for col in header[2:]:
        if not col.startswith(PRED_PREFIX) or len(col) == len(PRED_PREFIX):
            raise UnexpectedColumn(f"prediction columns must be named {PRED_PREFIX}<name>", column=col)
        names.append(col[len(PRED_PREFIX):])
    if not names:
        raise MissingColumn("no prediction columns", column=PRED_PREFIX + "<name>")
    body = rows[1:]
    if not body:
        raise EmptyFile("header present but no sample rows")
    labels = np.empty(len(body))
    preds = np.empty((len(body), len(names)))
    for r, row in enumerate(body, start=2):
        if len(row) != len(header):
            raise RaggedRows(f"expected {len(header)} cells, found {len(row)}", row=r)
        labels[r - 2] = _number(row[1].strip(), r, "label")
        for j, cell in enumerate(row[2:]):
            preds[r - 2, j] = _number(cell.strip(), r, header[j + 2])
    return PredictionSet(labels, preds, tuple(names))


def _parse_json(text: str) -> PredictionSet:
    if not text.strip():
        raise EmptyFile("empty document")
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise InvalidInput(f"malformed JSON: {exc}") from None
    if not isinstance(doc, dict):
        raise InvalidInput("top level must be an object")
    for key in ("labels", "predictions"):
        if key not in doc:
            raise MissingColumn("required key absent", column=key)
    raw_labels, raw_preds = doc["labels"], doc["predictions"]
    if not isinstance(raw_labels, list) or not isinstance(raw_preds, dict):
        raise InvalidInput("'labels' must be an array and 'predictions' an object")
    if not raw_labels:
        raise EmptyFile("no labels")
    if not raw_preds:
        raise MissingColumn("no prediction arrays", column="predictions")
    n = len(raw_labels)
    labels = np.array([_number(v, i, "labels") for i, v in enumerate(raw_labels)])
    cols = []
    for name, values in raw_preds.items():
        if not isinstance(values, list):
            raise InvalidInput(f"predictions[{name!r}] must be an array")
        if len(values) != n:
            raise RaggedRows(f"{len(values)} predictions for {n} labels", column=name)
        cols.append([_number(v, i, name) for i, v in enumerate(values)])
    return PredictionSet(labels, np.array(cols).T, tuple(raw_preds))


def load_predictions(path: str | Path, format: str | None = None) -> PredictionSet:
    fmt = format or infer_format(path)
    text = Path(path).read_text(encoding="utf-8")
    if fmt == "csv":
        return _parse_csv(text)
    if fmt == "json":
        return _parse_json(text)
    raise InvalidInput(f"unknown format {fmt!r}")


def predictions_to_text(data: PredictionSet, format: str) -> str:
    if format == "csv":
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(["sample_id", "label", *(PRED_PREFIX + n for n in data.augmentation_names)])
        for i in range(data.n_samples):
            writer.writerow(
                [i, format_float(data.labels[i]), *(format_float(v) for v in data.predictions[i])]
            )
        return buf.getvalue()
    if format == "json":
        doc = {
            "labels": data.labels.tolist(),
            "predictions": {n: data.predictions[:, j].tolist() for j, n in enumerate(data.augmentation_names)},
        }
        return dumps_report(doc, sort_keys=False)
    raise InvalidInput(f"unknown format {format!r}")


def write_predictions(data: PredictionSet, path: str | Path, format: str | None = None) -> None:
    fmt = format or infer_format(path)
    Path(path).write_text(predictions_to_text(data, fmt), encoding="utf-8")


def _to_plain(obj):
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    if isinstance(obj, (np.floating,)):
        return float(obj)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, np.bool_):
        return bool(obj)
    if hasattr(obj, "to_dict"):
        return obj.to_dict()
    return obj


def _emit(obj, indent: int, level: int, out: list, sort_keys: bool = True) -> None:
    obj = _to_plain(obj)
    pad = " " * (indent * (level + 1))
    end = " " * (indent * level)
    if obj is None or isinstance(obj, bool):
        out.append(json.dumps(obj))
    elif isinstance(obj, int):
        out.append(str(obj))
    elif isinstance(obj, float):
        # strict JSON has no literal for non-finite numbers
        out.append(format_float(obj) if math.isfinite(obj) else json.dumps(format_float(obj)))
    elif isinstance(obj, str):
        out.append(json.dumps(obj, ensure_ascii=False))
    elif isinstance(obj, dict):
        if not obj:
            out.append("{}")
            return
        out.append("{\n")
        keys = sorted(obj, key=str) if sort_keys else list(obj)
        for i, key in enumerate(keys):
            out.append(f"{pad}{json.dumps(str(key))}: ")
            _emit(obj[key], indent, level + 1, out, sort_keys)
            out.append(",\n" if i < len(obj) - 1 else "\n")
        out.append(end + "}")
    elif isinstance(obj, (list, tuple)):
        if not obj:
            out.append("[]")
            return
        if all(isinstance(_to_plain(v), (int, float, bool)) or v is None for v in obj):
            parts: list[str] = []
            for v in obj:
                _emit(v, indent, level + 1, parts)
            out.append("[" + ", ".join(parts) + "]")
            return
        out.append("[\n")
        for i, v in enumerate(obj):
            out.append(pad)
            _emit(v, indent, level + 1, out, sort_keys)
            out.append(",\n" if i < len(obj) - 1 else "\n")
        out.append(end + "]")
    else:
        raise TypeError(f"cannot serialize {type(obj).__name__}")


def dumps_report(obj: Any, indent: int = 2, sort_keys: bool = True) -> str:
    """Deterministic JSON: sorted keys, floats at 17 significant digits,
    non-finite floats as the strings ``"inf"``, ``"-inf"``, ``"nan"``."""
    out: list[str] = []
    _emit(obj, indent, 0, out, sort_keys)
    return "".join(out) + "\n"


def outcomes_to_csv(outcomes: Iterable, seed: int) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["rho", "probability_holds", "trials", "seed"])
    for o in outcomes:
        writer.writerow([format_float(o.rho), format_float(o.probability_holds), o.trials, seed])
    return buf.getvalue()
