"""CSV readers and writers for curves, coefficient vectors and feature tables.

A *feature table* is any CSV whose first column is a class label (may be
empty), whose second column is a row id, and whose remaining columns are
numeric features.  Batch output (``group,sample_index,c1_1,...``) and the
wide Euler output (``group,label,a1_1,...``) are both feature tables.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass

import numpy as np

from .curves import EllipticCurveQ, EulerCoefficientVector, HyperellipticCurveQ

GENUS1_FIELDS = ("label", "a1", "a2", "a3", "a4", "a6")
GENUS2_FIELDS = ("label", "f", "h")


@dataclass
class CurveRow:
    line: int
    curve: EllipticCurveQ | HyperellipticCurveQ
    st_label: str = ""


def fmt(x: float) -> str:
    return repr(float(x))


def _int_list(text: str) -> list[int]:
    text = text.strip()
    if not text:
        return []
    return [int(t) for t in text.split(";")]


def read_curves(path) -> tuple[int, list[CurveRow], list[tuple[int, str]]]:
    """Parse a curve CSV; returns (genus, rows, errors) with errors as (line, message)."""
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        fields = reader.fieldnames
        if fields is None:
            return 1, [], []  # empty file
        if all(f in fields for f in GENUS2_FIELDS):
            genus = 2
        elif all(f in fields for f in GENUS1_FIELDS):
            genus = 1
        else:
            raise ValueError(f"{path}: header must be {','.join(GENUS1_FIELDS)} or {','.join(GENUS2_FIELDS)}")
        rows, errors = [], []
        for rec in reader:
            line = reader.line_num
            try:
                if genus == 1:
                    curve = EllipticCurveQ(rec["label"], *(int(rec[k]) for k in GENUS1_FIELDS[1:]))
                else:
                    curve = HyperellipticCurveQ(rec["label"], tuple(_int_list(rec["f"])), tuple(_int_list(rec["h"] or "")))
            except (ValueError, TypeError) as exc:
                errors.append((line, str(exc)))
                continue
            rows.append(CurveRow(line, curve, (rec.get("st_label") or "").strip()))
    return genus, rows, errors


def write_coefficients_long(fh, vectors: list[EulerCoefficientVector], genus: int) -> None:
    w = csv.writer(fh, lineterminator="\n")
    w.writerow(["label", "p", "a"] if genus == 1 else ["label", "p", "a1", "a2"])
    for v in vectors:
        for p, val in zip(v.primes, v.values):
            if genus == 1:
                w.writerow([v.label, int(p), fmt(val)])
            else:
                w.writerow([v.label, int(p), fmt(val[0]), fmt(val[1])])


def feature_names(width: int, genus: int, prefix: str = "c") -> list[str]:
    if genus == 1:
        return [f"{prefix}1_{k + 1}" for k in range(width)]
    return [f"{prefix}{j}_{k + 1}" for k in range(width // 2) for j in (1, 2)]


def write_feature_table(fh, header: list[str], labels, ids, X) -> None:
    w = csv.writer(fh, lineterminator="\n")
    w.writerow(header)
    for lab, rid, row in zip(labels, ids, X):
        w.writerow([lab, rid, *map(fmt, row)])


def read_feature_table(path) -> tuple[list[str], list[str], np.ndarray, list[str]]:
    """Returns (labels, ids, features, column names of the features)."""
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None or len(header) < 3:
            raise ValueError(f"{path}: expected a label column, an id column and features")
        labels, ids, rows = [], [], []
        for rec in reader:
            if not rec:
                continue
            labels.append(rec[0])
            ids.append(rec[1])
            rows.append([float(v) for v in rec[2:]])
    X = np.array(rows, dtype=float).reshape(len(rows), len(header) - 2)
    return labels, ids, X, header[2:]


def pair_width(columns: list[str]) -> int:
    """2 when feature columns come in (x1_k, x2_k) pairs, else 1."""
    if len(columns) >= 2 and len(columns) % 2 == 0 and columns[0].endswith("1_1") and columns[1].endswith("2_1"):
        return 2
    return 1
