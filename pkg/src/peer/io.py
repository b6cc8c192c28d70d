"""CSV and JSON interchange.

Numeric CSVs carry no header, or one header row that is detected
automatically. A response cell that is empty or exactly ``NA`` is missing.
"""

import csv
import json

import numpy as np

from .linalg import InvalidInputError
from .masked import ObservedMatrix

MISSING_TOKENS = ("", "NA")


def _is_number(token):
    try:
        float(token)
    except ValueError:
        return False
    return True


def read_matrix_csv(path, allow_missing=False):
    """Return ``(values, header)``; missing cells become NaN when allowed."""
    with open(path, newline="") as fh:
        rows = [row for row in csv.reader(fh) if row]
    if not rows:
        raise InvalidInputError(f"{path}: no data rows")
    header = None
    if any(tok not in MISSING_TOKENS and not _is_number(tok) for tok in rows[0]):
        header, rows = rows[0], rows[1:]
    if not rows:
        raise InvalidInputError(f"{path}: no data rows")
    width = len(rows[0])
    out = np.empty((len(rows), width))
    for i, row in enumerate(rows):
        if len(row) != width:
            raise InvalidInputError(f"{path}: row {i + 1} has {len(row)} fields, expected {width}")
        for j, tok in enumerate(row):
            if tok in MISSING_TOKENS:
                if not allow_missing:
                    raise InvalidInputError(f"{path}: missing value at row {i + 1}, column {j + 1}")
                out[i, j] = np.nan
                continue
            try:
                out[i, j] = float(tok)
            except ValueError:
                raise InvalidInputError(f"{path}: non-numeric field {tok!r} at row {i + 1}, column {j + 1}") from None
            if not np.isfinite(out[i, j]):
                raise InvalidInputError(f"{path}: non-finite value at row {i + 1}, column {j + 1}")
    if header is not None and len(header) != width:
        raise InvalidInputError(f"{path}: header has {len(header)} fields, data has {width}")
    return out, header


def read_design(path):
    return read_matrix_csv(path, allow_missing=False)[0]


def read_response(path):
    values, _ = read_matrix_csv(path, allow_missing=True)
    return ObservedMatrix.from_nan(values)


def format_float(x):
    return repr(float(x))


def write_matrix_csv(path, A, mask=None, header=None):
    """Write ``A``; cells where ``mask`` is False are written as ``NA``."""
    A = np.asarray(A, dtype=float)
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        if header is not None:
            w.writerow(header)
        for i in range(A.shape[0]):
            if mask is None:
                w.writerow([format_float(v) for v in A[i]])
            else:
                w.writerow([format_float(v) if ok else "NA" for v, ok in zip(A[i], mask[i])])


def write_json(path, doc):
    with open(path, "w") as fh:
        json.dump(doc, fh, indent=2, sort_keys=False)
        fh.write("\n")


def truth_to_dict(data):
    t = data.truth
    return {
        "scenario": data.scenario.to_dict() if data.scenario is not None else None,
        "sigma": data.sigma,
        "d_star": t.d.tolist(),
        "U_star": t.U.tolist(),
        "V_star": t.V.tolist(),
        "supports": [s.tolist() for s in t.supports],
        "missing_cells": int(data.obs.mask.size - data.obs.m),
    }
