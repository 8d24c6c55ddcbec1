"""Dataset files and JSON output.

A dataset is a UTF-8 JSON object (see ``schemas/dataset.schema.json``)::

    {"manifold": "hyperboloid", "params": {"n": 2, "kappa": -1.0},
     "model": "poincare", "points": [[0.1, 0.2], ...]}

Euclidean data may also be a CSV file with header ``x1,...,xn``.
"""

from __future__ import annotations

import csv
import json
from importlib import resources
from pathlib import Path

import jsonschema
import numpy as np

from .errors import ContractViolation, DatasetParseError, DatasetValidationError
from .geometry import SPD, Euclidean, Hyperboloid, Manifold

#: hyperboloid points this far off the sheet (relative) are renormalized
HYPERBOLOID_TOL = 1e-6


def dataset_schema():
    return json.loads(resources.files("hadquant").joinpath("schemas/dataset.schema.json").read_text("utf-8"))


def manifold_from_spec(name, params) -> Manifold:
    if name == "euclidean":
        return Euclidean(int(params["n"]))
    if name == "hyperboloid":
        return Hyperboloid(int(params["n"]), float(params.get("kappa", -1.0)))
    if name == "spd":
        return SPD(int(params["m"]))
    raise DatasetParseError(f"unknown manifold {name!r}")


def manifold_spec(M: Manifold):
    if isinstance(M, Euclidean):
        return "euclidean", {"n": M.dim}
    if isinstance(M, Hyperboloid):
        return "hyperboloid", {"n": M.dim, "kappa": M.kappa}
    if isinstance(M, SPD):
        return "spd", {"m": M.m}
    raise TypeError(f"no file format for {M!r}")


def _validate_points(M, raw, model):
    out = []
    for i, p in enumerate(raw):
        try:
            a = np.asarray(p, dtype=float)
        except (TypeError, ValueError):
            raise DatasetValidationError(f"point {i}: not a numeric array", i, "numeric") from None
        if not np.all(np.isfinite(a)):
            raise DatasetValidationError(f"point {i}: non-finite coordinate", i, "finite")
        if isinstance(M, Euclidean):
            if a.shape != (M.dim,):
                raise DatasetValidationError(f"point {i}: expected {M.dim} coordinates", i, "shape")
        elif isinstance(M, Hyperboloid):
            if model == "poincare":
                if a.shape != (M.dim,):
                    raise DatasetValidationError(f"point {i}: expected {M.dim} disk coordinates", i, "shape")
                if a @ a >= 1.0:
                    raise DatasetValidationError(f"point {i}: outside the open unit ball", i, "unit-ball")
                a = M.from_poincare(a)
            elif a.shape != (M.dim + 1,):
                raise DatasetValidationError(f"point {i}: expected {M.dim + 1} coordinates", i, "shape")
        else:
            if a.size != M.m * M.m:
                raise DatasetValidationError(f"point {i}: expected a {M.m}x{M.m} matrix", i, "shape")
            a = a.reshape(M.m, M.m)
        try:
            if isinstance(M, Hyperboloid):
                a = M.check_point(a, tol=HYPERBOLOID_TOL)
            else:
                a = M.check_point(a)
        except ContractViolation as exc:
            raise DatasetValidationError(f"point {i}: {exc}", i, str(exc)) from None
        out.append(a)
    return np.stack(out)


def _load_csv(path):
    with open(path, newline="", encoding="utf-8") as fh:
        rows = list(csv.reader(fh))
    if not rows:
        raise DatasetParseError(f"{path}: empty CSV file")
    header = [h.strip() for h in rows[0]]
    if header != [f"x{k}" for k in range(1, len(header) + 1)]:
        raise DatasetParseError(f"{path}: CSV header must be x1,...,xn")
    body = [r for r in rows[1:] if r]
    if not body:
        raise DatasetParseError(f"{path}: no data rows")
    M = Euclidean(len(header))
    raw = []
    for i, r in enumerate(body):
        try:
            raw.append([float(v) for v in r])
        except ValueError:
            raise DatasetValidationError(f"point {i}: not numeric", i, "numeric") from None
    return M, _validate_points(M, raw, None)


def load_dataset(path):
    """Read and validate a dataset file; returns ``(manifold, points)``."""
    path = Path(path)
    if path.suffix.lower() == ".csv":
        return _load_csv(path)
    try:
        doc = json.loads(path.read_text(encoding="utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError) as exc:
        raise DatasetParseError(f"{path}: {exc}") from None
    try:
        jsonschema.validate(doc, dataset_schema())
    except jsonschema.ValidationError as exc:
        raise DatasetParseError(f"{path}: {exc.message}") from None
    M = manifold_from_spec(doc["manifold"], doc["params"])
    model = doc.get("model", "hyperboloid")
    if model == "poincare" and not isinstance(M, Hyperboloid):
        raise DatasetParseError(f"{path}: the poincare model only applies to hyperboloid data")
    return M, _validate_points(M, doc["points"], model)


def save_dataset(path, M: Manifold, points, model="hyperboloid"):
    """Write a JSON dataset (or CSV for Euclidean data with a .csv path)."""
    path = Path(path)
    points = np.asarray(points, dtype=float)
    if path.suffix.lower() == ".csv":
        if not isinstance(M, Euclidean):
            raise ContractViolation("CSV datasets are Euclidean only")
        with open(path, "w", newline="", encoding="utf-8") as fh:
            w = csv.writer(fh)
            w.writerow([f"x{k}" for k in range(1, M.dim + 1)])
            w.writerows([[repr(float(v)) for v in row] for row in points])
        return
    name, params = manifold_spec(M)
    doc = {"manifold": name, "params": params}
    if isinstance(M, Hyperboloid) and model == "poincare":
        doc["model"] = "poincare"
        points = M.to_poincare(points)
    doc["points"] = points.tolist()
    path.write_text(dumps(doc), encoding="utf-8")


def to_jsonable(obj):
    """Convert numpy values and result objects to plain JSON types."""
    if hasattr(obj, "to_dict"):
        return to_jsonable(obj.to_dict())
    if isinstance(obj, dict):
        return {str(k): to_jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [to_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return to_jsonable(obj.tolist())
    if isinstance(obj, np.generic):
        return obj.item()
    if hasattr(obj, "value") and hasattr(obj, "name"):  # enums
        return obj.value
    return obj


def dumps(obj) -> str:
    """Deterministic JSON; NaN and infinities are rejected."""
    return json.dumps(to_jsonable(obj), indent=2, allow_nan=False) + "\n"
