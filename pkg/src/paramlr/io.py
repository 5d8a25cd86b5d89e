"""File formats: matrix CSV, ensemble and family JSON, reports."""

from __future__ import annotations

import csv
import hashlib
import io
import json
from datetime import datetime, timezone
from pathlib import Path

import numpy as np

from .errors import ValidationError
from .families import analytic_family, grid_family
from .linalg_core import as_matrix
from .stochastic import Ensemble

__all__ = [
    "parse_matrix_csv",
    "read_matrix_csv",
    "format_matrix_csv",
    "ensemble_from_json",
    "ensemble_to_json",
    "family_from_json",
    "load_family",
    "write_csv",
    "canonical_json",
    "write_report",
]


def parse_matrix_csv(text: str) -> np.ndarray:
    """Parse comma-separated decimal rows (no header). Ragged rows are rejected."""
    rows = [r for r in csv.reader(io.StringIO(text)) if r]
    if not rows:
        raise ValidationError("matrix CSV is empty")
    width = len(rows[0])
    out = []
    for i, row in enumerate(rows):
        if len(row) != width:
            raise ValidationError(f"ragged matrix CSV: row {i} has {len(row)} fields, expected {width}")
        try:
            out.append([float(x) for x in row])
        except ValueError as exc:
            raise ValidationError(f"matrix CSV row {i}: {exc}") from exc
    return as_matrix(out)


def read_matrix_csv(path) -> np.ndarray:
    return parse_matrix_csv(Path(path).read_text(encoding="utf-8"))


def format_matrix_csv(a) -> str:
    a = as_matrix(a)
    return "".join(",".join(repr(float(x)) for x in row) + "\n" for row in a)


def ensemble_from_json(obj) -> Ensemble:
    """``{"dim": N, "points": [[...], ...], "weights": [...]}``; weights optional."""
    if not isinstance(obj, dict) or "points" not in obj:
        raise ValidationError("ensemble JSON needs a 'points' array")
    pts = np.asarray(obj["points"], dtype=float)
    if "dim" in obj and (pts.ndim != 2 or pts.shape[1] != int(obj["dim"])):
        raise ValidationError(f"ensemble points do not have dim={obj['dim']}")
    return Ensemble(pts, obj.get("weights"))


def ensemble_to_json(e: Ensemble) -> dict:
    return {"dim": e.dim, "points": e.points.tolist(), "weights": e.weights.tolist()}


def family_from_json(obj, base_dir=None):
    """Build a family from its JSON description.

    Grid items may be a matrix CSV path (relative to ``base_dir``), inline
    rows, or an ensemble object.
    """
    if not isinstance(obj, dict):
        raise ValidationError("family JSON must be an object")
    kind = obj.get("kind")
    if kind == "analytic":
        return analytic_family(obj.get("id", ""), obj.get("params"))
    if kind != "grid":
        raise ValidationError(f"family kind must be 'analytic' or 'grid', got {kind!r}")
    base = Path(base_dir or ".")
    items = []
    for k, item in enumerate(obj.get("items", [])):
        if isinstance(item, str):
            p = Path(item)
            items.append(read_matrix_csv(p if p.is_absolute() else base / p))
        elif isinstance(item, dict):
            items.append(ensemble_from_json(item))
        elif isinstance(item, list):
            items.append(as_matrix(item, f"item {k}"))
        else:
            raise ValidationError(f"grid item {k} has unsupported type {type(item).__name__}")
    return grid_family(obj.get("xi", []), items)


def load_family(path):
    path = Path(path)
    try:
        obj = json.loads(path.read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise ValidationError(f"{path}: invalid JSON: {exc}") from exc
    return family_from_json(obj, path.parent)


def write_csv(path, header, rows):
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([repr(x) if isinstance(x, float) else x for x in row])


def canonical_json(obj) -> str:
    return json.dumps(obj, sort_keys=True, ensure_ascii=False, separators=(",", ":"))


def write_report(path, content: dict, meta: dict | None = None) -> str:
    """Write ``{"content", "content_sha256", "meta"}``.

    The hash covers only ``content``; timestamps and timings live in
    ``meta`` so identical runs hash identically.
    """
    digest = hashlib.sha256(canonical_json(content).encode("utf-8")).hexdigest()
    meta = dict(meta or {})
    meta.setdefault("created", datetime.now(timezone.utc).isoformat(timespec="seconds"))
    doc = {"content": content, "content_sha256": digest, "meta": meta}
    Path(path).write_text(json.dumps(doc, sort_keys=True, indent=1) + "\n", encoding="utf-8")
    return digest
