"""Interchange formats: matrices (JSON/CSV), masks, sparse outliers, trials.

Matrix JSON: ``{"n": int, "unit": "seconds", "entries": [row-major floats]}``.
Matrix CSV: a header line ``tdoa_matrix,n=<n>`` followed by n rows of n
columns.  All indices appearing in files and error messages are 0-based.

Parsing rejects asymmetry beyond ``PARSE_ASYMMETRY_TOL`` seconds unless
symmetrization is requested, in which case ``(M - M^T) / 2`` is stored.
Accepted matrices are always canonicalized the same way; for input that
is already exactly skew-symmetric this is an exact no-op, which keeps
JSON round trips byte-stable.
"""

from __future__ import annotations

import csv
import io
import json
from pathlib import Path
from typing import Union

import numpy as np

from .completion import Mask
from .errors import MatrixFormatError
from .robust import OutlierMatrix
from .scenes import Trial

PARSE_ASYMMETRY_TOL = 1e-9

PathLike = Union[str, Path]


def _canonicalize(entries: np.ndarray, symmetrize: bool, origin: str) -> np.ndarray:
    if entries.ndim != 2 or entries.shape[0] != entries.shape[1]:
        raise MatrixFormatError(f"{origin}: matrix must be square, got shape {entries.shape}")
    if entries.shape[0] < 2:
        raise MatrixFormatError(f"{origin}: need n >= 2, got n={entries.shape[0]}")
    if not np.all(np.isfinite(entries)):
        raise MatrixFormatError(f"{origin}: non-finite entries")
    asym = entries + entries.T
    flat = int(np.argmax(np.abs(asym)))
    i, j = np.unravel_index(flat, asym.shape)
    worst = abs(asym[i, j])
    if worst > PARSE_ASYMMETRY_TOL and not symmetrize:
        raise MatrixFormatError(
            f"{origin}: asymmetry at entry ({i},{j}): m[{i},{j}]={entries[i, j]!r} vs "
            f"m[{j},{i}]={entries[j, i]!r} violates skew-symmetry by {worst:.3e} s "
            f"(tolerance {PARSE_ASYMMETRY_TOL:.0e}; pass --symmetrize to average it away)"
        )
    return (entries - entries.T) / 2.0


def matrix_to_dict(m: np.ndarray) -> dict:
    m = np.asarray(m, dtype=float)
    return {"n": int(m.shape[0]), "unit": "seconds", "entries": [float(v) for v in m.ravel()]}


def matrix_from_dict(data: dict, symmetrize: bool = False, origin: str = "<json>") -> np.ndarray:
    try:
        n = int(data["n"])
        entries = data["entries"]
    except (KeyError, TypeError, ValueError) as exc:
        raise MatrixFormatError(f"{origin}: expected keys 'n' and 'entries': {exc}") from exc
    if data.get("unit", "seconds") != "seconds":
        raise MatrixFormatError(f"{origin}: unsupported unit {data.get('unit')!r}")
    if len(entries) != n * n:
        raise MatrixFormatError(f"{origin}: expected {n * n} entries for n={n}, got {len(entries)}")
    try:
        m = np.array(entries, dtype=float).reshape(n, n)
    except (TypeError, ValueError) as exc:
        raise MatrixFormatError(f"{origin}: entries are not numeric: {exc}") from exc
    return _canonicalize(m, symmetrize, origin)


def matrix_to_json(m: np.ndarray) -> str:
    return json.dumps(matrix_to_dict(m)) + "\n"


def matrix_to_csv(m: np.ndarray) -> str:
    m = np.asarray(m, dtype=float)
    buf = io.StringIO()
    buf.write(f"tdoa_matrix,n={m.shape[0]}\n")
    for row in m:
        buf.write(",".join(repr(float(v)) for v in row) + "\n")
    return buf.getvalue()


def matrix_from_csv(text: str, symmetrize: bool = False, origin: str = "<csv>") -> np.ndarray:
    lines = [line for line in text.splitlines() if line.strip()]
    if not lines or not lines[0].startswith("tdoa_matrix"):
        raise MatrixFormatError(f"{origin}: missing 'tdoa_matrix,n=<n>' header")
    header = lines[0].split(",")
    try:
        n = int(dict(part.split("=") for part in header[1:])["n"])
    except (KeyError, ValueError, TypeError) as exc:
        raise MatrixFormatError(f"{origin}: malformed header {lines[0]!r}") from exc
    rows = list(csv.reader(lines[1:]))
    if len(rows) != n:
        raise MatrixFormatError(f"{origin}: expected {n} data rows, got {len(rows)}")
    try:
        m = np.array([[float(v) for v in row] for row in rows])
    except ValueError as exc:
        raise MatrixFormatError(f"{origin}: non-numeric cell: {exc}") from exc
    if m.shape != (n, n):
        raise MatrixFormatError(f"{origin}: expected {n}x{n} cells, got {m.shape}")
    return _canonicalize(m, symmetrize, origin)


def read_matrix(path: PathLike, symmetrize: bool = False) -> np.ndarray:
    """Load a matrix from ``.json`` or ``.csv`` (decided by extension)."""
    path = Path(path)
    text = path.read_text()
    if path.suffix.lower() == ".csv":
        return matrix_from_csv(text, symmetrize, origin=str(path))
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise MatrixFormatError(f"{path}: invalid JSON: {exc}") from exc
    return matrix_from_dict(data, symmetrize, origin=str(path))


def write_matrix(m: np.ndarray, path: PathLike, fmt: str | None = None) -> None:
    """Write a matrix as JSON or CSV (default: decided by extension)."""
    path = Path(path)
    if fmt is None:
        fmt = "csv" if path.suffix.lower() == ".csv" else "json"
    if fmt == "csv":
        path.write_text(matrix_to_csv(m))
    elif fmt == "json":
        path.write_text(matrix_to_json(m))
    else:
        raise MatrixFormatError(f"unknown matrix format {fmt!r}")


def mask_to_dict(mask: Mask) -> dict:
    return {"n": mask.n, "missing_pairs": [[i, j] for i, j in mask.missing_pairs]}


def mask_from_dict(data: dict, origin: str = "<json>") -> Mask:
    try:
        n = int(data["n"])
        pairs = data["missing_pairs"]
    except (KeyError, TypeError, ValueError) as exc:
        raise MatrixFormatError(f"{origin}: expected keys 'n' and 'missing_pairs': {exc}") from exc
    try:
        return Mask.from_missing_pairs(n, pairs)
    except Exception as exc:
        raise MatrixFormatError(f"{origin}: {exc}") from exc


def read_mask(path: PathLike) -> Mask:
    path = Path(path)
    try:
        data = json.loads(path.read_text())
    except json.JSONDecodeError as exc:
        raise MatrixFormatError(f"{path}: invalid JSON: {exc}") from exc
    return mask_from_dict(data, origin=str(path))


def write_mask(mask: Mask, path: PathLike) -> None:
    Path(path).write_text(json.dumps(mask_to_dict(mask)) + "\n")


def outliers_to_dict(s: OutlierMatrix) -> dict:
    """Sparse triplet form; both orientations of every pair are listed."""
    triplets = []
    for i, j in sorted(s.support):
        triplets.append([i, j, float(s.entries[i, j])])
    return {"n": s.n, "triplets": triplets}


def outliers_from_dict(data: dict, origin: str = "<json>") -> OutlierMatrix:
    try:
        n = int(data["n"])
        triplets = data["triplets"]
    except (KeyError, TypeError, ValueError) as exc:
        raise MatrixFormatError(f"{origin}: expected keys 'n' and 'triplets': {exc}") from exc
    entries = np.zeros((n, n))
    support = set()
    for item in triplets:
        try:
            i, j, value = int(item[0]), int(item[1]), float(item[2])
        except (TypeError, ValueError, IndexError) as exc:
            raise MatrixFormatError(f"{origin}: malformed triplet {item!r}") from exc
        if not (0 <= i < n and 0 <= j < n and i != j):
            raise MatrixFormatError(f"{origin}: triplet index ({i},{j}) out of range")
        entries[i, j] = value
        support.add((i, j))
    for i, j in support:
        if (j, i) not in support or entries[j, i] != -entries[i, j]:
            raise MatrixFormatError(
                f"{origin}: triplet ({i},{j}) lacks a matching skew-symmetric partner"
            )
    return OutlierMatrix(n=n, entries=entries, support=frozenset(support))


def write_outliers(s: OutlierMatrix, path: PathLike) -> None:
    Path(path).write_text(json.dumps(outliers_to_dict(s)) + "\n")


def read_outliers(path: PathLike) -> OutlierMatrix:
    path = Path(path)
    try:
        data = json.loads(path.read_text())
    except json.JSONDecodeError as exc:
        raise MatrixFormatError(f"{path}: invalid JSON: {exc}") from exc
    return outliers_from_dict(data, origin=str(path))


def trial_to_dict(trial: Trial, seed) -> dict:
    """Bundle one simulated trial for export."""
    out = {
        "seed": seed,
        "scene": None,
        "truth": matrix_to_dict(trial.ground_truth),
        "corrupted": matrix_to_dict(trial.corrupted),
        "mask": mask_to_dict(trial.mask),
        "injected_outliers": [[i, j] for i, j in trial.injected_outlier_pairs],
    }
    if trial.scene is not None:
        out["scene"] = {
            "sensors": [[float(v) for v in row] for row in trial.scene.sensors],
            "source": [float(v) for v in trial.scene.source],
            "c": float(trial.scene.c),
        }
    return out
