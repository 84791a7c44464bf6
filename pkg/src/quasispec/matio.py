"""Matrix and result file formats.

The native matrix format is a self-describing JSON document::

    {"n": 2, "data": [[re, im], [re, im], [re, im], [re, im]]}

with the n*n entries row-major and optional "description"/"seed" metadata.
A plain-text alternative is accepted for hand-written fixtures: the
dimension on the first line followed by n*n whitespace-separated
"re im" pairs.  Parse failures name the offending line or entry.

Writers are deterministic: same data, byte-identical file.
"""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np

from .matlin import check_hermitian

__all__ = [
    "MatrixFileError",
    "read_matrix",
    "write_matrix",
    "write_json",
]


class MatrixFileError(ValueError):
    """Malformed matrix file; the message carries a location diagnostic."""


def _matrix_from_pairs(n: int, pairs, where: str) -> np.ndarray:
    if len(pairs) != n * n:
        raise MatrixFileError(f"{where}: expected {n * n} entries for n={n}, found {len(pairs)}")
    flat = np.empty(n * n, dtype=np.complex128)
    for idx, pair in enumerate(pairs):
        try:
            re, im = pair
            flat[idx] = complex(float(re), float(im))
        except (TypeError, ValueError) as exc:
            raise MatrixFileError(f"{where}: entry {idx} is not a [re, im] pair: {pair!r}") from exc
    A = flat.reshape(n, n)
    try:
        return check_hermitian(A, name=where)
    except ValueError as exc:
        raise MatrixFileError(str(exc)) from exc


def _read_text_matrix(text: str, where: str) -> np.ndarray:
    lines = text.split("\n")
    try:
        n = int(lines[0].strip())
    except (IndexError, ValueError) as exc:
        raise MatrixFileError(f"{where}: line 1 must hold the dimension") from exc
    if n < 1:
        raise MatrixFileError(f"{where}: dimension must be >= 1, got {n}")
    tokens = " ".join(lines[1:]).split()
    if len(tokens) != 2 * n * n:
        raise MatrixFileError(
            f"{where}: expected {2 * n * n} numbers after the dimension, found {len(tokens)}"
        )
    try:
        vals = [float(t) for t in tokens]
    except ValueError as exc:
        raise MatrixFileError(f"{where}: non-numeric entry: {exc}") from exc
    pairs = list(zip(vals[0::2], vals[1::2]))
    return _matrix_from_pairs(n, pairs, where)


def read_matrix(path) -> np.ndarray:
    """Read a Hermitian matrix from a JSON or plain-text file."""
    path = Path(path)
    where = str(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise MatrixFileError(f"{where}: {exc}") from exc
    stripped = text.lstrip()
    if stripped.startswith("{"):
        try:
            doc = json.loads(text)
        except json.JSONDecodeError as exc:
            raise MatrixFileError(f"{where}: invalid JSON at line {exc.lineno}: {exc.msg}") from exc
        if not isinstance(doc, dict) or "n" not in doc or "data" not in doc:
            raise MatrixFileError(f"{where}: document must carry 'n' and 'data' fields")
        try:
            n = int(doc["n"])
        except (TypeError, ValueError) as exc:
            raise MatrixFileError(f"{where}: field 'n' must be an integer") from exc
        if n < 1:
            raise MatrixFileError(f"{where}: dimension must be >= 1, got {n}")
        data = doc["data"]
        if not isinstance(data, list):
            raise MatrixFileError(f"{where}: field 'data' must be a list of [re, im] pairs")
        return _matrix_from_pairs(n, data, where)
    return _read_text_matrix(text, where)


def write_matrix(path, A: np.ndarray, description: str | None = None) -> None:
    """Write a matrix in the native JSON format."""
    A = check_hermitian(A)
    n = A.shape[0]
    doc = {"n": n, "data": [[float(z.real), float(z.imag)] for z in A.reshape(-1)]}
    if description:
        doc["description"] = description
    write_json(path, doc)


def write_json(path, doc) -> None:
    """Deterministic JSON serialization (sorted keys, fixed separators,
    trailing newline)."""
    Path(path).write_text(json.dumps(doc, sort_keys=True, separators=(",", ": "), indent=1) + "\n")
