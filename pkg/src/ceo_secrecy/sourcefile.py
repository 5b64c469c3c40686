"""JSON source/aux files, provenance headers and atomic output."""

from __future__ import annotations

import hashlib
import json
import logging
import os
import tempfile
from importlib import resources
from pathlib import Path
from typing import Optional

import numpy as np

from .probcore import PMF_TOL, SourceSpec
from .regions import AuxConfig

log = logging.getLogger(__name__)

# rows off by more than PMF_TOL but at most this much are renormalized with a warning
RENORM_TOL = 1e-6
TOOL_NAME = "ceo-secrecy"
TOOL_VERSION = "0.1.0"
BUNDLED = ("binary_bsc.json",)


class SourceFormatError(ValueError):
    """A source or aux file is malformed or violates a probability constraint."""


def bundled_path(name: str = "binary_bsc.json") -> Path:
    return Path(str(resources.files("ceo_secrecy") / "data" / name))


def _matrix(doc: dict, key: str, ndim: int) -> np.ndarray:
    if key not in doc:
        raise SourceFormatError(f"missing field {key!r}")
    try:
        a = np.array(doc[key], dtype=float)
    except (TypeError, ValueError):
        raise SourceFormatError(f"{key}: not a numeric array") from None
    if a.ndim != ndim:
        raise SourceFormatError(f"{key}: expected a {ndim}-d array, got shape {a.shape}")
    if not np.all(np.isfinite(a)):
        raise SourceFormatError(f"{key}: non-finite entry")
    return a


def _normalize_rows(a: np.ndarray, key: str) -> np.ndarray:
    rows = a[None, :] if a.ndim == 1 else a
    neg = np.argwhere(rows < 0)
    if neg.size:
        r, c = neg[0]
        where = f"entry {c}" if a.ndim == 1 else f"row {r}, column {c}"
        raise SourceFormatError(f"{key}: negative value {rows[r, c]!r} at {where}")
    sums = rows.sum(axis=1)
    for r, s in enumerate(sums):
        off = abs(s - 1.0)
        where = "" if a.ndim == 1 else f" row {r}"
        if off > RENORM_TOL * (1 + 1e-6):
            raise SourceFormatError(f"{key}{where} sums to {s!r}, not 1")
        if off > PMF_TOL:
            log.warning("%s%s sums to %r; renormalized", key, where, s)
    out = rows / sums[:, None]
    return out[0] if a.ndim == 1 else out


def source_from_dict(doc: dict) -> SourceSpec:
    if not isinstance(doc, dict):
        raise SourceFormatError("source document must be a JSON object")
    px = _normalize_rows(_matrix(doc, "px", 1), "px")
    chans = {k: _normalize_rows(_matrix(doc, k, 2), k) for k in ("py1_x", "py2_x", "pe_x")}
    dist = _matrix(doc, "distortion", 2) if "distortion" in doc else None
    if dist is not None:
        neg = np.argwhere(dist < 0)
        if neg.size:
            r, c = neg[0]
            raise SourceFormatError(f"distortion: negative value at row {r}, column {c}")
    d_max = doc.get("d_max")
    sizes = doc.get("alphabets")
    if sizes is not None:
        found = {"X": px.size, "Y1": chans["py1_x"].shape[1], "Y2": chans["py2_x"].shape[1],
                 "E": chans["pe_x"].shape[1]}
        if dist is not None:
            found["Xhat"] = dist.shape[1]
        for k, v in sizes.items():
            if k in found and found[k] != v:
                raise SourceFormatError(f"alphabet {k} declared with {v} letters but the arrays give {found[k]}")
    try:
        return SourceSpec(px, chans["py1_x"], chans["py2_x"], chans["pe_x"], dist, d_max)
    except ValueError as e:
        raise SourceFormatError(str(e)) from e


def parse_source_file(path) -> SourceSpec:
    """Load and validate a JSON source description."""
    try:
        doc = json.loads(Path(path).read_text())
    except json.JSONDecodeError as e:
        raise SourceFormatError(f"{path}: invalid JSON ({e})") from None
    return source_from_dict(doc)


def aux_from_dict(doc: dict) -> AuxConfig:
    try:
        return AuxConfig.from_dict(doc)
    except KeyError as e:
        raise SourceFormatError(f"aux description lacks {e}") from None
    except ValueError as e:
        raise SourceFormatError(str(e)) from e


def file_sha256(path) -> str:
    return hashlib.sha256(Path(path).read_bytes()).hexdigest()


def text_sha256(text: str) -> str:
    return hashlib.sha256(text.encode()).hexdigest()


def header_lines(command_line: str, seed, source_hash: Optional[str]) -> list:
    return [f"tool: {TOOL_NAME} {TOOL_VERSION}", f"command: {command_line}", f"seed: {seed}",
            f"source_sha256: {source_hash or 'none'}"]


def fmt(x) -> str:
    if isinstance(x, str):
        return x
    return "%.17g" % x


def csv_text(header: list, columns, rows) -> str:
    out = [f"# {h}" for h in header]
    out.append(",".join(columns))
    out.extend(",".join(fmt(v) for v in row) for row in rows)
    return "\n".join(out) + "\n"


def _float_repr(obj):
    if isinstance(obj, float):
        return float(fmt(obj))
    if isinstance(obj, dict):
        return {k: _float_repr(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_float_repr(v) for v in obj]
    if isinstance(obj, np.generic):
        return _float_repr(obj.item())
    return obj


def json_text(meta: dict, body: dict) -> str:
    return json.dumps({"meta": meta, **_float_repr(body)}, indent=2, sort_keys=True, allow_nan=True) + "\n"


def atomic_write(path, text: str):
    """Write through a temporary file in the target directory, then rename over the target."""
    path = Path(path)
    fd, tmp = tempfile.mkstemp(dir=path.parent or ".", prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", newline="\n") as f:
            f.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise
