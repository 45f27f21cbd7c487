"""Text formats for interval sets, grid functions, and CSV reports.

Interval sets: one "left right" pair per line, ``#`` comments.
Grids: header ``GRID N=<dims> SHAPE=<n1,...> BBOX=<a1,b1,...>`` followed by
whitespace-separated row-major values.
Reports: CSV prefixed with ``# meta:`` lines (tool version, config hash,
seed) and no timestamps, so reruns are byte-identical.  All files are
written atomically (temp file + rename).
"""

from __future__ import annotations

import hashlib
import json
import os
import tempfile
from pathlib import Path
from typing import Iterable, Mapping, Sequence

import numpy as np

from .grids import GridFunction
from .intervals import IntervalSet, normalize

__all__ = [
    "read_intervals",
    "write_intervals",
    "read_grid",
    "write_grid",
    "write_report",
    "atomic_write",
    "config_hash",
]


def _fmt(x: float) -> str:
    return repr(float(x))


def atomic_write(path: str | Path, text: str) -> None:
    path = Path(path)
    fd, tmp = tempfile.mkstemp(dir=path.parent or Path("."), suffix=".tmp")
    try:
        with os.fdopen(fd, "w") as handle:
            handle.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def config_hash(config: Mapping) -> str:
    canonical = json.dumps(config, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(canonical.encode()).hexdigest()[:12]


# -- interval sets -----------------------------------------------------------


def read_intervals(path: str | Path) -> IntervalSet:
    pairs = []
    for lineno, raw in enumerate(Path(path).read_text().splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split()
        if len(parts) != 2:
            raise ValueError(
                f"{path}:{lineno}: expected 'left right', got {raw!r}"
            )
        try:
            pairs.append((float(parts[0]), float(parts[1])))
        except ValueError as exc:
            raise ValueError(f"{path}:{lineno}: {exc}") from None
    try:
        return normalize(pairs)
    except ValueError as exc:
        raise ValueError(f"{path}: {exc}") from None


def write_intervals(path: str | Path, S: IntervalSet, comment: str = "") -> None:
    lines = []
    if comment:
        lines.append(f"# {comment}")
    lines.extend(f"{_fmt(a)} {_fmt(b)}" for a, b in S)
    atomic_write(path, "\n".join(lines) + "\n")


# -- grids -------------------------------------------------------------------


def read_grid(path: str | Path) -> GridFunction:
    text = Path(path).read_text().split("\n", 1)
    header = text[0].strip()
    try:
        fields = dict(
            item.split("=", 1) for item in header.removeprefix("GRID ").split()
        )
        ndim = int(fields["N"])
        shape = tuple(int(s) for s in fields["SHAPE"].split(","))
        flat_bbox = [float(s) for s in fields["BBOX"].split(",")]
    except (KeyError, ValueError, IndexError):
        raise ValueError(
            f"{path}:1: malformed grid header {header!r} "
            "(expected 'GRID N=.. SHAPE=.. BBOX=..')"
        ) from None
    if not header.startswith("GRID ") or len(shape) != ndim or len(flat_bbox) != 2 * ndim:
        raise ValueError(f"{path}:1: malformed grid header {header!r}")
    bbox = tuple(
        (flat_bbox[2 * k], flat_bbox[2 * k + 1]) for k in range(ndim)
    )
    body = text[1].split() if len(text) > 1 else []
    try:
        values = np.array(body, dtype=float)
    except ValueError as exc:
        raise ValueError(f"{path}: bad grid value: {exc}") from None
    expected = int(np.prod(shape))
    if values.size != expected:
        raise ValueError(
            f"{path}: expected {expected} values for shape {shape}, got {values.size}"
        )
    return GridFunction(bbox, values.reshape(shape))


def write_grid(path: str | Path, u: GridFunction) -> None:
    header = "GRID N={} SHAPE={} BBOX={}".format(
        u.ndim,
        ",".join(str(n) for n in u.shape),
        ",".join(f"{_fmt(a)},{_fmt(b)}" for a, b in u.bbox),
    )
    rows = u.values.reshape(-1, u.shape[-1])
    body = "\n".join(" ".join(_fmt(x) for x in row) for row in rows)
    atomic_write(path, header + "\n" + body + "\n")


# -- reports -----------------------------------------------------------------


def _csv_field(x) -> str:
    text = _fmt(x) if isinstance(x, float) else str(x)
    if "," in text or '"' in text or "\n" in text:
        return '"' + text.replace('"', '""') + '"'
    return text


def write_report(
    path: str | Path,
    columns: Sequence[str],
    rows: Iterable[Sequence],
    meta: Mapping[str, object],
) -> None:
    lines = [f"# meta: {key}={value}" for key, value in meta.items()]
    lines.append(",".join(columns))
    for row in rows:
        lines.append(",".join(_csv_field(x) for x in row))
    atomic_write(path, "\n".join(lines) + "\n")
