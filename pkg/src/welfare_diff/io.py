"""Paired-CSV ingestion, equivalence-scale preprocessing and result documents.

Paired CSV layout: a mandatory ``x1,x2`` header, one observation per row. An
empty cell means the observation is missing from that sample, so a row with
both values is a matched pair and a row with one value belongs to that
sample's unmatched tail. Negative values are legal data, which is why no
numeric missing-value sentinel is used.
"""

import csv
import io
import json
import math
import os
import tempfile
from dataclasses import dataclass, field
from datetime import datetime, timezone

import numpy as np

from .indices import kakwani_scale
from .variance import PairedDataset

__all__ = [
    "SCHEMA_VERSION",
    "ParseError",
    "ResultDocument",
    "atomic_write",
    "emit",
    "format_csv",
    "ingest",
    "ingest_samples",
    "preprocess_equivalence",
]

SCHEMA_VERSION = 1
EQUIVALENCE_COLUMNS = ("income", "adults", "ch05", "ch614", "ch1517", "workers")


class ParseError(ValueError):
    """Malformed input file; the message carries the line number."""


def _read_rows(path):
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None:
            raise ParseError(f"{path}: no observations (file is empty)")
        header = [h.strip().lower() for h in header]
        return header, [(reader.line_num, row) for row in reader]


def _number(cell, path, line, column):
    try:
        value = float(cell)
    except ValueError:
        raise ParseError(f"{path}:{line}: non-numeric value {cell!r} in column {column}") from None
    if not math.isfinite(value):
        raise ParseError(f"{path}:{line}: non-finite value {cell!r} in column {column}")
    return value


def ingest_samples(path):
    """Read a paired CSV into ``(x1, x2, m)``.

    ``x1`` and ``x2`` list the matched values first (in file order) followed
    by each sample's unmatched values (in file order).

    Raises:
        ParseError: missing header, a row with both cells empty, a
            non-numeric cell, or no observations at all.
    """
    header, rows = _read_rows(path)
    if header[:2] != ["x1", "x2"] or len(header) != 2:
        raise ParseError(f"{path}:1: expected header 'x1,x2', got {','.join(header)!r}")
    pairs, t1, t2 = [], [], []
    for line, row in rows:
        if not row:
            continue
        if len(row) != 2:
            raise ParseError(f"{path}:{line}: expected 2 fields, got {len(row)}")
        a, b = (c.strip() for c in row)
        if not a and not b:
            raise ParseError(f"{path}:{line}: both x1 and x2 are empty")
        if a and b:
            pairs.append((_number(a, path, line, "x1"), _number(b, path, line, "x2")))
        elif a:
            t1.append(_number(a, path, line, "x1"))
        else:
            t2.append(_number(b, path, line, "x2"))
    if not (pairs or t1 or t2):
        raise ParseError(f"{path}: no observations")
    m = len(pairs)
    p = np.array(pairs, dtype=np.float64).reshape(m, 2)
    x1 = np.concatenate([p[:, 0], np.array(t1, dtype=np.float64)])
    x2 = np.concatenate([p[:, 1], np.array(t2, dtype=np.float64)])
    return x1, x2, m


def ingest(path, format="paired-csv"):
    """Read a paired CSV into a :class:`PairedDataset`."""
    if format != "paired-csv":
        raise ValueError(f"unsupported format {format!r}")
    x1, x2, m = ingest_samples(path)
    return PairedDataset.from_samples(x1, x2, m)


def _cell(v):
    return repr(float(v))


def format_paired(data):
    """CSV text for a PairedDataset (pairs, then tail1, then tail2)."""
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["x1", "x2"])
    w.writerows((_cell(a), _cell(b)) for a, b in data.pairs)
    w.writerows((_cell(a), "") for a in data.tail1)
    w.writerows(("", _cell(b)) for b in data.tail2)
    return buf.getvalue()


def emit(data, path):
    """Write a PairedDataset as a paired CSV that :func:`ingest` reproduces exactly."""
    atomic_write(path, format_paired(data))


def preprocess_equivalence(path):
    """Equivalized incomes ``income / kakwani_scale(...)`` from a household CSV.

    The header must contain ``income,adults,ch05,ch614,ch1517,workers``
    (any order, extra columns ignored).

    Raises:
        ParseError: missing columns, non-numeric cells or a household whose
            scale is undefined; the message names the line.
    """
    header, rows = _read_rows(path)
    missing = [c for c in EQUIVALENCE_COLUMNS if c not in header]
    if missing:
        raise ParseError(f"{path}:1: missing columns {', '.join(missing)}")
    pos = [header.index(c) for c in EQUIVALENCE_COLUMNS]
    out = []
    for line, row in rows:
        if not row:
            continue
        if len(row) != len(header):
            raise ParseError(f"{path}:{line}: expected {len(header)} fields, got {len(row)}")
        vals = [_number(row[i].strip(), path, line, c) for i, c in zip(pos, EQUIVALENCE_COLUMNS)]
        try:
            scale = kakwani_scale(*vals[1:])
        except ValueError as exc:
            raise ParseError(f"{path}:{line}: {exc}") from None
        out.append(vals[0] / scale)
    if not out:
        raise ParseError(f"{path}: no observations")
    return np.array(out)


def atomic_write(path, text):
    """Write ``text`` to ``path`` via a temporary file and rename.

    A failure part-way leaves no partial file behind.
    """
    path = os.fspath(path)
    d = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(dir=d, prefix=".tmp-", suffix=os.path.basename(path))
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _jsonable(v):
    """JSON-safe value; non-finite floats become the strings nan/inf/-inf."""
    if isinstance(v, np.ndarray):
        v = v.tolist()
    elif isinstance(v, np.generic):
        v = v.item()
    if isinstance(v, (list, tuple)):
        return [_jsonable(x) for x in v]
    if isinstance(v, float) and not math.isfinite(v):
        return repr(v)
    return v


def _unjson(v):
    if isinstance(v, list):
        return [_unjson(x) for x in v]
    if v in ("nan", "inf", "-inf"):
        return float(v)
    return v


@dataclass
class ResultDocument:
    """Schema-versioned container for CLI results.

    Attributes:
        metadata: Run information (command, seeds, versions, timestamp).
        records: Flat dictionaries, one per result row.
    """

    metadata: dict = field(default_factory=dict)
    records: list = field(default_factory=list)
    schema_version: int = SCHEMA_VERSION

    @classmethod
    def new(cls, command, **extra):
        from . import __version__
        from .kernels import BACKEND

        meta = {
            "command": command,
            "package_version": __version__,
            "numpy_version": np.__version__,
            "backend": BACKEND,
            "created": datetime.now(timezone.utc).isoformat(timespec="seconds"),
        }
        meta.update(extra)
        return cls(meta, [])

    def to_json(self):
        doc = {
            "schema_version": self.schema_version,
            "metadata": {k: _jsonable(v) for k, v in self.metadata.items()},
            "records": [{k: _jsonable(v) for k, v in r.items()} for r in self.records],
        }
        return json.dumps(doc, indent=2) + "\n"

    @classmethod
    def from_json(cls, text):
        doc = json.loads(text)
        version = doc.get("schema_version")
        if version != SCHEMA_VERSION:
            raise ValueError(f"unsupported schema_version {version!r}")
        records = [{k: _unjson(v) for k, v in r.items()} for r in doc["records"]]
        return cls(doc["metadata"], records, version)

    def to_csv(self):
        return format_csv(self.records)


def format_csv(records):
    """CSV text with one row per record; columns in first-seen order."""
    cols = []
    for r in records:
        cols.extend(k for k in r if k not in cols)
    buf = io.StringIO()
    w = csv.DictWriter(buf, fieldnames=cols, lineterminator="\n")
    w.writeheader()
    for r in records:
        w.writerow({k: repr(float(v)) if isinstance(v, float) else _jsonable(v) for k, v in r.items()})
    return buf.getvalue()
