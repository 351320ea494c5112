"""Deterministic reports, seed derivation and a deterministic worker pool."""

from __future__ import annotations

import csv
import io
import json
import math
import os
import zlib
from concurrent.futures import ProcessPoolExecutor
from fractions import Fraction
from pathlib import Path
from typing import Any, Callable, Iterable, List, Sequence

import numpy as np

SCHEMA_VERSION = 1


def derive_seed(master: int, *labels) -> int:
    """A 63-bit seed that depends only on ``master`` and the labels."""
    key = tuple(zlib.crc32(str(x).encode()) for x in labels)
    ss = np.random.SeedSequence(entropy=int(master), spawn_key=key)
    return int(ss.generate_state(1, dtype=np.uint64)[0] >> np.uint64(1))


def derive_rng(master: int, *labels) -> np.random.Generator:
    return np.random.default_rng(derive_seed(master, *labels))


def plain(obj: Any) -> Any:
    """JSON-ready copy: fractions become strings, numpy scalars become Python ones."""
    if isinstance(obj, dict):
        return {str(k): plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [plain(v) for v in obj]
    if isinstance(obj, Fraction):
        return str(obj)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (np.floating, float)):
        v = float(obj)
        return v if math.isfinite(v) else str(v)
    if isinstance(obj, np.bool_):
        return bool(obj)
    if isinstance(obj, np.ndarray):
        return plain(obj.tolist())
    return obj


def dumps(report: dict) -> str:
    body = {"schema_version": SCHEMA_VERSION, **plain(report)}
    return json.dumps(body, sort_keys=True, indent=2) + "\n"


def csv_text(table: str, header: Sequence[str], rows: Iterable[Sequence]) -> str:
    """CSV whose first row names the schema version and table."""
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow([f"# schema_version={SCHEMA_VERSION}", f"table={table}"])
    w.writerow(header)
    for row in rows:
        w.writerow([plain(v) for v in row])
    return buf.getvalue()


def read_csv(text: str) -> List[dict]:
    lines = text.splitlines()
    if not lines or not lines[0].startswith("# schema_version="):
        raise ValueError("missing schema header row")
    return list(csv.DictReader(lines[1:]))


def write_text(path, text: str) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(text)
    return path


def default_out_dir() -> Path:
    return Path(os.environ.get("NWLAB_OUT", "."))


def pool_map(fn: Callable, tasks: Sequence, workers: int = 1) -> list:
    """Ordered map; results never depend on ``workers`` when each task carries its seed."""
    if workers <= 1 or len(tasks) <= 1:
        return [fn(t) for t in tasks]
    with ProcessPoolExecutor(max_workers=workers) as ex:
        return list(ex.map(fn, tasks))
