"""CSV and JSON writers that embed run provenance."""

from __future__ import annotations

import csv
import json
import platform
from pathlib import Path

import numpy as np
import scipy

import su11sim


def versions() -> dict:
    return {
        "su11sim": su11sim.__version__,
        "numpy": np.__version__,
        "scipy": scipy.__version__,
        "python": platform.python_version(),
    }


def provenance(cfg, command: str) -> dict:
    """Metadata that identifies a run: no timestamps, so reruns are byte-identical."""
    meta = {
        "tool": "su11sim",
        "version": su11sim.__version__,
        "command": command,
        "config_hash": cfg.config_hash(),
        "engine": cfg.engine,
        "seed": cfg.sampler.seed if cfg.sampler else None,
        "config": cfg.to_dict(),
    }
    return meta


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [_jsonable(v) for v in obj.tolist()]
    if isinstance(obj, (np.floating,)):
        return float(obj)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (np.bool_,)):
        return bool(obj)
    if isinstance(obj, float) and not np.isfinite(obj):
        return str(obj)
    return obj


def _fmt(value) -> str:
    if isinstance(value, (float, np.floating)):
        return repr(float(value))
    return str(value)


def write_csv(path: Path, columns: dict, meta: dict) -> Path:
    """Write equal-length columns, preceded by ``# key: value`` metadata lines."""
    path = Path(path)
    names = list(columns)
    rows = zip(*(list(np.asarray(columns[n]).tolist()) for n in names))
    with open(path, "w", newline="") as fh:
        for key, value in meta.items():
            text = json.dumps(_jsonable(value), sort_keys=True) if isinstance(value, (dict, list, tuple, np.ndarray)) else _fmt(value)
            fh.write(f"# {key}: {text}\n")
        writer = csv.writer(fh)
        writer.writerow(names)
        for row in rows:
            writer.writerow([_fmt(v) for v in row])
    return path


def read_csv(path) -> tuple[dict, dict]:
    """Inverse of :func:`write_csv`: returns ``(metadata, columns)`` with raw string cells."""
    meta, lines = {}, []
    with open(path, newline="") as fh:
        for line in fh:
            if line.startswith("# "):
                key, _, value = line[2:].rstrip("\n").partition(": ")
                meta[key] = value
            else:
                lines.append(line)
    reader = csv.reader(lines)
    header = next(reader)
    cols = {name: [] for name in header}
    for row in reader:
        for name, cell in zip(header, row):
            cols[name].append(cell)
    return meta, cols


def write_json(path: Path, payload: dict, meta: dict) -> Path:
    path = Path(path)
    with open(path, "w") as fh:
        json.dump(_jsonable({"metadata": meta, **payload}), fh, indent=2, sort_keys=True)
        fh.write("\n")
    return path
